//! Numerical checks of the annihilation identities of a truncated measure.
//!
//! For `f` harmonic near the closed disc, `|sum_n w_n f(a_n)|` is at most
//! `residual * sup |f|`. Every check reports the observed deviation next to
//! the bound it has to respect; a check passes when
//! `deviation <= bound * (1 + 1e-9) + 1e-12`.

mod blaschke;
mod monte_carlo;
mod testfn;

pub use blaschke::{dominating_check, Blaschke, DominatingResult};
pub use monte_carlo::{mc_residual_integral, DiscIndex, McEstimate, MC_CHUNK, MIN_MC_SAMPLES};
pub use testfn::{sup_norm_estimate, HarmonicTestFunction, Polynomial, TestFunction, MIN_SUP_SAMPLES};

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::io::real17;
use crate::measure::AnnihilatingMeasure;
use crate::scalar::Scalar;
use crate::summation::pairwise_sum_complex;

/// Relative and absolute slack of the pass rule.
pub const REL_SLACK: f64 = 1e-9;
pub const ABS_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error("{samples} samples requested, at least {minimum} required")]
    TooFewSamples { samples: usize, minimum: usize },
    #[error("Cauchy kernel point ({re}, {im}) must lie outside the closed unit disc")]
    CauchyInside { re: f64, im: f64 },
    #[error("Blaschke zero {index} at ({re}, {im}) is not inside the open unit disc")]
    ZeroOutsideDisc { index: usize, re: f64, im: f64 },
    #[error("at least one trial is required")]
    NoTrials,
    #[error("Monte-Carlo acceptance rate {rate} is below {minimum}; residual region too small to sample")]
    LowAcceptance { rate: f64, minimum: f64 },
    #[error("non-finite value while evaluating {0}")]
    NonFinite(String),
}

/// Pass rule shared by every check.
pub fn passes(deviation: f64, bound: f64) -> bool {
    deviation <= bound * (1.0 + REL_SLACK) + ABS_SLACK
}

/// A sum together with the bound the identity says it must respect.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation<V, B> {
    pub value: V,
    pub bound: B,
}

/// Complex point in reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    #[serde(with = "real17")]
    pub re: f64,
    #[serde(with = "real17")]
    pub im: f64,
}

impl From<Complex<f64>> for Point {
    fn from(z: Complex<f64>) -> Self {
        Self { re: z.re, im: z.im }
    }
}

/// Which identity a report is about.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Identity {
    /// `sum w_n a_n^k` against `residual`.
    Moment { k: u32 },
    /// `sum w_n = -residual`, checked to rounding level.
    MomentAnchor,
    /// `sum |w_n| + residual = 2 pi`, checked to rounding level.
    VariationAnchor,
    Exponential { z: Point },
    Cauchy { z: Point },
    Harmonic { function: String },
    FunctionalNorm {
        degree: usize,
        trials: usize,
        seed: u64,
        worst_trial: usize,
    },
    /// Measure sum against minus a Monte-Carlo integral over the residual set.
    MonteCarlo {
        function: String,
        samples: usize,
        seed: u64,
        estimate: Point,
        #[serde(with = "real17")]
        stderr: f64,
    },
    /// `sup_n |B(a_n)|` for a finite Blaschke product, against `sup |B| = 1`.
    Dominating {
        zeros: Vec<Point>,
        #[serde(with = "real17")]
        boundary_defect: f64,
    },
}

impl Identity {
    /// Short name used in summaries.
    pub fn label(&self) -> String {
        match self {
            Identity::Moment { k } => format!("moment[k={k}]"),
            Identity::MomentAnchor => "moment_anchor".to_string(),
            Identity::VariationAnchor => "variation_anchor".to_string(),
            Identity::Exponential { z } => format!("exp[z={}{:+}i]", z.re, z.im),
            Identity::Cauchy { z } => format!("cauchy[z={}{:+}i]", z.re, z.im),
            Identity::Harmonic { function } => format!("harmonic[{function}]"),
            Identity::FunctionalNorm { degree, .. } => format!("functional_norm[degree={degree}]"),
            Identity::MonteCarlo { function, .. } => format!("monte_carlo[{function}]"),
            Identity::Dominating { zeros, .. } => format!("dominating[{} zeros]", zeros.len()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub identity: Identity,
    /// Number of atoms summed, including the one at the origin.
    pub truncation: usize,
    #[serde(with = "real17")]
    pub deviation: f64,
    #[serde(with = "real17")]
    pub bound: f64,
    pub pass: bool,
}

impl VerificationReport {
    pub fn new(identity: Identity, truncation: usize, deviation: f64, bound: f64) -> Self {
        Self {
            identity,
            truncation,
            deviation,
            bound,
            pass: passes(deviation, bound),
        }
    }

    /// `deviation / bound`; infinite for a violated zero bound.
    pub fn ratio(&self) -> f64 {
        if self.bound > 0.0 {
            self.deviation / self.bound
        } else if self.deviation == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

fn weighted_sum<T: Scalar>(
    measure: &AnnihilatingMeasure<T>,
    f: impl Fn(Complex<T>) -> Complex<T>,
) -> Complex<T> {
    let terms: Vec<Complex<T>> = measure
        .atoms()
        .iter()
        .map(|a| f(a.point) * a.weight)
        .collect();
    pairwise_sum_complex(&terms)
}

/// `sum_n w_n a_n^k`, bounded by the residual area.
pub fn moment_sum<T: Scalar>(measure: &AnnihilatingMeasure<T>, k: u32) -> Evaluation<Complex<T>, T> {
    Evaluation {
        value: weighted_sum(measure, |z| z.powu(k)),
        bound: measure.residual_area(),
    }
}

/// `sum_n w_n exp(z a_n)`, bounded by `residual * e^|z|`.
pub fn exp_sum<T: Scalar>(
    measure: &AnnihilatingMeasure<T>,
    z: Complex<T>,
) -> Evaluation<Complex<T>, T> {
    Evaluation {
        value: weighted_sum(measure, |a| (z * a).exp()),
        bound: measure.residual_area() * z.norm().exp(),
    }
}

/// `sum_n w_n / (z - a_n)` for `|z| > 1`, bounded by `residual / (|z| - 1)`.
pub fn cauchy_sum<T: Scalar>(
    measure: &AnnihilatingMeasure<T>,
    z: Complex<T>,
) -> Result<Evaluation<Complex<T>, T>, VerifyError> {
    let modulus = z.norm();
    if !(modulus > T::one()) || !modulus.is_finite() {
        return Err(VerifyError::CauchyInside {
            re: z.re.as_f64(),
            im: z.im.as_f64(),
        });
    }
    let one = Complex::new(T::one(), T::zero());
    Ok(Evaluation {
        value: weighted_sum(measure, |a| one / (z - a)),
        bound: measure.residual_area() / (modulus - T::one()),
    })
}

/// `sum_n w_n f(a_n)` for a real harmonic `f`, bounded by
/// `residual * sup |f|` with the sup estimated from `samples` circle points.
pub fn harmonic_sum<T: Scalar>(
    measure: &AnnihilatingMeasure<T>,
    f: &HarmonicTestFunction<T>,
    samples: usize,
) -> Result<Evaluation<T, T>, VerifyError> {
    let sup = f.sup_norm_estimate(samples)?;
    Ok(Evaluation {
        value: weighted_sum(measure, |z| f.eval(z)).re,
        bound: measure.residual_area() * sup,
    })
}

/// Sum of an arbitrary test function, with its certified bound.
pub fn test_function_sum<T: Scalar, F: TestFunction<T> + ?Sized>(
    measure: &AnnihilatingMeasure<T>,
    f: &F,
    samples: usize,
) -> Result<Evaluation<Complex<T>, T>, VerifyError> {
    let sup = f.sup_norm_estimate(samples)?;
    Ok(Evaluation {
        value: weighted_sum(measure, |z| f.eval(z)),
        bound: measure.residual_area() * sup,
    })
}

/// Polynomial of the given degree with coefficients uniform in `[0,1)^2`.
pub fn random_polynomial<T: Scalar, R: Rng>(rng: &mut R, degree: usize) -> Polynomial<T> {
    let coeffs = (0..=degree)
        .map(|_| {
            let re: f64 = rng.random();
            let im: f64 = rng.random();
            Complex::new(T::lit(re), T::lit(im))
        })
        .collect();
    Polynomial::new(coeffs)
}

/// Outcome of [`functional_norm_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalNormResult<T> {
    /// `|sum w_n p(a_n)| / (residual * sup |p|)` per trial.
    pub ratios: Vec<T>,
    pub worst_trial: usize,
    pub worst_deviation: T,
    pub worst_bound: T,
}

/// Draws `trials` random polynomials from `seed` and compares each measure
/// sum with `residual * sup |p|`.
pub fn functional_norm_check<T: Scalar>(
    measure: &AnnihilatingMeasure<T>,
    degree: usize,
    trials: usize,
    seed: u64,
    samples: usize,
) -> Result<FunctionalNormResult<T>, VerifyError> {
    if trials == 0 {
        return Err(VerifyError::NoTrials);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut result = FunctionalNormResult {
        ratios: Vec::with_capacity(trials),
        worst_trial: 0,
        worst_deviation: T::zero(),
        worst_bound: T::zero(),
    };
    let mut worst = T::neg_infinity();
    for trial in 0..trials {
        let p = random_polynomial::<T, _>(&mut rng, degree);
        let eval = test_function_sum(measure, &p, samples)?;
        let deviation = eval.value.norm();
        let ratio = if eval.bound > T::zero() {
            deviation / eval.bound
        } else if deviation == T::zero() {
            T::zero()
        } else {
            T::infinity()
        };
        if ratio.is_nan() {
            return Err(VerifyError::NonFinite(format!("functional norm trial {trial}")));
        }
        if ratio > worst {
            worst = ratio;
            result.worst_trial = trial;
            result.worst_deviation = deviation;
            result.worst_bound = eval.bound;
        }
        result.ratios.push(ratio);
    }
    Ok(result)
}

/// `|sum w_n + residual|`, zero up to rounding for a consistent measure.
pub fn moment_anchor<T: Scalar>(measure: &AnnihilatingMeasure<T>) -> T {
    (measure.weight_sum() + measure.residual_area()).abs()
}

/// `|sum |w_n| + residual - 2 pi|`.
pub fn variation_anchor<T: Scalar>(measure: &AnnihilatingMeasure<T>) -> T {
    (measure.total_variation() + measure.residual_area() - T::lit(2.0) * T::PI()).abs()
}

/// The 3x3 grid `{-a, 0, a}^2` with `a = radius / sqrt 2`.
pub fn exp_grid(radius: f64) -> Vec<Complex<f64>> {
    let a = radius / std::f64::consts::SQRT_2;
    let axis = [-a, 0.0, a];
    let mut out = Vec::with_capacity(9);
    for &im in &axis {
        for &re in &axis {
            out.push(Complex::new(re, im));
        }
    }
    out
}

/// Which checks [`run_suite`] performs.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    /// Moments and harmonic basis functions up to this order.
    pub kmax: u32,
    /// Radius of the exponential 3x3 grid; `None` skips it.
    pub exp_radius: Option<f64>,
    pub cauchy: Vec<Complex<f64>>,
    pub degree: usize,
    pub trials: usize,
    pub seed: u64,
    /// Monte-Carlo samples; `None` skips the oracle.
    pub mc_samples: Option<usize>,
    /// Blaschke zeros; `None` skips the dominating diagnostic.
    pub blaschke_zeros: Option<Vec<Complex<f64>>>,
    pub sup_samples: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            kmax: 10,
            exp_radius: Some(1.0),
            cauchy: vec![Complex::new(1.5, 0.0), Complex::new(2.0, 0.0), Complex::new(10.0, 0.0)],
            degree: 8,
            trials: 16,
            seed: 0,
            mc_samples: None,
            blaschke_zeros: None,
            sup_samples: 4096,
        }
    }
}

fn lift<T: Scalar>(z: Complex<f64>) -> Complex<T> {
    Complex::new(T::lit(z.re), T::lit(z.im))
}

fn lower<T: Scalar>(z: Complex<T>) -> Complex<f64> {
    Complex::new(z.re.as_f64(), z.im.as_f64())
}

/// Runs every configured check and returns one report per identity.
pub fn run_suite<T: Scalar>(
    measure: &AnnihilatingMeasure<T>,
    config: &SuiteConfig,
) -> Result<Vec<VerificationReport>, VerifyError> {
    let n = measure.len();
    let mut out = vec![
        VerificationReport::new(Identity::MomentAnchor, n, moment_anchor(measure).as_f64(), 0.0),
        VerificationReport::new(Identity::VariationAnchor, n, variation_anchor(measure).as_f64(), 0.0),
    ];
    for k in 0..=config.kmax {
        let e = moment_sum(measure, k);
        out.push(VerificationReport::new(
            Identity::Moment { k },
            n,
            e.value.norm().as_f64(),
            e.bound.as_f64(),
        ));
    }
    for f in HarmonicTestFunction::<T>::basis(config.kmax as usize) {
        let e = harmonic_sum(measure, &f, config.sup_samples)?;
        out.push(VerificationReport::new(
            Identity::Harmonic { function: f.describe() },
            n,
            e.value.abs().as_f64(),
            e.bound.as_f64(),
        ));
    }
    if let Some(radius) = config.exp_radius {
        for z in exp_grid(radius) {
            let e = exp_sum(measure, lift::<T>(z));
            out.push(VerificationReport::new(
                Identity::Exponential { z: z.into() },
                n,
                e.value.norm().as_f64(),
                e.bound.as_f64(),
            ));
        }
    }
    for &z in &config.cauchy {
        let e = cauchy_sum(measure, lift::<T>(z))?;
        out.push(VerificationReport::new(
            Identity::Cauchy { z: z.into() },
            n,
            e.value.norm().as_f64(),
            e.bound.as_f64(),
        ));
    }
    if config.trials > 0 {
        let r = functional_norm_check(measure, config.degree, config.trials, config.seed, config.sup_samples)?;
        out.push(VerificationReport::new(
            Identity::FunctionalNorm {
                degree: config.degree,
                trials: config.trials,
                seed: config.seed,
                worst_trial: r.worst_trial,
            },
            n,
            r.worst_deviation.as_f64(),
            r.worst_bound.as_f64(),
        ));
    }
    if let Some(samples) = config.mc_samples {
        let discs = measure.implied_discs();
        let functions = [HarmonicTestFunction::<T>::constant(T::one()), HarmonicTestFunction::re_power(1)];
        for f in &functions {
            let est = mc_residual_integral(&discs, f, samples, config.seed)?;
            let sum = weighted_sum(measure, |z| f.eval(z));
            let deviation = (sum + est.estimate).norm().as_f64();
            out.push(VerificationReport::new(
                Identity::MonteCarlo {
                    function: f.describe(),
                    samples,
                    seed: config.seed,
                    estimate: lower(est.estimate).into(),
                    stderr: est.stderr.as_f64(),
                },
                n,
                deviation,
                4.0 * est.stderr.as_f64(),
            ));
        }
    }
    if let Some(zeros) = &config.blaschke_zeros {
        let zeros_t: Vec<Complex<T>> = zeros.iter().map(|&z| lift(z)).collect();
        let r = dominating_check(measure, &zeros_t, config.sup_samples)?;
        out.push(VerificationReport::new(
            Identity::Dominating {
                zeros: zeros.iter().map(|&z| z.into()).collect(),
                boundary_defect: r.boundary_defect.as_f64(),
            },
            n,
            r.ratio.as_f64(),
            1.0,
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{wolff_measure, Atom};
    use crate::packing::{pack_greedy, Packing, StopRule};
    use crate::scalar::complex;
    use std::f64::consts::PI;

    fn greedy(n: usize) -> AnnihilatingMeasure<f64> {
        wolff_measure(&pack_greedy(StopRule::MaxDiscs(n), 0.99, 1e-6).unwrap()).unwrap()
    }

    #[test]
    fn single_disc_moments_by_hand() {
        // One disc of radius 1/2 at 1/4: sum = -pi * 0^k + (pi/4) (1/4)^k.
        let p = Packing::from_discs(0.99, 1e-6, [(complex(0.25, 0.0), 0.5)]).unwrap();
        let m = wolff_measure(&p).unwrap();
        for k in 1..6u32 {
            let e = moment_sum(&m, k);
            let expected = PI / 4.0 * 0.25f64.powi(k as i32);
            assert!((e.value.re - expected).abs() < 1e-15);
            assert!(e.value.norm() <= e.bound);
        }
        assert!((moment_sum(&m, 0).value.re + 0.75 * PI).abs() < 1e-15);
    }

    #[test]
    fn bounds_hold_on_greedy_measure() {
        let m = greedy(150);
        let reports = run_suite(
            &m,
            &SuiteConfig {
                kmax: 8,
                mc_samples: Some(200_000),
                blaschke_zeros: Some(vec![complex(0.2, 0.1)]),
                ..SuiteConfig::default()
            },
        )
        .unwrap();
        for r in &reports {
            assert!(r.pass, "{} {} > {}", r.identity.label(), r.deviation, r.bound);
        }
        assert!(reports.iter().any(|r| matches!(r.identity, Identity::MonteCarlo { .. })));
    }

    #[test]
    fn cauchy_rejects_inside_points() {
        let m = greedy(5);
        assert!(matches!(
            cauchy_sum(&m, complex(0.5, 0.5)),
            Err(VerifyError::CauchyInside { .. })
        ));
        assert!(cauchy_sum(&m, complex(1.0, 0.0)).is_err());
        assert!(cauchy_sum(&m, complex(0.0, 4.0)).is_ok());
    }

    #[test]
    fn constant_polynomial_has_unit_ratio() {
        let m = greedy(40);
        let r = functional_norm_check(&m, 0, 6, 11, 256).unwrap();
        for ratio in r.ratios {
            assert!((ratio - 1.0).abs() < 1e-9, "{ratio}");
        }
    }

    #[test]
    fn functional_norm_is_seeded() {
        let m = greedy(40);
        let a = functional_norm_check(&m, 5, 8, 3, 512).unwrap();
        let b = functional_norm_check(&m, 5, 8, 3, 512).unwrap();
        assert_eq!(a, b);
        assert!(a.ratios.iter().all(|&r| r <= 1.0 + 1e-9));
        assert_eq!(functional_norm_check(&m, 5, 0, 3, 512), Err(VerifyError::NoTrials));
    }

    #[test]
    fn broken_weight_fails_the_anchor() {
        let m = greedy(20);
        let mut atoms: Vec<Atom<f64>> = m.atoms().to_vec();
        atoms[1].weight *= 1.01;
        let bad = AnnihilatingMeasure::from_atoms(atoms, m.residual_area()).unwrap();
        let reports = run_suite(&bad, &SuiteConfig { trials: 0, ..SuiteConfig::default() }).unwrap();
        let anchor = reports.iter().find(|r| r.identity == Identity::MomentAnchor).unwrap();
        assert!(!anchor.pass);
        assert!(anchor.deviation > 1e-6);
    }

    #[test]
    fn exp_grid_shape() {
        let g = exp_grid(2.0);
        assert_eq!(g.len(), 9);
        assert!(g.iter().all(|z| z.norm() <= 2.0 + 1e-15));
        assert_eq!(g[4], complex(0.0, 0.0));
    }

    #[test]
    fn pass_rule() {
        assert!(passes(1.0, 1.0));
        assert!(passes(1e-12, 0.0));
        assert!(!passes(1.0 + 1e-6, 1.0));
        assert!(!passes(2e-12, 0.0));
    }
}
