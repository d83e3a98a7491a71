//! Test functions with certified sup-norm estimates on the closed disc.
//!
//! Both families are harmonic (polynomials are analytic), so the maximum
//! modulus over the closed disc is attained on the unit circle. Sampling
//! the circle at `S` equispaced angles leaves every angle within `pi / S` of
//! a sample, so adding `pi / S` times a derivative bound keeps the estimate
//! on the safe side.

use num_complex::Complex;

use super::VerifyError;
use crate::scalar::Scalar;

pub const MIN_SUP_SAMPLES: usize = 64;

/// Something that can be integrated against a measure and whose sup norm
/// over the closed unit disc can be bounded.
pub trait TestFunction<T: Scalar>: Sync {
    fn eval(&self, z: Complex<T>) -> Complex<T>;

    /// Upper estimate of `sup_{|z| <= 1} |f(z)|` from `samples` circle points.
    fn sup_norm_estimate(&self, samples: usize) -> Result<T, VerifyError>;

    fn describe(&self) -> String;
}

/// Free-function form of [`TestFunction::sup_norm_estimate`].
pub fn sup_norm_estimate<T: Scalar, F: TestFunction<T> + ?Sized>(
    f: &F,
    samples: usize,
) -> Result<T, VerifyError> {
    f.sup_norm_estimate(samples)
}

fn check_samples(samples: usize) -> Result<(), VerifyError> {
    if samples < MIN_SUP_SAMPLES {
        return Err(VerifyError::TooFewSamples {
            samples,
            minimum: MIN_SUP_SAMPLES,
        });
    }
    Ok(())
}

fn angle<T: Scalar>(m: usize, samples: usize) -> T {
    T::lit(2.0) * T::PI() * T::from_usize_lossy(m) / T::from_usize_lossy(samples)
}

/// Complex polynomial `sum_k c_k z^k`, coefficients in ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial<T> {
    coeffs: Vec<Complex<T>>,
}

impl<T: Scalar> Polynomial<T> {
    pub fn new(coeffs: Vec<Complex<T>>) -> Self {
        Self { coeffs }
    }

    /// `z^k`.
    pub fn monomial(k: usize) -> Self {
        let mut coeffs = vec![Complex::new(T::zero(), T::zero()); k + 1];
        coeffs[k] = Complex::new(T::one(), T::zero());
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Coefficients of `|p(e^{it})|^2 = sum_d a_d e^{idt}` for `d >= 0`.
    fn autocorrelation(&self) -> Vec<Complex<T>> {
        let n = self.coeffs.len();
        (0..n)
            .map(|d| {
                (0..n - d).fold(Complex::new(T::zero(), T::zero()), |acc, k| {
                    acc + self.coeffs[k + d] * self.coeffs[k].conj()
                })
            })
            .collect()
    }
}

impl<T: Scalar> TestFunction<T> for Polynomial<T> {
    fn eval(&self, z: Complex<T>) -> Complex<T> {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex::new(T::zero(), T::zero()), |acc, &c| acc * z + c)
    }

    /// Works with `|p|^2` on the circle, a real trigonometric polynomial
    /// whose derivative is bounded by `sum_{j != k} |j - k| |c_j| |c_k|`.
    /// Monomials have constant modulus, so their estimate is exact.
    fn sup_norm_estimate(&self, samples: usize) -> Result<T, VerifyError> {
        check_samples(samples)?;
        let auto = self.autocorrelation();
        let two = T::lit(2.0);
        let mut max_sq = T::zero();
        for m in 0..samples {
            let t = angle::<T>(m, samples);
            let mut v = auto.first().map_or(T::zero(), |a| a.re);
            for (d, a) in auto.iter().enumerate().skip(1) {
                let phase = t * T::from_usize_lossy(d);
                v = v + two * (a.re * phase.cos() - a.im * phase.sin());
            }
            max_sq = max_sq.max(v);
        }
        let mut deriv = T::zero();
        for (j, cj) in self.coeffs.iter().enumerate() {
            for (k, ck) in self.coeffs.iter().enumerate() {
                if j != k {
                    deriv = deriv + T::from_usize_lossy(j.abs_diff(k)) * cj.norm() * ck.norm();
                }
            }
        }
        let slack = T::PI() * deriv / T::from_usize_lossy(samples);
        Ok((max_sq + slack).max(T::zero()).sqrt())
    }

    fn describe(&self) -> String {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !(c.re == T::zero() && c.im == T::zero()))
            .map(|(k, c)| format!("({}{:+}i)z^{k}", c.re, c.im))
            .collect();
        if terms.is_empty() {
            "0".to_string()
        } else {
            terms.join(" + ")
        }
    }
}

/// Real harmonic function `sum_k a_k Re(z^k) + b_k Im(z^k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicTestFunction<T> {
    re_coeffs: Vec<T>,
    im_coeffs: Vec<T>,
}

impl<T: Scalar> HarmonicTestFunction<T> {
    /// `re_coeffs[k]` multiplies `Re(z^k)`, `im_coeffs[k]` multiplies `Im(z^k)`.
    pub fn new(re_coeffs: Vec<T>, im_coeffs: Vec<T>) -> Self {
        Self {
            re_coeffs,
            im_coeffs,
        }
    }

    pub fn constant(c: T) -> Self {
        Self::new(vec![c], Vec::new())
    }

    /// `Re(z^k)`.
    pub fn re_power(k: usize) -> Self {
        let mut re = vec![T::zero(); k + 1];
        re[k] = T::one();
        Self::new(re, Vec::new())
    }

    /// `Im(z^k)`.
    pub fn im_power(k: usize) -> Self {
        let mut im = vec![T::zero(); k + 1];
        im[k] = T::one();
        Self::new(Vec::new(), im)
    }

    /// `1, Re z, Im z, ..., Re z^k, Im z^k` for `k <= kmax`.
    pub fn basis(kmax: usize) -> Vec<Self> {
        let mut out = vec![Self::re_power(0)];
        for k in 1..=kmax {
            out.push(Self::re_power(k));
            out.push(Self::im_power(k));
        }
        out
    }

    fn max_order(&self) -> usize {
        self.re_coeffs.len().max(self.im_coeffs.len())
    }

    fn coeff(v: &[T], k: usize) -> T {
        v.get(k).copied().unwrap_or(T::zero())
    }

    pub fn eval_real(&self, z: Complex<T>) -> T {
        let mut power = Complex::new(T::one(), T::zero());
        let mut acc = T::zero();
        for k in 0..self.max_order() {
            acc = acc + Self::coeff(&self.re_coeffs, k) * power.re
                + Self::coeff(&self.im_coeffs, k) * power.im;
            power = power * z;
        }
        acc
    }
}

impl<T: Scalar> TestFunction<T> for HarmonicTestFunction<T> {
    fn eval(&self, z: Complex<T>) -> Complex<T> {
        Complex::new(self.eval_real(z), T::zero())
    }

    /// On the circle `f = a_0 + sum_k a_k cos(kt) + b_k sin(kt)`, whose
    /// derivative is at most `sum_k k sqrt(a_k^2 + b_k^2)`.
    fn sup_norm_estimate(&self, samples: usize) -> Result<T, VerifyError> {
        check_samples(samples)?;
        let n = self.max_order();
        let mut max = T::zero();
        for m in 0..samples {
            let t = angle::<T>(m, samples);
            let mut v = Self::coeff(&self.re_coeffs, 0);
            for k in 1..n {
                let phase = t * T::from_usize_lossy(k);
                v = v + Self::coeff(&self.re_coeffs, k) * phase.cos()
                    + Self::coeff(&self.im_coeffs, k) * phase.sin();
            }
            max = max.max(v.abs());
        }
        let deriv = (1..n).fold(T::zero(), |acc, k| {
            let a = Self::coeff(&self.re_coeffs, k);
            let b = Self::coeff(&self.im_coeffs, k);
            acc + T::from_usize_lossy(k) * a.hypot(b)
        });
        Ok(max + T::PI() * deriv / T::from_usize_lossy(samples))
    }

    fn describe(&self) -> String {
        let mut terms = Vec::new();
        for k in 0..self.max_order() {
            let a = Self::coeff(&self.re_coeffs, k);
            let b = Self::coeff(&self.im_coeffs, k);
            if a != T::zero() {
                terms.push(if k == 0 {
                    format!("{a}")
                } else if a == T::one() {
                    format!("Re z^{k}")
                } else {
                    format!("{a}*Re z^{k}")
                });
            }
            if b != T::zero() && k > 0 {
                terms.push(if b == T::one() {
                    format!("Im z^{k}")
                } else {
                    format!("{b}*Im z^{k}")
                });
            }
        }
        if terms.is_empty() {
            "0".to_string()
        } else {
            terms.join(" + ")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::complex;

    #[test]
    fn monomials_are_exactly_one() {
        for k in 0..20 {
            for samples in [64, 100, 257] {
                let s = Polynomial::<f64>::monomial(k).sup_norm_estimate(samples).unwrap();
                assert_eq!(s, 1.0, "k={k} samples={samples}");
            }
        }
    }

    #[test]
    fn re_z_within_inflation() {
        let s = HarmonicTestFunction::<f64>::re_power(1)
            .sup_norm_estimate(64)
            .unwrap();
        assert!(s >= 1.0 && s <= 1.0 + std::f64::consts::PI / 64.0 + 1e-15, "{s}");
    }

    #[test]
    fn z_squared_plus_z() {
        // max |z^2 + z| on the disc is 2 at z = 1; dense sampling agrees.
        let p = Polynomial::new(vec![complex(0.0, 0.0), complex(1.0, 0.0), complex(1.0, 0.0)]);
        let dense = (0..200_000)
            .map(|m| {
                let t = 2.0 * std::f64::consts::PI * m as f64 / 200_000.0;
                p.eval(Complex::from_polar(1.0, t)).norm()
            })
            .fold(0.0f64, f64::max);
        assert!((dense - 2.0).abs() < 1e-9);
        for samples in [64, 1000] {
            let s = p.sup_norm_estimate(samples).unwrap();
            let slack = std::f64::consts::PI * 3.0 / samples as f64;
            assert!(s >= 2.0 && s <= 2.0 * (1.0 + slack), "{s}");
        }
    }

    #[test]
    fn estimates_never_undershoot_dense_sampling() {
        let p = Polynomial::new(vec![
            complex(0.3, -0.2),
            complex(-0.7, 0.1),
            complex(0.0, 0.9),
            complex(0.4, 0.4),
        ]);
        let h = HarmonicTestFunction::new(vec![0.1, -0.5, 0.0, 0.7], vec![0.0, 0.2, -0.9]);
        let dense = |f: &dyn Fn(f64) -> f64| {
            (0..100_000)
                .map(|m| f(2.0 * std::f64::consts::PI * m as f64 / 100_000.0))
                .fold(0.0f64, f64::max)
        };
        let dp = dense(&|t| p.eval(Complex::from_polar(1.0, t)).norm());
        let dh = dense(&|t| h.eval_real(Complex::from_polar(1.0, t)).abs());
        for samples in [64, 128, 4096] {
            assert!(p.sup_norm_estimate(samples).unwrap() >= dp);
            assert!(h.sup_norm_estimate(samples).unwrap() >= dh);
        }
    }

    #[test]
    fn too_few_samples() {
        assert!(matches!(
            Polynomial::<f64>::monomial(2).sup_norm_estimate(10),
            Err(VerifyError::TooFewSamples { .. })
        ));
    }

    #[test]
    fn harmonic_and_polynomial_evaluation_agree() {
        let z = complex::<f64>(0.3, -0.4);
        let z3 = z * z * z;
        assert!((HarmonicTestFunction::re_power(3).eval_real(z) - z3.re).abs() < 1e-15);
        assert!((HarmonicTestFunction::im_power(3).eval_real(z) - z3.im).abs() < 1e-15);
        assert!((Polynomial::monomial(3).eval(z) - z3).norm() < 1e-15);
        assert_eq!(HarmonicTestFunction::<f64>::basis(2).len(), 5);
        assert_eq!(HarmonicTestFunction::<f64>::im_power(2).describe(), "Im z^2");
    }
}
