//! Finite Blaschke products as a probe of how far the atoms spread towards
//! the boundary. `|B| = 1` on the circle and `|B| < 1` inside, so
//! `sup_n |B(a_n)|` close to 1 means the atoms approach the unit circle
//! away from the zeros of `B`.

use num_complex::Complex;

use super::{VerifyError, MIN_SUP_SAMPLES};
use crate::measure::AnnihilatingMeasure;
use crate::scalar::Scalar;

/// `B(z) = prod_j (z - a_j) / (1 - conj(a_j) z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Blaschke<T> {
    zeros: Vec<Complex<T>>,
}

impl<T: Scalar> Blaschke<T> {
    pub fn new(zeros: &[Complex<T>]) -> Result<Self, VerifyError> {
        for (index, a) in zeros.iter().enumerate() {
            if !(a.norm() < T::one()) {
                return Err(VerifyError::ZeroOutsideDisc {
                    index,
                    re: a.re.as_f64(),
                    im: a.im.as_f64(),
                });
            }
        }
        Ok(Self {
            zeros: zeros.to_vec(),
        })
    }

    pub fn eval(&self, z: Complex<T>) -> Complex<T> {
        let one = Complex::new(T::one(), T::zero());
        self.zeros
            .iter()
            .fold(one, |acc, &a| acc * (z - a) / (one - a.conj() * z))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DominatingResult<T> {
    /// `sup |B(a_n)|` over the atoms after the one at the origin.
    pub ratio: T,
    /// Index into the atom list where the sup is attained.
    pub argmax: usize,
    /// `max |1 - |B||` over the sampled circle; rounding level for a sane product.
    pub boundary_defect: T,
}

pub fn dominating_check<T: Scalar>(
    measure: &AnnihilatingMeasure<T>,
    zeros: &[Complex<T>],
    boundary_samples: usize,
) -> Result<DominatingResult<T>, VerifyError> {
    if boundary_samples < MIN_SUP_SAMPLES {
        return Err(VerifyError::TooFewSamples {
            samples: boundary_samples,
            minimum: MIN_SUP_SAMPLES,
        });
    }
    let b = Blaschke::new(zeros)?;
    let mut result = DominatingResult {
        ratio: T::zero(),
        argmax: 0,
        boundary_defect: T::zero(),
    };
    for (n, atom) in measure.atoms().iter().enumerate().skip(1) {
        let v = b.eval(atom.point).norm();
        if v > result.ratio {
            result.ratio = v;
            result.argmax = n;
        }
    }
    for m in 0..boundary_samples {
        let t = T::lit(2.0) * T::PI() * T::from_usize_lossy(m) / T::from_usize_lossy(boundary_samples);
        let defect = (T::one() - b.eval(Complex::from_polar(T::one(), t)).norm()).abs();
        result.boundary_defect = result.boundary_defect.max(defect);
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::wolff_measure;
    use crate::packing::Packing;
    use crate::scalar::complex;

    fn two_discs() -> AnnihilatingMeasure<f64> {
        let p = Packing::from_discs(
            0.99,
            1e-6,
            [(complex(0.99, 0.0), 0.005), (complex(-0.5, 0.0), 0.2)],
        )
        .unwrap();
        wolff_measure(&p).unwrap()
    }

    #[test]
    fn no_zeros_gives_one() {
        let r = dominating_check(&two_discs(), &[], 64).unwrap();
        assert_eq!(r.ratio, 1.0);
        assert_eq!(r.boundary_defect, 0.0);
    }

    #[test]
    fn single_zero_sees_the_boundary_atom() {
        let r = dominating_check(&two_discs(), &[complex(0.0, 0.0)], 64).unwrap();
        assert!(r.ratio >= 0.99, "{}", r.ratio);
        assert_eq!(r.argmax, 1);
        let r = dominating_check(&two_discs(), &[complex(-0.3, 0.1)], 256).unwrap();
        assert!(r.ratio >= 0.99 && r.ratio < 1.0);
        assert!(r.boundary_defect < 1e-14);
    }

    #[test]
    fn rejects_zero_on_circle() {
        assert!(matches!(
            dominating_check(&two_discs(), &[complex(1.0, 0.0)], 64),
            Err(VerifyError::ZeroOutsideDisc { index: 0, .. })
        ));
    }
}
