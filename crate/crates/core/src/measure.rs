//! Truncated Wolff annihilating measure.
//!
//! A packing with discs `D_2, D_3, ...` gives the atomic measure
//! `-pi * delta_0 + sum_n pi r_n^2 * delta_{c_n}`. For any function
//! harmonic near the closed disc, the mean-value property turns
//! `sum_n w_n f(a_n)` into minus the integral of `f` over the uncovered part
//! of the unit disc, so every identity holds at finite stage up to the
//! residual area.

use num_complex::Complex;
use thiserror::Error;

use crate::packing::{Disc, Packing};
use crate::scalar::Scalar;
use crate::summation::{pairwise_sum, CompensatedSum};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeasureError {
    #[error("packing has no discs; the measure would be the single atom -pi at 0")]
    Degenerate,
    #[error("atom list is empty")]
    NoAtoms,
    #[error("leading atom must be (0, -pi), found ({re}, {im}) with weight {weight}")]
    LeadingAtom { re: f64, im: f64, weight: f64 },
    #[error("atom {index}: weight {weight} is not positive")]
    NonPositiveWeight { index: usize, weight: f64 },
    #[error("atom {index}: non-finite value")]
    NonFinite { index: usize },
    #[error("atoms {first} and {second} share the point ({re}, {im})")]
    RepeatedPoint {
        first: usize,
        second: usize,
        re: f64,
        im: f64,
    },
    #[error("residual area {0} is negative or non-finite")]
    BadResidual(f64),
    #[error("atom {index}: weight {found} differs from pi r^2 = {expected} of its disc")]
    WeightMismatch {
        index: usize,
        expected: f64,
        found: f64,
    },
    #[error("atom {index}: point ({re}, {im}) is not the centre of disc {disc}")]
    PointMismatch {
        index: usize,
        disc: usize,
        re: f64,
        im: f64,
    },
    #[error("atom count {atoms} does not match disc count {discs} + 1")]
    CountMismatch { atoms: usize, discs: usize },
    #[error("weights sum to {sum} but the residual area is {residual}")]
    Ledger { sum: f64, residual: f64 },
}

/// Point mass `weight * delta_point`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom<T> {
    pub point: Complex<T>,
    pub weight: T,
}

/// Finite truncation of the Wolff measure.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnihilatingMeasure<T> {
    atoms: Vec<Atom<T>>,
    residual_area: T,
}

/// Builds the truncated measure of `packing`.
pub fn wolff_measure<T: Scalar>(
    packing: &Packing<T>,
) -> Result<AnnihilatingMeasure<T>, MeasureError> {
    AnnihilatingMeasure::from_packing(packing)
}

impl<T: Scalar> AnnihilatingMeasure<T> {
    pub fn from_packing(packing: &Packing<T>) -> Result<Self, MeasureError> {
        if packing.is_empty() {
            return Err(MeasureError::Degenerate);
        }
        let mut atoms = Vec::with_capacity(packing.len() + 1);
        atoms.push(Atom {
            point: Complex::new(T::zero(), T::zero()),
            weight: -T::PI(),
        });
        atoms.extend(packing.discs().iter().map(|d| Atom {
            point: d.center(),
            weight: d.area(),
        }));
        Ok(Self {
            atoms,
            residual_area: packing.residual_area(),
        })
    }

    /// Structural validation only: leading atom, positive finite weights,
    /// distinct points, non-negative residual. The ledger identity is left
    /// to [`check_ledger`](Self::check_ledger) so verification tools can
    /// report a broken identity rather than refuse the input.
    pub fn from_atoms(atoms: Vec<Atom<T>>, residual_area: T) -> Result<Self, MeasureError> {
        let first = atoms.first().ok_or(MeasureError::NoAtoms)?;
        if first.point != Complex::new(T::zero(), T::zero()) || first.weight != -T::PI() {
            return Err(MeasureError::LeadingAtom {
                re: first.point.re.as_f64(),
                im: first.point.im.as_f64(),
                weight: first.weight.as_f64(),
            });
        }
        for (index, a) in atoms.iter().enumerate() {
            if !(a.point.re.is_finite() && a.point.im.is_finite() && a.weight.is_finite()) {
                return Err(MeasureError::NonFinite { index });
            }
            if index > 0 && a.weight <= T::zero() {
                return Err(MeasureError::NonPositiveWeight {
                    index,
                    weight: a.weight.as_f64(),
                });
            }
        }
        if !(residual_area >= T::zero() && residual_area.is_finite()) {
            return Err(MeasureError::BadResidual(residual_area.as_f64()));
        }
        let mut order: Vec<usize> = (0..atoms.len()).collect();
        order.sort_by(|&i, &j| {
            let (a, b) = (atoms[i].point, atoms[j].point);
            a.re.partial_cmp(&b.re)
                .unwrap()
                .then(a.im.partial_cmp(&b.im).unwrap())
                .then(i.cmp(&j))
        });
        for w in order.windows(2) {
            if atoms[w[0]].point == atoms[w[1]].point {
                let p = atoms[w[0]].point;
                return Err(MeasureError::RepeatedPoint {
                    first: w[0].min(w[1]),
                    second: w[0].max(w[1]),
                    re: p.re.as_f64(),
                    im: p.im.as_f64(),
                });
            }
        }
        Ok(Self {
            atoms,
            residual_area,
        })
    }

    pub fn atoms(&self) -> &[Atom<T>] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn residual_area(&self) -> T {
        self.residual_area
    }

    /// First `n` atoms, with the residual of the corresponding packing prefix.
    pub fn prefix(&self, n: usize) -> Self {
        let n = n.clamp(1, self.atoms.len());
        let atoms = self.atoms[..n].to_vec();
        let mut radius_sq = CompensatedSum::new();
        for a in &atoms[1..] {
            radius_sq.accumulate(a.weight / T::PI());
        }
        let residual_area = T::PI() - T::PI() * radius_sq.value();
        Self {
            atoms,
            residual_area,
        }
    }

    pub fn points(&self) -> Vec<Complex<T>> {
        self.atoms.iter().map(|a| a.point).collect()
    }

    pub fn weights(&self) -> Vec<T> {
        self.atoms.iter().map(|a| a.weight).collect()
    }

    pub fn weight_sum(&self) -> T {
        pairwise_sum(&self.weights())
    }

    /// `sum |w_n|`, pairwise compensated.
    pub fn total_variation(&self) -> T {
        let abs: Vec<T> = self.atoms.iter().map(|a| a.weight.abs()).collect();
        pairwise_sum(&abs)
    }

    /// Discs implied by the weights, `r_n = sqrt(w_n / pi)`, for atoms 2..;
    /// not validated.
    pub fn implied_discs(&self) -> Vec<Disc<T>> {
        self.atoms[1..]
            .iter()
            .map(|a| Disc::new_unchecked(a.point, (a.weight / T::PI()).sqrt()))
            .collect()
    }

    /// `|sum w_n + residual| <= tolerance`.
    pub fn check_ledger(&self, tolerance: T) -> Result<(), MeasureError> {
        let sum = self.weight_sum();
        if (sum + self.residual_area).abs() > tolerance {
            return Err(MeasureError::Ledger {
                sum: sum.as_f64(),
                residual: self.residual_area.as_f64(),
            });
        }
        Ok(())
    }

    /// Checks that this measure is exactly the Wolff measure of `packing`:
    /// same points in order, weights equal to `pi r^2` bit for bit.
    pub fn check_against(&self, packing: &Packing<T>) -> Result<(), MeasureError> {
        if self.atoms.len() != packing.len() + 1 {
            return Err(MeasureError::CountMismatch {
                atoms: self.atoms.len(),
                discs: packing.len(),
            });
        }
        for (disc_index, (atom, disc)) in self.atoms[1..].iter().zip(packing.discs()).enumerate() {
            let index = disc_index + 1;
            if atom.point != disc.center() {
                return Err(MeasureError::PointMismatch {
                    index,
                    disc: disc_index,
                    re: atom.point.re.as_f64(),
                    im: atom.point.im.as_f64(),
                });
            }
            if atom.weight != disc.area() {
                return Err(MeasureError::WeightMismatch {
                    index,
                    expected: disc.area().as_f64(),
                    found: atom.weight.as_f64(),
                });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::packing::{pack_greedy, StopRule};
    use crate::scalar::complex;
    use std::f64::consts::PI;

    fn single() -> Packing<f64> {
        Packing::from_discs(0.99, 1e-6, [(complex(0.3, 0.0), 0.2)]).unwrap()
    }

    #[test]
    fn single_disc_atoms() {
        let m = wolff_measure(&single()).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.atoms()[0].point, complex(0.0, 0.0));
        assert_eq!(m.atoms()[0].weight, -PI);
        assert_eq!(m.atoms()[1].point, complex(0.3, 0.0));
        assert!((m.atoms()[1].weight - PI * 0.04).abs() < 1e-16);
        assert!((m.total_variation() - (PI + PI * 0.04)).abs() < 1e-15);
    }

    #[test]
    fn empty_packing_is_degenerate() {
        let p = Packing::<f64>::empty(0.99, 1e-6).unwrap();
        assert_eq!(wolff_measure(&p), Err(MeasureError::Degenerate));
    }

    #[test]
    fn ledger_identities_on_greedy_packing() {
        let p = pack_greedy(StopRule::MaxDiscs(120), 0.99f64, 1e-6).unwrap();
        let m = wolff_measure(&p).unwrap();
        assert_eq!(m.len(), p.len() + 1);
        assert!((m.weight_sum() + m.residual_area()).abs() <= 1e-12);
        assert!((m.total_variation() + m.residual_area() - 2.0 * PI).abs() <= 1e-12);
        m.check_ledger(1e-12).unwrap();
        m.check_against(&p).unwrap();
    }

    #[test]
    fn prefix_matches_packing_prefix() {
        let p = pack_greedy(StopRule::MaxDiscs(30), 0.99f64, 1e-6).unwrap();
        let m = wolff_measure(&p).unwrap();
        let m10 = m.prefix(11);
        let p10 = wolff_measure(&p.prefix(10)).unwrap();
        assert_eq!(m10.atoms(), p10.atoms());
        assert!((m10.residual_area() - p10.residual_area()).abs() < 1e-14);
    }

    #[test]
    fn structural_validation() {
        let good = wolff_measure(&single()).unwrap();
        let mut atoms = good.atoms().to_vec();
        atoms[0].weight = -3.0;
        assert!(matches!(
            AnnihilatingMeasure::from_atoms(atoms, good.residual_area()),
            Err(MeasureError::LeadingAtom { .. })
        ));
        let mut atoms = good.atoms().to_vec();
        atoms[1].point = complex(0.0, 0.0);
        assert!(matches!(
            AnnihilatingMeasure::from_atoms(atoms, good.residual_area()),
            Err(MeasureError::RepeatedPoint { first: 0, second: 1, .. })
        ));
        let mut atoms = good.atoms().to_vec();
        atoms[1].weight = -0.1;
        assert!(matches!(
            AnnihilatingMeasure::from_atoms(atoms, good.residual_area()),
            Err(MeasureError::NonPositiveWeight { index: 1, .. })
        ));
    }

    #[test]
    fn perturbed_weight_breaks_ledger_and_packing_match() {
        let p = single();
        let m = wolff_measure(&p).unwrap();
        let mut atoms = m.atoms().to_vec();
        atoms[1].weight *= 1.01;
        let bad = AnnihilatingMeasure::from_atoms(atoms, m.residual_area()).unwrap();
        assert!(matches!(bad.check_ledger(1e-12), Err(MeasureError::Ledger { .. })));
        assert!(matches!(bad.check_against(&p), Err(MeasureError::WeightMismatch { index: 1, .. })));
    }
}
