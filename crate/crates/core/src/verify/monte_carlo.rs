//! Rejection-sampling estimate of the integral of `f` over the part of the
//! unit disc left uncovered by a set of discs.
//!
//! Samples are drawn in fixed chunks; chunk `c` uses its own ChaCha stream
//! of the seeded generator. Chunks are evaluated in parallel and combined in
//! index order, so the result depends only on the seed and sample count.

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, UnitDisc};
use rayon::prelude::*;

use super::{TestFunction, VerifyError};
use crate::packing::Disc;
use crate::scalar::Scalar;
use crate::summation::CompensatedSum;

pub const MC_CHUNK: usize = 8192;
pub const MIN_MC_SAMPLES: usize = 10_000;
const MIN_ACCEPTANCE: f64 = 1e-3;

/// Uniform grid over `[-1,1]^2`; each cell lists the discs whose bounding
/// box meets it.
#[derive(Debug, Clone)]
pub struct DiscIndex<T> {
    discs: Vec<Disc<T>>,
    side: usize,
    cells: Vec<Vec<u32>>,
}

impl<T: Scalar> DiscIndex<T> {
    pub fn new(discs: &[Disc<T>]) -> Self {
        let side = ((discs.len() as f64).sqrt() * 2.0).ceil().clamp(8.0, 512.0) as usize;
        let mut cells = vec![Vec::new(); side * side];
        let index = Self {
            discs: discs.to_vec(),
            side,
            cells: Vec::new(),
        };
        for (i, d) in discs.iter().enumerate() {
            let c = d.center();
            let r = d.radius();
            let (x0, y0) = index.cell_of(c.re - r, c.im - r);
            let (x1, y1) = index.cell_of(c.re + r, c.im + r);
            for y in y0..=y1 {
                for x in x0..=x1 {
                    cells[y * side + x].push(i as u32);
                }
            }
        }
        Self { cells, ..index }
    }

    fn cell_of(&self, x: T, y: T) -> (usize, usize) {
        let scale = T::from_usize_lossy(self.side) / T::lit(2.0);
        let max = (self.side - 1) as f64;
        let to = |v: T| ((v + T::one()) * scale).as_f64().floor().clamp(0.0, max) as usize;
        (to(x), to(y))
    }

    /// Whether `z` lies in some (closed) indexed disc.
    pub fn covered(&self, z: Complex<T>) -> bool {
        let (x, y) = self.cell_of(z.re, z.im);
        self.cells[y * self.side + x]
            .iter()
            .any(|&i| self.discs[i as usize].contains(z))
    }

    /// Linear scan; same answer as [`covered`](Self::covered).
    pub fn covered_naive(&self, z: Complex<T>) -> bool {
        self.discs.iter().any(|d| d.contains(z))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate<T> {
    /// Estimate of the integral of `f` over the residual set.
    pub estimate: Complex<T>,
    pub stderr: T,
    pub samples: usize,
    pub accepted: usize,
}

struct ChunkSums<T> {
    re: CompensatedSum<T>,
    im: CompensatedSum<T>,
    sq: CompensatedSum<T>,
    accepted: usize,
}

fn sample_chunk<T: Scalar, F: TestFunction<T> + ?Sized>(
    index: &DiscIndex<T>,
    f: &F,
    seed: u64,
    chunk: usize,
    count: usize,
) -> ChunkSums<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    let mut sums = ChunkSums {
        re: CompensatedSum::new(),
        im: CompensatedSum::new(),
        sq: CompensatedSum::new(),
        accepted: 0,
    };
    for _ in 0..count {
        let [x, y]: [f64; 2] = UnitDisc.sample(&mut rng);
        let z = Complex::new(T::lit(x), T::lit(y));
        if index.covered(z) {
            continue;
        }
        let v = f.eval(z);
        sums.re.accumulate(v.re);
        sums.im.accumulate(v.im);
        sums.sq.accumulate(v.norm_sqr());
        sums.accepted += 1;
    }
    sums
}

/// `pi * mean(f * 1_residual)` over `samples` uniform points of the disc,
/// with standard error `pi * sqrt(var / samples)`.
pub fn mc_residual_integral<T: Scalar, F: TestFunction<T> + ?Sized>(
    discs: &[Disc<T>],
    f: &F,
    samples: usize,
    seed: u64,
) -> Result<McEstimate<T>, VerifyError> {
    if samples < MIN_MC_SAMPLES {
        return Err(VerifyError::TooFewSamples {
            samples,
            minimum: MIN_MC_SAMPLES,
        });
    }
    let index = DiscIndex::new(discs);
    let chunks = samples.div_ceil(MC_CHUNK);
    let parts: Vec<ChunkSums<T>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let count = MC_CHUNK.min(samples - c * MC_CHUNK);
            sample_chunk(&index, f, seed, c, count)
        })
        .collect();
    let mut re = CompensatedSum::new();
    let mut im = CompensatedSum::new();
    let mut sq = CompensatedSum::new();
    let mut accepted = 0;
    for p in parts {
        re.accumulate(p.re.value());
        im.accumulate(p.im.value());
        sq.accumulate(p.sq.value());
        accepted += p.accepted;
    }
    let rate = accepted as f64 / samples as f64;
    if rate < MIN_ACCEPTANCE {
        return Err(VerifyError::LowAcceptance {
            rate,
            minimum: MIN_ACCEPTANCE,
        });
    }
    let n = T::from_usize_lossy(samples);
    let mean = Complex::new(re.value() / n, im.value() / n);
    let var = (sq.value() / n - mean.norm_sqr()).max(T::zero());
    Ok(McEstimate {
        estimate: mean * T::PI(),
        stderr: T::PI() * (var / n).sqrt(),
        samples,
        accepted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::packing::{pack_greedy, StopRule};
    use crate::scalar::complex;
    use crate::verify::HarmonicTestFunction;
    use std::f64::consts::PI;

    #[test]
    fn index_agrees_with_linear_scan() {
        let p = pack_greedy(StopRule::MaxDiscs(300), 0.99, 1e-6).unwrap();
        let index = DiscIndex::new(p.discs());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100_000 {
            let [x, y]: [f64; 2] = UnitDisc.sample(&mut rng);
            let z = complex(x, y);
            assert_eq!(index.covered(z), index.covered_naive(z), "{z}");
        }
        for d in p.discs().iter().take(50) {
            assert!(index.covered(d.center()));
        }
    }

    #[test]
    fn single_disc_area_estimate() {
        let d = [Disc::new(complex(0.0, 0.5), 0.49).unwrap()];
        let one = HarmonicTestFunction::<f64>::constant(1.0);
        let est = mc_residual_integral(&d, &one, 400_000, 9).unwrap();
        assert!((est.estimate.re - (1.0 - 0.49 * 0.49) * PI).abs() < 4.0 * est.stderr);
        assert!(est.stderr > 0.0 && est.stderr < 0.01);
    }

    #[test]
    fn deterministic_and_chunk_independent_of_threads() {
        let d = [Disc::new(complex(0.1, -0.2), 0.4).unwrap()];
        let f = HarmonicTestFunction::<f64>::re_power(1);
        let a = mc_residual_integral(&d, &f, 50_000, 1).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| mc_residual_integral(&d, &f, 50_000, 1).unwrap());
        assert_eq!(a, b);
        let c = mc_residual_integral(&d, &f, 50_000, 2).unwrap();
        assert_ne!(a.estimate, c.estimate);
    }

    #[test]
    fn rejects_bad_inputs() {
        let f = HarmonicTestFunction::<f64>::constant(1.0);
        assert!(matches!(
            mc_residual_integral(&[], &f, 100, 0),
            Err(VerifyError::TooFewSamples { .. })
        ));
        let full = [Disc::new(complex(0.0, 1e-9), 0.99999).unwrap()];
        assert!(matches!(
            mc_residual_integral(&full, &f, 20_000, 0),
            Err(VerifyError::LowAcceptance { .. })
        ));
    }
}
