//! Independent checks of the approximate-annihilator search: exhaustive
//! grids over the weight sphere for tiny problems, random feasible weights,
//! and the Wolff weights as a feasible point.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wolff_core::independence::{l1_norm, max_moment, min_l1_annihilator, IndependenceProblem};
use wolff_core::{pack_greedy, wolff_measure, Complex, StopRule};

fn c(re: f64, im: f64) -> Complex<f64> {
    Complex::new(re, im)
}

/// Minimum over `|l_1| + ... + |l_n| = 1` on a polar grid; the first phase is
/// fixed at zero since a global phase does not change the objective.
fn grid_minimum(points: &[Complex<f64>], k: usize, radial: usize, angular: usize) -> f64 {
    let n = points.len();
    let mut best = f64::INFINITY;
    let mut w = vec![c(0.0, 0.0); n];
    let mut moduli = vec![0.0; n];
    let mut search = |moduli: &[f64]| {
        let combos = angular.pow((n - 1) as u32);
        for code in 0..combos {
            let mut rest = code;
            w[0] = c(moduli[0], 0.0);
            for j in 1..n {
                let phase = TAU * (rest % angular) as f64 / angular as f64;
                rest /= angular;
                w[j] = Complex::from_polar(moduli[j], phase);
            }
            best = best.min(max_moment(points, &w, k));
        }
    };
    match n {
        2 => {
            for i in 0..=radial {
                let t = i as f64 / radial as f64;
                moduli[0] = t;
                moduli[1] = 1.0 - t;
                search(&moduli);
            }
        }
        3 => {
            for i in 0..=radial {
                for j in 0..=radial - i {
                    moduli[0] = i as f64 / radial as f64;
                    moduli[1] = j as f64 / radial as f64;
                    moduli[2] = 1.0 - moduli[0] - moduli[1];
                    search(&moduli);
                }
            }
        }
        _ => unreachable!(),
    }
    best
}

#[test]
fn matches_dense_grid_on_tiny_problems() {
    let cases: Vec<(Vec<Complex<f64>>, usize)> = vec![
        (vec![c(0.0, 0.0), c(0.5, 0.0)], 1),
        (vec![c(0.3, 0.0), c(0.0, -0.5)], 1),
        (vec![c(0.3, 0.0), c(0.0, -0.5)], 2),
        (vec![c(0.2, 0.1), c(-0.4, 0.0), c(0.0, 0.6)], 1),
        (vec![c(0.2, 0.1), c(-0.4, 0.0), c(0.0, 0.6)], 2),
        (vec![c(0.9, 0.0), c(-0.7, 0.3), c(0.1, -0.8)], 2),
    ];
    for (points, k) in cases {
        let cert = min_l1_annihilator(&IndependenceProblem::new(points.clone(), k).unwrap()).unwrap();
        let (radial, angular) = if points.len() == 2 { (2000, 360) } else { (60, 72) };
        let grid = grid_minimum(&points, k, radial, angular);
        // The search must never lose to the grid, and the grid, whose
        // nearest node is within about one cell of the optimum, must come close.
        assert!(cert.optimal_value <= grid + 1e-9, "{points:?} K={k}: {} > grid {grid}", cert.optimal_value);
        let cell = 3.0 / radial as f64 + std::f64::consts::PI / angular as f64;
        assert!(grid <= cert.optimal_value + cell, "{points:?} K={k}: grid {grid}");
    }
}

#[test]
fn two_point_example_against_real_ratio_grid() {
    // Real weights (t - 1, t): objective max(|2t - 1|, t/2).
    let grid = (0..=1_000_000)
        .map(|i| {
            let t = i as f64 / 1e6;
            (2.0 * t - 1.0).abs().max(t / 2.0)
        })
        .fold(f64::INFINITY, f64::min);
    assert!((grid - 0.2).abs() < 1e-6);
    let cert = min_l1_annihilator(&IndependenceProblem::new(vec![c(0.0, 0.0), c(0.5, 0.0)], 1).unwrap()).unwrap();
    assert!((cert.optimal_value - grid).abs() <= 0.01 * grid);
}

#[test]
fn random_feasible_weights_never_beat_the_minimiser() {
    let problem = IndependenceProblem::segment(7, 9).unwrap();
    let cert = min_l1_annihilator(&problem).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let best = cert.weights();
    for trial in 0..1000 {
        let mut w: Vec<Complex<f64>> = if trial % 2 == 0 {
            (0..7).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()
        } else {
            // Perturbations of the minimiser probe local optimality.
            let scale = 10f64.powf(-rng.random_range(2.0..8.0));
            best.iter()
                .map(|b| b + c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * scale)
                .collect()
        };
        let norm = l1_norm(&w);
        w.iter_mut().for_each(|x| *x /= norm);
        let value = max_moment(problem.points(), &w, 9);
        // Polygon linearisation costs up to 1 - cos(pi/32) in the objective.
        assert!(value >= cert.optimal_value * (1.0 - 0.005), "trial {trial}: {value} < {}", cert.optimal_value);
    }
}

#[test]
fn wolff_weights_are_feasible_and_bounded() {
    let p = pack_greedy(StopRule::MaxDiscs(200), 0.99, 1e-6).unwrap();
    let m = wolff_measure(&p).unwrap().prefix(50);
    let tv = m.total_variation();
    let w: Vec<Complex<f64>> = m.weights().iter().map(|&x| c(x / tv, 0.0)).collect();
    let feasible = max_moment(&m.points(), &w, 20);
    assert!(feasible <= m.residual_area() / tv + 1e-12);
    let cert = min_l1_annihilator(&IndependenceProblem::new(m.points(), 20).unwrap()).unwrap();
    assert!(cert.optimal_value <= feasible);
    assert!((l1_norm(&cert.weights()) - 1.0).abs() <= 1e-9);
}
