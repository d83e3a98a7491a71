//! The whole pipeline instantiated at `f32`.

use wolff_core::io::{packing_from_json, packing_to_json};
use wolff_core::verify::{moment_sum, moment_anchor, variation_anchor};
use wolff_core::{pack_greedy, wolff_measure, Packing32, StopRule};

#[test]
fn f32_packing_measure_and_identities() {
    let p: Packing32 = pack_greedy(StopRule::MaxDiscs(60), 0.99f32, 1e-4).unwrap();
    assert_eq!(p.len(), 60);
    let series = p.residual_series();
    assert!(series.windows(2).all(|w| w[1].1 < w[0].1));

    let m = wolff_measure(&p).unwrap();
    let eps = 1e-5f32;
    assert!(moment_anchor(&m) <= eps);
    assert!(variation_anchor(&m) <= eps);
    for k in 1..8 {
        let e = moment_sum(&m, k);
        assert!(e.value.norm() <= e.bound * (1.0 + 1e-3) + eps, "k={k}");
    }

    let text = packing_to_json(&p);
    let back: Packing32 = packing_from_json(&text, "mem").unwrap();
    assert_eq!(back, p);
}

#[test]
fn f32_and_f64_agree_on_the_first_disc() {
    let a = pack_greedy(StopRule::MaxDiscs(1), 0.9f32, 1e-4).unwrap();
    let b = pack_greedy(StopRule::MaxDiscs(1), 0.9f64, 1e-4).unwrap();
    assert!((a.discs()[0].radius() as f64 - b.discs()[0].radius()).abs() < 1e-6);
}
