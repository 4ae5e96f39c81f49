use super::*;

#[test]
fn duffing_internal_force_hand_value() {
    // ω0=1, ε=1, k3=0.5: F(2) = 1·2 + 0.5·2³ = 6
    let sys = make_duffing(1.0_f64, 0.05, 0.5, 1.0, 1.0).unwrap();
    let f = sys
        .eval_internal_force(&nalgebra::DVector::from_element(1, 2.0))
        .unwrap();
    assert!((f[0] - 6.0).abs() < 1e-14);
}

#[test]
fn beam_first_eigenfrequency_matches_reference() {
    let mg = MaterialGeometry {
        length: 1000e-6_f64,
        width: 24e-6,
        thickness: 10e-6,
        density: 2330.0,
        young_modulus: 167e9,
        poisson: 0.22,
        quality_factor: 50.0,
    };
    let sys = make_vk_beam(64, &mg, 1).unwrap();
    let modes = eigen_analysis(&sys, 5).unwrap();
    for (i, (f, _)) in modes.iter().enumerate() {
        eprintln!("mode {}: {:.3} kHz", i + 1, f / 1e3);
    }
    let f1 = modes[0].0;
    assert!((f1 - 87_141.0).abs() / 87_141.0 < 0.01, "f1 = {f1}");
}
