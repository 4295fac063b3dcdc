mod common;

use common::{max_diff, random_scalar, random_tangent, wobbly_circle, wobbly_torus};
use proptest::prelude::*;
use volpres_core::families::{circle, trig_field, TrigMode};
use volpres_core::sobolev::{apply_l, apply_psi, inner_product_gl, invert_l, psi_symbol_probe};
use volpres_core::{build_geometry, Density, ScalarField, SobolevOrder, TangentField};

fn order(l: u32) -> SobolevOrder {
    SobolevOrder::new(l).unwrap()
}

/// Fourier multiplier of `Ψ` at mode `k` on the unit circle:
/// `−½[a(k+1) + a(k−1)]` with `a(m) = m²/(1+m²)^l`, from `B cos kθ` and
/// the exact action of `L⁻¹` on `cos((k±1)θ)`.
fn circle_psi_multiplier(k: f64, l: i32) -> f64 {
    let a = |m: f64| m * m / (1.0 + m * m).powi(l);
    -0.5 * (a(k + 1.0) + a(k - 1.0))
}

#[test]
fn order_is_capped() {
    assert!(SobolevOrder::new(8).is_ok());
    assert!(SobolevOrder::new(9).is_err());
}

#[test]
fn apply_l_is_identity_for_order_zero_and_a_multiplier_on_the_circle() {
    let f = circle(64, 1.0).unwrap();
    let cache = build_geometry(&f, &Density::Induced).unwrap();
    let h = random_tangent(f.grid(), 2, 5, 1);
    assert_eq!(apply_l(&cache, &h, order(0)).unwrap(), h);
    for l in 1..=3 {
        for k in [1i64, 4, 9] {
            let modes = [
                TrigMode { comp: 0, k: [k, 0], amp: 1.0, phase: 0.3 },
                TrigMode { comp: 1, k: [k, 0], amp: -0.5, phase: 1.1 },
            ];
            let h = trig_field(f.grid(), 2, &modes);
            let lh = apply_l(&cache, &h, order(l)).unwrap();
            let m = (1.0 + (k * k) as f64).powi(l as i32);
            // roundoff in the highest modes is amplified by (N/2)^{2l}
            let tol = 1e-11 * m + 1e-15 * 32f64.powi(2 * l as i32);
            let err = lh.sub(&h.scale(m)).max_norm();
            assert!(err < tol, "l={l} k={k}: {err}");
            let back = invert_l(&cache, &h, order(l), 1e-12).unwrap().0;
            assert!(back.sub(&h.scale(1.0 / m)).max_norm() < 1e-13);
        }
    }
}

#[test]
fn invert_l_round_trips_on_surfaces() {
    let f = wobbly_torus(16, 0.05, 4);
    let cache = build_geometry(&f, &Density::Induced).unwrap();
    let k = random_tangent(f.grid(), 3, 3, 5);
    for l in 1..=2 {
        let h = apply_l(&cache, &k, order(l)).unwrap();
        let (back, stats) = invert_l(&cache, &h, order(l), 1e-12).unwrap();
        assert!(stats.relative_residual <= 1e-12);
        assert!(back.sub(&k).max_norm() < 1e-8, "l={l}: {}", back.sub(&k).max_norm());
    }
    let c = TangentField { comps: vec![vec![2.0; 256], vec![-1.0; 256], vec![0.5; 256]] };
    let (back, _) = invert_l(&cache, &c, order(1), 1e-12).unwrap();
    assert!(back.sub(&c).max_norm() < 1e-10);
}

#[test]
fn l_is_selfadjoint_and_bounded_below() {
    let f = wobbly_torus(16, 0.05, 6);
    let cache = build_geometry(&f, &Density::Induced).unwrap();
    let h = random_tangent(f.grid(), 3, 4, 7);
    let k = random_tangent(f.grid(), 3, 4, 8);
    for l in 0..=3 {
        let a = cache.inner_l2(&apply_l(&cache, &h, order(l)).unwrap(), &k);
        let b = cache.inner_l2(&h, &apply_l(&cache, &k, order(l)).unwrap());
        assert!((a - b).abs() <= 1e-10 * a.abs().max(b.abs()), "l={l}");
        let ghk = inner_product_gl(&cache, &h, &k, order(l)).unwrap();
        let gkh = inner_product_gl(&cache, &k, &h, order(l)).unwrap();
        assert!((ghk - gkh).abs() <= 1e-12 * ghk.abs().max(1.0));
        let ghh = inner_product_gl(&cache, &h, &h, order(l)).unwrap();
        assert!(ghh >= cache.inner_l2(&h, &h) * (1.0 - 1e-12));
    }
    let l2 = inner_product_gl(&cache, &h, &k, order(0)).unwrap();
    assert_eq!(l2, cache.inner_l2(&h, &k));
}

#[test]
fn psi_on_the_circle() {
    let f = circle(64, 1.0).unwrap();
    let cache = build_geometry(&f, &Density::Induced).unwrap();
    // l = 0: Ψ p = p'' − p
    let p = random_scalar(f.grid(), 6, 9);
    let (q, _) = apply_psi(&cache, &p, order(0), 1e-12).unwrap();
    let expected: Vec<f64> = cache.laplace_beltrami(&p).0.iter().zip(&p.0).map(|(a, b)| a - b).collect();
    assert!(max_diff(&q.0, &expected) < 1e-10);

    let m0 = psi_symbol_probe(&cache, order(0), 16, 1e-12).unwrap();
    assert!((m0 / -257.0 - 1.0).abs() < 0.01, "{m0}");
    for l in 0..=3 {
        for k in [1usize, 5, 16, 30] {
            let m = psi_symbol_probe(&cache, order(l), k, 1e-12).unwrap();
            let exact = circle_psi_multiplier(k as f64, l as i32);
            assert!((m / exact - 1.0).abs() < 1e-8, "l={l} k={k}: {m} vs {exact}");
        }
    }
    let m1 = psi_symbol_probe(&cache, order(1), 30, 1e-12).unwrap();
    assert!((m1 + 1.0).abs() < 0.01, "{m1}");
}

#[test]
fn psi_symbol_follows_the_order_law() {
    // |multiplier| ~ g^{1−l}(k) = k^{2−2l}; ratio test at k = N/4.
    let n = 128;
    let f = circle(n, 1.0).unwrap();
    let cache = build_geometry(&f, &Density::Induced).unwrap();
    let k = n / 4;
    for l in 0..=3 {
        let m = psi_symbol_probe(&cache, order(l), k, 1e-12).unwrap();
        let law = (k as f64).powi(2 - 2 * l as i32);
        assert!((m.abs() / law - 1.0).abs() < 0.05, "l={l}: {m} vs {law}");
        let m2 = psi_symbol_probe(&cache, order(l), k / 2, 1e-12).unwrap();
        let ratio = (m / m2).log2();
        assert!((ratio - (2.0 - 2.0 * l as f64)).abs() < 0.1, "l={l}: slope {ratio}");
    }
    let m = psi_symbol_probe(&cache, order(2), 16, 1e-12).unwrap();
    assert!((m.abs() * 256.0 - 1.0).abs() < 0.05, "{m}");
}

#[test]
fn symbol_probe_rejects_bad_modes_and_bases() {
    let cache = build_geometry(&circle(32, 1.0).unwrap(), &Density::Induced).unwrap();
    assert!(psi_symbol_probe(&cache, order(1), 0, 1e-12).is_err());
    assert!(psi_symbol_probe(&cache, order(1), 16, 1e-12).is_err());
    let wobbly = build_geometry(&wobbly_circle(32, 0.1, 1), &Density::Induced).unwrap();
    assert!(psi_symbol_probe(&wobbly, order(1), 4, 1e-12).is_err());
}

fn psi_factorisation_defect(cache: &volpres_core::GeometryCache, p: &ScalarField, l: u32) -> f64 {
    let (direct, _) = apply_psi(cache, p, order(l), 1e-13).unwrap();
    let (y, _) = invert_l(cache, &cache.constraint_adjoint(p), order(l), 1e-13).unwrap();
    let composed = cache.trace_form(&y).unwrap();
    max_diff(&direct.0, &composed.0) / direct.max_abs()
}

#[test]
fn psi_equals_constraint_after_inverse_metric_after_generator() {
    // The composed path uses the trace form of the constraint, an independent
    // discretisation that agrees to spectral accuracy.
    let f = wobbly_circle(64, 0.1, 3);
    let cache = build_geometry(&f, &Density::Induced).unwrap();
    let p = random_scalar(f.grid(), 4, 10);
    for l in 0..=2 {
        let d = psi_factorisation_defect(&cache, &p, l);
        assert!(d < 1e-8, "l={l}: {d}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn psi_is_selfadjoint_and_negative(seed in 0u64..1000, l in 0u32..3, surface in any::<bool>()) {
        let f = if surface { wobbly_torus(16, 0.05, seed) } else { wobbly_circle(64, 0.1, seed) };
        let cache = build_geometry(&f, &Density::Induced).unwrap();
        let p = random_scalar(f.grid(), 4, seed + 1);
        let q = random_scalar(f.grid(), 4, seed + 2);
        let (pp, _) = apply_psi(&cache, &p, order(l), 1e-13).unwrap();
        let (qq, _) = apply_psi(&cache, &q, order(l), 1e-13).unwrap();
        let a = cache.inner_scalar(&pp, &q);
        let b = cache.inner_scalar(&p, &qq);
        prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1e-300));
        prop_assert!(cache.inner_scalar(&pp, &p) < 0.0);
    }
}
