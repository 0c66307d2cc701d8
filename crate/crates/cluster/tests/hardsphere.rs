use std::f64::consts::PI;

use cluster_expansion::hardsphere::*;
use cluster_expansion::numeric::integrate;
use proptest::prelude::*;

/// `P(|X - Y| > 1)` for `X, Y` uniform in the unit disc, from the density
/// `2r·A(r)/π` of the distance, `A(r)` the lens area of two unit discs.
fn disc_pair_oracle() -> f64 {
    let lens = |r: f64| 2.0 * (r / 2.0).acos() - r / 2.0 * (4.0 - r * r).sqrt();
    integrate(|r| 2.0 * r * lens(r) / PI, 1.0, 2.0, &[], 1e-14).unwrap()
}

#[test]
fn ball_volumes() {
    assert!((sphere_volume(2, 1.0) - PI).abs() < 1e-15);
    assert!((sphere_volume(3, 1.0) - 4.0 * PI / 3.0).abs() < 1e-15);
    assert!((sphere_volume(4, 2.0) - PI * PI / 2.0 * 16.0).abs() < 1e-12);
    assert!((sphere_volume(1, 3.0) - 6.0).abs() < 1e-15);
}

#[test]
fn disc_pair_closed_form() {
    let g = gtilde(2, 2, 0, 1).unwrap();
    assert!(g.exact);
    assert!((g.estimate - 3.0 * 3f64.sqrt() / (4.0 * PI)).abs() < 1e-12);
    assert!((g.estimate - disc_pair_oracle()).abs() < 1e-12);
    assert!((g.estimate - 0.413497).abs() < 1e-6);
    for d in 1..=3 {
        assert_eq!(gtilde(d, 0, 0, 0).unwrap().estimate, 1.0);
        assert_eq!(gtilde(d, 1, 0, 0).unwrap().estimate, 1.0);
    }
    assert!(gtilde(4, 2, 10, 0).is_err());
}

#[test]
fn disc_pair_monte_carlo() {
    let mc = gtilde_mc(2, 2, 1_000_000, 7).unwrap();
    assert!((mc.estimate - g2_two()).abs() < 3.0 * mc.std_error);
    assert_eq!(mc, gtilde_mc(2, 2, 1_000_000, 7).unwrap());
}

#[test]
fn disc_triple_and_quadruple() {
    let g3 = gtilde(2, 3, 1_000_000, 11).unwrap();
    assert!((g3.estimate - 0.0589).abs() < 0.002, "{}", g3.estimate);
    let g4 = gtilde(2, 4, 1_000_000, 13).unwrap();
    assert!((g4.estimate - 0.0013).abs() < 4.0 * g4.std_error + 1e-4, "{}", g4.estimate);
    let g5 = gtilde(2, 5, 1_000_000, 17).unwrap();
    assert!(g5.estimate <= 1e-4 + 3.0 * g5.std_error);
}

#[test]
fn six_points_never_fit() {
    assert_eq!(gtilde_mc(2, 6, 10_000_000, 3).unwrap().hits, 0);
    assert_eq!(gtilde_mc(1, 3, 1_000_000, 3).unwrap().hits, 0);
}

#[test]
fn overlap_nonincreasing_in_k() {
    for d in 1..=3 {
        let est: Vec<_> = (0..5).map(|k| gtilde(d, k, 200_000, 5).unwrap()).collect();
        for w in est.windows(2) {
            assert!(w[1].estimate <= w[0].estimate + 3.0 * (w[0].std_error + w[1].std_error));
        }
    }
}

#[test]
fn cd_polynomial_basics() {
    let t = disc_table();
    assert_eq!(cd_polynomial(2, 0.0, &t).unwrap(), 1.0);
    let h = 1e-7;
    let slope = (cd_polynomial(2, h, &t).unwrap() - 1.0) / h;
    assert!((slope - 1.0).abs() < 1e-6);
    assert!(cd_polynomial(2, 1.0, &t[..4]).is_err());
    assert!(cd_polynomial(1, 1.0, &[1.0, 1.0, 0.25]).is_ok());
}

#[test]
fn improved_disc_coefficient() {
    let t = disc_table();
    let mu = disc_reference_mu();
    let at_reference = mu / cd_polynomial(2, mu, &t).unwrap();
    assert!((at_reference - 0.5107).abs() < 5e-4, "{at_reference}");
    let r = improved_radius(&t).unwrap();
    assert!(r.coefficient >= 0.5107);
    assert!(r.coefficient >= at_reference);
    assert!((r.classical - (-1.0f64).exp()).abs() < 1e-16);
    assert!((0.5107 / r.classical - 1.39).abs() < 5e-3);
    // Frozen optimiser output.
    assert!((r.mu_star - 2.0123).abs() < 1e-3, "{}", r.mu_star);
    assert!((r.coefficient - 0.51198).abs() < 1e-4, "{}", r.coefficient);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn improved_dominates_classical(scale in 0.0f64..1.0) {
        let mut t = disc_table();
        for g in t.iter_mut().skip(2) {
            *g *= scale;
        }
        prop_assert!(improved_radius(&t).unwrap().coefficient >= (-1.0f64).exp());
    }

    #[test]
    fn monte_carlo_is_reproducible(seed in 0u64..1000, k in 2usize..4) {
        let a = gtilde_mc(2, k, 5_000, seed).unwrap();
        let b = gtilde_mc(2, k, 5_000, seed).unwrap();
        prop_assert_eq!(a.hits, b.hits);
        prop_assert!((0.0..=1.0).contains(&a.estimate));
    }
}
