use std::f64::consts::E;

use cluster_expansion::polymer::*;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn random_system(rng: &mut impl Rng, n: usize, p: f64) -> PolymerSystem {
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                pairs.push((i, j));
            }
        }
    }
    let act = (0..n)
        .map(|_| Complex64::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)))
        .collect();
    PolymerSystem::new(n, &pairs, act).unwrap()
}

/// Sum over pairwise compatible subsets of `Π ζ`.
fn brute_xi(sys: &PolymerSystem, act: &[Complex64]) -> Complex64 {
    let n = sys.len();
    let mut total = Complex64::new(0.0, 0.0);
    'outer: for mask in 0u32..1 << n {
        let mut w = c(1.0);
        for i in 0..n {
            if mask >> i & 1 == 0 {
                continue;
            }
            for j in i + 1..n {
                if mask >> j & 1 == 1 && sys.incompatible(i, j) {
                    continue 'outer;
                }
            }
            w *= act[i];
        }
        total += w;
    }
    total
}

/// Coefficients in `t` of `Ξ(t ζ)` by brute force, then of its logarithm.
fn log_xi_series(sys: &PolymerSystem, z: &[Complex64], order: usize) -> Vec<Complex64> {
    let n = sys.len();
    let mut a = vec![c(0.0); n + 1];
    'outer: for mask in 0u32..1 << n {
        let mut w = c(1.0);
        for i in 0..n {
            if mask >> i & 1 == 0 {
                continue;
            }
            for j in i + 1..n {
                if mask >> j & 1 == 1 && sys.incompatible(i, j) {
                    continue 'outer;
                }
            }
            w *= z[i];
        }
        a[mask.count_ones() as usize] += w;
    }
    let at = |k: usize| a.get(k).copied().unwrap_or(c(0.0));
    let mut b = vec![c(0.0); order + 1];
    for k in 1..=order {
        let mut s = at(k);
        for j in 1..k {
            s -= b[j] * at(k - j) * (j as f64 / k as f64);
        }
        b[k] = s;
    }
    b
}

#[test]
fn trivial_partition_functions() {
    let one = PolymerSystem::new(1, &[], vec![c(0.3)]).unwrap();
    assert_eq!(partition_function(&one, &[0]).unwrap(), c(1.3));
    let inc = PolymerSystem::new(2, &[(0, 1)], vec![c(0.2), c(0.5)]).unwrap();
    assert!((partition_function(&inc, &[0, 1]).unwrap() - c(1.7)).norm() < 1e-15);
    let comp = PolymerSystem::new(2, &[], vec![c(0.2), c(0.5)]).unwrap();
    assert!((partition_function(&comp, &[0, 1]).unwrap() - c(1.8)).norm() < 1e-15);
    assert_eq!(partition_function(&comp, &[]).unwrap(), c(1.0));
    // A polymer compatible with itself may repeat: Σ z^k/k! = e^z.
    let mut rep = PolymerSystem::new(1, &[], vec![c(0.7)]).unwrap();
    rep.set_self_compatible(0);
    assert!((partition_function(&rep, &[0]).unwrap() - c(0.7f64.exp())).norm() < 1e-14);
}

#[test]
fn partition_function_matches_family_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..40 {
        let n = rng.random_range(1..=14);
        let p = rng.random_range(0.05..0.6);
        let sys = random_system(&mut rng, n, p);
        let all: Vec<usize> = (0..n).collect();
        let got = partition_function(&sys, &all).unwrap();
        let want = brute_xi(&sys, sys.activity());
        assert!((got - want).norm() < 1e-12 * (1.0 + want.norm()));
    }
    let big = PolymerSystem::new(31, &[], vec![c(0.1); 31]).unwrap();
    assert!(partition_function(&big, &(0..31).collect::<Vec<_>>()).is_err());
}

#[test]
fn single_polymer_cluster_series_is_log_one_plus_z() {
    let sys = PolymerSystem::new(1, &[], vec![c(0.3)]).unwrap();
    let p = cluster_log_truncated(&sys, &[0], 3).unwrap();
    let z = 0.3;
    assert!((p.eval(sys.activity()).re - (z - z * z / 2.0 + z * z * z / 3.0)).abs() < 1e-15);
    let p1 = cluster_log_truncated(&sys, &[0], 1).unwrap();
    assert_eq!(p1.terms.len(), 1);
}

#[test]
fn cluster_series_matches_log_of_exact_polynomial() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    // Bonds of a single square plaquette, plus random systems.
    let square = PolymerSystem::from_supports(&[vec![0, 1], vec![1, 2], vec![2, 3], vec![3, 0]], vec![c(0.1); 4]).unwrap();
    let mut systems = vec![square];
    for _ in 0..25 {
        let n = rng.random_range(1..=6);
        let p = rng.random_range(0.2..0.9);
        systems.push(random_system(&mut rng, n, p));
    }
    for sys in &systems {
        let all: Vec<usize> = (0..sys.len()).collect();
        let order = 6;
        let p = cluster_log_truncated(sys, &all, order).unwrap();
        for _ in 0..3 {
            let z: Vec<Complex64> = (0..sys.len())
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let want = log_xi_series(sys, &z, order);
            for (n, w) in want.iter().enumerate().skip(1) {
                let got = p.eval_degree(&z, n);
                assert!((got - w).norm() < 1e-10 * (1.0 + w.norm()), "degree {n}: {got} vs {w}");
            }
        }
    }
}

#[test]
fn pinned_series_single_polymer_is_geometric() {
    let sys = PolymerSystem::new(1, &[], vec![c(0.2)]).unwrap();
    let rho = [0.2];
    assert_eq!(pinned_series(&sys, 0, 0, &rho).unwrap(), 1.0);
    for n in 1..=5 {
        let want: f64 = (0..=n).map(|k| 0.2f64.powi(k)).sum();
        assert!((pinned_series(&sys, 0, n as usize, &rho).unwrap() - want).abs() < 1e-14);
    }
}

#[test]
fn pinned_series_is_derivative_of_log_xi_at_negative_activity() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    for _ in 0..8 {
        let n = rng.random_range(2..=7);
        let sys = random_system(&mut rng, n, 0.5);
        let rho: Vec<f64> = (0..n).map(|_| rng.random_range(0.001..0.01)).collect();
        let all: Vec<usize> = (0..n).collect();
        let f = |r: &[f64]| {
            let mut s = sys.clone();
            s.set_activity(r.iter().map(|&x| c(-x)).collect()).unwrap();
            -partition_function(&s, &all).unwrap().re.ln()
        };
        for g0 in 0..n {
            let h = 1e-6;
            let mut up = rho.clone();
            up[g0] += h;
            let mut dn = rho.clone();
            dn[g0] -= h;
            let deriv = (f(&up) - f(&dn)) / (2.0 * h);
            let series = pinned_series(&sys, g0, 5, &rho).unwrap();
            assert!((series - deriv).abs() < 1e-8, "{series} vs {deriv}");
            let partial: Vec<f64> = (0..=5).map(|k| pinned_series(&sys, g0, k, &rho).unwrap()).collect();
            assert!(partial.windows(2).all(|w| w[1] >= w[0]));
        }
    }
}

#[test]
fn pinned_series_respects_criterion_bound() {
    let sys = domino(4, 0.0).unwrap();
    let mu = 1.0 / 6.0;
    let r = criteria(&sys, &vec![mu; sys.len()]).unwrap()[0].dobrushin;
    let rho = vec![r; sys.len()];
    let v = pinned_series(&sys, 0, 3, &rho).unwrap();
    assert!(r * v <= mu);
}

#[test]
fn fixed_point_examples() {
    let one = PolymerSystem::new(1, &[], vec![c(0.25)]).unwrap();
    let run = fixed_point_iterate(&one, &[0.25], 200, None).unwrap();
    assert!(run.converged && run.monotone);
    assert!((run.values[0] - 1.0 / 3.0).abs() < 1e-14);
    let zero = fixed_point_iterate(&one, &[0.25], 0, None).unwrap();
    assert_eq!(zero.values, vec![0.25]);

    let sys = domino(4, 0.0).unwrap();
    let n = sys.len();
    let ok = fixed_point_iterate(&sys, &vec![0.05; n], 500, None).unwrap();
    assert!(ok.converged && ok.monotone && !ok.diverged);
    // u = ρ(1 + 7u + 9u²) at ρ = 0.05.
    let u = ok.values[0];
    assert!((0.05 * (1.0 + 7.0 * u + 9.0 * u * u) - u).abs() < 1e-14);
    let bad = fixed_point_iterate(&sys, &vec![0.2; n], 500, None).unwrap();
    assert!(bad.diverged && !bad.converged);
}

#[test]
fn fixed_point_stays_below_weights_inside_region() {
    let sys = triangular(4, 0.0).unwrap();
    let mu = 1.0 / 3.0;
    let r = criteria(&sys, &vec![mu; sys.len()]).unwrap()[0].neighborhood;
    let run = fixed_point_iterate(&sys, &vec![r; sys.len()], 2000, Some(&vec![mu; sys.len()])).unwrap();
    assert!(!run.diverged && run.monotone);
    assert!(run.values.iter().all(|&u| u <= mu));
}

#[test]
fn isolated_polymer_radii() {
    let sys = PolymerSystem::new(1, &[], vec![c(0.0)]).unwrap();
    let mu = 0.4;
    let r = criteria(&sys, &[mu]).unwrap()[0];
    assert!((r.kotecky_preiss - mu * (-mu).exp()).abs() < 1e-15);
    assert!((r.dobrushin - mu / (1.0 + mu)).abs() < 1e-15);
    assert!((r.neighborhood - mu / (1.0 + mu)).abs() < 1e-15);
}

#[test]
fn domino_neighbourhood_polynomial_and_thresholds() {
    let sys = domino(5, 0.0).unwrap();
    for mu in [0.1, 0.5, 2.0] {
        for r in criteria(&sys, &vec![mu; sys.len()]).unwrap() {
            assert!((mu / r.neighborhood - (1.0 + 7.0 * mu + 9.0 * mu * mu)).abs() < 1e-12);
        }
    }
    let sig4 = |x: f64, y: f64| (x - y).abs() <= 5e-5 * y;
    let (_, kp) = optimize_constant_mu(&sys, Criterion::KoteckyPreiss).unwrap();
    let (_, dob) = optimize_constant_mu(&sys, Criterion::Dobrushin).unwrap();
    let (m, nb) = optimize_constant_mu(&sys, Criterion::Neighborhood).unwrap();
    assert!(sig4(kp, 1.0 / (7.0 * E)), "{kp}");
    assert!(sig4(dob, (1.0 / 6.0) / (7.0f64 / 6.0).powi(7)), "{dob}");
    assert!(sig4(nb, 1.0 / 13.0), "{nb}");
    assert!((m - 1.0 / 3.0).abs() < 1e-5);
    assert!(domino(3, 0.1).is_err());
}

#[test]
fn triangular_neighbourhood_polynomial() {
    let sys = triangular(6, 0.0).unwrap();
    for x in [0.1, 1.0 / 3.0, 1.5] {
        for r in criteria(&sys, &vec![x; sys.len()]).unwrap() {
            assert!((x / r.neighborhood - (1.0 + 7.0 * x + 9.0 * x * x + 2.0 * x.powi(3))).abs() < 1e-12);
        }
    }
    let at_third = criteria(&sys, &vec![1.0 / 3.0; sys.len()]).unwrap()[0].neighborhood;
    assert!(at_third >= 0.075 && at_third < 0.0757);
    assert!((5f64.powi(5) / 6f64.powi(6) - 0.067).abs() < 5e-4);
    let (c_best, best) = optimize_constant_mu(&sys, Criterion::Neighborhood).unwrap();
    // Optimum solves 4c³ + 9c² - 1 = 0, between 3/10 and 1/3.
    assert!((4.0 * c_best.powi(3) + 9.0 * c_best * c_best - 1.0).abs() < 1e-6);
    assert!(c_best > 0.3 && c_best < 1.0 / 3.0);
    assert!(best >= at_third);
}

#[test]
fn hypercubic_threshold_matches_optimised_criterion() {
    for d in 1..=3 {
        let sys = hypercubic(d, 4, 0.0).unwrap();
        let (_, r) = optimize_constant_mu(&sys, Criterion::Neighborhood).unwrap();
        let want = hypercubic_threshold(d).unwrap();
        assert!((r - want).abs() < 1e-10 * want, "d = {d}: {r} vs {want}");
    }
    assert!((hypercubic_threshold(2).unwrap() - 27.0 / 283.0).abs() < 1e-15);
}

#[test]
fn regular_graph_closed_forms() {
    let t = regular_graph_thresholds(2).unwrap();
    assert!((t.kotecky_preiss - 1.0 / (3.0 * E)).abs() < 1e-15);
    for delta in 2..=8 {
        let t = regular_graph_thresholds(delta).unwrap();
        assert!(t.neighborhood >= t.dobrushin && t.dobrushin >= t.kotecky_preiss);
        let sys = delta_regular(delta, 0.0).unwrap();
        for (which, want) in [
            (Criterion::KoteckyPreiss, t.kotecky_preiss),
            (Criterion::Dobrushin, t.dobrushin),
            (Criterion::Neighborhood, t.neighborhood),
        ] {
            let (_, r) = optimize_constant_mu(&sys, which).unwrap();
            assert!((r - want).abs() < 1e-10 * want, "{delta} {which:?}");
        }
    }
    // Δ = 6 against a plain grid-and-refine maximisation of μ/(μ + (1+μ)^6).
    let f = |m: f64| m / (m + (1.0 + m).powi(6));
    let mut best = (0.0, 0.0);
    for k in 1..100_000 {
        let m = k as f64 * 1e-5;
        if f(m) > best.1 {
            best = (m, f(m));
        }
    }
    let (mut lo, mut hi) = (best.0 - 1e-5, best.0 + 1e-5);
    for _ in 0..200 {
        let (a, b) = (lo + (hi - lo) / 3.0, hi - (hi - lo) / 3.0);
        if f(a) < f(b) {
            lo = a;
        } else {
            hi = b;
        }
    }
    assert!((f(lo) - regular_graph_thresholds(6).unwrap().neighborhood).abs() < 1e-10);
    assert!(regular_graph_thresholds(1).is_err());
}

#[test]
fn subset_gas_singletons_are_tight() {
    let a = 2f64.ln();
    let rho = 1.0 - (-a).exp();
    let gas = SubsetGas::new(1, vec![(1, rho)]).unwrap();
    let rep = subset_gas_check(&gas, a).unwrap();
    assert!((rep.bound.value - a.exp_m1()).abs() < 1e-15);
    assert!(rep.bound.satisfied);
    assert!((rep.induction.worst - a).abs() < 1e-14);
    assert!(rep.induction.holds);

    let empty = SubsetGas::new(6, vec![]).unwrap();
    let rep = subset_gas_check(&empty, a).unwrap();
    assert_eq!(rep.bound.value, 0.0);
    assert_eq!(rep.induction.worst, 0.0);
}

#[test]
fn subset_gas_induction_on_random_systems() {
    let mut rng = ChaCha8Rng::seed_from_u64(314);
    let a = 2f64.ln();
    let mut passing = 0;
    for _ in 0..60 {
        let v = rng.random_range(3..=10);
        let gas = SubsetGas::random(v, 3, 0.15, 0.12, &mut rng).unwrap();
        let rep = subset_gas_check(&gas, a).unwrap();
        if rep.bound.satisfied {
            passing += 1;
            assert!(rep.induction.holds && rep.induction.zero_crossing.is_none());
            assert!(rep.induction.min_xi > 0.0);
            assert_eq!(rep.induction.checks, (v as u64) << (v - 1));
        }
    }
    assert!(passing >= 20, "{passing}");
}

#[test]
fn subset_gas_recursion_matches_polymer_partition_function() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..10 {
        let gas = SubsetGas::random(6, 3, 0.3, 0.5, &mut rng).unwrap();
        let xi = gas.xi_all(-1.0);
        let mut sys = gas.to_system();
        sys.set_activity(sys.activity().iter().map(|z| -z).collect()).unwrap();
        let all: Vec<usize> = (0..sys.len()).collect();
        let want = partition_function(&sys, &all).unwrap();
        assert!((xi[63] - want.re).abs() < 1e-12);
    }
}

#[test]
fn subset_gas_zero_crossing_is_reported() {
    let gas = SubsetGas::all_subsets(4, 2, 0.6).unwrap();
    let rep = subset_gas_check(&gas, 2f64.ln()).unwrap();
    assert!(!rep.bound.satisfied);
    assert!(rep.induction.zero_crossing.is_some() && !rep.induction.holds);
}

#[test]
fn catalog_examples() {
    let r = bounds_catalog("spinbound", &[("beta", 0.05), ("c", 1.0), ("J", 1.0)]).unwrap();
    assert!((r.value - 0.058).abs() < 0.001 && r.satisfied);
    assert!(spinbound_root() > 0.058);
    assert!((spinunb_root() - (E - 1.0) / (4.0 * E * E)).abs() < 1e-15);
    let beg = bounds_catalog("beg", &[("d", 3.0), ("X", 10.0), ("Y", 1.0), ("beta", 3.0)]).unwrap();
    assert!((beg.value - (3.0 * 2f64.powi(13)).ln() / 4.0).abs() < 1e-14);
    assert!(beg.satisfied);
    assert!(bounds_catalog("beg", &[("d", 3.0), ("X", 6.0), ("Y", 1.0), ("beta", 3.0)]).is_err());
    assert!(bounds_catalog("nonsense", &[]).is_err());
    assert!(bounds_catalog("spinbound", &[("beta", 0.05)]).is_err());
    // βJ = 4e-5 satisfies the Ising condition in two and three dimensions.
    for d in [2.0, 3.0] {
        assert!(bounds_catalog("ising-co", &[("beta", 4e-5), ("J", 1.0), ("d", d)]).unwrap().satisfied);
    }
    let root = ising_co_root(2);
    assert!((root.cbrt() / root.ln().abs() - 1.0 / 96.0).abs() < 1e-12);
    for name in CATALOG {
        let _ = bounds_catalog(name, &[]).unwrap_err();
    }
}

#[test]
fn polymer_condition_improves_direct_lattice_gas() {
    for bj in [0.01, 0.1, 0.5] {
        let direct_max = 1.0 / ((bj / 2.0 + 1.0f64).exp() * (1.0 + bj));
        let poly_max = 1.0 / (bj * (1.0 + (1.0 + 4.0 / (E * bj)).sqrt())) / (bj / 2.0 + 1.0f64).exp();
        assert!(poly_max > direct_max);
        let lam = 0.5 * (direct_max + poly_max);
        assert!(!bounds_catalog("lattice-gas-direct", &[("lambda", lam), ("beta", bj), ("J", 1.0)]).unwrap().satisfied);
        assert!(bounds_catalog("lattice-gas-polymer", &[("lambda", lam), ("beta", bj), ("J", 1.0)]).unwrap().satisfied);
    }
    let nb = bounds_catalog("n-body", &[("z", 0.1), ("beta", 0.1), ("J", 1.0)]).unwrap();
    assert!(nb.satisfied);
    let co = bounds_catalog("co", &[("K", 0.5), ("sigma_bar", 0.1)]).unwrap();
    assert!(co.satisfied);
    // With σ = √σ̄ and a = |ln σ|, the refined condition follows from K < |ln σ̄|/4.
    let s = 0.1f64.sqrt();
    assert!(bounds_catalog("co-refined", &[("K", 0.5), ("sigma", s), ("a", s.ln().abs())]).unwrap().satisfied);
    assert!(bounds_catalog("israel", &[("I", 0.01), ("I_bar", 0.5), ("a", 1.0)]).unwrap().satisfied);
}

#[test]
fn text_format_round_trip() {
    let text = "# bonds\na 0.1 b\nb 0.2,-0.1 c\nc -0.3\nselfcompatible c\n";
    let sys: PolymerSystem = text.parse().unwrap();
    assert!(sys.incompatible(0, 1) && sys.incompatible(1, 0) && !sys.incompatible(0, 2));
    assert!(!sys.is_self_incompatible(2));
    let again: PolymerSystem = sys.to_string().parse().unwrap();
    assert_eq!(sys, again);
    assert!("a 0.1 z".parse::<PolymerSystem>().is_err());
    assert!("a".parse::<PolymerSystem>().is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn criterion_radii_are_ordered(seed in any::<u64>(), n in 1usize..14, p in 0.0f64..1.0, mu in 0.01f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sys = random_system(&mut rng, n, p);
        let w: Vec<f64> = (0..n).map(|_| mu * rng.random_range(0.5..1.5)).collect();
        for r in criteria(&sys, &w).unwrap() {
            prop_assert!(r.neighborhood >= r.dobrushin * (1.0 - 1e-12));
            prop_assert!(r.dobrushin >= r.kotecky_preiss * (1.0 - 1e-12));
        }
    }

    #[test]
    fn fixed_point_monotone_and_bounded(seed in any::<u64>(), n in 1usize..10, p in 0.0f64..1.0, mu in 0.05f64..1.0, frac in 0.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sys = random_system(&mut rng, n, p);
        let radii = criteria(&sys, &vec![mu; n]).unwrap();
        let rho: Vec<f64> = radii.iter().map(|r| frac * r.neighborhood).collect();
        let run = fixed_point_iterate(&sys, &rho, 300, Some(&vec![mu; n])).unwrap();
        prop_assert!(run.monotone && !run.diverged);
        prop_assert!(run.values.iter().all(|&u| u <= mu * (1.0 + 1e-12)));
    }
}
