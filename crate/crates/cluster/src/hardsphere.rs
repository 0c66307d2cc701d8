//! Ball volumes, Monte Carlo estimates of the hard-sphere overlap
//! integrals `g̃_d(k)` (probability that `k` uniform points in the unit
//! `d`-ball are pairwise more than 1 apart), and the improved convergence
//! radius coefficient in two dimensions.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::numeric::golden_max;

/// `Γ(k/2)` for integer `k ≥ 1`.
pub fn gamma_half(k: usize) -> f64 {
    assert!(k >= 1);
    let (mut g, mut x) = if k % 2 == 0 { (1.0, 1.0) } else { (PI.sqrt(), 0.5) };
    while 2.0 * x < k as f64 {
        g *= x;
        x += 1.0;
    }
    g
}

/// Volume `π^{n/2} R^n / Γ(n/2 + 1)` of the `n`-ball.
pub fn sphere_volume(n: usize, r: f64) -> f64 {
    PI.powf(n as f64 / 2.0) / gamma_half(n + 2) * r.powi(n as i32)
}

/// `3√3/(4π)`, the probability that two uniform points in the unit disc
/// are more than 1 apart.
pub fn g2_two() -> f64 {
    3.0 * 3f64.sqrt() / (4.0 * PI)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OverlapEstimate {
    pub d: usize,
    pub k: usize,
    pub estimate: f64,
    pub std_error: f64,
    pub samples: u64,
    pub hits: u64,
    pub seed: u64,
    /// Value is a closed form, not a sample mean.
    pub exact: bool,
}

/// Sample batches, each drawing from its own stream; fixed so results do
/// not depend on the thread count.
pub const BATCHES: u64 = 64;

/// `g̃_d(k)`: closed form for `k ≤ 1` and for `d = 2, k = 2`, Monte Carlo
/// otherwise.
pub fn gtilde(d: usize, k: usize, samples: u64, seed: u64) -> Result<OverlapEstimate> {
    check_dim(d)?;
    let exact = match (d, k) {
        (_, 0) | (_, 1) => Some(1.0),
        (2, 2) => Some(g2_two()),
        _ => None,
    };
    match exact {
        Some(v) => Ok(OverlapEstimate {
            d,
            k,
            estimate: v,
            std_error: 0.0,
            samples: 0,
            hits: 0,
            seed,
            exact: true,
        }),
        None => gtilde_mc(d, k, samples, seed),
    }
}

fn check_dim(d: usize) -> Result<()> {
    if !(1..=3).contains(&d) {
        return Err(invalid(format!("dimension must be 1, 2 or 3, got {d}")));
    }
    Ok(())
}

/// Monte Carlo estimate regardless of closed forms; reproducible bit for bit
/// per `(d, k, samples, seed)`.
pub fn gtilde_mc(d: usize, k: usize, samples: u64, seed: u64) -> Result<OverlapEstimate> {
    check_dim(d)?;
    if samples == 0 {
        return Err(invalid("need at least one sample"));
    }
    let hits: u64 = (0..BATCHES)
        .into_par_iter()
        .map(|b| {
            let count = samples / BATCHES + u64::from(b < samples % BATCHES);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let mut pts = vec![[0.0f64; 3]; k];
            (0..count).filter(|_| draw_packing(&mut rng, d, &mut pts)).count() as u64
        })
        .sum();
    let p = hits as f64 / samples as f64;
    Ok(OverlapEstimate {
        d,
        k,
        estimate: p,
        std_error: (p * (1.0 - p) / samples as f64).sqrt(),
        samples,
        hits,
        seed,
        exact: false,
    })
}

fn draw_packing(rng: &mut ChaCha8Rng, d: usize, pts: &mut [[f64; 3]]) -> bool {
    for i in 0..pts.len() {
        let p = loop {
            let mut p = [0.0; 3];
            for c in p.iter_mut().take(d) {
                *c = rng.random_range(-1.0..1.0);
            }
            if p.iter().map(|x| x * x).sum::<f64>() <= 1.0 {
                break p;
            }
        };
        for q in &pts[..i] {
            let d2: f64 = (0..3).map(|c| (p[c] - q[c]).powi(2)).sum();
            if d2 <= 1.0 {
                return false;
            }
        }
        pts[i] = p;
    }
    true
}

/// Number of table entries `g̃_d(0..)` required before the overlap integral
/// vanishes: at most two points fit in a segment of length 2 with gaps
/// above 1, at most five in the unit disc.
fn required_entries(d: usize) -> usize {
    match d {
        1 => 3,
        2 => 6,
        _ => 2,
    }
}

/// `Σ_s g̃_d(s) μ^s / s!`; entries past the table are zero.
pub fn cd_polynomial(d: usize, mu: f64, gtable: &[f64]) -> Result<f64> {
    check_dim(d)?;
    if gtable.len() < required_entries(d) {
        return Err(invalid(format!(
            "table for d = {d} needs at least {} entries, got {}",
            required_entries(d),
            gtable.len()
        )));
    }
    let mut term = 1.0;
    let mut sum = 0.0;
    for (s, g) in gtable.iter().enumerate() {
        if s > 0 {
            term *= mu / s as f64;
        }
        sum += g * term;
    }
    Ok(sum)
}

/// `g̃_2(0..=5)` with `g̃_2(3), g̃_2(4)` the quoted Monte Carlo values and
/// `g̃_2(5)` at its upper bound `1e-4`.
pub fn disc_table() -> [f64; 6] {
    [1.0, 1.0, g2_two(), 0.0589, 0.0013, 0.0001]
}

/// `μ = [8π/(3√3)]^{1/2}`, the hand-picked activity scale for the disc
/// bound.
pub fn disc_reference_mu() -> f64 {
    (8.0 * PI / (3.0 * 3f64.sqrt())).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ImprovedRadius {
    pub mu_star: f64,
    /// `max_μ μ/C_2(μ)`; radius is this over the excluded area.
    pub coefficient: f64,
    /// `1/e`, the classical tree-graph coefficient.
    pub classical: f64,
}

/// Maximises `μ/C_2(μ)` by golden section.
pub fn improved_radius(gtable: &[f64]) -> Result<ImprovedRadius> {
    cd_polynomial(2, 0.0, gtable)?;
    let f = |mu: f64| mu / cd_polynomial(2, mu, gtable).expect("table checked");
    let (mu_star, coefficient) = golden_max(f, 1e-9, 20.0, 1e-12);
    Ok(ImprovedRadius {
        mu_star,
        coefficient,
        classical: (-1.0f64).exp(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_at_half_integers() {
        assert!((gamma_half(1) - PI.sqrt()).abs() < 1e-15);
        assert_eq!(gamma_half(2), 1.0);
        assert!((gamma_half(5) - 0.75 * PI.sqrt()).abs() < 1e-15);
        assert_eq!(gamma_half(8), 6.0);
    }
}
