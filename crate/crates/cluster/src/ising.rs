//! Two-dimensional zero-field Ising model on an `L × L` box: brute-force
//! partition functions, the high-temperature even-subgraph expansion, the
//! low-temperature contour expansion under `+` boundary, duality, exact
//! magnetisations and the convergence thresholds in `β`.
//!
//! Spin configurations are bitmasks over sites `r·L + c`, a set bit
//! meaning spin `-1`.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::numeric::bisect;

/// Largest side for spin enumeration; 6 is reachable only on request.
pub const MAX_SIDE: usize = 5;
pub const MAX_SIDE_EXTENDED: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Boundary {
    Free,
    Plus,
    Minus,
}

impl std::str::FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "free" | "open" => Ok(Boundary::Free),
            "plus" | "+" => Ok(Boundary::Plus),
            "minus" | "-" => Ok(Boundary::Minus),
            _ => Err(Error::UnknownName(s.to_string())),
        }
    }
}

fn check_side(l: usize, extended: bool, what: &'static str) -> Result<()> {
    let limit = if extended { MAX_SIDE_EXTENDED } else { MAX_SIDE };
    if l == 0 || l > limit {
        return Err(Error::CapExceeded { what, n: l, limit });
    }
    Ok(())
}

/// Number of nearest-neighbour bonds inside the box, `2L(L-1)`.
pub fn inner_bonds(l: usize) -> usize {
    2 * l * l.saturating_sub(1)
}

/// Bonds meeting the box, boundary bonds included: `2L(L+1)`.
pub fn boundary_bonds(l: usize) -> usize {
    2 * l * (l + 1)
}

/// Unequal neighbour pairs of `spins`, counting bonds to a fixed exterior
/// spin (`-1` when `minus_outside`) unless the boundary is free. Corner
/// sites have two exterior bonds.
fn disagreements(l: usize, spins: u64, boundary: Boundary) -> u32 {
    let row_mask = (1u64 << l) - 1;
    let mut k = 0;
    let mut prev = 0u64;
    for r in 0..l {
        let row = spins >> (r * l) & row_mask;
        k += ((row ^ (row >> 1)) & (row_mask >> 1)).count_ones();
        if r > 0 {
            k += (row ^ prev).count_ones();
        }
        prev = row;
    }
    let ext = match boundary {
        Boundary::Free => return k,
        Boundary::Plus => 0u64,
        Boundary::Minus => u64::MAX,
    };
    let first = spins & row_mask;
    let last = spins >> ((l - 1) * l) & row_mask;
    k += ((first ^ ext) & row_mask).count_ones() + ((last ^ ext) & row_mask).count_ones();
    for r in 0..l {
        let row = spins >> (r * l) & row_mask;
        k += ((row ^ ext) & 1) as u32 + ((row ^ ext) >> (l - 1) & 1) as u32;
    }
    k
}

fn total_bonds(l: usize, boundary: Boundary) -> usize {
    match boundary {
        Boundary::Free => inner_bonds(l),
        _ => boundary_bonds(l),
    }
}

/// Histogram of configurations by number of unequal bonds.
fn spin_histogram(l: usize, boundary: Boundary) -> Vec<u64> {
    let bins = total_bonds(l, boundary) + 1;
    (0..1u64 << (l * l))
        .into_par_iter()
        .fold(
            || vec![0u64; bins],
            |mut h, s| {
                h[disagreements(l, s, boundary) as usize] += 1;
                h
            },
        )
        .reduce(|| vec![0u64; bins], add_hist)
}

fn add_hist(mut a: Vec<u64>, b: Vec<u64>) -> Vec<u64> {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
    a
}

/// `Σ_k n_k e^{βJ(E - 2k)}` over a histogram by unequal-bond count `k`.
fn weigh(hist: &[u64], bonds: usize, bj: f64) -> f64 {
    hist.iter()
        .enumerate()
        .map(|(k, &n)| n as f64 * (bj * (bonds as f64 - 2.0 * k as f64)).exp())
        .sum()
}

/// `Z = Σ_σ e^{-βH(σ)}`, `H = -J Σ σ_x σ_y` over bonds in the box and, for
/// fixed boundaries, bonds to the exterior spin.
pub fn brute_force_z(l: usize, beta: f64, j: f64, boundary: Boundary, extended: bool) -> Result<f64> {
    check_side(l, extended, "Ising brute force side")?;
    Ok(weigh(&spin_histogram(l, boundary), total_bonds(l, boundary), beta * j))
}

/// Edges of the free `L × L` grid: horizontal `r·(L-1) + c`, then
/// vertical `L(L-1) + r·L + c`.
fn plaquette_masks(l: usize) -> Vec<u64> {
    let h = |r: usize, c: usize| r * (l - 1) + c;
    let v = |r: usize, c: usize| l * (l - 1) + r * l + c;
    let mut out = Vec::new();
    for r in 0..l - 1 {
        for c in 0..l - 1 {
            out.push(1u64 << h(r, c) | 1u64 << h(r + 1, c) | 1u64 << v(r, c) | 1u64 << v(r, c + 1));
        }
    }
    out
}

/// Histogram of even subgraphs of the free `L × L` grid by edge count,
/// enumerated as the span of the unit plaquettes.
pub fn even_subgraph_histogram(l: usize) -> Result<Vec<u64>> {
    if l == 0 || l > 6 {
        return Err(Error::CapExceeded {
            what: "even subgraph enumeration side",
            n: l,
            limit: 6,
        });
    }
    let bins = inner_bonds(l) + 1;
    if l == 1 {
        let mut h = vec![0u64; bins];
        h[0] = 1;
        return Ok(h);
    }
    let basis = plaquette_masks(l);
    let k = basis.len();
    let high = k.saturating_sub(12).min(k);
    let low = k - high;
    Ok((0..1u64 << high)
        .into_par_iter()
        .map(|prefix| {
            let mut h = vec![0u64; bins];
            let mut m = (0..high)
                .filter(|b| prefix >> b & 1 == 1)
                .fold(0u64, |m, b| m ^ basis[low + b]);
            h[m.count_ones() as usize] += 1;
            for g in 1u64..1 << low {
                m ^= basis[g.trailing_zeros() as usize];
                h[m.count_ones() as usize] += 1;
            }
            h
        })
        .reduce(|| vec![0u64; bins], add_hist))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HighTemperature {
    pub l: usize,
    pub beta: f64,
    /// `Σ_{even E} tanh(βJ)^{|E|}`.
    pub xi: f64,
    /// `cosh(βJ)^{2L(L-1)} 2^{L²} Ξ`.
    pub z: f64,
    pub histogram: Vec<u64>,
}

pub fn high_t_polymer_z(l: usize, beta: f64, j: f64) -> Result<HighTemperature> {
    let histogram = even_subgraph_histogram(l)?;
    let t = (beta * j).tanh();
    let xi = histogram.iter().enumerate().map(|(k, &n)| n as f64 * t.powi(k as i32)).sum::<f64>();
    let z = (beta * j).cosh().powi(inner_bonds(l) as i32) * 2f64.powi((l * l) as i32) * xi;
    Ok(HighTemperature {
        l,
        beta,
        xi,
        z,
        histogram,
    })
}

/// Closed contour on the dual grid of the box: dual vertices `(a, b)`,
/// `0 ≤ a, b ≤ L`. Dual edges crossing horizontal bonds come first
/// (`r·(L+1) + c`), then those crossing vertical bonds
/// (`L(L+1) + r·L + c`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Contour {
    pub mask: u64,
    pub len: u32,
}

fn dual_edge_ends(l: usize, e: usize) -> (usize, usize) {
    let w = l + 1;
    if e < l * w {
        let (r, c) = (e / w, e % w);
        (r * w + c, (r + 1) * w + c)
    } else {
        let e = e - l * w;
        let (r, c) = (e / l, e % l);
        (r * w + c, r * w + c + 1)
    }
}

/// Dual edges crossing unequal bonds under `+` boundary.
fn crossing_mask(l: usize, spins: u64) -> u64 {
    let w = l + 1;
    let spin = |r: isize, c: isize| -> bool {
        r >= 0 && c >= 0 && (r as usize) < l && (c as usize) < l && spins >> (r as usize * l + c as usize) & 1 == 1
    };
    let mut mask = 0u64;
    for r in 0..l as isize {
        for c in 0..=l as isize {
            if spin(r, c - 1) != spin(r, c) {
                mask |= 1 << (r as usize * w + c as usize);
            }
        }
    }
    for r in 0..=l as isize {
        for c in 0..l as isize {
            if spin(r - 1, c) != spin(r, c) {
                mask |= 1 << (l * w + r as usize * l + c as usize);
            }
        }
    }
    mask
}

/// Splits the unequal-bond dual edges of `spins` (with `+` exterior) into
/// connected contours. Fails if a contour has an odd-degree vertex.
pub fn contours(l: usize, spins: u64) -> Result<Vec<Contour>> {
    check_side(l, false, "contour extraction side")?;
    let mask = crossing_mask(l, spins);
    let nv = (l + 1) * (l + 1);
    let mut degree = vec![0u8; nv];
    let mut remaining = mask;
    while remaining != 0 {
        let e = remaining.trailing_zeros() as usize;
        remaining &= remaining - 1;
        let (a, b) = dual_edge_ends(l, e);
        degree[a] += 1;
        degree[b] += 1;
    }
    if degree.iter().any(|d| d % 2 == 1) {
        return Err(invalid("odd dual vertex degree"));
    }
    let mut out = Vec::new();
    let mut left = mask;
    while left != 0 {
        let seed = left.trailing_zeros() as usize;
        let mut comp = 1u64 << seed;
        let mut verts: u64 = {
            let (a, b) = dual_edge_ends(l, seed);
            1 << a | 1 << b
        };
        loop {
            let mut grew = false;
            let mut scan = left & !comp;
            while scan != 0 {
                let e = scan.trailing_zeros() as usize;
                scan &= scan - 1;
                let (a, b) = dual_edge_ends(l, e);
                if verts >> a & 1 == 1 || verts >> b & 1 == 1 {
                    comp |= 1 << e;
                    verts |= 1 << a | 1 << b;
                    grew = true;
                }
            }
            if !grew {
                break;
            }
        }
        left &= !comp;
        out.push(Contour {
            mask: comp,
            len: comp.count_ones(),
        });
    }
    Ok(out)
}

/// Inverse of [`contours`]: a site is `-1` when the horizontal path from
/// the left exterior crosses an odd number of contour edges.
pub fn spins_from_contours(l: usize, family: &[Contour]) -> u64 {
    let all = family.iter().fold(0u64, |m, g| m | g.mask);
    let w = l + 1;
    let mut spins = 0u64;
    for r in 0..l {
        let mut parity = false;
        for c in 0..l {
            parity ^= all >> (r * w + c) & 1 == 1;
            if parity {
                spins |= 1 << (r * l + c);
            }
        }
    }
    spins
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LowTemperature {
    pub l: usize,
    pub beta: f64,
    /// `Σ_families Π e^{-2βJ|γ|}`.
    pub xi: f64,
    /// `e^{βJ B̃} Ξ`, `B̃ = 2L(L+1)`.
    pub z: f64,
    pub configurations: u64,
    pub max_contours: usize,
    /// Histogram of total contour length.
    pub histogram: Vec<u64>,
}

/// Extracts the contour family of every spin configuration under `+`
/// boundary, checks `H = -J B̃ + 2J Σ|γ|`, the round trip back to spins and
/// `|γ| ≥ 4`, and sums the contour activities.
pub fn low_t_contour_z(l: usize, beta: f64, j: f64) -> Result<LowTemperature> {
    check_side(l, false, "low-temperature expansion side")?;
    let bonds = boundary_bonds(l);
    let bins = bonds + 1;
    let (histogram, max_contours) = (0..1u64 << (l * l))
        .into_par_iter()
        .try_fold(
            || (vec![0u64; bins], 0usize),
            |(mut h, mx), s| {
                let fam = contours(l, s)?;
                let total: u32 = fam.iter().map(|g| g.len).sum();
                if total != disagreements(l, s, Boundary::Plus) {
                    return Err(invalid(format!("contour length mismatch for configuration {s:#x}")));
                }
                if fam.iter().any(|g| g.len < 4) || spins_from_contours(l, &fam) != s {
                    return Err(invalid(format!("contour round trip fails for configuration {s:#x}")));
                }
                h[total as usize] += 1;
                Ok((h, mx.max(fam.len())))
            },
        )
        .try_reduce(|| (vec![0u64; bins], 0), |a, b| Ok((add_hist(a.0, b.0), a.1.max(b.1))))?;
    let bj = beta * j;
    let xi = histogram
        .iter()
        .enumerate()
        .map(|(k, &n)| n as f64 * (-2.0 * bj * k as f64).exp())
        .sum::<f64>();
    Ok(LowTemperature {
        l,
        beta,
        xi,
        z: (bj * bonds as f64).exp() * xi,
        configurations: 1 << (l * l),
        max_contours,
        histogram,
    })
}

/// `φ(β) = -½ ln tanh β`.
pub fn dual_beta(beta: f64) -> f64 {
    -0.5 * beta.tanh().ln()
}

/// Self-dual point `φ(β) = β`, found by bisection.
pub fn critical_beta() -> f64 {
    bisect(|b| dual_beta(b) - b, 0.1, 2.0, 1e-16).expect("sign change on [0.1, 2]")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualityReport {
    pub l: usize,
    pub beta: f64,
    pub dual_beta: f64,
    /// `|e^{-2φ(β)} - tanh β|`.
    pub tanh_identity_error: f64,
    /// Contour-length histogram of the `(L-1)²` plus box equals the
    /// edge-count histogram of even subgraphs of the free `L × L` grid.
    pub families_equal: bool,
    pub xi_high: f64,
    pub xi_low_at_dual: f64,
    pub beta_c: f64,
}

/// Compares the high-temperature sum of the free `L × L` box at `β` with
/// the contour sum of the `(L-1) × (L-1)` plus box at `φ(β)`, term by term.
pub fn duality_check(l: usize, beta: f64) -> Result<DualityReport> {
    if l < 2 {
        return Err(invalid("duality needs L >= 2"));
    }
    let t = beta.tanh();
    if !(t > 0.0 && t < 1.0) {
        return Err(invalid("need 0 < tanh(beta) < 1"));
    }
    let high = high_t_polymer_z(l, beta, 1.0)?;
    let phi = dual_beta(beta);
    let low = low_t_contour_z(l - 1, phi, 1.0)?;
    let families_equal = high.histogram == low.histogram;
    Ok(DualityReport {
        l,
        beta,
        dual_beta: phi,
        tanh_identity_error: ((-2.0 * phi).exp() - t).abs(),
        families_equal,
        xi_high: high.xi,
        xi_low_at_dual: low.xi,
        beta_c: critical_beta(),
    })
}

/// `g(β) = x⁴(4 - 3x)/(1 - x)²`, `x = 3e^{-2βJ}`; `None` off the branch
/// `x < 1`.
pub fn contour_probability_bound(beta: f64, j: f64) -> Option<f64> {
    let x = 3.0 * (-2.0 * beta * j).exp();
    (x < 1.0).then(|| x.powi(4) * (4.0 - 3.0 * x) / (1.0 - x).powi(2))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Magnetization {
    pub l: usize,
    pub beta: f64,
    pub boundary: Boundary,
    /// `⟨σ_x⟩` by site `r·L + c`.
    pub per_site: Vec<f64>,
    pub m: f64,
    /// `1 - 2g(β)` when `x_β < 0.4795`.
    pub low_t_bound: Option<f64>,
    /// `(100/3)(3t)^{d(x)}/(1 - 3t)³`, `t = tanh βJ`, per site when `3t < 1`;
    /// `d(x)` counts bonds from `x` out of the box.
    pub decay_bound: Option<Vec<f64>>,
    pub low_t_holds: Option<bool>,
    pub decay_holds: Option<bool>,
}

/// Exact `⟨σ_x⟩` by enumeration, with integer sign sums per unequal-bond
/// count so spin-flip symmetries hold exactly.
pub fn magnetization(l: usize, beta: f64, j: f64, boundary: Boundary) -> Result<Magnetization> {
    check_side(l, false, "magnetisation side")?;
    let n = l * l;
    let bonds = total_bonds(l, boundary);
    let bins = bonds + 1;
    let zero = || (vec![0u64; bins], vec![0i64; n * bins]);
    let (hist, signed) = (0..1u64 << n)
        .into_par_iter()
        .fold(zero, |(mut h, mut s), cfg| {
            let k = disagreements(l, cfg, boundary) as usize;
            h[k] += 1;
            for x in 0..n {
                s[x * bins + k] += if cfg >> x & 1 == 1 { -1 } else { 1 };
            }
            (h, s)
        })
        .reduce(zero, |(a, mut sa), (b, sb)| {
            for (x, y) in sa.iter_mut().zip(sb) {
                *x += y;
            }
            (add_hist(a, b), sa)
        });
    let bj = beta * j;
    let weights: Vec<f64> = (0..bins).map(|k| (bj * (bonds as f64 - 2.0 * k as f64)).exp()).collect();
    let z: f64 = hist.iter().zip(&weights).map(|(&c, w)| c as f64 * w).sum();
    let per_site: Vec<f64> = (0..n)
        .map(|x| (0..bins).map(|k| signed[x * bins + k] as f64 * weights[k]).sum::<f64>() / z)
        .collect();
    let m = per_site.iter().sum::<f64>() / n as f64;
    let x = 3.0 * (-2.0 * bj).exp();
    let low_t_bound = if x < 0.4795 {
        contour_probability_bound(beta, j).map(|g| 1.0 - 2.0 * g)
    } else {
        None
    };
    let t3 = 3.0 * bj.tanh();
    let decay_bound = (t3 < 1.0).then(|| {
        (0..n)
            .map(|s| {
                let (r, c) = (s / l, s % l);
                let d = r.min(c).min(l - 1 - r).min(l - 1 - c) + 1;
                100.0 / 3.0 * t3.powi(d as i32) / (1.0 - t3).powi(3)
            })
            .collect()
    });
    let plus = boundary == Boundary::Plus;
    let low_t_holds = low_t_bound.filter(|_| plus).map(|b| m >= b);
    let decay_holds = decay_bound
        .as_ref()
        .filter(|_| plus)
        .map(|d: &Vec<f64>| per_site.iter().zip(d).all(|(s, b)| s <= b));
    Ok(Magnetization {
        l,
        beta,
        boundary,
        per_site,
        m,
        low_t_bound,
        decay_bound,
        low_t_holds,
        decay_holds,
    })
}

/// Finite set of unit edges of `ℤ²`, each stored with its lexicographically
/// smaller endpoint first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct LatticeAnimal {
    pub edges: Vec<[(i32, i32); 2]>,
}

/// Connected even subgraphs of `ℤ²` with `n` edges through the origin,
/// found as edge sets of closed trails from the origin.
pub fn animals_through_origin(n: usize) -> Result<Vec<LatticeAnimal>> {
    if n > 12 {
        return Err(Error::CapExceeded {
            what: "lattice animal size",
            n,
            limit: 12,
        });
    }
    let mut found: HashSet<Vec<[(i32, i32); 2]>> = HashSet::new();
    let mut trail: Vec<[(i32, i32); 2]> = Vec::new();
    fn walk(
        at: (i32, i32),
        n: usize,
        trail: &mut Vec<[(i32, i32); 2]>,
        found: &mut HashSet<Vec<[(i32, i32); 2]>>,
    ) {
        if trail.len() == n {
            if at == (0, 0) {
                let mut e = trail.clone();
                e.sort_unstable();
                found.insert(e);
            }
            return;
        }
        let left = n - trail.len();
        if (at.0.abs() + at.1.abs()) as usize > left {
            return;
        }
        for (dx, dy) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
            let next = (at.0 + dx, at.1 + dy);
            let edge = if at < next { [at, next] } else { [next, at] };
            if !trail.contains(&edge) {
                trail.push(edge);
                walk(next, n, trail, found);
                trail.pop();
            }
        }
    }
    if n > 0 {
        walk((0, 0), n, &mut trail, &mut found);
    }
    let mut out: Vec<LatticeAnimal> = found.into_iter().map(|edges| LatticeAnimal { edges }).collect();
    out.sort_by(|a, b| a.edges.cmp(&b.edges));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Thresholds {
    pub a: f64,
    /// Root `x*` of `e^{4a}x⁴ + (e^{2a} - e^a)x - (e^a - 1) = 0`.
    pub quartic_root: f64,
    /// Root of `g(x) = 1/2` on `x < 1`.
    pub magnetization_root: f64,
    /// High-temperature convergence, `tanh(βJ) ≤ x*/3`.
    pub beta0: f64,
    /// Low-temperature convergence, `3e^{-2βJ} ≤ x*`.
    pub beta1: f64,
    /// Decay of `⟨σ_x⟩⁺`, `3 tanh(βJ) < 1`.
    pub beta0_prime: f64,
    /// Positive magnetisation, `g(β) < 1/2`.
    pub beta1_prime: f64,
    pub animal_counts: Vec<(usize, usize)>,
}

/// Recomputes the four thresholds in `β` by bisection, with the
/// `e^{a}` weight `a` fixed, and counts animals of size 4, 6, 8.
pub fn animal_counts_and_thresholds(a: f64, j: f64) -> Result<Thresholds> {
    if !(a > 0.0) || !(j > 0.0) {
        return Err(invalid("need a > 0 and J > 0"));
    }
    let quartic = |x: f64| (4.0 * a).exp() * x.powi(4) + ((2.0 * a).exp() - a.exp()) * x - a.exp_m1();
    let xq = bisect(quartic, 0.0, 1.0, 1e-15)?;
    let g = |x: f64| x.powi(4) * (4.0 - 3.0 * x) / (1.0 - x).powi(2) - 0.5;
    let xg = bisect(g, 0.0, 0.9, 1e-15)?;
    let animal_counts = [4, 6, 8]
        .iter()
        .map(|&n| animals_through_origin(n).map(|v| (n, v.len())))
        .collect::<Result<Vec<_>>>()?;
    Ok(Thresholds {
        a,
        quartic_root: xq,
        magnetization_root: xg,
        beta0: (xq / 3.0).atanh() / j,
        beta1: (3.0 / xq).ln() / (2.0 * j),
        beta0_prime: (1.0f64 / 3.0).atanh() / j,
        beta1_prime: (3.0 / xg).ln() / (2.0 * j),
        animal_counts,
    })
}
