//! Mayer coefficients of lattice gases on finite volumes, the tree-graph
//! convergence bounds, the Kirkwood–Salsburg coefficient recursion and the
//! virial-radius tools.

use std::f64::consts::E;

use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{invalid, Error, Result};
use crate::graphs::pair_index;
use crate::numeric::{grid_golden_max, ln_factorial, newton};
use crate::potentials::PairPotentialSpec;
use crate::ursell::partition_formula_weights;

pub const MAX_ORDER: usize = 6;
pub const MAX_SITES: usize = 64;
/// Largest number of site multisets summed per order.
pub const MAX_MULTISETS: u64 = 20_000_000;

/// Finite set of lattice sites in `ℤ^d`, `d ≤ 3`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiscreteVolume {
    sites: Vec<[i64; 3]>,
}

impl DiscreteVolume {
    pub fn new(sites: Vec<[i64; 3]>) -> Result<Self> {
        let mut sorted = sites.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid("sites must be distinct"));
        }
        if sites.is_empty() {
            return Err(invalid("empty volume"));
        }
        Ok(DiscreteVolume { sites })
    }

    /// Sites `0..len` along the first axis.
    pub fn path(len: usize) -> Self {
        DiscreteVolume::new((0..len as i64).map(|x| [x, 0, 0]).collect()).expect("distinct")
    }

    /// Rectangular box with the given side lengths (up to three).
    pub fn cuboid(sides: &[usize]) -> Result<Self> {
        if sides.is_empty() || sides.len() > 3 || sides.contains(&0) {
            return Err(invalid("need one to three positive side lengths"));
        }
        let s = |k: usize| sides.get(k).copied().unwrap_or(1) as i64;
        let mut sites = Vec::new();
        for x in 0..s(0) {
            for y in 0..s(1) {
                for z in 0..s(2) {
                    sites.push([x, y, z]);
                }
            }
        }
        DiscreteVolume::new(sites)
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn sites(&self) -> &[[i64; 3]] {
        &self.sites
    }

    fn distance(&self, i: usize, j: usize) -> f64 {
        let (p, q) = (self.sites[i], self.sites[j]);
        (((p[0] - q[0]).pow(2) + (p[1] - q[1]).pow(2) + (p[2] - q[2]).pow(2)) as f64).sqrt()
    }
}

/// Lattice pair interaction: `+∞` for distances up to `exclusion` (always
/// including the same site), the optional `tail` potential beyond, 0
/// otherwise.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatticeGas {
    pub exclusion: f64,
    pub tail: Option<PairPotentialSpec>,
}

impl LatticeGas {
    /// At most one particle per site, no other interaction.
    pub fn on_site() -> Self {
        LatticeGas {
            exclusion: 0.0,
            tail: None,
        }
    }

    /// Nearest neighbours also exclude each other.
    pub fn nearest_neighbour() -> Self {
        LatticeGas {
            exclusion: 1.0,
            tail: None,
        }
    }

    pub fn potential(&self, r: f64) -> f64 {
        if r <= self.exclusion + 1e-12 {
            f64::INFINITY
        } else {
            self.tail.as_ref().map_or(0.0, |s| s.value(r))
        }
    }

    fn is_hard_core(&self) -> bool {
        self.tail.is_none()
    }

    fn is_nonnegative(&self) -> bool {
        self.tail.as_ref().is_none_or(|s| s.is_nonnegative())
    }
}

/// Stability constants used in the bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stability {
    pub b: f64,
    pub b_bar: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MayerRecord {
    pub n: usize,
    pub value: f64,
    /// Exact value for pure hard-core gases.
    #[serde(serialize_with = "ser_rational")]
    pub exact: Option<BigRational>,
    pub bound_pr: f64,
    pub bound_py: f64,
    pub bound_basuev: f64,
    pub beta: f64,
    pub b: f64,
    pub b_bar: f64,
    pub c: f64,
    pub c_tilde: f64,
}

fn ser_rational<S: Serializer>(q: &Option<BigRational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match q {
        Some(q) => s.serialize_some(&q.to_string()),
        None => s.serialize_none(),
    }
}

/// Lattice analogues of `C(β)` and `C̃(β)`:
/// `sup_x Σ_{y∈Λ} |e^{-βV(x-y)} - 1|` and the same with `|V|`; the `y = x`
/// term contributes 1.
pub fn lattice_regularity(vol: &DiscreteVolume, gas: &LatticeGas, beta: f64) -> (f64, f64) {
    let n = vol.len();
    let mut c: f64 = 0.0;
    let mut ct: f64 = 0.0;
    for i in 0..n {
        let (mut a, mut b) = (0.0, 0.0);
        for j in 0..n {
            let v = gas.potential(vol.distance(i, j));
            if v.is_infinite() {
                a += 1.0;
                b += 1.0;
            } else {
                a += (-beta * v).exp_m1().abs();
                b += (-beta * v.abs()).exp_m1().abs();
            }
        }
        c = c.max(a);
        ct = ct.max(b);
    }
    (c, ct)
}

fn binomial(n: u64, k: u64) -> u64 {
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
        if r > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    r as u64
}

/// `C_n = (1/(n!|Λ|)) Σ_{(x_1..x_n) ∈ Λ^n} Φᵀ(βV(x_i - x_j))` for
/// `n = 1..=n_max`, summing over site multisets weighted by their number
/// of orderings. Hard-core gases are summed in exact integer arithmetic.
/// `stability` defaults to `B = B̄ = 0` and is required when the gas has an
/// attractive part.
pub fn mayer_coefficients(
    vol: &DiscreteVolume,
    gas: &LatticeGas,
    beta: f64,
    n_max: usize,
    stability: Option<Stability>,
) -> Result<Vec<MayerRecord>> {
    if n_max == 0 || n_max > MAX_ORDER {
        return Err(Error::CapExceeded {
            what: "Mayer coefficient order",
            n: n_max,
            limit: MAX_ORDER,
        });
    }
    if vol.len() > MAX_SITES {
        return Err(Error::CapExceeded {
            what: "lattice volume",
            n: vol.len(),
            limit: MAX_SITES,
        });
    }
    let count = binomial((vol.len() + n_max - 1) as u64, n_max as u64);
    if count > MAX_MULTISETS {
        return Err(invalid(format!(
            "{count} site multisets at order {n_max} exceed the limit {MAX_MULTISETS}"
        )));
    }
    let stab = match stability {
        Some(s) => s,
        None if gas.is_nonnegative() => Stability { b: 0.0, b_bar: 0.0 },
        None => {
            return Err(Error::Precondition(
                "attractive lattice potential needs explicit stability constants".into(),
            ))
        }
    };
    let m = vol.len();
    let mut v = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            v[i * m + j] = gas.potential(vol.distance(i, j));
        }
    }
    let (c, c_tilde) = lattice_regularity(vol, gas, beta);
    let mut out = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let (value, exact) = if gas.is_hard_core() {
            let total: i128 = (0..m)
                .into_par_iter()
                .map(|first| multiset_sum_exact(&v, m, n, first))
                .sum();
            let denom = BigInt::from(m) * (1..=n as u64).fold(BigInt::from(1), |a, k| a * k);
            let q = BigRational::new(BigInt::from(total), denom);
            (ratio_to_f64(&q), Some(q))
        } else {
            let partial: Vec<f64> = (0..m)
                .into_par_iter()
                .map(|first| multiset_sum_f64(&v, m, n, first, beta))
                .collect();
            let total: f64 = partial.iter().sum();
            (total / (m as f64 * ln_factorial(n as u64).exp()), None)
        };
        let (pr, py, bas) = mayer_bounds(n, beta, stab.b, stab.b_bar, c, c_tilde);
        out.push(MayerRecord {
            n,
            value,
            exact,
            bound_pr: pr,
            bound_py: py,
            bound_basuev: bas,
            beta,
            b: stab.b,
            b_bar: stab.b_bar,
            c,
            c_tilde,
        });
    }
    Ok(out)
}

fn ratio_to_f64(q: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    q.to_f64().unwrap_or(f64::NAN)
}

/// Visits nondecreasing site tuples starting with `first`, passing the
/// tuple and its number of distinct orderings `n!/Π m_i!`.
fn for_each_multiset<F: FnMut(&[usize], u64)>(m: usize, n: usize, first: usize, mut f: F) {
    let mut tuple = vec![first; n];
    let fact: Vec<u64> = (0..=n as u64).scan(1u64, |acc, k| {
        if k > 0 {
            *acc *= k;
        }
        Some(*acc)
    })
    .collect();
    loop {
        let mut orderings = fact[n];
        let mut run = 1;
        for k in 1..=n {
            if k < n && tuple[k] == tuple[k - 1] {
                run += 1;
            } else {
                orderings /= fact[run];
                run = 1;
            }
        }
        f(&tuple, orderings);
        // Advance positions 1.. as an odometer of nondecreasing values.
        let mut k = n;
        loop {
            if k <= 1 {
                return;
            }
            k -= 1;
            if tuple[k] + 1 < m {
                let next = tuple[k] + 1;
                for slot in tuple.iter_mut().skip(k) {
                    *slot = next;
                }
                break;
            }
        }
    }
}

fn multiset_sum_exact(v: &[f64], m: usize, n: usize, first: usize) -> i128 {
    let mut total: i128 = 0;
    let mut w = vec![0i64; n * (n - 1) / 2];
    for_each_multiset(m, n, first, |t, orderings| {
        for i in 0..n {
            for j in i + 1..n {
                w[pair_index(n, i, j)] = if v[t[i] * m + t[j]].is_infinite() { 0 } else { 1 };
            }
        }
        let phi = partition_formula_weights(n, &w).expect("order within cap");
        total += phi as i128 * orderings as i128;
    });
    total
}

fn multiset_sum_f64(v: &[f64], m: usize, n: usize, first: usize, beta: f64) -> f64 {
    let mut total = 0.0;
    let mut w = vec![0f64; n * (n - 1) / 2];
    for_each_multiset(m, n, first, |t, orderings| {
        for i in 0..n {
            for j in i + 1..n {
                let x = v[t[i] * m + t[j]];
                w[pair_index(n, i, j)] = if x.is_infinite() { 0.0 } else { (-beta * x).exp() };
            }
        }
        total += partition_formula_weights(n, &w).expect("order within cap") * orderings as f64;
    });
    total
}

/// `(PR, PY, Basuev)` bounds on `|C_n|`:
/// `e^{2βB(n-2)} n^{n-2} C^{n-1}/n!`, `e^{βBn} n^{n-2} C̃^{n-1}/n!` and
/// `e^{βB̄(n-1)} n^{n-2} C̃^{n-1}/n!`, evaluated in log space.
pub fn mayer_bounds(n: usize, beta: f64, b: f64, b_bar: f64, c: f64, c_tilde: f64) -> (f64, f64, f64) {
    if n == 1 {
        return (1.0, 1.0, 1.0);
    }
    let nf = n as f64;
    let common = (nf - 2.0) * nf.ln() - ln_factorial(n as u64);
    let pr = 2.0 * beta * b * (nf - 2.0) + common + (nf - 1.0) * c.ln();
    let py = beta * b * nf + common + (nf - 1.0) * c_tilde.ln();
    let bas = beta * b_bar * (nf - 1.0) + common + (nf - 1.0) * c_tilde.ln();
    (pr.exp(), py.exp(), bas.exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadiusBounds {
    /// `1/(e^{2βB+1} C)`.
    pub r_pr: f64,
    /// `1/(e^{βB+1} C̃)`.
    pub r_star: f64,
    /// `1/(e^{βB̄+1} C̃)`.
    pub r_basuev: f64,
    /// `ln(r_star/r_pr) = βB + ln(C/C̃)`.
    pub ln_ratio: f64,
    pub ratio: f64,
}

pub fn radius_bounds(beta: f64, b: f64, b_bar: f64, c: f64, c_tilde: f64) -> Result<RadiusBounds> {
    if !(c > 0.0 && c_tilde > 0.0) {
        return Err(invalid("C and C~ must be positive"));
    }
    let ln_ratio = beta * b + c.ln() - c_tilde.ln();
    Ok(RadiusBounds {
        r_pr: 1.0 / ((2.0 * beta * b + 1.0).exp() * c),
        r_star: 1.0 / ((beta * b + 1.0).exp() * c_tilde),
        r_basuev: 1.0 / ((beta * b_bar + 1.0).exp() * c_tilde),
        ln_ratio,
        ratio: ln_ratio.exp(),
    })
}

/// Kirkwood–Salsburg coefficient table `K_{n,ℓ}`, `n ≥ 1`, `n + ℓ ≤ M`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KsTable {
    pub m_max: usize,
    pub beta: f64,
    pub b: f64,
    pub c: f64,
    /// `k[n][ℓ]`; row 0 is identically zero.
    pub k: Vec<Vec<f64>>,
}

pub const KS_CAP: usize = 40;

/// Fills `K_{n,M-n} = e^{2βB} Σ_{s=0}^{M-n} C^s/s! · K_{n-1+s, M-n-s}` from
/// `K_{1,0} = 1` and `K_{0,ℓ} = 0`, by increasing `M`.
pub fn ks_recursion(m_max: usize, beta: f64, b: f64, c: f64) -> Result<KsTable> {
    if m_max == 0 || m_max > KS_CAP {
        return Err(Error::CapExceeded {
            what: "Kirkwood-Salsburg table size",
            n: m_max,
            limit: KS_CAP,
        });
    }
    let g = (2.0 * beta * b).exp();
    let mut k = vec![vec![0.0; m_max + 1]; m_max + 1];
    k[1][0] = 1.0;
    let mut cs = vec![1.0; m_max + 1];
    for s in 1..=m_max {
        cs[s] = cs[s - 1] * c / s as f64;
    }
    for m in 2..=m_max {
        for n in 1..=m {
            let l = m - n;
            let mut acc = 0.0;
            for s in 0..=l {
                acc += cs[s] * k[n - 1 + s][l - s];
            }
            k[n][l] = g * acc;
        }
    }
    Ok(KsTable {
        m_max,
        beta,
        b,
        c,
        k,
    })
}

impl KsTable {
    pub fn get(&self, n: usize, l: usize) -> f64 {
        self.k[n][l]
    }

    /// `e^{2βB(n+ℓ-1)} n (n+ℓ)^{ℓ-1} C^ℓ/ℓ!`.
    pub fn closed_form(&self, n: usize, l: usize) -> f64 {
        ks_closed_form(n, l, self.beta, self.b, self.c)
    }

    /// Largest relative deviation of the table from the closed form.
    pub fn max_rel_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for n in 1..=self.m_max {
            for l in 0..=self.m_max - n {
                worst = worst.max(crate::numeric::rel_diff(self.get(n, l), self.closed_form(n, l)));
            }
        }
        worst
    }
}

pub fn ks_closed_form(n: usize, l: usize, beta: f64, b: f64, c: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    if l > 0 && c == 0.0 {
        return 0.0;
    }
    let (nf, lf) = (n as f64, l as f64);
    let ln = 2.0 * beta * b * (nf + lf - 1.0) + nf.ln() + (lf - 1.0) * (nf + lf).ln()
        + if l > 0 { lf * c.ln() } else { 0.0 }
        - ln_factorial(l as u64);
    ln.exp()
}

/// Principal solution `w ∈ [0, 1]` of `w e^{-w} = x`, `0 ≤ x ≤ 1/e`:
/// Newton from `w = x`, bisection if Newton fails.
pub fn solve_w(x: f64) -> Result<f64> {
    let top = (-1.0f64).exp();
    if !(x >= 0.0) || x > top {
        return Err(Error::OutOfBranch(x));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if top - x < 1e-15 {
        return Ok(1.0);
    }
    let f = |w: f64| w * (-w).exp() - x;
    let df = |w: f64| (1.0 - w) * (-w).exp();
    if let Some(w) = newton(f, df, x, 0.0, 1.0, 1e-14, 50) {
        return Ok(w);
    }
    crate::numeric::bisect(f, 0.0, 1.0, 1e-15)
}

/// Partial sums `S_N = Σ_{n≤N} n^{n-1}/n! · x^n`, `N = 1..=n_max`.
pub fn euler_partial_sums(x: f64, n_max: usize) -> Vec<f64> {
    let mut s = 0.0;
    (1..=n_max)
        .map(|n| {
            let nf = n as f64;
            s += ((nf - 1.0) * nf.ln() - ln_factorial(n as u64) + nf * x.ln()).exp();
            s
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VirialMax {
    pub grid_w: f64,
    pub grid_value: f64,
    pub newton_w: f64,
    pub newton_value: f64,
}

fn virial_objective(w: f64) -> f64 {
    w * (2.0 * (-w).exp() - 1.0)
}

/// `max_{w ∈ (0, ln 2)} w(2e^{-w} - 1)` by grid plus golden section and,
/// independently, by Newton on the stationarity condition
/// `2e^{-w}(1-w) = 1`.
pub fn virial_max() -> VirialMax {
    let ln2 = 2f64.ln();
    let (gw, gv) = grid_golden_max(virial_objective, 0.0, ln2, 2001, 1e-13);
    let f = |w: f64| 2.0 * (-w).exp() * (1.0 - w) - 1.0;
    let df = |w: f64| 2.0 * (-w).exp() * (w - 2.0);
    let nw = newton(f, df, 0.5 * ln2, 0.0, ln2, 1e-15, 100).expect("stationary point inside (0, ln 2)");
    VirialMax {
        grid_w: gw,
        grid_value: gv,
        newton_w: nw,
        newton_value: virial_objective(nw),
    }
}

/// Lower bound on the virial convergence radius,
/// `max_w w(2e^{-w}-1) / (C̃ e^{βB̄})`, with the maximum computed rather
/// than rounded.
pub fn virial_radius(beta: f64, b_bar: f64, c_tilde: f64) -> Result<f64> {
    if !(c_tilde > 0.0) {
        return Err(invalid("C~ must be positive"));
    }
    Ok(virial_max().newton_value / (c_tilde * (beta * b_bar).exp()))
}

/// `1/(e C̃ e^{βB̄})`: largest `|λ|` for which `x = C̃ e^{βB̄}|λ|` stays on the
/// principal branch.
pub fn branch_activity(beta: f64, b_bar: f64, c_tilde: f64) -> f64 {
    1.0 / (E * c_tilde * (beta * b_bar).exp())
}
