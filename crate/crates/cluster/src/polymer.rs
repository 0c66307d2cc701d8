//! Abstract polymer gases: exact partition functions, truncated cluster
//! series, the fixed-point map, the three convergence criteria, the
//! subset gas with its inductive zero-freeness check, lattice generators
//! and a catalog of closed-form convergence conditions.

use std::collections::HashMap;
use std::f64::consts::E;
use std::fmt;
use std::ops::{Add, Mul};
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::graphs::pair_index;
use crate::numeric::{bisect, grid_golden_max};
use crate::report::BoundReport;
use crate::ursell::partition_formula_weights;

/// Largest polymer set for exact partition functions.
pub const MAX_EXACT: usize = 30;
/// Largest neighbourhood whose partition function is expanded exactly.
pub const MAX_NEIGHBORHOOD: usize = 25;
pub const MAX_CLUSTER_ORDER: usize = 6;
pub const MAX_PINNED_ORDER: usize = 5;
pub const MAX_SUBSET_VERTICES: usize = 16;
const MAX_TUPLES: u64 = 5_000_000;

/// Finite polymer set with a symmetric incompatibility relation and complex
/// activities. Self-incompatibility is per polymer and on by default.
#[derive(Debug, Clone, PartialEq)]
pub struct PolymerSystem {
    labels: Vec<String>,
    /// Incompatible partners, excluding the polymer itself, sorted.
    neighbors: Vec<Vec<usize>>,
    self_incompatible: Vec<bool>,
    activity: Vec<Complex64>,
}

impl PolymerSystem {
    /// Builds from incompatible pairs; the relation is symmetrised.
    pub fn new(n: usize, incompatible: &[(usize, usize)], activity: Vec<Complex64>) -> Result<Self> {
        if activity.len() != n {
            return Err(invalid("one activity per polymer"));
        }
        let mut neighbors = vec![Vec::new(); n];
        for &(a, b) in incompatible {
            if a >= n || b >= n {
                return Err(invalid(format!("pair ({a}, {b}) out of range")));
            }
            if a != b {
                neighbors[a].push(b);
                neighbors[b].push(a);
            }
        }
        for nb in &mut neighbors {
            nb.sort_unstable();
            nb.dedup();
        }
        Ok(PolymerSystem {
            labels: (0..n).map(|i| i.to_string()).collect(),
            neighbors,
            self_incompatible: vec![true; n],
            activity,
        })
    }

    /// Hard-core gas on a graph: polymers are vertices, incompatible when
    /// equal or adjacent.
    pub fn hard_core_gas(adjacency: &[Vec<usize>], activity: f64) -> Result<Self> {
        let pairs: Vec<(usize, usize)> = adjacency
            .iter()
            .enumerate()
            .flat_map(|(i, nb)| nb.iter().map(move |&j| (i, j)))
            .collect();
        PolymerSystem::new(adjacency.len(), &pairs, vec![Complex64::new(activity, 0.0); adjacency.len()])
    }

    /// Polymer gas from explicit vertex sets, incompatible when they meet.
    pub fn from_supports(supports: &[Vec<usize>], activity: Vec<Complex64>) -> Result<Self> {
        let mut pairs = Vec::new();
        for i in 0..supports.len() {
            for j in i + 1..supports.len() {
                if supports[i].iter().any(|v| supports[j].contains(v)) {
                    pairs.push((i, j));
                }
            }
        }
        PolymerSystem::new(supports.len(), &pairs, activity)
    }

    pub fn len(&self) -> usize {
        self.activity.len()
    }

    pub fn is_empty(&self) -> bool {
        self.activity.is_empty()
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn activity(&self) -> &[Complex64] {
        &self.activity
    }

    pub fn set_activity(&mut self, activity: Vec<Complex64>) -> Result<()> {
        if activity.len() != self.len() {
            return Err(invalid("one activity per polymer"));
        }
        self.activity = activity;
        Ok(())
    }

    /// `|ζ_γ|`.
    pub fn moduli(&self) -> Vec<f64> {
        self.activity.iter().map(|z| z.norm()).collect()
    }

    /// Allows polymer `i` to appear more than once in a compatible family.
    pub fn set_self_compatible(&mut self, i: usize) {
        self.self_incompatible[i] = false;
    }

    pub fn is_self_incompatible(&self, i: usize) -> bool {
        self.self_incompatible[i]
    }

    pub fn incompatible(&self, a: usize, b: usize) -> bool {
        if a == b {
            self.self_incompatible[a]
        } else {
            self.neighbors[a].binary_search(&b).is_ok()
        }
    }

    /// `{γ' : γ' ≁ γ}`, including `γ` when self-incompatible.
    pub fn neighborhood(&self, g: usize) -> Vec<usize> {
        let mut out = self.neighbors[g].clone();
        if self.self_incompatible[g] {
            out.push(g);
            out.sort_unstable();
        }
        out
    }

    /// Local bit adjacency of a polymer subset, without self loops.
    fn local(&self, subset: &[usize]) -> Vec<u64> {
        subset
            .iter()
            .map(|&a| {
                subset
                    .iter()
                    .enumerate()
                    .filter(|&(_, &b)| b != a && self.incompatible(a, b))
                    .fold(0u64, |m, (k, _)| m | 1 << k)
            })
            .collect()
    }
}

/// Text form: one polymer per line, `label activity [neighbour ...]`, with
/// the activity written `re` or `re,im`. A line `selfcompatible label`
/// lifts self-incompatibility; `#` starts a comment. Neighbour lists are
/// symmetrised.
impl FromStr for PolymerSystem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut labels: Vec<String> = Vec::new();
        let mut acts = Vec::new();
        let mut raw: Vec<(usize, Vec<String>)> = Vec::new();
        let mut self_compat = Vec::new();
        for line in s.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut tok = line.split_whitespace();
            let head = tok.next().expect("non-empty line");
            if head == "selfcompatible" {
                self_compat.push(tok.next().ok_or_else(|| Error::Parse("selfcompatible needs a label".into()))?.to_string());
                continue;
            }
            if labels.iter().any(|l| l == head) {
                return Err(Error::Parse(format!("duplicate polymer {head}")));
            }
            let act = tok.next().ok_or_else(|| Error::Parse(format!("polymer {head} has no activity")))?;
            let z = parse_complex(act)?;
            raw.push((labels.len(), tok.map(str::to_string).collect()));
            labels.push(head.to_string());
            acts.push(z);
        }
        let index = |l: &str| {
            labels
                .iter()
                .position(|x| x == l)
                .ok_or_else(|| Error::Parse(format!("unknown polymer {l}")))
        };
        let mut pairs = Vec::new();
        for (i, nbs) in &raw {
            for nb in nbs {
                pairs.push((*i, index(nb)?));
            }
        }
        let mut sys = PolymerSystem::new(labels.len(), &pairs, acts)?;
        for l in &self_compat {
            let i = index(l)?;
            sys.set_self_compatible(i);
        }
        sys.labels = labels;
        Ok(sys)
    }
}

fn parse_complex(s: &str) -> Result<Complex64> {
    let bad = || Error::Parse(format!("bad activity {s}"));
    match s.split_once(',') {
        Some((re, im)) => Ok(Complex64::new(re.parse().map_err(|_| bad())?, im.parse().map_err(|_| bad())?)),
        None => Ok(Complex64::new(s.parse().map_err(|_| bad())?, 0.0)),
    }
}

impl fmt::Display for PolymerSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len() {
            let z = self.activity[i];
            write!(f, "{} {:e},{:e}", self.labels[i], z.re, z.im)?;
            for &j in self.neighbors[i].iter().filter(|&&j| j > i) {
                write!(f, " {}", self.labels[j])?;
            }
            writeln!(f)?;
        }
        for i in (0..self.len()).filter(|&i| !self.self_incompatible[i]) {
            writeln!(f, "selfcompatible {}", self.labels[i])?;
        }
        Ok(())
    }
}

/// Partition function of a local system by the deletion recursion
/// `Ξ(S) = Ξ(S∖x) + w_x Ξ(S∖N[x])`, memoised on the remaining set. `w`
/// already carries the `e^ζ - 1` substitution for self-compatible
/// polymers.
fn xi_memo<T>(adj: &[u64], w: &[T], mask: u64, memo: &mut HashMap<u64, T>) -> T
where
    T: Copy + Zero + One + Add<Output = T> + Mul<Output = T>,
{
    if mask == 0 {
        return T::one();
    }
    if let Some(v) = memo.get(&mask) {
        return *v;
    }
    let x = mask.trailing_zeros() as usize;
    let without = mask & !(1u64 << x);
    let v = xi_memo(adj, w, without, memo) + w[x] * xi_memo(adj, w, without & !adj[x], memo);
    memo.insert(mask, v);
    v
}

fn full_mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Exact `Ξ_Λ(ζ)` over compatible families of polymers in `lambda`.
pub fn partition_function(sys: &PolymerSystem, lambda: &[usize]) -> Result<Complex64> {
    check_subset(sys, lambda, MAX_EXACT, "exact partition function")?;
    let w: Vec<Complex64> = lambda
        .iter()
        .map(|&g| effective_weight(sys, g, sys.activity[g]))
        .collect();
    Ok(xi_memo(&sys.local(lambda), &w, full_mask(lambda.len()), &mut HashMap::new()))
}

/// `Ξ_{subset}(μ)` for real weights `mu` indexed by polymer.
pub fn partition_function_real(sys: &PolymerSystem, subset: &[usize], mu: &[f64]) -> Result<f64> {
    check_subset(sys, subset, MAX_EXACT, "exact partition function")?;
    let w: Vec<f64> = subset
        .iter()
        .map(|&g| if sys.self_incompatible[g] { mu[g] } else { mu[g].exp_m1() })
        .collect();
    Ok(xi_memo(&sys.local(subset), &w, full_mask(subset.len()), &mut HashMap::new()))
}

fn effective_weight(sys: &PolymerSystem, g: usize, z: Complex64) -> Complex64 {
    if sys.self_incompatible[g] {
        z
    } else {
        z.exp() - Complex64::one()
    }
}

fn check_subset(sys: &PolymerSystem, subset: &[usize], limit: usize, what: &'static str) -> Result<()> {
    if subset.len() > limit {
        return Err(Error::CapExceeded {
            what,
            n: subset.len(),
            limit,
        });
    }
    let mut seen = vec![false; sys.len()];
    for &g in subset {
        if g >= sys.len() || std::mem::replace(&mut seen[g], true) {
            return Err(invalid(format!("polymer index {g} out of range or repeated")));
        }
    }
    Ok(())
}

/// Truncated cluster expansion `Σ_{n≤N} Σ_{multisets} φᵀ/Π m_γ! · Π ζ_γ^{m_γ}`
/// stored term by term with exact coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterPolynomial {
    pub polymers: Vec<usize>,
    pub order: usize,
    /// Exponents as `(position in polymers, power)` pairs.
    pub terms: Vec<(Vec<(usize, u32)>, BigRational)>,
}

impl ClusterPolynomial {
    pub fn eval(&self, activity: &[Complex64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(mono, c)| {
                let coef = c.to_f64().unwrap_or(f64::NAN);
                mono.iter()
                    .fold(Complex64::new(coef, 0.0), |acc, &(k, p)| acc * activity[self.polymers[k]].powu(p))
            })
            .sum()
    }

    /// Sum of terms of total degree `n` at the given activities.
    pub fn eval_degree(&self, activity: &[Complex64], n: usize) -> Complex64 {
        let sub = ClusterPolynomial {
            polymers: self.polymers.clone(),
            order: self.order,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.iter().map(|&(_, p)| p as usize).sum::<usize>() == n)
                .cloned()
                .collect(),
        };
        sub.eval(activity)
    }
}

/// Visits nondecreasing `n`-tuples over `0..m`, passing the tuple.
fn for_each_multiset<F: FnMut(&[usize])>(m: usize, n: usize, mut f: F) {
    if n == 0 {
        f(&[]);
        return;
    }
    if m == 0 {
        return;
    }
    let mut t = vec![0usize; n];
    loop {
        f(&t);
        let mut k = n;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            if t[k] + 1 < m {
                let next = t[k] + 1;
                for slot in t.iter_mut().skip(k) {
                    *slot = next;
                }
                break;
            }
        }
    }
}

fn multiset_count(m: usize, n: usize) -> u64 {
    let mut r: u128 = 1;
    for i in 0..n as u128 {
        r = r * (m as u128 + i) / (i + 1);
    }
    r.min(u64::MAX as u128) as u64
}

/// `φᵀ` of a polymer tuple: the hard-core Ursell function of the graph
/// joining incompatible entries.
fn truncated_phi(sys: &PolymerSystem, tuple: &[usize]) -> i64 {
    let n = tuple.len();
    if n == 1 {
        return 1;
    }
    let mut w = vec![1i64; n * (n - 1) / 2];
    for i in 0..n {
        for j in i + 1..n {
            if sys.incompatible(tuple[i], tuple[j]) {
                w[pair_index(n, i, j)] = 0;
            }
        }
    }
    partition_formula_weights(n, &w).expect("order within cap")
}

fn multiplicities(t: &[usize]) -> Vec<(usize, u32)> {
    let mut out: Vec<(usize, u32)> = Vec::new();
    for &x in t {
        match out.last_mut() {
            Some((y, c)) if *y == x => *c += 1,
            _ => out.push((x, 1)),
        }
    }
    out
}

fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |a, k| a * k)
}

/// Cluster expansion of `log Ξ_Λ` truncated at total degree `order`.
pub fn cluster_log_truncated(sys: &PolymerSystem, lambda: &[usize], order: usize) -> Result<ClusterPolynomial> {
    check_subset(sys, lambda, MAX_EXACT, "cluster expansion volume")?;
    if order == 0 || order > MAX_CLUSTER_ORDER {
        return Err(Error::CapExceeded {
            what: "cluster expansion order",
            n: order,
            limit: MAX_CLUSTER_ORDER,
        });
    }
    let m = lambda.len();
    if multiset_count(m, order) > MAX_TUPLES {
        return Err(invalid("too many polymer tuples at this order"));
    }
    let mut terms = Vec::new();
    for n in 1..=order {
        let mut level: Vec<(Vec<(usize, u32)>, BigRational)> = Vec::new();
        for_each_multiset(m, n, |t| {
            let tuple: Vec<usize> = t.iter().map(|&k| lambda[k]).collect();
            let phi = truncated_phi(sys, &tuple);
            if phi != 0 {
                let mult = multiplicities(t);
                let denom = mult.iter().fold(BigInt::one(), |a, &(_, c)| a * factorial(c));
                level.push((mult, BigRational::new(BigInt::from(phi), denom)));
            }
        });
        terms.extend(level);
    }
    Ok(ClusterPolynomial {
        polymers: lambda.to_vec(),
        order,
        terms,
    })
}

/// Polymers within `depth` incompatibility steps of `g0`.
fn ball(sys: &PolymerSystem, g0: usize, depth: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; sys.len()];
    dist[g0] = 0;
    let mut frontier = vec![g0];
    let mut out = vec![g0];
    for d in 1..=depth {
        let mut next = Vec::new();
        for &g in &frontier {
            for &h in &sys.neighbors[g] {
                if dist[h] == usize::MAX {
                    dist[h] = d;
                    next.push(h);
                    out.push(h);
                }
            }
        }
        frontier = next;
    }
    out.sort_unstable();
    out
}

/// `Σ_{n≤N} (1/n!) Σ_{(γ_1..γ_n)} |φᵀ(γ_0, γ_1, ..., γ_n)| ρ_{γ_1}...ρ_{γ_n}`.
pub fn pinned_series(sys: &PolymerSystem, g0: usize, order: usize, rho: &[f64]) -> Result<f64> {
    if order > MAX_PINNED_ORDER {
        return Err(Error::CapExceeded {
            what: "pinned series order",
            n: order,
            limit: MAX_PINNED_ORDER,
        });
    }
    if g0 >= sys.len() || rho.len() != sys.len() {
        return Err(invalid("polymer index or activity vector out of range"));
    }
    let near = ball(sys, g0, order);
    if multiset_count(near.len(), order) > MAX_TUPLES {
        return Err(invalid("too many polymer tuples at this order"));
    }
    let mut total = 1.0;
    for n in 1..=order {
        let partial: f64 = (0..near.len())
            .into_par_iter()
            .map(|first| {
                let rest = &near[first..];
                let mut acc = 0.0;
                for_each_multiset(rest.len(), n - 1, |t| {
                    let mut tuple = Vec::with_capacity(n + 1);
                    tuple.push(g0);
                    tuple.push(rest[0]);
                    tuple.extend(t.iter().map(|&k| rest[k]));
                    let phi = truncated_phi(sys, &tuple);
                    if phi != 0 {
                        let mut idx: Vec<usize> = std::iter::once(0).chain(t.iter().copied()).collect();
                        idx.sort_unstable();
                        let denom: f64 = multiplicities(&idx)
                            .iter()
                            .map(|&(_, c)| factorial(c).to_f64().unwrap_or(f64::INFINITY))
                            .product();
                        let weight: f64 = tuple[1..].iter().map(|&g| rho[g]).product();
                        acc += phi.unsigned_abs() as f64 * weight / denom;
                    }
                });
                acc
            })
            .collect::<Vec<_>>()
            .iter()
            .sum();
        total += partial;
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPointRun {
    pub values: Vec<f64>,
    pub steps: usize,
    pub converged: bool,
    pub monotone: bool,
    /// Some polymer's iterate passed its bound or blew up.
    pub diverged: bool,
    pub first_exceeding: Option<usize>,
}

struct Neighborhood {
    members: Vec<usize>,
    adj: Vec<u64>,
}

fn neighborhoods(sys: &PolymerSystem) -> Result<Vec<Neighborhood>> {
    (0..sys.len())
        .map(|g| {
            let members = sys.neighborhood(g);
            if members.len() > MAX_NEIGHBORHOOD {
                return Err(Error::CapExceeded {
                    what: "polymer neighbourhood",
                    n: members.len(),
                    limit: MAX_NEIGHBORHOOD,
                });
            }
            let adj = sys.local(&members);
            Ok(Neighborhood { members, adj })
        })
        .collect()
}

fn neighborhood_xi(sys: &PolymerSystem, nb: &Neighborhood, u: &[f64]) -> f64 {
    let w: Vec<f64> = nb
        .members
        .iter()
        .map(|&g| if sys.self_incompatible[g] { u[g] } else { u[g].exp_m1() })
        .collect();
    xi_memo(&nb.adj, &w, full_mask(nb.members.len()), &mut HashMap::new())
}

/// Iterates `T_γ(u) = ρ_γ Ξ_{P_γ}(u)` from `u = ρ` for up to `steps`
/// rounds, where `P_γ` is the incompatible neighbourhood of `γ`. Stops
/// early once the iterates stop moving; flags divergence when a coordinate
/// exceeds `bound` (or `1e12` without one).
pub fn fixed_point_iterate(sys: &PolymerSystem, rho: &[f64], steps: usize, bound: Option<&[f64]>) -> Result<FixedPointRun> {
    if rho.len() != sys.len() {
        return Err(invalid("one activity per polymer"));
    }
    let nbs = neighborhoods(sys)?;
    let mut u = rho.to_vec();
    let mut monotone = true;
    let mut run = FixedPointRun {
        values: u.clone(),
        steps: 0,
        converged: false,
        monotone: true,
        diverged: false,
        first_exceeding: None,
    };
    for step in 1..=steps {
        let next: Vec<f64> = nbs
            .par_iter()
            .enumerate()
            .map(|(g, nb)| rho[g] * neighborhood_xi(sys, nb, &u))
            .collect();
        monotone &= next.iter().zip(&u).all(|(a, b)| *a >= *b * (1.0 - 1e-15));
        let change = next
            .iter()
            .zip(&u)
            .map(|(a, b)| (a - b).abs() / a.abs().max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max);
        u = next;
        run.steps = step;
        let exceed = u.iter().enumerate().position(|(g, &x)| {
            !x.is_finite() || x > bound.map_or(1e12, |b| b[g])
        });
        if let Some(g) = exceed {
            run.diverged = true;
            run.first_exceeding = Some(g);
            break;
        }
        if change < 1e-15 {
            run.converged = true;
            break;
        }
    }
    run.values = u;
    run.monotone = monotone;
    Ok(run)
}

/// Convergence radii `r_γ = μ_γ/φ_γ(μ)` of one polymer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriterionRadii {
    /// `φ = exp Σ_{γ'≁γ} μ_{γ'}`.
    pub kotecky_preiss: f64,
    /// `φ = Π_{γ'≁γ} (1 + μ_{γ'})`.
    pub dobrushin: f64,
    /// `φ = Ξ_{P_γ}(μ)`, the neighbourhood partition function.
    pub neighborhood: f64,
    /// False when the neighbourhood was too large and the product bound
    /// replaced its partition function.
    pub neighborhood_exact: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Criterion {
    KoteckyPreiss,
    Dobrushin,
    Neighborhood,
}

impl CriterionRadii {
    pub fn get(&self, c: Criterion) -> f64 {
        match c {
            Criterion::KoteckyPreiss => self.kotecky_preiss,
            Criterion::Dobrushin => self.dobrushin,
            Criterion::Neighborhood => self.neighborhood,
        }
    }
}

impl FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "kp" | "kotecky-preiss" => Ok(Criterion::KoteckyPreiss),
            "dobrushin" | "dob" => Ok(Criterion::Dobrushin),
            "neighborhood" | "neighbourhood" | "xi" => Ok(Criterion::Neighborhood),
            _ => Err(Error::UnknownName(s.to_string())),
        }
    }
}

/// The three radii for every polymer at trial weights `mu`.
pub fn criteria(sys: &PolymerSystem, mu: &[f64]) -> Result<Vec<CriterionRadii>> {
    if mu.len() != sys.len() || mu.iter().any(|&m| !(m > 0.0)) {
        return Err(invalid("need one positive weight per polymer"));
    }
    Ok((0..sys.len())
        .into_par_iter()
        .map(|g| {
            let members = sys.neighborhood(g);
            let sum: f64 = members.iter().map(|&h| mu[h]).sum();
            let prod: f64 = members.iter().map(|&h| (1.0 + mu[h]).ln()).sum::<f64>().exp();
            let (xi, exact) = if members.len() <= MAX_NEIGHBORHOOD {
                let nb = Neighborhood {
                    adj: sys.local(&members),
                    members,
                };
                (neighborhood_xi(sys, &nb, mu), true)
            } else {
                (prod, false)
            };
            CriterionRadii {
                kotecky_preiss: mu[g] * (-sum).exp(),
                dobrushin: mu[g] / prod,
                neighborhood: mu[g] / xi,
                neighborhood_exact: exact,
            }
        })
        .collect())
}

/// Best constant weight `μ` for a criterion: maximises `min_γ r_γ(μ)`.
/// Returns `(μ*, radius)`.
pub fn optimize_constant_mu(sys: &PolymerSystem, which: Criterion) -> Result<(f64, f64)> {
    if sys.is_empty() {
        return Err(invalid("empty polymer system"));
    }
    let f = |m: f64| {
        criteria(sys, &vec![m; sys.len()])
            .map(|r| r.iter().map(|c| c.get(which)).fold(f64::INFINITY, f64::min))
            .unwrap_or(f64::NEG_INFINITY)
    };
    let (m, r) = grid_golden_max(f, 1e-6, 5.0, 400, 1e-12);
    Ok((m, r))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegularThresholds {
    pub delta: usize,
    /// `1/((Δ+1)e)`.
    pub kotecky_preiss: f64,
    /// `Δ^Δ/(Δ+1)^{Δ+1}`.
    pub dobrushin: f64,
    /// `1/(1 + Δ^Δ/(Δ-1)^{Δ-1})`.
    pub neighborhood: f64,
}

/// Optimal constant-weight radii for the hard-core gas on a graph of
/// maximum degree `Δ` whose neighbourhoods are independent sets.
pub fn regular_graph_thresholds(delta: usize) -> Result<RegularThresholds> {
    if delta < 2 {
        return Err(invalid("need maximum degree at least 2"));
    }
    let d = delta as f64;
    Ok(RegularThresholds {
        delta,
        kotecky_preiss: 1.0 / ((d + 1.0) * E),
        dobrushin: (d * d.ln() - (d + 1.0) * (d + 1.0).ln()).exp(),
        neighborhood: 1.0 / (1.0 + (d * d.ln() - (d - 1.0) * (d - 1.0).ln()).exp()),
    })
}

/// `1/(1 + (2d)^{2d}/(2d-1)^{2d-1})`, the neighbourhood-criterion radius
/// of the hard-core gas on `ℤ^d`.
pub fn hypercubic_threshold(d: usize) -> Result<f64> {
    regular_graph_thresholds(2 * d).map(|t| t.neighborhood)
}

fn torus_index(coords: &[usize], l: usize) -> usize {
    coords.iter().rev().fold(0, |a, &c| a * l + c)
}

/// Nearest-neighbour bonds of the `l × l` torus as polymers, incompatible
/// when they share an endpoint; constant activity `rho`. Needs `l ≥ 4` for
/// every neighbourhood to look like one in `ℤ²`.
pub fn domino(l: usize, rho: f64) -> Result<PolymerSystem> {
    if l < 4 {
        return Err(invalid("domino torus needs side at least 4"));
    }
    let mut supports = Vec::new();
    for x in 0..l {
        for y in 0..l {
            let a = torus_index(&[x, y], l);
            supports.push(vec![a, torus_index(&[(x + 1) % l, y], l)]);
            supports.push(vec![a, torus_index(&[x, (y + 1) % l], l)]);
        }
    }
    let n = supports.len();
    PolymerSystem::from_supports(&supports, vec![Complex64::new(rho, 0.0); n])
}

fn torus_adjacency(l: usize, dim: usize, steps: &[Vec<isize>]) -> Vec<Vec<usize>> {
    let n = l.pow(dim as u32);
    (0..n)
        .map(|i| {
            let mut c = vec![0usize; dim];
            let mut r = i;
            for slot in c.iter_mut() {
                *slot = r % l;
                r /= l;
            }
            let mut nb: Vec<usize> = steps
                .iter()
                .map(|s| {
                    let moved: Vec<usize> = c
                        .iter()
                        .zip(s)
                        .map(|(&x, &dx)| (x as isize + dx).rem_euclid(l as isize) as usize)
                        .collect();
                    torus_index(&moved, l)
                })
                .collect();
            nb.sort_unstable();
            nb.dedup();
            nb
        })
        .collect()
}

/// Hard-core gas on the `l × l` triangular-lattice torus (`l ≥ 4`).
pub fn triangular(l: usize, rho: f64) -> Result<PolymerSystem> {
    if l < 4 {
        return Err(invalid("triangular torus needs side at least 4"));
    }
    let steps = vec![vec![1, 0], vec![-1, 0], vec![0, 1], vec![0, -1], vec![1, -1], vec![-1, 1]];
    PolymerSystem::hard_core_gas(&torus_adjacency(l, 2, &steps), rho)
}

/// Hard-core gas on the `ℤ^d` torus of side `l ≥ 4`.
pub fn hypercubic(d: usize, l: usize, rho: f64) -> Result<PolymerSystem> {
    if !(1..=3).contains(&d) || l < 4 {
        return Err(invalid("need d in 1..=3 and side at least 4"));
    }
    let steps: Vec<Vec<isize>> = (0..d)
        .flat_map(|k| {
            [1isize, -1].into_iter().map(move |s| {
                let mut v = vec![0isize; d];
                v[k] = s;
                v
            })
        })
        .collect();
    PolymerSystem::hard_core_gas(&torus_adjacency(l, d, &steps), rho)
}

/// Hard-core gas on the complete bipartite graph `K_{Δ,Δ}`: every vertex
/// has degree `Δ` and its neighbours are pairwise compatible.
pub fn delta_regular(delta: usize, rho: f64) -> Result<PolymerSystem> {
    if delta == 0 || delta > 24 {
        return Err(invalid("degree must be in 1..=24"));
    }
    let adj: Vec<Vec<usize>> = (0..2 * delta)
        .map(|i| if i < delta { (delta..2 * delta).collect() } else { (0..delta).collect() })
        .collect();
    PolymerSystem::hard_core_gas(&adj, rho)
}

/// Gas of non-empty vertex subsets of `{0..vertices}`, incompatible when
/// they intersect, with nonnegative activities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubsetGas {
    pub vertices: usize,
    /// `(support bitmask, ρ)`.
    pub polymers: Vec<(u32, f64)>,
}

impl SubsetGas {
    pub fn new(vertices: usize, mut polymers: Vec<(u32, f64)>) -> Result<Self> {
        if vertices == 0 || vertices > MAX_SUBSET_VERTICES {
            return Err(Error::CapExceeded {
                what: "subset gas vertex count",
                n: vertices,
                limit: MAX_SUBSET_VERTICES,
            });
        }
        let full = (1u32 << vertices) - 1;
        polymers.sort_by_key(|p| p.0);
        if polymers.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(invalid("repeated polymer support"));
        }
        for &(m, r) in &polymers {
            if m == 0 || m & !full != 0 {
                return Err(invalid(format!("support {m:#b} outside the vertex set")));
            }
            if !(r >= 0.0) {
                return Err(invalid("activities must be nonnegative"));
            }
        }
        Ok(SubsetGas { vertices, polymers })
    }

    /// Every subset of size `1..=max_size` with activity `rho`.
    pub fn all_subsets(vertices: usize, max_size: usize, rho: f64) -> Result<Self> {
        let full = 1u32.checked_shl(vertices as u32).map_or(0, |x| x - 1);
        SubsetGas::new(
            vertices,
            (1..=full)
                .filter(|m| m.count_ones() as usize <= max_size)
                .map(|m| (m, rho))
                .collect(),
        )
    }

    /// Each subset of size `1..=max_size` kept with probability `density`
    /// and given activity uniform in `[0, rho_max)`.
    pub fn random(vertices: usize, max_size: usize, density: f64, rho_max: f64, rng: &mut impl Rng) -> Result<Self> {
        let full = 1u32.checked_shl(vertices as u32).map_or(0, |x| x - 1);
        let mut polymers = Vec::new();
        for m in 1..=full {
            if m.count_ones() as usize <= max_size && rng.random::<f64>() < density {
                polymers.push((m, rng.random::<f64>() * rho_max));
            }
        }
        SubsetGas::new(vertices, polymers)
    }

    /// `sup_x Σ_{γ ∋ x} ρ(γ) e^{a|γ|}`.
    pub fn condition_sum(&self, a: f64) -> f64 {
        (0..self.vertices)
            .map(|x| {
                self.polymers
                    .iter()
                    .filter(|(m, _)| m >> x & 1 == 1)
                    .map(|&(m, r)| r * (a * m.count_ones() as f64).exp())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// `Ξ_Λ(sign·ρ)` for every `Λ ⊆ V` by
    /// `Ξ_Λ = Ξ_{Λ∖x} + Σ_{γ ∋ x, γ ⊆ Λ} sign·ρ(γ) Ξ_{Λ∖γ}`, `x = min Λ`.
    pub fn xi_all(&self, sign: f64) -> Vec<f64> {
        let n = 1usize << self.vertices;
        let mut by_min: Vec<Vec<(u32, f64)>> = vec![Vec::new(); self.vertices];
        for &(m, r) in &self.polymers {
            by_min[m.trailing_zeros() as usize].push((m, sign * r));
        }
        let mut xi = vec![0.0; n];
        xi[0] = 1.0;
        for lam in 1..n as u32 {
            let x = lam.trailing_zeros() as usize;
            let mut v = xi[(lam & !(1 << x)) as usize];
            for &(m, r) in &by_min[x] {
                if m & !lam == 0 {
                    v += r * xi[(lam & !m) as usize];
                }
            }
            xi[lam as usize] = v;
        }
        xi
    }

    pub fn to_system(&self) -> PolymerSystem {
        let supports: Vec<Vec<usize>> = self
            .polymers
            .iter()
            .map(|&(m, _)| (0..self.vertices).filter(|&v| m >> v & 1 == 1).collect())
            .collect();
        PolymerSystem::from_supports(
            &supports,
            self.polymers.iter().map(|&(_, r)| Complex64::new(r, 0.0)).collect(),
        )
        .expect("supports are consistent")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Induction {
    /// Pairs `(Λ, x ∈ Λ)` checked.
    pub checks: u64,
    /// Largest `-log Ξ_Λ(-ρ) + log Ξ_{Λ∖x}(-ρ)` seen.
    pub worst: f64,
    pub holds: bool,
    pub min_xi: f64,
    /// First sub-volume with `Ξ_Λ(-ρ) ≤ 0`.
    pub zero_crossing: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubsetGasReport {
    pub bound: BoundReport,
    pub induction: Induction,
}

/// Checks `sup_x Σ_{γ∋x} ρ(γ)e^{a|γ|} ≤ e^a - 1` and sweeps every sub-volume
/// and pinned vertex for `-log Ξ_Λ(-ρ) + log Ξ_{Λ∖x}(-ρ) ≤ a`.
pub fn subset_gas_check(gas: &SubsetGas, a: f64) -> Result<SubsetGasReport> {
    if !(a > 0.0) {
        return Err(invalid("a must be positive"));
    }
    let lhs = gas.condition_sum(a);
    let bound = BoundReport::new("subset-gas", "sup_x sum_{g ni x} rho(g) e^{a|g|} <= e^a - 1")
        .input("a", a)
        .input("vertices", gas.vertices as f64)
        .compare(lhs, a.exp_m1(), false);
    let xi = gas.xi_all(-1.0);
    let mut ind = Induction {
        checks: 0,
        worst: f64::NEG_INFINITY,
        holds: true,
        min_xi: xi.iter().copied().fold(f64::INFINITY, f64::min),
        zero_crossing: xi.iter().position(|&v| v <= 0.0).map(|i| i as u32),
    };
    if ind.zero_crossing.is_some() {
        ind.holds = false;
        return Ok(SubsetGasReport { bound, induction: ind });
    }
    let tol = 1e-12 * a.max(1.0);
    for lam in 1..xi.len() as u32 {
        for x in (0..gas.vertices).filter(|&x| lam >> x & 1 == 1) {
            let v = -xi[lam as usize].ln() + xi[(lam & !(1 << x)) as usize].ln();
            ind.checks += 1;
            ind.worst = ind.worst.max(v);
            if v > a + tol {
                ind.holds = false;
            }
        }
    }
    Ok(SubsetGasReport { bound, induction: ind })
}

/// Names accepted by [`bounds_catalog`].
pub const CATALOG: [&str; 11] = [
    "lattice-gas-direct",
    "lattice-gas-polymer",
    "beg",
    "spinbound",
    "spinunb",
    "co",
    "co-refined",
    "israel",
    "n-body",
    "ising-co",
    "subset-gas",
];

fn param(params: &[(&str, f64)], key: &str) -> Result<f64> {
    params
        .iter()
        .find(|(k, _)| *k == key)
        .map(|(_, v)| *v)
        .ok_or_else(|| invalid(format!("missing parameter {key}")))
}

fn report(name: &str, formula: &str, params: &[(&str, f64)], keys: &[&str]) -> Result<BoundReport> {
    let mut r = BoundReport::new(name, formula);
    for k in keys {
        r = r.input(k, param(params, k)?);
    }
    Ok(r)
}

/// Root of `4e^{x+1}x = 1 - 2e^{x/2+1}x`: largest `βc²J` for the bounded
/// spin condition.
pub fn spinbound_root() -> f64 {
    bisect(|x| 4.0 * (x + 1.0).exp() * x - (1.0 - 2.0 * (x / 2.0 + 1.0).exp() * x), 0.0, 0.1, 1e-15)
        .expect("sign change on [0, 0.1]")
}

/// Root of `-ln(1 - 4e y) = 1`, equal to `(e-1)/(4e²)`.
pub fn spinunb_root() -> f64 {
    bisect(|y| -(1.0 - 4.0 * E * y).ln() - 1.0, 0.0, 0.999 / (4.0 * E), 1e-16).expect("sign change")
}

/// Largest `βJ < 1` with `(βJ)^{1/3}/|ln βJ| < 1/(48d)`.
pub fn ising_co_root(d: usize) -> f64 {
    let target = 1.0 / (48.0 * d as f64);
    bisect(|x: f64| x.cbrt() / x.ln().abs() - target, 1e-300, 0.5, 1e-18).expect("monotone on (0, 1/2]")
}

/// Evaluates a named convergence condition from the catalog. Parameters
/// are `(name, value)` pairs; see [`CATALOG`] for the names.
///
/// - `lattice-gas-direct` (`lambda, beta, J`): `|λ| e^{βJ/2+1}(1+βJ) < 1`
/// - `lattice-gas-polymer` (`lambda, beta, J`):
///   `|λ| e^{βJ/2+1} ≤ 1/(βJ) · 1/(1 + √(1 + 4/(eβJ)))`
/// - `beg` (`d, X, Y, beta`): `β ≥ ln(d 2^{3d+4})/D`, `D = X - d(1+|Y|) > 0`
/// - `spinbound` (`beta, c, J`): `βJc² ≤ x₀`, `x₀` the root of
///   [`spinbound_root`]
/// - `spinunb` (`beta, J, C`): `βJC² ≤ (e-1)/(4e²)`
/// - `co` (`K, sigma_bar`): `K < |ln σ̄|/4`
/// - `co-refined` (`K, sigma, a`): `K[σ + K/(|ln σ| - K)] < e^a - 1`
/// - `israel` (`I, I_bar, a`): `I < e^{-Ī} a/4`
/// - `n-body` (`z, beta, J`): `z(exp(4βJe^{βJ}) - 1) < 1`
/// - `ising-co` (`beta, J, d`): `(βJ)^{1/3}/|ln βJ| < 1/(48d)`, `βJ < 1`
/// - `subset-gas` (`a, sum`): `sum ≤ e^a - 1`
pub fn bounds_catalog(name: &str, params: &[(&str, f64)]) -> Result<BoundReport> {
    let p = |k: &str| param(params, k);
    match name {
        "lattice-gas-direct" => {
            let (l, b, j) = (p("lambda")?, p("beta")?, p("J")?);
            let lhs = l.abs() * (b * j / 2.0 + 1.0).exp() * (1.0 + b * j);
            Ok(report(name, "|lambda| e^{beta J/2 + 1} (1 + beta J) < 1", params, &["lambda", "beta", "J"])?
                .compare(lhs, 1.0, true))
        }
        "lattice-gas-polymer" => {
            let (l, b, j) = (p("lambda")?, p("beta")?, p("J")?);
            let bj = b * j;
            if !(bj > 0.0) {
                return Err(Error::Precondition("beta J must be positive".into()));
            }
            let lhs = l.abs() * (bj / 2.0 + 1.0).exp();
            let rhs = 1.0 / bj / (1.0 + (1.0 + 4.0 / (E * bj)).sqrt());
            Ok(report(
                name,
                "|lambda| e^{beta J/2 + 1} <= 1/(beta J) * 1/(1 + sqrt(1 + 4/(e beta J)))",
                params,
                &["lambda", "beta", "J"],
            )?
            .compare(lhs, rhs, false))
        }
        "beg" => {
            let (d, x, y, b) = (p("d")?, p("X")?, p("Y")?, p("beta")?);
            let big_d = x - d * (1.0 + y.abs());
            if !(big_d > 0.0) {
                return Err(Error::Precondition(format!("need X > d(1+|Y|), got D = {big_d}")));
            }
            let beta_star = (d * 2f64.powf(3.0 * d + 4.0)).ln() / big_d;
            Ok(report(name, "beta >= ln(d 2^{3d+4}) / (X - d(1 + |Y|))", params, &["d", "X", "Y", "beta"])?
                .threshold(beta_star, b >= beta_star, b - beta_star)
                .note(format!("D = {big_d}")))
        }
        "spinbound" => {
            let (b, c, j) = (p("beta")?, p("c")?, p("J")?);
            let t = spinbound_root() / (c * c * j);
            Ok(report(name, "beta <= x0/(c^2 J), x0: 4e^{x+1}x = 1 - 2e^{x/2+1}x", params, &["beta", "c", "J"])?
                .threshold(t, b <= t, t - b))
        }
        "spinunb" => {
            let (b, j, c) = (p("beta")?, p("J")?, p("C")?);
            let rhs = (E - 1.0) / (4.0 * E * E);
            Ok(report(name, "beta J C^2 <= (e - 1)/(4 e^2)", params, &["beta", "J", "C"])?
                .compare(b * j * c * c, rhs, false))
        }
        "co" => {
            let (k, s) = (p("K")?, p("sigma_bar")?);
            if !(s > 0.0 && s < 1.0) {
                return Err(Error::Precondition("need 0 < sigma_bar < 1".into()));
            }
            Ok(report(name, "K < |ln sigma_bar| / 4", params, &["K", "sigma_bar"])?.compare(k, s.ln().abs() / 4.0, true))
        }
        "co-refined" => {
            let (k, s, a) = (p("K")?, p("sigma")?, p("a")?);
            if !(s > 0.0 && s < 1.0) || k >= s.ln().abs() {
                return Err(Error::Precondition("need 0 < sigma < 1 and K < |ln sigma|".into()));
            }
            let lhs = k * (s + k / (s.ln().abs() - k));
            Ok(report(name, "K [sigma + K/(|ln sigma| - K)] < e^a - 1", params, &["K", "sigma", "a"])?
                .compare(lhs, a.exp_m1(), true))
        }
        "israel" => {
            let (i, ib, a) = (p("I")?, p("I_bar")?, p("a")?);
            Ok(report(name, "I(a) < e^{-I_bar} a / 4", params, &["I", "I_bar", "a"])?
                .compare(i, (-ib).exp() * a / 4.0, true))
        }
        "n-body" => {
            let (z, b, j) = (p("z")?, p("beta")?, p("J")?);
            let lhs = z * (4.0 * b * j * (b * j).exp()).exp_m1();
            Ok(report(name, "z (exp[4 beta J e^{beta J}] - 1) < 1", params, &["z", "beta", "J"])?.compare(lhs, 1.0, true))
        }
        "ising-co" => {
            let (b, j, d) = (p("beta")?, p("J")?, p("d")?);
            let x = b * j;
            if !(x > 0.0 && x < 1.0) || d < 1.0 {
                return Err(Error::Precondition("need 0 < beta J < 1 and d >= 1".into()));
            }
            let root = ising_co_root(d as usize);
            Ok(report(name, "(beta J)^{1/3} / |ln(beta J)| < 1/(48 d)", params, &["beta", "J", "d"])?
                .compare(x.cbrt() / x.ln().abs(), 1.0 / (48.0 * d), true)
                .note(format!("largest admissible beta J = {root:.6e}")))
        }
        "subset-gas" => {
            let (a, s) = (p("a")?, p("sum")?);
            Ok(report(name, "sup_x sum_{g ni x} rho(g) e^{a|g|} <= e^a - 1", params, &["a", "sum"])?
                .compare(s, a.exp_m1(), false))
        }
        _ => Err(Error::UnknownName(name.to_string())),
    }
}
