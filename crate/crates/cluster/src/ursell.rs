//! Ursell coefficients `Φᵀ(V) = Σ_{g connected} Π_{ij∈g} (e^{-V_ij} - 1)`
//! computed three ways (connected-graph sum, set-partition formula, tree
//! identity over a partition scheme), the tree-graph bound, and counts of
//! Penrose-type tree families for hard-core polymer systems.
//!
//! The routines are generic over the scalar type of the Boltzmann weights
//! `w_ij = e^{-V_ij}`, so the same code runs in `f64`, `i64` and exact
//! rational arithmetic. `V = +∞` is stored as `f64::INFINITY` and maps to
//! `w = 0`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, Zero};
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::graphs::{
    self, adjacency_from_bits, kruskal_closure, pair_count, pair_index, pairs, penrose_closure, Caps,
    EdgeOrder, LabeledGraph, RootedTree,
};

/// Largest `n` accepted by the set-partition formula.
pub const PARTITION_CAP: usize = 10;

/// Arithmetic the Ursell routines run in.
pub trait Scalar: Clone + Num + FromPrimitive + Send + Sync {}
impl<T: Clone + Num + FromPrimitive + Send + Sync> Scalar for T {}

/// Symmetric pair interaction `V_ij` on `[n]`, values in `ℝ ∪ {+∞}`.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionMatrix {
    n: usize,
    v: Vec<f64>,
}

impl InteractionMatrix {
    pub fn zeros(n: usize) -> Self {
        InteractionMatrix {
            n,
            v: vec![0.0; pair_count(n)],
        }
    }

    /// Values in lexicographic pair order.
    pub fn from_pairs(n: usize, v: Vec<f64>) -> Result<Self> {
        if n > graphs::MAX_VERTICES {
            return Err(invalid(format!("at most {} particles", graphs::MAX_VERTICES)));
        }
        if v.len() != pair_count(n) {
            return Err(invalid(format!("expected {} pair values, got {}", pair_count(n), v.len())));
        }
        if let Some(x) = v.iter().find(|x| x.is_nan() || **x == f64::NEG_INFINITY) {
            return Err(invalid(format!("pair value {x} not in R or +inf")));
        }
        Ok(InteractionMatrix { n, v })
    }

    pub fn from_fn<F: FnMut(usize, usize) -> f64>(n: usize, mut f: F) -> Result<Self> {
        let v = pairs(n).into_iter().map(|(i, j)| f(i, j)).collect();
        Self::from_pairs(n, v)
    }

    /// `+∞` on the edges of `g`, 0 elsewhere.
    pub fn hard_core(g: &LabeledGraph) -> Self {
        let n = g.n();
        let v = pairs(n)
            .into_iter()
            .map(|(i, j)| if g.has_edge(i, j) { f64::INFINITY } else { 0.0 })
            .collect();
        InteractionMatrix { n, v }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.v[pair_index(self.n, i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.v[pair_index(self.n, i, j)] = value;
    }

    pub fn values(&self) -> &[f64] {
        &self.v
    }

    /// `e^{-V_ij}` per pair, with `e^{-∞} = 0`.
    pub fn weights(&self) -> Vec<f64> {
        self.v.iter().map(|&x| (-x).exp()).collect()
    }

    /// Exact weights when every `V_ij` is 0 or `+∞`.
    pub fn exact_weights(&self) -> Option<Vec<BigRational>> {
        self.v
            .iter()
            .map(|&x| {
                if x == 0.0 {
                    Some(BigRational::one())
                } else if x == f64::INFINITY {
                    Some(BigRational::zero())
                } else {
                    None
                }
            })
            .collect()
    }

    /// Edge order by `V`, ties broken lexicographically.
    pub fn edge_order(&self) -> EdgeOrder {
        EdgeOrder::from_weights(self.n, &self.v).expect("values validated on construction")
    }

    /// `Σ_{pairs ⊆ S} V_ij` for the vertex set `mask`.
    pub fn subset_energy(&self, mask: u32) -> f64 {
        let mut e = 0.0;
        for (k, (i, j)) in pairs(self.n).into_iter().enumerate() {
            if mask >> i & 1 == 1 && mask >> j & 1 == 1 {
                e += self.v[k];
            }
        }
        e
    }
}

impl fmt::Display for InteractionMatrix {
    /// `"n; i j v; ..."`, listing every pair.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.n)?;
        for (k, (i, j)) in pairs(self.n).into_iter().enumerate() {
            let x = self.v[k];
            if x == f64::INFINITY {
                write!(f, "; {i} {j} inf")?;
            } else {
                write!(f, "; {i} {j} {x}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for InteractionMatrix {
    type Err = Error;

    /// Parses `"n; i j v; i j v ..."`; newlines also separate triplets,
    /// unlisted pairs are 0 and `inf` denotes `+∞`.
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split([';', '\n']).map(str::trim).filter(|t| !t.is_empty());
        let head = parts.next().ok_or_else(|| Error::Parse("empty matrix".into()))?;
        let n: usize = head.parse().map_err(|_| Error::Parse(format!("bad size {head:?}")))?;
        let mut m = InteractionMatrix::zeros(n);
        let mut seen = vec![false; pair_count(n)];
        for t in parts {
            let f: Vec<&str> = t.split_whitespace().collect();
            if f.len() != 3 {
                return Err(Error::Parse(format!("expected 'i j v', got {t:?}")));
            }
            let i: usize = f[0].parse().map_err(|_| Error::Parse(format!("bad index in {t:?}")))?;
            let j: usize = f[1].parse().map_err(|_| Error::Parse(format!("bad index in {t:?}")))?;
            if i == j || i >= n || j >= n {
                return Err(Error::Parse(format!("pair {i} {j} invalid for n = {n}")));
            }
            let v = match f[2] {
                "inf" | "+inf" | "Inf" | "infinity" => f64::INFINITY,
                x => x.parse().map_err(|_| Error::Parse(format!("bad value in {t:?}")))?,
            };
            let k = pair_index(n, i, j);
            if seen[k] {
                return Err(Error::Parse(format!("pair {i} {j} given twice")));
            }
            seen[k] = true;
            m.v[k] = v;
        }
        InteractionMatrix::from_pairs(n, m.v)
    }
}

/// Nonnegative numbers `B_i` with `Σ_{pairs ⊆ S} V_ij ≥ -Σ_{i∈S} B_i` for
/// every vertex subset `S`.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityVector(pub Vec<f64>);

impl StabilityVector {
    pub fn uniform(n: usize, b: f64) -> Self {
        StabilityVector(vec![b; n])
    }

    /// Checks the subset inequality by brute force over all `2^n` subsets.
    pub fn certify(&self, v: &InteractionMatrix) -> Result<()> {
        let n = v.n();
        if self.0.len() != n {
            return Err(invalid(format!("need {n} stability constants, got {}", self.0.len())));
        }
        if let Some(b) = self.0.iter().find(|b| !(**b >= 0.0)) {
            return Err(invalid(format!("stability constant {b} is negative")));
        }
        let adj_pairs = pairs(n);
        for mask in 1u32..(1 << n) {
            if mask.count_ones() < 2 {
                continue;
            }
            let mut energy = 0.0;
            for (k, &(i, j)) in adj_pairs.iter().enumerate() {
                if mask >> i & 1 == 1 && mask >> j & 1 == 1 {
                    energy += v.values()[k];
                }
            }
            let budget: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| self.0[i]).sum();
            if energy < -budget - 1e-12 * budget.max(1.0) {
                return Err(Error::StabilityCertificate {
                    subset: mask as u64,
                    energy,
                    budget,
                });
            }
        }
        Ok(())
    }
}

fn sum_chunks<S: Scalar, T: Sync, F>(items: &[T], f: F) -> S
where
    F: Fn(&T) -> S + Sync,
{
    // Fixed-size chunks summed in order keep floating-point results
    // independent of the thread count.
    let partial: Vec<S> = items
        .par_chunks(2048)
        .map(|c| c.iter().fold(S::zero(), |acc, x| acc + f(x)))
        .collect();
    partial.into_iter().fold(S::zero(), |acc, x| acc + x)
}

fn product_over<S: Scalar>(bits: u64, factors: &[S]) -> S {
    let mut p = S::one();
    let mut b = bits;
    while b != 0 {
        let k = b.trailing_zeros() as usize;
        b &= b - 1;
        p = p * factors[k].clone();
    }
    p
}

fn check_weights<S>(n: usize, w: &[S]) -> Result<()> {
    if n == 0 {
        return Err(invalid("need n >= 1"));
    }
    if w.len() != pair_count(n) {
        return Err(invalid(format!("expected {} weights, got {}", pair_count(n), w.len())));
    }
    Ok(())
}

/// `Σ_{g connected} Π_{ij∈g} (w_ij - 1)` over connected graphs on `[n]`.
pub fn graph_sum_weights<S: Scalar>(n: usize, w: &[S], caps: &Caps) -> Result<S> {
    check_weights(n, w)?;
    if n == 1 {
        return Ok(S::one());
    }
    let masks = graphs::connected_masks(n, caps)?;
    let f: Vec<S> = w.iter().map(|x| x.clone() - S::one()).collect();
    Ok(sum_chunks(&masks, |&b| product_over(b, &f)))
}

/// `Σ_k (-1)^{k-1}(k-1)! Σ_{partitions into k blocks} Π_blocks W(block)`
/// with `W(S) = Π_{ij⊆S} w_ij`, by dynamic programming over subsets.
pub fn partition_formula_weights<S: Scalar>(n: usize, w: &[S]) -> Result<S> {
    check_weights(n, w)?;
    if n > PARTITION_CAP {
        return Err(Error::CapExceeded {
            what: "partition formula",
            n,
            limit: PARTITION_CAP,
        });
    }
    let size = 1usize << n;
    // W(S) built from W(S without its top vertex).
    let mut block = vec![S::one(); size];
    for mask in 1..size {
        let top = usize::BITS as usize - 1 - mask.leading_zeros() as usize;
        let rest = mask & !(1 << top);
        let mut p = block[rest].clone();
        let mut r = rest;
        while r != 0 {
            let i = r.trailing_zeros() as usize;
            r &= r - 1;
            p = p * w[pair_index(n, i, top)].clone();
        }
        block[mask] = p;
    }
    // g[k][mask]: sum over partitions of `mask` into exactly k blocks.
    let mut g = vec![vec![S::zero(); size]; n + 1];
    g[0][0] = S::one();
    for k in 1..=n {
        for mask in 1..size {
            let low = mask & mask.wrapping_neg();
            let others = mask & !low;
            let mut acc = S::zero();
            let mut sub = others;
            loop {
                let b = sub | low;
                let remaining = mask & !b;
                if (remaining.count_ones() as usize) >= k - 1 && !g[k - 1][remaining].is_zero() {
                    acc = acc + block[b].clone() * g[k - 1][remaining].clone();
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & others;
            }
            g[k][mask] = acc;
        }
    }
    let full = size - 1;
    let mut total = S::zero();
    let mut fact = S::one();
    for k in 1..=n {
        if k > 1 {
            fact = fact * S::from_usize(k - 1).expect("small integer");
        }
        let term = fact.clone() * g[k][full].clone();
        total = if k % 2 == 1 { total + term } else { total - term };
    }
    Ok(total)
}

/// `Σ_τ Π_{ij∈τ} (w_ij - 1) · Π_{ij ∈ closure(τ)∖τ} w_ij` over trees on `[n]`.
pub fn tree_identity_weights<S, F>(n: usize, w: &[S], caps: &Caps, closure: F) -> Result<S>
where
    S: Scalar,
    F: Fn(&RootedTree) -> LabeledGraph + Sync,
{
    check_weights(n, w)?;
    if n == 1 {
        return Ok(S::one());
    }
    let trees = graphs::trees(n, caps)?;
    let f: Vec<S> = w.iter().map(|x| x.clone() - S::one()).collect();
    Ok(sum_chunks(&trees, |t| {
        let base = t.graph().bits();
        let extra = closure(t).bits() & !base;
        product_over(base, &f) * product_over(extra, w)
    }))
}

/// Partition scheme used by [`ursell_tree_identity`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Depth-based closure on trees rooted at vertex 0.
    Penrose,
    /// Closure under the edge order induced by the interaction values.
    Kruskal,
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "penrose" => Ok(Scheme::Penrose),
            "kruskal" => Ok(Scheme::Kruskal),
            _ => Err(Error::UnknownName(s.to_string())),
        }
    }
}

pub fn ursell_graph_sum(v: &InteractionMatrix, caps: &Caps) -> Result<f64> {
    graph_sum_weights(v.n(), &v.weights(), caps)
}

pub fn ursell_partition_formula(v: &InteractionMatrix) -> Result<f64> {
    partition_formula_weights(v.n(), &v.weights())
}

pub fn ursell_tree_identity(v: &InteractionMatrix, scheme: Scheme, caps: &Caps) -> Result<f64> {
    let w = v.weights();
    match scheme {
        Scheme::Penrose => tree_identity_weights(v.n(), &w, caps, penrose_closure),
        Scheme::Kruskal => {
            let order = v.edge_order();
            tree_identity_weights(v.n(), &w, caps, |t| kruskal_closure(t, &order))
        }
    }
}

/// The three formulas in exact rational arithmetic for hard-core matrices
/// (every `V_ij ∈ {0, +∞}`): graph sum, partition formula, Penrose and
/// Kruskal tree identities.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactUrsell {
    pub graph_sum: BigRational,
    pub partition: BigRational,
    pub penrose: BigRational,
    pub kruskal: BigRational,
}

impl ExactUrsell {
    pub fn agree(&self) -> bool {
        self.graph_sum == self.partition && self.graph_sum == self.penrose && self.graph_sum == self.kruskal
    }
}

pub fn ursell_exact(v: &InteractionMatrix, caps: &Caps) -> Result<ExactUrsell> {
    let w = v
        .exact_weights()
        .ok_or_else(|| invalid("exact mode needs every V_ij in {0, +inf}"))?;
    let n = v.n();
    let order = v.edge_order();
    Ok(ExactUrsell {
        graph_sum: graph_sum_weights(n, &w, caps)?,
        partition: partition_formula_weights(n, &w)?,
        penrose: tree_identity_weights(n, &w, caps, penrose_closure)?,
        kruskal: tree_identity_weights(n, &w, caps, |t| kruskal_closure(t, &order))?,
    })
}

/// `e^{ΣB_i} Σ_τ Π_{ij∈τ} (1 - e^{-|V_ij|})`, after checking the stability
/// certificate. Dominates `|Φᵀ(V)|`.
pub fn tree_graph_bound(v: &InteractionMatrix, b: &StabilityVector, caps: &Caps) -> Result<f64> {
    b.certify(v)?;
    let n = v.n();
    if n == 1 {
        return Ok(1.0);
    }
    let f: Vec<f64> = v.values().iter().map(|x| 1.0 - (-x.abs()).exp()).collect();
    let trees = graphs::trees(n, caps)?;
    let sum: f64 = sum_chunks(&trees, |t| product_over(t.graph().bits(), &f));
    Ok(b.0.iter().sum::<f64>().exp() * sum)
}

/// Tree families on the vertices `{0..n}` of a hard-core polymer system,
/// ordered by inclusion: Penrose ⊆ Weak ⊆ Dobrushin ⊆ KoteckyPreiss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TreeFamily {
    /// Trees `τ ⊆ g` with `penrose_closure(τ) ∩ g = τ`.
    Penrose,
    /// Tree edges incompatible, siblings pairwise compatible.
    Weak,
    /// Tree edges incompatible, siblings carry distinct polymers.
    Dobrushin,
    /// Tree edges incompatible.
    KoteckyPreiss,
}

/// Number of trees rooted at `root` in `family`, where tree vertex `i`
/// carries the polymer `labels[i]` and `incompatible(a, b)` is the
/// (symmetric) polymer incompatibility relation.
pub fn tree_family_count<F>(
    labels: &[usize],
    incompatible: F,
    root: usize,
    family: TreeFamily,
    caps: &Caps,
) -> Result<u64>
where
    F: Fn(usize, usize) -> bool,
{
    let m = labels.len();
    if root >= m {
        return Err(invalid(format!("root {root} out of range")));
    }
    let mut g = LabeledGraph::empty(m);
    for i in 0..m {
        for j in i + 1..m {
            if incompatible(labels[i], labels[j]) {
                g.insert(i, j);
            }
        }
    }
    let adj = adjacency_from_bits(m, g.bits());
    let trees = graphs::trees(m, caps)?;
    let count = trees
        .par_iter()
        .filter(|t| {
            if !t.graph().is_subgraph_of(&g) {
                return false;
            }
            let t = if root == 0 {
                (*t).clone()
            } else {
                t.rerooted(root).expect("tree")
            };
            match family {
                TreeFamily::KoteckyPreiss => true,
                TreeFamily::Penrose => penrose_closure(&t).bits() & g.bits() == t.graph().bits(),
                TreeFamily::Weak => (0..m).all(|v| {
                    let kids = t.children(v);
                    kids.iter().enumerate().all(|(a, &x)| kids[a + 1..].iter().all(|&y| adj[x] >> y & 1 == 0))
                }),
                TreeFamily::Dobrushin => (0..m).all(|v| {
                    let kids = t.children(v);
                    kids.iter().enumerate().all(|(a, &x)| kids[a + 1..].iter().all(|&y| labels[x] != labels[y]))
                }),
            }
        })
        .count();
    Ok(count as u64)
}

/// Penrose trees of the incompatibility graph `g`, rooted at `root`. Equals
/// `|Φᵀ|` of the matrix with `V = +∞` on the edges of `g`.
pub fn hardcore_penrose_count(g: &LabeledGraph, root: usize, caps: &Caps) -> Result<u64> {
    let labels: Vec<usize> = (0..g.n()).collect();
    tree_family_count(&labels, |a, b| a != b && g.has_edge(a, b), root, TreeFamily::Penrose, caps)
}

/// Worst case found by [`stabpen_search`].
#[derive(Debug, Clone, PartialEq)]
pub struct StabpenReport {
    pub matrices: usize,
    /// `max -Σ_{ij ∈ penrose_closure(τ)∖τ} V_ij / n` over all matrices and trees.
    pub worst_ratio: f64,
    pub worst_matrix: Option<usize>,
    pub worst_tree: Option<LabeledGraph>,
}

/// Scans every tree for each matrix and records the largest energy per
/// particle released by the Penrose-closure edges outside the tree. A
/// bounded ratio across many configurations is evidence for, never proof
/// of, a stability bound of that form.
pub fn stabpen_search<I>(matrices: I, caps: &Caps) -> Result<StabpenReport>
where
    I: IntoIterator<Item = InteractionMatrix>,
{
    let mut report = StabpenReport {
        matrices: 0,
        worst_ratio: f64::NEG_INFINITY,
        worst_matrix: None,
        worst_tree: None,
    };
    for (idx, v) in matrices.into_iter().enumerate() {
        report.matrices += 1;
        let n = v.n();
        for t in graphs::trees(n, caps)?.iter() {
            let extra = penrose_closure(t).bits() & !t.graph().bits();
            let mut e = 0.0;
            let mut b = extra;
            while b != 0 {
                let k = b.trailing_zeros() as usize;
                b &= b - 1;
                e += v.values()[k];
            }
            let ratio = -e / n as f64;
            if ratio > report.worst_ratio {
                report.worst_ratio = ratio;
                report.worst_matrix = Some(idx);
                report.worst_tree = Some(*t.graph());
            }
        }
    }
    Ok(report)
}

/// `(-1)^{n-1}(n-1)!` as a rational, the Ursell coefficient of `n` mutually
/// excluding particles.
pub fn complete_hardcore_value(n: usize) -> BigRational {
    let f: BigInt = (1..n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k));
    let f = if n % 2 == 0 { -f } else { f };
    BigRational::from_integer(f)
}
