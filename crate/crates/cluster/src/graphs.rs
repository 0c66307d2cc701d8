//! Labelled graphs and trees on the vertex set `{0, .., n-1}`, the two
//! partition schemes (Penrose and Kruskal) and an exhaustive checker for
//! partition schemes.
//!
//! A graph is stored as a bitmask over the `n(n-1)/2` unordered pairs in
//! lexicographic order `(0,1), (0,2), .., (0,n-1), (1,2), ..`.

use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use num_bigint::BigUint;
use num_traits::One;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};

/// Largest vertex count whose pair set fits a `u64` mask.
pub const MAX_VERTICES: usize = 11;

pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Position of the pair `{i, j}` in lexicographic order.
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i < j { (i, j) } else { (j, i) };
    debug_assert!(i != j && j < n);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

/// All pairs of `[n]` in lexicographic order.
pub fn pairs(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(pair_count(n));
    for i in 0..n {
        for j in i + 1..n {
            out.push((i, j));
        }
    }
    out
}

/// Enumeration limits. Graph enumeration is exponential in `n(n-1)/2`,
/// tree enumeration in `n log n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    pub graphs: usize,
    pub trees: usize,
}

impl Caps {
    pub const HARD_GRAPHS: usize = 8;
    pub const HARD_TREES: usize = 10;

    /// Caps with graph enumeration extended to `n = 8`.
    pub fn extended() -> Self {
        Caps {
            graphs: Self::HARD_GRAPHS,
            trees: 9,
        }
    }

    pub fn check_graphs(&self, n: usize) -> Result<()> {
        let limit = self.graphs.min(Self::HARD_GRAPHS);
        if n > limit {
            return Err(Error::CapExceeded {
                what: "graph enumeration",
                n,
                limit,
            });
        }
        Ok(())
    }

    pub fn check_trees(&self, n: usize) -> Result<()> {
        let limit = self.trees.min(Self::HARD_TREES);
        if n > limit {
            return Err(Error::CapExceeded {
                what: "tree enumeration",
                n,
                limit,
            });
        }
        Ok(())
    }
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            graphs: 7,
            trees: 9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LabeledGraph {
    n: usize,
    bits: u64,
}

impl LabeledGraph {
    pub fn empty(n: usize) -> Self {
        assert!(n <= MAX_VERTICES, "at most {MAX_VERTICES} vertices");
        LabeledGraph { n, bits: 0 }
    }

    pub fn complete(n: usize) -> Self {
        let m = pair_count(n);
        LabeledGraph {
            n,
            bits: full_mask(m),
        }
    }

    pub fn from_bits(n: usize, bits: u64) -> Result<Self> {
        if n > MAX_VERTICES {
            return Err(invalid(format!("at most {MAX_VERTICES} vertices, got {n}")));
        }
        if bits & !full_mask(pair_count(n)) != 0 {
            return Err(invalid(format!("bitmask {bits:#x} has bits beyond {} pairs", pair_count(n))));
        }
        Ok(LabeledGraph { n, bits })
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = LabeledGraph::from_bits(n, 0)?;
        for &(i, j) in edges {
            if i == j {
                return Err(invalid(format!("self-loop at vertex {i}")));
            }
            if i >= n || j >= n {
                return Err(invalid(format!("edge {i}-{j} out of range for n = {n}")));
            }
            if g.has_edge(i, j) {
                return Err(invalid(format!("duplicate edge {i}-{j}")));
            }
            g.insert(i, j);
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.bits >> pair_index(self.n, i, j) & 1 == 1
    }

    pub fn insert(&mut self, i: usize, j: usize) {
        self.bits |= 1 << pair_index(self.n, i, j);
    }

    pub fn remove(&mut self, i: usize, j: usize) {
        self.bits &= !(1 << pair_index(self.n, i, j));
    }

    pub fn edge_count(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        pairs(self.n)
            .into_iter()
            .enumerate()
            .filter(|(k, _)| self.bits >> k & 1 == 1)
            .map(|(_, p)| p)
            .collect()
    }

    /// Neighbour bitmask of every vertex.
    pub fn adjacency(&self) -> Vec<u32> {
        adjacency_from_bits(self.n, self.bits)
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency().iter().map(|a| a.count_ones() as usize).collect()
    }

    pub fn is_connected(&self) -> bool {
        is_connected_bits(self.n, self.bits)
    }

    pub fn is_subgraph_of(&self, other: &LabeledGraph) -> bool {
        self.n == other.n && self.bits & !other.bits == 0
    }

    pub fn union(&self, other: &LabeledGraph) -> LabeledGraph {
        assert_eq!(self.n, other.n);
        LabeledGraph {
            n: self.n,
            bits: self.bits | other.bits,
        }
    }

    pub fn difference(&self, other: &LabeledGraph) -> LabeledGraph {
        assert_eq!(self.n, other.n);
        LabeledGraph {
            n: self.n,
            bits: self.bits & !other.bits,
        }
    }

    pub fn to_hex(&self) -> String {
        format!("{};{:#x}", self.n, self.bits)
    }
}

impl fmt::Display for LabeledGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let edges: Vec<String> = self.edges().iter().map(|(i, j)| format!("{i}-{j}")).collect();
        write!(f, "{};{}", self.n, edges.join(","))
    }
}

impl FromStr for LabeledGraph {
    type Err = Error;

    /// Accepts `"n;i-j,k-l"` or `"n;0x<hex bitmask>"`.
    fn from_str(s: &str) -> Result<Self> {
        let (head, body) = s
            .split_once(';')
            .ok_or_else(|| Error::Parse(format!("expected 'n;edges', got {s:?}")))?;
        let n: usize = head
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad vertex count {head:?}")))?;
        let body = body.trim();
        if let Some(hex) = body.strip_prefix("0x").or_else(|| body.strip_prefix("0X")) {
            let bits = u64::from_str_radix(hex, 16)
                .map_err(|_| Error::Parse(format!("bad hex bitmask {body:?}")))?;
            return LabeledGraph::from_bits(n, bits);
        }
        let mut edges = Vec::new();
        for tok in body.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (a, b) = tok
                .split_once('-')
                .ok_or_else(|| Error::Parse(format!("bad edge {tok:?}")))?;
            let i = a.trim().parse().map_err(|_| Error::Parse(format!("bad edge {tok:?}")))?;
            let j = b.trim().parse().map_err(|_| Error::Parse(format!("bad edge {tok:?}")))?;
            edges.push((i, j));
        }
        LabeledGraph::from_edges(n, &edges)
    }
}

fn full_mask(m: usize) -> u64 {
    if m >= 64 {
        u64::MAX
    } else {
        (1u64 << m) - 1
    }
}

pub(crate) fn adjacency_from_bits(n: usize, bits: u64) -> Vec<u32> {
    let mut adj = vec![0u32; n];
    let mut k = 0;
    for i in 0..n {
        for j in i + 1..n {
            if bits >> k & 1 == 1 {
                adj[i] |= 1 << j;
                adj[j] |= 1 << i;
            }
            k += 1;
        }
    }
    adj
}

pub(crate) fn component_of(adj: &[u32], start: usize, within: u32) -> u32 {
    let mut seen = 1u32 << start;
    let mut frontier = seen;
    while frontier != 0 {
        let v = frontier.trailing_zeros() as usize;
        frontier &= frontier - 1;
        let new = adj[v] & within & !seen;
        seen |= new;
        frontier |= new;
    }
    seen
}

/// Connectivity of the subgraph induced on the vertex set `within`.
pub(crate) fn is_connected_within(adj: &[u32], within: u32) -> bool {
    if within == 0 {
        return true;
    }
    component_of(adj, within.trailing_zeros() as usize, within) == within
}

fn is_connected_bits(n: usize, bits: u64) -> bool {
    if n <= 1 {
        return true;
    }
    if (bits.count_ones() as usize) < n - 1 {
        return false;
    }
    let adj = adjacency_from_bits(n, bits);
    is_connected_within(&adj, (1u32 << n) - 1)
}

pub fn is_connected(g: &LabeledGraph) -> bool {
    g.is_connected()
}

/// Every graph on `[n]`, in increasing bitmask order.
pub fn enumerate_graphs(n: usize, caps: &Caps) -> Result<impl Iterator<Item = LabeledGraph>> {
    check_min(n, 1)?;
    caps.check_graphs(n)?;
    let total = 1u64 << pair_count(n);
    Ok((0..total).map(move |bits| LabeledGraph { n, bits }))
}

fn check_min(n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(invalid(format!("need n >= {min}, got {n}")));
    }
    Ok(())
}

/// Bitmasks of all connected graphs on `[n]`, memoised per `n`.
pub fn connected_masks(n: usize, caps: &Caps) -> Result<Arc<Vec<u64>>> {
    check_min(n, 1)?;
    caps.check_graphs(n)?;
    static CACHE: [OnceLock<Arc<Vec<u64>>>; Caps::HARD_GRAPHS + 1] =
        [const { OnceLock::new() }; Caps::HARD_GRAPHS + 1];
    Ok(CACHE[n]
        .get_or_init(|| {
            let total = 1u64 << pair_count(n);
            let v: Vec<u64> = (0..total)
                .into_par_iter()
                .filter(|&b| is_connected_bits(n, b))
                .collect();
            Arc::new(v)
        })
        .clone())
}

pub fn count_connected(n: usize, caps: &Caps) -> Result<u64> {
    Ok(connected_masks(n, caps)?.len() as u64)
}

/// `Σ_{g connected} (-1)^{|E_g|}`; equals `(-1)^{n-1}(n-1)!`.
pub fn alternating_connected_sum(n: usize, caps: &Caps) -> Result<i64> {
    let masks = connected_masks(n, caps)?;
    Ok(masks
        .par_iter()
        .map(|b| if b.count_ones() % 2 == 0 { 1i64 } else { -1 })
        .sum())
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RootedTree {
    graph: LabeledGraph,
    root: usize,
    parent: Vec<usize>,
    depth: Vec<usize>,
}

const NO_PARENT: usize = usize::MAX;

impl RootedTree {
    pub fn new(graph: LabeledGraph, root: usize) -> Result<Self> {
        let n = graph.n();
        if n == 0 || root >= n {
            return Err(invalid(format!("root {root} out of range for n = {n}")));
        }
        if graph.edge_count() != n - 1 || !graph.is_connected() {
            return Err(invalid(format!("{graph} is not a tree")));
        }
        let adj = graph.adjacency();
        let mut parent = vec![NO_PARENT; n];
        let mut depth = vec![0; n];
        let mut seen = 1u32 << root;
        let mut queue = vec![root];
        let mut head = 0;
        while head < queue.len() {
            let v = queue[head];
            head += 1;
            let mut next = adj[v] & !seen;
            while next != 0 {
                let w = next.trailing_zeros() as usize;
                next &= next - 1;
                seen |= 1 << w;
                parent[w] = v;
                depth[w] = depth[v] + 1;
                queue.push(w);
            }
        }
        Ok(RootedTree {
            graph,
            root,
            parent,
            depth,
        })
    }

    pub fn graph(&self) -> &LabeledGraph {
        &self.graph
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        (self.parent[v] != NO_PARENT).then_some(self.parent[v])
    }

    pub fn depth(&self, v: usize) -> usize {
        self.depth[v]
    }

    pub fn children(&self, v: usize) -> Vec<usize> {
        (0..self.n()).filter(|&w| self.parent[w] == v).collect()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.graph.degrees()
    }

    pub fn rerooted(&self, root: usize) -> Result<RootedTree> {
        RootedTree::new(self.graph, root)
    }

    /// Vertices on the tree path from `a` to `b`, both ends included.
    pub fn path(&self, a: usize, b: usize) -> Vec<usize> {
        let (mut x, mut y) = (a, b);
        let mut left = vec![];
        let mut right = vec![];
        while self.depth[x] > self.depth[y] {
            left.push(x);
            x = self.parent[x];
        }
        while self.depth[y] > self.depth[x] {
            right.push(y);
            y = self.parent[y];
        }
        while x != y {
            left.push(x);
            right.push(y);
            x = self.parent[x];
            y = self.parent[y];
        }
        left.push(x);
        left.extend(right.into_iter().rev());
        left
    }
}

/// Decodes a Prüfer sequence (entries in `0..n`, length `n-2`) to a tree
/// rooted at 0.
pub fn prufer_decode(n: usize, seq: &[usize]) -> Result<RootedTree> {
    if n < 2 || seq.len() != n - 2 || seq.iter().any(|&s| s >= n) {
        return Err(invalid(format!("bad Prüfer sequence {seq:?} for n = {n}")));
    }
    let mut degree = vec![1usize; n];
    for &s in seq {
        degree[s] += 1;
    }
    let mut g = LabeledGraph::empty(n);
    for &s in seq {
        let leaf = (0..n).find(|&v| degree[v] == 1).expect("a leaf always exists");
        g.insert(leaf, s);
        degree[leaf] -= 1;
        degree[s] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    g.insert(rest[0], rest[1]);
    RootedTree::new(g, 0)
}

/// All `n^{n-2}` labelled trees on `[n]`, rooted at 0, via the Prüfer bijection.
pub fn enumerate_trees(n: usize, caps: &Caps) -> Result<impl Iterator<Item = RootedTree>> {
    check_min(n, 1)?;
    caps.check_trees(n)?;
    let len = n.saturating_sub(2);
    let total = if n == 1 { 1 } else { (n as u64).pow(len as u32) };
    Ok((0..total).map(move |mut code| {
        if n == 1 {
            return RootedTree::new(LabeledGraph::empty(1), 0).expect("single vertex");
        }
        let mut seq = vec![0; len];
        for slot in seq.iter_mut().rev() {
            *slot = (code % n as u64) as usize;
            code /= n as u64;
        }
        prufer_decode(n, &seq).expect("valid sequence")
    }))
}

/// Trees on `[n]` rooted at 0, memoised per `n`.
pub fn trees(n: usize, caps: &Caps) -> Result<Arc<Vec<RootedTree>>> {
    check_min(n, 1)?;
    caps.check_trees(n)?;
    static CACHE: [OnceLock<Arc<Vec<RootedTree>>>; Caps::HARD_TREES + 1] =
        [const { OnceLock::new() }; Caps::HARD_TREES + 1];
    Ok(CACHE[n]
        .get_or_init(|| {
            Arc::new(
                enumerate_trees(n, &Caps { graphs: 0, trees: Caps::HARD_TREES })
                    .expect("within hard cap")
                    .collect(),
            )
        })
        .clone())
}

/// `n^{n-2}`.
pub fn tree_count(n: usize) -> BigUint {
    if n < 2 {
        return BigUint::one();
    }
    BigUint::from(n).pow(n as u32 - 2)
}

/// `(n-2)! / Π (d_i - 1)!`, the number of trees with degree sequence `d`.
pub fn tree_count_by_degrees(degrees: &[usize]) -> Result<BigUint> {
    let n = degrees.len();
    if n < 2 {
        return Err(invalid("need at least two vertices"));
    }
    if degrees.iter().any(|&d| d == 0) {
        return Err(invalid("every degree must be at least 1"));
    }
    let sum: usize = degrees.iter().sum();
    if sum != 2 * n - 2 {
        return Err(invalid(format!("degree sum {sum} != 2n-2 = {}", 2 * n - 2)));
    }
    let mut num = factorial(n - 2);
    for &d in degrees {
        num /= factorial(d - 1);
    }
    Ok(num)
}

fn factorial(k: usize) -> BigUint {
    (1..=k).fold(BigUint::one(), |acc, i| acc * BigUint::from(i))
}

/// Penrose closure: adds `{i,j}` when `i, j` have equal depth, or when
/// `d(j) = d(i) - 1` and `j` is larger than the parent of `i`.
pub fn penrose_closure(tree: &RootedTree) -> LabeledGraph {
    let n = tree.n();
    let mut g = *tree.graph();
    for i in 0..n {
        for j in 0..n {
            if i == j || g.has_edge(i, j) {
                continue;
            }
            let same = tree.depth(i) == tree.depth(j);
            let up = match tree.parent(i) {
                Some(p) => tree.depth(j) + 1 == tree.depth(i) && j > p,
                None => false,
            };
            if same || up {
                g.insert(i, j);
            }
        }
    }
    g
}

/// Inverse of the Penrose scheme: the unique tree `τ` with
/// `τ ⊆ g ⊆ penrose_closure(τ)`.
pub fn penrose_tree(g: &LabeledGraph, root: usize) -> Result<RootedTree> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let n = g.n();
    let adj = g.adjacency();
    let mut dist = vec![usize::MAX; n];
    dist[root] = 0;
    let mut queue = vec![root];
    let mut head = 0;
    while head < queue.len() {
        let v = queue[head];
        head += 1;
        for w in 0..n {
            if adj[v] >> w & 1 == 1 && dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                queue.push(w);
            }
        }
    }
    let mut t = LabeledGraph::empty(n);
    for v in 0..n {
        if v == root {
            continue;
        }
        let p = (0..n)
            .find(|&w| adj[v] >> w & 1 == 1 && dist[w] + 1 == dist[v])
            .expect("BFS parent exists");
        t.insert(v, p);
    }
    RootedTree::new(t, root)
}

/// A strict total order on the pairs of `[n]`, stored as a rank per pair
/// (larger rank = larger pair).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeOrder {
    n: usize,
    rank: Vec<u32>,
}

impl EdgeOrder {
    /// Plain lexicographic pair order.
    pub fn lexicographic(n: usize) -> Self {
        EdgeOrder {
            n,
            rank: (0..pair_count(n) as u32).collect(),
        }
    }

    /// Order by weight, ties broken by lexicographic pair position.
    /// `+inf` ranks above every finite weight.
    pub fn from_weights(n: usize, weights: &[f64]) -> Result<Self> {
        if weights.len() != pair_count(n) {
            return Err(invalid(format!(
                "expected {} weights, got {}",
                pair_count(n),
                weights.len()
            )));
        }
        if weights.iter().any(|w| w.is_nan()) {
            return Err(invalid("NaN weight"));
        }
        let mut idx: Vec<usize> = (0..weights.len()).collect();
        idx.sort_by(|&a, &b| weights[a].total_cmp(&weights[b]).then(a.cmp(&b)));
        let mut rank = vec![0u32; idx.len()];
        for (r, &k) in idx.iter().enumerate() {
            rank[k] = r as u32;
        }
        Ok(EdgeOrder { n, rank })
    }

    pub fn from_ranks(n: usize, rank: Vec<u32>) -> Result<Self> {
        let mut seen = vec![false; pair_count(n)];
        if rank.len() != seen.len() {
            return Err(invalid("rank vector has wrong length"));
        }
        for &r in &rank {
            let r = r as usize;
            if r >= seen.len() || seen[r] {
                return Err(invalid("ranks must be a permutation"));
            }
            seen[r] = true;
        }
        Ok(EdgeOrder { n, rank })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rank(&self, i: usize, j: usize) -> u32 {
        self.rank[pair_index(self.n, i, j)]
    }
}

/// Minimum spanning tree of `g` under `order`, rooted at 0.
pub fn kruskal_tree(g: &LabeledGraph, order: &EdgeOrder) -> Result<RootedTree> {
    if order.n() != g.n() {
        return Err(invalid("order and graph disagree on n"));
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let n = g.n();
    let mut edges = g.edges();
    edges.sort_by_key(|&(i, j)| order.rank(i, j));
    let mut uf = UnionFind::new(n);
    let mut t = LabeledGraph::empty(n);
    for (i, j) in edges {
        if uf.union(i, j) {
            t.insert(i, j);
        }
    }
    RootedTree::new(t, 0)
}

/// Kruskal closure: adds every pair that is larger than all edges on the
/// tree path joining its endpoints.
pub fn kruskal_closure(tree: &RootedTree, order: &EdgeOrder) -> LabeledGraph {
    let n = tree.n();
    let mut g = *tree.graph();
    for i in 0..n {
        for j in i + 1..n {
            if g.has_edge(i, j) {
                continue;
            }
            let path = tree.path(i, j);
            let top = path.windows(2).map(|w| order.rank(w[0], w[1])).max().unwrap_or(0);
            if order.rank(i, j) > top {
                g.insert(i, j);
            }
        }
    }
    g
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

/// Outcome of [`verify_partition_scheme`]; every failure carries a witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SchemeVerdict {
    Partition,
    /// A connected graph lying in no interval.
    Uncovered { graph: LabeledGraph },
    /// A graph lying in the intervals of two distinct trees.
    Overlap {
        graph: LabeledGraph,
        first: LabeledGraph,
        second: LabeledGraph,
    },
    /// The closure of this tree does not contain the tree.
    NotSuperset { tree: LabeledGraph },
}

impl SchemeVerdict {
    pub fn is_partition(&self) -> bool {
        matches!(self, SchemeVerdict::Partition)
    }
}

/// Checks that the intervals `[τ, closure(τ)]`, `τ` ranging over trees on
/// `[n]`, partition the connected graphs on `[n]`.
pub fn verify_partition_scheme<F>(n: usize, caps: &Caps, closure: F) -> Result<SchemeVerdict>
where
    F: Fn(&RootedTree) -> LabeledGraph,
{
    check_min(n, 1)?;
    caps.check_graphs(n)?;
    let all = trees(n, &Caps { graphs: 0, trees: Caps::HARD_TREES })?;
    let mut owner = vec![u32::MAX; 1usize << pair_count(n)];
    for (k, tree) in all.iter().enumerate() {
        let top = closure(tree);
        let base = tree.graph().bits();
        if top.n() != n || base & !top.bits() != 0 {
            return Ok(SchemeVerdict::NotSuperset { tree: *tree.graph() });
        }
        let free = top.bits() & !base;
        let mut sub = free;
        loop {
            let g = (base | sub) as usize;
            if owner[g] != u32::MAX {
                return Ok(SchemeVerdict::Overlap {
                    graph: LabeledGraph { n, bits: g as u64 },
                    first: *all[owner[g] as usize].graph(),
                    second: *tree.graph(),
                });
            }
            owner[g] = k as u32;
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & free;
        }
    }
    let missing = (0..owner.len() as u64)
        .into_par_iter()
        .find_first(|&b| owner[b as usize] == u32::MAX && is_connected_bits(n, b));
    Ok(match missing {
        Some(bits) => SchemeVerdict::Uncovered {
            graph: LabeledGraph { n, bits },
        },
        None => SchemeVerdict::Partition,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_index_is_lexicographic() {
        let n = 5;
        for (k, (i, j)) in pairs(n).into_iter().enumerate() {
            assert_eq!(pair_index(n, i, j), k);
            assert_eq!(pair_index(n, j, i), k);
        }
    }

    #[test]
    fn text_round_trip() {
        let g: LabeledGraph = "4;0-1,2-3".parse().unwrap();
        assert_eq!(g.to_string(), "4;0-1,2-3");
        let h: LabeledGraph = g.to_hex().parse().unwrap();
        assert_eq!(g, h);
        assert!("3;0-0".parse::<LabeledGraph>().is_err());
        assert!("3;0-1,1-0".parse::<LabeledGraph>().is_err());
    }

    #[test]
    fn tree_paths() {
        let t = RootedTree::new("4;0-1,1-2,1-3".parse().unwrap(), 0).unwrap();
        assert_eq!(t.path(2, 3), vec![2, 1, 3]);
        assert_eq!(t.path(0, 3), vec![0, 1, 3]);
        assert_eq!(t.path(2, 2), vec![2]);
    }
}
