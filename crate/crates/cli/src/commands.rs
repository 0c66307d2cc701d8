use std::fmt;
use std::path::PathBuf;

use clap::{Args, Subcommand};
use cluster_expansion::graphs::{self, Caps, EdgeOrder, LabeledGraph, SchemeVerdict};
use cluster_expansion::hardsphere;
use cluster_expansion::ising::{self, Boundary};
use cluster_expansion::mayer::{self, DiscreteVolume, LatticeGas, Stability};
use cluster_expansion::polymer::{self, Criterion, PolymerSystem, SubsetGas};
use cluster_expansion::potentials::{self, PairPotentialSpec};
use cluster_expansion::ursell::{self, InteractionMatrix, Scheme, StabilityVector};
use cluster_expansion::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::output::{int, num, text, to_value, Artifact};

#[derive(Debug)]
pub enum CliError {
    Lib(Error),
    Usage(String),
    Io(std::io::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Usage(s) => write!(f, "{s}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl CliError {
    /// 2 for bad input (including caps), 1 for failures during a run.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 2,
            CliError::Lib(e) => match e {
                Error::CapExceeded { .. }
                | Error::InvalidInput(_)
                | Error::Parse(_)
                | Error::UnknownName(_)
                | Error::Precondition(_)
                | Error::OutOfBranch(_) => 2,
                _ => 1,
            },
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Inline text, or the contents of a file when prefixed with `@`.
fn read_arg(s: &str) -> Result<String> {
    match s.strip_prefix('@') {
        Some(path) => Ok(std::fs::read_to_string(path)?),
        None => Ok(s.to_string()),
    }
}

fn caps(extended: bool) -> Caps {
    if extended {
        Caps::extended()
    } else {
        Caps::default()
    }
}

pub fn name(c: &crate::Command) -> String {
    use crate::Command::*;
    let (top, sub) = match c {
        Graphs(s) => ("graphs", variant(s)),
        Ursell(s) => ("ursell", variant(s)),
        Potentials(s) => ("potentials", variant(s)),
        Mayer(s) => ("mayer", variant(s)),
        Polymer(s) => ("polymer", variant(s)),
        Ising(s) => ("ising", variant(s)),
        Hardsphere(s) => ("hardsphere", variant(s)),
        Verify(_) => ("verify", String::new()),
    };
    if sub.is_empty() {
        top.to_string()
    } else {
        format!("{top} {sub}")
    }
}

/// Kebab-case name of an externally tagged enum variant.
fn variant<T: Serialize>(x: &T) -> String {
    let v = serde_json::to_value(x).expect("serialisable");
    let key = match &v {
        Value::Object(o) => o.keys().next().cloned().unwrap_or_default(),
        Value::String(s) => s.clone(),
        _ => String::new(),
    };
    let mut out = String::new();
    for (i, ch) in key.chars().enumerate() {
        if ch.is_uppercase() {
            if i > 0 {
                out.push('-');
            }
            out.extend(ch.to_lowercase());
        } else {
            out.push(ch);
        }
    }
    out
}

pub fn run(c: &crate::Command, seed: u64) -> Result<Artifact> {
    use crate::Command::*;
    match c {
        Graphs(s) => graphs_cmd(s),
        Ursell(s) => ursell_cmd(s),
        Potentials(s) => potentials_cmd(s, seed),
        Mayer(s) => mayer_cmd(s),
        Polymer(s) => polymer_cmd(s, seed),
        Ising(s) => ising_cmd(s),
        Hardsphere(s) => hardsphere_cmd(s, seed),
        Verify(a) => verify(a, seed),
    }
}

// ---------------------------------------------------------------- graphs

#[derive(Debug, Subcommand, Serialize)]
pub enum GraphsCmd {
    /// Graph, connected-graph and tree counts for n = 1..=max-n.
    Count {
        #[arg(long, default_value_t = 6)]
        max_n: usize,
        /// Raise the graph-enumeration cap to n = 8.
        #[arg(long)]
        extended: bool,
    },
    /// Penrose tree of a connected graph.
    Penrose {
        /// Graph as `n;i-j,...` or a hex bitmask `n;0x...`.
        #[arg(long)]
        graph: String,
        #[arg(long, default_value_t = 0)]
        root: usize,
    },
    /// Minimum spanning tree under an edge order given by pair weights.
    Kruskal {
        #[arg(long)]
        graph: String,
        /// Comma-separated weights in lexicographic pair order; lexicographic
        /// order when omitted.
        #[arg(long)]
        weights: Option<String>,
    },
    /// Check that a closure map partitions the connected graphs on [n].
    Scheme {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "penrose")]
        scheme: String,
        #[arg(long)]
        weights: Option<String>,
    },
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| usage(format!("bad number {x:?}: {e}"))))
        .collect()
}

fn edge_order(n: usize, weights: Option<&String>) -> Result<EdgeOrder> {
    match weights {
        Some(w) => Ok(EdgeOrder::from_weights(n, &parse_list(w)?)?),
        None => Ok(EdgeOrder::lexicographic(n)),
    }
}

fn verdict_value(v: &SchemeVerdict) -> Value {
    match v {
        SchemeVerdict::Partition => json!({"verdict": "partition"}),
        SchemeVerdict::Uncovered { graph } => json!({"verdict": "uncovered", "graph": graph.to_string()}),
        SchemeVerdict::Overlap { graph, first, second } => json!({
            "verdict": "overlap", "graph": graph.to_string(),
            "first": first.to_string(), "second": second.to_string()
        }),
        SchemeVerdict::NotSuperset { tree } => json!({"verdict": "not-superset", "tree": tree.to_string()}),
    }
}

fn graphs_cmd(c: &GraphsCmd) -> Result<Artifact> {
    match c {
        GraphsCmd::Count { max_n, extended } => {
            let caps = caps(*extended);
            let mut a = Artifact::new(&["n", "graphs", "connected", "trees", "alternating_sum"]);
            for n in 1..=*max_n {
                let total = 1u128 << graphs::pair_count(n);
                a.row(vec![
                    int(n as i64),
                    int(total as i128),
                    int(graphs::count_connected(n, &caps)? as i128),
                    text(graphs::tree_count(n)),
                    int(graphs::alternating_connected_sum(n, &caps)?),
                ]);
            }
            Ok(a)
        }
        GraphsCmd::Penrose { graph, root } => {
            let g: LabeledGraph = read_arg(graph)?.trim().parse()?;
            let t = graphs::penrose_tree(&g, *root)?;
            let closure = graphs::penrose_closure(&t);
            let mut a = Artifact::new(&["graph", "tree", "closure", "in_interval"]);
            let inside = t.graph().is_subgraph_of(&g) && g.is_subgraph_of(&closure);
            a.row(vec![text(g), text(t.graph()), text(closure), Value::Bool(inside)]);
            a.ok = inside;
            Ok(a)
        }
        GraphsCmd::Kruskal { graph, weights } => {
            let g: LabeledGraph = read_arg(graph)?.trim().parse()?;
            let order = edge_order(g.n(), weights.as_ref())?;
            let t = graphs::kruskal_tree(&g, &order)?;
            let closure = graphs::kruskal_closure(&t, &order);
            let mut a = Artifact::new(&["graph", "tree", "closure"]);
            a.row(vec![text(g), text(t.graph()), text(closure)]);
            Ok(a)
        }
        GraphsCmd::Scheme { n, scheme, weights } => {
            let scheme: Scheme = scheme.parse()?;
            let caps = Caps::default();
            let v = match scheme {
                Scheme::Penrose => graphs::verify_partition_scheme(*n, &caps, graphs::penrose_closure)?,
                Scheme::Kruskal => {
                    let order = edge_order(*n, weights.as_ref())?;
                    graphs::verify_partition_scheme(*n, &caps, |t| graphs::kruskal_closure(t, &order))?
                }
            };
            let mut a = Artifact::new(&["n", "scheme", "partition"]);
            a.row(vec![int(*n as i64), text(format!("{scheme:?}").to_lowercase()), Value::Bool(v.is_partition())]);
            a.ok = v.is_partition();
            Ok(a.with_detail(&verdict_value(&v)))
        }
    }
}

// ---------------------------------------------------------------- ursell

#[derive(Debug, Subcommand, Serialize)]
pub enum UrsellCmd {
    /// Graph sum, partition formula and both tree identities.
    Eval {
        /// Matrix as `n; i j v; ...` (`inf` allowed) or `@file`.
        #[arg(long)]
        matrix: String,
    },
    /// Tree-graph bound with a uniform stability constant.
    Bound {
        #[arg(long)]
        matrix: String,
        #[arg(long)]
        b: f64,
    },
}

fn ursell_cmd(c: &UrsellCmd) -> Result<Artifact> {
    let caps = Caps::default();
    match c {
        UrsellCmd::Eval { matrix } => {
            let v: InteractionMatrix = read_arg(matrix)?.parse()?;
            let g = ursell::ursell_graph_sum(&v, &caps)?;
            let p = ursell::ursell_partition_formula(&v)?;
            let tp = ursell::ursell_tree_identity(&v, Scheme::Penrose, &caps)?;
            let tk = ursell::ursell_tree_identity(&v, Scheme::Kruskal, &caps)?;
            let mut a = Artifact::new(&["formula", "value", "exact"]);
            let exact = ursell::ursell_exact(&v, &caps).ok();
            let ex = |f: fn(&ursell::ExactUrsell) -> String| exact.as_ref().map_or(Value::Null, |e| text(f(e)));
            a.row(vec![text("graph-sum"), num(g), ex(|e| e.graph_sum.to_string())]);
            a.row(vec![text("partition"), num(p), ex(|e| e.partition.to_string())]);
            a.row(vec![text("penrose-tree"), num(tp), ex(|e| e.penrose.to_string())]);
            a.row(vec![text("kruskal-tree"), num(tk), ex(|e| e.kruskal.to_string())]);
            let scale = g.abs().max(f64::MIN_POSITIVE);
            a.ok = [p, tp, tk].iter().all(|x| (x - g).abs() <= 1e-10 * scale.max(1e-3))
                && exact.as_ref().is_none_or(|e| e.agree());
            Ok(a)
        }
        UrsellCmd::Bound { matrix, b } => {
            let v: InteractionMatrix = read_arg(matrix)?.parse()?;
            let bound = ursell::tree_graph_bound(&v, &StabilityVector::uniform(v.n(), *b), &caps)?;
            let value = ursell::ursell_graph_sum(&v, &caps)?;
            let mut a = Artifact::new(&["value", "bound", "holds"]);
            let holds = value.abs() <= bound * (1.0 + 1e-12);
            a.row(vec![num(value), num(bound), Value::Bool(holds)]);
            a.ok = holds;
            Ok(a)
        }
    }
}

// ---------------------------------------------------------------- potentials

#[derive(Debug, Subcommand, Serialize)]
pub enum PotentialsCmd {
    /// Parse a spec and echo it back.
    Show {
        /// `family = ...; key = value; d = ...` or `@file`.
        #[arg(long)]
        spec: String,
    },
    /// Seeded lower estimate of the stability constant B_n.
    Stability {
        #[arg(long)]
        spec: String,
        #[arg(long, default_value_t = 8)]
        n: usize,
        /// Number of random starts.
        #[arg(long, default_value_t = 16)]
        budget: usize,
    },
    /// C(beta) and C~(beta) by quadrature.
    Regularity {
        #[arg(long)]
        spec: String,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
    },
    /// Basuev classification at `a`, or at the automatic root when omitted.
    Basuev {
        #[arg(long)]
        spec: String,
        #[arg(long)]
        a: Option<f64>,
    },
    /// First fcc cluster with more than 11n/2 nearest-neighbour bonds.
    Fcc {
        #[arg(long, default_value_t = 12)]
        max_shells: usize,
    },
    /// Ratios of the Ruelle lower-bound terms.
    Ruelle {
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        /// Cluster size; taken from the fcc certificate with `eps` when omitted.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, default_value_t = 1000)]
        s_max: usize,
    },
}

fn spec(s: &str) -> Result<PairPotentialSpec> {
    Ok(read_arg(s)?.parse()?)
}

fn potentials_cmd(c: &PotentialsCmd, seed: u64) -> Result<Artifact> {
    match c {
        PotentialsCmd::Show { spec: s } => {
            let p = spec(s)?;
            let mut a = Artifact::new(&["spec", "nonnegative"]);
            a.row(vec![text(&p), Value::Bool(p.is_nonnegative())]);
            Ok(a.with_detail(&p))
        }
        PotentialsCmd::Stability { spec: s, n, budget } => {
            let p = spec(s)?;
            let r = potentials::stability_estimate(&p, *n, *budget, seed)?;
            let mut a = Artifact::new(&["n", "estimate", "b_bar", "starts", "best_start"]);
            a.row(vec![
                int(r.n as i64),
                num(r.estimate),
                num(potentials::bar_stability(r.estimate, r.n)),
                int(r.starts as i64),
                r.best_start.map_or(Value::Null, |s| int(s as i64)),
            ]);
            Ok(a.with_detail(&json!({"spec": p.to_string(), "witness": to_value(&r.witness)})))
        }
        PotentialsCmd::Regularity { spec: s, beta } => {
            let p = spec(s)?;
            let r = potentials::regularity_integrals(&p, *beta)?;
            let mut a = Artifact::new(&["beta", "C", "C_tilde"]);
            a.row(vec![num(r.beta), num(r.c), num(r.c_tilde)]);
            Ok(a)
        }
        PotentialsCmd::Basuev { spec: s, a } => {
            let p = spec(s)?;
            let r = match a {
                Some(a) => potentials::basuev_classify(&p, *a)?,
                None => potentials::basuev_root(&p)?,
            };
            let mut out = Artifact::new(&["a", "class", "V(a)", "C_d", "mu_hat"]);
            out.row(vec![num(r.a), text(format!("{:?}", r.class)), num(r.v_at_a), num(r.c_d), num(r.mu_hat)]);
            Ok(out.with_detail(&r))
        }
        PotentialsCmd::Fcc { max_shells } => {
            let cluster = potentials::fcc_first_certificate(*max_shells)
                .ok_or_else(|| CliError::Lib(Error::Precondition(format!("no certificate within {max_shells} shells"))))?;
            let mut a = Artifact::new(&["shells", "n", "bonds", "11n/2"]);
            a.row(vec![
                int(cluster.shells as i64),
                int(cluster.n as i64),
                int(cluster.bond_count as i64),
                num(5.5 * cluster.n as f64),
            ]);
            Ok(a)
        }
        PotentialsCmd::Ruelle {
            lambda,
            beta,
            delta,
            n,
            eps,
            s_max,
        } => {
            let r = match (n, eps) {
                (Some(n), Some(eps)) => potentials::ruelle_ratios(*lambda, *beta, *n, *eps, *delta, *s_max)?,
                (None, None) => potentials::ruelle_witness_from_fcc(*lambda, *beta, *delta, 12, *s_max)?.1,
                _ => return Err(usage("give both --n and --eps, or neither")),
            };
            let mut a = Artifact::new(&["s", "ln_ratio"]);
            for (k, x) in r.log_ratios.iter().enumerate() {
                a.row(vec![int(k as i64 + 1), num(*x)]);
            }
            Ok(a.with_detail(&json!({
                "n": r.n, "eps": num(r.eps),
                "first_exceeding_one": r.first_exceeding_one(),
                "eventually_increasing_above_one": r.eventually_increasing_above_one()
            })))
        }
    }
}

// ---------------------------------------------------------------- mayer

#[derive(Debug, Subcommand, Serialize)]
pub enum MayerCmd {
    /// Coefficients C_n with the three bounds.
    Coefficients {
        /// `path:N`, `cuboid:AxBxC` or `sites:x,y,z;x,y,z;...`.
        #[arg(long)]
        volume: String,
        /// Hard-core exclusion radius; 0 excludes only the same site.
        #[arg(long, default_value_t = 0.0)]
        exclusion: f64,
        /// Pair potential beyond the exclusion radius.
        #[arg(long)]
        tail: Option<String>,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, default_value_t = 4)]
        n_max: usize,
        /// Stability constant B; required for attractive tails.
        #[arg(long)]
        b: Option<f64>,
        #[arg(long)]
        b_bar: Option<f64>,
    },
    /// Convergence radii and their ratio.
    Radius {
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        b: f64,
        #[arg(long)]
        b_bar: f64,
        #[arg(long)]
        c: f64,
        #[arg(long)]
        c_tilde: f64,
    },
    /// Kirkwood-Salsburg coefficient table against its closed form.
    Ks {
        #[arg(long, default_value_t = 12)]
        m_max: usize,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, default_value_t = 0.5)]
        b: f64,
        #[arg(long, default_value_t = 0.3)]
        c: f64,
    },
    /// Virial-radius constant, radius and Euler series checks.
    Virial {
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, default_value_t = 0.0)]
        b_bar: f64,
        #[arg(long, default_value_t = 1.0)]
        c_tilde: f64,
        /// Points `x = w e^{-w}` for the Euler series.
        #[arg(long, default_value = "0.1,0.2,0.3")]
        x: String,
        #[arg(long, default_value_t = 60)]
        terms: usize,
    },
}

fn parse_volume(s: &str) -> Result<DiscreteVolume> {
    let (kind, rest) = s.split_once(':').ok_or_else(|| usage(format!("volume {s:?} needs a kind prefix")))?;
    match kind {
        "path" => Ok(DiscreteVolume::path(rest.parse().map_err(|_| usage("bad path length"))?)),
        "cuboid" => {
            let sides = rest
                .split('x')
                .map(|x| x.parse::<usize>().map_err(|_| usage(format!("bad side {x:?}"))))
                .collect::<Result<Vec<_>>>()?;
            Ok(DiscreteVolume::cuboid(&sides)?)
        }
        "sites" => {
            let sites = rest
                .split(';')
                .map(|p| {
                    let c: Vec<i64> = p
                        .split(',')
                        .map(|x| x.trim().parse::<i64>().map_err(|_| usage(format!("bad coordinate {x:?}"))))
                        .collect::<Result<_>>()?;
                    if c.is_empty() || c.len() > 3 {
                        return Err(usage("sites need 1 to 3 coordinates"));
                    }
                    let mut q = [0i64; 3];
                    q[..c.len()].copy_from_slice(&c);
                    Ok(q)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(DiscreteVolume::new(sites)?)
        }
        _ => Err(usage(format!("unknown volume kind {kind:?}"))),
    }
}

fn mayer_cmd(c: &MayerCmd) -> Result<Artifact> {
    match c {
        MayerCmd::Coefficients {
            volume,
            exclusion,
            tail,
            beta,
            n_max,
            b,
            b_bar,
        } => {
            let vol = parse_volume(volume)?;
            let gas = LatticeGas {
                exclusion: *exclusion,
                tail: tail.as_deref().map(spec).transpose()?,
            };
            let stab = match (b, b_bar) {
                (None, None) => None,
                (b, bb) => Some(Stability {
                    b: b.unwrap_or(0.0),
                    b_bar: bb.or(*b).unwrap_or(0.0),
                }),
            };
            let recs = mayer::mayer_coefficients(&vol, &gas, *beta, *n_max, stab)?;
            let mut a = Artifact::new(&["n", "C_n", "PR", "PY", "Basuev", "exact"]);
            let mut ok = true;
            for r in &recs {
                ok &= r.value.abs() <= r.bound_py * (1.0 + 1e-12);
                a.row(vec![
                    int(r.n as i64),
                    num(r.value),
                    num(r.bound_pr),
                    num(r.bound_py),
                    num(r.bound_basuev),
                    r.exact.as_ref().map_or(Value::Null, text),
                ]);
            }
            a.ok = ok;
            let first = recs.first();
            Ok(a.with_detail(&json!({
                "sites": vol.len(),
                "C": first.map(|r| num(r.c)), "C_tilde": first.map(|r| num(r.c_tilde)),
                "B": first.map(|r| num(r.b)), "B_bar": first.map(|r| num(r.b_bar)),
            })))
        }
        MayerCmd::Radius { beta, b, b_bar, c, c_tilde } => {
            let r = mayer::radius_bounds(*beta, *b, *b_bar, *c, *c_tilde)?;
            let mut a = Artifact::new(&["R_PR", "R_star", "R_Basuev", "ln_ratio", "ratio"]);
            a.row(vec![num(r.r_pr), num(r.r_star), num(r.r_basuev), num(r.ln_ratio), num(r.ratio)]);
            Ok(a)
        }
        MayerCmd::Ks { m_max, beta, b, c } => {
            let t = mayer::ks_recursion(*m_max, *beta, *b, *c)?;
            let mut a = Artifact::new(&["n", "l", "K", "closed_form"]);
            for n in 1..=t.m_max {
                for l in 0..=t.m_max - n {
                    a.row(vec![int(n as i64), int(l as i64), num(t.get(n, l)), num(t.closed_form(n, l))]);
                }
            }
            let err = t.max_rel_error();
            a.ok = err <= 1e-9;
            Ok(a.with_detail(&json!({"max_rel_error": num(err)})))
        }
        MayerCmd::Virial {
            beta,
            b_bar,
            c_tilde,
            x,
            terms,
        } => {
            let m = mayer::virial_max();
            let mut a = Artifact::new(&["x", "w", "partial_sum", "tail"]);
            for x in parse_list(x)? {
                let w = mayer::solve_w(x)?;
                let s = *mayer::euler_partial_sums(x, (*terms).max(1)).last().expect("nonempty");
                a.row(vec![num(x), num(w), num(s), num((w - s).abs())]);
            }
            Ok(a.with_detail(&json!({
                "max": to_value(&m),
                "virial_radius": num(mayer::virial_radius(*beta, *b_bar, *c_tilde)?),
                "branch_activity": num(mayer::branch_activity(*beta, *b_bar, *c_tilde)),
            })))
        }
    }
}

// ---------------------------------------------------------------- polymer

#[derive(Debug, Subcommand, Serialize)]
pub enum PolymerCmd {
    /// Convergence thresholds of the three criteria.
    Criteria {
        /// `domino`, `triangular`, `hypercubic:D`, `regular:DELTA` or `file:PATH`.
        #[arg(long)]
        model: String,
        /// Torus side for the lattice models.
        #[arg(long, default_value_t = 5)]
        size: usize,
        /// Evaluate at this constant weight instead of optimising.
        #[arg(long)]
        mu: Option<f64>,
    },
    /// Partition function and truncated cluster expansion of a system file.
    Xi {
        #[arg(long)]
        file: PathBuf,
        #[arg(long, default_value_t = 4)]
        order: usize,
    },
    /// Evaluate a named bound from the catalogue.
    Catalog {
        /// Bound name; `list` prints the catalogue.
        #[arg(long)]
        name: String,
        /// Parameters as `key=value`, repeatable.
        #[arg(long = "param")]
        params: Vec<String>,
    },
    /// Random subset gases: condition and induction check.
    SubsetGas {
        #[arg(long, default_value_t = 8)]
        vertices: usize,
        #[arg(long, default_value_t = 3)]
        max_size: usize,
        #[arg(long, default_value_t = 0.15)]
        density: f64,
        #[arg(long, default_value_t = 0.12)]
        rho_max: f64,
        #[arg(long, default_value_t = std::f64::consts::LN_2)]
        a: f64,
        #[arg(long, default_value_t = 10)]
        count: usize,
    },
}

fn polymer_model(model: &str, size: usize) -> Result<PolymerSystem> {
    let (kind, arg) = model.split_once(':').unwrap_or((model, ""));
    let num_arg = || arg.parse::<usize>().map_err(|_| usage(format!("model {model:?} needs a number")));
    Ok(match kind {
        "domino" => polymer::domino(size, 0.0)?,
        "triangular" => polymer::triangular(size, 0.0)?,
        "hypercubic" => polymer::hypercubic(num_arg()?, size, 0.0)?,
        "regular" => polymer::delta_regular(num_arg()?, 0.0)?,
        "file" => std::fs::read_to_string(arg)?.parse()?,
        _ => return Err(usage(format!("unknown model {model:?}"))),
    })
}

const CRITERIA: [(Criterion, &str); 3] = [
    (Criterion::KoteckyPreiss, "kotecky-preiss"),
    (Criterion::Dobrushin, "dobrushin"),
    (Criterion::Neighborhood, "neighborhood"),
];

fn polymer_cmd(c: &PolymerCmd, seed: u64) -> Result<Artifact> {
    match c {
        PolymerCmd::Criteria { model, size, mu } => {
            let sys = polymer_model(model, *size)?;
            let mut a = Artifact::new(&["criterion", "mu", "threshold"]);
            for (which, label) in CRITERIA {
                let (m, r) = match mu {
                    Some(m) => {
                        let radii = polymer::criteria(&sys, &vec![*m; sys.len()])?;
                        (*m, radii.iter().map(|x| x.get(which)).fold(f64::INFINITY, f64::min))
                    }
                    None => polymer::optimize_constant_mu(&sys, which)?,
                };
                a.row(vec![text(label), num(m), num(r)]);
            }
            Ok(a.with_detail(&json!({"polymers": sys.len()})))
        }
        PolymerCmd::Xi { file, order } => {
            let sys: PolymerSystem = std::fs::read_to_string(file)?.parse()?;
            let all: Vec<usize> = (0..sys.len()).collect();
            let xi = polymer::partition_function(&sys, &all)?;
            let mut a = Artifact::new(&["quantity", "re", "im"]);
            a.row(vec![text("Xi"), num(xi.re), num(xi.im)]);
            let ln = xi.ln();
            a.row(vec![text("ln Xi"), num(ln.re), num(ln.im)]);
            if sys.len() <= 12 {
                let poly = polymer::cluster_log_truncated(&sys, &all, *order)?;
                let v = poly.eval(sys.activity());
                a.row(vec![text(format!("cluster series, order {order}")), num(v.re), num(v.im)]);
            }
            Ok(a)
        }
        PolymerCmd::Catalog { name, params } => {
            if name == "list" {
                let mut a = Artifact::new(&["name"]);
                for n in polymer::CATALOG {
                    a.row(vec![text(n)]);
                }
                return Ok(a);
            }
            let parsed = params
                .iter()
                .map(|p| {
                    let (k, v) = p.split_once('=').ok_or_else(|| usage(format!("parameter {p:?} is not key=value")))?;
                    let v = v.parse::<f64>().map_err(|_| usage(format!("bad value in {p:?}")))?;
                    Ok((k.trim(), v))
                })
                .collect::<Result<Vec<_>>>()?;
            let r = polymer::bounds_catalog(name, &parsed)?;
            let mut a = Artifact::new(&["name", "value", "satisfied", "margin"]);
            a.row(vec![text(&r.name), num(r.value), Value::Bool(r.satisfied), num(r.margin)]);
            Ok(a.with_detail(&r))
        }
        PolymerCmd::SubsetGas {
            vertices,
            max_size,
            density,
            rho_max,
            a,
            count,
        } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut out = Artifact::new(&["trial", "polymers", "condition", "satisfied", "induction_holds", "worst", "min_xi"]);
            let mut ok = true;
            for t in 0..*count {
                let gas = SubsetGas::random(*vertices, *max_size, *density, *rho_max, &mut rng)?;
                let r = polymer::subset_gas_check(&gas, *a)?;
                if r.bound.satisfied {
                    ok &= r.induction.holds && r.induction.min_xi > 0.0;
                }
                out.row(vec![
                    int(t as i64),
                    int(gas.polymers.len() as i64),
                    num(r.bound.value),
                    Value::Bool(r.bound.satisfied),
                    Value::Bool(r.induction.holds),
                    num(r.induction.worst),
                    num(r.induction.min_xi),
                ]);
            }
            out.ok = ok;
            Ok(out)
        }
    }
}

// ---------------------------------------------------------------- ising

#[derive(Debug, Subcommand, Serialize)]
pub enum IsingCmd {
    /// Brute-force and expansion partition functions per beta.
    Table {
        #[arg(long = "L", default_value_t = 3)]
        l: usize,
        /// Comma-separated inverse temperatures.
        #[arg(long, default_value = "0.1,0.3,0.7,1.2")]
        beta: String,
        #[arg(long = "J", default_value_t = 1.0)]
        j: f64,
    },
    /// High-temperature sum against the dual contour sum.
    Duality {
        #[arg(long = "L", default_value_t = 4)]
        l: usize,
        #[arg(long, default_value_t = 0.3)]
        beta: f64,
    },
    /// Exact site magnetisations with the low- and high-temperature bounds.
    Magnetization {
        #[arg(long = "L", default_value_t = 4)]
        l: usize,
        #[arg(long, default_value_t = 2.0)]
        beta: f64,
        #[arg(long = "J", default_value_t = 1.0)]
        j: f64,
        /// `plus`, `minus` or `free`.
        #[arg(long, default_value = "plus")]
        boundary: String,
    },
    /// Convergence thresholds in beta and animal counts.
    Thresholds {
        #[arg(long, default_value_t = 0.21)]
        a: f64,
        #[arg(long = "J", default_value_t = 1.0)]
        j: f64,
    },
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs()
    }
}

fn ising_cmd(c: &IsingCmd) -> Result<Artifact> {
    match c {
        IsingCmd::Table { l, beta, j } => {
            let mut a = Artifact::new(&[
                "beta", "Z_brute_free", "Z_highT", "rel_err_highT", "Z_brute_plus", "Z_lowT", "rel_err_lowT", "Xi_highT",
                "Xi_lowT", "M_plus", "lowT_margin",
            ]);
            let mut ok = true;
            for b in parse_list(beta)? {
                let free = ising::brute_force_z(*l, b, *j, Boundary::Free, false)?;
                let plus = ising::brute_force_z(*l, b, *j, Boundary::Plus, false)?;
                let h = ising::high_t_polymer_z(*l, b, *j)?;
                let lt = ising::low_t_contour_z(*l, b, *j)?;
                let m = ising::magnetization(*l, b, *j, Boundary::Plus)?;
                let (eh, el) = (rel(h.z, free), rel(lt.z, plus));
                ok &= eh <= 1e-12 && el <= 1e-12 && m.low_t_holds != Some(false);
                a.row(vec![
                    num(b),
                    num(free),
                    num(h.z),
                    num(eh),
                    num(plus),
                    num(lt.z),
                    num(el),
                    num(h.xi),
                    num(lt.xi),
                    num(m.m),
                    m.low_t_bound.map_or(Value::Null, |lb| num(m.m - lb)),
                ]);
            }
            a.ok = ok;
            Ok(a)
        }
        IsingCmd::Duality { l, beta } => {
            let r = ising::duality_check(*l, *beta)?;
            let mut a = Artifact::new(&["L", "beta", "dual_beta", "families_equal", "Xi_highT", "Xi_lowT_at_dual", "beta_c"]);
            a.row(vec![
                int(r.l as i64),
                num(r.beta),
                num(r.dual_beta),
                Value::Bool(r.families_equal),
                num(r.xi_high),
                num(r.xi_low_at_dual),
                num(r.beta_c),
            ]);
            a.ok = r.families_equal;
            Ok(a.with_detail(&r))
        }
        IsingCmd::Magnetization { l, beta, j, boundary } => {
            let boundary: Boundary = boundary.parse()?;
            let r = ising::magnetization(*l, *beta, *j, boundary)?;
            let mut a = Artifact::new(&["row", "col", "spin", "decay_bound"]);
            for (s, v) in r.per_site.iter().enumerate() {
                let bound = r.decay_bound.as_ref().map_or(Value::Null, |d| num(d[s]));
                a.row(vec![int((s / l) as i64), int((s % l) as i64), num(*v), bound]);
            }
            a.ok = r.low_t_holds != Some(false) && r.decay_holds != Some(false);
            Ok(a.with_detail(&json!({
                "M": num(r.m),
                "low_t_bound": r.low_t_bound.map(num),
                "low_t_holds": r.low_t_holds,
                "decay_holds": r.decay_holds,
            })))
        }
        IsingCmd::Thresholds { a, j } => {
            let t = ising::animal_counts_and_thresholds(*a, *j)?;
            let mut out = Artifact::new(&["threshold", "beta"]);
            for (k, v) in [
                ("beta0", t.beta0),
                ("beta1", t.beta1),
                ("beta0_prime", t.beta0_prime),
                ("beta1_prime", t.beta1_prime),
            ] {
                out.row(vec![text(k), num(v)]);
            }
            Ok(out.with_detail(&t))
        }
    }
}

// ---------------------------------------------------------------- hardsphere

#[derive(Debug, Subcommand, Serialize)]
pub enum HardsphereCmd {
    /// Probability that k uniform points in the unit d-ball are pairwise more than 1 apart.
    Gtilde {
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        /// Sample even when a closed form exists.
        #[arg(long)]
        monte_carlo: bool,
    },
    /// Improved two-dimensional radius coefficient.
    Radius {
        /// Table g(0),g(1),...; the built-in disc table when omitted.
        #[arg(long)]
        table: Option<String>,
    },
    /// Volume of the n-ball of radius r.
    Volume {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        r: f64,
    },
}

fn hardsphere_cmd(c: &HardsphereCmd, seed: u64) -> Result<Artifact> {
    match c {
        HardsphereCmd::Gtilde {
            d,
            k,
            samples,
            monte_carlo,
        } => {
            let e = if *monte_carlo {
                hardsphere::gtilde_mc(*d, *k, *samples, seed)?
            } else {
                hardsphere::gtilde(*d, *k, *samples, seed)?
            };
            let mut a = Artifact::new(&["d", "k", "estimate", "std_error", "samples", "hits", "exact"]);
            a.row(vec![
                int(e.d as i64),
                int(e.k as i64),
                num(e.estimate),
                num(e.std_error),
                int(e.samples),
                int(e.hits),
                Value::Bool(e.exact),
            ]);
            Ok(a.with_detail(&e))
        }
        HardsphereCmd::Radius { table } => {
            let t = match table {
                Some(s) => parse_list(s)?,
                None => hardsphere::disc_table().to_vec(),
            };
            let r = hardsphere::improved_radius(&t)?;
            let mut a = Artifact::new(&["mu_star", "coefficient", "classical", "ratio"]);
            a.row(vec![num(r.mu_star), num(r.coefficient), num(r.classical), num(r.coefficient / r.classical)]);
            Ok(a)
        }
        HardsphereCmd::Volume { n, r } => {
            if *n == 0 || !(*r >= 0.0) {
                return Err(usage("need n >= 1 and r >= 0"));
            }
            let mut a = Artifact::new(&["n", "r", "volume"]);
            a.row(vec![int(*n as i64), num(*r), num(hardsphere::sphere_volume(*n, *r))]);
            Ok(a)
        }
    }
}

// ---------------------------------------------------------------- verify

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    /// `identities`, `schemes`, `trees` or `all`.
    #[arg(long, default_value = "all")]
    pub suite: String,
    #[arg(long, default_value_t = 5)]
    pub max_n: usize,
    /// Random matrices per n.
    #[arg(long, default_value_t = 50)]
    pub samples: usize,
}

fn verify(v: &VerifyArgs, seed: u64) -> Result<Artifact> {
    let (ids, schemes, trees) = match v.suite.as_str() {
        "identities" => (true, false, false),
        "schemes" => (false, true, false),
        "trees" => (false, false, true),
        "all" => (true, true, true),
        s => return Err(usage(format!("unknown suite {s:?}"))),
    };
    let caps = Caps::default();
    caps.check_graphs(v.max_n)?;
    let mut a = Artifact::new(&["check", "n", "passed", "detail"]);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for n in 1..=v.max_n {
        if ids {
            let mut worst: f64 = 0.0;
            for _ in 0..v.samples {
                let m = InteractionMatrix::from_fn(n, |_, _| {
                    if rng.random::<f64>() < 0.15 {
                        f64::INFINITY
                    } else {
                        rng.random_range(-1.5..3.0)
                    }
                })?;
                let g = ursell::ursell_graph_sum(&m, &caps)?;
                for other in [
                    ursell::ursell_partition_formula(&m)?,
                    ursell::ursell_tree_identity(&m, Scheme::Penrose, &caps)?,
                    ursell::ursell_tree_identity(&m, Scheme::Kruskal, &caps)?,
                ] {
                    worst = worst.max(rel(other, g));
                }
            }
            a.row(vec![text("ursell-formulas"), int(n as i64), Value::Bool(worst <= 1e-10), text(format!("worst relative gap {worst:.3e}"))]);
            if n <= 5 {
                let mut agree = true;
                for bits in 0..1u64 << graphs::pair_count(n) {
                    let g = LabeledGraph::from_bits(n, bits)?;
                    agree &= ursell::ursell_exact(&InteractionMatrix::hard_core(&g), &caps)?.agree();
                }
                a.row(vec![text("ursell-hard-core-exact"), int(n as i64), Value::Bool(agree), text("every graph on [n]")]);
            }
            let alt = graphs::alternating_connected_sum(n, &caps)?;
            let want = (1..n as i64).product::<i64>() * if n % 2 == 1 { 1 } else { -1 };
            a.row(vec![text("connected-alternating-sum"), int(n as i64), Value::Bool(alt == want), text(alt)]);
        }
        if schemes {
            let pen = graphs::verify_partition_scheme(n, &caps, graphs::penrose_closure)?;
            a.row(vec![text("penrose-scheme"), int(n as i64), Value::Bool(pen.is_partition()), text(verdict_value(&pen)["verdict"].as_str().unwrap_or(""))]);
            let w: Vec<f64> = (0..graphs::pair_count(n)).map(|_| rng.random()).collect();
            let order = EdgeOrder::from_weights(n, &w)?;
            let kr = graphs::verify_partition_scheme(n, &caps, |t| graphs::kruskal_closure(t, &order))?;
            a.row(vec![text("kruskal-scheme"), int(n as i64), Value::Bool(kr.is_partition()), text(verdict_value(&kr)["verdict"].as_str().unwrap_or(""))]);
        }
        if trees {
            let counted = graphs::enumerate_trees(n, &caps)?.count() as u128;
            let want = (n as u128).pow(n.saturating_sub(2) as u32);
            let formula = graphs::tree_count(n).to_string();
            a.row(vec![
                text("cayley"),
                int(n as i64),
                Value::Bool(counted == want && formula == want.to_string()),
                text(counted),
            ]);
        }
    }
    a.ok = a.rows.iter().all(|r| r[2] == Value::Bool(true));
    Ok(a)
}
