use std::collections::hash_map::DefaultHasher;
use std::fs;
use std::hash::{Hash, Hasher};
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Number, Value};

pub const SCHEMA_VERSION: &str = "clex/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum Format {
    Table,
    Json,
    Csv,
}

/// Result of one command: a table plus free-form detail, with the full
/// configuration echoed back.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Artifact {
    pub schema_version: String,
    pub command: String,
    pub seed: u64,
    pub config: Value,
    /// False when a checked invariant is violated.
    pub ok: bool,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
    pub detail: Value,
}

impl Artifact {
    pub fn new(columns: &[&str]) -> Self {
        Artifact {
            schema_version: SCHEMA_VERSION.to_string(),
            command: String::new(),
            seed: 0,
            config: Value::Null,
            ok: true,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            detail: Value::Null,
        }
    }

    pub fn row(&mut self, cells: Vec<Value>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn with_detail<T: Serialize>(mut self, detail: &T) -> Self {
        self.detail = to_value(detail);
        self
    }
}

/// Float with 17 significant digits; non-finite values become strings.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        Value::Number(format!("{x:.16e}").parse::<Number>().expect("formatted float parses"))
    } else if x.is_nan() {
        Value::String("NaN".into())
    } else if x > 0.0 {
        Value::String("inf".into())
    } else {
        Value::String("-inf".into())
    }
}

pub fn int<T: Into<i128>>(x: T) -> Value {
    let x: i128 = x.into();
    Value::Number(x.to_string().parse().expect("integer parses"))
}

pub fn text(s: impl ToString) -> Value {
    Value::String(s.to_string())
}

pub fn to_value<T: Serialize>(x: &T) -> Value {
    normalize(serde_json::to_value(x).expect("serialisable"))
}

/// Rewrites every non-integer number with 17 significant digits.
fn normalize(v: Value) -> Value {
    match v {
        Value::Number(n) => {
            if n.is_i64() || n.is_u64() {
                Value::Number(n)
            } else {
                n.as_f64().map_or(Value::Number(n), num)
            }
        }
        Value::Array(a) => Value::Array(a.into_iter().map(normalize).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, normalize(v))).collect::<Map<_, _>>()),
        other => other,
    }
}

fn cell_text(v: &Value, short: bool) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        Value::Number(n) if short && !(n.is_i64() || n.is_u64()) => n.as_f64().map_or(n.to_string(), |x| format!("{x}")),
        other => other.to_string(),
    }
}

pub fn render(a: &Artifact, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(a).expect("serialisable") + "\n",
        Format::Csv => {
            let mut out = format!("# {} seed={} config={}\n", a.command, a.seed, a.config);
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&a.columns).expect("in-memory write");
            for r in &a.rows {
                w.write_record(r.iter().map(|c| cell_text(c, false))).expect("in-memory write");
            }
            out.push_str(&String::from_utf8(w.into_inner().expect("flush")).expect("utf8"));
            out
        }
        Format::Table => {
            let cells: Vec<Vec<String>> = a.rows.iter().map(|r| r.iter().map(|c| cell_text(c, true)).collect()).collect();
            let mut width: Vec<usize> = a.columns.iter().map(|c| c.len()).collect();
            for r in &cells {
                for (w, c) in width.iter_mut().zip(r) {
                    *w = (*w).max(c.chars().count());
                }
            }
            let line = |r: &[String]| {
                r.iter()
                    .zip(&width)
                    .map(|(c, w)| format!("{c:<w$}"))
                    .collect::<Vec<_>>()
                    .join("  ")
                    .trim_end()
                    .to_string()
            };
            let mut out = format!("# {}  seed={}\n# config: {}\n", a.command, a.seed, a.config);
            if !a.columns.is_empty() {
                out.push_str(&line(&a.columns));
                out.push('\n');
                out.push_str(&line(&width.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>()));
                out.push('\n');
                for r in &cells {
                    out.push_str(&line(r));
                    out.push('\n');
                }
            }
            if !a.detail.is_null() {
                out.push_str(&serde_json::to_string_pretty(&a.detail).expect("serialisable"));
                out.push('\n');
            }
            if !a.ok {
                out.push_str("# invariant violated\n");
            }
            out
        }
    }
}

pub fn emit(text: &str, path: Option<&Path>) -> std::io::Result<()> {
    match path {
        Some(p) => fs::write(p, text),
        None => std::io::stdout().write_all(text.as_bytes()),
    }
}

/// Memo of finished artifacts keyed by command and configuration. Keys use
/// the standard library hasher, so a toolchain upgrade can orphan entries
/// but never serve a wrong one: the stored configuration is compared too.
pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn new(dir: PathBuf) -> Self {
        Cache { dir }
    }

    fn path(&self, command: &str, config: &Value) -> PathBuf {
        let mut h = DefaultHasher::new();
        (command, config.to_string(), env!("CARGO_PKG_VERSION")).hash(&mut h);
        self.dir.join(format!("{:016x}.json", h.finish()))
    }

    pub fn load(&self, command: &str, config: &Value) -> Option<Artifact> {
        let text = fs::read_to_string(self.path(command, config)).ok()?;
        let a: Artifact = serde_json::from_str(&text).ok()?;
        (a.command == command && &a.config == config && a.schema_version == SCHEMA_VERSION).then_some(a)
    }

    pub fn store(&self, a: &Artifact) -> std::io::Result<()> {
        fs::create_dir_all(&self.dir)?;
        fs::write(self.path(&a.command, &a.config), serde_json::to_string(a).expect("serialisable"))
    }
}
