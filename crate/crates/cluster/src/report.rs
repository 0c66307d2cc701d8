use serde::Serialize;

/// A named bound or threshold evaluated at concrete inputs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub name: String,
    /// Plain-text formula of the inequality or threshold.
    pub formula: String,
    pub inputs: Vec<(String, f64)>,
    /// Computed threshold, radius or left-hand side, depending on `name`.
    pub value: f64,
    pub satisfied: bool,
    /// Signed slack; positive when the inequality holds.
    pub margin: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl BoundReport {
    pub fn new(name: &str, formula: &str) -> Self {
        BoundReport {
            name: name.to_string(),
            formula: formula.to_string(),
            inputs: Vec::new(),
            value: f64::NAN,
            satisfied: false,
            margin: f64::NAN,
            notes: Vec::new(),
        }
    }

    pub fn input(mut self, key: &str, value: f64) -> Self {
        self.inputs.push((key.to_string(), value));
        self
    }

    /// Records `lhs < rhs` (or `<=` when `strict` is false) with value `lhs`.
    pub fn compare(mut self, lhs: f64, rhs: f64, strict: bool) -> Self {
        self.value = lhs;
        self.margin = rhs - lhs;
        self.satisfied = if strict { lhs < rhs } else { lhs <= rhs };
        self
    }

    pub fn threshold(mut self, value: f64, satisfied: bool, margin: f64) -> Self {
        self.value = value;
        self.satisfied = satisfied;
        self.margin = margin;
        self
    }

    pub fn note(mut self, text: impl Into<String>) -> Self {
        self.notes.push(text.into());
        self
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.inputs.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }
}
