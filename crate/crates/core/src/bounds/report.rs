use serde::{Deserialize, Serialize};

/// One inequality `lhs < rhs` of an achievability condition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
}

impl Constraint {
    /// Strict check: `lhs + margin < rhs`.
    pub fn strict(name: impl Into<String>, lhs: f64, rhs: f64, margin: f64) -> Self {
        Self {
            name: name.into(),
            lhs,
            rhs,
            satisfied: lhs + margin < rhs,
        }
    }

    pub fn slack(&self) -> f64 {
        self.rhs - self.lhs
    }
}

/// Evaluated bound: per-constraint values, the binding one, and distortions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub bound: String,
    pub constraints: Vec<Constraint>,
    /// Scalar summary: the slack for condition checks, the rate for rate bounds.
    pub value: Option<f64>,
    /// Corner point `(R1, R2)` for two-rate regions, clamped at zero.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub rates: Option<[f64; 2]>,
    pub binding_constraint: String,
    pub satisfied: bool,
    pub expected_distortions: Vec<f64>,
    #[serde(default)]
    pub clamped: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl BoundReport {
    /// Report whose binding constraint is the one with the least slack
    /// (first in order on ties) and which holds iff every constraint holds.
    pub fn from_constraints(bound: impl Into<String>, constraints: Vec<Constraint>) -> Self {
        let binding = constraints
            .iter()
            .fold(None::<&Constraint>, |best, c| match best {
                Some(b) if b.slack() <= c.slack() => Some(b),
                _ => Some(c),
            })
            .map(|c| c.name.clone())
            .unwrap_or_default();
        let satisfied = constraints.iter().all(|c| c.satisfied);
        Self {
            bound: bound.into(),
            constraints,
            value: None,
            rates: None,
            binding_constraint: binding,
            satisfied,
            expected_distortions: vec![],
            clamped: false,
            notes: vec![],
        }
    }

    pub fn constraint(&self, name: &str) -> Option<&Constraint> {
        self.constraints.iter().find(|c| c.name == name)
    }
}
