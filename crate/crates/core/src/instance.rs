//! The joint mixing set data `(n, k, W, lower, epsilon)` and its document format.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Data of a joint mixing set with lower bounds and a linking constraint:
///
/// `y_j + w_ij z_i >= w_ij`, `y_j >= lower_j`, `sum_j y_j >= epsilon + sum_j lower_j`, `z` binary.
///
/// Rows are scenarios (`0..n`), columns are continuous variables (`0..k`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MixingInstance {
    n: usize,
    k: usize,
    weights: Vec<Vec<Rational>>,
    lower: Vec<Rational>,
    epsilon: Rational,
    probabilities: Option<Vec<Rational>>,
}

/// On-disk shape of an instance. Numbers may be JSON strings (`"1/3"`,
/// `"0.25"`, `"7"`) or plain JSON numbers.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDocument {
    pub n: usize,
    pub k: usize,
    #[serde(rename = "W")]
    pub weights: Vec<Vec<Rational>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<Vec<Rational>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probabilities: Option<Vec<Rational>>,
}

impl MixingInstance {
    pub fn new(
        weights: Vec<Vec<Rational>>,
        lower: Vec<Rational>,
        epsilon: Rational,
        probabilities: Option<Vec<Rational>>,
    ) -> Result<Self> {
        let n = weights.len();
        if n == 0 {
            return Err(Error::Validation("W has no rows".into()));
        }
        let k = lower.len();
        if k == 0 {
            return Err(Error::Validation("k must be at least 1".into()));
        }
        for (i, row) in weights.iter().enumerate() {
            if row.len() != k {
                return Err(Error::Validation(format!("row {} of W has {} entries, expected {k}", i + 1, row.len())));
            }
            if let Some(w) = row.iter().find(|w| w.is_negative()) {
                return Err(Error::Validation(format!("row {} of W has negative entry {w}", i + 1)));
            }
        }
        if let Some(l) = lower.iter().find(|l| l.is_negative()) {
            return Err(Error::Validation(format!("negative lower bound {l}")));
        }
        if epsilon.is_negative() {
            return Err(Error::Validation(format!("negative epsilon {epsilon}")));
        }
        if let Some(p) = &probabilities {
            if p.len() != n {
                return Err(Error::Validation(format!("{} probabilities given for {n} scenarios", p.len())));
            }
            if let Some(bad) = p.iter().find(|p| p.is_negative()) {
                return Err(Error::Validation(format!("negative probability {bad}")));
            }
            let total: Rational = p.iter().sum();
            if !total.is_one() {
                return Err(Error::Validation(format!("probabilities sum to {total}, not 1")));
            }
        }
        Ok(MixingInstance { n, k, weights, lower, epsilon, probabilities })
    }

    /// Instance with zero lower bounds and no probabilities.
    pub fn from_weights(weights: Vec<Vec<Rational>>, epsilon: Rational) -> Result<Self> {
        let k = weights.first().map_or(0, Vec::len);
        Self::new(weights, vec![Rational::zero(); k], epsilon, None)
    }

    /// Convenience constructor from integer data.
    pub fn from_integers(rows: &[&[i64]], epsilon: i64) -> Result<Self> {
        let weights = rows.iter().map(|row| row.iter().map(|&w| Rational::from_integer(w)).collect()).collect();
        Self::from_weights(weights, Rational::from_integer(epsilon))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn w(&self, i: usize, j: usize) -> &Rational {
        &self.weights[i][j]
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.weights[i]
    }

    pub fn weights(&self) -> &[Vec<Rational>] {
        &self.weights
    }

    pub fn lower(&self) -> &[Rational] {
        &self.lower
    }

    pub fn epsilon(&self) -> &Rational {
        &self.epsilon
    }

    pub fn probabilities(&self) -> Option<&[Rational]> {
        self.probabilities.as_deref()
    }

    pub fn has_zero_lower(&self) -> bool {
        self.lower.iter().all(Rational::is_zero)
    }

    pub(crate) fn require_zero_lower(&self) -> Result<()> {
        if self.has_zero_lower() {
            Ok(())
        } else {
            Err(Error::LowerBoundsNotReduced)
        }
    }

    pub fn row_sum(&self, i: usize) -> Rational {
        self.weights[i].iter().sum()
    }

    pub fn column_max(&self, j: usize) -> Rational {
        self.weights.iter().map(|row| &row[j]).max().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn with_epsilon(&self, epsilon: Rational) -> Result<Self> {
        Self::new(self.weights.clone(), self.lower.clone(), epsilon, self.probabilities.clone())
    }

    pub fn to_document(&self) -> InstanceDocument {
        InstanceDocument {
            n: self.n,
            k: self.k,
            weights: self.weights.clone(),
            lower: Some(self.lower.clone()),
            epsilon: Some(self.epsilon.clone()),
            probabilities: self.probabilities.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("instance serializes")
    }

    pub fn from_document(doc: InstanceDocument) -> Result<Self> {
        if doc.weights.len() != doc.n {
            return Err(Error::Validation(format!("n = {} but W has {} rows", doc.n, doc.weights.len())));
        }
        let lower = doc.lower.unwrap_or_else(|| vec![Rational::zero(); doc.k]);
        if lower.len() != doc.k {
            return Err(Error::Validation(format!("k = {} but {} lower bounds given", doc.k, lower.len())));
        }
        if doc.k == 0 {
            return Err(Error::Validation("k must be at least 1".into()));
        }
        Self::new(doc.weights, lower, doc.epsilon.unwrap_or_else(Rational::zero), doc.probabilities)
    }

    /// Parses an instance document from JSON text.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: InstanceDocument = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_document(doc)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}
