//! Certification outcomes shared by every validator.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// A concrete sample that violates (or sits at the extreme of) a property.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Witness {
    pub description: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub scalars: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub vectors: BTreeMap<String, Vec<f64>>,
}

impl Witness {
    pub fn new(description: impl Into<String>) -> Self {
        Self {
            description: description.into(),
            ..Self::default()
        }
    }

    pub fn scalar(mut self, key: &str, v: f64) -> Self {
        self.scalars.insert(key.to_owned(), v);
        self
    }

    pub fn vector(mut self, key: &str, v: &[f64]) -> Self {
        self.vectors.insert(key.to_owned(), v.to_vec());
        self
    }
}

/// Outcome of one certification run.
///
/// `constants` holds the estimated constants under their conventional names
/// (`a1`..`a6`, `kappa`, `Q`, `c1`, `a`, `b`, `c`, `d`, `epsilon`, `s_star`);
/// `stats` holds auxiliary measurements such as counts and percentiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertReport {
    pub check: String,
    pub subject: String,
    pub pass: bool,
    pub seed: u64,
    pub samples: usize,
    pub constants: BTreeMap<String, f64>,
    pub stats: BTreeMap<String, f64>,
    pub witnesses: Vec<Witness>,
}

/// Witnesses kept per report; the worst violations are retained first.
pub const MAX_WITNESSES: usize = 8;

impl CertReport {
    pub fn new(check: &str, subject: &str, seed: u64, samples: usize) -> Self {
        Self {
            check: check.to_owned(),
            subject: subject.to_owned(),
            pass: true,
            seed,
            samples,
            constants: BTreeMap::new(),
            stats: BTreeMap::new(),
            witnesses: Vec::new(),
        }
    }

    pub fn constant(&mut self, key: &str, v: f64) -> &mut Self {
        self.constants.insert(key.to_owned(), v);
        self
    }

    pub fn stat(&mut self, key: &str, v: f64) -> &mut Self {
        self.stats.insert(key.to_owned(), v);
        self
    }

    pub fn witness(&mut self, w: Witness) -> &mut Self {
        if self.witnesses.len() < MAX_WITNESSES {
            self.witnesses.push(w);
        }
        self
    }

    /// Marks the report failed and records `w`.
    pub fn fail(&mut self, w: Witness) -> &mut Self {
        self.pass = false;
        self.witness(w)
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.constants.get(key).or_else(|| self.stats.get(key)).copied()
    }

    pub fn has_violation(&self) -> bool {
        !self.pass
    }
}
