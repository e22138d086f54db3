//! Finite labeled spaces and canonical index sets.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// An ordered finite set of labeled elements, optionally embedded in an
/// integer grid. Element identity throughout the crate is the 0-based index
/// into `labels`; indices are stable for the lifetime of a solve.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteSpace {
    labels: Vec<String>,
    coords: Option<Vec<(i64, i64)>>,
}

impl FiniteSpace {
    pub fn new(labels: Vec<String>) -> Result<Self> {
        Self::build(labels, None)
    }

    pub fn with_coords(labels: Vec<String>, coords: Vec<(i64, i64)>) -> Result<Self> {
        Self::build(labels, Some(coords))
    }

    /// Space with labels "0", "1", ..., "n-1".
    pub fn indexed(n: usize) -> Self {
        Self::build((0..n).map(|i| i.to_string()).collect(), None)
            .expect("indexed labels are unique")
    }

    fn build(labels: Vec<String>, coords: Option<Vec<(i64, i64)>>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Schema {
                field: "elements".into(),
                detail: "a finite space needs at least one element".into(),
            });
        }
        let mut seen = HashMap::with_capacity(labels.len());
        for (i, l) in labels.iter().enumerate() {
            if let Some(j) = seen.insert(l.clone(), i) {
                return Err(Error::Schema {
                    field: "elements".into(),
                    detail: format!("duplicate label `{l}` at indices {j} and {i}"),
                });
            }
        }
        if let Some(c) = &coords {
            if c.len() != labels.len() {
                return Err(Error::Schema {
                    field: "coords".into(),
                    detail: format!("{} coords for {} elements", c.len(), labels.len()),
                });
            }
        }
        Ok(Self { labels, coords })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        false // invariant: n >= 1
    }

    pub fn label(&self, index: usize) -> &str {
        &self.labels[index]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn coords(&self) -> Option<&[(i64, i64)]> {
        self.coords.as_deref()
    }

    pub fn coord(&self, index: usize) -> Option<(i64, i64)> {
        self.coords.as_ref().map(|c| c[index])
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

/// Canonically sorted, duplicate-free set of element indices.
///
/// The sorted index sequence is the equality/hash key for every set-valued
/// state downstream (conditional ranges, quantized ranges).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PointSet {
    members: Vec<u32>,
}

impl PointSet {
    pub fn new(mut members: Vec<u32>) -> Self {
        members.sort_unstable();
        members.dedup();
        Self { members }
    }

    pub fn singleton(index: u32) -> Self {
        Self {
            members: vec![index],
        }
    }

    /// The full set {0, ..., n-1}.
    pub fn full(n: usize) -> Self {
        Self {
            members: (0..n as u32).collect(),
        }
    }

    pub fn empty() -> Self {
        Self {
            members: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, index: u32) -> bool {
        self.members.binary_search(&index).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.members.iter().copied()
    }

    pub fn members(&self) -> &[u32] {
        &self.members
    }

    pub fn union(&self, other: &PointSet) -> PointSet {
        let mut merged = Vec::with_capacity(self.len() + other.len());
        merged.extend_from_slice(&self.members);
        merged.extend_from_slice(&other.members);
        PointSet::new(merged)
    }

    pub fn is_subset(&self, other: &PointSet) -> bool {
        self.iter().all(|i| other.contains(i))
    }

    /// Largest index plus one, or 0 when empty; used for index validation.
    pub fn max_exclusive(&self) -> usize {
        self.members.last().map_or(0, |&m| m as usize + 1)
    }
}

impl FromIterator<u32> for PointSet {
    fn from_iter<T: IntoIterator<Item = u32>>(iter: T) -> Self {
        PointSet::new(iter.into_iter().collect())
    }
}
