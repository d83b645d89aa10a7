use std::fmt;

use serde::{Deserialize, Serialize};

/// Inclusive `[first, last]` index range. Empty ranges cannot be represented.
///
/// Serialized as a two-element JSON array.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "[usize; 2]", into = "[usize; 2]")]
pub struct IndexRange {
    first: usize,
    last: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("empty range: first {first} > last {last}")]
pub struct EmptyRange {
    pub first: usize,
    pub last: usize,
}

impl IndexRange {
    pub fn new(first: usize, last: usize) -> Result<Self, EmptyRange> {
        if first > last {
            return Err(EmptyRange { first, last });
        }
        Ok(Self { first, last })
    }

    pub fn single(index: usize) -> Self {
        Self { first: index, last: index }
    }

    pub fn first(&self) -> usize {
        self.first
    }

    pub fn last(&self) -> usize {
        self.last
    }

    pub fn len(&self) -> usize {
        self.last - self.first + 1
    }

    /// Always false; present for clippy's `len_without_is_empty`.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, index: usize) -> bool {
        self.first <= index && index <= self.last
    }

    pub fn contains_range(&self, other: &IndexRange) -> bool {
        self.first <= other.first && other.last <= self.last
    }

    pub fn overlaps(&self, other: &IndexRange) -> bool {
        self.first <= other.last && other.first <= self.last
    }

    /// Smallest range covering both.
    pub fn hull(&self, other: &IndexRange) -> IndexRange {
        IndexRange {
            first: self.first.min(other.first),
            last: self.last.max(other.last),
        }
    }

    /// Intersection, or `None` when disjoint.
    pub fn clip(&self, bounds: &IndexRange) -> Option<IndexRange> {
        let first = self.first.max(bounds.first);
        let last = self.last.min(bounds.last);
        (first <= last).then_some(IndexRange { first, last })
    }

    pub fn iter(&self) -> std::ops::RangeInclusive<usize> {
        self.first..=self.last
    }
}

impl TryFrom<[usize; 2]> for IndexRange {
    type Error = EmptyRange;

    fn try_from([first, last]: [usize; 2]) -> Result<Self, Self::Error> {
        IndexRange::new(first, last)
    }
}

impl From<IndexRange> for [usize; 2] {
    fn from(r: IndexRange) -> Self {
        [r.first, r.last]
    }
}

impl fmt::Display for IndexRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.first, self.last)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty() {
        assert!(IndexRange::new(3, 2).is_err());
        assert!(serde_json::from_str::<IndexRange>("[5, 1]").is_err());
    }

    #[test]
    fn serializes_as_pair() {
        let r = IndexRange::new(2, 7).unwrap();
        assert_eq!(serde_json::to_string(&r).unwrap(), "[2,7]");
        assert_eq!(r.len(), 6);
    }

    #[test]
    fn clip_and_hull() {
        let a = IndexRange::new(2, 7).unwrap();
        let b = IndexRange::new(5, 10).unwrap();
        assert_eq!(a.clip(&b), Some(IndexRange::new(5, 7).unwrap()));
        assert_eq!(a.hull(&b), IndexRange::new(2, 10).unwrap());
        assert_eq!(a.clip(&IndexRange::single(9)), None);
    }
}
