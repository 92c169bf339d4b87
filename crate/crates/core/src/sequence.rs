//! Ordered sequences of distinct scenario indices.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// A nonempty ordered list of distinct indices in `0..n`.
///
/// Indices are 0-based in code; [`fmt::Display`] and [`SequenceTheta::parse_one_based`]
/// use the 1-based form found in documents and on the command line.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SequenceTheta {
    indices: Vec<usize>,
}

impl SequenceTheta {
    pub fn new(indices: Vec<usize>, n: usize) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::InvalidSequence("sequence is empty".into()));
        }
        let mut seen = vec![false; n];
        for &i in &indices {
            if i >= n {
                return Err(Error::InvalidSequence(format!("index {} is outside 1..={n}", i + 1)));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidSequence(format!("index {} repeats", i + 1)));
            }
        }
        Ok(SequenceTheta { indices })
    }

    /// Parses `"2,1,3"` (1-based).
    pub fn parse_one_based(text: &str, n: usize) -> Result<Self> {
        let indices = text
            .split(',')
            .map(|part| {
                let part = part.trim();
                match part.parse::<usize>() {
                    Ok(i) if i >= 1 => Ok(i - 1),
                    _ => Err(Error::InvalidSequence(format!("bad index {part:?}"))),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(indices, n)
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn last(&self) -> usize {
        *self.indices.last().expect("sequences are nonempty")
    }
}

impl fmt::Display for SequenceTheta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.indices.iter().map(|i| (i + 1).to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Calls `visit` on every sequence of distinct elements of `ground` with
/// length `1..=max_len`, in lexicographic order of positions in `ground`.
pub fn for_each_sequence(ground: &[usize], max_len: usize, mut visit: impl FnMut(&[usize])) {
    fn rec(
        ground: &[usize],
        max_len: usize,
        used: &mut Vec<bool>,
        cur: &mut Vec<usize>,
        visit: &mut dyn FnMut(&[usize]),
    ) {
        for (pos, &i) in ground.iter().enumerate() {
            if used[pos] {
                continue;
            }
            used[pos] = true;
            cur.push(i);
            visit(cur);
            if cur.len() < max_len {
                rec(ground, max_len, used, cur, visit);
            }
            cur.pop();
            used[pos] = false;
        }
    }
    let mut used = vec![false; ground.len()];
    rec(ground, max_len, &mut used, &mut Vec::new(), &mut visit);
}

/// Number of sequences [`for_each_sequence`] visits.
pub fn sequence_count(ground_size: usize, max_len: usize) -> u128 {
    let mut total = 0u128;
    let mut term = 1u128;
    for len in 1..=max_len.min(ground_size) {
        term *= (ground_size - len + 1) as u128;
        total += term;
    }
    total
}

impl Serialize for SequenceTheta {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validates() {
        assert!(SequenceTheta::new(vec![], 3).is_err());
        assert!(SequenceTheta::new(vec![0, 0], 3).is_err());
        assert!(SequenceTheta::new(vec![3], 3).is_err());
        let s = SequenceTheta::parse_one_based("2, 1,3", 5).unwrap();
        assert_eq!(s.indices(), &[1, 0, 2]);
        assert_eq!(s.to_string(), "(2,1,3)");
        assert!(SequenceTheta::parse_one_based("0,1", 5).is_err());
    }

    #[test]
    fn enumerates_all_sequences() {
        let mut seen = Vec::new();
        for_each_sequence(&[4, 7, 9], 3, |s| seen.push(s.to_vec()));
        assert_eq!(seen.len() as u128, sequence_count(3, 3));
        assert_eq!(seen.len(), 15);
        assert_eq!(seen[0], vec![4]);
        assert_eq!(seen[1], vec![4, 7]);
        let mut sorted = seen.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 15);
        let mut short = 0;
        for_each_sequence(&[0, 1, 2, 3], 2, |_| short += 1);
        assert_eq!(short, 4 + 12);
    }
}
