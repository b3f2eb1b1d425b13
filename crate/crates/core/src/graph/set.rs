use std::fmt;

use serde::{Deserialize, Serialize};

/// A subset of `0..universe` stored as a bitmask.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "SetRepr", try_from = "SetRepr")]
pub struct VertexSet {
    universe: usize,
    words: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct SetRepr {
    universe: usize,
    members: Vec<usize>,
}

impl From<VertexSet> for SetRepr {
    fn from(s: VertexSet) -> Self {
        SetRepr {
            universe: s.universe,
            members: s.to_vec(),
        }
    }
}

impl TryFrom<SetRepr> for VertexSet {
    type Error = String;

    fn try_from(r: SetRepr) -> Result<Self, String> {
        match r.members.iter().find(|&&v| v >= r.universe) {
            Some(v) => Err(format!("member {v} outside universe {}", r.universe)),
            None => Ok(VertexSet::from_iter_in(r.universe, r.members)),
        }
    }
}

impl VertexSet {
    pub fn new(universe: usize) -> Self {
        VertexSet {
            universe,
            words: vec![0; universe.div_ceil(64)],
        }
    }

    pub fn full(universe: usize) -> Self {
        let mut s = Self::new(universe);
        for v in 0..universe {
            s.insert(v);
        }
        s
    }

    pub fn from_iter_in(universe: usize, items: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::new(universe);
        for v in items {
            s.insert(v);
        }
        s
    }

    /// Set whose members are the set bits of `mask` (universe at most 64).
    pub fn from_mask(universe: usize, mask: u64) -> Self {
        assert!(universe <= 64);
        let mut s = Self::new(universe);
        if universe > 0 {
            s.words[0] = mask & low_bits(universe);
        }
        s
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    /// Panics if `v` is outside the universe.
    pub fn insert(&mut self, v: usize) -> bool {
        assert!(v < self.universe, "vertex {v} outside universe {}", self.universe);
        let (w, b) = (v / 64, v % 64);
        let fresh = self.words[w] & (1 << b) == 0;
        self.words[w] |= 1 << b;
        fresh
    }

    pub fn remove(&mut self, v: usize) -> bool {
        if v >= self.universe {
            return false;
        }
        let (w, b) = (v / 64, v % 64);
        let present = self.words[w] & (1 << b) != 0;
        self.words[w] &= !(1 << b);
        present
    }

    #[inline]
    pub fn contains(&self, v: usize) -> bool {
        v < self.universe && self.words[v / 64] & (1 << (v % 64)) != 0
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut bits = w;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let b = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(i * 64 + b)
            })
        })
    }

    pub fn complement(&self) -> Self {
        let mut out = self.clone();
        for w in out.words.iter_mut() {
            *w = !*w;
        }
        if let Some(last) = out.words.last_mut() {
            let tail = self.universe % 64;
            if tail != 0 {
                *last &= low_bits(tail);
            }
        }
        out
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.iter().all(|v| other.contains(v))
    }

    pub fn union_with(&mut self, other: &VertexSet) {
        for v in other.iter() {
            self.insert(v);
        }
    }

    pub fn intersection_len(&self, other: &VertexSet) -> usize {
        self.iter().filter(|&v| other.contains(v)).count()
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }
}

fn low_bits(k: usize) -> u64 {
    if k >= 64 {
        u64::MAX
    } else {
        (1u64 << k) - 1
    }
}

impl fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complement_respects_universe() {
        let s = VertexSet::from_iter_in(70, [0, 5, 69]);
        let c = s.complement();
        assert_eq!(c.len(), 67);
        assert!(!c.contains(69));
        assert!(c.contains(68));
        assert_eq!(c.complement(), s);
    }

    #[test]
    fn iteration_is_sorted() {
        let s = VertexSet::from_iter_in(200, [199, 3, 64, 63, 128]);
        assert_eq!(s.to_vec(), vec![3, 63, 64, 128, 199]);
    }

    #[test]
    fn mask_roundtrip() {
        let s = VertexSet::from_mask(6, 0b101101);
        assert_eq!(s.to_vec(), vec![0, 2, 3, 5]);
        assert_eq!(VertexSet::from_mask(4, u64::MAX).len(), 4);
    }
}
