use std::fmt;

use crate::error::{Error, Result};

/// Largest ambient dimension for which dense k-vectors are materialized.
pub const MAX_DIM: usize = 16;

/// Binomial coefficient `C(n, k)`, zero when `k > n`.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Strictly increasing tuple `1 <= i1 < ... < ik <= d`.
///
/// Internally the set is kept as a bitmask (bit `i - 1` for index `i`), which
/// makes the sign of a merged wedge a popcount.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex {
    d: usize,
    mask: u32,
}

impl MultiIndex {
    /// Builds a multi-index from 1-based, strictly increasing indices.
    pub fn new(d: usize, indices: &[usize]) -> Result<Self> {
        if d > MAX_DIM {
            return Err(Error::DimensionTooLarge(d));
        }
        let mut mask = 0u32;
        let mut prev = 0usize;
        for &i in indices {
            if i == 0 || i > d {
                return Err(Error::InvalidMultiIndex(format!(
                    "index {i} outside [1, {d}]"
                )));
            }
            if i <= prev {
                return Err(Error::InvalidMultiIndex(format!(
                    "indices {indices:?} are not strictly increasing"
                )));
            }
            prev = i;
            mask |= 1 << (i - 1);
        }
        Ok(MultiIndex { d, mask })
    }

    /// Parses the comma-joined key form used in JSON, e.g. `"1,2"`.
    ///
    /// The empty string is the grade-0 index.
    pub fn parse(d: usize, key: &str) -> Result<Self> {
        let key = key.trim();
        if key.is_empty() {
            return MultiIndex::new(d, &[]);
        }
        let indices = key
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidMultiIndex(format!("cannot parse {key:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        MultiIndex::new(d, &indices)
    }

    pub(crate) fn from_mask(d: usize, mask: u32) -> Self {
        debug_assert!(d <= 32 && (d == 32 || mask >> d == 0));
        MultiIndex { d, mask }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn grade(&self) -> usize {
        self.mask.count_ones() as usize
    }

    /// 1-based indices in increasing order.
    pub fn indices(&self) -> Vec<usize> {
        (0..self.d)
            .filter(|b| self.mask & (1 << b) != 0)
            .map(|b| b + 1)
            .collect()
    }

    /// Position of this index in the lexicographic enumeration of `I(d, k)`.
    pub fn rank(&self) -> usize {
        mask_rank(self.d, self.mask)
    }

    /// The `key` form, e.g. `"1,2"`.
    pub fn key(&self) -> String {
        self.indices()
            .iter()
            .map(|i| i.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "I{:?}", self.indices())
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.key())
    }
}

/// Lexicographic rank of a `k`-subset of `{0..d}` given as a bitmask.
pub(crate) fn mask_rank(d: usize, mask: u32) -> usize {
    let k = mask.count_ones() as usize;
    let mut rank = 0;
    let mut next = 0usize;
    let mut placed = 0usize;
    for bit in 0..d {
        if mask & (1 << bit) == 0 {
            continue;
        }
        // every combination whose `placed`-th element is smaller than `bit`
        for j in next..bit {
            rank += binomial(d - 1 - j, k - 1 - placed);
        }
        placed += 1;
        next = bit + 1;
    }
    rank
}

/// All `k`-subsets of `{0..d}` as bitmasks, in lexicographic order of their
/// sorted elements.
pub(crate) fn lex_masks(d: usize, k: usize) -> Vec<u32> {
    let mut out = Vec::with_capacity(binomial(d, k));
    let mut stack = Vec::with_capacity(k);
    fn rec(d: usize, k: usize, start: usize, stack: &mut Vec<usize>, out: &mut Vec<u32>) {
        if stack.len() == k {
            out.push(stack.iter().fold(0u32, |m, &b| m | (1 << b)));
            return;
        }
        let remaining = k - stack.len();
        for b in start..=(d - remaining) {
            stack.push(b);
            rec(d, k, b + 1, stack, out);
            stack.pop();
        }
    }
    if k <= d {
        rec(d, k, 0, &mut stack, &mut out);
    }
    out
}

/// Enumerates `I(d, k)` in lexicographic order.
pub fn multi_indices(d: usize, k: usize) -> impl Iterator<Item = MultiIndex> {
    lex_masks(d, k)
        .into_iter()
        .map(move |m| MultiIndex::from_mask(d, m))
}

/// Sign of `e_I ∧ e_J` relative to `e_{I ∪ J}`, or `None` when the sets meet.
pub(crate) fn merge_sign(left: u32, right: u32) -> Option<f64> {
    if left & right != 0 {
        return None;
    }
    // each pair (a in left, b in right) with a > b costs one transposition
    let mut swaps = 0u32;
    let mut r = right;
    while r != 0 {
        let b = r.trailing_zeros();
        let above = if b >= 31 { 0 } else { left & !((1u32 << (b + 1)) - 1) };
        swaps += above.count_ones();
        r &= r - 1;
    }
    Some(if swaps % 2 == 0 { 1.0 } else { -1.0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(4, 2), 6);
        assert_eq!(binomial(16, 8), 12870);
        assert_eq!(binomial(3, 0), 1);
        assert_eq!(binomial(2, 3), 0);
    }

    #[test]
    fn rank_matches_enumeration() {
        for d in 0..=7 {
            for k in 0..=d {
                for (pos, m) in lex_masks(d, k).into_iter().enumerate() {
                    assert_eq!(mask_rank(d, m), pos, "d={d} k={k}");
                }
                assert_eq!(lex_masks(d, k).len(), binomial(d, k));
            }
        }
    }

    #[test]
    fn lexicographic_order() {
        let keys: Vec<String> = multi_indices(4, 2).map(|m| m.key()).collect();
        assert_eq!(keys, ["1,2", "1,3", "1,4", "2,3", "2,4", "3,4"]);
    }

    #[test]
    fn parse_and_validate() {
        let m = MultiIndex::parse(4, "2, 4").unwrap();
        assert_eq!(m.indices(), vec![2, 4]);
        assert!(MultiIndex::parse(4, "2,2").is_err());
        assert!(MultiIndex::parse(4, "3,1").is_err());
        assert!(MultiIndex::parse(4, "0").is_err());
        assert!(MultiIndex::parse(4, "5").is_err());
        assert!(MultiIndex::parse(4, "x").is_err());
        assert!(MultiIndex::new(17, &[1]).is_err());
        assert_eq!(MultiIndex::parse(3, "").unwrap().grade(), 0);
    }

    #[test]
    fn merge_signs() {
        // e1 ∧ e2 = +e12, e2 ∧ e1 = -e12
        assert_eq!(merge_sign(0b01, 0b10), Some(1.0));
        assert_eq!(merge_sign(0b10, 0b01), Some(-1.0));
        assert_eq!(merge_sign(0b11, 0b01), None);
        // e_{13} ∧ e_2 = e1 e3 e2 = -e123
        assert_eq!(merge_sign(0b101, 0b010), Some(-1.0));
    }
}
