use num_bigint::BigUint;
use num_traits::Zero;

use crate::arith::pow;

/// Counts `j -> E(n x m, p^s, p^j)` for every `j` in `0..=s*m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTable {
    pub n: u32,
    pub m: u32,
    pub p: u64,
    pub s: u32,
    counts: Vec<BigUint>,
}

impl CountTable {
    /// `counts[j]` holds the count for exponent `j`; the vector must cover
    /// `0..=s*m` exactly.
    pub fn new(n: u32, m: u32, p: u64, s: u32, counts: Vec<BigUint>) -> Self {
        assert_eq!(counts.len(), Self::len_for(m, s), "table length");
        Self { n, m, p, s, counts }
    }

    pub(crate) fn len_for(m: u32, s: u32) -> usize {
        (s as usize) * (m as usize) + 1
    }

    pub fn max_exponent(&self) -> u32 {
        self.s * self.m
    }

    /// Count at exponent `j`; zero outside `0..=s*m`.
    pub fn get(&self, j: i64) -> BigUint {
        usize::try_from(j)
            .ok()
            .and_then(|j| self.counts.get(j))
            .cloned()
            .unwrap_or_default()
    }

    pub fn counts(&self) -> &[BigUint] {
        &self.counts
    }

    pub fn nonzero(&self) -> impl Iterator<Item = (u32, &BigUint)> {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(j, c)| (j as u32, c))
    }

    pub fn total(&self) -> BigUint {
        self.counts.iter().sum()
    }

    /// `p^{s n m}`, the number of matrices of this shape.
    pub fn expected_total(&self) -> BigUint {
        pow(self.p, self.s as u64 * self.n as u64 * self.m as u64)
    }

    pub fn is_normalized(&self) -> bool {
        self.total() == self.expected_total()
    }

    pub fn same_parameters(&self, other: &CountTable) -> bool {
        (self.n, self.m, self.p, self.s) == (other.n, other.m, other.p, other.s)
    }
}
