//! Memoized recursion for `E(n x m, p^s, p^j)`.
//!
//! Three mutually recursive counts drive everything:
//!
//! * `E`: all matrices with exactly `p^j` solutions;
//! * `~E`: those with at least one entry that is a unit mod `p`;
//! * `~E_i`: those whose first unit-bearing column is column `i` (0-based).
//!
//! A matrix is either divisible by `p` (and is then `p` times a matrix over
//! `Z/p^{s-1}Z` with `p^m` times fewer solutions) or carries a unit. Pivoting
//! on the first unit and eliminating its row and column leaves an
//! `(n-1) x (m-1)` system, which gives the recursion for `~E_i`.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::arith::{gen_phi, pow};
use crate::error::{Error, Result};
use crate::table::CountTable;

/// Parameters of a count query. `j` may be probed outside `[0, s*m]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CountKey {
    pub n: u32,
    pub m: u32,
    pub p: u64,
    pub s: u32,
    pub j: i64,
}

impl CountKey {
    pub fn new(n: u32, m: u32, p: u64, s: u32, j: i64) -> Self {
        Self { n, m, p, s, j }
    }

    fn with(self, n: u32, m: u32, s: u32, j: i64) -> Self {
        Self { n, m, s, j, ..self }
    }

    fn max_exponent(&self) -> i64 {
        self.s as i64 * self.m as i64
    }
}

/// Evaluation context holding the memo tables. One instance per thread;
/// nothing is shared.
#[derive(Debug, Default)]
pub struct RecursiveCounter {
    full: HashMap<CountKey, BigUint>,
    leading: HashMap<(u32, CountKey), BigUint>,
}

impl RecursiveCounter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of cached entries across both memo tables.
    pub fn cache_len(&self) -> usize {
        self.full.len() + self.leading.len()
    }

    /// `E(n x m, p^s, p^j)`.
    pub fn count(&mut self, key: CountKey) -> BigUint {
        let CountKey { n, m, p, s, j } = key;
        if j < 0 || j > key.max_exponent() {
            return BigUint::zero();
        }
        if s == 0 || m == 0 {
            return indicator(j == 0);
        }
        if n == 0 {
            return indicator(j == key.max_exponent());
        }
        if m == 1 {
            return gen_phi(n as u64, p, (s as i64 - j) as u64);
        }
        if let Some(hit) = self.full.get(&key) {
            return hit.clone();
        }
        let divisible = self.count(key.with(n, m, s - 1, j - m as i64));
        let value = divisible + self.tilde_unchecked(key);
        self.full.insert(key, value.clone());
        value
    }

    /// `~E(n x m, p^s, p^j)`: matrices with a unit entry. Needs `s, m >= 1`.
    pub fn tilde(&mut self, key: CountKey) -> Result<BigUint> {
        if key.s == 0 || key.m == 0 {
            return Err(Error::InvalidParameter(
                "relatively prime counts need s >= 1 and m >= 1".into(),
            ));
        }
        Ok(self.tilde_unchecked(key))
    }

    /// `~E_i(n x m, p^s, p^j)`: matrices whose first unit appears in column
    /// `i` (0-based). Needs `s, m >= 1` and `0 <= i < m`.
    pub fn tilde_i(&mut self, i: i64, key: CountKey) -> Result<BigUint> {
        if i < 0 || i >= key.m as i64 {
            return Err(Error::IndexOutOfRange { i, m: key.m });
        }
        if key.s == 0 {
            return Err(Error::InvalidParameter(
                "relatively prime counts need s >= 1".into(),
            ));
        }
        Ok(self.leading_unchecked(i as u32, key))
    }

    fn tilde_unchecked(&mut self, key: CountKey) -> BigUint {
        if key.j < 0 || key.n == 0 {
            return BigUint::zero();
        }
        let top = key.j.min(key.m as i64 - 1) as u32;
        (0..=top).map(|i| self.leading_unchecked(i, key)).sum()
    }

    fn leading_unchecked(&mut self, i: u32, key: CountKey) -> BigUint {
        let CountKey { n, m, p, s, j } = key;
        // The first i columns are divisible by p, which alone forces p^i
        // solutions.
        if n == 0 || j < i as i64 || j > key.max_exponent() {
            return BigUint::zero();
        }
        if let Some(hit) = self.leading.get(&(i, key)) {
            return hit.clone();
        }
        let (n1, m1) = (n - 1, m - 1);
        let mut inner = if j >= m1 as i64 {
            self.count(key.with(n1, m1, s - 1, j - m1 as i64))
        } else {
            BigUint::zero()
        };
        if m >= 2 && (i as i64) <= j.min(m as i64 - 2) {
            let top = j.min(m as i64 - 2) as u32;
            for k in i..=top {
                inner += self.leading_unchecked(k, key.with(n1, m1, s, j));
            }
        }
        let choices = gen_phi(n as u64, p, s as u64)
            * pow(p, (s as u64 - 1) * i as u64)
            * pow(p, s as u64 * (m - i - 1) as u64);
        let value = choices * inner;
        self.leading.insert((i, key), value.clone());
        value
    }

    /// Every `E(n x m, p^s, p^j)` for `j = 0..=s*m`.
    pub fn table(&mut self, n: u32, m: u32, p: u64, s: u32) -> CountTable {
        let counts = (0..CountTable::len_for(m, s))
            .map(|j| self.count(CountKey::new(n, m, p, s, j as i64)))
            .collect();
        CountTable::new(n, m, p, s, counts)
    }
}

fn indicator(hit: bool) -> BigUint {
    if hit {
        BigUint::one()
    } else {
        BigUint::zero()
    }
}

/// `E(n x m, p^s, p^j)` in a fresh evaluation context.
pub fn e_rec(n: u32, m: u32, p: u64, s: u32, j: i64) -> BigUint {
    RecursiveCounter::new().count(CountKey::new(n, m, p, s, j))
}

pub fn tilde_e(n: u32, m: u32, p: u64, s: u32, j: i64) -> Result<BigUint> {
    RecursiveCounter::new().tilde(CountKey::new(n, m, p, s, j))
}

pub fn tilde_e_i(i: i64, n: u32, m: u32, p: u64, s: u32, j: i64) -> Result<BigUint> {
    RecursiveCounter::new().tilde_i(i, CountKey::new(n, m, p, s, j))
}

pub fn count_table(n: u32, m: u32, p: u64, s: u32) -> CountTable {
    RecursiveCounter::new().table(n, m, p, s)
}
