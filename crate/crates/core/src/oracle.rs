//! Exhaustive ground truth: enumerate every `n x m` matrix over `Z/p^sZ`
//! and histogram the kernel sizes.
//!
//! The enumeration is a mixed-radix counter over the entries, cut into
//! contiguous index ranges that run on the rayon pool. Partial histograms
//! are merged by addition, so the result does not depend on the split.

use num_bigint::BigUint;
use num_traits::{Pow, ToPrimitive};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{count_kernel_vectors, reduce_diagonal, PrimePower};
use crate::table::CountTable;

const CHUNK: u64 = 1 << 12;

/// Caps on the enumeration size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleBudget {
    /// Largest allowed `(p^s)^{nm}`.
    pub max_matrices: BigUint,
    /// Largest allowed `(p^s)^m`, used by [`bruteforce_table_direct`].
    pub max_vectors_per_matrix: BigUint,
}

impl Default for OracleBudget {
    fn default() -> Self {
        Self {
            max_matrices: BigUint::from(1u64 << 24),
            max_vectors_per_matrix: BigUint::from(1u64 << 16),
        }
    }
}

impl OracleBudget {
    pub fn new(max_matrices: BigUint, max_vectors_per_matrix: BigUint) -> Result<Self> {
        if max_matrices == BigUint::ZERO || max_vectors_per_matrix == BigUint::ZERO {
            return Err(Error::InvalidParameter(
                "oracle budgets must be positive".into(),
            ));
        }
        Ok(Self {
            max_matrices,
            max_vectors_per_matrix,
        })
    }

    pub fn with_max_matrices(mut self, max_matrices: BigUint) -> Result<Self> {
        if max_matrices == BigUint::ZERO {
            return Err(Error::InvalidParameter(
                "oracle budgets must be positive".into(),
            ));
        }
        self.max_matrices = max_matrices;
        Ok(self)
    }
}

struct Space {
    n: usize,
    m: usize,
    p: u64,
    s: u32,
    q: u64,
    size: u64,
}

impl Space {
    fn new(n: u32, m: u32, p: u64, s: u32, budget: &BigUint) -> Result<Self> {
        let modulus = PrimePower::new(p, s)?;
        let q = modulus.value_u64().ok_or(Error::ModulusTooLarge { p, s })?;
        let required: BigUint = Pow::pow(BigUint::from(q), n as u64 * m as u64);
        if &required > budget {
            return Err(Error::BudgetExceeded {
                required,
                budget: budget.clone(),
            });
        }
        let size = required.to_u64().ok_or_else(|| Error::BudgetExceeded {
            required: required.clone(),
            budget: BigUint::from(u64::MAX),
        })?;
        Ok(Self {
            n: n as usize,
            m: m as usize,
            p,
            s,
            q,
            size,
        })
    }

    fn cells(&self) -> usize {
        self.n * self.m
    }

    /// Runs `kernel` on every matrix and histograms the returned exponents.
    fn histogram<F>(&self, kernel: F) -> Vec<u64>
    where
        F: Fn(&[u64], &mut Vec<u64>) -> usize + Sync,
    {
        let bins = self.s as usize * self.m + 1;
        let chunks = self.size.div_ceil(CHUNK);
        (0..chunks)
            .into_par_iter()
            .map(|chunk| {
                let start = chunk * CHUNK;
                let end = (start + CHUNK).min(self.size);
                let mut hist = vec![0u64; bins];
                let mut digits = self.decode(start);
                let mut scratch = Vec::with_capacity(self.cells());
                for _ in start..end {
                    hist[kernel(&digits, &mut scratch)] += 1;
                    self.advance(&mut digits);
                }
                hist
            })
            .reduce(
                || vec![0u64; bins],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                },
            )
    }

    fn decode(&self, mut index: u64) -> Vec<u64> {
        let mut digits = vec![0u64; self.cells()];
        for d in digits.iter_mut() {
            *d = index % self.q;
            index /= self.q;
        }
        digits
    }

    fn advance(&self, digits: &mut [u64]) {
        for d in digits.iter_mut() {
            *d += 1;
            if *d < self.q {
                return;
            }
            *d = 0;
        }
    }

    fn into_table(self, hist: Vec<u64>) -> CountTable {
        let counts = hist.into_iter().map(BigUint::from).collect();
        CountTable::new(self.n as u32, self.m as u32, self.p, self.s, counts)
    }
}

/// Kernel sizes from the diagonal reduction in [`crate::linalg`].
pub fn bruteforce_table(
    n: u32,
    m: u32,
    p: u64,
    s: u32,
    budget: &OracleBudget,
) -> Result<CountTable> {
    let space = Space::new(n, m, p, s, &budget.max_matrices)?;
    let (rows, cols, q) = (space.n, space.m, space.q);
    let free = cols.saturating_sub(rows) * s as usize;
    let hist = space.histogram(|entries, scratch| {
        scratch.clear();
        scratch.extend_from_slice(entries);
        let mut vals = Vec::with_capacity(rows.min(cols));
        reduce_diagonal(scratch, rows, cols, p, s, q, &mut vals);
        vals.iter().map(|&v| v as usize).sum::<usize>() + free
    });
    Ok(space.into_table(hist))
}

/// Kernel sizes by enumerating all candidate vectors for each matrix; shares
/// no reduction code with [`bruteforce_table`].
pub fn bruteforce_table_direct(
    n: u32,
    m: u32,
    p: u64,
    s: u32,
    budget: &OracleBudget,
) -> Result<CountTable> {
    let space = Space::new(n, m, p, s, &budget.max_matrices)?;
    let vectors: BigUint = Pow::pow(BigUint::from(space.q), m as u64);
    if vectors > budget.max_vectors_per_matrix {
        return Err(Error::BudgetExceeded {
            required: vectors,
            budget: budget.max_vectors_per_matrix.clone(),
        });
    }
    let (rows, cols, q) = (space.n, space.m, space.q);
    let hist = space.histogram(|entries, _| {
        let mut hits = count_kernel_vectors(entries, rows, cols, q);
        let mut exponent = 0;
        while hits > 1 {
            debug_assert_eq!(hits % p, 0, "kernel size is a power of p");
            hits /= p;
            exponent += 1;
        }
        exponent
    });
    Ok(space.into_table(hist))
}
