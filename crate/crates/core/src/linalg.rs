//! Concrete matrices over `Z/p^sZ`: diagonal reduction, kernel sizes and
//! determinant valuations.

use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Pow, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{is_prime, pow};
use crate::error::{Error, Result};

/// The modulus `p^s` with `p` prime and `s >= 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PrimePower {
    p: u64,
    s: u32,
    value: BigUint,
}

impl PrimePower {
    pub fn new(p: u64, s: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if s == 0 {
            return Err(Error::InvalidParameter(
                "exponent s must be at least 1".into(),
            ));
        }
        Ok(Self {
            p,
            s,
            value: pow(p, s as u64),
        })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    pub fn value(&self) -> &BigUint {
        &self.value
    }

    /// `p^s` as a machine word, if it fits.
    pub fn value_u64(&self) -> Option<u64> {
        u64::try_from(&self.value).ok()
    }
}

impl fmt::Display for PrimePower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}^{}", self.p, self.s)
    }
}

/// Nondecreasing `p`-adic valuations of the diagonal of a normal form of a
/// matrix; zero diagonal entries carry valuation `s`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct SmithProfile {
    valuations: Vec<u32>,
}

impl SmithProfile {
    pub fn valuations(&self) -> &[u32] {
        &self.valuations
    }

    pub fn sum(&self) -> u64 {
        self.valuations.iter().map(|&v| v as u64).sum()
    }
}

/// An `n x m` matrix with entries reduced into `[0, p^s)`, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ZpsMatrix {
    modulus: PrimePower,
    q: u64,
    n: usize,
    m: usize,
    entries: Vec<u64>,
}

impl ZpsMatrix {
    /// Builds a matrix from arbitrary integer entries, reducing each mod `p^s`.
    pub fn new<T: Into<BigInt>>(
        modulus: PrimePower,
        n: usize,
        m: usize,
        entries: impl IntoIterator<Item = T>,
    ) -> Result<Self> {
        let q = modulus.value_u64().ok_or(Error::ModulusTooLarge {
            p: modulus.p,
            s: modulus.s,
        })?;
        let big_q = BigInt::from(q);
        let entries: Vec<u64> = entries
            .into_iter()
            .map(|e| {
                let r = e.into().mod_floor(&big_q);
                u64::try_from(&r).expect("reduced entry fits the modulus")
            })
            .collect();
        if entries.len() != n * m {
            return Err(Error::DimensionMismatch {
                n,
                m,
                actual: entries.len(),
            });
        }
        Ok(Self {
            modulus,
            q,
            n,
            m,
            entries,
        })
    }

    pub fn zero(modulus: PrimePower, n: usize, m: usize) -> Result<Self> {
        Self::new(modulus, n, m, vec![0u64; n * m])
    }

    pub fn identity(modulus: PrimePower, n: usize) -> Result<Self> {
        let entries = (0..n * n).map(|i| u64::from(i % (n + 1) == 0));
        Self::new(modulus, n, n, entries)
    }

    pub fn modulus(&self) -> &PrimePower {
        &self.modulus
    }

    pub fn rows(&self) -> usize {
        self.n
    }

    pub fn cols(&self) -> usize {
        self.m
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> u64 {
        self.entries[row * self.m + col]
    }

    pub fn is_square(&self) -> bool {
        self.n == self.m
    }

    /// Product `self * rhs` over `Z/p^sZ`.
    pub fn mul(&self, rhs: &ZpsMatrix) -> Result<ZpsMatrix> {
        if self.m != rhs.n || self.modulus != rhs.modulus {
            return Err(Error::InvalidParameter(
                "incompatible matrix product".into(),
            ));
        }
        let mut out = vec![0u64; self.n * rhs.m];
        for i in 0..self.n {
            for k in 0..self.m {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..rhs.m {
                    let cell = &mut out[i * rhs.m + j];
                    *cell = add_mod(*cell, mul_mod(a, rhs.get(k, j), self.q), self.q);
                }
            }
        }
        ZpsMatrix::new(self.modulus.clone(), self.n, rhs.m, out)
    }

    pub fn smith_profile(&self) -> SmithProfile {
        let mut work = self.entries.clone();
        let mut valuations = Vec::with_capacity(self.n.min(self.m));
        let p = self.modulus.p;
        let s = self.modulus.s;
        reduce_diagonal(&mut work, self.n, self.m, p, s, self.q, &mut valuations);
        SmithProfile { valuations }
    }

    /// Exponent `k` with `|ker A| = p^k`.
    pub fn kernel_exponent(&self) -> u64 {
        let free = self.m.saturating_sub(self.n) as u64;
        self.smith_profile().sum() + self.modulus.s as u64 * free
    }

    /// Number of `x` with `Ax = 0 (mod p^s)`.
    pub fn solution_count(&self) -> BigUint {
        pow(self.modulus.p, self.kernel_exponent())
    }

    /// Counts the kernel by trying every vector in `(Z/p^sZ)^m`.
    pub fn kernel_count_bruteforce(&self, budget: &BigUint) -> Result<BigUint> {
        let required: BigUint = Pow::pow(BigUint::from(self.q), self.m as u64);
        if &required > budget {
            return Err(Error::BudgetExceeded {
                required,
                budget: budget.clone(),
            });
        }
        Ok(BigUint::from(count_kernel_vectors(
            &self.entries,
            self.n,
            self.m,
            self.q,
        )))
    }

    /// `det A mod p^s`, computed by fraction-free elimination over the
    /// integers.
    pub fn determinant(&self) -> Result<u64> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                n: self.n,
                m: self.m,
            });
        }
        let det = bareiss_determinant(&self.entries, self.n);
        let r = det.mod_floor(&BigInt::from(self.q));
        Ok(u64::try_from(&r).expect("reduced determinant"))
    }

    /// Valuation of `gcd(det A, p^s)`, in `[0, s]`.
    pub fn det_valuation(&self) -> Result<u32> {
        let det = self.determinant()?;
        Ok(valuation(det, self.modulus.p, self.modulus.s))
    }

    /// Whether `gcd(det A, p^s)` equals the number of solutions of `Ax = 0`.
    pub fn gcd_det_correct(&self) -> Result<bool> {
        let v = self.det_valuation()?;
        Ok(v as u64 == self.kernel_exponent())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: MatrixFile =
            serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
        let modulus = PrimePower::new(file.p, file.s)?;
        let entries = file
            .entries
            .iter()
            .map(|num| {
                num.to_string()
                    .parse::<BigInt>()
                    .map_err(|_| Error::Malformed(format!("entry {num} is not an integer")))
            })
            .collect::<Result<Vec<_>>>()?;
        ZpsMatrix::new(modulus, file.n, file.m, entries)
    }

    pub fn to_json(&self) -> String {
        let file = MatrixFile {
            p: self.modulus.p,
            s: self.modulus.s,
            n: self.n,
            m: self.m,
            entries: self.entries.iter().map(|&e| e.into()).collect(),
        };
        serde_json::to_string(&file).expect("matrix serializes")
    }
}

/// On-disk matrix format: exactly the keys `p`, `s`, `n`, `m`, `entries`.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixFile {
    p: u64,
    s: u32,
    n: usize,
    m: usize,
    entries: Vec<serde_json::Number>,
}

#[inline]
fn mul_mod(a: u64, b: u64, q: u64) -> u64 {
    ((a as u128 * b as u128) % q as u128) as u64
}

#[inline]
fn add_mod(a: u64, b: u64, q: u64) -> u64 {
    let (sum, carry) = a.overflowing_add(b);
    if carry || sum >= q {
        sum.wrapping_sub(q)
    } else {
        sum
    }
}

#[inline]
fn sub_mod(a: u64, b: u64, q: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        q - (b - a)
    }
}

/// `p`-adic valuation of a residue in `[0, p^s)`; zero maps to `s`.
pub(crate) fn valuation(mut x: u64, p: u64, s: u32) -> u32 {
    if x == 0 {
        return s;
    }
    let mut v = 0;
    while x.is_multiple_of(p) {
        x /= p;
        v += 1;
    }
    v.min(s)
}

fn inverse_mod(u: u64, q: u64) -> u64 {
    let ext = (u as i128).extended_gcd(&(q as i128));
    debug_assert_eq!(ext.gcd, 1, "{u} is not a unit mod {q}");
    ext.x.rem_euclid(q as i128) as u64
}

/// Diagonalizes `work` (row-major `n x m`) in place by invertible row and
/// column operations and pushes the diagonal valuations onto `out`.
///
/// Each step picks the first entry of minimal valuation in the remaining
/// block, moves it to the corner, and clears its row and column.
pub(crate) fn reduce_diagonal(
    work: &mut [u64],
    n: usize,
    m: usize,
    p: u64,
    s: u32,
    q: u64,
    out: &mut Vec<u32>,
) {
    let rank_bound = n.min(m);
    for t in 0..rank_bound {
        let mut best: Option<(u32, usize, usize)> = None;
        'search: for r in t..n {
            for c in t..m {
                let v = valuation(work[r * m + c], p, s);
                if best.is_none_or(|(bv, _, _)| v < bv) {
                    best = Some((v, r, c));
                    if v == 0 {
                        break 'search;
                    }
                }
            }
        }
        let (v, pr, pc) = best.expect("nonempty block");
        if v == s {
            out.extend(std::iter::repeat_n(s, rank_bound - t));
            return;
        }
        if pr != t {
            for c in 0..m {
                work.swap(t * m + c, pr * m + c);
            }
        }
        if pc != t {
            for r in 0..n {
                work.swap(r * m + t, r * m + pc);
            }
        }
        let scale = p.pow(v);
        let unit = work[t * m + t] / scale;
        let unit_inv = inverse_mod(unit, q);

        for r in t + 1..n {
            let a = work[r * m + t];
            if a == 0 {
                continue;
            }
            let factor = mul_mod(a / scale, unit_inv, q);
            for c in t..m {
                let delta = mul_mod(factor, work[t * m + c], q);
                work[r * m + c] = sub_mod(work[r * m + c], delta, q);
            }
        }
        // Column t is zero below the pivot, so clearing row t touches no
        // other row.
        for c in t + 1..m {
            work[t * m + c] = 0;
        }
        out.push(v);
    }
}

/// Number of `x` in `(Z/qZ)^m` with `Ax = 0`.
///
/// Walks the vectors in odometer order while maintaining `Ax`. Every digit
/// touched by a step moves by `+1 (mod q)` (the wrap `q-1 -> 0` included),
/// so each touched column is added once to the running product.
pub(crate) fn count_kernel_vectors(entries: &[u64], n: usize, m: usize, q: u64) -> u64 {
    let columns: Vec<Vec<u64>> = (0..m)
        .map(|c| (0..n).map(|r| entries[r * m + c]).collect())
        .collect();
    let mut digits = vec![0u64; m];
    let mut image = vec![0u64; n];
    let mut hits = 1u64; // x = 0
    loop {
        let mut pos = 0;
        loop {
            if pos == m {
                return hits;
            }
            for (acc, &a) in image.iter_mut().zip(&columns[pos]) {
                *acc = add_mod(*acc, a, q);
            }
            digits[pos] += 1;
            if digits[pos] < q {
                break;
            }
            digits[pos] = 0;
            pos += 1;
        }
        if image.iter().all(|&x| x == 0) {
            hits += 1;
        }
    }
}

fn bareiss_determinant(entries: &[u64], n: usize) -> BigInt {
    if n == 0 {
        return BigInt::one();
    }
    let mut a: Vec<BigInt> = entries.iter().map(|&e| BigInt::from(e)).collect();
    let mut sign = Sign::Plus;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k * n + k].is_zero() {
            match (k + 1..n).find(|&r| !a[r * n + k].is_zero()) {
                Some(r) => {
                    for c in 0..n {
                        a.swap(k * n + c, r * n + c);
                    }
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &a[i * n + j] * &a[k * n + k] - &a[i * n + k] * &a[k * n + j];
                a[i * n + j] = num / &prev;
            }
        }
        prev = a[k * n + k].clone();
    }
    let det = a[n * n - 1].clone();
    if sign == Sign::Minus {
        -det
    } else {
        det
    }
}
