//! Closed forms for `E(n x m, p^s, p^j)` and a dispatcher that picks one.
//!
//! Known regimes: tall or square shapes (`n >= m`) with `j <= s`, single
//! columns, single rows near the top of the exponent range, and the field
//! case `s = 1`. Everything else is served by [`crate::recursive`].

use std::fmt;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::Zero;

use crate::arith::{gen_phi, pow, pow_rational, qbinom, to_rational};
use crate::error::{Error, Result};
use crate::recursive::e_rec;

/// Which evaluation produced a count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Formula {
    UniqueSolution,
    BelowModulus,
    AtModulus,
    SingleColumn,
    SingleRow,
    Landsberg,
    Recursion,
}

impl Formula {
    pub fn name(self) -> &'static str {
        match self {
            Formula::UniqueSolution => "unique-solution",
            Formula::BelowModulus => "kernel-below-modulus",
            Formula::AtModulus => "kernel-equals-modulus",
            Formula::SingleColumn => "single-column",
            Formula::SingleRow => "single-row",
            Formula::Landsberg => "landsberg",
            Formula::Recursion => "recursion",
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Product `phi_hi(p^t) * phi_{hi-1}(p^t) * ... * phi_lo(p^t)`; empty when
/// `lo > hi`.
fn phi_chain(lo: i64, hi: i64, p: u64, t: u64) -> BigUint {
    (lo..=hi).map(|u| gen_phi(u as u64, p, t)).product()
}

fn require_tall(n: u32, m: u32) -> Result<()> {
    if n < m || m == 0 {
        return Err(Error::ShapeUnsupported { n, m });
    }
    Ok(())
}

fn require_positive_s(s: u32) -> Result<()> {
    if s == 0 {
        return Err(Error::InvalidParameter(
            "exponent s must be at least 1".into(),
        ));
    }
    Ok(())
}

/// Matrices with only the trivial solution: `(p^s)^{m(m-1)/2} * prod_{u=n-m+1}^{n} phi_u(p^s)`.
pub fn e_unique(n: u32, m: u32, p: u64, s: u32) -> Result<BigUint> {
    require_tall(n, m)?;
    require_positive_s(s)?;
    let (n, m, s) = (n as u64, m as u64, s as u64);
    Ok(pow(p, s * m * (m - 1) / 2) * phi_chain((n - m + 1) as i64, n as i64, p, s))
}

/// The same count written as a power of `p` times `prod (p^u - 1)`.
///
/// Collecting the powers of `p` from each `phi_u(p^s) = p^{(s-1)u}(p^u - 1)`
/// gives the exponent `(s-1)(n + (n-1) + ... + (n-m+1)) + s m(m-1)/2`.
pub fn e_unique_factored(n: u32, m: u32, p: u64, s: u32) -> Result<BigUint> {
    require_tall(n, m)?;
    require_positive_s(s)?;
    let (n, m, s) = (n as u64, m as u64, s as u64);
    let column_sum = m * (2 * n - m + 1) / 2;
    let factors: BigUint = (n - m + 1..=n).map(|u| pow(p, u) - 1u32).product();
    Ok(pow(p, (s - 1) * column_sum + s * m * (m - 1) / 2) * factors)
}

/// Count for `0 <= j < s`:
/// `phi_n(p^s)...phi_{n-m+2}(p^s) * phi_{n-m+1}(p^{s-j}) * p^{s m(m-1)/2 - j(m-1)} * [m+j-1 j]_p`.
pub fn e_jlt_s(n: u32, m: u32, p: u64, s: u32, j: u32) -> Result<BigUint> {
    require_tall(n, m)?;
    if j >= s {
        return Err(Error::RangeUnsupported { j: j as i64, s });
    }
    let (n, m, s, j) = (n as u64, m as u64, s as u64, j as u64);
    let chain = phi_chain((n - m + 2) as i64, n as i64, p, s);
    let last = gen_phi(n - m + 1, p, s - j);
    let exp = s * m * (m - 1) / 2 - j * (m - 1);
    Ok(chain * last * pow(p, exp) * qbinom(m + j - 1, j, p))
}

/// Exponent coefficients of the `k`-th term in the `j = s` sum:
/// `a(m,k) = m(m-1)/2 - (m-1-k)` and `b(m,k) = (m-k)(m-3k-1)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhiFactor {
    pub m: u32,
    pub k: u32,
    pub a: u64,
    pub b: i64,
}

impl PhiFactor {
    pub fn new(m: u32, k: u32) -> Self {
        assert!(k < m, "k must lie in [0, m-1]");
        let (mi, ki) = (m as i64, k as i64);
        let a = (mi * (mi - 1) / 2 - (mi - 1 - ki)) as u64;
        // (m-k) and (m-3k-1) differ by 2k+1, so exactly one of them is even.
        let b = (mi - ki) * (mi - 3 * ki - 1) / 2;
        Self { m, k, a, b }
    }

    /// `Phi(p^s, k) = phi_{n-m+1}(p^{m-1-k}) * prod_{u=k}^{m-2} phi_{n-u}(p^{s-1}) * prod_{v=0}^{k-1} phi_{n-v}(p^s)`.
    pub fn phi_product(&self, n: u32, p: u64, s: u32) -> BigUint {
        let (n, m, k, s) = (n as i64, self.m as i64, self.k as i64, s as u64);
        let head = gen_phi((n - m + 1) as u64, p, (m - 1 - k) as u64);
        let middle: BigUint = (k..=m - 2)
            .map(|u| gen_phi((n - u) as u64, p, s - 1))
            .product();
        let tail: BigUint = (0..k).map(|v| gen_phi((n - v) as u64, p, s)).product();
        head * middle * tail
    }

    /// The full `k`-th term, exact since `b` may be negative.
    pub fn term(&self, n: u32, p: u64, s: u32) -> BigRational {
        let (m, k) = (self.m as u64, self.k as u64);
        let binoms = qbinom(m, k, p) * qbinom(s as u64 - 1, m - 1 - k, p);
        let exp = self.a as i64 * s as i64 + self.b;
        to_rational(&(self.phi_product(n, p, s) * binoms)) * pow_rational(p, exp)
    }
}

/// Count at `j = s`: `sum_{k=0}^{m-1} Phi(p^s,k) [m k]_p [s-1 m-1-k]_p p^{a(m,k)s + b(m,k)}`.
pub fn e_jeq_s(n: u32, m: u32, p: u64, s: u32) -> Result<BigUint> {
    require_tall(n, m)?;
    require_positive_s(s)?;
    let total: BigRational = (0..m).map(|k| PhiFactor::new(m, k).term(n, p, s)).sum();
    integral(total)
}

fn integral(value: BigRational) -> Result<BigUint> {
    if !value.is_integer() {
        return Err(Error::IntegralityViolation(value.to_string()));
    }
    BigUint::try_from(value.to_integer())
        .map_err(|_| Error::IntegralityViolation(format!("{value} is negative")))
}

fn require_two_columns(n: u32, s: u32) -> Result<()> {
    if n < 2 {
        return Err(Error::ShapeUnsupported { n, m: 2 });
    }
    require_positive_s(s)
}

/// `n x 2` count for `j < s`: `phi_n(p^s) phi_{n-1}(p^{s-j}) p^{s-j} [j+1 1]_p`.
pub fn e_nx2(n: u32, p: u64, s: u32, j: u32) -> Result<BigUint> {
    require_two_columns(n, s)?;
    if j >= s {
        return Err(Error::RangeUnsupported { j: j as i64, s });
    }
    let (n, s, j) = (n as u64, s as u64, j as u64);
    Ok(gen_phi(n, p, s) * gen_phi(n - 1, p, s - j) * pow(p, s - j) * qbinom(j + 1, 1, p))
}

/// Relatively prime `n x 2` matrices with `p^j` solutions.
pub fn tilde_e_nx2(n: u32, p: u64, s: u32, j: u32) -> Result<BigUint> {
    require_two_columns(n, s)?;
    let (n, s, j) = (n as u64, s as u64, j as u64);
    Ok(match j {
        0 => gen_phi(n, p, s) * gen_phi(n - 1, p, s) * pow(p, s),
        j if j <= s => gen_phi(n, p, s) * gen_phi(n - 1, p, s - j) * (pow(p, s) + pow(p, s - 1)),
        _ => BigUint::zero(),
    })
}

/// `n x 2` count at `j = s`:
/// `phi_n(p^s) phi_{n-1}(1) p^{s-1} [2 1]_p + phi_n(p^{s-1}) phi_{n-1}(p) p [s-1 1]_p`.
pub fn e_nx2_jeqs(n: u32, p: u64, s: u32) -> Result<BigUint> {
    require_two_columns(n, s)?;
    let (n, s) = (n as u64, s as u64);
    let relatively_prime =
        gen_phi(n, p, s) * gen_phi(n - 1, p, 0) * pow(p, s - 1) * qbinom(2, 1, p);
    let divisible = gen_phi(n, p, s - 1) * gen_phi(n - 1, p, 1) * pow(p, 1) * qbinom(s - 1, 1, p);
    Ok(relatively_prime + divisible)
}

/// Single column: `phi_n(p^{s-j})` for `j <= s`, zero beyond.
pub fn e_nx1(n: u32, p: u64, s: u32, j: u32) -> Result<BigUint> {
    if n == 0 {
        return Err(Error::ShapeUnsupported { n, m: 1 });
    }
    require_positive_s(s)?;
    if j > s {
        return Ok(BigUint::zero());
    }
    Ok(gen_phi(n as u64, p, (s - j) as u64))
}

/// Single row at `j = s(m-1) + r`: `phi(p^{s-r}) p^{(s-r-1)(m-1)} [m 1]_p`.
pub fn e_1xm(m: u32, p: u64, s: u32, r: u32) -> Result<BigUint> {
    if m == 0 {
        return Err(Error::ShapeUnsupported { n: 1, m });
    }
    if r >= s {
        return Err(Error::RangeUnsupported {
            j: (s * (m - 1) + r) as i64,
            s,
        });
    }
    let (m, s, r) = (m as u64, s as u64, r as u64);
    Ok(gen_phi(1, p, s - r) * pow(p, (s - r - 1) * (m - 1)) * qbinom(m, 1, p))
}

/// Field case `s = 1`: `[m j]_p prod_{i=0}^{m-j-1} (p^n - p^i)`.
pub fn e_landsberg(n: u32, m: u32, p: u64, j: u32) -> BigUint {
    if j > m || m - j > n {
        // rank m - j cannot exceed the number of rows
        return BigUint::zero();
    }
    let rank = (m - j) as u64;
    let top = pow(p, n as u64);
    let chain: BigUint = (0..rank).map(|i| &top - pow(p, i)).product();
    qbinom(m as u64, j as u64, p) * chain
}

/// Invertible `n x n` matrices: `p^{(s-1)n^2} prod_{u=0}^{n-1} (p^n - p^u)`.
pub fn e_invertible(n: u32, p: u64, s: u32) -> Result<BigUint> {
    if n == 0 {
        return Err(Error::ShapeUnsupported { n, m: n });
    }
    require_positive_s(s)?;
    let n = n as u64;
    let top = pow(p, n);
    let chain: BigUint = (0..n).map(|u| &top - pow(p, u)).product();
    Ok(pow(p, (s as u64 - 1) * n * n) * chain)
}

/// A count together with the evaluation that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Evaluation {
    pub value: BigUint,
    pub formula: Formula,
}

/// Every closed form whose domain contains the query, in dispatcher
/// preference order.
pub fn applicable_forms(n: u32, m: u32, p: u64, s: u32, j: i64) -> Vec<Evaluation> {
    let mut out = Vec::new();
    if s == 0 || m == 0 || n == 0 || j < 0 || j > s as i64 * m as i64 {
        return out;
    }
    let ju = j as u32;
    let mut push = |formula: Formula, value: Result<BigUint>| {
        let value = value.expect("closed form evaluated inside its domain");
        out.push(Evaluation { value, formula });
    };
    if n >= m {
        if ju == 0 {
            push(Formula::UniqueSolution, e_unique(n, m, p, s));
        }
        if ju < s {
            push(Formula::BelowModulus, e_jlt_s(n, m, p, s, ju));
        }
        if ju == s {
            push(Formula::AtModulus, e_jeq_s(n, m, p, s));
        }
    }
    if m == 1 {
        push(Formula::SingleColumn, e_nx1(n, p, s, ju));
    }
    if n == 1 && ju >= s * (m - 1) && ju < s * m {
        push(Formula::SingleRow, e_1xm(m, p, s, ju - s * (m - 1)));
    }
    if s == 1 {
        push(Formula::Landsberg, Ok(e_landsberg(n, m, p, ju)));
    }
    out
}

/// Closed form when one applies, otherwise the recursion. The value always
/// equals [`e_rec`].
pub fn e_explicit(n: u32, m: u32, p: u64, s: u32, j: i64) -> Evaluation {
    applicable_forms(n, m, p, s, j)
        .into_iter()
        .next()
        .unwrap_or_else(|| Evaluation {
            value: e_rec(n, m, p, s, j),
            formula: Formula::Recursion,
        })
}

/// `E(n x m, p^s, p^j)` recomputed with the `j = s` sum assembled term by
/// term; exposed for callers that want the individual contributions.
pub fn e_jeq_s_terms(n: u32, m: u32, p: u64, s: u32) -> Result<Vec<BigRational>> {
    require_tall(n, m)?;
    require_positive_s(s)?;
    Ok((0..m).map(|k| PhiFactor::new(m, k).term(n, p, s)).collect())
}

/// Sum of a list of exact terms, checked to be a nonnegative integer.
pub fn checked_integral_sum(terms: &[BigRational]) -> Result<BigUint> {
    integral(terms.iter().fold(BigRational::zero(), |acc, t| acc + t))
}
