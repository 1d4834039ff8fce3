//! Square-matrix aggregates: the exact probability that `gcd(det A, p^s)`
//! counts the solutions of `Ax = 0`, the deviation from its leading
//! asymptotic term, supporting product identities, and composition of
//! prime-power tables into composite-modulus counts.

use std::collections::HashSet;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::arith::{gen_phi, pow, pow_rational, qbinom, qbinom_at_inverse, to_rational};
use crate::error::{Error, Result};
use crate::explicit::{e_jeq_s, PhiFactor};
use crate::table::CountTable;

/// `A(n, k) = n + (n-1) + ... + k = (n-k+1)(n+k)/2`.
///
/// The closed form also yields `A(k-1, k) = 0`, `A(0, 1) = 0` and
/// `A(-1, 1) = 0`, which the sums below rely on.
pub fn triangular_index(n: i64, k: i64) -> i64 {
    (n - k + 1) * (n + k) / 2
}

/// `A_n = A(n, 1) = n(n+1)/2`.
pub fn triangular(n: i64) -> i64 {
    triangular_index(n, 1)
}

/// `S(n, k) = prod_{u=k}^{n} (p^u - 1)`; the empty product is 1.
pub fn factor_product(n: u64, k: u64, p: u64) -> BigUint {
    (k..=n).map(|u| pow(p, u) - 1u32).product()
}

fn require_positive(n: u32, s: u32) -> Result<()> {
    if n == 0 || s == 0 {
        return Err(Error::InvalidParameter("need n >= 1 and s >= 1".into()));
    }
    Ok(())
}

/// `sum_{j=0}^{s-1} E(n x n, p^s, p^j) = p^{s(n^2-n) - A_{n-1}} S(n+s-1, s)`.
pub fn sum_e_below_s(n: u32, p: u64, s: u32) -> Result<BigUint> {
    require_positive(n, s)?;
    let (n, s) = (n as u64, s as u64);
    let exp = s * (n * n - n) - triangular(n as i64 - 1) as u64;
    Ok(pow(p, exp) * factor_product(n + s - 1, s, p))
}

/// `E(n x n, p^s, p^s) / p^{s n^2}` as an alternating sum of Gaussian
/// binomials at `1/p`.
pub fn e_nn_jeqs_normalized(n: u32, p: u64, s: u32) -> Result<BigRational> {
    require_positive(n, s)?;
    let (ni, si) = (n as i64, s as i64);
    let nu = n as u64;
    let sign = |j: i64| {
        if j % 2 == 0 {
            BigRational::one()
        } else {
            -BigRational::one()
        }
    };

    let first: BigRational = (0..ni)
        .map(|j| {
            sign(j)
                * pow_rational(p, -ni - (j + 1) * si - triangular(j))
                * qbinom_at_inverse(nu - 1, j as u64, p)
        })
        .sum();
    let second: BigRational = (0..ni)
        .map(|i| {
            sign(i) * pow_rational(p, -triangular(i + 1)) * qbinom_at_inverse(nu - 1, i as u64, p)
        })
        .sum();

    let lead = to_rational(&(pow(p, nu) - 1u32));
    Ok(lead * first + pow_rational(p, -si) * qbinom_at_inverse(nu, 1, p) * second)
}

/// `P(eta <= p^s)` for a uniformly random `n x n` matrix over `Z/p^sZ`,
/// which is the probability that `gcd(det A, p^s)` is the solution count.
pub fn prob_gcd_correct(n: u32, p: u64, s: u32) -> Result<BigRational> {
    let numer = sum_e_below_s(n, p, s)? + e_jeq_s(n, n, p, s)?;
    let denom = pow(p, s as u64 * n as u64 * n as u64);
    Ok(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
}

/// Leading asymptotic term `1 - p^{-s-3}`.
pub fn leading_term(p: u64, s: u32) -> BigRational {
    BigRational::one() - pow_rational(p, -(s as i64) - 3)
}

/// `(1 - p^{-s-3}) - P(eta <= p^s)`. Defined for `n >= 2`.
pub fn asymptotic_residual(n: u32, p: u64, s: u32) -> Result<BigRational> {
    if n < 2 {
        return Err(Error::InvalidParameter(
            "the residual is defined for n >= 2".into(),
        ));
    }
    Ok(leading_term(p, s) - prob_gcd_correct(n, p, s)?)
}

/// Whether `|residual| <= constant * p^{-s-4}`.
pub fn residual_within(n: u32, p: u64, s: u32, constant: u64) -> Result<bool> {
    let residual = asymptotic_residual(n, p, s)?;
    let bound = to_rational(&BigUint::from(constant)) * pow_rational(p, -(s as i64) - 4);
    Ok(num_traits::Signed::abs(&residual) <= bound)
}

/// Checks `prod_{u=k}^{n} (p^u - 1) = sum_{j=0}^{n-k+1} (-1)^j p^{A(n-j,k)} [n-k+1 j]_p`.
pub fn s_expansion_check(n: u64, k: u64, p: u64) -> Result<bool> {
    if k == 0 || k > n {
        return Err(Error::InvalidParameter("need n >= k >= 1".into()));
    }
    let width = n - k + 1;
    let mut rhs = BigInt::zero();
    for j in 0..=width {
        let term = BigInt::from(
            pow(p, triangular_index((n - j) as i64, k as i64) as u64) * qbinom(width, j, p),
        );
        if j % 2 == 0 {
            rhs += term;
        } else {
            rhs -= term;
        }
    }
    Ok(BigInt::from(factor_product(n, k, p)) == rhs)
}

/// Checks `sum_{k=max(0,n-s)}^{n-1} p^{k(s-n+k)} [n k]_p [s-1 n-1-k]_p = [n+s-1 s]_p`.
pub fn vandermonde_instance_check(n: u64, s: u64, p: u64) -> Result<bool> {
    if n == 0 || s == 0 {
        return Err(Error::InvalidParameter("need n >= 1 and s >= 1".into()));
    }
    let lhs: BigUint = (n.saturating_sub(s)..n)
        .map(|k| {
            // k >= n - s keeps the exponent nonnegative.
            pow(p, k * (s + k - n)) * qbinom(n, k, p) * qbinom(s - 1, n - 1 - k, p)
        })
        .sum();
    Ok(lhs == qbinom(n + s - 1, s, p))
}

/// `phi_1(p^{s-j}) prod_{u=2}^{n} phi_u(p^s)` evaluated directly, for
/// comparison with [`euler_chain_closed`].
pub fn euler_chain(n: u32, p: u64, s: u32, j: u32) -> BigUint {
    let head = gen_phi(1, p, (s - j) as u64);
    let tail: BigUint = (2..=n as u64).map(|u| gen_phi(u, p, s as u64)).product();
    head * tail
}

/// Closed form `p^{(s-1)A_n - j} S(n, 1)` of [`euler_chain`], valid for `j < s`.
pub fn euler_chain_closed(n: u32, p: u64, s: u32, j: u32) -> Result<BigUint> {
    if j >= s {
        return Err(Error::RangeUnsupported { j: j as i64, s });
    }
    let exp = (s as i64 - 1) * triangular(n as i64) - j as i64;
    Ok(pow(p, exp as u64) * factor_product(n as u64, 1, p))
}

/// Closed forms of `Phi(p^s, k)` for square shapes (`m = n`):
///
/// * `k = 0`: `p^{s A(n,2) - 2 A_n + n} S(n,1)`;
/// * `1 <= k <= n-2`: `p^{s A(n,2) - A_n - A_{n-k-1}} S(n,1)`;
/// * `k = n-1`: `p^{(s-1) A(n,2)} S(n,2)`.
///
/// The first two rely on `phi_u(p^{s-1}) = p^{(s-2)u}(p^u - 1)` and so need
/// `s >= 2`.
pub fn square_phi_factor_closed(n: u32, p: u64, s: u32, k: u32) -> Result<BigUint> {
    if n < 2 || k >= n {
        return Err(Error::InvalidParameter("need n >= 2 and k <= n-1".into()));
    }
    let (ni, si, ki) = (n as i64, s as i64, k as i64);
    if k == n - 1 {
        require_positive(n, s)?;
        let exp = (si - 1) * triangular_index(ni, 2);
        return Ok(pow(p, exp as u64) * factor_product(n as u64, 2, p));
    }
    if s < 2 {
        return Err(Error::RangeUnsupported { j: ki, s });
    }
    let exp = if k == 0 {
        si * triangular_index(ni, 2) - 2 * triangular(ni) + ni
    } else {
        si * triangular_index(ni, 2) - triangular(ni) - triangular(ni - ki - 1)
    };
    Ok(pow(p, exp as u64) * factor_product(n as u64, 1, p))
}

/// `Phi(p^s, k)` of the square case evaluated from its definition.
pub fn square_phi_factor(n: u32, p: u64, s: u32, k: u32) -> BigUint {
    PhiFactor::new(n, k).phi_product(n, p, s)
}

/// Composite-modulus counts assembled from prime-power tables.
///
/// Lookups multiply the per-prime entries on demand; the full product table
/// is never materialized.
#[derive(Debug, Clone)]
pub struct CrtComposite {
    n: u32,
    m: u32,
    tables: Vec<CountTable>,
}

impl CrtComposite {
    pub fn shape(&self) -> (u32, u32) {
        (self.n, self.m)
    }

    pub fn factors(&self) -> impl Iterator<Item = (u64, u32)> + '_ {
        self.tables.iter().map(|t| (t.p, t.s))
    }

    /// `N = prod p_i^{s_i}`.
    pub fn modulus(&self) -> BigUint {
        self.tables.iter().map(|t| pow(t.p, t.s as u64)).product()
    }

    /// Matrices mod `N` with exactly `prod p_i^{j_i}` solutions; `None` when
    /// the number of exponents does not match the factor count.
    pub fn lookup(&self, exponents: &[i64]) -> Option<BigUint> {
        if exponents.len() != self.tables.len() {
            return None;
        }
        Some(
            self.tables
                .iter()
                .zip(exponents)
                .map(|(t, &j)| t.get(j))
                .product(),
        )
    }

    /// `prod p_i^{j_i}`.
    pub fn solution_count(&self, exponents: &[i64]) -> Option<BigUint> {
        if exponents.len() != self.tables.len() || exponents.iter().any(|&j| j < 0) {
            return None;
        }
        Some(
            self.tables
                .iter()
                .zip(exponents)
                .map(|(t, &j)| pow(t.p, j as u64))
                .product(),
        )
    }

    /// Sum over all exponent tuples, which factors as a product of table
    /// totals.
    pub fn total(&self) -> BigUint {
        self.tables.iter().map(CountTable::total).product()
    }
}

/// Combines tables for distinct primes that share one matrix shape.
pub fn crt_compose(tables: Vec<CountTable>) -> Result<CrtComposite> {
    let first = tables
        .first()
        .ok_or_else(|| Error::InvalidParameter("at least one factor is required".into()))?;
    let (n, m) = (first.n, first.m);
    let mut seen = HashSet::new();
    for t in &tables {
        if !seen.insert(t.p) {
            return Err(Error::DuplicatePrime(t.p));
        }
        if (t.n, t.m) != (n, m) {
            return Err(Error::InvalidParameter(format!(
                "tables disagree on shape: {n}x{m} and {}x{}",
                t.n, t.m
            )));
        }
    }
    Ok(CrtComposite { n, m, tables })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recursive::count_table;

    fn frac(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn triangular_numbers() {
        for n in 1..10 {
            assert_eq!(triangular_index(n, n), n);
            assert_eq!(triangular(n), n * (n + 1) / 2);
            for k in 1..=n {
                assert_eq!(triangular_index(n, k), triangular(n) - triangular(k - 1));
            }
            assert_eq!(triangular_index(n - 1, n), 0);
        }
        assert_eq!(triangular(0), 0);
        assert_eq!(triangular(-1), 0);
    }

    #[test]
    fn factor_products() {
        assert_eq!(factor_product(4, 2, 2), BigUint::from(315u32));
        assert_eq!(factor_product(3, 3, 2), BigUint::from(7u32));
        for k in 2..=6 {
            assert_eq!(
                factor_product(6, k, 3),
                factor_product(6, 1, 3) / factor_product(k - 1, 1, 3)
            );
        }
    }

    #[test]
    fn below_modulus_sum_examples() {
        assert_eq!(sum_e_below_s(2, 2, 2).unwrap(), BigUint::from(168u32));
        assert_eq!(sum_e_below_s(2, 2, 1).unwrap(), BigUint::from(6u32));
        assert_eq!(sum_e_below_s(1, 2, 2).unwrap(), BigUint::from(3u32));
    }

    #[test]
    fn normalized_at_modulus_examples() {
        assert_eq!(e_nn_jeqs_normalized(2, 2, 2).unwrap(), frac(78, 256));
        assert_eq!(e_nn_jeqs_normalized(2, 2, 1).unwrap(), frac(9, 16));
        for p in [2u64, 3, 5] {
            for s in 1..=3u32 {
                let expected = pow_rational(p, -(s as i64));
                assert_eq!(e_nn_jeqs_normalized(1, p, s).unwrap(), expected);
            }
        }
    }

    #[test]
    fn probability_examples() {
        assert_eq!(prob_gcd_correct(2, 2, 2).unwrap(), frac(123, 128));
        assert_eq!(prob_gcd_correct(2, 2, 1).unwrap(), frac(15, 16));
        assert_eq!(prob_gcd_correct(1, 2, 1).unwrap(), BigRational::one());
    }

    #[test]
    fn residual_examples() {
        assert_eq!(asymptotic_residual(2, 2, 2).unwrap(), frac(1, 128));
        assert_eq!(asymptotic_residual(2, 2, 1).unwrap(), BigRational::zero());
        let r = asymptotic_residual(3, 3, 1).unwrap();
        assert!(num_traits::Signed::abs(&r) <= frac(2, 243));
        assert!(residual_within(3, 3, 1, 2).unwrap());
        assert!(asymptotic_residual(1, 2, 1).is_err());
    }

    #[test]
    fn s_expansion_examples() {
        assert!(s_expansion_check(3, 3, 2).unwrap());
        assert!(s_expansion_check(4, 2, 2).unwrap());
        assert!(s_expansion_check(5, 1, 3).unwrap());
        assert!(s_expansion_check(2, 3, 2).is_err());
    }

    #[test]
    fn vandermonde_examples() {
        assert!(vandermonde_instance_check(1, 1, 2).unwrap());
        assert!(vandermonde_instance_check(2, 2, 2).unwrap());
        assert!(vandermonde_instance_check(3, 2, 5).unwrap());
    }

    #[test]
    fn square_phi_factor_needs_s_two_below_last_index() {
        assert!(matches!(
            square_phi_factor_closed(3, 2, 1, 0),
            Err(Error::RangeUnsupported { .. })
        ));
        assert_eq!(
            square_phi_factor_closed(3, 2, 1, 2).unwrap(),
            square_phi_factor(3, 2, 1, 2)
        );
    }

    #[test]
    fn crt_examples() {
        let t2 = count_table(2, 2, 2, 1);
        let single = crt_compose(vec![t2.clone()]).unwrap();
        for j in 0..=2 {
            assert_eq!(single.lookup(&[j]).unwrap(), t2.get(j));
        }
        let c = crt_compose(vec![count_table(2, 2, 2, 2), count_table(2, 2, 3, 1)]).unwrap();
        assert_eq!(c.lookup(&[0, 0]).unwrap(), BigUint::from(4608u32));
        assert_eq!(c.modulus(), BigUint::from(12u32));
        assert_eq!(c.total(), pow(12, 4));
        assert_eq!(c.solution_count(&[1, 1]).unwrap(), BigUint::from(6u32));
        assert!(c.lookup(&[0]).is_none());
        assert_eq!(
            crt_compose(vec![count_table(2, 2, 2, 1), count_table(2, 2, 2, 2)]).unwrap_err(),
            Error::DuplicatePrime(2)
        );
        assert!(crt_compose(vec![count_table(2, 2, 2, 1), count_table(2, 3, 3, 1)]).is_err());
    }
}
