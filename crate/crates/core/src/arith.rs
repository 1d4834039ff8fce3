//! Exact arithmetic: big counts, rationals, Gaussian binomials and the
//! generalized Euler function.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, Zero};

/// Nonnegative arbitrary-precision count.
pub type Count = BigUint;

/// Exact fraction, always kept in lowest terms with a positive denominator.
pub type ExactRational = BigRational;

/// `base^exp` as a big integer.
pub fn pow(base: u64, exp: u64) -> BigUint {
    Pow::pow(BigUint::from(base), exp)
}

/// `base^exp` as an exact rational; negative exponents give reciprocals.
pub fn pow_rational(base: u64, exp: i64) -> ExactRational {
    let magnitude = BigInt::from(pow(base, exp.unsigned_abs()));
    if exp >= 0 {
        BigRational::from_integer(magnitude)
    } else {
        BigRational::new(BigInt::one(), magnitude)
    }
}

pub fn to_rational(value: &BigUint) -> ExactRational {
    BigRational::from_integer(BigInt::from(value.clone()))
}

/// Gaussian binomial coefficient `[n k]_q` at an integer `q >= 2`.
///
/// Evaluated with the product formula, dividing after every factor pair.
/// Each partial quotient is itself a Gaussian binomial, so the division is
/// exact; a nonzero remainder aborts.
pub fn qbinom(n: u64, k: u64, q: impl Into<BigUint>) -> Count {
    let q = q.into();
    assert!(q >= BigUint::from(2u32), "qbinom needs q >= 2");
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let one = BigUint::one();
    let mut acc = BigUint::one();
    for i in 0..k {
        let numer = Pow::pow(&q, n - i) - &one;
        let denom = Pow::pow(&q, i + 1) - &one;
        let (quot, rem) = (acc * numer).div_rem(&denom);
        assert!(rem.is_zero(), "inexact division in qbinom({n}, {k})");
        acc = quot;
    }
    acc
}

/// `[n k]_p / p^{k(n-k)}`, i.e. the Gaussian binomial evaluated at `1/p`.
pub fn qbinom_at_inverse(n: u64, k: u64, p: u64) -> ExactRational {
    if k > n {
        return BigRational::zero();
    }
    let numer = BigInt::from(qbinom(n, k, p));
    let denom = BigInt::from(pow(p, k * (n - k)));
    BigRational::new(numer, denom)
}

/// Generalized Euler function `phi_n(p^t)`: the number of `n`-tuples over
/// `[1, p^t]` with at least one coordinate prime to `p^t`.
pub fn gen_phi(n: u64, p: u64, t: u64) -> Count {
    if t == 0 {
        return BigUint::one();
    }
    pow(p, t * n) - pow(p, (t - 1) * n)
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin; the witness set is exact for all `u64`.
pub fn is_prime(n: u64) -> bool {
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &w in &WITNESSES {
        if n.is_multiple_of(w) {
            return n == w;
        }
    }
    let mut d = n - 1;
    let mut r = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        r += 1;
    }
    'witness: for &a in &WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..r {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qb(n: u64, k: u64, q: u64) -> BigUint {
        qbinom(n, k, q)
    }

    fn qpow(q: u64, e: u64) -> BigUint {
        pow(q, e)
    }

    /// Counts k-dimensional subspaces of GF(2)^n by checking every subset of
    /// the 2^n vectors for closure under addition.
    fn subspaces_gf2(n: u32, k: u32) -> u64 {
        let vectors = 1u32 << n;
        let mut count = 0;
        for subset in 0u64..(1u64 << vectors) {
            if subset.count_ones() != 1 << k || subset & 1 == 0 {
                continue;
            }
            let members: Vec<u32> = (0..vectors).filter(|v| subset >> v & 1 == 1).collect();
            let closed = members
                .iter()
                .all(|&a| members.iter().all(|&b| subset >> (a ^ b) & 1 == 1));
            if closed {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn qbinom_examples() {
        assert_eq!(qb(5, 0, 2), BigUint::from(1u32));
        assert_eq!(qb(2, 3, 2), BigUint::zero());
        let two_one = subspaces_gf2(2, 1);
        let four_two = subspaces_gf2(4, 2);
        assert_eq!(two_one, 3);
        assert_eq!(four_two, 35);
        assert_eq!(qb(2, 1, 2), BigUint::from(two_one));
        assert_eq!(qb(4, 2, 2), BigUint::from(four_two));
    }

    #[test]
    fn qbinom_inverse_examples() {
        assert_eq!(qbinom_at_inverse(3, 0, 5), BigRational::one());
        assert_eq!(
            qbinom_at_inverse(2, 1, 2),
            BigRational::new(3.into(), 2.into())
        );
        assert_eq!(
            qbinom_at_inverse(4, 2, 2),
            BigRational::new(35.into(), 16.into())
        );
        assert!(qbinom_at_inverse(2, 5, 3).is_zero());
    }

    #[test]
    fn gen_phi_matches_enumeration() {
        assert_eq!(gen_phi(3, 7, 0), BigUint::one());
        assert_eq!(gen_phi(1, 2, 3), BigUint::from(4u32));
        assert_eq!(gen_phi(2, 2, 2), BigUint::from(12u32));
        // Tuples over [1, c]^n with some coordinate prime to c.
        for (n, p, t) in [
            (1u32, 3u64, 2u32),
            (2, 2, 2),
            (2, 3, 1),
            (3, 2, 2),
            (2, 5, 1),
        ] {
            let c = p.pow(t);
            let mut hits = 0u64;
            let total = c.pow(n);
            for idx in 0..total {
                let mut rest = idx;
                let mut coprime = false;
                for _ in 0..n {
                    let a = rest % c + 1;
                    rest /= c;
                    coprime |= a.gcd(&c) == 1;
                }
                hits += coprime as u64;
            }
            assert_eq!(
                gen_phi(n as u64, p, t as u64),
                BigUint::from(hits),
                "{n} {p} {t}"
            );
        }
    }

    #[test]
    fn pascal_and_symmetry() {
        for q in [2u64, 3, 5] {
            for n in 1..=8u64 {
                for k in 1..=n {
                    let lhs = qb(n, k, q);
                    assert_eq!(lhs, qb(n - 1, k, q) + qpow(q, n - k) * qb(n - 1, k - 1, q));
                    assert_eq!(lhs, qb(n - 1, k - 1, q) + qpow(q, k) * qb(n - 1, k, q));
                    assert_eq!(lhs, qb(n, n - k, q));
                }
            }
        }
    }

    #[test]
    fn sum_identity_with_q_powers() {
        for q in [2u64, 3, 5] {
            for n in 0..=6u64 {
                for j in 0..=6u64 {
                    let lhs: BigUint = (0..=j).map(|i| qpow(q, i) * qb(n + i, i, q)).sum();
                    assert_eq!(lhs, qb(n + j + 1, j, q));
                }
            }
        }
        // With p != q the literal p^i reading breaks.
        let lhs: BigUint = (0..=1u64).map(|i| qpow(3, i) * qb(1 + i, i, 2)).sum();
        assert_ne!(lhs, qb(3, 1, 2));
    }

    #[test]
    fn vandermonde() {
        for q in [2u64, 3, 5] {
            for n in 0..=6u64 {
                for m in 0..=6u64 {
                    for h in 0..=n + m {
                        let lhs: BigUint = (0..=h.min(n))
                            .map(|k| qb(n, k, q) * qb(m, h - k, q) * qpow(q, (n - k) * (h - k)))
                            .sum();
                        assert_eq!(lhs, qb(m + n, h, q));
                    }
                }
            }
        }
    }

    /// Newton divided differences over exact rationals; returns the degree of
    /// the interpolating polynomial through `(x, f(x))` for x = 2, 3, ...
    fn interpolated_degree(values: &[BigUint]) -> usize {
        let xs: Vec<BigRational> = (0..values.len())
            .map(|i| BigRational::from_integer(BigInt::from(i as u64 + 2)))
            .collect();
        let mut table: Vec<BigRational> = values.iter().map(to_rational).collect();
        let mut coeffs = vec![table[0].clone()];
        for level in 1..values.len() {
            for i in (level..values.len()).rev() {
                table[i] = (&table[i] - &table[i - 1]) / (&xs[i] - &xs[i - level]);
            }
            coeffs.push(table[level].clone());
        }
        coeffs.iter().rposition(|c| !c.is_zero()).unwrap_or(0)
    }

    #[test]
    fn polynomial_degree() {
        for n in 0..=6u64 {
            for k in 0..=n {
                let deg = k * (n - k);
                let samples: Vec<BigUint> = (0..deg + 3).map(|i| qb(n, k, i + 2)).collect();
                assert_eq!(interpolated_degree(&samples) as u64, deg, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn primality() {
        let small: Vec<u64> = (0..60).filter(|&n| is_prime(n)).collect();
        assert_eq!(
            small,
            [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59]
        );
        assert!(is_prime(1_000_000_007));
        assert!(!is_prime(3_215_031_751));
        assert!(is_prime(18_446_744_073_709_551_557));
    }

    #[test]
    fn rational_powers() {
        assert_eq!(pow_rational(2, -3), BigRational::new(1.into(), 8.into()));
        assert_eq!(pow_rational(3, 2), BigRational::from_integer(9.into()));
    }
}
