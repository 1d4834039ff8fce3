//! Exact counting of `n x m` matrices over `Z/p^sZ` by the size of their
//! homogeneous kernel.
//!
//! The crate offers three independent routes to the count
//! `E(n x m, p^s, p^j)`:
//!
//! * [`recursive`]: a memoized mutual recursion over the shape and the
//!   exponent, valid for every parameter combination;
//! * [`explicit`]: closed forms for the regimes where they are known
//!   (`n >= m` with `j <= s`, single rows and columns, the field case);
//! * [`oracle`]: exhaustive enumeration of every matrix, used as ground truth.
//!
//! On top of the counts, [`probability`] evaluates the exact probability that
//! `gcd(det A, p^s)` equals the number of solutions of `Ax = 0`, and composes
//! prime-power tables into composite-modulus counts.

pub mod arith;
pub mod cli;
pub mod error;
pub mod explicit;
pub mod linalg;
pub mod oracle;
pub mod probability;
pub mod recursive;
pub mod table;

pub use arith::{gen_phi, is_prime, qbinom, qbinom_at_inverse, Count, ExactRational};
pub use error::{Error, Result};
pub use linalg::{PrimePower, SmithProfile, ZpsMatrix};
pub use table::CountTable;
