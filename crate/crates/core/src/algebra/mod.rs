//! Exact fields and sparse multilinear / standard-ring polynomials.

pub mod field;
pub mod monomial;
pub mod parse;
pub mod polynomial;

pub use field::{Field, FieldMode, Fp, Gf62, Rational, SparseRow, DEFAULT_PRIME};
pub use monomial::{monomials_of_degree, monomials_up_to, Monomial, RingMode};
pub use parse::parse_polynomial;
pub use polynomial::Polynomial;
