//! Exact scalar fields: arbitrary-precision rationals and prime fields GF(p).
//!
//! Polynomials and matrices are generic over [`Field`]. Rank over GF(p)
//! never exceeds rank over Q for integer data, so the rational field is the
//! ground truth and GF(p) is the fast mode.

use std::fmt::{self, Debug, Display};
use std::hash::Hash;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spdp::rank;

pub type Rational = BigRational;

/// 2^62 - 57, the largest prime below 2^62.
pub const DEFAULT_PRIME: u64 = 4_611_686_018_427_387_847;

/// Prime field used by the fast mode.
pub type Gf62 = Fp<DEFAULT_PRIME>;

/// Which field a report was computed over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldMode {
    Rational,
    Prime(u64),
}

impl FieldMode {
    pub fn tag(&self) -> String {
        match self {
            FieldMode::Rational => "q".to_string(),
            FieldMode::Prime(p) => format!("gf{p}"),
        }
    }
}

impl Display for FieldMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tag())
    }
}

/// A sparse row: strictly increasing column indices paired with nonzero values.
pub type SparseRow<F> = Vec<(usize, F)>;

pub trait Field: Clone + Debug + Display + PartialEq + Eq + Hash + Send + Sync + 'static {
    const MODE: FieldMode;

    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Multiplicative inverse; `None` for zero.
    fn inv(&self) -> Option<Self>;

    fn from_i64(v: i64) -> Self;
    fn from_bigint(v: &BigInt) -> Self;
    /// Fails in GF(p) when the denominator is divisible by p.
    fn from_rational(v: &Rational) -> Result<Self>;

    /// Parses an integer or `a/b` literal.
    fn parse_scalar(s: &str) -> Result<Self> {
        let q = Rational::from_str(s.trim())
            .map_err(|_| Error::parse(format!("bad coefficient `{s}`")))?;
        Self::from_rational(&q)
    }

    /// True when the value prints with a leading minus sign.
    fn is_negative(&self) -> bool {
        false
    }

    /// Exact rank of a sparse matrix over this field.
    fn rank(rows: Vec<SparseRow<Self>>, ncols: usize) -> usize;
}

impl Field for Rational {
    const MODE: FieldMode = FieldMode::Rational;

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn inv(&self) -> Option<Self> {
        if Zero::is_zero(self) {
            None
        } else {
            Some(self.recip())
        }
    }
    fn from_i64(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }
    fn from_bigint(v: &BigInt) -> Self {
        Rational::from_integer(v.clone())
    }
    fn from_rational(v: &Rational) -> Result<Self> {
        Ok(v.clone())
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn rank(rows: Vec<SparseRow<Self>>, ncols: usize) -> usize {
        let integer_rows = rows.into_iter().map(rank::clear_denominators).collect();
        rank::fraction_free_rank(integer_rows, ncols)
    }
}

/// Element of GF(P). `P` must be prime; values are kept in `[0, P)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fp<const P: u64>(u64);

impl<const P: u64> Fp<P> {
    const CHECK: () = assert!(P >= 2, "modulus must be at least 2");

    pub fn new(v: u64) -> Self {
        #[allow(clippy::let_unit_value)]
        let _ = Self::CHECK;
        Fp(v % P)
    }

    pub fn value(self) -> u64 {
        self.0
    }

    pub fn modulus() -> u64 {
        P
    }

    fn pow(self, mut e: u64) -> Self {
        let mut base = self;
        let mut acc = Fp(1 % P);
        while e > 0 {
            if e & 1 == 1 {
                acc = Field::mul(&acc, &base);
            }
            base = Field::mul(&base, &base);
            e >>= 1;
        }
        acc
    }
}

impl<const P: u64> Debug for Fp<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl<const P: u64> Display for Fp<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl<const P: u64> Field for Fp<P> {
    const MODE: FieldMode = FieldMode::Prime(P);

    fn zero() -> Self {
        Fp(0)
    }
    fn one() -> Self {
        Fp(1 % P)
    }
    fn is_zero(&self) -> bool {
        self.0 == 0
    }
    fn add(&self, other: &Self) -> Self {
        let s = self.0 as u128 + other.0 as u128;
        Fp((s % P as u128) as u64)
    }
    fn sub(&self, other: &Self) -> Self {
        if self.0 >= other.0 {
            Fp(self.0 - other.0)
        } else {
            Fp(P - (other.0 - self.0))
        }
    }
    fn mul(&self, other: &Self) -> Self {
        Fp(((self.0 as u128 * other.0 as u128) % P as u128) as u64)
    }
    fn neg(&self) -> Self {
        if self.0 == 0 {
            Fp(0)
        } else {
            Fp(P - self.0)
        }
    }
    fn inv(&self) -> Option<Self> {
        if self.0 == 0 {
            None
        } else {
            Some(self.pow(P - 2))
        }
    }
    fn from_i64(v: i64) -> Self {
        let r = (v as i128).rem_euclid(P as i128);
        Fp(r as u64)
    }
    fn from_bigint(v: &BigInt) -> Self {
        let r = v.mod_floor(&BigInt::from(P));
        Fp(r.to_u64().expect("residue fits in u64"))
    }
    fn from_rational(v: &Rational) -> Result<Self> {
        let num = Self::from_bigint(v.numer());
        let den = Self::from_bigint(v.denom());
        let inv = den
            .inv()
            .ok_or_else(|| Error::Field(format!("denominator of {v} vanishes mod {P}")))?;
        Ok(num.mul(&inv))
    }
    fn rank(rows: Vec<SparseRow<Self>>, ncols: usize) -> usize {
        rank::field_rank(rows, ncols)
    }
}
