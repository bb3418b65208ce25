//! Exact number types: arbitrary-precision rationals, rationals with an
//! infinitesimal part, and rationals extended with +∞.
//!
//! `EpsNum` values `a + b·ε` are ordered lexicographically, so ε is a
//! positive infinitesimal: `(0,0) < (0,1) < (1,0)`.  They form the
//! first-order part of the ordered vector space used to decide strict
//! systems "for all sufficiently small ε > 0" with a single exact
//! computation.  `Ext<T>` adjoins +∞; `ext_strict_gt` deliberately treats
//! `+∞ > +∞` as true, which is the comparison the strict dual systems need.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Arbitrary-precision rational in canonical form: reduced, denominator > 0.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(BigRational);

impl Rational {
    /// Builds `num/den`; fails when `den == 0`.
    pub fn new(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Result<Self> {
        let den = den.into();
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Rational(BigRational::new(num.into(), den)))
    }

    /// The integer `n` as a rational.
    pub fn from_int(n: i64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    /// True when the value is an integer (denominator 1).
    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    /// Exact half of this value.
    pub fn scale_half(&self) -> Self {
        Rational(&self.0 / BigRational::from_integer(BigInt::from(2)))
    }

    /// Exact division; `Err(DivisionByZero)` when `rhs == 0`.
    pub fn checked_div(&self, rhs: &Rational) -> Result<Self> {
        if rhs.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Rational(&self.0 / &rhs.0))
    }

    /// Multiplicative inverse; `Err(DivisionByZero)` when zero.
    pub fn recip(&self) -> Result<Self> {
        Rational::one().checked_div(self)
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }
}

impl Default for Rational {
    fn default() -> Self {
        Rational::zero()
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_int(n)
    }
}

impl From<BigInt> for Rational {
    fn from(n: BigInt) -> Self {
        Rational(BigRational::from_integer(n))
    }
}

macro_rules! forward_binop {
    ($ty:ty, $trait:ident, $method:ident, $op:tt) => {
        impl $trait for $ty {
            type Output = $ty;
            fn $method(self, rhs: $ty) -> $ty {
                Rational(self.0 $op rhs.0)
            }
        }
        impl<'a> $trait<&'a $ty> for &'a $ty {
            type Output = $ty;
            fn $method(self, rhs: &'a $ty) -> $ty {
                Rational(&self.0 $op &rhs.0)
            }
        }
        impl<'a> $trait<&'a $ty> for $ty {
            type Output = $ty;
            fn $method(self, rhs: &'a $ty) -> $ty {
                Rational(self.0 $op &rhs.0)
            }
        }
        impl<'a> $trait<$ty> for &'a $ty {
            type Output = $ty;
            fn $method(self, rhs: $ty) -> $ty {
                Rational(&self.0 $op rhs.0)
            }
        }
    };
}

forward_binop!(Rational, Add, add, +);
forward_binop!(Rational, Sub, sub, -);
forward_binop!(Rational, Mul, mul, *);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        self.0 += &rhs.0;
    }
}

impl SubAssign<&Rational> for Rational {
    fn sub_assign(&mut self, rhs: &Rational) {
        self.0 -= &rhs.0;
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl FromStr for Rational {
    type Err = Error;

    /// Accepts `p`, `-p`, and `p/q` with optional sign on either part.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: &str| Error::Parse { line: 1, col: 1, msg: format!("{msg}: {s:?}") };
        let s = s.trim();
        if s.is_empty() {
            return Err(bad("empty rational"));
        }
        match s.split_once('/') {
            None => {
                let n = BigInt::from_str(s).map_err(|_| bad("invalid integer"))?;
                Ok(Rational::from(n))
            }
            Some((p, q)) => {
                let p = BigInt::from_str(p.trim()).map_err(|_| bad("invalid numerator"))?;
                let q = BigInt::from_str(q.trim()).map_err(|_| bad("invalid denominator"))?;
                if q.is_zero() {
                    return Err(Error::DivisionByZero);
                }
                Ok(Rational(BigRational::new(p, q)))
            }
        }
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ser.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(de)?;
        s.parse().map_err(|e| D::Error::custom(format!("{e}")))
    }
}

/// A rational with an infinitesimal part: `std + eps·ε`, ordered
/// lexicographically so that `0 < ε < q` for every positive rational `q`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EpsNum {
    pub std: Rational,
    pub eps: Rational,
}

impl EpsNum {
    pub fn new(std: Rational, eps: Rational) -> Self {
        EpsNum { std, eps }
    }

    pub fn from_rational(std: Rational) -> Self {
        EpsNum { std, eps: Rational::zero() }
    }

    pub fn zero() -> Self {
        EpsNum::from_rational(Rational::zero())
    }

    /// The infinitesimal unit ε itself.
    pub fn eps_unit() -> Self {
        EpsNum { std: Rational::zero(), eps: Rational::one() }
    }

    pub fn is_zero(&self) -> bool {
        self.std.is_zero() && self.eps.is_zero()
    }

    /// True when the infinitesimal part vanishes.
    pub fn is_rational(&self) -> bool {
        self.eps.is_zero()
    }

    /// Multiplies both parts by a rational scalar.
    pub fn scale(&self, r: &Rational) -> Self {
        EpsNum { std: &self.std * r, eps: &self.eps * r }
    }

    /// True when the value is strictly positive (lexicographically).
    pub fn is_positive(&self) -> bool {
        self.std.is_positive() || (self.std.is_zero() && self.eps.is_positive())
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }
}

impl Default for EpsNum {
    fn default() -> Self {
        EpsNum::zero()
    }
}

impl From<Rational> for EpsNum {
    fn from(r: Rational) -> Self {
        EpsNum::from_rational(r)
    }
}

impl From<i64> for EpsNum {
    fn from(n: i64) -> Self {
        EpsNum::from_rational(Rational::from_int(n))
    }
}

impl Add for EpsNum {
    type Output = EpsNum;
    fn add(self, rhs: EpsNum) -> EpsNum {
        EpsNum { std: self.std + rhs.std, eps: self.eps + rhs.eps }
    }
}

impl<'a> Add<&'a EpsNum> for &'a EpsNum {
    type Output = EpsNum;
    fn add(self, rhs: &'a EpsNum) -> EpsNum {
        EpsNum { std: &self.std + &rhs.std, eps: &self.eps + &rhs.eps }
    }
}

impl Sub for EpsNum {
    type Output = EpsNum;
    fn sub(self, rhs: EpsNum) -> EpsNum {
        EpsNum { std: self.std - rhs.std, eps: self.eps - rhs.eps }
    }
}

impl<'a> Sub<&'a EpsNum> for &'a EpsNum {
    type Output = EpsNum;
    fn sub(self, rhs: &'a EpsNum) -> EpsNum {
        EpsNum { std: &self.std - &rhs.std, eps: &self.eps - &rhs.eps }
    }
}

impl Neg for EpsNum {
    type Output = EpsNum;
    fn neg(self) -> EpsNum {
        EpsNum { std: -self.std, eps: -self.eps }
    }
}

impl Neg for &EpsNum {
    type Output = EpsNum;
    fn neg(self) -> EpsNum {
        EpsNum { std: -&self.std, eps: -&self.eps }
    }
}

impl AddAssign<&EpsNum> for EpsNum {
    fn add_assign(&mut self, rhs: &EpsNum) {
        self.std += &rhs.std;
        self.eps += &rhs.eps;
    }
}

impl fmt::Display for EpsNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.eps.is_zero() {
            return write!(f, "{}", self.std);
        }
        let eps_term = |f: &mut fmt::Formatter<'_>, b: &Rational| {
            if b == &Rational::one() {
                write!(f, "eps")
            } else {
                write!(f, "{}*eps", b)
            }
        };
        if self.std.is_zero() {
            if self.eps.is_negative() {
                write!(f, "-")?;
            }
            return eps_term(f, &self.eps.abs());
        }
        write!(f, "{}", self.std)?;
        if self.eps.is_negative() {
            write!(f, " - ")?;
        } else {
            write!(f, " + ")?;
        }
        eps_term(f, &self.eps.abs())
    }
}

impl fmt::Debug for EpsNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl FromStr for EpsNum {
    type Err = Error;

    /// Accepts `a`, `b*eps`, `eps`, `a + b*eps`, `a - eps`, and the like.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: &str| Error::Parse { line: 1, col: 1, msg: format!("{msg}: {s:?}") };
        // Split into signed terms at top level.
        let mut terms: Vec<(bool, String)> = Vec::new();
        let mut cur = String::new();
        let mut neg = false;
        let mut seen_any = false;
        for (i, ch) in s.trim().chars().enumerate() {
            match ch {
                '+' | '-' if seen_any && !cur.trim().is_empty() => {
                    terms.push((neg, cur.trim().to_string()));
                    cur = String::new();
                    neg = ch == '-';
                }
                '-' if i == 0 || cur.trim().is_empty() && !seen_any => {
                    neg = !neg;
                    seen_any = true;
                }
                _ => {
                    cur.push(ch);
                    seen_any = true;
                }
            }
        }
        if !cur.trim().is_empty() {
            terms.push((neg, cur.trim().to_string()));
        }
        if terms.is_empty() {
            return Err(bad("empty eps-number"));
        }
        let mut std = Rational::zero();
        let mut eps = Rational::zero();
        for (neg, t) in terms {
            let (mut val, is_eps) = if t == "eps" {
                (Rational::one(), true)
            } else if let Some(coef) = t.strip_suffix("*eps") {
                (coef.trim().parse::<Rational>()?, true)
            } else if t.ends_with("eps") {
                return Err(bad("eps term must be written `eps` or `b*eps`"));
            } else {
                (t.parse::<Rational>()?, false)
            };
            if neg {
                val = -val;
            }
            if is_eps {
                eps = eps + val;
            } else {
                std = std + val;
            }
        }
        Ok(EpsNum { std, eps })
    }
}

/// A value extended with positive infinity.  The derived order puts
/// `Finite(_) < PosInf` and compares finite values through `T`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Ext<T> {
    Finite(T),
    PosInf,
}

/// Rationals extended with +∞ (the dual systems' value domain).
pub type ExtVal = Ext<Rational>;

impl<T> Ext<T> {
    pub fn is_finite(&self) -> bool {
        matches!(self, Ext::Finite(_))
    }

    pub fn as_finite(&self) -> Option<&T> {
        match self {
            Ext::Finite(v) => Some(v),
            Ext::PosInf => None,
        }
    }

    pub fn map<U>(self, f: impl FnOnce(T) -> U) -> Ext<U> {
        match self {
            Ext::Finite(v) => Ext::Finite(f(v)),
            Ext::PosInf => Ext::PosInf,
        }
    }
}

impl<T: Ord + Clone> Ext<T> {
    /// Strict comparison with the stipulation `+∞ > +∞`, which is exactly
    /// the reading under which the strict dual system is the complement of
    /// the non-strict primal one.
    pub fn strict_gt(&self, other: &Ext<T>) -> bool {
        match (self, other) {
            (Ext::PosInf, _) => true,
            (Ext::Finite(_), Ext::PosInf) => false,
            (Ext::Finite(a), Ext::Finite(b)) => a > b,
        }
    }
}

impl<T> Ext<T>
where
    for<'a> &'a T: Add<&'a T, Output = T>,
{
    /// Addition with +∞ absorbing.
    pub fn add_ext(&self, other: &Ext<T>) -> Ext<T> {
        match (self, other) {
            (Ext::Finite(a), Ext::Finite(b)) => Ext::Finite(a + b),
            _ => Ext::PosInf,
        }
    }
}

/// Strict comparison on extended rationals with `+∞ > +∞` stipulated.
pub fn ext_strict_gt(x: &ExtVal, y: &ExtVal) -> bool {
    x.strict_gt(y)
}

impl<T: fmt::Display> fmt::Display for Ext<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ext::Finite(v) => write!(f, "{}", v),
            Ext::PosInf => write!(f, "+inf"),
        }
    }
}

impl<T: fmt::Display> fmt::Debug for Ext<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}
