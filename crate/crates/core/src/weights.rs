//! Bounds `(⋖, c)` and their arithmetic.
//!
//! A [`Weight`] is packed into a single `i64` as `2c + b` where `b` is 1 for a
//! weak (`≤`) bound and 0 for a strict (`<`) one. With this encoding the
//! natural integer order on the packed value is exactly the order on bounds,
//! and `(<, ∞)` is the largest representable value.

use std::fmt;

use thiserror::Error;

/// Largest magnitude of a finite bound constant.
pub const MAX_CONSTANT: i64 = i64::MAX / 8;

const INF_RAW: i64 = i64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum WeightError {
    #[error("arithmetic overflow on bound constants")]
    Overflow,
    #[error("constant {0} is outside the representable range")]
    OutOfRange(i64),
    #[error("cannot negate an infinite bound")]
    InfiniteNegation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Relation {
    /// `<`
    Strict,
    /// `≤`
    Weak,
}

/// A bound `(⋖, c)` with `⋖ ∈ {<, ≤}` and `c` an integer, or `(<, ∞)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Weight(i64);

impl Weight {
    /// `(<, ∞)`
    pub const INFINITY: Weight = Weight(INF_RAW);
    /// `(≤, 0)`
    pub const LE_ZERO: Weight = Weight(1);
    /// `(<, 0)`
    pub const LT_ZERO: Weight = Weight(0);

    pub fn try_new(relation: Relation, constant: i64) -> Result<Self, WeightError> {
        if !(-MAX_CONSTANT..=MAX_CONSTANT).contains(&constant) {
            return Err(WeightError::OutOfRange(constant));
        }
        Ok(Self::pack(relation, constant))
    }

    /// `(≤, c)`. Panics if `c` is outside `±MAX_CONSTANT`.
    pub fn weak(constant: i64) -> Self {
        Self::try_new(Relation::Weak, constant).expect("bound constant out of range")
    }

    /// `(<, c)`. Panics if `c` is outside `±MAX_CONSTANT`.
    pub fn strict(constant: i64) -> Self {
        Self::try_new(Relation::Strict, constant).expect("bound constant out of range")
    }

    fn pack(relation: Relation, constant: i64) -> Self {
        let bit = match relation {
            Relation::Strict => 0,
            Relation::Weak => 1,
        };
        Weight(2 * constant + bit)
    }

    pub fn is_infinite(self) -> bool {
        self.0 == INF_RAW
    }

    pub fn relation(self) -> Relation {
        if self.is_infinite() || self.0 & 1 == 0 {
            Relation::Strict
        } else {
            Relation::Weak
        }
    }

    pub fn is_strict(self) -> bool {
        self.relation() == Relation::Strict
    }

    /// The constant, or `None` for `(<, ∞)`.
    pub fn constant(self) -> Option<i64> {
        if self.is_infinite() {
            None
        } else {
            Some(self.0 >> 1)
        }
    }

    /// `(⋖1, c1) + (⋖2, c2) = (⋖, c1 + c2)`, strict iff either operand is.
    pub fn checked_add(self, other: Weight) -> Result<Weight, WeightError> {
        if self.is_infinite() || other.is_infinite() {
            return Ok(Weight::INFINITY);
        }
        let c = (self.0 >> 1)
            .checked_add(other.0 >> 1)
            .filter(|c| c.abs() <= MAX_CONSTANT)
            .ok_or(WeightError::Overflow)?;
        let bit = self.0 & other.0 & 1;
        Ok(Weight(2 * c + bit))
    }

    /// Ceiling on integer-valued bounds: `⌈(≤,c)⌉ = (≤,c)`, `⌈(<,c)⌉ = (<,c+1)`.
    /// `(<, ∞)` is its own ceiling.
    pub fn ceil(self) -> Weight {
        if self.is_infinite() || self.0 & 1 == 1 {
            self
        } else {
            Weight(self.0 + 2)
        }
    }

    /// `−(⋖, c) = (⋖, −c)`.
    pub fn checked_neg(self) -> Result<Weight, WeightError> {
        if self.is_infinite() {
            return Err(WeightError::InfiniteNegation);
        }
        let bit = self.0 & 1;
        Ok(Weight(2 * bit - self.0))
    }

    /// Raw packed representation; exposed for compact hashing.
    pub fn raw(self) -> i64 {
        self.0
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.constant() {
            None => write!(f, "(<,inf)"),
            Some(c) => match self.relation() {
                Relation::Strict => write!(f, "(<,{c})"),
                Relation::Weak => write!(f, "(<=,{c})"),
            },
        }
    }
}

impl fmt::Debug for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Maximal constant of an L or U bound for one clock: a non-negative integer,
/// or `−∞` when the clock never occurs in a guard of that kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum LuConstant {
    #[default]
    NegInfinity,
    Finite(i64),
}

impl LuConstant {
    pub fn finite(c: i64) -> Self {
        assert!(c >= 0, "LU constants are non-negative");
        LuConstant::Finite(c)
    }

    pub fn value(self) -> Option<i64> {
        match self {
            LuConstant::NegInfinity => None,
            LuConstant::Finite(c) => Some(c),
        }
    }

    pub fn is_neg_infinity(self) -> bool {
        self == LuConstant::NegInfinity
    }

    /// The constant with `−∞` mapped to 0; region granularity.
    pub fn or_zero(self) -> i64 {
        self.value().unwrap_or(0)
    }
}

impl fmt::Display for LuConstant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LuConstant::NegInfinity => write!(f, "-inf"),
            LuConstant::Finite(c) => write!(f, "{c}"),
        }
    }
}
