//! Arbitrary-precision naturals with an inline fast path.
//!
//! Almost every number the evaluator touches fits in a machine word, so
//! `Nat` keeps small values unboxed and only promotes to [`BigUint`] when an
//! operation overflows.

use core::cmp::Ordering;
use core::fmt;

use num_bigint::BigUint;
use num_traits::ToPrimitive;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Nat {
    Small(u64),
    Big(BigUint),
}

impl Nat {
    pub const ZERO: Nat = Nat::Small(0);
    pub const ONE: Nat = Nat::Small(1);

    pub fn from_big(b: BigUint) -> Nat {
        match b.to_u64() {
            Some(v) => Nat::Small(v),
            None => Nat::Big(b),
        }
    }

    pub fn to_big(&self) -> BigUint {
        match self {
            Nat::Small(v) => BigUint::from(*v),
            Nat::Big(b) => b.clone(),
        }
    }

    pub fn as_u64(&self) -> Option<u64> {
        match self {
            Nat::Small(v) => Some(*v),
            Nat::Big(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Nat::Small(0))
    }

    pub fn add(&self, other: &Nat) -> Nat {
        if let (Nat::Small(a), Nat::Small(b)) = (self, other) {
            if let Some(s) = a.checked_add(*b) {
                return Nat::Small(s);
            }
        }
        Nat::from_big(self.to_big() + other.to_big())
    }

    pub fn mul(&self, other: &Nat) -> Nat {
        if let (Nat::Small(a), Nat::Small(b)) = (self, other) {
            if let Some(p) = a.checked_mul(*b) {
                return Nat::Small(p);
            }
        }
        Nat::from_big(self.to_big() * other.to_big())
    }

    /// `self - other`, or `None` when the result would be negative.
    pub fn checked_sub(&self, other: &Nat) -> Option<Nat> {
        match (self, other) {
            (Nat::Small(a), Nat::Small(b)) => a.checked_sub(*b).map(Nat::Small),
            _ => {
                let (a, b) = (self.to_big(), other.to_big());
                if a < b {
                    None
                } else {
                    Some(Nat::from_big(a - b))
                }
            }
        }
    }

    /// Remainder modulo a nonzero machine-word modulus.
    pub fn rem_u64(&self, m: u64) -> u64 {
        match self {
            Nat::Small(v) => v % m,
            Nat::Big(b) => (b % m).to_u64().unwrap_or(0),
        }
    }

    pub fn pow(&self, exp: u32) -> Nat {
        let mut acc = Nat::ONE;
        for _ in 0..exp {
            acc = acc.mul(self);
        }
        acc
    }

    /// Bit `i` of the binary representation.
    pub fn bit(&self, i: &Nat) -> bool {
        match (self, i) {
            (Nat::Small(v), Nat::Small(k)) => *k < 64 && (v >> k) & 1 == 1,
            (Nat::Big(b), Nat::Small(k)) => b.bit(*k),
            // an index that does not fit a word exceeds every bit length we can hold
            (_, Nat::Big(_)) => false,
        }
    }
}

impl From<u64> for Nat {
    fn from(v: u64) -> Self {
        Nat::Small(v)
    }
}

impl From<usize> for Nat {
    fn from(v: usize) -> Self {
        Nat::Small(v as u64)
    }
}

impl From<BigUint> for Nat {
    fn from(b: BigUint) -> Self {
        Nat::from_big(b)
    }
}

impl Ord for Nat {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Nat::Small(a), Nat::Small(b)) => a.cmp(b),
            (Nat::Small(_), Nat::Big(_)) => Ordering::Less,
            (Nat::Big(_), Nat::Small(_)) => Ordering::Greater,
            (Nat::Big(a), Nat::Big(b)) => a.cmp(b),
        }
    }
}

impl PartialOrd for Nat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Default for Nat {
    fn default() -> Self {
        Nat::ZERO
    }
}

impl fmt::Display for Nat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Nat::Small(v) => write!(f, "{v}"),
            Nat::Big(b) => write!(f, "{b}"),
        }
    }
}
