//! Exact and certified numerics: dyadic intervals, polynomials, matrices,
//! integer factorization, complex root isolation and algebraic numbers.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::{One, Zero};

pub mod algebraic;
pub mod complex;
pub mod dyadic;
pub mod factor;
pub mod genpoly;
pub mod intpoly;
pub mod interval;
pub mod matrix;
pub mod numfield;
pub mod poly;
pub mod roots;

/// A commutative ring with identity.
pub trait Ring:
    Clone
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
}

impl<T> Ring for T where
    T: Clone + Zero + One + Add<Output = T> + Sub<Output = T> + Mul<Output = T> + Neg<Output = T>
{
}

/// A field: a ring with exact division by non-zero elements.
pub trait Field: Ring + Div<Output = Self> {}

impl<T> Field for T where T: Ring + Div<Output = T> {}

/// Sign of a real quantity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    pub fn from_i32(s: i32) -> Sign {
        match s.signum() {
            -1 => Sign::Negative,
            0 => Sign::Zero,
            _ => Sign::Positive,
        }
    }

    pub fn to_i32(self) -> i32 {
        match self {
            Sign::Negative => -1,
            Sign::Zero => 0,
            Sign::Positive => 1,
        }
    }

    pub fn negate(self) -> Sign {
        Sign::from_i32(-self.to_i32())
    }

    pub fn times(self, o: Sign) -> Sign {
        Sign::from_i32(self.to_i32() * o.to_i32())
    }
}
