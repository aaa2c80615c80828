//! Arithmetic shared by plain floats and Taylor jets, so that every metric
//! formula is written once and evaluated either pointwise or with exact
//! derivatives.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::{Error, Result};

pub trait Scalar:
    Clone
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    /// Point value (constant term for jets).
    fn value(&self) -> f64;

    /// A constant with the same shape as `self`.
    fn lift(&self, c: f64) -> Self;

    fn try_sqrt(&self) -> Result<Self>;

    fn try_div(&self, rhs: &Self) -> Result<Self>;

    fn sin(&self) -> Self;

    fn cos(&self) -> Self;

    fn square(&self) -> Self {
        self.clone() * self.clone()
    }
}

impl Scalar for f64 {
    fn value(&self) -> f64 {
        *self
    }

    fn lift(&self, c: f64) -> Self {
        c
    }

    fn try_sqrt(&self) -> Result<Self> {
        if *self > 0.0 {
            Ok(f64::sqrt(*self))
        } else {
            Err(Error::Domain(format!("sqrt of non-positive value {self}")))
        }
    }

    fn try_div(&self, rhs: &Self) -> Result<Self> {
        if *rhs == 0.0 {
            Err(Error::SingularJet)
        } else {
            Ok(self / rhs)
        }
    }

    fn sin(&self) -> Self {
        f64::sin(*self)
    }

    fn cos(&self) -> Self {
        f64::cos(*self)
    }
}
