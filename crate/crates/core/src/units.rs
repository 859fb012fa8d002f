//! Energy quantity carried in watt-hours.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Mul};

use serde::{Deserialize, Serialize};

const WH_PER_KWH: f64 = 1000.0;

/// An amount of energy. Stored in watt-hours so that micro-watt circuits
/// integrated over years stay well clear of the display rounding in kWh.
#[derive(Debug, Clone, Copy, Default, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Energy(f64);

impl Energy {
    pub const ZERO: Energy = Energy(0.0);

    pub fn from_wh(wh: f64) -> Self {
        Energy(wh)
    }

    pub fn from_kwh(kwh: f64) -> Self {
        Energy(kwh * WH_PER_KWH)
    }

    pub fn wh(self) -> f64 {
        self.0
    }

    pub fn kwh(self) -> f64 {
        self.0 / WH_PER_KWH
    }
}

impl Add for Energy {
    type Output = Energy;
    fn add(self, rhs: Energy) -> Energy {
        Energy(self.0 + rhs.0)
    }
}

impl Mul<f64> for Energy {
    type Output = Energy;
    fn mul(self, rhs: f64) -> Energy {
        Energy(self.0 * rhs)
    }
}

impl Sum for Energy {
    fn sum<I: Iterator<Item = Energy>>(iter: I) -> Energy {
        iter.fold(Energy::ZERO, Add::add)
    }
}

impl fmt::Display for Energy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match f.precision() {
            Some(p) => write!(f, "{:.*} kWh", p, self.kwh()),
            None => write!(f, "{} kWh", self.kwh()),
        }
    }
}
