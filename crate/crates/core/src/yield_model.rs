//! Analytic die-yield models and defect-density calibration.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum YieldModel {
    /// `((1 - exp(-AD)) / AD)^2`, triangular defect-density distribution.
    Murphy,
    /// `exp(-AD)`, uniformly scattered defects.
    Poisson,
    /// `1 / (1 + AD)`, exponential defect-density distribution.
    Seeds,
}

impl YieldModel {
    pub const ALL: [YieldModel; 3] = [YieldModel::Murphy, YieldModel::Poisson, YieldModel::Seeds];

    pub fn as_str(self) -> &'static str {
        match self {
            YieldModel::Murphy => "murphy",
            YieldModel::Poisson => "poisson",
            YieldModel::Seeds => "seeds",
        }
    }

    /// Yield as a function of the mean number of fatal defects per die.
    pub fn evaluate(self, defects_per_die: f64) -> f64 {
        let x = defects_per_die;
        if x == 0.0 {
            return 1.0;
        }
        match self {
            YieldModel::Murphy => {
                let r = -(-x).exp_m1() / x;
                r * r
            }
            YieldModel::Poisson => (-x).exp(),
            YieldModel::Seeds => 1.0 / (1.0 + x),
        }
    }
}

impl FromStr for YieldModel {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        YieldModel::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown yield model `{s}` (expected murphy, poisson or seeds)"))
    }
}

impl fmt::Display for YieldModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YieldModelSpec {
    pub model: YieldModel,
    pub defect_density: f64,
}

/// Fraction of dies of `die_area_cm2` free of fatal defects.
pub fn yield_fraction(spec: &YieldModelSpec, die_area_cm2: f64) -> f64 {
    spec.model.evaluate(die_area_cm2 * spec.defect_density)
}

const MAX_BRACKET_DOUBLINGS: usize = 1100;
const MAX_BISECTIONS: usize = 400;

/// Defect density at which `model` yields `target_yield` for a die of
/// `die_area_cm2`.
///
/// The map from density to yield is strictly decreasing, so a bracket
/// `[0, hi]` is grown by doubling and then halved until it collapses to
/// adjacent floating-point values.
pub fn calibrate_defect_density(model: YieldModel, die_area_cm2: f64, target_yield: f64) -> Result<f64> {
    if !(die_area_cm2.is_finite() && die_area_cm2 > 0.0) {
        return Err(Error::Domain(format!("die area must be > 0, got {die_area_cm2}")));
    }
    if !(target_yield > 0.0 && target_yield <= 1.0) {
        return Err(Error::Domain(format!(
            "target yield must be within (0, 1], got {target_yield}"
        )));
    }
    if target_yield == 1.0 {
        return Ok(0.0);
    }
    let y = |d: f64| model.evaluate(die_area_cm2 * d);

    let mut lo = 0.0;
    let mut hi = 1.0 / die_area_cm2;
    let mut doublings = 0;
    while y(hi) >= target_yield {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > MAX_BRACKET_DOUBLINGS || !hi.is_finite() {
            return Err(Error::Domain(format!(
                "target yield {target_yield} is below what the {model} model can represent"
            )));
        }
    }

    // invariant: y(lo) >= target > y(hi)
    for _ in 0..MAX_BISECTIONS {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        if y(mid) >= target_yield {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (elo, ehi) = ((y(lo) - target_yield).abs(), (y(hi) - target_yield).abs());
    Ok(if elo <= ehi { lo } else { hi })
}
