//! Die-per-wafer geometry.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Die counts for one wafer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DieCount {
    /// Analytic gross die estimate before flooring.
    pub gross_real: f64,
    pub gross: u64,
    /// `gross_real * yield`. Equal to `gross_real` until a yield is applied.
    pub functional_expected: f64,
}

impl DieCount {
    pub fn at_yield(self, yield_fraction: f64) -> DieCount {
        DieCount {
            functional_expected: functional_dies(self.gross_real, yield_fraction),
            ..self
        }
    }
}

/// Gross die sites on a round wafer: wafer area over die area, less an edge
/// loss proportional to the circumference.
///
/// `gross = pi (d/2)^2 / S - pi d / sqrt(2 S)` with `d` in mm and `S` in mm^2.
pub fn gross_dies_per_wafer(diameter_mm: f64, die_area_mm2: f64) -> Result<DieCount> {
    if !(diameter_mm.is_finite() && diameter_mm > 0.0) {
        return Err(Error::Domain(format!("wafer diameter must be > 0, got {diameter_mm}")));
    }
    if !(die_area_mm2.is_finite() && die_area_mm2 > 0.0) {
        return Err(Error::Domain(format!("die area must be > 0, got {die_area_mm2}")));
    }
    let radius = diameter_mm / 2.0;
    let gross_real = PI * radius * radius / die_area_mm2 - PI * diameter_mm / (2.0 * die_area_mm2).sqrt();
    if gross_real <= 0.0 {
        return Err(Error::Geometry(format!(
            "a {die_area_mm2} mm^2 die does not fit on a {diameter_mm} mm wafer"
        )));
    }
    Ok(DieCount {
        gross_real,
        gross: gross_real.floor() as u64,
        functional_expected: gross_real,
    })
}

/// Expected number of working dies. Kept real-valued for energy amortization.
pub fn functional_dies(gross_real: f64, yield_fraction: f64) -> f64 {
    gross_real * yield_fraction
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cmos_wafer_count() {
        let c = gross_dies_per_wafer(300.0, 12.1).unwrap();
        // pi*150^2/12.1 - pi*300/sqrt(24.2), 40-digit reference
        assert!((c.gross_real - 5_650.218_664_836_935).abs() < 1e-9, "{}", c.gross_real);
        assert_eq!(c.gross, 5650);
    }

    #[test]
    fn aqfp_wafer_count() {
        let c = gross_dies_per_wafer(200.0, 350.0).unwrap();
        assert!((c.gross_real - 66.011_581_868_091).abs() < 1e-9, "{}", c.gross_real);
        assert_eq!(c.gross, 66);
    }

    #[test]
    fn oversized_die_is_geometry_error() {
        assert!(matches!(gross_dies_per_wafer(200.0, 40_000.0), Err(Error::Geometry(_))));
    }

    #[test]
    fn bad_inputs_are_domain_errors() {
        assert!(matches!(gross_dies_per_wafer(0.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(gross_dies_per_wafer(300.0, -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn functional_products() {
        assert!((functional_dies(5650.2, 0.976) - 5514.5952).abs() < 1e-9);
        assert!((functional_dies(66.0, 0.852) - 56.232).abs() < 1e-12);
        assert_eq!(functional_dies(123.4, 1.0), 123.4);
        let c = gross_dies_per_wafer(300.0, 12.1).unwrap().at_yield(0.5);
        assert_eq!(c.functional_expected, c.gross_real * 0.5);
    }

    proptest! {
        #[test]
        fn gross_non_increasing_in_area(d in 50.0f64..450.0, s in 1.0f64..2000.0, k in 1.0f64..3.0) {
            if let (Ok(a), Ok(b)) = (gross_dies_per_wafer(d, s), gross_dies_per_wafer(d, s * k)) {
                prop_assert!(b.gross_real <= a.gross_real);
                prop_assert!(b.gross <= a.gross);
            }
        }
    }
}
