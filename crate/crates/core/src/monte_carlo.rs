//! Spatial Monte-Carlo yield estimate.
//!
//! Each trial wafer receives a Poisson-distributed number of point defects
//! scattered uniformly over its disk. Square dies are tiled on a grid anchored
//! at the wafer centre and a die is good when no defect lands inside it. The
//! spatial process is homogeneous Poisson, so the estimate converges to the
//! Poisson model `exp(-AD)`, not to Murphy's mixed model.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloYield {
    pub fraction: f64,
    pub good_dies: u64,
    pub total_dies: u64,
    pub dies_per_wafer: u64,
    pub trials: u64,
}

impl MonteCarloYield {
    /// Binomial standard error of `fraction` when the true per-die yield is `p`.
    pub fn standard_error(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.total_dies as f64).sqrt()
    }
}

struct DieGrid {
    side_cm: f64,
    half_cells: i64,
    /// Row-major `2*half_cells` square; `Some(k)` when the cell is die `k`.
    cells: Vec<Option<u32>>,
    dies: u32,
}

impl DieGrid {
    fn new(die_area_cm2: f64, radius_cm: f64) -> Self {
        let side_cm = die_area_cm2.sqrt();
        let half_cells = (radius_cm / side_cm).ceil() as i64;
        let width = (2 * half_cells) as usize;
        let mut cells = vec![None; width * width];
        let mut dies = 0;
        for iy in 0..width {
            for ix in 0..width {
                let x0 = (ix as i64 - half_cells) as f64 * side_cm;
                let y0 = (iy as i64 - half_cells) as f64 * side_cm;
                let far_x = x0.abs().max((x0 + side_cm).abs());
                let far_y = y0.abs().max((y0 + side_cm).abs());
                if far_x * far_x + far_y * far_y <= radius_cm * radius_cm {
                    cells[iy * width + ix] = Some(dies);
                    dies += 1;
                }
            }
        }
        Self { side_cm, half_cells, cells, dies }
    }

    fn die_at(&self, x: f64, y: f64) -> Option<u32> {
        let width = 2 * self.half_cells;
        let ix = (x / self.side_cm).floor() as i64 + self.half_cells;
        let iy = (y / self.side_cm).floor() as i64 + self.half_cells;
        if (0..width).contains(&ix) && (0..width).contains(&iy) {
            self.cells[(iy * width + ix) as usize]
        } else {
            None
        }
    }
}

/// Empirical die yield over `trials` simulated wafers.
///
/// Trial `t` draws from its own ChaCha stream `(seed, t)`, so results are
/// identical for a fixed seed regardless of how trials are scheduled.
pub fn monte_carlo_yield(
    die_area_cm2: f64,
    defect_density: f64,
    wafer_diameter_mm: f64,
    trials: u64,
    seed: u64,
) -> Result<MonteCarloYield> {
    if trials == 0 {
        return Err(Error::Domain("at least one trial is required".into()));
    }
    if !(die_area_cm2 > 0.0 && die_area_cm2.is_finite()) {
        return Err(Error::Domain(format!("die area must be > 0, got {die_area_cm2}")));
    }
    if !(defect_density >= 0.0 && defect_density.is_finite()) {
        return Err(Error::Domain(format!("defect density must be >= 0, got {defect_density}")));
    }
    if !(wafer_diameter_mm > 0.0 && wafer_diameter_mm.is_finite()) {
        return Err(Error::Domain(format!("wafer diameter must be > 0, got {wafer_diameter_mm}")));
    }
    let radius_cm = wafer_diameter_mm / 20.0;
    let grid = DieGrid::new(die_area_cm2, radius_cm);
    if grid.dies == 0 {
        return Err(Error::Geometry(format!(
            "no {die_area_cm2} cm^2 die fits on a {wafer_diameter_mm} mm wafer"
        )));
    }
    let dies = grid.dies as u64;
    let total_dies = dies * trials;
    let mean_defects = defect_density * PI * radius_cm * radius_cm;
    if mean_defects == 0.0 {
        return Ok(MonteCarloYield {
            fraction: 1.0,
            good_dies: total_dies,
            total_dies,
            dies_per_wafer: dies,
            trials,
        });
    }
    let poisson = Poisson::new(mean_defects)
        .map_err(|e| Error::Domain(format!("defect count distribution: {e}")))?;

    let good_dies: u64 = (0..trials)
        .into_par_iter()
        .map_init(
            || vec![false; grid.dies as usize],
            |killed, trial| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(trial);
                killed.fill(false);
                let defects = poisson.sample(&mut rng) as u64;
                let mut dead = 0u64;
                for _ in 0..defects {
                    let r = radius_cm * rng.random::<f64>().sqrt();
                    let theta = 2.0 * PI * rng.random::<f64>();
                    if let Some(k) = grid.die_at(r * theta.cos(), r * theta.sin()) {
                        let slot = &mut killed[k as usize];
                        if !*slot {
                            *slot = true;
                            dead += 1;
                        }
                    }
                }
                dies - dead
            },
        )
        .sum();

    Ok(MonteCarloYield {
        fraction: good_dies as f64 / total_dies as f64,
        good_dies,
        total_dies,
        dies_per_wafer: dies,
        trials,
    })
}
