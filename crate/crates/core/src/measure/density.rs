use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{GridField, Resolution, Window};
use crate::dynamics::{escape_rate, MapParams, Sign, C64};
use crate::error::{invalid, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityField {
    pub lambda: C64,
    pub sign: Sign,
    /// `H^sign` on the full grid.
    pub potential: GridField,
    /// `(1/2pi) Delta H` on the interior grid (one cell trimmed on each side).
    pub density: GridField,
    /// Interior cells with density below `-tol`.
    pub negative_cells: usize,
    /// Sum of density times cell area over the interior grid.
    pub mass: f64,
    pub tol: f64,
}

/// Discrete bifurcation density `(1/2pi) Delta H^sign` by the 5-point stencil.
///
/// The potential is sampled to `tol * h^2 * pi / 4` so that sampling noise
/// moves each density value by at most `tol`.
pub fn measure_density(
    lambda: C64,
    window: Window,
    resolution: Resolution,
    sign: Sign,
    tol: f64,
) -> Result<DensityField> {
    if !(tol > 0.0) {
        return Err(invalid("tol must be positive"));
    }
    if resolution.nx < 4 || resolution.ny < 4 {
        return Err(invalid("density needs at least 4x4 samples"));
    }
    MapParams::new(lambda, C64::new(0.0, 0.0))?;
    let dx = window.width / (resolution.nx - 1) as f64;
    let dy = window.height / (resolution.ny - 1) as f64;
    let h_tol = (tol * dx.min(dy).powi(2) * PI / 4.0).max(1e-15);
    let mut potential = GridField::sample(window, resolution, |t| {
        escape_rate(&MapParams { lambda, t }, sign, h_tol).map_or(f64::NAN, |r| r.value)
    });
    potential.flagged = potential.values.iter().enumerate().filter(|(_, v)| !v.is_finite()).map(|(k, _)| k).collect();

    let (nx, ny) = (resolution.nx - 2, resolution.ny - 2);
    let mut values = Vec::with_capacity(nx * ny);
    for j in 1..=ny {
        for i in 1..=nx {
            let c = potential.get(i, j);
            let lap = (potential.get(i + 1, j) + potential.get(i - 1, j) - 2.0 * c) / (dx * dx)
                + (potential.get(i, j + 1) + potential.get(i, j - 1) - 2.0 * c) / (dy * dy);
            values.push(lap / (2.0 * PI));
        }
    }
    let inner = Window::new(window.center, window.width - 2.0 * dx, window.height - 2.0 * dy)?;
    let mut density = GridField::new(inner, Resolution::new(nx, ny)?, values)?;
    density.flagged = density.values.iter().enumerate().filter(|(_, v)| !(**v >= -tol)).map(|(k, _)| k).collect();
    let negative_cells = density.flagged.len();
    let mass = density.values.iter().filter(|v| v.is_finite()).sum::<f64>() * dx * dy;
    Ok(DensityField { lambda, sign, potential, density, negative_cells, mass, tol })
}
