use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{point, GridField, Resolution, Window};
use crate::dynamics::{MapParams, Sign, C64};
use crate::error::{invalid, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RenderOptions {
    pub max_period: usize,
    /// Iterations of the critical orbit per pixel.
    pub budget: usize,
    pub burn_in: usize,
    /// Chordal closeness for `|f^q(z) - z|`.
    pub epsilon: f64,
    /// Required contraction `|(f^q)'(z)| < 1 - delta`.
    pub delta: f64,
    pub rate_clamp: f64,
    /// Largest accepted `nx * ny`.
    pub max_cells: usize,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            max_period: 12,
            budget: 1500,
            burn_in: 8,
            epsilon: 1e-9,
            delta: 1e-3,
            rate_clamp: 10.0,
            max_cells: 1 << 24,
        }
    }
}

/// An attracting cycle found on the critical orbit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttractingCycle {
    pub period: usize,
    pub multiplier: C64,
    /// Sum of `z / (1 + |z|^2)` over the cycle; a continuous label for the cycle.
    pub signature: C64,
    /// Iterations until detection.
    pub iterations: usize,
    /// Spherical size of `d/dt` of the orbit point at detection.
    pub parameter_derivative: f64,
}

#[inline]
fn step(l: C64, t: C64, z: C64) -> (C64, C64, C64) {
    // (f(z), df/dz, df/dt)
    let den = z * z + t * z + 1.0;
    let fz = l * z / den;
    let d = l * (C64::new(1.0, 0.0) - z * z) / (den * den);
    let dt = -fz * z / den;
    (fz, d, dt)
}

#[inline]
fn chordal_sq(a: C64, b: C64) -> f64 {
    (a - b).norm_sqr() / ((1.0 + a.norm_sqr()) * (1.0 + b.norm_sqr()))
}

/// Follow the critical point `sign 1` of `f_{lambda,t}` and look for an
/// attracting cycle of period at most `max_period`.
pub fn classify_critical_orbit(p: &MapParams, sign: Sign, opts: &RenderOptions) -> Option<AttractingCycle> {
    let (l, t) = (p.lambda, p.t);
    let q_max = opts.max_period.max(1);
    let eps2 = opts.epsilon * opts.epsilon;
    let mut ring = vec![C64::new(f64::NAN, 0.0); q_max + 1];
    let mut z = C64::new(sign.value(), 0.0);
    let mut dz = C64::new(0.0, 0.0);
    for k in 1..=opts.budget {
        if z.is_finite() {
            let (fz, d, dt) = step(l, t, z);
            dz = d * dz + dt;
            z = fz;
        } else {
            // the pole maps to 0 for every t
            z = C64::new(0.0, 0.0);
            dz = C64::new(0.0, 0.0);
        }
        ring[k % (q_max + 1)] = z;
        if k <= opts.burn_in || !z.is_finite() {
            continue;
        }
        for q in 1..=q_max.min(k) {
            let prev = ring[(k - q) % (q_max + 1)];
            if !(chordal_sq(z, prev) < eps2) {
                continue;
            }
            let mut mult = C64::new(1.0, 0.0);
            let mut sig = C64::new(0.0, 0.0);
            let mut w = z;
            for _ in 0..q {
                let (fw, d, _) = step(l, t, w);
                mult *= d;
                sig += w / (1.0 + w.norm_sqr());
                w = fw;
            }
            if mult.norm() < 1.0 - opts.delta {
                let pd = dz.norm() / (1.0 + z.norm_sqr());
                return Some(AttractingCycle {
                    period: q,
                    multiplier: mult,
                    signature: sig,
                    iterations: k,
                    parameter_derivative: if pd.is_finite() { pd } else { f64::INFINITY },
                });
            }
            // multiples of q have multiplier mult^m and fail as well
            break;
        }
    }
    None
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RenderMeta {
    pub lambda: C64,
    pub window: Window,
    pub resolution: Resolution,
    pub sign: Sign,
    pub options: RenderOptions,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BifurcationRender {
    pub meta: RenderMeta,
    /// `-log |multiplier|` of the detected cycle, clamped; 0 where nothing
    /// was detected (those cells are flagged).
    pub rate: GridField,
    /// Detected period, 0 for none.
    pub period: Vec<u16>,
    /// Cells judged to meet the bifurcation locus.
    pub mask: Vec<bool>,
    /// 8-bit grayscale, row-major.
    pub image: Vec<u8>,
}

/// Render the bifurcation locus of the critical point `sign 1`.
///
/// A cell is in the mask when no attracting cycle was detected, when the
/// critical orbit moves by more than a unit of spherical distance per pixel
/// of parameter, or when a 4-neighbour settles on a different cycle.
pub fn render_bifurcation(
    lambda: C64,
    window: Window,
    resolution: Resolution,
    sign: Sign,
    opts: &RenderOptions,
) -> Result<BifurcationRender> {
    if resolution.cells() > opts.max_cells {
        return Err(Error::BudgetExceeded(format!(
            "{} cells exceeds the limit of {}",
            resolution.cells(),
            opts.max_cells
        )));
    }
    MapParams::new(lambda, C64::new(0.0, 0.0))?;
    let cells: Vec<Option<AttractingCycle>> = (0..resolution.ny)
        .into_par_iter()
        .flat_map_iter(|j| {
            (0..resolution.nx).map(move |i| {
                let p = MapParams { lambda, t: point(&window, &resolution, i, j) };
                classify_critical_orbit(&p, sign, opts)
            })
        })
        .collect();
    let h = (window.width / (resolution.nx - 1) as f64).max(window.height / (resolution.ny - 1) as f64);
    let (nx, ny) = (resolution.nx, resolution.ny);
    let same = |a: &AttractingCycle, b: &AttractingCycle| {
        a.period == b.period && (a.signature - b.signature).norm() < 0.05 * a.period as f64
    };
    let mut mask = vec![false; cells.len()];
    for j in 0..ny {
        for i in 0..nx {
            let k = j * nx + i;
            mask[k] = match &cells[k] {
                None => true,
                Some(c) => {
                    c.parameter_derivative * h > 1.0
                        || [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)].iter().any(|&(di, dj)| {
                            let (ii, jj) = (i as i64 + di, j as i64 + dj);
                            if ii < 0 || jj < 0 || ii >= nx as i64 || jj >= ny as i64 {
                                return false;
                            }
                            match &cells[jj as usize * nx + ii as usize] {
                                Some(o) => !same(c, o),
                                None => false,
                            }
                        })
                }
            };
        }
    }
    let mut rate = vec![0.0; cells.len()];
    let mut flagged = Vec::new();
    let mut period = vec![0u16; cells.len()];
    for (k, c) in cells.iter().enumerate() {
        match c {
            Some(c) => {
                rate[k] = (-c.multiplier.norm().ln()).clamp(0.0, opts.rate_clamp);
                period[k] = c.period as u16;
            }
            None => flagged.push(k),
        }
    }
    let image = rate
        .iter()
        .zip(&mask)
        .map(|(&r, &m)| if m { 0 } else { 55 + (200.0 * (1.0 - (-r).exp())).round() as u8 })
        .collect();
    let mut field = GridField::new(window, resolution, rate)?;
    field.flagged = flagged;
    Ok(BifurcationRender {
        meta: RenderMeta { lambda, window, resolution, sign, options: *opts },
        rate: field,
        period,
        mask,
        image,
    })
}

/// Superimpose two renders of the same grid: 0 where both masks are set,
/// 96 for the first only, 160 for the second only, 255 elsewhere.
pub fn overlay(a: &BifurcationRender, b: &BifurcationRender) -> Result<Vec<u8>> {
    if a.meta.resolution != b.meta.resolution || a.meta.window != b.meta.window {
        return Err(invalid("overlay needs renders of the same grid"));
    }
    Ok(a.mask
        .iter()
        .zip(&b.mask)
        .map(|(&x, &y)| match (x, y) {
            (true, true) => 0,
            (true, false) => 96,
            (false, true) => 160,
            (false, false) => 255,
        })
        .collect())
}

/// Indices where both masks are set.
pub fn bifurcation_mask(a: &BifurcationRender, b: &BifurcationRender) -> Vec<usize> {
    a.mask.iter().zip(&b.mask).enumerate().filter(|(_, (x, y))| **x && **y).map(|(k, _)| k).collect()
}

pub fn write_gray_png(path: &Path, resolution: Resolution, pixels: &[u8]) -> Result<()> {
    let file = BufWriter::new(File::create(path)?);
    let mut enc = png::Encoder::new(file, resolution.nx as u32, resolution.ny as u32);
    enc.set_color(png::ColorType::Grayscale);
    enc.set_depth(png::BitDepth::Eight);
    let mut w = enc.write_header().map_err(|e| Error::Io(std::io::Error::other(e)))?;
    w.write_image_data(pixels).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    Ok(())
}

/// `stem.ext` without touching dots already in the stem.
pub(crate) fn with_suffix(stem: &Path, ext: &str) -> std::path::PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    s.into()
}

impl BifurcationRender {
    /// Write `<stem>.png` and the sidecar `<stem>.json`.
    pub fn write(&self, stem: &Path) -> Result<()> {
        write_gray_png(&with_suffix(stem, "png"), self.meta.resolution, &self.image)?;
        std::fs::write(with_suffix(stem, "json"), serde_json::to_string_pretty(&self.meta)?)?;
        Ok(())
    }

    pub fn mask_at(&self, i: usize, j: usize) -> bool {
        self.mask[j * self.meta.resolution.nx + i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn superattracting_fixed_critical_point() {
        // t = lambda - 2 fixes +1 with multiplier 0
        let p = MapParams::new(c(2.0, 0.0), c(0.0, 0.0)).unwrap();
        let a = classify_critical_orbit(&p, Sign::Plus, &RenderOptions::default()).unwrap();
        assert_eq!(a.period, 1);
        assert!(a.multiplier.norm() < 1e-6);
    }

    #[test]
    fn unbounded_component_shares_one_fixed_point() {
        let opts = RenderOptions::default();
        for t in [c(10.0, 0.0), c(-3.0, 9.0), c(0.0, -12.0)] {
            let p = MapParams::new(c(2.0, 0.0), t).unwrap();
            let a = classify_critical_orbit(&p, Sign::Plus, &opts).unwrap();
            let b = classify_critical_orbit(&p, Sign::Minus, &opts).unwrap();
            assert_eq!((a.period, b.period), (1, 1));
            assert!((a.signature - b.signature).norm() < 1e-6, "{t}");
        }
    }

    #[test]
    fn contracting_origin_for_small_lambda() {
        let p = MapParams::new(c(0.5, 0.0), c(20.0, 0.0)).unwrap();
        let a = classify_critical_orbit(&p, Sign::Plus, &RenderOptions::default()).unwrap();
        assert_eq!(a.period, 1);
        assert!((a.multiplier - 0.5).norm() < 1e-6);
    }

    #[test]
    fn render_is_deterministic_and_reflects() {
        let w = Window::square(3.0).unwrap();
        let r = Resolution::square(41).unwrap();
        let opts = RenderOptions::default();
        let a = render_bifurcation(c(2.0, 0.0), w, r, Sign::Plus, &opts).unwrap();
        let b = render_bifurcation(c(2.0, 0.0), w, r, Sign::Plus, &opts).unwrap();
        assert_eq!(a.image, b.image);
        let m = render_bifurcation(c(2.0, 0.0), w, r, Sign::Minus, &opts).unwrap();
        let mut flipped = a.mask.clone();
        flipped.reverse();
        assert_eq!(flipped, m.mask);
        assert!(a.mask.iter().any(|&x| x) && a.mask.iter().any(|&x| !x));
    }

    #[test]
    fn cell_budget_is_enforced() {
        let opts = RenderOptions { max_cells: 100, ..Default::default() };
        let r = render_bifurcation(c(2.0, 0.0), Window::square(1.0).unwrap(), Resolution::square(11).unwrap(), Sign::Plus, &opts);
        assert!(matches!(r, Err(Error::BudgetExceeded(_))));
    }
}
