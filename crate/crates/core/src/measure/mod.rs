//! Parameter-plane experiments: grids, renderings of the bifurcation loci,
//! discrete Laplacians of the potentials, and the checks comparing
//! `H^+` and `H^-` at the parameter `t = lambda - 2`.

mod density;
mod equi;
mod render;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::dynamics::{escape_rate, MapParams, Sign, C64};
use crate::error::{invalid, Result};

pub use density::{measure_density, DensityField};
pub use equi::{equidistribution_experiment, EquiReport, ProbeComparison, ProbeDifference, RootCloudSummary};
pub use render::{
    bifurcation_mask, classify_critical_orbit, overlay, render_bifurcation, write_gray_png, AttractingCycle,
    BifurcationRender, RenderMeta, RenderOptions,
};

/// Rectangle of the parameter plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub center: C64,
    pub width: f64,
    pub height: f64,
}

impl Window {
    pub fn new(center: C64, width: f64, height: f64) -> Result<Window> {
        if !(width > 0.0 && height > 0.0 && width.is_finite() && height.is_finite() && center.is_finite()) {
            return Err(invalid(format!("bad window {width} x {height} at {center}")));
        }
        Ok(Window { center, width, height })
    }

    pub fn from_bounds(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Window> {
        if !(re_min < re_max && im_min < im_max) {
            return Err(invalid(format!("empty window {re_min}:{re_max}:{im_min}:{im_max}")));
        }
        Window::new(
            C64::new((re_min + re_max) / 2.0, (im_min + im_max) / 2.0),
            re_max - re_min,
            im_max - im_min,
        )
    }

    /// Square window `|Re t|, |Im t| <= r`.
    pub fn square(r: f64) -> Result<Window> {
        Window::from_bounds(-r, r, -r, r)
    }

    pub fn re_min(&self) -> f64 {
        self.center.re - self.width / 2.0
    }

    pub fn im_max(&self) -> f64 {
        self.center.im + self.height / 2.0
    }

    /// Image of the window under `t -> -t`.
    pub fn negated(&self) -> Window {
        Window { center: -self.center, ..*self }
    }
}

/// Grid size; both sides at least 2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Resolution {
    pub nx: usize,
    pub ny: usize,
}

impl Resolution {
    pub fn new(nx: usize, ny: usize) -> Result<Resolution> {
        if nx < 2 || ny < 2 {
            return Err(invalid(format!("resolution {nx}x{ny} below 2x2")));
        }
        Ok(Resolution { nx, ny })
    }

    pub fn square(n: usize) -> Result<Resolution> {
        Resolution::new(n, n)
    }

    pub fn cells(&self) -> usize {
        self.nx * self.ny
    }
}

/// Real samples on a window, row-major with row 0 at the top edge.
///
/// Samples sit on the closed grid: column `i` has real part
/// `re_min + i * dx` with `dx = width / (nx - 1)`, row `j` has imaginary part
/// `im_max - j * dy`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridField {
    pub window: Window,
    pub resolution: Resolution,
    pub values: Vec<f64>,
    /// Indices of cells whose value is not a trustworthy sample.
    pub flagged: Vec<usize>,
}

impl GridField {
    pub fn new(window: Window, resolution: Resolution, values: Vec<f64>) -> Result<GridField> {
        if values.len() != resolution.cells() {
            return Err(invalid("value count does not match resolution"));
        }
        Ok(GridField { window, resolution, values, flagged: Vec::new() })
    }

    /// Evaluate `f` at every sample point, in parallel over rows.
    pub fn sample<F>(window: Window, resolution: Resolution, f: F) -> GridField
    where
        F: Fn(C64) -> f64 + Sync,
    {
        use rayon::prelude::*;
        let values: Vec<f64> = (0..resolution.ny)
            .into_par_iter()
            .flat_map_iter(|j| {
                let f = &f;
                (0..resolution.nx).map(move |i| f(point(&window, &resolution, i, j)))
            })
            .collect();
        GridField { window, resolution, values, flagged: Vec::new() }
    }

    pub fn dx(&self) -> f64 {
        self.window.width / (self.resolution.nx - 1) as f64
    }

    pub fn dy(&self) -> f64 {
        self.window.height / (self.resolution.ny - 1) as f64
    }

    pub fn point(&self, i: usize, j: usize) -> C64 {
        point(&self.window, &self.resolution, i, j)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.resolution.nx + i]
    }

    /// Cell `(i, j)` of the field reflected through the window centre.
    pub fn reflected(&self) -> GridField {
        let mut values = self.values.clone();
        values.reverse();
        let n = values.len();
        let mut flagged: Vec<usize> = self.flagged.iter().map(|&k| n - 1 - k).collect();
        flagged.sort_unstable();
        GridField { window: self.window.negated(), resolution: self.resolution, values, flagged }
    }

    pub fn max_abs_diff(&self, other: &GridField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

pub(crate) fn point(w: &Window, r: &Resolution, i: usize, j: usize) -> C64 {
    let dx = w.width / (r.nx - 1) as f64;
    let dy = w.height / (r.ny - 1) as f64;
    // offsets from the centre, so a centred grid is exactly symmetric under t -> -t
    let (ci, cj) = ((r.nx - 1) as f64 / 2.0, (r.ny - 1) as f64 / 2.0);
    C64::new(w.center.re + (i as f64 - ci) * dx, w.center.im - (j as f64 - cj) * dy)
}

/// Uniformly weighted points of the parameter plane.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    pub points: Vec<C64>,
}

impl PointCloud {
    pub fn new(points: Vec<C64>) -> Result<PointCloud> {
        if points.is_empty() {
            return Err(invalid("empty point cloud"));
        }
        Ok(PointCloud { points })
    }

    pub fn weight(&self) -> f64 {
        1.0 / self.points.len() as f64
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `(1/|S|) sum log|z - s|`.
    pub fn potential(&self, z: C64) -> f64 {
        self.points.iter().map(|s| (z - s).norm().ln()).sum::<f64>() * self.weight()
    }

    pub fn negated(&self) -> PointCloud {
        PointCloud { points: self.points.iter().map(|z| -z).collect() }
    }

    /// Fraction of the points inside a window.
    pub fn mass_in(&self, w: &Window) -> f64 {
        let inside = self
            .points
            .iter()
            .filter(|z| {
                (z.re - w.center.re).abs() <= w.width / 2.0 && (z.im - w.center.im).abs() <= w.height / 2.0
            })
            .count();
        inside as f64 * self.weight()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "re,im")?;
        for z in &self.points {
            writeln!(w, "{:?},{:?}", z.re, z.im)?;
        }
        Ok(())
    }
}

/// Iterations after which a bounded critical orbit counts as a member.
pub const MANDELBROT_BUDGET: usize = 2000;

/// `G_M(c) = lim 2^{-n} log^+ |p_c^n(c)|` for `p_c(z) = z^2 + c`, with a
/// bound on the error.
///
/// Once `|z_k| >= max(2, sqrt(2|c|))` the remaining corrections
/// `2^{-j-1} log|1 + c / z_j^2|` sum to at most `2^{-k} 2|c| / |z_k|^2`.
/// An orbit that stays in the disk of radius 2 through the budget returns 0;
/// the true value is then below `2^{-budget} log 3`.
pub fn mandelbrot_green_certified(c: C64, tol: f64) -> (f64, f64) {
    let r = 2f64.max((2.0 * c.norm()).sqrt());
    let mut z = c;
    let mut w = 1.0;
    for _ in 0..MANDELBROT_BUDGET {
        let m = z.norm();
        if m > r {
            let tail = w * 2.0 * c.norm() / (m * m);
            if tail <= tol || m > 1e150 {
                return (w * m.ln(), tail);
            }
        }
        z = z * z + c;
        w *= 0.5;
    }
    let m = z.norm();
    if m > r {
        return (w * m.ln(), w * 2.0 * c.norm() / (m * m));
    }
    // never left the disk of radius r, so |c| <= 2 and r = 2
    (0.0, w * 3f64.ln())
}

pub fn mandelbrot_green(c: C64, tol: f64) -> f64 {
    mandelbrot_green_certified(c, tol).0
}

/// `c(lambda) = lambda/2 - lambda^2/4`, the quadratic parameter conjugate to
/// `f_{lambda, lambda-2}`.
pub fn quadratic_parameter(lambda: C64) -> C64 {
    lambda / 2.0 - lambda * lambda / 4.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct H12Report {
    pub lambda: C64,
    pub t: C64,
    pub h_plus: f64,
    pub expected_plus: f64,
    pub deviation_plus: f64,
    pub h_minus: f64,
    pub expected_minus: f64,
    pub deviation_minus: f64,
    pub green_c: f64,
    /// Certified bound on the error of each computed quantity.
    pub tail: f64,
}

/// Compare `H^+(lambda-2)` with `log|lambda|` and `H^-(lambda-2)` with
/// `G_M(c(lambda))/2 + log 2`.
pub fn verify_h12(lambda: C64, tol: f64) -> Result<H12Report> {
    let t = lambda - 2.0;
    let p = MapParams::new(lambda, t)?;
    let hp = escape_rate(&p, Sign::Plus, tol)?;
    let hm = escape_rate(&p, Sign::Minus, tol)?;
    let (g, gt) = mandelbrot_green_certified(quadratic_parameter(lambda), tol);
    let expected_plus = lambda.norm().ln();
    let expected_minus = g / 2.0 + 2f64.ln();
    Ok(H12Report {
        lambda,
        t,
        h_plus: hp.value,
        expected_plus,
        deviation_plus: (hp.value - expected_plus).abs(),
        h_minus: hm.value,
        expected_minus,
        deviation_minus: (hm.value - expected_minus).abs(),
        green_c: g,
        tail: hp.tail_bound.max(hm.tail_bound).max(gt),
    })
}

/// `|c(lambda)(c(lambda)+1)|` at `lambda = 2 e^{i theta}`, computed directly.
pub fn claim2_direct(theta: f64) -> f64 {
    let c = quadratic_parameter(C64::from_polar(2.0, theta));
    (c * (c + 1.0)).norm()
}

/// `sqrt(2 (5 - 5u - 4u^2 + 4u^3))` with `u = cos theta`, the modulus of the
/// second iterate of 0 under `z^2 + c(2 e^{i theta})`.
///
/// Panics if the closed form and [`claim2_direct`] disagree beyond `1e-10`.
pub fn claim2_profile(theta: f64) -> f64 {
    let u = theta.cos();
    let g = 5.0 - 5.0 * u - 4.0 * u * u + 4.0 * u * u * u;
    let closed = (2.0 * g).sqrt();
    let direct = claim2_direct(theta);
    assert!((closed - direct).abs() <= 1e-10, "claim2 profile mismatch at {theta}: {closed} vs {direct}");
    closed
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Claim2Scan {
    pub samples: usize,
    pub minimum: f64,
    /// Centres of the runs of samples within `slack` of the minimum.
    pub argmins: Vec<f64>,
    pub slack: f64,
}

/// Scan the profile on `[pi/3, 5pi/3]` and locate where it comes within
/// `slack` of its minimum.
pub fn claim2_scan(samples: usize, slack: f64) -> Result<Claim2Scan> {
    use std::f64::consts::PI;
    if samples < 2 {
        return Err(invalid("need at least two samples"));
    }
    let (a, b) = (PI / 3.0, 5.0 * PI / 3.0);
    let thetas: Vec<f64> = (0..samples).map(|k| a + (b - a) * k as f64 / (samples - 1) as f64).collect();
    let vals: Vec<f64> = thetas.iter().map(|&th| claim2_profile(th)).collect();
    let minimum = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut argmins = Vec::new();
    let mut run: Vec<f64> = Vec::new();
    for (th, v) in thetas.iter().zip(&vals) {
        if *v <= minimum + slack {
            run.push(*th);
        } else if !run.is_empty() {
            argmins.push(run.iter().sum::<f64>() / run.len() as f64);
            run.clear();
        }
    }
    if !run.is_empty() {
        argmins.push(run.iter().sum::<f64>() / run.len() as f64);
    }
    Ok(Claim2Scan { samples, minimum, argmins, slack })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistinctReport {
    pub lambda: C64,
    pub h_plus: f64,
    pub h_minus: f64,
    /// `H^-(lambda-2) - H^+(lambda-2)`
    pub gap: f64,
    pub tail: f64,
    /// Whether the sign of the gap matches the expected strict inequality
    /// (or equality at `lambda = -2`).
    pub consistent: bool,
}

/// Both potentials at `t = lambda - 2` for `Re lambda <= 1`.
pub fn distinct_measure_report(lambda: C64, tol: f64) -> Result<DistinctReport> {
    if lambda.re > 1.0 || lambda == C64::new(0.0, 0.0) {
        return Err(invalid("needs lambda != 0 with Re lambda <= 1"));
    }
    let p = MapParams::new(lambda, lambda - 2.0)?;
    let hp = escape_rate(&p, Sign::Plus, tol)?;
    let hm = escape_rate(&p, Sign::Minus, tol)?;
    let gap = hm.value - hp.value;
    let tail = hp.tail_bound + hm.tail_bound;
    let equality = (lambda + 2.0).norm() < 1e-12;
    let consistent = if equality { gap.abs() <= tail + 1e-12 } else { gap > tail };
    Ok(DistinctReport { lambda, h_plus: hp.value, h_minus: hm.value, gap, tail, consistent })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn green_examples() {
        assert_eq!(mandelbrot_green(c(-2.0, 0.0), 1e-12), 0.0);
        assert_eq!(mandelbrot_green(c(0.0, 0.0), 1e-12), 0.0);
        assert_eq!(mandelbrot_green(c(-1.0, 0.0), 1e-12), 0.0);
        for x in [0.3, 1.0, 2.5, 40.0] {
            let g = mandelbrot_green(c(x, 0.0), 1e-12);
            assert!(g >= 0.5 * (x * x + x).ln() - 1e-12, "{x}");
            assert!(g > x.ln());
        }
    }

    #[test]
    fn green_large_parameter_is_log() {
        // G_M(c) = log|c| + O(1/|c|)
        let z = c(1e6, 3e6);
        let g = mandelbrot_green(z, 1e-14);
        assert!((g - z.norm().ln()).abs() < 1e-6);
    }

    #[test]
    fn green_tail_brackets_tighter_run() {
        let z = c(0.26, 0.0);
        let (a, ta) = mandelbrot_green_certified(z, 1e-4);
        let (b, _) = mandelbrot_green_certified(z, 1e-14);
        assert!((a - b).abs() <= ta + 1e-14);
    }

    #[test]
    fn h12_examples() {
        for lambda in [c(2.0, 0.0), c(-4.0, 0.0), c(3.0, 0.0), c(0.0, 1.1), c(-2.0, 0.0)] {
            let r = verify_h12(lambda, 1e-12).unwrap();
            assert!(r.deviation_plus < 1e-8, "{lambda}: {r:?}");
            assert!(r.deviation_minus < 1e-6, "{lambda}: {r:?}");
        }
        let r = verify_h12(c(-2.0, 0.0), 1e-12).unwrap();
        assert!((r.h_plus - 2f64.ln()).abs() < 1e-10 && (r.h_minus - 2f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn claim2_examples() {
        assert!((claim2_profile(PI) - 2.0).abs() < 1e-12);
        assert!((claim2_profile(PI / 3.0) - 2.0).abs() < 1e-12);
        assert!((claim2_profile(PI / 2.0) - 10f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn claim2_minima() {
        let s = claim2_scan(200_001, 1e-9).unwrap();
        assert!((s.minimum - 2.0).abs() < 1e-9);
        let expect = [PI / 3.0, PI, 5.0 * PI / 3.0];
        assert_eq!(s.argmins.len(), 3, "{:?}", s.argmins);
        for (a, e) in s.argmins.iter().zip(expect) {
            assert!((a - e).abs() < 1e-4);
        }
    }

    #[test]
    fn distinct_examples() {
        let r = distinct_measure_report(c(-4.0, 0.0), 1e-12).unwrap();
        assert!(r.gap > 0.0 && r.consistent);
        let r = distinct_measure_report(c(-2.0, 0.0), 1e-12).unwrap();
        assert!(r.gap.abs() < 1e-8 && r.consistent);
        let r = distinct_measure_report(c(0.0, 0.5), 1e-12).unwrap();
        assert!(r.gap > 0.0 && r.consistent);
        assert!(distinct_measure_report(c(2.0, 0.0), 1e-12).is_err());
    }

    #[test]
    fn grid_geometry() {
        let w = Window::from_bounds(-1.0, 3.0, -2.0, 2.0).unwrap();
        let r = Resolution::new(5, 3).unwrap();
        let f = GridField::sample(w, r, |z| z.re + 10.0 * z.im);
        assert_eq!(f.point(0, 0), c(-1.0, 2.0));
        assert_eq!(f.point(4, 2), c(3.0, -2.0));
        assert_eq!(f.get(2, 1), 1.0);
        assert!(Window::from_bounds(1.0, 1.0, 0.0, 1.0).is_err());
        assert!(Resolution::new(1, 5).is_err());
    }

    #[test]
    fn cloud_basics() {
        assert!(PointCloud::new(vec![]).is_err());
        let s = PointCloud::new(vec![c(1.0, 0.0), c(-1.0, 0.0)]).unwrap();
        assert!((s.potential(c(0.0, 2.0)) - 5f64.sqrt().ln()).abs() < 1e-15);
        let mut out = Vec::new();
        s.write_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "re,im\n1.0,0.0\n-1.0,0.0\n");
    }
}
