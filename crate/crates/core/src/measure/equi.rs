use serde::{Deserialize, Serialize};

use super::PointCloud;
use crate::algebra::{format_complex, Lambda};
use crate::dynamics::{escape_rate, MapParams, Sign, C64};
use crate::error::{invalid, Result};
use crate::pcf::{build_pcf_equation, solve_all_roots};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootCloudSummary {
    pub n: u32,
    pub degree: usize,
    pub roots: usize,
    pub max_residual: f64,
    pub verified: bool,
    /// `u_S` at each probe.
    pub potentials: Vec<f64>,
    pub cloud: PointCloud,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeDifference {
    pub from: u32,
    pub to: u32,
    pub differences: Vec<f64>,
    pub max: f64,
}

/// `u_S - 2H` at the probes, raw and after removing the least-squares constant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeComparison {
    pub n: u32,
    pub offset: f64,
    pub raw_errors: Vec<f64>,
    pub corrected_errors: Vec<f64>,
    pub max_corrected: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquiReport {
    pub lambda: String,
    pub sign: Sign,
    pub probes: Vec<C64>,
    /// `2 H^sign` at the probes.
    pub two_h: Vec<f64>,
    /// Whether every probe lies farther out than every root.
    pub probes_outside: bool,
    pub clouds: Vec<RootCloudSummary>,
    pub differences: Vec<ProbeDifference>,
    pub comparisons: Vec<ProbeComparison>,
}

/// Discrete potentials of the root clouds of `f_t^n(sign 1) = sign 1`
/// compared at probe points with each other and with `2 H^sign`.
pub fn equidistribution_experiment(
    lambda: &Lambda,
    sign: Sign,
    n_list: &[u32],
    probes: &[C64],
    tol: f64,
) -> Result<EquiReport> {
    if n_list.is_empty() || probes.is_empty() {
        return Err(invalid("need at least one n and one probe"));
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("n list must be strictly ascending"));
    }
    let l = lambda.to_c64();
    let two_h = probes
        .iter()
        .map(|&t| escape_rate(&MapParams::new(l, t)?, sign, tol).map(|r| 2.0 * r.value))
        .collect::<Result<Vec<f64>>>()?;
    let mut clouds = Vec::new();
    let mut r_max: f64 = 0.0;
    for &n in n_list {
        let eq = build_pcf_equation(lambda, n, 0, sign)?;
        let roots = solve_all_roots(&eq)?;
        let cloud = PointCloud::new(roots.points())?;
        r_max = cloud.points.iter().map(|z| z.norm()).fold(r_max, f64::max);
        clouds.push(RootCloudSummary {
            n,
            degree: eq.degree(),
            roots: cloud.len(),
            max_residual: roots.max_residual,
            verified: roots.verified,
            potentials: probes.iter().map(|&z| cloud.potential(z)).collect(),
            cloud,
        });
    }
    let differences = clouds
        .windows(2)
        .map(|w| {
            let d: Vec<f64> = w[0].potentials.iter().zip(&w[1].potentials).map(|(a, b)| (a - b).abs()).collect();
            let max = d.iter().cloned().fold(0.0, f64::max);
            ProbeDifference { from: w[0].n, to: w[1].n, differences: d, max }
        })
        .collect();
    let comparisons = clouds
        .iter()
        .map(|c| {
            let raw: Vec<f64> = c.potentials.iter().zip(&two_h).map(|(u, h)| u - h).collect();
            let offset = raw.iter().sum::<f64>() / raw.len() as f64;
            let corrected: Vec<f64> = raw.iter().map(|e| e - offset).collect();
            let max_corrected = corrected.iter().map(|e| e.abs()).fold(0.0, f64::max);
            ProbeComparison { n: c.n, offset, raw_errors: raw, corrected_errors: corrected, max_corrected }
        })
        .collect();
    let probes_outside = probes.iter().all(|z| z.norm() > r_max);
    Ok(EquiReport {
        lambda: format_complex(l),
        sign,
        probes: probes.to_vec(),
        two_h,
        probes_outside,
        clouds,
        differences,
        comparisons,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::GaussRat;

    #[test]
    fn small_clouds_and_sign_symmetry() {
        let lambda = Lambda::Exact(GaussRat::from_i64(-4));
        let probes: Vec<C64> = (0..8).map(|k| C64::from_polar(8.0, k as f64 * 0.785)).collect();
        let plus = equidistribution_experiment(&lambda, Sign::Plus, &[3, 4], &probes, 1e-12).unwrap();
        let minus = equidistribution_experiment(&lambda, Sign::Minus, &[3, 4], &probes, 1e-12).unwrap();
        for (a, b) in plus.clouds.iter().zip(&minus.clouds) {
            assert_eq!(a.roots, a.degree);
            let mut pa: Vec<(i64, i64)> = a.cloud.negated().points.iter().map(|z| ((z.re * 1e6).round() as i64, (z.im * 1e6).round() as i64)).collect();
            let mut pb: Vec<(i64, i64)> = b.cloud.points.iter().map(|z| ((z.re * 1e6).round() as i64, (z.im * 1e6).round() as i64)).collect();
            pa.sort();
            pb.sort();
            assert_eq!(pa, pb);
        }
        assert!(plus.probes_outside);
        assert!(invalid_order().is_err());
    }

    fn invalid_order() -> Result<EquiReport> {
        equidistribution_experiment(&Lambda::Float(C64::new(2.0, 0.0)), Sign::Plus, &[4, 3], &[C64::new(5.0, 0.0)], 1e-10)
    }
}
