use std::f64::consts::TAU;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dd::CDd;
use super::{lambda_dd, relation_residual, relation_terms, OrbitRelation, PcfEquation};
use crate::dynamics::C64;
use crate::error::{invalid, Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootEntry {
    pub re: f64,
    pub im: f64,
    pub multiplicity: usize,
    pub residual: f64,
}

impl RootEntry {
    pub fn z(&self) -> C64 {
        C64::new(self.re, self.im)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootSet {
    pub lambda: String,
    pub relation: OrbitRelation,
    pub degree: usize,
    pub roots: Vec<RootEntry>,
    pub max_residual: f64,
    pub sweeps: usize,
    pub verified: bool,
}

impl RootSet {
    pub fn count_with_multiplicity(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity).sum()
    }

    /// Roots repeated by multiplicity.
    pub fn points(&self) -> Vec<C64> {
        self.roots
            .iter()
            .flat_map(|r| std::iter::repeat(r.z()).take(r.multiplicity))
            .collect()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "re,im,multiplicity,residual")?;
        for r in &self.roots {
            writeln!(w, "{:?},{:?},{},{:e}", r.re, r.im, r.multiplicity, r.residual)?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub max_sweeps: usize,
    pub residual_tol: f64,
    /// Roots closer than `cluster_radius * max(1, |z|)` are merged.
    pub cluster_radius: f64,
    /// Wider radius for groups that pass the multiple-root Newton test.
    pub merge_radius: f64,
    pub polish_steps: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { max_sweeps: 800, residual_tol: 1e-8, cluster_radius: 1e-6, merge_radius: 1e-3, polish_steps: 3 }
    }
}

pub fn solve_all_roots(eq: &PcfEquation) -> Result<RootSet> {
    solve_all_roots_with(eq, &SolveOptions::default())
}

/// Starting points on circles whose radii come from the upper convex hull of
/// `(i, log|a_i|)`.
fn newton_polygon_guesses(log_coeffs: &[f64]) -> Vec<C64> {
    let pts: Vec<(usize, f64)> = log_coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| c.is_finite())
        .map(|(i, c)| (i, *c))
        .collect();
    let mut hull: Vec<(usize, f64)> = Vec::new();
    for p in pts {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (b.0 as f64 - a.0 as f64) * (p.1 - a.1) - (b.1 - a.1) * (p.0 as f64 - a.0 as f64);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let d = log_coeffs.len() - 1;
    let sigma = 0.7;
    let mut out = Vec::with_capacity(d);
    for w in hull.windows(2) {
        let (i, li) = w[0];
        let (j, lj) = w[1];
        let k = j - i;
        let r = ((li - lj) / k as f64).exp();
        for l in 0..k {
            let theta = TAU * l as f64 / k as f64 + TAU * i as f64 / d as f64 + sigma;
            out.push(C64::from_polar(r, theta));
        }
    }
    out
}

/// `q / q'` for `q(t) = p(t) / t^z0`, from `p / p'` along the orbit.
fn newton_ratio(lambda: C64, t: C64, rel: &OrbitRelation, z0: usize) -> C64 {
    let r = relation_terms(lambda, t, rel);
    let (v, dv) = (r.value(), r.derivative());
    if z0 == 0 {
        return v / dv;
    }
    C64::new(1.0, 0.0) / (dv / v - z0 as f64 / t)
}

fn polish(lambda: CDd, t: C64, rel: &OrbitRelation, steps: usize) -> C64 {
    let mut x = CDd::from_c64(t);
    for _ in 0..steps {
        let r = relation_terms(lambda, x, rel);
        let (v, dv) = (r.value(), r.derivative());
        if dv.max_abs_f64() == 0.0 {
            break;
        }
        let step = v.div(dv);
        x = x - step;
        let s = step.to_c64().norm();
        if !s.is_finite() || s <= 1e-30 * x.to_c64().norm().max(1e-300) {
            break;
        }
    }
    let out = x.to_c64();
    if out.is_finite() {
        out
    } else {
        t
    }
}

/// Aberth simultaneous iteration with Newton corrections computed along the
/// critical orbit, then per-root Newton polishing in double-double arithmetic.
pub fn solve_all_roots_with(eq: &PcfEquation, opts: &SolveOptions) -> Result<RootSet> {
    let d = eq.degree();
    if d == 0 {
        return Err(invalid("equation has no roots"));
    }
    let rel = eq.relation;
    let lambda = eq.lambda.to_c64();
    let z0 = eq.zero_root_multiplicity();
    let mut z = newton_polygon_guesses(&eq.log_coeffs[z0..]);
    let free = z.len();
    let mut done = vec![false; free];
    let mut sweeps = 0;
    while sweeps < opts.max_sweeps && done.iter().any(|x| !x) {
        sweeps += 1;
        for k in 0..free {
            if done[k] {
                continue;
            }
            let n = newton_ratio(lambda, z[k], &rel, z0);
            let s: C64 = (0..free).filter(|&j| j != k).map(|j| C64::new(1.0, 0.0) / (z[k] - z[j])).sum();
            let mut w = n / (C64::new(1.0, 0.0) - n * s);
            if !w.is_finite() {
                w = if n.is_finite() { n } else { C64::from_polar(1e-3 * z[k].norm().max(1.0), 1.0 + k as f64) };
            }
            z[k] -= w;
            if w.norm() <= 1e-15 * z[k].norm().max(1e-3) {
                done[k] = true;
            }
        }
    }

    let ldd = lambda_dd(&eq.lambda);
    let polished: Vec<C64> = z.par_iter().map(|&c| polish(ldd, c, &rel, opts.polish_steps)).collect();
    let mut roots: Vec<RootEntry> = Vec::with_capacity(free);
    let entry = |c: C64, multiplicity| RootEntry {
        re: c.re,
        im: c.im,
        multiplicity,
        residual: relation_residual(lambda, c, &rel),
    };
    for wide in cluster(&polished, opts.merge_radius) {
        if wide.len() > 1 {
            let centre = wide.iter().map(|&i| polished[i]).sum::<C64>() / wide.len() as f64;
            if let Some(c) = multiple_root(ldd, centre, &rel, wide.len(), opts.merge_radius) {
                let merged = entry(c, wide.len());
                if merged.residual <= opts.residual_tol {
                    roots.push(merged);
                    continue;
                }
            }
        }
        let members: Vec<C64> = wide.iter().map(|&i| polished[i]).collect();
        for group in cluster(&members, opts.cluster_radius) {
            if group.len() == 1 {
                roots.push(entry(members[group[0]], 1));
                continue;
            }
            // a tight group is one multiple root only if its centre solves the relation;
            // otherwise the members are distinct nearby roots
            let centre = group.iter().map(|&i| members[i]).sum::<C64>() / group.len() as f64;
            let merged = entry(centre, group.len());
            if merged.residual <= opts.residual_tol {
                roots.push(merged);
            } else {
                roots.extend(group.iter().map(|&i| entry(members[i], 1)));
            }
        }
    }
    if z0 > 0 {
        roots.push(RootEntry {
            re: 0.0,
            im: 0.0,
            multiplicity: z0,
            residual: relation_residual(lambda, C64::new(0.0, 0.0), &rel),
        });
    }
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let max_residual = roots.iter().map(|r| r.residual).fold(0.0, f64::max);
    let verified = max_residual <= opts.residual_tol && roots.iter().all(|r| r.z().is_finite());
    let set = RootSet { lambda: eq.lambda.to_string(), relation: rel, degree: d, roots, max_residual, sweeps, verified };
    if !verified {
        return Err(Error::SolverStall { max_residual, iterations: sweeps, best_effort: Box::new(set) });
    }
    Ok(set)
}

/// Newton for a root of multiplicity `k` started at a cluster centroid.
/// Near distinct roots the derivative almost vanishes at the centroid and the
/// first step leaves the cluster, so `None` is returned. Once at the noise
/// floor the steps become erratic and the last good iterate is kept.
fn multiple_root(lambda: CDd, centre: C64, rel: &OrbitRelation, k: usize, radius: f64) -> Option<C64> {
    let scale = centre.norm().max(1.0);
    let mut x = CDd::from_c64(centre);
    // previous iterate and |p| there, once a step has been taken
    let mut prev: Option<(C64, f64)> = None;
    let mut start = f64::INFINITY;
    for _ in 0..8 {
        let r = relation_terms(lambda, x, rel);
        let (v, dv) = (r.value(), r.derivative());
        let size = v.max_abs_f64();
        match prev {
            None => start = size,
            Some((p, s)) if size >= s => return (s < start).then_some(p),
            _ => {}
        }
        if size == 0.0 {
            return Some(x.to_c64());
        }
        let step = if dv.max_abs_f64() == 0.0 { C64::new(f64::INFINITY, 0.0) } else { v.div(dv).to_c64() * k as f64 };
        let next = x - CDd::from_c64(step);
        if !step.is_finite() || (next.to_c64() - centre).norm() > radius * scale {
            return prev.is_some().then(|| x.to_c64());
        }
        prev = Some((x.to_c64(), size));
        x = next;
        if step.norm() <= 1e-12 * scale {
            return Some(x.to_c64());
        }
    }
    prev.map(|_| x.to_c64())
}

/// Single-linkage grouping of indices.
fn cluster(z: &[C64], radius: f64) -> Vec<Vec<usize>> {
    let n = z.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        let mut i = i;
        while p[i] != r {
            let next = p[i];
            p[i] = r;
            i = next;
        }
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if (z[i] - z[j]).norm() <= radius * z[i].norm().max(1.0) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a] = b;
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    groups.into_values().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{GaussRat, Lambda};
    use crate::dynamics::{eval_map, ExtComplex, MapParams, Sign};
    use crate::pcf::build_pcf_equation;

    fn exact(s: &str) -> Lambda {
        Lambda::Exact(s.parse::<GaussRat>().unwrap())
    }

    #[test]
    fn fixed_critical_point_root() {
        for s in ["2", "-4", "1/3", "2-i"] {
            let eq = build_pcf_equation(&exact(s), 1, 0, Sign::Plus).unwrap();
            let roots = solve_all_roots(&eq).unwrap();
            let expect = s.parse::<GaussRat>().unwrap().to_c64() - 2.0;
            assert_eq!(roots.roots.len(), 1);
            assert!((roots.roots[0].z() - expect).norm() < 1e-14);
        }
    }

    #[test]
    fn second_relation_roots_satisfy_orbit() {
        let eq = build_pcf_equation(&exact("2"), 2, 1, Sign::Plus).unwrap();
        let set = solve_all_roots(&eq).unwrap();
        assert_eq!(set.count_with_multiplicity(), eq.degree());
        for r in &set.roots {
            let p = MapParams::new(C64::new(2.0, 0.0), r.z()).unwrap();
            let one = ExtComplex::Finite(C64::new(1.0, 0.0));
            let a = eval_map(&p, one);
            let b = eval_map(&p, a);
            assert!(a.chordal(b) < 1e-10, "{a:?} {b:?}");
        }
    }

    #[test]
    fn counts_and_conjugate_pairs() {
        let eq = build_pcf_equation(&exact("-3/2"), 5, 0, Sign::Plus).unwrap();
        let set = solve_all_roots(&eq).unwrap();
        assert_eq!(set.count_with_multiplicity(), 16);
        for r in &set.roots {
            let partner = set.roots.iter().any(|s| (s.z() - r.z().conj()).norm() < 1e-9);
            assert!(partner);
        }
    }

    #[test]
    fn float_lambda_path() {
        let eq = build_pcf_equation(&Lambda::Float(C64::new(0.0, 1.1)), 4, 0, Sign::Plus).unwrap();
        let set = solve_all_roots(&eq).unwrap();
        assert_eq!(set.count_with_multiplicity(), 8);
        assert!(set.max_residual < 1e-8);
    }

    #[test]
    fn quadruple_root_is_merged() {
        let eq = build_pcf_equation(&exact("-1/2"), 4, 3, Sign::Plus).unwrap();
        let set = solve_all_roots(&eq).unwrap();
        let r = set.roots.iter().find(|r| r.multiplicity == 4).expect("fourfold root");
        assert!((r.z() - C64::new(-2.5, 0.0)).norm() < 1e-9);
        assert_eq!(set.count_with_multiplicity(), eq.degree());
    }

    #[test]
    fn zero_root_is_factored_out() {
        // lambda = 2: t = 0 fixes +1, and it also solves f^3(1) = f(1)
        let eq = build_pcf_equation(&exact("2"), 3, 1, Sign::Plus).unwrap();
        assert!(eq.zero_root_multiplicity() >= 1);
        let set = solve_all_roots(&eq).unwrap();
        assert_eq!(set.count_with_multiplicity(), eq.degree());
    }

    #[test]
    fn csv_has_header_and_rows() {
        let eq = build_pcf_equation(&exact("2"), 3, 0, Sign::Minus).unwrap();
        let set = solve_all_roots(&eq).unwrap();
        let mut buf = Vec::new();
        set.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next(), Some("re,im,multiplicity,residual"));
        assert_eq!(text.lines().count(), set.roots.len() + 1);
        let back: RootSet = serde_json::from_str(&set.to_json().unwrap()).unwrap();
        assert_eq!(back, set);
    }
}
