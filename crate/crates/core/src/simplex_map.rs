//! The coefficient-to-curvature map `F: Δ_n -> Δ_n`.
//!
//! `F(a)` solves the translator on the ellipsoid `Σ a_i x_i^2 < R^2`, with
//! `R` calibrated so that the apex height is `λ`, and returns the principal
//! curvatures at the apex. Zero coefficients are handled by dropping the
//! coordinate: the solution does not depend on it and its curvature is 0.

use serde::Serialize;

use crate::error::{config, Error, Result};
use crate::geometry::{apex_spectrum, ApexSpectrum};
use crate::pde::SolveReport;
use crate::suite::{solve_ellipsoid_with, solve_slab_with, SolveOptions};

/// Default apex height.
pub const DEFAULT_LAMBDA: f64 = 0.5;
/// Relative accuracy of the calibrated apex height.
pub const CALIBRATION_TOL: f64 = 0.005;
const R_MAX_FACTOR: f64 = 64.0;

/// A point of the simplex: nonnegative entries summing to 1.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimplexPoint(Vec<f64>);

impl SimplexPoint {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() || entries.len() > 3 {
            return config(format!(
                "simplex dimension must be 1..=3, got {}",
                entries.len()
            ));
        }
        if entries.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return config(format!(
                "simplex entries must be nonnegative, got {entries:?}"
            ));
        }
        let sum: f64 = entries.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return config(format!("simplex entries must sum to 1, got {sum}"));
        }
        Ok(Self(entries))
    }

    /// Rescales nonnegative weights onto the simplex.
    pub fn normalized(weights: &[f64]) -> Result<Self> {
        let sum: f64 = weights.iter().sum();
        if !(sum > 0.0) {
            return config("weights must have a positive sum");
        }
        let mut v: Vec<f64> = weights.iter().map(|w| w / sum).collect();
        // put the rounding error on the largest entry so the sum is exact
        let imax = (0..v.len()).fold(0, |m, i| if v[i] > v[m] { i } else { m });
        let rest: f64 = v
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != imax)
            .map(|(_, x)| x)
            .sum();
        v[imax] = 1.0 - rest;
        Self::new(v)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    fn support(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|&i| self.0[i] > 0.0).collect()
    }
}

/// Outcome of an `R` calibration.
#[derive(Clone, Debug, Serialize)]
pub struct Calibration {
    pub radius: f64,
    pub apex_height: f64,
    /// Every `(R, u(0))` evaluated, in order.
    pub evaluations: Vec<(f64, f64)>,
    /// Whether the three-point monotonicity test held.
    pub monotone: bool,
    pub fallback_scan: bool,
}

fn apex_height(
    a: &[f64],
    r: f64,
    h: f64,
    opts: &SolveOptions,
) -> Result<(f64, crate::grid::ScalarField, SolveReport)> {
    let (field, report) = solve_ellipsoid_with(a, r, h, opts)?;
    let origin = field.grid().nearest_node(&vec![0.0; a.len()]);
    let u0 = field.node_value(origin).unwrap_or(0.0);
    Ok((u0, field, report))
}

/// Finds `R` with apex height `λ` (within [`CALIBRATION_TOL`]) for the
/// ellipsoid with coefficients `a` (all positive).
pub fn calibrate_r(a: &[f64], lambda: f64, h: f64) -> Result<Calibration> {
    calibrate_r_with(a, lambda, h, &SolveOptions::default())
}

pub fn calibrate_r_with(
    a: &[f64],
    lambda: f64,
    h: f64,
    opts: &SolveOptions,
) -> Result<Calibration> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return config(format!("apex height λ must be positive, got {lambda}"));
    }
    SimplexPoint::new(a.to_vec())?;
    if a.iter().any(|&x| x == 0.0) {
        return config("calibration needs positive coefficients; dimension-reduce first");
    }
    // u(0) = R^2/2 for the Poisson problem Δu = -1 on the ellipsoid
    let r0 = (2.0 * lambda).sqrt();
    let r_max = R_MAX_FACTOR * r0;
    let mut evals: Vec<(f64, f64)> = Vec::new();
    let eval = |r: f64, evals: &mut Vec<(f64, f64)>| -> Result<f64> {
        let (u0, _, _) = apex_height(a, r, h, opts)?;
        evals.push((r, u0));
        Ok(u0 - lambda)
    };
    let done = |g: f64| g.abs() <= CALIBRATION_TOL * lambda;

    // bracket
    let mut r = r0;
    let mut g = eval(r, &mut evals)?;
    if done(g) {
        return Ok(finish(r, lambda + g, evals, true, false));
    }
    let grow = if g < 0.0 { 1.25 } else { 0.8 };
    let (mut lo, mut hi, mut glo, mut ghi);
    loop {
        let next = r * grow;
        if next > r_max || next < r0 / R_MAX_FACTOR {
            return Err(Error::Calibration(format!(
                "no radius in [{:.3e}, {r_max:.3e}] gives apex height {lambda}",
                r0 / R_MAX_FACTOR
            )));
        }
        let gn = eval(next, &mut evals)?;
        if done(gn) {
            return Ok(finish(next, lambda + gn, evals, true, false));
        }
        if grow > 1.0 {
            lo = r;
            glo = g;
            hi = next;
            ghi = gn;
        } else {
            hi = r;
            ghi = g;
            lo = next;
            glo = gn;
        }
        if glo < 0.0 && ghi > 0.0 {
            break;
        }
        r = next;
        g = gn;
    }

    // Illinois false position on [lo, hi]
    let mut side = 0i8;
    for _ in 0..60 {
        let m = (lo * ghi - hi * glo) / (ghi - glo);
        let m = if m > lo && m < hi { m } else { 0.5 * (lo + hi) };
        let gm = eval(m, &mut evals)?;
        if done(gm) {
            let monotone = three_point_monotone(&evals);
            if !monotone {
                return scan(a, lambda, h, opts, evals);
            }
            return Ok(finish(m, lambda + gm, evals, monotone, false));
        }
        if gm < 0.0 {
            lo = m;
            glo = gm;
            if side == -1 {
                ghi *= 0.5;
            }
            side = -1;
        } else {
            hi = m;
            ghi = gm;
            if side == 1 {
                glo *= 0.5;
            }
            side = 1;
        }
    }
    Err(Error::Calibration(format!(
        "false position did not converge in [{lo}, {hi}]"
    )))
}

fn finish(
    r: f64,
    u0: f64,
    evaluations: Vec<(f64, f64)>,
    monotone: bool,
    fallback_scan: bool,
) -> Calibration {
    Calibration {
        radius: r,
        apex_height: u0,
        evaluations,
        monotone,
        fallback_scan,
    }
}

/// `u(0)` strictly increasing across the three evaluations nearest the root.
fn three_point_monotone(evals: &[(f64, f64)]) -> bool {
    let mut pts = evals.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts.dedup_by(|a, b| a.0 == b.0);
    if pts.len() < 3 {
        return true;
    }
    let last = evals.last().unwrap().0;
    let i = pts
        .iter()
        .position(|p| p.0 == last)
        .unwrap()
        .clamp(1, pts.len() - 2);
    pts[i - 1].1 < pts[i].1 && pts[i].1 < pts[i + 1].1
}

/// Fallback when monotonicity fails: uniform scan of the evaluated range,
/// then bisection on the first sign change.
fn scan(
    a: &[f64],
    lambda: f64,
    h: f64,
    opts: &SolveOptions,
    mut evals: Vec<(f64, f64)>,
) -> Result<Calibration> {
    let lo = evals.iter().map(|e| e.0).fold(f64::INFINITY, f64::min);
    let hi = evals.iter().map(|e| e.0).fold(0.0, f64::max);
    let n = 16;
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..=n {
        let r = lo + (hi - lo) * i as f64 / n as f64;
        let (u0, _, _) = apex_height(a, r, h, opts)?;
        evals.push((r, u0));
        if let Some((rp, up)) = prev {
            if (up - lambda) * (u0 - lambda) <= 0.0 {
                let (mut l, mut u) = (rp, r);
                let mut gl = up - lambda;
                for _ in 0..40 {
                    let m = 0.5 * (l + u);
                    let (um, _, _) = apex_height(a, m, h, opts)?;
                    evals.push((m, um));
                    let gm = um - lambda;
                    if gm.abs() <= CALIBRATION_TOL * lambda {
                        return Ok(finish(m, um, evals, false, true));
                    }
                    if gm.signum() == gl.signum() {
                        l = m;
                        gl = gm;
                    } else {
                        u = m;
                    }
                }
            }
        }
        prev = Some((r, u0));
    }
    Err(Error::Calibration(
        "scan found no radius with the requested apex height".into(),
    ))
}

/// One evaluation of the map.
#[derive(Clone, Debug, Serialize)]
pub struct FMapResult {
    pub a: Vec<f64>,
    pub lambda: f64,
    pub radius: f64,
    /// Spectrum of the reduced solve (only the coordinates with `a_i > 0`).
    pub spectrum: Option<ApexSpectrum>,
    /// Apex curvature per coordinate; zero where `a_i = 0`.
    pub k: Vec<f64>,
    pub calibration: Option<Calibration>,
    pub report: Option<SolveReport>,
}

impl FMapResult {
    pub fn k_sum(&self) -> f64 {
        self.k.iter().sum()
    }
}

/// `F(a)` at apex height `λ` on grid spacing `h`.
pub fn f_map(a: &[f64], lambda: f64, h: f64) -> Result<FMapResult> {
    f_map_with(a, lambda, h, &SolveOptions::default())
}

pub fn f_map_with(a: &[f64], lambda: f64, h: f64, opts: &SolveOptions) -> Result<FMapResult> {
    let point = SimplexPoint::new(a.to_vec())?;
    let support = point.support();
    let reduced: Vec<f64> = support.iter().map(|&i| a[i]).collect();
    let reduced = SimplexPoint::normalized(&reduced)?;
    let cal = calibrate_r_with(reduced.as_slice(), lambda, h, opts)?;
    let (_, field, report) = apex_height(reduced.as_slice(), cal.radius, h, opts)?;
    let spectrum = apex_spectrum(&field)?;
    let mut k = vec![0.0; a.len()];
    for (j, &i) in support.iter().enumerate() {
        k[i] = spectrum.axis_curvatures[j];
    }
    Ok(FMapResult {
        a: a.to_vec(),
        lambda,
        radius: cal.radius,
        spectrum: Some(spectrum),
        k,
        calibration: Some(cal),
        report: Some(report),
    })
}

/// Result of inverting the map.
#[derive(Clone, Debug, Serialize)]
pub struct Inversion {
    pub a: Vec<f64>,
    pub achieved: Vec<f64>,
    pub residual: f64,
    /// Map evaluations beyond the symmetric shortcut.
    pub iterations: usize,
    /// `(a, F(a))` pairs evaluated during the search.
    pub history: Vec<(Vec<f64>, Vec<f64>)>,
    /// Whether every evaluation respected the coefficient order.
    pub order_monotone: bool,
}

fn sup_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Finds `a` with `|F(a) - k_target|_∞ <= tol`.
pub fn invert_f(k_target: &[f64], lambda: f64, h: f64, tol: f64) -> Result<Inversion> {
    invert_f_with(k_target, lambda, h, tol, &SolveOptions::default())
}

pub fn invert_f_with(
    k_target: &[f64],
    lambda: f64,
    h: f64,
    tol: f64,
    opts: &SolveOptions,
) -> Result<Inversion> {
    let target = SimplexPoint::new(k_target.to_vec())?;
    if !(tol > 0.0) {
        return config("inversion tolerance must be positive");
    }
    let n = target.dim();
    let support = target.support();
    let k_red: Vec<f64> = support.iter().map(|&i| k_target[i]).collect();
    let embed = |red: &[f64]| -> Vec<f64> {
        let mut full = vec![0.0; n];
        for (j, &i) in support.iter().enumerate() {
            full[i] = red[j];
        }
        full
    };

    let mut history = Vec::new();
    let mut order_monotone = true;
    let mut evaluate =
        |a_red: &[f64], history: &mut Vec<(Vec<f64>, Vec<f64>)>| -> Result<Vec<f64>> {
            let r = f_map_with(a_red, lambda, h, opts)?;
            for i in 0..a_red.len() {
                for j in 0..a_red.len() {
                    if a_red[i] > a_red[j] + 1e-12 && r.k[i] <= r.k[j] {
                        order_monotone = false;
                    }
                }
            }
            history.push((embed(a_red), embed(&r.k)));
            Ok(r.k)
        };

    let m = k_red.len();
    let equal = k_red.iter().all(|&k| (k - k_red[0]).abs() <= 1e-12);
    if m == 1 || equal {
        let a_red = vec![1.0 / m as f64; m];
        let a_red = SimplexPoint::normalized(&a_red)?.as_slice().to_vec();
        let achieved = if m == 1 {
            vec![1.0]
        } else {
            evaluate(&a_red, &mut history)?
        };
        let residual = sup_dist(&achieved, &k_red);
        return Ok(Inversion {
            a: embed(&a_red),
            achieved: embed(&achieved),
            residual,
            iterations: 0,
            history,
            order_monotone,
        });
    }

    let (best_a, best_k) = if m == 2 {
        invert_two(&k_red, tol, &mut |a| evaluate(a, &mut history))?
    } else {
        invert_three(&k_red, tol, &mut |a| evaluate(a, &mut history))?
    };
    let residual = sup_dist(&best_k, &k_red);
    let iterations = history.len();
    if residual > tol {
        return Err(Error::Inversion {
            message: format!("search stagnated after {iterations} evaluations"),
            best: embed(&best_a),
            best_residual: residual,
        });
    }
    Ok(Inversion {
        a: embed(&best_a),
        achieved: embed(&best_k),
        residual,
        iterations,
        history,
        order_monotone,
    })
}

type Eval<'a> = dyn FnMut(&[f64]) -> Result<Vec<f64>> + 'a;

/// Bisection on the larger coefficient, using `F(1/2,1/2) = (1/2,1/2)` and
/// the face value `F(1,0) = (1,0)` as bracket ends.
fn invert_two(k: &[f64], tol: f64, eval: &mut Eval) -> Result<(Vec<f64>, Vec<f64>)> {
    let big = if k[0] >= k[1] { 0 } else { 1 };
    let make = |t: f64| -> Vec<f64> {
        let mut a = vec![0.0; 2];
        a[big] = t;
        a[1 - big] = 1.0 - t;
        a
    };
    let (mut lo, mut hi) = (0.5, 1.0);
    let mut best = (make(0.5), vec![0.5, 0.5]);
    let mut best_res = sup_dist(&best.1, k);
    // first guess: the identity
    let mut t = k[big].clamp(0.5 + 1e-3, 1.0 - 1e-3);
    for _ in 0..40 {
        let a = make(t);
        let f = eval(&a)?;
        let res = sup_dist(&f, k);
        if res < best_res {
            best_res = res;
            best = (a, f.clone());
        }
        if res <= tol {
            break;
        }
        if f[big] < k[big] {
            lo = t;
        } else {
            hi = t;
        }
        t = 0.5 * (lo + hi);
        if hi - lo < 1e-6 {
            break;
        }
    }
    Ok(best)
}

/// Damped multiplicative fixed-point search `a_i <- a_i (k_i / F_i)^ω`,
/// renormalized onto the simplex; coefficients with equal targets stay equal.
fn invert_three(k: &[f64], tol: f64, eval: &mut Eval) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = k.len();
    let tie = |a: &mut Vec<f64>| {
        for i in 0..n {
            for j in i + 1..n {
                if (k[i] - k[j]).abs() <= 1e-12 {
                    let m = 0.5 * (a[i] + a[j]);
                    a[i] = m;
                    a[j] = m;
                }
            }
        }
    };
    let mut a = k.to_vec();
    tie(&mut a);
    let mut f = eval(&a)?;
    let mut res = sup_dist(&f, k);
    let mut omega = 1.0;
    for _ in 0..30 {
        if res <= tol {
            break;
        }
        let mut trial: Vec<f64> = (0..n)
            .map(|i| a[i] * (k[i] / f[i].max(1e-6)).powf(omega))
            .collect();
        tie(&mut trial);
        let trial = SimplexPoint::normalized(&trial)?.as_slice().to_vec();
        let ft = eval(&trial)?;
        let rt = sup_dist(&ft, k);
        if rt < res {
            a = trial;
            f = ft;
            res = rt;
            omega = (omega * 1.5).min(1.5);
        } else {
            omega *= 0.5;
            if omega < 1e-3 {
                break;
            }
        }
    }
    Ok((a, f))
}

/// Result of the slab map.
#[derive(Clone, Debug, Serialize)]
pub struct SlabFMapResult {
    pub a: Vec<f64>,
    pub half_width: f64,
    pub radius: f64,
    /// `(k_1, ..., k_n) / Σ k_i` over the ellipsoid coordinates.
    pub normalized: Vec<f64>,
    /// All `n + 1` axis curvatures, the slab direction last.
    pub full: Vec<f64>,
    pub spectrum: ApexSpectrum,
    pub report: SolveReport,
}

/// Normalized ellipsoid-direction apex curvatures of the `E(a, R) x [-b, b]` solve.
pub fn slab_f_map(a: &[f64], b: f64, r: f64, h: f64) -> Result<SlabFMapResult> {
    slab_f_map_with(a, b, r, h, &SolveOptions::default())
}

pub fn slab_f_map_with(
    a: &[f64],
    b: f64,
    r: f64,
    h: f64,
    opts: &SolveOptions,
) -> Result<SlabFMapResult> {
    if !(b > std::f64::consts::FRAC_PI_2) {
        return config(format!("slab half-width {b} must exceed π/2"));
    }
    if a.len() > 2 {
        return config("slab map supports n <= 2 (total dimension at most 3)");
    }
    let (field, report) = solve_slab_with(a, r, b, h, opts)?;
    let spectrum = apex_spectrum(&field)?;
    let full = spectrum.axis_curvatures.clone();
    let s: f64 = full[..a.len()].iter().sum();
    let normalized = full[..a.len()].iter().map(|k| k / s).collect();
    Ok(SlabFMapResult {
        a: a.to_vec(),
        half_width: b,
        radius: r,
        normalized,
        full,
        spectrum,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplex_validation() {
        assert!(SimplexPoint::new(vec![0.5, 0.5]).is_ok());
        assert!(SimplexPoint::new(vec![0.5, 0.6]).is_err());
        assert!(SimplexPoint::new(vec![-0.1, 1.1]).is_err());
        let p = SimplexPoint::normalized(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(p.as_slice().iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn three_point_test_detects_non_monotone_data() {
        assert!(three_point_monotone(&[(1.0, 0.1), (2.0, 0.3), (1.5, 0.2)]));
        assert!(!three_point_monotone(&[
            (1.0, 0.1),
            (2.0, 0.3),
            (1.5, 0.35)
        ]));
    }

    #[test]
    fn one_dimensional_face() {
        let r = f_map(&[1.0, 0.0], 0.5, 1.0 / 32.0).unwrap();
        assert_eq!(r.k[1], 0.0);
        assert!((r.k[0] - 1.0).abs() < 0.02, "{:?}", r.k);
    }
}
