//! Dirichlet solves on rectangles, ellipsoids and ellipsoid × slab domains,
//! and audits of the qualitative properties their solutions must have.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{config, Error, Result};
use crate::geometry::{apex_spectrum, eta_weighted_max_audit, slope_v};
use crate::grid::{
    build_domain, gradient, Domain, DomainMask, GridSpec, ScalarField, SymmetryFlags, MAX_DIM,
};
use crate::pde::{solve_dirichlet, ContinuationSchedule, NewtonSettings, SolveReport};

/// Sign checks treat products smaller than this as zero.
pub const SIGN_FLOOR: f64 = 1e-10;

/// Solver configuration shared by the high-level solves.
#[derive(Clone, Debug, Default, Serialize)]
pub struct SolveOptions {
    pub schedule: ContinuationSchedule,
    pub settings: NewtonSettings,
}

/// One named property check.
#[derive(Clone, Debug, Serialize)]
pub struct AuditCheck {
    pub id: String,
    pub pass: bool,
    pub value: f64,
    pub tolerance: f64,
    pub worst_location: Option<Vec<f64>>,
    pub detail: Option<String>,
}

/// Results of all checks of one audit run.
#[derive(Clone, Debug, Default, Serialize)]
pub struct AuditReport {
    pub domain: String,
    pub checks: Vec<AuditCheck>,
}

impl AuditReport {
    fn new(domain: &str) -> Self {
        Self {
            domain: domain.into(),
            checks: Vec::new(),
        }
    }

    fn push(&mut self, id: &str, pass: bool, value: f64, tolerance: f64) -> &mut AuditCheck {
        self.checks.push(AuditCheck {
            id: id.into(),
            pass,
            value,
            tolerance,
            worst_location: None,
            detail: None,
        });
        self.checks.last_mut().unwrap()
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn get(&self, id: &str) -> Option<&AuditCheck> {
        self.checks.iter().find(|c| c.id == id)
    }

    pub fn failures(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.id.as_str())
            .collect()
    }
}

impl AuditCheck {
    fn at(&mut self, x: Option<Vec<f64>>) -> &mut Self {
        self.worst_location = x;
        self
    }

    fn note(&mut self, s: impl Into<String>) -> &mut Self {
        self.detail = Some(s.into());
        self
    }
}

fn mask_for(domain: &Domain, h: f64) -> Result<Arc<DomainMask>> {
    if !(h > 0.0 && h.is_finite()) {
        return config(format!("grid spacing must be positive, got {h}"));
    }
    domain.validate()?;
    let grid = GridSpec::centered(&domain.half_extents(), h)?;
    Ok(Arc::new(build_domain(domain, &grid)?))
}

fn solve_even(domain: Domain, h: f64, opts: &SolveOptions) -> Result<(ScalarField, SolveReport)> {
    let mask = mask_for(&domain, h)?;
    let flags = SymmetryFlags::all(mask.dim());
    solve_dirichlet(&mask, &opts.schedule, &opts.settings, &flags)
}

/// Zero-boundary translator on `[-L, L] x [-b, b]`.
pub fn solve_rectangle(l: f64, b: f64, h: f64) -> Result<(ScalarField, SolveReport)> {
    solve_rectangle_with(l, b, h, &SolveOptions::default())
}

pub fn solve_rectangle_with(
    l: f64,
    b: f64,
    h: f64,
    opts: &SolveOptions,
) -> Result<(ScalarField, SolveReport)> {
    solve_even(Domain::rectangle(l, b), h, opts)
}

/// Zero-boundary translator on `{ Σ a_i x_i^2 < R^2 }`; `a` must lie on the
/// open simplex.
pub fn solve_ellipsoid(a: &[f64], r: f64, h: f64) -> Result<(ScalarField, SolveReport)> {
    solve_ellipsoid_with(a, r, h, &SolveOptions::default())
}

pub fn solve_ellipsoid_with(
    a: &[f64],
    r: f64,
    h: f64,
    opts: &SolveOptions,
) -> Result<(ScalarField, SolveReport)> {
    check_simplex(a)?;
    solve_even(Domain::ellipsoid(a, r), h, opts)
}

/// Zero-boundary translator on `E(a, R) x [-b, b]`.
pub fn solve_slab(a: &[f64], r: f64, b: f64, h: f64) -> Result<(ScalarField, SolveReport)> {
    solve_slab_with(a, r, b, h, &SolveOptions::default())
}

pub fn solve_slab_with(
    a: &[f64],
    r: f64,
    b: f64,
    h: f64,
    opts: &SolveOptions,
) -> Result<(ScalarField, SolveReport)> {
    check_simplex(a)?;
    solve_even(Domain::ellipsoid_slab(a, r, b), h, opts)
}

pub(crate) fn check_simplex(a: &[f64]) -> Result<()> {
    let sum: f64 = a.iter().sum();
    if a.is_empty() || (sum - 1.0).abs() > 1e-12 || a.iter().any(|&x| x < 0.0) {
        return config(format!("coefficients {a:?} are not a point of the simplex"));
    }
    if a.iter().any(|&x| x == 0.0) {
        return config(format!(
            "coefficients {a:?} have zero entries; dimension-reduce before solving"
        ));
    }
    Ok(())
}

struct Sampled {
    dim: usize,
    coords: Vec<[f64; MAX_DIM]>,
    grad: Vec<[f64; MAX_DIM]>,
    collar: Vec<u8>,
    h: f64,
}

fn sampled(f: &ScalarField) -> Sampled {
    let mask = f.mask();
    let n = mask.num_unknowns();
    Sampled {
        dim: mask.dim(),
        coords: (0..n).map(|k| mask.coords_of_unknown(k)).collect(),
        grad: gradient(f),
        collar: (0..n).map(|k| mask.collar_depth(k)).collect(),
        h: mask.grid().max_spacing(),
    }
}

/// Largest `D_d u * x_d` over non-collar nodes with `|x_d| > h` (negative
/// when every such node has the expected sign).
fn sign_check(s: &Sampled, d: usize) -> (f64, Option<Vec<f64>>) {
    let mut worst = f64::NEG_INFINITY;
    let mut at = None;
    for k in 0..s.coords.len() {
        let x = s.coords[k][d];
        if s.collar[k] <= 1 || x.abs() <= s.h * (1.0 + 1e-9) {
            continue;
        }
        let v = s.grad[k][d] * x;
        if v > worst {
            worst = v;
            at = Some(s.coords[k][..s.dim].to_vec());
        }
    }
    (worst, at)
}

fn trace_check(report: &mut AuditReport, f: &ScalarField) {
    match apex_spectrum(f) {
        Ok(sp) => {
            let err = (sp.trace + 1.0).abs();
            report
                .push("TRACE_APEX", err <= 0.05, sp.trace, 0.05)
                .at(Some(sp.node_location));
        }
        Err(e) => {
            report
                .push("TRACE_APEX", false, f64::NAN, 0.05)
                .note(e.to_string());
        }
    }
}

/// `w = (b - |x_last|) v` at every interior node.
fn w_field(f: &ScalarField, b: f64) -> Vec<f64> {
    let mask = f.mask();
    let last = mask.dim() - 1;
    slope_v(f)
        .iter()
        .enumerate()
        .map(|(k, v)| (b - mask.coords_of_unknown(k)[last].abs()) * v)
        .collect()
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (k, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = k;
        }
    }
    best
}

/// Groups interior nodes into lines along axis `along`, keyed by the
/// other coordinates.
fn lines_along(f: &ScalarField, along: usize) -> Vec<Vec<usize>> {
    let mask = f.mask();
    let grid = mask.grid();
    let stride = grid.stride(along);
    let n_along = grid.axis(along).nodes;
    let mut lines = Vec::new();
    for node in 0..grid.len() {
        if grid.multi_index(node)[along] != 0 {
            continue;
        }
        let line: Vec<usize> = (0..n_along)
            .filter_map(|i| mask.unknown_of(node + i * stride))
            .collect();
        if !line.is_empty() {
            lines.push(line);
        }
    }
    lines
}

/// Largest increase of `|Du|` with `|x_along|` along the line of unknowns,
/// restricted to `|x_along| <= limit`.
fn max_increase_in_abs(s: &Sampled, line: &[usize], along: usize, limit: f64) -> (f64, usize) {
    let norm = |k: usize| s.grad[k][..s.dim].iter().map(|c| c * c).sum::<f64>().sqrt();
    let mut worst = f64::NEG_INFINITY;
    let mut at = line[0];
    for pair in line.windows(2) {
        let (k0, k1) = (pair[0], pair[1]);
        let (x0, x1) = (s.coords[k0][along], s.coords[k1][along]);
        if x0.abs().max(x1.abs()) > limit {
            continue;
        }
        // oriented so that `inner` is closer to the middle
        let (inner, outer) = if x0.abs() < x1.abs() {
            (k0, k1)
        } else {
            (k1, k0)
        };
        let inc = norm(outer) - norm(inner);
        if inc > worst {
            worst = inc;
            at = outer;
        }
    }
    (worst, at)
}

fn rectangle_params(f: &ScalarField) -> Result<(f64, f64)> {
    match f.mask().domain() {
        Domain::Rectangle {
            half_length,
            half_width,
        } => Ok((*half_length, *half_width)),
        other => Err(Error::Usage(format!(
            "audit_rectangle needs a rectangle field, got {other:?}"
        ))),
    }
}

/// Audits a rectangle solve; solves the same problem at doubled length for
/// the `W_STABLE` comparison.
pub fn audit_rectangle(f: &ScalarField) -> Result<AuditReport> {
    let (l, b) = rectangle_params(f)?;
    let h = f.grid().spacing(1).max(f.grid().spacing(0));
    let (doubled, _) = solve_rectangle(2.0 * l, b, h)?;
    audit_rectangle_with(f, &doubled)
}

/// Audits a rectangle solve against a given solve at doubled length.
pub fn audit_rectangle_with(f: &ScalarField, doubled: &ScalarField) -> Result<AuditReport> {
    let (l, b) = rectangle_params(f)?;
    let (l2, b2) = rectangle_params(doubled)?;
    if (l2 - 2.0 * l).abs() > 1e-12 * l || b2 != b {
        return Err(Error::Usage(
            "doubled field must be the same rectangle at twice the length".into(),
        ));
    }
    let s = sampled(f);
    let h = s.h;
    let mut report = AuditReport::new("rectangle");

    for (id, d) in [("SIGN_X", 0), ("SIGN_Y", 1)] {
        let (worst, at) = sign_check(&s, d);
        report
            .push(id, worst < SIGN_FLOOR, worst, SIGN_FLOOR)
            .at(at);
    }

    // the column of nodes next to the edge x = L
    let edge_tol = h * h;
    let x_edge = f.grid().axis(0).coord(f.grid().axis(0).nodes - 2);
    let edge_line: Vec<usize> = (0..s.coords.len())
        .filter(|&k| (s.coords[k][0] - x_edge).abs() < 1e-9 * l)
        .collect();
    let (inc, at) = max_increase_in_abs(&s, &edge_line, 1, b - 2.0 * h - 1e-12);
    report
        .push("EDGE_MONOTONE", inc <= edge_tol, inc, edge_tol)
        .at(Some(s.coords[at][..2].to_vec()))
        .note(format!("|Du| along x = {x_edge}, corner cells excluded"));

    let w = w_field(f, b);
    let k = argmax(&w);
    let y_at = s.coords[k][1].abs();
    report
        .push("W_ARGMAX", y_at <= h * (1.0 + 1e-9), y_at, h)
        .at(Some(s.coords[k][..2].to_vec()))
        .note(format!("max w = {:.6}", w[k]));

    let w2 = w_field(doubled, b);
    let (m1, m2) = (w[k], w2[argmax(&w2)]);
    let change = (m2 - m1).abs() / m1;
    report
        .push("W_STABLE", change <= 0.10, change, 0.10)
        .note(format!(
            "max w: {m1:.6} at L = {l}, {m2:.6} at L = {}",
            2.0 * l
        ));

    trace_check(&mut report, f);
    Ok(report)
}

fn ellipsoid_params(f: &ScalarField) -> Result<(Vec<f64>, f64)> {
    match f.mask().domain() {
        Domain::Ellipsoid { coeffs, radius } => Ok((coeffs.clone(), *radius)),
        other => Err(Error::Usage(format!(
            "audit_ellipsoid needs an ellipsoid field, got {other:?}"
        ))),
    }
}

/// Tolerance used when two coefficients are equal and the rotational
/// derivative should vanish.
fn rot_zero_tol(h: f64) -> f64 {
    4.0 * h * h
}

/// ROT_SIGN over the coordinate pairs of the first `n` axes.
fn rot_sign(report: &mut AuditReport, s: &Sampled, a: &[f64]) {
    let n = a.len();
    let mut worst_signed = f64::NEG_INFINITY;
    let mut worst_zero: f64 = 0.0;
    let mut at = None;
    let mut any_pairs = false;
    let mut any_equal = false;
    for i in 0..n {
        for j in 0..n {
            if i == j || a[i] < a[j] {
                continue;
            }
            let equal = (a[i] - a[j]).abs() <= 1e-12;
            if equal && j < i {
                continue;
            }
            any_pairs |= !equal;
            any_equal |= equal;
            for k in 0..s.coords.len() {
                let x = &s.coords[k];
                if s.collar[k] <= 1 || (x[i] * x[j]).abs() <= s.h * s.h {
                    continue;
                }
                let rot = x[i] * s.grad[k][j] - x[j] * s.grad[k][i];
                if equal {
                    if rot.abs() > worst_zero {
                        worst_zero = rot.abs();
                    }
                } else {
                    let v = -rot * (x[i] * x[j]).signum();
                    if v > worst_signed {
                        worst_signed = v;
                        at = Some(x[..s.dim].to_vec());
                    }
                }
            }
        }
    }
    let tol0 = rot_zero_tol(s.h);
    if !any_pairs && !any_equal {
        report
            .push("ROT_SIGN", true, 0.0, 0.0)
            .note("single coordinate: not applicable");
        return;
    }
    let mut pass = true;
    let mut detail = Vec::new();
    if any_pairs {
        pass &= worst_signed < SIGN_FLOOR;
        detail.push(format!(
            "max of -rot*sign(x_i x_j) over unequal pairs = {worst_signed:.3e}"
        ));
    }
    if any_equal {
        pass &= worst_zero <= tol0;
        detail.push(format!(
            "max |rot| over equal pairs = {worst_zero:.3e} (tolerance {tol0:.3e})"
        ));
    }
    let value = if any_pairs { worst_signed } else { worst_zero };
    let tol = if any_pairs { SIGN_FLOOR } else { tol0 };
    report
        .push("ROT_SIGN", pass, value, tol)
        .at(at)
        .note(detail.join("; "));
}

/// Audits an ellipsoid solve.
pub fn audit_ellipsoid(f: &ScalarField) -> Result<AuditReport> {
    let (a, r) = ellipsoid_params(f)?;
    let rho = 0.7
        * a.iter()
            .map(|ai| r / ai.sqrt())
            .fold(f64::INFINITY, f64::min);
    audit_ellipsoid_at(f, rho)
}

/// Audits an ellipsoid solve with the LOW_POINT sphere radius `rho`.
pub fn audit_ellipsoid_at(f: &ScalarField, rho: f64) -> Result<AuditReport> {
    let (a, _) = ellipsoid_params(f)?;
    let s = sampled(f);
    let h = s.h;
    let n = a.len();
    let mut report = AuditReport::new("ellipsoid");

    rot_sign(&mut report, &s, &a);

    let spectrum = apex_spectrum(f);
    match &spectrum {
        Ok(sp) => {
            let k = &sp.axis_curvatures;
            let mut margin = f64::INFINITY;
            let mut equal_gap: f64 = 0.0;
            for i in 0..n {
                for j in 0..n {
                    if (a[i] - a[j]).abs() <= 1e-12 {
                        equal_gap = equal_gap.max((k[i] - k[j]).abs());
                    } else if a[i] > a[j] {
                        margin = margin.min(k[i] - k[j]);
                    }
                }
            }
            let pass = margin > 0.0 && equal_gap <= 0.02;
            let value = if margin.is_finite() {
                margin
            } else {
                -equal_gap
            };
            report.push("ORDER", pass, value, 0.0).note(format!(
                "axis curvatures {k:?}; equal-pair gap {equal_gap:.3e}"
            ));
        }
        Err(e) => {
            report
                .push("ORDER", false, f64::NAN, 0.0)
                .note(e.to_string());
        }
    }

    // LOW_POINT: minimum of u (extended by 0) on the sphere |x| = rho,
    // sampled at arc steps of h/4 with multilinear interpolation. The node
    // annulus rho ± h/2 is kept as a diagnostic only: its minimum sits on
    // the outer rim of whichever node column crosses the axis, up to
    // sqrt(2 rho h) off axis regardless of u.
    let domain = f.mask().domain();
    let value_at = |x: &[f64]| {
        if !domain.contains(x) {
            return 0.0;
        }
        f.interpolate(x)
            .or_else(|| f.value_near(x))
            .unwrap_or(0.0)
    };
    let mut best = f64::INFINITY;
    let mut best_x = [0.0; MAX_DIM];
    for x in sphere_points(n, rho, 0.25 * h) {
        let v = value_at(&x[..n]);
        if v < best {
            best = v;
            best_x = x;
        }
    }
    let grid = f.grid();
    let mut node_best = f64::INFINITY;
    let mut node_x = [0.0; MAX_DIM];
    for node in 0..grid.len() {
        let x = grid.coords(node);
        let r = x[..n].iter().map(|c| c * c).sum::<f64>().sqrt();
        if (r - rho).abs() > 0.5 * h {
            continue;
        }
        let v = f.node_value(node).unwrap_or(0.0);
        if v < node_best {
            node_best = v;
            node_x = x;
        }
    }
    let top_axis = match &spectrum {
        Ok(sp) => (0..n).fold(0, |m, i| {
            if sp.axis_curvatures[i] > sp.axis_curvatures[m] {
                i
            } else {
                m
            }
        }),
        Err(_) => 0,
    };
    let degenerate = a.iter().all(|&ai| (ai - a[0]).abs() <= 1e-12);
    let off_axis = (0..n)
        .filter(|&i| i != top_axis)
        .map(|i| best_x[i] * best_x[i])
        .sum::<f64>()
        .sqrt();
    if degenerate {
        report
            .push("LOW_POINT", true, off_axis, 2.0 * h)
            .at(Some(best_x[..n].to_vec()))
            .note("equal coefficients: every axis carries the largest curvature");
    } else {
        report
            .push("LOW_POINT", off_axis <= 2.0 * h, off_axis, 2.0 * h)
            .at(Some(best_x[..n].to_vec()))
            .note(format!(
                "rho = {rho:.4}, min u = {best:.6}, axis {top_axis}; node annulus min {node_best:.6} at {:?}",
                &node_x[..n]
            ));
    }

    rot_inv(&mut report, f, &a, &s);
    Ok(report)
}

/// Points of the sphere `|x| = rho` in `n <= 3` dimensions, at most `step`
/// apart along each angle.
fn sphere_points(n: usize, rho: f64, step: f64) -> Vec<[f64; MAX_DIM]> {
    use std::f64::consts::{PI, TAU};
    let count = |arc: f64| ((arc / step).ceil() as usize).max(4);
    match n {
        1 => vec![[rho, 0.0, 0.0], [-rho, 0.0, 0.0]],
        2 => {
            let m = count(TAU * rho);
            (0..m)
                .map(|i| {
                    let t = TAU * i as f64 / m as f64;
                    [rho * t.cos(), rho * t.sin(), 0.0]
                })
                .collect()
        }
        _ => {
            let mp = count(PI * rho);
            let mut pts = Vec::new();
            for i in 0..=mp {
                let polar = PI * i as f64 / mp as f64;
                let ring = rho * polar.sin();
                let m = if ring > 0.0 { count(TAU * ring) } else { 1 };
                for j in 0..m {
                    let t = TAU * j as f64 / m as f64;
                    pts.push([ring * t.cos(), ring * t.sin(), rho * polar.cos()]);
                }
            }
            pts
        }
    }
}

/// Tolerance for the 45° rotation comparison (bilinear interpolation error).
fn rot_inv_tol(h: f64) -> f64 {
    h * h
}

fn rot_inv(report: &mut AuditReport, f: &ScalarField, a: &[f64], s: &Sampled) {
    let n = a.len();
    let pair = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .find(|&(i, j)| (a[i] - a[j]).abs() <= 1e-12);
    let Some((i, j)) = pair else {
        report
            .push("ROT_INV", true, 0.0, 0.0)
            .note("no equal coefficients: not applicable");
        return;
    };
    let c = std::f64::consts::FRAC_1_SQRT_2;
    let mut worst: f64 = 0.0;
    let mut at = None;
    for k in 0..s.coords.len() {
        if s.collar[k] <= 1 {
            continue;
        }
        let x = s.coords[k];
        let mut y = x;
        y[i] = c * (x[i] - x[j]);
        y[j] = c * (x[i] + x[j]);
        let Some(v) = f.interpolate(&y[..s.dim]) else {
            continue;
        };
        let d = (v - f.values()[k]).abs();
        if d > worst {
            worst = d;
            at = Some(x[..s.dim].to_vec());
        }
    }
    let tol = rot_inv_tol(s.h);
    report
        .push("ROT_INV", worst <= tol, worst, tol)
        .at(at)
        .note(format!("axes ({i}, {j})"));
}

fn slab_params(f: &ScalarField) -> Result<(Vec<f64>, f64, f64)> {
    match f.mask().domain() {
        Domain::EllipsoidSlab {
            coeffs,
            radius,
            half_width,
        } => Ok((coeffs.clone(), *radius, *half_width)),
        other => Err(Error::Usage(format!(
            "audit_slab needs an ellipsoid x slab field, got {other:?}"
        ))),
    }
}

/// Audits an ellipsoid × slab solve; solves the problem again at `2R` for
/// the `W_SLAB` comparison.
pub fn audit_slab(f: &ScalarField) -> Result<AuditReport> {
    let (a, r, b) = slab_params(f)?;
    let h = f.grid().max_spacing();
    let (doubled, _) = solve_slab(&a, 2.0 * r, b, h)?;
    audit_slab_with(f, &doubled)
}

/// Audits an ellipsoid × slab solve against a given solve at radius `2R`.
pub fn audit_slab_with(f: &ScalarField, doubled: &ScalarField) -> Result<AuditReport> {
    let (a, r, b) = slab_params(f)?;
    let (a2, r2, b2) = slab_params(doubled)?;
    if a2 != a || b2 != b || (r2 - 2.0 * r).abs() > 1e-12 * r {
        return Err(Error::Usage(
            "doubled field must be the same slab at twice the radius".into(),
        ));
    }
    let s = sampled(f);
    let h = s.h;
    let n = a.len();
    let dim = n + 1;
    let mut report = AuditReport::new("ellipsoid_slab");

    let mut worst = f64::NEG_INFINITY;
    let mut at = None;
    for d in 0..dim {
        let (w, x) = sign_check(&s, d);
        if w > worst {
            worst = w;
            at = x;
        }
    }
    report
        .push("SIGN_ALL", worst < SIGN_FLOOR, worst, SIGN_FLOOR)
        .at(at);

    // lines along the slab axis whose nodes touch the lateral boundary
    let mask = f.mask();
    let lateral = |k: usize| {
        mask.links(k)[..2 * n]
            .iter()
            .any(|l| matches!(l, crate::grid::Link::Boundary { .. }))
    };
    let mut inc = f64::NEG_INFINITY;
    let mut inc_at = None;
    for line in lines_along(f, n) {
        let edge: Vec<usize> = line.into_iter().filter(|&k| lateral(k)).collect();
        if edge.len() < 2 {
            continue;
        }
        let (v, k) = max_increase_in_abs(&s, &edge, n, b - 2.0 * h - 1e-12);
        if v > inc {
            inc = v;
            inc_at = Some(s.coords[k][..dim].to_vec());
        }
    }
    let edge_tol = h * h;
    report
        .push("EDGE_S_MONOTONE", inc <= edge_tol, inc, edge_tol)
        .at(inc_at)
        .note("|Du| along the slab direction at nodes touching the lateral boundary");

    let w = w_field(f, b);
    let w2 = w_field(doubled, b);
    let (m1, m2) = (w[argmax(&w)], w2[argmax(&w2)]);
    let change = (m2 - m1).abs() / m1;
    report
        .push("W_SLAB", m1.is_finite() && change <= 0.15, change, 0.15)
        .note(format!(
            "max w: {m1:.6} at R = {r}, {m2:.6} at R = {}",
            2.0 * r
        ));

    rot_sign(&mut report, &s, &a);
    Ok(report)
}

/// `ηv` audit with `η = b - |y|` on a rectangle field.
pub fn rectangle_eta_audit(f: &ScalarField) -> Result<crate::geometry::EtaAudit> {
    let (_, b) = rectangle_params(f)?;
    Ok(eta_weighted_max_audit(f, move |x| b - x[1]))
}
