//! Δ-wings: complete translators over strips wider than π, obtained as the
//! normalized limit of rectangle solves `u_L - u_L(0,0)` as `L` grows.
//!
//! The rectangle solves use the divergence-form discretization. On wide
//! strips the solution drops by roughly `L tan θ` within a sub-grid layer at
//! `|y| = b`; saturating face fluxes keep that layer from polluting the
//! interior, which the nondivergence stencils do not.
//!
//! A finite rectangle only approximates the wing away from its ends and
//! long edges, so the certificate and the audits work on a window
//! `|x| <= L_prev / 2`, `|y| <= b - wall_margin`.

use std::f64::consts::FRAC_PI_2;

use serde::Serialize;

use crate::error::{config, Error, Result};
use crate::geometry::{apex_spectrum, gauss_curvature, ApexSpectrum};
use crate::grid::{gradient, ScalarField};
use crate::pde::{Discretization, SolveReport};
use crate::suite::{solve_rectangle_with, SolveOptions};

/// Half-widths closer than this to π/2 are rejected.
pub const MIN_EXCESS: f64 = 1e-3;

/// `θ` with `b = π / (2 cos θ)`: the tilt of the limiting tilted grim reapers.
pub fn tilt_angle(b: f64) -> Result<f64> {
    if !(b >= FRAC_PI_2) {
        return Err(Error::Domain(format!(
            "half-width {b} is below π/2; no tilt angle"
        )));
    }
    Ok((FRAC_PI_2 / b).min(1.0).acos())
}

/// Axis-aligned window `|x| <= half_length`, `|y| <= half_width`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Window {
    pub half_length: f64,
    pub half_width: f64,
}

impl Window {
    pub fn contains(&self, x: &[f64]) -> bool {
        x[0].abs() <= self.half_length + 1e-12 && x[1].abs() <= self.half_width + 1e-12
    }
}

/// Construction parameters.
#[derive(Clone, Debug, Serialize)]
pub struct WingOptions {
    pub solve: SolveOptions,
    /// Cauchy-in-L certificate tolerance: window max-norm gap divided by the
    /// window max-norm of the finer normalized field.
    pub cauchy_tol: f64,
    /// Distance from the strip edge excluded from the window.
    pub wall_margin: f64,
}

impl Default for WingOptions {
    fn default() -> Self {
        let mut solve = SolveOptions::default();
        solve.settings.discretization = Discretization::Divergence;
        Self {
            solve,
            cauchy_tol: 0.02,
            wall_margin: 0.5,
        }
    }
}

/// Gap between two successive normalized solves.
#[derive(Clone, Debug, Serialize)]
pub struct CauchyRecord {
    pub l_coarse: f64,
    pub l_fine: f64,
    pub window: Window,
    pub gap: f64,
    pub worst_location: Vec<f64>,
    /// Max-norm of the finer normalized field on the window.
    pub scale: f64,
    pub relative_gap: f64,
}

/// A constructed Δ-wing.
#[derive(Clone, Debug, Serialize)]
pub struct DeltaWing {
    pub b: f64,
    pub h: f64,
    pub l_schedule: Vec<f64>,
    /// `u_L - u_L(0,0)` for the largest `L`.
    #[serde(skip)]
    pub field: ScalarField,
    /// Height `u_L(0,0)` removed by the normalization, per schedule entry.
    pub apex_heights: Vec<f64>,
    /// `arccos(π / 2b)`.
    pub theta_expected: f64,
    /// `atan |∂u/∂x|` at the far slope station `x = 3 L_max / 4`.
    pub theta_hat: f64,
    pub apex: ApexSpectrum,
    /// `(k, 1 - k)`: apex curvatures along and across the strip.
    pub curvature_pair: (f64, f64),
    pub cauchy: Vec<CauchyRecord>,
    /// Region where the field is certified to approximate the wing.
    pub window: Window,
    pub reports: Vec<SolveReport>,
}

impl DeltaWing {
    pub fn l_max(&self) -> f64 {
        *self.l_schedule.last().unwrap()
    }

    /// Relative Cauchy gap of the last schedule pair.
    pub fn cauchy_gap(&self) -> f64 {
        self.cauchy.last().map_or(f64::INFINITY, |c| c.relative_gap)
    }
}

/// Normalized rectangle solves along `l_schedule`, certified by the relative
/// gap between the last two on the window of the second-to-last.
pub fn construct(b: f64, h: f64, l_schedule: &[f64]) -> Result<DeltaWing> {
    construct_with(b, h, l_schedule, &WingOptions::default())
}

pub fn construct_with(b: f64, h: f64, l_schedule: &[f64], opts: &WingOptions) -> Result<DeltaWing> {
    if !(b > FRAC_PI_2 + MIN_EXCESS) {
        return config(format!("Δ-wings need b > π/2 + {MIN_EXCESS}, got {b}"));
    }
    if l_schedule.len() < 2
        || l_schedule.windows(2).any(|w| !(w[1] > w[0]))
        || !(l_schedule[0] > 0.0)
    {
        return config(format!(
            "L schedule must be positive, increasing, with at least two entries: {l_schedule:?}"
        ));
    }
    if !(opts.wall_margin >= 0.0 && opts.wall_margin < b) {
        return config("wall margin must lie in [0, b)");
    }
    let mut fields = Vec::with_capacity(l_schedule.len());
    let mut heights = Vec::new();
    let mut reports = Vec::new();
    for &l in l_schedule {
        let (u, report) = solve_rectangle_with(l, b, h, &opts.solve)?;
        let top = origin_value(&u)?;
        heights.push(top);
        fields.push(u.shifted(-top));
        reports.push(report);
    }
    let mut cauchy = Vec::new();
    for (i, pair) in fields.windows(2).enumerate() {
        let window = Window {
            half_length: l_schedule[i] / 2.0,
            half_width: b - opts.wall_margin,
        };
        let (gap, worst_location) = window_gap(&pair[0], &pair[1], &window)?;
        let scale = window_max_abs(&pair[1], &window);
        cauchy.push(CauchyRecord {
            l_coarse: l_schedule[i],
            l_fine: l_schedule[i + 1],
            window,
            gap,
            worst_location,
            scale,
            relative_gap: gap / scale,
        });
    }
    let last = cauchy.last().unwrap();
    if !(last.relative_gap <= opts.cauchy_tol) {
        return Err(Error::ScheduleTooShort {
            gap: last.relative_gap,
            tolerance: opts.cauchy_tol,
        });
    }
    let window = last.window;
    let field = fields.pop().unwrap();
    let apex = apex_spectrum(&field)?;
    let curvature_pair = (apex.axis_curvatures[0], apex.axis_curvatures[1]);
    let l_max = *l_schedule.last().unwrap();
    let theta_hat = centerline_slope(&field, 0.75 * l_max)?.abs().atan();
    Ok(DeltaWing {
        b,
        h,
        l_schedule: l_schedule.to_vec(),
        field,
        apex_heights: heights,
        theta_expected: tilt_angle(b)?,
        theta_hat,
        apex,
        curvature_pair,
        cauchy,
        window,
        reports,
    })
}

fn origin_value(u: &ScalarField) -> Result<f64> {
    let node = u.grid().nearest_node(&[0.0, 0.0]);
    u.node_value(node)
        .filter(|_| u.mask().unknown_of(node).is_some())
        .ok_or_else(|| Error::Usage("origin is not an interior node".into()))
}

/// Max-norm difference of two fields over the window nodes of `coarse`.
/// Both grids must share the node lattice (same spacing, node at 0).
pub fn window_gap(
    coarse: &ScalarField,
    fine: &ScalarField,
    window: &Window,
) -> Result<(f64, Vec<f64>)> {
    let mask = coarse.mask();
    let mut gap: f64 = 0.0;
    let mut worst = vec![0.0; 2];
    for (k, &v) in coarse.values().iter().enumerate() {
        let x = mask.coords_of_unknown(k);
        if !window.contains(&x) {
            continue;
        }
        let node = fine.grid().nearest_node(&x[..2]);
        let y = fine.grid().coords(node);
        if (y[0] - x[0]).abs() + (y[1] - x[1]).abs() > 1e-9 {
            return Err(Error::Usage("fields do not share a node lattice".into()));
        }
        let w = fine.node_value(node).ok_or_else(|| {
            Error::Usage(format!(
                "window point {:?} is outside the finer field",
                &x[..2]
            ))
        })?;
        if (w - v).abs() > gap {
            gap = (w - v).abs();
            worst = x[..2].to_vec();
        }
    }
    Ok((gap, worst))
}

/// Max-norm difference over the window nodes of `base`, reading `other` by
/// bilinear interpolation (grids may differ).
pub fn interpolated_gap(
    base: &ScalarField,
    other: &ScalarField,
    window: &Window,
) -> Result<(f64, Vec<f64>)> {
    let mask = base.mask();
    let mut gap: f64 = 0.0;
    let mut worst = vec![0.0; 2];
    for (k, &v) in base.values().iter().enumerate() {
        let x = mask.coords_of_unknown(k);
        if !window.contains(&x) {
            continue;
        }
        let w = other.interpolate(&x[..2]).ok_or_else(|| {
            Error::Usage(format!("window point {:?} is outside the other field", &x[..2]))
        })?;
        if (w - v).abs() > gap {
            gap = (w - v).abs();
            worst = x[..2].to_vec();
        }
    }
    Ok((gap, worst))
}

fn window_max_abs(f: &ScalarField, window: &Window) -> f64 {
    let mask = f.mask();
    f.values()
        .iter()
        .enumerate()
        .filter(|&(k, _)| window.contains(&mask.coords_of_unknown(k)))
        .fold(0.0, |m, (_, v)| m.max(v.abs()))
}

/// `∂u/∂x` at the centerline node nearest `(x, 0)`.
pub fn centerline_slope(f: &ScalarField, x: f64) -> Result<f64> {
    let node = f.grid().nearest_node(&[x, 0.0]);
    let k = f
        .mask()
        .unknown_of(node)
        .ok_or_else(|| Error::Usage(format!("centerline point x = {x} is not interior")))?;
    let st_grad = gradient(f);
    Ok(st_grad[k][0])
}

/// Result of [`asymptotic_slope_check`].
#[derive(Clone, Debug, Serialize)]
pub struct SlopeCheck {
    pub stations: [f64; 2],
    pub slopes: [f64; 2],
    pub expected: f64,
    pub relative_error: f64,
    pub tolerance: f64,
    /// `|s|` increasing along the centerline on `0 < x <= 3 L_max / 4`.
    pub monotone: bool,
    /// `max |s(x) + s(-x)|` along the centerline.
    pub antisymmetry: f64,
    pub pass: bool,
}

/// Relative slope tolerance: wider near the degenerate end `b ≈ π/2`.
pub fn slope_tolerance(b: f64) -> f64 {
    if b < 1.7 {
        0.10
    } else {
        0.05
    }
}

/// Centerline slope at `L_max / 2` and `3 L_max / 4` against `tan θ`.
pub fn asymptotic_slope_check(wing: &DeltaWing) -> Result<SlopeCheck> {
    let l = wing.l_max();
    if l < 10.0 * wing.b {
        return Err(Error::Usage(format!(
            "slope check needs L_max >= 10 b, got L_max = {l}"
        )));
    }
    let f = &wing.field;
    let mask = f.mask();
    let grad = gradient(f);
    let stations = [0.5 * l, 0.75 * l];
    let slopes = [
        centerline_slope(f, stations[0])?,
        centerline_slope(f, stations[1])?,
    ];
    let expected = wing.theta_expected.tan();
    let relative_error = (slopes[1].abs() - expected).abs() / expected;

    let axis = mask.grid().axis(0);
    let mut line = Vec::new();
    let mut antisymmetry: f64 = 0.0;
    for i in 0..axis.nodes {
        let x = axis.coord(i);
        if x <= 0.0 || x > stations[1] + 1e-9 {
            continue;
        }
        let node = mask.grid().nearest_node(&[x, 0.0]);
        let mirror = mask.grid().nearest_node(&[-x, 0.0]);
        if let (Some(k), Some(m)) = (mask.unknown_of(node), mask.unknown_of(mirror)) {
            line.push(grad[k][0].abs());
            antisymmetry = antisymmetry.max((grad[k][0] + grad[m][0]).abs());
        }
    }
    let monotone = line.windows(2).all(|w| w[1] > w[0]);
    let tolerance = slope_tolerance(wing.b);
    Ok(SlopeCheck {
        stations,
        slopes,
        expected,
        relative_error,
        tolerance,
        monotone,
        antisymmetry,
        pass: relative_error <= tolerance && monotone && antisymmetry <= 1e-8,
    })
}

/// Result of a Gauss-curvature positivity count.
#[derive(Clone, Debug, Serialize)]
pub struct ConvexityCheck {
    pub fraction: f64,
    pub scanned: usize,
    pub pass: bool,
}

/// Required share of nodes with positive Gauss curvature.
pub const CONVEX_FRACTION: f64 = 0.99;

/// Share of INTERIOR nodes (two-cell collar excluded, optionally restricted
/// to a window) where the discrete Gauss curvature is positive.
pub fn positive_curvature_fraction(f: &ScalarField, window: Option<&Window>) -> ConvexityCheck {
    let mask = f.mask();
    let k = gauss_curvature(f);
    let mut scanned = 0;
    let mut positive = 0;
    for (i, &kk) in k.iter().enumerate() {
        if mask.collar_depth(i) <= 2 {
            continue;
        }
        if let Some(w) = window {
            if !w.contains(&mask.coords_of_unknown(i)) {
                continue;
            }
        }
        scanned += 1;
        if kk > 0.0 {
            positive += 1;
        }
    }
    let fraction = if scanned == 0 {
        0.0
    } else {
        positive as f64 / scanned as f64
    };
    ConvexityCheck {
        fraction,
        scanned,
        pass: scanned > 0 && fraction >= CONVEX_FRACTION,
    }
}

/// Gauss-curvature positivity of the wing on its certified window.
pub fn convexity_check(wing: &DeltaWing) -> ConvexityCheck {
    positive_curvature_fraction(&wing.field, Some(&wing.window))
}

/// Result of [`spine_comparison`].
#[derive(Clone, Debug, Serialize)]
pub struct SpineComparison {
    pub b_small: f64,
    pub b_large: f64,
    /// `min (u_small - u_large)(x, 0)` over `h <= |x| <= half_length`.
    pub margin: f64,
    pub worst_x: f64,
    pub half_length: f64,
    pub degenerate: bool,
    pub pass: bool,
}

/// Compares the centerline profiles of two normalized wings.
pub fn compare_spines(small: &DeltaWing, large: &DeltaWing) -> Result<SpineComparison> {
    let half_length = small.window.half_length.min(large.window.half_length);
    let h = small.h;
    let degenerate = small.b == large.b;
    let mut margin = f64::INFINITY;
    let mut worst_x = 0.0;
    let axis = small.field.grid().axis(0);
    for i in 0..axis.nodes {
        let x = axis.coord(i);
        if x.abs() < h - 1e-12 || x.abs() > half_length + 1e-12 {
            continue;
        }
        let us = small.field.value_near(&[x, 0.0]);
        let ul = large.field.value_near(&[x, 0.0]);
        let (Some(us), Some(ul)) = (us, ul) else {
            return Err(Error::Usage(format!("spine point x = {x} missing")));
        };
        if us - ul < margin {
            margin = us - ul;
            worst_x = x;
        }
    }
    Ok(SpineComparison {
        b_small: small.b,
        b_large: large.b,
        margin,
        worst_x,
        half_length,
        degenerate,
        pass: degenerate || margin > 0.0,
    })
}

/// Builds both wings and checks `u^{b_small}(x,0) > u^{b_large}(x,0)`.
pub fn spine_comparison(
    b_small: f64,
    b_large: f64,
    h: f64,
    l_schedule: &[f64],
    opts: &WingOptions,
) -> Result<SpineComparison> {
    if !(b_small <= b_large) {
        return config("spine comparison needs b_small <= b_large");
    }
    let small = construct_with(b_small, h, l_schedule, opts)?;
    if b_small == b_large {
        return compare_spines(&small, &small);
    }
    let large = construct_with(b_large, h, l_schedule, opts)?;
    compare_spines(&small, &large)
}

/// Fixed comparison window for continuity in `b`.
pub const CONTINUITY_WINDOW: Window = Window {
    half_length: 4.0,
    half_width: 1.0,
};

/// Result of [`continuity_in_b`].
#[derive(Clone, Debug, Serialize)]
pub struct ContinuityReport {
    pub b: f64,
    /// `(δ, max-norm gap between the wings at b and b - δ)`, in input order.
    pub gaps: Vec<(f64, f64)>,
    /// Gaps shrink as δ shrinks.
    pub decreasing: bool,
    /// `gap(δ_last) / gap(δ_prev)` when at least two positive δ are given.
    pub last_ratio: Option<f64>,
}

/// Gaps between the wing at `b` and wings at `b - δ` on [`CONTINUITY_WINDOW`].
pub fn continuity_in_b(
    b: f64,
    deltas: &[f64],
    h: f64,
    l_schedule: &[f64],
    opts: &WingOptions,
) -> Result<ContinuityReport> {
    if deltas.iter().any(|&d| !(d >= 0.0) || !(b - d > FRAC_PI_2)) {
        return config(format!(
            "every b - δ must exceed π/2 (b = {b}, δ = {deltas:?})"
        ));
    }
    let base = construct_with(b, h, l_schedule, opts)?;
    let mut gaps = Vec::new();
    for &d in deltas {
        let gap = if d == 0.0 {
            0.0
        } else {
            let other = construct_with(b - d, h, l_schedule, opts)?;
            interpolated_gap(&base.field, &other.field, &CONTINUITY_WINDOW)?.0
        };
        gaps.push((d, gap));
    }
    let mut sorted = gaps.clone();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0));
    let decreasing = sorted
        .windows(2)
        .all(|w| w[1].1 < w[0].1 || (w[1].0 == 0.0 && w[1].1 == 0.0));
    let positive: Vec<_> = sorted.iter().filter(|g| g.0 > 0.0).collect();
    let last_ratio = (positive.len() >= 2).then(|| {
        let n = positive.len();
        positive[n - 1].1 / positive[n - 2].1
    });
    Ok(ContinuityReport {
        b,
        gaps,
        decreasing,
        last_ratio,
    })
}

/// Whether the first slope stays inside the strip bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GaussImageType {
    /// `|∂u/∂x|` bounded by `tan θ`: the image lies between two great semicircles.
    Strip,
    /// The bound fails; the image is not confined to a strip-type region.
    Unbounded,
}

/// Result of [`gauss_image_bounds`].
#[derive(Clone, Debug, Serialize)]
pub struct GaussImageCheck {
    pub max_first_slope: f64,
    pub bound: f64,
    pub kind: GaussImageType,
    pub pass: bool,
}

/// Relative slack on `tan θ` for the first-slope bound.
pub const GAUSS_IMAGE_SLACK: f64 = 0.02;

/// `max |∂u/∂x|` over the interior (optionally windowed) against `tan θ (1 + 2%)`.
pub fn first_slope_bound(
    f: &ScalarField,
    tan_theta: f64,
    window: Option<&Window>,
) -> GaussImageCheck {
    let mask = f.mask();
    let grad = gradient(f);
    let mut max_first_slope: f64 = 0.0;
    for (k, g) in grad.iter().enumerate() {
        if let Some(w) = window {
            if !w.contains(&mask.coords_of_unknown(k)) {
                continue;
            }
        }
        max_first_slope = max_first_slope.max(g[0].abs());
    }
    let bound = tan_theta * (1.0 + GAUSS_IMAGE_SLACK);
    let pass = max_first_slope < bound;
    let kind = if pass {
        GaussImageType::Strip
    } else {
        GaussImageType::Unbounded
    };
    GaussImageCheck {
        max_first_slope,
        bound,
        kind,
        pass,
    }
}

/// First-slope bound of the wing on its certified window.
pub fn gauss_image_bounds(wing: &DeltaWing) -> GaussImageCheck {
    first_slope_bound(&wing.field, wing.theta_expected.tan(), Some(&wing.window))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_4, PI};
    use std::sync::Arc;

    use super::*;
    use crate::closed_forms::ClosedFormSurface;
    use crate::grid::{build_domain, Domain, GridSpec};

    #[test]
    fn tilt_angles() {
        assert_eq!(tilt_angle(FRAC_PI_2).unwrap(), 0.0);
        assert!((tilt_angle(2f64.sqrt() * FRAC_PI_2).unwrap() - FRAC_PI_4).abs() < 1e-15);
        assert!((tilt_angle(PI).unwrap() - PI / 3.0).abs() < 1e-15);
        assert!(matches!(tilt_angle(1.5), Err(Error::Domain(_))));
    }

    #[test]
    fn construct_rejects_bad_inputs() {
        assert!(construct(1.5, 0.1, &[4.0, 8.0]).is_err());
        assert!(construct(FRAC_PI_2 + 5e-4, 0.1, &[4.0, 8.0]).is_err());
        assert!(construct(2.0, 0.1, &[8.0]).is_err());
        assert!(construct(2.0, 0.1, &[8.0, 4.0]).is_err());
    }

    fn strip_mask(l: f64, b: f64, h: f64) -> Arc<crate::grid::DomainMask> {
        let grid = GridSpec::centered(&[l, b], h).unwrap();
        Arc::new(build_domain(&Domain::rectangle(l, b), &grid).unwrap())
    }

    #[test]
    fn tilted_reaper_sits_on_the_bound() {
        let theta = 0.6;
        let s = ClosedFormSurface::tilted(theta).unwrap();
        let b = 0.95 * FRAC_PI_2 / theta.cos();
        let f = s.sample(strip_mask(2.0, b, 1.0 / 16.0)).unwrap();
        let c = first_slope_bound(&f, theta.tan(), None);
        assert!((c.max_first_slope - theta.tan()).abs() < 1e-12);
        assert!(c.pass);
        // flat family: the discrete Gauss curvature straddles zero
        assert!(positive_curvature_fraction(&f, None).fraction < 0.9);
    }

    #[test]
    fn bowl_has_unbounded_first_slope_and_is_convex() {
        let s = ClosedFormSurface::bowl(2, 6.0).unwrap();
        let mask = {
            let grid = GridSpec::centered(&[4.0, 4.0], 1.0 / 8.0).unwrap();
            Arc::new(
                build_domain(&Domain::ellipsoid(&[0.5, 0.5], 4.0 / 2f64.sqrt()), &grid).unwrap(),
            )
        };
        let f = s.sample(mask).unwrap();
        assert!(positive_curvature_fraction(&f, None).pass);
        let c = first_slope_bound(&f, 1.0, None);
        assert_eq!(c.kind, GaussImageType::Unbounded);
    }

    #[test]
    fn window_gap_of_shifted_field() {
        let m = strip_mask(3.0, 1.0, 0.125);
        let f = ScalarField::from_fn(m.clone(), |x| x[0] * x[1]).unwrap();
        let g = f.shifted(0.25);
        let (gap, _) = window_gap(
            &f,
            &g,
            &Window {
                half_length: 1.0,
                half_width: 0.5,
            },
        )
        .unwrap();
        assert!((gap - 0.25).abs() < 1e-15);
    }

    #[test]
    fn interpolated_gap_across_lattices() {
        let bilinear = |x: &[f64]| 0.5 * x[0] - x[1] + 0.25 * x[0] * x[1];
        let a = ScalarField::from_fn(strip_mask(3.0, 1.0, 0.125), bilinear).unwrap();
        let b = ScalarField::from_fn(strip_mask(3.0, 1.1, 0.1), |x| bilinear(x) + 0.5).unwrap();
        let w = Window {
            half_length: 2.0,
            half_width: 0.8,
        };
        let (gap, _) = interpolated_gap(&a, &b, &w).unwrap();
        assert!((gap - 0.5).abs() < 1e-12, "{gap}");
        assert!(window_gap(&a, &b, &w).is_err());
    }
}
