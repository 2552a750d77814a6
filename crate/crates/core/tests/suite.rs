//! Dirichlet suite audits and the simplex maps on small problems.

use std::f64::consts::PI;
use std::sync::Arc;

use translator_lab::geometry::apex_spectrum;
use translator_lab::grid::{build_domain, Domain, GridSpec, ScalarField};
use translator_lab::simplex_map::{calibrate_r, invert_f, slab_f_map};
use translator_lab::suite::{
    audit_ellipsoid, audit_ellipsoid_at, audit_rectangle_with, audit_slab, solve_ellipsoid,
    solve_rectangle, solve_slab,
};

fn center(f: &ScalarField) -> f64 {
    f.value_near(&vec![0.0; f.dim()]).unwrap()
}

#[test]
fn rectangle_height_grows_with_length_below_the_arc() {
    let h = 1.0 / 16.0;
    let (short, _) = solve_rectangle(2.0, 1.0, h).unwrap();
    let (long, _) = solve_rectangle(4.0, 1.0, h).unwrap();
    let arc = -(1f64.cos().ln());
    assert!(center(&short) < center(&long));
    assert!(center(&long) < arc + 1e-3, "{}", center(&long));
}

#[test]
fn wide_rectangle_height_keeps_growing() {
    let h = 1.0 / 32.0;
    let (short, _) = solve_rectangle(4.0, 2.0, h).unwrap();
    let (long, _) = solve_rectangle(8.0, 2.0, h).unwrap();
    assert!(center(&long) > 1.2 * center(&short));
}

#[test]
fn cosine_product_passes_signs_but_not_trace() {
    let field = |l: f64| {
        let grid = GridSpec::centered(&[l, 1.0], 1.0 / 16.0).unwrap();
        let mask = Arc::new(build_domain(&Domain::rectangle(l, 1.0), &grid).unwrap());
        ScalarField::from_fn(mask, |x| (PI * x[0] / (2.0 * l)).cos() * (PI * x[1] / 2.0).cos())
            .unwrap()
    };
    let r = audit_rectangle_with(&field(2.0), &field(4.0)).unwrap();
    assert!(r.get("SIGN_X").unwrap().pass);
    assert!(r.get("SIGN_Y").unwrap().pass);
    assert!(!r.get("TRACE_APEX").unwrap().pass);
}

#[test]
fn round_ellipsoid_has_equal_curvatures() {
    let (f, _) = solve_ellipsoid(&[0.5, 0.5], 1.0, 1.0 / 32.0).unwrap();
    let sp = apex_spectrum(&f).unwrap();
    for k in &sp.axis_curvatures {
        assert!((k - 0.5).abs() <= 0.02, "{:?}", sp.axis_curvatures);
    }
    let r = audit_ellipsoid(&f).unwrap();
    assert!(r.get("ROT_INV").unwrap().pass);
    assert!(r.all_pass(), "{:?}", r.failures());
}

#[test]
fn elongated_ellipsoid_orders_curvatures_and_low_point() {
    let (f, _) = solve_ellipsoid(&[0.75, 0.25], 1.0, 1.0 / 32.0).unwrap();
    let r = audit_ellipsoid_at(&f, 0.8).unwrap();
    assert!(r.get("ORDER").unwrap().pass);
    assert!(r.get("LOW_POINT").unwrap().pass);
    let sp = apex_spectrum(&f).unwrap();
    assert!(sp.axis_curvatures[0] > sp.axis_curvatures[1]);
}

#[test]
fn one_dimensional_slab_is_the_rectangle() {
    let h = 1.0 / 16.0;
    let (slab, _) = solve_slab(&[1.0], 2.0, 1.0, h).unwrap();
    let (rect, _) = solve_rectangle(2.0, 1.0, h).unwrap();
    assert_eq!(slab.grid(), rect.grid());
    let gap = slab
        .values()
        .iter()
        .zip(rect.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(gap < 1e-10, "{gap}");
}

#[test]
fn round_slab_has_no_rotational_derivative() {
    let (f, _) = solve_slab(&[0.5, 0.5], 1.0, 1.0, 1.0 / 16.0).unwrap();
    let r = audit_slab(&f).unwrap();
    let rot = r.get("ROT_SIGN").unwrap();
    assert!(rot.pass && rot.value <= rot.tolerance, "{rot:?}");
}

#[test]
fn calibration_follows_the_poisson_limit() {
    let h = 1.0 / 64.0;
    let radii: Vec<f64> = [0.08, 0.04, 0.02]
        .iter()
        .map(|&lam| calibrate_r(&[0.5, 0.5], lam, h).unwrap().radius)
        .collect();
    assert!(radii.windows(2).all(|w| w[1] < w[0]), "{radii:?}");
    assert!((radii[2] - 0.2).abs() < 0.01, "{radii:?}");
}

#[test]
fn calibration_ignores_coordinate_order() {
    let h = 1.0 / 32.0;
    let a = calibrate_r(&[0.7, 0.3], 0.3, h).unwrap();
    let b = calibrate_r(&[0.3, 0.7], 0.3, h).unwrap();
    // the transposed problems agree to the Newton tolerance, not bitwise
    assert!((a.radius - b.radius).abs() <= 1e-6 * a.radius);
    assert!(a.monotone && !a.fallback_scan);
}

#[test]
fn symmetric_target_needs_no_search() {
    let inv = invert_f(&[0.5, 0.5], 0.5, 1.0 / 16.0, 0.02).unwrap();
    assert_eq!(inv.iterations, 0);
    assert_eq!(inv.a, vec![0.5, 0.5]);
}

#[test]
fn three_coordinate_inversion_at_coarse_spacing() {
    let inv = invert_f(&[0.5, 0.3, 0.2], 0.5, 1.0 / 8.0, 0.05).unwrap();
    assert!(inv.residual <= 0.05, "{inv:?}");
    assert!(inv.a[0] > inv.a[1] && inv.a[1] > inv.a[2], "{:?}", inv.a);
}

#[test]
fn slab_map_examples() {
    let one = slab_f_map(&[1.0], 1.8, 1.5, 1.0 / 16.0).unwrap();
    assert_eq!(one.normalized, vec![1.0]);
    assert_eq!(one.full.len(), 2);
    let round = slab_f_map(&[0.5, 0.5], 1.8, 1.5, 1.0 / 16.0).unwrap();
    for k in &round.normalized {
        assert!((k - 0.5).abs() <= 0.03, "{:?}", round.normalized);
    }
    let skew = slab_f_map(&[0.7, 0.3], 1.8, 1.5, 1.0 / 16.0).unwrap();
    assert!(skew.normalized[0] > skew.normalized[1]);
    assert!(slab_f_map(&[0.5, 0.5], 1.5, 1.5, 1.0 / 16.0).is_err());
}
