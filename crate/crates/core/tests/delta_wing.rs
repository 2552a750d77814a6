//! Δ-wing construction: certificates, symmetry, comparison of wings.

use translator_lab::delta_wing::{
    asymptotic_slope_check, compare_spines, construct, construct_with, WingOptions,
};
use translator_lab::grid::ScalarField;
use translator_lab::Error;

const H: f64 = 1.0 / 16.0;

fn loose() -> WingOptions {
    WingOptions {
        cauchy_tol: f64::INFINITY,
        ..WingOptions::default()
    }
}

fn gap_to_reaper(f: &ScalarField) -> f64 {
    let mut worst: f64 = 0.0;
    for (k, u) in f.values().iter().enumerate() {
        let x = f.mask().coords_of_unknown(k);
        if x[0].abs() <= 2.0 && x[1].abs() <= 1.5 {
            worst = worst.max((u - x[1].cos().ln()).abs());
        }
    }
    worst
}

#[test]
fn narrow_excess_needs_a_longer_schedule() {
    match construct(1.6, H, &[20.0, 40.0]) {
        Err(Error::ScheduleTooShort { gap, tolerance }) => assert!(gap > tolerance),
        other => panic!("expected ScheduleTooShort, got {other:?}"),
    }
}

#[test]
fn narrow_excess_approaches_the_grim_reaper() {
    let short = construct_with(1.6, H, &[10.0, 20.0], &loose()).unwrap();
    let long = construct_with(1.6, H, &[20.0, 40.0], &loose()).unwrap();
    let (g1, g2) = (gap_to_reaper(&short.field), gap_to_reaper(&long.field));
    assert!(g2 < g1, "gap to log cos y: {g1} at L = 20, {g2} at L = 40");
    assert!(long.curvature_pair.0 < short.curvature_pair.0);
    assert!(long.curvature_pair.0 < 0.05, "{:?}", long.curvature_pair);
}

#[test]
fn wings_are_even_with_a_falling_spine() {
    let w = construct(2.6, H, &[20.0, 40.0]).unwrap();
    let f = &w.field;
    let mut odd: f64 = 0.0;
    for k in 0..f.values().len() {
        let x = f.mask().coords_of_unknown(k);
        for m in [[-x[0], x[1]], [x[0], -x[1]]] {
            odd = odd.max((f.values()[k] - f.value_near(&m).unwrap()).abs());
        }
    }
    assert!(odd <= 1e-8, "{odd}");
    let spine: Vec<f64> = (0..=320)
        .map(|i| f.value_near(&[i as f64 * H, 0.0]).unwrap())
        .collect();
    assert!(spine.windows(2).all(|p| p[1] < p[0]));
    assert_eq!(f.value_near(&[0.0, 0.0]), Some(0.0));
    assert!(asymptotic_slope_check(&w).unwrap().pass);
}

#[test]
fn normalized_field_depends_only_on_the_longest_solve() {
    let h = 1.0 / 8.0;
    let a = construct_with(2.2, h, &[20.0, 40.0], &loose()).unwrap();
    let b = construct_with(2.2, h, &[30.0, 40.0], &loose()).unwrap();
    let gap = a
        .field
        .values()
        .iter()
        .zip(b.field.values())
        .map(|(p, q)| (p - q).abs())
        .fold(0.0, f64::max);
    assert!(gap <= 1e-6, "{gap}");
}

#[test]
fn spines_are_ordered_along_a_chain_of_widths() {
    let schedule = [80.0, 160.0];
    let wings: Vec<_> = [1.7, 1.9, 2.2]
        .iter()
        .map(|&b| construct(b, H, &schedule).unwrap())
        .collect();
    for w in &wings {
        println!("b = {}: relative Cauchy gap {:.4}", w.b, w.cauchy_gap());
    }
    for pair in wings.windows(2) {
        let c = compare_spines(&pair[0], &pair[1]).unwrap();
        assert!(c.pass, "{c:?}");
    }
    let ends = compare_spines(&wings[0], &wings[2]).unwrap();
    assert!(ends.pass && ends.margin > 0.0, "{ends:?}");
}
