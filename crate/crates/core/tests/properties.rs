//! Property tests over randomly drawn parameters.

use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use proptest::prelude::*;

use translator_lab::cli::export::NodeTable;
use translator_lab::closed_forms::ClosedFormSurface;
use translator_lab::delta_wing::tilt_angle;
use translator_lab::grid::{build_domain, Domain, DomainMask, GridSpec, ScalarField};
use translator_lab::pde::residual;
use translator_lab::simplex_map::SimplexPoint;

fn rectangle(l: f64, b: f64, h: f64) -> Arc<DomainMask> {
    let grid = GridSpec::centered(&[l, b], h).unwrap();
    Arc::new(build_domain(&Domain::rectangle(l, b), &grid).unwrap())
}

/// Pointwise translator operator applied to an exact jet.
fn jet_residual(s: &ClosedFormSurface, x: &[f64]) -> f64 {
    let j = s.eval(x).unwrap();
    let (g, hs) = (j.gradient, j.hessian);
    let q = g[0] * g[0] + g[1] * g[1];
    let lap = hs[0][0] + hs[1][1];
    let dd = g[0] * g[0] * hs[0][0] + 2.0 * g[0] * g[1] * hs[0][1] + g[1] * g[1] * hs[1][1];
    ((1.0 + q) * lap - dd + 1.0 + q) / (1.0 + q)
}

proptest! {
    #[test]
    fn tilt_angle_is_increasing_and_matches_width(b1 in 1.572f64..8.0, db in 1e-3f64..2.0) {
        let (t1, t2) = (tilt_angle(b1).unwrap(), tilt_angle(b1 + db).unwrap());
        prop_assert!(t2 > t1);
        prop_assert!(t1 > 0.0 && t2 < FRAC_PI_2);
        prop_assert!((b1 * t1.cos() - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn normalized_weights_lie_on_the_simplex(w in prop::collection::vec(1e-3f64..10.0, 1..4)) {
        let p = SimplexPoint::normalized(&w).unwrap();
        let s: f64 = p.as_slice().iter().sum();
        prop_assert!((s - 1.0).abs() < 1e-12);
        let total: f64 = w.iter().sum();
        for (a, wi) in p.as_slice().iter().zip(&w) {
            prop_assert!(*a > 0.0);
            prop_assert!((a - wi / total).abs() < 1e-12);
        }
    }

    #[test]
    fn node_csv_round_trips_bitwise(
        rows in prop::collection::vec((prop::collection::vec(-1e3f64..1e3, 2), -1e6f64..1e6), 1..40)
    ) {
        let table = NodeTable { dim: 2, rows };
        let back = NodeTable::parse_csv(&table.to_csv()).unwrap();
        prop_assert_eq!(back.dim, 2);
        prop_assert_eq!(back.rows.len(), table.rows.len());
        for (a, b) in back.rows.iter().zip(&table.rows) {
            prop_assert_eq!(a.1.to_bits(), b.1.to_bits());
            for (p, q) in a.0.iter().zip(&b.0) {
                prop_assert_eq!(p.to_bits(), q.to_bits());
            }
        }
    }

    #[test]
    fn tilted_reapers_solve_the_equation(
        theta in -1.3f64..1.3,
        x in -5.0f64..5.0,
        t in -0.95f64..0.95,
    ) {
        let s = ClosedFormSurface::tilted(theta).unwrap();
        let y = t * s.strip_half_width().unwrap();
        prop_assert!(jet_residual(&s, &[x, y]).abs() < 1e-8);
        prop_assert!((s.eval(&[x, y]).unwrap().gradient[0] - theta.tan()).abs() < 1e-12);
    }

    #[test]
    fn zero_field_residual_is_the_source(
        l in 0.5f64..3.0,
        b in 0.5f64..1.5,
        lambda in 0.0f64..1.0,
    ) {
        let f = ScalarField::zeros(rectangle(l, b, 0.125));
        prop_assert!(residual(&f, lambda).iter().all(|r| (r - lambda).abs() < 1e-15));
    }

    #[test]
    fn vertical_shifts_leave_the_residual_unchanged(c in -10.0f64..10.0, lambda in 0.0f64..1.0) {
        let f = ScalarField::sample(rectangle(1.5, 1.0, 0.125), |x| {
            x[1].cos().ln() + 0.3 * x[0] - 0.1 * x[0] * x[0]
        })
        .unwrap();
        let g = f.shifted(c);
        for (v, w) in f.values().iter().zip(g.values()) {
            prop_assert_eq!(*w, v + c);
        }
        let (r0, r1) = (residual(&f, lambda), residual(&g, lambda));
        for (p, q) in r0.iter().zip(&r1) {
            prop_assert!((p - q).abs() < 1e-9 * (1.0 + c.abs()));
        }
    }
}

#[test]
fn grim_reaper_jet_residual_vanishes_across_the_strip() {
    for i in -95..=95 {
        let y = i as f64 / 100.0 * FRAC_PI_2;
        assert!(jet_residual(&ClosedFormSurface::GrimReaper, &[0.0, y]).abs() < 1e-9);
    }
}
