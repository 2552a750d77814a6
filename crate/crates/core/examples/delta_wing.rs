//! Construct a Δ-wing and run its audits.
//!
//! ```text
//! cargo run --example delta_wing -- 2.2214414690791831 0.0625 20 40
//! ```

use std::f64::consts::{FRAC_PI_2, SQRT_2};

use translator_lab::delta_wing::{
    asymptotic_slope_check, construct, convexity_check, gauss_image_bounds,
};

fn main() -> translator_lab::Result<()> {
    let args: Vec<f64> = std::env::args()
        .skip(1)
        .map(|a| a.parse().expect("numeric argument"))
        .collect();
    let (b, h, schedule) = if args.len() >= 4 {
        (args[0], args[1], args[2..].to_vec())
    } else {
        (SQRT_2 * FRAC_PI_2, 1.0 / 16.0, vec![20.0, 40.0])
    };
    let wing = construct(b, h, &schedule)?;
    println!("b = {b:.4}, h = {h}, L = {schedule:?}");
    for c in &wing.cauchy {
        println!(
            "  L {} -> {}: gap {:.3e} on |x| <= {}, relative {:.2e}",
            c.l_coarse, c.l_fine, c.gap, c.window.half_length, c.relative_gap
        );
    }
    println!(
        "tilt: measured {:.4}, expected {:.4}",
        wing.theta_hat, wing.theta_expected
    );
    println!(
        "apex curvatures (k, 1 - k) = ({:.4}, {:.4})",
        wing.curvature_pair.0, wing.curvature_pair.1
    );
    if let Ok(s) = asymptotic_slope_check(&wing) {
        println!(
            "slopes {:?} at x = {:?}: relative error {:.3} (tolerance {}), pass {}",
            s.slopes, s.stations, s.relative_error, s.tolerance, s.pass
        );
    }
    let c = convexity_check(&wing);
    println!("positive Gauss curvature on {:.2}% of {} nodes", 100.0 * c.fraction, c.scanned);
    let g = gauss_image_bounds(&wing);
    println!(
        "max |du/dx| = {:.4} against bound {:.4}: {:?}",
        g.max_first_slope, g.bound, g.kind
    );
    Ok(())
}
