//! Solve on an ellipsoid and run the ellipsoid audit.
//!
//! ```text
//! cargo run --example ellipsoid -- 0.75 0.25 1.0 0.03125
//! ```

use translator_lab::geometry::apex_spectrum;
use translator_lab::suite::{audit_ellipsoid, solve_ellipsoid};

fn main() -> translator_lab::Result<()> {
    let args: Vec<f64> = std::env::args()
        .skip(1)
        .map(|a| a.parse().expect("numeric argument"))
        .collect();
    let (a, r, h) = match args.as_slice() {
        [a1, a2, r, h] => (vec![*a1, *a2], *r, *h),
        _ => (vec![0.75, 0.25], 1.0, 1.0 / 32.0),
    };
    let (field, report) = solve_ellipsoid(&a, r, h)?;
    let apex = apex_spectrum(&field)?;
    println!("a = {a:?}, R = {r}, h = {h}: u(0) = {:.6}", report.max_value);
    println!("apex curvatures along the axes: {:?}", apex.axis_curvatures);
    for c in audit_ellipsoid(&field)?.checks {
        println!(
            "  {:<10} {}  value {:+.3e}  tolerance {:.1e}",
            c.id,
            if c.pass { "pass" } else { "FAIL" },
            c.value,
            c.tolerance
        );
    }
    Ok(())
}
