//! Solve the zero-boundary translator on a rectangle and audit the result.
//!
//! ```text
//! cargo run --example solve_rectangle -- 8 1 0.015625
//! ```

use translator_lab::geometry::apex_spectrum;
use translator_lab::suite::solve_rectangle;

fn main() -> translator_lab::Result<()> {
    let args: Vec<f64> = std::env::args()
        .skip(1)
        .map(|a| a.parse().expect("numeric argument"))
        .collect();
    let (l, b, h) = match args.as_slice() {
        [l, b, h] => (*l, *b, *h),
        _ => (8.0, 1.0, 1.0 / 64.0),
    };
    let (field, report) = solve_rectangle(l, b, h)?;
    println!("L = {l}, b = {b}, h = {h}: {} unknowns", report.unknowns);
    println!("u(0,0) = {:.6}", report.max_value);
    println!(
        "{} Newton iterations over {} λ steps ({} bisections), residual {:.2e}, {:.2} s",
        report.total_iterations(),
        report.steps.len(),
        report.bisections,
        report.final_residual,
        report.wall_time_s
    );
    let apex = apex_spectrum(&field)?;
    println!(
        "apex trace {:.4}, curvatures {:?}",
        apex.trace, apex.curvatures
    );
    Ok(())
}
