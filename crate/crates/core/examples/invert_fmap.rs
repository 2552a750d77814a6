//! Find ellipsoid coefficients whose apex has prescribed curvatures.
//!
//! ```text
//! cargo run --example invert_fmap -- 0.6 0.4
//! ```

use translator_lab::simplex_map::{invert_f, DEFAULT_LAMBDA};

fn main() -> translator_lab::Result<()> {
    let target: Vec<f64> = std::env::args()
        .skip(1)
        .map(|a| a.parse().expect("numeric argument"))
        .collect();
    let target = if target.is_empty() {
        vec![0.6, 0.4]
    } else {
        target
    };
    let h = if target.len() == 3 { 1.0 / 8.0 } else { 1.0 / 32.0 };
    let tol = if target.len() == 3 { 0.05 } else { 0.02 };
    let inv = invert_f(&target, DEFAULT_LAMBDA, h, tol)?;
    for (a, k) in &inv.history {
        println!("  F({a:.4?}) = {k:.4?}");
    }
    println!(
        "a = {:.4?} reaches {:.4?} (residual {:.2e}) after {} evaluations",
        inv.a, inv.achieved, inv.residual, inv.iterations
    );
    Ok(())
}
