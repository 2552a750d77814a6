//! Evaluate the coefficient-to-curvature map on a few points of the simplex.
//!
//! ```text
//! cargo run --example fmap
//! ```

use translator_lab::simplex_map::{f_map, DEFAULT_LAMBDA};

fn main() -> translator_lab::Result<()> {
    let h = 1.0 / 32.0;
    for a in [
        vec![0.5, 0.5],
        vec![0.7, 0.3],
        vec![0.9, 0.1],
        vec![1.0, 0.0],
    ] {
        let r = f_map(&a, DEFAULT_LAMBDA, h)?;
        println!(
            "F({a:?}) = {:.4?}  (R = {:.4}, sum {:.6})",
            r.k,
            r.radius,
            r.k_sum()
        );
    }
    Ok(())
}
