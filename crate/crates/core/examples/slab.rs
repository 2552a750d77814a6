//! Three-dimensional solve on an ellipse times an interval, with the
//! normalized curvatures of the slab map.
//!
//! ```text
//! cargo run --example slab
//! ```

use translator_lab::simplex_map::slab_f_map;

fn main() -> translator_lab::Result<()> {
    let (b, r, h) = (1.8, 1.5, 1.0 / 16.0);
    for a in [[0.5, 0.5], [0.7, 0.3]] {
        let m = slab_f_map(&a, b, r, h)?;
        println!(
            "a = {a:?}: normalized (k1, k2) = ({:.4}, {:.4}), slab curvature {:.4}, {} unknowns",
            m.normalized[0], m.normalized[1], m.full[2], m.report.unknowns
        );
    }
    Ok(())
}
