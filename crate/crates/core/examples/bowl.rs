//! Integrate the bowl soliton profile in dimensions 1 to 3.
//!
//! ```text
//! cargo run --example bowl
//! ```

use translator_lab::closed_forms::BowlProfile;

fn main() -> translator_lab::Result<()> {
    for n in 1..=3 {
        let r_max = if n == 1 { 1.45 } else { 4.0 };
        let p = BowlProfile::integrate(n, r_max, 1e-3)?;
        println!(
            "n = {n}: u''(0) = {:.9} (expected {:.9}), u({r_max}) = {:.6}, u'({r_max}) = {:.4}",
            p.fitted_apex_curvature(),
            -1.0 / n as f64,
            p.value(r_max)?,
            p.slope(r_max)?
        );
    }
    // in one dimension the profile is the grim reaper log cos r
    let p = BowlProfile::integrate(1, 1.45, 1e-3)?;
    let err = p
        .radii()
        .zip(p.sampled_values())
        .filter(|(r, _)| *r <= 1.4)
        .map(|(r, u)| (u - r.cos().ln()).abs())
        .fold(0.0, f64::max);
    println!("n = 1 against log cos r on r <= 1.4: {err:.2e}");
    Ok(())
}
