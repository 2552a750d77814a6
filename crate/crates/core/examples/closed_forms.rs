//! Evaluate the closed-form translators and check that their discrete
//! residual falls at second order.
//!
//! ```text
//! cargo run --example closed_forms
//! ```

use std::f64::consts::FRAC_PI_6;
use std::sync::Arc;

use translator_lab::closed_forms::{residual_of_closed_form, ClosedFormSurface};
use translator_lab::grid::{build_domain, Domain, GridSpec};

fn main() -> translator_lab::Result<()> {
    let surfaces = [
        ClosedFormSurface::GrimReaper,
        ClosedFormSurface::tilted(FRAC_PI_6)?,
        ClosedFormSurface::arc(1.0)?,
    ];
    for s in &surfaces {
        let jet = s.eval(&[0.5, 0.25])?;
        println!(
            "{:<12} u(0.5, 0.25) = {:+.6}  Du = ({:+.4}, {:+.4})",
            s.name(),
            jet.value,
            jet.gradient[0],
            jet.gradient[1]
        );
    }

    println!("\nmax residual on [-1,1]^2:");
    for s in &surfaces[..2] {
        let mut prev: Option<f64> = None;
        for h in [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0] {
            let grid = GridSpec::centered(&[1.0, 1.0], h)?;
            let mask = Arc::new(build_domain(&Domain::rectangle(1.0, 1.0), &grid)?);
            let r = residual_of_closed_form(s, mask)?
                .iter()
                .fold(0.0f64, |m, x| m.max(x.abs()));
            match prev {
                Some(p) => println!("  {:<12} h = 1/{:<3} {r:.3e}  ratio {:.2}", s.name(), 1.0 / h, p / r),
                None => println!("  {:<12} h = 1/{:<3} {r:.3e}", s.name(), 1.0 / h),
            }
            prev = Some(r);
        }
    }
    Ok(())
}
