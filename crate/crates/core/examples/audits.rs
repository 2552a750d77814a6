//! Rectangle audits on both sides of the critical width, plus the ηv
//! maximum principle check.
//!
//! ```text
//! cargo run --example audits
//! ```

use translator_lab::suite::{audit_rectangle, rectangle_eta_audit, solve_rectangle};

fn main() -> translator_lab::Result<()> {
    let h = 1.0 / 32.0;
    for b in [1.0, 2.0] {
        let (field, report) = solve_rectangle(8.0, b, h)?;
        println!("rectangle L = 8, b = {b}: u(0,0) = {:.4}", report.max_value);
        for c in audit_rectangle(&field)?.checks {
            println!(
                "  {:<14} {}  value {:+.3e}  tolerance {:.1e}",
                c.id,
                if c.pass { "pass" } else { "FAIL" },
                c.value,
                c.tolerance
            );
        }
        let eta = rectangle_eta_audit(&field)?;
        println!(
            "  eta-v maximum: pass {}, worst excess {:.2e} (slack {:.2e})",
            eta.pass, eta.worst_excess, eta.slack
        );
    }
    Ok(())
}
