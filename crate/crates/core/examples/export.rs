//! Write a rectangle solve as CSV, OBJ and a JSON report, then read the CSV
//! back and check that re-exporting reproduces it byte for byte.
//!
//! ```text
//! cargo run --example export -- /tmp/rect
//! ```

use std::collections::BTreeMap;
use std::path::PathBuf;

use translator_lab::cli::export::{field_to_obj, ApexRecord, NodeTable, RunReport};
use translator_lab::geometry::apex_spectrum;
use translator_lab::suite::{audit_rectangle, solve_rectangle};

fn main() -> translator_lab::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("translator-lab-export"));
    std::fs::create_dir_all(&dir)?;

    let (field, solve) = solve_rectangle(2.0, 1.0, 1.0 / 16.0)?;
    let table = NodeTable::from_field(&field);
    table.write(&dir.join("field.csv"))?;
    std::fs::write(dir.join("field.obj"), field_to_obj(&field)?)?;

    let mut params = BTreeMap::new();
    params.insert("L".to_string(), 2.0.into());
    params.insert("b".to_string(), 1.0.into());
    let mut report = RunReport::new("solve-rect", params);
    report.residual_max = Some(solve.final_residual);
    report.apex = Some(ApexRecord::from(&apex_spectrum(&field)?));
    report.add_audits(&audit_rectangle(&field)?);
    report.write(&dir.join("report.json"))?;

    let original = std::fs::read_to_string(dir.join("field.csv"))?;
    let again = NodeTable::read(&dir.join("field.csv"))?.to_csv();
    println!("{} rows written to {}", table.rows.len(), dir.display());
    println!("CSV round trip identical: {}", original == again);
    println!("all audits pass: {}", report.all_pass());
    Ok(())
}
