//! File formats: node CSV, OBJ height-field meshes and the JSON run report.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::ApexSpectrum;
use crate::grid::{NodeClass, ScalarField};
use crate::suite::AuditReport;

/// Rows of a node CSV: coordinates and value per non-EXTERIOR node.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeTable {
    pub dim: usize,
    pub rows: Vec<(Vec<f64>, f64)>,
}

impl NodeTable {
    /// Non-EXTERIOR nodes of `f` in node (lexicographic) order.
    pub fn from_field(f: &ScalarField) -> Self {
        let grid = f.grid();
        let dim = grid.dim();
        let rows = (0..grid.len())
            .filter_map(|node| {
                let u = f.node_value(node)?;
                Some((grid.coords(node)[..dim].to_vec(), u))
            })
            .collect();
        Self { dim, rows }
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for d in 1..=self.dim {
            let _ = write!(s, "x{d},");
        }
        s.push_str("u\n");
        for (x, u) in &self.rows {
            for c in x {
                let _ = write!(s, "{},", fmt_f64(*c));
            }
            let _ = writeln!(s, "{}", fmt_f64(*u));
        }
        s
    }

    pub fn parse_csv(text: &str) -> Result<Self> {
        let bad = |line: usize, msg: &str| Error::Config(format!("CSV line {line}: {msg}"));
        let mut lines = text.lines();
        let header: Vec<&str> = lines
            .next()
            .ok_or_else(|| bad(1, "missing header"))?
            .split(',')
            .collect();
        let dim = header.len().saturating_sub(1);
        let expected: Vec<String> = (1..=dim)
            .map(|d| format!("x{d}"))
            .chain(["u".to_string()])
            .collect();
        if dim == 0 || header != expected {
            return Err(bad(1, "header must read x1,...,xn,u"));
        }
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            let fields: Vec<f64> = line
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| bad(i + 2, &e.to_string()))?;
            if fields.len() != dim + 1 {
                return Err(bad(i + 2, "wrong number of columns"));
            }
            rows.push((fields[..dim].to_vec(), fields[dim]));
        }
        Ok(Self { dim, rows })
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse_csv(&fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        Ok(fs::write(path, self.to_csv())?)
    }

    /// Height-field mesh over the cells whose four corners are present.
    /// Rows must lie on a common lattice; vertex order follows the rows.
    pub fn to_obj(&self) -> Result<String> {
        if self.dim != 2 {
            return Err(Error::Usage(format!(
                "OBJ export needs a 2-D field, got dimension {}",
                self.dim
            )));
        }
        let axis = |d: usize| {
            let mut v: Vec<f64> = self.rows.iter().map(|r| r.0[d]).collect();
            v.sort_by(f64::total_cmp);
            v.dedup();
            v
        };
        let (xs, ys) = (axis(0), axis(1));
        let pos = |v: &[f64], c: f64| v.binary_search_by(|p| p.total_cmp(&c)).unwrap();
        let mut index = vec![None; xs.len() * ys.len()];
        for (k, (x, _)) in self.rows.iter().enumerate() {
            index[pos(&xs, x[0]) * ys.len() + pos(&ys, x[1])] = Some(k + 1);
        }
        let mut present = vec![true; index.len()];
        for (p, i) in present.iter_mut().zip(&index) {
            *p = i.is_some();
        }
        Ok(obj_text(&self.rows, &index, &present, ys.len()))
    }
}

/// OBJ mesh of a 2-D field: one vertex per non-EXTERIOR node, two
/// counterclockwise triangles (seen from +u) per cell with INTERIOR corners.
pub fn field_to_obj(f: &ScalarField) -> Result<String> {
    let table = NodeTable::from_field(f);
    if table.dim != 2 {
        return table.to_obj();
    }
    let grid = f.grid();
    let mask = f.mask();
    let ny = grid.axis(1).nodes;
    let mut index = vec![None; grid.len()];
    let mut next = 1;
    for (node, slot) in index.iter_mut().enumerate() {
        if mask.class(node) != NodeClass::Exterior {
            *slot = Some(next);
            next += 1;
        }
    }
    let interior: Vec<bool> = (0..grid.len())
        .map(|node| mask.class(node) == NodeClass::Interior)
        .collect();
    Ok(obj_text(&table.rows, &index, &interior, ny))
}

fn obj_text(
    rows: &[(Vec<f64>, f64)],
    index: &[Option<usize>],
    corner_ok: &[bool],
    ny: usize,
) -> String {
    let mut s = String::new();
    for (x, u) in rows {
        let _ = writeln!(s, "v {} {} {}", fmt_f64(x[0]), fmt_f64(x[1]), fmt_f64(*u));
    }
    let nx = index.len() / ny;
    for i in 0..nx.saturating_sub(1) {
        for j in 0..ny - 1 {
            let c = [
                i * ny + j,
                (i + 1) * ny + j,
                (i + 1) * ny + j + 1,
                i * ny + j + 1,
            ];
            if c.iter().any(|&n| !corner_ok[n] || index[n].is_none()) {
                continue;
            }
            let v = c.map(|n| index[n].unwrap());
            let _ = writeln!(s, "f {} {} {}", v[0], v[1], v[2]);
            let _ = writeln!(s, "f {} {} {}", v[0], v[2], v[3]);
        }
    }
    s
}

/// 17 significant digits: parsing the text gives back the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Apex entry of a run report.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ApexRecord {
    pub location: Vec<f64>,
    pub value: f64,
    pub curvatures: Vec<f64>,
}

impl From<&ApexSpectrum> for ApexRecord {
    fn from(sp: &ApexSpectrum) -> Self {
        Self {
            location: sp.node_location.clone(),
            value: sp.value,
            curvatures: sp.axis_curvatures.clone(),
        }
    }
}

/// One audit line of a run report.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct AuditEntry {
    pub id: String,
    pub pass: bool,
    pub value: f64,
    pub tolerance: f64,
}

impl AuditEntry {
    pub fn new(id: &str, pass: bool, value: f64, tolerance: f64) -> Self {
        Self {
            id: id.into(),
            pass,
            value,
            tolerance,
        }
    }
}

/// The JSON report written by every command. The key set is fixed; absent
/// data are `null` or empty.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct RunReport {
    pub command: String,
    pub params: BTreeMap<String, serde_json::Value>,
    pub residual_max: Option<f64>,
    pub apex: Option<ApexRecord>,
    pub audits: Vec<AuditEntry>,
    pub timing_s: Option<f64>,
}

impl RunReport {
    pub fn new(command: &str, params: BTreeMap<String, serde_json::Value>) -> Self {
        Self {
            command: command.into(),
            params,
            residual_max: None,
            apex: None,
            audits: Vec::new(),
            timing_s: None,
        }
    }

    pub fn add_audits(&mut self, report: &AuditReport) {
        self.audits.extend(
            report
                .checks
                .iter()
                .map(|c| AuditEntry::new(&c.id, c.pass, c.value, c.tolerance)),
        );
    }

    pub fn all_pass(&self) -> bool {
        self.audits.iter().all(|a| a.pass)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        Ok(fs::write(path, self.to_json())?)
    }
}
