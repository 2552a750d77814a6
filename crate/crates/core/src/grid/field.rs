use std::sync::Arc;

use super::domain::{DomainMask, Link, NodeClass};
use super::spec::{GridSpec, MAX_DIM};
use crate::error::{config, Result};

/// Boundary data for fields that do not vanish on the analytic boundary
/// (sampled closed forms).
#[derive(Clone, Debug)]
pub struct BoundaryData {
    /// One datum per unknown and arm (`2*dim` per unknown): the value at the
    /// point where that arm meets the boundary.
    pub(crate) arms: Vec<f64>,
    /// Values at BOUNDARY-ADJACENT nodes (NaN elsewhere).
    pub(crate) nodes: Vec<f64>,
}

/// Values of a candidate translator on the INTERIOR nodes of a mask.
///
/// Boundary data default to zero; BOUNDARY-ADJACENT nodes then report 0 and
/// EXTERIOR nodes carry no value.
#[derive(Clone, Debug)]
pub struct ScalarField {
    mask: Arc<DomainMask>,
    values: Vec<f64>,
    boundary: Option<Arc<BoundaryData>>,
}

impl ScalarField {
    pub fn new(mask: Arc<DomainMask>, values: Vec<f64>) -> Result<Self> {
        if values.len() != mask.num_unknowns() {
            return config(format!(
                "field has {} values but the mask has {} interior nodes",
                values.len(),
                mask.num_unknowns()
            ));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return config(format!("field value {v} is not finite"));
        }
        Ok(Self {
            mask,
            values,
            boundary: None,
        })
    }

    pub fn zeros(mask: Arc<DomainMask>) -> Self {
        let n = mask.num_unknowns();
        Self {
            mask,
            values: vec![0.0; n],
            boundary: None,
        }
    }

    /// Samples `f` at the interior nodes; boundary data stay zero.
    pub fn from_fn(mask: Arc<DomainMask>, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let dim = mask.dim();
        let values = (0..mask.num_unknowns())
            .map(|k| f(&mask.coords_of_unknown(k)[..dim]))
            .collect();
        Self::new(mask, values)
    }

    /// Samples `f` at the interior nodes, at every boundary crossing and at
    /// the BOUNDARY-ADJACENT nodes (where finite; 0 otherwise).
    pub fn sample(mask: Arc<DomainMask>, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let dim = mask.dim();
        let h: Vec<f64> = (0..dim).map(|d| mask.grid().spacing(d)).collect();
        let mut arms = vec![0.0; mask.num_unknowns() * 2 * dim];
        for k in 0..mask.num_unknowns() {
            let x = mask.coords_of_unknown(k);
            for link in mask.links(k) {
                if let Link::Boundary { frac, arm } = *link {
                    let d = arm as usize / 2;
                    let dir = if arm % 2 == 1 { 1.0 } else { -1.0 };
                    let mut p = x;
                    p[d] += dir * frac * h[d];
                    arms[2 * dim * k + arm as usize] = f(&p[..dim]);
                }
            }
        }
        let grid = mask.grid();
        let nodes = (0..grid.len())
            .map(|node| match mask.class(node) {
                NodeClass::BoundaryAdjacent => {
                    let v = f(&grid.coords(node)[..dim]);
                    if v.is_finite() {
                        v
                    } else {
                        0.0
                    }
                }
                _ => f64::NAN,
            })
            .collect();
        if let Some(v) = arms.iter().find(|v| !v.is_finite()) {
            return config(format!("boundary datum {v} is not finite"));
        }
        let mut field = Self::from_fn(mask, f)?;
        field.boundary = Some(Arc::new(BoundaryData { arms, nodes }));
        Ok(field)
    }

    /// The field plus a constant, boundary data included.
    pub fn shifted(&self, c: f64) -> Self {
        let mask = &self.mask;
        let boundary = match &self.boundary {
            Some(b) => BoundaryData {
                arms: b.arms.iter().map(|v| v + c).collect(),
                nodes: b.nodes.iter().map(|v| v + c).collect(),
            },
            None => BoundaryData {
                arms: vec![c; mask.num_unknowns() * 2 * mask.dim()],
                nodes: (0..mask.grid().len())
                    .map(|node| match mask.class(node) {
                        NodeClass::BoundaryAdjacent => c,
                        _ => f64::NAN,
                    })
                    .collect(),
            },
        };
        Self {
            mask: mask.clone(),
            values: self.values.iter().map(|v| v + c).collect(),
            boundary: Some(Arc::new(boundary)),
        }
    }

    pub(crate) fn with_boundary(mut self, boundary: Option<Arc<BoundaryData>>) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn mask(&self) -> &Arc<DomainMask> {
        &self.mask
    }

    pub fn grid(&self) -> &GridSpec {
        self.mask.grid()
    }

    pub fn dim(&self) -> usize {
        self.mask.dim()
    }

    /// Values at the unknowns (INTERIOR nodes, ascending node order).
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn has_zero_boundary(&self) -> bool {
        self.boundary.is_none()
    }

    pub(crate) fn boundary_arms(&self) -> Option<&[f64]> {
        self.boundary.as_ref().map(|b| b.arms.as_slice())
    }

    pub(crate) fn boundary_data(&self) -> Option<&Arc<BoundaryData>> {
        self.boundary.as_ref()
    }

    /// Value at a grid node: interior value, boundary value, or `None` on
    /// EXTERIOR nodes.
    pub fn node_value(&self, node: usize) -> Option<f64> {
        match self.mask.class(node) {
            NodeClass::Interior => Some(self.values[self.mask.unknown_of(node).unwrap()]),
            NodeClass::BoundaryAdjacent => Some(match &self.boundary {
                Some(b) => b.nodes[node],
                None => 0.0,
            }),
            NodeClass::Exterior => None,
        }
    }

    /// Unknown with the largest value.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (k, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = k;
            }
        }
        best
    }

    pub fn max_value(&self) -> f64 {
        self.values[self.argmax()]
    }

    /// Value at the grid node nearest to `x` (must be non-EXTERIOR).
    pub fn value_near(&self, x: &[f64]) -> Option<f64> {
        self.node_value(self.grid().nearest_node(x))
    }

    /// Multilinear interpolation from the non-EXTERIOR nodes of the cell
    /// containing `x`; `None` outside the grid or if a corner is EXTERIOR.
    pub fn interpolate(&self, x: &[f64]) -> Option<f64> {
        let grid = self.grid();
        let dim = grid.dim();
        let mut base = [0usize; MAX_DIM];
        let mut t = [0.0; MAX_DIM];
        for d in 0..dim {
            let a = grid.axis(d);
            let mut xd = x[d];
            if self.mask.mirror().is_even(d) {
                xd = xd.abs();
            }
            let s = (xd - a.lo) / a.spacing();
            if s < -1e-12 || s > (a.nodes - 1) as f64 + 1e-12 {
                return None;
            }
            let i = (s.floor().max(0.0) as usize).min(a.nodes - 2);
            base[d] = i;
            t[d] = (s - i as f64).clamp(0.0, 1.0);
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << dim) {
            let mut m = base;
            let mut w = 1.0;
            for d in 0..dim {
                if corner >> d & 1 == 1 {
                    m[d] += 1;
                    w *= t[d];
                } else {
                    w *= 1.0 - t[d];
                }
            }
            if w == 0.0 {
                continue;
            }
            acc += w * self.node_value(grid.index(&m[..dim]))?;
        }
        Some(acc)
    }
}

/// Per-node gradient (padded to three components).
pub type GradientField = Vec<[f64; MAX_DIM]>;
/// Per-node symmetric Hessian (padded to 3x3).
pub type HessianField = Vec<[[f64; MAX_DIM]; MAX_DIM]>;

/// Discrete gradient at every INTERIOR node.
pub fn gradient(f: &ScalarField) -> GradientField {
    let st = f.mask().stencils();
    let b = f.boundary_arms();
    (0..f.values().len())
        .map(|k| {
            let mut g = [0.0; MAX_DIM];
            for (d, gd) in g.iter_mut().enumerate().take(st.dim) {
                *gd = st.first[d].eval(k, f.values(), b);
            }
            g
        })
        .collect()
}

/// Discrete Hessian at every INTERIOR node.
pub fn hessian(f: &ScalarField) -> HessianField {
    let st = f.mask().stencils();
    let b = f.boundary_arms();
    (0..f.values().len())
        .map(|k| st.derivatives_at(k, f.values(), b).1)
        .collect()
}

/// Gradient and Hessian together.
pub fn derivatives(f: &ScalarField) -> (GradientField, HessianField) {
    let st = f.mask().stencils();
    let b = f.boundary_arms();
    (0..f.values().len())
        .map(|k| st.derivatives_at(k, f.values(), b))
        .unzip()
}
