use serde::Serialize;

use crate::error::{config, Result};

/// Maximum supported number of coordinate axes.
pub const MAX_DIM: usize = 3;

/// One axis of a tensor grid: `nodes` equally spaced points on `[lo, hi]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub nodes: usize,
}

impl Axis {
    pub fn new(lo: f64, hi: f64, nodes: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || hi <= lo {
            return config(format!("axis extent [{lo}, {hi}] is empty or not finite"));
        }
        if nodes < 3 {
            return config(format!("axis needs at least 3 nodes, got {nodes}"));
        }
        Ok(Self { lo, hi, nodes })
    }

    /// Symmetric axis `[-half, half]` with odd node count and spacing at most `h`.
    pub fn centered(half: f64, h: f64) -> Result<Self> {
        if !(half > 0.0 && h > 0.0) {
            return config(format!(
                "centered axis needs half-extent and spacing > 0 (got {half}, {h})"
            ));
        }
        let cells = (half / h - 1e-9).ceil().max(1.0) as usize;
        Self::new(-half, half, 2 * cells + 1)
    }

    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / (self.nodes - 1) as f64
    }

    /// Coordinate of node `i`. Symmetric axes give exactly antisymmetric
    /// coordinates and axes starting at 0 match the non-negative half of the
    /// symmetric axis with the same spacing bit for bit.
    pub fn coord(&self, i: usize) -> f64 {
        let cells = (self.nodes - 1) as f64;
        if self.lo == -self.hi {
            self.hi * (2.0 * i as f64 - cells) / cells
        } else if self.lo == 0.0 {
            self.hi * (2.0 * i as f64) / (2.0 * cells)
        } else if i == self.nodes - 1 {
            self.hi
        } else {
            self.lo + (self.hi - self.lo) * (i as f64 / cells)
        }
    }

    pub fn is_symmetric(&self) -> bool {
        (self.lo + self.hi).abs() <= 1e-12 * self.hi.abs().max(1.0) && self.nodes % 2 == 1
    }
}

/// Structured tensor grid in 1, 2 or 3 dimensions. Node indices are
/// lexicographic with the last axis varying fastest.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridSpec {
    axes: Vec<Axis>,
}

impl GridSpec {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() || axes.len() > MAX_DIM {
            return config(format!(
                "grid dimension must be 1..={MAX_DIM}, got {}",
                axes.len()
            ));
        }
        Ok(Self { axes })
    }

    pub fn centered(half_extents: &[f64], h: f64) -> Result<Self> {
        let axes = half_extents
            .iter()
            .map(|&half| Axis::centered(half, h))
            .collect::<Result<Vec<_>>>()?;
        Self::new(axes)
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, d: usize) -> &Axis {
        &self.axes[d]
    }

    pub fn spacing(&self, d: usize) -> f64 {
        self.axes[d].spacing()
    }

    pub fn min_spacing(&self) -> f64 {
        self.axes
            .iter()
            .map(Axis::spacing)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_spacing(&self) -> f64 {
        self.axes.iter().map(Axis::spacing).fold(0.0, f64::max)
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.nodes).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn stride(&self, d: usize) -> usize {
        self.axes[d + 1..].iter().map(|a| a.nodes).product()
    }

    pub fn index(&self, multi: &[usize]) -> usize {
        multi
            .iter()
            .zip(&self.axes)
            .fold(0, |acc, (&i, a)| acc * a.nodes + i)
    }

    pub fn multi_index(&self, mut node: usize) -> [usize; MAX_DIM] {
        let mut out = [0; MAX_DIM];
        for d in (0..self.dim()).rev() {
            let n = self.axes[d].nodes;
            out[d] = node % n;
            node /= n;
        }
        out
    }

    pub fn coords(&self, node: usize) -> [f64; MAX_DIM] {
        let m = self.multi_index(node);
        let mut x = [0.0; MAX_DIM];
        for d in 0..self.dim() {
            x[d] = self.axes[d].coord(m[d]);
        }
        x
    }

    /// Neighbor of `node` shifted by `step` (±1) along axis `d`, if on the grid.
    pub fn neighbor(&self, node: usize, d: usize, step: isize) -> Option<usize> {
        let m = self.multi_index(node);
        let i = m[d] as isize + step;
        if i < 0 || i >= self.axes[d].nodes as isize {
            return None;
        }
        Some((node as isize + step * self.stride(d) as isize) as usize)
    }

    /// Index of the node closest to `x`, clamped to the grid.
    pub fn nearest_node(&self, x: &[f64]) -> usize {
        let mut multi = [0usize; MAX_DIM];
        for d in 0..self.dim() {
            let a = &self.axes[d];
            let t = ((x[d] - a.lo) / a.spacing()).round();
            multi[d] = t.clamp(0.0, (a.nodes - 1) as f64) as usize;
        }
        self.index(&multi[..self.dim()])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centered_axis_has_origin_node() {
        let a = Axis::centered(1.0, 0.3).unwrap();
        assert_eq!(a.nodes % 2, 1);
        assert!(a.spacing() <= 0.3);
        assert_eq!(a.coord(a.nodes / 2), 0.0);
        assert!((a.spacing() * (a.nodes - 1) as f64 - 2.0).abs() < 1e-14);
    }

    #[test]
    fn index_round_trip() {
        let g = GridSpec::new(vec![
            Axis::new(0.0, 1.0, 4).unwrap(),
            Axis::new(0.0, 2.0, 5).unwrap(),
            Axis::new(-1.0, 1.0, 3).unwrap(),
        ])
        .unwrap();
        for node in 0..g.len() {
            let m = g.multi_index(node);
            assert_eq!(g.index(&m[..3]), node);
        }
        assert_eq!(g.neighbor(0, 0, -1), None);
        assert_eq!(g.neighbor(0, 2, 1), Some(1));
        assert_eq!(g.neighbor(0, 0, 1), Some(15));
    }

    #[test]
    fn rejects_bad_axes() {
        assert!(Axis::new(1.0, 0.0, 5).is_err());
        assert!(Axis::new(0.0, 1.0, 2).is_err());
        assert!(GridSpec::new(vec![]).is_err());
    }
}
