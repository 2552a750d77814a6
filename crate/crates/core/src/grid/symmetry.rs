use std::sync::Arc;

use serde::Serialize;

use super::domain::{DomainMask, Link};
use super::field::{BoundaryData, ScalarField};
use super::spec::{Axis, GridSpec, MAX_DIM};
use crate::error::{config, Result};

/// Per-axis even-symmetry flags.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SymmetryFlags {
    even: Vec<bool>,
}

impl SymmetryFlags {
    pub fn new(even: Vec<bool>) -> Self {
        Self { even }
    }

    pub fn none(dim: usize) -> Self {
        Self {
            even: vec![false; dim],
        }
    }

    pub fn all(dim: usize) -> Self {
        Self {
            even: vec![true; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.even.len()
    }

    pub fn is_even(&self, d: usize) -> bool {
        self.even.get(d).copied().unwrap_or(false)
    }

    pub fn any(&self) -> bool {
        self.even.iter().any(|&e| e)
    }

    /// Checks that every flagged axis of `grid` is symmetric about 0.
    pub fn validate_for(&self, grid: &GridSpec) -> Result<()> {
        if self.dim() != grid.dim() {
            return config("symmetry flags dimension does not match grid");
        }
        for d in 0..grid.dim() {
            if self.even[d] && !grid.axis(d).is_symmetric() {
                return config(format!(
                    "axis {d} extent [{}, {}] is not symmetric about 0",
                    grid.axis(d).lo,
                    grid.axis(d).hi
                ));
            }
        }
        Ok(())
    }
}

/// Grid covering the non-negative half of every flagged axis.
pub fn reduced_grid(full: &GridSpec, flags: &SymmetryFlags) -> Result<GridSpec> {
    flags.validate_for(full)?;
    let axes = full
        .axes()
        .iter()
        .enumerate()
        .map(|(d, a)| {
            if flags.is_even(d) {
                Axis::new(0.0, a.hi, a.nodes / 2 + 1)
            } else {
                Ok(a.clone())
            }
        })
        .collect::<Result<Vec<_>>>()?;
    GridSpec::new(axes)
}

/// Full symmetric grid whose flagged non-negative halves equal `reduced`.
pub fn full_grid(reduced: &GridSpec, flags: &SymmetryFlags) -> Result<GridSpec> {
    let axes = reduced
        .axes()
        .iter()
        .enumerate()
        .map(|(d, a)| {
            if flags.is_even(d) {
                Axis::new(-a.hi, a.hi, 2 * a.nodes - 1)
            } else {
                Ok(a.clone())
            }
        })
        .collect::<Result<Vec<_>>>()?;
    GridSpec::new(axes)
}

/// Mask on the reduced grid of `full`, with Neumann mirrors on flagged axes.
pub fn reduce_mask(full: &DomainMask, flags: &SymmetryFlags) -> Result<DomainMask> {
    if full.mirror().any() {
        return config("mask is already reduced");
    }
    for d in 0..flags.dim() {
        if flags.is_even(d) && !full.domain().is_even_in(d) {
            return config(format!("domain is not even in axis {d}"));
        }
    }
    let grid = reduced_grid(full.grid(), flags)?;
    DomainMask::new(full.domain().clone(), grid, flags.clone())
}

fn offsets(grid: &GridSpec, flags: &SymmetryFlags, reduced_to_full: bool) -> [usize; MAX_DIM] {
    let mut off = [0; MAX_DIM];
    for d in 0..grid.dim() {
        if flags.is_even(d) {
            off[d] = if reduced_to_full {
                grid.axis(d).nodes - 1
            } else {
                grid.axis(d).nodes / 2
            };
        }
    }
    off
}

/// Restrict a field to the non-negative half of every flagged axis.
pub fn reduce_to_octant(f: &ScalarField, flags: &SymmetryFlags) -> Result<ScalarField> {
    let full = f.mask();
    let reduced = Arc::new(reduce_mask(full, flags)?);
    let dim = full.dim();
    let off = offsets(full.grid(), flags, false);
    let lookup = |k: usize| -> Result<usize> {
        let mut m = reduced.grid().multi_index(reduced.node_of(k));
        for d in 0..dim {
            m[d] += off[d];
        }
        full.unknown_of(full.grid().index(&m[..dim]))
            .ok_or_else(|| crate::Error::Config("reduced mask does not match full mask".into()))
    };
    let map = (0..reduced.num_unknowns())
        .map(lookup)
        .collect::<Result<Vec<_>>>()?;
    let values = map.iter().map(|&q| f.values()[q]).collect();
    let boundary = f.boundary_data().map(|b| {
        let mut arms = vec![0.0; reduced.num_unknowns() * 2 * dim];
        for (k, &q) in map.iter().enumerate() {
            for link in reduced.links(k) {
                if let Link::Boundary { arm, .. } = *link {
                    arms[2 * dim * k + arm as usize] = b.arms[2 * dim * q + arm as usize];
                }
            }
        }
        let mut nodes = vec![f64::NAN; reduced.grid().len()];
        for (node, v) in nodes.iter_mut().enumerate() {
            let mut m = reduced.grid().multi_index(node);
            for d in 0..dim {
                m[d] += off[d];
            }
            *v = b.nodes[full.grid().index(&m[..dim])];
        }
        Arc::new(BoundaryData { arms, nodes })
    });
    Ok(ScalarField::new(reduced, values)?.with_boundary(boundary))
}

/// Extend a field computed on a reduced mask to the full symmetric grid.
pub fn reflect_full(reduced: &ScalarField) -> Result<ScalarField> {
    let rmask = reduced.mask();
    let flags = rmask.mirror().clone();
    if !flags.any() {
        return Ok(reduced.clone());
    }
    let dim = rmask.dim();
    let grid = full_grid(rmask.grid(), &flags)?;
    let full = Arc::new(DomainMask::new(
        rmask.domain().clone(),
        grid,
        SymmetryFlags::none(dim),
    )?);
    reflect_onto(reduced, full)
}

/// Like [`reflect_full`], onto an existing full mask (must be the unreduced
/// mask of the same domain).
pub(crate) fn reflect_onto(reduced: &ScalarField, full: Arc<DomainMask>) -> Result<ScalarField> {
    let rmask = reduced.mask();
    let flags = rmask.mirror().clone();
    let dim = rmask.dim();
    if full.grid() != &full_grid(rmask.grid(), &flags)? {
        return config("full mask does not match the reduced grid");
    }
    let center = offsets(full.grid(), &flags, false);
    let fold = |node: usize| -> ([usize; MAX_DIM], [bool; MAX_DIM]) {
        let m = full.grid().multi_index(node);
        let mut r = [0; MAX_DIM];
        let mut flipped = [false; MAX_DIM];
        for d in 0..dim {
            if flags.is_even(d) {
                let c = center[d] as isize;
                let i = m[d] as isize - c;
                r[d] = i.unsigned_abs();
                flipped[d] = i < 0;
            } else {
                r[d] = m[d];
            }
        }
        (r, flipped)
    };
    let mut values = Vec::with_capacity(full.num_unknowns());
    let mut map = Vec::with_capacity(full.num_unknowns());
    for k in 0..full.num_unknowns() {
        let (r, flipped) = fold(full.node_of(k));
        let q = rmask
            .unknown_of(rmask.grid().index(&r[..dim]))
            .ok_or_else(|| crate::Error::Config("full mask does not match reduced mask".into()))?;
        values.push(reduced.values()[q]);
        map.push((q, flipped));
    }
    let boundary = reduced.boundary_data().map(|b| {
        let mut arms = vec![0.0; full.num_unknowns() * 2 * dim];
        for (k, &(q, flipped)) in map.iter().enumerate() {
            for link in full.links(k) {
                if let Link::Boundary { arm, .. } = *link {
                    let d = arm as usize / 2;
                    let src = if flipped[d] { arm ^ 1 } else { arm };
                    arms[2 * dim * k + arm as usize] = b.arms[2 * dim * q + src as usize];
                }
            }
        }
        let nodes = (0..full.grid().len())
            .map(|node| b.nodes[rmask.grid().index(&fold(node).0[..dim])])
            .collect();
        Arc::new(BoundaryData { arms, nodes })
    });
    Ok(ScalarField::new(full, values)?.with_boundary(boundary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_domain, Domain};

    fn mask(domain: Domain, half: &[f64], h: f64) -> Arc<DomainMask> {
        let grid = GridSpec::centered(half, h).unwrap();
        Arc::new(build_domain(&domain, &grid).unwrap())
    }

    #[test]
    fn round_trip_on_symmetric_field() {
        let m = mask(Domain::ellipsoid(&[0.75, 0.25], 1.0), &[1.5, 2.5], 0.125);
        let f = ScalarField::sample(m, |x| (x[0] * x[0] + 0.3 * x[1].powi(4)).cos()).unwrap();
        let flags = SymmetryFlags::all(2);
        let back = reflect_full(&reduce_to_octant(&f, &flags).unwrap()).unwrap();
        assert_eq!(back.grid(), f.grid());
        assert_eq!(back.values(), f.values());
    }

    #[test]
    fn odd_field_folds_to_absolute_value() {
        let m = mask(Domain::rectangle(1.0, 1.0), &[1.0, 1.0], 0.25);
        let f = ScalarField::from_fn(m, |x| x[0]).unwrap();
        let flags = SymmetryFlags::new(vec![true, false]);
        let back = reflect_full(&reduce_to_octant(&f, &flags).unwrap()).unwrap();
        for k in 0..back.values().len() {
            let x = back.mask().coords_of_unknown(k)[0];
            assert!((back.values()[k] - x.abs()).abs() < 1e-15);
        }
        assert_ne!(back.values(), f.values());
    }

    #[test]
    fn asymmetric_extent_is_rejected() {
        let grid = GridSpec::new(vec![
            Axis::new(-1.0, 2.0, 13).unwrap(),
            Axis::new(-1.0, 1.0, 9).unwrap(),
        ])
        .unwrap();
        assert!(SymmetryFlags::new(vec![true, false]).validate_for(&grid).is_err());
        assert!(SymmetryFlags::new(vec![false, true]).validate_for(&grid).is_ok());
        assert!(reduced_grid(&grid, &SymmetryFlags::all(2)).is_err());
    }
}
