use std::sync::OnceLock;

use serde::Serialize;

use super::spec::{GridSpec, MAX_DIM};
use super::stencil::Stencils;
use super::symmetry::SymmetryFlags;
use crate::error::{config, Result};

/// Interior nodes closer than this fraction of a cell to the boundary are
/// treated as boundary nodes.
pub const SNAP_FRACTION: f64 = 1e-6;

/// Analytic description of one of the supported domain classes.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    /// `[-half_length, half_length] x [-half_width, half_width]`.
    Rectangle { half_length: f64, half_width: f64 },
    /// `{ x : sum a_i x_i^2 <= R^2 }`.
    Ellipsoid { coeffs: Vec<f64>, radius: f64 },
    /// `E(a, R) x [-half_width, half_width]`; the slab coordinate is the last axis.
    EllipsoidSlab {
        coeffs: Vec<f64>,
        radius: f64,
        half_width: f64,
    },
}

impl Domain {
    pub fn rectangle(half_length: f64, half_width: f64) -> Self {
        Domain::Rectangle {
            half_length,
            half_width,
        }
    }

    pub fn ellipsoid(coeffs: &[f64], radius: f64) -> Self {
        Domain::Ellipsoid {
            coeffs: coeffs.to_vec(),
            radius,
        }
    }

    pub fn ellipsoid_slab(coeffs: &[f64], radius: f64, half_width: f64) -> Self {
        Domain::EllipsoidSlab {
            coeffs: coeffs.to_vec(),
            radius,
            half_width,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Rectangle { .. } => 2,
            Domain::Ellipsoid { coeffs, .. } => coeffs.len(),
            Domain::EllipsoidSlab { coeffs, .. } => coeffs.len() + 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                config(format!("{name} must be positive and finite, got {v}"))
            }
        };
        let coeffs_ok = |coeffs: &[f64]| {
            if coeffs.is_empty() {
                return config("ellipsoid needs at least one coefficient");
            }
            if let Some(a) = coeffs.iter().find(|&&a| !(a > 0.0)) {
                return config(format!(
                    "ellipsoid coefficient {a} is not positive; drop zero coefficients \
                     (dimension-reduce) before building the domain"
                ));
            }
            Ok(())
        };
        match self {
            Domain::Rectangle {
                half_length,
                half_width,
            } => {
                positive("half_length L", *half_length)?;
                positive("half_width b", *half_width)
            }
            Domain::Ellipsoid { coeffs, radius } => {
                coeffs_ok(coeffs)?;
                positive("radius R", *radius)?;
                if coeffs.len() > MAX_DIM {
                    return config(format!(
                        "ellipsoid dimension {} exceeds {MAX_DIM}",
                        coeffs.len()
                    ));
                }
                Ok(())
            }
            Domain::EllipsoidSlab {
                coeffs,
                radius,
                half_width,
            } => {
                coeffs_ok(coeffs)?;
                positive("radius R", *radius)?;
                positive("half_width b", *half_width)?;
                if coeffs.len() + 1 > MAX_DIM {
                    return config(format!(
                        "ellipsoid x slab dimension {} exceeds {MAX_DIM}",
                        coeffs.len() + 1
                    ));
                }
                Ok(())
            }
        }
    }

    /// Half-extent of the domain along each axis.
    pub fn half_extents(&self) -> Vec<f64> {
        match self {
            Domain::Rectangle {
                half_length,
                half_width,
            } => vec![*half_length, *half_width],
            Domain::Ellipsoid { coeffs, radius } => {
                coeffs.iter().map(|a| radius / a.sqrt()).collect()
            }
            Domain::EllipsoidSlab {
                coeffs,
                radius,
                half_width,
            } => {
                let mut v: Vec<f64> = coeffs.iter().map(|a| radius / a.sqrt()).collect();
                v.push(*half_width);
                v
            }
        }
    }

    /// Strict inside test.
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Domain::Rectangle {
                half_length,
                half_width,
            } => x[0].abs() < *half_length && x[1].abs() < *half_width,
            Domain::Ellipsoid { coeffs, radius } => ellipsoid_form(coeffs, x) < radius * radius,
            Domain::EllipsoidSlab {
                coeffs,
                radius,
                half_width,
            } => {
                let n = coeffs.len();
                ellipsoid_form(coeffs, &x[..n]) < radius * radius && x[n].abs() < *half_width
            }
        }
    }

    /// Distance from the inside point `x` to the boundary moving along axis `d`
    /// in direction `dir` (±1).
    pub fn crossing(&self, x: &[f64], d: usize, dir: f64) -> f64 {
        let ellipse = |coeffs: &[f64], radius: f64| {
            let rest: f64 = coeffs
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != d)
                .map(|(i, a)| a * x[i] * x[i])
                .sum();
            let reach = ((radius * radius - rest).max(0.0) / coeffs[d]).sqrt();
            reach - dir * x[d]
        };
        match self {
            Domain::Rectangle {
                half_length,
                half_width,
            } => {
                let half = if d == 0 { *half_length } else { *half_width };
                half - dir * x[d]
            }
            Domain::Ellipsoid { coeffs, radius } => ellipse(coeffs, *radius),
            Domain::EllipsoidSlab {
                coeffs,
                radius,
                half_width,
            } => {
                if d == coeffs.len() {
                    half_width - dir * x[d]
                } else {
                    ellipse(coeffs, *radius)
                }
            }
        }
    }

    /// Whether the domain is invariant under `x_d -> -x_d`.
    pub fn is_even_in(&self, d: usize) -> bool {
        d < self.dim()
    }
}

fn ellipsoid_form(coeffs: &[f64], x: &[f64]) -> f64 {
    coeffs.iter().zip(x).map(|(a, xi)| a * xi * xi).sum()
}

/// Classification of a grid node relative to the domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum NodeClass {
    Interior,
    BoundaryAdjacent,
    Exterior,
}

/// What an interior node sees along one axis direction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Link {
    /// Full-spacing neighbor that is itself an unknown.
    Node(u32),
    /// The analytic boundary is hit after `frac` (in (0,1]) of the spacing.
    /// `arm` identifies the boundary datum slot (`2*axis + (dir > 0)`).
    Boundary { frac: f64, arm: u8 },
}

impl Link {
    pub fn frac(&self) -> f64 {
        match *self {
            Link::Node(_) => 1.0,
            Link::Boundary { frac, .. } => frac,
        }
    }
}

/// Node classes plus embedded-boundary fractions for an implicit domain on a grid.
///
/// Unknowns are the INTERIOR nodes in ascending node order. Each unknown
/// carries `2*dim` links (`[-x0, +x0, -x1, +x1, ...]`). Axes flagged in
/// `mirror` must start at 0; the node on that plane sees its `+` neighbor
/// in both directions (homogeneous Neumann by reflection).
#[derive(Debug)]
pub struct DomainMask {
    grid: GridSpec,
    domain: Domain,
    mirror: SymmetryFlags,
    class: Vec<NodeClass>,
    interior: Vec<usize>,
    unknown_of: Vec<u32>,
    links: Vec<[Link; 2 * MAX_DIM]>,
    collar: Vec<u8>,
    stencils: OnceLock<Stencils>,
}

const NO_UNKNOWN: u32 = u32::MAX;

/// Build the node classification of `domain` on `grid`.
pub fn build_domain(domain: &Domain, grid: &GridSpec) -> Result<DomainMask> {
    DomainMask::new(
        domain.clone(),
        grid.clone(),
        SymmetryFlags::none(grid.dim()),
    )
}

impl DomainMask {
    pub fn new(domain: Domain, grid: GridSpec, mirror: SymmetryFlags) -> Result<Self> {
        domain.validate()?;
        let dim = grid.dim();
        if domain.dim() != dim {
            return config(format!(
                "domain dimension {} does not match grid dimension {dim}",
                domain.dim()
            ));
        }
        if mirror.dim() != dim {
            return config("symmetry flags dimension does not match grid");
        }
        for d in 0..dim {
            if mirror.is_even(d) && grid.axis(d).lo.abs() > 1e-12 {
                return config(format!("mirrored axis {d} must start at 0"));
            }
        }
        let h: Vec<f64> = (0..dim).map(|d| grid.spacing(d)).collect();

        let mut class = vec![NodeClass::Exterior; grid.len()];
        let mut interior = Vec::new();
        for node in 0..grid.len() {
            let x = grid.coords(node);
            let x = &x[..dim];
            if !domain.contains(x) {
                continue;
            }
            let clear = (0..dim).all(|d| {
                [-1.0, 1.0]
                    .iter()
                    .all(|&s| domain.crossing(x, d, s) >= SNAP_FRACTION * h[d])
            });
            if clear {
                class[node] = NodeClass::Interior;
                interior.push(node);
            }
        }
        if interior.is_empty() {
            return config("domain contains no interior grid nodes; refine the grid");
        }
        let mut unknown_of = vec![NO_UNKNOWN; grid.len()];
        for (k, &node) in interior.iter().enumerate() {
            unknown_of[node] = k as u32;
        }

        let placeholder = Link::Boundary { frac: 1.0, arm: 0 };
        let mut links = vec![[placeholder; 2 * MAX_DIM]; interior.len()];
        for (k, &node) in interior.iter().enumerate() {
            let x = grid.coords(node);
            let x = &x[..dim];
            let multi = grid.multi_index(node);
            for d in 0..dim {
                for (side, s) in [(1usize, 1.0f64), (0, -1.0)] {
                    let slot = 2 * d + side;
                    if side == 0 && mirror.is_even(d) && multi[d] == 0 {
                        links[k][slot] = links[k][2 * d + 1];
                        continue;
                    }
                    let step = if side == 1 { 1 } else { -1 };
                    let link = match grid.neighbor(node, d, step) {
                        Some(q) if class[q] == NodeClass::Interior => Link::Node(unknown_of[q]),
                        Some(_) => {
                            let t = domain.crossing(x, d, s);
                            Link::Boundary {
                                frac: (t / h[d]).clamp(SNAP_FRACTION, 1.0),
                                arm: slot as u8,
                            }
                        }
                        None => {
                            let t = domain.crossing(x, d, s);
                            if t > h[d] * (1.0 + 1e-9) {
                                return config(format!(
                                    "grid extent does not contain the domain along axis {d}"
                                ));
                            }
                            Link::Boundary {
                                frac: (t / h[d]).clamp(SNAP_FRACTION, 1.0),
                                arm: slot as u8,
                            }
                        }
                    };
                    links[k][slot] = link;
                }
            }
        }

        // Non-interior nodes in the 3^dim neighborhood of an interior node.
        for &node in &interior {
            let multi = grid.multi_index(node);
            for code in 0..3usize.pow(dim as u32) {
                let mut m = [0usize; MAX_DIM];
                let mut c = code;
                let mut inside = true;
                for d in 0..dim {
                    let i = multi[d] as isize + (c % 3) as isize - 1;
                    c /= 3;
                    if i < 0 || i >= grid.axis(d).nodes as isize {
                        inside = false;
                        break;
                    }
                    m[d] = i as usize;
                }
                if inside {
                    let q = grid.index(&m[..dim]);
                    if class[q] == NodeClass::Exterior {
                        class[q] = NodeClass::BoundaryAdjacent;
                    }
                }
            }
        }

        let collar = collar_depth(&links, dim);
        Ok(Self {
            grid,
            domain,
            mirror,
            class,
            interior,
            unknown_of,
            links,
            collar,
            stencils: OnceLock::new(),
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn mirror(&self) -> &SymmetryFlags {
        &self.mirror
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn class(&self, node: usize) -> NodeClass {
        self.class[node]
    }

    pub fn classes(&self) -> &[NodeClass] {
        &self.class
    }

    pub fn num_unknowns(&self) -> usize {
        self.interior.len()
    }

    /// Node ids of the unknowns, ascending.
    pub fn interior_nodes(&self) -> &[usize] {
        &self.interior
    }

    pub fn unknown_of(&self, node: usize) -> Option<usize> {
        match self.unknown_of[node] {
            NO_UNKNOWN => None,
            k => Some(k as usize),
        }
    }

    pub fn node_of(&self, unknown: usize) -> usize {
        self.interior[unknown]
    }

    pub fn links(&self, unknown: usize) -> &[Link] {
        &self.links[unknown][..2 * self.dim()]
    }

    /// Fraction of the spacing to the boundary from `unknown` along axis `d`,
    /// direction `dir` (±1).
    pub fn fraction(&self, unknown: usize, d: usize, dir: i32) -> f64 {
        self.links[unknown][2 * d + usize::from(dir > 0)].frac()
    }

    /// Number of link hops from the unknown to the boundary (1 for nodes
    /// touching it), capped at 4.
    pub fn collar_depth(&self, unknown: usize) -> u8 {
        self.collar[unknown]
    }

    pub fn coords_of_unknown(&self, unknown: usize) -> [f64; MAX_DIM] {
        self.grid.coords(self.interior[unknown])
    }

    /// Unknowns of all `3^dim - 1` grid neighbors (mirror-aware), or `None`
    /// if any of them is not interior.
    pub fn full_neighborhood(&self, unknown: usize) -> Option<Vec<usize>> {
        let dim = self.dim();
        let node = self.interior[unknown];
        let multi = self.grid.multi_index(node);
        let mut out = Vec::with_capacity(3usize.pow(dim as u32) - 1);
        for code in 0..3usize.pow(dim as u32) {
            let mut m = [0usize; MAX_DIM];
            let mut c = code;
            let mut all_zero = true;
            for d in 0..dim {
                let off = (c % 3) as isize - 1;
                c /= 3;
                if off != 0 {
                    all_zero = false;
                }
                let mut i = multi[d] as isize + off;
                if i < 0 && self.mirror.is_even(d) {
                    i = -i;
                }
                if i < 0 || i >= self.grid.axis(d).nodes as isize {
                    return None;
                }
                m[d] = i as usize;
            }
            if all_zero {
                continue;
            }
            out.push(self.unknown_of(self.grid.index(&m[..dim]))?);
        }
        Some(out)
    }

    pub(crate) fn stencils(&self) -> &Stencils {
        self.stencils.get_or_init(|| Stencils::build(self))
    }
}

fn collar_depth(links: &[[Link; 2 * MAX_DIM]], dim: usize) -> Vec<u8> {
    const CAP: u8 = 4;
    let mut depth: Vec<u8> = links
        .iter()
        .map(|l| {
            if l[..2 * dim]
                .iter()
                .any(|x| matches!(x, Link::Boundary { .. }))
            {
                1
            } else {
                CAP
            }
        })
        .collect();
    for _ in 0..CAP {
        let prev = depth.clone();
        for (k, l) in links.iter().enumerate() {
            for link in &l[..2 * dim] {
                if let Link::Node(q) = *link {
                    depth[k] = depth[k].min(prev[q as usize].saturating_add(1));
                }
            }
        }
    }
    depth
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::spec::Axis;

    #[test]
    fn rectangle_is_node_aligned() {
        let grid = GridSpec::new(vec![
            Axis::new(-1.0, 1.0, 9).unwrap(),
            Axis::new(-1.0, 1.0, 9).unwrap(),
        ])
        .unwrap();
        let mask = build_domain(&Domain::rectangle(1.0, 1.0), &grid).unwrap();
        assert_eq!(mask.num_unknowns(), 49);
        for node in 0..grid.len() {
            let m = grid.multi_index(node);
            let edge = m[0] == 0 || m[0] == 8 || m[1] == 0 || m[1] == 8;
            let expected = if edge {
                NodeClass::BoundaryAdjacent
            } else {
                NodeClass::Interior
            };
            assert_eq!(mask.class(node), expected, "node {m:?}");
        }
        for k in 0..mask.num_unknowns() {
            for l in mask.links(k) {
                assert!((l.frac() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ellipse_fractions_in_unit_interval() {
        let grid = GridSpec::centered(&[2.5, 2.5], 0.1).unwrap();
        let mask = build_domain(&Domain::ellipsoid(&[0.75, 0.25], 1.0), &grid).unwrap();
        for k in 0..mask.num_unknowns() {
            for l in mask.links(k) {
                assert!(l.frac() > 0.0 && l.frac() <= 1.0);
            }
            let x = mask.coords_of_unknown(k);
            assert!(0.75 * x[0] * x[0] + 0.25 * x[1] * x[1] < 1.0);
        }
    }

    #[test]
    fn nonpositive_coefficient_is_config_error() {
        let grid = GridSpec::centered(&[2.0, 2.0], 0.1).unwrap();
        let err = build_domain(&Domain::ellipsoid(&[1.0, 0.0], 1.0), &grid).unwrap_err();
        assert!(err.to_string().contains("dimension-reduce"));
    }

    #[test]
    fn grid_too_small_is_config_error() {
        let grid = GridSpec::centered(&[1.0, 1.0], 0.1).unwrap();
        assert!(build_domain(&Domain::ellipsoid(&[0.5, 0.5], 1.0), &grid).is_err());
    }

    #[test]
    fn disk_area_from_node_count() {
        let h = 1.0 / 32.0;
        let grid = GridSpec::centered(&[1.5, 1.5], h).unwrap();
        let mask = build_domain(&Domain::ellipsoid(&[0.5, 0.5], 1.0), &grid).unwrap();
        let area = mask.num_unknowns() as f64 * h * h;
        let exact = 2.0 * std::f64::consts::PI;
        assert!((area - exact).abs() < 0.05 * exact, "area {area}");
    }

    #[test]
    fn ellipse_extreme_nodes_near_semi_axes() {
        let h = 1.0 / 16.0;
        let grid = GridSpec::centered(&[1.5, 2.5], h).unwrap();
        let mask = build_domain(&Domain::ellipsoid(&[0.75, 0.25], 1.0), &grid).unwrap();
        let (mut xmax, mut ymax) = (0.0f64, 0.0f64);
        for k in 0..mask.num_unknowns() {
            let x = mask.coords_of_unknown(k);
            if x[1] == 0.0 {
                xmax = xmax.max(x[0].abs());
            }
            if x[0] == 0.0 {
                ymax = ymax.max(x[1].abs());
            }
        }
        assert!((xmax - 2.0 / 3f64.sqrt()).abs() <= h + 1e-12, "x semi-axis {xmax}");
        assert!((ymax - 2.0).abs() <= h + 1e-12, "y semi-axis {ymax}");
    }

    #[test]
    fn interior_neighbors_stay_inside() {
        let grid = GridSpec::centered(&[1.5, 1.5], 0.1).unwrap();
        let mask = build_domain(&Domain::ellipsoid(&[0.5, 0.5], 1.0), &grid).unwrap();
        for node in 0..grid.len() {
            if mask.class(node) != NodeClass::Interior {
                continue;
            }
            for d in 0..2 {
                for step in [-1, 1] {
                    let nb = grid.neighbor(node, d, step).unwrap();
                    assert_ne!(mask.class(nb), NodeClass::Exterior);
                }
            }
            assert!(mask.domain().contains(&grid.coords(node)[..2]));
        }
    }
}
