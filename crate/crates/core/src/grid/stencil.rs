//! Finite-difference stencils on a masked grid.
//!
//! Every discrete derivative at an interior node is a linear combination of
//! unknown values and boundary data. A *slot* below `n` addresses unknown
//! `slot`; a slot `n + 2*dim*k + arm` addresses the boundary datum hit by
//! unknown `k` along `arm`. Regular nodes get second-order central
//! differences; nodes with a boundary arm get the non-uniform three-point
//! (Shortley–Weller) formulas; mixed derivatives at such nodes fall back to
//! one-sided differences of the first-derivative stencils.

use super::domain::{DomainMask, Link};
use super::spec::MAX_DIM;

/// Row-compressed linear stencil: one row per unknown.
#[derive(Clone, Debug, Default)]
pub struct StencilRows {
    pub(crate) offsets: Vec<usize>,
    pub(crate) slots: Vec<u32>,
    pub(crate) coefs: Vec<f64>,
}

impl StencilRows {
    fn with_capacity(rows: usize) -> Self {
        let mut offsets = Vec::with_capacity(rows + 1);
        offsets.push(0);
        Self {
            offsets,
            slots: Vec::new(),
            coefs: Vec::new(),
        }
    }

    fn push_row(&mut self, mut row: Vec<(u32, f64)>) {
        row.sort_by_key(|e| e.0);
        let mut last: Option<u32> = None;
        for (slot, c) in row {
            if last == Some(slot) {
                *self.coefs.last_mut().unwrap() += c;
            } else {
                self.slots.push(slot);
                self.coefs.push(c);
                last = Some(slot);
            }
        }
        self.offsets.push(self.slots.len());
    }

    pub(crate) fn row(&self, k: usize) -> impl Iterator<Item = (u32, f64)> + '_ {
        let r = self.offsets[k]..self.offsets[k + 1];
        self.slots[r.clone()]
            .iter()
            .copied()
            .zip(self.coefs[r].iter().copied())
    }

    fn row_vec(&self, k: usize) -> Vec<(u32, f64)> {
        self.row(k).collect()
    }

    /// Evaluate row `k` on unknown values plus optional boundary data.
    #[inline]
    pub(crate) fn eval(&self, k: usize, values: &[f64], boundary: Option<&[f64]>) -> f64 {
        let n = values.len();
        let mut acc = 0.0;
        for (slot, c) in self.row(k) {
            let s = slot as usize;
            if s < n {
                acc += c * values[s];
            } else if let Some(b) = boundary {
                acc += c * b[s - n];
            }
        }
        acc
    }
}

/// All first- and second-derivative stencils of a mask.
#[derive(Clone, Debug)]
pub struct Stencils {
    pub(crate) dim: usize,
    pub(crate) first: Vec<StencilRows>,
    /// Upper-triangular second derivatives in `pairs` order.
    pub(crate) second: Vec<StencilRows>,
    pub(crate) pairs: Vec<(usize, usize)>,
}

impl Stencils {
    pub(crate) fn build(mask: &DomainMask) -> Self {
        let dim = mask.dim();
        let n = mask.num_unknowns();
        let h: Vec<f64> = (0..dim).map(|d| mask.grid().spacing(d)).collect();
        let boundary_slot = |k: usize, arm: u8| -> u32 { (n + 2 * dim * k + arm as usize) as u32 };
        let link_slot = |k: usize, link: Link| -> u32 {
            match link {
                Link::Node(q) => q,
                Link::Boundary { arm, .. } => boundary_slot(k, arm),
            }
        };

        let mut first: Vec<StencilRows> = (0..dim).map(|_| StencilRows::with_capacity(n)).collect();
        let mut pure: Vec<StencilRows> = (0..dim).map(|_| StencilRows::with_capacity(n)).collect();
        for k in 0..n {
            let links = mask.links(k);
            for d in 0..dim {
                let (lm, lp) = (links[2 * d], links[2 * d + 1]);
                let hm = lm.frac() * h[d];
                let hp = lp.frac() * h[d];
                let (sm, sp, s0) = (link_slot(k, lm), link_slot(k, lp), k as u32);
                let denom = hm * hp * (hm + hp);
                first[d].push_row(vec![
                    (sp, hm * hm / denom),
                    (sm, -hp * hp / denom),
                    (s0, (hp * hp - hm * hm) / denom),
                ]);
                pure[d].push_row(vec![
                    (sp, 2.0 / (hp * (hm + hp))),
                    (sm, 2.0 / (hm * (hm + hp))),
                    (s0, -2.0 / (hm * hp)),
                ]);
            }
        }

        let mut pairs = Vec::new();
        let mut second = Vec::new();
        let mut pure = pure.into_iter().map(Some).collect::<Vec<_>>();
        for i in 0..dim {
            for j in i..dim {
                pairs.push((i, j));
                if i == j {
                    second.push(pure[i].take().unwrap());
                } else {
                    second.push(mixed(mask, &first, i, j, &h));
                }
            }
        }
        Self {
            dim,
            first,
            second,
            pairs,
        }
    }

    #[cfg(test)]
    pub(crate) fn second_index(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        self.pairs.iter().position(|&p| p == (i, j)).unwrap()
    }

    /// Gradient and Hessian at unknown `k`.
    #[inline]
    pub(crate) fn derivatives_at(
        &self,
        k: usize,
        values: &[f64],
        boundary: Option<&[f64]>,
    ) -> ([f64; MAX_DIM], [[f64; MAX_DIM]; MAX_DIM]) {
        let mut g = [0.0; MAX_DIM];
        let mut hess = [[0.0; MAX_DIM]; MAX_DIM];
        for d in 0..self.dim {
            g[d] = self.first[d].eval(k, values, boundary);
        }
        for (p, &(i, j)) in self.pairs.iter().enumerate() {
            let v = self.second[p].eval(k, values, boundary);
            hess[i][j] = v;
            hess[j][i] = v;
        }
        (g, hess)
    }
}

/// Mixed derivative `d_i d_j` as a difference of first-derivative stencils
/// along the other axis: central where both neighbors are unknowns,
/// one-sided where one is, swapped axes or zero otherwise.
fn mixed(mask: &DomainMask, first: &[StencilRows], i: usize, j: usize, h: &[f64]) -> StencilRows {
    let n = mask.num_unknowns();
    let mut rows = StencilRows::with_capacity(n);
    for k in 0..n {
        let links = mask.links(k);
        let row = difference_along(links, first, i, j, h[j], k)
            .or_else(|| difference_along(links, first, j, i, h[i], k))
            .unwrap_or_default();
        rows.push_row(row);
    }
    rows
}

fn difference_along(
    links: &[Link],
    first: &[StencilRows],
    inner: usize,
    outer: usize,
    h_outer: f64,
    k: usize,
) -> Option<Vec<(u32, f64)>> {
    let scaled = |row: Vec<(u32, f64)>, s: f64| row.into_iter().map(move |(slot, c)| (slot, c * s));
    match (links[2 * outer], links[2 * outer + 1]) {
        (Link::Node(qm), Link::Node(qp)) => {
            let s = 1.0 / (2.0 * h_outer);
            let mut row: Vec<_> = scaled(first[inner].row_vec(qp as usize), s).collect();
            row.extend(scaled(first[inner].row_vec(qm as usize), -s));
            Some(row)
        }
        (Link::Boundary { .. }, Link::Node(qp)) => {
            let s = 1.0 / h_outer;
            let mut row: Vec<_> = scaled(first[inner].row_vec(qp as usize), s).collect();
            row.extend(scaled(first[inner].row_vec(k), -s));
            Some(row)
        }
        (Link::Node(qm), Link::Boundary { .. }) => {
            let s = 1.0 / h_outer;
            let mut row: Vec<_> = scaled(first[inner].row_vec(k), s).collect();
            row.extend(scaled(first[inner].row_vec(qm as usize), -s));
            Some(row)
        }
        _ => None,
    }
}
