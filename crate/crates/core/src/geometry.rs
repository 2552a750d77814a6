//! Geometric diagnostics of graph fields: slope function, curvatures, the
//! divergence-form residual, apex spectra and the `ηv` maximum audit.

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{derivatives, gradient, Link, ScalarField, MAX_DIM};

/// `v = sqrt(1 + |Du|^2)` at every INTERIOR node.
pub fn slope_v(f: &ScalarField) -> Vec<f64> {
    gradient(f)
        .iter()
        .map(|g| (1.0 + g.iter().map(|c| c * c).sum::<f64>()).sqrt())
        .collect()
}

fn det(h: &[[f64; MAX_DIM]; MAX_DIM], dim: usize) -> f64 {
    match dim {
        1 => h[0][0],
        2 => h[0][0] * h[1][1] - h[0][1] * h[1][0],
        _ => {
            h[0][0] * (h[1][1] * h[2][2] - h[1][2] * h[2][1])
                - h[0][1] * (h[1][0] * h[2][2] - h[1][2] * h[2][0])
                + h[0][2] * (h[1][0] * h[2][1] - h[1][1] * h[2][0])
        }
    }
}

/// Gauss–Kronecker curvature `det(D^2u) / (1+|Du|^2)^((n+2)/2)` of the graph.
pub fn gauss_curvature(f: &ScalarField) -> Vec<f64> {
    let dim = f.dim();
    let (g, h) = derivatives(f);
    g.iter()
        .zip(&h)
        .map(|(g, h)| {
            let w2 = 1.0 + g.iter().map(|c| c * c).sum::<f64>();
            det(h, dim) / w2.powf((dim as f64 + 2.0) / 2.0)
        })
        .collect()
}

/// `div(Du / W) + 1/W` with `W = sqrt(1+|Du|^2)`, discretized in flux form:
/// normal derivatives on cell faces from the two adjacent values, tangential
/// derivatives averaged from the node gradients.
pub fn mean_curvature_residual(f: &ScalarField) -> Vec<f64> {
    let mask = f.mask();
    let dim = mask.dim();
    let grads = gradient(f);
    let values = f.values();
    let arms = f.boundary_arms();
    let h: Vec<f64> = (0..dim).map(|d| mask.grid().spacing(d)).collect();
    (0..values.len())
        .into_par_iter()
        .map(|k| {
            let links = mask.links(k);
            let gk = grads[k];
            let wk = (1.0 + gk[..dim].iter().map(|c| c * c).sum::<f64>()).sqrt();
            let mut div = 0.0;
            for d in 0..dim {
                let mut flux = [0.0; 2];
                let mut reach = [0.0; 2];
                for side in 0..2 {
                    let link = links[2 * d + side];
                    let sign = if side == 1 { 1.0 } else { -1.0 };
                    let dist = link.frac() * h[d];
                    let (other, g_other) = match link {
                        Link::Node(q) => (values[q as usize], grads[q as usize]),
                        Link::Boundary { arm, .. } => {
                            (arms.map_or(0.0, |a| a[2 * dim * k + arm as usize]), gk)
                        }
                    };
                    let mut face = [0.0; MAX_DIM];
                    for e in 0..dim {
                        face[e] = 0.5 * (gk[e] + g_other[e]);
                    }
                    face[d] = sign * (other - values[k]) / dist;
                    let w = (1.0 + face[..dim].iter().map(|c| c * c).sum::<f64>()).sqrt();
                    flux[side] = face[d] / w;
                    reach[side] = 0.5 * dist;
                }
                div += (flux[1] - flux[0]) / (reach[0] + reach[1]);
            }
            div + 1.0 / wk
        })
        .collect()
}

/// Principal-curvature data at the interior maximum.
#[derive(Clone, Debug, Serialize)]
pub struct ApexSpectrum {
    /// Grid node holding the largest value.
    pub node_location: Vec<f64>,
    /// Critical point of the quadratic fitted on the node neighborhood.
    pub location: Vec<f64>,
    pub value: f64,
    pub gradient: Vec<f64>,
    pub hessian: Vec<Vec<f64>>,
    /// Hessian eigenvalues, sorted by decreasing magnitude.
    pub eigenvalues: Vec<f64>,
    /// `-eigenvalue`, same order.
    pub curvatures: Vec<f64>,
    /// `-D_ii u`, one per coordinate axis.
    pub axis_curvatures: Vec<f64>,
    pub trace: f64,
    pub max_off_diagonal: f64,
    pub spacing: f64,
}

impl ApexSpectrum {
    pub fn gradient_norm(&self) -> f64 {
        self.gradient.iter().map(|g| g * g).sum::<f64>().sqrt()
    }

    /// Axis curvatures divided by their sum.
    pub fn normalized_axis_curvatures(&self) -> Vec<f64> {
        let s: f64 = self.axis_curvatures.iter().sum();
        self.axis_curvatures.iter().map(|k| k / s).collect()
    }
}

/// Apex spectrum of `f` from the stencil Hessian at the maximum node.
pub fn apex_spectrum(f: &ScalarField) -> Result<ApexSpectrum> {
    let mask = f.mask();
    let dim = mask.dim();
    let k = f.argmax();
    let neighbors = match mask.full_neighborhood(k) {
        Some(nb) if mask.collar_depth(k) > 1 => nb,
        _ => {
            return Err(Error::Usage(format!(
                "maximum at {:?} lies on the boundary collar",
                &mask.coords_of_unknown(k)[..dim]
            )))
        }
    };
    let st = mask.stencils();
    let (g, h) = st.derivatives_at(k, f.values(), f.boundary_arms());
    let x0 = mask.coords_of_unknown(k);

    let (location, value) = quadratic_fit(f, k, &neighbors);

    let hm = Mat::<f64>::from_fn(dim, dim, |i, j| h[i][j]);
    let mut eig = hm
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Usage(format!("apex eigenvalue solve failed: {e:?}")))?;
    eig.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
    let mut max_off = 0.0f64;
    for i in 0..dim {
        for j in 0..dim {
            if i != j {
                max_off = max_off.max(h[i][j].abs());
            }
        }
    }
    Ok(ApexSpectrum {
        node_location: x0[..dim].to_vec(),
        location,
        value,
        gradient: g[..dim].to_vec(),
        hessian: (0..dim).map(|i| h[i][..dim].to_vec()).collect(),
        curvatures: eig.iter().map(|e| -e).collect(),
        eigenvalues: eig,
        axis_curvatures: (0..dim).map(|i| -h[i][i]).collect(),
        trace: (0..dim).map(|i| h[i][i]).sum(),
        max_off_diagonal: max_off,
        spacing: mask.grid().max_spacing(),
    })
}

/// Least-squares quadratic through the 3^n neighborhood of unknown `k`;
/// returns its critical point and the value there.
fn quadratic_fit(f: &ScalarField, k: usize, neighbors: &[usize]) -> (Vec<f64>, f64) {
    let mask = f.mask();
    let dim = mask.dim();
    let x0 = mask.coords_of_unknown(k);
    let mirror = mask.mirror();
    let mut pts: Vec<([f64; MAX_DIM], f64)> = vec![([0.0; MAX_DIM], f.values()[k])];
    for &q in neighbors {
        let xq = mask.coords_of_unknown(q);
        let mut dx = [0.0; MAX_DIM];
        for d in 0..dim {
            dx[d] = xq[d] - x0[d];
        }
        pts.push((dx, f.values()[q]));
        // a mirrored neighbor appears once per image
        for d in 0..dim {
            if mirror.is_even(d) && x0[d] == 0.0 && dx[d] != 0.0 {
                let mut m = dx;
                m[d] = -m[d];
                pts.push((m, f.values()[q]));
            }
        }
    }
    let basis = |x: &[f64; MAX_DIM]| -> Vec<f64> {
        let mut b = vec![1.0];
        b.extend_from_slice(&x[..dim]);
        for i in 0..dim {
            for j in i..dim {
                b.push(x[i] * x[j]);
            }
        }
        b
    };
    let m = 1 + dim + dim * (dim + 1) / 2;
    let mut ata = Mat::<f64>::zeros(m, m);
    let mut atb = Mat::<f64>::zeros(m, 1);
    for (x, v) in &pts {
        let b = basis(x);
        for i in 0..m {
            atb[(i, 0)] += b[i] * v;
            for j in 0..m {
                ata[(i, j)] += b[i] * b[j];
            }
        }
    }
    let c = ata.partial_piv_lu().solve(&atb);
    let grad: Vec<f64> = (0..dim).map(|i| c[(1 + i, 0)]).collect();
    let mut hess = Mat::<f64>::zeros(dim, dim);
    let mut p = 1 + dim;
    for i in 0..dim {
        for j in i..dim {
            let v = c[(p, 0)];
            if i == j {
                hess[(i, i)] = 2.0 * v;
            } else {
                hess[(i, j)] = v;
                hess[(j, i)] = v;
            }
            p += 1;
        }
    }
    let g = Mat::<f64>::from_fn(dim, 1, |i, _| grad[i]);
    let step = hess.partial_piv_lu().solve(&g);
    let mut loc = Vec::with_capacity(dim);
    let mut value = c[(0, 0)];
    let h = mask.grid().max_spacing();
    let mut shift = [0.0; MAX_DIM];
    for i in 0..dim {
        shift[i] = -step[(i, 0)];
    }
    let inside = shift[..dim].iter().all(|s| s.is_finite() && s.abs() <= h);
    if inside {
        for i in 0..dim {
            value += 0.5 * grad[i] * shift[i];
            loc.push(x0[i] + shift[i]);
        }
    } else {
        loc.extend_from_slice(&x0[..dim]);
        value = f.values()[k];
    }
    (loc, value)
}

/// Affine weight `η(x) = c + Σ a_i x_i`.
#[derive(Clone, Debug, Serialize)]
pub struct Affine {
    pub constant: f64,
    pub coeffs: Vec<f64>,
}

impl Affine {
    pub fn new(constant: f64, coeffs: Vec<f64>) -> Self {
        Self { constant, coeffs }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.constant + self.coeffs.iter().zip(x).map(|(a, x)| a * x).sum::<f64>()
    }
}

/// Result of the `ηv` local-maximum scan.
#[derive(Clone, Debug, Serialize)]
pub struct EtaAudit {
    pub pass: bool,
    /// Largest `ηv(k) - max over neighbors` among scanned nodes (positive
    /// means a strict local maximum).
    pub worst_excess: f64,
    pub worst_location: Vec<f64>,
    pub slack: f64,
    pub scanned: usize,
    /// Location of the largest `ηv` over the nodes with `η > 0`.
    pub argmax_location: Vec<f64>,
}

/// Scans interior nodes with `η > 0` for strict local maxima of `ηv`
/// beyond the slack `10 h^2 (1 + max v^2)`.
pub fn eta_v_max_audit(f: &ScalarField, eta: &Affine) -> EtaAudit {
    eta_weighted_max_audit(f, |x| eta.eval(x))
}

pub(crate) fn eta_weighted_max_audit(
    f: &ScalarField,
    eta: impl Fn(&[f64]) -> f64 + Sync,
) -> EtaAudit {
    let mask = f.mask();
    let dim = mask.dim();
    let v = slope_v(f);
    let n = v.len();
    let coords: Vec<[f64; MAX_DIM]> = (0..n).map(|k| mask.coords_of_unknown(k)).collect();
    let ev: Vec<f64> = (0..n).map(|k| eta(&coords[k][..dim]) * v[k]).collect();
    let h = mask.grid().max_spacing();
    let vmax = v.iter().copied().fold(1.0, f64::max);
    let slack = 10.0 * h * h * (1.0 + vmax * vmax);
    let mut worst = f64::NEG_INFINITY;
    let mut worst_at = 0;
    let mut scanned = 0;
    let mut best = f64::NEG_INFINITY;
    let mut best_at = 0;
    for k in 0..n {
        if eta(&coords[k][..dim]) <= 0.0 {
            continue;
        }
        if ev[k] > best {
            best = ev[k];
            best_at = k;
        }
        let Some(nb) = mask.full_neighborhood(k) else {
            continue;
        };
        scanned += 1;
        let top = nb.iter().map(|&q| ev[q]).fold(f64::NEG_INFINITY, f64::max);
        let excess = ev[k] - top;
        if excess > worst {
            worst = excess;
            worst_at = k;
        }
    }
    EtaAudit {
        pass: scanned == 0 || worst <= slack,
        worst_excess: worst,
        worst_location: coords[worst_at][..dim].to_vec(),
        slack,
        scanned,
        argmax_location: coords[best_at][..dim].to_vec(),
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::closed_forms::ClosedFormSurface;
    use crate::grid::{build_domain, Domain, DomainMask, GridSpec};

    fn square(h: f64) -> Arc<DomainMask> {
        let grid = GridSpec::centered(&[1.0, 1.0], h).unwrap();
        Arc::new(build_domain(&Domain::rectangle(1.0, 1.0), &grid).unwrap())
    }

    #[test]
    fn flat_field_has_unit_slope_and_zero_curvature() {
        let f = ScalarField::zeros(square(0.1));
        assert!(slope_v(&f).iter().all(|&v| v == 1.0));
        assert!(gauss_curvature(&f).iter().all(|&k| k == 0.0));
        let r = mean_curvature_residual(&f);
        assert!(r.iter().all(|&x| x == 1.0));
    }

    #[test]
    fn grim_reaper_slope_matches_secant() {
        let f = ClosedFormSurface::GrimReaper
            .sample(square(1.0 / 64.0))
            .unwrap();
        let v = slope_v(&f);
        for (k, vk) in v.iter().enumerate() {
            let y = f.mask().coords_of_unknown(k)[1];
            assert!((vk - 1.0 / y.cos()).abs() < 2e-3);
        }
    }

    #[test]
    fn divergence_residual_converges_on_grim_reaper() {
        let err = |h: f64| {
            let f = ClosedFormSurface::GrimReaper.sample(square(h)).unwrap();
            crate::pde::max_abs(&mean_curvature_residual(&f))
        };
        let (e1, e2) = (err(1.0 / 16.0), err(1.0 / 32.0));
        assert!(e2 < e1 / 3.0, "{e1} {e2}");
    }

    #[test]
    fn eta_audit_on_grim_reaper_passes() {
        let f = ClosedFormSurface::GrimReaper
            .sample(square(1.0 / 32.0))
            .unwrap();
        let eta = Affine::new(std::f64::consts::FRAC_PI_2, vec![0.0, -1.0]);
        assert!(eta_v_max_audit(&f, &eta).pass);
    }
}
