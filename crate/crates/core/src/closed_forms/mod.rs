//! Exact reference translators.
//!
//! Surfaces are graphs over points `x = (x_1, ..., x_n)`. The strip families
//! depend on `x_1` and on the last coordinate `y = x_n` only.

mod bowl;

use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

pub use bowl::BowlProfile;

use crate::error::{Error, Result};
use crate::grid::{DomainMask, Link, ScalarField, MAX_DIM};
use crate::pde;

/// Value, gradient and Hessian of a surface at a point (padded to three axes).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub gradient: [f64; MAX_DIM],
    pub hessian: [[f64; MAX_DIM]; MAX_DIM],
}

/// A member of one of the reference families.
#[derive(Clone, Debug)]
pub enum ClosedFormSurface {
    /// `log cos y` on `|y| < π/2`.
    GrimReaper,
    /// `log cos(y cos θ) / cos²θ + x tan θ` on `|y| < π / (2 cos θ)`.
    Tilted { theta: f64 },
    /// `log(cos y / cos b)`: the 1-d Dirichlet solution on `[-b, b]`, `b < π/2`.
    Arc { b: f64 },
    /// The horizontal plane `u ≡ height` (not a translator).
    Plane { height: f64 },
    /// The rotationally symmetric bowl over `R^n`.
    Bowl(Arc<BowlProfile>),
}

impl ClosedFormSurface {
    pub fn tilted(theta: f64) -> Result<Self> {
        if !(theta.abs() < FRAC_PI_2) {
            return Err(Error::Config(format!(
                "tilt angle {theta} must lie in (-π/2, π/2)"
            )));
        }
        Ok(Self::Tilted { theta })
    }

    pub fn arc(b: f64) -> Result<Self> {
        if !(b > 0.0 && b < FRAC_PI_2) {
            return Err(Error::Config(format!(
                "arc half-width {b} must lie in (0, π/2)"
            )));
        }
        Ok(Self::Arc { b })
    }

    /// Bowl in dimension `n` with profile on `[0, r_max]` at radial step
    /// `r_max / 4000` (capped at 1e-3).
    pub fn bowl(n: usize, r_max: f64) -> Result<Self> {
        let dr = (r_max / 4000.0).min(1e-3);
        Ok(Self::Bowl(Arc::new(BowlProfile::integrate(n, r_max, dr)?)))
    }

    /// Half-width of the strip the surface lives on (`None` for entire graphs).
    pub fn strip_half_width(&self) -> Option<f64> {
        match self {
            Self::GrimReaper | Self::Arc { .. } => Some(FRAC_PI_2),
            Self::Tilted { theta } => Some(FRAC_PI_2 / theta.cos()),
            Self::Plane { .. } | Self::Bowl(_) => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::GrimReaper => "grim_reaper",
            Self::Tilted { .. } => "tilted",
            Self::Arc { .. } => "arc",
            Self::Plane { .. } => "plane",
            Self::Bowl(_) => "bowl",
        }
    }

    /// Exact value and derivatives at `x`.
    pub fn eval(&self, x: &[f64]) -> Result<Jet> {
        let dim = x.len();
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::Config(format!(
                "point dimension {dim} is not 1..={MAX_DIM}"
            )));
        }
        let mut jet = Jet {
            value: 0.0,
            gradient: [0.0; MAX_DIM],
            hessian: [[0.0; MAX_DIM]; MAX_DIM],
        };
        let yi = dim - 1;
        let y = x[yi];
        let outside =
            |w: f64| Error::Domain(format!("point {x:?} lies outside the strip |y| < {w}"));
        match self {
            Self::GrimReaper | Self::Arc { .. } => {
                if !(y.abs() < FRAC_PI_2) {
                    return Err(outside(FRAC_PI_2));
                }
                let shift = match self {
                    Self::Arc { b } => b.cos().ln(),
                    _ => 0.0,
                };
                jet.value = y.cos().ln() - shift;
                jet.gradient[yi] = -y.tan();
                jet.hessian[yi][yi] = -1.0 / (y.cos() * y.cos());
            }
            Self::Tilted { theta } => {
                if dim < 2 {
                    return Err(Error::Config(
                        "tilted grim reaper needs at least two coordinates".into(),
                    ));
                }
                let c = theta.cos();
                let width = FRAC_PI_2 / c;
                if !(y.abs() < width) {
                    return Err(outside(width));
                }
                let s = y * c;
                jet.value = s.cos().ln() / (c * c) + x[0] * theta.tan();
                jet.gradient[0] = theta.tan();
                jet.gradient[yi] = -s.tan() / c;
                jet.hessian[yi][yi] = -1.0 / (s.cos() * s.cos());
            }
            Self::Plane { height } => jet.value = *height,
            Self::Bowl(profile) => {
                if dim != profile.dim() {
                    return Err(Error::Config(format!(
                        "bowl of dimension {} evaluated at a {dim}-point",
                        profile.dim()
                    )));
                }
                let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                jet.value = profile.value(r)?;
                let upp = profile.second(r)?;
                if r == 0.0 {
                    for i in 0..dim {
                        jet.hessian[i][i] = upp;
                    }
                } else {
                    let up = profile.slope(r)?;
                    for i in 0..dim {
                        jet.gradient[i] = up * x[i] / r;
                        for j in 0..dim {
                            let (ei, ej) = (x[i] / r, x[j] / r);
                            let delta = if i == j { 1.0 } else { 0.0 };
                            jet.hessian[i][j] = upp * ei * ej + up / r * (delta - ei * ej);
                        }
                    }
                }
            }
        }
        Ok(jet)
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        Ok(self.eval(x)?.value)
    }

    /// Samples the surface on `mask`, including boundary crossings, so the
    /// field carries the surface's own Dirichlet data.
    pub fn sample(&self, mask: Arc<DomainMask>) -> Result<ScalarField> {
        let dim = mask.dim();
        let h: Vec<f64> = (0..dim).map(|d| mask.grid().spacing(d)).collect();
        for k in 0..mask.num_unknowns() {
            let x = mask.coords_of_unknown(k);
            self.eval(&x[..dim])?;
            for link in mask.links(k) {
                if let Link::Boundary { frac, arm } = *link {
                    let mut p = x;
                    let d = arm as usize / 2;
                    p[d] += if arm % 2 == 1 {
                        frac * h[d]
                    } else {
                        -frac * h[d]
                    };
                    self.eval(&p[..dim])?;
                }
            }
        }
        ScalarField::sample(mask, |x| self.value(x).unwrap_or(f64::NAN))
    }
}

/// Discrete translator residual (λ = 1) of the sampled surface.
pub fn residual_of_closed_form(
    surface: &ClosedFormSurface,
    mask: Arc<DomainMask>,
) -> Result<Vec<f64>> {
    let f = surface.sample(mask)?;
    Ok(pde::residual(&f, 1.0))
}
