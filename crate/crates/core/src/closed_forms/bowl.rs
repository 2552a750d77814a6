use crate::error::{Error, Result};

/// Radial profile of the rotationally symmetric translator over `R^n`,
/// sampled on a uniform grid in `r`.
#[derive(Clone, Debug)]
pub struct BowlProfile {
    n: usize,
    dr: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

/// Local error target per sample interval for the step-doubling test.
const STEP_TOL: f64 = 1e-12;
/// Maximum number of interval halvings before giving up.
const MAX_REFINE: u32 = 12;

fn rhs(n: usize, r: f64, p: f64) -> f64 {
    -(1.0 + p * p) * (1.0 + (n as f64 - 1.0) * p / r)
}

fn rk4(n: usize, r: f64, (u, p): (f64, f64), h: f64) -> (f64, f64) {
    let k1 = (p, rhs(n, r, p));
    let k2 = (p + 0.5 * h * k1.1, rhs(n, r + 0.5 * h, p + 0.5 * h * k1.1));
    let k3 = (p + 0.5 * h * k2.1, rhs(n, r + 0.5 * h, p + 0.5 * h * k2.1));
    let k4 = (p + h * k3.1, rhs(n, r + h, p + h * k3.1));
    (
        u + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
        p + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
    )
}

/// Advances over `[r, r + len]` with `m` RK4 steps.
fn advance(n: usize, r: f64, y: (f64, f64), len: f64, m: usize) -> (f64, f64) {
    let h = len / m as f64;
    (0..m).fold(y, |y, i| rk4(n, r + i as f64 * h, y, h))
}

/// Step-doubling RK4 over one interval, refining until the two estimates agree.
fn interval(n: usize, r: f64, y: (f64, f64), len: f64) -> Option<(f64, f64)> {
    let mut m = 1;
    for _ in 0..=MAX_REFINE {
        let coarse = advance(n, r, y, len, m);
        let fine = advance(n, r, y, len, 2 * m);
        let scale = 1.0 + fine.0.abs().max(fine.1.abs());
        let err = (fine.0 - coarse.0).abs().max((fine.1 - coarse.1).abs()) / 15.0;
        if err.is_finite() && err <= STEP_TOL * scale {
            return Some(fine);
        }
        m *= 2;
    }
    None
}

/// Two-term expansion `u = a r^2 + c r^4` at the apex.
fn series(n: usize, r: f64) -> (f64, f64) {
    let nf = n as f64;
    let a = -1.0 / (2.0 * nf);
    let c = -1.0 / (4.0 * nf.powi(3) * (nf + 2.0));
    (a * r * r + c * r.powi(4), 2.0 * a * r + 4.0 * c * r.powi(3))
}

impl BowlProfile {
    /// Integrates the radial translator ODE
    /// `u'' = -(1 + u'^2)(1 + (n-1) u'/r)` on `[0, r_max]`.
    pub fn integrate(n: usize, r_max: f64, dr: f64) -> Result<Self> {
        if !(1..=3).contains(&n) {
            return Err(Error::Config(format!(
                "bowl dimension must be 1, 2 or 3, got {n}"
            )));
        }
        if !(r_max > 0.0 && dr > 0.0 && r_max.is_finite()) {
            return Err(Error::Config(format!(
                "bowl needs r_max > 0 and dr > 0 (got {r_max}, {dr})"
            )));
        }
        let samples = (r_max / dr).ceil() as usize;
        let eps = dr / 10.0;
        let mut values = vec![0.0];
        let mut slopes = vec![0.0];
        let mut y = series(n, eps);
        let mut r = eps;
        for j in 1..=samples {
            let target = j as f64 * dr;
            y = interval(n, r, y, target - r).ok_or_else(|| {
                Error::Accuracy(format!(
                    "bowl integration cannot meet tolerance near r = {target:.4} (slope {:.3e}); \
                     reduce the step or r_max",
                    y.1
                ))
            })?;
            r = target;
            values.push(y.0);
            slopes.push(y.1);
        }
        let profile = Self {
            n,
            dr,
            values,
            slopes,
        };
        profile.check_monotone()?;
        Ok(profile)
    }

    fn check_monotone(&self) -> Result<()> {
        for j in 1..self.values.len() {
            if !(self.values[j] < self.values[j - 1]
                && self.slopes[j].abs() > self.slopes[j - 1].abs())
            {
                return Err(Error::Accuracy(format!(
                    "bowl profile lost monotonicity at r = {:.4}",
                    j as f64 * self.dr
                )));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn step(&self) -> f64 {
        self.dr
    }

    pub fn r_max(&self) -> f64 {
        (self.values.len() - 1) as f64 * self.dr
    }

    pub fn radii(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(|j| j as f64 * self.dr)
    }

    pub fn sampled_values(&self) -> &[f64] {
        &self.values
    }

    pub fn sampled_slopes(&self) -> &[f64] {
        &self.slopes
    }

    fn locate(&self, r: f64) -> Result<(usize, f64)> {
        if !(0.0..=self.r_max() * (1.0 + 1e-12)).contains(&r) {
            return Err(Error::Domain(format!(
                "bowl profile evaluated at r = {r}, outside [0, {}]",
                self.r_max()
            )));
        }
        let j = ((r / self.dr).floor() as usize).min(self.values.len() - 2);
        Ok((j, (r - j as f64 * self.dr) / self.dr))
    }

    /// Cubic Hermite interpolation of `u`.
    pub fn value(&self, r: f64) -> Result<f64> {
        let (j, t) = self.locate(r)?;
        let h = self.dr;
        let (t2, t3) = (t * t, t * t * t);
        Ok((2.0 * t3 - 3.0 * t2 + 1.0) * self.values[j]
            + (t3 - 2.0 * t2 + t) * h * self.slopes[j]
            + (-2.0 * t3 + 3.0 * t2) * self.values[j + 1]
            + (t3 - t2) * h * self.slopes[j + 1])
    }

    /// Derivative of the Hermite interpolant.
    pub fn slope(&self, r: f64) -> Result<f64> {
        let (j, t) = self.locate(r)?;
        let h = self.dr;
        let t2 = t * t;
        Ok(((6.0 * t2 - 6.0 * t) * self.values[j]
            + (3.0 * t2 - 4.0 * t + 1.0) * h * self.slopes[j]
            + (-6.0 * t2 + 6.0 * t) * self.values[j + 1]
            + (3.0 * t2 - 2.0 * t) * h * self.slopes[j + 1])
            / h)
    }

    /// `u''` from the ODE (the apex value `-1/n` at `r = 0`).
    pub fn second(&self, r: f64) -> Result<f64> {
        let p = self.slope(r)?;
        if r == 0.0 {
            return Ok(-1.0 / self.n as f64);
        }
        Ok(rhs(self.n, r, p))
    }

    /// `u''(0)` estimated from the first two samples, removing the `r^4` term.
    pub fn fitted_apex_curvature(&self) -> f64 {
        let h = self.dr;
        2.0 * (16.0 * self.values[1] - self.values[2]) / (12.0 * h * h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_matches_ode_coefficients() {
        for n in 1..=3 {
            let r = 1e-3;
            let (_, p) = series(n, r);
            let upp =
                -1.0 / n as f64 - 12.0 / (4.0 * (n as f64).powi(3) * (n as f64 + 2.0)) * r * r;
            assert!((upp - rhs(n, r, p)).abs() < 1e-9);
        }
    }

    #[test]
    fn one_dimensional_profile_is_log_cos() {
        let b = BowlProfile::integrate(1, 1.4, 1e-3).unwrap();
        for (r, &u) in b.radii().zip(b.sampled_values()) {
            assert!((u - r.cos().ln()).abs() < 1e-8, "r = {r}");
        }
    }

    #[test]
    fn one_dimensional_blow_up_is_reported() {
        assert!(matches!(
            BowlProfile::integrate(1, 1.6, 1e-2),
            Err(Error::Accuracy(_))
        ));
    }

    #[test]
    fn outside_range_is_domain_error() {
        let b = BowlProfile::integrate(2, 1.0, 1e-2).unwrap();
        assert!(matches!(b.value(1.5), Err(Error::Domain(_))));
        assert!(b.value(1.0).is_ok());
    }
}
