//! Damped Newton with continuation in the translation speed λ.

use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;

use super::operator::{
    flux_jacobian_values, flux_residual_values, jacobian_values, max_abs, residual_values,
    Discretization, Scaling,
};
use crate::closed_forms::BowlProfile;
use crate::error::{config, Error, Result};
use crate::grid::{reduce_mask, reflect_onto, Domain, DomainMask, ScalarField, SymmetryFlags};
use crate::linalg::{LinearBackend, LinearSolver, SparseMatrix};

/// Per-solve Newton parameters.
#[derive(Clone, Debug, Serialize)]
pub struct NewtonSettings {
    /// Max-norm tolerance on the solver residual at λ = 1.
    pub tol: f64,
    /// Looser tolerance accepted at intermediate λ steps.
    pub step_tol: f64,
    pub max_iter: usize,
    /// Sufficient-decrease factor of the backtracking line search.
    pub armijo: f64,
    pub max_halvings: usize,
    /// Relative tolerance of iterative linear solves.
    pub linear_tol: f64,
    /// `None` picks by dimension.
    pub backend: Option<LinearBackend>,
    /// Compare the solution against a translated bowl barrier.
    pub barrier_check: bool,
    pub discretization: Discretization,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            step_tol: 1e-6,
            max_iter: 40,
            armijo: 1e-4,
            max_halvings: 30,
            linear_tol: 1e-10,
            backend: None,
            barrier_check: false,
            discretization: Discretization::NonDivergence,
        }
    }
}

impl NewtonSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.step_tol > 0.0 && self.linear_tol > 0.0) {
            return config("Newton tolerances must be positive");
        }
        if self.max_iter == 0 {
            return config("Newton needs at least one iteration");
        }
        if !(self.armijo > 0.0 && self.armijo < 1.0) {
            return config("Armijo factor must lie in (0, 1)");
        }
        Ok(())
    }
}

/// Increasing λ values ending at 1; the solve starts from the zero field,
/// the exact solution at λ = 0.
#[derive(Clone, Debug, Serialize)]
pub struct ContinuationSchedule {
    steps: Vec<f64>,
    /// How often a failed step may be halved.
    pub max_bisections: usize,
}

impl ContinuationSchedule {
    pub fn new(steps: Vec<f64>) -> Result<Self> {
        if steps.is_empty() || *steps.last().unwrap() != 1.0 {
            return config("continuation schedule must end at λ = 1");
        }
        if steps.iter().any(|&l| !(0.0..=1.0).contains(&l)) {
            return config("continuation steps must lie in [0, 1]");
        }
        if steps.windows(2).any(|w| w[1] <= w[0]) {
            return config("continuation steps must be strictly increasing");
        }
        Ok(Self {
            steps,
            max_bisections: 10,
        })
    }

    /// `n` equal steps `1/n, 2/n, ..., 1`.
    pub fn uniform(n: usize) -> Self {
        let n = n.max(1);
        let steps = (1..=n)
            .map(|i| if i == n { 1.0 } else { i as f64 / n as f64 })
            .collect();
        Self {
            steps,
            max_bisections: 10,
        }
    }

    pub fn steps(&self) -> &[f64] {
        &self.steps
    }
}

impl Default for ContinuationSchedule {
    fn default() -> Self {
        Self::uniform(16)
    }
}

/// Newton history of one accepted (or failed) λ step.
#[derive(Clone, Debug, Default, Serialize)]
pub struct StepRecord {
    pub lambda: f64,
    pub iterations: usize,
    /// Residual max-norm before each iteration and after the last.
    pub residuals: Vec<f64>,
    pub converged: bool,
}

/// Convergence trace of a Dirichlet solve.
#[derive(Clone, Debug, Default, Serialize)]
pub struct SolveReport {
    pub unknowns: usize,
    pub backend: Option<LinearBackend>,
    pub steps: Vec<StepRecord>,
    pub bisections: usize,
    /// Normalized residual max-norm of the returned field at λ = 1.
    pub final_residual: f64,
    pub max_location: Vec<f64>,
    pub max_value: f64,
    pub min_interior_value: f64,
    /// `Some(margin)` when the bowl barrier check ran; the margin is
    /// `min(barrier - u)`.
    pub barrier_margin: Option<f64>,
    pub flags: Vec<String>,
    pub krylov_iterations: usize,
    pub wall_time_s: f64,
}

impl SolveReport {
    pub fn total_iterations(&self) -> usize {
        self.steps.iter().map(|s| s.iterations).sum()
    }
}

struct Newton<'a> {
    mask: &'a DomainMask,
    settings: &'a NewtonSettings,
    linear: LinearSolver,
}

impl Newton<'_> {
    fn residual(&self, u: &[f64], lambda: f64) -> Vec<f64> {
        match self.settings.discretization {
            Discretization::NonDivergence => {
                residual_values(self.mask, u, None, lambda, Scaling::Normalized)
            }
            Discretization::Divergence => flux_residual_values(self.mask, u, None, lambda),
        }
    }

    fn jacobian(&self, u: &[f64], lambda: f64) -> SparseMatrix {
        match self.settings.discretization {
            Discretization::NonDivergence => {
                jacobian_values(self.mask, u, None, lambda, Scaling::Normalized)
            }
            Discretization::Divergence => flux_jacobian_values(self.mask, u, None, lambda),
        }
    }

    /// Runs Newton at fixed `lambda` from `u`; returns whether it converged.
    fn solve_step(
        &mut self,
        u: &mut Vec<f64>,
        lambda: f64,
        tol: f64,
        record: &mut StepRecord,
    ) -> Result<bool> {
        let s = self.settings;
        let mut r = self.residual(u, lambda);
        let mut norm = max_abs(&r);
        record.residuals.push(norm);
        for _ in 0..s.max_iter {
            if norm <= tol {
                return Ok(true);
            }
            record.iterations += 1;
            let jac = self.jacobian(u, lambda);
            let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
            let delta = match self.linear.solve(&jac, &rhs) {
                Ok(d) => d,
                Err(_) => return Ok(false),
            };
            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..=s.max_halvings {
                let trial: Vec<f64> = u.iter().zip(&delta).map(|(a, d)| a + t * d).collect();
                let rt = self.residual(&trial, lambda);
                let nt = max_abs(&rt);
                if nt.is_finite() && nt <= (1.0 - s.armijo * t) * norm {
                    *u = trial;
                    r = rt;
                    norm = nt;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            record.residuals.push(norm);
            if !accepted {
                return Ok(norm <= tol);
            }
        }
        Ok(norm <= tol)
    }
}

/// Solves the zero-Dirichlet translator problem on `mask` by λ-continuation.
///
/// With symmetry flags set, the problem is solved on the reduced grid with
/// mirror (Neumann) conditions and reflected back to the full mask.
pub fn solve_dirichlet(
    mask: &Arc<DomainMask>,
    schedule: &ContinuationSchedule,
    settings: &NewtonSettings,
    symmetry: &SymmetryFlags,
) -> Result<(ScalarField, SolveReport)> {
    settings.validate()?;
    if mask.mirror().any() {
        return config("solve_dirichlet expects an unreduced mask; pass symmetry flags instead");
    }
    let start = Instant::now();
    let work: Arc<DomainMask> = if symmetry.any() {
        Arc::new(reduce_mask(mask, symmetry)?)
    } else {
        mask.clone()
    };
    let backend = settings
        .backend
        .unwrap_or_else(|| LinearBackend::for_dim(work.dim()));
    let mut report = SolveReport {
        unknowns: work.num_unknowns(),
        backend: Some(backend),
        ..Default::default()
    };
    if let Some(b) = critical_width(mask.domain()) {
        if (b - std::f64::consts::FRAC_PI_2).abs() < 1e-3 {
            report.flags.push(format!(
                "half-width {b} is within 1e-3 of pi/2; conditioning is poor"
            ));
        }
    }

    let mut newton = Newton {
        mask: &work,
        settings,
        linear: LinearSolver::new(backend, settings.linear_tol),
    };
    let mut u = vec![0.0; work.num_unknowns()];
    let mut lambda_done = 0.0;
    let mut pending: Vec<f64> = schedule.steps().iter().rev().copied().collect();
    let min_step =
        schedule.steps().first().copied().unwrap_or(1.0) / (1u64 << schedule.max_bisections) as f64;
    while let Some(&target) = pending.last() {
        let final_step = target == 1.0;
        let tol = if final_step {
            settings.tol
        } else {
            settings.step_tol.max(settings.tol)
        };
        let mut trial = u.clone();
        let mut record = StepRecord {
            lambda: target,
            ..Default::default()
        };
        let ok = newton.solve_step(&mut trial, target, tol, &mut record)?;
        record.converged = ok;
        report.steps.push(record);
        if ok {
            u = trial;
            lambda_done = target;
            pending.pop();
            continue;
        }
        let mid = 0.5 * (lambda_done + target);
        if target - lambda_done <= min_step {
            report.krylov_iterations = newton.linear.krylov_iterations;
            report.wall_time_s = start.elapsed().as_secs_f64();
            return Err(Error::Solver {
                message: format!(
                    "Newton failed at λ = {target} after {} bisections (last accepted λ = {lambda_done})",
                    report.bisections
                ),
                report: Box::new(report),
            });
        }
        report.bisections += 1;
        pending.push(mid);
    }
    report.krylov_iterations = newton.linear.krylov_iterations;
    report.final_residual = max_abs(&newton.residual(&u, 1.0));

    let reduced = ScalarField::new(work.clone(), u)?;
    let field = if symmetry.any() {
        reflect_onto(&reduced, mask.clone())?
    } else {
        reduced
    };
    let k = field.argmax();
    report.max_value = field.values()[k];
    report.max_location = mask.coords_of_unknown(k)[..mask.dim()].to_vec();
    report.min_interior_value = field.values().iter().copied().fold(f64::INFINITY, f64::min);
    if report.min_interior_value <= 0.0 {
        if report.min_interior_value < -settings.tol.max(1e-12) {
            report.wall_time_s = start.elapsed().as_secs_f64();
            return Err(Error::Postcondition(format!(
                "solution is not positive: min interior value {:.3e}",
                report.min_interior_value
            )));
        }
        report
            .flags
            .push("interior value at round-off level of zero".into());
    }
    if settings.barrier_check {
        match barrier_margin(&field) {
            Some(m) => {
                report.barrier_margin = Some(m);
                if m < -1e-6 {
                    report
                        .flags
                        .push(format!("bowl barrier exceeded by {:.3e}", -m));
                }
            }
            None => report
                .flags
                .push("bowl barrier unavailable for this domain".into()),
        }
    }
    report.wall_time_s = start.elapsed().as_secs_f64();
    Ok((field, report))
}

fn critical_width(domain: &Domain) -> Option<f64> {
    match domain {
        Domain::Rectangle { half_width, .. } | Domain::EllipsoidSlab { half_width, .. } => {
            Some(*half_width)
        }
        Domain::Ellipsoid { .. } => None,
    }
}

/// `min(barrier - u)` for the bowl translated down so that it is nonnegative
/// on the whole domain.
fn barrier_margin(f: &ScalarField) -> Option<f64> {
    let dim = f.dim();
    if dim < 2 {
        return None;
    }
    let reach = f
        .mask()
        .domain()
        .half_extents()
        .iter()
        .map(|e| e * e)
        .sum::<f64>()
        .sqrt();
    let bowl = BowlProfile::integrate(dim, reach * 1.001, (reach / 4000.0).min(1e-2)).ok()?;
    let floor = bowl.value(reach).ok()?;
    let mask = f.mask();
    let mut margin = f64::INFINITY;
    for (k, &v) in f.values().iter().enumerate() {
        let x = mask.coords_of_unknown(k);
        let r = x[..dim].iter().map(|c| c * c).sum::<f64>().sqrt();
        let b = bowl.value(r).ok()? - floor;
        margin = margin.min(b - v);
    }
    Some(margin)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_validation() {
        assert!(ContinuationSchedule::new(vec![0.5, 1.0]).is_ok());
        assert!(ContinuationSchedule::new(vec![0.5, 0.9]).is_err());
        assert!(ContinuationSchedule::new(vec![0.5, 0.5, 1.0]).is_err());
        let s = ContinuationSchedule::uniform(16);
        assert_eq!(s.steps().len(), 16);
        assert_eq!(*s.steps().last().unwrap(), 1.0);
    }

    fn small_rectangle() -> Arc<DomainMask> {
        let grid = crate::grid::GridSpec::centered(&[2.0, 1.0], 0.125).unwrap();
        Arc::new(crate::grid::build_domain(&crate::grid::Domain::rectangle(2.0, 1.0), &grid).unwrap())
    }

    fn max_diff(a: &ScalarField, b: &ScalarField) -> f64 {
        a.values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn symmetric_and_full_solves_agree() {
        let mask = small_rectangle();
        let s = NewtonSettings::default();
        let sched = ContinuationSchedule::uniform(16);
        let (full, rep) = solve_dirichlet(&mask, &sched, &s, &SymmetryFlags::none(2)).unwrap();
        let (even, _) = solve_dirichlet(&mask, &sched, &s, &SymmetryFlags::all(2)).unwrap();
        assert!(max_diff(&full, &even) <= 1e-8);
        assert!(rep.final_residual <= s.tol);
        assert!(full.values().iter().all(|&v| v > 0.0));
        for k in 0..full.values().len() {
            let x = mask.coords_of_unknown(k);
            let mirrored = full.value_near(&[-x[0], -x[1]]).unwrap();
            assert!((full.values()[k] - mirrored).abs() <= 1e-8);
        }
    }

    #[test]
    fn schedule_refinement_does_not_change_the_solution() {
        let mask = small_rectangle();
        let s = NewtonSettings::default();
        let flags = SymmetryFlags::all(2);
        let (a, _) = solve_dirichlet(&mask, &ContinuationSchedule::uniform(8), &s, &flags).unwrap();
        let (b, _) = solve_dirichlet(&mask, &ContinuationSchedule::uniform(16), &s, &flags).unwrap();
        assert!(max_diff(&a, &b) <= 1e-8);
    }

    #[test]
    fn reduced_mask_is_rejected() {
        let mask = small_rectangle();
        let reduced = Arc::new(reduce_mask(&mask, &SymmetryFlags::all(2)).unwrap());
        let r = solve_dirichlet(
            &reduced,
            &ContinuationSchedule::default(),
            &NewtonSettings::default(),
            &SymmetryFlags::none(2),
        );
        assert!(r.is_err());
    }
}
