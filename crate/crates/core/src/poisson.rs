//! Nonlinear Poisson–Boltzmann solve `-(φ_ξ/v)_ξ = 1 - v e^φ` on a bounded
//! uniform grid with Dirichlet ends, and the electric force
//! `Φ = ½(φ_ξ/v)² - (1/v)(φ_ξ/v)_ξ`.
//!
//! Face values of `1/v` are arithmetic means of the nodal values, which keeps
//! the Newton Jacobian symmetric, tridiagonal and positive definite.

use serde::Serialize;

use crate::error::{Result, WaveError};
use crate::numerics::{d1, solve_tridiagonal};

#[derive(Debug, Clone)]
pub struct PoissonProblem<'a> {
    pub dx: f64,
    pub v: &'a [f64],
    pub phi_left: f64,
    pub phi_right: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Optional right-hand-side correction: solves `-(φ_ξ/v)_ξ - 1 + v e^φ = s`.
    pub source: Option<&'a [f64]>,
    /// Take one extra Newton step after reaching `tol`.
    pub polish: bool,
}

impl<'a> PoissonProblem<'a> {
    pub fn new(dx: f64, v: &'a [f64], phi_left: f64, phi_right: f64) -> Self {
        Self { dx, v, phi_left, phi_right, tol: 1e-12, max_iter: 50, source: None, polish: true }
    }

    fn validate(&self) -> Result<()> {
        if self.v.len() < 3 {
            return Err(WaveError::Argument("Poisson grid needs at least three nodes".into()));
        }
        if !(self.dx > 0.0) {
            return Err(WaveError::Argument(format!("grid spacing must be positive, got {}", self.dx)));
        }
        if let Some(bad) = self.v.iter().find(|v| !(**v > 0.0)) {
            return Err(WaveError::domain(format!("specific volume must be positive, got {bad}")));
        }
        if let Some(s) = self.source {
            if s.len() != self.v.len() {
                return Err(WaveError::Argument("source length differs from grid".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PoissonSolution {
    pub phi: Vec<f64>,
    pub iterations: usize,
    /// Max-norm residual before the first and after every accepted step.
    pub residual_history: Vec<f64>,
}

impl PoissonSolution {
    pub fn residual(&self) -> f64 {
        *self.residual_history.last().unwrap_or(&f64::NAN)
    }
}

/// Discrete residual `-D(φ_ξ/v) - 1 + v e^φ - s` at interior nodes (zero at
/// the two Dirichlet nodes).
pub fn poisson_residual(v: &[f64], phi: &[f64], dx: f64, source: Option<&[f64]>) -> Vec<f64> {
    let kf: Vec<f64> = (0..v.len() - 1).map(|i| 0.5 * (1.0 / v[i] + 1.0 / v[i + 1])).collect();
    let mut r = vec![0.0; v.len()];
    let mut e = vec![0.0; v.len()];
    residual_into(v, &kf, phi, dx, source, &mut r, &mut e);
    r
}

/// Fills the residual and `v e^φ`; returns the max-norm of the residual.
fn residual_into(v: &[f64], kf: &[f64], phi: &[f64], dx: f64, source: Option<&[f64]>, r: &mut [f64], vexp: &mut [f64]) -> f64 {
    let n = v.len();
    let inv = 1.0 / (dx * dx);
    let mut norm: f64 = 0.0;
    for i in 1..n - 1 {
        let ve = v[i] * phi[i].exp();
        vexp[i] = ve;
        let mut ri = -(kf[i] * (phi[i + 1] - phi[i]) - kf[i - 1] * (phi[i] - phi[i - 1])) * inv - 1.0 + ve;
        if let Some(s) = source {
            ri -= s[i];
        }
        r[i] = ri;
        norm = norm.max(ri.abs());
    }
    if norm.is_nan() {
        f64::NAN
    } else {
        norm
    }
}

/// Damped Newton solve; the boundary entries of `guess` are overwritten with
/// the Dirichlet data.
pub fn solve_phi(problem: &PoissonProblem, guess: &[f64]) -> Result<PoissonSolution> {
    problem.validate()?;
    let v = problem.v;
    let n = v.len();
    if guess.len() != n || guess.iter().any(|g| !g.is_finite()) {
        return Err(WaveError::Argument("initial guess must be finite and match the grid".into()));
    }
    let dx = problem.dx;
    let dx2 = dx * dx;
    let mut phi = guess.to_vec();
    phi[0] = problem.phi_left;
    phi[n - 1] = problem.phi_right;
    let kf: Vec<f64> = (0..n - 1).map(|i| 0.5 * (1.0 / v[i] + 1.0 / v[i + 1])).collect();

    let mut r = vec![0.0; n];
    let mut vexp = vec![0.0; n];
    let mut norm = residual_into(v, &kf, &phi, dx, problem.source, &mut r, &mut vexp);
    let mut history = vec![norm];
    let mut iterations = 0;
    let m = n - 2;
    let mut lower = vec![0.0; m];
    let mut diag = vec![0.0; m];
    let mut upper = vec![0.0; m];
    let mut trial = phi.clone();
    let mut r_trial = vec![0.0; n];
    let mut vexp_trial = vec![0.0; n];
    // with polishing, one extra full step once converged refines the iterate
    // itself, not just the residual; it is kept only if the residual drops
    let mut polished = !problem.polish;
    while norm >= problem.tol || !polished {
        if norm < problem.tol {
            polished = true;
        }
        if iterations >= problem.max_iter {
            return Err(WaveError::NonConvergence { iterations, residual: norm });
        }
        iterations += 1;
        for k in 0..m {
            let i = k + 1;
            diag[k] = (kf[i] + kf[i - 1]) / dx2 + vexp[i];
            lower[k] = if k > 0 { -kf[i - 1] / dx2 } else { 0.0 };
            upper[k] = if k + 1 < m { -kf[i] / dx2 } else { 0.0 };
        }
        let delta = solve_tridiagonal(&lower, &diag, &upper, &r[1..n - 1])?;
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            for k in 0..m {
                trial[k + 1] = phi[k + 1] - lambda * delta[k];
            }
            let nt = residual_into(v, &kf, &trial, dx, problem.source, &mut r_trial, &mut vexp_trial);
            if nt < norm {
                std::mem::swap(&mut phi, &mut trial);
                std::mem::swap(&mut r, &mut r_trial);
                std::mem::swap(&mut vexp, &mut vexp_trial);
                trial[0] = phi[0];
                trial[n - 1] = phi[n - 1];
                norm = nt;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            if polished {
                break;
            }
            return Err(WaveError::NonConvergence { iterations, residual: norm });
        }
        history.push(norm);
    }
    Ok(PoissonSolution { phi, iterations, residual_history: history })
}

/// `(φ_ξ/v)_ξ` in flux form at interior nodes, second-order one-sided
/// differencing of `φ_ξ/v` at the ends.
pub fn flux_derivative(v: &[f64], phi: &[f64], dx: f64) -> Vec<f64> {
    let n = v.len();
    let z: Vec<f64> = d1(phi, dx).iter().zip(v).map(|(p, v)| p / v).collect();
    let zx = d1(&z, dx);
    let mut out = vec![0.0; n];
    out[0] = zx[0];
    out[n - 1] = zx[n - 1];
    for i in 1..n - 1 {
        let kp = 0.5 * (1.0 / v[i] + 1.0 / v[i + 1]);
        let km = 0.5 * (1.0 / v[i - 1] + 1.0 / v[i]);
        out[i] = (kp * (phi[i + 1] - phi[i]) - km * (phi[i] - phi[i - 1])) / (dx * dx);
    }
    out
}

/// Electric force `Φ` and its centered derivative `Φ_ξ`.
pub fn electric_force(v: &[f64], phi: &[f64], dx: f64) -> (Vec<f64>, Vec<f64>) {
    let z: Vec<f64> = d1(phi, dx).iter().zip(v).map(|(p, v)| p / v).collect();
    let zx = flux_derivative(v, phi, dx);
    let force: Vec<f64> = (0..v.len()).map(|i| 0.5 * z[i] * z[i] - zx[i] / v[i]).collect();
    let dforce = d1(&force, dx);
    (force, dforce)
}

/// One row of the manufactured-solution convergence study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub dxi: f64,
    pub error: f64,
    pub observed_order: f64,
}

/// Exact pair used by the manufactured-solution study on `[0, 3]`.
pub fn manufactured_fields(x: f64) -> (f64, f64, f64) {
    let phi = 0.5 * (2.0 * x).sin() + 0.1 * x;
    let phi_x = (2.0 * x).cos() + 0.1;
    let phi_xx = -2.0 * (2.0 * x).sin();
    let v = 1.2 + 0.3 * x.cos();
    let v_x = -0.3 * x.sin();
    let flux_x = phi_xx / v - phi_x * v_x / (v * v);
    let source = -flux_x - 1.0 + v * phi.exp();
    (v, phi, source)
}

/// Solves the manufactured problem on `levels` dyadically refined grids
/// starting from `dx0`; the first row's order is NaN.
pub fn manufactured_convergence(dx0: f64, levels: usize) -> Result<Vec<ConvergenceRow>> {
    let length = 3.0;
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(levels);
    for level in 0..levels {
        let dx = dx0 / 2f64.powi(level as i32);
        let n = (length / dx).round() as usize + 1;
        let xs: Vec<f64> = (0..n).map(|i| i as f64 * dx).collect();
        let (mut v, mut exact, mut src) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        for (i, &x) in xs.iter().enumerate() {
            let (a, b, c) = manufactured_fields(x);
            v[i] = a;
            exact[i] = b;
            src[i] = c;
        }
        let mut problem = PoissonProblem::new(dx, &v, exact[0], exact[n - 1]);
        problem.source = Some(&src);
        problem.tol = 1e-11;
        let guess: Vec<f64> = v.iter().map(|v| -v.ln()).collect();
        let sol = solve_phi(&problem, &guess)?;
        let error = sol.phi.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let observed_order = rows.last().map_or(f64::NAN, |prev| (prev.error / error).log2());
        rows.push(ConvergenceRow { dxi: dx, error, observed_order });
    }
    Ok(rows)
}
