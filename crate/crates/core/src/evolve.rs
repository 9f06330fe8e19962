//! Method-of-lines evolution of the Navier–Stokes–Poisson system in the
//! shock's moving frame, co-integrated with the shift `X(t)`.
//!
//! ```text
//! v_t = σ v_ξ + u_ξ
//! u_t = σ u_ξ - p̃(v)_ξ + (u_ξ/v)_ξ + Φ(v, φ)_ξ
//! -(φ_ξ/v)_ξ = 1 - v e^φ
//! ```
//!
//! Second-order centered differences, Heun time stepping with a Poisson
//! solve after every stage, Dirichlet ends pinned to the composite wave.

use serde::Serialize;

use crate::composite::{CompositePoint, CompositeWave, RarefactionPart};
use crate::error::{Result, WaveError};
use crate::functionals::{good_terms, norms, weighted_eta, EnergyReport, Perturbation};
use crate::numerics::{trapezoid, UniformGrid};
use crate::poisson::{electric_force, solve_phi, PoissonProblem};
use crate::shift::{shift_rhs, ShiftState};
use crate::thermo::p_tilde;

/// Switches for the individual momentum terms (all on by default).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Hooks {
    pub pressure: bool,
    pub viscosity: bool,
    pub electric: bool,
}

impl Default for Hooks {
    fn default() -> Self {
        Self { pressure: true, viscosity: true, electric: true }
    }
}

/// Coordinates of the grid: `ξ = x - σt` or the lab coordinate `x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Frame {
    #[default]
    Moving,
    Static,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimSettings {
    pub half_length: f64,
    pub dxi: f64,
    pub cfl_h: f64,
    pub cfl_p: f64,
    pub c0: f64,
    pub hooks: Hooks,
    pub frame: Frame,
    /// Overrides the CFL step (still shortened to land on requested times).
    pub fixed_dt: Option<f64>,
    pub poisson_tol: f64,
}

impl Default for SimSettings {
    fn default() -> Self {
        Self {
            half_length: 150.0,
            dxi: 0.05,
            cfl_h: 0.4,
            cfl_p: 0.25,
            c0: 1.0,
            hooks: Hooks::default(),
            frame: Frame::Moving,
            fixed_dt: None,
            poisson_tol: 1e-12,
        }
    }
}

/// Gaussian perturbations `A exp(-(ξ-ξ0)²/(2w²))`, cut to zero below 1e-14.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InitialPerturbation {
    pub a_v: f64,
    pub xi0_v: f64,
    pub w_v: f64,
    pub a_u: f64,
    pub xi0_u: f64,
    pub w_u: f64,
}

impl InitialPerturbation {
    pub fn gaussian(amplitude: f64, width: f64) -> Self {
        Self { a_v: amplitude, xi0_v: 0.0, w_v: width, a_u: amplitude, xi0_u: 0.0, w_u: width }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { a_v: self.a_v * factor, a_u: self.a_u * factor, ..*self }
    }
}

pub fn bump(xi: f64, amplitude: f64, center: f64, width: f64) -> f64 {
    if amplitude == 0.0 || width <= 0.0 {
        return 0.0;
    }
    let g = (-(xi - center).powi(2) / (2.0 * width * width)).exp();
    if g < 1e-14 {
        0.0
    } else {
        amplitude * g
    }
}

/// Boundary node through which the mass equation transports `v` out of the
/// domain, if any.
fn outflow_node(n: usize, frame_speed: f64) -> Option<usize> {
    if frame_speed > 0.0 {
        Some(0)
    } else if frame_speed < 0.0 {
        Some(n - 1)
    } else {
        None
    }
}

#[derive(Debug, Clone)]
pub struct GridState {
    pub t: f64,
    pub x_shift: f64,
    pub grid: UniformGrid,
    pub v: Vec<f64>,
    pub u: Vec<f64>,
    pub phi: Vec<f64>,
    pub dt_last: f64,
}

/// Right-hand side on interior nodes. `frame_speed` is σ in the moving frame
/// and 0 in the lab frame. With a nonzero frame speed, `v` is carried out of
/// the domain at one end (the left end for σ > 0); there `v_t` uses one-sided
/// upwind differences, every other boundary entry is zero.
pub fn rhs(v: &[f64], u: &[f64], phi: &[f64], dx: f64, frame_speed: f64, hooks: Hooks) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = v.len();
    let mut vt = vec![0.0; n];
    let mut ut = vec![0.0; n];
    let dforce = if hooks.electric { Some(electric_force(v, phi, dx).1) } else { None };
    let inv2 = 0.5 / dx;
    let invsq = 1.0 / (dx * dx);
    for i in 1..n - 1 {
        let du = (u[i + 1] - u[i - 1]) * inv2;
        let dv = (v[i + 1] - v[i - 1]) * inv2;
        vt[i] = frame_speed * dv + du;
        let mut a = frame_speed * du;
        if hooks.pressure {
            a -= (p_tilde(v[i + 1]) - p_tilde(v[i - 1])) * inv2;
        }
        if hooks.viscosity {
            let kp = 0.5 * (1.0 / v[i] + 1.0 / v[i + 1]);
            let km = 0.5 * (1.0 / v[i - 1] + 1.0 / v[i]);
            a += (kp * (u[i + 1] - u[i]) - km * (u[i] - u[i - 1])) * invsq;
        }
        if let Some(df) = &dforce {
            a += df[i];
        }
        ut[i] = a;
        if !(vt[i].is_finite() && a.is_finite()) {
            return Err(WaveError::Abort { t: f64::NAN, reason: format!("non-finite right-hand side at node {i}") });
        }
    }
    if let Some(i) = outflow_node(n, frame_speed) {
        // second-order one-sided differences pointing into the domain
        let one_sided = |f: &[f64]| {
            if i == 0 {
                (-3.0 * f[0] + 4.0 * f[1] - f[2]) * inv2
            } else {
                (3.0 * f[i] - 4.0 * f[i - 1] + f[i - 2]) * inv2
            }
        };
        vt[i] = frame_speed * one_sided(v) + one_sided(u);
    }
    Ok((vt, ut))
}

/// Cumulative mass-balance bookkeeping.
#[derive(Debug, Clone, Copy, Default)]
struct MassBalance {
    initial: f64,
    predicted: f64,
}

pub struct Simulation {
    pub wave: CompositeWave,
    pub shift: ShiftState,
    pub settings: SimSettings,
    pub state: GridState,
    xs: Vec<f64>,
    rare_cache: Option<(f64, Vec<RarefactionPart>)>,
    composite: Vec<CompositePoint>,
    mass: MassBalance,
    pub steps: usize,
    pub min_v: f64,
    pub poisson_iterations: usize,
}

impl Simulation {
    pub fn new(wave: CompositeWave, settings: SimSettings, pert: InitialPerturbation) -> Result<Self> {
        let grid = UniformGrid::symmetric(settings.half_length, settings.dxi)?;
        let xs = grid.points();
        let shift = ShiftState::new(&wave.fan, settings.c0);
        let n = grid.n;
        let mut sim = Simulation {
            wave,
            shift,
            state: GridState { t: 0.0, x_shift: 0.0, grid, v: vec![], u: vec![], phi: vec![], dt_last: 0.0 },
            settings,
            xs,
            rare_cache: None,
            composite: vec![],
            mass: MassBalance::default(),
            steps: 0,
            min_v: f64::INFINITY,
            poisson_iterations: 0,
        };
        let comp = sim.composite_at(0.0, 0.0);
        let pos = sim.positions(0.0);
        let v: Vec<f64> = (0..n).map(|i| comp[i].v + bump(pos[i], pert.a_v, pert.xi0_v, pert.w_v)).collect();
        let u: Vec<f64> = (0..n).map(|i| comp[i].u + bump(pos[i], pert.a_u, pert.xi0_u, pert.w_u)).collect();
        if let Some(bad) = v.iter().find(|x| !(**x > 0.0)) {
            return Err(WaveError::config("A_v", format!("perturbation drives v to {bad} <= 0")));
        }
        let guess: Vec<f64> = comp.iter().map(|c| c.phi).collect();
        sim.state.v = v;
        sim.state.u = u;
        sim.state.phi = guess;
        sim.solve_poisson(&comp)?;
        sim.min_v = sim.state.v.iter().copied().fold(f64::INFINITY, f64::min);
        sim.mass.initial = sim.mass_integral(&comp);
        sim.composite = comp;
        Ok(sim)
    }

    fn frame_speed(&self) -> f64 {
        match self.settings.frame {
            Frame::Moving => self.wave.sigma(),
            Frame::Static => 0.0,
        }
    }

    /// `ξ` coordinates of the grid nodes at time `t`.
    pub fn positions(&self, t: f64) -> Vec<f64> {
        match self.settings.frame {
            Frame::Moving => self.xs.clone(),
            Frame::Static => self.xs.iter().map(|x| x - self.wave.sigma() * t).collect(),
        }
    }

    fn rarefaction_at(&mut self, t: f64) -> Vec<RarefactionPart> {
        if let Some((tc, parts)) = &self.rare_cache {
            if *tc == t {
                return parts.clone();
            }
        }
        let pos = self.positions(t);
        let parts: Vec<RarefactionPart> = pos.iter().map(|&xi| self.wave.rarefaction_part(t, xi)).collect();
        self.rare_cache = Some((t, parts.clone()));
        parts
    }

    /// Composite wave at every node for time `t` and shift `x_shift`.
    pub fn composite_at(&mut self, t: f64, x_shift: f64) -> Vec<CompositePoint> {
        let parts = self.rarefaction_at(t);
        let pos = self.positions(t);
        parts.iter().zip(&pos).map(|(r, &xi)| self.wave.combine(r, x_shift, xi)).collect()
    }

    /// Composite wave at the current state.
    pub fn composite(&self) -> &[CompositePoint] {
        &self.composite
    }

    fn solve_poisson(&mut self, comp: &[CompositePoint]) -> Result<()> {
        let n = comp.len();
        let mut problem = PoissonProblem::new(self.state.grid.dx, &self.state.v, comp[0].phi, comp[n - 1].phi);
        problem.tol = self.settings.poisson_tol;
        problem.polish = false;
        let sol = solve_phi(&problem, &self.state.phi).map_err(|e| WaveError::Abort {
            t: self.state.t,
            reason: format!("Poisson solve failed: {e}"),
        })?;
        self.poisson_iterations += sol.iterations;
        self.state.phi = sol.phi;
        Ok(())
    }

    fn mass_integral(&self, comp: &[CompositePoint]) -> f64 {
        let d: Vec<f64> = self.state.v.iter().zip(comp).map(|(v, c)| v - c.v).collect();
        trapezoid(&d, self.state.grid.dx)
    }

    /// Predicted `d/dt ∫ṽ`: boundary flux plus the shift source.
    fn mass_rate(&self, v: &[f64], u: &[f64], comp: &[CompositePoint], x_shift: f64, xdot: f64) -> f64 {
        let n = v.len();
        let s = self.frame_speed();
        let flux = |i: usize| s * (v[i] - comp[i].v) + (u[i] - comp[i].u);
        let l = self.state.grid.x_max();
        let jump = self.wave.profile.eval(l - x_shift).v - self.wave.profile.eval(-l - x_shift).v;
        flux(n - 1) - flux(0) + xdot * jump
    }

    fn xdot(&self, v: &[f64], comp: &[CompositePoint]) -> f64 {
        shift_rhs(&self.shift, v, comp, self.state.grid.dx)
    }

    /// Current `Ẋ` at the current state.
    pub fn current_xdot(&self) -> f64 {
        self.xdot(&self.state.v, &self.composite)
    }

    pub fn cfl_dt(&self) -> f64 {
        if let Some(dt) = self.settings.fixed_dt {
            return dt;
        }
        let vmin = self.state.v.iter().copied().fold(f64::INFINITY, f64::min);
        let dx = self.state.grid.dx;
        let smax = self.frame_speed().abs() + std::f64::consts::SQRT_2 / vmin;
        (self.settings.cfl_h * dx / smax).min(self.settings.cfl_p * dx * dx * vmin)
    }

    /// Boundary data from the composite wave. Where every characteristic
    /// enters the domain both `v` and `u` are pinned. At the outflow end `v`
    /// is left free (pinning it reflects a grid-scale mode back in) and only
    /// the incoming Riemann invariant is imposed, `u ∓ √2 ln v` equal to its
    /// composite value, so outgoing waves leave without reflection.
    fn pin(&self, v: &mut [f64], u: &mut [f64], comp: &[CompositePoint]) {
        let n = v.len();
        let out = outflow_node(n, self.frame_speed());
        for i in [0, n - 1] {
            if out == Some(i) {
                let sign = if i == 0 { 1.0 } else { -1.0 };
                u[i] = comp[i].u + sign * std::f64::consts::SQRT_2 * (v[i] / comp[i].v).ln();
            } else {
                v[i] = comp[i].v;
                u[i] = comp[i].u;
            }
        }
    }

    fn check(&self, v: &[f64], t: f64) -> Result<f64> {
        let mut vmin = f64::INFINITY;
        for (i, x) in v.iter().enumerate() {
            if !x.is_finite() || *x <= 0.0 {
                return Err(WaveError::Abort { t, reason: format!("v = {x} at xi = {}", self.xs[i]) });
            }
            vmin = vmin.min(*x);
        }
        Ok(vmin)
    }

    /// One Heun step of `(v, u, X)` with a Poisson solve after each stage.
    pub fn step(&mut self, dt: f64) -> Result<()> {
        let t0 = self.state.t;
        let t1 = t0 + dt;
        let x0 = self.state.x_shift;
        let dx = self.state.grid.dx;
        let hooks = self.settings.hooks;
        let fs = self.frame_speed();
        let comp0 = std::mem::take(&mut self.composite);
        let (v0, u0, phi0) = (self.state.v.clone(), self.state.u.clone(), self.state.phi.clone());
        let abort = |e: WaveError| match e {
            WaveError::Abort { reason, .. } => WaveError::Abort { t: t0, reason },
            other => other,
        };

        let (fv0, fu0) = rhs(&v0, &u0, &phi0, dx, fs, hooks).map_err(abort)?;
        let xd0 = self.xdot(&v0, &comp0);
        let rate0 = self.mass_rate(&v0, &u0, &comp0, x0, xd0);
        let x1 = x0 + dt * xd0;
        let mut v1: Vec<f64> = (0..v0.len()).map(|i| v0[i] + dt * fv0[i]).collect();
        let mut u1: Vec<f64> = (0..v0.len()).map(|i| u0[i] + dt * fu0[i]).collect();
        let comp1 = self.composite_at(t1, x1);
        self.pin(&mut v1, &mut u1, &comp1);
        self.check(&v1, t1)?;
        self.state.v = v1;
        self.state.u = u1;
        self.solve_poisson(&comp1)?;

        let (fv1, fu1) = rhs(&self.state.v, &self.state.u, &self.state.phi, dx, fs, hooks).map_err(abort)?;
        let xd1 = self.xdot(&self.state.v, &comp1);
        let rate1 = self.mass_rate(&self.state.v, &self.state.u, &comp1, x1, xd1);
        let x2 = x0 + 0.5 * dt * (xd0 + xd1);
        let mut v2: Vec<f64> = (0..v0.len()).map(|i| v0[i] + 0.5 * dt * (fv0[i] + fv1[i])).collect();
        let mut u2: Vec<f64> = (0..v0.len()).map(|i| u0[i] + 0.5 * dt * (fu0[i] + fu1[i])).collect();
        let comp2 = self.composite_at(t1, x2);
        self.pin(&mut v2, &mut u2, &comp2);
        let vmin = self.check(&v2, t1)?;
        self.state.v = v2;
        self.state.u = u2;
        self.solve_poisson(&comp2)?;

        self.state.t = t1;
        self.state.x_shift = x2;
        self.state.dt_last = dt;
        self.composite = comp2;
        self.mass.predicted += 0.5 * dt * (rate0 + rate1);
        self.min_v = self.min_v.min(vmin);
        self.steps += 1;
        Ok(())
    }

    /// Advances to exactly `t_target`, shortening the last step.
    pub fn advance_to(&mut self, t_target: f64) -> Result<()> {
        while self.state.t < t_target {
            let remaining = t_target - self.state.t;
            let dt = self.cfl_dt();
            // avoid a sliver step at the end
            let dt = if remaining <= dt * (1.0 + 1e-9) { remaining } else { dt };
            self.step(dt)?;
            if t_target - self.state.t < 1e-12 * t_target.abs().max(1.0) {
                self.state.t = t_target;
            }
        }
        Ok(())
    }

    /// Accumulated `|∫ṽ(t) - ∫ṽ(0) - ∫ rate dt|`.
    pub fn mass_balance_residual(&self) -> f64 {
        (self.mass_integral(&self.composite) - self.mass.initial - self.mass.predicted).abs()
    }

    pub fn perturbation(&self) -> Perturbation {
        Perturbation::new(&self.state.v, &self.state.u, &self.state.phi, &self.composite, self.state.grid.dx)
    }

    pub fn report(&self) -> EnergyReport {
        let dx = self.state.grid.dx;
        let pert = self.perturbation();
        EnergyReport {
            t: self.state.t,
            x: self.state.x_shift,
            xdot: self.current_xdot(),
            norms: norms(&pert, dx),
            eta_weighted: weighted_eta(&self.state.v, &pert, &self.composite, &self.shift, dx),
            good: good_terms(&self.state.v, &pert, &self.composite, &self.shift, dx),
            mass_balance_residual: self.mass_balance_residual(),
        }
    }

    /// Rows `(ξ, v, u, φ, v̄, ū, φ̄)`.
    pub fn snapshot_rows(&self) -> Vec<[f64; 7]> {
        let pos = self.positions(self.state.t);
        (0..pos.len())
            .map(|i| {
                let c = &self.composite[i];
                [pos[i], self.state.v[i], self.state.u[i], self.state.phi[i], c.v, c.u, c.phi]
            })
            .collect()
    }

    /// `sup |v - v̄^S(ξ - X)|`, meaningful for shock-only fans.
    pub fn profile_deviation(&self) -> f64 {
        let pos = self.positions(self.state.t);
        pos.iter()
            .zip(&self.state.v)
            .map(|(&xi, v)| (v - self.wave.profile.eval(xi - self.state.x_shift).v).abs())
            .fold(0.0, f64::max)
    }
}

/// Output of [`run`].
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub steps: usize,
    pub min_v: f64,
    pub max_abs_xdot: f64,
    pub final_t: f64,
    pub final_x: f64,
    pub poisson_iterations: usize,
}

/// Advances to `t_final`, calling `on_report` at `t = 0, Δ, 2Δ, …, t_final`
/// and `on_snapshot` at each requested snapshot time.
pub fn run(
    sim: &mut Simulation,
    t_final: f64,
    report_interval: f64,
    snapshots: &[f64],
    mut on_report: impl FnMut(&Simulation, &EnergyReport) -> Result<()>,
    mut on_snapshot: impl FnMut(&Simulation) -> Result<()>,
) -> Result<RunSummary> {
    if !(report_interval > 0.0) {
        return Err(WaveError::config("report_interval", "must be positive"));
    }
    let mut marks: Vec<(f64, bool, bool)> = vec![];
    let count = (t_final / report_interval + 1e-9).floor() as usize;
    for k in 0..=count {
        marks.push((k as f64 * report_interval, true, false));
    }
    if (count as f64 * report_interval - t_final).abs() > 1e-9 * t_final.max(1.0) {
        marks.push((t_final, true, false));
    }
    for &s in snapshots.iter().filter(|s| **s >= 0.0 && **s <= t_final) {
        marks.push((s, false, true));
    }
    marks.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut max_xdot: f64 = 0.0;
    for (t, report, snap) in marks {
        sim.advance_to(t)?;
        if report {
            let r = sim.report();
            max_xdot = max_xdot.max(r.xdot.abs());
            on_report(sim, &r)?;
        }
        if snap {
            on_snapshot(sim)?;
        }
    }
    Ok(RunSummary {
        steps: sim.steps,
        min_v: sim.min_v,
        max_abs_xdot: max_xdot,
        final_t: sim.state.t,
        final_x: sim.state.x_shift,
        poisson_iterations: sim.poisson_iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::max_abs;
    use crate::shock_profile::{solve_profile, ProfileOptions};
    use crate::thermo::RiemannFan;

    fn wave(v_minus: f64, v_mid: f64, v_plus: f64) -> CompositeWave {
        let fan = RiemannFan::from_mid(v_minus, 0.0, v_mid, v_plus).unwrap();
        CompositeWave::new(fan, solve_profile(&fan, &ProfileOptions::default()).unwrap())
    }

    fn small(hl: f64) -> SimSettings {
        SimSettings { half_length: hl, dxi: 0.1, ..Default::default() }
    }

    #[test]
    fn constant_state_is_steady() {
        let n = 50;
        let v = vec![1.2; n];
        let u = vec![0.3; n];
        let phi = vec![-(1.2f64).ln(); n];
        let (vt, ut) = rhs(&v, &u, &phi, 0.1, 1.2, Hooks::default()).unwrap();
        assert!(max_abs(&vt) < 1e-13 && max_abs(&ut) < 1e-13);
    }

    #[test]
    fn profile_is_nearly_steady() {
        let w = wave(1.1, 1.1, 1.2);
        let sim = Simulation::new(w, small(120.0), InitialPerturbation::default()).unwrap();
        let (vt, ut) =
            rhs(&sim.state.v, &sim.state.u, &sim.state.phi, sim.state.grid.dx, sim.wave.sigma(), Hooks::default()).unwrap();
        let r = max_abs(&vt).max(max_abs(&ut));
        assert!(r < 1e-5, "{r}");
    }

    #[test]
    fn advection_hook_translates_at_minus_sigma() {
        let dx = 0.02;
        let g = UniformGrid::symmetric(20.0, dx).unwrap();
        let xs = g.points();
        let s = 1.2;
        let mut v: Vec<f64> = xs.iter().map(|x| 1.0 + 0.1 * (-x * x).exp()).collect();
        let u = vec![0.0; xs.len()];
        let phi = vec![0.0; xs.len()];
        let hooks = Hooks { pressure: false, viscosity: false, electric: false };
        let dt = 0.005;
        for _ in 0..200 {
            let (f0, _) = rhs(&v, &u, &phi, dx, s, hooks).unwrap();
            let v1: Vec<f64> = (0..v.len()).map(|i| v[i] + dt * f0[i]).collect();
            let (f1, _) = rhs(&v1, &u, &phi, dx, s, hooks).unwrap();
            v = (0..v.len()).map(|i| v[i] + 0.5 * dt * (f0[i] + f1[i])).collect();
        }
        let t = 1.0;
        let err = xs.iter().zip(&v).map(|(x, v)| (v - 1.0 - 0.1 * (-(x + s * t).powi(2)).exp()).abs()).fold(0.0, f64::max);
        assert!(err < 1e-3, "{err}");
    }

    #[test]
    fn unperturbed_shock_keeps_shift_small() {
        let w = wave(1.1, 1.1, 1.2);
        let mut sim = Simulation::new(w, small(120.0), InitialPerturbation::default()).unwrap();
        assert!(sim.current_xdot().abs() < 1e-6);
        for _ in 0..200 {
            let dt = sim.cfl_dt();
            sim.step(dt).unwrap();
        }
        assert!(sim.profile_deviation() < 5.0 * 0.01);
        assert!(sim.state.x_shift.abs() < 1e-5, "{}", sim.state.x_shift);
    }

    #[test]
    fn initial_mass_matches_gaussian_integral() {
        let w = wave(1.0, 1.1, 1.2);
        let pert = InitialPerturbation { a_v: 0.01, xi0_v: 3.0, w_v: 2.0, ..Default::default() };
        let sim = Simulation::new(w, small(80.0), pert).unwrap();
        let expected = 0.01 * 2.0 * (2.0 * std::f64::consts::PI).sqrt();
        assert!((sim.mass.initial - expected).abs() < 1e-10);
        let zero = Simulation::new(wave(1.0, 1.1, 1.2), small(80.0), InitialPerturbation::default()).unwrap();
        assert_eq!(zero.perturbation().v.iter().fold(0.0f64, |a, b| a.max(b.abs())), 0.0);
    }

    #[test]
    fn rejects_nonpositive_initial_volume() {
        let pert = InitialPerturbation { a_v: -5.0, w_v: 1.0, ..Default::default() };
        let err = Simulation::new(wave(1.0, 1.1, 1.2), small(50.0), pert).err().unwrap();
        assert!(err.is_config_error());
    }

    #[test]
    fn second_order_in_time() {
        let run_with = |dt: f64| {
            let settings = SimSettings { fixed_dt: Some(dt), ..small(40.0) };
            let mut sim = Simulation::new(wave(1.0, 1.1, 1.2), settings, InitialPerturbation::gaussian(0.01, 2.0)).unwrap();
            sim.advance_to(0.02).unwrap();
            sim.state.v
        };
        let reference = run_with(0.02 / 64.0);
        let e = |dt: f64| {
            let v = run_with(dt);
            v.iter().zip(&reference).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
        };
        let (e1, e2) = (e(0.02 / 4.0), e(0.02 / 8.0));
        let order = (e1 / e2).log2();
        assert!((order - 2.0).abs() < 0.3, "{e1} {e2} {order}");
    }

    #[test]
    fn moving_and_static_frames_agree() {
        let t_end = 0.5;
        let pert = InitialPerturbation::gaussian(0.01, 2.0);
        let mut moving = Simulation::new(wave(1.0, 1.1, 1.2), small(60.0), pert).unwrap();
        let settings = SimSettings { frame: Frame::Static, ..small(60.0) };
        let mut fixed = Simulation::new(wave(1.0, 1.1, 1.2), settings, pert).unwrap();
        moving.advance_to(t_end).unwrap();
        fixed.advance_to(t_end).unwrap();
        // lab x = ξ + σt; compare on the static grid nodes
        let s = moving.wave.sigma();
        let dx = moving.state.grid.dx;
        let mut worst: f64 = 0.0;
        for (i, &x) in fixed.xs.iter().enumerate() {
            let xi = x - s * t_end;
            if xi.abs() > 40.0 {
                continue;
            }
            let k = ((xi + 60.0) / dx).floor() as usize;
            let th = (xi + 60.0) / dx - k as f64;
            let vm = (1.0 - th) * moving.state.v[k] + th * moving.state.v[k + 1];
            worst = worst.max((vm - fixed.state.v[i]).abs());
        }
        assert!(worst < 1e-3, "{worst}");
    }

    #[test]
    fn deterministic() {
        let go = || {
            let mut sim = Simulation::new(wave(1.0, 1.1, 1.2), small(40.0), InitialPerturbation::gaussian(0.01, 2.0)).unwrap();
            sim.advance_to(0.1).unwrap();
            sim.report().csv_row()
        };
        assert_eq!(go(), go());
    }
}
