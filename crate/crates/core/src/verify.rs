//! Bundled verification suites behind `nsp-wavelab verify`.
//!
//! Each suite is a list of named checks with a measured value and a bound.
//! Suites are independent and run on up to `NSP_WAVELAB_THREADS` worker
//! threads; results are reported in suite order regardless of scheduling.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::Serialize;

use crate::composite::CompositeWave;
use crate::config::VerifyProfile;
use crate::error::{Result, WaveError};
use crate::evolve::{run, InitialPerturbation, SimSettings, Simulation};
use crate::functionals::{eta_equivalence, relative_q, ETA_EQUIVALENCE_BOUNDS};
use crate::poisson::{manufactured_convergence, solve_phi, PoissonProblem};
use crate::rarefaction::{verify_decay, RarefactionField};
use crate::shift::{shift_constant, shift_constant_sound_speed_form, shift_rhs, ShiftState};
use crate::shock_profile::{solve_profile, unreduced_residual, verify_tail, ProfileOptions, PROFILE_NOISE};
use crate::thermo::{gamma_membership, lambda2, rh_residuals, solve_riemann, RiemannFan};

pub const THREADS_ENV: &str = "NSP_WAVELAB_THREADS";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// Human-readable acceptance bound, e.g. `< 1e-8`.
    pub bound: String,
    pub pass: bool,
}

impl Check {
    fn below(name: &str, value: f64, limit: f64) -> Self {
        Check { name: name.into(), value, bound: format!("< {limit:e}"), pass: value < limit }
    }

    fn within(name: &str, value: f64, lo: f64, hi: f64) -> Self {
        Check { name: name.into(), value, bound: format!("in [{lo}, {hi}]"), pass: value >= lo && value <= hi }
    }

    fn flag(name: &str, ok: bool) -> Self {
        Check { name: name.into(), value: if ok { 1.0 } else { 0.0 }, bound: "== 1".into(), pass: ok }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteOutcome {
    pub suite: &'static str,
    pub checks: Vec<Check>,
    /// Set when the suite itself failed to run.
    pub error: Option<String>,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.checks.iter().all(|c| c.pass)
    }
}

pub type SuiteFn = fn(VerifyProfile, u64) -> Result<Vec<Check>>;

/// All suites in reporting order.
pub fn suites() -> Vec<(&'static str, SuiteFn)> {
    vec![
        ("thermo", thermo_suite as SuiteFn),
        ("rarefaction", rarefaction_suite),
        ("shock_profile", profile_suite),
        ("poisson", poisson_suite),
        ("shift", shift_suite),
        ("functionals", functionals_suite),
        ("evolve", evolve_suite),
    ]
}

/// Worker count from `NSP_WAVELAB_THREADS` (default 1).
pub fn thread_cap() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(1),
        Ok(s) => s
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|n| *n >= 1)
            .ok_or_else(|| WaveError::config(THREADS_ENV, format!("expected a positive integer, got `{s}`"))),
    }
}

/// Runs every suite on at most `threads` workers. `on_done` is called from
/// the worker that finished the suite; the returned outcomes are in suite
/// order.
pub fn run_suites(profile: VerifyProfile, seed: u64, threads: usize, on_done: impl Fn(&SuiteOutcome) + Sync) -> Vec<SuiteOutcome> {
    let list = suites();
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<SuiteOutcome>>> = Mutex::new(vec![None; list.len()]);
    let workers = threads.clamp(1, list.len());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::SeqCst);
                let Some(&(name, f)) = list.get(k) else { break };
                let outcome = match f(profile, seed) {
                    Ok(checks) => SuiteOutcome { suite: name, checks, error: None },
                    Err(e) => SuiteOutcome { suite: name, checks: vec![], error: Some(e.to_string()) },
                };
                on_done(&outcome);
                slots.lock().expect("suite slot lock")[k] = Some(outcome);
            });
        }
    });
    slots.into_inner().expect("suite slot lock").into_iter().map(|o| o.expect("every suite ran")).collect()
}

fn reference_fan() -> Result<RiemannFan> {
    RiemannFan::from_mid(1.0, 0.0, 1.1, 1.2)
}

fn reference_wave() -> Result<CompositeWave> {
    let fan = reference_fan()?;
    Ok(CompositeWave::new(fan, solve_profile(&fan, &ProfileOptions::default())?))
}

fn thermo_suite(_: VerifyProfile, _: u64) -> Result<Vec<Check>> {
    let exact = reference_fan()?;
    let fan = solve_riemann(1.0, 0.0, 1.2, exact.u_plus, 1e-12)?;
    let (r1, r2) = rh_residuals(fan.v_mid, fan.u_mid, fan.v_plus, fan.u_plus, fan.sigma);
    let lax = lambda2(fan.v_plus) < fan.sigma && fan.sigma < lambda2(fan.v_mid);
    let mut checks = vec![
        Check::below("riemann_v_mid_error", (fan.v_mid - 1.1).abs(), 1e-8),
        Check::below("riemann_sigma_error", (fan.sigma - 1.230914909793327).abs(), 1e-9),
        Check::below("rankine_hugoniot_residual", r1.abs().max(r2.abs()), 1e-12),
        Check::flag("lax_strict", lax),
        Check::flag("gamma_rejects_compression", !gamma_membership(1.0, 0.0, 0.9, 0.0, f64::INFINITY).inside),
    ];
    let mut worst: f64 = 0.0;
    for (vm, vp) in [(1.05, 1.3), (1.5, 1.6), (1.0, 1.4), (1.4, 1.4)] {
        let f = RiemannFan::from_mid(1.0, 0.0, vm, vp)?;
        let g = solve_riemann(1.0, 0.0, vp, f.u_plus, 1e-13)?;
        worst = worst.max((g.v_mid - vm).abs());
    }
    checks.push(Check::below("round_trip_v_mid", worst, 1e-9));
    Ok(checks)
}

fn rarefaction_suite(_: VerifyProfile, _: u64) -> Result<Vec<Check>> {
    // a fan wide enough that the Burgers smoothing width is negligible at t = 10
    let wide = RarefactionField::new(RiemannFan::from_mid(0.2, 0.0, 0.4, 0.5)?);
    let sup = verify_decay(&wide, &[10.0, 100.0], f64::INFINITY)?;
    let ratio = sup.samples[0].first_v / sup.samples[1].first_v;
    let target = 101.0 / 11.0;
    let field = RarefactionField::new(reference_fan()?);
    let l1 = verify_decay(&field, &[0.0, 10.0, 50.0, 100.0], 1.0)?;
    let tv = field.fan.delta_r;
    let tv_dev = l1.samples.iter().map(|s| (s.first_v / tv - 1.0).abs()).fold(0.0, f64::max);
    Ok(vec![
        Check::within("sup_vx_ratio_10_100", ratio, 0.7 * target, 1.3 * target),
        Check::below("l1_vx_relative_drift", tv_dev, 0.01),
        Check::below("second_derivative_constant", l1.second_constant, 10.0),
        Check::below("tail_constant", sup.tail_constant.max(l1.tail_constant), 10.0),
    ])
}

fn profile_suite(profile: VerifyProfile, _: u64) -> Result<Vec<Check>> {
    let fan = reference_fan()?;
    let p = solve_profile(&fan, &ProfileOptions::default())?;
    let r = unreduced_residual(&p);
    let monotone = p.v.windows(2).all(|w| w[1] - w[0] > -PROFILE_NOISE);
    let tails = verify_tail(&p);
    let r2 = |t: &Option<crate::shock_profile::TailFit>| t.as_ref().map_or(0.0, |f| f.r_squared);
    let mut checks = vec![
        Check::below("unreduced_residual", r.iter().copied().fold(0.0, f64::max), 1e-7),
        Check::flag("v_increasing", monotone),
        Check::below("anchor_error", tails.anchor_error, 1e-8),
        Check::within("left_tail_r2", r2(&tails.left), 0.99, 1.0),
        Check::within("right_tail_r2", r2(&tails.right), 0.99, 1.0),
    ];
    if profile == VerifyProfile::Full {
        let mut ratios = vec![];
        for ds in [0.05, 0.1, 0.2] {
            let f = RiemannFan::from_mid(1.1, 0.0, 1.1, 1.1 + ds)?;
            ratios.push(verify_tail(&solve_profile(&f, &ProfileOptions::default())?).slope_ratio);
        }
        let hi = ratios.iter().copied().fold(0.0, f64::max);
        let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        checks.push(Check::below("slope_scaling_spread", hi / lo, 3.0));
    }
    Ok(checks)
}

fn poisson_suite(profile: VerifyProfile, _: u64) -> Result<Vec<Check>> {
    let levels = if profile == VerifyProfile::Full { 5 } else { 4 };
    let rows = manufactured_convergence(0.1, levels)?;
    let order = rows.last().map_or(f64::NAN, |r| r.observed_order);
    let v = vec![1.0; 201];
    let flat = solve_phi(&PoissonProblem::new(0.05, &v, 0.0, 0.0), &vec![0.3; 201])?;
    let monotone = flat.residual_history.windows(2).all(|w| w[1] <= w[0]);
    Ok(vec![
        Check::within("manufactured_order", order, 1.8, 2.2),
        Check::below("unit_volume_potential", flat.phi.iter().fold(0.0f64, |m, x| m.max(x.abs())), 1e-14),
        Check::flag("newton_residual_monotone", monotone),
    ])
}

fn shift_suite(_: VerifyProfile, _: u64) -> Result<Vec<Check>> {
    let wave = reference_wave()?;
    let s = ShiftState::new(&wave.fan, 1.0);
    let grid = crate::numerics::UniformGrid::symmetric(100.0, 0.05)?;
    let comp = wave.sample(0.0, 0.0, &grid.points());
    let v: Vec<f64> = comp.iter().map(|c| c.v).collect();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for c in &comp {
        let a = s.weight(c.shock.v);
        lo = lo.min(a);
        hi = hi.max(a);
    }
    Ok(vec![
        Check::below("constant_forms_agree", (shift_constant(1.1, 1.0) - shift_constant_sound_speed_form(1.1, 1.0)).abs(), 1e-14),
        Check::within("weight_min", lo, 1.0, 1.0 + 1e-5),
        Check::within("weight_max", hi, 1.0, s.weight_bound()),
        Check::below("zero_perturbation_rate", shift_rhs(&s, &v, &comp, grid.dx).abs(), 1e-300),
    ])
}

fn functionals_suite(profile: VerifyProfile, seed: u64) -> Result<Vec<Check>> {
    let wave = reference_wave()?;
    let samples = if profile == VerifyProfile::Full { 100 } else { 20 };
    let study = eta_equivalence(&wave, samples, 1e-2, seed)?;
    let (c, cap) = ETA_EQUIVALENCE_BOUNDS;
    let mut q_min = f64::INFINITY;
    for k in 1..200 {
        let v = 0.05 * k as f64;
        q_min = q_min.min(relative_q(v, 1.3)?);
    }
    Ok(vec![
        Check::within("eta_ratio_min", study.min_ratio, c, cap),
        Check::within("eta_ratio_max", study.max_ratio, c, cap),
        Check::within("relative_q_min", q_min, 0.0, f64::INFINITY),
    ])
}

fn evolve_suite(profile: VerifyProfile, _: u64) -> Result<Vec<Check>> {
    let smoke = || -> Result<(usize, f64, Vec<String>)> {
        let settings = SimSettings { half_length: 40.0, dxi: 0.1, ..Default::default() };
        let mut sim = Simulation::new(reference_wave()?, settings, InitialPerturbation::gaussian(0.01, 2.0))?;
        let mut rows = vec![];
        let summary = run(&mut sim, 1.0, 0.5, &[], |_, r| {
            rows.push(r.csv_row());
            Ok(())
        }, |_| Ok(()))?;
        Ok((rows.len(), summary.min_v, rows))
    };
    let (count, min_v, a) = smoke()?;
    let (_, _, b) = smoke()?;
    let mut checks = vec![
        Check::within("smoke_reports", count as f64, 2.0, f64::INFINITY),
        Check::within("smoke_min_v", min_v, f64::MIN_POSITIVE, f64::INFINITY),
        Check::flag("smoke_deterministic", a == b),
    ];
    if profile == VerifyProfile::Full {
        let fan = RiemannFan::from_mid(1.1, 0.0, 1.1, 1.2)?;
        let wave = CompositeWave::new(fan, solve_profile(&fan, &ProfileOptions::default())?);
        let settings = SimSettings::default();
        let dxi = settings.dxi;
        let mut sim = Simulation::new(wave, settings, InitialPerturbation::default())?;
        sim.advance_to(10.0)?;
        checks.push(Check::below("steady_profile_deviation", sim.profile_deviation(), 5.0 * dxi * dxi));
        checks.push(Check::below("steady_profile_shift", sim.state.x_shift.abs(), 1e-6));
    }
    Ok(checks)
}
