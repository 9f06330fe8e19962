//! Command-line front end: argument parsing, subcommand dispatch and output
//! files. Exit codes: 0 success, 1 numerical failure, 2 configuration error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::composite::CompositeWave;
use crate::config::{parse_override, RunConfig};
use crate::error::{Result, WaveError};
use crate::evolve::{run, Simulation};
use crate::functionals::EnergyReport;
use crate::output::{csv_document, csv_line, ensure_dir, fmt_f, grid_description, metadata, write_atomic};
use crate::poisson::manufactured_convergence;
use crate::rarefaction::RarefactionField;
use crate::shock_profile::{solve_profile, unreduced_residual, verify_tail, ProfileOptions, PROFILE_NOISE};
use crate::thermo::{solve_riemann, RiemannFan};
use crate::verify::{run_suites, thread_cap, SuiteOutcome};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NUMERICAL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

pub const RAREFACTION_HEADER: &str = "x,v,u,phi,vx,ux";
pub const PROFILE_HEADER: &str = "xi,v,u,phi,h,vp,up,phip";
pub const POISSON_HEADER: &str = "dxi,error,observed_order";
pub const SNAPSHOT_HEADER: &str = "xi,v,u,phi,vbar,ubar,phibar";
const RIEMANN_HEADER: &str = "v_minus,u_minus,v_mid,u_mid,v_plus,u_plus,sigma,delta_R,delta_S,phi_minus,phi_mid,phi_plus";

#[derive(Debug, Parser)]
#[command(name = "nsp-wavelab", version, about = "Composite rarefaction/shock waves of the 1D Navier–Stokes–Poisson system")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one config key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EndStates {
    #[arg(long, allow_negative_numbers = true)]
    v_minus: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    u_minus: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    v_plus: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    u_plus: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ProfileArg {
    Quick,
    Full,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the Riemann problem for the rarefaction/shock fan.
    Riemann {
        #[command(flatten)]
        states: EndStates,
        #[command(flatten)]
        common: Common,
    },
    /// Sample the smooth approximate rarefaction at one time.
    Rarefaction {
        #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
        t: f64,
        #[arg(long, default_value_t = 401)]
        samples: usize,
        #[command(flatten)]
        states: EndStates,
        #[command(flatten)]
        common: Common,
    },
    /// Compute the shock profile and its verification report.
    Profile {
        #[command(flatten)]
        states: EndStates,
        #[command(flatten)]
        common: Common,
    },
    /// Manufactured-solution convergence study of the Poisson solver.
    PoissonTest {
        #[arg(long, default_value_t = 0.1)]
        dxi: f64,
        #[arg(long, default_value_t = 4)]
        levels: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Evolve a perturbed composite wave.
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    /// Run the bundled verification suites.
    Verify {
        #[arg(long, value_enum)]
        verify_profile: Option<ProfileArg>,
        #[command(flatten)]
        common: Common,
    },
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_NUMERICAL,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config_error() {
                EXIT_CONFIG
            } else {
                EXIT_NUMERICAL
            }
        }
    }
}

fn resolve(common: &Common, states: Option<&EndStates>, extra: &[(&str, String)]) -> Result<RunConfig> {
    let mut overrides = common.set.iter().map(|s| parse_override(s)).collect::<Result<Vec<_>>>()?;
    if let Some(s) = states {
        for (k, v) in [("v_minus", s.v_minus), ("u_minus", s.u_minus), ("v_plus", s.v_plus), ("u_plus", s.u_plus)] {
            if let Some(v) = v {
                overrides.push((k.to_string(), format!("{v:e}")));
            }
        }
    }
    for (k, v) in extra {
        overrides.push((k.to_string(), v.clone()));
    }
    if let Some(dir) = &common.output_dir {
        overrides.push(("output_dir".into(), dir.display().to_string()));
    }
    RunConfig::resolve(common.config.as_deref(), &overrides)
}

fn fan_of(cfg: &RunConfig) -> Result<RiemannFan> {
    solve_riemann(cfg.v_minus, cfg.u_minus, cfg.v_plus, cfg.u_plus, 1e-13)
}

fn dispatch(command: Command) -> Result<bool> {
    match command {
        Command::Riemann { states, common } => riemann(&resolve(&common, Some(&states), &[])?),
        Command::Rarefaction { t, samples, states, common } => {
            let cfg = resolve(&common, Some(&states), &[])?;
            if !(t >= 0.0 && t.is_finite()) {
                return Err(WaveError::config("--t", format!("must be a nonnegative time, got {t}")));
            }
            if samples < 2 {
                return Err(WaveError::config("--samples", "need at least two samples"));
            }
            rarefaction(&cfg, t, samples)
        }
        Command::Profile { states, common } => profile(&resolve(&common, Some(&states), &[])?),
        Command::PoissonTest { dxi, levels, common } => {
            let cfg = resolve(&common, None, &[])?;
            if !(dxi > 0.0 && dxi <= 0.5) {
                return Err(WaveError::config("--dxi", format!("must lie in (0, 0.5], got {dxi}")));
            }
            if !(2..=8).contains(&levels) {
                return Err(WaveError::config("--levels", format!("must lie in 2..=8, got {levels}")));
            }
            poisson_test(&cfg, dxi, levels)
        }
        Command::Simulate { common } => simulate(&resolve(&common, None, &[])?),
        Command::Verify { verify_profile, common } => {
            let extra: Vec<(&str, String)> = match verify_profile {
                Some(ProfileArg::Quick) => vec![("verify_profile", "quick".into())],
                Some(ProfileArg::Full) => vec![("verify_profile", "full".into())],
                None => vec![],
            };
            let cfg = resolve(&common, None, &extra)?;
            verify(&cfg, thread_cap()?)
        }
    }
}

fn riemann(cfg: &RunConfig) -> Result<bool> {
    let fan = fan_of(cfg)?;
    let listing: String = fan.to_key_values().iter().map(|(k, v)| format!("{k}={}\n", fmt_f(*v))).collect();
    let row = csv_line(&fan.to_key_values().iter().map(|kv| kv.1).collect::<Vec<_>>());
    print!("{listing}");
    println!("{RIEMANN_HEADER}");
    println!("{row}");
    let meta = metadata(cfg, "none", "# ");
    let dir = &cfg.output_dir;
    write_atomic(&dir.join("riemann.txt"), &format!("{meta}{listing}"))?;
    write_atomic(&dir.join("riemann.csv"), &csv_document(&meta, RIEMANN_HEADER, [row]))?;
    Ok(true)
}

fn rarefaction(cfg: &RunConfig, t: f64, samples: usize) -> Result<bool> {
    let fan = fan_of(cfg)?;
    let field = RarefactionField::new(fan);
    let (a, b) = field.window(t, 10.0);
    let dx = (b - a) / (samples - 1) as f64;
    let rows = (0..samples).map(|i| {
        let x = a + i as f64 * dx;
        let j = field.jet(t, x);
        csv_line(&[x, j.v, j.u, j.phi, j.v_x, j.u_x])
    });
    let grid = format!("uniform x in [{}, {}], dx = {}, n = {samples}, t = {}", fmt_f(a), fmt_f(b), fmt_f(dx), fmt_f(t));
    let path = cfg.output_dir.join("rarefaction.csv");
    write_atomic(&path, &csv_document(&metadata(cfg, &grid, "# "), RAREFACTION_HEADER, rows))?;
    println!("{}", path.display());
    Ok(true)
}

#[derive(Serialize)]
struct ReportLine<'a> {
    check: &'a str,
    value: f64,
    bound: &'a str,
    pass: bool,
}

fn profile(cfg: &RunConfig) -> Result<bool> {
    let fan = fan_of(cfg)?;
    let p = solve_profile(&fan, &ProfileOptions::default())?;
    let rows = (0..p.grid.n).map(|i| csv_line(&[p.grid.x(i), p.v[i], p.u[i], p.phi[i], p.h[i], p.v_p[i], p.u_p[i], p.phi_p[i]]));
    let grid = grid_description(&p.grid);
    let dir = &cfg.output_dir;
    write_atomic(&dir.join("profile.csv"), &csv_document(&metadata(cfg, &grid, "# "), PROFILE_HEADER, rows))?;

    let residual = unreduced_residual(&p).iter().copied().fold(0.0, f64::max);
    let monotone = p.v.windows(2).all(|w| w[1] - w[0] > -PROFILE_NOISE);
    let tails = verify_tail(&p);
    let r2 = |t: &Option<crate::shock_profile::TailFit>| t.as_ref().map_or(if p.is_constant() { 1.0 } else { 0.0 }, |f| f.r_squared);
    let checks = [
        ReportLine { check: "unreduced_residual", value: residual, bound: "< 1e-7", pass: residual < 1e-7 },
        ReportLine { check: "v_increasing", value: monotone as u8 as f64, bound: "== 1", pass: monotone },
        ReportLine { check: "anchor_error", value: tails.anchor_error, bound: "< 1e-8", pass: tails.anchor_error < 1e-8 },
        ReportLine { check: "left_tail_r2", value: r2(&tails.left), bound: "> 0.99", pass: r2(&tails.left) > 0.99 },
        ReportLine { check: "right_tail_r2", value: r2(&tails.right), bound: "> 0.99", pass: r2(&tails.right) > 0.99 },
    ];
    let passed = checks.iter().all(|c| c.pass);
    let mut lines = vec![json!({
        "kind": "metadata",
        "version": crate::output::VERSION,
        "config": cfg.echo(),
        "c0": cfg.c0,
        "grid": grid,
    })
    .to_string()];
    for c in &checks {
        lines.push(serde_json::to_string(c).map_err(|e| WaveError::Io(e.to_string()))?);
    }
    lines.push(json!({ "kind": "tails", "report": tails }).to_string());
    lines.push(json!({ "kind": "summary", "pass": passed, "newton_iterations": p.newton_iterations }).to_string());
    let text = lines.join("\n") + "\n";
    write_atomic(&dir.join("profile_report.jsonl"), &text)?;
    print!("{text}");
    Ok(passed)
}

fn poisson_test(cfg: &RunConfig, dxi: f64, levels: usize) -> Result<bool> {
    let rows = manufactured_convergence(dxi, levels)?;
    let grid = format!("manufactured problem on [0, 3], dxi0 = {}, levels = {levels}", fmt_f(dxi));
    let text = csv_document(
        &metadata(cfg, &grid, "# "),
        POISSON_HEADER,
        rows.iter().map(|r| csv_line(&[r.dxi, r.error, r.observed_order])),
    );
    write_atomic(&cfg.output_dir.join("poisson_convergence.csv"), &text)?;
    print!("{}", text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect::<String>());
    let order = rows.last().map_or(f64::NAN, |r| r.observed_order);
    Ok((order - 2.0).abs() <= 0.2)
}

fn snapshot_name(t: f64) -> String {
    format!("snapshot_{t}.csv")
}

fn simulate(cfg: &RunConfig) -> Result<bool> {
    let fan = fan_of(cfg)?;
    let wave = CompositeWave::new(fan, solve_profile(&fan, &ProfileOptions::default())?);
    let mut sim = Simulation::new(wave, cfg.settings(), cfg.perturbation())?;
    let dir = cfg.output_dir.clone();
    ensure_dir(&dir)?;
    let meta = metadata(cfg, &grid_description(&sim.state.grid), "# ");
    let mut rows: Vec<String> = vec![];
    let result = run(
        &mut sim,
        cfg.t_final,
        cfg.report_interval,
        &cfg.snapshots,
        |_, r: &EnergyReport| {
            rows.push(r.csv_row());
            Ok(())
        },
        |s: &Simulation| {
            let text = csv_document(&meta, SNAPSHOT_HEADER, s.snapshot_rows().iter().map(|r| csv_line(r)));
            write_atomic(&dir.join(snapshot_name(s.state.t)), &text)
        },
    );
    // the report is complete up to the last successful step even on abort
    write_atomic(&dir.join("report.csv"), &csv_document(&meta, EnergyReport::HEADER, rows))?;
    let summary = result?;
    println!(
        "steps={} t={} X={} min_v={} max_abs_Xdot={}",
        summary.steps,
        fmt_f(summary.final_t),
        fmt_f(summary.final_x),
        fmt_f(summary.min_v),
        fmt_f(summary.max_abs_xdot)
    );
    Ok(true)
}

fn write_suite(dir: &Path, meta: &str, outcome: &SuiteOutcome) -> Result<()> {
    let mut text = String::new();
    for line in meta.lines() {
        text.push_str(&json!({ "kind": "metadata", "line": line }).to_string());
        text.push('\n');
    }
    for c in &outcome.checks {
        text.push_str(&serde_json::to_string(c).map_err(|e| WaveError::Io(e.to_string()))?);
        text.push('\n');
    }
    text.push_str(&json!({ "kind": "summary", "pass": outcome.passed(), "error": outcome.error }).to_string());
    text.push('\n');
    write_atomic(&dir.join(outcome.suite).join("checks.jsonl"), &text)
}

fn verify(cfg: &RunConfig, threads: usize) -> Result<bool> {
    let dir = cfg.output_dir.join("verify");
    ensure_dir(&dir)?;
    let meta = metadata(cfg, "per suite", "");
    let write_errors = std::sync::Mutex::new(vec![]);
    let outcomes = run_suites(cfg.verify_profile, cfg.seed, threads, |o| {
        if let Err(e) = write_suite(&dir, &meta, o) {
            write_errors.lock().expect("error list lock").push(e);
        }
    });
    if let Some(e) = write_errors.into_inner().expect("error list lock").into_iter().next() {
        return Err(e);
    }
    let mut rows = vec![];
    for o in &outcomes {
        let failed = o.checks.iter().filter(|c| !c.pass).count();
        println!("{} {} ({} checks, {} failed){}", if o.passed() { "PASS" } else { "FAIL" }, o.suite, o.checks.len(), failed, o.error.as_ref().map(|e| format!(": {e}")).unwrap_or_default());
        rows.push(format!("{},{},{},{}", o.suite, o.checks.len(), failed, o.passed()));
    }
    write_atomic(&dir.join("summary.csv"), &csv_document(&metadata(cfg, "per suite", "# "), "suite,checks,failed,pass", rows))?;
    Ok(outcomes.iter().all(SuiteOutcome::passed))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exit(args: &[&str]) -> i32 {
        main_with_args(std::iter::once("nsp-wavelab").chain(args.iter().copied()))
    }

    #[test]
    fn unknown_subcommand_is_config_error() {
        assert_eq!(exit(&["frobnicate"]), EXIT_CONFIG);
        assert_eq!(exit(&[]), EXIT_CONFIG);
    }

    #[test]
    fn bad_flag_values_are_config_errors() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().to_str().unwrap();
        assert_eq!(exit(&["riemann", "--v-plus", "0.9", "--output-dir", out]), EXIT_CONFIG);
        assert_eq!(exit(&["simulate", "--set", "t_finl=2", "--output-dir", out]), EXIT_CONFIG);
        assert_eq!(exit(&["rarefaction", "--t", "-1", "--output-dir", out]), EXIT_CONFIG);
        assert!(std::fs::read_dir(dir.path()).unwrap().next().is_none());
    }

    #[test]
    fn snapshot_names() {
        assert_eq!(snapshot_name(10.0), "snapshot_10.csv");
        assert_eq!(snapshot_name(2.5), "snapshot_2.5.csv");
    }
}
