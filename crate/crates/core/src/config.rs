//! Flat `key = value` run configuration with `#` comments.
//!
//! Resolution order is defaults, then the file, then command-line overrides.
//! Unknown keys are rejected.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Result, WaveError};
use crate::evolve::{InitialPerturbation, SimSettings};
use crate::thermo::{gamma_membership, RiemannFan};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyProfile {
    Quick,
    Full,
}

impl VerifyProfile {
    pub fn as_str(&self) -> &'static str {
        match self {
            VerifyProfile::Quick => "quick",
            VerifyProfile::Full => "full",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub v_minus: f64,
    pub u_minus: f64,
    pub v_plus: f64,
    pub u_plus: f64,
    pub l_dom: f64,
    pub dxi: f64,
    pub t_final: f64,
    pub report_interval: f64,
    pub a_v: f64,
    pub a_u: f64,
    pub xi0_v: f64,
    pub xi0_u: f64,
    pub w_v: f64,
    pub w_u: f64,
    pub c0: f64,
    pub cfl_h: f64,
    pub cfl_p: f64,
    /// Snapshot times.
    pub snapshots: Vec<f64>,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub verify_profile: VerifyProfile,
}

pub const KEYS: [&str; 21] = [
    "v_minus",
    "u_minus",
    "v_plus",
    "u_plus",
    "L_dom",
    "dxi",
    "t_final",
    "report_interval",
    "A_v",
    "A_u",
    "xi0_v",
    "xi0_u",
    "w_v",
    "w_u",
    "c0",
    "cfl_h",
    "cfl_p",
    "snapshots",
    "seed",
    "output_dir",
    "verify_profile",
];

impl Default for RunConfig {
    fn default() -> Self {
        // the reference fan: v_m = 1.1 between v_- = 1 and v_+ = 1.2
        let u_plus = RiemannFan::from_mid(1.0, 0.0, 1.1, 1.2).map(|f| f.u_plus).unwrap_or(0.0);
        Self {
            v_minus: 1.0,
            u_minus: 0.0,
            v_plus: 1.2,
            u_plus,
            l_dom: 150.0,
            dxi: 0.05,
            t_final: 10.0,
            report_interval: 1.0,
            a_v: 0.01,
            a_u: 0.01,
            xi0_v: 0.0,
            xi0_u: 0.0,
            w_v: 2.0,
            w_u: 2.0,
            c0: 1.0,
            cfl_h: 0.4,
            cfl_p: 0.25,
            snapshots: vec![],
            seed: 0,
            output_dir: PathBuf::from("out"),
            verify_profile: VerifyProfile::Quick,
        }
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    let x: f64 = value.trim().parse().map_err(|_| WaveError::config(key, format!("cannot parse `{value}` as a number")))?;
    if !x.is_finite() {
        return Err(WaveError::config(key, "value must be finite"));
    }
    Ok(x)
}

/// Splits config text into `(key, value)` pairs, preserving order.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = vec![];
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| WaveError::config(format!("line {}", lineno + 1), format!("expected `key = value`, got `{line}`")))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Parses a `key=value` command-line override.
pub fn parse_override(s: &str) -> Result<(String, String)> {
    s.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .ok_or_else(|| WaveError::config(s, "override must look like key=value"))
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "v_minus" => self.v_minus = parse_f64(key, value)?,
            "u_minus" => self.u_minus = parse_f64(key, value)?,
            "v_plus" => self.v_plus = parse_f64(key, value)?,
            "u_plus" => self.u_plus = parse_f64(key, value)?,
            "L_dom" => self.l_dom = parse_f64(key, value)?,
            "dxi" => self.dxi = parse_f64(key, value)?,
            "t_final" => self.t_final = parse_f64(key, value)?,
            "report_interval" => self.report_interval = parse_f64(key, value)?,
            "A_v" => self.a_v = parse_f64(key, value)?,
            "A_u" => self.a_u = parse_f64(key, value)?,
            "xi0_v" => self.xi0_v = parse_f64(key, value)?,
            "xi0_u" => self.xi0_u = parse_f64(key, value)?,
            "w_v" => self.w_v = parse_f64(key, value)?,
            "w_u" => self.w_u = parse_f64(key, value)?,
            "c0" => self.c0 = parse_f64(key, value)?,
            "cfl_h" => self.cfl_h = parse_f64(key, value)?,
            "cfl_p" => self.cfl_p = parse_f64(key, value)?,
            "snapshots" => {
                self.snapshots = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| parse_f64(key, s))
                    .collect::<Result<Vec<_>>>()?;
            }
            "seed" => {
                self.seed = value.trim().parse().map_err(|_| WaveError::config(key, format!("cannot parse `{value}` as an unsigned integer")))?
            }
            "output_dir" => {
                if value.is_empty() {
                    return Err(WaveError::config(key, "must not be empty"));
                }
                self.output_dir = PathBuf::from(value)
            }
            "verify_profile" => {
                self.verify_profile = match value {
                    "quick" => VerifyProfile::Quick,
                    "full" => VerifyProfile::Full,
                    other => return Err(WaveError::config(key, format!("expected `quick` or `full`, got `{other}`"))),
                }
            }
            other => return Err(WaveError::config(other, format!("unknown key; known keys: {}", KEYS.join(", ")))),
        }
        Ok(())
    }

    /// Defaults, then `file`, then `overrides`; validated.
    pub fn resolve(file: Option<&Path>, overrides: &[(String, String)]) -> Result<Self> {
        let mut cfg = RunConfig::default();
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| WaveError::config("--config", format!("cannot read {}: {e}", path.display())))?;
            cfg.apply_text(&text)?;
        }
        for (k, v) in overrides {
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (k, v) in parse_pairs(text)? {
            self.set(&k, &v)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("v_minus", self.v_minus),
            ("v_plus", self.v_plus),
            ("L_dom", self.l_dom),
            ("dxi", self.dxi),
            ("report_interval", self.report_interval),
            ("c0", self.c0),
            ("cfl_h", self.cfl_h),
            ("cfl_p", self.cfl_p),
            ("w_v", self.w_v),
            ("w_u", self.w_u),
        ];
        for (k, x) in positive {
            if !(x > 0.0) {
                return Err(WaveError::config(k, format!("must be positive, got {x}")));
            }
        }
        if self.t_final < 0.0 {
            return Err(WaveError::config("t_final", "must be nonnegative"));
        }
        if self.dxi > self.l_dom / 4.0 {
            return Err(WaveError::config("dxi", "grid spacing too coarse for the domain"));
        }
        if self.cfl_h > 1.0 || self.cfl_p > 0.5 {
            return Err(WaveError::config("cfl_h/cfl_p", "explicit stability needs cfl_h <= 1 and cfl_p <= 0.5"));
        }
        let m = gamma_membership(self.v_minus, self.u_minus, self.v_plus, self.u_plus, f64::INFINITY);
        if !m.inside {
            let need = if self.v_plus > self.v_minus {
                format!("need {} < u+ - u- < {}", m.lower_bound, m.upper_bound)
            } else {
                "need v+ > v-".to_string()
            };
            return Err(WaveError::config(
                "v_plus/u_plus",
                format!("end states outside the rarefaction-shock region Γ ({need}): {}", m.reason.unwrap_or_default()),
            ));
        }
        Ok(())
    }

    pub fn settings(&self) -> SimSettings {
        SimSettings { half_length: self.l_dom, dxi: self.dxi, cfl_h: self.cfl_h, cfl_p: self.cfl_p, c0: self.c0, ..Default::default() }
    }

    pub fn perturbation(&self) -> InitialPerturbation {
        InitialPerturbation { a_v: self.a_v, xi0_v: self.xi0_v, w_v: self.w_v, a_u: self.a_u, xi0_u: self.xi0_u, w_u: self.w_u }
    }

    /// The resolved configuration, one `key = value` per line in key order.
    pub fn echo(&self) -> String {
        let snaps = self.snapshots.iter().map(|s| format!("{s}")).collect::<Vec<_>>().join(", ");
        let values: [String; 21] = [
            format!("{}", self.v_minus),
            format!("{}", self.u_minus),
            format!("{}", self.v_plus),
            format!("{}", self.u_plus),
            format!("{}", self.l_dom),
            format!("{}", self.dxi),
            format!("{}", self.t_final),
            format!("{}", self.report_interval),
            format!("{}", self.a_v),
            format!("{}", self.a_u),
            format!("{}", self.xi0_v),
            format!("{}", self.xi0_u),
            format!("{}", self.w_v),
            format!("{}", self.w_u),
            format!("{}", self.c0),
            format!("{}", self.cfl_h),
            format!("{}", self.cfl_p),
            snaps,
            format!("{}", self.seed),
            self.output_dir.display().to_string(),
            self.verify_profile.as_str().to_string(),
        ];
        let mut out = String::new();
        for (k, v) in KEYS.iter().zip(values) {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let mut c = RunConfig::default();
        c.apply_text("# nothing\n\n").unwrap();
        assert_eq!(c, RunConfig::default());
        c.validate().unwrap();
    }

    #[test]
    fn echo_round_trips() {
        let mut c = RunConfig::default();
        c.set("snapshots", "0, 2.5,10").unwrap();
        c.set("verify_profile", "full").unwrap();
        let mut d = RunConfig::default();
        d.apply_text(&c.echo()).unwrap();
        assert_eq!(c, d);
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("run.cfg");
        std::fs::write(&p, "t_final = 3   # short\nc0 = 2\n").unwrap();
        let c = RunConfig::resolve(Some(&p), &[("c0".into(), "0.5".into())]).unwrap();
        assert_eq!((c.t_final, c.c0), (3.0, 0.5));
    }

    #[test]
    fn unknown_key_is_rejected() {
        let err = RunConfig::default().apply_text("t_finl = 3").unwrap_err();
        assert!(matches!(err, WaveError::Config { ref key, .. } if key == "t_finl"));
    }

    #[test]
    fn bad_values_name_the_key() {
        let err = RunConfig::default().apply_text("dxi = fast").unwrap_err();
        assert!(matches!(err, WaveError::Config { ref key, .. } if key == "dxi"));
        assert!(RunConfig::default().apply_text("no equals sign").is_err());
    }

    #[test]
    fn membership_gate() {
        let mut c = RunConfig::default();
        c.set("v_plus", "0.9").unwrap();
        let err = c.validate().unwrap_err();
        assert!(err.is_config_error());
        assert!(err.to_string().contains("Γ"));
    }
}
