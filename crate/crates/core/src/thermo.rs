//! Pressure laws, characteristic speeds, wave curves and the Riemann fan of
//! the quasi-neutral Euler system.
//!
//! All physical constants are normalized to one, so the ion pressure is
//! `p(v) = 1/v` and the modified pressure (ion pressure plus the
//! quasi-neutral electron contribution) is `p̃(v) = 2/v`.

use std::f64::consts::SQRT_2;

use serde::Serialize;

use crate::error::{Result, WaveError};

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(WaveError::domain(format!("{name} must be positive and finite, got {v}")))
    }
}

/// Ion pressure `p(v) = 1/v`.
#[inline]
pub fn pressure(v: f64) -> f64 {
    1.0 / v
}

/// Modified pressure `p̃(v) = p(v) + 1/v = 2/v`, unchecked.
#[inline]
pub fn p_tilde(v: f64) -> f64 {
    2.0 / v
}

#[inline]
pub fn dp_tilde(v: f64) -> f64 {
    -2.0 / (v * v)
}

#[inline]
pub fn d2p_tilde(v: f64) -> f64 {
    4.0 / (v * v * v)
}

/// Checked modified pressure.
pub fn modified_pressure(v: f64) -> Result<f64> {
    check_positive("v", v)?;
    Ok(p_tilde(v))
}

/// Characteristic speeds `(λ1, λ2) = (-√2/v, √2/v)`.
pub fn eigenvalues(v: f64) -> Result<(f64, f64)> {
    check_positive("v", v)?;
    Ok((lambda1(v), lambda2(v)))
}

#[inline]
pub fn lambda1(v: f64) -> f64 {
    -(-dp_tilde(v)).sqrt()
}

#[inline]
pub fn lambda2(v: f64) -> f64 {
    (-dp_tilde(v)).sqrt()
}

/// Inverse of `λ1` on negative speeds: `v = -√2/w`.
#[inline]
pub fn lambda1_inverse(w: f64) -> f64 {
    -SQRT_2 / w
}

/// Velocity on the 1-rarefaction curve through `(v_left, u_left)`.
pub fn r1_velocity(v_left: f64, u_left: f64, v: f64) -> Result<f64> {
    check_positive("v_left", v_left)?;
    check_positive("v", v)?;
    if v < v_left {
        return Err(WaveError::domain(format!(
            "R1 is defined for v >= v_left ({v} < {v_left})"
        )));
    }
    Ok(u_left + SQRT_2 * (v / v_left).ln())
}

/// Velocity on the 2-rarefaction integral curve through `(v_left, u_left)`.
/// Not part of the Riemann fan; used to check the contact order of S2.
pub fn r2_velocity(v_left: f64, u_left: f64, v: f64) -> Result<f64> {
    check_positive("v_left", v_left)?;
    check_positive("v", v)?;
    Ok(u_left - SQRT_2 * (v / v_left).ln())
}

/// Velocity on the 2-shock curve through `(v_left, u_left)`.
pub fn s2_velocity(v_left: f64, u_left: f64, v: f64) -> Result<f64> {
    check_positive("v_left", v_left)?;
    check_positive("v", v)?;
    if v < v_left {
        return Err(WaveError::domain(format!(
            "S2 is defined for v >= v_left ({v} < {v_left})"
        )));
    }
    Ok(s2_unchecked(v_left, u_left, v))
}

#[inline]
fn s2_unchecked(v_left: f64, u_left: f64, v: f64) -> f64 {
    u_left - ((v - v_left) * (p_tilde(v_left) - p_tilde(v))).max(0.0).sqrt()
}

/// Shock speed from the first Rankine–Hugoniot relation, validated against
/// the second relation and the Lax entropy condition.
pub fn shock_speed(v_mid: f64, u_mid: f64, v_plus: f64, u_plus: f64) -> Result<f64> {
    shock_speed_tol(v_mid, u_mid, v_plus, u_plus, 1e-8)
}

pub fn shock_speed_tol(v_mid: f64, u_mid: f64, v_plus: f64, u_plus: f64, tol: f64) -> Result<f64> {
    check_positive("v_mid", v_mid)?;
    check_positive("v_plus", v_plus)?;
    if v_plus == v_mid {
        return Err(WaveError::Degenerate { lax_limit: lambda2(v_mid) });
    }
    let sigma = -(u_plus - u_mid) / (v_plus - v_mid);
    let rh2 = rh_residuals(v_mid, u_mid, v_plus, u_plus, sigma).1;
    let scale = 1.0 + p_tilde(v_mid).abs();
    if rh2.abs() > tol * scale {
        return Err(WaveError::NotOnCurve(format!(
            "second Rankine-Hugoniot residual {rh2:e} exceeds {tol:e}"
        )));
    }
    if !(lambda2(v_plus) < sigma && sigma < lambda2(v_mid)) {
        return Err(WaveError::NotOnCurve(format!(
            "Lax condition violated: lambda2(v+) = {}, sigma = {sigma}, lambda2(v_m) = {}",
            lambda2(v_plus),
            lambda2(v_mid)
        )));
    }
    Ok(sigma)
}

/// Both Rankine–Hugoniot residuals for a candidate speed.
pub fn rh_residuals(v_mid: f64, u_mid: f64, v_plus: f64, u_plus: f64, sigma: f64) -> (f64, f64) {
    (
        -sigma * (v_plus - v_mid) - (u_plus - u_mid),
        -sigma * (u_plus - u_mid) + (p_tilde(v_plus) - p_tilde(v_mid)),
    )
}

/// Outcome of a Γ-region membership test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Membership {
    pub inside: bool,
    /// Which inequality failed, if any.
    pub reason: Option<String>,
    pub lower_bound: f64,
    pub upper_bound: f64,
}

/// Tests `v+ - v- ∈ (0, δ0)` and
/// `-√((v+ - v-)(p̃(v-) - p̃(v+))) < u+ - u- < ∫ √(-p̃'(s)) ds`.
pub fn gamma_membership(v_minus: f64, u_minus: f64, v_plus: f64, u_plus: f64, delta0: f64) -> Membership {
    let dv = v_plus - v_minus;
    let du = u_plus - u_minus;
    let lower_bound = if dv > 0.0 { -(dv * (p_tilde(v_minus) - p_tilde(v_plus))).sqrt() } else { 0.0 };
    let upper_bound = if dv > 0.0 { SQRT_2 * (v_plus / v_minus).ln() } else { 0.0 };
    let reason = if !(v_minus > 0.0 && v_plus > 0.0) {
        Some("specific volumes must be positive".to_string())
    } else if dv <= 0.0 {
        Some(format!("amplitude: v+ - v- = {dv} is not positive"))
    } else if dv >= delta0 {
        Some(format!("amplitude: v+ - v- = {dv} >= delta0 = {delta0}"))
    } else if du <= lower_bound {
        Some(format!("below S2 bound: u+ - u- = {du} <= {lower_bound}"))
    } else if du >= upper_bound {
        Some(format!("above R1 bound: u+ - u- = {du} >= {upper_bound}"))
    } else {
        None
    };
    Membership { inside: reason.is_none(), reason, lower_bound, upper_bound }
}

/// Riemann fan made of a 1-rarefaction and a 2-shock.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RiemannFan {
    pub v_minus: f64,
    pub u_minus: f64,
    pub v_mid: f64,
    pub u_mid: f64,
    pub v_plus: f64,
    pub u_plus: f64,
    pub sigma: f64,
    pub delta_r: f64,
    pub delta_s: f64,
    pub phi_minus: f64,
    pub phi_mid: f64,
    pub phi_plus: f64,
}

impl RiemannFan {
    /// Builds the fan from a known intermediate volume, placing `(v+, u+)`
    /// exactly on the curves.
    pub fn from_mid(v_minus: f64, u_minus: f64, v_mid: f64, v_plus: f64) -> Result<Self> {
        let u_mid = r1_velocity(v_minus, u_minus, v_mid)?;
        let u_plus = s2_velocity(v_mid, u_mid, v_plus)?;
        Ok(Self::assemble(v_minus, u_minus, v_mid, u_mid, v_plus, u_plus))
    }

    fn assemble(v_minus: f64, u_minus: f64, v_mid: f64, u_mid: f64, v_plus: f64, u_plus: f64) -> Self {
        let sigma = if v_plus > v_mid {
            -(u_plus - u_mid) / (v_plus - v_mid)
        } else {
            lambda2(v_mid)
        };
        RiemannFan {
            v_minus,
            u_minus,
            v_mid,
            u_mid,
            v_plus,
            u_plus,
            sigma,
            delta_r: (v_mid - v_minus).abs(),
            delta_s: (v_plus - v_mid).abs(),
            phi_minus: -v_minus.ln(),
            phi_mid: -v_mid.ln(),
            phi_plus: -v_plus.ln(),
        }
    }

    pub fn has_rarefaction(&self) -> bool {
        self.delta_r > 0.0
    }

    pub fn has_shock(&self) -> bool {
        self.delta_s > 0.0
    }

    /// Flat `key=value` listing, one entry per line.
    pub fn to_key_values(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("v_minus", self.v_minus),
            ("u_minus", self.u_minus),
            ("v_mid", self.v_mid),
            ("u_mid", self.u_mid),
            ("v_plus", self.v_plus),
            ("u_plus", self.u_plus),
            ("sigma", self.sigma),
            ("delta_R", self.delta_r),
            ("delta_S", self.delta_s),
            ("phi_minus", self.phi_minus),
            ("phi_mid", self.phi_mid),
            ("phi_plus", self.phi_plus),
        ]
    }
}

/// Residual of the composed curve: `S2(v_m, R1(v-, u-, v_m))(v+) - u+`.
/// Strictly increasing in `v_m` on `[v-, v+]`.
fn composed_residual(v_minus: f64, u_minus: f64, v_plus: f64, u_plus: f64, v_mid: f64) -> f64 {
    let u_mid = u_minus + SQRT_2 * (v_mid / v_minus).ln();
    s2_unchecked(v_mid, u_mid, v_plus) - u_plus
}

fn composed_derivative(v_plus: f64, v_mid: f64) -> Option<f64> {
    let f = (v_plus - v_mid) * (p_tilde(v_mid) - p_tilde(v_plus));
    if f <= 0.0 {
        return None;
    }
    let df = -(p_tilde(v_mid) - p_tilde(v_plus)) + (v_plus - v_mid) * dp_tilde(v_mid);
    Some(SQRT_2 / v_mid - df / (2.0 * f.sqrt()))
}

/// Finds the intermediate state of the 1-rarefaction / 2-shock fan.
///
/// The end states may lie on the closure of the Γ region: a state on the R1
/// boundary yields a pure rarefaction (`delta_S = 0`), one on the S2
/// boundary a pure shock (`delta_R = 0`).
pub fn solve_riemann(v_minus: f64, u_minus: f64, v_plus: f64, u_plus: f64, tol: f64) -> Result<RiemannFan> {
    check_positive("v_minus", v_minus)?;
    check_positive("v_plus", v_plus)?;
    if !(v_plus > v_minus) {
        return Err(WaveError::Membership(format!(
            "amplitude: v+ - v- = {} is not positive",
            v_plus - v_minus
        )));
    }
    let g_lo = composed_residual(v_minus, u_minus, v_plus, u_plus, v_minus);
    let g_hi = composed_residual(v_minus, u_minus, v_plus, u_plus, v_plus);
    let slack = tol.max(1e-14) * (1.0 + u_plus.abs());
    if g_lo > slack {
        return Err(WaveError::Membership(format!(
            "below S2 bound: u+ - u- = {} < {}",
            u_plus - u_minus,
            s2_unchecked(v_minus, u_minus, v_plus) - u_minus
        )));
    }
    if g_hi < -slack {
        return Err(WaveError::Membership(format!(
            "above R1 bound: u+ - u- = {} > {}",
            u_plus - u_minus,
            SQRT_2 * (v_plus / v_minus).ln()
        )));
    }
    if g_lo.abs() <= slack {
        return Ok(RiemannFan::assemble(v_minus, u_minus, v_minus, u_minus, v_plus, u_plus));
    }
    if g_hi.abs() <= slack {
        let u_mid = u_minus + SQRT_2 * (v_plus / v_minus).ln();
        return Ok(RiemannFan::assemble(v_minus, u_minus, v_plus, u_mid, v_plus, u_plus));
    }

    // bisection to a coarse bracket, then safeguarded Newton
    let (mut lo, mut hi) = (v_minus, v_plus);
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if composed_residual(v_minus, u_minus, v_plus, u_plus, mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut v_mid = 0.5 * (lo + hi);
    for _ in 0..50 {
        let g = composed_residual(v_minus, u_minus, v_plus, u_plus, v_mid);
        if g.abs() <= tol {
            break;
        }
        if g < 0.0 {
            lo = v_mid;
        } else {
            hi = v_mid;
        }
        let next = match composed_derivative(v_plus, v_mid) {
            Some(d) if d > 0.0 => v_mid - g / d,
            _ => 0.5 * (lo + hi),
        };
        let next = if next <= lo || next >= hi { 0.5 * (lo + hi) } else { next };
        let step = (next - v_mid).abs();
        v_mid = next;
        // round-off limit: nothing left to gain
        if step <= 4.0 * f64::EPSILON * v_mid {
            break;
        }
    }
    let residual = composed_residual(v_minus, u_minus, v_plus, u_plus, v_mid);
    if residual.abs() > tol {
        return Err(WaveError::NonConvergence { iterations: 50, residual });
    }
    let u_mid = u_minus + SQRT_2 * (v_mid / v_minus).ln();
    Ok(RiemannFan::assemble(v_minus, u_minus, v_mid, u_mid, v_plus, u_plus))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pressure_values() {
        assert_eq!(modified_pressure(1.0).unwrap(), 2.0);
        assert_eq!(modified_pressure(2.0).unwrap(), 1.0);
        assert_eq!(dp_tilde(1.0), -2.0);
        assert_eq!(d2p_tilde(1.0), 4.0);
        assert_eq!(pressure(4.0), 0.25);
        assert!(modified_pressure(0.0).is_err());
        assert!(modified_pressure(-1.0).is_err());
    }

    #[test]
    fn eigenvalue_values() {
        let (l1, l2) = eigenvalues(1.0).unwrap();
        assert!((l1 + SQRT_2).abs() < 1e-15 && (l2 - SQRT_2).abs() < 1e-15);
        assert!((eigenvalues(1.2).unwrap().1 - 1.178511).abs() < 1e-6);
        for v in [0.3, 0.9, 1.7, 4.0] {
            let (l1, l2) = eigenvalues(v).unwrap();
            assert!(l1 < 0.0 && 0.0 < l2);
            assert!((l1 * l2 - dp_tilde(v)).abs() < 1e-14);
        }
        assert!(eigenvalues(0.0).is_err());
    }

    #[test]
    fn wave_curve_values() {
        assert_eq!(r1_velocity(1.0, 0.0, 1.0).unwrap(), 0.0);
        assert!((r1_velocity(1.0, 0.0, 1.1).unwrap() - 0.134789).abs() < 1e-6);
        assert!(r1_velocity(1.0, 0.0, 0.9).is_err());
        assert_eq!(s2_velocity(1.0, 0.0, 1.0).unwrap(), 0.0);
        assert!((s2_velocity(1.0, 0.0, 1.2).unwrap() + 0.258199).abs() < 1e-6);
        let u_mid = r1_velocity(1.0, 0.0, 1.1).unwrap();
        // exact composition; the rounded 0.134790 start gives 0.011699
        assert!((s2_velocity(1.1, u_mid, 1.2).unwrap() - 0.0116975).abs() < 1e-7);
        assert!(s2_velocity(1.0, 0.0, 0.99).is_err());
    }

    #[test]
    fn r1_is_monotone() {
        let mut prev = r1_velocity(1.0, 0.0, 1.0).unwrap();
        for k in 1..100 {
            let u = r1_velocity(1.0, 0.0, 1.0 + 0.01 * k as f64).unwrap();
            assert!(u > prev);
            prev = u;
        }
    }

    #[test]
    fn shock_speed_values() {
        let sigma = shock_speed(1.0, 0.0, 1.2, s2_velocity(1.0, 0.0, 1.2).unwrap()).unwrap();
        assert!((sigma - 1.290994).abs() < 1e-6);
        let u_mid = r1_velocity(1.0, 0.0, 1.1).unwrap();
        let u_plus = s2_velocity(1.1, u_mid, 1.2).unwrap();
        let sigma = shock_speed(1.1, u_mid, 1.2, u_plus).unwrap();
        assert!((sigma - 1.2309149098).abs() < 1e-9);
        assert!(lambda2(1.2) < sigma && sigma < lambda2(1.1));
        match shock_speed(1.1, u_mid, 1.1, u_mid) {
            Err(WaveError::Degenerate { lax_limit }) => assert_eq!(lax_limit, lambda2(1.1)),
            other => panic!("expected degenerate signal, got {other:?}"),
        }
        assert!(matches!(shock_speed(1.1, u_mid, 1.2, u_plus + 0.01), Err(WaveError::NotOnCurve(_))));
    }

    #[test]
    fn weak_shock_speed_tends_to_lax_limit() {
        let mut prev_gap = f64::INFINITY;
        for k in 1..8 {
            let eps = 0.1f64.powi(k);
            let sigma = shock_speed(1.0, 0.0, 1.0 + eps, s2_velocity(1.0, 0.0, 1.0 + eps).unwrap()).unwrap();
            let gap = (sigma - lambda2(1.0)).abs();
            assert!(gap < prev_gap);
            prev_gap = gap;
        }
        assert!(prev_gap < 1e-6);
    }

    #[test]
    fn riemann_boundaries() {
        let u = r1_velocity(1.0, 0.0, 1.2).unwrap();
        let fan = solve_riemann(1.0, 0.0, 1.2, u, 1e-12).unwrap();
        assert_eq!(fan.v_mid, 1.2);
        assert_eq!(fan.delta_s, 0.0);
        assert!(!fan.has_shock());
        let u = s2_velocity(1.0, 0.0, 1.2).unwrap();
        let fan = solve_riemann(1.0, 0.0, 1.2, u, 1e-12).unwrap();
        assert_eq!(fan.v_mid, 1.0);
        assert_eq!(fan.delta_r, 0.0);
    }

    #[test]
    fn riemann_errors() {
        assert!(matches!(solve_riemann(1.0, 0.0, 1.2, 0.5, 1e-12), Err(WaveError::Membership(m)) if m.contains("R1")));
        assert!(matches!(solve_riemann(1.0, 0.0, 1.2, -0.5, 1e-12), Err(WaveError::Membership(m)) if m.contains("S2")));
        assert!(matches!(solve_riemann(1.0, 0.0, 0.9, 0.0, 1e-12), Err(WaveError::Membership(m)) if m.contains("amplitude")));
    }

    #[test]
    fn membership_examples() {
        let u_plus = RiemannFan::from_mid(1.0, 0.0, 1.1, 1.2).unwrap().u_plus;
        assert!(gamma_membership(1.0, 0.0, 1.2, u_plus, 0.3).inside);
        let m = gamma_membership(1.0, 0.0, 1.2, u_plus, 0.1);
        assert!(!m.inside && m.reason.unwrap().contains("amplitude"));
        let m = gamma_membership(1.0, 0.0, 1.2, 0.5, 0.3);
        assert!(!m.inside && m.reason.unwrap().contains("R1"));
        assert!((m.upper_bound - SQRT_2 * 1.2f64.ln()).abs() < 1e-15);
        assert!((m.upper_bound - 0.2578416).abs() < 1e-6);
    }

    #[test]
    fn potentials_are_quasi_neutral() {
        let fan = RiemannFan::from_mid(1.0, 0.0, 1.1, 1.2).unwrap();
        assert_eq!(fan.phi_minus, -1.0f64.ln());
        assert_eq!(fan.phi_mid, -1.1f64.ln());
        assert_eq!(fan.phi_plus, -1.2f64.ln());
    }

    #[test]
    fn s2_contact_with_two_rarefaction_curve() {
        // S2 and R1 separate linearly; S2 and the 2-rarefaction curve have
        // third-order contact.
        let base = (1.1, 0.3);
        let mut prev: Option<f64> = None;
        for k in 0..5 {
            let eps = 0.02 / 2f64.powi(k);
            let v = base.0 + eps;
            let s2 = s2_velocity(base.0, base.1, v).unwrap();
            let r1 = r1_velocity(base.0, base.1, v).unwrap();
            let r2 = r2_velocity(base.0, base.1, v).unwrap();
            assert!(((r1 - s2) / eps - 2.0 * SQRT_2 / base.0).abs() < 0.05);
            let gap = (s2 - r2).abs();
            if let Some(p) = prev {
                let order = (p / gap).log2();
                assert!((order - 3.0).abs() < 0.1, "order {order}");
            }
            prev = Some(gap);
        }
    }
}
