//! Approximate composite wave: the smooth rarefaction (evaluated at
//! `x = ξ + σt`) plus the shock profile shifted by `X(t)`, minus the
//! intermediate state.

use crate::rarefaction::RarefactionField;
use crate::shock_profile::{ProfilePoint, ShockProfile};
use crate::thermo::RiemannFan;

/// Composite values, derivatives and the component pieces needed by the
/// shift and the diagnostics. All derivatives are analytic per component.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompositePoint {
    pub v: f64,
    pub u: f64,
    pub phi: f64,
    pub v_x: f64,
    pub u_x: f64,
    pub phi_x: f64,
    pub v_xx: f64,
    pub phi_xx: f64,
    /// Shock component at `ξ - X`.
    pub shock: ProfilePoint,
    /// Rarefaction `v̄^R` and `∂_ξ v̄^R`.
    pub v_r: f64,
    pub v_r_x: f64,
    pub u_r: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RarefactionPart {
    pub v: f64,
    pub u: f64,
    pub phi: f64,
    pub v_x: f64,
    pub u_x: f64,
    pub v_xx: f64,
}

#[derive(Debug, Clone)]
pub struct CompositeWave {
    pub fan: RiemannFan,
    pub rarefaction: RarefactionField,
    pub profile: ShockProfile,
}

impl CompositeWave {
    pub fn new(fan: RiemannFan, profile: ShockProfile) -> Self {
        Self { fan, rarefaction: RarefactionField::new(fan), profile }
    }

    pub fn sigma(&self) -> f64 {
        self.fan.sigma
    }

    /// Rarefaction component at `x = ξ + σt`; independent of the shift.
    pub fn rarefaction_part(&self, t: f64, xi: f64) -> RarefactionPart {
        let fan = &self.fan;
        if !fan.has_rarefaction() {
            return RarefactionPart { v: fan.v_mid, u: fan.u_mid, phi: fan.phi_mid, v_x: 0.0, u_x: 0.0, v_xx: 0.0 };
        }
        let j = self.rarefaction.jet(t, xi + fan.sigma * t);
        RarefactionPart { v: j.v, u: j.u, phi: j.phi, v_x: j.v_x, u_x: j.u_x, v_xx: j.v_xx }
    }

    /// Superposes a rarefaction part with the shock component at `ξ - X`.
    pub fn combine(&self, r: &RarefactionPart, shift: f64, xi: f64) -> CompositePoint {
        let fan = &self.fan;
        let s = self.profile.eval(xi - shift);
        // φ̄^R = -ln v̄^R
        let phi_r_x = -r.v_x / r.v;
        let phi_r_xx = -r.v_xx / r.v + r.v_x * r.v_x / (r.v * r.v);
        CompositePoint {
            v: r.v + s.v - fan.v_mid,
            u: r.u + s.u - fan.u_mid,
            phi: r.phi + s.phi - fan.phi_mid,
            v_x: r.v_x + s.v_p,
            u_x: r.u_x + s.u_p,
            phi_x: phi_r_x + s.phi_p,
            v_xx: r.v_xx + s.v_pp,
            phi_xx: phi_r_xx + s.phi_pp,
            shock: s,
            v_r: r.v,
            v_r_x: r.v_x,
            u_r: r.u,
        }
    }

    pub fn eval(&self, t: f64, shift: f64, xi: f64) -> CompositePoint {
        self.combine(&self.rarefaction_part(t, xi), shift, xi)
    }

    /// Evaluates at every `ξ` in `xs`.
    pub fn sample(&self, t: f64, shift: f64, xs: &[f64]) -> Vec<CompositePoint> {
        xs.iter().map(|&xi| self.eval(t, shift, xi)).collect()
    }

    /// Overlap of the two components, `‖v̄^S_ξ(· - X)(v̄^R - v_m)‖_{L²}` at
    /// time `t`, by the trapezoid rule with spacing `dxi` over an interval
    /// covering the profile and the fan.
    pub fn interaction_norm(&self, t: f64, shift: f64, dxi: f64) -> f64 {
        if !self.fan.has_rarefaction() || !self.fan.has_shock() {
            return 0.0;
        }
        let l = self.profile.half_length() + shift.abs();
        let fan_left = (self.rarefaction.w_minus - self.sigma()) * (1.0 + t);
        let a = fan_left.min(-l) - 30.0;
        let n = ((l - a) / dxi).ceil() as usize + 1;
        let f: Vec<f64> = (0..n)
            .map(|i| {
                let xi = a + i as f64 * dxi;
                let s = self.profile.eval(xi - shift);
                let r = self.rarefaction_part(t, xi);
                (s.v_p * (r.v - self.fan.v_mid)).powi(2)
            })
            .collect();
        crate::numerics::trapezoid(&f, dxi).sqrt()
    }
}
