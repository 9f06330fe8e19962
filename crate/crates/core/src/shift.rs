//! Weight function `a^X` and the shift ODE of the weighted relative-entropy
//! method.

use crate::composite::CompositePoint;
use crate::numerics::trapezoid;
use crate::thermo::{dp_tilde, p_tilde, RiemannFan};

/// Shift parameters. With `δ_S = 0` the shift is disabled and `X ≡ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftState {
    pub c0: f64,
    pub m: f64,
    pub delta_s: f64,
    pub v_mid: f64,
    pub sigma: f64,
}

impl ShiftState {
    pub fn new(fan: &RiemannFan, c0: f64) -> Self {
        Self { c0, m: shift_constant(fan.v_mid, c0), delta_s: fan.delta_s, v_mid: fan.v_mid, sigma: fan.sigma }
    }

    pub fn enabled(&self) -> bool {
        self.delta_s > 0.0
    }

    /// `a^X` at a point where the shifted shock component has volume `v_shock`.
    pub fn weight(&self, v_shock: f64) -> f64 {
        weight(self.v_mid, self.delta_s, v_shock).0
    }

    /// Upper bound `1 + 2√δ_S / v_m²`.
    pub fn weight_bound(&self) -> f64 {
        1.0 + 2.0 * self.delta_s.sqrt() / (self.v_mid * self.v_mid)
    }
}

/// `M = 5√2 c0 / (8 v_m²)`.
pub fn shift_constant(v_mid: f64, c0: f64) -> f64 {
    5.0 * std::f64::consts::SQRT_2 * c0 / (8.0 * v_mid * v_mid)
}

/// The same constant written through the sound speed `σ_m = √(-p̃'(v_m))`
/// and `α_m = 1/(σ_m p̃(v_m))`: `5 c0 σ_m⁴ α_m / 8`.
pub fn shift_constant_sound_speed_form(v_mid: f64, c0: f64) -> f64 {
    let sm = (-dp_tilde(v_mid)).sqrt();
    let alpha = 1.0 / (sm * p_tilde(v_mid));
    5.0 * c0 * sm.powi(4) * alpha / 8.0
}

/// `a = 1 + (p̃(v_m) - p̃(v_shock))/√δ_S`; the flag is false (and `a = 1`)
/// when `δ_S = 0`.
pub fn weight(v_mid: f64, delta_s: f64, v_shock: f64) -> (f64, bool) {
    if delta_s <= 0.0 {
        return (1.0, false);
    }
    (1.0 + (p_tilde(v_mid) - p_tilde(v_shock)) / delta_s.sqrt(), true)
}

/// `∂_ξ a = -p̃'(v̄^S) v̄^S_ξ / √δ_S = 2 v̄^S_ξ / (√δ_S (v̄^S)²)`.
pub fn weight_derivative(delta_s: f64, v_shock: f64, v_shock_x: f64) -> f64 {
    if delta_s <= 0.0 {
        return 0.0;
    }
    2.0 * v_shock_x / (delta_s.sqrt() * v_shock * v_shock)
}

/// The two integrals of the shift ODE, trapezoid rule on spacing `dx`.
pub fn shift_integrals(shift: &ShiftState, v: &[f64], wave: &[CompositePoint], dx: f64) -> (f64, f64) {
    let n = v.len();
    let mut f1 = vec![0.0; n];
    let mut f2 = vec![0.0; n];
    for i in 0..n {
        let c = &wave[i];
        let a = shift.weight(c.shock.v);
        f1[i] = a * c.shock.h_p * (p_tilde(v[i]) - p_tilde(c.v)) / shift.sigma;
        f2[i] = a * dp_tilde(c.shock.v) * c.shock.v_p * (v[i] - c.v);
    }
    (trapezoid(&f1, dx), trapezoid(&f2, dx))
}

/// `Ẋ = -(M/δ_S)(I1 - I2)`; zero when the shift is disabled.
pub fn shift_rhs(shift: &ShiftState, v: &[f64], wave: &[CompositePoint], dx: f64) -> f64 {
    if !shift.enabled() {
        return 0.0;
    }
    let (i1, i2) = shift_integrals(shift, v, wave, dx);
    -(shift.m / shift.delta_s) * (i1 - i2)
}
