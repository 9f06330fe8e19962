//! Smooth approximate 1-rarefaction built from the exact solution of the
//! inviscid Burgers equation with `tanh` initial data.
//!
//! The Burgers solution is evaluated along characteristics: for `(t, x)` the
//! foot `x0` solves `x = x0 + t·w0(x0)`, and `w(t, x) = w0(x0)`. Since
//! `w0' > 0` characteristics never cross and the map `x0 ↦ x` is strictly
//! increasing, so the foot is always bracketed.
//!
//! The rarefaction uses the Burgers solution at time `1 + t`:
//! `v = λ1⁻¹(w)`, `u` from the constancy of the first Riemann invariant and
//! `φ = -ln v`.

use std::f64::consts::SQRT_2;

use serde::Serialize;

use crate::error::{Result, WaveError};
use crate::numerics::{fit_line, trapezoid, LineFit};
use crate::thermo::{lambda1, lambda1_inverse, RiemannFan};

const DEFAULT_TOL: f64 = 1e-13;

/// Burgers solution and its first two x-derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Characteristic {
    pub foot: f64,
    pub w: f64,
    pub w_x: f64,
    pub w_xx: f64,
    /// `|x0 + t·w0(x0) - x|` at the returned foot.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy)]
struct TanhData {
    mean: f64,
    half_jump: f64,
}

impl TanhData {
    fn new(w_minus: f64, w_mid: f64) -> Self {
        Self { mean: 0.5 * (w_mid + w_minus), half_jump: 0.5 * (w_mid - w_minus) }
    }

    #[inline]
    fn w0(&self, x: f64) -> f64 {
        self.mean + self.half_jump * x.tanh()
    }

    #[inline]
    fn dw0(&self, x: f64) -> f64 {
        let s = 1.0 / x.cosh();
        self.half_jump * s * s
    }

    #[inline]
    fn d2w0(&self, x: f64) -> f64 {
        let s = 1.0 / x.cosh();
        -2.0 * self.half_jump * s * s * x.tanh()
    }

    fn lo(&self) -> f64 {
        self.mean - self.half_jump.abs()
    }

    fn hi(&self) -> f64 {
        self.mean + self.half_jump.abs()
    }

    fn characteristic(&self, t: f64, x: f64, tol: f64) -> Characteristic {
        if self.half_jump == 0.0 {
            return Characteristic { foot: x - t * self.mean, w: self.mean, w_x: 0.0, w_xx: 0.0, residual: 0.0 };
        }
        // the foot lies in [x - t·hi, x - t·lo]; beyond |x0| = 40, tanh is ±1
        // and sech² < 1e-34 in double precision
        const SATURATED: f64 = 40.0;
        if x - t * self.lo() < -SATURATED {
            let w = self.mean - self.half_jump;
            return Characteristic { foot: x - t * w, w, w_x: 0.0, w_xx: 0.0, residual: 0.0 };
        }
        if x - t * self.hi() > SATURATED {
            let w = self.mean + self.half_jump;
            return Characteristic { foot: x - t * w, w, w_x: 0.0, w_xx: 0.0, residual: 0.0 };
        }
        let tol = tol * (1.0 + x.abs());
        let g = |x0: f64| x0 + t * self.w0(x0) - x;
        // x0 = x - t·w0(x0) and w0 ∈ (lo, hi)
        let mut lo = x - t * self.hi();
        let mut hi = x - t * self.lo();
        let mut x0 = x - t * self.mean;
        let mut gx = g(x0);
        for _ in 0..200 {
            if gx.abs() <= tol {
                break;
            }
            if gx > 0.0 {
                hi = hi.min(x0);
            } else {
                lo = lo.max(x0);
            }
            let slope = 1.0 + t * self.dw0(x0);
            let mut next = x0 - gx / slope;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if next == x0 {
                break;
            }
            x0 = next;
            gx = g(x0);
        }
        let d = self.dw0(x0);
        let jac = 1.0 + t * d;
        Characteristic {
            foot: x0,
            w: self.w0(x0),
            w_x: d / jac,
            w_xx: self.d2w0(x0) / (jac * jac * jac),
            residual: gx.abs(),
        }
    }
}

/// Evaluates the Burgers solution `w(t, x)` with `tanh` data joining
/// `w_minus` (x → -∞) to `w_mid` (x → +∞).
pub fn burgers_eval(w_minus: f64, w_mid: f64, t: f64, x: f64, tol: f64) -> Result<f64> {
    Ok(burgers_characteristic(w_minus, w_mid, t, x, tol)?.w)
}

pub fn burgers_characteristic(w_minus: f64, w_mid: f64, t: f64, x: f64, tol: f64) -> Result<Characteristic> {
    if !(t >= 0.0) {
        return Err(WaveError::domain(format!("Burgers solution requires t >= 0, got {t}")));
    }
    if !x.is_finite() {
        return Err(WaveError::domain("non-finite x"));
    }
    Ok(TanhData::new(w_minus, w_mid).characteristic(t, x, tol))
}

/// Values of the approximate rarefaction at one point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RarefactionValue {
    pub v: f64,
    pub u: f64,
    pub phi: f64,
}

/// Values plus first and second x-derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RarefactionJet {
    pub v: f64,
    pub u: f64,
    pub phi: f64,
    pub v_x: f64,
    pub u_x: f64,
    pub v_xx: f64,
    pub u_xx: f64,
    /// Time derivatives from the Burgers relation `w_t = -w·w_x`.
    pub v_t: f64,
    pub u_t: f64,
}

/// Smooth approximate 1-rarefaction of a fan. Evaluation is pure and the
/// type holds no cache, so it can be shared freely across threads.
#[derive(Debug, Clone, Copy)]
pub struct RarefactionField {
    pub fan: RiemannFan,
    pub w_minus: f64,
    pub w_mid: f64,
    data: TanhData,
    tol: f64,
}

impl RarefactionField {
    pub fn new(fan: RiemannFan) -> Self {
        let w_minus = lambda1(fan.v_minus);
        let w_mid = lambda1(fan.v_mid);
        Self { fan, w_minus, w_mid, data: TanhData::new(w_minus, w_mid), tol: DEFAULT_TOL }
    }

    fn check_time(t: f64) -> Result<()> {
        if t >= 0.0 {
            Ok(())
        } else {
            Err(WaveError::domain(format!("rarefaction requires t >= 0, got {t}")))
        }
    }

    pub fn characteristic(&self, t: f64, x: f64) -> Characteristic {
        self.data.characteristic(1.0 + t, x, self.tol)
    }

    pub fn eval(&self, t: f64, x: f64) -> Result<RarefactionValue> {
        Self::check_time(t)?;
        let c = self.characteristic(t, x);
        Ok(self.value_from_w(c.w))
    }

    fn value_from_w(&self, w: f64) -> RarefactionValue {
        let v = lambda1_inverse(w);
        RarefactionValue { v, u: self.fan.u_minus + SQRT_2 * (v / self.fan.v_minus).ln(), phi: -v.ln() }
    }

    /// Values with analytic first and second derivatives. Unchecked in `t`.
    pub fn jet(&self, t: f64, x: f64) -> RarefactionJet {
        let c = self.characteristic(t, x);
        let RarefactionValue { v, u, phi } = self.value_from_w(c.w);
        let w = c.w;
        let v_x = SQRT_2 * c.w_x / (w * w);
        let v_xx = SQRT_2 * (c.w_xx / (w * w) - 2.0 * c.w_x * c.w_x / (w * w * w));
        let u_x = SQRT_2 * v_x / v;
        let u_xx = SQRT_2 * (v_xx / v - v_x * v_x / (v * v));
        let w_t = -w * c.w_x;
        let v_t = SQRT_2 * w_t / (w * w);
        let u_t = SQRT_2 * v_t / v;
        RarefactionJet { v, u, phi, v_x, u_x, v_xx, u_xx, v_t, u_t }
    }

    /// `∂_x^k (v, u)` for `k = 1..=order`. Orders one and two are analytic;
    /// order three differences the analytic second derivative.
    pub fn derivatives(&self, t: f64, x: f64, order: usize) -> Result<Vec<(f64, f64)>> {
        Self::check_time(t)?;
        if !(1..=3).contains(&order) {
            return Err(WaveError::Argument(format!("derivative order must be 1, 2 or 3, got {order}")));
        }
        let j = self.jet(t, x);
        let mut out = vec![(j.v_x, j.u_x)];
        if order >= 2 {
            out.push((j.v_xx, j.u_xx));
        }
        if order == 3 {
            let h = 1e-4;
            let p = self.jet(t, x + h);
            let m = self.jet(t, x - h);
            out.push(((p.v_xx - m.v_xx) / (2.0 * h), (p.u_xx - m.u_xx) / (2.0 * h)));
        }
        Ok(out)
    }

    /// Window `[a, b]` covering the fan at time `t` plus `margin` on each side.
    pub fn window(&self, t: f64, margin: f64) -> (f64, f64) {
        let s = 1.0 + t;
        (self.w_minus * s - margin, self.w_mid * s + margin)
    }
}

/// Norms of the first and second derivatives at one time.
#[derive(Debug, Clone, Serialize)]
pub struct DecaySample {
    pub t: f64,
    pub first_v: f64,
    pub first_u: f64,
    pub second_v: f64,
    pub second_u: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayReport {
    /// `p = f64::INFINITY` encodes the sup norm.
    pub p: f64,
    pub samples: Vec<DecaySample>,
    /// Reference exponent `-1 + 1/p` for the first derivatives.
    pub expected_first_exponent: f64,
    /// Fitted exponent of the first-derivative `v` norm against `1 + t`.
    pub fitted_first_exponent: Option<f64>,
    pub fitted_second_exponent: Option<f64>,
    /// `max_t ‖v_x‖ / (δ_R^{1/p} (1+t)^{-1+1/p})`.
    pub first_constant: f64,
    /// `max_t ‖v_xx‖ · (1+t)`.
    pub second_constant: f64,
    /// Largest ratio `|v - v_m| / (δ_R e^{-2|x - λ1(v_m)(1+t)|})` beyond the
    /// right edge of the fan, and the analogue beyond the left edge.
    pub tail_constant: f64,
}

fn lp_norm(f: &[f64], dx: f64, p: f64) -> f64 {
    if p.is_infinite() {
        f.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    } else {
        let g: Vec<f64> = f.iter().map(|x| x.abs().powf(p)).collect();
        trapezoid(&g, dx).powf(1.0 / p)
    }
}

/// Measures the decay of derivative norms and the exponential tails of the
/// approximate rarefaction.
pub fn verify_decay(field: &RarefactionField, times: &[f64], p: f64) -> Result<DecayReport> {
    if times.is_empty() {
        return Err(WaveError::Argument("verify_decay needs at least one time".into()));
    }
    if !(p == 1.0 || p == 2.0 || p.is_infinite()) {
        return Err(WaveError::Argument(format!("p must be 1, 2 or infinity, got {p}")));
    }
    let dx = 0.01;
    let delta_r = field.fan.delta_r;
    let mut samples = Vec::with_capacity(times.len());
    let mut tail_constant = 0.0f64;
    for &t in times {
        RarefactionField::check_time(t)?;
        let (a, b) = field.window(t, 30.0);
        let n = ((b - a) / dx).ceil() as usize + 1;
        let mut vx = Vec::with_capacity(n);
        let mut ux = Vec::with_capacity(n);
        let mut vxx = Vec::with_capacity(n);
        let mut uxx = Vec::with_capacity(n);
        let s = 1.0 + t;
        for i in 0..n {
            let x = a + i as f64 * dx;
            let j = field.jet(t, x);
            vx.push(j.v_x);
            ux.push(j.u_x);
            vxx.push(j.v_xx);
            uxx.push(j.u_xx);
            if delta_r > 0.0 {
                let right = field.w_mid * s;
                let left = field.w_minus * s;
                let (dev, edge) = if x >= right {
                    ((j.v - field.fan.v_mid).abs(), right)
                } else if x <= left {
                    ((j.v - field.fan.v_minus).abs(), left)
                } else {
                    continue;
                };
                let envelope = delta_r * (-2.0 * (x - edge).abs()).exp();
                // deviations at the round-off level carry no tail information
                if envelope > 1e-200 && dev > 1e-12 * field.fan.v_mid {
                    tail_constant = tail_constant.max(dev / envelope);
                }
            }
        }
        samples.push(DecaySample {
            t,
            first_v: lp_norm(&vx, dx, p),
            first_u: lp_norm(&ux, dx, p),
            second_v: lp_norm(&vxx, dx, p),
            second_u: lp_norm(&uxx, dx, p),
        });
    }
    let inv_p = if p.is_infinite() { 0.0 } else { 1.0 / p };
    let expected_first_exponent = -1.0 + inv_p;
    let log_t: Vec<f64> = samples.iter().map(|s| (1.0 + s.t).ln()).collect();
    let fit = |vals: Vec<f64>| -> Option<LineFit> {
        if vals.iter().any(|v| !(*v > 0.0)) {
            return None;
        }
        let logs: Vec<f64> = vals.iter().map(|v| v.ln()).collect();
        if samples.len() == 2 {
            let slope = (logs[1] - logs[0]) / (log_t[1] - log_t[0]);
            return Some(LineFit { slope, intercept: logs[0] - slope * log_t[0], r_squared: 1.0, points: 2 });
        }
        fit_line(&log_t, &logs)
    };
    let fitted_first_exponent = fit(samples.iter().map(|s| s.first_v).collect()).map(|f| f.slope);
    let fitted_second_exponent = fit(samples.iter().map(|s| s.second_v).collect()).map(|f| f.slope);
    let first_constant = samples
        .iter()
        .map(|s| s.first_v / (delta_r.powf(inv_p) * (1.0 + s.t).powf(expected_first_exponent)))
        .fold(0.0, f64::max);
    let second_constant = samples.iter().map(|s| s.second_v * (1.0 + s.t)).fold(0.0, f64::max);
    Ok(DecayReport {
        p,
        samples,
        expected_first_exponent,
        fitted_first_exponent,
        fitted_second_exponent,
        first_constant,
        second_constant,
        tail_constant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thermo::{eigenvalues, dp_tilde, p_tilde};

    fn field() -> RarefactionField {
        RarefactionField::new(RiemannFan::from_mid(1.0, 0.0, 1.1, 1.2).unwrap())
    }

    #[test]
    fn burgers_initial_time_is_identity() {
        let f = field();
        for x in [-3.0, -0.5, 0.0, 0.7, 4.0] {
            let w = burgers_eval(f.w_minus, f.w_mid, 0.0, x, 1e-14).unwrap();
            assert!((w - f.data.w0(x)).abs() < 1e-15);
        }
    }

    #[test]
    fn midpoint_rides_its_characteristic() {
        let f = field();
        let mid = 0.5 * (f.w_minus + f.w_mid);
        for t in [0.5, 3.0, 40.0] {
            let w = burgers_eval(f.w_minus, f.w_mid, t, t * mid, 1e-14).unwrap();
            assert!((w - mid).abs() < 1e-12);
        }
    }

    #[test]
    fn burgers_far_field_and_errors() {
        let f = field();
        assert!((burgers_eval(f.w_minus, f.w_mid, 2.0, 1e3, 1e-13).unwrap() - f.w_mid).abs() < 1e-14);
        assert!((burgers_eval(f.w_minus, f.w_mid, 2.0, -1e3, 1e-13).unwrap() - f.w_minus).abs() < 1e-14);
        assert!(burgers_eval(f.w_minus, f.w_mid, -0.1, 0.0, 1e-13).is_err());
    }

    #[test]
    fn characteristic_inversion_is_exact() {
        let f = field();
        for t in [0.0, 1.0, 10.0, 100.0] {
            for k in -50..50 {
                let x = k as f64 * 0.37 * (1.0 + t) * 0.1 - 1.3 * t;
                let c = f.characteristic(t, x);
                assert!(c.residual <= 1e-13 * (1.0 + x.abs()));
                assert!(((c.foot + (1.0 + t) * c.w) - x).abs() <= 1e-12 * (1.0 + x.abs()));
            }
        }
    }

    #[test]
    fn far_fields_and_midpoint_value() {
        let f = field();
        let left = f.eval(0.0, -200.0).unwrap();
        assert!((left.v - 1.0).abs() < 1e-14 && left.u.abs() < 1e-14 && left.phi.abs() < 1e-14);
        let right = f.eval(0.0, 200.0).unwrap();
        assert!((right.v - 1.1).abs() < 1e-14 && (right.u - f.fan.u_mid).abs() < 1e-14);
        assert!((right.phi - f.fan.phi_mid).abs() < 1e-14);
        // w(1, x) = midpoint at x = w_mid_avg·1
        let mid = 0.5 * (f.w_minus + f.w_mid);
        assert!((mid + 1.349931).abs() < 1e-6);
        let val = f.eval(0.0, mid).unwrap();
        assert!((val.v - 1.0476190).abs() < 1e-6);
        assert!(f.eval(-1.0, 0.0).is_err());
    }

    #[test]
    fn derivative_identities() {
        let f = field();
        for t in [0.0, 5.0, 50.0] {
            for k in -20..20 {
                let x = -1.35 * (1.0 + t) + 0.4 * k as f64;
                let j = f.jet(t, x);
                assert!(j.v_x >= 0.0 && j.u_x >= 0.0);
                // constancy of z1: u_x = -λ1(v)·v_x, i.e. v_x = v·u_x/√2
                assert!((j.v_x - j.v * j.u_x / SQRT_2).abs() < 1e-12);
                let fd = (f.eval(t, x + 1e-5).unwrap().v - f.eval(t, x - 1e-5).unwrap().v) / 2e-5;
                assert!((fd - j.v_x).abs() < 1e-8);
                assert!(j.v >= 1.0 - 1e-15 && j.v <= 1.1 + 1e-15);
                assert!((j.phi + j.v.ln()).abs() == 0.0);
            }
        }
    }

    #[test]
    fn constant_region_has_zero_derivatives() {
        let f = field();
        let d = f.derivatives(0.0, -60.0, 3).unwrap();
        for (dv, du) in d {
            assert!(dv.abs() < 1e-12 && du.abs() < 1e-12);
        }
        assert!(f.derivatives(0.0, 0.0, 4).is_err());
        assert!(f.derivatives(0.0, 0.0, 0).is_err());
    }

    #[test]
    fn finite_difference_order_two() {
        let f = field();
        let x = -1.0;
        let exact = f.jet(2.0, x).v_x;
        let err = |h: f64| ((f.eval(2.0, x + h).unwrap().v - f.eval(2.0, x - h).unwrap().v) / (2.0 * h) - exact).abs();
        let order = (err(0.02) / err(0.01)).log2();
        assert!((order - 2.0).abs() < 0.1, "order {order}");
    }

    #[test]
    fn quasi_neutral_euler_residual() {
        let f = field();
        for t in [0.0, 3.0, 30.0] {
            for k in -10..10 {
                let x = -1.35 * (1.0 + t) + 0.5 * k as f64;
                let j = f.jet(t, x);
                assert!((j.v_t - j.u_x).abs() < 1e-10);
                assert!((j.u_t + dp_tilde(j.v) * j.v_x).abs() < 1e-10);
            }
        }
        let _ = (eigenvalues(1.0), p_tilde(1.0));
    }

    #[test]
    fn monotone_in_x() {
        let f = field();
        for t in [0.0, 10.0] {
            let mut prev = 0.0;
            for k in 0..400 {
                let v = f.eval(t, -60.0 + 0.3 * k as f64).unwrap().v;
                assert!(v >= prev);
                prev = v;
            }
        }
    }

    #[test]
    fn total_variation_is_amplitude() {
        let f = field();
        let rep = verify_decay(&f, &[0.0, 10.0, 100.0], 1.0).unwrap();
        for s in &rep.samples {
            assert!((s.first_v - f.fan.delta_r).abs() < 1e-3 * f.fan.delta_r, "{}", s.first_v);
        }
        assert!(rep.tail_constant < 50.0, "tail constant {}", rep.tail_constant);
        assert!(verify_decay(&f, &[], 1.0).is_err());
        assert!(verify_decay(&f, &[1.0], 3.0).is_err());
    }
}
