//! Viscous-electrostatic 2-shock profile.
//!
//! With `' = d/dξ`, the traveling-wave equations reduce, through the first
//! integral `u = u_m - σ(v - v_m)` and the substitutions `q = (ln v)'`,
//! `z = φ'/v`, to the first-order system
//!
//! ```text
//! v' = v q
//! q' = -(σ² v q - q/v + z) / σ
//! φ' = v z
//! z' = v e^φ - 1
//! ```
//!
//! Every quasi-neutral state `(v, 0, -ln v, 0)` is an equilibrium. The
//! momentum equation has the further first integral
//! `σ q + σ² v + 1/v - z²/2 + e^φ = σ² v_m + p̃(v_m)`, whose value at `v_+`
//! agrees by the Rankine–Hugoniot relations.
//!
//! Both end states are saddles with a fast unstable and a fast stable
//! direction besides the slow one carrying the profile, so the orbit is
//! computed as a boundary-value problem on `[-L, L]` rather than by forward
//! shooting: a second-order box scheme for the integrated momentum equation,
//! the flux-form Poisson equation with Dirichlet far-field potentials, and
//! the anchoring `v(0) = (v_m + v_+)/2` as phase condition. Newton's method
//! is started from the quasi-neutral reduction
//! `σ (ln v)' = σ² v_m + p̃(v_m) - σ² v - p̃(v)`.

use serde::Serialize;

use crate::error::{Result, WaveError};
use crate::numerics::{d1_fourth, d2_fourth, fit_line, max_abs, BandedMatrix, LineFit, UniformGrid};
use crate::thermo::{p_tilde, RiemannFan};

/// Right-hand side of the reduced traveling-wave system for the state
/// `(v, q, φ, z)`.
pub fn profile_rhs(state: [f64; 4], sigma: f64) -> Result<[f64; 4]> {
    let [v, q, phi, z] = state;
    if !(v > 0.0) {
        return Err(WaveError::domain(format!("profile integration left v > 0 (v = {v})")));
    }
    Ok([v * q, -(sigma * sigma * v * q - q / v + z) / sigma, v * z, v * phi.exp() - 1.0])
}

/// Eigenvalues of the linearization of [`profile_rhs`] at the quasi-neutral
/// equilibrium `(v_eq, 0, -ln v_eq, 0)`.
///
/// The characteristic polynomial factors as `μ·(σμ³ + bμ² + cμ + d)` with
/// `b = σ² v - 1/v`, `c = -σ v`, `d = 2 - σ² v²`; the zero root belongs to
/// the line of equilibria.
pub fn equilibrium_eigenvalues(v_eq: f64, sigma: f64) -> Result<Vec<f64>> {
    if !(v_eq > 0.0 && sigma > 0.0) {
        return Err(WaveError::Eigen(format!("invalid equilibrium v = {v_eq}, sigma = {sigma}")));
    }
    let b = sigma * sigma * v_eq - 1.0 / v_eq;
    let c = -sigma * v_eq;
    let d = 2.0 - sigma * sigma * v_eq * v_eq;
    let mut roots = real_cubic_roots(sigma, b, c, d);
    roots.push(0.0);
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(roots)
}

/// Real roots of `a x³ + b x² + c x + d` (trigonometric / Cardano form).
pub fn real_cubic_roots(a: f64, b: f64, c: f64, d: f64) -> Vec<f64> {
    let (b, c, d) = (b / a, c / a, d / a);
    let shift = -b / 3.0;
    let p = c - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
    let mut roots = if disc < 0.0 {
        let r = 2.0 * (-p / 3.0).sqrt();
        let theta = ((3.0 * q) / (p * r)).clamp(-1.0, 1.0).acos() / 3.0;
        (0..3)
            .map(|k| r * (theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos() + shift)
            .collect::<Vec<_>>()
    } else {
        let s = disc.sqrt();
        vec![(-q / 2.0 + s).cbrt() + (-q / 2.0 - s).cbrt() + shift]
    };
    // one Newton polish per root
    for r in roots.iter_mut() {
        let f = ((*r + b) * *r + c) * *r + d;
        let df = (3.0 * *r + 2.0 * b) * *r + c;
        if df != 0.0 {
            *r -= f / df;
        }
    }
    roots
}

/// Eigenvector of the linearization at `v_eq` for a nonzero eigenvalue `mu`,
/// normalized so that its `v` component is one.
pub fn equilibrium_eigenvector(v_eq: f64, mu: f64) -> [f64; 4] {
    let dq = mu / v_eq;
    let dz = mu / (v_eq * (mu * mu - v_eq));
    let dphi = v_eq * dz / mu;
    [1.0, dq, dphi, dz]
}

/// Slow decay rates of the profile towards its end states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailRates {
    /// Smallest positive eigenvalue at the left state.
    pub left: f64,
    /// Magnitude of the negative eigenvalue closest to zero at the right state.
    pub right: f64,
}

pub fn tail_rates(fan: &RiemannFan) -> Result<TailRates> {
    let left = equilibrium_eigenvalues(fan.v_mid, fan.sigma)?
        .into_iter()
        .filter(|m| *m > 1e-14)
        .fold(f64::INFINITY, f64::min);
    let right = equilibrium_eigenvalues(fan.v_plus, fan.sigma)?
        .into_iter()
        .filter(|m| *m < -1e-14)
        .fold(f64::NEG_INFINITY, f64::max);
    if !left.is_finite() {
        return Err(WaveError::Eigen(format!("no unstable direction at v_m = {}", fan.v_mid)));
    }
    if !right.is_finite() {
        return Err(WaveError::Eigen(format!("no stable direction at v+ = {}", fan.v_plus)));
    }
    Ok(TailRates { left, right: -right })
}

/// Controls for [`solve_profile`].
/// Level below which sample-to-sample changes of a converged profile are
/// solver noise (the default Newton tolerance); monotonicity checks allow
/// decreases this small in the flat tails.
pub const PROFILE_NOISE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileOptions {
    /// Half-length of the computational interval; derived from the tail rate
    /// when absent.
    pub half_length: Option<f64>,
    /// Sample spacing; `min(0.05, 0.01/δ_S)` when absent.
    pub dxi: Option<f64>,
    /// Newton tolerance on the max-norm residual.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        Self { half_length: None, dxi: None, tol: 1e-12, max_iter: 40 }
    }
}

/// Interpolated profile values at one `ξ`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ProfilePoint {
    pub v: f64,
    pub u: f64,
    pub phi: f64,
    pub h: f64,
    pub v_p: f64,
    pub u_p: f64,
    pub phi_p: f64,
    pub v_pp: f64,
    pub phi_pp: f64,
    pub h_p: f64,
}

/// Sampled 2-shock profile, anchored at `v(0) = (v_m + v_+)/2`.
#[derive(Debug, Clone)]
pub struct ShockProfile {
    pub fan: RiemannFan,
    pub grid: UniformGrid,
    pub sigma: f64,
    pub anchor: f64,
    pub rates: Option<TailRates>,
    pub newton_iterations: usize,
    pub v: Vec<f64>,
    pub u: Vec<f64>,
    pub phi: Vec<f64>,
    pub h: Vec<f64>,
    pub v_p: Vec<f64>,
    pub u_p: Vec<f64>,
    pub phi_p: Vec<f64>,
    pub v_pp: Vec<f64>,
    pub phi_pp: Vec<f64>,
}

impl ShockProfile {
    fn constant(fan: RiemannFan) -> Self {
        let grid = UniformGrid::new(-1.0, 1.0, 3).expect("static grid");
        let n = grid.n;
        ShockProfile {
            fan,
            grid,
            sigma: fan.sigma,
            anchor: fan.v_mid,
            rates: None,
            newton_iterations: 0,
            v: vec![fan.v_mid; n],
            u: vec![fan.u_mid; n],
            phi: vec![fan.phi_mid; n],
            h: vec![fan.u_mid; n],
            v_p: vec![0.0; n],
            u_p: vec![0.0; n],
            phi_p: vec![0.0; n],
            v_pp: vec![0.0; n],
            phi_pp: vec![0.0; n],
        }
    }

    pub fn is_constant(&self) -> bool {
        !self.fan.has_shock()
    }

    pub fn half_length(&self) -> f64 {
        self.grid.x_max()
    }

    pub fn points(&self) -> Vec<f64> {
        self.grid.points()
    }

    /// C¹ piecewise-cubic evaluation; constant far-field extension outside
    /// the sampled interval.
    pub fn eval(&self, xi: f64) -> ProfilePoint {
        let fan = &self.fan;
        if self.is_constant() || xi <= self.grid.x0 || xi >= self.grid.x_max() {
            let right = !self.is_constant() && xi >= self.grid.x_max();
            let (v, u, phi) = if right { (fan.v_plus, fan.u_plus, fan.phi_plus) } else { (fan.v_mid, fan.u_mid, fan.phi_mid) };
            return ProfilePoint { v, u, phi, h: u, ..Default::default() };
        }
        let dx = self.grid.dx;
        let s = (xi - self.grid.x0) / dx;
        let i = (s.floor() as usize).min(self.grid.n - 2);
        let t = s - i as f64;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let herm = |f: &[f64], fp: &[f64]| h00 * f[i] + h10 * dx * fp[i] + h01 * f[i + 1] + h11 * dx * fp[i + 1];
        let lin = |f: &[f64]| (1.0 - t) * f[i] + t * f[i + 1];
        let v = herm(&self.v, &self.v_p);
        let v_p = herm(&self.v_p, &self.v_pp);
        let phi = herm(&self.phi, &self.phi_p);
        let phi_p = herm(&self.phi_p, &self.phi_pp);
        let v_pp = lin(&self.v_pp);
        let phi_pp = lin(&self.phi_pp);
        let u = fan.u_mid - self.sigma * (v - fan.v_mid);
        let u_p = -self.sigma * v_p;
        let h = u - v_p / v;
        let h_p = u_p - v_pp / v + v_p * v_p / (v * v);
        ProfilePoint { v, u, phi, h, v_p, u_p, phi_p, v_pp, phi_pp, h_p }
    }
}

/// Packed unknowns: `x[2i] = ln v_i`, `x[2i+1] = φ_i`.
struct ProfileSystem {
    n: usize,
    center: usize,
    dx: f64,
    sigma: f64,
    momentum: f64,
    ln_anchor: f64,
    phi_left: f64,
    phi_right: f64,
}

impl ProfileSystem {
    fn residual(&self, x: &[f64]) -> Vec<f64> {
        let mut r = vec![0.0; 2 * self.n];
        self.assemble(x, &mut r, None);
        r
    }

    fn assemble(&self, x: &[f64], r: &mut [f64], mut jac: Option<&mut BandedMatrix>) {
        let (n, dx, s) = (self.n, self.dx, self.sigma);
        let s2 = s * s;
        let dx2 = dx * dx;
        let w = |i: usize| x[2 * i];
        let p = |i: usize| x[2 * i + 1];
        // box equations on cells j = 0..n-1
        for j in 0..n - 1 {
            let (w0, w1, p0, p1) = (w(j), w(j + 1), p(j), p(j + 1));
            let (v0, v1) = (w0.exp(), w1.exp());
            let (iv0, iv1) = (1.0 / v0, 1.0 / v1);
            let k = 0.5 * (iv0 + iv1);
            let dphi = p1 - p0;
            let z = k * dphi / dx;
            let (e0, e1) = (p0.exp(), p1.exp());
            let val = s * (w1 - w0) / dx - self.momentum + 0.5 * s2 * (v0 + v1) + k - 0.5 * z * z + 0.5 * (e0 + e1);
            let row = if j < self.center { 2 * j } else { 2 * (j + 1) };
            r[row] = val;
            if let Some(m) = jac.as_deref_mut() {
                let g = 1.0 - z * dphi / dx;
                m.set(row, 2 * j, -s / dx + 0.5 * s2 * v0 - 0.5 * iv0 * g);
                m.set(row, 2 * j + 2, s / dx + 0.5 * s2 * v1 - 0.5 * iv1 * g);
                m.set(row, 2 * j + 1, z * k / dx + 0.5 * e0);
                m.set(row, 2 * j + 3, -z * k / dx + 0.5 * e1);
            }
        }
        let c = self.center;
        r[2 * c] = w(c) - self.ln_anchor;
        if let Some(m) = jac.as_deref_mut() {
            m.set(2 * c, 2 * c, 1.0);
        }
        // Poisson rows
        r[1] = p(0) - self.phi_left;
        r[2 * n - 1] = p(n - 1) - self.phi_right;
        if let Some(m) = jac.as_deref_mut() {
            m.set(1, 1, 1.0);
            m.set(2 * n - 1, 2 * n - 1, 1.0);
        }
        for i in 1..n - 1 {
            let (wm, wi, wp) = (w(i - 1), w(i), w(i + 1));
            let (pm, pi, pp) = (p(i - 1), p(i), p(i + 1));
            let (ivm, ivi, ivp) = ((-wm).exp(), (-wi).exp(), (-wp).exp());
            let kp = 0.5 * (ivi + ivp);
            let km = 0.5 * (ivm + ivi);
            let vi = wi.exp();
            let src = vi * pi.exp();
            let row = 2 * i + 1;
            r[row] = -(kp * (pp - pi) - km * (pi - pm)) / dx2 - 1.0 + src;
            if let Some(m) = jac.as_deref_mut() {
                m.set(row, 2 * i + 3, -kp / dx2);
                m.set(row, 2 * i - 1, -km / dx2);
                m.set(row, 2 * i + 1, (kp + km) / dx2 + src);
                m.set(row, 2 * i, 0.5 * ivi * ((pp - pi) - (pi - pm)) / dx2 + src);
                m.set(row, 2 * i + 2, 0.5 * ivp * (pp - pi) / dx2);
                m.set(row, 2 * i - 2, -0.5 * ivm * (pi - pm) / dx2);
            }
        }
    }
}

/// Quasi-neutral initial guess: `σ w' = K - σ² e^w - 2 e^{-w}` integrated
/// outwards from the anchor with classical RK4.
fn quasi_neutral_guess(fan: &RiemannFan, grid: &UniformGrid, center: usize, momentum: f64) -> Vec<f64> {
    let s = fan.sigma;
    let f = |w: f64| (momentum - s * s * w.exp() - 2.0 * (-w).exp()) / s;
    let rk4 = |w: f64, h: f64| {
        let k1 = f(w);
        let k2 = f(w + 0.5 * h * k1);
        let k3 = f(w + 0.5 * h * k2);
        let k4 = f(w + h * k3);
        w + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    };
    let (lo, hi) = (fan.v_mid.ln(), fan.v_plus.ln());
    let mut w = vec![0.0; grid.n];
    w[center] = (0.5 * (fan.v_mid + fan.v_plus)).ln();
    for i in center + 1..grid.n {
        w[i] = rk4(w[i - 1], grid.dx).clamp(lo, hi);
    }
    for i in (0..center).rev() {
        w[i] = rk4(w[i + 1], -grid.dx).clamp(lo, hi);
    }
    w
}

/// Computes the anchored 2-shock profile of `fan`.
pub fn solve_profile(fan: &RiemannFan, opts: &ProfileOptions) -> Result<ShockProfile> {
    if !fan.has_shock() {
        return Ok(ShockProfile::constant(*fan));
    }
    let delta_s = fan.delta_s;
    let rates = tail_rates(fan)?;
    let slow = rates.left.min(rates.right);
    let half_length = opts.half_length.unwrap_or_else(|| (40.0 / slow).max(200.0));
    let dx = opts.dxi.unwrap_or_else(|| (0.01 / delta_s).min(0.05));
    let grid = UniformGrid::symmetric(half_length, dx)?;
    let n = grid.n;
    let center = (n - 1) / 2;
    let sigma = fan.sigma;
    let anchor = 0.5 * (fan.v_mid + fan.v_plus);
    let system = ProfileSystem {
        n,
        center,
        dx: grid.dx,
        sigma,
        momentum: sigma * sigma * fan.v_mid + p_tilde(fan.v_mid),
        ln_anchor: anchor.ln(),
        phi_left: fan.phi_mid,
        phi_right: fan.phi_plus,
    };

    let guess = quasi_neutral_guess(fan, &grid, center, system.momentum);
    let mut x = vec![0.0; 2 * n];
    for i in 0..n {
        x[2 * i] = guess[i];
        x[2 * i + 1] = -guess[i];
    }
    let mut r = system.residual(&x);
    let mut norm = max_abs(&r);
    let mut iterations = 0;
    while norm > opts.tol {
        if iterations >= opts.max_iter {
            return Err(WaveError::Connection {
                delta_s,
                reason: format!("Newton stalled at residual {norm:e} after {iterations} iterations; try a smaller amplitude"),
            });
        }
        iterations += 1;
        let mut jac = BandedMatrix::zeros(2 * n, 3, 3);
        system.assemble(&x, &mut r, Some(&mut jac));
        let step = jac.solve(&r).map_err(|e| WaveError::Connection { delta_s, reason: e.to_string() })?;
        let mut lambda = 1.0;
        loop {
            let trial: Vec<f64> = x.iter().zip(&step).map(|(a, d)| a - lambda * d).collect();
            let r_trial = system.residual(&trial);
            let n_trial = max_abs(&r_trial);
            if n_trial.is_finite() && (n_trial < norm || lambda < 1e-3) {
                x = trial;
                r = r_trial;
                norm = n_trial;
                break;
            }
            lambda *= 0.5;
        }
        if !norm.is_finite() {
            return Err(WaveError::Connection { delta_s, reason: "Newton iterate diverged".into() });
        }
        if lambda < 1e-3 && iterations > 5 && norm > 1e3 * opts.tol {
            return Err(WaveError::Connection {
                delta_s,
                reason: format!("no descent direction at residual {norm:e}; try a smaller amplitude"),
            });
        }
        // the last digits of the residual are round-off
        if max_abs(&step) < 1e-15 {
            break;
        }
    }

    let v: Vec<f64> = (0..n).map(|i| x[2 * i].exp()).collect();
    let phi: Vec<f64> = (0..n).map(|i| x[2 * i + 1]).collect();
    let v_p = d1_fourth(&v, grid.dx);
    let v_pp = d2_fourth(&v, grid.dx);
    let phi_p = d1_fourth(&phi, grid.dx);
    let phi_pp = d2_fourth(&phi, grid.dx);
    let u: Vec<f64> = v.iter().map(|vi| fan.u_mid - sigma * (vi - fan.v_mid)).collect();
    let u_p: Vec<f64> = v_p.iter().map(|d| -sigma * d).collect();
    let h: Vec<f64> = (0..n).map(|i| u[i] - v_p[i] / v[i]).collect();
    Ok(ShockProfile {
        fan: *fan,
        grid,
        sigma,
        anchor,
        rates: Some(rates),
        newton_iterations: iterations,
        v,
        u,
        phi,
        h,
        v_p,
        u_p,
        phi_p,
        v_pp,
        phi_pp,
    })
}

/// Fit of one exponential tail.
#[derive(Debug, Clone, Serialize)]
pub struct TailFit {
    pub side: &'static str,
    /// Fitted decay rate of `|v - v_end|`.
    pub rate: f64,
    pub r_squared: f64,
    /// Fitted decay rate of `|v'|`.
    pub derivative_rate: f64,
    pub derivative_r_squared: f64,
    pub window: (f64, f64),
    pub points: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct TailReport {
    pub delta_s: f64,
    pub left: Option<TailFit>,
    pub right: Option<TailFit>,
    pub predicted_left_rate: f64,
    pub predicted_right_rate: f64,
    pub max_slope: f64,
    /// `max |v'| / δ_S²`.
    pub slope_ratio: f64,
    pub endpoint_deviation: f64,
    pub anchor_error: f64,
    /// Exponential decay with R² > 0.99 on both tails and rates agreeing
    /// within a factor of four.
    pub exponential: bool,
}

/// Samples below this deviation are treated as round-off.
const TAIL_FLOOR: f64 = 1e-11;

fn fit_tail(profile: &ShockProfile, left: bool) -> Option<TailFit> {
    let xs = profile.points();
    let c = (profile.grid.n - 1) / 2;
    let end = if left { profile.fan.v_mid } else { profile.fan.v_plus };
    let idx: Vec<usize> = if left { (0..c).rev().collect() } else { (c + 1..profile.grid.n).collect() };
    // resolved part of the tail: from the anchor to the first sample below the floor
    let mut last = None;
    for &i in &idx {
        if (profile.v[i] - end).abs() < TAIL_FLOOR {
            break;
        }
        last = Some(i);
    }
    let last = last?;
    let extent = xs[last].abs();
    let (a, b) = (0.7 * extent, extent);
    let sel: Vec<usize> = idx.iter().copied().filter(|&i| xs[i].abs() >= a && xs[i].abs() <= b).collect();
    let x: Vec<f64> = sel.iter().map(|&i| xs[i].abs()).collect();
    let y: Vec<f64> = sel.iter().map(|&i| (profile.v[i] - end).abs().ln()).collect();
    let yd: Vec<f64> = sel.iter().map(|&i| profile.v_p[i].abs().max(1e-300).ln()).collect();
    let f: LineFit = fit_line(&x, &y)?;
    let fd: LineFit = fit_line(&x, &yd)?;
    Some(TailFit {
        side: if left { "left" } else { "right" },
        rate: -f.slope,
        r_squared: f.r_squared,
        derivative_rate: -fd.slope,
        derivative_r_squared: fd.r_squared,
        window: if left { (-b, -a) } else { (a, b) },
        points: sel.len(),
    })
}

/// Max-norm residuals of the traveling-wave equations in their original
/// second-order form,
///
/// ```text
/// σ v' + u' = 0
/// σ u' - p(v)' + (u'/v)' - φ'/v = 0
/// -(φ'/v)' - 1 + v e^φ = 0
/// ```
///
/// with fourth-order differences of the sampled fields (four nodes trimmed
/// at each end). Zero for a constant profile.
pub fn unreduced_residual(profile: &ShockProfile) -> [f64; 3] {
    let n = profile.grid.n;
    if profile.is_constant() || n < 9 {
        return [0.0; 3];
    }
    let dx = profile.grid.dx;
    let s = profile.sigma;
    let visc: Vec<f64> = (0..n).map(|i| profile.u_p[i] / profile.v[i]).collect();
    let flux: Vec<f64> = (0..n).map(|i| profile.phi_p[i] / profile.v[i]).collect();
    let visc_p = d1_fourth(&visc, dx);
    let flux_p = d1_fourth(&flux, dx);
    let mut worst = [0.0f64; 3];
    for i in 4..n - 4 {
        let v = profile.v[i];
        let r = [
            s * profile.v_p[i] + profile.u_p[i],
            s * profile.u_p[i] + profile.v_p[i] / (v * v) + visc_p[i] - flux[i],
            -flux_p[i] - 1.0 + v * profile.phi[i].exp(),
        ];
        for k in 0..3 {
            worst[k] = worst[k].max(r[k].abs());
        }
    }
    worst
}

/// Log-linear fits of both exponential tails plus amplitude scalings.
pub fn verify_tail(profile: &ShockProfile) -> TailReport {
    let fan = &profile.fan;
    let left = fit_tail(profile, true);
    let right = fit_tail(profile, false);
    let max_slope = max_abs(&profile.v_p);
    let n = profile.grid.n;
    let endpoint_deviation = (profile.v[0] - fan.v_mid).abs().max((profile.v[n - 1] - fan.v_plus).abs());
    let anchor_error = (profile.eval(0.0).v - profile.anchor).abs();
    let exponential = match (&left, &right) {
        (Some(l), Some(r)) => {
            let ratio = l.rate / r.rate;
            l.r_squared > 0.99 && r.r_squared > 0.99 && l.rate > 0.0 && r.rate > 0.0 && (0.25..=4.0).contains(&ratio)
        }
        _ => false,
    };
    let rates = profile.rates.unwrap_or(TailRates { left: 0.0, right: 0.0 });
    TailReport {
        delta_s: fan.delta_s,
        left,
        right,
        predicted_left_rate: rates.left,
        predicted_right_rate: rates.right,
        max_slope,
        slope_ratio: if fan.delta_s > 0.0 { max_slope / (fan.delta_s * fan.delta_s) } else { 0.0 },
        endpoint_deviation,
        anchor_error,
        exponential,
    }
}
