//! Perturbation diagnostics: effective velocity, relative quantities, the
//! modulated relative functional `η`, good/dissipation terms and norms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::composite::{CompositePoint, CompositeWave};
use crate::error::{Result, WaveError};
use crate::numerics::{d1, d2, max_abs, trapezoid, UniformGrid};
use crate::poisson::poisson_residual;
use crate::shift::ShiftState;
use crate::thermo::{dp_tilde, p_tilde};

/// `h = u - v_ξ/v` with centered differences.
pub fn effective_velocity(v: &[f64], u: &[f64], dx: f64) -> Vec<f64> {
    let vx = d1(v, dx);
    (0..v.len()).map(|i| u[i] - vx[i] / v[i]).collect()
}

fn check_positive(v: f64, vbar: f64) -> Result<()> {
    if v > 0.0 && vbar > 0.0 {
        Ok(())
    } else {
        Err(WaveError::domain(format!("relative quantities need positive volumes, got ({v}, {vbar})")))
    }
}

/// `Q(v|v̄) = -2 ln(v/v̄) + (2/v̄)(v - v̄)`, the relative form of `-2 ln v`.
pub fn relative_q(v: f64, vbar: f64) -> Result<f64> {
    check_positive(v, vbar)?;
    Ok(relative_q_unchecked(v, vbar))
}

fn relative_q_unchecked(v: f64, vbar: f64) -> f64 {
    let e = (v - vbar) / vbar;
    // ln_1p keeps the cancellation benign for small perturbations
    2.0 * (e - e.ln_1p())
}

/// `p̃(v|v̄) = p̃(v) - p̃(v̄) - p̃'(v̄)(v - v̄)`.
pub fn relative_pressure(v: f64, vbar: f64) -> Result<f64> {
    check_positive(v, vbar)?;
    Ok(p_tilde(v) - p_tilde(vbar) - dp_tilde(vbar) * (v - vbar))
}

/// Pointwise `η` given the perturbations and the reference `v̄`, `φ̄`.
pub fn eta_pointwise(h_tilde: f64, v: f64, vbar: f64, phibar: f64, phit_x: f64, phit_xx: f64) -> f64 {
    let w = (-phibar).exp();
    0.5 * h_tilde * h_tilde + relative_q_unchecked(v, vbar) - (v - vbar) * phit_xx / (vbar * vbar)
        + w * phit_xx * phit_xx / (2.0 * vbar.powi(3))
        + w * phit_x * phit_x / (2.0 * vbar * vbar)
}

/// Perturbation `(ṽ, ũ, φ̃, h̃)` and the difference derivatives.
#[derive(Debug, Clone)]
pub struct Perturbation {
    pub v: Vec<f64>,
    pub u: Vec<f64>,
    pub phi: Vec<f64>,
    pub h: Vec<f64>,
    pub v_x: Vec<f64>,
    pub v_xx: Vec<f64>,
    pub u_x: Vec<f64>,
    pub u_xx: Vec<f64>,
    pub phi_x: Vec<f64>,
    pub phi_xx: Vec<f64>,
    pub phi_xxx: Vec<f64>,
}

impl Perturbation {
    /// Differences are taken of the perturbations themselves.
    /// `h̃ = ũ - D(ln v - ln v̄) - [(ln v̄)_ξ - (ln v̄^S)_ξ]`, the bracket
    /// evaluated analytically.
    pub fn new(v: &[f64], u: &[f64], phi: &[f64], wave: &[CompositePoint], dx: f64) -> Self {
        let n = v.len();
        let vt: Vec<f64> = (0..n).map(|i| v[i] - wave[i].v).collect();
        let ut: Vec<f64> = (0..n).map(|i| u[i] - wave[i].u).collect();
        let pt: Vec<f64> = (0..n).map(|i| phi[i] - wave[i].phi).collect();
        let lr: Vec<f64> = (0..n).map(|i| (v[i] / wave[i].v).ln()).collect();
        let dlr = d1(&lr, dx);
        let h: Vec<f64> = (0..n)
            .map(|i| {
                let c = &wave[i];
                ut[i] - dlr[i] - (c.v_x / c.v - c.shock.v_p / c.shock.v)
            })
            .collect();
        let phi_x = d1(&pt, dx);
        let phi_xx = d2(&pt, dx);
        let phi_xxx = d1(&phi_xx, dx);
        Perturbation {
            v_x: d1(&vt, dx),
            v_xx: d2(&vt, dx),
            u_x: d1(&ut, dx),
            u_xx: d2(&ut, dx),
            v: vt,
            u: ut,
            phi: pt,
            h,
            phi_x,
            phi_xx,
            phi_xxx,
        }
    }

    pub fn eta(&self, v: &[f64], wave: &[CompositePoint]) -> Vec<f64> {
        (0..v.len())
            .map(|i| eta_pointwise(self.h[i], v[i], wave[i].v, wave[i].phi, self.phi_x[i], self.phi_xx[i]))
            .collect()
    }

    /// `∫(|h̃|² + |ṽ|² + |φ̃_ξ|² + |φ̃_ξξ|²)`.
    pub fn equivalence_measure(&self, dx: f64) -> f64 {
        let f: Vec<f64> = (0..self.v.len())
            .map(|i| self.h[i].powi(2) + self.v[i].powi(2) + self.phi_x[i].powi(2) + self.phi_xx[i].powi(2))
            .collect();
        trapezoid(&f, dx)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct GoodTerms {
    pub g1: f64,
    pub g2: f64,
    pub g3: f64,
    pub gs: f64,
    pub gr: f64,
    pub d: f64,
    /// False when `δ_S = 0` and G1 is reported as zero.
    pub g1_defined: bool,
}

fn integral(n: usize, dx: f64, f: impl Fn(usize) -> f64) -> f64 {
    let vals: Vec<f64> = (0..n).map(f).collect();
    trapezoid(&vals, dx)
}

pub fn good_terms(v: &[f64], pert: &Perturbation, wave: &[CompositePoint], shift: &ShiftState, dx: f64) -> GoodTerms {
    let n = v.len();
    let dp: Vec<f64> = (0..n).map(|i| p_tilde(v[i]) - p_tilde(wave[i].v)).collect();
    let g1_defined = shift.enabled();
    let g1 = if g1_defined {
        integral(n, dx, |i| wave[i].shock.v_p * (pert.h[i] - dp[i] / shift.sigma).powi(2)) / shift.delta_s.sqrt()
    } else {
        0.0
    };
    let ddp = d1(&dp, dx);
    GoodTerms {
        g1,
        g2: integral(n, dx, |i| pert.phi_xx[i].powi(2)),
        g3: integral(n, dx, |i| pert.phi_xxx[i].powi(2)),
        gs: integral(n, dx, |i| wave[i].shock.v_p * dp[i] * dp[i]),
        gr: integral(n, dx, |i| wave[i].v_r_x * pert.v[i] * pert.v[i]),
        d: integral(n, dx, |i| ddp[i] * ddp[i]),
        g1_defined,
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Norms {
    pub linf_v: f64,
    pub linf_u: f64,
    pub linf_phi: f64,
    pub l2_v: f64,
    pub l2_u: f64,
    pub h1_v: f64,
    pub h1_u: f64,
    pub h2_v: f64,
    pub h2_u: f64,
    pub h3_phi: f64,
}

fn l2(f: &[f64], dx: f64) -> f64 {
    let sq: Vec<f64> = f.iter().map(|x| x * x).collect();
    trapezoid(&sq, dx).sqrt()
}

pub fn norms(pert: &Perturbation, dx: f64) -> Norms {
    let (lv, lvx, lvxx) = (l2(&pert.v, dx), l2(&pert.v_x, dx), l2(&pert.v_xx, dx));
    let (lu, lux, luxx) = (l2(&pert.u, dx), l2(&pert.u_x, dx), l2(&pert.u_xx, dx));
    let lp = [l2(&pert.phi, dx), l2(&pert.phi_x, dx), l2(&pert.phi_xx, dx), l2(&pert.phi_xxx, dx)];
    Norms {
        linf_v: max_abs(&pert.v),
        linf_u: max_abs(&pert.u),
        linf_phi: max_abs(&pert.phi),
        l2_v: lv,
        l2_u: lu,
        h1_v: (lv * lv + lvx * lvx).sqrt(),
        h1_u: (lu * lu + lux * lux).sqrt(),
        h2_v: (lv * lv + lvx * lvx + lvxx * lvxx).sqrt(),
        h2_u: (lu * lu + lux * lux + luxx * luxx).sqrt(),
        h3_phi: lp.iter().map(|x| x * x).sum::<f64>().sqrt(),
    }
}

/// Max of the discrete Poisson residuals of `(v, φ)` and of the sampled,
/// shifted shock component.
pub fn elliptic_residual(v: &[f64], phi: &[f64], wave: &[CompositePoint], dx: f64) -> f64 {
    let vs: Vec<f64> = wave.iter().map(|c| c.shock.v).collect();
    let ps: Vec<f64> = wave.iter().map(|c| c.shock.phi).collect();
    max_abs(&poisson_residual(v, phi, dx, None)).max(max_abs(&poisson_residual(&vs, &ps, dx, None)))
}

/// One row of `report.csv`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct EnergyReport {
    pub t: f64,
    pub x: f64,
    pub xdot: f64,
    pub norms: Norms,
    pub eta_weighted: f64,
    pub good: GoodTerms,
    pub mass_balance_residual: f64,
}

impl EnergyReport {
    pub const HEADER: &'static str =
        "t,X,Xdot,Linf_v,Linf_u,Linf_phi,L2_v,L2_u,H2_v,H2_u,eta_weighted,G1,G2,G3,GS,GR,D,mass_balance_residual";

    pub fn csv_row(&self) -> String {
        let n = &self.norms;
        let g = &self.good;
        [
            self.t,
            self.x,
            self.xdot,
            n.linf_v,
            n.linf_u,
            n.linf_phi,
            n.l2_v,
            n.l2_u,
            n.h2_v,
            n.h2_u,
            self.eta_weighted,
            g.g1,
            g.g2,
            g.g3,
            g.gs,
            g.gr,
            g.d,
            self.mass_balance_residual,
        ]
        .iter()
        .map(|x| format!("{x:.16e}"))
        .collect::<Vec<_>>()
        .join(",")
    }
}

/// `∫ a^X η`.
pub fn weighted_eta(v: &[f64], pert: &Perturbation, wave: &[CompositePoint], shift: &ShiftState, dx: f64) -> f64 {
    let eta = pert.eta(v, wave);
    integral(v.len(), dx, |i| shift.weight(wave[i].shock.v) * eta[i])
}

/// Regression bounds for `∫η / S` on the reference fan with perturbation
/// amplitudes up to 1e-2, frozen after calibration (observed range
/// 0.498–0.705 over four seeds of 100 samples).
pub const ETA_EQUIVALENCE_BOUNDS: (f64, f64) = (0.45, 0.80);

/// Calibration summary of `∫η / S` over random smooth perturbations.
#[derive(Debug, Clone, Serialize)]
pub struct EquivalenceStudy {
    pub samples: usize,
    pub amplitude: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
}

/// Random perturbations: sums of three Gaussians in `v`, `u`, `φ` with
/// amplitudes up to `amplitude`, widths in `[1, 4]` and centers in
/// `[-10, 10]`, on the wave at `t = 0`, `X = 0`.
pub fn eta_equivalence(wave: &CompositeWave, samples: usize, amplitude: f64, seed: u64) -> Result<EquivalenceStudy> {
    let grid = UniformGrid::symmetric(60.0, 0.05)?;
    let xs = grid.points();
    let comp = wave.sample(0.0, 0.0, &xs);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for _ in 0..samples {
        let bump = |rng: &mut ChaCha8Rng| {
            let parts: Vec<(f64, f64, f64)> = (0..3)
                .map(|_| (rng.gen_range(-amplitude..=amplitude), rng.gen_range(-10.0..=10.0), rng.gen_range(1.0..=4.0)))
                .collect();
            xs.iter()
                .map(|x| parts.iter().map(|(a, c, w)| a * (-(x - c).powi(2) / (2.0 * w * w)).exp()).sum::<f64>())
                .collect::<Vec<f64>>()
        };
        let (bv, bu, bp) = (bump(&mut rng), bump(&mut rng), bump(&mut rng));
        let v: Vec<f64> = (0..xs.len()).map(|i| comp[i].v + bv[i]).collect();
        let u: Vec<f64> = (0..xs.len()).map(|i| comp[i].u + bu[i]).collect();
        let phi: Vec<f64> = (0..xs.len()).map(|i| comp[i].phi + bp[i]).collect();
        let pert = Perturbation::new(&v, &u, &phi, &comp, grid.dx);
        let eta = trapezoid(&pert.eta(&v, &comp), grid.dx);
        let s = pert.equivalence_measure(grid.dx);
        if s > 0.0 {
            let r = eta / s;
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    Ok(EquivalenceStudy { samples, amplitude, min_ratio: lo, max_ratio: hi })
}
