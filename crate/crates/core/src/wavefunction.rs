//! Classical complex trajectory and the stochastic wave functionals built on it.
//!
//! `ξ̈ + Ω²(t) ξ = 0` with `ξ → e^{iΩ_in t}` in the past. With `σ = |ξ|` and
//! the stochastic time `τ = ∫ dt'/σ²`, the basis functional is
//!
//! `Ψ_n = (Ω_in/π)^{1/4} (2ⁿ n! σ)^{-1/2} exp(-i(n+½)Ω_in τ + i(ξ̇/ξ) x²/2) H_n(√Ω_in x/σ)`.
//!
//! The lower limit of `τ` is taken at the start `t0` of the trajectory, where
//! `ξ` is still the free solution, and the elapsed `t0` is added back so the
//! constant-frequency case reproduces the in-state at every `t`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::langevin::{ThetaPath, XiState};
use crate::model::{BarrierProfile, Side};
use crate::numerics::{hermite_function, GaussHermite};

/// Highest quantum number accepted by the wave functionals.
pub const MAX_LEVEL: usize = 32;
/// Largest phase advance per step accepted by [`solve_xi`].
pub const MAX_PHASE_STEP: f64 = 0.1;
/// Smallest ensemble accepted by the Monte Carlo estimators.
pub const MIN_ENSEMBLE: usize = 1000;
/// Relative standard error above which an estimate carries a warning.
pub const PRECISION_WARNING: f64 = 0.2;
/// Gauss-Hermite nodes used for overlaps.
pub const OVERLAP_NODES: usize = 40;

/// Sampled solution of `ξ̈ = -Ω² ξ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexTrajectory {
    pub times: Vec<f64>,
    pub xi: Vec<Complex64>,
    pub xi_dot: Vec<Complex64>,
    pub sigma: Vec<f64>,
    /// `∫_{t0}^t dt'/σ²`.
    pub tau: Vec<f64>,
    /// Continuous `arg ξ`.
    pub phase: Vec<f64>,
    pub omega_in: f64,
}

/// One value of a wave functional.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveSample {
    pub n: usize,
    pub x: f64,
    pub t: f64,
    pub value: Complex64,
}

impl ComplexTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn t0(&self) -> f64 {
        self.times[0]
    }

    /// `Im(ξ̄ ξ̇)` at node `i`.
    pub fn wronskian(&self, i: usize) -> f64 {
        (self.xi[i].conj() * self.xi_dot[i]).im
    }

    /// Largest relative drift of the Wronskian from `Ω_in`.
    pub fn wronskian_drift(&self) -> f64 {
        (0..self.len())
            .map(|i| (self.wronskian(i) / self.omega_in - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Node index whose time equals `t` up to round-off.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        let tol = 1e-9 * t.abs().max(1.0);
        let i = self.times.partition_point(|&s| s < t - tol);
        if i < self.len() && (self.times[i] - t).abs() <= tol {
            Ok(i)
        } else {
            Err(Error::Timing(format!(
                "t = {t} is not a node of the trajectory on [{}, {}]",
                self.t0(),
                self.times[self.len() - 1]
            )))
        }
    }

    /// `Ω_in (t0 + τ)`, the phase clock of the wave functional at node `i`.
    fn clock(&self, i: usize) -> f64 {
        self.omega_in * (self.t0() + self.tau[i])
    }

    /// `ξ = c₁ e^{iΩt} + c₂ e^{-iΩt}` fitted at node `i` for a region of
    /// constant frequency `omega`.
    pub fn plane_wave_coefficients(&self, i: usize, omega: f64) -> (Complex64, Complex64) {
        let t = self.times[i];
        let e = Complex64::from_polar(1.0, omega * t);
        let d = self.xi_dot[i] / (Complex64::i() * omega);
        ((self.xi[i] + d) / (2.0 * e), (self.xi[i] - d) * e / 2.0)
    }
}

#[derive(Debug, Clone, Copy)]
struct Rk {
    xi: Complex64,
    xi_dot: Complex64,
    tau: f64,
}

/// One classical RK4 step; `w2(s)` is `Ω²` at stage time `s`.
fn rk4(y: Rk, t: f64, h: f64, w2: impl Fn(f64) -> f64) -> Rk {
    let f = |s: f64, y: Rk| Rk {
        xi: y.xi_dot,
        xi_dot: -y.xi * w2(s),
        tau: 1.0 / y.xi.norm_sqr(),
    };
    let add = |y: Rk, k: Rk, c: f64| Rk {
        xi: y.xi + k.xi * c,
        xi_dot: y.xi_dot + k.xi_dot * c,
        tau: y.tau + k.tau * c,
    };
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * h, add(y, k1, 0.5 * h));
    let k3 = f(t + 0.5 * h, add(y, k2, 0.5 * h));
    let k4 = f(t + h, add(y, k3, h));
    Rk {
        xi: y.xi + (k1.xi + k2.xi * 2.0 + k3.xi * 2.0 + k4.xi) * (h / 6.0),
        xi_dot: y.xi_dot + (k1.xi_dot + k2.xi_dot * 2.0 + k3.xi_dot * 2.0 + k4.xi_dot) * (h / 6.0),
        tau: y.tau + (k1.tau + 2.0 * k2.tau + 2.0 * k3.tau + k4.tau) * (h / 6.0),
    }
}

struct Builder {
    traj: ComplexTrajectory,
}

impl Builder {
    fn new(omega_in: f64, t0: f64) -> Self {
        let xi = Complex64::from_polar(1.0, omega_in * t0);
        Self {
            traj: ComplexTrajectory {
                times: vec![t0],
                xi: vec![xi],
                xi_dot: vec![Complex64::i() * omega_in * xi],
                sigma: vec![1.0],
                tau: vec![0.0],
                phase: vec![omega_in * t0],
                omega_in,
            },
        }
    }

    fn last(&self) -> Rk {
        let k = self.traj.len() - 1;
        Rk {
            xi: self.traj.xi[k],
            xi_dot: self.traj.xi_dot[k],
            tau: self.traj.tau[k],
        }
    }

    fn push(&mut self, t: f64, y: Rk) -> Result<()> {
        let k = self.traj.len() - 1;
        let dphi = (y.xi * self.traj.xi[k].conj()).arg();
        if dphi.abs() > 0.5 {
            return Err(Error::Resolution(format!(
                "phase of xi advanced {dphi:.3} rad in one step near t = {t}"
            )));
        }
        let t_prev = self.traj.times[k];
        if !(y.tau > self.traj.tau[k]) {
            return Err(Error::Resolution(format!(
                "stochastic time stalled between t = {t_prev} and t = {t}"
            )));
        }
        self.traj.phase.push(self.traj.phase[k] + dphi);
        self.traj.times.push(t);
        self.traj.xi.push(y.xi);
        self.traj.xi_dot.push(y.xi_dot);
        self.traj.sigma.push(y.xi.norm());
        self.traj.tau.push(y.tau);
        Ok(())
    }
}

/// Integrates `ξ̈ = -Ω₀²(t) ξ` on `[t0, t1]` from the free solution at `t0`.
///
/// A step discontinuity of the profile is placed on a node, and each RK4
/// stage takes the one-sided frequency of its own interval.
pub fn solve_xi(profile: &BarrierProfile<f64>, t0: f64, t1: f64, dt: f64) -> Result<ComplexTrajectory> {
    profile.validate()?;
    if !(t1 > t0) || !(dt > 0.0) {
        return Err(Error::config("wavefunction.dt", "need t1 > t0 and dt > 0"));
    }
    let omega_in = profile.omega_in;
    if (profile.omega0_side(t0, Side::Left) - omega_in).abs() > 1e-10 {
        return Err(Error::Timing(format!(
            "t0 = {t0} is not in the initial region of the profile"
        )));
    }
    let omega_max = profile.omega_in.max(profile.omega_final());
    if omega_max * dt > MAX_PHASE_STEP {
        return Err(Error::Resolution(format!(
            "phase advance {:.3} rad per step exceeds {MAX_PHASE_STEP}",
            omega_max * dt
        )));
    }
    let mut breaks = vec![t0];
    if let Some(ts) = profile.discontinuity() {
        if t0 < ts && ts < t1 {
            breaks.push(ts);
        }
    }
    breaks.push(t1);
    let mut b = Builder::new(omega_in, t0);
    for w in breaks.windows(2) {
        let (a, c) = (w[0], w[1]);
        let steps = ((c - a) / dt).ceil().max(1.0) as usize;
        let h = (c - a) / steps as f64;
        for k in 0..steps {
            let ta = a + k as f64 * h;
            let tb = if k + 1 == steps { c } else { a + (k + 1) as f64 * h };
            let w2 = |s: f64| {
                let side = if s <= ta { Side::Right } else { Side::Left };
                profile.omega0_side(s, side).powi(2)
            };
            let y = rk4(b.last(), ta, tb - ta, w2);
            b.push(tb, y)?;
        }
    }
    Ok(b.traj)
}

/// Integrates `ξ̈ = -Ω²(t) ξ` for a realised `Ω²(t) = Ω₀²(t) + F(t)` given on
/// the nodes `times`, linear in between.
pub fn solve_xi_sampled(times: &[f64], omega_sq: &[f64], omega_in: f64) -> Result<ComplexTrajectory> {
    if times.len() != omega_sq.len() || times.len() < 2 {
        return Err(Error::config("wavefunction.omega_sq", "need matching times and samples, at least two"));
    }
    if !(omega_in > 0.0) {
        return Err(Error::config("wavefunction.omega_in", "must be > 0"));
    }
    if (omega_sq[0] - omega_in * omega_in).abs() > 1e-10 * omega_in * omega_in {
        return Err(Error::Timing("first sample must equal omega_in^2".into()));
    }
    let mut b = Builder::new(omega_in, times[0]);
    for k in 0..times.len() - 1 {
        let (ta, tb) = (times[k], times[k + 1]);
        let h = tb - ta;
        if !(h > 0.0) {
            return Err(Error::config("wavefunction.times", "must be strictly increasing"));
        }
        let (wa, wb) = (omega_sq[k], omega_sq[k + 1]);
        if wa.abs().max(wb.abs()).sqrt() * h > MAX_PHASE_STEP {
            return Err(Error::Resolution(format!("phase advance per step exceeds {MAX_PHASE_STEP} near t = {ta}")));
        }
        let y = rk4(b.last(), ta, h, |s| wa + (wb - wa) * (s - ta) / h);
        b.push(tb, y)?;
    }
    Ok(b.traj)
}

fn check_level(n: usize) -> Result<()> {
    if n > MAX_LEVEL {
        Err(Error::UnsupportedOrder {
            order: n,
            max: MAX_LEVEL,
        })
    } else {
        Ok(())
    }
}

/// Harmonic-oscillator eigenstate with its stationary phase.
pub fn psi_in(n: usize, x: f64, t: f64, omega_in: f64) -> Result<Complex64> {
    check_level(n)?;
    let amp = omega_in.powf(0.25) * hermite_function(n, omega_in.sqrt() * x)?;
    Ok(Complex64::from_polar(amp, -(n as f64 + 0.5) * omega_in * t))
}

/// The wave functional for a state `(ξ, ξ̇)` and phase clock `Ω_in τ`.
///
/// Uses `Im(ξ̇/ξ) = W/σ²` to split the `x²` exponent into the Gaussian of
/// the normalised Hermite function and a residual `(W - Ω_in)` factor.
pub fn psi_from_state(
    n: usize,
    x: f64,
    xi: Complex64,
    xi_dot: Complex64,
    clock: f64,
    omega_in: f64,
) -> Result<Complex64> {
    check_level(n)?;
    let s2 = xi.norm_sqr();
    let sigma = s2.sqrt();
    if !(sigma >= 1e-12) {
        return Err(Error::EvaluationPoint(format!("|xi| = {sigma:e} too close to a node")));
    }
    let ratio = xi_dot / xi;
    let y = omega_in.sqrt() * x / sigma;
    let w = ratio.im * s2;
    let amp = omega_in.sqrt().sqrt() / sigma.sqrt()
        * hermite_function(n, y)?
        * (-(w - omega_in) * x * x / (2.0 * s2)).exp();
    let arg = ratio.re * x * x / 2.0 - (n as f64 + 0.5) * clock;
    Ok(Complex64::from_polar(amp, arg))
}

/// `Ψ_n(x, t)` along a solved trajectory; `t` must be a node.
pub fn psi_stc(n: usize, x: f64, t: f64, traj: &ComplexTrajectory) -> Result<Complex64> {
    let i = traj.index_of(t)?;
    psi_from_state(n, x, traj.xi[i], traj.xi_dot[i], traj.clock(i), traj.omega_in)
}

/// `⟨Ψ̄_m Ψ_n⟩_x` at node time `t` by Gauss-Hermite quadrature on the
/// instantaneous width `σ/√Ω_in`.
pub fn overlap_matrix(traj: &ComplexTrajectory, t: f64, n_max: usize) -> Result<Vec<Vec<Complex64>>> {
    check_level(n_max)?;
    let i = traj.index_of(t)?;
    let gh = GaussHermite::<f64>::new(OVERLAP_NODES)?;
    let s = traj.sigma[i] / traj.omega_in.sqrt();
    let nodes: Vec<(f64, f64)> = gh.scaled(s).collect();
    let values: Vec<Vec<Complex64>> = (0..=n_max)
        .map(|n| {
            nodes
                .iter()
                .map(|&(x, _)| psi_from_state(n, x, traj.xi[i], traj.xi_dot[i], traj.clock(i), traj.omega_in))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok((0..=n_max)
        .map(|m| {
            (0..=n_max)
                .map(|n| {
                    nodes
                        .iter()
                        .enumerate()
                        .map(|(k, &(_, w))| values[m][k].conj() * values[n][k] * w)
                        .sum()
                })
                .collect()
        })
        .collect())
}

/// Largest entry of `|⟨Ψ̄_m Ψ_n⟩ - δ_mn|`.
pub fn orthonormality_defect(traj: &ComplexTrajectory, t: f64, n_max: usize) -> Result<f64> {
    let m = overlap_matrix(traj, t, n_max)?;
    let mut worst = 0.0f64;
    for (a, row) in m.iter().enumerate() {
        for (b, v) in row.iter().enumerate() {
            let e = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((v - e).norm());
        }
    }
    Ok(worst)
}

/// Monte Carlo mean with per-component standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub mean: Complex64,
    /// Standard errors of the real and imaginary parts.
    pub std_error: Complex64,
    pub samples: usize,
    /// Set when the relative standard error exceeds [`PRECISION_WARNING`].
    pub warning: Option<String>,
}

impl Estimate {
    pub fn from_samples(values: &[Complex64]) -> Result<Self> {
        let n = values.len();
        if n < 2 {
            return Err(Error::Sampling("need at least two samples".into()));
        }
        let nf = n as f64;
        let mean: Complex64 = values.iter().sum::<Complex64>() / nf;
        let (vr, vi) = values.iter().fold((0.0, 0.0), |(a, b), v| {
            let d = v - mean;
            (a + d.re * d.re, b + d.im * d.im)
        });
        let std_error = Complex64::new((vr / (nf - 1.0) / nf).sqrt(), (vi / (nf - 1.0) / nf).sqrt());
        Ok(Self::finish(mean, std_error, n))
    }

    /// Self-normalised weighted mean `Σ wᵢ vᵢ / Σ wᵢ` with the delta-method
    /// standard error.
    pub fn weighted(values: &[Complex64], weights: &[f64]) -> Result<Self> {
        let n = values.len();
        if n < 2 || weights.len() != n {
            return Err(Error::Sampling("need at least two weighted samples".into()));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::Sampling(format!("weights sum to {total}")));
        }
        let mean: Complex64 = values.iter().zip(weights).map(|(v, w)| v * *w).sum::<Complex64>() / total;
        let (vr, vi) = values.iter().zip(weights).fold((0.0, 0.0), |(a, b), (v, w)| {
            let d = (v - mean) * *w;
            (a + d.re * d.re, b + d.im * d.im)
        });
        let std_error = Complex64::new(vr.sqrt() / total, vi.sqrt() / total);
        Ok(Self::finish(mean, std_error, n))
    }

    fn finish(mean: Complex64, std_error: Complex64, samples: usize) -> Self {
        let rel = std_error.norm() / mean.norm();
        let warning = (rel > PRECISION_WARNING).then(|| {
            let msg = format!("relative standard error {rel:.3} above {PRECISION_WARNING}");
            log::debug!("{msg}");
            msg
        });
        Self {
            mean,
            std_error,
            samples,
            warning,
        }
    }

    /// `|a - b|` in units of the combined standard error.
    pub fn z_score(&self, other: &Estimate) -> f64 {
        let se = (self.std_error.norm_sqr() + other.std_error.norm_sqr()).sqrt();
        (self.mean - other.mean).norm() / se
    }
}

/// Co-evolved `ξ` of each path, checked against the evaluation time `t`.
pub(crate) fn path_states(paths: &[ThetaPath], t: f64) -> Result<Vec<XiState>> {
    if paths.len() < MIN_ENSEMBLE {
        return Err(Error::Sampling(format!(
            "ensemble of {} paths is below the minimum {MIN_ENSEMBLE}",
            paths.len()
        )));
    }
    paths
        .iter()
        .map(|p| {
            if (p.t_end - t).abs() > 1e-9 * t.abs().max(1.0) {
                return Err(Error::Timing(format!("path ends at {} but t = {t}", p.t_end)));
            }
            p.xi_end
                .ok_or_else(|| Error::config("sde.track_xi", "paths were simulated without the complex trajectory"))
        })
        .collect()
}

/// Ensemble mean of `Ψ_n(x, t)` over Langevin paths.
///
/// Each path carries the `ξ` driven by its own noise realisation, so the
/// sampled paths already carry the Fokker-Planck weight and the
/// normalisation is the plain `1/N`.
pub fn psi_br_estimate(n: usize, x: f64, t: f64, paths: &[ThetaPath], profile: &BarrierProfile<f64>) -> Result<Estimate> {
    check_level(n)?;
    let states = path_states(paths, t)?;
    let omega_in = profile.omega_in;
    // `phase` obeys d(phase)/dt = W/σ² = Ω_in/σ², the same clock as Ω_in (t0 + τ).
    let values = states
        .par_iter()
        .map(|s| psi_from_state(n, x, s.xi, s.xi_dot, s.phase, omega_in))
        .collect::<Result<Vec<_>>>()?;
    Estimate::from_samples(&values)
}

/// Samples of `Ψ_n(·, t)` on `xs`.
pub fn sample_psi(n: usize, xs: &[f64], t: f64, traj: &ComplexTrajectory) -> Result<Vec<WaveSample>> {
    xs.iter()
        .map(|&x| {
            Ok(WaveSample {
                n,
                x,
                t,
                value: psi_stc(n, x, t, traj)?,
            })
        })
        .collect()
}
