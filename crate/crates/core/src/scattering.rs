//! Transition amplitudes of the random oscillator.
//!
//! Per path, the overlap of the out-state generating function with the
//! stochastic generating functional is Gaussian in `x`:
//!
//! `I(z₁, z₂) = (Ω_in Ω_out)^{1/4} (2/(Aξ))^{1/2} exp(-(C - B²/A)/2)`
//!
//! with `A = -iξ̇/ξ + Ω_out`, `B = √(2Ω_in) z₂/ξ + √(2Ω_out) e^{iΩ_out t} z̄₁`
//! and `C = e^{-2ir} z₂² + e^{2iΩ_out t} z̄₁² - iΩ_out t`. The matrix
//! elements are its Taylor coefficients in `(z̄₁, z₂)` scaled by `√(m! n!)`.
//!
//! Averaged over the stationary law the vacuum amplitude reduces to two
//! quadratures `I₁`, `I₂` with `d = (1 + θ̄²/λγ)^{1/2}`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::langevin::ThetaPath;
use crate::model::{gamma_from_rho, rho_from_frequencies, BarrierProfile, ModelParams};
use crate::stationary::{build_stationary, GridSpec};
use crate::wavefunction::{ComplexTrajectory, Estimate, MIN_ENSEMBLE};

/// Radius of the Cauchy circles used for coefficient extraction.
pub const CAUCHY_RADIUS: f64 = 0.3;
/// Points per Cauchy circle.
pub const CAUCHY_POINTS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SElement {
    pub m: usize,
    pub n: usize,
    pub value: Complex64,
}

/// The first even elements `S₀₀, S₁₁, S₀₂, S₂₀` of one realisation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SElements {
    pub s00: Complex64,
    pub s11: Complex64,
    pub s02: Complex64,
    pub s20: Complex64,
}

impl SElements {
    /// Element `(m, n)`; odd `m + n` vanishes by parity.
    pub fn get(&self, m: usize, n: usize) -> Result<Complex64> {
        match (m, n) {
            (0, 0) => Ok(self.s00),
            (1, 1) => Ok(self.s11),
            (0, 2) => Ok(self.s02),
            (2, 0) => Ok(self.s20),
            _ if (m + n) % 2 == 1 => Ok(Complex64::new(0.0, 0.0)),
            _ => Err(Error::UnsupportedOrder { order: m.max(n), max: 2 }),
        }
    }

    pub fn as_vec(&self) -> Vec<SElement> {
        [(0, 0, self.s00), (1, 1, self.s11), (0, 2, self.s02), (2, 0, self.s20)]
            .into_iter()
            .map(|(m, n, value)| SElement { m, n, value })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionResult {
    pub lambda: f64,
    pub rho: f64,
    pub i1: f64,
    pub i2: f64,
    pub s00: Complex64,
    pub probability: f64,
}

fn check_asymptotic(profile: &BarrierProfile<f64>, t: f64) -> Result<()> {
    if t < profile.settled_after(1e-8) {
        return Err(Error::Timing(format!(
            "t = {t} is before the profile settles at omega_out"
        )));
    }
    Ok(())
}

/// `(A, (Aξ)^{1/2})` at node `i`, with the square root continued along the
/// tracked phase of `ξ`.
fn gaussian_data(traj: &ComplexTrajectory, i: usize, omega_out: f64) -> Result<(Complex64, Complex64)> {
    let xi = traj.xi[i];
    let a = -Complex64::i() * traj.xi_dot[i] / xi + omega_out;
    if a.norm() < 1e-300 {
        return Err(Error::Singular("A vanishes".into()));
    }
    let root = Complex64::from_polar(traj.sigma[i].sqrt(), 0.5 * traj.phase[i]) * a.sqrt();
    Ok((a, root))
}

/// Generating functional `I(z₁, z₂)` at node time `t`.
pub fn generating_i(z1: Complex64, z2: Complex64, traj: &ComplexTrajectory, t: f64, omega_out: f64) -> Result<Complex64> {
    let i = traj.index_of(t)?;
    let (a, root) = gaussian_data(traj, i, omega_out)?;
    let (wi, wo) = (traj.omega_in, omega_out);
    let xi = traj.xi[i];
    let w = z1.conj();
    let e_out = Complex64::from_polar(1.0, wo * t);
    let b = (2.0 * wi).sqrt() * z2 / xi + (2.0 * wo).sqrt() * e_out * w;
    let c = Complex64::from_polar(1.0, -2.0 * traj.phase[i]) * z2 * z2 + e_out * e_out * w * w
        - Complex64::i() * wo * t;
    Ok((wi * wo).sqrt().sqrt() * 2f64.sqrt() / root * (-(c - b * b / a) / 2.0).exp())
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `S_mn` from `I` by discrete Cauchy sums on circles in `z̄₁` and `z₂`.
pub fn taylor_element(m: usize, n: usize, traj: &ComplexTrajectory, t: f64, omega_out: f64) -> Result<Complex64> {
    let k = CAUCHY_POINTS;
    let r = CAUCHY_RADIUS;
    let roots: Vec<Complex64> = (0..k)
        .map(|j| Complex64::from_polar(r, 2.0 * std::f64::consts::PI * j as f64 / k as f64))
        .collect();
    let mut acc = Complex64::new(0.0, 0.0);
    for w in &roots {
        for z in &roots {
            let v = generating_i(w.conj(), *z, traj, t, omega_out)?;
            acc += v / (w.powu(m as u32) * z.powu(n as u32));
        }
    }
    Ok(acc / (k * k) as f64 * (factorial(m) * factorial(n)).sqrt())
}

/// Closed-form Taylor coefficients of `I` for a solved trajectory.
pub fn s_elements_path(traj: &ComplexTrajectory, t: f64, profile: &BarrierProfile<f64>) -> Result<SElements> {
    check_asymptotic(profile, t)?;
    let omega_out = profile.omega_final();
    let i = traj.index_of(t)?;
    let (a, root) = gaussian_data(traj, i, omega_out)?;
    let wi = traj.omega_in;
    let xi = traj.xi[i];
    let e_out = Complex64::from_polar(1.0, omega_out * t);
    let s00 = (wi * omega_out).sqrt().sqrt() * 2f64.sqrt() / root * Complex64::from_polar(1.0, omega_out * t / 2.0);
    let s02 = s00 / 2f64.sqrt() * (2.0 * wi / (xi * xi * a) - Complex64::from_polar(1.0, -2.0 * traj.phase[i]));
    let s20 = s00 / 2f64.sqrt() * (2.0 * omega_out * e_out * e_out / a - e_out * e_out);
    Ok(SElements {
        s00,
        s11: s00 * s00 * s00,
        s02,
        s20,
    })
}

/// Elements of one Langevin path in the shifted `θ` form.
///
/// `S₀₀ = (1-ρ)^{1/4} (1 + i|θ|/Ω_out)^{-1/2}`; the others follow from it with
/// the path accumulators `∫θ` and `∫exp(-2∫θ)`.
pub fn s_elements_theta(path: &ThetaPath, profile: &BarrierProfile<f64>) -> Result<SElements> {
    check_asymptotic(profile, path.t_end)?;
    let (wi, wo) = (profile.omega_in, profile.omega_final());
    let rho = rho_from_frequencies(wi, wo);
    let u = path.theta_end.abs() / wo;
    let s00 = (1.0 - rho).sqrt().sqrt() / Complex64::new(1.0, u).sqrt();
    let k = (wi / wo).sqrt();
    let s20 = s00 * (k * s00 * s00 - 1.0);
    let damp = (-2.0 * path.int_theta_end).exp();
    let s02 = s00 * (k * s00 * s00 * damp - 1.0) * Complex64::from_polar(1.0, -2.0 * wi * path.int_exp_end);
    Ok(SElements {
        s00,
        s11: s00 * s00 * s00,
        s02,
        s20,
    })
}

/// Ensemble average of `S_mn` over Langevin paths.
pub fn s_mn_br_mc(m: usize, n: usize, paths: &[ThetaPath], profile: &BarrierProfile<f64>) -> Result<Estimate> {
    if paths.len() < MIN_ENSEMBLE {
        return Err(Error::Sampling(format!(
            "ensemble of {} paths is below the minimum {MIN_ENSEMBLE}",
            paths.len()
        )));
    }
    let values = paths
        .par_iter()
        .map(|p| s_elements_theta(p, profile)?.get(m, n))
        .collect::<Result<Vec<_>>>()?;
    if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Sampling(format!("non-finite S_{m}{n} sample")));
    }
    Estimate::from_samples(&values)
}

/// `(1/d) √((d+1)/2)` and `(1/d) √((d-1)/2)` at `u² = θ̄²/λγ`, with `d - 1`
/// written as `u²/(d+1)`.
fn kernels(u2: f64) -> (f64, f64) {
    let d = (1.0 + u2).sqrt();
    (((d + 1.0) / 2.0).sqrt() / d, (u2 / (d + 1.0) / 2.0).sqrt() / d)
}

/// Stationary-averaged vacuum amplitude.
pub fn s00_br(lambda: f64, rho: f64) -> Result<TransitionResult> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Domain(format!("lambda must be > 0, got {lambda}")));
    }
    let gamma = gamma_from_rho(rho)?;
    let lg = lambda * gamma;
    let dist = build_stationary(&ModelParams::from_lambda(lg)?, GridSpec::default())?;
    let i1 = dist.expectation_even(|x| kernels(x * x / lg).0)?;
    let i2 = dist.expectation_even(|x| kernels(x * x / lg).1)?;
    let c = (1.0 - rho).sqrt().sqrt();
    Ok(TransitionResult {
        lambda,
        rho,
        i1,
        i2,
        s00: Complex64::new(c * i1, -c * i2),
        probability: (1.0 - rho).sqrt() * (i1 * i1 + i2 * i2),
    })
}

/// `Δ₀→₀ = √(1-ρ) (I₁² + I₂²)`, zero at the `ρ = 1` limit.
pub fn transition_probability(lambda: f64, rho: f64) -> Result<f64> {
    if rho == 1.0 {
        return Ok(0.0);
    }
    Ok(s00_br(lambda, rho)?.probability)
}

/// `s00_br` on the product grid, λ-major.
pub fn probability_grid(lambdas: &[f64], rhos: &[f64]) -> Result<Vec<TransitionResult>> {
    let points: Vec<(f64, f64)> = lambdas
        .iter()
        .flat_map(|&l| rhos.iter().map(move |&r| (l, r)))
        .collect();
    points.par_iter().map(|&(l, r)| s00_br(l, r)).collect()
}

/// Limit of `I₁² + I₂²` as `λ → ∞`, where `Q̃` tends to a Lorentzian of
/// width `√λγ` and `d` is measured on the same scale.
pub fn large_lambda_limit() -> Result<f64> {
    use crate::numerics::Quadrature;
    // θ̄ = √λγ tan φ maps the Lorentzian to the uniform law on (-π/2, π/2).
    let quad = Quadrature::new().abs_tol(1e-14).rel_tol(1e-12);
    let f = |k: usize| {
        move |phi: f64| {
            let c = phi.cos();
            let v = if k == 1 { c * (1.0 + c) / 2.0 } else { c * (1.0 - c) / 2.0 };
            v.sqrt() / std::f64::consts::PI
        }
    };
    let h = std::f64::consts::FRAC_PI_2;
    let (i1, _) = quad.integrate(f(1), -h, h)?;
    let (i2, _) = quad.integrate(f(2), -h, h)?;
    Ok(i1 * i1 + i2 * i2)
}
