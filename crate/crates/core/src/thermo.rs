//! Vacuum thermodynamics of the asymptotic space.
//!
//! Everything reduces to `A(x) = Ai²(x) + Bi²(x)` near `x = -λ`. With
//! `L = ∂_α ln A(-λ+α)` and `M = ∂²_α ln A(-λ+α)` at `α = 0`:
//!
//! * shift `E = (Ω_as/2)(1 - (L + M)/λ)`
//! * decay time `Δt = 2√λ L / Ω_as`
//! * `U = (1 + 2λL)/(3ε)`, `F = ln 2/(3ε)`, `S/k = ε(U - F)`.
//!
//! Entropy is reported in units of `k`; ε plays the role of inverse
//! temperature and no separate `β` appears.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{BarrierProfile, ModelParams};
use crate::numerics::{airy, GaussHermite, Quadrature};
use crate::scalar::Real;
use crate::stationary::{flux_constant_integral, normalization};
use crate::wavefunction::Estimate;

fn check_lambda<T: Real>(lambda: T) -> Result<()> {
    if lambda >= T::zero() && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("lambda must be finite and >= 0, got {}", lambda.as_f64())))
    }
}

fn check_positive<T: Real>(name: &str, v: T) -> Result<()> {
    if v > T::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be finite and > 0, got {}", v.as_f64())))
    }
}

/// Above this λ the modulus series `π√λ A(-λ) = 1 - u₁λ⁻³ + u₂λ⁻⁶ - u₃λ⁻⁹`
/// is exact to round-off and avoids cancellation in `λL - ½`.
const MODULUS_SERIES_MIN: f64 = 30.0;
const MODULUS_SERIES: [f64; 3] = [5.0 / 32.0, 1155.0 / 2048.0, 34_459_425.0 / 5_308_416.0];

/// `L(λ) = 2[Ai Ai' + Bi Bi'](-λ) / A(-λ)`.
pub fn airy_log_derivative<T: Real>(lambda: T) -> Result<T> {
    check_lambda(lambda)?;
    if lambda >= T::lit(MODULUS_SERIES_MIN) {
        let t = (lambda * lambda * lambda).recip();
        let [u1, u2, u3] = MODULUS_SERIES.map(T::lit);
        let s = T::one() - t * (u1 - t * (u2 - t * u3));
        let ds = -u1 + t * (T::lit(2.0) * u2 - T::lit(3.0) * t * u3);
        return Ok((T::lit(0.5) + T::lit(3.0) * t * ds / s) / lambda);
    }
    let a = airy(-lambda)?;
    Ok(T::lit(2.0) * (a.ai * a.ai_prime + a.bi * a.bi_prime) / a.modulus_sq())
}

/// `M(λ) = {2[Ai'² + Bi'²](-λ) - 2λ A(-λ)}/A(-λ) - L²`, using `y'' = xy`.
pub fn airy_second_log_derivative<T: Real>(lambda: T) -> Result<T> {
    check_lambda(lambda)?;
    let a = airy(-lambda)?;
    let m = a.modulus_sq();
    let l = T::lit(2.0) * (a.ai * a.ai_prime + a.bi * a.bi_prime) / m;
    let two = T::lit(2.0);
    Ok((two * (a.ai_prime * a.ai_prime + a.bi_prime * a.bi_prime) - two * lambda * m) / m - l * l)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundState<T> {
    /// Oscillator energy shifted by the vacuum.
    pub shift: T,
    /// Imaginary part of the energy.
    pub width: T,
    pub decay_time: T,
    /// The vacuum term of the energy diverges for every input.
    pub divergent: bool,
}

/// Ground-state energy, width and decay time.
pub fn ground_state_energy<T: Real>(lambda: T, omega_as: T) -> Result<GroundState<T>> {
    check_positive("lambda", lambda)?;
    check_positive("omega_as", omega_as)?;
    let l = airy_log_derivative(lambda)?;
    let m = airy_second_log_derivative(lambda)?;
    let half = T::lit(0.5);
    let root = lambda.sqrt();
    Ok(GroundState {
        shift: half * omega_as * (T::one() - (l + m) / lambda),
        width: omega_as * T::PI().sqrt() * l / (T::lit(2.0) * root),
        decay_time: T::lit(2.0) * root * l / omega_as,
        divergent: true,
    })
}

/// Width from its defining integral
/// `(Ω_as/(2√λ)) J̄ ∫₀^∞ z^{1/2} e^{-z³/12 - λz} dz` with `J̄ = 1/(π A(-λ))`.
pub fn level_width_quadrature<T: Real>(lambda: T, omega_as: T) -> Result<T> {
    check_positive("lambda", lambda)?;
    let jbar = T::one() / (T::PI() * airy(-lambda)?.modulus_sq());
    // z = u², u = c v.
    let c = T::one() / (T::one() + lambda).sqrt();
    let quad = Quadrature::new()
        .abs_tol(T::min_positive_value())
        .rel_tol(T::lit(1e-12));
    let (v, _) = quad.integrate(
        |v: T| {
            let u = c * v;
            let z = u * u;
            T::lit(2.0) * c * z * (-(z * z * z) / T::lit(12.0) - lambda * z).exp()
        },
        T::zero(),
        T::infinity(),
    )?;
    Ok(omega_as / (T::lit(2.0) * lambda.sqrt()) * jbar * v)
}

pub fn internal_energy<T: Real>(lambda: T, epsilon: T) -> Result<T> {
    check_positive("epsilon", epsilon)?;
    let l = airy_log_derivative(lambda)?;
    Ok((T::one() + T::lit(2.0) * lambda * l) / (T::lit(3.0) * epsilon))
}

pub fn free_energy<T: Real>(epsilon: T) -> Result<T> {
    check_positive("epsilon", epsilon)?;
    Ok(T::LN_2() / (T::lit(3.0) * epsilon))
}

/// `S/k = (2λ/3) L(λ) + (1 - ln 2)/3`.
pub fn entropy<T: Real>(lambda: T) -> Result<T> {
    let l = airy_log_derivative(lambda)?;
    let third = T::one() / T::lit(3.0);
    Ok(T::lit(2.0) * lambda * l * third + (T::one() - T::LN_2()) * third)
}

/// `-∂_ε ∫ Q_s dθ` with the flux constant taken from the normalisation
/// integral, by central differences at fixed `Ω_as`. Every such density has
/// unit mass, so this stays at round-off level while the closed form does not.
pub fn internal_energy_from_density(epsilon: f64, omega_as: f64) -> Result<f64> {
    check_positive("epsilon", epsilon)?;
    check_positive("omega_as", omega_as)?;
    let mass = |e: f64| -> Result<f64> {
        let lg = (omega_as / e.cbrt()).powi(2);
        Ok(flux_constant_integral(lg, e)? * normalization(lg)? / e.cbrt())
    };
    let h = 1e-4 * epsilon;
    Ok(-(mass(epsilon + h)? - mass(epsilon - h)?) / (2.0 * h))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermoReport {
    pub lambda: f64,
    pub omega_as: f64,
    pub epsilon: f64,
    pub energy_shift: f64,
    pub level_width: f64,
    pub decay_time: f64,
    pub internal_energy: f64,
    pub free_energy: f64,
    pub entropy_over_k: f64,
    pub divergent_vacuum_term_flag: bool,
}

/// All thermodynamic outputs at `λ = (Ω_as/ε^{1/3})²`.
pub fn thermo_report(params: &ModelParams<f64>) -> Result<ThermoReport> {
    params.validate()?;
    let lambda = params.lambda_as();
    let g = ground_state_energy(lambda, params.omega_as)?;
    Ok(ThermoReport {
        lambda,
        omega_as: params.omega_as,
        epsilon: params.epsilon,
        energy_shift: g.shift,
        level_width: g.width,
        decay_time: g.decay_time,
        internal_energy: internal_energy(lambda, params.epsilon)?,
        free_energy: free_energy(params.epsilon)?,
        entropy_over_k: entropy(lambda)?,
        divergent_vacuum_term_flag: g.divergent,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyRow {
    pub lambda: f64,
    /// Shifted ground-state energy.
    pub energy_shifted: f64,
    /// Shift alone, `E - Ω_as/2`.
    pub shift_only: f64,
    pub entropy_over_k: f64,
}

/// Energy, shift and entropy over a λ grid.
pub fn energy_curve(lambdas: &[f64], omega_as: f64) -> Result<Vec<EnergyRow>> {
    lambdas
        .par_iter()
        .map(|&l| {
            let g = ground_state_energy(l, omega_as)?;
            Ok(EnergyRow {
                lambda: l,
                energy_shifted: g.shift,
                shift_only: g.shift - 0.5 * omega_as,
                entropy_over_k: entropy(l)?,
            })
        })
        .collect()
}

/// θ and `∫θ` of one path at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathPoint {
    pub t: f64,
    pub theta: f64,
    pub int_theta: f64,
}

fn check_asymptotic(profile: &BarrierProfile<f64>, omega_as: f64, t: f64) -> Result<()> {
    if (profile.omega0(t) - omega_as).abs() > 1e-8 * omega_as {
        return Err(Error::Timing(format!("t = {t} is outside the asymptotic region")));
    }
    Ok(())
}

/// Vacuum density matrix `ρ(x, t; x', t')` of one path.
pub fn stochastic_density_matrix(
    x: f64,
    a: &PathPoint,
    xp: f64,
    b: &PathPoint,
    omega_as: f64,
    profile: &BarrierProfile<f64>,
) -> Result<Complex64> {
    check_asymptotic(profile, omega_as, a.t)?;
    check_asymptotic(profile, omega_as, b.t)?;
    let re = -omega_as * (x * x + xp * xp) / 2.0 - 0.5 * a.int_theta - 0.5 * b.int_theta;
    let im = -(a.theta * x * x - b.theta * xp * xp);
    Ok((omega_as / std::f64::consts::PI).sqrt() * Complex64::new(re, im).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Operator {
    Identity,
    /// `-½∂ₓ² + ½Ω_as² x²`.
    Hamiltonian,
    Parity,
}

/// `Tr(Â ρ)/Tr ρ` for one path at equal times, by Gauss-Hermite quadrature.
///
/// The kernel factorises as `φ(x) φ̄(x')` with `φ = e^{-a x²/2}`,
/// `a = Ω_as + 2iθ`, so `Âφ` is explicit for each operator.
fn per_path_expectation(op: Operator, theta: f64, omega_as: f64, gh: &GaussHermite<f64>) -> Complex64 {
    let a = Complex64::new(omega_as, 2.0 * theta);
    let phi = |x: f64| (-a * x * x / 2.0).exp();
    let apply = |x: f64| match op {
        Operator::Identity => phi(x),
        Operator::Hamiltonian => (a / 2.0 + (omega_as * omega_as - a * a) * x * x / 2.0) * phi(x),
        Operator::Parity => phi(-x),
    };
    let s = 1.0 / omega_as.sqrt();
    let (num, den) = gh.scaled(s).fold(
        (Complex64::new(0.0, 0.0), 0.0),
        |(n, d), (x, w)| (n + apply(x) * phi(x).conj() * w, d + phi(x).norm_sqr() * w),
    );
    num / den
}

/// Vacuum expectation over an ensemble of path points at a common time.
pub fn vacuum_expectation(op: Operator, samples: &[PathPoint], omega_as: f64) -> Result<Estimate> {
    check_positive("omega_as", omega_as)?;
    let gh = GaussHermite::<f64>::new(40)?;
    let shift = samples.iter().map(|p| -p.int_theta).fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = samples.iter().map(|p| (-p.int_theta - shift).exp()).collect();
    let values: Vec<Complex64> = samples
        .iter()
        .map(|p| per_path_expectation(op, p.theta, omega_as, &gh))
        .collect();
    Estimate::weighted(&values, &weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn log_derivative_examples() {
        // 2(Ai Ai' + Bi Bi')/(Ai² + Bi²) at 0 from the Maclaurin values.
        let (ai, bi, aip, bip) = (0.355_028_053_887_817_2, 0.614_926_627_446_000_7, -0.258_819_403_792_806_8, 0.448_288_357_353_826_4);
        let oracle = 2.0 * (ai * aip + bi * bip) / (ai * ai + bi * bi);
        let l0: f64 = airy_log_derivative(0.0).unwrap();
        assert_relative_eq!(l0, oracle, max_relative = 1e-12);
        assert!((l0 - 0.72902).abs() < 1e-4);
        let l100: f64 = airy_log_derivative(100.0).unwrap();
        assert!((l100 / 0.005 - 1.0).abs() < 0.02);
        for &lam in &[30.0f64, 45.0, 100.0] {
            let a = airy(-lam).unwrap();
            let direct = 2.0 * (a.ai * a.ai_prime + a.bi * a.bi_prime) / a.modulus_sq();
            assert_relative_eq!(airy_log_derivative(lam).unwrap(), direct, max_relative = 1e-11);
        }
        assert!(airy_log_derivative(-1.0).is_err());
    }

    #[test]
    fn second_derivative_against_differences() {
        for &lam in &[0.0, 0.7, 3.0, 25.0] {
            let h = 1e-4;
            let lnl = |a: f64| airy(-lam + a).unwrap().modulus_sq().ln();
            let fd = (lnl(h) - 2.0 * lnl(0.0) + lnl(-h)) / (h * h);
            let m: f64 = airy_second_log_derivative(lam).unwrap();
            assert!((m - fd).abs() < 1e-5 * fd.abs().max(1.0), "{lam}: {m} vs {fd}");
        }
    }

    #[test]
    fn ground_state_examples() {
        let g = ground_state_energy(1e4f64, 1.0).unwrap();
        assert!((g.shift - 0.5).abs() < 1e-3);
        assert!((g.decay_time / 0.01 - 1.0).abs() < 0.05);
        assert!(g.divergent && g.width < 1e-3);
        assert!(ground_state_energy(0.0, 1.0).is_err());
    }

    #[test]
    fn width_quadrature_matches_closed_form() {
        for &lam in &[0.05, 1.0, 30.0, 1e3] {
            let g = ground_state_energy(lam, 1.3f64).unwrap();
            let q = level_width_quadrature(lam, 1.3).unwrap();
            assert_relative_eq!(g.width, q, max_relative = 1e-8);
        }
    }

    #[test]
    fn energy_and_entropy_examples() {
        assert_relative_eq!(internal_energy(0.0f64, 1.0).unwrap(), 1.0 / 3.0, max_relative = 1e-14);
        assert!((internal_energy(1e4f64, 1.0).unwrap() / (2.0 / 3.0) - 1.0).abs() < 0.02);
        assert!((free_energy(1.0f64).unwrap() - 0.231_049_1).abs() < 1e-7);
        assert!((free_energy(2.0f64).unwrap() - 0.115_524_5).abs() < 1e-7);
        assert!((entropy(0.0f64).unwrap() - 0.102_284_27).abs() < 1e-8);
        assert!((entropy(1e4f64).unwrap() - 0.435_617_1).abs() < 1e-3);
    }

    #[test]
    fn entropy_increases_on_log_grid() {
        let mut prev = 0.0;
        for k in 0..50 {
            let l = 10f64.powf(-2.0 + 6.0 * k as f64 / 49.0);
            let s = entropy(l).unwrap();
            assert!(s >= prev, "lambda {l}");
            assert!(s <= (2.0 - 2f64.ln()) / 3.0 + 1e-3);
            prev = s;
        }
    }

    #[test]
    fn report_fields() {
        let p = ModelParams::new(0.5, 1.0, 1.0, 2.0).unwrap();
        let r = thermo_report(&p).unwrap();
        assert_relative_eq!(r.lambda, 4.0 / 0.5f64.powf(2.0 / 3.0), max_relative = 1e-14);
        assert_relative_eq!(r.entropy_over_k, r.epsilon * (r.internal_energy - r.free_energy), max_relative = 1e-12);
        assert!(r.divergent_vacuum_term_flag);
    }

    #[test]
    fn density_form_vanishes() {
        assert!(internal_energy_from_density(0.7, 1.0).unwrap().abs() < 1e-6);
    }

    #[test]
    fn density_matrix_examples() {
        let p = BarrierProfile::step(1.0, 1.5, 0.0);
        let zero = PathPoint { t: 3.0, theta: 0.0, int_theta: 0.0 };
        let v = stochastic_density_matrix(0.6, &zero, 0.6, &zero, 1.5, &p).unwrap();
        let ground = (1.5 / std::f64::consts::PI).sqrt() * (-1.5 * 0.36f64).exp();
        assert!((v - ground).norm() < 1e-15);
        let a = PathPoint { t: 3.0, theta: 0.8, int_theta: 0.3 };
        let b = PathPoint { t: 4.0, theta: 0.8, int_theta: -0.1 };
        let u = stochastic_density_matrix(0.2, &a, -1.1, &b, 1.5, &p).unwrap();
        let w = stochastic_density_matrix(-1.1, &b, 0.2, &a, 1.5, &p).unwrap();
        assert!((u - w.conj()).norm() < 1e-15);
        let gh = GaussHermite::<f64>::new(40).unwrap();
        let trace: f64 = gh
            .scaled(1.0 / 1.5f64.sqrt())
            .map(|(x, w)| w * stochastic_density_matrix(x, &zero, x, &zero, 1.5, &p).unwrap().re)
            .sum();
        assert!((trace - 1.0).abs() < 1e-13);
        let early = PathPoint { t: -1.0, ..zero };
        assert!(matches!(
            stochastic_density_matrix(0.0, &early, 0.0, &zero, 1.5, &p),
            Err(Error::Timing(_))
        ));
    }

    #[test]
    fn vacuum_expectation_examples() {
        let mut s = crate::numerics::RandomStream::new(5, 0);
        let samples: Vec<PathPoint> = (0..2000)
            .map(|_| PathPoint {
                t: 0.0,
                theta: 1e-3 * s.normal(),
                int_theta: 0.1 * s.normal(),
            })
            .collect();
        let one = vacuum_expectation(Operator::Identity, &samples, 1.2).unwrap();
        assert!((one.mean - 1.0).norm() < 1e-13);
        let par = vacuum_expectation(Operator::Parity, &samples, 1.2).unwrap();
        assert!((par.mean - 1.0).norm() < 1e-13);
        let h = vacuum_expectation(Operator::Hamiltonian, &samples, 1.2).unwrap();
        assert!((h.mean.re - 0.6).abs() < 1e-5 + 3.0 * h.std_error.re);
        assert!(h.mean.im.abs() < 1e-12);
    }

    #[test]
    fn hamiltonian_per_path_closed_form() {
        let gh = GaussHermite::<f64>::new(40).unwrap();
        for &th in &[0.0, 0.3, -2.0, 7.5] {
            let v = per_path_expectation(Operator::Hamiltonian, th, 0.9, &gh);
            assert!((v.re - (0.45 + th * th / 0.9)).abs() < 1e-12 && v.im.abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn thermodynamic_consistency(l in 0.0f64..1e4, eps in 0.01f64..10.0) {
            let s = entropy(l).unwrap();
            let u = internal_energy(l, eps).unwrap();
            let f = free_energy(eps).unwrap();
            prop_assert!((s - eps * (u - f)).abs() < 1e-10);
            prop_assert!(((1.0 - 2f64.ln()) / 3.0 - 1e-12..=(2.0 - 2f64.ln()) / 3.0 + 1e-3).contains(&s));
        }

        #[test]
        fn free_energy_ignores_lambda(eps in 0.01f64..10.0, w in 0.1f64..10.0) {
            let p = ModelParams::new(eps, 1.0, 1.0, w).unwrap();
            let r = thermo_report(&p).unwrap();
            prop_assert_eq!(r.free_energy, 2f64.ln() / (3.0 * eps));
        }

        #[test]
        fn energy_scales_as_inverse_epsilon(l in 0.0f64..100.0, eps in 0.01f64..10.0, c in 0.1f64..10.0) {
            let a = internal_energy(l, eps).unwrap();
            let b = internal_energy(l, c * eps).unwrap();
            prop_assert!((a / b - c).abs() < 1e-12 * c);
        }
    }
}
