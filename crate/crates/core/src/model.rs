//! Physical parameters, dimensionless groups and frequency profiles.
//!
//! Units: ħ = 1 and unit mass throughout.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams<T> {
    /// Noise correlation constant ε.
    pub epsilon: T,
    pub omega_in: T,
    pub omega_out: T,
    /// Frequency of the asymptotic space.
    pub omega_as: T,
}

impl<T: Real> ModelParams<T> {
    pub fn new(epsilon: T, omega_in: T, omega_out: T, omega_as: T) -> Result<Self> {
        let p = Self {
            epsilon,
            omega_in,
            omega_out,
            omega_as,
        };
        p.validate()?;
        Ok(p)
    }

    /// Parameters with a given `λ` at `Ω_in = Ω_out = Ω_as = 1`.
    pub fn from_lambda(lambda: T) -> Result<Self> {
        if !(lambda > T::zero()) || !lambda.is_finite() {
            return Err(Error::Domain(format!("lambda must be positive, got {}", lambda.as_f64())));
        }
        // λ = Ω_in^2 / ε^{2/3}  =>  ε = λ^{-3/2}.
        let eps = lambda.powf(T::lit(-1.5));
        Self::new(eps, T::one(), T::one(), T::one())
    }

    pub fn validate(&self) -> Result<()> {
        let check = |name: &str, v: T| {
            if v > T::zero() && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(name, format!("must be finite and > 0, got {}", v.as_f64())))
            }
        };
        check("epsilon", self.epsilon)?;
        check("omega_in", self.omega_in)?;
        check("omega_out", self.omega_out)?;
        check("omega_as", self.omega_as)
    }

    /// θ scale `ε^{1/3}`; `θ̄ = θ / ε^{1/3}`.
    pub fn theta_scale(&self) -> T {
        self.epsilon.cbrt()
    }

    /// `λ = (Ω_in / ε^{1/3})^2`.
    pub fn lambda(&self) -> T {
        let r = self.omega_in / self.theta_scale();
        r * r
    }

    /// `γ = (Ω_out / Ω_in)^2`.
    pub fn gamma(&self) -> T {
        let r = self.omega_out / self.omega_in;
        r * r
    }

    pub fn lambda_gamma(&self) -> T {
        let r = self.omega_out / self.theta_scale();
        r * r
    }

    /// Reflection coefficient of the sudden step between `Ω_in` and `Ω_out`.
    pub fn rho(&self) -> T {
        rho_from_frequencies(self.omega_in, self.omega_out)
    }

    /// `λ` built from `Ω_as` instead of `Ω_in`.
    pub fn lambda_as(&self) -> T {
        let r = self.omega_as / self.theta_scale();
        r * r
    }
}

/// `γ(ρ) = ((1+√ρ)/(1-√ρ))^2` for the step profile.
pub fn gamma_from_rho<T: Real>(rho: T) -> Result<T> {
    if !(rho >= T::zero()) || !(rho < T::one()) {
        return Err(Error::Domain(format!("rho must lie in [0, 1), got {}", rho.as_f64())));
    }
    let s = rho.sqrt();
    let r = (T::one() + s) / (T::one() - s);
    Ok(r * r)
}

/// `ρ = ((Ω_out-Ω_in)/(Ω_out+Ω_in))^2`.
pub fn rho_from_frequencies<T: Real>(omega_in: T, omega_out: T) -> T {
    let r = (omega_out - omega_in) / (omega_out + omega_in);
    r * r
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileKind {
    Constant,
    Step,
    SmoothStep,
}

/// Which one-sided limit to take at a discontinuity of `Ω₀`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarrierProfile<T> {
    pub kind: ProfileKind,
    pub omega_in: T,
    pub omega_out: T,
    pub transition_time: T,
    /// tanh width, smooth step only.
    pub width: T,
}

impl<T: Real> BarrierProfile<T> {
    pub fn constant(omega: T) -> Self {
        Self {
            kind: ProfileKind::Constant,
            omega_in: omega,
            omega_out: omega,
            transition_time: T::zero(),
            width: T::zero(),
        }
    }

    pub fn step(omega_in: T, omega_out: T, transition_time: T) -> Self {
        Self {
            kind: ProfileKind::Step,
            omega_in,
            omega_out,
            transition_time,
            width: T::zero(),
        }
    }

    pub fn smooth_step(omega_in: T, omega_out: T, transition_time: T, width: T) -> Result<Self> {
        let p = Self {
            kind: ProfileKind::SmoothStep,
            omega_in,
            omega_out,
            transition_time,
            width,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_in > T::zero()) || !self.omega_in.is_finite() {
            return Err(Error::config("profile.omega_in", "must be finite and > 0"));
        }
        if self.kind != ProfileKind::Constant && (!(self.omega_out > T::zero()) || !self.omega_out.is_finite()) {
            return Err(Error::config("profile.omega_out", "must be finite and > 0"));
        }
        if !self.transition_time.is_finite() {
            return Err(Error::config("profile.transition_time", "must be finite"));
        }
        if self.kind == ProfileKind::SmoothStep && !(self.width > T::zero()) {
            return Err(Error::config("profile.width", "smooth step needs width > 0 (degenerate profile)"));
        }
        Ok(())
    }

    /// Final frequency.
    pub fn omega_final(&self) -> T {
        match self.kind {
            ProfileKind::Constant => self.omega_in,
            _ => self.omega_out,
        }
    }

    /// `Ω₀(t)`, right-continuous at a step.
    pub fn omega0(&self, t: T) -> T {
        self.omega0_side(t, Side::Right)
    }

    /// `Ω₀(t)` taking the requested one-sided limit at a step.
    pub fn omega0_side(&self, t: T, side: Side) -> T {
        match self.kind {
            ProfileKind::Constant => self.omega_in,
            ProfileKind::Step => {
                let before = match side {
                    Side::Left => t <= self.transition_time,
                    Side::Right => t < self.transition_time,
                };
                if before {
                    self.omega_in
                } else {
                    self.omega_out
                }
            }
            ProfileKind::SmoothStep => {
                let u = (t - self.transition_time) / self.width;
                self.omega_in + (self.omega_out - self.omega_in) * (T::one() + u.tanh()) * T::lit(0.5)
            }
        }
    }

    /// Jump location of a step profile, if any.
    pub fn discontinuity(&self) -> Option<T> {
        (self.kind == ProfileKind::Step).then_some(self.transition_time)
    }

    /// Earliest time after which `|Ω₀(t) - Ω_final| <= tol`.
    pub fn settled_after(&self, tol: T) -> T {
        match self.kind {
            ProfileKind::Constant => T::neg_infinity(),
            ProfileKind::Step => self.transition_time,
            ProfileKind::SmoothStep => {
                let jump = (self.omega_out - self.omega_in).abs();
                if jump <= tol {
                    return T::neg_infinity();
                }
                // |ΔΩ| (1 - tanh u)/2 <= |ΔΩ| e^{-2u} <= tol.
                self.transition_time + self.width * (jump / tol).ln() * T::lit(0.5)
            }
        }
    }

    /// Latest time before which `|Ω₀(t) - Ω_in| <= tol`.
    pub fn initial_before(&self, tol: T) -> T {
        match self.kind {
            ProfileKind::Constant => T::infinity(),
            ProfileKind::Step => self.transition_time,
            ProfileKind::SmoothStep => {
                let jump = (self.omega_out - self.omega_in).abs();
                if jump <= tol {
                    return T::infinity();
                }
                self.transition_time - self.width * (jump / tol).ln() * T::lit(0.5)
            }
        }
    }
}

/// Validating form of [`BarrierProfile::omega0`].
pub fn omega0<T: Real>(profile: &BarrierProfile<T>, t: T) -> Result<T> {
    profile.validate()?;
    Ok(profile.omega0(t))
}
