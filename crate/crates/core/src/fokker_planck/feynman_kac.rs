//! `B₀(t) = ∫ u(θ,t) dθ` for the parabolic problem `∂t u = ½ ∂θ² u - θ u`
//! started from a narrow Gaussian of unit mass.
//!
//! For an initial Gaussian of variance s² the exact answer is
//! `B₀(t) = exp(t³/6 + s² t²/2)`, since `∫₀ᵗ W` is Gaussian with variance
//! `t³/3`. The solver therefore reports growth, not a finite limit.
//!
//! The drift variant adds the θ-process transport, `∂t u = ∂θ[(θ²+Ω₀²) u] +
//! ε ∂θ² u - θ u`, with reinjection at the edges.

use super::{Boundary, DensityOnGrid, FpProblem, Grid1D};
use crate::error::{Error, Result};
use crate::model::BarrierProfile;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FkVariant {
    NoDrift,
    WithDrift { profile: BarrierProfile<f64>, epsilon: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FkOptions {
    pub variant: FkVariant,
    /// Width of the initial Gaussian; `None` means three grid spacings.
    pub sigma: Option<f64>,
    /// Record every this many steps.
    pub record_every: usize,
    /// Drop the `-θu` term (mass-conservation check).
    pub potential: bool,
}

impl Default for FkOptions {
    fn default() -> Self {
        Self {
            variant: FkVariant::NoDrift,
            sigma: None,
            record_every: 10,
            potential: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FkResult {
    pub times: Vec<f64>,
    pub b0: Vec<f64>,
    /// Final value when the series has settled, `None` when it keeps growing.
    pub limit_estimate: Option<f64>,
    pub diverging: bool,
    /// Largest edge value over the run, relative to the peak.
    pub edge_ratio: f64,
    pub sigma: f64,
}

/// Exact `B₀(t)` of the drift-free problem for an initial Gaussian of width `sigma`.
pub fn b0_exact(t: f64, sigma: f64) -> f64 {
    (t.powi(3) / 6.0 + 0.5 * sigma * sigma * t * t).exp()
}

pub fn feynman_kac_b0(grid: Grid1D, dt: f64, t_end: f64, opts: FkOptions) -> Result<FkResult> {
    if !(t_end > 0.0) || !(dt > 0.0) {
        return Err(Error::config("fk.t_end", "t_end and dt must be > 0"));
    }
    let sigma = opts.sigma.unwrap_or(3.0 * grid.spacing());
    let mut problem = match opts.variant {
        FkVariant::NoDrift => FpProblem::with_velocity(grid, 0.5, Boundary::Dirichlet, |_, _| 0.0)?,
        FkVariant::WithDrift { profile, epsilon } => FpProblem::theta_process(grid, profile, epsilon)?,
    };
    if opts.potential {
        problem = problem.with_potential(|x| x);
    }
    let check_edges = opts.variant == FkVariant::NoDrift;
    let mut u = DensityOnGrid::spike(grid, 0.0, sigma);
    let steps = (t_end / dt).ceil() as usize;
    let h = t_end / steps as f64;
    let every = opts.record_every.max(1);
    let mut times = vec![0.0];
    let mut b0 = vec![u.mass()];
    let mut edge_ratio = 0.0f64;
    for k in 1..=steps {
        problem.step(&mut u, h)?;
        if k % every == 0 || k == steps {
            let peak = u.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let edge = u.values[0].abs().max(u.values[grid.n - 1].abs());
            edge_ratio = edge_ratio.max(edge / peak);
            if check_edges && edge > 1e-12 * peak {
                return Err(Error::DomainSize(format!(
                    "edge value {:.3e} of peak at t = {:.4}",
                    edge / peak,
                    u.time
                )));
            }
            times.push(u.time);
            b0.push(u.mass());
        }
    }
    let n = b0.len();
    let tail = b0[n - 1 - (n - 1) / 10];
    let last = b0[n - 1];
    let diverging = !last.is_finite() || (last - tail).abs() > 1e-3 * last.abs();
    Ok(FkResult {
        times,
        b0,
        limit_estimate: (!diverging).then_some(last),
        diverging,
        edge_ratio,
        sigma,
    })
}

/// Observed order from three results on spacings `h, h/2, h/4`.
pub fn richardson_order(coarse: f64, mid: f64, fine: f64) -> f64 {
    ((coarse - mid) / (mid - fine)).abs().log2()
}
