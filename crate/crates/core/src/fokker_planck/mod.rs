//! Finite-volume solver for `∂t Q = -∂θ J`, `J = v(θ,t) Q - ε ∂θ Q`, with
//! `v = -(θ² + Ω₀²(t))` for the θ-process.
//!
//! Cells are centred on the grid nodes. Face fluxes use Scharfetter-Gummel
//! weights, which reduce to central differencing for small cell Péclet
//! numbers and to upwinding for large ones.
//!
//! With [`Boundary::Reinjection`] the outflow through the left face is held
//! in a transit reservoir `R` and released into the last cell at rate
//! `R/τ`, `τ` being the deterministic time the sweep spends outside the
//! domain. `hΣQ + R` is conserved.

pub mod feynman_kac;
pub mod tridiagonal;

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::BarrierProfile;
use tridiagonal::Tridiagonal;

pub use feynman_kac::{feynman_kac_b0, richardson_order, FkOptions, FkResult, FkVariant};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    pub theta_min: f64,
    pub theta_max: f64,
    pub n: usize,
}

impl Grid1D {
    pub fn new(theta_min: f64, theta_max: f64, n: usize) -> Result<Self> {
        if n < 64 {
            return Err(Error::config("grid.n", "need at least 64 points"));
        }
        if !(theta_max > theta_min) || !theta_min.is_finite() || !theta_max.is_finite() {
            return Err(Error::config("grid", "need finite theta_min < theta_max"));
        }
        Ok(Self { theta_min, theta_max, n })
    }

    pub fn spacing(&self) -> f64 {
        (self.theta_max - self.theta_min) / (self.n - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        self.theta_min + self.spacing() * i as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.point(i)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityOnGrid {
    pub grid: Grid1D,
    pub values: Vec<f64>,
    pub time: f64,
    /// Mass in transit outside the domain (reinjection only).
    pub reservoir: f64,
}

impl DensityOnGrid {
    pub fn from_fn(grid: Grid1D, time: f64, f: impl Fn(f64) -> f64) -> Self {
        Self {
            values: grid.points().into_iter().map(f).collect(),
            grid,
            time,
            reservoir: 0.0,
        }
    }

    /// Narrow Gaussian of unit discrete mass.
    pub fn spike(grid: Grid1D, center: f64, width: f64) -> Self {
        let mut d = Self::from_fn(grid, 0.0, |x| (-0.5 * ((x - center) / width).powi(2)).exp());
        let m = d.grid_mass();
        d.values.iter_mut().for_each(|v| *v /= m);
        d
    }

    pub fn with_reservoir(mut self, r: f64) -> Self {
        self.reservoir = r;
        self
    }

    /// `h Σ Q`.
    pub fn grid_mass(&self) -> f64 {
        self.grid.spacing() * self.values.iter().sum::<f64>()
    }

    /// Grid mass plus reservoir.
    pub fn mass(&self) -> f64 {
        self.grid_mass() + self.reservoir
    }

    pub fn max_abs_diff(&self, other: &[f64]) -> f64 {
        self.values.iter().zip(other).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    pub fn mean(&self) -> f64 {
        let m = self.grid_mass();
        let h = self.grid.spacing();
        self.grid.points().iter().zip(&self.values).map(|(x, q)| x * q).sum::<f64>() * h / m
    }

    pub fn variance(&self) -> f64 {
        let m = self.grid_mass();
        let mu = self.mean();
        let h = self.grid.spacing();
        self.grid
            .points()
            .iter()
            .zip(&self.values)
            .map(|(x, q)| (x - mu).powi(2) * q)
            .sum::<f64>()
            * h
            / m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// Left outflow re-enters at the right edge through a transit reservoir.
    Reinjection,
    ZeroFlux,
    /// `Q = 0` beyond both edges.
    Dirichlet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TimeScheme {
    #[default]
    CrankNicolson,
    ExplicitEuler,
}

type Velocity<'a> = Box<dyn Fn(f64, f64) -> f64 + Send + Sync + 'a>;
type Transit<'a> = Box<dyn Fn(f64) -> f64 + Send + Sync + 'a>;
type Potential<'a> = Box<dyn Fn(f64) -> f64 + Send + Sync + 'a>;

/// A drift-diffusion problem on a grid.
pub struct FpProblem<'a> {
    pub grid: Grid1D,
    pub epsilon: f64,
    pub boundary: Boundary,
    pub scheme: TimeScheme,
    velocity: Velocity<'a>,
    transit: Option<Transit<'a>>,
    potential: Option<Potential<'a>>,
}

impl<'a> FpProblem<'a> {
    /// The θ-process with reinjection.
    pub fn theta_process(grid: Grid1D, profile: BarrierProfile<f64>, epsilon: f64) -> Result<Self> {
        profile.validate()?;
        check_eps(epsilon)?;
        let (lo, hi) = (grid.theta_min, grid.theta_max);
        Ok(Self {
            grid,
            epsilon,
            boundary: Boundary::Reinjection,
            scheme: TimeScheme::CrankNicolson,
            velocity: Box::new(move |x, t| {
                let om = profile.omega0(t);
                -(x * x + om * om)
            }),
            transit: Some(Box::new(move |t| {
                let om = profile.omega0(t);
                (PI + (lo / om).atan() - (hi / om).atan()) / om
            })),
            potential: None,
        })
    }

    /// Arbitrary velocity field; reinjection is unavailable.
    pub fn with_velocity(
        grid: Grid1D,
        epsilon: f64,
        boundary: Boundary,
        velocity: impl Fn(f64, f64) -> f64 + Send + Sync + 'a,
    ) -> Result<Self> {
        check_eps(epsilon)?;
        if boundary == Boundary::Reinjection {
            return Err(Error::config("fp.boundary", "reinjection needs the theta-process transit time"));
        }
        Ok(Self {
            grid,
            epsilon,
            boundary,
            scheme: TimeScheme::CrankNicolson,
            velocity: Box::new(velocity),
            transit: None,
            potential: None,
        })
    }

    /// Adds a killing/creation term: `∂t Q = -∂θ J - V(θ) Q`.
    pub fn with_potential(mut self, v: impl Fn(f64) -> f64 + Send + Sync + 'a) -> Self {
        self.potential = Some(Box::new(v));
        self
    }

    pub fn scheme(mut self, scheme: TimeScheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn boundary(mut self, boundary: Boundary) -> Result<Self> {
        if boundary == Boundary::Reinjection && self.transit.is_none() {
            return Err(Error::config("fp.boundary", "reinjection needs the theta-process transit time"));
        }
        self.boundary = boundary;
        Ok(self)
    }

    pub fn velocity(&self, x: f64, t: f64) -> f64 {
        (self.velocity)(x, t)
    }

    /// Transit time outside the domain at `t`.
    pub fn transit_time(&self, t: f64) -> Option<f64> {
        self.transit.as_ref().map(|f| f(t))
    }

    /// Face weights `(α_j, β_j)`, `F_j = α_j Q_{j-1} - β_j Q_j`, faces `0..=n`.
    fn face_weights(&self, t: f64) -> (Vec<f64>, Vec<f64>) {
        let n = self.grid.n;
        let h = self.grid.spacing();
        let mut alpha = vec![0.0; n + 1];
        let mut beta = vec![0.0; n + 1];
        for j in 0..=n {
            let xf = self.grid.theta_min + (j as f64 - 0.5) * h;
            let v = self.velocity(xf, t);
            let (a, b) = if self.epsilon > 0.0 {
                let p = v * h / self.epsilon;
                let k = self.epsilon / h;
                (k * bernoulli(-p), k * bernoulli(p))
            } else {
                (v.max(0.0), (-v).max(0.0))
            };
            alpha[j] = a;
            beta[j] = b;
        }
        match self.boundary {
            Boundary::ZeroFlux => {
                alpha[0] = 0.0;
                beta[0] = 0.0;
                alpha[n] = 0.0;
                beta[n] = 0.0;
            }
            Boundary::Dirichlet => {
                alpha[0] = 0.0;
                beta[n] = 0.0;
            }
            Boundary::Reinjection => {
                alpha[0] = 0.0;
                alpha[n] = 0.0;
                beta[n] = 0.0;
            }
        }
        (alpha, beta)
    }

    /// Generator `L` with `dQ/dt = L Q` (reservoir coupling excluded).
    fn generator(&self, t: f64) -> (Tridiagonal, f64) {
        let n = self.grid.n;
        let h = self.grid.spacing();
        let (alpha, beta) = self.face_weights(t);
        let mut m = Tridiagonal::zeros(n);
        for i in 0..n {
            m.lower[i] = alpha[i] / h;
            m.diag[i] = -(beta[i] + alpha[i + 1]) / h;
            m.upper[i] = beta[i + 1] / h;
            if let Some(v) = &self.potential {
                m.diag[i] -= v(self.grid.point(i));
            }
        }
        (m, beta[0])
    }

    /// Largest stable explicit step, `min(h²/(2ε), h/max|v|)`.
    pub fn explicit_limit(&self, t: f64) -> f64 {
        let h = self.grid.spacing();
        let vmax = self
            .grid
            .points()
            .iter()
            .map(|&x| self.velocity(x, t).abs())
            .fold(0.0, f64::max);
        let diff = if self.epsilon > 0.0 { h * h / (2.0 * self.epsilon) } else { f64::INFINITY };
        let adv = if vmax > 0.0 { h / vmax } else { f64::INFINITY };
        diff.min(adv)
    }

    /// Advances `q` by one step of length `dt`.
    pub fn step(&self, q: &mut DensityOnGrid, dt: f64) -> Result<()> {
        let n = self.grid.n;
        let h = self.grid.spacing();
        let tm = q.time + 0.5 * dt;
        let (l, out_rate) = self.generator(match self.scheme {
            TimeScheme::CrankNicolson => tm,
            TimeScheme::ExplicitEuler => q.time,
        });
        let reinject = self.boundary == Boundary::Reinjection;
        let tau = if reinject {
            self.transit_time(tm).filter(|t| *t > 0.0).ok_or_else(|| Error::config("fp.boundary", "transit time must be > 0"))?
        } else {
            f64::INFINITY
        };
        let lq = l.apply(&q.values);
        match self.scheme {
            TimeScheme::ExplicitEuler => {
                let lim = self.explicit_limit(q.time);
                if dt > lim {
                    return Err(Error::config("fp.dt", format!("explicit step {dt:e} exceeds stability limit {lim:e}")));
                }
                let (r, q_left) = (q.reservoir, q.values[0]);
                for i in 0..n {
                    q.values[i] += dt * lq[i];
                }
                if reinject {
                    q.values[n - 1] += dt * r / (tau * h);
                    q.reservoir = r + dt * (out_rate * q_left - r / tau);
                }
            }
            TimeScheme::CrankNicolson => {
                let half = 0.5 * dt;
                let mut rhs: Vec<f64> = (0..n).map(|i| q.values[i] + half * lq[i]).collect();
                let mut a = Tridiagonal::zeros(n);
                for i in 0..n {
                    a.lower[i] = -half * l.lower[i];
                    a.diag[i] = 1.0 - half * l.diag[i];
                    a.upper[i] = -half * l.upper[i];
                }
                if reinject {
                    let r = q.reservoir;
                    rhs[n - 1] += half * r / (tau * h);
                    let b_r = r + half * (out_rate * q.values[0] - r / tau);
                    let g = 1.0 + half / tau;
                    // R' = (b_R + half·out_rate·Q'_0) / g, substituted into row n-1.
                    let c0 = b_r / g;
                    let c1 = half * out_rate / g;
                    rhs[n - 1] += half / (tau * h) * c0;
                    let corner = -half / (tau * h) * c1;
                    let next = a.solve_with_corner(n - 1, 0, corner, &rhs)?;
                    q.reservoir = c0 + c1 * next[0];
                    q.values = next;
                } else {
                    q.values = a.solve(&rhs)?;
                }
            }
        }
        q.time += dt;
        if q.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite density".into()));
        }
        Ok(())
    }

    /// Evolves to `t_end` with steps no longer than `dt`, returning the
    /// state every `every` steps (and the final one).
    pub fn evolve(&self, q0: &DensityOnGrid, dt: f64, t_end: f64, every: usize) -> Result<Vec<DensityOnGrid>> {
        if q0.grid != self.grid {
            return Err(Error::config("fp.grid", "initial density lives on another grid"));
        }
        if !(dt > 0.0) {
            return Err(Error::config("fp.dt", "must be > 0"));
        }
        let span = t_end - q0.time;
        if !(span >= 0.0) {
            return Err(Error::config("fp.t_end", "must not precede the initial time"));
        }
        let steps = (span / dt).ceil().max(1.0) as usize;
        let h = span / steps as f64;
        let mut q = q0.clone();
        let mut out = Vec::new();
        for k in 1..=steps {
            self.step(&mut q, h)?;
            if every > 0 && k % every == 0 && k != steps {
                out.push(q.clone());
            }
        }
        out.push(q);
        Ok(out)
    }

    /// Stationary solution of the discrete scheme at frozen time `t` with
    /// reinjection: every face carries the same flux. Unit total mass.
    pub fn discrete_stationary(&self, t: f64) -> Result<DensityOnGrid> {
        if self.boundary != Boundary::Reinjection {
            return Err(Error::config("fp.boundary", "discrete stationary state needs reinjection"));
        }
        let n = self.grid.n;
        let h = self.grid.spacing();
        if self.potential.is_some() {
            return Err(Error::config("fp.potential", "no stationary state with a potential term"));
        }
        let (alpha, beta) = self.face_weights(t);
        let tau = self.transit_time(t).unwrap_or(0.0);
        // Leftward flux of unit size: F = -1.
        let mut q = vec![0.0; n];
        q[0] = 1.0 / beta[0];
        for i in 0..n - 1 {
            q[i + 1] = (alpha[i + 1] * q[i] + 1.0) / beta[i + 1];
        }
        let mass = h * q.iter().sum::<f64>() + tau;
        Ok(DensityOnGrid {
            grid: self.grid,
            values: q.into_iter().map(|v| v / mass).collect(),
            time: t,
            reservoir: tau / mass,
        })
    }
}

fn check_eps(epsilon: f64) -> Result<()> {
    if epsilon >= 0.0 && epsilon.is_finite() {
        Ok(())
    } else {
        Err(Error::config("fp.epsilon", "must be finite and >= 0"))
    }
}

/// `B(x) = x / (eˣ - 1)`, `B(0) = 1`.
pub fn bernoulli(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - 0.5 * x
    } else if x > 700.0 {
        x * (-x).exp()
    } else {
        x / x.exp_m1()
    }
}

/// θ-process from `q0` to `t_end` with reinjection and Crank-Nicolson.
pub fn evolve_fp(q0: &DensityOnGrid, profile: BarrierProfile<f64>, epsilon: f64, dt: f64, t_end: f64) -> Result<DensityOnGrid> {
    let p = FpProblem::theta_process(q0.grid, profile, epsilon)?;
    Ok(p.evolve(q0, dt, t_end, 0)?.pop().unwrap())
}

/// Slowest decay rate from `‖Q(t_k) - Q_ref‖_∞` by a log-linear fit.
pub fn relaxation_rate(snapshots: &[DensityOnGrid], reference: &[f64]) -> Result<f64> {
    if snapshots.len() < 3 {
        return Err(Error::Fit("need at least 3 snapshots".into()));
    }
    let pts: Vec<(f64, f64)> = snapshots.iter().map(|s| (s.time, s.max_abs_diff(reference))).collect();
    if pts.windows(2).any(|w| w[1].1 > w[0].1) {
        return Err(Error::Fit("residual norm is not monotone".into()));
    }
    if pts.iter().any(|p| !(p.1 > 0.0)) {
        return Err(Error::Fit("residual reached zero".into()));
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1.ln() - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("snapshots share one time".into()));
    }
    Ok(-sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelParams;
    use crate::stationary::{build_stationary, GridSpec};
    use proptest::prelude::*;

    fn grid(n: usize) -> Grid1D {
        Grid1D::new(-40.0, 40.0, n).unwrap()
    }

    #[test]
    fn bernoulli_values() {
        assert_eq!(bernoulli(0.0), 1.0);
        assert!((bernoulli(1.0) - 1.0 / (std::f64::consts::E - 1.0)).abs() < 1e-15);
        assert!((bernoulli(-3.0) - 3.0f64.exp() * bernoulli(3.0)).abs() < 1e-13);
        assert!(bernoulli(800.0) >= 0.0);
    }

    #[test]
    fn zero_flux_diffusion_conserves_mass() {
        let g = Grid1D::new(-10.0, 10.0, 201).unwrap();
        let p = FpProblem::with_velocity(g, 1.0, Boundary::ZeroFlux, |_, _| 0.0).unwrap();
        let q0 = DensityOnGrid::spike(g, 0.0, 0.5);
        let q = p.evolve(&q0, 1e-3, 10.0, 0).unwrap().pop().unwrap();
        assert!((q.mass() - 1.0).abs() < 1e-12, "{}", q.mass() - 1.0);
    }

    #[test]
    fn heat_kernel_variance() {
        let g = Grid1D::new(-30.0, 30.0, 1201).unwrap();
        let p = FpProblem::with_velocity(g, 0.7, Boundary::ZeroFlux, |_, _| 0.0).unwrap();
        let q0 = DensityOnGrid::spike(g, 0.0, 1.0);
        let v0 = q0.variance();
        let q = p.evolve(&q0, 1e-2, 5.0, 0).unwrap().pop().unwrap();
        let grown = q.variance() - v0;
        assert!((grown / (2.0 * 0.7 * 5.0) - 1.0).abs() < 5e-3, "{grown}");
    }

    #[test]
    fn explicit_stability_is_checked() {
        let g = grid(256);
        let p = FpProblem::theta_process(g, BarrierProfile::constant(1.0), 1.0).unwrap().scheme(TimeScheme::ExplicitEuler);
        let mut q = DensityOnGrid::spike(g, 0.0, 1.0);
        let err = p.step(&mut q, 1e-2).unwrap_err();
        assert!(err.is_configuration());
        let lim = p.explicit_limit(0.0);
        p.step(&mut q, 0.9 * lim).unwrap();
    }

    #[test]
    fn reinjection_conserves_total_mass() {
        let g = grid(512);
        let p = FpProblem::theta_process(g, BarrierProfile::constant(1.0), 1.0).unwrap();
        let q0 = DensityOnGrid::spike(g, 0.0, 1.0);
        let q = p.evolve(&q0, 2e-3, 5.0, 0).unwrap().pop().unwrap();
        assert!((q.mass() - 1.0).abs() < 1e-11);
        assert!(q.reservoir > 0.0);
    }

    #[test]
    fn discrete_stationary_is_fixed_point() {
        let g = grid(1024);
        let p = FpProblem::theta_process(g, BarrierProfile::constant(1.0), 1.0).unwrap();
        let qs = p.discrete_stationary(0.0).unwrap();
        assert!((qs.mass() - 1.0).abs() < 1e-12);
        let q = p.evolve(&qs, 1e-2, 3.0, 0).unwrap().pop().unwrap();
        assert!(q.max_abs_diff(&qs.values) < 1e-10);
    }

    #[test]
    fn analytic_stationary_nearly_fixed() {
        let g = grid(2048);
        let params = ModelParams::new(1.0, 1.0, 1.0, 1.0).unwrap();
        let st = build_stationary(&params, GridSpec::default()).unwrap();
        let p = FpProblem::theta_process(g, BarrierProfile::constant(1.0), 1.0).unwrap();
        let tau = p.transit_time(0.0).unwrap();
        let q0 = DensityOnGrid::from_fn(g, 0.0, |x| st.density_theta(x).unwrap()).with_reservoir(st.flux * tau);
        let q = p.evolve(&q0, 1e-3, std::f64::consts::PI, 0).unwrap().pop().unwrap();
        assert!(q.max_abs_diff(&q0.values) < 1e-4, "{}", q.max_abs_diff(&q0.values));
    }

    #[test]
    fn relaxation_rate_positive_and_grid_stable() {
        let rate = |n: usize| {
            let g = grid(n);
            let p = FpProblem::theta_process(g, BarrierProfile::constant(1.0), 1.0).unwrap();
            let qs = p.discrete_stationary(0.0).unwrap();
            let q0 = DensityOnGrid::spike(g, 0.0, 1.0);
            let snaps = p.evolve(&q0, 5e-3, 12.0, 200).unwrap();
            let late: Vec<_> = snaps.into_iter().filter(|s| s.time >= 6.0).collect();
            relaxation_rate(&late, &qs.values).unwrap()
        };
        let (a, b) = (rate(1024), rate(2048));
        assert!(a > 0.0);
        assert!((a / b - 1.0).abs() < 0.05, "{a} {b}");
    }

    #[test]
    fn ou_spatial_order_near_two() {
        // v = -kθ, exact Gaussian with mean m0 e^{-kt}, variance ε/k + (s0² - ε/k) e^{-2kt}.
        let (k, eps, m0, s0, t_end) = (1.0f64, 0.5f64, 1.0f64, 0.6f64, 1.0f64);
        let exact = |x: f64| {
            let m = m0 * (-k * t_end).exp();
            let v = eps / k + (s0 * s0 - eps / k) * (-2.0 * k * t_end).exp();
            (-(x - m).powi(2) / (2.0 * v)).exp() / (2.0 * PI * v).sqrt()
        };
        let err = |n: usize| {
            let g = Grid1D::new(-8.0, 8.0, n).unwrap();
            let p = FpProblem::with_velocity(g, eps, Boundary::ZeroFlux, move |x, _| -k * x).unwrap();
            let q0 = DensityOnGrid::from_fn(g, 0.0, |x| (-(x - m0).powi(2) / (2.0 * s0 * s0)).exp() / (2.0 * PI * s0 * s0).sqrt());
            let q = p.evolve(&q0, g.spacing() * 0.5, t_end, 0).unwrap().pop().unwrap();
            g.points().iter().zip(&q.values).map(|(&x, &v)| (v - exact(x)).abs()).fold(0.0, f64::max)
        };
        let (e1, e2) = (err(161), err(321));
        let order = (e1 / e2).log2();
        assert!((1.8..=2.2).contains(&order), "{order}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn zero_flux_any_drift_conserves(a in -2.0f64..2.0, b in -1.0f64..1.0, eps in 0.0f64..1.0) {
            let g = Grid1D::new(-5.0, 5.0, 101).unwrap();
            let p = FpProblem::with_velocity(g, eps, Boundary::ZeroFlux, move |x, _| a + b * x).unwrap();
            let q0 = DensityOnGrid::spike(g, 0.0, 0.7);
            let q = p.evolve(&q0, 1e-2, 10.0, 0).unwrap().pop().unwrap();
            prop_assert!((q.mass() - 1.0).abs() < 1e-10);
        }
    }
}
