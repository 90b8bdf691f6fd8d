//! Stationary law of the θ-process.
//!
//! In θ̄ = θ/ε^{1/3} units the stationary density solves
//! `(θ̄² + λγ) Q̃ + Q̃' = J̄`. The unnormalised solution is
//! `u(θ̄) = ∫₀^∞ exp(-s³/3 + θ̄ s² - (θ̄² + λγ) s) ds`, which satisfies
//! `(θ̄² + λγ) u + u' = 1` and has mass
//! `N = √π ∫₀^∞ z^{-1/2} exp(-z³/12 - λγ z) dz`. Hence `Q̃ = u/N`, `J̄ = 1/N`
//! and `J₀f = ε^{1/3}/N`.

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::numerics::airy::airy;
use crate::numerics::quadrature::Quadrature;
use crate::scalar::Real;

/// Mass beyond the grid allowed by [`build_stationary`].
pub const TAIL_MASS_BOUND: f64 = 1e-4;

/// `θ̄² + λγ` above which `u` is taken from its large-`q` series.
const ASYMPTOTIC_Q: f64 = 1e6;

fn inner_quadrature<T: Real>() -> Quadrature<T> {
    Quadrature::new()
        .abs_tol(T::min_positive_value())
        .rel_tol(T::lit(1e-12))
        .max_intervals(4000)
}

/// `u(θ̄)` in the overflow-safe substituted form.
pub fn qs_unnormalized<T: Real>(theta_bar: T, lambda_gamma: T) -> Result<T> {
    if !(lambda_gamma >= T::zero()) || !theta_bar.is_finite() || !lambda_gamma.is_finite() {
        return Err(Error::Domain(format!(
            "qs_unnormalized needs finite theta_bar and lambda_gamma >= 0, got ({}, {})",
            theta_bar.as_f64(),
            lambda_gamma.as_f64()
        )));
    }
    let tb = theta_bar;
    let q = tb * tb + lambda_gamma;
    let third = T::lit(1.0 / 3.0);
    let plateau = -(tb * tb * tb) * third - lambda_gamma * tb;
    if q > T::lit(ASYMPTOTIC_Q) && (tb <= T::zero() || plateau + q.ln() < T::lit(-40.0)) {
        // Iterating u = (1 - u')/q from 1/q; the next term is O(θ̄²/q⁵).
        let q2 = q * q;
        return Ok(T::one() / q + T::lit(2.0) * tb / (q2 * q) - T::lit(2.0) / (q2 * q2)
            + T::lit(12.0) * tb * tb / (q2 * q2 * q));
    }
    let g = move |s: T| (-(s * s * s) * third + tb * s * s - q * s).exp();
    let quad = inner_quadrature::<T>();
    if tb > T::zero() {
        // E'(s) = -(s-θ̄)² - λγ: flat at s = θ̄ with value exp(-θ̄³/3 - λγ θ̄).
        let head = geometric_pieces(&quad, &g, T::zero(), tb, T::one() / q)?;
        if plateau < T::lit(-700.0) {
            return Ok(head);
        }
        let scale = T::one() / lambda_gamma.max(T::one());
        let near = geometric_pieces(&quad, &g, tb, tb + T::lit(8.0), scale)?;
        let (far, _) = quad.integrate(&g, tb + T::lit(8.0), T::infinity())?;
        Ok(head + near + far)
    } else {
        // Monotone decay on the scale 1/max(1, q).
        let c = T::one() / q.max(T::one());
        let (v, _) = quad.integrate(|t: T| g(c * t) * c, T::zero(), T::infinity())?;
        Ok(v)
    }
}

/// `∫_a^b g` over pieces `[a + (4^k - 1) w / 3, ...]` growing by a factor 4,
/// so a layer of width `w` at `a` is resolved however long `[a, b]` is.
fn geometric_pieces<T: Real>(quad: &Quadrature<T>, g: &impl Fn(T) -> T, a: T, b: T, w: T) -> Result<T> {
    let mut lo = a;
    let mut width = w;
    let mut acc = T::zero();
    while lo < b {
        let hi = (lo + width).min(b);
        acc = acc + quad.integrate(g, lo, hi)?.0;
        lo = hi;
        width = width * T::lit(4.0);
    }
    Ok(acc)
}

/// Mass `N(λγ) = √π ∫₀^∞ z^{-1/2} e^{-z³/12 - λγ z} dz`.
pub fn normalization<T: Real>(lambda_gamma: T) -> Result<T> {
    if !(lambda_gamma >= T::zero()) {
        return Err(Error::Domain("lambda_gamma must be >= 0".into()));
    }
    let quad = Quadrature::new()
        .abs_tol(T::min_positive_value())
        .rel_tol(T::lit(1e-13));
    // z = u², u = c v: the Gaussian factor e^{-λγ c² v²} stays O(1) wide.
    let c = T::one() / (T::one() + lambda_gamma).sqrt();
    let two = T::lit(2.0);
    let (v, _) = quad.integrate(
        |v: T| {
            let u = c * v;
            let z = u * u;
            two * c * (-(z * z * z) / T::lit(12.0) - lambda_gamma * z).exp()
        },
        T::zero(),
        T::infinity(),
    )?;
    Ok(T::PI().sqrt() * v)
}

/// `J₀f` from the normalisation integral.
pub fn flux_constant_integral<T: Real>(lambda_gamma: T, epsilon: T) -> Result<T> {
    check_eps(epsilon)?;
    Ok(epsilon.cbrt() / normalization(lambda_gamma)?)
}

/// `J₀f` from the Airy form `J₀f⁻¹ = π ε^{-1/3} [Ai² + Bi²](-λγ)`.
pub fn flux_constant_airy<T: Real>(lambda_gamma: T, epsilon: T) -> Result<T> {
    check_eps(epsilon)?;
    if !(lambda_gamma >= T::zero()) {
        return Err(Error::Domain("lambda_gamma must be >= 0".into()));
    }
    let a = airy(-lambda_gamma)?;
    Ok(epsilon.cbrt() / (T::PI() * a.modulus_sq()))
}

fn check_eps<T: Real>(epsilon: T) -> Result<()> {
    if epsilon > T::zero() && epsilon.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("epsilon must be > 0, got {}", epsilon.as_f64())))
    }
}

/// Probability mass of the normalised density outside `[-T, T]` from the
/// `J̄/(θ̄² + λγ)` tails.
pub fn tail_mass<T: Real>(theta_max: T, lambda_gamma: T, jbar: T) -> T {
    T::lit(2.0) * tail_integral(theta_max, lambda_gamma) * jbar
}

/// `∫_T^∞ dθ̄ / (θ̄² + λγ)`.
fn tail_integral<T: Real>(t: T, lg: T) -> T {
    if lg > T::zero() {
        let r = lg.sqrt();
        (T::FRAC_PI_2() - (t / r).atan()) / r
    } else {
        T::one() / t
    }
}

/// Grid layout for [`build_stationary`]: `θ̄ = w sinh(s)`, `s` uniform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec<T> {
    /// Number of points; forced odd.
    pub n_points: usize,
    /// Half-width; `None` picks the smallest value meeting the tail bound.
    pub theta_max: Option<T>,
    /// Core width of the stretch; `None` uses `max(1, √λγ)`.
    pub core_width: Option<T>,
}

impl<T> Default for GridSpec<T> {
    fn default() -> Self {
        Self {
            n_points: 2001,
            theta_max: None,
            core_width: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationaryDistribution<T> {
    pub lambda_gamma: T,
    pub epsilon: T,
    /// θ̄ nodes, increasing.
    pub grid: Vec<T>,
    /// Normalised `Q̃(θ̄)` at the nodes.
    pub density: Vec<T>,
    /// `J₀f` in θ units.
    pub flux: T,
    /// `N = 1/J̄`.
    pub norm: T,
    core_width: T,
    s_max: T,
}

/// Builds `Q̃` on a sinh-stretched grid, normalised to unit mass.
pub fn build_stationary<T: Real>(
    params: &ModelParams<T>,
    spec: GridSpec<T>,
) -> Result<StationaryDistribution<T>> {
    params.validate()?;
    let lg = params.lambda_gamma();
    let norm = normalization(lg)?;
    let jbar = T::one() / norm;
    let bound = T::lit(TAIL_MASS_BOUND);
    let theta_max = match spec.theta_max {
        Some(t) => {
            let m = tail_mass(t, lg, jbar);
            if !(m < bound) {
                return Err(Error::TailMass {
                    mass: m.as_f64(),
                    bound: TAIL_MASS_BOUND,
                });
            }
            t
        }
        None => {
            // 2 J̄ ∫_T^∞ 1/(θ̄²+λγ) = bound, with 5% margin.
            let target = bound * T::lit(0.95) / (T::lit(2.0) * jbar);
            if lg > T::zero() {
                let r = lg.sqrt();
                let x = T::FRAC_PI_2() - target * r;
                if x <= T::zero() {
                    T::lit(10.0) * r
                } else {
                    r * x.tan()
                }
            } else {
                T::one() / target
            }
        }
    };
    let w = spec.core_width.unwrap_or_else(|| lg.sqrt().max(T::one()));
    let n = spec.n_points.max(65) | 1;
    let s_max = (theta_max / w).asinh();
    let mut grid = Vec::with_capacity(n);
    let mut density = Vec::with_capacity(n);
    let denom = T::from_usize(n - 1).unwrap();
    for i in 0..n {
        let s = -s_max + T::lit(2.0) * s_max * T::from_usize(i).unwrap() / denom;
        let tb = w * s.sinh();
        grid.push(tb);
        density.push(qs_unnormalized(tb, lg)? / norm);
    }
    Ok(StationaryDistribution {
        lambda_gamma: lg,
        epsilon: params.epsilon,
        grid,
        density,
        flux: params.epsilon.cbrt() / norm,
        norm,
        core_width: w,
        s_max,
    })
}

impl<T: Real> StationaryDistribution<T> {
    /// `J̄ = 1/N`, the flux in θ̄ units.
    pub fn jbar(&self) -> T {
        T::one() / self.norm
    }

    /// `Q̃(θ̄)` evaluated directly.
    pub fn density_at(&self, theta_bar: T) -> Result<T> {
        Ok(qs_unnormalized(theta_bar, self.lambda_gamma)? / self.norm)
    }

    /// Density in θ units, `Q(θ) = Q̃(θ/ε^{1/3}) / ε^{1/3}`.
    pub fn density_theta(&self, theta: T) -> Result<T> {
        let c = self.epsilon.cbrt();
        Ok(self.density_at(theta / c)? / c)
    }

    pub fn theta_max(&self) -> T {
        *self.grid.last().unwrap()
    }

    /// Composite Simpson over the stretched variable plus analytic tails.
    pub fn total_mass(&self) -> T {
        let n = self.grid.len();
        let h = T::lit(2.0) * self.s_max / T::from_usize(n - 1).unwrap();
        let mut acc = T::zero();
        for i in 0..n {
            let s = -self.s_max + h * T::from_usize(i).unwrap();
            let jac = self.core_width * s.cosh();
            let c = if i == 0 || i == n - 1 {
                T::one()
            } else if i % 2 == 1 {
                T::lit(4.0)
            } else {
                T::lit(2.0)
            };
            acc = acc + c * self.density[i] * jac;
        }
        acc * h / T::lit(3.0) + tail_mass(self.theta_max(), self.lambda_gamma, self.jbar())
    }

    /// `∫ f(θ̄) Q̃(θ̄) dθ̄` for even `f`: Simpson in the stretched variable
    /// plus the tails with `Q̃ ≈ J̄/(θ̄² + λγ)`.
    pub fn expectation_even(&self, f: impl Fn(T) -> T) -> Result<T> {
        let n = self.grid.len();
        let h = T::lit(2.0) * self.s_max / T::from_usize(n - 1).unwrap();
        let mut acc = T::zero();
        for i in 0..n {
            let s = -self.s_max + h * T::from_usize(i).unwrap();
            let jac = self.core_width * s.cosh();
            let c = if i == 0 || i == n - 1 {
                T::one()
            } else if i % 2 == 1 {
                T::lit(4.0)
            } else {
                T::lit(2.0)
            };
            acc = acc + c * f(self.grid[i]) * self.density[i] * jac;
        }
        let lg = self.lambda_gamma;
        let jbar = self.jbar();
        let quad = Quadrature::new().abs_tol(T::lit(1e-14)).rel_tol(T::lit(1e-10));
        let (tail, _) = quad.integrate(
            |x: T| f(x) * jbar / (x * x + lg),
            self.theta_max(),
            T::infinity(),
        )?;
        Ok(acc * h / T::lit(3.0) + T::lit(2.0) * tail)
    }

    /// Max over interior nodes of `|(θ̄²+λγ) Q̃ + Q̃' - J̄| / J̄`, with `Q̃'`
    /// from a five-point central difference on a locally refined stencil.
    pub fn ode_residual(&self) -> Result<T> {
        let mut worst = T::zero();
        let jbar = self.jbar();
        let n = self.grid.len();
        for i in 1..n - 1 {
            let x = self.grid[i];
            let h = T::lit(1e-2) * T::one().max(x.abs() * T::lit(0.01));
            let f = |d: T| self.density_at(x + d);
            let d1 = (f(-T::lit(2.0) * h)? - T::lit(8.0) * f(-h)? + T::lit(8.0) * f(h)? - f(T::lit(2.0) * h)?)
                / (T::lit(12.0) * h);
            let r = ((x * x + self.lambda_gamma) * self.density[i] + d1 - jbar).abs() / jbar;
            worst = worst.max(r);
        }
        Ok(worst)
    }

    /// Max over `|θ̄| ≤ extent` of the relative deviation from the
    /// Lorentzian `(√λγ/π)/(θ̄² + λγ)`, the small-noise limit in θ̄ units.
    pub fn lorentzian_deviation(&self, extent: T) -> T {
        let lg = self.lambda_gamma;
        let r = lg.sqrt();
        self.grid
            .iter()
            .zip(&self.density)
            .filter(|(x, _)| x.abs() <= extent)
            .map(|(&x, &q)| {
                let l = r / T::PI() / (x * x + lg);
                ((q - l) / l).abs()
            })
            .fold(T::zero(), T::max)
    }

    /// Mass inside `|θ̄| ≤ half_width`, a diagnostic for the large-noise
    /// concentration at the origin.
    pub fn central_mass(&self, half_width: T) -> Result<T> {
        let quad = Quadrature::new().abs_tol(T::lit(1e-10)).rel_tol(T::lit(1e-10));
        let (v, _) = quad.integrate(
            |x: T| self.density_at(x).unwrap_or(T::nan()),
            -half_width,
            half_width,
        )?;
        Ok(v)
    }
}

impl StationaryDistribution<f64> {
    /// `∫_a^b Q(θ) dθ` in θ units.
    pub fn mass_between(&self, a: f64, b: f64) -> Result<f64> {
        let c = self.epsilon.cbrt();
        let quad = Quadrature::new().abs_tol(1e-12).rel_tol(1e-10);
        let (v, _) = quad.integrate(|x: f64| self.density_at(x).unwrap_or(f64::NAN), a / c, b / c)?;
        Ok(v)
    }
}

/// Lorentzian `(Ω/π)/(θ² + Ω²)` in θ units.
pub fn lorentzian<T: Real>(theta: T, omega: T) -> T {
    omega / T::PI() / (theta * theta + omega * omega)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn origin_value_is_gamma_identity() {
        // ∫₀^∞ e^{-s³/3} ds = 3^{-2/3} Γ(1/3).
        let v = qs_unnormalized(0.0f64, 0.0).unwrap();
        let exact = 3f64.powf(-2.0 / 3.0) * 2.678_938_534_707_747_6;
        assert_relative_eq!(v, exact, max_relative = 1e-12);
        assert_relative_eq!(v, 1.287_899_316_854_069, max_relative = 1e-12);
    }

    #[test]
    fn large_argument_asymptote() {
        for &lg in &[0.0, 1.0, 9.0] {
            let x = 60.0f64;
            let v = qs_unnormalized(x, lg).unwrap();
            assert!((v * (x * x + lg) - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn series_branch_is_continuous() {
        let d = 1e-4;
        for &(tb, lg) in &[(-1000.0f64, 0.0), (0.5, 1e6 - 0.25), (-3.0, 1e6 - 9.0)] {
            let below = {
                let x = if tb < 0.0 { tb + d } else { tb - d };
                let q = x * x + lg;
                (qs_unnormalized(x, lg).unwrap() * q, q)
            };
            let above = {
                let x = if tb < 0.0 { tb - d } else { tb + d };
                let q = x * x + lg;
                (qs_unnormalized(x, lg).unwrap() * q, q)
            };
            assert!(below.1 < ASYMPTOTIC_Q && above.1 > ASYMPTOTIC_Q);
            assert!((below.0 - above.0).abs() < 1e-11, "{tb} {lg}: {below:?} {above:?}");
        }
    }

    #[test]
    fn finite_for_extreme_arguments() {
        for &x in &[-1e4, -50.0, -3.0, 0.0, 3.0, 50.0, 1e4] {
            let v = qs_unnormalized(x, 2.0f64).unwrap();
            assert!(v.is_finite() && v > 0.0, "{x}: {v}");
        }
    }

    #[test]
    fn flux_examples() {
        let airy0 = flux_constant_airy(0.0f64, 1.0).unwrap();
        assert_relative_eq!(airy0, 0.631_342_160_773_973_3, max_relative = 1e-12);
        let big = flux_constant_airy(400.0f64, 1.0).unwrap();
        assert!((big / 20.0 - 1.0).abs() < 0.01);
        let quad_big = flux_constant_integral(400.0f64, 1.0).unwrap();
        assert!((quad_big / (20.0 / std::f64::consts::PI) - 1.0).abs() < 0.01);
        let a = flux_constant_integral(2.0f64, 1.0).unwrap();
        let b = flux_constant_integral(2.0f64, 8.0).unwrap();
        assert_relative_eq!(b, 2.0 * a, max_relative = 1e-12);
    }

    #[test]
    fn flux_ratio_is_one_over_pi() {
        let mut ratios = Vec::new();
        for &lg in &[0.0f64, 1.0, 4.0, 25.0] {
            let r = flux_constant_integral(lg, 1.0).unwrap() / flux_constant_airy(lg, 1.0).unwrap();
            ratios.push(r);
        }
        for r in &ratios {
            assert!((r / ratios[0] - 1.0).abs() < 1e-6);
            assert_relative_eq!(*r, std::f64::consts::FRAC_1_PI, max_relative = 1e-9);
        }
    }

    #[test]
    fn normalisation_matches_direct_mass() {
        // ∫ u dθ̄ by brute quadrature against N.
        let lg = 1.5f64;
        let quad = Quadrature::new().abs_tol(1e-9).rel_tol(1e-9);
        let (m, _) = quad
            .integrate(|x| qs_unnormalized(x, lg).unwrap(), f64::NEG_INFINITY, f64::INFINITY)
            .unwrap();
        assert_relative_eq!(m, normalization(lg).unwrap(), max_relative = 1e-7);
    }

    #[test]
    fn built_distribution_invariants() {
        for &(omega, eps) in &[(1.0f64, 1.0f64), (2.0, 1.0), (0.5, 1.0)] {
            let p = ModelParams::new(eps, omega, omega, omega).unwrap();
            let d = build_stationary(&p, GridSpec::default()).unwrap();
            assert!(d.density.iter().all(|&q| q >= 0.0));
            assert!((d.total_mass() - 1.0).abs() < 1e-6, "{}", d.total_mass());
            assert!(tail_mass(d.theta_max(), d.lambda_gamma, d.jbar()) < TAIL_MASS_BOUND);
        }
    }

    #[test]
    fn ode_residual_small() {
        let p = ModelParams::new(1.0f64, 1.0, 1.0, 1.0).unwrap();
        let d = build_stationary(&p, GridSpec { n_points: 201, ..GridSpec::default() }).unwrap();
        assert!(d.ode_residual().unwrap() < 1e-6);
    }

    #[test]
    fn narrow_grid_rejected() {
        let p = ModelParams::new(1.0f64, 1.0, 1.0, 1.0).unwrap();
        let r = build_stationary(&p, GridSpec { theta_max: Some(50.0), ..GridSpec::default() });
        assert!(matches!(r, Err(Error::TailMass { .. })));
    }

    #[test]
    fn lorentzian_limit() {
        // λγ = 100 with Ω_out = 10, ε = 1: within 2% for |θ| ≤ 3 Ω_out.
        let p = ModelParams::new(1.0f64, 10.0, 10.0, 10.0).unwrap();
        let d = build_stationary(&p, GridSpec::default()).unwrap();
        assert!(d.lorentzian_deviation(30.0) < 0.02, "{}", d.lorentzian_deviation(30.0));
    }

    #[test]
    fn tail_law_flat() {
        let lg = 4.0f64;
        let start = 10.0 + 2.0 * lg.sqrt();
        let c0 = qs_unnormalized(start, lg).unwrap() * (start * start + lg);
        for k in 1..20 {
            let x = start * (1.0 + k as f64);
            let c = qs_unnormalized(x, lg).unwrap() * (x * x + lg);
            assert!((c / c0 - 1.0).abs() < 0.01);
        }
    }

    #[test]
    fn sharpening_with_lambda() {
        let peak = |l: f64| {
            let p = ModelParams::new(l.powf(-1.5), 1.0, 1.0, 1.0).unwrap();
            let d = build_stationary(&p, GridSpec { n_points: 101, ..GridSpec::default() }).unwrap();
            // Peak height in θ units.
            d.density.iter().cloned().fold(0.0, f64::max) / p.theta_scale()
        };
        assert!(peak(0.5) < peak(2.0));
        assert!(peak(2.0) < peak(8.0));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn solves_flux_ode(x in -30.0f64..30.0, lg in 0.0f64..20.0) {
            let h = 1e-3;
            let f = |d: f64| qs_unnormalized(x + d, lg).unwrap();
            let d1 = (f(-2.0 * h) - 8.0 * f(-h) + 8.0 * f(h) - f(2.0 * h)) / (12.0 * h);
            let r = (x * x + lg) * f(0.0) + d1 - 1.0;
            prop_assert!(r.abs() < 1e-7, "residual {}", r);
        }

        #[test]
        fn positive_everywhere(x in -1e3f64..1e3, lg in 0.0f64..1e3) {
            let v = qs_unnormalized(x, lg).unwrap();
            prop_assert!(v > 0.0 && v.is_finite());
        }
    }
}
