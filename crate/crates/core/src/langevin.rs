//! Euler-Maruyama paths of `θ̇ = -(θ² + Ω₀²(t)) + F(t)`, `⟨F(t)F(t')⟩ = 2ε δ(t-t')`.
//!
//! The Riccati drift sends θ to -∞ in finite time. A path that crosses
//! `-θ_cut` is taken off the grid, the deterministic sweep time of the excised
//! excursion `-θ_cut → -∞ ≡ +∞ → +θ_cut` is added to the clock, and the path
//! re-enters at `+θ_cut`. Path functionals `∫θ` and `∫exp(-2∫θ)` skip the
//! excursion (principal value through the pole). Noise kicks above `+θ_cut`
//! are reflected back below it.
//!
//! Optionally each path also carries a complex solution ξ of
//! `ξ̈ = -(Ω₀² + F) ξ` driven by the same noise realization.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::BarrierProfile;
use crate::numerics::rng::RandomStream;

/// Largest number of steps a single path may take.
pub const MAX_STEPS: f64 = 1e9;

/// Upper bound on `dt θ_cut²`.
pub const STABILITY_BOUND: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct SdeConfig {
    pub dt: f64,
    pub theta_cut: f64,
    pub n_paths: usize,
    pub seed: u64,
    pub profile: BarrierProfile<f64>,
    pub epsilon: f64,
    /// Store every `record_stride`-th step (events are always stored).
    pub record_stride: usize,
    /// Co-evolve the complex trajectory ξ.
    pub track_xi: bool,
}

impl SdeConfig {
    pub fn new(profile: BarrierProfile<f64>, epsilon: f64, dt: f64) -> Result<Self> {
        let cfg = Self {
            dt,
            theta_cut: default_theta_cut(&profile, epsilon),
            n_paths: 1,
            seed: 0,
            profile,
            epsilon,
            record_stride: 1,
            track_xi: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_theta_cut(mut self, cut: f64) -> Result<Self> {
        self.theta_cut = cut;
        self.validate()?;
        Ok(self)
    }

    pub fn with_paths(mut self, n: usize) -> Self {
        self.n_paths = n;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_record_stride(mut self, stride: usize) -> Self {
        self.record_stride = stride.max(1);
        self
    }

    pub fn with_xi(mut self, on: bool) -> Self {
        self.track_xi = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.profile.validate()?;
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::config("sde.dt", "must be finite and > 0"));
        }
        if !(self.theta_cut > 0.0) || !self.theta_cut.is_finite() {
            return Err(Error::config("sde.theta_cut", "must be finite and > 0"));
        }
        if !(self.epsilon >= 0.0) || !self.epsilon.is_finite() {
            return Err(Error::config("sde.epsilon", "must be finite and >= 0"));
        }
        if self.dt * self.theta_cut * self.theta_cut > STABILITY_BOUND {
            return Err(Error::config(
                "sde.dt",
                format!(
                    "dt * theta_cut^2 = {:.3e} exceeds {STABILITY_BOUND}",
                    self.dt * self.theta_cut * self.theta_cut
                ),
            ));
        }
        if self.n_paths == 0 {
            return Err(Error::config("sde.n_paths", "must be >= 1"));
        }
        Ok(())
    }

    /// Stream of path `index`.
    pub fn stream(&self, index: usize) -> RandomStream {
        RandomStream::new(self.seed, index as u64)
    }
}

/// `max(20, 10√λγ) ε^{1/3}`, i.e. `max(20 ε^{1/3}, 10 Ω_out)`.
pub fn default_theta_cut(profile: &BarrierProfile<f64>, epsilon: f64) -> f64 {
    (20.0 * epsilon.max(0.0).cbrt()).max(10.0 * profile.omega_final())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub theta: f64,
    pub reinjected: bool,
}

/// One plain Euler-Maruyama step of length `cfg.dt`. Overshoot above
/// `+θ_cut` is reflected.
pub fn step(theta: f64, t: f64, cfg: &SdeConfig, deviate: f64) -> StepOutcome {
    let om = cfg.profile.omega0(t);
    let next = theta - (theta * theta + om * om) * cfg.dt + (2.0 * cfg.epsilon * cfg.dt).sqrt() * deviate;
    if next > cfg.theta_cut {
        StepOutcome {
            theta: 2.0 * cfg.theta_cut - next,
            reinjected: false,
        }
    } else if next < -cfg.theta_cut {
        StepOutcome {
            theta: cfg.theta_cut,
            reinjected: true,
        }
    } else {
        StepOutcome {
            theta: next,
            reinjected: false,
        }
    }
}

/// Deterministic time spent outside `[-cut, cut]` at frequency `omega`.
pub fn excursion_time(cut: f64, omega: f64) -> f64 {
    (PI - 2.0 * (cut / omega).atan()) / omega
}

/// θ a time `s` after leaving through `-cut`, on the deterministic sweep.
pub fn excursion_theta(cut: f64, omega: f64, s: f64) -> f64 {
    -omega * ((cut / omega).atan() + omega * s).tan()
}

/// Complex trajectory state carried along a path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XiState {
    pub xi: Complex64,
    pub xi_dot: Complex64,
    /// `∫_{t0}^t dt'/|ξ|²`.
    pub tau: f64,
    /// Continuous `arg ξ`.
    pub phase: f64,
}

impl XiState {
    /// `ξ = e^{iΩ t0}`, `ξ̇ = iΩ ξ`.
    pub fn initial(omega_in: f64, t0: f64) -> Self {
        let xi = Complex64::from_polar(1.0, omega_in * t0);
        Self {
            xi,
            xi_dot: Complex64::i() * omega_in * xi,
            tau: 0.0,
            phase: omega_in * t0,
        }
    }

    /// Exact free evolution under `Ω₀` on `[ta, tb]`; split at a step jump.
    fn rotate(&mut self, profile: &BarrierProfile<f64>, ta: f64, tb: f64) {
        if let Some(ts) = profile.discontinuity() {
            if ta < ts && ts < tb {
                self.rotate(profile, ta, ts);
                self.rotate(profile, ts, tb);
                return;
            }
        }
        let om = profile.omega0(0.5 * (ta + tb));
        let h = tb - ta;
        let (s, c) = (om * h).sin_cos();
        let xi = self.xi * c + self.xi_dot * (s / om);
        let xi_dot = -self.xi * (om * s) + self.xi_dot * c;
        self.advance_clock(xi, xi_dot, h);
    }

    fn kick(&mut self, dw: f64) {
        self.xi_dot += self.xi * dw;
    }

    fn advance_clock(&mut self, xi: Complex64, xi_dot: Complex64, h: f64) {
        let before = self.xi;
        self.tau += 0.5 * h * (1.0 / before.norm_sqr() + 1.0 / xi.norm_sqr());
        self.phase += (xi * before.conj()).arg();
        self.xi = xi;
        self.xi_dot = xi_dot;
    }

    /// Strang step: half rotation, noise kick, half rotation.
    fn strang(&mut self, profile: &BarrierProfile<f64>, t: f64, h: f64, dw: f64) {
        let mid = t + 0.5 * h;
        self.rotate(profile, t, mid);
        self.kick(dw);
        self.rotate(profile, mid, t + h);
    }

    /// `Im(ξ̄ ξ̇)`, conserved and equal to `Ω_in`.
    pub fn wronskian(&self) -> f64 {
        (self.xi.conj() * self.xi_dot).im
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reinjection {
    /// Time of the crossing of `-θ_cut`.
    pub exit: f64,
    /// Time of the re-entry at `+θ_cut`.
    pub reentry: f64,
}

/// A stored realization.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaPath {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub reinjections: Vec<Reinjection>,
    /// Running `∫θ dt` at each stored sample.
    pub int_theta: Vec<f64>,
    /// Running `∫exp(-2∫θ) dt` at each stored sample.
    pub int_exp: Vec<f64>,
    pub t_end: f64,
    /// θ at `t_end`; outside `[-θ_cut, θ_cut]` if the path ends mid-excursion.
    pub theta_end: f64,
    pub in_excursion: bool,
    pub int_theta_end: f64,
    pub int_exp_end: f64,
    pub xi_end: Option<XiState>,
}

#[derive(Debug, Clone, Copy)]
struct State {
    t: f64,
    theta: f64,
    int_theta: f64,
    int_exp: f64,
    xi: Option<XiState>,
}

/// Receives the piecewise path produced by [`integrate_path`].
trait Observer {
    /// A regular (sub)step from `a` to `b`.
    fn step(&mut self, a: &State, b: &State);
    /// An excursion `[exit, reentry)`.
    fn excursion(&mut self, exit: &State, reentry: f64);
}

struct Outcome {
    state: State,
    in_excursion: bool,
    exit: Option<(f64, f64)>,
}

fn integrate_path<O: Observer>(cfg: &SdeConfig, index: usize, t0: f64, t1: f64, theta0: f64, obs: &mut O) -> Result<Outcome> {
    cfg.validate()?;
    if !(t1 > t0) {
        return Err(Error::config("sde.t1", "must exceed t0"));
    }
    if (t1 - t0) / cfg.dt > MAX_STEPS {
        return Err(Error::Budget(format!("{:.3e} steps requested", (t1 - t0) / cfg.dt)));
    }
    if !(theta0.abs() <= cfg.theta_cut) {
        return Err(Error::config("sde.theta0", "must lie in [-theta_cut, theta_cut]"));
    }
    let cut = cfg.theta_cut;
    let half_sq = 0.25 * cut * cut;
    let noisy = cfg.epsilon > 0.0;
    let mut stream = cfg.stream(index);
    let mut s = State {
        t: t0,
        theta: theta0,
        int_theta: 0.0,
        int_exp: 0.0,
        xi: cfg.track_xi.then(|| XiState::initial(cfg.profile.omega_in, t0)),
    };
    let mut steps = 0f64;
    while s.t < t1 {
        let mut h = cfg.dt.min(t1 - s.t);
        if s.theta.abs() > 0.5 * cut {
            while h * s.theta * s.theta > cfg.dt * half_sq {
                h *= 0.5;
            }
        }
        steps += 1.0;
        if steps > 4.0 * MAX_STEPS {
            return Err(Error::Budget("sub-step count exceeded".into()));
        }
        let dw = if noisy {
            (2.0 * cfg.epsilon * h).sqrt() * stream.normal()
        } else {
            0.0
        };
        let om = cfg.profile.omega0(s.t);
        let mut next = s.theta - (s.theta * s.theta + om * om) * h + dw;
        if next > cut {
            // Noise overshoot above the re-entry point is reflected.
            next = 2.0 * cut - next;
        }
        if next >= -cut {
            let b = advance(cfg, &s, h, next, dw);
            obs.step(&s, &b);
            s = b;
            continue;
        }
        // Crossing: cut the step at the interpolated exit time.
        let frac = (s.theta + cut) / (s.theta - next);
        let exit = advance(cfg, &s, frac * h, -cut, frac * dw);
        obs.step(&s, &exit);
        let om_exit = cfg.profile.omega0(exit.t);
        let reentry = exit.t + excursion_time(cut, om_exit);
        obs.excursion(&exit, reentry);
        let mut xi = exit.xi;
        let stop = reentry.min(t1);
        if let Some(x) = xi.as_mut() {
            let mut ta = exit.t;
            while ta < stop {
                let tb = (ta + cfg.dt).min(stop);
                x.rotate(&cfg.profile, ta, tb);
                ta = tb;
            }
        }
        if reentry >= t1 {
            let state = State {
                t: t1,
                theta: excursion_theta(cut, om_exit, t1 - exit.t),
                xi,
                ..exit
            };
            return Ok(Outcome {
                state,
                in_excursion: true,
                exit: Some((exit.t, reentry)),
            });
        }
        s = State {
            t: reentry,
            theta: cut,
            xi,
            ..exit
        };
    }
    Ok(Outcome {
        state: s,
        in_excursion: false,
        exit: None,
    })
}

/// State after a regular step of length `h` ending at `theta`.
fn advance(cfg: &SdeConfig, s: &State, h: f64, theta: f64, dw: f64) -> State {
    let int_theta = s.int_theta + 0.5 * h * (s.theta + theta);
    let int_exp = s.int_exp + 0.5 * h * ((-2.0 * s.int_theta).exp() + (-2.0 * int_theta).exp());
    let xi = s.xi.map(|mut x| {
        x.strang(&cfg.profile, s.t, h, dw);
        x
    });
    State {
        t: s.t + h,
        theta,
        int_theta,
        int_exp,
        xi,
    }
}

struct Recorder {
    stride: usize,
    count: usize,
    path: ThetaPath,
}

impl Recorder {
    fn push(&mut self, s: &State) {
        self.path.times.push(s.t);
        self.path.values.push(s.theta);
        self.path.int_theta.push(s.int_theta);
        self.path.int_exp.push(s.int_exp);
    }
}

impl Observer for Recorder {
    fn step(&mut self, _a: &State, b: &State) {
        self.count += 1;
        if self.count % self.stride == 0 {
            self.push(b);
        }
    }

    fn excursion(&mut self, exit: &State, reentry: f64) {
        if self.path.times.last() != Some(&exit.t) {
            self.push(exit);
        }
        self.path.reinjections.push(Reinjection { exit: exit.t, reentry });
        self.count = 0;
    }
}

/// Simulates path `index` of `cfg` on `[t0, t1]` from `theta0`.
pub fn simulate_path(cfg: &SdeConfig, index: usize, t0: f64, t1: f64, theta0: f64) -> Result<ThetaPath> {
    let mut rec = Recorder {
        stride: cfg.record_stride.max(1),
        count: 0,
        path: ThetaPath {
            times: vec![t0],
            values: vec![theta0],
            reinjections: Vec::new(),
            int_theta: vec![0.0],
            int_exp: vec![0.0],
            t_end: t1,
            theta_end: theta0,
            in_excursion: false,
            int_theta_end: 0.0,
            int_exp_end: 0.0,
            xi_end: None,
        },
    };
    let out = integrate_path(cfg, index, t0, t1, theta0, &mut rec)?;
    let mut path = rec.path;
    let s = out.state;
    if !out.in_excursion && path.times.last() != Some(&s.t) {
        path.times.push(s.t);
        path.values.push(s.theta);
        path.int_theta.push(s.int_theta);
        path.int_exp.push(s.int_exp);
    }
    if let Some((exit, reentry)) = out.exit {
        if path.reinjections.last().map(|r| r.exit) != Some(exit) {
            path.reinjections.push(Reinjection { exit, reentry });
        }
    }
    path.t_end = s.t;
    path.theta_end = s.theta;
    path.in_excursion = out.in_excursion;
    path.int_theta_end = s.int_theta;
    path.int_exp_end = s.int_exp;
    path.xi_end = s.xi;
    Ok(path)
}

/// First path of `cfg` (stream 0).
pub fn simulate(cfg: &SdeConfig, t0: f64, t1: f64, theta0: f64) -> Result<ThetaPath> {
    simulate_path(cfg, 0, t0, t1, theta0)
}

/// All `cfg.n_paths` paths, path `i` on stream `i`.
pub fn simulate_ensemble(cfg: &SdeConfig, t0: f64, t1: f64, theta0: f64) -> Result<Vec<ThetaPath>> {
    (0..cfg.n_paths)
        .into_par_iter()
        .map(|i| simulate_path(cfg, i, t0, t1, theta0))
        .collect()
}

/// Uniform histogram bins on `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bins {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Bins {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(hi > lo) || !lo.is_finite() || !hi.is_finite() || n == 0 {
            return Err(Error::config("bins", "need finite lo < hi and n >= 1"));
        }
        Ok(Self { lo, hi, n })
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.n as f64
    }

    pub fn edges(&self) -> Vec<f64> {
        (0..=self.n).map(|i| self.lo + self.width() * i as f64).collect()
    }

    fn index(&self, x: f64) -> Option<usize> {
        if x < self.lo || x >= self.hi || !x.is_finite() {
            return None;
        }
        Some((((x - self.lo) / self.width()) as usize).min(self.n - 1))
    }
}

/// Occupation histogram normalised over all retained samples.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDensity {
    pub bins: Bins,
    pub counts: Vec<u64>,
    /// Samples outside the bins, including those taken mid-excursion.
    pub outside: u64,
    pub total: u64,
}

impl EmpiricalDensity {
    /// Density per unit θ in each bin.
    pub fn density(&self) -> Vec<f64> {
        let norm = self.total as f64 * self.bins.width();
        self.counts.iter().map(|&c| c as f64 / norm).collect()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64 / self.total as f64).collect()
    }

    pub fn outside_fraction(&self) -> f64 {
        self.outside as f64 / self.total as f64
    }

    pub fn centers(&self) -> Vec<f64> {
        let w = self.bins.width();
        (0..self.bins.n).map(|i| self.bins.lo + w * (i as f64 + 0.5)).collect()
    }

    /// `Σ_b |p̂_b - p_b| + |p̂_out - p_out|` against a law given by its bin
    /// masses; `p_out = 1 - Σ_b p_b`.
    pub fn l1_distance(&self, bin_mass: impl Fn(f64, f64) -> Result<f64>) -> Result<f64> {
        let edges = self.bins.edges();
        let mut inside = 0.0;
        let mut l1 = 0.0;
        for (i, p_hat) in self.probabilities().into_iter().enumerate() {
            let p = bin_mass(edges[i], edges[i + 1])?;
            inside += p;
            l1 += (p_hat - p).abs();
        }
        Ok(l1 + (self.outside_fraction() - (1.0 - inside)).abs())
    }

    fn merge(mut self, other: &Self) -> Self {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.outside += other.outside;
        self.total += other.total;
        self
    }
}

/// Samples θ at `start + k·interval`, `k < m`.
struct Sampler {
    start: f64,
    interval: f64,
    next: u64,
    m: u64,
    hist: EmpiricalDensity,
}

impl Sampler {
    fn time(&self, k: u64) -> f64 {
        self.start + self.interval * k as f64
    }

    fn record(&mut self, theta: Option<f64>) {
        match theta.and_then(|x| self.hist.bins.index(x)) {
            Some(i) => self.hist.counts[i] += 1,
            None => self.hist.outside += 1,
        }
        self.hist.total += 1;
        self.next += 1;
    }
}

impl Observer for Sampler {
    fn step(&mut self, a: &State, b: &State) {
        while self.next < self.m {
            let ts = self.time(self.next);
            if ts > b.t {
                break;
            }
            let w = if b.t > a.t { (ts - a.t) / (b.t - a.t) } else { 1.0 };
            self.record(Some(a.theta + w.clamp(0.0, 1.0) * (b.theta - a.theta)));
        }
    }

    fn excursion(&mut self, _exit: &State, reentry: f64) {
        while self.next < self.m && self.time(self.next) < reentry {
            self.record(None);
        }
    }
}

/// Time-sampled occupation histogram over all paths of `cfg`, each started
/// at `θ = 0, t = 0`, discarding `burn_in` and then sampling every
/// `sample_interval` for `sample_window`.
pub fn ensemble_histogram(
    cfg: &SdeConfig,
    burn_in: f64,
    sample_window: f64,
    sample_interval: f64,
    bins: Bins,
) -> Result<EmpiricalDensity> {
    cfg.validate()?;
    let relax = PI / cfg.profile.omega_final();
    if burn_in < 5.0 * relax {
        return Err(Error::config(
            "histogram.burn_in",
            format!("must be >= 5 relaxation times ({:.4})", 5.0 * relax),
        ));
    }
    if !(sample_interval > 0.0) || !(sample_window > 0.0) {
        return Err(Error::config("histogram.sample_interval", "window and interval must be > 0"));
    }
    let m = (sample_window / sample_interval).floor() as u64;
    if m == 0 {
        return Err(Error::Sampling("sample window shorter than one interval".into()));
    }
    let empty = EmpiricalDensity {
        bins,
        counts: vec![0; bins.n],
        outside: 0,
        total: 0,
    };
    let t1 = burn_in + sample_interval * m as f64;
    let parts: Vec<EmpiricalDensity> = (0..cfg.n_paths)
        .into_par_iter()
        .map(|i| {
            let mut s = Sampler {
                start: burn_in + sample_interval,
                interval: sample_interval,
                next: 0,
                m,
                hist: empty.clone(),
            };
            integrate_path(cfg, i, 0.0, t1, 0.0, &mut s)?;
            // Samples left after a final excursion are outside.
            while s.next < s.m {
                s.record(None);
            }
            Ok(s.hist)
        })
        .collect::<Result<_>>()?;
    let hist = parts.iter().fold(empty, |acc, h| acc.merge(h));
    if hist.total == 0 {
        return Err(Error::Sampling("no samples retained".into()));
    }
    Ok(hist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelParams;
    use crate::stationary::{build_stationary, GridSpec};
    use proptest::prelude::*;

    fn constant(omega: f64, eps: f64, dt: f64) -> SdeConfig {
        SdeConfig::new(BarrierProfile::constant(omega), eps, dt).unwrap()
    }

    #[test]
    fn pure_drift_step() {
        let cfg = constant(1.0, 0.0, 1e-3);
        let out = step(0.0, 0.0, &cfg, 0.0);
        assert_eq!(out.theta, -1e-3);
        assert!(!out.reinjected);
        let low = step(-cfg.theta_cut + 1e-6, 0.0, &cfg, 0.0);
        assert!(low.reinjected);
        assert_eq!(low.theta, cfg.theta_cut);
    }

    #[test]
    fn stability_bound_enforced() {
        let err = SdeConfig::new(BarrierProfile::constant(1.0), 1.0, 1e-3).unwrap_err();
        assert!(err.is_configuration());
        assert!(constant(1.0, 1.0, 2.5e-4).validate().is_ok());
    }

    #[test]
    fn riccati_trajectory() {
        let cfg = constant(1.0, 0.0, 1e-6).with_record_stride(100);
        let path = simulate(&cfg, 0.0, 1.46, 0.0).unwrap();
        let worst = path
            .times
            .iter()
            .zip(&path.values)
            .map(|(&t, &y)| (y + t.tan()).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-3, "{worst}");
        assert!(path.reinjections.is_empty());
    }

    #[test]
    fn excursion_closed_form() {
        let (cut, om) = (10.0, 1.3);
        let tex = excursion_time(cut, om);
        assert!((excursion_theta(cut, om, 0.0) + cut).abs() < 1e-12);
        assert!((excursion_theta(cut, om, tex) - cut).abs() < 1e-9);
        // Full Riccati period is π/Ω.
        let inside = 2.0 * (cut / om).atan() / om;
        assert!((inside + tex - PI / om).abs() < 1e-14);
    }

    #[test]
    fn deterministic_period() {
        let cfg = constant(1.0, 0.0, 1e-4);
        let path = simulate(&cfg, 0.0, 10.0 * PI + 0.1, 0.0).unwrap();
        assert_eq!(path.reinjections.len(), 10);
        for w in path.reinjections.windows(2) {
            assert!((w[1].exit - w[0].exit - PI).abs() < 2.0 * cfg.dt);
        }
    }

    #[test]
    fn replay_is_bitwise() {
        let cfg = constant(1.0, 1.0, 2e-4).with_seed(5);
        let a = simulate(&cfg, 0.0, 3.0, 0.0).unwrap();
        let b = simulate(&cfg, 0.0, 3.0, 0.0).unwrap();
        assert_eq!(a, b);
        let c = simulate(&cfg.clone().with_seed(6), 0.0, 3.0, 0.0).unwrap();
        assert_ne!(a.values, c.values);
    }

    #[test]
    fn stored_samples_within_cut_and_paired() {
        let cfg = constant(1.0, 1.0, 2e-4).with_seed(3);
        let path = simulate(&cfg, 0.0, 40.0, 0.0).unwrap();
        assert!(path.values.iter().all(|v| v.abs() <= cfg.theta_cut));
        assert!(!path.reinjections.is_empty());
        for r in &path.reinjections {
            assert!(r.reentry > r.exit);
        }
        assert!(path.int_exp.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn xi_wronskian_conserved_under_noise() {
        let cfg = constant(1.0, 0.5, 2e-4).with_seed(11).with_xi(true);
        let path = simulate(&cfg, -2.0, 6.0, 0.0).unwrap();
        let x = path.xi_end.unwrap();
        assert!((x.wronskian() - 1.0).abs() < 1e-10, "{}", x.wronskian());
        assert!(x.tau > 0.0);
    }

    #[test]
    fn xi_free_rotation_is_exact() {
        let cfg = constant(2.0, 0.0, 2e-4).with_xi(true);
        let path = simulate(&cfg, -1.0, 2.0, 0.0).unwrap();
        let x = path.xi_end.unwrap();
        let exact = Complex64::from_polar(1.0, 2.0 * 2.0);
        assert!((x.xi - exact).norm() < 1e-10);
        assert!((x.tau - 3.0).abs() < 1e-10);
        assert!((x.phase - 4.0).abs() < 1e-10);
    }

    #[test]
    fn histogram_matches_stationary_law() {
        let cfg = constant(1.0, 1.0, 2.5e-4).with_paths(8).with_seed(1);
        let bins = Bins::new(-8.0, 8.0, 32).unwrap();
        let hist = ensemble_histogram(&cfg, 16.0, 400.0, 0.25, bins).unwrap();
        let p = ModelParams::new(1.0, 1.0, 1.0, 1.0).unwrap();
        let q = build_stationary(&p, GridSpec::default()).unwrap();
        let l1 = hist.l1_distance(|a, b| q.mass_between(a, b)).unwrap();
        assert!(l1 < 0.06, "{l1}");
        assert_eq!(hist.total, 8 * 1600);
    }

    #[test]
    fn short_burn_in_rejected() {
        let cfg = constant(1.0, 1.0, 2.5e-4);
        let bins = Bins::new(-1.0, 1.0, 4).unwrap();
        assert!(ensemble_histogram(&cfg, 1.0, 10.0, 0.1, bins).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn int_exp_non_decreasing(seed in any::<u64>(), eps in 0.0f64..2.0) {
            let cfg = constant(1.0, eps, 1e-4).with_seed(seed);
            let path = simulate(&cfg, 0.0, 5.0, 0.0).unwrap();
            prop_assert!(path.int_exp.windows(2).all(|w| w[1] >= w[0]));
            prop_assert!(path.values.iter().all(|v| v.abs() <= cfg.theta_cut));
        }

        #[test]
        fn deterministic_step_is_drift(frac in -0.9f64..0.9, om in 0.1f64..3.0) {
            let cfg = constant(om, 0.0, 1e-4);
            let theta = frac * cfg.theta_cut;
            let out = step(theta, 0.0, &cfg, 0.7);
            prop_assert!((out.theta - (theta - (theta * theta + om * om) * 1e-4)).abs() < 1e-15);
        }
    }
}
