//! Globally adaptive Gauss-Kronrod (7/15) quadrature.
//!
//! Infinite ranges are mapped onto finite ones:
//! `[a, inf)` by `x = a + t/(1-t)`, `(-inf, b]` by `x = b - t/(1-t)` and
//! `(-inf, inf)` by `x = t/(1-t^2)`. The open rule never samples the mapped
//! endpoints. For `z^{-1/2}` endpoint singularities use
//! [`integrate_sqrt_endpoint`], which substitutes `z = a + u^2`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::scalar::Real;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Tolerances and budget for the adaptive integrator.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_intervals: usize,
}

impl<T: Real> Default for Quadrature<T> {
    fn default() -> Self {
        Self {
            abs_tol: T::lit(1e-10),
            rel_tol: T::lit(1e-10),
            max_intervals: 2000,
        }
    }
}

impl<T: Real> Quadrature<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn abs_tol(mut self, tol: T) -> Self {
        self.abs_tol = tol;
        self
    }

    pub fn rel_tol(mut self, tol: T) -> Self {
        self.rel_tol = tol;
        self
    }

    pub fn max_intervals(mut self, n: usize) -> Self {
        self.max_intervals = n;
        self
    }

    /// Integrates `f` over `[a, b]`; either bound may be infinite.
    pub fn integrate<F>(&self, f: F, a: T, b: T) -> Result<(T, T)>
    where
        F: Fn(T) -> T,
    {
        if a.is_nan() || b.is_nan() {
            return Err(Error::Domain("NaN integration bound".into()));
        }
        if a == b {
            return Ok((T::zero(), T::zero()));
        }
        if a > b {
            let (v, e) = self.integrate(f, b, a)?;
            return Ok((-v, e));
        }
        let one = T::one();
        match (a.is_infinite(), b.is_infinite()) {
            (false, false) => self.adaptive(&f, a, b),
            (false, true) => self.adaptive(
                &|t: T| {
                    let s = one - t;
                    guard(f(a + t / s) / (s * s))
                },
                T::zero(),
                one,
            ),
            (true, false) => self.adaptive(
                &|t: T| {
                    let s = one - t;
                    guard(f(b - t / s) / (s * s))
                },
                T::zero(),
                one,
            ),
            (true, true) => self.adaptive(
                &|t: T| {
                    let s = one - t * t;
                    guard(f(t / s) * (one + t * t) / (s * s))
                },
                -one,
                one,
            ),
        }
    }

    fn adaptive<F>(&self, f: &F, a: T, b: T) -> Result<(T, T)>
    where
        F: Fn(T) -> T,
    {
        let first = kronrod(f, a, b);
        let mut total = first.value;
        let mut total_err = first.error;
        let mut heap = BinaryHeap::new();
        heap.push(first);
        let min_width = T::epsilon() * T::lit(64.0);
        loop {
            let target = self.abs_tol.max(self.rel_tol * total.abs());
            if total_err <= target {
                return Ok((total, total_err));
            }
            if heap.len() >= self.max_intervals {
                break;
            }
            let worst = match heap.pop() {
                Some(w) => w,
                None => break,
            };
            let mid = (worst.a + worst.b) * T::lit(0.5);
            if (worst.b - worst.a) <= min_width * (worst.a.abs() + worst.b.abs()).max(T::one()) {
                // Cannot resolve further; keep the interval and stop.
                heap.push(worst);
                break;
            }
            let left = kronrod(f, worst.a, mid);
            let right = kronrod(f, mid, worst.b);
            total = total - worst.value + left.value + right.value;
            total_err = total_err - worst.error + left.error + right.error;
            heap.push(left);
            heap.push(right);
            // Resum periodically to avoid drift in the running totals.
            if heap.len() % 64 == 0 {
                total = heap.iter().fold(T::zero(), |s, i| s + i.value);
                total_err = heap.iter().fold(T::zero(), |s, i| s + i.error);
            }
        }
        total = heap.iter().fold(T::zero(), |s, i| s + i.value);
        total_err = heap.iter().fold(T::zero(), |s, i| s + i.error);
        let target = self.abs_tol.max(self.rel_tol * total.abs());
        if total_err <= target {
            Ok((total, total_err))
        } else {
            Err(Error::Accuracy {
                estimate: total.as_f64(),
                error: total_err.as_f64(),
            })
        }
    }
}

#[inline]
fn guard<T: Real>(v: T) -> T {
    if v.is_finite() {
        v
    } else {
        T::zero()
    }
}

struct Interval<T> {
    a: T,
    b: T,
    value: T,
    error: T,
}

impl<T: Real> PartialEq for Interval<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T: Real> Eq for Interval<T> {}
impl<T: Real> PartialOrd for Interval<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Real> Ord for Interval<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .partial_cmp(&other.error)
            .unwrap_or(Ordering::Equal)
    }
}

fn kronrod<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T) -> Interval<T> {
    let half = (b - a) * T::lit(0.5);
    let center = (a + b) * T::lit(0.5);
    let fc = f(center);
    let mut resk = fc * T::lit(WGK[7]);
    let mut resg = fc * T::lit(WG[3]);
    let mut resabs = resk.abs();
    let mut fv1 = [T::zero(); 7];
    let mut fv2 = [T::zero(); 7];
    for j in 0..7 {
        let dx = half * T::lit(XGK[j]);
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        let w = T::lit(WGK[j]);
        resk = resk + w * (f1 + f2);
        resabs = resabs + w * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg = resg + T::lit(WG[j / 2]) * (f1 + f2);
        }
    }
    let mean = resk * T::lit(0.5);
    let mut resasc = T::lit(WGK[7]) * (fc - mean).abs();
    for j in 0..7 {
        resasc = resasc + T::lit(WGK[j]) * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = resk * half;
    let resabs = resabs * half.abs();
    let resasc = resasc * half.abs();
    let mut error = ((resk - resg) * half).abs();
    if resasc != T::zero() && error != T::zero() {
        let scale = (T::lit(200.0) * error / resasc).powf(T::lit(1.5));
        error = resasc * scale.min(T::one());
    }
    let round = T::lit(50.0) * T::epsilon() * resabs;
    if resabs > T::min_positive_value() / (T::lit(50.0) * T::epsilon()) {
        error = error.max(round);
    }
    Interval {
        a,
        b,
        value,
        error,
    }
}

/// `∫_a^b f`, converged when `err <= tol * max(1, |value|)`.
pub fn integrate<T, F>(f: F, a: T, b: T, tol: T) -> Result<(T, T)>
where
    T: Real,
    F: Fn(T) -> T,
{
    if !(tol > T::zero()) {
        return Err(Error::Domain("tolerance must be positive".into()));
    }
    Quadrature::new().abs_tol(tol).rel_tol(tol).integrate(f, a, b)
}

/// `∫_a^b (z-a)^{-1/2} g(z) dz` via `z = a + u^2`, which leaves the smooth
/// integrand `2 g(a + u^2)`. `b` may be infinite.
pub fn integrate_sqrt_endpoint<T, F>(quad: &Quadrature<T>, g: F, a: T, b: T) -> Result<(T, T)>
where
    T: Real,
    F: Fn(T) -> T,
{
    let two = T::lit(2.0);
    let upper = if b.is_infinite() { b } else { (b - a).sqrt() };
    quad.integrate(|u: T| two * g(a + u * u), T::zero(), upper)
}
