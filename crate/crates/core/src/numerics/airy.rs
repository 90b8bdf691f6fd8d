//! Airy functions Ai, Bi and their derivatives for real argument.
//!
//! Regions:
//!
//! * `|x| <= 2`: Maclaurin series.
//! * `2 < x < 12`: Bi from the Maclaurin series (all terms positive there),
//!   Ai by Taylor continuation of `y'' = x y` backwards from `x = 12`,
//!   where Ai is the dominant solution.
//! * `-10 < x < -2`: Taylor continuation forwards from `x = -2`.
//! * `x >= 12`, `x <= -10`: asymptotic expansions.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Ai(0).
const AI0: f64 = 0.355_028_053_887_817_239_3;
/// -Ai'(0).
const AIP0: f64 = 0.258_819_403_792_806_798_4;

const SERIES_LIMIT: f64 = 2.0;
const POS_ASYMPTOTIC: f64 = 12.0;
const NEG_ASYMPTOTIC: f64 = -10.0;
const MAX_STEP: f64 = 0.5;
const DOMAIN_LIMIT: f64 = 1.0e4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AiryValues<T> {
    pub ai: T,
    pub bi: T,
    pub ai_prime: T,
    pub bi_prime: T,
}

impl<T: Real> AiryValues<T> {
    /// `Ai Bi' - Ai' Bi`, equal to `1/pi`.
    pub fn wronskian(&self) -> T {
        self.ai * self.bi_prime - self.ai_prime * self.bi
    }

    /// Modulus squared `Ai^2 + Bi^2`.
    pub fn modulus_sq(&self) -> T {
        self.ai * self.ai + self.bi * self.bi
    }
}

/// Evaluates Ai, Bi, Ai', Bi' at `x`.
pub fn airy<T: Real>(x: T) -> Result<AiryValues<T>> {
    if !x.is_finite() || x.abs() > T::lit(DOMAIN_LIMIT) {
        return Err(Error::Domain(format!(
            "airy argument {} outside [-1e4, 1e4]",
            x.as_f64()
        )));
    }
    let two = T::lit(SERIES_LIMIT);
    let v = if x.abs() <= two {
        maclaurin(x)
    } else if x > two {
        if x >= T::lit(POS_ASYMPTOTIC) {
            asymptotic_positive(x)
        } else {
            let series = maclaurin(x);
            let anchor = T::lit(POS_ASYMPTOTIC);
            let a = asymptotic_positive(anchor);
            let (ai, ai_prime) = continue_solution(anchor, a.ai, a.ai_prime, x);
            AiryValues {
                ai,
                ai_prime,
                bi: series.bi,
                bi_prime: series.bi_prime,
            }
        }
    } else if x <= T::lit(NEG_ASYMPTOTIC) {
        asymptotic_negative(x)
    } else {
        let start = -two;
        let s = maclaurin(start);
        let (ai, ai_prime) = continue_solution(start, s.ai, s.ai_prime, x);
        let (bi, bi_prime) = continue_solution(start, s.bi, s.bi_prime, x);
        AiryValues {
            ai,
            bi,
            ai_prime,
            bi_prime,
        }
    };
    Ok(v)
}

/// Power series about the origin: `Ai = c1 f - c2 g`, `Bi = sqrt3 (c1 f + c2 g)`.
fn maclaurin<T: Real>(x: T) -> AiryValues<T> {
    let x3 = x * x * x;
    let eps = T::epsilon() * T::lit(0.25);
    let (mut f, mut fp, mut g, mut gp) = (T::one(), T::zero(), x, T::one());
    let mut tf = T::one();
    let mut tfp = x * x * T::lit(0.5);
    let mut tg = x;
    let mut tgp = T::one();
    fp = fp + tfp;
    let mut k = 1usize;
    loop {
        let kk = T::from_usize(k).unwrap();
        let three = T::lit(3.0);
        tf = tf * x3 / ((three * kk - T::one()) * (three * kk));
        tg = tg * x3 / ((three * kk) * (three * kk + T::one()));
        tgp = tgp * x3 / ((three * kk) * (three * kk - T::lit(2.0)));
        f = f + tf;
        g = g + tg;
        gp = gp + tgp;
        let tfp_next = tfp * x3 / ((three * kk) * (three * kk + T::lit(2.0)));
        fp = fp + tfp_next;
        tfp = tfp_next;
        let small = |t: T, s: T| t.abs() <= eps * s.abs();
        if (small(tf, f) && small(tg, g) && small(tgp, gp) && small(tfp, fp)) || k > 400 {
            break;
        }
        k += 1;
    }
    let c1 = T::lit(AI0);
    let c2 = T::lit(AIP0);
    let sqrt3 = T::lit(3.0).sqrt();
    AiryValues {
        ai: c1 * f - c2 * g,
        bi: sqrt3 * (c1 * f + c2 * g),
        ai_prime: c1 * fp - c2 * gp,
        bi_prime: sqrt3 * (c1 * fp + c2 * gp),
    }
}

/// Carries a solution of `y'' = x y` from `x0` to `x1` by local Taylor series.
fn continue_solution<T: Real>(x0: T, y0: T, dy0: T, x1: T) -> (T, T) {
    let span = x1 - x0;
    let n = (span.abs() / T::lit(MAX_STEP)).ceil().to_usize().unwrap_or(1).max(1);
    let h = span / T::from_usize(n).unwrap();
    let (mut x, mut y, mut dy) = (x0, y0, dy0);
    for _ in 0..n {
        let (ny, ndy) = taylor_step(x, y, dy, h);
        x = x + h;
        y = ny;
        dy = ndy;
    }
    (y, dy)
}

/// One Taylor step; coefficients obey `(k+2)(k+1) a_{k+2} = x0 a_k + a_{k-1}`.
fn taylor_step<T: Real>(x0: T, y0: T, dy0: T, h: T) -> (T, T) {
    let eps = T::epsilon() * T::lit(0.1);
    let mut a_km1 = y0; // a_{k-1}
    let mut a_k = dy0; // a_k
    let mut a_kp1 = x0 * y0 * T::lit(0.5); // a_{k+1}
    let mut y = y0 + dy0 * h + a_kp1 * h * h;
    let mut dy = dy0 + T::lit(2.0) * a_kp1 * h;
    let mut hp = h * h; // h^(k+1)
    let mut k = 1usize;
    loop {
        // a_{k+2} from a_k and a_{k-1}
        let kk = T::from_usize(k).unwrap();
        let a_kp2 = (x0 * a_k + a_km1) / ((kk + T::lit(2.0)) * (kk + T::one()));
        let dterm = (kk + T::lit(2.0)) * a_kp2 * hp;
        hp = hp * h;
        let term = a_kp2 * hp;
        y = y + term;
        dy = dy + dterm;
        a_km1 = a_k;
        a_k = a_kp1;
        a_kp1 = a_kp2;
        if (term.abs() <= eps * y.abs() && dterm.abs() <= eps * dy.abs() && k > 3) || k > 200 {
            break;
        }
        k += 1;
    }
    (y, dy)
}

/// `u_k` and `v_k` coefficients of the large-argument expansions.
fn uv_coefficients<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    let mut u = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    u.push(T::one());
    v.push(T::one());
    for k in 1..n {
        let kk = T::from_usize(k).unwrap();
        let six = T::lit(6.0);
        let num = (six * kk - T::lit(5.0)) * (six * kk - T::lit(3.0)) * (six * kk - T::one());
        let den = (T::lit(2.0) * kk - T::one()) * T::lit(216.0) * kk;
        let uk = u[k - 1] * num / den;
        u.push(uk);
        v.push(-(six * kk + T::one()) / (six * kk - T::one()) * uk);
    }
    (u, v)
}

/// Sums `sum c_k s^k z^-k` up to the smallest term (optimal truncation).
fn truncated_sum<T: Real>(c: &[T], zeta: T, alternate: bool) -> T {
    let mut acc = T::zero();
    let mut zp = T::one();
    let mut last = T::infinity();
    for (k, ck) in c.iter().enumerate() {
        let mut t = *ck / zp;
        if alternate && k % 2 == 1 {
            t = -t;
        }
        if t.abs() > last {
            break;
        }
        acc = acc + t;
        last = t.abs();
        if last <= T::epsilon() * T::lit(1e-3) * acc.abs() {
            break;
        }
        zp = zp * zeta;
    }
    acc
}

fn asymptotic_positive<T: Real>(x: T) -> AiryValues<T> {
    let zeta = T::lit(2.0 / 3.0) * x * x.sqrt();
    let (u, v) = uv_coefficients::<T>(80);
    let q = x.sqrt().sqrt();
    let rpi = T::PI().sqrt();
    let decay = (-zeta).exp();
    let grow = zeta.exp();
    let su_alt = truncated_sum(&u, zeta, true);
    let sv_alt = truncated_sum(&v, zeta, true);
    let su = truncated_sum(&u, zeta, false);
    let sv = truncated_sum(&v, zeta, false);
    AiryValues {
        ai: decay / (T::lit(2.0) * rpi * q) * su_alt,
        ai_prime: -q * decay / (T::lit(2.0) * rpi) * sv_alt,
        bi: grow / (rpi * q) * su,
        bi_prime: q * grow / rpi * sv,
    }
}

fn asymptotic_negative<T: Real>(x: T) -> AiryValues<T> {
    let z = -x;
    let zeta = T::lit(2.0 / 3.0) * z * z.sqrt();
    let (u, v) = uv_coefficients::<T>(80);
    // Even and odd subsequences with alternating signs.
    let split = |c: &[T]| -> (T, T) {
        let mut even = T::zero();
        let mut odd = T::zero();
        let mut zp = T::one();
        let mut last = T::infinity();
        for (k, ck) in c.iter().enumerate() {
            let t = *ck / zp;
            if t.abs() > last {
                break;
            }
            last = t.abs();
            let sign = if (k / 2) % 2 == 0 { T::one() } else { -T::one() };
            if k % 2 == 0 {
                even = even + sign * t;
            } else {
                odd = odd + sign * t;
            }
            if last <= T::epsilon() * T::lit(1e-3) {
                break;
            }
            zp = zp * zeta;
        }
        (even, odd)
    };
    let (ue, uo) = split(&u);
    let (ve, vo) = split(&v);
    let phase = zeta - T::FRAC_PI_4();
    let (s, c) = phase.sin_cos();
    let q = z.sqrt().sqrt();
    let rpi = T::PI().sqrt();
    AiryValues {
        ai: (c * ue + s * uo) / (rpi * q),
        bi: (-s * ue + c * uo) / (rpi * q),
        ai_prime: q / rpi * (s * ve - c * vo),
        bi_prime: q / rpi * (c * ve + s * vo),
    }
}
