use num_traits::Num;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Highest supported order.
pub const MAX_ORDER: usize = 64;

/// Physicists' Hermite polynomial `H_n(x)` by the three-term recurrence
/// `H_{k+1} = 2x H_k - 2k H_{k-1}`.
///
/// Works over any numeric ring, so exact rational evaluation is possible.
pub fn hermite<T: Num + Clone>(n: usize, x: T) -> Result<T> {
    if n > MAX_ORDER {
        return Err(Error::UnsupportedOrder {
            order: n,
            max: MAX_ORDER,
        });
    }
    let two = T::one() + T::one();
    let mut prev = T::one();
    if n == 0 {
        return Ok(prev);
    }
    let mut cur = two.clone() * x.clone();
    let mut k = T::one();
    for _ in 1..n {
        let next = two.clone() * x.clone() * cur.clone() - two.clone() * k.clone() * prev;
        prev = cur;
        cur = next;
        k = k + T::one();
    }
    Ok(cur)
}

/// Normalised Hermite function `π^{-1/4} (2^n n!)^{-1/2} H_n(y) e^{-y²/2}`.
///
/// Evaluated by its own recurrence, which stays finite where `H_n` alone
/// would overflow.
pub fn hermite_function<T: Real>(n: usize, y: T) -> Result<T> {
    if n > MAX_ORDER {
        return Err(Error::UnsupportedOrder {
            order: n,
            max: MAX_ORDER,
        });
    }
    let two = T::lit(2.0);
    let mut prev = T::PI().powf(T::lit(-0.25)) * (-y * y / two).exp();
    if n == 0 {
        return Ok(prev);
    }
    let mut cur = two.sqrt() * y * prev;
    for k in 1..n {
        let kf = T::from_usize(k).unwrap();
        let next = (two / (kf + T::one())).sqrt() * y * cur - (kf / (kf + T::one())).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;
    use proptest::prelude::*;

    #[test]
    fn small_orders() {
        assert_eq!(hermite(0, 3.7).unwrap(), 1.0);
        assert_eq!(hermite(2, 1.0).unwrap(), 2.0);
        assert_eq!(hermite(5, 0.5).unwrap(), 41.0);
    }

    #[test]
    fn exact_rational_against_explicit_polynomials() {
        let explicit = |n: usize, x: Ratio<i64>| -> Ratio<i64> {
            let c = |v: i64| Ratio::from_integer(v);
            match n {
                0 => c(1),
                1 => c(2) * x,
                2 => c(4) * x * x - c(2),
                3 => c(8) * x * x * x - c(12) * x,
                4 => c(16) * x * x * x * x - c(48) * x * x + c(12),
                _ => unreachable!(),
            }
        };
        for n in 0..=4 {
            for xi in -4..=4 {
                for d in 1..=3 {
                    let x = Ratio::new(xi, d);
                    assert_eq!(hermite(n, x).unwrap(), explicit(n, x), "n={n} x={x}");
                }
            }
        }
    }

    #[test]
    fn order_limit() {
        assert!(hermite(64, 0.1).is_ok());
        assert_eq!(
            hermite(65, 0.1),
            Err(Error::UnsupportedOrder { order: 65, max: 64 })
        );
    }

    #[test]
    fn hermite_function_matches_polynomial() {
        let mut fact = 1.0f64;
        for n in 0..=20usize {
            if n > 0 {
                fact *= n as f64;
            }
            for &y in &[-2.5, -0.3, 0.0, 1.1, 3.0] {
                let direct = hermite(n, y).unwrap() * (-y * y / 2.0f64).exp()
                    / (std::f64::consts::PI.sqrt() * 2f64.powi(n as i32) * fact).sqrt();
                let rec: f64 = hermite_function(n, y).unwrap();
                assert!((direct - rec).abs() < 1e-12 * direct.abs().max(1e-3), "n={n} y={y}");
            }
        }
    }

    #[test]
    fn hermite_functions_orthonormal() {
        let gh = crate::numerics::GaussHermite::<f64>::new(60).unwrap();
        for m in 0..6 {
            for n in 0..6 {
                let v = gh.integrate(|y| {
                    hermite_function(m, y).unwrap() * hermite_function(n, y).unwrap() * (y * y).exp()
                });
                let e = if m == n { 1.0 } else { 0.0 };
                assert!((v - e).abs() < 1e-12, "{m},{n}: {v}");
            }
        }
    }

    proptest! {
        #[test]
        fn parity(n in 0usize..30, x in -3.0f64..3.0) {
            let a = hermite(n, x).unwrap();
            let b = hermite(n, -x).unwrap();
            let s = if n % 2 == 0 { 1.0 } else { -1.0 };
            prop_assert!((a - s * b).abs() <= 1e-12 * a.abs().max(1.0));
        }

        #[test]
        fn derivative_identity(n in 1usize..20, x in -2.0f64..2.0) {
            // H_n' = 2n H_{n-1}, checked by central difference.
            let h = 1e-5;
            let d = (hermite(n, x + h).unwrap() - hermite(n, x - h).unwrap()) / (2.0 * h);
            let e = 2.0 * n as f64 * hermite(n - 1, x).unwrap();
            prop_assert!((d - e).abs() <= 1e-5 * e.abs().max(1.0));
        }
    }
}
