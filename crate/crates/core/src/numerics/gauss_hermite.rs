use crate::error::{Error, Result};
use crate::scalar::Real;

/// Gauss-Hermite rule for `∫ e^{-y^2} f(y) dy`.
#[derive(Debug, Clone)]
pub struct GaussHermite<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> GaussHermite<T> {
    /// Nodes by Newton iteration on the orthonormal recurrence.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > 200 {
            return Err(Error::UnsupportedOrder { order: n, max: 200 });
        }
        let nf = T::from_usize(n).unwrap();
        let pim4 = T::PI().powf(T::lit(-0.25));
        let two = T::lit(2.0);
        let mut nodes = vec![T::zero(); n];
        let mut weights = vec![T::zero(); n];
        let m = (n + 1) / 2;
        let mut z = T::zero();
        for i in 0..m {
            z = match i {
                0 => (two * nf + T::one()).sqrt() - T::lit(1.85575) * (two * nf + T::one()).powf(T::lit(-1.0 / 6.0)),
                1 => z - T::lit(1.14) * nf.powf(T::lit(0.426)) / z,
                2 => T::lit(1.86) * z - T::lit(0.86) * nodes[0],
                3 => T::lit(1.91) * z - T::lit(0.91) * nodes[1],
                _ => two * z - nodes[i - 2],
            };
            let mut pp = T::zero();
            let mut converged = false;
            for _ in 0..100 {
                let mut p1 = pim4;
                let mut p2 = T::zero();
                for j in 0..n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = T::from_usize(j).unwrap();
                    p1 = z * (two / (jf + T::one())).sqrt() * p2 - (jf / (jf + T::one())).sqrt() * p3;
                }
                pp = (two * nf).sqrt() * p2;
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() <= T::epsilon() * T::lit(4.0) * z.abs().max(T::one()) {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(Error::Accuracy {
                    estimate: z.as_f64(),
                    error: f64::NAN,
                });
            }
            nodes[i] = z;
            nodes[n - 1 - i] = -z;
            weights[i] = two / (pp * pp);
            weights[n - 1 - i] = weights[i];
        }
        // Ascending order.
        nodes.reverse();
        weights.reverse();
        Ok(Self { nodes, weights })
    }

    /// `Σ w_i f(y_i) ≈ ∫ e^{-y^2} f(y) dy`.
    pub fn integrate<F: Fn(T) -> T>(&self, f: F) -> T {
        self.nodes
            .iter()
            .zip(&self.weights)
            .fold(T::zero(), |s, (&y, &w)| s + w * f(y))
    }

    /// Nodes and weights for `∫ g(x) dx` where `g ~ e^{-x^2/s^2}`: `x = s y`,
    /// weight `s w e^{y^2}`.
    pub fn scaled(&self, s: T) -> impl Iterator<Item = (T, T)> + '_ {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&y, &w)| (s * y, s * w * (y * y).exp()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn moments() {
        let gh = GaussHermite::<f64>::new(20).unwrap();
        assert!((gh.integrate(|_| 1.0) - PI.sqrt()).abs() < 1e-13);
        assert!((gh.integrate(|y| y * y) - PI.sqrt() / 2.0).abs() < 1e-13);
        assert!((gh.integrate(|y| y.powi(4)) - 0.75 * PI.sqrt()).abs() < 1e-12);
        assert!(gh.integrate(|y| y.powi(3)).abs() < 1e-13);
    }

    #[test]
    fn scaled_gaussian() {
        let gh = GaussHermite::<f64>::new(40).unwrap();
        let s = 0.37;
        let v: f64 = gh.scaled(s).map(|(x, w)| w * (-x * x / (s * s)).exp() * (1.0 + x * x)).sum();
        let exact = s * PI.sqrt() * (1.0 + s * s / 2.0);
        assert!((v - exact).abs() < 1e-12);
    }

    #[test]
    fn nodes_sorted_and_symmetric() {
        let gh = GaussHermite::<f64>::new(31).unwrap();
        for w in gh.nodes.windows(2) {
            assert!(w[0] < w[1]);
        }
        assert!(gh.nodes[15].abs() < 1e-14);
        for i in 0..31 {
            assert!((gh.nodes[i] + gh.nodes[30 - i]).abs() < 1e-12);
        }
    }
}
