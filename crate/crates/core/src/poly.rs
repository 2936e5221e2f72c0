//! Polynomial interpolation on Chebyshev nodes.

use crate::scalar::Real;

/// `n` Chebyshev points of the first kind mapped to `[a, b]`, ascending.
pub fn chebyshev_nodes<R: Real>(n: usize, a: R, b: R) -> Vec<R> {
    let half = R::from_f64(0.5);
    let mid = (a + b) * half;
    let rad = (b - a) * half;
    let pi = R::pi();
    (0..n)
        .rev()
        .map(|j| {
            let theta = pi * R::from_f64((2 * j + 1) as f64) / R::from_f64((2 * n) as f64);
            mid + rad * cos_of(theta)
        })
        .collect()
}

// Good enough for node placement, which only needs distinct points.
fn cos_of<R: Real>(theta: R) -> R {
    R::from_f64(theta.to_f64().cos())
}

/// Interpolant in Newton form.
#[derive(Debug, Clone)]
pub struct NewtonPoly<R> {
    nodes: Vec<R>,
    coeffs: Vec<R>,
}

impl<R: Real> NewtonPoly<R> {
    /// Divided-difference interpolant through `(nodes[i], values[i])`.
    pub fn fit(nodes: &[R], values: &[R]) -> Self {
        assert_eq!(nodes.len(), values.len(), "node/value length mismatch");
        let n = nodes.len();
        let mut c = values.to_vec();
        for j in 1..n {
            for i in (j..n).rev() {
                c[i] = (c[i] - c[i - 1]) / (nodes[i] - nodes[i - j]);
            }
        }
        Self {
            nodes: nodes.to_vec(),
            coeffs: c,
        }
    }

    /// Interpolates `f` at `degree + 1` Chebyshev nodes on `[a, b]`.
    pub fn sample<F: FnMut(R) -> R>(mut f: F, degree: usize, a: R, b: R) -> Self {
        let nodes = chebyshev_nodes(degree + 1, a, b);
        let values: Vec<R> = nodes.iter().map(|&x| f(x)).collect();
        Self::fit(&nodes, &values)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, x: R) -> R {
        let n = self.coeffs.len();
        if n == 0 {
            return R::zero();
        }
        let mut acc = self.coeffs[n - 1];
        for i in (0..n - 1).rev() {
            acc = acc * (x - self.nodes[i]) + self.coeffs[i];
        }
        acc
    }

    /// Coefficient of `x^degree`.
    pub fn leading(&self) -> R {
        self.coeffs.last().copied().unwrap_or_else(R::zero)
    }

    /// Coefficients in the monomial basis, lowest degree first.
    pub fn monomial(&self) -> Vec<R> {
        let n = self.coeffs.len();
        let mut out = vec![R::zero(); n.max(1)];
        if n == 0 {
            return out;
        }
        out[0] = self.coeffs[n - 1];
        let mut len = 1;
        for i in (0..n - 1).rev() {
            // out <- out * (x - nodes[i]) + coeffs[i]
            for k in (0..=len).rev() {
                let shifted = if k > 0 { out[k - 1] } else { R::zero() };
                let here = if k < len { out[k] } else { R::zero() };
                out[k] = shifted - self.nodes[i] * here;
            }
            len += 1;
            out[0] += self.coeffs[i];
        }
        out
    }
}

/// Largest relative deviation between `f` and `p` on `points`.
pub fn max_relative_deviation<R: Real, F: FnMut(R) -> R>(p: &NewtonPoly<R>, mut f: F, points: &[R]) -> f64 {
    let mut worst = 0.0f64;
    for &x in points {
        let a = f(x);
        let b = p.eval(x);
        let scale = a.abs().max(b.abs()).to_f64().max(f64::MIN_POSITIVE);
        worst = worst.max((a - b).abs().to_f64() / scale);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_are_ascending_and_inside() {
        let n = chebyshev_nodes(7, -1.5f64, 2.0);
        assert_eq!(n.len(), 7);
        assert!(n.windows(2).all(|w| w[0] < w[1]));
        assert!(n[0] > -1.5 && n[6] < 2.0);
    }

    #[test]
    fn recovers_cubic() {
        let f = |x: f64| 2.0 - x + 0.5 * x * x - 3.0 * x * x * x;
        let p = NewtonPoly::sample(f, 3, -1.0, 2.0);
        assert!((p.leading() + 3.0).abs() < 1e-13);
        let m = p.monomial();
        for (got, want) in m.iter().zip([2.0, -1.0, 0.5, -3.0]) {
            assert!((got - want).abs() < 1e-12, "{m:?}");
        }
        assert!((p.eval(0.77) - f(0.77)).abs() < 1e-13);
    }

    #[test]
    fn constant_fit() {
        let p = NewtonPoly::sample(|_| 4.0f64, 0, 0.0, 1.0);
        assert_eq!(p.degree(), 0);
        assert_eq!(p.monomial(), vec![4.0]);
    }
}
