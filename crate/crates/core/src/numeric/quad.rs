//! Gauss–Legendre quadrature.

use super::Float;
use crate::error::NumericError;

/// Gauss–Legendre rule of a fixed order: nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Float> GaussLegendre<T> {
    /// Build the rule of the given order (number of nodes, at least 2).
    ///
    /// Nodes are the roots of the Legendre polynomial `P_n`, found by Newton
    /// iteration from the Chebyshev-like initial guesses; weights follow from
    /// the derivative values. Exact for polynomials of degree `2n - 1`.
    pub fn new(order: usize) -> Result<Self, NumericError> {
        if order < 2 {
            return Err(NumericError::QuadratureOrder(order));
        }
        let n = order;
        let nf = T::from(n).unwrap();
        let mut nodes = vec![T::zero(); n];
        let mut weights = vec![T::zero(); n];
        let half = (n + 1) / 2;
        for i in 0..half {
            // Initial guess: Tricomi-style approximation of the i-th root.
            let k = T::from(i).unwrap() + T::from(0.75).unwrap();
            let mut x = (T::PI() * k / (nf + T::from(0.5).unwrap())).cos();
            let mut dp = T::zero();
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= T::epsilon() * (T::one() + x.abs()) {
                    break;
                }
            }
            let w = T::from(2.0).unwrap() / ((T::one() - x * x) * dp * dp);
            nodes[i] = -x;
            weights[i] = w;
            nodes[n - 1 - i] = x;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            // Force the middle node to be exactly zero.
            nodes[n / 2] = T::zero();
            let (_, d) = legendre_with_derivative(n, T::zero());
            weights[n / 2] = T::from(2.0).unwrap() / (d * d);
        }
        Ok(Self { nodes, weights })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Integrate `f` over `[a, b]`.
    pub fn integrate<F: FnMut(T) -> T>(&self, a: T, b: T, mut f: F) -> T {
        let half = (b - a) / T::from(2.0).unwrap();
        let mid = (a + b) / T::from(2.0).unwrap();
        let mut acc = T::zero();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }
}

/// Evaluate `P_n(x)` and its derivative via the Bonnet recurrence.
fn legendre_with_derivative<T: Float>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    for k in 2..=n {
        let kf = T::from(k).unwrap();
        let p2 = ((T::from(2 * k - 1).unwrap() * x * p1) - (kf - T::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    // P_n'(x) = n (x P_n - P_{n-1}) / (x^2 - 1)
    let nf = T::from(n).unwrap();
    let d = nf * (x * p1 - p0) / (x * x - T::one());
    (p1, d)
}
