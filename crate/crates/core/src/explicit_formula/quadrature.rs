use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::test_function::TestFunction;

const GL_ORDER: usize = 16;
const MIN_PANELS: usize = 8;
const MAX_PANELS: usize = 1 << 15;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre<T: Real>(order: usize) -> (Vec<T>, Vec<T>) {
    let mut nodes = vec![T::zero(); order];
    let mut weights = vec![T::zero(); order];
    let n = T::of_usize(order);
    let one = T::one();
    let two = T::of(2.0);
    for i in 0..order.div_ceil(2) {
        let mut x = (T::PI() * (T::of_usize(i) + T::of(0.75)) / (n + T::of(0.5))).cos();
        let mut dp = T::zero();
        for _ in 0..100 {
            let (mut p0, mut p1) = (one, x);
            for k in 2..=order {
                let k = T::of_usize(k);
                let p2 = ((two * k - one) * x * p1 - (k - one) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - one);
            let dx = p1 / dp;
            x = x - dx;
            if dx.abs() <= T::epsilon() {
                break;
            }
        }
        let w = two / ((one - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    (nodes, weights)
}

/// Composite Gauss–Legendre rule on the support of a test function, with the
/// test function's values folded into the weights.
///
/// Once built, the same nodes serve every `s`; this keeps transforms at
/// different `s` deterministic and mutually consistent.
#[derive(Clone, Debug)]
pub struct QuadratureRule<T> {
    nodes: Vec<T>,
    /// `w_i alpha(t_i)`.
    weighted: Vec<T>,
    panels: usize,
}

impl<T: Real> QuadratureRule<T> {
    pub fn with_panels(alpha: &TestFunction<T>, panels: usize) -> Self {
        let (x, w) = gauss_legendre::<T>(GL_ORDER);
        let (a, b) = alpha.support();
        let h = (b - a) / T::of_usize(panels);
        let half = h / T::of(2.0);
        let mut nodes = Vec::with_capacity(panels * GL_ORDER);
        let mut weighted = Vec::with_capacity(panels * GL_ORDER);
        for k in 0..panels {
            let mid = a + h * (T::of_usize(k) + T::of(0.5));
            for (xi, wi) in x.iter().zip(&w) {
                let t = mid + half * *xi;
                nodes.push(t);
                weighted.push(half * *wi * alpha.eval(t));
            }
        }
        Self {
            nodes,
            weighted,
            panels,
        }
    }

    /// Doubles the panel count until `Phi` agrees between consecutive rules
    /// to `tol * max(1, M(sigma))` at every probe, `M(sigma) = int |alpha| e^{sigma t}`.
    pub fn adaptive(alpha: &TestFunction<T>, probes: &[Complex<T>], tol: T) -> Result<Self> {
        let mut coarse = Self::with_panels(alpha, MIN_PANELS);
        loop {
            let fine = Self::with_panels(alpha, coarse.panels * 2);
            let converged = probes.iter().all(|&s| {
                let diff = (coarse.phi(s) - fine.phi(s)).norm();
                diff <= tol * fine.scale(s.re).max(T::one())
            });
            if converged {
                return Ok(fine);
            }
            if fine.panels >= MAX_PANELS {
                return Err(Error::PrecisionInsufficient(format!(
                    "quadrature did not reach tolerance with {} panels",
                    fine.panels
                )));
            }
            coarse = fine;
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn panels(&self) -> usize {
        self.panels
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weighted(&self) -> &[T] {
        &self.weighted
    }

    /// `int e^{s t} alpha(t) dt`.
    pub fn phi(&self, s: Complex<T>) -> Complex<T> {
        self.nodes
            .iter()
            .zip(&self.weighted)
            .fold(Complex::new(T::zero(), T::zero()), |acc, (&t, &w)| {
                acc + (s * t).exp() * w
            })
    }

    /// `int |alpha(t)| e^{sigma t} dt`, the magnitude scale of `Phi(sigma + i omega)`.
    pub fn scale(&self, sigma: T) -> T {
        self.nodes
            .iter()
            .zip(&self.weighted)
            .fold(T::zero(), |acc, (&t, &w)| acc + (sigma * t).exp() * w.abs())
    }
}
