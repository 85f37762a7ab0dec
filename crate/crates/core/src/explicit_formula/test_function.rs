use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestFunctionKind {
    /// `A exp(-1 / (1 - u^2))`, smooth with all derivatives vanishing at the edge.
    Bump,
    /// `A exp(-9 u^2 / 2)` cut off at `|u| = 1`; discontinuous at the edge.
    GaussianTruncated,
    /// `A (1 - |u|)`, Lipschitz only.
    Hat,
}

/// A compactly supported test function `alpha(t) = A g((t - c) / w)` with
/// support exactly `[c - w, c + w]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TestFunction<T> {
    pub kind: TestFunctionKind,
    pub center: T,
    pub half_width: T,
    pub amplitude: T,
}

impl<T: Real> TestFunction<T> {
    pub fn new(kind: TestFunctionKind, center: T, half_width: T, amplitude: T) -> Result<Self> {
        if !(half_width > T::zero()) || !half_width.is_finite() {
            return Err(Error::InvalidInput("half width must be positive and finite".into()));
        }
        if !center.is_finite() || !amplitude.is_finite() {
            return Err(Error::InvalidInput("center and amplitude must be finite".into()));
        }
        Ok(Self {
            kind,
            center,
            half_width,
            amplitude,
        })
    }

    pub fn bump(center: T, half_width: T) -> Result<Self> {
        Self::new(TestFunctionKind::Bump, center, half_width, T::one())
    }

    pub fn with_amplitude(mut self, amplitude: T) -> Self {
        self.amplitude = amplitude;
        self
    }

    pub fn support(&self) -> (T, T) {
        (self.center - self.half_width, self.center + self.half_width)
    }

    /// `max |t|` over the support.
    pub fn support_radius(&self) -> T {
        self.center.abs() + self.half_width
    }

    pub fn is_zero(&self) -> bool {
        self.amplitude == T::zero()
    }

    pub fn eval(&self, t: T) -> T {
        let u = (t - self.center) / self.half_width;
        if !(u.abs() < T::one()) {
            return T::zero();
        }
        let shape = match self.kind {
            TestFunctionKind::Bump => (-(T::one() / (T::one() - u * u))).exp(),
            TestFunctionKind::GaussianTruncated => (-T::of(4.5) * u * u).exp(),
            TestFunctionKind::Hat => T::one() - u.abs(),
        };
        self.amplitude * shape
    }

    /// `t -> alpha(-t)`.
    pub fn reflected(&self) -> Self {
        Self {
            center: -self.center,
            ..*self
        }
    }

    pub fn is_even(&self) -> bool {
        self.center == T::zero()
    }

    /// Asymptotic envelope of `|Phi(sigma + i omega)|` for the bump kind.
    ///
    /// Each endpoint `c +- w` contributes at most
    /// `|A| w e^{sigma (c +- w)} sqrt(2 pi) e^{-1/4} (2 w omega)^{-3/4} e^{-sqrt(w omega)}`
    /// (saddle point of `exp(-1/(1-u^2)) e^{i w omega u}` at the boundary).
    /// Returns `None` for kinds without a usable envelope.
    pub fn fourier_envelope(&self, sigma: T, omega: T) -> Option<T> {
        if self.kind != TestFunctionKind::Bump {
            return None;
        }
        let omega = omega.abs();
        if omega <= T::zero() {
            return Some(T::infinity());
        }
        let w = self.half_width;
        let wo = w * omega;
        let ends = (sigma * (self.center + w)).exp() + (sigma * (self.center - w)).exp();
        let shape = (T::of(2.0) * T::PI()).sqrt()
            * T::of(-0.25).exp()
            * (T::of(2.0) * wo).powf(T::of(-0.75))
            * (-wo.sqrt()).exp();
        Some(self.amplitude.abs() * w * ends * shape)
    }
}

impl<T: Real> fmt::Display for TestFunction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            TestFunctionKind::Bump => "bump",
            TestFunctionKind::GaussianTruncated => "gaussian",
            TestFunctionKind::Hat => "hat",
        };
        write!(
            f,
            "{kind}:c={},w={},a={}",
            self.center, self.half_width, self.amplitude
        )
    }
}

impl<T: Real> FromStr for TestFunction<T> {
    type Err = Error;

    /// Parses `bump:c=1.6094,w=0.5` with optional `a=<amplitude>`; `kind` is
    /// one of `bump`, `gaussian`, `hat`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, params) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("expected kind:params, got `{s}`")))?;
        let kind = match kind.trim() {
            "bump" => TestFunctionKind::Bump,
            "gaussian" | "gaussian_truncated" => TestFunctionKind::GaussianTruncated,
            "hat" => TestFunctionKind::Hat,
            other => return Err(Error::Parse(format!("unknown test function kind `{other}`"))),
        };
        let (mut c, mut w, mut a) = (None, None, 1.0f64);
        for tok in params.split(',').filter(|t| !t.trim().is_empty()) {
            let (key, val) = tok
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got `{tok}`")))?;
            let val: f64 = val
                .trim()
                .parse()
                .map_err(|e| Error::Parse(format!("bad value for {key}: {e}")))?;
            match key.trim() {
                "c" => c = Some(val),
                "w" => w = Some(val),
                "a" | "A" => a = val,
                other => return Err(Error::Parse(format!("unknown test function key `{other}`"))),
            }
        }
        let c = c.ok_or_else(|| Error::Parse("missing c".into()))?;
        let w = w.ok_or_else(|| Error::Parse("missing w".into()))?;
        Self::new(kind, T::of(c), T::of(w), T::of(a))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vanishes_outside_support() {
        let a = TestFunction::<f64>::bump(1.0, 0.5).unwrap();
        assert_eq!(a.eval(0.5), 0.0);
        assert_eq!(a.eval(1.5), 0.0);
        assert_eq!(a.eval(-3.0), 0.0);
        assert!((a.eval(1.0) - (-1.0f64).exp()).abs() < 1e-16);
        assert!(a.eval(0.51) > 0.0);
    }

    #[test]
    fn parse_and_display() {
        let a: TestFunction<f64> = "bump:c=1.6094,w=0.5".parse().unwrap();
        assert_eq!(a.kind, TestFunctionKind::Bump);
        assert_eq!((a.center, a.half_width, a.amplitude), (1.6094, 0.5, 1.0));
        let h: TestFunction<f64> = "hat:c=0,w=2,a=3".parse().unwrap();
        assert_eq!(h.eval(1.0), 1.5);
        assert!("bump:c=1".parse::<TestFunction<f64>>().is_err());
        assert!("bump:c=1,w=-1".parse::<TestFunction<f64>>().is_err());
        assert!("spline:c=1,w=1".parse::<TestFunction<f64>>().is_err());
        assert!("bump:c=1,w=1,z=2".parse::<TestFunction<f64>>().is_err());
    }

    #[test]
    fn reflection() {
        let a = TestFunction::<f64>::bump(2.0, 0.7).unwrap();
        let r = a.reflected();
        for t in [-2.5, -2.0, -1.5, 0.0, 1.9] {
            assert_eq!(r.eval(t), a.eval(-t));
        }
    }
}
