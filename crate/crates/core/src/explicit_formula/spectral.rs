use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::quadrature::QuadratureRule;
use super::test_function::TestFunction;

/// Tolerances shared by the spectral and verification routines.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FormulaConfig<T> {
    /// Per-evaluation quadrature tolerance, relative to `max(1, int |alpha| e^{sigma t})`.
    pub quadrature_tol: T,
    /// Absolute slack added to every pass/fail decision.
    pub formula_tol: T,
    /// Multiplier on the truncation tail estimate.
    pub safety: T,
}

impl<T: Real> Default for FormulaConfig<T> {
    fn default() -> Self {
        Self {
            quadrature_tol: T::of(1e-12),
            formula_tol: T::of(1e-8),
            safety: T::of(10.0),
        }
    }
}

/// Sums in a fixed binary tree so the result does not depend on how the
/// terms were produced.
pub fn pairwise_sum<T: Real>(xs: &[Complex<T>]) -> Complex<T> {
    match xs.len() {
        0 => Complex::new(T::zero(), T::zero()),
        1 => xs[0],
        n => {
            let (a, b) = xs.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

/// `Phi(s) = int e^{s t} alpha(t) dt` on a rule adapted to `s`.
pub fn phi_transform<T: Real>(
    alpha: &TestFunction<T>,
    s: Complex<T>,
    config: &FormulaConfig<T>,
) -> Result<Complex<T>> {
    let probes = [s, Complex::new(s.re, T::zero())];
    Ok(QuadratureRule::adaptive(alpha, &probes, config.quadrature_tol)?.phi(s))
}

/// The truncated sums `sum_{|nu| <= nu_max} Phi(rho + 2 pi i nu / log q)` for a
/// batch of `rho` values, sharing one quadrature rule and one phase table
/// per `nu`.
#[derive(Clone, Debug)]
pub struct SpectralEngine<T> {
    alpha: TestFunction<T>,
    log_q: T,
    nu_max: u32,
    rhos: Vec<Complex<T>>,
    /// `terms[j][nu + nu_max] = Phi(rho_j + 2 pi i nu / log q)`.
    terms: Vec<Vec<Complex<T>>>,
    scales: Vec<T>,
    config: FormulaConfig<T>,
}

impl<T: Real> SpectralEngine<T> {
    pub fn new(
        alpha: &TestFunction<T>,
        q: u64,
        nu_max: u32,
        rhos: &[Complex<T>],
        config: FormulaConfig<T>,
    ) -> Result<Self> {
        if nu_max < 1 {
            return Err(Error::InvalidInput("nu_max must be >= 1".into()));
        }
        if q < 2 {
            return Err(Error::InvalidInput("q must be >= 2".into()));
        }
        let log_q = T::of(q as f64).ln();
        let step = T::of(2.0) * T::PI() / log_q;
        let top = rhos.iter().fold(T::zero(), |m, r| m.max(r.im.abs()))
            + step * T::of(nu_max as f64);
        let (lo, hi) = rhos.iter().fold((T::zero(), T::zero()), |(lo, hi), r| {
            (lo.min(r.re), hi.max(r.re))
        });
        let mut probes = Vec::new();
        for sigma in [lo, hi] {
            for frac in [0.0, 0.25, 0.5, 1.0] {
                probes.push(Complex::new(sigma, top * T::of(frac)));
            }
        }
        let rule = QuadratureRule::adaptive(alpha, &probes, config.quadrature_tol)?;

        // g_j(t_i) = w_i alpha(t_i) e^{rho_j t_i}
        let weighted: Vec<Vec<Complex<T>>> = rhos
            .iter()
            .map(|&rho| {
                rule.nodes()
                    .iter()
                    .zip(rule.weighted())
                    .map(|(&t, &w)| (rho * t).exp() * w)
                    .collect()
            })
            .collect();
        let scales = rhos.iter().map(|r| rule.scale(r.re)).collect();

        let per_nu: Vec<Vec<Complex<T>>> = (-(nu_max as i64)..=nu_max as i64)
            .into_par_iter()
            .map(|nu| {
                let omega = step * T::of(nu as f64);
                let phases: Vec<Complex<T>> = rule
                    .nodes()
                    .iter()
                    .map(|&t| {
                        let (s, c) = (omega * t).sin_cos();
                        Complex::new(c, s)
                    })
                    .collect();
                weighted
                    .iter()
                    .map(|g| {
                        g.iter()
                            .zip(&phases)
                            .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| {
                                acc + a * b
                            })
                    })
                    .collect()
            })
            .collect();
        let terms = (0..rhos.len())
            .map(|j| per_nu.iter().map(|row| row[j]).collect())
            .collect();

        Ok(Self {
            alpha: *alpha,
            log_q,
            nu_max,
            rhos: rhos.to_vec(),
            terms,
            scales,
            config,
        })
    }

    pub fn nu_max(&self) -> u32 {
        self.nu_max
    }

    pub fn rhos(&self) -> &[Complex<T>] {
        &self.rhos
    }

    /// All `2 nu_max + 1` terms for `rho_j`, ordered by `nu`.
    pub fn terms(&self, j: usize) -> &[Complex<T>] {
        &self.terms[j]
    }

    pub fn sum(&self, j: usize) -> Complex<T> {
        pairwise_sum(&self.terms[j])
    }

    /// Sum over `|nu| <= k` for a smaller cutoff `k`.
    pub fn sum_to(&self, j: usize, k: u32) -> Complex<T> {
        let k = k.min(self.nu_max) as usize;
        let mid = self.nu_max as usize;
        pairwise_sum(&self.terms[j][mid - k..=mid + k])
    }

    /// Running sums `S_k = sum_{|nu| <= k}` for `k = 0..=nu_max`.
    pub fn partial_sums(&self, j: usize) -> Vec<Complex<T>> {
        let mid = self.nu_max as usize;
        let t = &self.terms[j];
        let mut acc = t[mid];
        let mut out = vec![acc];
        for k in 1..=mid {
            acc = acc + t[mid - k] + t[mid + k];
            out.push(acc);
        }
        out
    }

    /// `int |alpha| e^{Re(rho_j) t} dt`.
    pub fn scale(&self, j: usize) -> T {
        self.scales[j]
    }

    /// Estimate of the discarded `|nu| > k` terms.
    ///
    /// For bumps this sums the boundary saddle-point envelope over the
    /// discarded frequencies; otherwise it is
    /// `(largest edge term) * k * safety`.
    pub fn truncation_bound_at(&self, j: usize, k: u32) -> T {
        if let Some(tail) = envelope_tail(&self.alpha, self.log_q, self.rhos[j], k) {
            return tail * self.config.safety;
        }
        let k = k.min(self.nu_max);
        let mid = self.nu_max as usize;
        let edge = self.terms[j][mid - k as usize]
            .norm()
            .max(self.terms[j][mid + k as usize].norm());
        edge * T::of(k as f64) * self.config.safety
    }

    pub fn truncation_bound(&self, j: usize) -> T {
        self.truncation_bound_at(j, self.nu_max)
    }

    /// `(2k + 1) * quadrature_tol * max(1, scale)`.
    pub fn quadrature_bound_at(&self, j: usize, k: u32) -> T {
        T::of(2.0 * k as f64 + 1.0) * self.config.quadrature_tol * self.scales[j].max(T::one())
    }

    pub fn quadrature_bound(&self, j: usize) -> T {
        self.quadrature_bound_at(j, self.nu_max)
    }
}

/// `sum_{|nu| > k} envelope(rho + 2 pi i nu / log q)`, for kinds with an envelope.
fn envelope_tail<T: Real>(alpha: &TestFunction<T>, log_q: T, rho: Complex<T>, k: u32) -> Option<T> {
    let step = T::of(2.0) * T::PI() / log_q;
    let envelope = |nu: i64| alpha.fourier_envelope(rho.re, rho.im + step * T::of(nu as f64));
    envelope(k as i64 + 1)?;
    let mut acc = T::zero();
    let mut nu = k as i64 + 1;
    loop {
        let term = envelope(nu)? + envelope(-nu)?;
        acc = acc + term;
        if !(term > acc * T::of(1e-17)) || nu > k as i64 + 10_000_000 {
            return Some(acc);
        }
        nu += 1;
    }
}

/// Smallest `nu_max` among `64, 128, ..., cap` whose envelope truncation
/// bound (with the safety factor) is at most `target` for every `rho`;
/// `cap` when no envelope is available or none qualifies.
pub fn nu_max_for<T: Real>(
    alpha: &TestFunction<T>,
    q: u64,
    rhos: &[Complex<T>],
    target: T,
    cap: u32,
    config: &FormulaConfig<T>,
) -> u32 {
    let log_q = T::of(q as f64).ln();
    let mut k = 64u32.min(cap);
    loop {
        let ok = rhos.iter().all(|&rho| {
            envelope_tail(alpha, log_q, rho, k).is_some_and(|t| t * config.safety <= target)
        });
        if ok || k >= cap {
            return k;
        }
        k = (k * 2).min(cap);
    }
}

/// One truncated spectral sum with its error budget.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralSum<T> {
    pub value: Complex<T>,
    pub truncation_bound: T,
    pub quadrature_bound: T,
}

impl<T: Real> SpectralSum<T> {
    /// Truncation plus quadrature budget.
    pub fn tail_bound(&self) -> T {
        self.truncation_bound + self.quadrature_bound
    }
}

/// `sum_{|nu| <= nu_max} Phi(rho + 2 pi i nu / log q)`.
pub fn spectral_sum<T: Real>(
    alpha: &TestFunction<T>,
    rho: Complex<T>,
    q: u64,
    nu_max: u32,
    config: &FormulaConfig<T>,
) -> Result<SpectralSum<T>> {
    let engine = SpectralEngine::new(alpha, q, nu_max, &[rho], *config)?;
    Ok(SpectralSum {
        value: engine.sum(0),
        truncation_bound: engine.truncation_bound(0),
        quadrature_bound: engine.quadrature_bound(0),
    })
}

/// Closed form of the full sum over `nu` by Poisson summation:
/// `log q * sum_k e^{rho k log q} alpha(k log q)`, a finite sum.
pub fn poisson_sum<T: Real>(alpha: &TestFunction<T>, rho: Complex<T>, q: u64) -> Complex<T> {
    let lq = T::of(q as f64).ln();
    let (a, b) = alpha.support();
    let k_lo = (a / lq).floor().to_i64().unwrap_or(0);
    let k_hi = (b / lq).ceil().to_i64().unwrap_or(0);
    let mut acc = Complex::new(T::zero(), T::zero());
    for k in k_lo..=k_hi {
        let t = T::of(k as f64) * lq;
        let v = alpha.eval(t);
        if v != T::zero() {
            acc = acc + (rho * t).exp() * v;
        }
    }
    acc * lq
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> FormulaConfig<f64> {
        FormulaConfig::default()
    }

    #[test]
    fn zero_test_function() {
        let a = TestFunction::<f64>::bump(1.0, 0.5).unwrap().with_amplitude(0.0);
        let s = Complex::new(0.3, 4.0);
        assert_eq!(phi_transform(&a, s, &cfg()).unwrap(), Complex::new(0.0, 0.0));
        let r = spectral_sum(&a, Complex::new(1.0, 0.0), 5, 8, &cfg()).unwrap();
        assert_eq!(r.value, Complex::new(0.0, 0.0));
    }

    #[test]
    fn phi_at_zero_is_mass() {
        let a = TestFunction::<f64>::bump(0.0, 1.0).unwrap();
        let phi = phi_transform(&a, Complex::new(0.0, 0.0), &cfg()).unwrap();
        // int_{-1}^{1} exp(-1/(1-u^2)) du
        assert!((phi.re - 0.443_993_816_168_079_4).abs() < 1e-13);
        assert_eq!(phi.im, 0.0);
    }

    #[test]
    fn phi_self_convergence() {
        let a = TestFunction::<f64>::bump(0.0, 1.0).unwrap();
        let s = Complex::new(1.0, 0.0);
        let adaptive = phi_transform(&a, s, &cfg()).unwrap();
        let rule = QuadratureRule::adaptive(&a, &[s], 1e-12).unwrap();
        let doubled = QuadratureRule::with_panels(&a, rule.panels() * 2).phi(s);
        assert!((adaptive - doubled).norm() < 1e-10);
    }

    #[test]
    fn empty_lattice_gives_zero() {
        let lq = 5f64.ln();
        let a = TestFunction::<f64>::bump(lq / 2.0, lq / 2.0 * 0.9).unwrap();
        assert_eq!(poisson_sum(&a, Complex::new(0.0, 0.0), 5), Complex::new(0.0, 0.0));
        let s = spectral_sum(&a, Complex::new(0.0, 0.0), 5, 256, &cfg()).unwrap();
        assert!(s.value.norm() <= s.tail_bound() + 1e-12);
    }

    #[test]
    fn rejects_bad_cutoff() {
        let a = TestFunction::<f64>::bump(1.0, 0.5).unwrap();
        assert!(spectral_sum(&a, Complex::new(0.0, 0.0), 5, 0, &cfg()).is_err());
    }

    #[test]
    fn pairwise_matches_sequential() {
        let xs: Vec<Complex<f64>> = (0..37).map(|i| Complex::new(i as f64, -(i as f64))).collect();
        assert_eq!(pairwise_sum(&xs), Complex::new(666.0, -666.0));
    }
}
