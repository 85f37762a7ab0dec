use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field_curve::ZetaData;
use crate::scalar::Real;

use super::geometric::{geometric_side, FormulaData, GeometricSide};
use super::spectral::{poisson_sum, FormulaConfig, SpectralEngine};
use super::test_function::TestFunction;

/// The three truncated eigenvalue sums and their error budget.
#[derive(Clone, Debug)]
pub struct SpectralSide<T> {
    /// Family `2 pi i nu / log q`.
    pub h0: T,
    /// Families `rho_j + 2 pi i nu / log q`, summed over `j`.
    pub h1: T,
    /// Family `1 + 2 pi i nu / log q`.
    pub h2: T,
    /// Per-zero contributions to `h1`.
    pub h1_parts: Vec<Complex<T>>,
    /// Largest imaginary part left in `h0`, `h1`, `h2`; zero up to rounding.
    pub imaginary_residue: T,
    pub nu_max: u32,
    pub truncation_bound: T,
    pub quadrature_bound: T,
    rows: Vec<usize>,
    signs: Vec<T>,
}

impl<T: Real> SpectralSide<T> {
    pub fn alternating(&self) -> T {
        self.h0 - self.h1 + self.h2
    }

    /// Truncation and quadrature budgets together.
    pub fn tail_bound(&self) -> T {
        self.truncation_bound + self.quadrature_bound
    }

    /// `(k, h0 - h1 + h2 truncated at |nu| <= k)` for `k = 0..=nu_max`.
    pub fn convergence(&self, engine: &SpectralEngine<T>) -> Vec<(u32, T)> {
        let partials: Vec<Vec<Complex<T>>> =
            self.rows.iter().map(|&j| engine.partial_sums(j)).collect();
        (0..=self.nu_max)
            .map(|k| {
                let v = partials
                    .iter()
                    .zip(&self.signs)
                    .fold(T::zero(), |acc, (p, &s)| acc + s * p[k as usize].re);
                (k, v)
            })
            .collect()
    }
}

fn find_rho<T: Real>(engine: &SpectralEngine<T>, rho: Complex<T>) -> Result<usize> {
    engine
        .rhos()
        .iter()
        .position(|r| *r == rho)
        .ok_or_else(|| Error::InvalidInput(format!("engine lacks rho = {rho}")))
}

/// Builds the spectral side from an engine that already holds `0`, `1`
/// and every zero of `data`.
pub fn spectral_side_from_engine<T: Real>(
    data: &FormulaData<T>,
    engine: &SpectralEngine<T>,
) -> Result<SpectralSide<T>> {
    let zero = Complex::new(T::zero(), T::zero());
    let one = Complex::new(T::one(), T::zero());
    let i0 = find_rho(engine, zero)?;
    let i2 = find_rho(engine, one)?;
    let zero_rows = data
        .zeros()
        .iter()
        .map(|&r| find_rho(engine, r))
        .collect::<Result<Vec<_>>>()?;

    let s0 = engine.sum(i0);
    let s2 = engine.sum(i2);
    let h1_parts: Vec<Complex<T>> = zero_rows.iter().map(|&j| engine.sum(j)).collect();
    let s1 = h1_parts
        .iter()
        .fold(Complex::new(T::zero(), T::zero()), |a, b| a + b);

    let mut rows = vec![i0, i2];
    rows.extend(&zero_rows);
    let mut signs = vec![T::one(), T::one()];
    signs.extend(zero_rows.iter().map(|_| -T::one()));
    let truncation_bound = rows
        .iter()
        .fold(T::zero(), |acc, &j| acc + engine.truncation_bound(j));
    let quadrature_bound = rows
        .iter()
        .fold(T::zero(), |acc, &j| acc + engine.quadrature_bound(j));

    Ok(SpectralSide {
        h0: s0.re,
        h1: s1.re,
        h2: s2.re,
        h1_parts,
        imaginary_residue: s0.im.abs().max(s1.im.abs()).max(s2.im.abs()),
        nu_max: engine.nu_max(),
        truncation_bound,
        quadrature_bound,
        rows,
        signs,
    })
}

/// Engine holding every family `data` needs.
pub fn engine_for<T: Real>(
    data: &FormulaData<T>,
    alpha: &TestFunction<T>,
    nu_max: u32,
    config: &FormulaConfig<T>,
) -> Result<SpectralEngine<T>> {
    let mut rhos = vec![Complex::new(T::zero(), T::zero()), Complex::new(T::one(), T::zero())];
    rhos.extend_from_slice(data.zeros());
    SpectralEngine::new(alpha, data.q(), nu_max, &rhos, *config)
}

pub fn spectral_side<T: Real>(
    zd: &ZetaData,
    alpha: &TestFunction<T>,
    nu_max: u32,
    config: &FormulaConfig<T>,
) -> Result<SpectralSide<T>> {
    let data = FormulaData::from_zeta(zd, alpha)?;
    let engine = engine_for(&data, alpha, nu_max, config)?;
    spectral_side_from_engine(&data, &engine)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermValue {
    pub name: String,
    pub value: f64,
}

/// Outcome of one trace-formula check.
///
/// `tail_bound` is the full error budget (truncation plus quadrature);
/// `truncation_bound` alone estimates the discarded `|nu| > nu_max` terms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceReport {
    pub q: u64,
    pub genus: u32,
    pub nu_max: u32,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub tail_bound: f64,
    pub truncation_bound: f64,
    pub quadrature_bound: f64,
    pub formula_tol: f64,
    /// `h0 - h1 + h2` with every `nu`-sum replaced by its Poisson closed form.
    pub poisson_lhs: f64,
    pub poisson_residual: f64,
    pub poisson_agrees: bool,
    pub passed: bool,
    pub per_term: Vec<TermValue>,
}

fn term(name: impl Into<String>, value: f64) -> TermValue {
    TermValue {
        name: name.into(),
        value,
    }
}

/// Assembles the report from an already computed spectral side.
pub fn report<T: Real>(
    data: &FormulaData<T>,
    alpha: &TestFunction<T>,
    spectral: &SpectralSide<T>,
    geometric: &GeometricSide<T>,
    config: &FormulaConfig<T>,
) -> TraceReport {
    let f = |x: T| x.to_f64_lossy();
    let lhs = spectral.alternating();
    let rhs = geometric.total();
    let residual = (lhs - rhs).abs();
    let tail = spectral.tail_bound();
    let threshold = tail + config.formula_tol;

    let zero = Complex::new(T::zero(), T::zero());
    let one = Complex::new(T::one(), T::zero());
    let p0 = poisson_sum(alpha, zero, data.q());
    let p2 = poisson_sum(alpha, one, data.q());
    let p1 = data
        .zeros()
        .iter()
        .fold(zero, |acc, &r| acc + poisson_sum(alpha, r, data.q()));
    let poisson_lhs = (p0 - p1 + p2).re;
    let poisson_residual = (lhs - poisson_lhs).abs();

    let mut per_term = vec![
        term("h0", f(spectral.h0)),
        term("h1", f(spectral.h1)),
        term("h2", f(spectral.h2)),
    ];
    for (j, part) in spectral.h1_parts.iter().enumerate() {
        per_term.push(term(format!("h1[rho_{}]", j + 1), f(part.re)));
    }
    per_term.extend([
        term("spectral_imaginary_residue", f(spectral.imaginary_residue)),
        term("euler_term", f(geometric.euler_term)),
        term("orbit_sum", f(geometric.orbit_sum)),
        term("poisson_h0", f(p0.re)),
        term("poisson_h1", f(p1.re)),
        term("poisson_h2", f(p2.re)),
    ]);
    for t in geometric.terms.iter().filter(|t| t.alpha_value != T::zero()) {
        per_term.push(term(
            format!("orbit[d={},k={}]", t.degree, t.iterate),
            f(t.contribution),
        ));
    }

    TraceReport {
        q: data.q(),
        genus: data.genus(),
        nu_max: spectral.nu_max,
        lhs: f(lhs),
        rhs: f(rhs),
        residual: f(residual),
        tail_bound: f(tail),
        truncation_bound: f(spectral.truncation_bound),
        quadrature_bound: f(spectral.quadrature_bound),
        formula_tol: f(config.formula_tol),
        poisson_lhs: f(poisson_lhs),
        poisson_residual: f(poisson_residual),
        poisson_agrees: poisson_residual <= threshold,
        passed: residual <= threshold,
        per_term,
    }
}

/// Checks `h0 - h1 + h2 = (2 - 2g) alpha(0) log q + orbit sum` for arbitrary
/// formula data.
pub fn verify_formula<T: Real>(
    data: &FormulaData<T>,
    alpha: &TestFunction<T>,
    nu_max: u32,
    config: &FormulaConfig<T>,
) -> Result<TraceReport> {
    let engine = engine_for(data, alpha, nu_max, config)?;
    let spectral = spectral_side_from_engine(data, &engine)?;
    let geometric = geometric_side(data, alpha)?;
    Ok(report(data, alpha, &spectral, &geometric, config))
}

/// Same check with a caller-supplied engine, so sweeps over many curves with
/// one `q` and one test function share the `nu`-phase work.
pub fn verify_with_engine<T: Real>(
    data: &FormulaData<T>,
    alpha: &TestFunction<T>,
    engine: &SpectralEngine<T>,
    config: &FormulaConfig<T>,
) -> Result<TraceReport> {
    let spectral = spectral_side_from_engine(data, engine)?;
    let geometric = geometric_side(data, alpha)?;
    Ok(report(data, alpha, &spectral, &geometric, config))
}

pub fn verify_trace_formula<T: Real>(
    zd: &ZetaData,
    alpha: &TestFunction<T>,
    nu_max: u32,
    config: &FormulaConfig<T>,
) -> Result<TraceReport> {
    verify_formula(&FormulaData::from_zeta(zd, alpha)?, alpha, nu_max, config)
}

/// CSV `nu,partial_sum` of the truncated alternating spectral sum.
pub fn convergence_csv<T: Real>(
    data: &FormulaData<T>,
    alpha: &TestFunction<T>,
    nu_max: u32,
    config: &FormulaConfig<T>,
) -> Result<String> {
    let engine = engine_for(data, alpha, nu_max, config)?;
    let side = spectral_side_from_engine(data, &engine)?;
    let mut out = String::from("nu,partial_sum\n");
    for (k, v) in side.convergence(&engine) {
        out.push_str(&format!("{k},{:.17e}\n", v.to_f64_lossy()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_alpha_balances() {
        let zd = ZetaData::from_trace(5, 1, 2).unwrap();
        let alpha = TestFunction::<f64>::bump(1.0, 0.5).unwrap().with_amplitude(0.0);
        let r = verify_trace_formula(&zd, &alpha, 16, &FormulaConfig::default()).unwrap();
        assert_eq!((r.lhs, r.rhs), (0.0, 0.0));
        assert!(r.passed);
    }

    #[test]
    fn bump_at_log5() {
        let zd = ZetaData::from_trace(5, 1, 0).unwrap();
        let alpha = TestFunction::<f64>::bump(5f64.ln(), 0.5).unwrap();
        let r = verify_trace_formula(&zd, &alpha, 256, &FormulaConfig::default()).unwrap();
        assert!(r.residual <= 1e-8, "{r:?}");
        assert!(r.passed && r.poisson_agrees);
        assert_eq!(r.genus, 1);
    }

    #[test]
    fn report_names_terms() {
        let zd = ZetaData::from_trace(7, 1, -2).unwrap();
        let alpha = TestFunction::<f64>::bump(7f64.ln(), 0.4).unwrap();
        let r = verify_trace_formula(&zd, &alpha, 64, &FormulaConfig::default()).unwrap();
        let names: Vec<_> = r.per_term.iter().map(|t| t.name.as_str()).collect();
        for n in ["h0", "h1", "h2", "h1[rho_1]", "h1[rho_2]", "euler_term", "orbit_sum", "orbit[d=1,k=1]"] {
            assert!(names.contains(&n), "missing {n}");
        }
    }

    #[test]
    fn convergence_trace_ends_at_lhs() {
        let zd = ZetaData::from_trace(5, 1, 1).unwrap();
        let alpha = TestFunction::<f64>::bump(5f64.ln(), 0.6).unwrap();
        let data = FormulaData::from_zeta(&zd, &alpha).unwrap();
        let csv = convergence_csv(&data, &alpha, 32, &FormulaConfig::default()).unwrap();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "nu,partial_sum");
        assert_eq!(lines.len(), 34);
        let last: f64 = lines[33].split(',').nth(1).unwrap().parse().unwrap();
        let r = verify_formula(&data, &alpha, 32, &FormulaConfig::default()).unwrap();
        assert!((last - r.lhs).abs() < 1e-10);
    }
}
