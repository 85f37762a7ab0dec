use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

use crate::census::{closed_point_census, default_max_degree, ClosedPointCensus};
use crate::error::{Error, Result};
use crate::field_curve::ZetaData;
use crate::scalar::Real;

use super::test_function::TestFunction;

/// Everything both sides of the explicit formula need: `q`, the genus, the
/// `2g` zeros and the closed-point census.
///
/// Built from [`ZetaData`] for elliptic curves; [`FormulaData::general`]
/// accepts arbitrary genus data, whose consistency is the caller's claim
/// that the trace formula then tests.
#[derive(Clone, Debug, PartialEq)]
pub struct FormulaData<T> {
    q: u64,
    genus: u32,
    zeros: Vec<Complex<T>>,
    census: ClosedPointCensus,
}

impl<T: Real> FormulaData<T> {
    pub fn general(
        q: u64,
        genus: u32,
        zeros: Vec<Complex<T>>,
        census: ClosedPointCensus,
    ) -> Result<Self> {
        if zeros.len() != 2 * genus as usize {
            return Err(Error::InvalidInput(format!(
                "genus {genus} needs {} zeros, got {}",
                2 * genus,
                zeros.len()
            )));
        }
        if census.q() != q {
            return Err(Error::InvalidInput("census belongs to a different q".into()));
        }
        Ok(Self {
            q,
            genus,
            zeros,
            census,
        })
    }

    /// Zeta data with a census deep enough for `alpha`'s support.
    pub fn from_zeta(zd: &ZetaData, alpha: &TestFunction<T>) -> Result<Self> {
        let radius = alpha.support_radius().to_f64_lossy();
        let census = closed_point_census(zd, default_max_degree(zd.q(), radius))?;
        Self::general(zd.q(), 1, zd.zeros::<T>().to_vec(), census)
    }

    /// Zeros `rho_j = log(omega_j) / log q` of the Frobenius eigenvalues
    /// `omega_j`, and the census
    /// `N_n = q^n + 1 - sum_j omega_j^n` up to `max_degree`.
    ///
    /// `traces[n-1]` must hold the exact integer `sum_j omega_j^n`.
    pub fn from_eigenvalues(
        q: u64,
        eigenvalues: &[Complex<T>],
        traces: &[BigInt],
    ) -> Result<Self> {
        if eigenvalues.len() % 2 != 0 {
            return Err(Error::InvalidInput("eigenvalues come in conjugate pairs".into()));
        }
        let lq = T::of(q as f64).ln();
        let zeros = eigenvalues
            .iter()
            .map(|w| Complex::new(w.norm().ln() / lq, w.im.atan2(w.re) / lq))
            .collect();
        let qb = BigInt::from(q);
        let counts = traces
            .iter()
            .enumerate()
            .map(|(i, t)| qb.pow(i as u32 + 1) + 1 - t)
            .collect();
        let census = ClosedPointCensus::from_point_counts(q, counts)?;
        Self::general(q, eigenvalues.len() as u32 / 2, zeros, census)
    }

    pub fn with_genus(mut self, genus: u32) -> Self {
        self.genus = genus;
        self
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn genus(&self) -> u32 {
        self.genus
    }

    pub fn zeros(&self) -> &[Complex<T>] {
        &self.zeros
    }

    pub fn census(&self) -> &ClosedPointCensus {
        &self.census
    }

    pub fn log_q(&self) -> T {
        T::of(self.q as f64).ln()
    }
}

/// One iterate of one orbit class: the contribution of
/// `B_d * d log q * weight * alpha(k d log q)`.
#[derive(Clone, Debug, PartialEq)]
pub struct OrbitTerm<T> {
    pub degree: u32,
    /// Signed iterate; negative iterates carry the weight `q^{kd}`.
    pub iterate: i64,
    pub position: T,
    pub weight: BigRational,
    pub alpha_value: T,
    pub contribution: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeometricSide<T> {
    pub euler_term: T,
    pub orbit_sum: T,
    pub terms: Vec<OrbitTerm<T>>,
    pub census_degree: u32,
}

impl<T: Real> GeometricSide<T> {
    pub fn total(&self) -> T {
        self.euler_term + self.orbit_sum
    }

    pub fn term(&self, degree: u32, iterate: i64) -> Option<&OrbitTerm<T>> {
        self.terms
            .iter()
            .find(|t| t.degree == degree && t.iterate == iterate)
    }
}

/// `(2 - 2g) alpha(0) log q + sum_d B_d d log q [sum_{k>=1} alpha(k d log q)
/// + sum_{k<=-1} q^{kd} alpha(k d log q)]`, truncated exactly by the support.
///
/// Terms are listed for every `(d, +-k)` with `k d log q` inside the support
/// radius, including those where `alpha` vanishes.
pub fn geometric_side<T: Real>(
    data: &FormulaData<T>,
    alpha: &TestFunction<T>,
) -> Result<GeometricSide<T>> {
    let lq = data.log_q();
    let radius = alpha.support_radius();
    let needed = (radius / lq).floor().to_u32().unwrap_or(0);
    let census = data.census();
    if needed > census.max_degree() {
        return Err(Error::InvalidInput(format!(
            "census reaches degree {} but the support needs {needed}",
            census.max_degree()
        )));
    }
    let euler_term = T::of(2.0 - 2.0 * data.genus() as f64) * alpha.eval(T::zero()) * lq;
    let q = BigInt::from(data.q());
    let mut terms = Vec::new();
    for d in 1..=needed {
        let b = T::of(census.count(d).to_f64().unwrap_or(f64::INFINITY));
        let length = T::of(d as f64) * lq;
        let mut k = 1i64;
        while T::of(k as f64) * length <= radius {
            for iterate in [k, -k] {
                let position = T::of(iterate as f64) * length;
                let weight = if iterate > 0 {
                    BigRational::one()
                } else {
                    BigRational::new(BigInt::one(), q.pow((k as u32) * d))
                };
                let w = T::of(weight.to_f64().unwrap_or(0.0));
                let alpha_value = alpha.eval(position);
                terms.push(OrbitTerm {
                    degree: d,
                    iterate,
                    position,
                    weight,
                    alpha_value,
                    contribution: b * length * w * alpha_value,
                });
            }
            k += 1;
        }
    }
    let orbit_sum = terms
        .iter()
        .fold(T::zero(), |acc, t| acc + t.contribution);
    Ok(GeometricSide {
        euler_term,
        orbit_sum,
        terms,
        census_degree: census.max_degree(),
    })
}
