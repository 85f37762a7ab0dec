//! Closed points of an elliptic curve by degree, and the primitive closed
//! orbits they correspond to: a closed point of degree `d` has norm `q^d` and
//! its orbit has length `d log q`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field_curve::ZetaData;
use crate::scalar::Real;

/// Möbius function by trial division.
pub fn mobius(n: u64) -> i64 {
    assert!(n > 0);
    let (mut n, mut sign, mut d) = (n, 1i64, 2u64);
    while d * d <= n {
        if n % d == 0 {
            n /= d;
            if n % d == 0 {
                return 0;
            }
            sign = -sign;
        }
        d += 1;
    }
    if n > 1 {
        sign = -sign;
    }
    sign
}

pub fn divisors(n: u64) -> Vec<u64> {
    (1..=n).filter(|d| n % d == 0).collect()
}

/// `t_n = xi^n + conj(xi)^n` for `n = 0..=max`, exactly.
pub fn frobenius_power_traces(zd: &ZetaData, max: u32) -> Vec<BigInt> {
    let a = BigInt::from(zd.trace());
    let q = BigInt::from(zd.q());
    let mut t = vec![BigInt::from(2), a.clone()];
    for n in 1..max as usize {
        let next = &a * &t[n] - &q * &t[n - 1];
        t.push(next);
    }
    t.truncate(max as usize + 1);
    t
}

/// `N_n = #E(F_{q^n}) = q^n + 1 - t_n`.
pub fn extension_count(zd: &ZetaData, n: u32) -> Result<BigInt> {
    if n == 0 {
        return Err(Error::InvalidInput("extension degree must be >= 1".into()));
    }
    let t = frobenius_power_traces(zd, n);
    Ok(BigInt::from(zd.q()).pow(n) + 1 - &t[n as usize])
}

/// Counts of closed points of each degree `1..=D`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosedPointCensus {
    q: u64,
    counts: Vec<BigInt>,
    point_counts: Vec<BigInt>,
}

impl ClosedPointCensus {
    /// Builds a census from point counts `N_1..N_D` by Möbius inversion.
    ///
    /// Used directly by the general-genus plug-in; the elliptic path goes
    /// through [`closed_point_census`].
    pub fn from_point_counts(q: u64, point_counts: Vec<BigInt>) -> Result<Self> {
        if point_counts.is_empty() {
            return Err(Error::InvalidInput("census needs at least one degree".into()));
        }
        let mut counts = Vec::with_capacity(point_counts.len());
        for d in 1..=point_counts.len() as u64 {
            let mut acc = BigInt::zero();
            for e in divisors(d) {
                let mu = mobius(d / e);
                if mu != 0 {
                    acc += BigInt::from(mu) * &point_counts[e as usize - 1];
                }
            }
            let (b, r) = acc.div_rem(&BigInt::from(d));
            if !r.is_zero() {
                return Err(Error::Internal(format!(
                    "Möbius inversion not integral at degree {d}"
                )));
            }
            if b.is_negative() {
                return Err(Error::Internal(format!("negative closed-point count at degree {d}")));
            }
            counts.push(b);
        }
        Ok(Self {
            q,
            counts,
            point_counts,
        })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn max_degree(&self) -> u32 {
        self.counts.len() as u32
    }

    /// `B_d`, 1-based.
    pub fn count(&self, d: u32) -> &BigInt {
        &self.counts[d as usize - 1]
    }

    /// `N_n`, 1-based.
    pub fn point_count(&self, n: u32) -> &BigInt {
        &self.point_counts[n as usize - 1]
    }

    pub fn counts(&self) -> &[BigInt] {
        &self.counts
    }

    pub fn point_counts(&self) -> &[BigInt] {
        &self.point_counts
    }

    /// The same census cut at degree `max_degree` (clamped to `1..=D`).
    pub fn truncated(&self, max_degree: u32) -> Self {
        let d = (max_degree.max(1) as usize).min(self.counts.len());
        Self {
            q: self.q,
            counts: self.counts[..d].to_vec(),
            point_counts: self.point_counts[..d].to_vec(),
        }
    }

    /// `sum_{d | n} d B_d` for each `n <= D`.
    pub fn reconstruct_point_counts(&self) -> Vec<BigInt> {
        (1..=self.max_degree() as u64)
            .map(|n| {
                divisors(n)
                    .into_iter()
                    .map(|d| BigInt::from(d) * self.count(d as u32))
                    .sum()
            })
            .collect()
    }

    /// Rows `(d, N_d, B_d, length)` with `length = d log q`.
    pub fn to_csv(&self) -> String {
        let lq = (self.q as f64).ln();
        let mut out = String::from("d,N_d,B_d,length\n");
        for d in 1..=self.max_degree() {
            out.push_str(&format!(
                "{},{},{},{:.17e}\n",
                d,
                self.point_count(d),
                self.count(d),
                d as f64 * lq
            ));
        }
        out
    }

    pub fn to_json(&self) -> CensusJson {
        let lq = (self.q as f64).ln();
        CensusJson {
            q: self.q,
            max_degree: self.max_degree(),
            rows: (1..=self.max_degree())
                .map(|d| CensusRow {
                    d,
                    n_d: self.point_count(d).to_string(),
                    b_d: self.count(d).to_string(),
                    length: d as f64 * lq,
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CensusRow {
    pub d: u32,
    /// Decimal string: these exceed 64 bits quickly.
    pub n_d: String,
    pub b_d: String,
    pub length: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CensusJson {
    pub q: u64,
    pub max_degree: u32,
    pub rows: Vec<CensusRow>,
}

/// `B_d = (1/d) sum_{e | d} mu(d/e) N_e` for `d = 1..=max_degree`.
pub fn closed_point_census(zd: &ZetaData, max_degree: u32) -> Result<ClosedPointCensus> {
    if max_degree == 0 {
        return Err(Error::InvalidInput("census degree must be >= 1".into()));
    }
    let t = frobenius_power_traces(zd, max_degree);
    let q = BigInt::from(zd.q());
    let n: Vec<BigInt> = (1..=max_degree as usize)
        .map(|k| q.pow(k as u32) + 1 - &t[k])
        .collect();
    ClosedPointCensus::from_point_counts(zd.q(), n)
}

/// Smallest census degree whose orbit lengths cover `|t| <= support_radius`.
pub fn default_max_degree(q: u64, support_radius: f64) -> u32 {
    let lq = (q as f64).ln();
    ((support_radius / lq).ceil() as u32).max(1)
}

/// One class of primitive closed orbits: all orbits of length `degree * log q`.
#[derive(Clone, Debug, PartialEq)]
pub struct OrbitClass<T> {
    pub degree: u32,
    pub log_q: T,
    pub multiplicity: BigInt,
}

impl<T: Real> OrbitClass<T> {
    pub fn length(&self) -> T {
        T::of(self.degree as f64) * self.log_q
    }
}

/// Orbit classes with `d log q <= max_length`.
pub fn orbit_census<T: Real>(zd: &ZetaData, max_length: T) -> Result<Vec<OrbitClass<T>>> {
    let log_q = zd.log_q::<T>();
    let top = (max_length / log_q).floor().to_f64_lossy();
    if !(top >= 1.0) {
        return Ok(Vec::new());
    }
    let census = closed_point_census(zd, top as u32)?;
    Ok((1..=census.max_degree())
        .map(|d| OrbitClass {
            degree: d,
            log_q,
            multiplicity: census.count(d).clone(),
        })
        .collect())
}

/// Truncated Euler product `prod_{d <= D} (1 - q^{-ds})^{-B_d}` at real `s`.
pub fn euler_partial_product<T: Real>(census: &ClosedPointCensus, s: T) -> T {
    let q = T::of(census.q() as f64);
    let log: T = (1..=census.max_degree())
        .map(|d| {
            let b = T::of(census.count(d).to_f64().unwrap_or(f64::INFINITY));
            let x = q.powf(-s * T::of(d as f64));
            -b * (-x).ln_1p()
        })
        .fold(T::zero(), |a, b| a + b);
    log.exp()
}

/// Upper bound on `|zeta(s) - partial product|` for real `s > 1`, given the
/// partial product's value.
///
/// Uses `B_d <= N_d / d <= (q^{d/2} + 1)^2 <= 4 q^d` and
/// `-log(1 - x) <= x / (1 - x)` to bound the logarithm of the missing factors
/// by a geometric series; the returned bound is `|partial| (e^tail - 1)`.
pub fn euler_tail_bound(q: u64, max_degree: u32, s: f64, partial: f64) -> f64 {
    assert!(s > 1.0);
    let qf = q as f64;
    let x1 = qf.powf(-s);
    let c = 1.0 / (1.0 - x1);
    let ratio = qf.powf(1.0 - s);
    let first = qf.powf((max_degree + 1) as f64 * (1.0 - s));
    let tail = 4.0 * c * first / (1.0 - ratio);
    partial.abs() * tail.exp_m1()
}

/// `N_n` lower bound `(sqrt(q^n) - 1)^2`, as an exact integer floor comparison helper.
pub fn weil_lower_bound_holds(q: u64, n: u32, count: &BigInt) -> bool {
    // (q^{n/2} - 1)^2 = q^n + 1 - 2 q^{n/2} <= N_n  <=>  (q^n + 1 - N_n)^2 <= 4 q^n
    let qn = BigInt::from(q).pow(n);
    let t = &qn + BigInt::one() - count;
    t.clone() * t <= BigInt::from(4) * qn && count.is_positive()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zd(q: u64, a: i64) -> ZetaData {
        ZetaData::from_trace(q, 1, a).unwrap()
    }

    #[test]
    fn mobius_values() {
        let expected = [1, -1, -1, 0, -1, 1, -1, 0, 0, 1, -1, 0];
        for (n, mu) in expected.iter().enumerate() {
            assert_eq!(mobius(n as u64 + 1), *mu);
        }
    }

    #[test]
    fn recursion_supersingular_q5() {
        let z = zd(5, 0);
        let t = frobenius_power_traces(&z, 2);
        assert_eq!(t[2], BigInt::from(-10));
        assert_eq!(extension_count(&z, 2).unwrap(), BigInt::from(36));
        assert_eq!(extension_count(&z, 1).unwrap(), BigInt::from(6));
        assert!(extension_count(&z, 0).is_err());
    }

    #[test]
    fn census_q5_a0() {
        let c = closed_point_census(&zd(5, 0), 2).unwrap();
        assert_eq!(c.count(1), &BigInt::from(6));
        assert_eq!(c.count(2), &BigInt::from(15));
    }

    #[test]
    fn inversion_roundtrip_and_positivity() {
        for q in [5u64, 7, 11, 13] {
            let bound = (4.0 * q as f64).sqrt().floor() as i64;
            for a in -bound..=bound {
                let c = closed_point_census(&zd(q, a), 12).unwrap();
                assert_eq!(c.reconstruct_point_counts(), c.point_counts());
                assert!(c.counts().iter().all(|b| !b.is_negative()));
                for n in 1..=12 {
                    assert!(weil_lower_bound_holds(q, n, c.point_count(n)));
                }
            }
        }
    }

    #[test]
    fn non_integral_inversion_is_internal_error() {
        // N_1 = 1, N_2 = 2 gives B_2 = 1/2.
        let r = ClosedPointCensus::from_point_counts(5, vec![BigInt::from(1), BigInt::from(2)]);
        assert!(matches!(r, Err(Error::Internal(_))));
    }

    #[test]
    fn orbit_census_examples() {
        let z = zd(5, 0);
        let lq = 5f64.ln();
        assert!(orbit_census(&z, lq * 0.99).unwrap().is_empty());
        let classes = orbit_census(&z, 2.0 * lq + 1e-12).unwrap();
        let pairs: Vec<_> = classes
            .iter()
            .map(|c| (c.length(), c.multiplicity.clone()))
            .collect();
        assert_eq!(pairs.len(), 2);
        assert!((pairs[0].0 - lq).abs() < 1e-15);
        assert_eq!(pairs[0].1, BigInt::from(6));
        assert!((pairs[1].0 - 2.0 * lq).abs() < 1e-15);
        assert_eq!(pairs[1].1, BigInt::from(15));
    }

    #[test]
    fn weighted_length_identity() {
        // sum_{d<=D} d B_d * floor(D/d) = sum_{n<=D} N_n
        let z = zd(7, -3);
        let dmax = 9;
        let c = closed_point_census(&z, dmax).unwrap();
        let lhs: BigInt = (1..=dmax)
            .map(|d| BigInt::from(d) * c.count(d) * BigInt::from(dmax / d))
            .sum();
        let rhs: BigInt = c.point_counts().iter().sum();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn csv_layout() {
        let c = closed_point_census(&zd(5, 0), 2).unwrap();
        let csv = c.to_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "d,N_d,B_d,length");
        assert!(lines[2].starts_with("2,36,15,"));
        let j = serde_json::to_value(c.to_json()).unwrap();
        assert_eq!(j["rows"][1]["b_d"], "15");
    }

    #[test]
    fn default_degree_covers_support() {
        assert_eq!(default_max_degree(5, 5f64.ln() * 2.5), 3);
        assert_eq!(default_max_degree(5, 0.1), 1);
    }
}
