//! Finite fields `F_q`, short Weierstrass curves over them, and the rational
//! form of the curve's zeta function.
//!
//! Field elements are encoded as integers `0..q`: the base-`p` digits of the
//! code are the coefficients of the residue polynomial, lowest degree first.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::{BigRational, Ratio};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Splits a prime power `q = p^f`, returning `None` otherwise.
pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let mut p = 2u64;
    while p * p <= q && q % p != 0 {
        p += 1;
    }
    if q % p != 0 {
        p = q;
    }
    let (mut r, mut f) = (q, 0u32);
    while r % p == 0 {
        r /= p;
        f += 1;
    }
    (r == 1).then_some((p, f))
}

// Conway polynomials, coefficients lowest degree first, monic.
const CONWAY: &[(u64, u32, &[u64])] = &[
    (2, 2, &[1, 1, 1]),
    (2, 3, &[1, 1, 0, 1]),
    (2, 4, &[1, 1, 0, 0, 1]),
    (3, 2, &[2, 2, 1]),
    (3, 3, &[1, 2, 0, 1]),
    (3, 4, &[2, 0, 0, 2, 1]),
    (5, 2, &[2, 4, 1]),
    (7, 2, &[3, 6, 1]),
];

fn poly_trim(a: &mut Vec<u64>) {
    while a.len() > 1 && *a.last().unwrap() == 0 {
        a.pop();
    }
}

/// Remainder of `a` modulo monic `m` over `F_p`.
fn poly_rem(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    let dm = m.len() - 1;
    while r.len() > dm {
        let lead = r.pop().unwrap();
        if lead != 0 {
            let off = r.len() - dm;
            for (i, &c) in m[..dm].iter().enumerate() {
                r[off + i] = (r[off + i] + (p - lead) * c % p) % p;
            }
        }
    }
    if r.is_empty() {
        r.push(0);
    }
    poly_trim(&mut r);
    r
}

fn is_irreducible(modulus: &[u64], p: u64) -> bool {
    let f = modulus.len() - 1;
    // Monic divisors of degree 1..=f/2, enumerated by their lower coefficients.
    for d in 1..=f / 2 {
        let count = p.pow(d as u32);
        for code in 0..count {
            let mut g: Vec<u64> = (0..d).map(|i| code / p.pow(i as u32) % p).collect();
            g.push(1);
            let r = poly_rem(modulus, &g, p);
            if r.len() == 1 && r[0] == 0 {
                return false;
            }
        }
    }
    true
}

/// The finite field `F_q`, `q = p^f`, as `F_p[x]/(modulus)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteField {
    p: u64,
    f: u32,
    q: u64,
    modulus: Vec<u64>,
}

impl FiniteField {
    /// `F_p^f` with the shipped Conway polynomial when one exists, otherwise
    /// the lexicographically first monic irreducible of degree `f`.
    pub fn new(p: u64, f: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if f == 0 {
            return Err(Error::InvalidInput("extension degree must be positive".into()));
        }
        if let Some((_, _, m)) = CONWAY.iter().find(|(cp, cf, _)| *cp == p && *cf == f) {
            return Self::with_modulus(p, m.to_vec());
        }
        if f == 1 {
            return Self::with_modulus(p, vec![0, 1]);
        }
        let count = p
            .checked_pow(f)
            .ok_or_else(|| Error::InvalidInput(format!("field {p}^{f} too large")))?;
        for code in 0..count {
            let mut m: Vec<u64> = (0..f).map(|i| code / p.pow(i) % p).collect();
            m.push(1);
            if m[0] != 0 && is_irreducible(&m, p) {
                return Self::with_modulus(p, m);
            }
        }
        Err(Error::Internal(format!("no irreducible of degree {f} over F_{p}")))
    }

    pub fn prime(p: u64) -> Result<Self> {
        Self::new(p, 1)
    }

    /// Builds the field from an explicit monic modulus (lowest degree first).
    pub fn with_modulus(p: u64, mut modulus: Vec<u64>) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        for c in modulus.iter_mut() {
            *c %= p;
        }
        poly_trim(&mut modulus);
        if modulus.len() < 2 || *modulus.last().unwrap() != 1 {
            return Err(Error::InvalidInput("modulus must be monic of degree >= 1".into()));
        }
        if !is_irreducible(&modulus, p) {
            return Err(Error::ReducibleModulus(p));
        }
        let f = (modulus.len() - 1) as u32;
        let q = p
            .checked_pow(f)
            .ok_or_else(|| Error::InvalidInput(format!("field {p}^{f} too large")))?;
        Ok(Self { p, f, q, modulus })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.f
    }

    pub fn order(&self) -> u64 {
        self.q
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    fn decode(&self, a: u64) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.f as usize);
        let mut a = a;
        for _ in 0..self.f {
            out.push(a % self.p);
            a /= self.p;
        }
        out
    }

    fn encode(&self, c: &[u64]) -> u64 {
        c.iter().rev().fold(0, |acc, &d| acc * self.p + d)
    }

    /// Embeds an element of the prime field.
    pub fn from_prime(&self, x: u64) -> u64 {
        x % self.p
    }

    /// Checks that `a` encodes a field element.
    pub fn element(&self, a: u64) -> Result<u64> {
        if a >= self.q {
            return Err(Error::InvalidInput(format!("{a} is not an element of F_{}", self.q)));
        }
        Ok(a)
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        if self.f == 1 {
            return (a + b) % self.p;
        }
        let (x, y) = (self.decode(a), self.decode(b));
        let s: Vec<u64> = x.iter().zip(&y).map(|(u, v)| (u + v) % self.p).collect();
        self.encode(&s)
    }

    pub fn neg(&self, a: u64) -> u64 {
        if self.f == 1 {
            return (self.p - a % self.p) % self.p;
        }
        let x: Vec<u64> = self.decode(a).iter().map(|u| (self.p - u) % self.p).collect();
        self.encode(&x)
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        let p = self.p;
        if self.f == 1 {
            return ((a as u128 * b as u128) % p as u128) as u64;
        }
        let (x, y) = (self.decode(a), self.decode(b));
        let mut prod = vec![0u64; x.len() + y.len() - 1];
        for (i, u) in x.iter().enumerate() {
            for (j, v) in y.iter().enumerate() {
                prod[i + j] = (prod[i + j] + u * v % p) % p;
            }
        }
        let mut r = poly_rem(&prod, &self.modulus, p);
        r.resize(self.f as usize, 0);
        self.encode(&r)
    }

    pub fn pow(&self, a: u64, mut e: u64) -> u64 {
        let (mut base, mut acc) = (a, 1u64);
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: u64) -> Option<u64> {
        (a != 0).then(|| self.pow(a, self.q - 2))
    }

    /// Quadratic character: 0, 1 or -1 (Euler's criterion, odd `q`).
    pub fn quadratic_character(&self, a: u64) -> i8 {
        if a == 0 {
            return 0;
        }
        if self.p == 2 {
            return 1;
        }
        if self.pow(a, (self.q - 1) / 2) == 1 {
            1
        } else {
            -1
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = u64> {
        0..self.q
    }
}

/// An elliptic curve `y^2 = x^3 + a4 x + a6` over `F_q`, `p > 3`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurveSpec {
    field: FiniteField,
    a4: u64,
    a6: u64,
}

impl CurveSpec {
    pub fn new(field: FiniteField, a4: u64, a6: u64) -> Result<Self> {
        if field.p() <= 3 {
            return Err(Error::UnsupportedCharacteristic(field.p()));
        }
        let a4 = field.element(a4)?;
        let a6 = field.element(a6)?;
        let curve = Self { field, a4, a6 };
        if curve.discriminant() == 0 {
            return Err(Error::SingularCurve);
        }
        Ok(curve)
    }

    pub fn field(&self) -> &FiniteField {
        &self.field
    }

    pub fn a4(&self) -> u64 {
        self.a4
    }

    pub fn a6(&self) -> u64 {
        self.a6
    }

    /// `-16 (4 a4^3 + 27 a6^2)` in `F_q`.
    pub fn discriminant(&self) -> u64 {
        let k = &self.field;
        let a4c = k.mul(k.mul(self.a4, self.a4), self.a4);
        let t = k.add(
            k.mul(k.from_prime(4), a4c),
            k.mul(k.from_prime(27), k.mul(self.a6, self.a6)),
        );
        k.mul(k.neg(k.from_prime(16)), t)
    }

    /// The same equation read over `F_{q^n}`; coefficients must lie in the prime field.
    pub fn base_change(&self, field: FiniteField) -> Result<Self> {
        if field.p() != self.field.p() {
            return Err(Error::InvalidInput("characteristic mismatch".into()));
        }
        if self.a4 >= self.field.p() || self.a6 >= self.field.p() {
            return Err(Error::InvalidInput(
                "base change only supported for prime-field coefficients".into(),
            ));
        }
        Self::new(field, self.a4, self.a6)
    }

    pub fn rhs(&self, x: u64) -> u64 {
        let k = &self.field;
        let x3 = k.mul(k.mul(x, x), x);
        k.add(k.add(x3, k.mul(self.a4, x)), self.a6)
    }
}

impl fmt::Display for CurveSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "p={} f={} a4={} a6={}",
            self.field.p(),
            self.field.degree(),
            self.a4,
            self.a6
        )
    }
}

impl FromStr for CurveSpec {
    type Err = Error;

    /// Parses `"p=5 f=1 a4=1 a6=1"`; `f` defaults to 1 and unknown keys are rejected.
    fn from_str(s: &str) -> Result<Self> {
        let (mut p, mut f, mut a4, mut a6) = (None, 1u32, None, None);
        for tok in s.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()) {
            let (key, val) = tok
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got `{tok}`")))?;
            let num = |v: &str| {
                v.trim()
                    .parse::<u64>()
                    .map_err(|e| Error::Parse(format!("bad value for {key}: {e}")))
            };
            match key.trim() {
                "p" => p = Some(num(val)?),
                "f" => f = num(val)? as u32,
                "a4" => a4 = Some(num(val)?),
                "a6" => a6 = Some(num(val)?),
                other => return Err(Error::Parse(format!("unknown key `{other}`"))),
            }
        }
        let p = p.ok_or_else(|| Error::Parse("missing p".into()))?;
        let a4 = a4.ok_or_else(|| Error::Parse("missing a4".into()))?;
        let a6 = a6.ok_or_else(|| Error::Parse("missing a6".into()))?;
        CurveSpec::new(FiniteField::new(p, f)?, a4, a6)
    }
}

/// `#E(F_q)`, point at infinity included, by enumerating `x` and testing
/// the quadratic character of the right-hand side.
pub fn count_points(curve: &CurveSpec) -> u64 {
    let k = curve.field();
    let affine: i64 = k
        .elements()
        .map(|x| 1 + k.quadratic_character(curve.rhs(x)) as i64)
        .sum();
    (affine + 1) as u64
}

/// Frobenius data of an elliptic curve over `F_q`: the trace `a`, the
/// eigenvalue `xi = a/2 + i sqrt(q - a^2/4)` and the zeros of the zeta function.
///
/// `xi` is kept as the exact pair `(a, a^2 - 4q)`; complex values are produced
/// on demand in the requested scalar type.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ZetaData {
    p: u64,
    f: u32,
    q: u64,
    trace_a: i64,
}

impl ZetaData {
    /// Validates Hasse's bound `a^2 <= 4q`.
    pub fn from_trace(p: u64, f: u32, trace_a: i64) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        let q = p
            .checked_pow(f)
            .ok_or_else(|| Error::InvalidInput("q overflows".into()))?;
        if (trace_a as i128).pow(2) > 4 * q as i128 {
            return Err(Error::InvalidInput(format!(
                "trace {trace_a} violates the Hasse bound for q = {q}"
            )));
        }
        Ok(Self { p, f, q, trace_a })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn trace(&self) -> i64 {
        self.trace_a
    }

    pub fn genus(&self) -> u32 {
        1
    }

    /// `p | a`.
    pub fn is_supersingular(&self) -> bool {
        self.trace_a.rem_euclid(self.p as i64) == 0
    }

    /// `a^2 - 4q`, never positive.
    pub fn discriminant(&self) -> i64 {
        self.trace_a * self.trace_a - 4 * self.q as i64
    }

    /// `|xi|^2 = (a/2)^2 + (4q - a^2)/4` in exact rational arithmetic.
    pub fn xi_norm_sq_exact(&self) -> BigRational {
        let a = BigInt::from(self.trace_a);
        let re_sq = BigRational::new(&a * &a, BigInt::from(4));
        let im_sq = BigRational::new(BigInt::from(-self.discriminant()), BigInt::from(4));
        re_sq + im_sq
    }

    /// `Re rho = log sqrt(q) / log q`, which is exactly one half.
    pub fn zero_real_part_exact(&self) -> Ratio<i64> {
        Ratio::new(1, 2)
    }

    /// `xi` on the branch `Im xi >= 0`.
    pub fn xi<T: Real>(&self) -> Complex<T> {
        let re = T::of(self.trace_a as f64) / T::of(2.0);
        let im = T::of(-self.discriminant() as f64).sqrt() / T::of(2.0);
        Complex::new(re, im)
    }

    pub fn log_q<T: Real>(&self) -> T {
        T::of(self.q as f64).ln()
    }

    /// The two zeros `rho_j = (log sqrt(q) + i arg xi_j) / log q`, `xi_1 = xi`,
    /// `xi_2 = conj(xi)`.
    pub fn zeros<T: Real>(&self) -> [Complex<T>; 2] {
        let xi = self.xi::<T>();
        let theta = xi.im.atan2(xi.re);
        let lq = self.log_q::<T>();
        let half = T::of(0.5);
        [Complex::new(half, theta / lq), Complex::new(half, -theta / lq)]
    }

    pub fn to_json(&self) -> ZetaJson {
        let xi = self.xi::<f64>();
        ZetaJson {
            q: self.q,
            a: self.trace_a,
            xi_re: xi.re,
            xi_im: xi.im,
            zeros: self
                .zeros::<f64>()
                .iter()
                .map(|z| ComplexJson { re: z.re, im: z.im })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexJson {
    pub re: f64,
    pub im: f64,
}

/// Serialized form of [`ZetaData`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZetaJson {
    pub q: u64,
    pub a: i64,
    pub xi_re: f64,
    pub xi_im: f64,
    pub zeros: Vec<ComplexJson>,
}

pub fn zeta_data(curve: &CurveSpec) -> ZetaData {
    let k = curve.field();
    let n = count_points(curve) as i64;
    let a = k.order() as i64 + 1 - n;
    ZetaData::from_trace(k.p(), k.degree(), a).expect("Hasse bound holds for a genuine curve")
}

/// `(1 - xi q^-s)(1 - conj(xi) q^-s) / ((1 - q^-s)(1 - q^{1-s}))`.
pub fn zeta_eval<T: Real>(zd: &ZetaData, s: Complex<T>) -> Result<Complex<T>> {
    let one = Complex::new(T::one(), T::zero());
    let q = T::of(zd.q() as f64);
    let u = (-s * q.ln()).exp();
    let xi = zd.xi::<T>();
    let den = (one - u) * (one - u * q);
    if den.norm().to_f64_lossy() < 1e-12 {
        return Err(Error::Pole {
            re: s.re.to_f64_lossy(),
            im: s.im.to_f64_lossy(),
        });
    }
    let num = (one - xi * u) * (one - xi.conj() * u);
    Ok(num / den)
}
