//! The period lattice `Gamma` of the elliptic model with its multiplier `xi`
//! (`xi Gamma ⊂ Gamma`, `xi conj(xi) = q`), held as the integer matrix of `xi`
//! on a basis of `Gamma`. Quotients `Gamma / xi^nu Gamma` model the Tate
//! module at finite depth; every count is an exact integer determinant or an
//! exhaustive enumeration of a finite quotient.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_complex::Complex;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::explicit_formula::{guillemin_sternberg_weight, Direction, OrbitWeight};
use crate::field_curve::{prime_power, ZetaData};
use crate::padic_transversal::{PAdicAffineMap, ZpModel};
use crate::scalar::Real;

/// `2 x 2` integer matrix; column `j` holds the coordinates of `xi omega_j`.
pub type Mat2 = [[i128; 2]; 2];
/// Coordinates of a lattice point on `(omega_1, omega_2)`.
pub type Point = [i128; 2];

/// Largest finite quotient enumerated exhaustively.
pub const ENUMERATION_LIMIT: u128 = 1_000_000;

fn overflow() -> Error {
    Error::InvalidInput("lattice arithmetic overflows i128".into())
}

pub fn mat_mul(a: &Mat2, b: &Mat2) -> Result<Mat2> {
    let mut out = [[0i128; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let x = a[i][0].checked_mul(b[0][j]).ok_or_else(overflow)?;
            let y = a[i][1].checked_mul(b[1][j]).ok_or_else(overflow)?;
            out[i][j] = x.checked_add(y).ok_or_else(overflow)?;
        }
    }
    Ok(out)
}

pub fn mat_pow(a: &Mat2, k: u32) -> Result<Mat2> {
    let mut acc = [[1, 0], [0, 1]];
    for _ in 0..k {
        acc = mat_mul(&acc, a)?;
    }
    Ok(acc)
}

pub fn mat_vec(a: &Mat2, v: &Point) -> Point {
    [
        a[0][0] * v[0] + a[0][1] * v[1],
        a[1][0] * v[0] + a[1][1] * v[1],
    ]
}

pub fn det2(a: &Mat2) -> i128 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

/// `det(a) a^{-1}`.
pub fn adjugate(a: &Mat2) -> Mat2 {
    [[a[1][1], -a[0][1]], [-a[1][0], a[0][0]]]
}

pub fn identity_minus(a: &Mat2) -> Mat2 {
    [[1 - a[0][0], -a[0][1]], [-a[1][0], 1 - a[1][1]]]
}

fn add(a: &Point, b: &Point) -> Point {
    [a[0] + b[0], a[1] + b[1]]
}

fn sub(a: &Point, b: &Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

/// Invariant of the coset `v + y Z^2`: `adj(y) v mod |det y|`.
fn coset_key(y: &Mat2, v: &Point) -> Point {
    let d = det2(y).abs();
    let w = mat_vec(&adjugate(y), v);
    [w[0].rem_euclid(d), w[1].rem_euclid(d)]
}

/// `Gamma = Z omega_1 + Z omega_2` with the matrix of `xi`.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeData<T> {
    omega1: Complex<T>,
    omega2: Complex<T>,
    xi_matrix: Mat2,
    q: u64,
    trace: i64,
    digits: Vec<Point>,
}

/// `{omega1: [re, im], omega2: [re, im], xi_matrix: [[..], [..]]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeJson {
    pub omega1: [f64; 2],
    pub omega2: [f64; 2],
    pub xi_matrix: [[i64; 2]; 2],
}

impl<T: Real> LatticeData<T> {
    /// Checks `det X = q > 1` with `q` a prime power, `tr(X)^2 <= 4q`, and that
    /// the embedding carries `X` to multiplication by one complex number.
    pub fn new(omega1: Complex<T>, omega2: Complex<T>, xi_matrix: Mat2) -> Result<Self> {
        let cross = omega1.re * omega2.im - omega1.im * omega2.re;
        let scale = omega1.norm() * omega2.norm();
        if !(cross.abs() > T::of(1e-12) * scale) {
            return Err(Error::Degenerate(cross.to_f64_lossy()));
        }
        let det = det2(&xi_matrix);
        if det <= 1 {
            return Err(Error::InvalidInput(format!("det of the xi matrix is {det}, need q > 1")));
        }
        let q = u64::try_from(det).map_err(|_| overflow())?;
        if prime_power(q).is_none() {
            return Err(Error::InvalidInput(format!("{q} is not a prime power")));
        }
        let trace = xi_matrix[0][0] + xi_matrix[1][1];
        if trace * trace > 4 * det {
            return Err(Error::InvalidInput(format!(
                "char poly X^2 - {trace}X + {q} has real roots of unequal size"
            )));
        }
        let mut ld = Self {
            omega1,
            omega2,
            xi_matrix,
            q,
            trace: trace as i64,
            digits: Vec::new(),
        };
        let xi = ld.xi();
        let image = ld.embed(&[xi_matrix[0][1], xi_matrix[1][1]]);
        let err = (xi * omega2 - image).norm();
        if !(err <= T::of(1e-9) * (T::one() + image.norm())) {
            return Err(Error::InvalidInput(
                "xi matrix is not complex multiplication on this basis".into(),
            ));
        }
        ld.digits = ld.compute_digit_set();
        Ok(ld)
    }

    pub fn from_json(json: &LatticeJson) -> Result<Self> {
        let c = |z: [f64; 2]| Complex::new(T::of(z[0]), T::of(z[1]));
        let m = json.xi_matrix.map(|r| r.map(i128::from));
        Self::new(c(json.omega1), c(json.omega2), m)
    }

    pub fn to_json(&self) -> LatticeJson {
        let c = |z: Complex<T>| [z.re.to_f64_lossy(), z.im.to_f64_lossy()];
        LatticeJson {
            omega1: c(self.omega1),
            omega2: c(self.omega2),
            xi_matrix: self.xi_matrix.map(|r| r.map(|x| x as i64)),
        }
    }

    /// `Z[i]` with `xi = 1 + i`, `q = 2`.
    pub fn gaussian() -> Self {
        let one = Complex::new(T::one(), T::zero());
        let i = Complex::new(T::zero(), T::one());
        Self::new(one, i, [[1, -1], [1, 1]]).expect("valid preset")
    }

    /// `Z[omega]`, `omega = e^{2 pi i/3}`, with `xi = 1 + 2 omega = sqrt(-3)`, `q = 3`.
    pub fn eisenstein() -> Self {
        let one = Complex::new(T::one(), T::zero());
        let omega = Complex::new(T::of(-0.5), T::of(3f64.sqrt() / 2.0));
        Self::new(one, omega, [[1, -2], [2, -1]]).expect("valid preset")
    }

    /// Basis `(1, xi)` with `xi = a/2 + i sqrt(q - a^2/4)`: the companion matrix
    /// of `X^2 - aX + q`.
    pub fn companion(trace: i64, q: u64) -> Result<Self> {
        let disc = 4 * q as i128 - (trace as i128).pow(2);
        if disc <= 0 {
            return Err(Error::Degenerate(0.0));
        }
        let xi = Complex::new(
            T::of(trace as f64) / T::of(2.0),
            T::of(disc as f64).sqrt() / T::of(2.0),
        );
        Self::new(
            Complex::new(T::one(), T::zero()),
            xi,
            [[0, -(q as i128)], [1, trace as i128]],
        )
    }

    pub fn from_zeta(zd: &ZetaData) -> Result<Self> {
        Self::companion(zd.trace(), zd.q())
    }

    pub fn omega1(&self) -> Complex<T> {
        self.omega1
    }

    pub fn omega2(&self) -> Complex<T> {
        self.omega2
    }

    pub fn xi_matrix(&self) -> Mat2 {
        self.xi_matrix
    }

    /// Matrix of `conj(xi) = q xi^{-1}`.
    pub fn conj_xi_matrix(&self) -> Mat2 {
        adjugate(&self.xi_matrix)
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn trace(&self) -> i64 {
        self.trace
    }

    /// `p | a`: `V_xi Gamma` then has `Q_p`-dimension 2 rather than 1.
    pub fn is_supersingular(&self) -> bool {
        let (p, _) = prime_power(self.q).expect("checked at construction");
        self.trace.rem_euclid(p as i64) == 0
    }

    pub fn embed(&self, v: &Point) -> Complex<T> {
        self.omega1 * T::of(v[0] as f64) + self.omega2 * T::of(v[1] as f64)
    }

    pub fn xi(&self) -> Complex<T> {
        self.embed(&[self.xi_matrix[0][0], self.xi_matrix[1][0]]) / self.omega1
    }

    /// Representatives of `Gamma / xi Gamma`: in each coset the point of least
    /// `l^1` norm, ties broken towards the first axis and nonnegative
    /// coordinates. Starts with 0.
    fn compute_digit_set(&self) -> Vec<Point> {
        let x = self.xi_matrix;
        let r: i128 = x.iter().flatten().map(|e| e.abs()).sum();
        let mut candidates: Vec<Point> = (-r..=r)
            .flat_map(|a| (-r..=r).map(move |b| [a, b]))
            .collect();
        candidates.sort_by_key(|v| (v[0].abs() + v[1].abs(), v[1].abs(), v[0] < 0, v[1] < 0));
        let mut seen = HashSet::new();
        let mut digits = Vec::with_capacity(self.q as usize);
        for v in candidates {
            if seen.insert(coset_key(&x, &v)) {
                digits.push(v);
            }
        }
        digits
    }

    pub fn digit_set(&self) -> &[Point] {
        &self.digits
    }

    /// Index of the digit congruent to `v` mod `xi Gamma`.
    pub fn digit_of(&self, v: &Point) -> usize {
        let key = coset_key(&self.xi_matrix, v);
        self.digits
            .iter()
            .position(|d| coset_key(&self.xi_matrix, d) == key)
            .expect("digit set covers every coset")
    }

    /// `xi^{-1} v`, defined when `v ∈ xi Gamma`.
    pub fn divide_by_xi(&self, v: &Point) -> Option<Point> {
        let d = det2(&self.xi_matrix);
        let w = mat_vec(&adjugate(&self.xi_matrix), v);
        (w[0] % d == 0 && w[1] % d == 0).then(|| [w[0] / d, w[1] / d])
    }

    /// Enumerates `Gamma / xi^nu Gamma` as the points `sum_{l < nu} a_l xi^l`.
    pub fn quotient_elements(&self, nu: u32) -> Result<Vec<Point>> {
        let size = (self.q as u128)
            .checked_pow(nu)
            .filter(|&s| s <= ENUMERATION_LIMIT)
            .ok_or(Error::TooLarge(u128::MAX))?;
        let q = self.q as usize;
        Ok((0..size as usize)
            .map(|mut idx| {
                let mut ds = Vec::with_capacity(nu as usize);
                for _ in 0..nu {
                    ds.push(idx % q);
                    idx /= q;
                }
                ds.iter()
                    .rev()
                    .fold([0, 0], |acc, &d| add(&mat_vec(&self.xi_matrix, &acc), &self.digits[d]))
            })
            .collect())
    }
}

/// `[Gamma : xi^nu Gamma] = |det X^nu|`, exact.
pub fn quotient_count<T: Real>(ld: &LatticeData<T>, nu: u32) -> BigInt {
    let x = ld.xi_matrix().map(|r| r.map(BigInt::from));
    let mut acc = [
        [BigInt::one(), BigInt::from(0)],
        [BigInt::from(0), BigInt::one()],
    ];
    for _ in 0..nu {
        let mut next = acc.clone();
        for i in 0..2 {
            for j in 0..2 {
                next[i][j] = &acc[i][0] * &x[0][j] + &acc[i][1] * &x[1][j];
            }
        }
        acc = next;
    }
    (&acc[0][0] * &acc[1][1] - &acc[0][1] * &acc[1][0]).abs()
}

/// Distinct cosets among the digit-expansion points of `Gamma / xi^nu Gamma`.
pub fn enumerated_quotient_count<T: Real>(ld: &LatticeData<T>, nu: u32) -> Result<usize> {
    let y = mat_pow(&ld.xi_matrix(), nu)?;
    let keys: HashSet<Point> = ld
        .quotient_elements(nu)?
        .iter()
        .map(|v| coset_key(&y, v))
        .collect();
    Ok(keys.len())
}

/// Whether `v -> M v` permutes `Gamma / xi^nu Gamma`; `M` must commute with `X`.
pub fn multiplier_bijectivity<T: Real>(ld: &LatticeData<T>, m: &Mat2, nu: u32) -> Result<bool> {
    let x = ld.xi_matrix();
    if mat_mul(m, &x)? != mat_mul(&x, m)? {
        return Err(Error::InvalidInput("multiplier does not commute with xi".into()));
    }
    let y = mat_pow(&x, nu)?;
    let elems = ld.quotient_elements(nu)?;
    let image: HashSet<Point> = elems.iter().map(|v| coset_key(&y, &mat_vec(m, v))).collect();
    Ok(image.len() == elems.len())
}

/// `x -> x - xi x` on `Gamma / xi^depth Gamma`.
pub fn one_minus_xi_bijectivity<T: Real>(ld: &LatticeData<T>, depth: u32) -> Result<bool> {
    one_minus_xi_power_bijectivity(ld, 1, depth)
}

/// `x -> x - xi^k x` on `Gamma / xi^depth Gamma`.
pub fn one_minus_xi_power_bijectivity<T: Real>(ld: &LatticeData<T>, k: u32, depth: u32) -> Result<bool> {
    multiplier_bijectivity(ld, &identity_minus(&mat_pow(&ld.xi_matrix(), k)?), depth)
}

/// Multiplication by an integer on `Gamma / xi^depth Gamma`; bijective exactly
/// when `gcd(n, q) = 1`.
pub fn integer_multiplication_bijectivity<T: Real>(ld: &LatticeData<T>, n: i64, depth: u32) -> Result<bool> {
    let n = n as i128;
    multiplier_bijectivity(ld, &[[n, 0], [0, n]], depth)
}

/// A truncated element `sum_{l = low}^{low + len - 1} a_l xi^l` of `V_xi Gamma`,
/// digits indexing the digit set.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TateDigits {
    low: i64,
    digits: Vec<usize>,
}

impl TateDigits {
    pub fn zero(low: i64, len: usize) -> Self {
        Self {
            low,
            digits: vec![0; len],
        }
    }

    pub fn new<T: Real>(ld: &LatticeData<T>, low: i64, digits: Vec<usize>) -> Result<Self> {
        if digits.iter().any(|&d| d >= ld.digit_set().len()) {
            return Err(Error::InvalidInput("digit index outside the digit set".into()));
        }
        Ok(Self { low, digits })
    }

    /// The first `len` digits of `xi^low v`.
    pub fn from_lattice<T: Real>(ld: &LatticeData<T>, v: &Point, low: i64, len: usize) -> Self {
        let (digits, _) = extract_digits(ld, *v, len);
        Self { low, digits }
    }

    pub fn low(&self) -> i64 {
        self.low
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    pub fn digits(&self) -> &[usize] {
        &self.digits
    }

    pub fn is_zero(&self) -> bool {
        self.digits.iter().all(|&d| d == 0)
    }

    /// `sum_l a_l xi^{l - low}` as a point of `Gamma`.
    pub fn to_lattice<T: Real>(&self, ld: &LatticeData<T>) -> Point {
        let f = ld.digit_set();
        self.digits
            .iter()
            .rev()
            .fold([0, 0], |acc, &d| add(&mat_vec(&ld.xi_matrix(), &acc), &f[d]))
    }

    /// Complex value of the truncated sum.
    pub fn to_complex<T: Real>(&self, ld: &LatticeData<T>) -> Complex<T> {
        ld.embed(&self.to_lattice(ld)) * ld.xi().powi(self.low as i32)
    }

    fn same_window(&self, other: &Self) -> Result<()> {
        if self.low != other.low || self.len() != other.len() {
            return Err(Error::InvalidInput("digit windows differ".into()));
        }
        Ok(())
    }

    /// Sum in `xi^low Gamma / xi^{low + len} Gamma`, dropping the carry out.
    pub fn add_mod<T: Real>(&self, other: &Self, ld: &LatticeData<T>) -> Result<Self> {
        self.same_window(other)?;
        let v = add(&self.to_lattice(ld), &other.to_lattice(ld));
        Ok(Self::from_lattice(ld, &v, self.low, self.len()))
    }

    /// Exact sum; fails when a carry leaves the window.
    pub fn add<T: Real>(&self, other: &Self, ld: &LatticeData<T>) -> Result<Self> {
        self.same_window(other)?;
        let v = add(&self.to_lattice(ld), &other.to_lattice(ld));
        let (digits, carry) = extract_digits(ld, v, self.len());
        if carry != [0, 0] {
            return Err(Error::DepthExhausted(self.low + self.len() as i64));
        }
        Ok(Self {
            low: self.low,
            digits,
        })
    }

    /// `xi t` in the same window; fails when the top digit is nonzero.
    pub fn xi_multiply(&self) -> Result<Self> {
        match self.digits.last() {
            None => Ok(self.clone()),
            Some(&top) if top != 0 => Err(Error::DepthExhausted(self.low + self.len() as i64)),
            Some(_) => {
                let mut digits = vec![0];
                digits.extend_from_slice(&self.digits[..self.len() - 1]);
                Ok(Self {
                    low: self.low,
                    digits,
                })
            }
        }
    }

    /// `xi^{-1} t` in the same window; fails when the bottom digit is nonzero.
    pub fn xi_divide(&self) -> Result<Self> {
        match self.digits.first() {
            None => Ok(self.clone()),
            Some(&bottom) if bottom != 0 => Err(Error::DepthExhausted(self.low - 1)),
            Some(_) => {
                let mut digits = self.digits[1..].to_vec();
                digits.push(0);
                Ok(Self {
                    low: self.low,
                    digits,
                })
            }
        }
    }

    /// `xi^k t` by moving the window; always exact.
    pub fn shift(&self, k: i64) -> Self {
        Self {
            low: self.low + k,
            digits: self.digits.clone(),
        }
    }
}

/// `len` digits of `v` and the remaining carry `(v - sum a_l xi^l) / xi^len`.
fn extract_digits<T: Real>(ld: &LatticeData<T>, mut v: Point, len: usize) -> (Vec<usize>, Point) {
    let f = ld.digit_set();
    let mut digits = Vec::with_capacity(len);
    for _ in 0..len {
        let d = ld.digit_of(&v);
        digits.push(d);
        v = ld
            .divide_by_xi(&sub(&v, &f[d]))
            .expect("v - digit lies in xi Gamma");
    }
    (digits, v)
}

/// Basis of `Gamma* = {z : Re z Re g + Im z Im g ∈ 2 pi Z for all g ∈ Gamma}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DualBasis<T> {
    pub basis: [Complex<T>; 2],
}

impl<T: Real> DualBasis<T> {
    pub fn covolume(&self) -> T {
        let [a, b] = self.basis;
        (a.re * b.im - a.im * b.re).abs()
    }
}

fn pairing<T: Real>(z: Complex<T>, g: Complex<T>) -> T {
    z.re * g.re + z.im * g.im
}

/// `D = 2 pi (B^T)^{-1}` for the real basis matrix `B = [omega_1 omega_2]`.
pub fn dual_of_basis<T: Real>(w1: Complex<T>, w2: Complex<T>) -> Result<DualBasis<T>> {
    let det = w1.re * w2.im - w2.re * w1.im;
    if !(det.abs() > T::of(1e-300)) || !(det.abs() > T::of(1e-12) * w1.norm() * w2.norm()) {
        return Err(Error::Degenerate(det.to_f64_lossy()));
    }
    let two_pi = T::of(2.0) * T::PI();
    // (B^T)^{-1} = (B^{-1})^T, B^{-1} = [[w2.im, -w2.re], [-w1.im, w1.re]] / det
    let d1 = Complex::new(w2.im, -w2.re) * (two_pi / det);
    let d2 = Complex::new(-w1.im, w1.re) * (two_pi / det);
    Ok(DualBasis { basis: [d1, d2] })
}

pub fn dual_lattice<T: Real>(ld: &LatticeData<T>) -> Result<DualBasis<T>> {
    dual_of_basis(ld.omega1(), ld.omega2())
}

/// Largest distance of `(d_i; omega_j)` from `2 pi delta_ij`.
pub fn dual_pairing_error<T: Real>(dual: &DualBasis<T>, w1: Complex<T>, w2: Complex<T>) -> T {
    let two_pi = T::of(2.0) * T::PI();
    let mut err = T::zero();
    for (i, d) in dual.basis.iter().enumerate() {
        for (j, w) in [w1, w2].iter().enumerate() {
            let target = if i == j { two_pi } else { T::zero() };
            err = err.max((pairing(*d, *w) - target).abs());
        }
    }
    err
}

/// `[(xi^n Gamma)* : Gamma*]` as the covolume ratio of the two computed duals.
pub fn character_index<T: Real>(ld: &LatticeData<T>, n: u32) -> Result<T> {
    let y = mat_pow(&ld.xi_matrix(), n)?;
    let w1 = ld.embed(&[y[0][0], y[1][0]]);
    let w2 = ld.embed(&[y[0][1], y[1][1]]);
    let outer = dual_of_basis(w1, w2)?;
    let inner = dual_lattice(ld)?;
    Ok(inner.covolume() / outer.covolume())
}

/// A fixed point of `z -> xi^{-k} z - gamma` on the leaf.
#[derive(Clone, Debug, PartialEq)]
pub struct OrbitFixedPoint<T> {
    pub k: u32,
    pub gamma: Complex<T>,
    pub z0: Complex<T>,
    /// `|xi^{-k} z0 - z0 - gamma|`.
    pub residual: T,
    /// `|xi^{-k} - 1|^2`.
    pub leaf_jacobian: T,
}

/// `z0 = gamma / (xi^{-k} - 1)` with `gamma = xi^{-k}(g_0 omega_1 + g_1 omega_2)`,
/// i.e. `gamma_coords` are taken on the basis of `xi^{-k} Gamma`.
pub fn solve_fixed_point<T: Real>(ld: &LatticeData<T>, gamma_coords: &Point, k: u32) -> Result<OrbitFixedPoint<T>> {
    if k == 0 {
        return Err(Error::InvalidInput("orbit iterate must be positive".into()));
    }
    let xik = ld.xi().powi(-(k as i32));
    let gamma = xik * ld.embed(gamma_coords);
    let one = Complex::new(T::one(), T::zero());
    let z0 = gamma / (xik - one);
    Ok(OrbitFixedPoint {
        k,
        gamma,
        z0,
        residual: (xik * z0 - z0 - gamma).norm(),
        leaf_jacobian: (xik - one).norm_sqr(),
    })
}

/// Three independent counts of fixed points of `xi^k` on `C / Gamma`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedPointCount {
    pub k: u32,
    /// Distinct cosets of `(X^k - I) Gamma` met by lattice points in a box.
    pub enumerated: u64,
    /// `|det(X^k - I)|`.
    pub determinant: u64,
    /// `q^k + 1 - t_k` from the Frobenius recursion.
    pub point_count: u64,
}

impl FixedPointCount {
    pub fn agrees(&self) -> bool {
        self.enumerated == self.determinant && self.determinant == self.point_count
    }
}

pub fn fixed_point_count<T: Real>(ld: &LatticeData<T>, k: u32) -> Result<FixedPointCount> {
    if k == 0 {
        return Err(Error::InvalidInput("orbit iterate must be positive".into()));
    }
    let y = identity_minus(&mat_pow(&ld.xi_matrix(), k)?);
    let det = det2(&y).unsigned_abs();
    let r: i128 = y.iter().flatten().map(|e| e.abs()).sum();
    if ((2 * r + 1) as u128).pow(2) > 16 * ENUMERATION_LIMIT {
        return Err(Error::TooLarge(((2 * r + 1) as u128).pow(2)));
    }
    let mut keys = HashSet::new();
    for a in -r..=r {
        for b in -r..=r {
            keys.insert(coset_key(&y, &[a, b]));
        }
    }
    let (p, f) = prime_power(ld.q()).expect("checked at construction");
    let zd = ZetaData::from_trace(p, f, ld.trace())?;
    let n_k = crate::census::extension_count(&zd, k)?;
    Ok(FixedPointCount {
        k,
        enumerated: keys.len() as u64,
        determinant: u64::try_from(det).map_err(|_| overflow())?,
        point_count: n_k.to_u64().ok_or_else(overflow)?,
    })
}

/// Distributional-trace coefficient of the `k`-th iterate in one direction.
#[derive(Clone, Debug, PartialEq)]
pub struct OrbitWeightReport<T> {
    pub k: u32,
    pub direction: Direction,
    /// `-k log q` or `+k log q`.
    pub position: T,
    pub leaf_jacobian: T,
    /// `q^k` backwards, 1 forwards.
    pub transversal_jacobian: BigRational,
    pub weight: OrbitWeight,
    /// `weight * log q`.
    pub coefficient: T,
}

/// Backwards the transversal map `v -> xi^{-k} v + gamma - v` has Jacobian
/// `q^k`; forwards `v -> xi^k v + gamma - v` has Jacobian 1.
pub fn orbit_weight_report<T: Real>(
    ld: &LatticeData<T>,
    k: u32,
    direction: Direction,
) -> Result<OrbitWeightReport<T>> {
    if k == 0 {
        return Err(Error::InvalidInput("orbit iterate must be positive".into()));
    }
    let (exponent, jac) = match direction {
        Direction::Backward => (-(k as i32), BigRational::from(BigInt::from(ld.q()).pow(k))),
        Direction::Forward => (k as i32, BigRational::one()),
    };
    let multiplier = ld.xi().powi(exponent);
    let weight = guillemin_sternberg_weight(multiplier, &jac, direction)?;
    let lq = T::of(ld.q() as f64).ln();
    let w = T::of(weight.weight.to_f64().unwrap_or(f64::NAN));
    Ok(OrbitWeightReport {
        k,
        direction,
        position: T::of(exponent as f64) * lq,
        leaf_jacobian: (multiplier - Complex::new(T::one(), T::zero())).norm_sqr(),
        transversal_jacobian: jac,
        weight,
        coefficient: w * lq,
    })
}

/// `X^power` acting on `Z_p^2` at precision `p^n`, `p` the characteristic of `q`.
pub fn padic_matrix_model<T: Real>(ld: &LatticeData<T>, n: u32, power: u32) -> Result<PAdicAffineMap> {
    let (p, _) = prime_power(ld.q()).expect("checked at construction");
    let model = ZpModel::new(p, n, 2)?;
    let y = mat_pow(&ld.xi_matrix(), power)?;
    let rows: Vec<Vec<u64>> = y
        .iter()
        .map(|r| r.iter().map(|&e| e.mod_floor(&(model.modulus() as i128)) as u64).collect())
        .collect();
    PAdicAffineMap::new(model, rows, vec![0, 0])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn presets() -> Vec<LatticeData<f64>> {
        vec![
            LatticeData::gaussian(),
            LatticeData::eisenstein(),
            LatticeData::companion(1, 5).unwrap(),
        ]
    }

    #[test]
    fn gaussian_digits() {
        let ld = LatticeData::<f64>::gaussian();
        assert_eq!(ld.digit_set(), &[[0, 0], [1, 0]]);
        assert!((ld.xi() - Complex::new(1.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn digit_sets_are_transversals() {
        for ld in presets() {
            let f = ld.digit_set();
            assert_eq!(f.len() as u64, ld.q());
            assert_eq!(f[0], [0, 0]);
            for i in 0..f.len() {
                for j in 0..i {
                    assert!(ld.divide_by_xi(&sub(&f[i], &f[j])).is_none());
                }
            }
        }
    }

    #[test]
    fn quotient_counts() {
        let g = LatticeData::<f64>::gaussian();
        assert_eq!(quotient_count(&g, 3), BigInt::from(8));
        for ld in presets() {
            for (a, b) in [(1, 1), (1, 2), (2, 3)] {
                assert_eq!(quotient_count(&ld, a + b), quotient_count(&ld, a) * quotient_count(&ld, b));
            }
            for nu in 1..=5u32 {
                let expected = BigInt::from(ld.q()).pow(nu);
                assert_eq!(quotient_count(&ld, nu), expected);
                if ld.q().pow(nu) <= 10_000 {
                    assert_eq!(enumerated_quotient_count(&ld, nu).unwrap() as u64, ld.q().pow(nu));
                }
            }
        }
    }

    #[test]
    fn bijectivity() {
        for ld in presets() {
            for nu in 1..=4u32 {
                if ld.q().pow(nu) <= 10_000 {
                    assert!(one_minus_xi_bijectivity(&ld, nu).unwrap());
                    assert!(one_minus_xi_power_bijectivity(&ld, 2, nu).unwrap());
                }
            }
        }
        let g = LatticeData::<f64>::gaussian();
        assert!(integer_multiplication_bijectivity(&g, 3, 4).unwrap());
        assert!(!integer_multiplication_bijectivity(&g, 2, 4).unwrap());
        assert!(multiplier_bijectivity(&g, &[[1, 0], [0, 2]], 2).is_err());
    }

    #[test]
    fn digits_roundtrip_and_window() {
        let ld = LatticeData::<f64>::gaussian();
        let y = mat_pow(&ld.xi_matrix(), 6).unwrap();
        for v in [[3, -2], [-1, 0], [5, 7]] {
            let t = TateDigits::from_lattice(&ld, &v, 0, 6);
            assert_eq!(coset_key(&y, &t.to_lattice(&ld)), coset_key(&y, &v));
        }
        let one = TateDigits::new(&ld, 0, vec![1, 0, 0]).unwrap();
        let shifted = one.xi_multiply().unwrap();
        assert_eq!(shifted.digits(), &[0, 1, 0]);
        assert_eq!(shifted.xi_divide().unwrap(), one);
        assert!(one.xi_divide().is_err());
        let top = TateDigits::new(&ld, 0, vec![0, 0, 1]).unwrap();
        assert!(matches!(top.xi_multiply(), Err(Error::DepthExhausted(3))));
        assert!(TateDigits::zero(0, 4).xi_multiply().unwrap().is_zero());
        // 1 + 1 = 2 = -i xi^2 has no finite expansion with digits {0, 1}
        let a = TateDigits::new(&ld, 0, vec![1, 0, 0, 0]).unwrap();
        assert!(matches!(a.add(&a, &ld), Err(Error::DepthExhausted(4))));
        let b = TateDigits::new(&ld, 0, vec![0, 1, 0, 0]).unwrap();
        assert_eq!(a.add(&b, &ld).unwrap().digits(), &[1, 1, 0, 0]);
        let s = a.add_mod(&a, &ld).unwrap();
        assert_eq!(coset_key(&mat_pow(&ld.xi_matrix(), 4).unwrap(), &s.to_lattice(&ld)), coset_key(&mat_pow(&ld.xi_matrix(), 4).unwrap(), &[2, 0]));
    }

    #[test]
    fn xi_multiply_injective_on_depth_three() {
        let ld = LatticeData::<f64>::gaussian();
        let mut images = HashSet::new();
        let mut defined = 0;
        for idx in 0..8usize {
            let t = TateDigits::new(&ld, 0, vec![idx & 1, (idx >> 1) & 1, (idx >> 2) & 1]).unwrap();
            if let Ok(u) = t.xi_multiply() {
                defined += 1;
                images.insert(u);
            }
        }
        assert_eq!(defined, 4);
        assert_eq!(images.len(), 4);
    }

    #[test]
    fn duals() {
        let sq = LatticeData::<f64>::gaussian();
        let d = dual_lattice(&sq).unwrap();
        let tp = 2.0 * std::f64::consts::PI;
        assert!((d.basis[0] - Complex::new(tp, 0.0)).norm() < 1e-12);
        assert!((d.basis[1] - Complex::new(0.0, tp)).norm() < 1e-12);
        for ld in presets() {
            let d = dual_lattice(&ld).unwrap();
            assert!(dual_pairing_error(&d, ld.omega1(), ld.omega2()) < 1e-10);
            let dd = dual_of_basis(d.basis[0], d.basis[1]).unwrap();
            assert!((dd.basis[0] - ld.omega1()).norm() < 1e-10);
            assert!((dd.basis[1] - ld.omega2()).norm() < 1e-10);
            for n in 1..=3 {
                let idx = character_index(&ld, n).unwrap();
                assert!((idx - ld.q().pow(n) as f64).abs() < 1e-9 * idx);
            }
        }
        assert!(dual_of_basis(Complex::new(1.0, 0.0), Complex::new(2.0, 0.0)).is_err());
    }

    #[test]
    fn fixed_points() {
        for ld in presets() {
            let zero = solve_fixed_point(&ld, &[0, 0], 1).unwrap();
            assert_eq!(zero.z0, Complex::new(0.0, 0.0));
            for k in 1..=3 {
                let fp = solve_fixed_point(&ld, &[2, -1], k).unwrap();
                assert!(fp.residual < 1e-12);
                assert!(fp.leaf_jacobian > 0.0);
                let c = fixed_point_count(&ld, k).unwrap();
                assert!(c.agrees(), "{c:?}");
            }
            let fp = solve_fixed_point(&ld, &[1, 0], 1).unwrap();
            let xi_inv = 1.0 / ld.xi();
            assert!((fp.leaf_jacobian - (xi_inv - 1.0).norm_sqr()).abs() < 1e-14);
        }
        // a = 1, q = 5: N_1 = 5 closed points of degree 1
        let c = fixed_point_count(&LatticeData::<f64>::companion(1, 5).unwrap(), 1).unwrap();
        assert_eq!(c.point_count, 5);
    }

    #[test]
    fn weights() {
        let ld = LatticeData::<f64>::companion(1, 5).unwrap();
        let lq = 5f64.ln();
        let back = orbit_weight_report(&ld, 1, Direction::Backward).unwrap();
        assert_eq!(back.weight.weight, BigRational::new(1.into(), 5.into()));
        assert!((back.coefficient - lq / 5.0).abs() < 1e-15);
        assert!((back.position + lq).abs() < 1e-15);
        let fwd = orbit_weight_report(&ld, 1, Direction::Forward).unwrap();
        assert!(fwd.weight.weight.is_one());
        assert!((fwd.coefficient - lq).abs() < 1e-15);
        let two = orbit_weight_report(&ld, 2, Direction::Backward).unwrap();
        assert_eq!(two.weight.weight, BigRational::new(1.into(), 25.into()));
    }

    #[test]
    fn json_and_validation() {
        let ld = LatticeData::<f64>::eisenstein();
        let back = LatticeData::<f64>::from_json(&ld.to_json()).unwrap();
        assert_eq!(back.digit_set(), ld.digit_set());
        let bad = LatticeJson {
            omega1: [1.0, 0.0],
            omega2: [0.0, 1.0],
            xi_matrix: [[1, -2], [2, -1]],
        };
        assert!(LatticeData::<f64>::from_json(&bad).is_err());
        assert!(LatticeData::<f64>::companion(4, 4).is_err());
        assert!(ld.is_supersingular());
        assert!(!LatticeData::<f64>::companion(1, 5).unwrap().is_supersingular());
    }

    #[test]
    fn padic_model_has_expected_jacobian() {
        for ld in presets() {
            let m = padic_matrix_model(&ld, 4, 1).unwrap();
            assert_eq!(m.det_valuation().unwrap(), 1);
        }
    }
}
