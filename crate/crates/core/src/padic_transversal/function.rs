use std::collections::BTreeMap;

use num_complex::Complex;
use rustfft::{FftDirection, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::affine::PAdicAffineMap;
use super::character::{index_norm, root_of_unity, NormConvention, PCharacter};
use super::model::{PAdicVector, ZpModel};

/// A complex function on `(Z/p^n)^m`, stored as a dense table.
#[derive(Clone, Debug, PartialEq)]
pub struct TransversalFunction<T> {
    model: ZpModel,
    values: Vec<Complex<T>>,
}

/// Applies a 1-D transform of length `p^n` along every axis, in place.
fn transform_axes<T: Real>(model: &ZpModel, data: &mut [Complex<T>], direction: FftDirection) {
    let len = model.modulus() as usize;
    let fft = FftPlanner::new().plan_fft(len, direction);
    let mut line = vec![Complex::new(T::zero(), T::zero()); len];
    let mut stride = 1usize;
    for _ in 0..model.m {
        let block = stride * len;
        for base in (0..data.len()).step_by(block) {
            for offset in 0..stride {
                let start = base + offset;
                for (i, slot) in line.iter_mut().enumerate() {
                    *slot = data[start + i * stride];
                }
                fft.process(&mut line);
                for (i, slot) in line.iter().enumerate() {
                    data[start + i * stride] = *slot;
                }
            }
        }
        stride = block;
    }
}

impl<T: Real> TransversalFunction<T> {
    pub fn new(model: ZpModel, values: Vec<Complex<T>>) -> Result<Self> {
        let size = model.dense_size()?;
        if values.len() != size {
            return Err(Error::InvalidInput(format!(
                "expected {size} values, got {}",
                values.len()
            )));
        }
        Ok(Self { model, values })
    }

    pub fn from_fn(model: ZpModel, mut f: impl FnMut(&[u64]) -> Complex<T>) -> Result<Self> {
        let size = model.dense_size()?;
        let values = (0..size).map(|i| f(&model.coords(i))).collect();
        Ok(Self { model, values })
    }

    pub fn constant(model: ZpModel, c: Complex<T>) -> Result<Self> {
        Self::from_fn(model, |_| c)
    }

    /// `theta -> <chi, -theta>`.
    pub fn character(model: ZpModel, chi: &PCharacter) -> Result<Self> {
        let b = chi.to_index(&model)?;
        let n = model.modulus();
        Self::from_fn(model, |theta| {
            let r = b
                .iter()
                .zip(theta)
                .fold(0u128, |acc, (&x, &t)| (acc + x as u128 * t as u128) % n as u128);
            root_of_unity(n - r as u64, n)
        })
    }

    pub fn model(&self) -> ZpModel {
        self.model
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn at(&self, theta: &[u64]) -> Complex<T> {
        self.values[self.model.index(theta)]
    }

    pub fn eval(&self, theta: &PAdicVector) -> Complex<T> {
        self.at(theta.coords())
    }

    /// `u_hat(chi) = p^{-nm} sum_theta u(theta) <chi, theta>`.
    pub fn fourier(&self) -> CharacterSpectrum<T> {
        let mut data = self.values.clone();
        transform_axes(&self.model, &mut data, FftDirection::Inverse);
        let scale = T::one() / T::of_usize(data.len());
        for c in data.iter_mut() {
            *c = *c * scale;
        }
        CharacterSpectrum {
            model: self.model,
            coeffs: data,
        }
    }

    /// `Delta_p u = sum_chi |chi|^2 u_hat(chi) <chi, -theta>`.
    pub fn delta_p(&self, convention: NormConvention) -> Self {
        self.fourier()
            .map_norm(convention, |norm, c| c * T::of((norm * norm) as f64))
            .inverse()
    }

    /// `(sum_chi (1 + |chi|^2)^k |u_hat(chi)|^2)^{1/2}`.
    pub fn sobolev_norm(&self, k: i32, convention: NormConvention) -> T {
        self.fourier().sobolev_norm(k, convention)
    }

    /// `p^{-nm} sum_theta |u|^2`, the squared `L^2` norm for Haar measure.
    pub fn l2_norm_sq(&self) -> T {
        let s = self.values.iter().fold(T::zero(), |acc, c| acc + c.norm_sqr());
        s / T::of_usize(self.values.len())
    }

    /// `u o g` for a unit affine map.
    pub fn conjugate(&self, g: &PAdicAffineMap) -> Result<Self> {
        if g.model() != self.model {
            return Err(Error::InvalidInput("map and function live on different models".into()));
        }
        if !g.unit_flag() {
            return Err(Error::NonUnit(g.det_valuation().unwrap_or(self.model.n)));
        }
        Self::from_fn(self.model, |theta| self.at(&g.apply(theta)))
    }

    /// Pullback along reduction `(Z/p^{n+1})^m -> (Z/p^n)^m`.
    pub fn refine(&self) -> Result<Self> {
        let fine = self.model.refined()?;
        let n = self.model.modulus();
        Self::from_fn(fine, |theta| {
            let coarse: Vec<u64> = theta.iter().map(|&t| t % n).collect();
            self.at(&coarse)
        })
    }

    /// `(1 + Delta_p + lambda)^{-1} (1 + Delta_p) u`.
    pub fn resolvent_apply(&self, lambda: T, convention: NormConvention) -> Self {
        self.fourier()
            .map_norm(convention, |norm, c| c * resolvent_multiplier(norm, lambda))
            .inverse()
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.values
            .iter()
            .zip(&other.values)
            .fold(T::zero(), |acc, (a, b)| acc.max((*a - *b).norm()))
    }
}

/// `(1 + |chi|^2) / (1 + |chi|^2 + lambda)`.
pub fn resolvent_multiplier<T: Real>(norm: u64, lambda: T) -> T {
    let a = T::one() + T::of((norm as f64) * (norm as f64));
    a / (a + lambda)
}

/// `1 - resolvent_multiplier` at each conductor `1, p, ..., p^n` (1 standing
/// for the trivial character, whose norm is 0).
pub fn parametrix_defect<T: Real>(model: &ZpModel, lambda: T, convention: NormConvention) -> Vec<(u64, T)> {
    let mut norms: Vec<u64> = vec![0];
    for l in 1..=model.n {
        let b: Vec<u64> = (0..model.m)
            .map(|j| if j == 0 { model.p.pow(model.n - l) } else { 0 })
            .collect();
        norms.push(index_norm(model, &b, convention));
    }
    norms.dedup();
    norms
        .into_iter()
        .map(|norm| (norm, T::one() - resolvent_multiplier(norm, lambda)))
        .collect()
}

/// Fourier coefficients of a dense function, indexed like the function.
#[derive(Clone, Debug, PartialEq)]
pub struct CharacterSpectrum<T> {
    model: ZpModel,
    coeffs: Vec<Complex<T>>,
}

impl<T: Real> CharacterSpectrum<T> {
    pub fn model(&self) -> ZpModel {
        self.model
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    pub fn at_index(&self, b: &[u64]) -> Complex<T> {
        self.coeffs[self.model.index(b)]
    }

    pub fn get(&self, chi: &PCharacter) -> Result<Complex<T>> {
        Ok(self.at_index(&chi.to_index(&self.model)?))
    }

    /// `u(theta) = sum_chi u_hat(chi) <chi, -theta>`.
    pub fn inverse(&self) -> TransversalFunction<T> {
        let mut data = self.coeffs.clone();
        transform_axes(&self.model, &mut data, FftDirection::Forward);
        TransversalFunction {
            model: self.model,
            values: data,
        }
    }

    pub fn map_norm(&self, convention: NormConvention, f: impl Fn(u64, Complex<T>) -> Complex<T>) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| f(index_norm(&self.model, &self.model.coords(i), convention), c))
            .collect();
        Self {
            model: self.model,
            coeffs,
        }
    }

    pub fn sobolev_norm(&self, k: i32, convention: NormConvention) -> T {
        self.coeffs
            .iter()
            .enumerate()
            .fold(T::zero(), |acc, (i, c)| {
                let norm = index_norm(&self.model, &self.model.coords(i), convention) as f64;
                acc + T::of(1.0 + norm * norm).powi(k) * c.norm_sqr()
            })
            .sqrt()
    }

    pub fn l2_norm_sq(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |acc, c| acc + c.norm_sqr())
    }

    /// Drops coefficients with `|c| <= threshold`.
    pub fn to_expansion(&self, threshold: T) -> CharacterExpansion<T> {
        let terms = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() > threshold)
            .map(|(i, &c)| (self.model.coords(i), c))
            .collect();
        CharacterExpansion {
            model: self.model,
            terms,
        }
    }
}

/// `u(theta) = sum_b c_b <chi_b, -theta>` with finitely many nonzero `c_b`;
/// usable when `p^{nm}` is too large for a dense table.
#[derive(Clone, Debug, PartialEq)]
pub struct CharacterExpansion<T> {
    model: ZpModel,
    terms: BTreeMap<Vec<u64>, Complex<T>>,
}

impl<T: Real> CharacterExpansion<T> {
    pub fn new(model: ZpModel) -> Self {
        Self {
            model,
            terms: BTreeMap::new(),
        }
    }

    pub fn with_term(mut self, b: Vec<u64>, c: Complex<T>) -> Result<Self> {
        if b.len() != self.model.m {
            return Err(Error::InvalidInput("character index has the wrong dimension".into()));
        }
        let b: Vec<u64> = b.into_iter().map(|x| x % self.model.modulus()).collect();
        let slot = self.terms.entry(b).or_insert(Complex::new(T::zero(), T::zero()));
        *slot = *slot + c;
        Ok(self)
    }

    pub fn model(&self) -> ZpModel {
        self.model
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u64>, Complex<T>> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn evaluate(&self, theta: &[u64]) -> Complex<T> {
        let n = self.model.modulus();
        self.terms
            .iter()
            .fold(Complex::new(T::zero(), T::zero()), |acc, (b, &c)| {
                let r = b
                    .iter()
                    .zip(theta)
                    .fold(0u128, |s, (&x, &t)| (s + x as u128 * (t % n) as u128) % n as u128);
                acc + c * root_of_unity::<T>(n - r as u64, n)
            })
    }

    pub fn delta_p(&self, convention: NormConvention) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(b, &c)| {
                let norm = index_norm(&self.model, b, convention) as f64;
                (b.clone(), c * T::of(norm * norm))
            })
            .collect();
        Self {
            model: self.model,
            terms,
        }
    }

    /// `u o g`: `c_b` moves to `M^T b` with the phase `<chi_b, -B>`.
    pub fn conjugate(&self, g: &PAdicAffineMap) -> Result<Self> {
        if g.model() != self.model {
            return Err(Error::InvalidInput("map and function live on different models".into()));
        }
        if !g.unit_flag() {
            return Err(Error::NonUnit(g.det_valuation().unwrap_or(self.model.n)));
        }
        let n = self.model.modulus();
        let mut out = Self::new(self.model);
        for (b, &c) in &self.terms {
            let r = b
                .iter()
                .zip(g.shift())
                .fold(0u128, |s, (&x, &t)| (s + x as u128 * t as u128) % n as u128);
            out = out.with_term(g.transpose_apply(b), c * root_of_unity::<T>(n - r as u64, n))?;
        }
        Ok(out)
    }

    pub fn sobolev_norm(&self, k: i32, convention: NormConvention) -> T {
        self.terms
            .iter()
            .fold(T::zero(), |acc, (b, c)| {
                let norm = index_norm(&self.model, b, convention) as f64;
                acc + T::of(1.0 + norm * norm).powi(k) * c.norm_sqr()
            })
            .sqrt()
    }

    pub fn to_dense(&self) -> Result<TransversalFunction<T>> {
        let size = self.model.dense_size()?;
        let mut coeffs = vec![Complex::new(T::zero(), T::zero()); size];
        for (b, &c) in &self.terms {
            coeffs[self.model.index(b)] = c;
        }
        Ok(CharacterSpectrum {
            model: self.model,
            coeffs,
        }
        .inverse())
    }
}

/// `{p, n, m, data}` with `data` as `[re, im]` pairs in index order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionJson {
    pub p: u64,
    pub n: u32,
    pub m: usize,
    pub data: Vec<[f64; 2]>,
}

impl<T: Real> TransversalFunction<T> {
    pub fn to_json(&self) -> FunctionJson {
        FunctionJson {
            p: self.model.p,
            n: self.model.n,
            m: self.model.m,
            data: self
                .values
                .iter()
                .map(|c| [c.re.to_f64_lossy(), c.im.to_f64_lossy()])
                .collect(),
        }
    }

    pub fn from_json(json: &FunctionJson) -> Result<Self> {
        let model = ZpModel::new(json.p, json.n, json.m)?;
        Self::new(
            model,
            json.data
                .iter()
                .map(|&[re, im]| Complex::new(T::of(re), T::of(im)))
                .collect(),
        )
    }
}
