use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field_curve::is_prime;

/// Largest `p^{nm}` stored as a dense table.
pub const DENSE_LIMIT: u128 = 1_000_000;

/// The finite group `(Z/p^n)^m` standing in for `Z_p^m` at precision `p^n`.
///
/// Elements are indexed by `sum_j theta_j p^{n j}`, coordinate 0 fastest.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ZpModel {
    pub p: u64,
    pub n: u32,
    pub m: usize,
}

impl ZpModel {
    pub fn new(p: u64, n: u32, m: usize) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if n == 0 || m == 0 {
            return Err(Error::InvalidInput("precision and dimension must be positive".into()));
        }
        p.checked_pow(n)
            .ok_or_else(|| Error::InvalidInput(format!("{p}^{n} overflows")))?;
        Ok(Self { p, n, m })
    }

    /// `p^n`.
    pub fn modulus(&self) -> u64 {
        self.p.pow(self.n)
    }

    /// `p^{nm}` without overflow.
    pub fn order(&self) -> u128 {
        (self.modulus() as u128).saturating_pow(self.m as u32)
    }

    pub fn dense_size(&self) -> Result<usize> {
        let size = self.order();
        if size > DENSE_LIMIT {
            return Err(Error::TooLarge(size));
        }
        Ok(size as usize)
    }

    pub fn index(&self, coords: &[u64]) -> usize {
        let n = self.modulus() as usize;
        coords
            .iter()
            .rev()
            .fold(0usize, |acc, &c| acc * n + (c % self.modulus()) as usize)
    }

    pub fn coords(&self, mut index: usize) -> Vec<u64> {
        let n = self.modulus() as usize;
        (0..self.m)
            .map(|_| {
                let c = index % n;
                index /= n;
                c as u64
            })
            .collect()
    }

    /// Same `p` and `m`, precision `n + 1`.
    pub fn refined(&self) -> Result<Self> {
        Self::new(self.p, self.n + 1, self.m)
    }

    pub fn reduce(&self, x: i128) -> u64 {
        x.rem_euclid(self.modulus() as i128) as u64
    }

    /// `v_p(x)` capped at `n` (`x = 0` mod `p^n` reports `n`).
    pub fn valuation(&self, x: u64) -> u32 {
        let mut x = x % self.modulus();
        if x == 0 {
            return self.n;
        }
        let mut v = 0;
        while x % self.p == 0 {
            x /= self.p;
            v += 1;
        }
        v
    }
}

/// An element of `(Z/p^n)^m`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PAdicVector {
    model: ZpModel,
    coords: Vec<u64>,
}

impl PAdicVector {
    pub fn new(model: ZpModel, coords: Vec<u64>) -> Result<Self> {
        if coords.len() != model.m {
            return Err(Error::InvalidInput(format!(
                "expected {} coordinates, got {}",
                model.m,
                coords.len()
            )));
        }
        let coords = coords.into_iter().map(|c| c % model.modulus()).collect();
        Ok(Self { model, coords })
    }

    pub fn zero(model: ZpModel) -> Self {
        Self {
            model,
            coords: vec![0; model.m],
        }
    }

    pub fn model(&self) -> ZpModel {
        self.model
    }

    pub fn coords(&self) -> &[u64] {
        &self.coords
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.model.modulus() as u128;
        let coords = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| ((*a as u128 + *b as u128) % n) as u64)
            .collect();
        Self {
            model: self.model,
            coords,
        }
    }

    pub fn neg(&self) -> Self {
        let n = self.model.modulus();
        Self {
            model: self.model,
            coords: self.coords.iter().map(|a| (n - a) % n).collect(),
        }
    }

    pub fn scale(&self, k: u64) -> Self {
        let n = self.model.modulus() as u128;
        Self {
            model: self.model,
            coords: self
                .coords
                .iter()
                .map(|a| ((*a as u128 * k as u128) % n) as u64)
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_roundtrip() {
        let m = ZpModel::new(3, 2, 2).unwrap();
        assert_eq!(m.dense_size().unwrap(), 81);
        for i in 0..81 {
            assert_eq!(m.index(&m.coords(i)), i);
        }
    }

    #[test]
    fn rejects_huge_dense() {
        let m = ZpModel::new(5, 5, 2).unwrap();
        assert!(matches!(m.dense_size(), Err(Error::TooLarge(_))));
        assert!(ZpModel::new(4, 2, 2).is_err());
    }

    #[test]
    fn ring_ops() {
        let m = ZpModel::new(5, 2, 2).unwrap();
        let a = PAdicVector::new(m, vec![24, 7]).unwrap();
        let b = PAdicVector::new(m, vec![3, 30]).unwrap();
        assert_eq!(a.add(&b).coords(), &[2, 12]);
        assert_eq!(a.add(&a.neg()), PAdicVector::zero(m));
        assert_eq!(a.scale(5).coords(), &[20, 10]);
        assert_eq!(m.valuation(50), 2);
        assert_eq!(m.valuation(10), 1);
    }
}
