use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{Error, Result};

use super::affine::PAdicAffineMap;
use super::model::ZpModel;

/// A union of precision-`n` cells `theta + p^n Z_p^m`, by cell index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellSet {
    model: ZpModel,
    cells: BTreeSet<usize>,
}

impl CellSet {
    pub fn all(model: ZpModel) -> Result<Self> {
        let size = model.dense_size()?;
        Ok(Self {
            model,
            cells: (0..size).collect(),
        })
    }

    pub fn from_indices(model: ZpModel, cells: impl IntoIterator<Item = usize>) -> Result<Self> {
        let size = model.dense_size()?;
        let cells: BTreeSet<usize> = cells.into_iter().collect();
        if cells.iter().any(|&c| c >= size) {
            return Err(Error::InvalidInput("cell index out of range".into()));
        }
        Ok(Self { model, cells })
    }

    /// `center + p^r Z_p^m` for `r <= n`.
    pub fn ball(model: ZpModel, center: &[u64], r: u32) -> Result<Self> {
        if r > model.n {
            return Err(Error::PrecisionInsufficient(format!(
                "ball radius p^-{r} is finer than p^-{}",
                model.n
            )));
        }
        let size = model.dense_size()?;
        let step = model.p.pow(r);
        let cells = (0..size).filter(|&i| {
            model
                .coords(i)
                .iter()
                .zip(center)
                .all(|(t, c)| (t + step - c % step) % step == 0)
        });
        Self::from_indices(model, cells.collect::<Vec<_>>())
    }

    pub fn model(&self) -> ZpModel {
        self.model
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn contains(&self, coords: &[u64]) -> bool {
        self.cells.contains(&self.model.index(coords))
    }

    pub fn cells(&self) -> impl Iterator<Item = usize> + '_ {
        self.cells.iter().copied()
    }

    /// Haar measure with `mu(Z_p^m) = 1`.
    pub fn measure(&self) -> BigRational {
        BigRational::new(
            BigInt::from(self.cells.len()),
            BigInt::from(self.model.order()),
        )
    }
}

/// `mu(M A) / mu(A)` by counting image cells.
///
/// The count is the true Haar ratio exactly when the kernel `K` of `M` mod
/// `p^n` has `p^v` elements (`v = v_p(det M) < n`) and `A + K = A`; otherwise
/// the image is not resolved at this precision.
pub fn haar_scaling_check(map: &PAdicAffineMap, a: &CellSet) -> Result<BigRational> {
    let model = map.model();
    if a.model() != model {
        return Err(Error::InvalidInput("cell set and map live on different models".into()));
    }
    if a.is_empty() {
        return Err(Error::InvalidInput("empty cell set has no measure ratio".into()));
    }
    let v = map.det_valuation()?;
    let size = model.dense_size()?;
    let zero = vec![0u64; model.m];
    let kernel: Vec<Vec<u64>> = (0..size)
        .map(|i| model.coords(i))
        .filter(|t| map.apply_linear(t) == zero)
        .collect();
    if kernel.len() as u128 != (model.p as u128).pow(v) {
        return Err(Error::PrecisionInsufficient(format!(
            "kernel has {} elements, expected p^{v}",
            kernel.len()
        )));
    }
    let nmod = model.modulus();
    for cell in a.cells() {
        let t = model.coords(cell);
        for k in &kernel {
            let s: Vec<u64> = t.iter().zip(k).map(|(x, y)| (x + y) % nmod).collect();
            if !a.contains(&s) {
                return Err(Error::PrecisionInsufficient(
                    "cell set is not a union of kernel cosets".into(),
                ));
            }
        }
    }
    let image: BTreeSet<usize> = a
        .cells()
        .map(|c| model.index(&map.apply(&model.coords(c))))
        .collect();
    Ok(BigRational::new(
        BigInt::from(image.len()),
        BigInt::from(a.len()),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    #[test]
    fn multiplication_by_five() {
        let model = ZpModel::new(5, 2, 1).unwrap();
        let m = PAdicAffineMap::linear(model, &[vec![5]]).unwrap();
        let r = haar_scaling_check(&m, &CellSet::all(model).unwrap()).unwrap();
        assert_eq!(r, BigRational::new(1.into(), 5.into()));
    }

    #[test]
    fn identity_and_balls() {
        let model = ZpModel::new(3, 3, 2).unwrap();
        let id = PAdicAffineMap::identity(model);
        let ball = CellSet::ball(model, &[1, 2], 1).unwrap();
        assert_eq!(ball.len(), 81);
        assert_eq!(ball.measure(), BigRational::new(1.into(), 9.into()));
        assert!(haar_scaling_check(&id, &ball).unwrap().is_one());
        let m = PAdicAffineMap::linear(model, &[vec![3, 0], vec![0, 1]]).unwrap();
        let r = haar_scaling_check(&m, &ball).unwrap();
        assert_eq!(r, BigRational::new(1.into(), 3.into()));
    }

    #[test]
    fn unresolved_image() {
        let model = ZpModel::new(2, 2, 1).unwrap();
        let m = PAdicAffineMap::linear(model, &[vec![2]]).unwrap();
        let single = CellSet::from_indices(model, [1]).unwrap();
        assert!(matches!(
            haar_scaling_check(&m, &single),
            Err(Error::PrecisionInsufficient(_))
        ));
        let zero = PAdicAffineMap::linear(model, &[vec![4]]).unwrap();
        assert!(haar_scaling_check(&zero, &CellSet::all(model).unwrap()).is_err());
    }
}
