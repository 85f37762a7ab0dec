use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::model::{PAdicVector, ZpModel};

/// How `|chi|` is read off a character.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormConvention {
    /// `max_j p^{n_j}`: the conductor. Unbounded, so `Delta_p` is elliptic.
    #[default]
    Conductor,
    /// `max_j |a_{n_j, j}|_p`, which is 1 for every nonzero character.
    Literal,
}

/// A character of `Z_p^m`: coordinate `j` is the fraction
/// `numerator_j / p^{level_j}` in `Q_p / Z_p`, with `p` not dividing the
/// numerator when `level_j >= 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PCharacter {
    p: u64,
    parts: Vec<(u64, u32)>,
}

impl PCharacter {
    pub fn trivial(p: u64, m: usize) -> Self {
        Self {
            p,
            parts: vec![(0, 0); m],
        }
    }

    /// Reduces each `numerator / p^level` to lowest terms.
    pub fn from_fractions(p: u64, fractions: &[(u64, u32)]) -> Result<Self> {
        let parts = fractions
            .iter()
            .map(|&(num, level)| {
                let modulus = p
                    .checked_pow(level)
                    .ok_or_else(|| Error::InvalidInput("character level overflows".into()))?;
                let (mut num, mut level) = (num % modulus, level);
                while level > 0 && num % p == 0 {
                    num /= p;
                    level -= 1;
                }
                if num == 0 {
                    level = 0;
                }
                Ok((num, level))
            })
            .collect::<Result<_>>()?;
        Ok(Self { p, parts })
    }

    /// From digit lists `[a_0, a_1, ..., a_{n_j}]` per coordinate, meaning
    /// `sum_l a_l p^{-l}`; the top digit must be nonzero when `n_j >= 1`.
    /// `a_0` is an integer and does not affect the character.
    pub fn from_digits(p: u64, digits: &[Vec<u64>]) -> Result<Self> {
        let mut fractions = Vec::with_capacity(digits.len());
        for d in digits {
            if d.iter().any(|&a| a >= p) {
                return Err(Error::InvalidInput(format!("digits must lie in 0..{p}")));
            }
            let level = d.len().saturating_sub(1) as u32;
            if level >= 1 && *d.last().unwrap() == 0 {
                return Err(Error::InvalidInput("top digit must be nonzero".into()));
            }
            let num = d.iter().skip(1).fold(0u64, |acc, &a| acc * p + a);
            fractions.push((num, level));
        }
        Self::from_fractions(p, &fractions)
    }

    /// The character `theta -> exp(2 pi i b.theta / p^n)` of the finite model.
    pub fn from_index(model: &ZpModel, b: &[u64]) -> Self {
        let fr: Vec<(u64, u32)> = b.iter().map(|&x| (x % model.modulus(), model.n)).collect();
        Self::from_fractions(model.p, &fr).expect("model levels fit")
    }

    /// Inverse of [`PCharacter::from_index`]; fails when a conductor exceeds `p^n`.
    pub fn to_index(&self, model: &ZpModel) -> Result<Vec<u64>> {
        if model.p != self.p || model.m != self.parts.len() {
            return Err(Error::InvalidInput("character does not belong to this model".into()));
        }
        self.parts
            .iter()
            .map(|&(num, level)| {
                if level > model.n {
                    return Err(Error::PrecisionInsufficient(format!(
                        "conductor p^{level} exceeds p^{}",
                        model.n
                    )));
                }
                Ok(num * model.p.pow(model.n - level))
            })
            .collect()
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.parts.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.parts.iter().all(|&(num, _)| num == 0)
    }

    /// `n_j` for each coordinate.
    pub fn levels(&self) -> Vec<u32> {
        self.parts.iter().map(|&(_, l)| l).collect()
    }

    /// `[a_0 = 0, a_1, ..., a_{n_j}]` per coordinate.
    pub fn digits(&self) -> Vec<Vec<u64>> {
        self.parts
            .iter()
            .map(|&(num, level)| {
                let mut d = vec![0u64; level as usize + 1];
                let mut x = num;
                for l in (1..=level as usize).rev() {
                    d[l] = x % self.p;
                    x /= self.p;
                }
                d
            })
            .collect()
    }

    /// Phase of `<chi, theta>` as a fraction of a full turn, `r / p^n`.
    pub fn phase(&self, theta: &PAdicVector) -> Result<(u64, u64)> {
        let model = theta.model();
        let b = self.to_index(&model)?;
        let n = model.modulus() as u128;
        let r = b
            .iter()
            .zip(theta.coords())
            .fold(0u128, |acc, (&x, &t)| (acc + x as u128 * t as u128) % n);
        Ok((r as u64, model.modulus()))
    }

    pub fn pairing<T: Real>(&self, theta: &PAdicVector) -> Result<Complex<T>> {
        let (r, n) = self.phase(theta)?;
        Ok(root_of_unity(r, n))
    }
}

/// `exp(2 pi i r / n)`.
pub fn root_of_unity<T: Real>(r: u64, n: u64) -> Complex<T> {
    let angle = T::of(2.0) * T::PI() * T::of((r % n) as f64) / T::of(n as f64);
    let (s, c) = angle.sin_cos();
    Complex::new(c, s)
}

/// `|chi|` under the chosen convention; `|0| = 0`.
pub fn char_norm_with(chi: &PCharacter, convention: NormConvention) -> u64 {
    if chi.is_trivial() {
        return 0;
    }
    match convention {
        NormConvention::Conductor => chi
            .levels()
            .into_iter()
            .filter(|&l| l >= 1)
            .map(|l| chi.p.pow(l))
            .max()
            .unwrap_or(0),
        NormConvention::Literal => 1,
    }
}

pub fn char_norm(chi: &PCharacter) -> u64 {
    char_norm_with(chi, NormConvention::Conductor)
}

/// `|chi_b|` for the model character indexed by `b`, without building it.
pub fn index_norm(model: &ZpModel, b: &[u64], convention: NormConvention) -> u64 {
    let v = b.iter().map(|&x| model.valuation(x)).min().unwrap_or(model.n);
    if v >= model.n {
        return 0;
    }
    match convention {
        NormConvention::Conductor => model.p.pow(model.n - v),
        NormConvention::Literal => 1,
    }
}
