use num_complex::Complex;
use num_rational::BigRational;
use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Which side of `t = 0` an orbit iterate sits on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    /// `t = +k l(gamma)`: transversally measure preserving, weight 1.
    #[serde(rename = "+")]
    Forward,
    /// `t = -k l(gamma)`: transversal Jacobian `q^{kd}`, weight `q^{-kd}`.
    #[serde(rename = "-")]
    Backward,
}

impl std::str::FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+" | "forward" | "plus" => Ok(Direction::Forward),
            "-" | "backward" | "minus" => Ok(Direction::Backward),
            other => Err(Error::Parse(format!("unknown direction `{other}`"))),
        }
    }
}

fn det<T: Real>(m: &[Vec<T>]) -> T {
    let n = m.len();
    let mut a: Vec<Vec<T>> = m.to_vec();
    let mut acc = T::one();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        if a[piv][col] == T::zero() {
            return T::zero();
        }
        if piv != col {
            a.swap(piv, col);
            acc = -acc;
        }
        acc = acc * a[col][col];
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                let v = a[col][c];
                a[r][c] = a[r][c] - f * v;
            }
        }
    }
    acc
}

/// `sum_j (-1)^j Tr(wedge^j M)`, each trace taken as the sum of principal
/// `j x j` minors.
pub fn alternating_trace<T: Real>(m: &[Vec<T>]) -> T {
    let n = m.len();
    let mut acc = T::zero();
    for mask in 0u32..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let minor: Vec<Vec<T>> = idx
            .iter()
            .map(|&r| idx.iter().map(|&c| m[r][c]).collect())
            .collect();
        let value = if idx.is_empty() { T::one() } else { det(&minor) };
        acc = if idx.len() % 2 == 0 { acc + value } else { acc - value };
    }
    acc
}

/// Real 2x2 matrix of `z -> lambda z` on `C = R^2`.
pub fn complex_multiplier_matrix<T: Real>(lambda: Complex<T>) -> Vec<Vec<T>> {
    vec![vec![lambda.re, -lambda.im], vec![lambda.im, lambda.re]]
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitWeight {
    pub direction: Direction,
    /// `sum_j (-1)^j Tr(wedge^j M) / |det(I - M)|`.
    pub leaf_sign: i8,
    /// `1 / Jac` of the transversal fixed-point map.
    pub transversal_factor: BigRational,
    pub weight: BigRational,
}

/// Local weight of a simple closed-orbit iterate: the leafwise alternating
/// trace over `|det(I - Dphi)|` times the transversal delta factor
/// `1 / Jac`.
///
/// `leaf_multiplier` is the leafwise derivative at the fixed point as a
/// complex scalar, `transversal_jacobian` the Jacobian of `v -> phi(v) - v`
/// on the transversal.
pub fn guillemin_sternberg_weight<T: Real>(
    leaf_multiplier: Complex<T>,
    transversal_jacobian: &BigRational,
    direction: Direction,
) -> Result<OrbitWeight> {
    if !transversal_jacobian.is_positive() {
        return Err(Error::InvalidInput("transversal Jacobian must be positive".into()));
    }
    let m = complex_multiplier_matrix(leaf_multiplier);
    let id_minus: Vec<Vec<T>> = (0..2)
        .map(|i| {
            (0..2)
                .map(|j| if i == j { T::one() - m[i][j] } else { -m[i][j] })
                .collect()
        })
        .collect();
    let denom = det(&id_minus).abs();
    if !(denom.to_f64_lossy() > 1e-12) {
        return Err(Error::Degenerate(denom.to_f64_lossy()));
    }
    let ratio = (alternating_trace(&m) / denom).to_f64_lossy();
    let leaf_sign = if (ratio - 1.0).abs() < 1e-9 {
        1
    } else if (ratio + 1.0).abs() < 1e-9 {
        -1
    } else {
        return Err(Error::Internal(format!("leafwise Lefschetz ratio {ratio} is not a sign")));
    };
    let transversal_factor = transversal_jacobian.recip();
    let weight = if leaf_sign > 0 {
        transversal_factor.clone()
    } else {
        -transversal_factor.clone()
    };
    Ok(OrbitWeight {
        direction,
        leaf_sign,
        transversal_factor,
        weight,
    })
}
