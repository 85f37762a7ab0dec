//! `Z_p^m` at finite precision `p^n`: characters, the conductor norm, the
//! transverse Laplacian `Delta_p`, affine transitions, Haar scaling and the
//! Jacobian identities of the transversal model.
//!
//! Fourier convention: `u_hat(chi) = p^{-nm} sum_theta u(theta) <chi, theta>`,
//! so that `u(theta) = sum_chi u_hat(chi) <chi, -theta>` and the constant 1
//! has `u_hat(0) = 1`.

mod affine;
mod character;
mod function;
mod haar;
mod model;

pub use affine::{
    integer_det, jacobian, jacobian_identities, jacobians, p_valuation, JacobianReport, PAdicAffineMap,
};
pub use character::{
    char_norm, char_norm_with, index_norm, root_of_unity, NormConvention, PCharacter,
};
pub use function::{
    parametrix_defect, resolvent_multiplier, CharacterExpansion, CharacterSpectrum, FunctionJson,
    TransversalFunction,
};
pub use haar::{haar_scaling_check, CellSet};
pub use model::{PAdicVector, ZpModel, DENSE_LIMIT};

/// `u o g`; `g` must be a unit affine map.
pub fn conjugate_by_affine<T: crate::Real>(
    g: &PAdicAffineMap,
    u: &TransversalFunction<T>,
) -> crate::Result<TransversalFunction<T>> {
    u.conjugate(g)
}

/// `|M^T chi|` for every character of the model, against `|chi|`.
pub fn conductor_invariance(g: &PAdicAffineMap, convention: NormConvention) -> crate::Result<bool> {
    let model = g.model();
    let size = model.dense_size()?;
    Ok((0..size).all(|i| {
        let b = model.coords(i);
        index_norm(&model, &g.transpose_apply(&b), convention) == index_norm(&model, &b, convention)
    }))
}
