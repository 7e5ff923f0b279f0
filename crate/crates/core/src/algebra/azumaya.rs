//! Azumaya tests.

use super::StructAlgebra;
use crate::linalg;
use crate::rational::Q;

/// Decides whether A is Azumaya over its base R.
///
/// Works at the residue R̄ (a product of fields), viewed over K: the center
/// must be exactly R̄ and the regular trace form must be nondegenerate.
/// Nondegeneracy gives semisimplicity (the residue characteristic never
/// divides the degree, which is a power of two here), and a center equal to
/// R̄ makes each simple factor central over its residue field.
pub fn is_azumaya(a: &StructAlgebra) -> bool {
    let r = a.residue_algebra();
    let k = *r.base().k();
    if r.center_dim_k() != r.base().dim() {
        return false;
    }
    let n = r.k_len();
    let basis: Vec<_> = (0..n).map(|i| r.k_basis(i)).collect();
    let traces: Vec<Q> = basis
        .iter()
        .map(|x| {
            let mut t = Q::zero();
            for (j, b) in basis.iter().enumerate() {
                let v = r.to_k(&r.mul(x, b));
                t = k.add(&t, &v[j]);
            }
            t
        })
        .collect();
    let gram: linalg::Matrix = basis
        .iter()
        .map(|x| {
            basis
                .iter()
                .map(|y| {
                    let v = r.to_k(&r.mul(x, y));
                    v.iter().zip(&traces).fold(Q::zero(), |acc, (c, t)| {
                        if c.is_zero() || t.is_zero() {
                            acc
                        } else {
                            k.add(&acc, &k.mul(c, t))
                        }
                    })
                })
                .collect()
        })
        .collect();
    linalg::rank(&k, &gram) == n
}

/// Determinant criterion: the map A ⊗ A^op → End_R(A), a ⊗ b ↦ (x ↦ a x b),
/// flattened to K, must have nonzero determinant (the K-determinant of an
/// R-linear map is the norm of its R-determinant, hence nonzero exactly
/// when that is a unit). Quadratic in dim A squared; meant for small
/// algebras.
pub fn is_azumaya_by_determinant(a: &StructAlgebra) -> bool {
    let n = a.dim();
    let r = a.base();
    let d = r.dim();
    let k = *r.k();
    let size = n * n * d;
    let mut m = linalg::zero_matrix(size, size);
    for i in 0..n {
        for j in 0..n {
            for b in 0..d {
                let col = (i * n + j) * d + b;
                let left = a.scale(&r.k_basis(b), &a.basis(i));
                for kk in 0..n {
                    let img = a.mul(&a.mul(&left, &a.basis(kk)), &a.basis(j));
                    for (row_elem, c) in img.iter().enumerate() {
                        for (t, q) in c.0.iter().enumerate() {
                            m[(kk * n + row_elem) * d + t][col] = q.clone();
                        }
                    }
                }
            }
        }
    }
    !linalg::determinant(&k, &m).is_zero()
}
