use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::frame::Frame;
use super::kvector::{Graded, Kind};
use super::multi_index::mask_rank;
use crate::error::{Error, Result};

/// One term `σ · (p ∧ q)` of a 2-vector's canonical decomposition, with
/// `p, q` orthonormal.
#[derive(Clone, Debug)]
pub struct PlaneComponent {
    pub sigma: f64,
    pub frame: Frame,
}

/// Decomposes a 2-(co)vector into mutually orthogonal simple planes.
///
/// With `A` the antisymmetric matrix `A[i][j] = v_{ij}`, the canonical form
/// `A = Σ σ_i (p_i q_iᵀ − q_i p_iᵀ)` gives `v = Σ σ_i p_i ∧ q_i`. The `σ_i`
/// are the distinct-plane singular values, sorted descending; zero terms
/// are omitted.
pub fn spectral_decompose_2vector<K: Kind>(v: &Graded<K>) -> Result<Vec<PlaneComponent>> {
    if v.grade() != 2 {
        return Err(Error::GradeMismatch {
            expected: 2,
            got: v.grade(),
        });
    }
    let d = v.dim();
    let a = antisymmetric_matrix(v);
    let scale = a.amax();
    if scale == 0.0 {
        return Ok(Vec::new());
    }
    let ata = a.transpose() * &a;
    let eig = SymmetricEigen::new(ata);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));

    let tol = 1e-13 * scale;
    let mut taken: Vec<DVector<f64>> = Vec::new();
    let mut out = Vec::new();
    for idx in order {
        let mut u: DVector<f64> = eig.eigenvectors.column(idx).into_owned();
        // re-orthogonalize twice against the planes already extracted
        for _ in 0..2 {
            for t in &taken {
                let c = t.dot(&u);
                u -= t * c;
            }
        }
        let un = u.norm();
        if un < 1e-8 {
            continue;
        }
        u /= un;
        let au = &a * &u;
        let sigma = au.norm();
        if sigma <= tol {
            break;
        }
        let mut p = au / sigma;
        let c = p.dot(&u);
        p -= &u * c;
        p /= p.norm();
        // a plane (p, u) with A u = σ p carries σ p ∧ u
        let frame = Frame::from_matrix(DMatrix::from_fn(d, 2, |i, j| if j == 0 { p[i] } else { u[i] }))?;
        taken.push(p);
        taken.push(u);
        out.push(PlaneComponent { sigma, frame });
    }
    // σ from the projection is more accurate than ‖A u‖ when planes are
    // nearly degenerate
    for comp in out.iter_mut() {
        let w = comp.frame.to_kvector()?;
        comp.sigma = super::kvector::dot(w.coeffs(), v.coeffs()).abs();
    }
    out.sort_by(|x, y| y.sigma.total_cmp(&x.sigma));
    Ok(out)
}

/// `A[i][j] = v_{ij}` for `i < j`, antisymmetrized.
pub(crate) fn antisymmetric_matrix<K: Kind>(v: &Graded<K>) -> DMatrix<f64> {
    let d = v.dim();
    let mut a = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in (i + 1)..d {
            let c = v.coeffs()[mask_rank(d, (1 << i) | (1 << j))];
            a[(i, j)] = c;
            a[(j, i)] = -c;
        }
    }
    a
}
