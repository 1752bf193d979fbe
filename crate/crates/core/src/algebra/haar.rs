use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use super::frame::Frame;
use crate::error::{Error, Result};

/// Draws an orthonormal `d × k` frame whose span is Haar-distributed on the
/// Grassmannian `Gr(d, k)`, with a uniformly random orientation.
///
/// The frame is the orthogonal polar factor `U Vᵀ` of a Gaussian matrix
/// `G = U Σ Vᵀ`. The polar factor is independent of the SVD's sign
/// conventions and satisfies `polar(R G) = R polar(G)` for rotations `R`,
/// so its law inherits the rotation invariance of `G`.
pub fn haar_frame_sample<R: Rng + ?Sized>(d: usize, k: usize, rng: &mut R) -> Result<Frame> {
    if k == 0 {
        return Ok(Frame::empty(d));
    }
    if k > d {
        return Err(Error::GradeOverflow { j: k, k: 0, d });
    }
    loop {
        let g = DMatrix::from_fn(d, k, |_, _| rng.sample::<f64, _>(StandardNormal));
        let svd = g.svd(true, true);
        // rank-deficient draws have probability zero; redraw defensively
        if svd.singular_values.iter().any(|&s| s < 1e-12) {
            continue;
        }
        let (u, v_t) = match (svd.u, svd.v_t) {
            (Some(u), Some(v_t)) => (u, v_t),
            _ => return Err(Error::Solver("SVD failed to produce singular vectors".into())),
        };
        return Frame::from_matrix(u * v_t);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn frames_are_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for d in 1..6 {
            for k in 1..=d {
                let f = haar_frame_sample(d, k, &mut rng).unwrap();
                assert_eq!((f.dim(), f.grade()), (d, k));
                assert!(f.is_orthonormal(1e-10));
            }
        }
    }

    #[test]
    fn full_grade_is_orthogonal_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = haar_frame_sample(4, 4, &mut rng).unwrap();
        let q = f.matrix();
        let qqt = q * q.transpose();
        assert!((qqt - DMatrix::identity(4, 4)).amax() < 1e-10);
        assert!((q.determinant().abs() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn unit_vectors_have_vanishing_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 100_000;
        let d = 3;
        let mut mean = vec![0.0; d];
        for _ in 0..n {
            let f = haar_frame_sample(d, 1, &mut rng).unwrap();
            for (m, x) in mean.iter_mut().zip(f.column(0)) {
                *m += x / n as f64;
            }
        }
        let norm = mean.iter().map(|m| m * m).sum::<f64>().sqrt();
        assert!(norm < 0.02, "mean norm {norm}");
    }

    #[test]
    fn grade_overflow() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(haar_frame_sample(2, 3, &mut rng).is_err());
        assert_eq!(haar_frame_sample(2, 0, &mut rng).unwrap().grade(), 0);
    }
}
