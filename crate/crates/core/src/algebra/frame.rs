use nalgebra::DMatrix;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::kvector::{KVector, Kind, Graded};
use super::multi_index::{lex_masks, MAX_DIM};
use crate::error::{ensure_finite, Error, Result};

/// A `d × k` matrix whose columns `v_1, …, v_k` represent the simple
/// k-vector `v_1 ∧ … ∧ v_k`.
///
/// Grade-0 frames (no columns) exist only as the orientation placeholder of
/// 0-currents; see [`Frame::empty`].
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    m: DMatrix<f64>,
}

impl Frame {
    /// Frame from its columns. At least one column is required.
    pub fn new(columns: &[Vec<f64>]) -> Result<Self> {
        let first = columns
            .first()
            .ok_or_else(|| Error::InvalidArgument("a frame needs at least one column".into()))?;
        let d = first.len();
        for c in columns {
            if c.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: c.len(),
                });
            }
            ensure_finite("frame column", c)?;
        }
        let m = DMatrix::from_fn(d, columns.len(), |i, j| columns[j][i]);
        Ok(Frame { m })
    }

    /// Frame from a `d × k` matrix with `k ≥ 1`.
    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self> {
        if m.ncols() == 0 {
            return Err(Error::InvalidArgument(
                "a frame needs at least one column".into(),
            ));
        }
        ensure_finite("frame", m.as_slice())?;
        Ok(Frame { m })
    }

    /// The grade-0 orientation in `R^d`; its k-vector is the scalar 1.
    pub fn empty(d: usize) -> Self {
        Frame {
            m: DMatrix::zeros(d, 0),
        }
    }

    /// Columns `e_1, …, e_k` of the identity.
    pub fn standard(d: usize, k: usize) -> Self {
        Frame {
            m: DMatrix::from_fn(d, k, |i, j| if i == j { 1.0 } else { 0.0 }),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn grade(&self) -> usize {
        self.m.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.m.column(j).iter().copied().collect()
    }

    pub fn columns(&self) -> Vec<Vec<f64>> {
        (0..self.grade()).map(|j| self.column(j)).collect()
    }

    /// `F · Q` for a `k × k` matrix `Q`; the k-vector scales by `det Q`.
    pub fn mul_right(&self, q: &DMatrix<f64>) -> Result<Frame> {
        if q.nrows() != self.grade() || q.ncols() != self.grade() {
            return Err(Error::Shape(format!(
                "expected a {k}×{k} matrix, got {}×{}",
                q.nrows(),
                q.ncols(),
                k = self.grade()
            )));
        }
        Ok(Frame { m: &self.m * q })
    }

    /// `J · F` for a linear map `J: R^d → R^m` given as an `m × d` matrix.
    pub fn push_through(&self, jacobian: &DMatrix<f64>) -> Result<Frame> {
        if jacobian.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: jacobian.ncols(),
            });
        }
        Ok(Frame { m: jacobian * &self.m })
    }

    pub fn scale_columns(&self, c: f64) -> Frame {
        Frame { m: &self.m * c }
    }

    /// `<W, V> = det(Wᵀ V)`, valid in any ambient dimension.
    pub fn inner(&self, other: &Frame) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        if self.grade() != other.grade() {
            return Err(Error::GradeMismatch {
                expected: self.grade(),
                got: other.grade(),
            });
        }
        if self.grade() == 0 {
            return Ok(1.0);
        }
        Ok((self.m.transpose() * &other.m).determinant())
    }

    /// Norm of the k-vector, i.e. the k-volume of the spanned parallelotope.
    pub fn volume(&self) -> f64 {
        if self.grade() == 0 {
            return 1.0;
        }
        (self.m.transpose() * &self.m).determinant().max(0.0).sqrt()
    }

    /// True when `FᵀF = I` within `tol` (max-abs entry).
    pub fn is_orthonormal(&self, tol: f64) -> bool {
        let g = self.m.transpose() * &self.m;
        let k = self.grade();
        (0..k).all(|i| (0..k).all(|j| (g[(i, j)] - if i == j { 1.0 } else { 0.0 }).abs() <= tol))
    }

    /// Coefficients of the k-vector: the k×k minors of the column matrix.
    pub fn to_kvector(&self) -> Result<KVector> {
        frame_to_kvector(self)
    }

    /// The same k-vector computed as the iterated wedge of the columns.
    pub fn wedge_fold(&self) -> Result<KVector> {
        let d = self.dim();
        let mut acc = KVector::scalar(d, 1.0)?;
        for j in 0..self.grade() {
            acc = acc.wedge(&KVector::from_components(&self.column(j))?)?;
        }
        Ok(acc)
    }
}

/// Coefficients of `v_1 ∧ … ∧ v_k` as the minors `det F[I, :]`.
pub fn frame_to_kvector(frame: &Frame) -> Result<KVector> {
    let (d, k) = (frame.dim(), frame.grade());
    if d > MAX_DIM {
        return Err(Error::DimensionTooLarge(d));
    }
    if k == 0 {
        return KVector::scalar(d, 1.0);
    }
    let coeffs = lex_masks(d, k)
        .into_iter()
        .map(|mask| {
            let rows: Vec<usize> = (0..d).filter(|b| mask & (1 << b) != 0).collect();
            let sub = DMatrix::from_fn(k, k, |i, j| frame.m[(rows[i], j)]);
            sub.determinant()
        })
        .collect();
    KVector::from_coeffs(d, k, coeffs)
}

/// Orthonormal frame `F` with `∧F = v / |v|`, for a simple nonzero `v`.
///
/// The span is recovered from the contractions `v ⌞ dx_J` over all
/// `(k-1)`-indices `J`. Returns `None` for the zero element. For a non-simple
/// input the frame spans the dominant contraction directions and its wedge
/// has positive but sub-unit correlation with `v/|v|`.
pub fn simple_to_frame<K: Kind>(v: &Graded<K>) -> Option<Frame> {
    let (d, k) = (v.dim(), v.grade());
    let norm = v.euclidean_norm();
    if norm == 0.0 {
        return None;
    }
    if k == 0 {
        return Some(Frame::empty(d));
    }
    let mut candidates: Vec<nalgebra::DVector<f64>> = lex_masks(d, k - 1)
        .into_iter()
        .map(|j_mask| {
            nalgebra::DVector::from_fn(d, |r, _| {
                match super::multi_index::merge_sign(1 << r, j_mask) {
                    Some(sign) => {
                        sign * v.coeffs()[super::multi_index::mask_rank(d, j_mask | (1 << r))]
                    }
                    None => 0.0,
                }
            })
        })
        .collect();
    // Gram-Schmidt with largest-residual pivoting
    let mut basis: Vec<nalgebra::DVector<f64>> = Vec::with_capacity(k);
    for _ in 0..k {
        let (best, best_norm) = candidates
            .iter()
            .enumerate()
            .map(|(i, c)| (i, c.norm()))
            .fold((usize::MAX, 0.0), |acc, (i, n)| if n > acc.1 { (i, n) } else { acc });
        if best == usize::MAX || best_norm <= 1e-300 {
            return None;
        }
        let q = candidates[best].clone() / best_norm;
        for c in candidates.iter_mut() {
            let p = q.dot(c);
            *c -= &q * p;
        }
        basis.push(q);
    }
    let mut m = DMatrix::from_fn(d, k, |i, j| basis[j][i]);
    let sign = frame_to_kvector(&Frame { m: m.clone() })
        .ok()
        .map(|w| super::kvector::dot(w.coeffs(), v.coeffs()))
        .unwrap_or(1.0);
    if sign < 0.0 {
        m.column_mut(0).neg_mut();
    }
    Some(Frame { m })
}

impl Serialize for Frame {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.columns().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Frame {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let cols = Vec::<Vec<f64>>::deserialize(de)?;
        if cols.is_empty() {
            // grade 0; the ambient dimension is fixed up by the owner
            return Ok(Frame::empty(0));
        }
        Frame::new(&cols).map_err(D::Error::custom)
    }
}
