//! Mass and comass norms of k-vectors and k-covectors.
//!
//! Comass is the largest pairing with a unit simple k-vector; mass is its
//! dual norm, equivalently the cheapest decomposition into simple pieces.
//! Both are available exactly when every element of the grade is simple
//! (`k ∈ {0, 1, d-1, d}`) and for `k = 2` through the canonical form of
//! the antisymmetric coefficient matrix. For other grades comass is
//! estimated from below by multi-start ascent over orthonormal frames, and
//! mass is bracketed by a certified interval.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::frame::{simple_to_frame, Frame};
use super::haar::haar_frame_sample;
use super::kvector::{dot, Graded, KCovector, KVector, Kind};
use super::multi_index::{lex_masks, mask_rank, merge_sign};
use super::spectral::spectral_decompose_2vector;
use crate::error::{Error, Result};

/// How to compute the comass.
#[derive(Clone, Copy, Debug)]
pub enum ComassMode {
    Exact,
    /// Multi-start frame ascent; the value is a certified lower bound.
    Estimate { restarts: usize, seed: u64 },
}

/// How to compute the mass.
#[derive(Clone, Copy, Debug)]
pub enum MassMode {
    Exact,
    /// Certified `[lower, upper]` bracket from a greedy simple decomposition.
    Bounds { restarts: usize, seed: u64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct ComassResult {
    pub value: f64,
    /// Orthonormal frame attaining `value` (exact) or the best found (estimate).
    pub certificate: Frame,
    pub exact: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct MassResult {
    pub lower: f64,
    pub upper: f64,
    /// Simple pieces `c_i · ∧F_i` with orthonormal `F_i` and `c_i ≥ 0`.
    pub decomposition: Vec<(f64, Frame)>,
    pub exact: bool,
}

/// True when every k-vector in `Λ_k R^d` is simple.
pub fn all_simple(d: usize, k: usize) -> bool {
    k <= 1 || k + 1 >= d
}

/// True when [`ComassMode::Exact`] / [`MassMode::Exact`] are supported.
pub fn exact_supported(d: usize, k: usize) -> bool {
    all_simple(d, k) || k == 2
}

pub fn comass(w: &KCovector, mode: ComassMode) -> Result<ComassResult> {
    let (d, k) = (w.dim(), w.grade());
    match mode {
        ComassMode::Exact => {
            if all_simple(d, k) {
                let certificate = simple_to_frame(w).unwrap_or_else(|| Frame::standard(d, k));
                Ok(ComassResult {
                    value: w.euclidean_norm(),
                    certificate,
                    exact: true,
                })
            } else if k == 2 {
                let comps = spectral_decompose_2vector(w)?;
                match comps.into_iter().next() {
                    Some(top) => Ok(ComassResult {
                        value: top.sigma,
                        certificate: top.frame,
                        exact: true,
                    }),
                    None => Ok(ComassResult {
                        value: 0.0,
                        certificate: Frame::standard(d, 2),
                        exact: true,
                    }),
                }
            } else {
                Err(Error::UnsupportedExact {
                    what: "comass",
                    d,
                    k,
                })
            }
        }
        ComassMode::Estimate { restarts, seed } => {
            let (value, certificate) = best_simple_fit(w, restarts.max(1), seed)?;
            Ok(ComassResult {
                value,
                certificate,
                exact: false,
            })
        }
    }
}

pub fn mass(v: &KVector, mode: MassMode) -> Result<MassResult> {
    let (d, k) = (v.dim(), v.grade());
    match mode {
        MassMode::Exact => {
            if all_simple(d, k) {
                let n = v.euclidean_norm();
                let decomposition = simple_to_frame(v).map(|f| vec![(n, f)]).unwrap_or_default();
                Ok(MassResult {
                    lower: n,
                    upper: n,
                    decomposition,
                    exact: true,
                })
            } else if k == 2 {
                let comps = spectral_decompose_2vector(v)?;
                let total: f64 = comps.iter().map(|c| c.sigma).sum();
                Ok(MassResult {
                    lower: total,
                    upper: total,
                    decomposition: comps.into_iter().map(|c| (c.sigma, c.frame)).collect(),
                    exact: true,
                })
            } else {
                Err(Error::UnsupportedExact { what: "mass", d, k })
            }
        }
        MassMode::Bounds { restarts, seed } => {
            if exact_supported(d, k) {
                return mass(v, MassMode::Exact);
            }
            greedy_bounds(v, restarts.max(1), seed)
        }
    }
}

/// Greedy simple decomposition for the upper bound. The residual left after
/// the budget is charged at `Σ|r_I|`, which is itself a valid decomposition
/// into basis elements, so the upper bound stays certified. The lower bound
/// is the Euclidean norm (mass dominates it).
fn greedy_bounds(v: &KVector, restarts: usize, seed: u64) -> Result<MassResult> {
    let max_terms = super::multi_index::binomial(v.dim(), v.grade());
    let mut residual = v.clone();
    let mut upper = 0.0;
    let mut decomposition = Vec::new();
    for step in 0..max_terms {
        if residual.euclidean_norm() < 1e-10 {
            break;
        }
        let (c, frame) = best_simple_fit(&residual, restarts, seed.wrapping_add(step as u64))?;
        if c <= 1e-14 {
            break;
        }
        let piece = frame.to_kvector()?.scale(c);
        residual = &residual - &piece;
        upper += c;
        decomposition.push((c, frame));
    }
    upper += residual.coeffs().iter().map(|c| c.abs()).sum::<f64>();
    Ok(MassResult {
        lower: v.euclidean_norm(),
        upper,
        decomposition,
        exact: false,
    })
}

/// Maximizes `<w, ∧F>` over orthonormal `d × k` frames by block-coordinate
/// ascent from Haar-random starts.
///
/// With the other columns fixed and orthonormal, the objective is linear in
/// column `j` with gradient `g ⟂ span(others)`, and the optimal unit column
/// is `g/|g|`. Each update is therefore monotone and the value reported is
/// attained by an actual orthonormal frame.
pub(crate) fn best_simple_fit<K: Kind>(
    w: &Graded<K>,
    restarts: usize,
    seed: u64,
) -> Result<(f64, Frame)> {
    let (d, k) = (w.dim(), w.grade());
    if k == 0 {
        return Ok((w.coeffs()[0].abs(), Frame::empty(d)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = (f64::NEG_INFINITY, Frame::standard(d, k));
    let scale = w.euclidean_norm().max(1e-300);
    for _ in 0..restarts {
        let mut f = haar_frame_sample(d, k, &mut rng)?.matrix().clone();
        let mut value = pair_with_frame(w, &f);
        for _sweep in 0..2000 {
            let before = value;
            for j in 0..k {
                let g = column_gradient(w, &f, j);
                let gn = g.norm();
                if gn > 1e-300 {
                    f.set_column(j, &(g / gn));
                    // Re-orthonormalize against earlier columns to stop drift;
                    // g is orthogonal to the others only up to rounding.
                    reorthonormalize(&mut f, j);
                }
            }
            value = pair_with_frame(w, &f);
            if value - before <= 1e-15 * scale {
                break;
            }
        }
        if value > best.0 {
            best = (value, Frame::from_matrix(f)?);
        }
    }
    Ok(best)
}

fn reorthonormalize(f: &mut DMatrix<f64>, j: usize) {
    let k = f.ncols();
    let mut col: DVector<f64> = f.column(j).into_owned();
    for i in (0..k).filter(|&i| i != j) {
        let c = f.column(i).dot(&col);
        col -= f.column(i) * c;
    }
    let n = col.norm();
    if n > 0.0 {
        f.set_column(j, &(col / n));
    }
}

fn pair_with_frame<K: Kind>(w: &Graded<K>, f: &DMatrix<f64>) -> f64 {
    let frame = Frame::from_matrix(f.clone()).expect("frame has columns");
    let v = frame.to_kvector().expect("dimension already validated");
    dot(v.coeffs(), w.coeffs())
}

/// `g[r] = <w, F_1 ∧ … ∧ e_r (slot j) ∧ … ∧ F_k>`.
fn column_gradient<K: Kind>(w: &Graded<K>, f: &DMatrix<f64>, j: usize) -> DVector<f64> {
    let d = w.dim();
    let k = w.grade();
    // β = wedge of the other columns in their original order
    let mut beta = KVector::scalar(d, 1.0).expect("d validated");
    for i in (0..k).filter(|&i| i != j) {
        let col: Vec<f64> = f.column(i).iter().copied().collect();
        beta = beta
            .wedge(&KVector::from_components(&col).expect("finite column"))
            .expect("grades fit");
    }
    // moving slot j to the front costs j transpositions
    let slot_sign = if j % 2 == 0 { 1.0 } else { -1.0 };
    let mut g = DVector::zeros(d);
    let wc = w.coeffs();
    for (mask, b) in lex_masks(d, k - 1).into_iter().zip(beta.coeffs().iter().copied()) {
        if b == 0.0 {
            continue;
        }
        for r in 0..d {
            if let Some(sign) = merge_sign(1 << r, mask) {
                g[r] += slot_sign * sign * b * wc[mask_rank(d, mask | (1 << r))];
            }
        }
    }
    g
}
