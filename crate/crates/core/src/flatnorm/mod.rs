//! Scaled flat norm `F_λ(T) = min { λ M(A) + M(B) : T = A + ∂B }`.
//!
//! Exact solvers cover signed 0-currents and 1-chains on a planar complex;
//! the neural estimator gives a lower bound through the dual problem.

mod lp;
mod network_simplex;
mod neural;
mod points;
mod simplicial;

use serde::{Deserialize, Serialize};

use crate::currents::{DiscreteCurrent, SimplicialChain};
use crate::error::{Error, Result};

pub use neural::{dual_flat_estimate, DualFormSpec, DualTrainConfig};
pub use points::{canonical_points, flat_metric_points_exact, COINCIDENCE_TOL};
pub use simplicial::flat_norm_simplicial;

/// Mass `mass` carried along the oriented segment `from → to`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub from: Vec<f64>,
    pub to: Vec<f64>,
    pub mass: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PrimalWitness {
    /// `A` as residual atoms, `B` as a union of weighted segments.
    Points { a: DiscreteCurrent, b: Vec<Segment> },
    Simplicial { a: SimplicialChain, b: SimplicialChain },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DualWitness {
    /// Values of a 1-Lipschitz function bounded by `λ` on the support.
    Potentials { points: Vec<Vec<f64>>, phi: Vec<f64> },
    /// One value per edge.
    Cochain { values: Vec<f64> },
    /// Summary of a trained dual form; `objective` is the penalized training value.
    Neural {
        objective: f64,
        penalty: f64,
        steps: usize,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverStats {
    pub iterations: usize,
    pub primal_value: f64,
    pub dual_value: f64,
    pub gap: f64,
    pub primal_residual: f64,
    pub dual_infeasibility: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlatNormResult {
    pub value: f64,
    pub lambda: f64,
    pub primal_witness: Option<PrimalWitness>,
    pub dual_witness: Option<DualWitness>,
    pub stats: SolverStats,
}

impl FlatNormResult {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Values compared by [`prop1_bounds_check`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prop1Report {
    pub lambda: f64,
    /// `F_1(T)`.
    pub flat: f64,
    /// `F_λ(T)`.
    pub scaled: f64,
    /// `λ^{k+1} F_1(d_{1/λ♯} T)` with `k = 0`.
    pub dilated: f64,
    pub lower_bound_ok: bool,
    pub upper_bound_ok: bool,
    pub dilation_ok: bool,
    pub tolerance: f64,
}

impl Prop1Report {
    pub fn passed(&self) -> bool {
        self.lower_bound_ok && self.upper_bound_ok && self.dilation_ok
    }
}

/// Checks `min{1,λ} F ≤ F_λ ≤ max{1,λ} F` and the dilation identity.
///
/// Dilating by `1/λ` scales `M(A)` by `λ^{-k}` and `M(B)` by `λ^{-k-1}`, so
/// with `λ` weighting `M(A)` the identity reads
/// `F_λ(T) = λ^{k+1} F(d_{1/λ♯} T)`.
pub fn prop1_bounds_check(t: &DiscreteCurrent, lambda: f64, tolerance: f64) -> Result<Prop1Report> {
    if t.grade() != 0 {
        return Err(Error::GradeMismatch {
            expected: 0,
            got: t.grade(),
        });
    }
    let flat = flat_metric_points_exact(t, 1.0)?.value;
    let scaled = flat_metric_points_exact(t, lambda)?.value;
    let dilated = lambda * flat_metric_points_exact(&t.dilate(1.0 / lambda)?, 1.0)?.value;
    let tol = tolerance * (1.0 + flat.max(scaled));
    Ok(Prop1Report {
        lambda,
        flat,
        scaled,
        dilated,
        lower_bound_ok: lambda.min(1.0) * flat <= scaled + tol,
        upper_bound_ok: scaled <= lambda.max(1.0) * flat + tol,
        dilation_ok: (scaled - dilated).abs() <= tol,
        tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_current(rng: &mut ChaCha8Rng, n: usize) -> DiscreteCurrent {
        let pts: Vec<Vec<f64>> = (0..n)
            .map(|_| vec![rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)])
            .collect();
        let w: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        DiscreteCurrent::from_points(&pts, &w).unwrap()
    }

    #[test]
    fn bounds_and_dilation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let t = random_current(&mut rng, 10);
            for lambda in [0.25, 0.3, 1.0, 4.0] {
                let r = prop1_bounds_check(&t, lambda, 1e-8).unwrap();
                assert!(r.passed(), "{r:?}");
            }
        }
    }

    #[test]
    fn unscaled_dilation_differs_off_unit_scale() {
        // F_λ(δ_x - δ_0) = min(|x|, 2λ) while F(d_{1/λ♯}T) = min(|x|/λ, 2)
        let t = DiscreteCurrent::from_points(&[vec![0.5], vec![0.0]], &[1.0, -1.0]).unwrap();
        let scaled = flat_metric_points_exact(&t, 4.0).unwrap().value;
        let unscaled = flat_metric_points_exact(&t.dilate(0.25).unwrap(), 1.0)
            .unwrap()
            .value;
        assert!((scaled - 0.5).abs() < 1e-12);
        assert!((unscaled - 0.125).abs() < 1e-12);
    }

    #[test]
    fn result_json_round_trip() {
        let t = DiscreteCurrent::from_points(&[vec![0.0], vec![3.0]], &[1.0, -1.0]).unwrap();
        let r = flat_metric_points_exact(&t, 1.0).unwrap();
        let back: FlatNormResult = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
    }
}
