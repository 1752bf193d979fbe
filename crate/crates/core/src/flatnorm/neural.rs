use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{canonical_points, DualWitness, FlatNormResult, SolverStats};
use crate::autodiff::{Activation, AdamConfig, AdamState, MlpSpec, Tape, Tensor};
use crate::currents::DiscreteCurrent;
use crate::error::{Error, Result};
use crate::flatgan::{penalty, DiscriminatorModel, NeuralForm};

/// Networks of the dual form: `ω⁰` at grade 0, `ω^{1,1}` at grade 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualFormSpec {
    pub omega0: Option<MlpSpec>,
    pub omega1: Option<MlpSpec>,
    pub alpha: f64,
}

impl DualFormSpec {
    /// Two hidden layers of width 64 with ELU activations.
    pub fn small(d: usize, k: usize) -> Result<Self> {
        let widths = |out| vec![d, 64, 64, out];
        Ok(match k {
            0 => DualFormSpec {
                omega0: Some(MlpSpec::uniform(&widths(1), Activation::Elu)?),
                omega1: None,
                alpha: 1.0,
            },
            1 => DualFormSpec {
                omega0: None,
                omega1: Some(MlpSpec::uniform(&widths(d), Activation::Elu)?),
                alpha: 1.0,
            },
            _ => {
                return Err(Error::Capability(format!(
                    "neural dual supports grades 0 and 1, got {k}"
                )))
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DualTrainConfig {
    pub steps: usize,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub rho: f64,
    /// Random points on segments between atoms used for the derivative penalty.
    pub interpolates: usize,
    pub haar_samples: usize,
    /// Trailing steps whose objective is averaged into the estimate.
    pub average_last: usize,
    pub seed: u64,
}

impl Default for DualTrainConfig {
    fn default() -> Self {
        DualTrainConfig {
            steps: 2000,
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            rho: 100.0,
            interpolates: 64,
            haar_samples: 4,
            average_last: 100,
            seed: 0,
        }
    }
}

impl DualTrainConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.steps > 0
            && self.lr > 0.0
            && self.lr.is_finite()
            && (0.0..1.0).contains(&self.beta1)
            && (0.0..1.0).contains(&self.beta2)
            && self.rho > 0.0
            && self.rho.is_finite()
            && self.haar_samples > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid dual training config {self:?}")))
        }
    }
}

fn rows(points: &[Vec<f64>], d: usize) -> Tensor {
    Tensor::from_shape_fn((points.len(), d), |(i, j)| points[i][j])
}

/// Penalty sites: the atoms plus uniform points on random atom pairs.
fn sites<R: Rng + ?Sized>(xs: &[Vec<f64>], m: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut out = xs.to_vec();
    if xs.len() < 2 {
        return out;
    }
    for _ in 0..m {
        let i = rng.random_range(0..xs.len());
        let j = rng.random_range(0..xs.len());
        let t: f64 = rng.random();
        out.push(xs[i].iter().zip(&xs[j]).map(|(a, b)| a + t * (b - a)).collect());
    }
    out
}

/// Largest function below `φ` on the support that is bounded by `λ` and
/// 1-Lipschitz there.
fn feasible_potentials(pts: &[(Vec<f64>, f64)], phi: &[f64], lambda: f64) -> Vec<f64> {
    pts.iter()
        .map(|(x, _)| {
            pts.iter()
                .zip(phi)
                .map(|((y, _), p)| p.max(-lambda) + dist(x, y))
                .fold(lambda, f64::min)
        })
        .collect()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Lower estimate of `F_λ(S − T)` from a penalized neural dual form.
///
/// Adam maximizes `(S − T)(ω)` minus soft comass and exterior-derivative
/// penalties. At grade 0 the trained values on the support are projected
/// onto the feasible set after averaging over the last `average_last` steps,
/// so the estimate never exceeds the exact value.
/// At grade 1 the estimate is the unpenalized objective averaged over the
/// last `average_last` steps.
pub fn dual_flat_estimate(
    s: &DiscreteCurrent,
    t: &DiscreteCurrent,
    lambda: f64,
    spec: &DualFormSpec,
    cfg: &DualTrainConfig,
) -> Result<(FlatNormResult, NeuralForm)> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!("λ must be positive, got {lambda}")));
    }
    cfg.validate()?;
    let u = s.try_sub(t)?;
    let (d, k) = (u.dim(), u.grade());
    if k > 1 {
        return Err(Error::Capability(format!(
            "neural dual supports grades 0 and 1, got {k}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut model = DiscriminatorModel::init(
        spec.omega0.as_ref(),
        spec.omega1.as_ref(),
        spec.alpha,
        &mut rng,
    )?;
    if model.grade() != k || model.dim() != d {
        return Err(Error::GradeMismatch {
            expected: k,
            got: model.grade(),
        });
    }

    let xs: Vec<Vec<f64>> = u.atoms().iter().map(|a| a.x.clone()).collect();
    let x = rows(&xs, d);
    let w = Tensor::from_shape_fn((xs.len(), 1), |(i, _)| u.atoms()[i].w);
    let v = (k == 1).then(|| {
        Tensor::from_shape_fn((xs.len(), d), |(i, j)| u.atoms()[i].frame.matrix()[(j, 0)])
    });

    let mut adam = AdamState::new(
        AdamConfig::new(cfg.lr, cfg.beta1, cfg.beta2),
        &model.tensors(),
    );
    let pts = if k == 0 { canonical_points(&u)? } else { Vec::new() };
    let support = rows(&pts.iter().map(|(x, _)| x.clone()).collect::<Vec<_>>(), d);
    let mut phi = vec![0.0; pts.len()];
    let tail = cfg.average_last.clamp(1, cfg.steps);
    let (mut acc, mut acc_pen) = (0.0, 0.0);
    for step in 0..cfg.steps {
        let tape = Tape::new();
        let dv = model.on_tape(&tape);
        let objective = if u.is_empty() {
            tape.scalar(0.0)
        } else {
            let vals = dv.omega(tape.leaf(x.clone()), v.clone().map(|v| tape.leaf(v)))?;
            (vals * tape.leaf(w.clone())).sum()
        };
        let site = rows(&sites(&xs, cfg.interpolates, &mut rng), d);
        let pen = if site.nrows() == 0 {
            tape.scalar(0.0)
        } else {
            penalty(&tape, &dv, &site, k, lambda, cfg.rho, cfg.haar_samples, &mut rng)?.total()
        };
        let loss = pen - objective;
        let (obj, p) = (objective.scalar(), pen.scalar());
        if !(obj.is_finite() && p.is_finite()) {
            return Err(Error::Divergence {
                epoch: step,
                reason: format!("objective {obj}, penalty {p}"),
            });
        }
        if step >= cfg.steps - tail {
            acc += obj;
            acc_pen += p;
            if let (Some(w0), false) = (&model.omega0, pts.is_empty()) {
                for (a, b) in phi.iter_mut().zip(w0.forward_values(&support)?.iter()) {
                    *a += b / tail as f64;
                }
            }
        }
        let grads: Vec<Tensor> = tape
            .grad(loss, &dv.leaves())?
            .into_iter()
            .map(|g| (*g.value()).clone())
            .collect();
        adam.step(&mut model.tensors_mut(), &grads)?;
    }

    let objective = acc / tail as f64;
    let penalty = acc_pen / tail as f64;
    let value = if k == 0 {
        let psi = feasible_potentials(&pts, &phi, lambda);
        pts.iter().zip(&psi).map(|((_, w), p)| w * p).sum::<f64>()
    } else {
        objective
    }
    .max(0.0);
    let result = FlatNormResult {
        value,
        lambda,
        primal_witness: None,
        dual_witness: Some(DualWitness::Neural {
            objective,
            penalty,
            steps: cfg.steps,
        }),
        stats: SolverStats {
            iterations: cfg.steps,
            dual_value: value,
            dual_infeasibility: penalty,
            ..SolverStats::default()
        },
    };
    Ok((result, NeuralForm::new(model)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(dist: f64) -> (DiscreteCurrent, DiscreteCurrent) {
        (
            DiscreteCurrent::dirac(vec![dist, 0.0], 1.0).unwrap(),
            DiscreteCurrent::dirac(vec![0.0, 0.0], 1.0).unwrap(),
        )
    }

    fn estimate(s: &DiscreteCurrent, t: &DiscreteCurrent, lambda: f64) -> f64 {
        let spec = DualFormSpec::small(2, 0).unwrap();
        dual_flat_estimate(s, t, lambda, &spec, &DualTrainConfig::default())
            .unwrap()
            .0
            .value
    }

    #[test]
    fn identical_currents_give_small_estimate() {
        let (s, _) = pair(0.5);
        assert!(estimate(&s, &s, 1.0) <= 0.05);
    }

    #[test]
    fn transport_pair() {
        let (s, t) = pair(0.5);
        let e = estimate(&s, &t, 1.0);
        assert!((0.40..=0.5).contains(&e), "{e}");
    }

    #[test]
    fn large_scale_matches_transport_distance() {
        let (s, t) = pair(0.5);
        let e = estimate(&s, &t, 10.0);
        assert!((e - 0.5).abs() <= 0.05, "{e}");
    }

    #[test]
    fn grade_zero_estimate_is_a_lower_bound() {
        let s = DiscreteCurrent::from_points(&[vec![0.0, 0.0], vec![1.0, 1.0]], &[1.0, 0.5]).unwrap();
        let t = DiscreteCurrent::dirac(vec![0.5, -0.5], 1.0).unwrap();
        let exact = super::super::flat_metric_points_exact(&s.try_sub(&t).unwrap(), 0.7)
            .unwrap()
            .value;
        let e = estimate(&s, &t, 0.7);
        assert!(e <= exact + 1e-12 && e >= exact - 0.1, "{e} vs {exact}");
    }

    #[test]
    fn grade_one_tangents() {
        use crate::algebra::Frame;
        use crate::currents::Atom;
        let tangent = |x: f64, s: f64| {
            Atom::new(vec![x, 0.0], 1.0, Frame::new(&[vec![0.0, s]]).unwrap())
        };
        let s = DiscreteCurrent::new(2, 1, vec![tangent(0.0, 1.0)]).unwrap();
        let t = DiscreteCurrent::new(2, 1, vec![tangent(0.0, 1.0)]).unwrap();
        let spec = DualFormSpec::small(2, 1).unwrap();
        let cfg = DualTrainConfig {
            steps: 500,
            ..DualTrainConfig::default()
        };
        let (same, form) = dual_flat_estimate(&s, &t, 1.0, &spec, &cfg).unwrap();
        assert!(same.value <= 0.05, "{}", same.value);
        assert_eq!(form.model.grade(), 1);
        // a unit tangent has flat norm at most λ; the estimate should approach it
        let z = DiscreteCurrent::zero(2, 1);
        let (one, _) = dual_flat_estimate(&s, &z, 0.5, &spec, &cfg).unwrap();
        assert!(one.value <= 0.5 + 0.05 && one.value >= 0.3, "{}", one.value);
    }

    #[test]
    fn rejects_bad_scale() {
        let (s, t) = pair(0.5);
        let spec = DualFormSpec::small(2, 0).unwrap();
        assert!(dual_flat_estimate(&s, &t, 0.0, &spec, &DualTrainConfig::default()).is_err());
    }
}
