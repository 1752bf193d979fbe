use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use super::discrete::{Atom, DiscreteCurrent};
use crate::algebra::Frame;
use crate::error::{Error, Result};

/// Law of one latent coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum CoordinateLaw {
    Uniform { low: f64, high: f64 },
    Gaussian { mean: f64, std: f64 },
}

/// Product distribution `μ` on the latent space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatentSpec {
    pub coords: Vec<CoordinateLaw>,
}

enum Sampler {
    Uniform(Uniform<f64>),
    Gaussian(Normal<f64>),
}

impl LatentSpec {
    pub fn new(coords: Vec<CoordinateLaw>) -> Result<Self> {
        let spec = LatentSpec { coords };
        spec.samplers()?;
        Ok(spec)
    }

    /// `z_1 ~ U([-π, π])`, the remaining `l - 1` coordinates standard normal.
    pub fn angle_and_gaussians(l: usize) -> Self {
        let mut coords = vec![CoordinateLaw::Uniform {
            low: -std::f64::consts::PI,
            high: std::f64::consts::PI,
        }];
        coords.extend((1..l).map(|_| CoordinateLaw::Gaussian {
            mean: 0.0,
            std: 1.0,
        }));
        LatentSpec { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    fn samplers(&self) -> Result<Vec<Sampler>> {
        if self.coords.is_empty() {
            return Err(Error::InvalidArgument("latent space has no coordinates".into()));
        }
        self.coords
            .iter()
            .map(|c| match *c {
                CoordinateLaw::Uniform { low, high } => Uniform::new(low, high)
                    .map(Sampler::Uniform)
                    .map_err(|e| Error::InvalidArgument(format!("uniform law [{low}, {high}): {e}"))),
                CoordinateLaw::Gaussian { mean, std } => {
                    if !(std > 0.0) {
                        return Err(Error::InvalidArgument(format!(
                            "gaussian std must be positive, got {std}"
                        )));
                    }
                    Normal::new(mean, std)
                        .map(Sampler::Gaussian)
                        .map_err(|e| Error::InvalidArgument(format!("gaussian law: {e}")))
                }
            })
            .collect()
    }

    /// `n` i.i.d. draws, one point per row.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<Vec<f64>>> {
        let samplers = self.samplers()?;
        Ok((0..n)
            .map(|_| {
                samplers
                    .iter()
                    .map(|s| match s {
                        Sampler::Uniform(u) => u.sample(rng),
                        Sampler::Gaussian(g) => g.sample(rng),
                    })
                    .collect()
            })
            .collect())
    }
}

/// `S = μ ∧ (e_1 ∧ … ∧ e_k)` as an empirical current with weights `1/n`.
pub fn sample_latent_current(
    spec: &LatentSpec,
    k: usize,
    n_samples: usize,
    seed: u64,
) -> Result<DiscreteCurrent> {
    let l = spec.dim();
    if k > l {
        return Err(Error::GradeOverflow { j: k, k: 0, d: l });
    }
    if n_samples == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let frame = if k == 0 {
        Frame::empty(l)
    } else {
        Frame::standard(l, k)
    };
    let w = 1.0 / n_samples as f64;
    let atoms = spec
        .sample(n_samples, &mut rng)?
        .into_iter()
        .map(|z| Atom::new(z, w, frame.clone()))
        .collect();
    DiscreteCurrent::new(l, k, atoms)
}
