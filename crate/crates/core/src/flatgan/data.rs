use serde::{Deserialize, Serialize};

use crate::autodiff::Tensor;
use crate::currents::{Atom, DiscreteCurrent};
use crate::algebra::Frame;
use crate::error::{Error, Result};

/// Sample points `x_i` with optional tangent vectors `T_{i,1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataCurrentSpec {
    pub points: Vec<Vec<f64>>,
    /// One tangent per point for 1-currents, empty for 0-currents.
    #[serde(default)]
    pub tangents: Vec<Vec<f64>>,
}

impl DataCurrentSpec {
    pub fn new(points: Vec<Vec<f64>>, tangents: Vec<Vec<f64>>) -> Result<Self> {
        let spec = DataCurrentSpec { points, tangents };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        if self.points.is_empty() {
            return Err(Error::InvalidArgument("data current has no points".into()));
        }
        for p in self.points.iter().chain(&self.tangents) {
            if p.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: p.len(),
                });
            }
            crate::error::ensure_finite("data current", p)?;
        }
        if !self.tangents.is_empty() && self.tangents.len() != self.points.len() {
            return Err(Error::Shape(format!(
                "{} tangents for {} points",
                self.tangents.len(),
                self.points.len()
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, Vec::len)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Largest grade the spec can carry.
    pub fn max_grade(&self) -> usize {
        usize::from(!self.tangents.is_empty())
    }

    pub fn points_tensor(&self) -> Tensor {
        rows_to_tensor(&self.points)
    }

    pub fn tangents_tensor(&self) -> Result<Tensor> {
        if self.tangents.is_empty() {
            return Err(Error::GradeMismatch {
                expected: 1,
                got: 0,
            });
        }
        Ok(rows_to_tensor(&self.tangents))
    }

    /// `T = (1/N) Σ δ_{x_i} ∧ T_i` as a discrete current of grade `k`.
    pub fn to_current(&self, k: usize) -> Result<DiscreteCurrent> {
        let n = self.len() as f64;
        let atoms = match k {
            0 => self
                .points
                .iter()
                .map(|x| Atom::point(x.clone(), 1.0 / n))
                .collect(),
            1 => {
                let ts = self.tangents_tensor()?;
                self.points
                    .iter()
                    .enumerate()
                    .map(|(i, x)| {
                        Ok(Atom::new(
                            x.clone(),
                            1.0 / n,
                            Frame::new(&[ts.row(i).to_vec()])?,
                        ))
                    })
                    .collect::<Result<Vec<_>>>()?
            }
            _ => {
                return Err(Error::GradeMismatch {
                    expected: 1,
                    got: k,
                })
            }
        };
        DiscreteCurrent::new(self.dim(), k, atoms)
    }
}

pub(crate) fn rows_to_tensor(rows: &[Vec<f64>]) -> Tensor {
    let c = rows.first().map_or(0, Vec::len);
    Tensor::from_shape_fn((rows.len(), c), |(i, j)| rows[i][j])
}

/// `n` equally spaced points on the circle of the given radius, starting at
/// angle `2π·u` with `u` drawn from `seed`, each carrying its unit
/// counterclockwise tangent.
///
/// Seed 0 places the first point at angle 0.
pub fn build_circle_dataset(n: usize, radius: f64, seed: u64) -> Result<DataCurrentSpec> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one point".into()));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "radius must be positive, got {radius}"
        )));
    }
    let offset = if seed == 0 {
        0.0
    } else {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        rng.random_range(0.0..std::f64::consts::TAU)
    };
    let mut points = Vec::with_capacity(n);
    let mut tangents = Vec::with_capacity(n);
    for i in 0..n {
        let a = offset + std::f64::consts::TAU * i as f64 / n as f64;
        let (s, c) = a.sin_cos();
        points.push(vec![radius * c, radius * s]);
        tangents.push(vec![-s, c]);
    }
    DataCurrentSpec::new(points, tangents)
}
