use rayon::prelude::*;

use super::data::DataCurrentSpec;
use super::model::GeneratorModel;
use crate::autodiff::Tensor;
use crate::error::{Error, Result};

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Mean over the rows of `samples` of the distance to the nearest data point.
///
/// Rows are processed on the rayon pool; the sum is taken in row order.
pub fn mean_min_distance(samples: &Tensor, data: &DataCurrentSpec) -> Result<f64> {
    if samples.nrows() == 0 || data.is_empty() {
        return Err(Error::InvalidArgument("empty sample or data set".into()));
    }
    let nearest: Vec<f64> = (0..samples.nrows())
        .into_par_iter()
        .map(|i| {
            let r = samples.row(i).to_vec();
            data.points
                .iter()
                .map(|p| dist(&r, p))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    Ok(nearest.iter().sum::<f64>() / samples.nrows() as f64)
}

/// `n` evenly spaced values of `z_1` over `[-π, π]`, both ends included.
pub fn walk_grid(n: usize, latent_dim: usize) -> Tensor {
    let pi = std::f64::consts::PI;
    Tensor::from_shape_fn((n, latent_dim), |(i, j)| {
        if j > 0 || n == 1 {
            0.0
        } else {
            -pi + 2.0 * pi * i as f64 / (n - 1) as f64
        }
    })
}

/// Images of `(t, 0, …, 0)` for `t` on [`walk_grid`].
pub fn latent_walk(g: &GeneratorModel, n: usize) -> Result<Tensor> {
    if n == 0 {
        return Err(Error::InvalidArgument("walk needs at least one point".into()));
    }
    g.generate(&walk_grid(n, g.latent_dim()))
}

/// Fraction of rows of `curve` within `tol` of the origin-centred circle of
/// radius `radius`.
pub fn tube_fraction(curve: &Tensor, radius: f64, tol: f64) -> f64 {
    let inside = curve
        .rows()
        .into_iter()
        .filter(|r| (r.dot(r).sqrt() - radius).abs() <= tol)
        .count();
    inside as f64 / curve.nrows().max(1) as f64
}

/// Mean cosine similarity between `∂g/∂z_1` and the data tangents.
///
/// For each data point the walk grid point whose image is nearest supplies
/// the derivative.
pub fn tangent_alignment(g: &GeneratorModel, data: &DataCurrentSpec, grid: usize) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::InvalidArgument("no data points".into()));
    }
    let tangents = data.tangents_tensor()?;
    let z = walk_grid(grid.max(2), g.latent_dim());
    let (x, t) = g.generate_with_tangent(&z)?;
    let mut total = 0.0;
    for (i, p) in data.points.iter().enumerate() {
        let j = (0..x.nrows())
            .min_by(|&a, &b| {
                dist(&x.row(a).to_vec(), p).total_cmp(&dist(&x.row(b).to_vec(), p))
            })
            .expect("grid is not empty");
        let dg = t.row(j);
        let ti = tangents.row(i);
        let denom = dg.dot(&dg).sqrt() * ti.dot(&ti).sqrt();
        total += if denom > 0.0 { dg.dot(&ti) / denom } else { 0.0 };
    }
    Ok(total / data.len() as f64)
}
