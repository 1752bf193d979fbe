use nalgebra::{DMatrix, DVector};

use crate::error::{ensure_finite, Error, Result};

/// A differentiable map `g: R^l → R^d` with its Jacobian.
pub trait SmoothMap: Send + Sync {
    fn domain_dim(&self) -> usize;
    fn codomain_dim(&self) -> usize;
    fn eval(&self, z: &[f64]) -> Result<Vec<f64>>;
    /// The `d × l` matrix `∇g(z)`.
    fn jacobian(&self, z: &[f64]) -> Result<DMatrix<f64>>;
}

fn check_input(expected: usize, z: &[f64]) -> Result<()> {
    if z.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            got: z.len(),
        });
    }
    Ok(())
}

/// `z ↦ A z + b`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineMap {
    a: DMatrix<f64>,
    b: DVector<f64>,
}

impl AffineMap {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        if a.nrows() != b.len() {
            return Err(Error::DimensionMismatch {
                expected: a.nrows(),
                got: b.len(),
            });
        }
        ensure_finite("affine map", a.as_slice())?;
        ensure_finite("affine map", b.as_slice())?;
        Ok(AffineMap { a, b })
    }

    pub fn linear(a: DMatrix<f64>) -> Self {
        let b = DVector::zeros(a.nrows());
        AffineMap { a, b }
    }

    pub fn identity(d: usize) -> Self {
        AffineMap::linear(DMatrix::identity(d, d))
    }

    /// The dilation `x ↦ λx`.
    pub fn scaling(d: usize, lambda: f64) -> Self {
        AffineMap::linear(DMatrix::identity(d, d) * lambda)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }
}

impl SmoothMap for AffineMap {
    fn domain_dim(&self) -> usize {
        self.a.ncols()
    }

    fn codomain_dim(&self) -> usize {
        self.a.nrows()
    }

    fn eval(&self, z: &[f64]) -> Result<Vec<f64>> {
        check_input(self.domain_dim(), z)?;
        let y = &self.a * DVector::from_column_slice(z) + &self.b;
        Ok(y.iter().copied().collect())
    }

    fn jacobian(&self, z: &[f64]) -> Result<DMatrix<f64>> {
        check_input(self.domain_dim(), z)?;
        Ok(self.a.clone())
    }
}

/// `g_i(z) = (A z + b)_i + zᵀ Q_i z`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticMap {
    affine: AffineMap,
    quad: Vec<DMatrix<f64>>,
}

impl QuadraticMap {
    pub fn new(affine: AffineMap, quad: Vec<DMatrix<f64>>) -> Result<Self> {
        let (d, l) = (affine.codomain_dim(), affine.domain_dim());
        if quad.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: quad.len(),
            });
        }
        for q in &quad {
            if q.nrows() != l || q.ncols() != l {
                return Err(Error::Shape(format!("quadratic part must be {l}×{l}")));
            }
            ensure_finite("quadratic map", q.as_slice())?;
        }
        Ok(QuadraticMap { affine, quad })
    }
}

impl SmoothMap for QuadraticMap {
    fn domain_dim(&self) -> usize {
        self.affine.domain_dim()
    }

    fn codomain_dim(&self) -> usize {
        self.affine.codomain_dim()
    }

    fn eval(&self, z: &[f64]) -> Result<Vec<f64>> {
        let mut y = self.affine.eval(z)?;
        let zv = DVector::from_column_slice(z);
        for (yi, q) in y.iter_mut().zip(&self.quad) {
            *yi += zv.dot(&(q * &zv));
        }
        Ok(y)
    }

    fn jacobian(&self, z: &[f64]) -> Result<DMatrix<f64>> {
        let mut j = self.affine.jacobian(z)?;
        let zv = DVector::from_column_slice(z);
        for (i, q) in self.quad.iter().enumerate() {
            let row = (q + q.transpose()) * &zv;
            for c in 0..row.len() {
                j[(i, c)] += row[c];
            }
        }
        Ok(j)
    }
}

/// `outer ∘ inner`.
pub struct Composition<G, H> {
    pub outer: G,
    pub inner: H,
}

impl<G: SmoothMap, H: SmoothMap> Composition<G, H> {
    pub fn new(outer: G, inner: H) -> Result<Self> {
        if outer.domain_dim() != inner.codomain_dim() {
            return Err(Error::DimensionMismatch {
                expected: outer.domain_dim(),
                got: inner.codomain_dim(),
            });
        }
        Ok(Composition { outer, inner })
    }
}

impl<G: SmoothMap, H: SmoothMap> SmoothMap for Composition<G, H> {
    fn domain_dim(&self) -> usize {
        self.inner.domain_dim()
    }

    fn codomain_dim(&self) -> usize {
        self.outer.codomain_dim()
    }

    fn eval(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.outer.eval(&self.inner.eval(z)?)
    }

    fn jacobian(&self, z: &[f64]) -> Result<DMatrix<f64>> {
        let y = self.inner.eval(z)?;
        Ok(self.outer.jacobian(&y)? * self.inner.jacobian(z)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_jacobian_matches_differences() {
        let affine = AffineMap::new(
            DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 2.0, -1.0, 0.5, 0.0]),
            DVector::from_vec(vec![0.1, 0.2]),
        )
        .unwrap();
        let q1 = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 0.0, 0.0, -1.0, 0.0, 0.5, 0.0, 0.3]);
        let q2 = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 1.0, 0.0, 2.0, 0.0, 0.0, 0.0, 0.0]);
        let g = QuadraticMap::new(affine, vec![q1, q2]).unwrap();
        let z = [0.3, -0.8, 1.1];
        let j = g.jacobian(&z).unwrap();
        let h = 1e-6;
        for c in 0..3 {
            let mut zp = z;
            let mut zm = z;
            zp[c] += h;
            zm[c] -= h;
            let (yp, ym) = (g.eval(&zp).unwrap(), g.eval(&zm).unwrap());
            for r in 0..2 {
                let fd = (yp[r] - ym[r]) / (2.0 * h);
                assert!((fd - j[(r, c)]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn composition_chains_jacobians() {
        let g = AffineMap::linear(DMatrix::from_row_slice(1, 2, &[1.0, 1.0]));
        let h = AffineMap::scaling(2, 3.0);
        let c = Composition::new(g, h).unwrap();
        assert_eq!(c.eval(&[1.0, 2.0]).unwrap(), vec![9.0]);
        assert_eq!(c.jacobian(&[0.0, 0.0]).unwrap(), DMatrix::from_row_slice(1, 2, &[3.0, 3.0]));
        assert!(Composition::new(AffineMap::identity(3), AffineMap::identity(2)).is_err());
    }
}
