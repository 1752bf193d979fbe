//! Dense two-phase tableau simplex for `min cᵀx  s.t.  Ax = b, x ≥ 0`.
//!
//! The final basis is re-solved with an LU factorization to polish the
//! primal values and recover the duals.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub(crate) struct LpSolution {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub primal: f64,
    pub dual: f64,
    pub iterations: usize,
    /// Most negative reduced cost at the polished basis (zero when optimal).
    pub dual_infeasibility: f64,
    /// `max |Ax - b|` at the polished point.
    pub primal_residual: f64,
}

const PIVOT_TOL: f64 = 1e-11;

struct Tableau {
    rows: usize,
    cols: usize,
    /// `rows + 1` rows of `cols + 1` entries; the last row is the objective,
    /// the last column the right-hand side.
    t: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn at(&self, r: usize, c: usize) -> f64 {
        self.t[r * (self.cols + 1) + c]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.cols + 1;
        let p = self.t[r * w + c];
        for j in 0..w {
            self.t[r * w + j] /= p;
        }
        let pivot_row: Vec<f64> = self.t[r * w..(r + 1) * w].to_vec();
        for i in 0..=self.rows {
            if i == r {
                continue;
            }
            let f = self.t[i * w + c];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.t[i * w..(i + 1) * w];
            for (x, &pv) in row.iter_mut().zip(&pivot_row) {
                *x -= f * pv;
            }
            row[c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Runs the simplex on the current objective row over `allowed` columns.
    fn optimize(&mut self, allowed: usize, iterations: &mut usize, limit: usize) -> Result<()> {
        let mut degenerate_streak = 0usize;
        loop {
            let bland = degenerate_streak > 50;
            let mut enter = None;
            let mut best = -1e-10;
            for c in 0..allowed {
                let rc = self.at(self.rows, c);
                if rc < best {
                    enter = Some(c);
                    if bland {
                        break;
                    }
                    best = rc;
                }
            }
            let Some(c) = enter else { return Ok(()) };
            let mut leave = None;
            let mut ratio = f64::INFINITY;
            for r in 0..self.rows {
                let a = self.at(r, c);
                if a > PIVOT_TOL {
                    let q = self.at(r, self.cols) / a;
                    let better = match leave {
                        None => true,
                        Some(l) => {
                            q < ratio - 1e-12
                                || (q <= ratio + 1e-12 && self.basis[r] < self.basis[l])
                        }
                    };
                    if better {
                        ratio = q.min(ratio);
                        leave = Some(r);
                    }
                }
            }
            let Some(r) = leave else {
                return Err(Error::Solver("linear program is unbounded".into()));
            };
            degenerate_streak = if ratio.abs() < 1e-14 {
                degenerate_streak + 1
            } else {
                0
            };
            self.pivot(r, c);
            *iterations += 1;
            if *iterations > limit {
                return Err(Error::Solver(format!(
                    "simplex iteration limit {limit} reached"
                )));
            }
        }
    }
}

/// Solves the standard-form program. `a` is `m × n`.
pub(crate) fn solve_standard_form(a: &DMatrix<f64>, b: &[f64], c: &[f64]) -> Result<LpSolution> {
    let (m, n) = (a.nrows(), a.ncols());
    if b.len() != m || c.len() != n {
        return Err(Error::Shape("program dimensions disagree".into()));
    }
    let sign: Vec<f64> = b.iter().map(|&v| if v < 0.0 { -1.0 } else { 1.0 }).collect();

    // reuse unit columns as the starting basis where possible
    let mut basis = vec![usize::MAX; m];
    for j in 0..n {
        let col = a.column(j);
        let mut nz = col.iter().enumerate().filter(|(_, v)| **v != 0.0);
        if let (Some((r, &v)), None) = (nz.next(), nz.next()) {
            if basis[r] == usize::MAX && v * sign[r] == 1.0 {
                basis[r] = j;
            }
        }
    }
    let artificial_rows: Vec<usize> = (0..m).filter(|&r| basis[r] == usize::MAX).collect();
    let cols = n + artificial_rows.len();
    let w = cols + 1;
    let mut t = vec![0.0; (m + 1) * w];
    for r in 0..m {
        for j in 0..n {
            t[r * w + j] = sign[r] * a[(r, j)];
        }
        t[r * w + cols] = sign[r] * b[r];
    }
    for (i, &r) in artificial_rows.iter().enumerate() {
        t[r * w + n + i] = 1.0;
        basis[r] = n + i;
    }
    let mut tab = Tableau {
        rows: m,
        cols,
        t,
        basis,
    };
    let limit = 50 * (m + cols) + 1000;
    let mut iterations = 0;

    if !artificial_rows.is_empty() {
        // phase 1: minimize the sum of artificials
        for &r in &artificial_rows {
            for j in 0..w {
                let v = tab.t[r * w + j];
                tab.t[m * w + j] -= v;
            }
        }
        for i in 0..artificial_rows.len() {
            tab.t[m * w + n + i] = 0.0;
        }
        tab.optimize(cols, &mut iterations, limit)?;
        if -tab.at(m, cols) > 1e-9 * (1.0 + b.iter().map(|v| v.abs()).sum::<f64>()) {
            return Err(Error::Solver("linear program is infeasible".into()));
        }
        // drive zero-level artificials out where a real column allows it
        for r in 0..m {
            if tab.basis[r] >= n {
                if let Some(j) = (0..n).find(|&j| tab.at(r, j).abs() > 1e-9) {
                    tab.pivot(r, j);
                }
            }
        }
    }

    // phase 2 objective row, restricted to the real columns
    for j in 0..w {
        tab.t[m * w + j] = if j < n { c[j] } else { 0.0 };
    }
    for r in 0..m {
        let bj = tab.basis[r];
        let cb = if bj < n { c[bj] } else { 0.0 };
        if cb != 0.0 {
            for j in 0..w {
                let v = tab.t[r * w + j];
                tab.t[m * w + j] -= cb * v;
            }
        }
    }
    tab.optimize(n, &mut iterations, limit)?;

    polish(a, b, c, &tab.basis, &sign, &artificial_rows, iterations)
}

fn polish(
    a: &DMatrix<f64>,
    b: &[f64],
    c: &[f64],
    basis: &[usize],
    sign: &[f64],
    artificial_rows: &[usize],
    iterations: usize,
) -> Result<LpSolution> {
    let (m, n) = (a.nrows(), a.ncols());
    let mut bm = DMatrix::zeros(m, m);
    let mut cb = DVector::zeros(m);
    for (k, &j) in basis.iter().enumerate() {
        if j < n {
            bm.set_column(k, &a.column(j));
            cb[k] = c[j];
        } else {
            let r = artificial_rows[j - n];
            bm[(r, k)] = sign[r];
        }
    }
    let lu = bm.clone().lu();
    let xb = lu
        .solve(&DVector::from_column_slice(b))
        .ok_or_else(|| Error::Solver("singular final basis".into()))?;
    let y = bm
        .transpose()
        .lu()
        .solve(&cb)
        .ok_or_else(|| Error::Solver("singular final basis".into()))?;
    let mut x = vec![0.0; n];
    for (k, &j) in basis.iter().enumerate() {
        if j < n {
            // clamp round-off below zero
            x[j] = xb[k].max(0.0);
        }
    }
    let xv = DVector::from_column_slice(&x);
    let residual = (a * &xv - DVector::from_column_slice(b)).amax();
    let reduced = DVector::from_column_slice(c) - a.transpose() * &y;
    let dual_infeasibility = reduced.iter().cloned().fold(0.0, f64::min);
    let primal = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    let dual = b.iter().zip(y.iter()).map(|(bi, yi)| bi * yi).sum();
    Ok(LpSolution {
        x,
        y: y.iter().copied().collect(),
        primal,
        dual,
        iterations,
        dual_infeasibility,
        primal_residual: residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_program_with_phase_one() {
        // min x1 + 2 x2 + 3 x3  s.t.  x1 + x2 + x3 = 4, x2 - x3 = 1
        let a = DMatrix::from_row_slice(2, 3, &[1.0, 1.0, 1.0, 0.0, 1.0, -1.0]);
        let sol = solve_standard_form(&a, &[4.0, 1.0], &[1.0, 2.0, 3.0]).unwrap();
        // x2 = 1 + x3; cost = x1 + 2 + 5 x3 with x1 = 3 - 2 x3 → x3 = 0
        assert!((sol.primal - 5.0).abs() < 1e-12);
        assert!((sol.dual - 5.0).abs() < 1e-12);
        assert!(sol.dual_infeasibility > -1e-12);
    }

    #[test]
    fn absolute_value_split() {
        // min |u| with u = -2 via u = p - q
        let a = DMatrix::from_row_slice(1, 2, &[1.0, -1.0]);
        let sol = solve_standard_form(&a, &[-2.0], &[1.0, 1.0]).unwrap();
        assert_eq!(sol.x, vec![0.0, 2.0]);
        assert!((sol.y[0] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let a = DMatrix::from_row_slice(1, 1, &[1.0]);
        assert!(solve_standard_form(&a, &[-1.0], &[1.0]).is_err());
        let a = DMatrix::from_row_slice(1, 2, &[1.0, -1.0]);
        assert!(solve_standard_form(&a, &[1.0], &[-1.0, 0.0]).is_err());
    }
}
