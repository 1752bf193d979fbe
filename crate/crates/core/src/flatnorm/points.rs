use super::network_simplex::Network;
use super::{DualWitness, FlatNormResult, PrimalWitness, Segment, SolverStats};
use crate::currents::{Atom, DiscreteCurrent};
use crate::error::{Error, Result};

/// Distance below which two support points are treated as one.
pub const COINCIDENCE_TOL: f64 = 1e-12;

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Merges coincident atoms and drops those whose weight cancels.
pub fn canonical_points(t: &DiscreteCurrent) -> Result<Vec<(Vec<f64>, f64)>> {
    if t.grade() != 0 {
        return Err(Error::GradeMismatch {
            expected: 0,
            got: t.grade(),
        });
    }
    let mut idx: Vec<usize> = (0..t.len()).collect();
    let atoms = t.atoms();
    let key = |i: usize| atoms[i].x.first().copied().unwrap_or(0.0);
    idx.sort_by(|&a, &b| key(a).total_cmp(&key(b)));
    let mut merged: Vec<(Vec<f64>, f64)> = Vec::new();
    let mut taken = vec![false; idx.len()];
    for p in 0..idx.len() {
        if taken[p] {
            continue;
        }
        let i = idx[p];
        let mut w = atoms[i].w;
        for q in p + 1..idx.len() {
            let j = idx[q];
            if key(j) - key(i) > COINCIDENCE_TOL {
                break;
            }
            if !taken[q] && dist(&atoms[i].x, &atoms[j].x) <= COINCIDENCE_TOL {
                w += atoms[j].w;
                taken[q] = true;
            }
        }
        merged.push((atoms[i].x.clone(), w));
    }
    let scale = atoms.iter().map(|a| a.w.abs()).fold(0.0, f64::max);
    merged.retain(|(_, w)| w.abs() > 1e-14 * scale);
    Ok(merged)
}

/// Exact `F_λ(T)` for a signed 0-current.
///
/// Solves the transport LP with a destruction/creation cost of `λ` per unit
/// mass as a min-cost flow between positive and negative atoms through one
/// auxiliary node. The dual potentials are extended to a feasible
/// 1-Lipschitz function bounded by `λ`, which certifies optimality.
pub fn flat_metric_points_exact(t: &DiscreteCurrent, lambda: f64) -> Result<FlatNormResult> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "scale must be positive, got {lambda}"
        )));
    }
    let pts = canonical_points(t)?;
    let d = t.dim();
    let pos: Vec<usize> = (0..pts.len()).filter(|&i| pts[i].1 > 0.0).collect();
    let neg: Vec<usize> = (0..pts.len()).filter(|&i| pts[i].1 < 0.0).collect();

    // nodes: positives, negatives, then the auxiliary root
    let (np, nn) = (pos.len(), neg.len());
    let root = np + nn;
    let mut supply: Vec<f64> = pos.iter().chain(&neg).map(|&i| pts[i].1).collect();
    supply.push(-supply.iter().sum::<f64>());
    let mut net = Network::new(supply);
    let mut transport = Vec::with_capacity(np * nn);
    for a in 0..np {
        for b in 0..nn {
            let e = net.add_arc(a, np + b, dist(&pts[pos[a]].0, &pts[neg[b]].0));
            transport.push((a, b, e));
        }
    }
    let mut star = vec![usize::MAX; root + 1];
    for a in 0..np {
        star[a] = net.add_arc(a, root, lambda);
    }
    for b in 0..nn {
        star[np + b] = net.add_arc(root, np + b, lambda);
    }
    let sol = net.solve(root, &star)?;

    // φ_i = y_i - y_root with y = -π
    let phi: Vec<f64> = (0..root).map(|u| sol.pi[root] - sol.pi[u]).collect();
    let neg_pts: Vec<(&[f64], f64)> = (0..nn)
        .map(|b| (pts[neg[b]].0.as_slice(), phi[np + b].max(-lambda)))
        .collect();
    let extend = |x: &[f64]| -> f64 {
        neg_pts
            .iter()
            .map(|(y, p)| p + dist(x, y))
            .fold(lambda, f64::min)
    };
    let psi: Vec<f64> = pts.iter().map(|(x, _)| extend(x)).collect();
    let dual_value: f64 = pts.iter().zip(&psi).map(|((_, w), p)| w * p).sum();
    let value = sol.cost;

    let mut residual = vec![0.0; pts.len()];
    for (a, &i) in pos.iter().enumerate() {
        residual[i] = sol.flow[star[a]];
    }
    for (b, &j) in neg.iter().enumerate() {
        residual[j] = -sol.flow[star[np + b]];
    }
    let a_atoms = pts
        .iter()
        .zip(&residual)
        .filter(|(_, r)| **r != 0.0)
        .map(|((x, _), &r)| Atom::point(x.clone(), r))
        .collect();
    let segments = transport
        .iter()
        .filter(|&&(_, _, e)| sol.flow[e] > 0.0)
        .map(|&(a, b, e)| Segment {
            from: pts[neg[b]].0.clone(),
            to: pts[pos[a]].0.clone(),
            mass: sol.flow[e],
        })
        .collect();

    Ok(FlatNormResult {
        value,
        lambda,
        primal_witness: Some(PrimalWitness::Points {
            a: DiscreteCurrent::new(d, 0, a_atoms)?,
            b: segments,
        }),
        dual_witness: Some(DualWitness::Potentials {
            points: pts.iter().map(|(x, _)| x.clone()).collect(),
            phi: psi,
        }),
        stats: SolverStats {
            iterations: sol.pivots,
            primal_value: value,
            dual_value,
            gap: value - dual_value,
            primal_residual: 0.0,
            dual_infeasibility: 0.0,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(x: f64) -> DiscreteCurrent {
        DiscreteCurrent::from_points(&[vec![x], vec![0.0]], &[1.0, -1.0]).unwrap()
    }

    #[test]
    fn transport_branch() {
        let r = flat_metric_points_exact(&pair(0.5), 1.0).unwrap();
        assert!((r.value - 0.5).abs() < 1e-12);
        assert!(r.stats.gap.abs() < 1e-12);
    }

    #[test]
    fn destruction_branch() {
        let r = flat_metric_points_exact(&pair(3.0), 1.0).unwrap();
        assert!((r.value - 2.0).abs() < 1e-12);
        assert!(r.stats.gap.abs() < 1e-12);
        if let Some(PrimalWitness::Points { a, b }) = &r.primal_witness {
            assert!(b.is_empty());
            assert!((a.mass() - 2.0).abs() < 1e-12);
        } else {
            panic!("missing witness");
        }
    }

    #[test]
    fn zero_and_cancelling_currents() {
        let z = DiscreteCurrent::zero(2, 0);
        assert_eq!(flat_metric_points_exact(&z, 1.0).unwrap().value, 0.0);
        let c = DiscreteCurrent::from_points(&[vec![1.0, 2.0], vec![1.0, 2.0]], &[0.3, -0.3])
            .unwrap();
        assert_eq!(flat_metric_points_exact(&c, 1.0).unwrap().value, 0.0);
    }

    #[test]
    fn unbalanced_mass() {
        // a lone atom can only be destroyed
        let t = DiscreteCurrent::dirac(vec![0.0, 0.0], 2.5).unwrap();
        let r = flat_metric_points_exact(&t, 0.4).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(flat_metric_points_exact(&pair(1.0), 0.0).is_err());
        let t = DiscreteCurrent::new(
            2,
            1,
            vec![Atom::new(
                vec![0.0, 0.0],
                1.0,
                crate::algebra::Frame::standard(2, 1),
            )],
        )
        .unwrap();
        assert!(flat_metric_points_exact(&t, 1.0).is_err());
    }
}
