use super::FormField;
use crate::currents::SimplicialChain;
use crate::error::{Error, Result};

/// Symmetric rules on a triangle, named by point count.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TriangleRule {
    /// Degree 1.
    Centroid,
    /// Degree 2.
    #[default]
    ThreePoint,
    /// Degree 5.
    SevenPoint,
}

impl TriangleRule {
    /// Barycentric nodes and weights summing to one.
    fn nodes(self) -> Vec<([f64; 3], f64)> {
        match self {
            TriangleRule::Centroid => vec![([1.0 / 3.0; 3], 1.0)],
            TriangleRule::ThreePoint => {
                let (a, b) = (2.0 / 3.0, 1.0 / 6.0);
                vec![([a, b, b], 1.0 / 3.0), ([b, a, b], 1.0 / 3.0), ([b, b, a], 1.0 / 3.0)]
            }
            TriangleRule::SevenPoint => {
                let s15 = 15f64.sqrt();
                let (a1, b1) = ((9.0 - 2.0 * s15) / 21.0, (6.0 + s15) / 21.0);
                let (a2, b2) = ((9.0 + 2.0 * s15) / 21.0, (6.0 - s15) / 21.0);
                let (w1, w2) = ((155.0 + s15) / 1200.0, (155.0 - s15) / 1200.0);
                let mut v = vec![([1.0 / 3.0; 3], 9.0 / 40.0)];
                for (a, b, w) in [(a1, b1, w1), (a2, b2, w2)] {
                    v.push(([a, b, b], w));
                    v.push(([b, a, b], w));
                    v.push(([b, b, a], w));
                }
                v
            }
        }
    }
}

/// Gauss–Legendre point count on segments and the triangle rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Quadrature {
    pub segment_points: usize,
    pub triangle: TriangleRule,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature {
            segment_points: 2,
            triangle: TriangleRule::ThreePoint,
        }
    }
}

/// Gauss–Legendre nodes and weights on `[0, 1]`.
fn gauss_legendre(n: usize) -> Result<Vec<(f64, f64)>> {
    let std: Vec<(f64, f64)> = match n {
        1 => vec![(0.0, 2.0)],
        2 => {
            let a = 1.0 / 3f64.sqrt();
            vec![(-a, 1.0), (a, 1.0)]
        }
        3 => {
            let a = (3.0f64 / 5.0).sqrt();
            vec![(-a, 5.0 / 9.0), (0.0, 8.0 / 9.0), (a, 5.0 / 9.0)]
        }
        4 => {
            let r = (6.0f64 / 5.0).sqrt() * 2.0 / 7.0;
            let (a, b) = ((3.0 / 7.0 - r).sqrt(), (3.0 / 7.0 + r).sqrt());
            let s30 = 30f64.sqrt();
            let (wa, wb) = ((18.0 + s30) / 36.0, (18.0 - s30) / 36.0);
            vec![(-b, wb), (-a, wa), (a, wa), (b, wb)]
        }
        5 => {
            let r = 2.0 * (10.0f64 / 7.0).sqrt();
            let (a, b) = ((5.0 - r).sqrt() / 3.0, (5.0 + r).sqrt() / 3.0);
            let s70 = 70f64.sqrt();
            let (wa, wb) = ((322.0 + 13.0 * s70) / 900.0, (322.0 - 13.0 * s70) / 900.0);
            vec![(-b, wb), (-a, wa), (0.0, 128.0 / 225.0), (a, wa), (b, wb)]
        }
        _ => {
            return Err(Error::InvalidArgument(format!(
                "segment rule with {n} points is not available (1 to 5)"
            )))
        }
    };
    Ok(std.into_iter().map(|(x, w)| ((x + 1.0) / 2.0, w / 2.0)).collect())
}

/// `∫_c ω = Σ_σ c_σ ∫_σ <ω(x), τ_σ> dH^k`, with `τ_σ` the unit orientation.
pub fn integrate_over_chain<F: FormField + ?Sized>(
    form: &F,
    chain: &SimplicialChain,
    quad: Quadrature,
) -> Result<f64> {
    let k = chain.grade();
    if form.grade() != k {
        return Err(Error::GradeMismatch {
            expected: k,
            got: form.grade(),
        });
    }
    let cx = chain.complex();
    if form.dim() != cx.dim() {
        return Err(Error::DimensionMismatch {
            expected: cx.dim(),
            got: form.dim(),
        });
    }
    // barycentric nodes and weights on the reference simplex
    let nodes: Vec<(Vec<f64>, f64)> = match k {
        0 => vec![(vec![1.0], 1.0)],
        1 => gauss_legendre(quad.segment_points)?
            .into_iter()
            .map(|(t, w)| (vec![1.0 - t, t], w))
            .collect(),
        2 => quad
            .triangle
            .nodes()
            .into_iter()
            .map(|(b, w)| (b.to_vec(), w))
            .collect(),
        _ => unreachable!("chains have grade at most 2"),
    };
    // the frame's k-vector is k!·vol·τ
    let inv_fact = if k == 2 { 0.5 } else { 1.0 };
    let mut total = 0.0;
    for (i, &c) in chain.coeffs().iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let s = cx.simplex(k, i);
        let frame = cx.frame(k, i)?;
        let mut acc = 0.0;
        for (bary, w) in &nodes {
            let mut x = vec![0.0; cx.dim()];
            for (&b, &v) in bary.iter().zip(&s) {
                for (xi, vi) in x.iter_mut().zip(&cx.vertices()[v]) {
                    *xi += b * vi;
                }
            }
            acc += w * form.apply(&x, &frame)?;
        }
        total += c * inv_fact * acc;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{KCovector, MultiIndex};
    use crate::currents::SimplicialComplex;
    use crate::forms::{ConstantForm, PolynomialForm};
    use std::sync::Arc;

    #[test]
    fn segment_integral_of_dx1() {
        let cx = Arc::new(
            SimplicialComplex::new(vec![vec![0.0, 0.0], vec![1.0, 0.0]], vec![[0, 1]], vec![])
                .unwrap(),
        );
        let c = SimplicialChain::elementary(cx, 1, 0).unwrap();
        let f = ConstantForm::new(KCovector::basis(MultiIndex::new(2, &[1]).unwrap()));
        assert!((integrate_over_chain(&f, &c, Quadrature::default()).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn area_of_unit_square() {
        let cx = Arc::new(SimplicialComplex::grid(1, 1.0, [0.0, 0.0]).unwrap());
        let sq = SimplicialChain::new(Arc::clone(&cx), 2, vec![1.0, 1.0]).unwrap();
        let area = ConstantForm::new(KCovector::basis(MultiIndex::new(2, &[1, 2]).unwrap()));
        assert!((integrate_over_chain(&area, &sq, Quadrature::default()).unwrap() - 1.0).abs() < 1e-15);

        let f = PolynomialForm::from_json(
            r#"{"d":2,"k":1,"terms":[{"index":"2","monomials":[{"exps":[1,0],"coef":1.0}]}]}"#,
        )
        .unwrap();
        let b = sq.boundary().unwrap();
        let v = integrate_over_chain(&f, &b, Quadrature::default()).unwrap();
        assert!((v - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rules_integrate_monomials_exactly() {
        // ∫_T x^a y^b over the reference triangle = a! b! / (a + b + 2)!
        let cx = Arc::new(
            SimplicialComplex::new(
                vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]],
                vec![],
                vec![[0, 1, 2]],
            )
            .unwrap(),
        );
        let t = SimplicialChain::elementary(cx, 2, 0).unwrap();
        let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
        for (rule, deg) in [
            (TriangleRule::Centroid, 1),
            (TriangleRule::ThreePoint, 2),
            (TriangleRule::SevenPoint, 5),
        ] {
            for a in 0..=deg {
                for b in 0..=(deg - a) {
                    let json = format!(
                        r#"{{"d":2,"k":2,"terms":[{{"index":"1,2","monomials":[{{"exps":[{a},{b}],"coef":1.0}}]}}]}}"#
                    );
                    let f = PolynomialForm::from_json(&json).unwrap();
                    let q = Quadrature {
                        segment_points: 2,
                        triangle: rule,
                    };
                    let got = integrate_over_chain(&f, &t, q).unwrap();
                    let exact = fact(a) * fact(b) / fact(a + b + 2);
                    assert!((got - exact).abs() < 1e-14, "{rule:?} x^{a} y^{b}");
                }
            }
        }
    }

    #[test]
    fn gauss_rules_are_exact() {
        for n in 1..=5 {
            let rule = gauss_legendre(n).unwrap();
            for p in 0..(2 * n as i32) {
                let got: f64 = rule.iter().map(|(t, w)| w * t.powi(p)).sum();
                assert!((got - 1.0 / (p + 1) as f64).abs() < 1e-14, "n={n} p={p}");
            }
        }
        assert!(gauss_legendre(6).is_err());
    }
}
