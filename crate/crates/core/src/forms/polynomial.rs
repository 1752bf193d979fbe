use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_frame, check_point, Capability, FormField};
use crate::algebra::{
    binomial, lex_masks, mask_rank, merge_sign, Frame, KCovector, MultiIndex, MAX_DIM,
};
use crate::error::{ensure_finite, Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub exps: Vec<u32>,
    pub coef: f64,
}

impl Monomial {
    pub fn degree(&self) -> u32 {
        self.exps.iter().sum()
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.exps
            .iter()
            .zip(x)
            .fold(self.coef, |acc, (&e, &xi)| acc * xi.powi(e as i32))
    }
}

/// Sparse multivariate polynomial in `d` variables.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Polynomial {
    monomials: Vec<Monomial>,
}

impl Polynomial {
    pub fn new(d: usize, monomials: Vec<Monomial>) -> Result<Self> {
        for m in &monomials {
            if m.exps.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: m.exps.len(),
                });
            }
            ensure_finite("monomial coefficient", &[m.coef])?;
        }
        Ok(Polynomial { monomials })
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    pub fn degree(&self) -> u32 {
        self.monomials.iter().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.monomials.iter().map(|m| m.eval(x)).sum()
    }

    /// `∂/∂x_j`.
    pub fn partial(&self, j: usize) -> Polynomial {
        let monomials = self
            .monomials
            .iter()
            .filter(|m| m.exps[j] > 0)
            .map(|m| {
                let mut exps = m.exps.clone();
                exps[j] -= 1;
                Monomial {
                    exps,
                    coef: m.coef * m.exps[j] as f64,
                }
            })
            .collect();
        Polynomial { monomials }
    }

    /// `Σ_j v_j ∂p/∂x_j` at `x`.
    pub fn directional(&self, x: &[f64], v: &[f64]) -> f64 {
        let mut acc = 0.0;
        for m in &self.monomials {
            for (j, &vj) in v.iter().enumerate() {
                let e = m.exps[j];
                if e == 0 || vj == 0.0 {
                    continue;
                }
                let mut term = m.coef * e as f64 * vj;
                for (i, (&ei, &xi)) in m.exps.iter().zip(x).enumerate() {
                    let p = if i == j { ei - 1 } else { ei };
                    term *= xi.powi(p as i32);
                }
                acc += term;
            }
        }
        acc
    }

    fn is_zero(&self) -> bool {
        self.monomials.iter().all(|m| m.coef == 0.0)
    }
}

/// Exponent vectors in `d` variables of total degree at most `degree`.
fn exponents(d: usize, degree: u32) -> Vec<Vec<u32>> {
    fn rec(d: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == d {
            out.push(cur.clone());
            return;
        }
        for e in 0..=left {
            cur.push(e);
            rec(d, left - e, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(d, degree, &mut Vec::with_capacity(d), &mut out);
    out
}

/// A k-form whose coefficient functions are polynomials.
#[derive(Clone, Debug, PartialEq)]
pub struct PolynomialForm {
    d: usize,
    k: usize,
    /// One polynomial per multi-index, in lexicographic order.
    coeffs: Vec<Polynomial>,
}

impl PolynomialForm {
    pub fn zero(d: usize, k: usize) -> Result<Self> {
        if d > MAX_DIM {
            return Err(Error::DimensionTooLarge(d));
        }
        if k > d {
            return Err(Error::GradeOverflow { j: k, k: 0, d });
        }
        Ok(PolynomialForm {
            d,
            k,
            coeffs: vec![Polynomial::default(); binomial(d, k)],
        })
    }

    /// Form from `(multi-index, polynomial)` pairs; repeated indices add.
    pub fn new(d: usize, k: usize, terms: Vec<(MultiIndex, Polynomial)>) -> Result<Self> {
        let mut form = PolynomialForm::zero(d, k)?;
        for (index, p) in terms {
            if index.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: index.dim(),
                });
            }
            if index.grade() != k {
                return Err(Error::GradeMismatch {
                    expected: k,
                    got: index.grade(),
                });
            }
            for m in &p.monomials {
                if m.exps.len() != d {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        got: m.exps.len(),
                    });
                }
            }
            form.coeffs[index.rank()].monomials.extend(p.monomials);
        }
        Ok(form)
    }

    /// Random coefficients `U(-1, 1)` on every monomial of total degree at
    /// most `degree`, for every multi-index.
    pub fn random<R: Rng + ?Sized>(d: usize, k: usize, degree: u32, rng: &mut R) -> Result<Self> {
        let mut form = PolynomialForm::zero(d, k)?;
        let exps = exponents(d, degree);
        for p in form.coeffs.iter_mut() {
            p.monomials = exps
                .iter()
                .map(|e| Monomial {
                    exps: e.clone(),
                    coef: rng.random_range(-1.0..1.0),
                })
                .collect();
        }
        Ok(form)
    }

    pub fn coefficient(&self, index: &MultiIndex) -> &Polynomial {
        &self.coeffs[index.rank()]
    }

    pub fn degree(&self) -> u32 {
        self.coeffs.iter().map(Polynomial::degree).max().unwrap_or(0)
    }

    /// `dω = Σ_I Σ_j ∂_j p_I dx_j ∧ dx_I`, again a polynomial form.
    pub fn exterior_derivative_form(&self) -> Result<PolynomialForm> {
        let mut out = PolynomialForm::zero(self.d, self.k + 1)?;
        for (mask, p) in lex_masks(self.d, self.k).into_iter().zip(&self.coeffs) {
            for j in 0..self.d {
                let Some(sign) = merge_sign(1 << j, mask) else {
                    continue;
                };
                let dp = p.partial(j);
                let target = mask_rank(self.d, mask | (1 << j));
                out.coeffs[target]
                    .monomials
                    .extend(dp.monomials.into_iter().map(|m| Monomial {
                        exps: m.exps,
                        coef: sign * m.coef,
                    }));
            }
        }
        Ok(out)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

impl FormField for PolynomialForm {
    fn dim(&self) -> usize {
        self.d
    }

    fn grade(&self) -> usize {
        self.k
    }

    fn capability(&self) -> Capability {
        Capability::Analytic
    }

    fn evaluate(&self, x: &[f64]) -> Result<KCovector> {
        check_point(self, x)?;
        KCovector::from_coeffs(self.d, self.k, self.coeffs.iter().map(|p| p.eval(x)).collect())
    }

    fn apply_derivative(&self, x: &[f64], frame: &Frame, v: &[f64]) -> Result<f64> {
        check_point(self, x)?;
        check_point(self, v)?;
        check_frame(self, frame)?;
        let dw = KCovector::from_coeffs(
            self.d,
            self.k,
            self.coeffs.iter().map(|p| p.directional(x, v)).collect(),
        )?;
        dw.apply(&frame.to_kvector()?)
    }
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    index: String,
    monomials: Vec<Monomial>,
}

#[derive(Serialize, Deserialize)]
struct FormRepr {
    d: usize,
    k: usize,
    terms: Vec<TermRepr>,
}

impl Serialize for PolynomialForm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let terms = lex_masks(self.d, self.k)
            .into_iter()
            .zip(&self.coeffs)
            .filter(|(_, p)| !p.is_zero())
            .map(|(mask, p)| TermRepr {
                index: MultiIndex::from_mask(self.d, mask).key(),
                monomials: p.monomials.clone(),
            })
            .collect();
        FormRepr {
            d: self.d,
            k: self.k,
            terms,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PolynomialForm {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = FormRepr::deserialize(de)?;
        let terms = repr
            .terms
            .into_iter()
            .map(|t| {
                let index = MultiIndex::parse(repr.d, &t.index)?;
                Ok((index, Polynomial::new(repr.d, t.monomials)?))
            })
            .collect::<Result<Vec<_>>>()
            .map_err(D::Error::custom)?;
        PolynomialForm::new(repr.d, repr.k, terms).map_err(D::Error::custom)
    }
}
