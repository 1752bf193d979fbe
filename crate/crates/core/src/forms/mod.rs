//! Differential forms as point-evaluable covector fields.

mod integrate;
mod maps;
mod polynomial;

pub use integrate::{integrate_over_chain, Quadrature, TriangleRule};
pub use maps::{AffineMap, Composition, QuadraticMap, SmoothMap};
pub use polynomial::{Monomial, Polynomial, PolynomialForm};

use serde::{Deserialize, Serialize};

use crate::algebra::{Frame, KCovector};
use crate::error::{Error, Result};

/// How a field can differentiate itself.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Capability {
    Analytic,
    Autodiff,
    FiniteDifferenceOnly,
}

/// Which derivative rule to use; `Auto` follows the field's capability.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DerivativeMethod {
    #[default]
    Auto,
    Analytic,
    Autodiff,
    FiniteDifference,
}

/// A k-covector field on `R^d`.
pub trait FormField: Send + Sync {
    fn dim(&self) -> usize;
    fn grade(&self) -> usize;
    fn capability(&self) -> Capability;

    /// The covector `ω(x)`. Fields on large ambient spaces may only support
    /// [`FormField::apply`].
    fn evaluate(&self, x: &[f64]) -> Result<KCovector>;

    /// `<ω(x), v_1 ∧ … ∧ v_k>` for the columns of `frame`.
    fn apply(&self, x: &[f64], frame: &Frame) -> Result<f64> {
        check_point(self, x)?;
        check_frame(self, frame)?;
        self.evaluate(x)?.apply(&frame.to_kvector()?)
    }

    /// Directional derivative `D_v <ω(x), ∧frame>` with the frame held
    /// fixed, computed by the field's own rule.
    fn apply_derivative(&self, _x: &[f64], _frame: &Frame, _v: &[f64]) -> Result<f64> {
        Err(Error::Capability(
            "this field offers only finite differences".into(),
        ))
    }
}

pub(crate) fn check_point<F: FormField + ?Sized>(form: &F, x: &[f64]) -> Result<()> {
    if x.len() != form.dim() {
        return Err(Error::DimensionMismatch {
            expected: form.dim(),
            got: x.len(),
        });
    }
    Ok(())
}

pub(crate) fn check_frame<F: FormField + ?Sized>(form: &F, frame: &Frame) -> Result<()> {
    if frame.grade() != form.grade() {
        return Err(Error::GradeMismatch {
            expected: form.grade(),
            got: frame.grade(),
        });
    }
    if frame.grade() > 0 && frame.dim() != form.dim() {
        return Err(Error::DimensionMismatch {
            expected: form.dim(),
            got: frame.dim(),
        });
    }
    Ok(())
}

/// Central-difference step used by the fallback derivative.
pub fn fd_step(x: &[f64]) -> f64 {
    1e-5 * (1.0 + x.iter().map(|v| v * v).sum::<f64>().sqrt())
}

/// `D_v <ω(x), ∧frame>` by the requested rule.
pub fn directional_derivative<F: FormField + ?Sized>(
    form: &F,
    x: &[f64],
    frame: &Frame,
    v: &[f64],
    method: DerivativeMethod,
) -> Result<f64> {
    check_point(form, x)?;
    check_point(form, v)?;
    let cap = form.capability();
    match method {
        DerivativeMethod::FiniteDifference => central_difference(form, x, frame, v),
        DerivativeMethod::Auto if cap == Capability::FiniteDifferenceOnly => {
            central_difference(form, x, frame, v)
        }
        DerivativeMethod::Auto => form.apply_derivative(x, frame, v),
        DerivativeMethod::Analytic if cap == Capability::Analytic => {
            form.apply_derivative(x, frame, v)
        }
        DerivativeMethod::Autodiff if cap == Capability::Autodiff => {
            form.apply_derivative(x, frame, v)
        }
        _ => Err(Error::Capability(format!(
            "{method:?} derivative requested from a field with capability {cap:?}"
        ))),
    }
}

fn central_difference<F: FormField + ?Sized>(
    form: &F,
    x: &[f64],
    frame: &Frame,
    v: &[f64],
) -> Result<f64> {
    let h = fd_step(x);
    let plus: Vec<f64> = x.iter().zip(v).map(|(a, b)| a + h * b).collect();
    let minus: Vec<f64> = x.iter().zip(v).map(|(a, b)| a - h * b).collect();
    Ok((form.apply(&plus, frame)? - form.apply(&minus, frame)?) / (2.0 * h))
}

/// `<dω(x), v_1 ∧ … ∧ v_{k+1}>` as the alternating sum
/// `Σ_i (-1)^{i-1} D_{v_i} <ω(x), v_1 ∧ … v̂_i … ∧ v_{k+1}>`.
pub fn exterior_derivative<F: FormField + ?Sized>(
    form: &F,
    x: &[f64],
    vs: &[Vec<f64>],
    method: DerivativeMethod,
) -> Result<f64> {
    let k = form.grade();
    if vs.len() != k + 1 {
        return Err(Error::GradeMismatch {
            expected: k + 1,
            got: vs.len(),
        });
    }
    let mut total = 0.0;
    for i in 0..=k {
        let rest: Vec<Vec<f64>> = vs
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, c)| c.clone())
            .collect();
        let frame = if rest.is_empty() {
            Frame::empty(form.dim())
        } else {
            Frame::new(&rest)?
        };
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        total += sign * directional_derivative(form, x, &frame, &vs[i], method)?;
    }
    Ok(total)
}

/// `<(g^♯ω)(z), v_1 ∧ … ∧ v_k> = <ω(g(z)), (∇g v_1) ∧ … ∧ (∇g v_k)>`.
pub fn pullback<G, F>(g: &G, form: &F, z: &[f64], vs: &[Vec<f64>]) -> Result<f64>
where
    G: SmoothMap + ?Sized,
    F: FormField + ?Sized,
{
    if g.codomain_dim() != form.dim() {
        return Err(Error::DimensionMismatch {
            expected: form.dim(),
            got: g.codomain_dim(),
        });
    }
    if vs.len() != form.grade() {
        return Err(Error::GradeMismatch {
            expected: form.grade(),
            got: vs.len(),
        });
    }
    if let Some(bad) = vs.iter().find(|v| v.len() != g.domain_dim()) {
        return Err(Error::DimensionMismatch {
            expected: g.domain_dim(),
            got: bad.len(),
        });
    }
    let x = g.eval(z)?;
    let frame = if vs.is_empty() {
        Frame::empty(form.dim())
    } else {
        Frame::new(vs)?.push_through(&g.jacobian(z)?)?
    };
    form.apply(&x, &frame)
}

/// A field with the same covector everywhere.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstantForm {
    value: KCovector,
}

impl ConstantForm {
    pub fn new(value: KCovector) -> Self {
        ConstantForm { value }
    }
}

impl FormField for ConstantForm {
    fn dim(&self) -> usize {
        self.value.dim()
    }

    fn grade(&self) -> usize {
        self.value.grade()
    }

    fn capability(&self) -> Capability {
        Capability::Analytic
    }

    fn evaluate(&self, x: &[f64]) -> Result<KCovector> {
        check_point(self, x)?;
        Ok(self.value.clone())
    }

    fn apply_derivative(&self, x: &[f64], frame: &Frame, _v: &[f64]) -> Result<f64> {
        check_point(self, x)?;
        check_frame(self, frame)?;
        Ok(0.0)
    }
}

/// Wraps any field and hides its derivative rule.
pub struct FiniteDifferenceOnly<F>(pub F);

impl<F: FormField> FormField for FiniteDifferenceOnly<F> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn grade(&self) -> usize {
        self.0.grade()
    }

    fn capability(&self) -> Capability {
        Capability::FiniteDifferenceOnly
    }

    fn evaluate(&self, x: &[f64]) -> Result<KCovector> {
        self.0.evaluate(x)
    }

    fn apply(&self, x: &[f64], frame: &Frame) -> Result<f64> {
        self.0.apply(x, frame)
    }
}
