use rand::Rng;

use crate::algebra::{Frame, KCovector};
use crate::autodiff::{Activation, MlpParams, MlpSpec, MlpVars, Tape, Tensor, Var};
use crate::error::{Error, Result};
use crate::forms::{Capability, FormField};

/// `(z_1, …, z_l) ↦ (cos z_1, sin z_1, z_2, …, z_l)`.
pub fn circle_embedding<'t>(z: Var<'t>) -> Var<'t> {
    let (_, l) = z.shape();
    let angle = z.slice_cols(0, 1);
    let head = angle.cos().concat_cols(angle.sin());
    if l > 1 {
        head.concat_cols(z.slice_cols(1, l - 1))
    } else {
        head
    }
}

/// Generator `g_θ = net ∘ embedding` with a circular first latent coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorModel {
    pub net: MlpParams,
}

impl GeneratorModel {
    pub fn new(net: MlpParams) -> Result<Self> {
        if net.spec().input_dim() < 2 {
            return Err(Error::Shape(
                "generator net must accept the two embedded angle coordinates".into(),
            ));
        }
        Ok(GeneratorModel { net })
    }

    /// The `5–6–250–250–250–2` leaky-ReLU network.
    pub fn paper_spec() -> MlpSpec {
        MlpSpec::uniform(&[6, 250, 250, 250, 2], Activation::LeakyRelu)
            .expect("static widths are valid")
    }

    pub fn init<R: Rng + ?Sized>(spec: &MlpSpec, rng: &mut R) -> Result<Self> {
        GeneratorModel::new(MlpParams::init(spec, rng)?)
    }

    pub fn latent_dim(&self) -> usize {
        self.net.spec().input_dim() - 1
    }

    pub fn output_dim(&self) -> usize {
        self.net.spec().output_dim()
    }

    pub fn on_tape<'t>(&self, tape: &'t Tape) -> GeneratorVars<'t> {
        GeneratorVars {
            net: self.net.on_tape(tape),
        }
    }

    /// Images of the latent rows of `z`.
    pub fn generate(&self, z: &Tensor) -> Result<Tensor> {
        let tape = Tape::new();
        let g = self.on_tape(&tape);
        let out = g.forward(tape.leaf(z.clone()))?;
        let v = out.value();
        Ok((*v).clone())
    }

    /// Images and `∂g/∂z_1` at the latent rows of `z`.
    pub fn generate_with_tangent(&self, z: &Tensor) -> Result<(Tensor, Tensor)> {
        let tape = Tape::new();
        let g = self.on_tape(&tape);
        let zv = tape.leaf(z.clone());
        let x = g.forward(zv)?;
        let t = tape.jvp(x, zv, tape.leaf(first_axis(z.nrows(), z.ncols())))?;
        let (xv, tv) = (x.value(), t.value());
        Ok(((*xv).clone(), (*tv).clone()))
    }
}

/// `n × l` rows of the unit vector `e_1`.
pub(crate) fn first_axis(n: usize, l: usize) -> Tensor {
    Tensor::from_shape_fn((n, l), |(_, j)| if j == 0 { 1.0 } else { 0.0 })
}

pub struct GeneratorVars<'t> {
    pub net: MlpVars<'t>,
}

impl<'t> GeneratorVars<'t> {
    pub fn forward(&self, z: Var<'t>) -> Result<Var<'t>> {
        self.net.forward(circle_embedding(z))
    }

    pub fn leaves(&self) -> Vec<Var<'t>> {
        self.net.leaves()
    }
}

/// `ω(x, v) = ω⁰(x) + α <ω^{1,1}(x), v>` for grades 0 and 1.
///
/// `omega0` is required at grade 0; at grade 1 it is the optional affine
/// term and `omega1` maps `R^d → R^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscriminatorModel {
    pub omega0: Option<MlpParams>,
    pub omega1: Option<MlpParams>,
    pub alpha: f64,
}

impl DiscriminatorModel {
    pub fn new(omega0: Option<MlpParams>, omega1: Option<MlpParams>, alpha: f64) -> Result<Self> {
        let m = DiscriminatorModel {
            omega0,
            omega1,
            alpha,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "mixing weight must be positive, got {}",
                self.alpha
            )));
        }
        if self.omega0.is_none() && self.omega1.is_none() {
            return Err(Error::InvalidArgument("discriminator has no networks".into()));
        }
        let d = self.dim();
        if let Some(w0) = &self.omega0 {
            if w0.spec().input_dim() != d || w0.spec().output_dim() != 1 {
                return Err(Error::Shape(format!(
                    "affine network must map R^{d} to R, got {:?}",
                    w0.spec().widths
                )));
            }
        }
        if let Some(w1) = &self.omega1 {
            if w1.spec().output_dim() != d {
                return Err(Error::Shape(format!(
                    "tangent network must map R^{d} to R^{d}, got {:?}",
                    w1.spec().widths
                )));
            }
        }
        Ok(())
    }

    /// `2–100–100–100–1` and, for grade 1, `2–100–100–2`.
    pub fn paper_specs(k: usize) -> (MlpSpec, Option<MlpSpec>) {
        let w0 = MlpSpec::uniform(&[2, 100, 100, 100, 1], Activation::LeakyRelu)
            .expect("static widths are valid");
        let w1 = (k >= 1).then(|| {
            MlpSpec::uniform(&[2, 100, 100, 2], Activation::LeakyRelu)
                .expect("static widths are valid")
        });
        (w0, w1)
    }

    pub fn init<R: Rng + ?Sized>(
        omega0: Option<&MlpSpec>,
        omega1: Option<&MlpSpec>,
        alpha: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let w0 = omega0.map(|s| MlpParams::init(s, rng)).transpose()?;
        let w1 = omega1.map(|s| MlpParams::init(s, rng)).transpose()?;
        DiscriminatorModel::new(w0, w1, alpha)
    }

    pub fn grade(&self) -> usize {
        usize::from(self.omega1.is_some())
    }

    pub fn dim(&self) -> usize {
        self.omega0
            .as_ref()
            .or(self.omega1.as_ref())
            .map_or(0, |p| p.spec().input_dim())
    }

    /// Networks with their checkpoint names.
    pub fn networks(&self) -> Vec<(&'static str, &MlpParams)> {
        let mut v = Vec::new();
        if let Some(w) = &self.omega0 {
            v.push(("omega0", w));
        }
        if let Some(w) = &self.omega1 {
            v.push(("omega1", w));
        }
        v
    }

    pub fn tensors(&self) -> Vec<&Tensor> {
        self.networks().into_iter().flat_map(|(_, p)| p.tensors()).collect()
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Tensor> {
        let mut v = Vec::new();
        if let Some(w) = &mut self.omega0 {
            v.extend(w.tensors_mut());
        }
        if let Some(w) = &mut self.omega1 {
            v.extend(w.tensors_mut());
        }
        v
    }

    pub fn on_tape<'t>(&self, tape: &'t Tape) -> DiscriminatorVars<'t> {
        DiscriminatorVars {
            omega0: self.omega0.as_ref().map(|p| p.on_tape(tape)),
            omega1: self.omega1.as_ref().map(|p| p.on_tape(tape)),
            alpha: self.alpha,
        }
    }
}

pub struct DiscriminatorVars<'t> {
    pub omega0: Option<MlpVars<'t>>,
    pub omega1: Option<MlpVars<'t>>,
    pub alpha: f64,
}

impl<'t> DiscriminatorVars<'t> {
    /// Leaves in the order of [`DiscriminatorModel::tensors`].
    pub fn leaves(&self) -> Vec<Var<'t>> {
        self.omega0
            .iter()
            .chain(&self.omega1)
            .flat_map(MlpVars::leaves)
            .collect()
    }

    pub fn grade(&self) -> usize {
        usize::from(self.omega1.is_some())
    }

    /// `ω⁰` on the rows of `x`, or zeros when absent.
    pub fn affine(&self, x: Var<'t>) -> Result<Var<'t>> {
        match &self.omega0 {
            Some(w) => w.forward(x),
            None => Ok(x.tape().zeros(x.shape().0, 1)),
        }
    }

    /// `ω^{1,1}` on the rows of `x`.
    pub fn tangent_field(&self, x: Var<'t>) -> Result<Var<'t>> {
        self.omega1
            .as_ref()
            .ok_or(Error::GradeMismatch {
                expected: 1,
                got: 0,
            })?
            .forward(x)
    }

    /// `ω(x_i, v_i)` per row, as `n × 1`. `v` is required at grade 1.
    pub fn omega(&self, x: Var<'t>, v: Option<Var<'t>>) -> Result<Var<'t>> {
        match (self.grade(), v) {
            (0, _) => self.affine(x),
            (_, Some(v)) => {
                if v.shape() != x.shape() {
                    return Err(Error::Shape(format!(
                        "tangent rows {:?} do not match points {:?}",
                        v.shape(),
                        x.shape()
                    )));
                }
                let lin = self.tangent_field(x)?.row_dot(v).scale(self.alpha);
                Ok(if self.omega0.is_some() {
                    self.affine(x)? + lin
                } else {
                    lin
                })
            }
            (_, None) => Err(Error::GradeMismatch {
                expected: 1,
                got: 0,
            }),
        }
    }
}

/// `ω(x, v_1 ∧ … ∧ v_k)` at a single point.
pub fn omega_apply(d: &DiscriminatorModel, x: &[f64], frame: &Frame) -> Result<f64> {
    let dim = d.dim();
    if x.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: x.len(),
        });
    }
    if frame.grade() != d.grade() {
        return Err(Error::GradeMismatch {
            expected: d.grade(),
            got: frame.grade(),
        });
    }
    let tape = Tape::new();
    let vars = d.on_tape(&tape);
    let xv = tape.leaf(Tensor::from_shape_vec((1, dim), x.to_vec()).expect("row"));
    let v = if d.grade() == 1 {
        if frame.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: frame.dim(),
            });
        }
        Some(tape.leaf(Tensor::from_shape_vec((1, dim), frame.column(0)).expect("row")))
    } else {
        None
    };
    Ok(vars.omega(xv, v)?.scalar())
}

/// A trained discriminator viewed as a k-covector field.
///
/// At grade 1 the covector is `α ω^{1,1}(x)`; the affine term is not a
/// covector and is left out of this view.
#[derive(Clone, Debug)]
pub struct NeuralForm {
    pub model: DiscriminatorModel,
}

impl NeuralForm {
    pub fn new(model: DiscriminatorModel) -> Self {
        NeuralForm { model }
    }

    fn linear_value_and_grad(&self, x: &[f64], frame: &Frame) -> Result<(f64, Vec<f64>)> {
        let d = self.model.dim();
        let tape = Tape::new();
        let vars = self.model.on_tape(&tape);
        let xv = tape.leaf(Tensor::from_shape_vec((1, d), x.to_vec()).expect("row"));
        let out = if self.model.grade() == 0 {
            vars.affine(xv)?
        } else {
            let v = tape.leaf(Tensor::from_shape_vec((1, d), frame.column(0)).expect("row"));
            vars.tangent_field(xv)?.row_dot(v).scale(self.model.alpha)
        };
        let g = tape.grad(out, &[xv])?[0].value();
        Ok((out.scalar(), g.iter().copied().collect()))
    }
}

impl FormField for NeuralForm {
    fn dim(&self) -> usize {
        self.model.dim()
    }

    fn grade(&self) -> usize {
        self.model.grade()
    }

    fn capability(&self) -> Capability {
        Capability::Autodiff
    }

    fn evaluate(&self, x: &[f64]) -> Result<KCovector> {
        crate::forms::check_point(self, x)?;
        let d = self.model.dim();
        let row = Tensor::from_shape_vec((1, d), x.to_vec()).expect("row");
        if self.model.grade() == 0 {
            let w0 = self.model.omega0.as_ref().expect("grade 0 has an affine net");
            KCovector::scalar(d, w0.forward_values(&row)?[(0, 0)])
        } else {
            let w1 = self.model.omega1.as_ref().expect("grade 1 has a tangent net");
            let v = w1.forward_values(&row)?;
            let c: Vec<f64> = v.iter().map(|c| c * self.model.alpha).collect();
            KCovector::from_components(&c)
        }
    }

    fn apply(&self, x: &[f64], frame: &Frame) -> Result<f64> {
        crate::forms::check_point(self, x)?;
        crate::forms::check_frame(self, frame)?;
        Ok(self.linear_value_and_grad(x, frame)?.0)
    }

    fn apply_derivative(&self, x: &[f64], frame: &Frame, v: &[f64]) -> Result<f64> {
        crate::forms::check_point(self, x)?;
        crate::forms::check_frame(self, frame)?;
        let (_, g) = self.linear_value_and_grad(x, frame)?;
        Ok(g.iter().zip(v).map(|(a, b)| a * b).sum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{directional_derivative, DerivativeMethod};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn small_disc(k: usize, seed: u64) -> DiscriminatorModel {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s0 = MlpSpec::uniform(&[2, 8, 8, 1], Activation::LeakyRelu).unwrap();
        let s1 = MlpSpec::uniform(&[2, 8, 2], Activation::Elu).unwrap();
        DiscriminatorModel::init(Some(&s0), (k == 1).then_some(&s1), 0.7, &mut rng).unwrap()
    }

    #[test]
    fn embedding_is_periodic() {
        let tape = Tape::new();
        let pi = std::f64::consts::PI;
        let z = tape.leaf(Tensor::from_shape_vec((2, 3), vec![-pi, 0.4, -1.0, pi, 0.4, -1.0]).unwrap());
        let e = circle_embedding(z).value();
        assert_eq!(e.ncols(), 4);
        for j in 0..4 {
            assert!((e[(0, j)] - e[(1, j)]).abs() < 1e-12);
        }
    }

    #[test]
    fn grade_zero_is_plain_critic() {
        let d = small_disc(0, 1);
        let x = [0.3, -0.2];
        let direct = d.omega0.as_ref().unwrap().forward_values(
            &Tensor::from_shape_vec((1, 2), x.to_vec()).unwrap(),
        )
        .unwrap()[(0, 0)];
        assert_eq!(omega_apply(&d, &x, &Frame::empty(2)).unwrap(), direct);
    }

    #[test]
    fn grade_one_orientation() {
        let d = small_disc(1, 2);
        let x = [0.5, 0.1];
        let base = omega_apply(&d, &x, &Frame::new(&[vec![0.0, 0.0]]).unwrap()).unwrap();
        let mut d0 = d.clone();
        d0.omega1 = None;
        assert_eq!(base, omega_apply(&d0, &x, &Frame::empty(2)).unwrap());

        let v = vec![0.6, -1.1];
        let plus = omega_apply(&d, &x, &Frame::new(&[v.clone()]).unwrap()).unwrap() - base;
        let minus = omega_apply(&d, &x, &Frame::new(&[vec![-0.6, 1.1]]).unwrap()).unwrap() - base;
        assert!((plus + minus).abs() < 1e-14);
        let double = omega_apply(&d, &x, &Frame::new(&[vec![1.2, -2.2]]).unwrap()).unwrap() - base;
        assert!((double - 2.0 * plus).abs() < 1e-13);
    }

    #[test]
    fn neural_form_derivative_matches_differences() {
        for k in [0, 1] {
            let f = NeuralForm::new(small_disc(k, 5));
            let frame = if k == 0 {
                Frame::empty(2)
            } else {
                Frame::new(&[vec![0.3, 0.8]]).unwrap()
            };
            let x = [0.21, -0.37];
            let v = [0.5, 0.9];
            let ad = directional_derivative(&f, &x, &frame, &v, DerivativeMethod::Autodiff).unwrap();
            let fd =
                directional_derivative(&f, &x, &frame, &v, DerivativeMethod::FiniteDifference).unwrap();
            assert!((ad - fd).abs() < 1e-6 * (1.0 + ad.abs()), "k={k}: {ad} vs {fd}");
            let via_cov = f.evaluate(&x).unwrap().apply(&frame.to_kvector().unwrap()).unwrap();
            assert!((via_cov - f.apply(&x, &frame).unwrap()).abs() < 1e-14);
        }
    }

    #[test]
    fn shapes_are_checked() {
        let d = small_disc(1, 3);
        assert!(omega_apply(&d, &[0.0, 0.0, 0.0], &Frame::standard(3, 1)).is_err());
        assert!(omega_apply(&d, &[0.0, 0.0], &Frame::empty(2)).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let bad = MlpSpec::uniform(&[2, 4, 3], Activation::LeakyRelu).unwrap();
        assert!(DiscriminatorModel::init(None, Some(&bad), 1.0, &mut rng).is_err());
        let s1 = MlpSpec::uniform(&[2, 4, 2], Activation::LeakyRelu).unwrap();
        assert!(DiscriminatorModel::init(None, Some(&s1), 0.0, &mut rng).is_err());
    }
}
