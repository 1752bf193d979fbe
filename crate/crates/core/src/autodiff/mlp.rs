use ndarray::Array2;
use rand::Rng;
use rand_distr::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

use super::tape::{Tape, Tensor, Var};
use crate::error::{ensure_finite, Error, Result};

/// Slope of the negative branch of the leaky ReLU.
pub const LEAKY_SLOPE: f64 = 0.2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    LeakyRelu,
    Elu,
    Identity,
}

impl Activation {
    pub fn apply<'t>(self, x: Var<'t>) -> Var<'t> {
        match self {
            Activation::LeakyRelu => x.leaky_relu(LEAKY_SLOPE),
            Activation::Elu => x.elu(),
            Activation::Identity => x,
        }
    }
}

/// Initial parameter distribution of each dense layer.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitScheme {
    /// Weights and biases `U(±1/√fan_in)`.
    #[default]
    FanInUniform,
    /// Weights `U(±√(6/fan_in))`, zero biases.
    HeUniform,
}

/// Layer widths and the activation applied after each dense layer.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpSpec {
    pub widths: Vec<usize>,
    pub activations: Vec<Activation>,
    #[serde(default)]
    pub init: InitScheme,
}

impl MlpSpec {
    pub fn new(widths: Vec<usize>, activations: Vec<Activation>) -> Result<Self> {
        let spec = MlpSpec {
            widths,
            activations,
            init: InitScheme::default(),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Hidden layers share one activation, the last layer is linear.
    pub fn uniform(widths: &[usize], hidden: Activation) -> Result<Self> {
        let layers = widths.len().saturating_sub(1);
        let activations = (0..layers)
            .map(|i| if i + 1 == layers { Activation::Identity } else { hidden })
            .collect();
        MlpSpec::new(widths.to_vec(), activations)
    }

    pub fn with_init(mut self, init: InitScheme) -> Self {
        self.init = init;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.widths.len() < 2 {
            return Err(Error::Shape("an MLP needs at least input and output widths".into()));
        }
        if self.widths.contains(&0) {
            return Err(Error::Shape("layer widths must be positive".into()));
        }
        if self.activations.len() != self.widths.len() - 1 {
            return Err(Error::Shape(format!(
                "{} layers but {} activations",
                self.widths.len() - 1,
                self.activations.len()
            )));
        }
        Ok(())
    }

    pub fn input_dim(&self) -> usize {
        self.widths[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.widths.last().expect("validated")
    }

    pub fn layers(&self) -> usize {
        self.widths.len() - 1
    }

    pub fn num_params(&self) -> usize {
        self.widths.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }
}

/// Weights are `fan_in × fan_out`, biases `1 × fan_out`; inputs are rows.
#[derive(Clone, Debug, PartialEq)]
pub struct MlpParams {
    spec: MlpSpec,
    weights: Vec<Tensor>,
    biases: Vec<Tensor>,
}

impl MlpParams {
    /// Draws parameters according to `spec.init`.
    pub fn init<R: Rng + ?Sized>(spec: &MlpSpec, rng: &mut R) -> Result<Self> {
        spec.validate()?;
        let mut weights = Vec::with_capacity(spec.layers());
        let mut biases = Vec::with_capacity(spec.layers());
        for w in spec.widths.windows(2) {
            let fan_in = w[0] as f64;
            let bound = match spec.init {
                InitScheme::FanInUniform => fan_in.sqrt().recip(),
                InitScheme::HeUniform => (6.0 / fan_in).sqrt(),
            };
            let dist = Uniform::new_inclusive(-bound, bound).expect("finite bound");
            weights.push(Array2::from_shape_fn((w[0], w[1]), |_| dist.sample(rng)));
            biases.push(match spec.init {
                InitScheme::FanInUniform => Array2::from_shape_fn((1, w[1]), |_| dist.sample(rng)),
                InitScheme::HeUniform => Array2::zeros((1, w[1])),
            });
        }
        Ok(MlpParams {
            spec: spec.clone(),
            weights,
            biases,
        })
    }

    pub fn zeros(spec: &MlpSpec) -> Result<Self> {
        spec.validate()?;
        Ok(MlpParams {
            spec: spec.clone(),
            weights: spec
                .widths
                .windows(2)
                .map(|w| Array2::zeros((w[0], w[1])))
                .collect(),
            biases: spec.widths.windows(2).map(|w| Array2::zeros((1, w[1]))).collect(),
        })
    }

    pub fn from_parts(spec: &MlpSpec, weights: Vec<Tensor>, biases: Vec<Tensor>) -> Result<Self> {
        spec.validate()?;
        if weights.len() != spec.layers() || biases.len() != spec.layers() {
            return Err(Error::Shape("layer count does not match spec".into()));
        }
        for (i, w) in spec.widths.windows(2).enumerate() {
            if weights[i].dim() != (w[0], w[1]) || biases[i].dim() != (1, w[1]) {
                return Err(Error::Shape(format!("layer {i} has wrong shape")));
            }
            if !weights[i].iter().chain(biases[i].iter()).all(|v| v.is_finite()) {
                return Err(Error::NonFinite(format!("layer {i} parameters")));
            }
        }
        Ok(MlpParams {
            spec: spec.clone(),
            weights,
            biases,
        })
    }

    pub fn spec(&self) -> &MlpSpec {
        &self.spec
    }

    pub fn weights(&self) -> &[Tensor] {
        &self.weights
    }

    pub fn biases(&self) -> &[Tensor] {
        &self.biases
    }

    /// Parameter arrays in the order `w0, b0, w1, b1, …`.
    pub fn tensors(&self) -> Vec<&Tensor> {
        self.weights
            .iter()
            .zip(&self.biases)
            .flat_map(|(w, b)| [w, b])
            .collect()
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Tensor> {
        self.weights
            .iter_mut()
            .zip(self.biases.iter_mut())
            .flat_map(|(w, b)| [w, b])
            .collect()
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.tensors().into_iter().flat_map(|t| t.iter().copied()).collect()
    }

    pub fn from_flat(spec: &MlpSpec, flat: &[f64]) -> Result<Self> {
        if flat.len() != spec.num_params() {
            return Err(Error::Shape(format!(
                "expected {} parameters, got {}",
                spec.num_params(),
                flat.len()
            )));
        }
        ensure_finite("parameters", flat)?;
        let mut params = MlpParams::zeros(spec)?;
        let mut pos = 0;
        for t in params.tensors_mut() {
            for v in t.iter_mut() {
                *v = flat[pos];
                pos += 1;
            }
        }
        Ok(params)
    }

    /// Records all parameters as leaves of `tape`.
    pub fn on_tape<'t>(&self, tape: &'t Tape) -> MlpVars<'t> {
        MlpVars {
            spec: self.spec.clone(),
            weights: self.weights.iter().map(|w| tape.leaf(w.clone())).collect(),
            biases: self.biases.iter().map(|b| tape.leaf(b.clone())).collect(),
        }
    }

    /// Plain forward pass on rows of `x` without recording gradients.
    pub fn forward_values(&self, x: &Tensor) -> Result<Tensor> {
        let tape = Tape::new();
        let vars = self.on_tape(&tape);
        let out = vars.forward(tape.leaf(x.clone()))?;
        let value = out.value();
        Ok((*value).clone())
    }
}

/// Parameters of an [`MlpParams`] recorded on a tape.
pub struct MlpVars<'t> {
    spec: MlpSpec,
    weights: Vec<Var<'t>>,
    biases: Vec<Var<'t>>,
}

impl<'t> MlpVars<'t> {
    /// Leaves in the same order as [`MlpParams::tensors`].
    pub fn leaves(&self) -> Vec<Var<'t>> {
        self.weights
            .iter()
            .zip(&self.biases)
            .flat_map(|(&w, &b)| [w, b])
            .collect()
    }

    pub fn spec(&self) -> &MlpSpec {
        &self.spec
    }

    /// Forward pass on a batch with one sample per row.
    pub fn forward(&self, x: Var<'t>) -> Result<Var<'t>> {
        mlp_forward(self, x)
    }
}

/// Forward pass of a recorded MLP; rows of `x` are samples.
pub fn mlp_forward<'t>(params: &MlpVars<'t>, x: Var<'t>) -> Result<Var<'t>> {
    let (n, d) = x.shape();
    if d != params.spec.input_dim() {
        return Err(Error::Shape(format!(
            "input has {d} columns, network expects {}",
            params.spec.input_dim()
        )));
    }
    let mut h = x;
    for ((&w, &b), &act) in params
        .weights
        .iter()
        .zip(&params.biases)
        .zip(&params.spec.activations)
    {
        let (_, out) = w.shape();
        h = act.apply(h.matmul(w) + b.broadcast_to(n, out));
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::arr2;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_network_outputs_zero() {
        let spec = MlpSpec::uniform(&[3, 4, 2], Activation::LeakyRelu).unwrap();
        let p = MlpParams::zeros(&spec).unwrap();
        let y = p.forward_values(&arr2(&[[1.0, -2.0, 0.5]])).unwrap();
        assert_eq!(y, arr2(&[[0.0, 0.0]]));
    }

    #[test]
    fn single_layer_is_affine() {
        let spec = MlpSpec::uniform(&[2, 2], Activation::Elu).unwrap();
        let w = arr2(&[[1.0, 2.0], [3.0, 4.0]]);
        let b = arr2(&[[0.5, -0.5]]);
        let p = MlpParams::from_parts(&spec, vec![w.clone()], vec![b.clone()]).unwrap();
        let x = arr2(&[[1.0, 1.0], [0.0, -1.0]]);
        let y = p.forward_values(&x).unwrap();
        let expect = x.dot(&w) + &b;
        assert!((y - expect).iter().all(|e| e.abs() < 1e-12));
    }

    #[test]
    fn init_is_bounded_and_seeded() {
        let spec = MlpSpec::uniform(&[6, 250, 2], Activation::LeakyRelu).unwrap();
        let a = MlpParams::init(&spec, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let b = MlpParams::init(&spec, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(a, b);
        let fan_in = 6f64.sqrt().recip();
        assert!(a.weights()[0].iter().all(|w| w.abs() <= fan_in));
        assert!(a.biases()[0].iter().all(|v| v.abs() <= fan_in));
        assert!(a.biases()[1].iter().all(|v| v.abs() <= 250f64.sqrt().recip()));
        assert!(a.biases()[0].iter().any(|&v| v != 0.0));
        assert_eq!(a.to_flat().len(), spec.num_params());

        let he = spec.with_init(InitScheme::HeUniform);
        let c = MlpParams::init(&he, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert!(c.weights()[0].iter().all(|w| w.abs() <= 1.0));
        assert!(c.biases().iter().all(|b| b.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn flat_round_trip() {
        let spec = MlpSpec::uniform(&[2, 3, 1], Activation::Elu).unwrap();
        let p = MlpParams::init(&spec, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        let q = MlpParams::from_flat(&spec, &p.to_flat()).unwrap();
        assert_eq!(p, q);
        assert!(MlpParams::from_flat(&spec, &[0.0]).is_err());
    }

    #[test]
    fn shape_errors() {
        assert!(MlpSpec::new(vec![2], vec![]).is_err());
        assert!(MlpSpec::new(vec![2, 3], vec![]).is_err());
        let spec = MlpSpec::uniform(&[2, 1], Activation::Identity).unwrap();
        let p = MlpParams::zeros(&spec).unwrap();
        assert!(p.forward_values(&arr2(&[[1.0, 2.0, 3.0]])).is_err());
    }
}
