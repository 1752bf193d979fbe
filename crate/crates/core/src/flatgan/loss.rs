use rand::Rng;

use super::data::DataCurrentSpec;
use super::model::{first_axis, DiscriminatorVars, GeneratorVars};
use crate::algebra::haar_frame_sample;
use crate::autodiff::{Tape, Tensor, Var};
use crate::error::{Error, Result};

fn check_grade(d: &DiscriminatorVars<'_>, k: usize) -> Result<()> {
    if d.grade() != k || k > 1 {
        return Err(Error::GradeMismatch {
            expected: d.grade(),
            got: k,
        });
    }
    Ok(())
}

fn finite(v: Var<'_>, what: &str) -> Result<()> {
    if v.value().iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what.to_string()))
    }
}

/// `(1/n) Σ_j <ω(g(z_j)), ∂g/∂z_1(z_j)>` for `k = 1`, or the mean critic
/// value of the generated points for `k = 0`.
///
/// `z` must be a node of the tape so that the Jacobian-vector products can
/// be recorded; the result is differentiable in both networks.
pub fn generator_term<'t>(
    g: &GeneratorVars<'t>,
    d: &DiscriminatorVars<'t>,
    z: Var<'t>,
    k: usize,
) -> Result<Var<'t>> {
    check_grade(d, k)?;
    let x = g.forward(z)?;
    finite(x, "generated points")?;
    let out = if k == 0 {
        d.omega(x, None)?
    } else {
        let (n, l) = z.shape();
        let tape = z.tape();
        let t = tape.jvp(x, z, tape.leaf(first_axis(n, l)))?;
        d.omega(x, Some(t))?
    };
    Ok(out.mean())
}

/// `(1/N) Σ_i <ω(x_i), T_i>`.
pub fn data_term<'t>(
    tape: &'t Tape,
    d: &DiscriminatorVars<'t>,
    data: &DataCurrentSpec,
    k: usize,
) -> Result<Var<'t>> {
    check_grade(d, k)?;
    let x = tape.leaf(data.points_tensor());
    let v = if k == 1 {
        Some(tape.leaf(data.tangents_tensor()?))
    } else {
        None
    };
    Ok(d.omega(x, v)?.mean())
}

/// Both penalty parts, already multiplied by `ρ`.
pub struct PenaltyTerms<'t> {
    /// Comass excess `ρ E[max(0, |<ω(x), v>| - λ)²]`.
    pub comass: Var<'t>,
    /// Derivative excess `ρ E[max(0, |dω(x, v)| - 1)²]`.
    pub exterior: Var<'t>,
}

impl<'t> PenaltyTerms<'t> {
    pub fn total(&self) -> Var<'t> {
        self.comass + self.exterior
    }
}

fn excess_squared(v: Var<'_>, bound: f64) -> Var<'_> {
    let e = v.abs().add_scalar(-bound).relu();
    (e * e).mean()
}

fn replicate_rows(x: &Tensor, m: usize) -> Tensor {
    let (n, c) = x.dim();
    Tensor::from_shape_fn((n * m, c), |(i, j)| x[(i / m, j)])
}

/// Monte Carlo penalties at the rows of `points`.
///
/// Each point gets `samples` Haar-distributed unit `k`-vectors for the
/// comass part and `samples` orthonormal `(k+1)`-frames for the derivative
/// part, where `|dω|` is bounded by
/// `(k+1) |∇ω⁰(x)| + α |Σ_i (-1)^{i-1} ∇_x <ω^{1,1}(x), V_i> · v_i|`.
/// At `k = 0` no directions are needed and each point is used once.
#[allow(clippy::too_many_arguments)]
pub fn penalty<'t, R: Rng + ?Sized>(
    tape: &'t Tape,
    d: &DiscriminatorVars<'t>,
    points: &Tensor,
    k: usize,
    lambda: f64,
    rho: f64,
    samples: usize,
    rng: &mut R,
) -> Result<PenaltyTerms<'t>> {
    check_grade(d, k)?;
    let dim = points.ncols();
    if k == 0 {
        let x = tape.leaf(points.clone());
        let w0 = d.affine(x)?;
        let g = tape.grad(w0, &[x])?[0];
        let comass = excess_squared(w0, lambda).scale(rho);
        let exterior = excess_squared(g.row_norm(), 1.0).scale(rho);
        finite(comass + exterior, "penalty")?;
        return Ok(PenaltyTerms { comass, exterior });
    }
    if samples == 0 {
        return Err(Error::InvalidArgument("penalty needs at least one sample".into()));
    }
    let rows = replicate_rows(points, samples);
    let n = rows.nrows();
    let mut v = Tensor::zeros((n, dim));
    let mut v1 = Tensor::zeros((n, dim));
    let mut v2 = Tensor::zeros((n, dim));
    for i in 0..n {
        let f = haar_frame_sample(dim, 1, rng)?;
        let f2 = haar_frame_sample(dim, 2, rng)?;
        for j in 0..dim {
            v[(i, j)] = f.matrix()[(j, 0)];
            v1[(i, j)] = f2.matrix()[(j, 0)];
            v2[(i, j)] = f2.matrix()[(j, 1)];
        }
    }
    let x = tape.leaf(rows);
    let (v, v1, v2) = (tape.leaf(v), tape.leaf(v1), tape.leaf(v2));
    let comass = excess_squared(d.omega(x, Some(v))?, lambda).scale(rho);

    let w1 = d.tangent_field(x)?;
    let s1 = w1.row_dot(v1);
    let s2 = w1.row_dot(v2);
    let g2 = tape.grad(s2, &[x])?[0];
    let g1 = tape.grad(s1, &[x])?[0];
    let alt = (g2.row_dot(v1) - g1.row_dot(v2)).abs().scale(d.alpha);
    let bound = if d.omega0.is_some() {
        let w0 = d.affine(x)?;
        let g0 = tape.grad(w0, &[x])?[0];
        g0.row_norm().scale((k + 1) as f64) + alt
    } else {
        alt
    };
    let exterior = excess_squared(bound, 1.0).scale(rho);
    finite(comass + exterior, "penalty")?;
    Ok(PenaltyTerms { comass, exterior })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::{Activation, MlpParams, MlpSpec};
    use crate::flatgan::data::build_circle_dataset;
    use crate::flatgan::model::{DiscriminatorModel, GeneratorModel};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Single identity layer `x ↦ x·w + b`.
    fn linear(w: &[f64], b: &[f64], d_in: usize) -> MlpParams {
        let d_out = b.len();
        let spec = MlpSpec::new(vec![d_in, d_out], vec![Activation::Identity]).unwrap();
        MlpParams::from_parts(
            &spec,
            vec![Tensor::from_shape_vec((d_in, d_out), w.to_vec()).unwrap()],
            vec![Tensor::from_shape_vec((1, d_out), b.to_vec()).unwrap()],
        )
        .unwrap()
    }

    #[test]
    fn gradient_penalty_of_steep_linear_critic() {
        // ω⁰(x) = 2 x_1 at the origin: gradient norm 2, value 0
        let disc = DiscriminatorModel::new(Some(linear(&[2.0, 0.0], &[0.0], 2)), None, 1.0).unwrap();
        let tape = Tape::new();
        let dv = disc.on_tape(&tape);
        let pts = Tensor::zeros((3, 2));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let p = penalty(&tape, &dv, &pts, 0, 1.0, 10.0, 4, &mut rng).unwrap();
        assert!((p.exterior.scalar() / 10.0 - 1.0).abs() < 1e-14);
        assert_eq!(p.comass.scalar(), 0.0);
    }

    #[test]
    fn feasible_linear_forms_are_free() {
        // slope 0.5 affine part and a zero tangent field
        let disc = DiscriminatorModel::new(
            Some(linear(&[0.5, 0.0], &[0.0], 2)),
            Some(linear(&[0.0; 4], &[0.0, 0.0], 2)),
            1.0,
        )
        .unwrap();
        let data = build_circle_dataset(5, 1.0, 0).unwrap();
        let tape = Tape::new();
        let dv = disc.on_tape(&tape);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = penalty(&tape, &dv, &data.points_tensor(), 1, 1.0, 10.0, 4, &mut rng).unwrap();
        assert_eq!(p.total().scalar(), 0.0);
    }

    #[test]
    fn rotation_field_has_exterior_derivative_two() {
        // ω¹(x) = (-x_2, x_1): dω = 2 dx_1∧dx_2, so |dω(v_1, v_2)| = 2 on
        // any orthonormal frame and the excess is (2α - 1)²
        let disc = DiscriminatorModel::new(
            None,
            Some(linear(&[0.0, 1.0, -1.0, 0.0], &[0.0, 0.0], 2)),
            0.75,
        )
        .unwrap();
        let tape = Tape::new();
        let dv = disc.on_tape(&tape);
        let pts = Tensor::from_shape_vec((2, 2), vec![0.1, 0.2, -0.3, 0.05]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = penalty(&tape, &dv, &pts, 1, 1.0, 1.0, 4, &mut rng).unwrap();
        assert!((p.exterior.scalar() - 0.25).abs() < 1e-14);
    }

    #[test]
    fn data_term_is_linear_in_tangents() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (s0, s1) = DiscriminatorModel::paper_specs(1);
        let disc = DiscriminatorModel::init(Some(&s0), s1.as_ref(), 1.0, &mut rng).unwrap();
        let data = build_circle_dataset(5, 1.0, 0).unwrap();
        let mut doubled = data.clone();
        doubled.tangents.iter_mut().flatten().for_each(|t| *t *= 2.0);
        let tape = Tape::new();
        let dv = disc.on_tape(&tape);
        let base = data_term(&tape, &dv, &data, 1).unwrap().scalar();
        let two = data_term(&tape, &dv, &doubled, 1).unwrap().scalar();
        let x = tape.leaf(data.points_tensor());
        let affine = dv.affine(x).unwrap().mean().scalar();
        assert!(((two - affine) - 2.0 * (base - affine)).abs() < 1e-12);

        let one = DataCurrentSpec::new(vec![data.points[2].clone()], vec![data.tangents[2].clone()])
            .unwrap();
        let single = data_term(&tape, &dv, &one, 1).unwrap().scalar();
        let frame = crate::algebra::Frame::new(&[data.tangents[2].clone()]).unwrap();
        let direct = crate::flatgan::omega_apply(&disc, &data.points[2], &frame).unwrap();
        assert!((single - direct).abs() < 1e-14);
    }

    #[test]
    fn linear_generator_term() {
        // g(z) = A·embed(z) with embed(z) = (cos z_1, sin z_1, z_2);
        // ∂g/∂z_1 = A·(-sin z_1, cos z_1, 0)
        let a = [0.5, -1.0, 2.0, 0.3, 0.7, 1.5];
        let gen = GeneratorModel::new(linear(&a, &[0.1, -0.2], 3)).unwrap();
        let disc = DiscriminatorModel::new(
            Some(linear(&[1.0, -2.0], &[0.5], 2)),
            Some(linear(&[1.0, 2.0, 3.0, 4.0], &[0.0, 1.0], 2)),
            0.5,
        )
        .unwrap();
        let z = [0.4, -1.3];
        let tape = Tape::new();
        let (gv, dv) = (gen.on_tape(&tape), disc.on_tape(&tape));
        let zv = tape.leaf(Tensor::from_shape_vec((1, 2), z.to_vec()).unwrap());
        let got = generator_term(&gv, &dv, zv, 1).unwrap().scalar();

        let e = [z[0].cos(), z[0].sin(), z[1]];
        let de = [-z[0].sin(), z[0].cos(), 0.0];
        let apply = |v: &[f64; 3], b: [f64; 2]| {
            let mut out = b;
            for i in 0..3 {
                for j in 0..2 {
                    out[j] += v[i] * a[i * 2 + j];
                }
            }
            out
        };
        let x = apply(&e, [0.1, -0.2]);
        let t = apply(&de, [0.0, 0.0]);
        let w0 = x[0] - 2.0 * x[1] + 0.5;
        let w1 = [x[0] + 3.0 * x[1], 2.0 * x[0] + 4.0 * x[1] + 1.0];
        let expected = w0 + 0.5 * (w1[0] * t[0] + w1[1] * t[1]);
        assert!((got - expected).abs() < 1e-13, "{got} vs {expected}");
    }

    #[test]
    fn grade_mismatch_is_reported() {
        let disc = DiscriminatorModel::new(Some(linear(&[1.0, 0.0], &[0.0], 2)), None, 1.0).unwrap();
        let data = build_circle_dataset(5, 1.0, 0).unwrap();
        let tape = Tape::new();
        let dv = disc.on_tape(&tape);
        assert!(data_term(&tape, &dv, &data, 1).is_err());
    }
}
