use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::data::{rows_to_tensor, DataCurrentSpec};
use super::loss::{data_term, generator_term, penalty};
use super::metrics::{latent_walk, mean_min_distance, tangent_alignment, tube_fraction};
use super::model::{DiscriminatorModel, GeneratorModel};
use crate::autodiff::{checkpoint, AdamConfig, AdamState, MlpSpec, Tape, Tensor};
use crate::currents::LatentSpec;
use crate::error::{Error, Result};

fn default_generator() -> MlpSpec {
    GeneratorModel::paper_spec()
}

fn default_omega0() -> MlpSpec {
    DiscriminatorModel::paper_specs(0).0
}

fn default_omega1() -> MlpSpec {
    DiscriminatorModel::paper_specs(1).1.expect("grade 1 spec")
}

fn default_snapshots() -> Vec<usize> {
    vec![250, 500, 1000, 2000]
}

/// Hyperparameters of one training run. Defaults are the 2D experiment's.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub k: usize,
    pub lambda: f64,
    pub rho: f64,
    pub n_critic: usize,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub batch: usize,
    /// Generator updates; each follows `n_critic` discriminator updates.
    pub epochs: usize,
    pub alpha: f64,
    pub seed: u64,
    pub penalty_at_data_only: bool,
    /// Haar directions per point for each penalty part.
    pub haar_samples: usize,
    /// Generated points used for the distance metric and sample dumps.
    pub eval_samples: usize,
    pub walk_points: usize,
    /// Metrics are computed every `eval_every` epochs and at the end.
    pub eval_every: usize,
    pub snapshots: Vec<usize>,
    pub generator: MlpSpec,
    pub omega0: MlpSpec,
    pub omega1: MlpSpec,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            k: 1,
            lambda: 1.0,
            rho: 10.0,
            n_critic: 5,
            lr: 1e-4,
            beta1: 0.5,
            beta2: 0.9,
            batch: 5,
            epochs: 2000,
            alpha: 1.0,
            seed: 0,
            penalty_at_data_only: true,
            haar_samples: 4,
            eval_samples: 500,
            walk_points: 256,
            eval_every: 10,
            snapshots: default_snapshots(),
            generator: default_generator(),
            omega0: default_omega0(),
            omega1: default_omega1(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.k > 1 {
            return bad(format!("grade {} is not supported (0 or 1)", self.k));
        }
        for (name, v) in [
            ("lambda", self.lambda),
            ("rho", self.rho),
            ("lr", self.lr),
            ("alpha", self.alpha),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        for (name, v) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0..1.0).contains(&v) {
                return bad(format!("{name} must lie in [0, 1), got {v}"));
            }
        }
        if self.n_critic == 0 || self.batch == 0 || self.haar_samples == 0 {
            return bad("n_critic, batch and haar_samples must be positive".into());
        }
        if self.eval_samples == 0 || self.walk_points < 2 || self.eval_every == 0 {
            return bad("eval_samples, eval_every must be positive and walk_points at least 2".into());
        }
        self.generator.validate()?;
        self.omega0.validate()?;
        self.omega1.validate()?;
        let latent = self.generator.input_dim().saturating_sub(1);
        if self.k > latent {
            return bad(format!("grade {} exceeds latent dimension {latent}", self.k));
        }
        let d = self.generator.output_dim();
        if self.omega0.input_dim() != d || self.omega0.output_dim() != 1 {
            return bad("affine network must map the data space to R".into());
        }
        if self.k == 1 && (self.omega1.input_dim() != d || self.omega1.output_dim() != d) {
            return bad("tangent network must map the data space to itself".into());
        }
        Ok(())
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig::new(self.lr, self.beta1, self.beta2)
    }
}

/// One row of `metrics.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    #[serde(rename = "E_disc")]
    pub e_disc: f64,
    #[serde(rename = "E_gen")]
    pub e_gen: f64,
    pub penalty: f64,
    pub min_dist: Option<f64>,
    pub tangent_alignment: Option<f64>,
}

/// Metrics of a parameter snapshot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub min_dist: f64,
    pub tangent_alignment: Option<f64>,
    /// Fraction of the latent walk within `0.3·radius` of the data circle.
    pub walk_tube_fraction: f64,
    pub radius: f64,
}

/// Alternating optimizer state for one run.
pub struct FlatGan {
    cfg: TrainConfig,
    latent: LatentSpec,
    pub generator: GeneratorModel,
    pub discriminator: DiscriminatorModel,
    adam_g: AdamState,
    adam_d: AdamState,
    latent_rng: ChaCha8Rng,
    haar_rng: ChaCha8Rng,
    eval_z: Tensor,
    epoch: usize,
}

/// Values seen by the last discriminator update.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CriticStep {
    pub objective: f64,
    pub penalty: f64,
}

fn rng_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

impl FlatGan {
    pub fn new(cfg: TrainConfig) -> Result<Self> {
        cfg.validate()?;
        let mut init = rng_stream(cfg.seed, 0);
        let generator = GeneratorModel::init(&cfg.generator, &mut init)?;
        let discriminator = DiscriminatorModel::init(
            Some(&cfg.omega0),
            (cfg.k == 1).then_some(&cfg.omega1),
            cfg.alpha,
            &mut init,
        )?;
        let latent = LatentSpec::angle_and_gaussians(generator.latent_dim());
        let mut eval_rng = rng_stream(cfg.seed, 3);
        let eval_z = rows_to_tensor(&latent.sample(cfg.eval_samples, &mut eval_rng)?);
        Ok(FlatGan {
            adam_g: AdamState::new(cfg.adam(), &generator.net.tensors()),
            adam_d: AdamState::new(cfg.adam(), &discriminator.tensors()),
            latent_rng: rng_stream(cfg.seed, 1),
            haar_rng: rng_stream(cfg.seed, 2),
            cfg,
            latent,
            generator,
            discriminator,
            eval_z,
            epoch: 0,
        })
    }

    pub fn config(&self) -> &TrainConfig {
        &self.cfg
    }

    pub fn epoch(&self) -> usize {
        self.epoch
    }

    fn diverged(&self, e: Error) -> Error {
        match e {
            Error::NonFinite(what) => Error::Divergence {
                epoch: self.epoch + 1,
                reason: format!("non-finite {what}"),
            },
            other => other,
        }
    }

    fn latent_batch(&mut self) -> Result<Tensor> {
        Ok(rows_to_tensor(
            &self.latent.sample(self.cfg.batch, &mut self.latent_rng)?,
        ))
    }

    /// Ascent on `E(θ, ω) - penalty` over the discriminator.
    pub fn critic_step(&mut self, data: &DataCurrentSpec) -> Result<CriticStep> {
        let (step, grads) = self.critic_gradients(data)?;
        self.adam_d
            .step(&mut self.discriminator.tensors_mut(), &grads)
            .map_err(|e| self.diverged(e))?;
        Ok(step)
    }

    /// Gradients of `penalty - E(θ, ω)` with respect to
    /// [`DiscriminatorModel::tensors`], drawing the same random numbers as
    /// [`FlatGan::critic_step`] but leaving the parameters unchanged.
    pub fn critic_gradients(&mut self, data: &DataCurrentSpec) -> Result<(CriticStep, Vec<Tensor>)> {
        let z = self.latent_batch()?;
        let k = self.cfg.k;
        let tape = Tape::new();
        let gv = self.generator.on_tape(&tape);
        let dv = self.discriminator.on_tape(&tape);
        let zv = tape.leaf(z);
        let gen = generator_term(&gv, &dv, zv, k).map_err(|e| self.diverged(e))?;
        let real = data_term(&tape, &dv, data, k)?;
        let points = if self.cfg.penalty_at_data_only {
            data.points_tensor()
        } else {
            let fake = gv.forward(zv)?.value();
            ndarray::concatenate(ndarray::Axis(0), &[data.points_tensor().view(), fake.view()])
                .expect("matching columns")
        };
        let pen = penalty(
            &tape,
            &dv,
            &points,
            k,
            self.cfg.lambda,
            self.cfg.rho,
            self.cfg.haar_samples,
            &mut self.haar_rng,
        )
        .map_err(|e| self.diverged(e))?
        .total();
        let objective = gen - real;
        let loss = pen - objective;
        let grads: Vec<Tensor> = tape
            .grad(loss, &dv.leaves())?
            .iter()
            .map(|g| (*g.value()).clone())
            .collect();
        let step = CriticStep {
            objective: objective.scalar(),
            penalty: pen.scalar(),
        };
        if !step.objective.is_finite() || !step.penalty.is_finite() {
            return Err(self.diverged(Error::NonFinite("discriminator loss".into())));
        }
        Ok((step, grads))
    }

    /// Descent on `E(θ, ω)` over the generator; returns `E` before the step.
    pub fn generator_step(&mut self, data: &DataCurrentSpec) -> Result<f64> {
        let z = self.latent_batch()?;
        let tape = Tape::new();
        let gv = self.generator.on_tape(&tape);
        let dv = self.discriminator.on_tape(&tape);
        let gen = generator_term(&gv, &dv, tape.leaf(z), self.cfg.k).map_err(|e| self.diverged(e))?;
        let grads: Vec<Tensor> = tape
            .grad(gen, &gv.leaves())?
            .iter()
            .map(|g| (*g.value()).clone())
            .collect();
        let e = gen.scalar() - data_term(&tape, &dv, data, self.cfg.k)?.scalar();
        if !e.is_finite() {
            return Err(self.diverged(Error::NonFinite("generator loss".into())));
        }
        self.adam_g
            .step(&mut self.generator.net.tensors_mut(), &grads)
            .map_err(|e| self.diverged(e))?;
        Ok(e)
    }

    /// `n_critic` discriminator updates followed by one generator update.
    pub fn run_epoch(&mut self, data: &DataCurrentSpec) -> Result<EpochLog> {
        let mut last = CriticStep {
            objective: 0.0,
            penalty: 0.0,
        };
        for _ in 0..self.cfg.n_critic {
            last = self.critic_step(data)?;
        }
        let e_gen = self.generator_step(data)?;
        self.epoch += 1;
        Ok(EpochLog {
            epoch: self.epoch,
            e_disc: last.objective,
            e_gen,
            penalty: last.penalty,
            min_dist: None,
            tangent_alignment: None,
        })
    }

    /// Generated points for the fixed evaluation latents.
    pub fn samples(&self) -> Result<Tensor> {
        self.generator.generate(&self.eval_z)
    }

    pub fn evaluate(&self, data: &DataCurrentSpec) -> Result<Evaluation> {
        let radius = data
            .points
            .iter()
            .map(|p| p.iter().map(|v| v * v).sum::<f64>().sqrt())
            .sum::<f64>()
            / data.len() as f64;
        let min_dist = mean_min_distance(&self.samples()?, data)?;
        let walk = latent_walk(&self.generator, self.cfg.walk_points)?;
        let tangent_alignment = if self.cfg.k == 1 {
            Some(tangent_alignment(&self.generator, data, self.cfg.walk_points)?)
        } else {
            None
        };
        Ok(Evaluation {
            min_dist,
            tangent_alignment,
            walk_tube_fraction: tube_fraction(&walk, radius, 0.3 * radius),
            radius,
        })
    }

    /// Writes the checkpoint, samples and latent walk for the current epoch.
    pub fn write_snapshot(&self, dir: &Path) -> Result<()> {
        let e = self.epoch;
        for sub in ["checkpoints", "samples", "walk"] {
            fs::create_dir_all(dir.join(sub))?;
        }
        let mut nets = vec![("generator", &self.generator.net)];
        nets.extend(self.discriminator.networks());
        checkpoint::save(
            &dir.join(format!("checkpoints/epoch_{e}.bin")),
            &nets,
            &[("alpha", self.discriminator.alpha)],
            self.cfg.seed,
            e as u64,
        )?;
        write_points(&dir.join(format!("samples/epoch_{e}.csv")), &self.samples()?)?;
        write_points(
            &dir.join(format!("walk/epoch_{e}.csv")),
            &latent_walk(&self.generator, self.cfg.walk_points)?,
        )?;
        Ok(())
    }
}

fn write_points(path: &Path, pts: &Tensor) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["x", "y"])?;
    for r in pts.rows() {
        w.write_record(r.iter().map(|v| format!("{v}")))?;
    }
    w.flush()?;
    Ok(())
}

/// Summary of a finished run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub epochs: usize,
    pub last: EpochLog,
    pub evaluation: Evaluation,
}

/// Runs `cfg.epochs` epochs. With `out`, writes `config.json`,
/// `metrics.csv` and the snapshot directories.
pub fn train(cfg: &TrainConfig, data: &DataCurrentSpec, out: Option<&Path>) -> Result<(FlatGan, TrainReport)> {
    data.validate()?;
    if cfg.k > data.max_grade() {
        return Err(Error::GradeMismatch {
            expected: data.max_grade(),
            got: cfg.k,
        });
    }
    if data.dim() != cfg.generator.output_dim() {
        return Err(Error::DimensionMismatch {
            expected: cfg.generator.output_dim(),
            got: data.dim(),
        });
    }
    let mut gan = FlatGan::new(cfg.clone())?;
    let mut writer = match out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join("config.json"), serde_json::to_string_pretty(cfg)?)?;
            Some(csv::Writer::from_path(dir.join("metrics.csv"))?)
        }
        None => None,
    };
    let mut last = None;
    for epoch in 1..=cfg.epochs {
        let mut log = gan.run_epoch(data)?;
        if epoch % cfg.eval_every == 0 || epoch == cfg.epochs {
            let ev = gan.evaluate(data)?;
            log.min_dist = Some(ev.min_dist);
            log.tangent_alignment = ev.tangent_alignment;
        }
        if let Some(w) = writer.as_mut() {
            w.serialize(&log)?;
            if cfg.snapshots.contains(&epoch) || epoch == cfg.epochs {
                w.flush()?;
                gan.write_snapshot(out.expect("writer implies a directory"))?;
            }
        }
        last = Some(log);
    }
    if let Some(mut w) = writer {
        w.flush()?;
    }
    let evaluation = gan.evaluate(data)?;
    let last = last.unwrap_or(EpochLog {
        epoch: 0,
        e_disc: 0.0,
        e_gen: 0.0,
        penalty: 0.0,
        min_dist: Some(evaluation.min_dist),
        tangent_alignment: evaluation.tangent_alignment,
    });
    let report = TrainReport {
        epochs: gan.epoch(),
        last,
        evaluation,
    };
    Ok((gan, report))
}
