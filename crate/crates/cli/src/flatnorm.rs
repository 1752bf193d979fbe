use std::path::PathBuf;

use clap::ValueEnum;
use currentkit::currents::{DiscreteCurrent, SimplicialChain};
use currentkit::flatnorm::{
    dual_flat_estimate, flat_metric_points_exact, flat_norm_simplicial, DualFormSpec,
    DualTrainConfig, FlatNormResult, PrimalWitness,
};
use serde_json::Value;

use crate::svg::{planar, Canvas};
use crate::{read_input, write_output, CliResult, Failure, CAPABILITY};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Network simplex on 0-currents.
    Exact,
    /// Linear program on a simplicial 1-chain.
    Simplicial,
    /// Trained neural dual form, a lower bound at grade 0.
    Dual,
}

#[derive(clap::Args)]
pub struct Args {
    /// Current JSON `{d, k, atoms}`, a pair `{s, t}`, or a chain `{complex, k, coeffs}`.
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Exact)]
    mode: Mode,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Optimizer steps in dual mode.
    #[arg(long, default_value_t = DualTrainConfig::default().steps)]
    steps: usize,
    /// Writes the decomposition T = A + ∂B as SVG.
    #[arg(long, value_name = "FILE")]
    emit_svg: Option<PathBuf>,
}

pub enum Input {
    Pair(DiscreteCurrent, DiscreteCurrent),
    Chain(SimplicialChain),
}

pub fn parse_input(text: &str) -> CliResult<Input> {
    let v: Value = serde_json::from_str(text)?;
    let obj = v
        .as_object()
        .ok_or_else(|| Failure::parse("expected a JSON object"))?;
    if obj.contains_key("complex") {
        return Ok(Input::Chain(serde_json::from_value(v)?));
    }
    if let (Some(s), Some(t)) = (obj.get("s"), obj.get("t")) {
        let s: DiscreteCurrent = serde_json::from_value(s.clone())?;
        let t: DiscreteCurrent = serde_json::from_value(t.clone())?;
        return Ok(Input::Pair(s, t));
    }
    let t: DiscreteCurrent = serde_json::from_value(v)?;
    let zero = DiscreteCurrent::zero(t.dim(), t.grade());
    Ok(Input::Pair(t, zero))
}

pub fn compute(args: &Args, input: &Input) -> CliResult<FlatNormResult> {
    match (args.mode, input) {
        (Mode::Exact, Input::Pair(s, t)) => {
            if s.grade() != 0 {
                return Err(Failure::new(
                    CAPABILITY,
                    format!(
                        "exact mode handles 0-currents only, got grade {}; use --mode dual or a simplicial chain",
                        s.grade()
                    ),
                ));
            }
            Ok(flat_metric_points_exact(&s.try_sub(t)?, args.lambda)?)
        }
        (Mode::Simplicial, Input::Chain(c)) => {
            Ok(flat_norm_simplicial(c.complex(), c, args.lambda)?)
        }
        (Mode::Dual, Input::Pair(s, t)) => {
            let spec = DualFormSpec::small(s.dim(), s.grade())?;
            let cfg = DualTrainConfig {
                steps: args.steps,
                seed: args.seed,
                ..DualTrainConfig::default()
            };
            Ok(dual_flat_estimate(s, t, args.lambda, &spec, &cfg)?.0)
        }
        (Mode::Simplicial, Input::Pair(..)) => {
            Err(Failure::parse("simplicial mode needs a chain {complex, k, coeffs}"))
        }
        (_, Input::Chain(_)) => Err(Failure::parse(
            "chain input is only accepted with --mode simplicial",
        )),
    }
}

fn atom_marks(canvas: &mut Canvas, t: &DiscreteCurrent, r: f64, prefix: &str) {
    for at in t.atoms() {
        let p = planar(&at.x);
        if t.grade() == 1 {
            let v = planar(&at.frame.column(0));
            let len = v[0].hypot(v[1]).max(1e-12);
            let h = 0.05 * at.w.signum() / len;
            canvas.line(p, [p[0] + h * v[0], p[1] + h * v[1]], prefix);
        }
        let class = if at.w >= 0.0 { "pos" } else { "neg" };
        canvas.circle(p, r, &format!("{prefix}-{class}"));
    }
}

/// Draws the input in black, A in red and B in dashed or shaded blue.
pub fn render(input: &Input, result: &FlatNormResult) -> String {
    let title = format!("flat norm {:.6} at scale {}", result.value, result.lambda);
    match input {
        Input::Pair(s, t) => {
            let mut pts: Vec<[f64; 2]> = s
                .atoms()
                .iter()
                .chain(t.atoms())
                .map(|a| planar(&a.x))
                .collect();
            if let Some(PrimalWitness::Points { a, b }) = &result.primal_witness {
                pts.extend(a.atoms().iter().map(|x| planar(&x.x)));
                pts.extend(b.iter().flat_map(|seg| [planar(&seg.from), planar(&seg.to)]));
            }
            let mut canvas = Canvas::fit(pts);
            if let Some(PrimalWitness::Points { a, b }) = &result.primal_witness {
                for seg in b {
                    canvas.line(planar(&seg.from), planar(&seg.to), "b");
                }
                atom_marks(&mut canvas, a, 7.0, "a");
            }
            atom_marks(&mut canvas, s, 3.5, "t");
            atom_marks(&mut canvas, &t.scale(-1.0), 3.5, "t");
            canvas.finish(&title)
        }
        Input::Chain(c) => {
            let cx = c.complex();
            let mut canvas = Canvas::fit(cx.vertices().iter().map(|v| planar(v)));
            let vertex = |i: usize| planar(&cx.vertices()[i]);
            if let Some(PrimalWitness::Simplicial { a, b }) = &result.primal_witness {
                for (i, tri) in cx.triangles().iter().enumerate() {
                    if b.coeffs()[i].abs() > 1e-9 {
                        canvas.polygon(&tri.map(vertex), "b-fill");
                    }
                }
                for (i, e) in cx.edges().iter().enumerate() {
                    if a.coeffs()[i].abs() > 1e-9 {
                        canvas.line(vertex(e[0]), vertex(e[1]), "a");
                    }
                }
            }
            for (i, e) in cx.edges().iter().enumerate() {
                if c.grade() == 1 && c.coeffs()[i].abs() > 1e-9 {
                    canvas.line(vertex(e[0]), vertex(e[1]), "t");
                }
            }
            canvas.finish(&title)
        }
    }
}

pub fn run(args: Args) -> CliResult<()> {
    let input = parse_input(&read_input(&args.input)?)?;
    let result = compute(&args, &input)?;
    if let Some(path) = &args.emit_svg {
        write_output(path, &render(&input, &result))?;
    }
    println!("{}", result.to_json()?);
    Ok(())
}
