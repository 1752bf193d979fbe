use std::path::PathBuf;

use clap::ValueEnum;
use currentkit::algebra::{comass, inner, mass, ComassMode, KVector, MassMode};
use serde_json::{json, Value};

use crate::{read_input, CliResult, Failure};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Op {
    Mass,
    Comass,
    Wedge,
    Inner,
}

#[derive(clap::Args)]
pub struct Args {
    /// KVector JSON `{d, k, coeffs: {"1,2": 1.0}}`, or an array of two for wedge and inner.
    input: PathBuf,
    #[arg(long, value_enum)]
    op: Op,
    /// Use the multi-start estimate instead of the exact norm.
    #[arg(long)]
    estimate: bool,
    /// Frame ascent restarts in estimate mode.
    #[arg(long, default_value_t = 64)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn one(v: Value) -> CliResult<KVector> {
    Ok(serde_json::from_value(v)?)
}

fn two(v: Value) -> CliResult<(KVector, KVector)> {
    match v {
        Value::Array(mut items) if items.len() == 2 => {
            let b = one(items.pop().expect("two items"))?;
            let a = one(items.pop().expect("two items"))?;
            Ok((a, b))
        }
        _ => Err(Failure::parse("expected an array of two k-vectors")),
    }
}

pub fn evaluate(args: &Args, input: Value) -> CliResult<Value> {
    let out = match args.op {
        Op::Mass => {
            let v = one(input)?;
            let mode = if args.estimate {
                MassMode::Bounds {
                    restarts: args.restarts,
                    seed: args.seed,
                }
            } else {
                MassMode::Exact
            };
            let r = mass(&v, mode)?;
            json!({
                "value": r.upper,
                "lower": r.lower,
                "upper": r.upper,
                "exact": r.exact,
                "euclidean": v.euclidean_norm(),
                "decomposition": r.decomposition,
            })
        }
        Op::Comass => {
            let w = one(input)?.to_covector();
            let mode = if args.estimate {
                ComassMode::Estimate {
                    restarts: args.restarts,
                    seed: args.seed,
                }
            } else {
                ComassMode::Exact
            };
            let r = comass(&w, mode)?;
            json!({
                "value": r.value,
                "exact": r.exact,
                "euclidean": w.euclidean_norm(),
                "certificate": r.certificate,
            })
        }
        Op::Wedge => {
            let (a, b) = two(input)?;
            serde_json::to_value(a.wedge(&b)?)?
        }
        Op::Inner => {
            let (a, b) = two(input)?;
            json!({ "value": inner(&a, &b)? })
        }
    };
    Ok(out)
}

pub fn run(args: Args) -> CliResult<()> {
    let input: Value = serde_json::from_str(&read_input(&args.input)?)?;
    let out = evaluate(&args, input)?;
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}
