use std::path::{Path, PathBuf};

use currentkit::flatgan::{build_circle_dataset, train, DataCurrentSpec, TrainConfig, TrainReport};

use crate::svg::{planar, Canvas};
use crate::{read_input, write_output, CliResult, Failure};

#[derive(clap::Args)]
pub struct Args {
    /// TrainConfig JSON; missing fields take the defaults.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Data JSON `{points, tangents}`; defaults to five points on the unit circle.
    #[arg(long, value_name = "FILE")]
    data: Option<PathBuf>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    /// Run directory.
    #[arg(long, value_name = "DIR", default_value = "run")]
    out: PathBuf,
    /// Renders each snapshot as `svg/epoch_<n>.svg`.
    #[arg(long)]
    emit_svg: bool,
}

pub fn config(args: &Args) -> CliResult<TrainConfig> {
    let mut cfg: TrainConfig = match &args.config {
        Some(path) => serde_json::from_str(&read_input(path)?)?,
        None => TrainConfig::default(),
    };
    if let Some(k) = args.k {
        cfg.k = k;
    }
    if let Some(e) = args.epochs {
        cfg.epochs = e;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(l) = args.lambda {
        cfg.lambda = l;
    }
    if let Some(r) = args.rho {
        cfg.rho = r;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn read_points(path: &Path) -> CliResult<Vec<[f64; 2]>> {
    let mut reader =
        csv::Reader::from_path(path).map_err(|e| Failure::parse(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for row in reader.deserialize::<(f64, f64)>() {
        let (x, y) = row.map_err(|e| Failure::parse(format!("{}: {e}", path.display())))?;
        out.push([x, y]);
    }
    Ok(out)
}

/// Generated samples, the latent walk and the data for one snapshot.
pub fn render_epoch(dir: &Path, epoch: usize, data: &DataCurrentSpec) -> CliResult<String> {
    let samples = read_points(&dir.join(format!("samples/epoch_{epoch}.csv")))?;
    let walk = read_points(&dir.join(format!("walk/epoch_{epoch}.csv")))?;
    let points: Vec<[f64; 2]> = data.points.iter().map(|p| planar(p)).collect();
    let mut canvas = Canvas::fit(samples.iter().chain(&walk).chain(&points).copied());
    for &p in &samples {
        canvas.circle(p, 2.5, "sample");
    }
    canvas.polyline(&walk, "walk");
    for (i, &p) in points.iter().enumerate() {
        if let Some(t) = data.tangents.get(i) {
            let t = planar(t);
            canvas.line(p, [p[0] + 0.25 * t[0], p[1] + 0.25 * t[1]], "tangent");
        }
        canvas.circle(p, 6.0, "data");
    }
    Ok(canvas.finish(&format!("epoch {epoch}")))
}

fn summary(cfg: &TrainConfig, report: &TrainReport, out: &Path) -> String {
    let ev = &report.evaluation;
    let alignment = ev
        .tangent_alignment
        .map_or_else(|| "-".to_string(), |a| format!("{a:.4}"));
    format!(
        "k={} seed={} epochs={} e_disc={:.6} penalty={:.6} min_dist={:.4} alignment={} tube={:.3} out={}",
        cfg.k,
        cfg.seed,
        report.epochs,
        report.last.e_disc,
        report.last.penalty,
        ev.min_dist,
        alignment,
        ev.walk_tube_fraction,
        out.display()
    )
}

pub fn run(args: Args) -> CliResult<()> {
    let cfg = config(&args)?;
    let data: DataCurrentSpec = match &args.data {
        Some(path) => serde_json::from_str(&read_input(path)?)?,
        None => build_circle_dataset(5, 1.0, 0)?,
    };
    let (_, report) = train(&cfg, &data, Some(&args.out))?;
    if args.emit_svg {
        let dir = args.out.join("svg");
        std::fs::create_dir_all(&dir).map_err(|e| Failure::parse(format!("{}: {e}", dir.display())))?;
        let mut epochs: Vec<usize> = cfg
            .snapshots
            .iter()
            .copied()
            .filter(|&e| e <= cfg.epochs)
            .chain([cfg.epochs])
            .collect();
        epochs.sort_unstable();
        epochs.dedup();
        for e in epochs {
            write_output(&dir.join(format!("epoch_{e}.svg")), &render_epoch(&args.out, e, &data)?)?;
        }
    }
    println!("{}", summary(&cfg, &report, &args.out));
    Ok(())
}
