//! Trains on five points on the unit circle and prints the metric trace.
//!
//! Usage: `cargo run --release --example circle -- <k> <seed> [epochs]`

use currentkit::flatgan::{build_circle_dataset, FlatGan, TrainConfig};

fn main() -> currentkit::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let k = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let seed = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(0);
    let epochs: usize = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(2000);
    let data = build_circle_dataset(5, 1.0, 0)?;
    let mut gan = FlatGan::new(TrainConfig {
        k,
        seed,
        epochs,
        ..TrainConfig::default()
    })?;
    let start = std::time::Instant::now();
    for epoch in 1..=epochs {
        let log = gan.run_epoch(&data)?;
        if epoch % 100 == 0 || epoch == epochs {
            let ev = gan.evaluate(&data)?;
            println!(
                "epoch {epoch:5}  E_disc {:+.4}  penalty {:.4}  min_dist {:.4}  align {:?}  tube {:.3}  ({:.1?})",
                log.e_disc,
                log.penalty,
                ev.min_dist,
                ev.tangent_alignment,
                ev.walk_tube_fraction,
                start.elapsed()
            );
        }
    }
    Ok(())
}
