//! Joint covariance of (f_0, f_1, β_0) scaled by the window area.
//!
//! cargo run --release --example covariance

use rcmplex::experiments::{in_pool, run_covariance_experiment, ExperimentConfig, Model};
use rcmplex::{ConnectionKernel, MarkSampler};

fn main() -> rcmplex::Result<()> {
    let model = Model::new(2, 1.0, ConnectionKernel::geometric(2, 1.0)?, MarkSampler::default())?;
    let mut cfg = ExperimentConfig::new(
        model,
        vec!["vertices".parse()?, "f:1".parse()?, "betti:0".parse()?],
        vec![8.0, 16.0, 32.0],
        1000,
    );
    cfg.master_seed = 2;
    let report = in_pool(Some(4), || run_covariance_experiment(&cfg))??;
    for c in &report.per_side {
        println!("side {} (psd {}, eigenvalues {:.4?}):", c.side, c.psd, c.eigenvalues);
        for row in &c.matrix {
            println!("  {:>9.4?}", row);
        }
    }
    println!("largest relative change over the last doubling: {:.3}", report.max_relative_change.unwrap_or(f64::NAN));
    Ok(())
}
