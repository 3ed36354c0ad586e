//! Variance growth and normality of β_0 and χ over growing windows. Writes
//! CSV, JSON and histogram/Q-Q drawings into the directory given as argument.
//!
//! cargo run --release --example clt -- /tmp/clt

use std::path::PathBuf;

use rcmplex::experiments::{run_clt_experiment, write_experiment_outputs, ExperimentConfig, Model};
use rcmplex::{ConnectionKernel, MarkSampler};

fn main() -> rcmplex::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "clt-out".into()));
    let model = Model::new(2, 1.0, ConnectionKernel::geometric(2, 1.0)?, MarkSampler::default())?;
    let mut cfg = ExperimentConfig::new(
        model,
        vec!["betti:0".parse()?, "euler".parse()?],
        vec![8.0, 16.0, 32.0],
        300,
    );
    cfg.master_seed = 1;
    cfg.validate()?;
    let report = run_clt_experiment(&cfg)?;
    for row in &report.summaries {
        for s in row {
            let p = s.ks.and_then(|k| k.result()).map_or(f64::NAN, |r| r.p_value);
            println!("side {:>4} {:>8}: mean {:9.3}  var/|W| {:.4}  KS p {:.3}", s.side, s.functional, s.mean, s.var_over_volume, p);
        }
    }
    for st in &report.stabilization {
        println!("{}: relative change over the last doubling {:.3}", st.functional, st.relative_change.unwrap_or(f64::NAN));
    }
    write_experiment_outputs(&report, &out)?;
    println!("wrote {} ({:.1} s)", out.display(), report.elapsed_seconds);
    Ok(())
}
