//! How often the effect of adding a point at the origin is the same in
//! nested windows.
//!
//! cargo run --release --example stabilization

use rcmplex::experiments::{stabilization_probe, Model};
use rcmplex::{ConnectionKernel, MarkSampler};

fn main() -> rcmplex::Result<()> {
    let sides = [4.0, 8.0, 16.0, 24.0];
    let models = [
        ("geometric(1)", ConnectionKernel::geometric(2, 1.0)?),
        ("vietoris-rips(1)", ConnectionKernel::vietoris_rips(2, 1.0)?),
        ("exponential(2)", ConnectionKernel::exponential(2, 2.0, 0.5)?),
    ];
    for (name, kernel) in models {
        let model = Model::new(2, 1.0, kernel, MarkSampler::default())?;
        for f in ["vertices", "euler", "betti:1"] {
            let r = stabilization_probe(&model, &f.parse()?, &sides, 100, 5)?;
            println!("{name:>16} {f:>8}: agreement between consecutive sides {:?}", r.fractions);
        }
    }
    Ok(())
}
