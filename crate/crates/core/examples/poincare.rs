//! Empirical check of Var f <= γ|W| E[(Λf)^2] for a few functionals.
//!
//! cargo run --release --example poincare

use rcmplex::experiments::{poincare_check, Model};
use rcmplex::{ConnectionKernel, MarkSampler};

fn main() -> rcmplex::Result<()> {
    let model = Model::new(2, 1.0, ConnectionKernel::geometric(2, 1.0)?, MarkSampler::default())?;
    for f in ["vertices", "f:1", "betti:0", "euler"] {
        let r = poincare_check(&model, &f.parse()?, 8.0, 600, 600, 3)?;
        println!(
            "{f:>9}: Var = {:8.2} ± {:6.2}   bound = {:8.2} ± {:6.2}   holds {}",
            r.lhs, r.lhs_se, r.rhs, r.rhs_se, r.pass
        );
    }
    Ok(())
}
