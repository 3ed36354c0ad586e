//! Edge degree of a point inserted at the origin. With a fixed connection
//! radius it is Poisson; with random disk radii it is a Poisson mixture.
//!
//! cargo run --release --example degree_law

use rcmplex::experiments::{degree_distribution_experiment, mixing_parameter, DegreeTest, ModelSpec};
use rcmplex::kernel::Padding;
use rcmplex::{KernelSpec, Mark, MarkSampler};

fn main() -> rcmplex::Result<()> {
    let fixed = ModelSpec {
        dimension: 2,
        gamma: 1.0,
        alpha: 1,
        padding: Padding::Zeros,
        kernel: KernelSpec::Geometric { r: 0.5 },
        marks: MarkSampler::default(),
    }
    .build()?;
    let pi = mixing_parameter(&fixed, &Mark::Constant(0.0), 0, 0)?;
    println!("geometric(0.5): mixing parameter {:.4}", pi.value);
    let r = degree_distribution_experiment(&fixed, 4000, 20.0, 1, 0.01)?;
    if let DegreeTest::Poisson { result, .. } = &r.test {
        println!("  chi-square {:.2} on {} dof, p = {:.3}", result.statistic, result.dof, result.p_value);
    }
    println!("  histogram {:?}", r.histogram);

    let disks = ModelSpec {
        kernel: KernelSpec::GrainIntersection,
        marks: MarkSampler::UniformRadius { lo: 0.2, hi: 0.6 },
        ..fixed.spec().expect("built from a spec").clone()
    }
    .build()?;
    for r in [0.2, 0.4, 0.6] {
        println!("disk radius {r}: mixing parameter {:.4}", mixing_parameter(&disks, &Mark::Ball { r }, 0, 0)?.value);
    }
    let r = degree_distribution_experiment(&disks, 4000, 20.0, 1, 0.01)?;
    let t = r.test.result();
    println!("  two-sample chi-square {:.2} on {} dof, p = {:.3}, pass {}", t.statistic, t.dof, t.p_value, r.pass);
    Ok(())
}
