//! Evaluate functional descriptors on a sampled Vietoris-Rips complex.
//!
//! cargo run --example functionals

use rcmplex::{build_complex, sample_poisson, ConnectionKernel, Functional, FunctionalDescriptor, MarkSampler, Window};

fn main() -> rcmplex::Result<()> {
    let config = sample_poisson(&Window::centered(2, 8.0)?, 1.5, &MarkSampler::default(), 7, 0)?;
    let k = build_complex(&config, &ConnectionKernel::vietoris_rips(3, 1.0)?)?;
    println!("{} vertices, f = {:?}", k.vertex_count(), k.f_vector());

    let descriptors = [
        "vertices",
        "f:1",
        "euler",
        "betti:0",
        "betti:1",
        // induced copies of a triangle boundary, components that are single edges
        "g_L:k=1",
        "h_L:simplex=1",
        // vertices lying in exactly 2 edges
        "d:m=1,l=2",
    ];
    for text in descriptors {
        let f: FunctionalDescriptor = text.parse()?;
        println!("{f:>14} = {}", f.evaluate(&k)?);
    }

    // any closure over a complex is a functional too
    let max_dim = |k: &rcmplex::SimplicialComplex| k.dim().map_or(-1.0, |d| d as f64);
    println!("{:>14} = {}", "max dim", max_dim.evaluate(&k)?);
    Ok(())
}
