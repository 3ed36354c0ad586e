//! A user-defined connection function: edges with probability decaying
//! like a Gaussian in the distance, triangles kept with probability 0.8.
//! Registered by name so a TOML config can refer to it.
//!
//! cargo run --example custom_kernel

use std::collections::BTreeMap;
use std::sync::Arc;

use rcmplex::homology::betti_vector;
use rcmplex::kernel::{diameter, CustomLevel, KernelRegistry, LevelFn, Padding};
use rcmplex::{build_complex, sample_poisson, ConnectionKernel, KernelSpec, MarkSampler, Window};

fn gaussian(alpha: usize, params: &BTreeMap<String, f64>) -> rcmplex::Result<ConnectionKernel> {
    let s = params.get("scale").copied().unwrap_or(1.0);
    let edge = CustomLevel {
        name: "gaussian".into(),
        eval: Arc::new(move |args| (-(diameter(args) / s).powi(2)).exp()),
        // below 1e-12 beyond 5.3 scales; treat as zero
        range: Some(5.3 * s),
    };
    let mut levels = vec![LevelFn::Custom(edge)];
    levels.extend((2..=alpha).map(|_| LevelFn::Constant(0.8)));
    ConnectionKernel::new(alpha, levels)
}

fn main() -> rcmplex::Result<()> {
    let mut registry = KernelRegistry::default();
    registry.register("gaussian", gaussian);
    let spec: KernelSpec = toml::from_str("kind = \"custom\"\nname = \"gaussian\"\nparams = { scale = 0.6 }")
        .map_err(|e| rcmplex::Error::Config(e.to_string()))?;
    let kernel = spec.build_with(2, Padding::Zeros, &registry)?;

    let config = sample_poisson(&Window::centered(2, 10.0)?, 1.0, &MarkSampler::default(), 9, 0)?;
    let k = build_complex(&config, &kernel)?;
    println!("f = {:?}, betti = {:?}", k.f_vector(), betti_vector(&k, 2)?);
    Ok(())
}
