//! The two complexes of the unit-square illustration: a distance rule with
//! coin flips for triangles, and an exponential kernel on the same points.
//! Writes `fig1a.svg` and `fig1b.svg` into the directory given as argument.
//!
//! cargo run --example figure1 -- /tmp/fig1

use std::path::PathBuf;

use rcmplex::homology::betti_vector;
use rcmplex::svg::complex_svg;
use rcmplex::{build_complex, sample_poisson, ConnectionKernel, MarkSampler, Window};

fn main() -> rcmplex::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "figure1-out".into()));
    std::fs::create_dir_all(&out).map_err(rcmplex::error::io_err(&out))?;

    let square = Window::new(vec![0.5, 0.5], 1.0)?;
    let config = sample_poisson(&square, 12.0, &MarkSampler::default(), 2024, 0)?;

    let kernels = [
        ("fig1a", ConnectionKernel::geometric_plus_p(2, 0.5, 0.5)?),
        ("fig1b", ConnectionKernel::exponential(2, 4.0, 0.01)?),
    ];
    for (name, kernel) in kernels {
        let k = build_complex(&config, &kernel)?;
        println!("{name}: f = {:?}, betti = {:?}", k.f_vector(), betti_vector(&k, 2)?);
        let path = out.join(format!("{name}.svg"));
        std::fs::write(&path, complex_svg(&config, &k)?).map_err(rcmplex::error::io_err(&path))?;
    }
    println!("wrote {}", out.display());
    Ok(())
}
