//! Nerves of disk unions: a ring of six disks and a 29-disk layout with six
//! clusters. The nerve's Betti numbers are compared with a pixel count of the
//! union itself. Writes the drawings into the directory given as argument.
//!
//! cargo run --release --example boolean_nerve -- /tmp/nerve

use std::path::{Path, PathBuf};

use rcmplex::boolean::{build_nerve, configuration_from_grains, raster_betti_2d, ring_of_disks, PlacedGrain};
use rcmplex::config::Config;
use rcmplex::homology::betti_vector;
use rcmplex::svg::nerve_svg;

fn report(name: &str, grains: &[PlacedGrain], out: &Path) -> rcmplex::Result<()> {
    let config = configuration_from_grains(grains, 0)?;
    let nerve = build_nerve(&config, 3, true)?;
    let direct = build_nerve(&config, 3, false)?;
    assert_eq!(nerve, direct);
    let betti = betti_vector(&nerve, 3)?;
    let raster = raster_betti_2d(grains, 128)?;
    println!("{name}: {} grains, nerve f = {:?}, betti = {betti:?}, pixels = {raster:?}", grains.len(), nerve.f_vector());
    let path = out.join(format!("{name}.svg"));
    std::fs::write(&path, nerve_svg(grains, &nerve)?).map_err(rcmplex::error::io_err(&path))
}

fn main() -> rcmplex::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "nerve-out".into()));
    std::fs::create_dir_all(&out).map_err(rcmplex::error::io_err(&out))?;

    report("ring6", &ring_of_disks(6, 1.8, 1.0, [0.0, 0.0]), &out)?;
    let fig2 = Config::load("preset:fig2-like", &[])?;
    report("fig2-like", &fig2.nerve.expect("preset has grains").grains, &out)?;
    Ok(())
}
