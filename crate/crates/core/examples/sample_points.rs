//! Sample a marked Poisson configuration, restrict it to a smaller window and
//! round-trip it through JSON.
//!
//! cargo run --example sample_points

use rcmplex::{sample_poisson, MarkSampler, PointConfiguration, Window};

fn main() -> rcmplex::Result<()> {
    let window = Window::centered(2, 10.0)?;
    let marks = MarkSampler::UniformRadius { lo: 0.1, hi: 0.4 };
    let config = sample_poisson(&window, 1.5, &marks, 42, 0)?;
    println!("{} points in a window of area {}", config.len(), window.volume());

    // same seed, same replication: identical points
    let again = sample_poisson(&window, 1.5, &marks, 42, 0)?;
    assert_eq!(config, again);
    let other = sample_poisson(&window, 1.5, &marks, 42, 1)?;
    println!("replication 1 has {} points", other.len());

    let inner = config.restrict(&Window::centered(2, 5.0)?)?;
    println!("{} of them fall in the central 5 x 5 square", inner.len());
    for p in inner.points.iter().take(3) {
        println!("  id {} at ({:.3}, {:.3}) with mark {:?}", p.id, p.position[0], p.position[1], p.mark);
    }

    let json = config.to_json()?;
    assert_eq!(PointConfiguration::from_json(&json)?, config);
    println!("JSON: {} bytes", json.len());
    Ok(())
}
