//! Plain SVG output: planar complexes, grain unions with their nerves, and
//! histogram / normal Q-Q panels. Only the plane is drawn.

use std::collections::HashMap;
use std::fmt::Write as _;

use statrs::distribution::{ContinuousCDF, Normal};

use crate::boolean::{Grain, PlacedGrain};
use crate::complex::SimplicialComplex;
use crate::error::{Error, Result};
use crate::point_process::PointConfiguration;

const PANEL: f64 = 480.0;
const PAD: f64 = 20.0;

fn unsupported(d: usize) -> Error {
    Error::Capability(format!("SVG rendering is available for d = 2 only, got d = {d}"))
}

/// Affine map from a data box to a square panel, y pointing up.
struct Frame {
    lo: [f64; 2],
    scale: f64,
    x0: f64,
}

impl Frame {
    fn new(lo: [f64; 2], hi: [f64; 2], x0: f64) -> Self {
        let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-9);
        Self { lo, scale: (PANEL - 2.0 * PAD) / span, x0 }
    }

    fn x(&self, x: f64) -> f64 {
        self.x0 + PAD + (x - self.lo[0]) * self.scale
    }

    fn y(&self, y: f64) -> f64 {
        PANEL - PAD - (y - self.lo[1]) * self.scale
    }

    fn len(&self, l: f64) -> f64 {
        l * self.scale
    }
}

fn header(width: f64, height: f64) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">\n\
         <rect width=\"{width}\" height=\"{height}\" fill=\"white\"/>\n"
    )
}

fn draw_complex(out: &mut String, complex: &SimplicialComplex, pos: &HashMap<u64, [f64; 2]>, f: &Frame) {
    let p = |v: &u64| pos[v];
    for t in complex.simplices(2) {
        let pts: Vec<String> = t.iter().map(|v| format!("{:.2},{:.2}", f.x(p(v)[0]), f.y(p(v)[1]))).collect();
        let _ = writeln!(out, "<polygon points=\"{}\" fill=\"#9ecae1\" fill-opacity=\"0.6\" stroke=\"none\"/>", pts.join(" "));
    }
    for e in complex.simplices(1) {
        let (a, b) = (p(&e[0]), p(&e[1]));
        let _ = writeln!(
            out,
            "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#08519c\" stroke-width=\"1.2\"/>",
            f.x(a[0]),
            f.y(a[1]),
            f.x(b[0]),
            f.y(b[1])
        );
    }
    for v in complex.vertex_ids() {
        let a = p(&v);
        let _ = writeln!(out, "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.5\" fill=\"black\"/>", f.x(a[0]), f.y(a[1]));
    }
}

/// Points, edges and filled triangles of a planar complex inside its window.
pub fn complex_svg(config: &PointConfiguration, complex: &SimplicialComplex) -> Result<String> {
    let d = config.dimension();
    if d != 2 {
        return Err(unsupported(d));
    }
    let w = &config.window;
    let lo = [w.lower(0), w.lower(1)];
    let hi = [w.upper(0), w.upper(1)];
    let f = Frame::new(lo, hi, 0.0);
    let pos: HashMap<u64, [f64; 2]> = config.points.iter().map(|p| (p.id, [p.position[0], p.position[1]])).collect();
    if let Some(v) = complex.vertex_ids().find(|v| !pos.contains_key(v)) {
        return Err(Error::Structural(format!("vertex {v} has no point in the configuration")));
    }
    let mut out = header(PANEL, PANEL);
    let _ = writeln!(
        out,
        "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"none\" stroke=\"#999\"/>",
        f.x(lo[0]),
        f.y(hi[1]),
        f.len(hi[0] - lo[0]),
        f.len(hi[1] - lo[1])
    );
    draw_complex(&mut out, complex, &pos, &f);
    out.push_str("</svg>\n");
    Ok(out)
}

/// Two panels: the union of the grains, and the nerve drawn on the grain centres.
/// Vertex `i` of the nerve is grain `i`.
pub fn nerve_svg(grains: &[PlacedGrain], nerve: &SimplicialComplex) -> Result<String> {
    if let Some(g) = grains.iter().find(|g| g.dimension() != 2) {
        return Err(unsupported(g.dimension()));
    }
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for g in grains {
        let (a, b) = g.bounds();
        for k in 0..2 {
            lo[k] = lo[k].min(a[k]);
            hi[k] = hi[k].max(b[k]);
        }
    }
    if grains.is_empty() {
        (lo, hi) = ([0.0; 2], [1.0; 2]);
    }
    let left = Frame::new(lo, hi, 0.0);
    let right = Frame::new(lo, hi, PANEL);
    let mut out = header(2.0 * PANEL, PANEL);
    for g in grains {
        match &g.grain {
            Grain::Ball { r } => {
                let _ = writeln!(
                    out,
                    "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"{:.2}\" fill=\"#fdae6b\" fill-opacity=\"0.55\" stroke=\"#e6550d\"/>",
                    left.x(g.center[0]),
                    left.y(g.center[1]),
                    left.len(*r)
                );
            }
            Grain::Box { hw } => {
                let _ = writeln!(
                    out,
                    "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"#fdae6b\" fill-opacity=\"0.55\" stroke=\"#e6550d\"/>",
                    left.x(g.center[0] - hw[0]),
                    left.y(g.center[1] + hw[1]),
                    left.len(2.0 * hw[0]),
                    left.len(2.0 * hw[1])
                );
            }
        }
    }
    let _ = writeln!(out, "<line x1=\"{PANEL}\" y1=\"0\" x2=\"{PANEL}\" y2=\"{PANEL}\" stroke=\"#ccc\"/>");
    let pos: HashMap<u64, [f64; 2]> =
        grains.iter().enumerate().map(|(i, g)| (i as u64, [g.center[0], g.center[1]])).collect();
    if let Some(v) = nerve.vertex_ids().find(|v| !pos.contains_key(v)) {
        return Err(Error::Structural(format!("nerve vertex {v} has no grain")));
    }
    draw_complex(&mut out, nerve, &pos, &right);
    out.push_str("</svg>\n");
    Ok(out)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Histogram of the standardized values next to a normal Q-Q plot.
pub fn histogram_qq(values: &[f64], title: &str) -> String {
    let mut out = header(2.0 * PANEL, PANEL);
    let _ = writeln!(out, "<text x=\"{PAD}\" y=\"16\" font-family=\"sans-serif\" font-size=\"13\">{}</text>", escape(title));
    let Some(z) = crate::stats::standardize(values) else {
        let _ = writeln!(
            out,
            "<text x=\"{PAD}\" y=\"60\" font-family=\"sans-serif\" font-size=\"13\">degenerate sample (zero variance)</text>"
        );
        out.push_str("</svg>\n");
        return out;
    };
    let normal = Normal::standard();
    let (lo, hi) = (-4.0, 4.0);
    let bins = 32;
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &x in &z {
        let b = ((x - lo) / width).floor();
        if b >= 0.0 && (b as usize) < bins {
            counts[b as usize] += 1;
        }
    }
    let n = z.len() as f64;
    let peak = counts.iter().map(|&c| c as f64 / (n * width)).fold(0.41, f64::max);
    let px = |x: f64| PAD + (x - lo) / (hi - lo) * (PANEL - 2.0 * PAD);
    let py = |dens: f64| PANEL - PAD - dens / peak * (PANEL - 3.0 * PAD);
    for (i, &c) in counts.iter().enumerate() {
        let x0 = lo + i as f64 * width;
        let dens = c as f64 / (n * width);
        let _ = writeln!(
            out,
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"#9ecae1\" stroke=\"#3182bd\"/>",
            px(x0),
            py(dens),
            px(x0 + width) - px(x0),
            py(0.0) - py(dens)
        );
    }
    let curve: Vec<String> = (0..=160)
        .map(|i| {
            let x = lo + (hi - lo) * i as f64 / 160.0;
            let dens = (-x * x / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
            format!("{:.2},{:.2}", px(x), py(dens))
        })
        .collect();
    let _ = writeln!(out, "<polyline points=\"{}\" fill=\"none\" stroke=\"#de2d26\" stroke-width=\"1.5\"/>", curve.join(" "));

    let mut sorted = z;
    sorted.sort_by(f64::total_cmp);
    let qx = |q: f64| PANEL + PAD + (q.clamp(lo, hi) - lo) / (hi - lo) * (PANEL - 2.0 * PAD);
    let qy = |s: f64| PANEL - PAD - (s.clamp(lo, hi) - lo) / (hi - lo) * (PANEL - 3.0 * PAD);
    let _ = writeln!(
        out,
        "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#de2d26\"/>",
        qx(lo),
        qy(lo),
        qx(hi),
        qy(hi)
    );
    for (i, s) in sorted.iter().enumerate() {
        let q = normal.inverse_cdf((i as f64 + 0.5) / n);
        let _ = writeln!(out, "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"1.5\" fill=\"#3182bd\"/>", qx(q), qy(*s));
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point_process::{Mark, Window};

    #[test]
    fn complex_drawing_counts_shapes() {
        let mut c = PointConfiguration::empty(Window::centered(2, 2.0).unwrap(), 0);
        for x in [[0.0, 0.0], [0.5, 0.0], [0.0, 0.5]] {
            c = c.insert_point(x.to_vec(), Mark::Constant(0.0)).unwrap();
        }
        let k = SimplicialComplex::from_simplices(2, [[0u64, 1, 2]]).unwrap();
        let svg = complex_svg(&c, &k).unwrap();
        assert_eq!(svg.matches("<polygon").count(), 1);
        assert_eq!(svg.matches("<line").count(), 3);
        assert_eq!(svg.matches("<circle").count(), 3);
        let c3 = PointConfiguration::empty(Window::centered(3, 2.0).unwrap(), 0);
        assert!(matches!(complex_svg(&c3, &SimplicialComplex::empty(1)), Err(Error::Capability(_))));
    }

    #[test]
    fn histogram_handles_degenerate_samples() {
        assert!(histogram_qq(&[1.0; 10], "flat").contains("degenerate"));
        let svg = histogram_qq(&[0.1, -0.3, 1.2, 0.5, -1.0], "a < b");
        assert!(svg.contains("a &lt; b"));
        assert_eq!(svg.matches("r=\"1.5\"").count(), 5);
    }
}
