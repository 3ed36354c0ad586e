//! Boolean model: convex grains attached to points, intersection predicates,
//! nerves, and a pixel-based Betti oracle for planar unions.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::complex::{build_with, SimplicialComplex};
use crate::error::{rejected, Error, Result};
use crate::point_process::{Mark, MarkedPoint, PointConfiguration, Window};

/// Tolerance of the intersection predicates.
pub const EPS_TOL: f64 = 1e-9;

const WELZL_SHUFFLE_SEED: u64 = 0x5eed_ba11;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Grain {
    Ball { r: f64 },
    Box { hw: Vec<f64> },
}

impl Grain {
    pub fn ball(r: f64) -> Result<Self> {
        let g = Grain::Ball { r };
        g.validate()?;
        Ok(g)
    }

    pub fn boxed(hw: Vec<f64>) -> Result<Self> {
        let g = Grain::Box { hw };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        match self {
            Grain::Ball { r } if ok(*r) => Ok(()),
            Grain::Box { hw } if !hw.is_empty() && hw.iter().all(|&h| ok(h)) => Ok(()),
            g => Err(rejected(format!("grain parameters must be positive and finite: {g:?}"))),
        }
    }

    pub fn from_mark(mark: &Mark) -> Option<Grain> {
        match mark {
            Mark::Ball { r } => Some(Grain::Ball { r: *r }),
            Mark::Box { hw } => Some(Grain::Box { hw: hw.clone() }),
            _ => None,
        }
    }

    pub fn to_mark(&self) -> Mark {
        match self {
            Grain::Ball { r } => Mark::Ball { r: *r },
            Grain::Box { hw } => Mark::Box { hw: hw.clone() },
        }
    }

    /// Radius of the smallest origin-centred ball containing the grain.
    pub fn extent(&self) -> f64 {
        self.to_mark().extent()
    }
}

/// A grain translated to `center`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacedGrain {
    pub center: Vec<f64>,
    #[serde(flatten)]
    pub grain: Grain,
}

impl PlacedGrain {
    pub fn ball(center: Vec<f64>, r: f64) -> Self {
        Self { center, grain: Grain::Ball { r } }
    }

    pub fn boxed(center: Vec<f64>, hw: Vec<f64>) -> Self {
        Self { center, grain: Grain::Box { hw } }
    }

    pub fn dimension(&self) -> usize {
        self.center.len()
    }

    /// Closed membership test.
    pub fn contains(&self, x: &[f64]) -> bool {
        match &self.grain {
            Grain::Ball { r } => dist2(&self.center, x) <= r * r,
            Grain::Box { hw } => self.center.iter().zip(hw).zip(x).all(|((c, h), y)| (y - c).abs() <= *h),
        }
    }

    /// Euclidean distance from `x` to the grain, zero inside.
    pub fn distance(&self, x: &[f64]) -> f64 {
        match &self.grain {
            Grain::Ball { r } => (dist2(&self.center, x).sqrt() - r).max(0.0),
            Grain::Box { hw } => self
                .center
                .iter()
                .zip(hw)
                .zip(x)
                .map(|((c, h), y)| ((y - c).abs() - h).max(0.0).powi(2))
                .sum::<f64>()
                .sqrt(),
        }
    }

    /// Axis-aligned bounding box as `(lower, upper)`.
    pub fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        let half: Vec<f64> = match &self.grain {
            Grain::Ball { r } => vec![*r; self.dimension()],
            Grain::Box { hw } => hw.clone(),
        };
        (
            self.center.iter().zip(&half).map(|(c, h)| c - h).collect(),
            self.center.iter().zip(&half).map(|(c, h)| c + h).collect(),
        )
    }

    fn validate(&self) -> Result<()> {
        self.grain.validate()?;
        if self.center.iter().any(|c| !c.is_finite()) {
            return Err(rejected("grain center must be finite"));
        }
        if let Grain::Box { hw } = &self.grain {
            if hw.len() != self.center.len() {
                return Err(rejected("box half-widths and center differ in dimension"));
            }
        }
        Ok(())
    }
}

/// Result of an intersection test. `NearTangent` means the common part, if
/// any, is thinner than [`EPS_TOL`] and the solver cannot tell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Intersection {
    Intersect,
    Disjoint,
    NearTangent,
}

impl Intersection {
    /// Near-tangent counts as intersecting.
    pub fn collapse(self) -> bool {
        !matches!(self, Intersection::Disjoint)
    }
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn cmp_grains(a: &PlacedGrain, b: &PlacedGrain) -> Ordering {
    let key = |g: &PlacedGrain| -> Vec<f64> {
        let mut k = g.center.clone();
        match &g.grain {
            Grain::Ball { r } => k.push(*r),
            Grain::Box { hw } => k.extend(hw),
        }
        k
    };
    key(a).iter().zip(&key(b)).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(Ordering::Equal)
}

/// Whether the placed grains have a common point.
///
/// The grains are sorted before solving, so the answer does not depend on
/// argument order.
pub fn grains_intersect(grains: &[PlacedGrain]) -> Result<Intersection> {
    let first = grains.first().ok_or_else(|| rejected("grains_intersect needs at least one grain"))?;
    let d = first.dimension();
    for g in grains {
        g.validate()?;
        if g.dimension() != d {
            return Err(rejected("grains of mixed dimension"));
        }
        if std::mem::discriminant(&g.grain) != std::mem::discriminant(&first.grain) {
            return Err(Error::Capability("intersection of balls with boxes is not supported".into()));
        }
    }
    if grains.len() == 1 {
        return Ok(Intersection::Intersect);
    }
    let mut sorted = grains.to_vec();
    sorted.sort_by(cmp_grains);
    Ok(match &first.grain {
        Grain::Box { .. } => boxes_intersect(&sorted),
        Grain::Ball { r } => {
            if sorted.iter().all(|g| matches!(g.grain, Grain::Ball { r: s } if s == *r)) {
                equal_balls_intersect(&sorted, *r)
            } else {
                variable_balls_intersect(&sorted)
            }
        }
    })
}

fn boxes_intersect(grains: &[PlacedGrain]) -> Intersection {
    let d = grains[0].dimension();
    let bounds: Vec<_> = grains.iter().map(PlacedGrain::bounds).collect();
    let meets = (0..d).all(|k| {
        let lo = bounds.iter().map(|b| b.0[k]).fold(f64::NEG_INFINITY, f64::max);
        let hi = bounds.iter().map(|b| b.1[k]).fold(f64::INFINITY, f64::min);
        lo <= hi
    });
    if meets {
        Intersection::Intersect
    } else {
        Intersection::Disjoint
    }
}

fn equal_balls_intersect(grains: &[PlacedGrain], r: f64) -> Intersection {
    let centers: Vec<Vec<f64>> = grains.iter().map(|g| g.center.clone()).collect();
    let radius = smallest_enclosing_ball(&centers).1;
    let tol = EPS_TOL * r.max(1.0);
    if radius < r - tol {
        Intersection::Intersect
    } else if radius > r + tol {
        Intersection::Disjoint
    } else {
        Intersection::NearTangent
    }
}

/// Smallest ball enclosing `points` (Welzl's algorithm on a fixed shuffle).
pub fn smallest_enclosing_ball(points: &[Vec<f64>]) -> (Vec<f64>, f64) {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(Ordering::Equal));
    pts.shuffle(&mut ChaCha8Rng::seed_from_u64(WELZL_SHUFFLE_SEED));
    let d = pts.first().map_or(0, Vec::len);
    let mut support = Vec::with_capacity(d + 1);
    let (c, r2) = welzl(&pts, pts.len(), &mut support, d);
    (c, r2.sqrt())
}

fn welzl(pts: &[Vec<f64>], n: usize, support: &mut Vec<Vec<f64>>, d: usize) -> (Vec<f64>, f64) {
    if n == 0 || support.len() == d + 1 {
        return ball_through(support, d);
    }
    let p = &pts[n - 1];
    let ball = welzl(pts, n - 1, support, d);
    if dist2(&ball.0, p) <= ball.1 * (1.0 + 1e-12) + 1e-300 {
        return ball;
    }
    support.push(p.clone());
    let ball = welzl(pts, n - 1, support, d);
    support.pop();
    ball
}

/// Smallest ball with all of `support` on its boundary, as (center, radius²).
fn ball_through(support: &[Vec<f64>], d: usize) -> (Vec<f64>, f64) {
    match support.len() {
        0 => (vec![0.0; d], -1.0),
        1 => (support[0].clone(), 0.0),
        k => {
            let p0 = &support[0];
            let v = DMatrix::from_fn(d, k - 1, |i, j| support[j + 1][i] - p0[i]);
            let gram = v.transpose() * &v;
            let b = DVector::from_fn(k - 1, |i, _| v.column(i).norm_squared() / 2.0);
            match gram.lu().solve(&b) {
                Some(a) if a.iter().all(|x| x.is_finite()) => {
                    let off = &v * a;
                    let c: Vec<f64> = p0.iter().zip(off.iter()).map(|(x, o)| x + o).collect();
                    let r2 = support.iter().map(|p| dist2(&c, p)).fold(0.0, f64::max);
                    (c, r2)
                }
                _ => {
                    // affinely dependent support: use the widest pair
                    let mut best = (0, 0, -1.0);
                    for i in 0..k {
                        for j in i + 1..k {
                            let dd = dist2(&support[i], &support[j]);
                            if dd > best.2 {
                                best = (i, j, dd);
                            }
                        }
                    }
                    let c: Vec<f64> =
                        support[best.0].iter().zip(&support[best.1]).map(|(x, y)| (x + y) / 2.0).collect();
                    let r2 = support.iter().map(|p| dist2(&c, p)).fold(0.0, f64::max);
                    (c, r2)
                }
            }
        }
    }
}

/// `g(x) = max_i (|x - c_i| - r_i)`, which is `<= 0` exactly on the common part.
fn excess(grains: &[(Vec<f64>, f64)], x: &[f64]) -> (f64, usize) {
    grains
        .iter()
        .enumerate()
        .map(|(i, (c, r))| (dist2(c, x).sqrt() - r, i))
        .fold((f64::NEG_INFINITY, 0), |a, b| if b.0 > a.0 { b } else { a })
}

fn balls_of(grains: &[PlacedGrain]) -> Vec<(Vec<f64>, f64)> {
    grains
        .iter()
        .map(|g| match g.grain {
            Grain::Ball { r } => (g.center.clone(), r),
            Grain::Box { .. } => unreachable!("checked by caller"),
        })
        .collect()
}

fn variable_balls_intersect(grains: &[PlacedGrain]) -> Intersection {
    let balls = balls_of(grains);
    let tol = EPS_TOL * balls.iter().map(|b| b.1).fold(1.0, f64::max);
    let m = min_excess(&balls);
    if m < -tol {
        Intersection::Intersect
    } else if m > tol {
        Intersection::Disjoint
    } else {
        Intersection::NearTangent
    }
}

/// Exact `min_x max_i (|x - c_i| - r_i)`.
///
/// With `M = max r_i`, the value plus `M` is the radius of the smallest ball
/// enclosing the balls `B(c_i, M - r_i)`. That ball is tangent to at most
/// `d + 1` of them, so it is found among the balls tangent to small subsets.
fn min_excess(balls: &[(Vec<f64>, f64)]) -> f64 {
    let big = balls.iter().map(|b| b.1).fold(0.0, f64::max);
    let inner: Vec<(Vec<f64>, f64)> = balls.iter().map(|(c, r)| (c.clone(), big - r)).collect();
    let d = balls[0].0.len();
    let n = inner.len();
    let scale = inner.iter().flat_map(|(c, r)| c.iter().map(|x| x.abs()).chain([*r])).fold(1.0, f64::max);
    let slack = 1e-12 * scale;
    let encloses = |x: &[f64], s: f64| inner.iter().all(|(c, r)| dist2(c, x).sqrt() + r <= s + slack);
    let mut best = f64::INFINITY;
    let mut subset = Vec::with_capacity(d + 1);
    for size in 1..=(d + 1).min(n) {
        for_each_subset(n, size, &mut subset, &mut |idx| {
            let sel: Vec<&(Vec<f64>, f64)> = idx.iter().map(|&i| &inner[i]).collect();
            for (x, s) in tangent_balls(&sel) {
                if s < best && encloses(&x, s) {
                    best = s;
                }
            }
        });
    }
    best - big
}

fn for_each_subset(n: usize, k: usize, buf: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    if buf.len() == k {
        f(buf);
        return;
    }
    let from = buf.last().map_or(0, |&l| l + 1);
    for i in from..=n - (k - buf.len()) {
        buf.push(i);
        for_each_subset(n, k, buf, f);
        buf.pop();
    }
}

/// Balls `B(x, s)` with center in the affine hull of the given centers that
/// are internally tangent to every given ball: `|x - c_i| = s - ρ_i`.
fn tangent_balls(sel: &[&(Vec<f64>, f64)]) -> Vec<(Vec<f64>, f64)> {
    let (c0, r0) = sel[0];
    if sel.len() == 1 {
        return vec![(c0.clone(), *r0)];
    }
    let d = c0.len();
    let k = sel.len() - 1;
    let v = DMatrix::from_fn(d, k, |i, j| sel[j + 1].0[i] - c0[i]);
    let gram = v.transpose() * &v;
    let Some(lu) = gram.full_piv_lu().try_inverse() else {
        return Vec::new();
    };
    // x - c0 = V a(s), a(s) = A + B s
    let rhs0 = DVector::from_fn(k, |i, _| (v.column(i).norm_squared() - sel[i + 1].1.powi(2) + r0 * r0) / 2.0);
    let rhs1 = DVector::from_fn(k, |i, _| sel[i + 1].1 - r0);
    let p = &v * (&lu * rhs0);
    let q = &v * (&lu * rhs1);
    // |p + q s|^2 = (s - r0)^2
    let qa = q.norm_squared() - 1.0;
    let qb = 2.0 * (p.dot(&q) + r0);
    let qc = p.norm_squared() - r0 * r0;
    let mut roots = Vec::new();
    if qa.abs() < 1e-14 {
        if qb != 0.0 {
            roots.push(-qc / qb);
        }
    } else {
        let disc = qb * qb - 4.0 * qa * qc;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            roots.push((-qb + sq) / (2.0 * qa));
            roots.push((-qb - sq) / (2.0 * qa));
        }
    }
    let rmax = sel.iter().map(|b| b.1).fold(0.0, f64::max);
    roots
        .into_iter()
        .filter(|s| s.is_finite() && *s >= rmax)
        .map(|s| {
            let w = &p + &q * s;
            (c0.iter().zip(w.iter()).map(|(a, b)| a + b).collect(), s)
        })
        .collect()
}

/// Approximate minimum of `max_i (|x - c_i| - r_i)` over ball grains by
/// subgradient descent with steps `r_min / sqrt(k + 1)`. Always an upper
/// bound on the exact value.
pub fn min_excess_subgradient(grains: &[PlacedGrain], iterations: usize) -> Result<f64> {
    if grains.iter().any(|g| !matches!(g.grain, Grain::Ball { .. })) || grains.is_empty() {
        return Err(rejected("subgradient solver needs ball grains"));
    }
    let balls = balls_of(grains);
    let d = balls[0].0.len();
    let n = balls.len() as f64;
    let mut x: Vec<f64> = (0..d).map(|k| balls.iter().map(|b| b.0[k]).sum::<f64>() / n).collect();
    let step0 = balls.iter().map(|b| b.1).fold(f64::INFINITY, f64::min);
    let mut best = f64::INFINITY;
    for k in 0..iterations {
        let (g, i) = excess(&balls, &x);
        best = best.min(g);
        let c = &balls[i].0;
        let dd = dist2(c, &x).sqrt();
        if dd == 0.0 {
            break;
        }
        let step = step0 / (k as f64 + 1.0).sqrt();
        for a in 0..d {
            x[a] -= step * (x[a] - c[a]) / dd;
        }
    }
    Ok(best)
}

/// Exact minimum of `max_i (|x - c_i| - r_i)` over ball grains; negative
/// exactly when the balls have a common interior point.
pub fn min_excess_exact(grains: &[PlacedGrain]) -> Result<f64> {
    if grains.iter().any(|g| !matches!(g.grain, Grain::Ball { .. })) || grains.is_empty() {
        return Err(rejected("excess needs ball grains"));
    }
    Ok(min_excess(&balls_of(grains)))
}

fn grain_of(p: &MarkedPoint) -> Result<PlacedGrain> {
    Grain::from_mark(&p.mark)
        .map(|grain| PlacedGrain { center: p.position.clone(), grain })
        .ok_or_else(|| rejected(format!("point {} carries no grain mark", p.id)))
}

/// Nerve of the grains attached to `config`, capped at dimension `alpha`.
///
/// With `helly` set, simplices with more than `d + 1` vertices are accepted as
/// soon as all their facets are present, which by Helly's theorem is
/// equivalent to solving them directly.
pub fn build_nerve(config: &PointConfiguration, alpha: usize, helly: bool) -> Result<SimplicialComplex> {
    let d = config.dimension();
    let grains: Vec<PlacedGrain> = config.points.iter().map(grain_of).collect::<Result<_>>()?;
    if let Some(g) = grains.first() {
        if grains.iter().any(|h| std::mem::discriminant(&h.grain) != std::mem::discriminant(&g.grain)) {
            return Err(Error::Capability("nerve of mixed balls and boxes is not supported".into()));
        }
    }
    let range = 2.0 * grains.iter().map(|g| g.grain.extent()).fold(0.0, f64::max);
    let mut buf: Vec<PlacedGrain> = Vec::new();
    build_with(&config.points, alpha, Some(range * (1.0 + 1e-12)), |j, pts| {
        if helly && j > d {
            return Ok(true);
        }
        buf.clear();
        for p in pts {
            buf.push(grain_of(p)?);
        }
        Ok(grains_intersect(&buf)?.collapse())
    })
}

/// Point configuration carrying the given grains as marks, ids in list order.
pub fn configuration_from_grains(grains: &[PlacedGrain], master_seed: u64) -> Result<PointConfiguration> {
    let first = grains.first().ok_or_else(|| rejected("no grains"))?;
    let d = first.dimension();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for g in grains {
        g.validate()?;
        if g.dimension() != d {
            return Err(rejected("grains of mixed dimension"));
        }
        for k in 0..d {
            lo[k] = lo[k].min(g.center[k]);
            hi[k] = hi[k].max(g.center[k]);
        }
    }
    let side = lo.iter().zip(&hi).map(|(a, b)| b - a).fold(0.0, f64::max) * 1.1 + 2.0;
    let center: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| (a + b) / 2.0).collect();
    let mut config = PointConfiguration::empty(Window::new(center, side)?, master_seed);
    for g in grains {
        config = config.insert_point(g.center.clone(), g.grain.to_mark())?;
    }
    Ok(config)
}

/// `(β_0, β_1)` of the union of planar grains, from a pixel approximation.
///
/// A pixel is occupied when its centre lies in some grain. Occupied pixels
/// are closed unit squares, so two of them touching at a corner are connected.
pub fn raster_betti_2d(grains: &[PlacedGrain], resolution: usize) -> Result<(usize, usize)> {
    if resolution < 64 {
        return Err(rejected("raster resolution must be at least 64 pixels per unit"));
    }
    if grains.is_empty() {
        return Ok((0, 0));
    }
    for g in grains {
        g.validate()?;
        if g.dimension() != 2 {
            return Err(rejected("raster oracle works in the plane only"));
        }
    }
    let h = 1.0 / resolution as f64;
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for g in grains {
        let (a, b) = g.bounds();
        for k in 0..2 {
            lo[k] = lo[k].min(a[k]);
            hi[k] = hi[k].max(b[k]);
        }
    }
    // one empty pixel of margin on each side
    let origin = [lo[0] - 2.0 * h, lo[1] - 2.0 * h];
    let w = ((hi[0] - origin[0]) / h).ceil() as usize + 2;
    let ht = ((hi[1] - origin[1]) / h).ceil() as usize + 2;
    let mut occ = vec![false; w * ht];
    for g in grains {
        let (a, b) = g.bounds();
        let i0 = ((a[0] - origin[0]) / h).floor().max(0.0) as usize;
        let i1 = (((b[0] - origin[0]) / h).ceil() as usize).min(w - 1);
        let j0 = ((a[1] - origin[1]) / h).floor().max(0.0) as usize;
        let j1 = (((b[1] - origin[1]) / h).ceil() as usize).min(ht - 1);
        for j in j0..=j1 {
            let y = origin[1] + (j as f64 + 0.5) * h;
            for i in i0..=i1 {
                let x = origin[0] + (i as f64 + 0.5) * h;
                if !occ[j * w + i] && g.contains(&[x, y]) {
                    occ[j * w + i] = true;
                }
            }
        }
    }
    // Closed pixels: foreground 8-connected, background 4-connected. At a
    // crossing of two boundaries the pixel holding the tip of the empty wedge
    // can be cut off from the rest of the background; such pockets contain
    // no pixel centre more than one pixel width from every grain and are filled.
    let shallow = |p: usize| {
        let x = [origin[0] + ((p % w) as f64 + 0.5) * h, origin[1] + ((p / w) as f64 + 0.5) * h];
        grains.iter().any(|g| g.distance(&x) <= h)
    };
    for pocket in enclosed_components(&occ, w, ht, false, false) {
        if pocket.iter().all(|&p| shallow(p)) {
            for p in pocket {
                occ[p] = true;
            }
        }
    }
    let at = |i: isize, j: isize| -> bool {
        i >= 0 && j >= 0 && (i as usize) < w && (j as usize) < ht && occ[j as usize * w + i as usize]
    };

    // Euler characteristic of the closed cubical complex
    let squares = occ.iter().filter(|&&o| o).count() as i64;
    let mut edges = 0i64;
    let mut vertices = 0i64;
    for j in 0..=ht as isize {
        for i in 0..=w as isize {
            if at(i - 1, j - 1) || at(i, j - 1) || at(i - 1, j) || at(i, j) {
                vertices += 1;
            }
            // horizontal edge from (i, j) to (i+1, j)
            if at(i, j - 1) || at(i, j) {
                edges += 1;
            }
            // vertical edge from (i, j) to (i, j+1)
            if at(i - 1, j) || at(i, j) {
                edges += 1;
            }
        }
    }
    let chi = vertices - edges + squares;
    let b0 = components(&occ, w, ht, true, true) as i64;
    let b1 = b0 - chi;
    if b1 < 0 {
        return Err(Error::Structural(format!("negative raster β1 (β0 = {b0}, χ = {chi})")));
    }
    Ok((b0 as usize, b1 as usize))
}

fn components(occ: &[bool], w: usize, ht: usize, value: bool, diagonal: bool) -> usize {
    let mut count = 0;
    flood(occ, w, ht, value, diagonal, |_, _| count += 1);
    count
}

/// Components of pixels equal to `value` that avoid the image border.
fn enclosed_components(occ: &[bool], w: usize, ht: usize, value: bool, diagonal: bool) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    flood(occ, w, ht, value, diagonal, |pixels, border| {
        if !border {
            out.push(pixels.to_vec());
        }
    });
    out
}

/// Calls `visit(pixels, touches_border)` once per component of the pixels
/// equal to `value`. `diagonal` selects 8-connectivity.
fn flood(occ: &[bool], w: usize, ht: usize, value: bool, diagonal: bool, mut visit: impl FnMut(&[usize], bool)) {
    let mut seen = vec![false; w * ht];
    let mut pixels = Vec::new();
    for start in 0..w * ht {
        if occ[start] != value || seen[start] {
            continue;
        }
        pixels.clear();
        let mut border = false;
        seen[start] = true;
        pixels.push(start);
        let mut next = 0;
        while next < pixels.len() {
            let p = pixels[next];
            next += 1;
            let (i, j) = ((p % w) as isize, (p / w) as isize);
            if i == 0 || j == 0 || i as usize == w - 1 || j as usize == ht - 1 {
                border = true;
            }
            for dj in -1isize..=1 {
                for di in -1isize..=1 {
                    if (di == 0 && dj == 0) || (!diagonal && di != 0 && dj != 0) {
                        continue;
                    }
                    let (a, b) = (i + di, j + dj);
                    if a < 0 || b < 0 || a as usize >= w || b as usize >= ht {
                        continue;
                    }
                    let q = b as usize * w + a as usize;
                    if occ[q] == value && !seen[q] {
                        seen[q] = true;
                        pixels.push(q);
                    }
                }
            }
        }
        visit(&pixels, border);
    }
}

/// Volume of the unit ball in `R^d`.
pub fn unit_ball_volume(d: usize) -> f64 {
    let h = d as f64 / 2.0;
    std::f64::consts::PI.powf(h) / statrs::function::gamma::gamma(h + 1.0)
}

/// `γ (2R)^d |B(0,1)|`, an almost-sure bound on the mixing parameter when
/// every grain lies in `B(0, R)`.
pub fn mixing_parameter_bound(gamma: f64, radius: f64, d: usize) -> Result<f64> {
    if !(gamma.is_finite() && gamma >= 0.0) || !(radius.is_finite() && radius > 0.0) || d == 0 {
        return Err(rejected("mixing bound needs gamma >= 0, R > 0, d >= 1"));
    }
    Ok(gamma * (2.0 * radius).powi(d as i32) * unit_ball_volume(d))
}

/// Six unit disks evenly spaced on a circle of radius 1.8.
pub fn ring_of_disks(count: usize, ring_radius: f64, disk_radius: f64, center: [f64; 2]) -> Vec<PlacedGrain> {
    (0..count)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / count as f64;
            PlacedGrain::ball(vec![center[0] + ring_radius * t.cos(), center[1] + ring_radius * t.sin()], disk_radius)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::connected_components;
    use crate::homology::betti_vector;

    fn tri(side: f64) -> Vec<PlacedGrain> {
        let h = side * 3f64.sqrt() / 2.0;
        vec![
            PlacedGrain::ball(vec![0.0, 0.0], 1.0),
            PlacedGrain::ball(vec![side, 0.0], 1.0),
            PlacedGrain::ball(vec![side / 2.0, h], 1.0),
        ]
    }

    #[test]
    fn boxes() {
        let a = PlacedGrain::boxed(vec![0.0, 0.0], vec![1.0, 1.0]);
        let b = PlacedGrain::boxed(vec![2.5, 0.0], vec![1.0, 1.0]);
        let c = PlacedGrain::boxed(vec![1.5, 0.5], vec![1.0, 1.0]);
        assert_eq!(grains_intersect(&[a.clone(), b.clone()]).unwrap(), Intersection::Disjoint);
        assert_eq!(grains_intersect(&[a.clone(), c.clone()]).unwrap(), Intersection::Intersect);
        assert_eq!(grains_intersect(&[a.clone(), b.clone(), c]).unwrap(), Intersection::Disjoint);
        // closed boxes touching along a face
        let t = PlacedGrain::boxed(vec![2.0, 0.0], vec![1.0, 1.0]);
        assert!(grains_intersect(&[a, t]).unwrap().collapse());
    }

    #[test]
    fn equilateral_balls() {
        // circumradius side/√3
        assert_eq!(grains_intersect(&tri(1.0)).unwrap(), Intersection::Intersect);
        assert_eq!(grains_intersect(&tri(2.1)).unwrap(), Intersection::Disjoint);
        let r = 3f64.sqrt();
        assert_eq!(grains_intersect(&tri(r)).unwrap(), Intersection::NearTangent);
    }

    #[test]
    fn enclosing_ball_matches_circumradius() {
        let pts: Vec<Vec<f64>> = tri(2.0).into_iter().map(|g| g.center).collect();
        let (_, r) = smallest_enclosing_ball(&pts);
        assert!((r - 2.0 / 3f64.sqrt()).abs() < 1e-12);
        // obtuse triangle: enclosing ball is the longest side's
        let (c, r) = smallest_enclosing_ball(&[vec![0.0, 0.0], vec![4.0, 0.0], vec![2.0, 0.5]]);
        assert!((r - 2.0).abs() < 1e-12 && (c[0] - 2.0).abs() < 1e-12 && c[1].abs() < 1e-12);
    }

    #[test]
    fn variable_radius_balls() {
        let g = |x: f64, y: f64, r: f64| PlacedGrain::ball(vec![x, y], r);
        let far = [g(0.0, 0.0, 1.0), g(3.0, 0.0, 1.5)];
        assert_eq!(grains_intersect(&far).unwrap(), Intersection::Disjoint);
        let near = [g(0.0, 0.0, 1.0), g(2.0, 0.0, 1.5)];
        assert_eq!(grains_intersect(&near).unwrap(), Intersection::Intersect);
        // three pairwise-overlapping disks with empty common part
        let ring = [g(0.0, 0.0, 1.0), g(1.9, 0.0, 1.0), g(0.95, 1.9 * 0.866, 1.05)];
        assert_eq!(grains_intersect(&ring).unwrap(), Intersection::Disjoint);
        let ring = [g(0.0, 0.0, 1.2), g(1.9, 0.0, 1.2), g(0.95, 1.9 * 0.866, 1.1)];
        assert_eq!(grains_intersect(&ring).unwrap(), Intersection::Intersect);
        let tangent = [g(0.0, 0.0, 1.0), g(2.5, 0.0, 1.5)];
        assert_eq!(grains_intersect(&tangent).unwrap(), Intersection::NearTangent);
    }

    #[test]
    fn exact_excess_against_subgradient() {
        let g = |x: f64, y: f64, r: f64| PlacedGrain::ball(vec![x, y], r);
        // two balls: (|c1 - c2| - r1 - r2) / 2
        assert!((min_excess_exact(&[g(0.0, 0.0, 1.0), g(4.0, 0.0, 2.0)]).unwrap() - 0.5).abs() < 1e-12);
        // nested: the small one decides
        assert!((min_excess_exact(&[g(0.0, 0.0, 3.0), g(0.5, 0.0, 1.0)]).unwrap() + 1.0).abs() < 1e-12);
        let sets = [
            vec![g(0.0, 0.0, 1.0), g(1.9, 0.0, 1.0), g(0.95, 1.6454, 1.05)],
            vec![g(0.0, 0.0, 1.2), g(1.9, 0.0, 0.7), g(0.3, 1.5, 0.9), g(1.0, 0.4, 0.5)],
            vec![g(-1.0, 0.2, 2.0), g(3.0, -0.5, 1.0), g(1.0, 3.0, 1.5)],
        ];
        for s in &sets {
            let exact = min_excess_exact(s).unwrap();
            let sub = min_excess_subgradient(s, 200_000).unwrap();
            assert!(sub >= exact - 1e-12, "{sub} < {exact}");
            assert!(sub - exact < 1e-2, "{sub} vs {exact}");
        }
    }

    #[test]
    fn mixed_and_empty_inputs() {
        let a = PlacedGrain::ball(vec![0.0, 0.0], 1.0);
        let b = PlacedGrain::boxed(vec![0.0, 0.0], vec![1.0, 1.0]);
        assert!(matches!(grains_intersect(&[a.clone(), b]), Err(Error::Capability(_))));
        assert!(grains_intersect(&[]).is_err());
        assert_eq!(grains_intersect(&[a]).unwrap(), Intersection::Intersect);
        assert!(grains_intersect(&[PlacedGrain::ball(vec![0.0], -1.0)]).is_err());
    }

    #[test]
    fn grain_json_shape() {
        let g = PlacedGrain::ball(vec![1.0, 2.0], 0.5);
        assert_eq!(serde_json::to_string(&g).unwrap(), r#"{"center":[1.0,2.0],"ball":{"r":0.5}}"#);
        let b: PlacedGrain = serde_json::from_str(r#"{"center":[0,0],"box":{"hw":[1,2]}}"#).unwrap();
        assert_eq!(b, PlacedGrain::boxed(vec![0.0, 0.0], vec![1.0, 2.0]));
    }

    #[test]
    fn ring_nerve_is_a_cycle() {
        let ring = ring_of_disks(6, 1.8, 1.0, [0.0, 0.0]);
        let config = configuration_from_grains(&ring, 1).unwrap();
        let nerve = build_nerve(&config, 3, true).unwrap();
        assert_eq!(nerve.f_vector(), vec![6, 6]);
        assert_eq!(betti_vector(&nerve, 1).unwrap(), vec![1, 1]);
        assert_eq!(raster_betti_2d(&ring, 128).unwrap(), (1, 1));
    }

    #[test]
    fn simple_nerves() {
        let one = configuration_from_grains(&[PlacedGrain::ball(vec![0.0, 0.0], 1.0)], 1).unwrap();
        assert_eq!(build_nerve(&one, 2, true).unwrap().f_vector(), vec![1]);
        let two = configuration_from_grains(
            &[PlacedGrain::boxed(vec![0.0, 0.0], vec![1.0, 1.0]), PlacedGrain::boxed(vec![1.0, 0.5], vec![1.0, 1.0])],
            1,
        )
        .unwrap();
        assert_eq!(build_nerve(&two, 2, true).unwrap().f_vector(), vec![2, 1]);
    }

    #[test]
    fn raster_simple_shapes() {
        let disk = PlacedGrain::ball(vec![0.0, 0.0], 1.0);
        assert_eq!(raster_betti_2d(&[disk.clone()], 64).unwrap(), (1, 0));
        let other = PlacedGrain::ball(vec![3.0, 0.0], 1.0);
        assert_eq!(raster_betti_2d(&[disk.clone(), other], 64).unwrap(), (2, 0));
        assert!(raster_betti_2d(&[disk], 10).is_err());
    }

    #[test]
    fn nerve_components_match_intersection_graph() {
        let grains = vec![
            PlacedGrain::ball(vec![0.0, 0.0], 1.0),
            PlacedGrain::ball(vec![1.5, 0.0], 1.0),
            PlacedGrain::ball(vec![5.0, 0.0], 1.0),
        ];
        let nerve = build_nerve(&configuration_from_grains(&grains, 1).unwrap(), 2, true).unwrap();
        assert_eq!(connected_components(&nerve).len(), 2);
    }

    #[test]
    fn mixing_bound_values() {
        assert!((mixing_parameter_bound(1.0, 1.0, 2).unwrap() - 4.0 * std::f64::consts::PI).abs() < 1e-12);
        assert_eq!(mixing_parameter_bound(0.0, 1.0, 2).unwrap(), 0.0);
        assert!((mixing_parameter_bound(1.0, 0.5, 1).unwrap() - 2.0).abs() < 1e-12);
        assert!((unit_ball_volume(3) - 4.0 / 3.0 * std::f64::consts::PI).abs() < 1e-12);
    }
}
