//! Marked Poisson point configurations in axis-aligned cubic windows.
//!
//! Every point carries a 64-bit seed that is a pure function of
//! `(master_seed, replication, id)`. All per-simplex randomness used later by
//! the complex builder is derived from these seeds, so a point keeps its
//! random state no matter which window or configuration it is viewed in.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{rejected, Result};

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;
const HASH_KEY: u64 = 0x5243_4d2d_636f_6d70;

/// Domain separators so the per-replication stream and per-point seeds never collide.
const DOMAIN_STREAM: u64 = 0x7374_7265_616d;
const DOMAIN_POINT: u64 = 0x706f_696e_74;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Keyed 64-bit hash over a sequence of words. Order-sensitive.
pub fn keyed_hash(words: &[u64]) -> u64 {
    let mut state = HASH_KEY;
    for &w in words {
        state = mix64(state.wrapping_add(GOLDEN_GAMMA) ^ w);
    }
    mix64(state.wrapping_add(words.len() as u64))
}

pub fn point_seed(master_seed: u64, replication: u64, id: u64) -> u64 {
    keyed_hash(&[DOMAIN_POINT, master_seed, replication, id])
}

/// Deterministic RNG stream for one replication.
pub fn replication_rng(master_seed: u64, replication: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(keyed_hash(&[DOMAIN_STREAM, master_seed, replication, stream]))
}

/// Half-open cube `prod_i [center_i - side/2, center_i + side/2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub center: Vec<f64>,
    pub side: f64,
}

impl Window {
    pub fn new(center: Vec<f64>, side: f64) -> Result<Self> {
        if center.is_empty() {
            return Err(rejected("window dimension must be positive"));
        }
        if !side.is_finite() || side <= 0.0 {
            return Err(rejected(format!("window side must be positive and finite, got {side}")));
        }
        if center.iter().any(|c| !c.is_finite()) {
            return Err(rejected("window center must be finite"));
        }
        Ok(Self { center, side })
    }

    /// Window of the given side centered at the origin.
    pub fn centered(dimension: usize, side: f64) -> Result<Self> {
        Self::new(vec![0.0; dimension], side)
    }

    pub fn dimension(&self) -> usize {
        self.center.len()
    }

    pub fn volume(&self) -> f64 {
        self.side.powi(self.dimension() as i32)
    }

    pub fn lower(&self, axis: usize) -> f64 {
        self.center[axis] - 0.5 * self.side
    }

    pub fn upper(&self, axis: usize) -> f64 {
        self.center[axis] + 0.5 * self.side
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dimension()
            && x.iter().enumerate().all(|(i, &xi)| self.lower(i) <= xi && xi < self.upper(i))
    }
}

/// Mark-space element attached to a point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mark {
    Constant(f64),
    Ball { r: f64 },
    Box { hw: Vec<f64> },
    Category(u32),
}

impl Mark {
    /// Radius of the smallest origin-centered ball containing the grain this
    /// mark describes; zero for non-geometric marks.
    pub fn extent(&self) -> f64 {
        match self {
            Mark::Ball { r } => *r,
            Mark::Box { hw } => hw.iter().map(|h| h * h).sum::<f64>().sqrt(),
            Mark::Constant(_) | Mark::Category(_) => 0.0,
        }
    }
}

impl Default for Mark {
    fn default() -> Self {
        Mark::Constant(0.0)
    }
}

pub type MarkFn = dyn Fn(&mut dyn RngCore, usize) -> Mark + Send + Sync;

/// User-defined mark distribution. Not serializable; configs refer to it by name.
#[derive(Clone)]
pub struct CustomMarkSampler {
    pub name: String,
    pub draw: Arc<MarkFn>,
    /// Bound on [`Mark::extent`] of every drawn mark, if known.
    pub extent: Option<f64>,
}

impl fmt::Debug for CustomMarkSampler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomMarkSampler").field("name", &self.name).finish()
    }
}

/// Mark distribution.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MarkSampler {
    Constant { value: f64 },
    /// Ball grain with radius uniform in `[lo, hi]`.
    UniformRadius { lo: f64, hi: f64 },
    FixedBall { radius: f64 },
    /// Box grain, each half-width independently uniform in `[lo, hi]`.
    UniformBox { lo: f64, hi: f64 },
    /// Category `i` with probability proportional to `weights[i]`.
    Categorical { weights: Vec<f64> },
    #[serde(skip)]
    Custom(CustomMarkSampler),
}

impl Default for MarkSampler {
    fn default() -> Self {
        MarkSampler::Constant { value: 0.0 }
    }
}

impl MarkSampler {
    pub fn custom(
        name: impl Into<String>,
        draw: impl Fn(&mut dyn RngCore, usize) -> Mark + Send + Sync + 'static,
    ) -> Self {
        MarkSampler::Custom(CustomMarkSampler { name: name.into(), draw: Arc::new(draw), extent: None })
    }

    /// Like [`MarkSampler::custom`], with a bound on the extent of every mark.
    pub fn custom_bounded(
        name: impl Into<String>,
        extent: f64,
        draw: impl Fn(&mut dyn RngCore, usize) -> Mark + Send + Sync + 'static,
    ) -> Self {
        MarkSampler::Custom(CustomMarkSampler { name: name.into(), draw: Arc::new(draw), extent: Some(extent) })
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            MarkSampler::Constant { value } => value.is_finite(),
            MarkSampler::UniformRadius { lo, hi } | MarkSampler::UniformBox { lo, hi } => {
                lo.is_finite() && hi.is_finite() && *lo > 0.0 && lo <= hi
            }
            MarkSampler::FixedBall { radius } => radius.is_finite() && *radius > 0.0,
            MarkSampler::Categorical { weights } => {
                !weights.is_empty()
                    && weights.iter().all(|w| w.is_finite() && *w >= 0.0)
                    && weights.iter().sum::<f64>() > 0.0
            }
            MarkSampler::Custom(_) => true,
        };
        if ok {
            Ok(())
        } else {
            Err(rejected(format!("invalid mark sampler parameters: {self:?}")))
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, dimension: usize) -> Mark {
        match self {
            MarkSampler::Constant { value } => Mark::Constant(*value),
            MarkSampler::UniformRadius { lo, hi } => Mark::Ball { r: uniform_in(rng, *lo, *hi) },
            MarkSampler::FixedBall { radius } => Mark::Ball { r: *radius },
            MarkSampler::UniformBox { lo, hi } => Mark::Box {
                hw: (0..dimension).map(|_| uniform_in(rng, *lo, *hi)).collect(),
            },
            MarkSampler::Categorical { weights } => {
                let total: f64 = weights.iter().sum();
                let mut u = rng.random::<f64>() * total;
                let mut chosen = weights.len() - 1;
                for (i, w) in weights.iter().enumerate() {
                    if u < *w {
                        chosen = i;
                        break;
                    }
                    u -= w;
                }
                Mark::Category(chosen as u32)
            }
            MarkSampler::Custom(c) => {
                let mut adapter = DynRng(rng);
                (c.draw)(&mut adapter, dimension)
            }
        }
    }

    /// Largest mark extent the sampler can produce, if bounded.
    pub fn max_extent(&self, dimension: usize) -> Option<f64> {
        match self {
            MarkSampler::Constant { .. } | MarkSampler::Categorical { .. } => Some(0.0),
            MarkSampler::UniformRadius { hi, .. } => Some(*hi),
            MarkSampler::FixedBall { radius } => Some(*radius),
            MarkSampler::UniformBox { hi, .. } => Some(hi * (dimension as f64).sqrt()),
            MarkSampler::Custom(c) => c.extent,
        }
    }
}

struct DynRng<'a, R: ?Sized>(&'a mut R);

impl<R: Rng + ?Sized> RngCore for DynRng<'_, R> {
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }
    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.0.fill_bytes(dst)
    }
}

fn uniform_in<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkedPoint {
    pub id: u64,
    pub position: Vec<f64>,
    pub mark: Mark,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointConfiguration {
    pub window: Window,
    pub gamma: f64,
    pub marks: MarkSampler,
    pub master_seed: u64,
    pub replication: u64,
    pub points: Vec<MarkedPoint>,
}

impl PartialEq for PointConfiguration {
    fn eq(&self, other: &Self) -> bool {
        self.window == other.window
            && self.gamma.to_bits() == other.gamma.to_bits()
            && self.master_seed == other.master_seed
            && self.replication == other.replication
            && self.points == other.points
    }
}

/// Poisson(mean) by sequential inversion. Large means are split into chunks
/// of at most `CHUNK` (a sum of independent Poisson variables is Poisson),
/// which keeps `exp(-mean)` away from underflow.
pub fn poisson_inversion<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u64 {
    const CHUNK: f64 = 256.0;
    if mean <= 0.0 {
        return 0;
    }
    let chunks = (mean / CHUNK).ceil().max(1.0) as u64;
    let lambda = mean / chunks as f64;
    let start = (-lambda).exp();
    let mut total = 0;
    for _ in 0..chunks {
        let u: f64 = rng.random();
        let mut k = 0u64;
        let mut p = start;
        let mut cdf = p;
        while u > cdf {
            k += 1;
            p *= lambda / k as f64;
            if p == 0.0 {
                break;
            }
            cdf += p;
        }
        total += k;
    }
    total
}

/// Sample a marked Poisson configuration with intensity `gamma` in `window`.
///
/// The count is drawn first, then each point's position followed by its mark.
/// Ids are `0..n` in generation order.
pub fn sample_poisson(
    window: &Window,
    gamma: f64,
    marks: &MarkSampler,
    master_seed: u64,
    replication: u64,
) -> Result<PointConfiguration> {
    if !gamma.is_finite() || gamma < 0.0 {
        return Err(rejected(format!("intensity must be finite and non-negative, got {gamma}")));
    }
    let window = Window::new(window.center.clone(), window.side)?;
    marks.validate()?;

    let mut rng = replication_rng(master_seed, replication, 0);
    let d = window.dimension();
    let n = poisson_inversion(&mut rng, gamma * window.volume());
    let mut points = Vec::with_capacity(n as usize);
    for id in 0..n {
        let position = (0..d)
            .map(|i| {
                let lo = window.lower(i);
                let hi = window.upper(i);
                let x = lo + window.side * rng.random::<f64>();
                if x < hi {
                    x
                } else {
                    hi.next_down()
                }
            })
            .collect();
        let mark = marks.sample(&mut rng, d);
        points.push(MarkedPoint { id, position, mark, seed: point_seed(master_seed, replication, id) });
    }
    Ok(PointConfiguration { window, gamma, marks: marks.clone(), master_seed, replication, points })
}

impl PointConfiguration {
    /// Empty configuration in `window`, useful for hand-built point sets.
    pub fn empty(window: Window, master_seed: u64) -> Self {
        Self {
            window,
            gamma: 0.0,
            marks: MarkSampler::default(),
            master_seed,
            replication: 0,
            points: Vec::new(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.window.dimension()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = u64> + '_ {
        self.points.iter().map(|p| p.id)
    }

    pub fn next_id(&self) -> u64 {
        self.points.iter().map(|p| p.id + 1).max().unwrap_or(0)
    }

    /// Points with position in `sub`; ids and seeds unchanged.
    pub fn restrict(&self, sub: &Window) -> Result<PointConfiguration> {
        if sub.dimension() != self.dimension() {
            return Err(rejected(format!(
                "restriction window has dimension {}, configuration has {}",
                sub.dimension(),
                self.dimension()
            )));
        }
        Ok(PointConfiguration {
            window: sub.clone(),
            gamma: self.gamma,
            marks: self.marks.clone(),
            master_seed: self.master_seed,
            replication: self.replication,
            points: self.points.iter().filter(|p| sub.contains(&p.position)).cloned().collect(),
        })
    }

    /// A point that would be inserted next, without inserting it.
    pub fn new_point(&self, position: Vec<f64>, mark: Mark) -> Result<MarkedPoint> {
        if position.len() != self.dimension() {
            return Err(rejected(format!(
                "point has dimension {}, configuration has {}",
                position.len(),
                self.dimension()
            )));
        }
        let id = self.next_id();
        Ok(MarkedPoint {
            id,
            position,
            mark,
            seed: point_seed(self.master_seed, self.replication, id),
        })
    }

    pub fn insert_point(&self, position: Vec<f64>, mark: Mark) -> Result<PointConfiguration> {
        let p = self.new_point(position, mark)?;
        let mut out = self.clone();
        out.points.push(p);
        Ok(out)
    }

    /// Appends an already constructed point. Fails on duplicate ids.
    pub fn with_point(&self, point: MarkedPoint) -> Result<PointConfiguration> {
        if point.position.len() != self.dimension() {
            return Err(rejected("point dimension does not match configuration"));
        }
        if self.points.iter().any(|p| p.id == point.id) {
            return Err(rejected(format!("duplicate point id {}", point.id)));
        }
        let mut out = self.clone();
        out.points.push(point);
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: PointConfiguration = serde_json::from_str(s)?;
        let mut seen = std::collections::HashSet::new();
        for p in &cfg.points {
            if !seen.insert(p.id) {
                return Err(rejected(format!("duplicate point id {}", p.id)));
            }
            if p.position.len() != cfg.dimension() {
                return Err(rejected(format!("point {} has wrong dimension", p.id)));
            }
        }
        Ok(cfg)
    }
}
