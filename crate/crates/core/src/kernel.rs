//! Connection functions `phi_1..phi_alpha`.
//!
//! Level `j` maps `j + 1` marked points to a retention probability in `[0, 1]`.
//! Every builtin is symmetric and translation invariant. Levels above the
//! ones supplied evaluate to zero unless the kernel was built with
//! [`Padding::Ones`].

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::boolean::{grains_intersect, Grain, PlacedGrain};
use crate::error::{rejected, Error, Result};
use crate::point_process::Mark;

/// One argument of a connection function.
pub type KernelArg<'a> = (&'a [f64], &'a Mark);

pub type LevelFnBox = dyn Fn(&[KernelArg<'_>]) -> f64 + Send + Sync;

#[derive(Clone)]
pub struct CustomLevel {
    pub name: String,
    pub eval: Arc<LevelFnBox>,
    /// Interaction range at level 1, if the function vanishes beyond it.
    pub range: Option<f64>,
}

impl fmt::Debug for CustomLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomLevel").field("name", &self.name).field("range", &self.range).finish()
    }
}

#[derive(Debug, Clone)]
pub enum LevelFn {
    Constant(f64),
    /// `1{diam <= r}`; at level 1 the geometric edge rule.
    WithinDistance(f64),
    /// `exp(-rate * diam)`.
    ExpDistance(f64),
    /// `exp(-theta * vol_j)` with `vol_j` the j-dimensional volume of the simplex.
    ExpVolume(f64),
    /// `1{grains have a common point}`.
    GrainIntersection,
    Custom(CustomLevel),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Padding {
    #[default]
    Zeros,
    Ones,
}

#[derive(Debug, Clone)]
pub struct ConnectionKernel {
    alpha: usize,
    levels: Vec<LevelFn>,
    padding: Padding,
}

impl ConnectionKernel {
    /// `levels[0]` is `phi_1`. Extra levels beyond `alpha` are rejected.
    pub fn new(alpha: usize, levels: Vec<LevelFn>) -> Result<Self> {
        if alpha == 0 {
            return Err(rejected("alpha must be at least 1"));
        }
        if levels.len() > alpha {
            return Err(rejected(format!("{} levels supplied for alpha = {alpha}", levels.len())));
        }
        for l in &levels {
            let bad = match l {
                LevelFn::Constant(c) => !(0.0..=1.0).contains(c),
                LevelFn::WithinDistance(r) => !r.is_finite() || *r < 0.0,
                LevelFn::ExpDistance(a) | LevelFn::ExpVolume(a) => !a.is_finite() || *a < 0.0,
                LevelFn::GrainIntersection | LevelFn::Custom(_) => false,
            };
            if bad {
                return Err(Error::ModelDefinition(format!("invalid level parameters: {l:?}")));
            }
        }
        Ok(Self { alpha, levels, padding: Padding::Zeros })
    }

    pub fn with_padding(mut self, padding: Padding) -> Self {
        self.padding = padding;
        self
    }

    pub fn constant(alpha: usize, c: f64) -> Result<Self> {
        Self::new(alpha, vec![LevelFn::Constant(c); alpha])
    }

    /// Geometric edge rule only.
    pub fn geometric(alpha: usize, r: f64) -> Result<Self> {
        Self::new(alpha, vec![LevelFn::WithinDistance(r)])
    }

    /// Geometric edges, triangles kept with probability `p`.
    pub fn geometric_plus_p(alpha: usize, r: f64, p: f64) -> Result<Self> {
        if alpha < 2 {
            return Err(rejected("geometric-plus-p needs alpha >= 2"));
        }
        Self::new(alpha, vec![LevelFn::WithinDistance(r), LevelFn::Constant(p)])
    }

    /// `phi_1 = exp(-rate |x - y|)`, `phi_2 = exp(-theta * area)`.
    pub fn exponential(alpha: usize, rate: f64, theta: f64) -> Result<Self> {
        if alpha < 2 {
            return Self::new(alpha, vec![LevelFn::ExpDistance(rate)]);
        }
        Self::new(alpha, vec![LevelFn::ExpDistance(rate), LevelFn::ExpVolume(theta)])
    }

    pub fn grain_intersection(alpha: usize) -> Result<Self> {
        Self::new(alpha, vec![LevelFn::GrainIntersection; alpha])
    }

    /// Geometric edges with every higher level identically one.
    pub fn vietoris_rips(alpha: usize, r: f64) -> Result<Self> {
        let mut levels = vec![LevelFn::WithinDistance(r)];
        levels.extend(std::iter::repeat_n(LevelFn::Constant(1.0), alpha - 1));
        Self::new(alpha, levels)
    }

    pub fn alpha(&self) -> usize {
        self.alpha
    }

    pub fn level(&self, j: usize) -> Option<&LevelFn> {
        self.levels.get(j.checked_sub(1)?)
    }

    /// Evaluate `phi_j` on `j + 1` arguments.
    pub fn evaluate(&self, j: usize, args: &[KernelArg<'_>]) -> Result<f64> {
        if j == 0 || j > self.alpha {
            return Err(rejected(format!("level {j} outside 1..={}", self.alpha)));
        }
        if args.len() != j + 1 {
            return Err(rejected(format!("level {j} takes {} arguments, got {}", j + 1, args.len())));
        }
        let value = match self.level(j) {
            None => match self.padding {
                Padding::Zeros => 0.0,
                Padding::Ones => 1.0,
            },
            Some(level) => eval_level(level, args)?,
        };
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::ModelDefinition(format!(
                "connection function phi_{j} returned {value}, outside [0, 1]"
            )));
        }
        Ok(value)
    }

    /// Distance beyond which `phi_1` vanishes for marks whose extents are at
    /// most `max_extent`. `None` means no finite range is known.
    pub fn edge_range(&self, max_extent: f64) -> Option<f64> {
        match self.level(1) {
            None => match self.padding {
                Padding::Zeros => Some(0.0),
                Padding::Ones => None,
            },
            Some(LevelFn::Constant(c)) if *c == 0.0 => Some(0.0),
            Some(LevelFn::Constant(_)) => None,
            Some(LevelFn::WithinDistance(r)) => Some(*r),
            Some(LevelFn::ExpDistance(_)) | Some(LevelFn::ExpVolume(_)) => None,
            Some(LevelFn::GrainIntersection) => Some(2.0 * max_extent),
            Some(LevelFn::Custom(c)) => c.range,
        }
    }

    /// True if `phi_1` is identically zero.
    pub fn no_edges(&self) -> bool {
        match self.level(1) {
            None => self.padding == Padding::Zeros,
            Some(LevelFn::Constant(c)) => *c == 0.0,
            Some(_) => false,
        }
    }
}

fn eval_level(level: &LevelFn, args: &[KernelArg<'_>]) -> Result<f64> {
    Ok(match level {
        LevelFn::Constant(c) => *c,
        LevelFn::WithinDistance(r) => {
            if diameter(args) <= *r {
                1.0
            } else {
                0.0
            }
        }
        LevelFn::ExpDistance(rate) => (-rate * diameter(args)).exp(),
        LevelFn::ExpVolume(theta) => (-theta * simplex_volume(args)).exp(),
        LevelFn::GrainIntersection => {
            let grains = args
                .iter()
                .map(|(x, m)| {
                    Grain::from_mark(m)
                        .map(|g| PlacedGrain { center: x.to_vec(), grain: g })
                        .ok_or_else(|| {
                            Error::ModelDefinition(format!("grain-intersection kernel needs grain marks, got {m:?}"))
                        })
                })
                .collect::<Result<Vec<_>>>()?;
            if grains_intersect(&grains)?.collapse() {
                1.0
            } else {
                0.0
            }
        }
        LevelFn::Custom(c) => (c.eval)(args),
    })
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Largest pairwise distance. Exactly symmetric: the max is order independent
/// and each distance is computed on the lexicographically ordered pair.
pub fn diameter(args: &[KernelArg<'_>]) -> f64 {
    let mut best: f64 = 0.0;
    for i in 0..args.len() {
        for j in (i + 1)..args.len() {
            let (a, b) = lex_pair(args[i].0, args[j].0);
            best = best.max(dist(a, b));
        }
    }
    best
}

fn lex_pair<'a>(a: &'a [f64], b: &'a [f64]) -> (&'a [f64], &'a [f64]) {
    if a.partial_cmp(b) == Some(std::cmp::Ordering::Greater) {
        (b, a)
    } else {
        (a, b)
    }
}

/// j-dimensional volume of the simplex spanned by the argument positions,
/// `sqrt(det(G)) / j!` with `G` the Gram matrix of edge vectors. Positions are
/// ordered lexicographically first so the result does not depend on the
/// argument order.
pub fn simplex_volume(args: &[KernelArg<'_>]) -> f64 {
    let j = args.len() - 1;
    if j == 0 {
        return 0.0;
    }
    let mut pts: Vec<&[f64]> = args.iter().map(|a| a.0).collect();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let d = pts[0].len();
    let edges: Vec<Vec<f64>> =
        pts[1..].iter().map(|p| (0..d).map(|k| p[k] - pts[0][k]).collect()).collect();
    let gram = DMatrix::from_fn(j, j, |a, b| edges[a].iter().zip(&edges[b]).map(|(x, y)| x * y).sum::<f64>());
    let det = gram.determinant().max(0.0);
    let fact: f64 = (1..=j).map(|k| k as f64).product();
    det.sqrt() / fact
}

/// Serializable kernel descriptor, as it appears in config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum KernelSpec {
    Constant { c: f64 },
    Geometric { r: f64 },
    GeometricPlusP { r: f64, p: f64 },
    Exponential { rate: f64, theta: f64 },
    GrainIntersection,
    VietorisRips { r: f64 },
    Custom {
        name: String,
        #[serde(default)]
        params: BTreeMap<String, f64>,
    },
}

pub type KernelFactory = dyn Fn(usize, &BTreeMap<String, f64>) -> Result<ConnectionKernel> + Send + Sync;

/// Named user kernels.
#[derive(Clone, Default)]
pub struct KernelRegistry {
    factories: HashMap<String, Arc<KernelFactory>>,
}

impl fmt::Debug for KernelRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut names: Vec<_> = self.factories.keys().collect();
        names.sort();
        f.debug_struct("KernelRegistry").field("names", &names).finish()
    }
}

impl KernelRegistry {
    pub fn register(
        &mut self,
        name: impl Into<String>,
        factory: impl Fn(usize, &BTreeMap<String, f64>) -> Result<ConnectionKernel> + Send + Sync + 'static,
    ) {
        self.factories.insert(name.into(), Arc::new(factory));
    }

    pub fn get(&self, name: &str) -> Option<&Arc<KernelFactory>> {
        self.factories.get(name)
    }
}

impl KernelSpec {
    pub fn build(&self, alpha: usize, padding: Padding) -> Result<ConnectionKernel> {
        self.build_with(alpha, padding, &KernelRegistry::default())
    }

    pub fn build_with(&self, alpha: usize, padding: Padding, registry: &KernelRegistry) -> Result<ConnectionKernel> {
        let k = match self {
            KernelSpec::Constant { c } => ConnectionKernel::constant(alpha, *c)?,
            KernelSpec::Geometric { r } => ConnectionKernel::geometric(alpha, *r)?,
            KernelSpec::GeometricPlusP { r, p } => ConnectionKernel::geometric_plus_p(alpha, *r, *p)?,
            KernelSpec::Exponential { rate, theta } => ConnectionKernel::exponential(alpha, *rate, *theta)?,
            KernelSpec::GrainIntersection => ConnectionKernel::grain_intersection(alpha)?,
            KernelSpec::VietorisRips { r } => ConnectionKernel::vietoris_rips(alpha, *r)?,
            KernelSpec::Custom { name, params } => {
                let f = registry
                    .get(name)
                    .ok_or_else(|| Error::Config(format!("unknown kernel `{name}`")))?;
                f(alpha, params)?
            }
        };
        Ok(k.with_padding(padding))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point_process::replication_rng;
    use rand::seq::SliceRandom;
    use rand::Rng;

    fn random_args(rng: &mut impl Rng, n: usize, d: usize, grains: bool) -> Vec<(Vec<f64>, Mark)> {
        (0..n)
            .map(|_| {
                let x: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
                let m = if grains { Mark::Ball { r: rng.random_range(0.3..1.2) } } else { Mark::Constant(0.0) };
                (x, m)
            })
            .collect()
    }

    fn as_args(v: &[(Vec<f64>, Mark)]) -> Vec<KernelArg<'_>> {
        v.iter().map(|(x, m)| (x.as_slice(), m)).collect()
    }

    fn builtins() -> Vec<(ConnectionKernel, bool)> {
        vec![
            (ConnectionKernel::constant(3, 0.3).unwrap(), false),
            (ConnectionKernel::geometric(3, 1.0).unwrap(), false),
            (ConnectionKernel::geometric_plus_p(3, 1.5, 0.5).unwrap(), false),
            (ConnectionKernel::exponential(3, 4.0, 0.01).unwrap(), false),
            (ConnectionKernel::vietoris_rips(3, 2.0).unwrap(), false),
            (ConnectionKernel::grain_intersection(2).unwrap(), true),
        ]
    }

    #[test]
    fn range_symmetry_and_translation_invariance() {
        let mut rng = replication_rng(4, 0, 0);
        for (k, grains) in builtins() {
            for j in 1..=k.alpha() {
                for _ in 0..200 {
                    let pts = random_args(&mut rng, j + 1, 2, grains);
                    let v = k.evaluate(j, &as_args(&pts)).unwrap();
                    assert!((0.0..=1.0).contains(&v));

                    let mut perm = pts.clone();
                    perm.shuffle(&mut rng);
                    assert_eq!(k.evaluate(j, &as_args(&perm)).unwrap(), v, "{k:?} level {j}");

                    let t: Vec<f64> = (0..2).map(|_| rng.random_range(-50.0..50.0)).collect();
                    let shifted: Vec<_> = pts
                        .iter()
                        .map(|(x, m)| (x.iter().zip(&t).map(|(a, b)| a + b).collect(), m.clone()))
                        .collect();
                    let w = k.evaluate(j, &as_args(&shifted)).unwrap();
                    assert!((w - v).abs() <= 1e-12, "{k:?} level {j}: {v} vs {w}");
                }
            }
        }
    }

    #[test]
    fn padding_controls_missing_levels() {
        let m = Mark::Constant(0.0);
        let a = [0.0, 0.0];
        let b = [0.1, 0.0];
        let c = [0.0, 0.1];
        let args = [(&a[..], &m), (&b[..], &m), (&c[..], &m)];
        let k = ConnectionKernel::geometric(2, 1.0).unwrap();
        assert_eq!(k.evaluate(2, &args).unwrap(), 0.0);
        let k = k.with_padding(Padding::Ones);
        assert_eq!(k.evaluate(2, &args).unwrap(), 1.0);
    }

    #[test]
    fn out_of_range_custom_is_model_error() {
        let bad = LevelFn::Custom(CustomLevel { name: "bad".into(), eval: Arc::new(|_| 1.5), range: None });
        let k = ConnectionKernel::new(1, vec![bad]).unwrap();
        let m = Mark::Constant(0.0);
        let x = [0.0];
        let err = k.evaluate(1, &[(&x[..], &m), (&x[..], &m)]).unwrap_err();
        assert!(matches!(err, Error::ModelDefinition(_)));
        assert!(ConnectionKernel::constant(1, 1.2).is_err());
    }

    #[test]
    fn triangle_area() {
        let m = Mark::Constant(0.0);
        let a = [0.0, 0.0];
        let b = [2.0, 0.0];
        let c = [0.0, 3.0];
        assert!((simplex_volume(&[(&a[..], &m), (&b[..], &m), (&c[..], &m)]) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn spec_roundtrip_and_registry() {
        let s: KernelSpec = toml::from_str("kind = \"geometric-plus-p\"\nr = 0.5\np = 0.5").unwrap();
        assert_eq!(s, KernelSpec::GeometricPlusP { r: 0.5, p: 0.5 });
        let custom = KernelSpec::Custom { name: "half".into(), params: BTreeMap::new() };
        assert!(custom.build(1, Padding::Zeros).is_err());
        let mut reg = KernelRegistry::default();
        reg.register("half", |alpha, _| ConnectionKernel::constant(alpha, 0.5));
        let k = custom.build_with(2, Padding::Zeros, &reg).unwrap();
        assert_eq!(k.alpha(), 2);
    }
}
