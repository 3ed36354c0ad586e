//! Monte-Carlo experiments: variance scaling and normality of functionals,
//! covariance matrices, the Poincaré inequality, stabilization of the
//! add-one-point difference, and the degree law of an inserted vertex.
//!
//! Replication `i` draws all its randomness from `(master_seed, i)`, so
//! results do not depend on the number of worker threads.

use std::path::Path;
use std::time::Instant;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boolean::unit_ball_volume;
use crate::complex::{build_complex, difference_operator, SimplicialComplex};
use crate::error::{io_err, rejected, Error, Result};
use crate::functionals::{Functional, FunctionalDescriptor};
use crate::kernel::{ConnectionKernel, KernelSpec, LevelFn, Padding};
use crate::point_process::{replication_rng, sample_poisson, Mark, MarkSampler, MarkedPoint, PointConfiguration, Window};
use crate::stats::{self, ChiSquareResult, KsOutcome};

/// RNG stream of a replication reserved for the inserted point.
const STREAM_EXTRA: u64 = 1;
/// RNG stream used by reference samplers.
const STREAM_REFERENCE: u64 = 2;
/// Replication indices at and above this are used for inner Poincaré samples.
const INNER_REPLICATION_BASE: u64 = 1 << 40;

fn default_alpha() -> usize {
    2
}

/// Model description as it appears in config files.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub dimension: usize,
    pub gamma: f64,
    #[serde(default = "default_alpha")]
    pub alpha: usize,
    #[serde(default)]
    pub padding: Padding,
    pub kernel: KernelSpec,
    #[serde(default)]
    pub marks: MarkSampler,
}

impl ModelSpec {
    pub fn build(&self) -> Result<Model> {
        let kernel = self.kernel.build(self.alpha, self.padding)?;
        let mut m = Model::new(self.dimension, self.gamma, kernel, self.marks.clone())?;
        m.spec = Some(self.clone());
        Ok(m)
    }
}

/// Intensity, marks and connection kernel of the random complex.
#[derive(Debug, Clone)]
pub struct Model {
    pub dimension: usize,
    pub gamma: f64,
    pub kernel: ConnectionKernel,
    pub marks: MarkSampler,
    spec: Option<ModelSpec>,
}

impl Model {
    pub fn new(dimension: usize, gamma: f64, kernel: ConnectionKernel, marks: MarkSampler) -> Result<Self> {
        if dimension == 0 {
            return Err(rejected("dimension must be at least 1"));
        }
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(rejected(format!("intensity must be finite and non-negative, got {gamma}")));
        }
        marks.validate()?;
        Ok(Self { dimension, gamma, kernel, marks, spec: None })
    }

    pub fn spec(&self) -> Option<&ModelSpec> {
        self.spec.as_ref()
    }

    pub fn window(&self, side: f64) -> Result<Window> {
        Window::centered(self.dimension, side)
    }

    pub fn sample(&self, side: f64, master_seed: u64, replication: u64) -> Result<PointConfiguration> {
        sample_poisson(&self.window(side)?, self.gamma, &self.marks, master_seed, replication)
    }

    /// Point at `position` with a fresh mark, using the replication's extra stream.
    pub fn extra_point(&self, config: &PointConfiguration, position: Vec<f64>) -> Result<MarkedPoint> {
        let mut rng = replication_rng(config.master_seed, config.replication, STREAM_EXTRA);
        let mark = self.marks.sample(&mut rng, self.dimension);
        config.new_point(position, mark)
    }

    /// Interaction range of `phi_1` over the marks this model can draw.
    pub fn edge_range(&self) -> Option<f64> {
        self.kernel.edge_range(self.marks.max_extent(self.dimension)?)
    }
}

/// Runs `f` on a pool of `threads` workers (`None`: rayon's default).
pub fn in_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn evaluate_checked(f: &FunctionalDescriptor, k: &SimplicialComplex) -> Result<f64> {
    k.check_closed()?;
    f.evaluate(k)
}

fn wrap_rep<T>(index: u64, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Replication { index, source: Box::new(e) })
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub model: Model,
    pub functionals: Vec<FunctionalDescriptor>,
    /// Window side lengths, strictly increasing. Smaller windows are
    /// restrictions of the configuration sampled in the largest one.
    pub sides: Vec<f64>,
    pub replications: usize,
    pub master_seed: u64,
    pub significance: f64,
    /// Largest accepted relative change of `Var/|W|` over the last step.
    pub tolerance: f64,
}

impl ExperimentConfig {
    pub fn new(model: Model, functionals: Vec<FunctionalDescriptor>, sides: Vec<f64>, replications: usize) -> Self {
        Self { model, functionals, sides, replications, master_seed: 0, significance: 0.01, tolerance: 0.15 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sides.is_empty() || self.sides.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(rejected("window sides must be positive and finite"));
        }
        if self.sides.windows(2).any(|w| w[0] >= w[1]) {
            return Err(rejected("window sides must be strictly increasing"));
        }
        if self.replications < 2 {
            return Err(rejected("at least two replications are needed"));
        }
        if self.functionals.is_empty() {
            return Err(rejected("no functionals given"));
        }
        if !(self.significance > 0.0 && self.significance < 1.0) {
            return Err(rejected("significance must lie in (0, 1)"));
        }
        Ok(())
    }

    fn echo(&self) -> ConfigEcho {
        ConfigEcho {
            model: self.model.spec.clone(),
            functionals: self.functionals.iter().map(ToString::to_string).collect(),
            sides: self.sides.clone(),
            replications: self.replications,
            master_seed: self.master_seed,
            significance: self.significance,
            tolerance: self.tolerance,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub model: Option<ModelSpec>,
    pub functionals: Vec<String>,
    pub sides: Vec<f64>,
    pub replications: usize,
    pub master_seed: u64,
    pub significance: f64,
    pub tolerance: f64,
}

/// Values of every functional at every side, `[replication][side][functional]`.
fn replicate(cfg: &ExperimentConfig) -> Result<Vec<Vec<Vec<f64>>>> {
    cfg.validate()?;
    let largest = *cfg.sides.last().unwrap();
    (0..cfg.replications as u64)
        .into_par_iter()
        .map(|rep| {
            wrap_rep(rep, (|| {
                let master = cfg.model.sample(largest, cfg.master_seed, rep)?;
                cfg.sides
                    .iter()
                    .map(|&side| {
                        let config = master.restrict(&cfg.model.window(side)?)?;
                        let k = build_complex(&config, &cfg.model.kernel)?;
                        cfg.functionals.iter().map(|f| evaluate_checked(f, &k)).collect()
                    })
                    .collect()
            })())
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct FunctionalSummary {
    pub side: f64,
    pub functional: String,
    pub values: Vec<f64>,
    pub mean: f64,
    pub variance: f64,
    pub variance_se: f64,
    /// `variance / side^d`.
    pub var_over_volume: f64,
    pub var_over_volume_se: f64,
    /// Zero sample variance.
    pub degenerate: bool,
    /// `var_over_volume` exceeds three standard errors.
    pub positive: bool,
    pub standardized: Vec<f64>,
    /// `None` with fewer than 20 replications.
    pub ks: Option<KsOutcome>,
    pub ks_pass: Option<bool>,
}

fn summarize(side: f64, dimension: usize, functional: String, values: Vec<f64>, alpha: f64) -> Result<FunctionalSummary> {
    let volume = side.powi(dimension as i32);
    let variance = stats::variance(&values);
    let variance_se = stats::std_error_of_variance(&values);
    let ks = if values.len() >= 20 { Some(stats::ks_normality_test(&values)?) } else { None };
    let ks_pass = ks.and_then(|k| k.result()).map(|r| r.p_value >= alpha);
    Ok(FunctionalSummary {
        side,
        functional,
        mean: stats::mean(&values),
        variance,
        variance_se,
        var_over_volume: variance / volume,
        var_over_volume_se: variance_se / volume,
        degenerate: variance == 0.0,
        positive: variance / volume > 3.0 * variance_se / volume,
        standardized: stats::standardize(&values).unwrap_or_default(),
        ks,
        ks_pass,
        values,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct VarianceStabilization {
    pub functional: String,
    /// Relative change of `Var/|W|` between the last two sides.
    pub relative_change: Option<f64>,
    pub pass: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CovarianceAtSide {
    pub side: f64,
    /// Sample covariance divided by `|W|`.
    pub matrix: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
    pub trace: f64,
    pub psd: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub dimension: usize,
    pub sides: Vec<f64>,
    pub functionals: Vec<String>,
    /// `summaries[side][functional]`.
    pub summaries: Vec<Vec<FunctionalSummary>>,
    pub covariance: Vec<CovarianceAtSide>,
    pub stabilization: Vec<VarianceStabilization>,
    pub significance: f64,
    pub tolerance: f64,
    pub elapsed_seconds: f64,
    pub config: ConfigEcho,
}

impl ExperimentReport {
    pub fn summary(&self, side_index: usize, functional_index: usize) -> &FunctionalSummary {
        &self.summaries[side_index][functional_index]
    }

    pub fn last(&self, functional_index: usize) -> &FunctionalSummary {
        &self.summaries[self.sides.len() - 1][functional_index]
    }
}

fn covariance_at(side: f64, dimension: usize, columns: &[Vec<f64>]) -> CovarianceAtSide {
    let volume = side.powi(dimension as i32);
    let matrix: Vec<Vec<f64>> =
        stats::covariance_matrix(columns).into_iter().map(|row| row.into_iter().map(|c| c / volume).collect()).collect();
    let trace = (0..matrix.len()).map(|i| matrix[i][i]).sum();
    CovarianceAtSide { side, eigenvalues: stats::symmetric_eigenvalues(&matrix), psd: stats::is_psd(&matrix), trace, matrix }
}

/// Replicates the model at every side and summarizes each functional.
pub fn run_clt_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    let values = replicate(cfg)?;
    let names: Vec<String> = cfg.functionals.iter().map(ToString::to_string).collect();
    let d = cfg.model.dimension;
    let mut summaries = Vec::with_capacity(cfg.sides.len());
    let mut covariance = Vec::with_capacity(cfg.sides.len());
    for (si, &side) in cfg.sides.iter().enumerate() {
        let columns: Vec<Vec<f64>> =
            (0..names.len()).map(|fi| values.iter().map(|rep| rep[si][fi]).collect()).collect();
        covariance.push(covariance_at(side, d, &columns));
        summaries.push(
            columns
                .into_iter()
                .zip(&names)
                .map(|(col, name)| summarize(side, d, name.clone(), col, cfg.significance))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    let stabilization = names
        .iter()
        .enumerate()
        .map(|(fi, name)| {
            let relative_change = (summaries.len() >= 2).then(|| {
                let n = summaries.len();
                stats::relative_change(summaries[n - 2][fi].var_over_volume, summaries[n - 1][fi].var_over_volume)
            });
            VarianceStabilization {
                functional: name.clone(),
                relative_change,
                pass: relative_change.map(|c| c <= cfg.tolerance),
            }
        })
        .collect();
    Ok(ExperimentReport {
        dimension: d,
        sides: cfg.sides.clone(),
        functionals: names,
        summaries,
        covariance,
        stabilization,
        significance: cfg.significance,
        tolerance: cfg.tolerance,
        elapsed_seconds: start.elapsed().as_secs_f64(),
        config: cfg.echo(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CovarianceReport {
    pub functionals: Vec<String>,
    pub sides: Vec<f64>,
    pub per_side: Vec<CovarianceAtSide>,
    /// Entry-wise relative change between the last two sides.
    pub relative_change: Option<Vec<Vec<f64>>>,
    pub max_relative_change: Option<f64>,
    pub all_psd: bool,
    pub stable: Option<bool>,
    pub tolerance: f64,
    pub elapsed_seconds: f64,
}

/// Covariance matrices of the functional vector, divided by `|W|`, with a
/// semi-definiteness check per side and a stability check over the last step.
pub fn run_covariance_experiment(cfg: &ExperimentConfig) -> Result<CovarianceReport> {
    if cfg.functionals.len() < 2 {
        return Err(rejected("covariance experiment needs at least two functionals"));
    }
    let start = Instant::now();
    let values = replicate(cfg)?;
    let d = cfg.model.dimension;
    let per_side: Vec<CovarianceAtSide> = cfg
        .sides
        .iter()
        .enumerate()
        .map(|(si, &side)| {
            let columns: Vec<Vec<f64>> =
                (0..cfg.functionals.len()).map(|fi| values.iter().map(|rep| rep[si][fi]).collect()).collect();
            covariance_at(side, d, &columns)
        })
        .collect();
    let relative_change = (per_side.len() >= 2).then(|| {
        let (a, b) = (&per_side[per_side.len() - 2].matrix, &per_side[per_side.len() - 1].matrix);
        a.iter().zip(b).map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| stats::relative_change(*x, *y)).collect()).collect()
    });
    let max_relative_change: Option<f64> =
        relative_change.as_ref().map(|m: &Vec<Vec<f64>>| m.iter().flatten().copied().fold(0.0, f64::max));
    Ok(CovarianceReport {
        functionals: cfg.functionals.iter().map(ToString::to_string).collect(),
        sides: cfg.sides.clone(),
        all_psd: per_side.iter().all(|c| c.psd),
        per_side,
        stable: max_relative_change.map(|m| m <= cfg.tolerance),
        relative_change,
        max_relative_change,
        tolerance: cfg.tolerance,
        elapsed_seconds: start.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PoincareReport {
    pub functional: String,
    pub side: f64,
    /// Sample variance of the functional.
    pub lhs: f64,
    pub lhs_se: f64,
    /// `gamma |W| E[(Λf)^2]` with the point uniform in `W`.
    pub rhs: f64,
    pub rhs_se: f64,
    pub combined_se: f64,
    /// `rhs + 2 combined_se - lhs`.
    pub margin: f64,
    pub pass: bool,
}

/// Empirical check of `Var f <= gamma ∫_W E[(Λ_x f)^2] dx`.
pub fn poincare_check(
    model: &Model,
    functional: &FunctionalDescriptor,
    side: f64,
    reps_outer: usize,
    reps_inner: usize,
    master_seed: u64,
) -> Result<PoincareReport> {
    if reps_outer < 4 || reps_inner < 2 {
        return Err(rejected("Poincaré check needs at least 4 outer and 2 inner replications"));
    }
    let window = model.window(side)?;
    let outer: Vec<f64> = (0..reps_outer as u64)
        .into_par_iter()
        .map(|rep| {
            wrap_rep(rep, (|| {
                let config = model.sample(side, master_seed, rep)?;
                evaluate_checked(functional, &build_complex(&config, &model.kernel)?)
            })())
        })
        .collect::<Result<_>>()?;
    let inner: Vec<f64> = (0..reps_inner as u64)
        .into_par_iter()
        .map(|i| {
            let rep = INNER_REPLICATION_BASE + i;
            wrap_rep(rep, (|| {
                let config = model.sample(side, master_seed, rep)?;
                let mut rng = replication_rng(master_seed, rep, STREAM_EXTRA);
                let x: Vec<f64> =
                    (0..model.dimension).map(|a| window.lower(a) + side * rng.random::<f64>()).collect();
                let extra = model.extra_point(&config, x)?;
                let lambda = difference_operator(functional, &config, &model.kernel, &extra)?;
                Ok(lambda * lambda)
            })())
        })
        .collect::<Result<_>>()?;
    let scale = model.gamma * window.volume();
    let lhs = stats::variance(&outer);
    let lhs_se = stats::std_error_of_variance(&outer);
    let rhs = scale * stats::mean(&inner);
    let rhs_se = scale * stats::std_error_of_mean(&inner);
    let combined_se = (lhs_se * lhs_se + rhs_se * rhs_se).sqrt();
    let margin = rhs + 2.0 * combined_se - lhs;
    Ok(PoincareReport {
        functional: functional.to_string(),
        side,
        lhs,
        lhs_se,
        rhs,
        rhs_se,
        combined_se,
        margin,
        pass: margin >= 0.0,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilizationReport {
    pub functional: String,
    pub sides: Vec<f64>,
    /// `values[rep][side]` is `Λ_0 f` on the window of that side.
    pub values: Vec<Vec<f64>>,
    /// Fraction of replications with equal values at sides `k` and `k + 1`.
    pub fractions: Vec<f64>,
}

/// Adds a point at the origin to nested restrictions of one configuration
/// and records how often the difference `Λ_0 f` agrees between windows.
pub fn stabilization_probe(
    model: &Model,
    functional: &FunctionalDescriptor,
    sides: &[f64],
    reps: usize,
    master_seed: u64,
) -> Result<StabilizationReport> {
    if sides.len() < 2 || sides.windows(2).any(|w| !(w[0] < w[1])) || sides[0] <= 0.0 {
        return Err(rejected("need at least two strictly increasing positive sides"));
    }
    let largest = *sides.last().unwrap();
    let origin = vec![0.0; model.dimension];
    let values: Vec<Vec<f64>> = (0..reps as u64)
        .into_par_iter()
        .map(|rep| {
            wrap_rep(rep, (|| {
                let master = model.sample(largest, master_seed, rep)?;
                // the same extra point (id, mark, seed) for every window
                let extra = model.extra_point(&master, origin.clone())?;
                sides
                    .iter()
                    .map(|&s| {
                        let config = master.restrict(&model.window(s)?)?;
                        difference_operator(functional, &config, &model.kernel, &extra)
                    })
                    .collect()
            })())
        })
        .collect::<Result<_>>()?;
    let fractions = (0..sides.len() - 1)
        .map(|k| {
            let same = values.iter().filter(|v| v[k] == v[k + 1]).count();
            if reps == 0 {
                f64::NAN
            } else {
                same as f64 / reps as f64
            }
        })
        .collect();
    Ok(StabilizationReport { functional: functional.to_string(), sides: sides.to_vec(), values, fractions })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MixingEstimate {
    pub value: f64,
    /// Zero for closed-form values.
    pub std_error: f64,
}

/// `E[(a + R)^d]` for the radius law of `marks`, if closed form.
fn ball_radius_moment(marks: &MarkSampler, a: f64, d: usize) -> Option<f64> {
    let d1 = d as i32 + 1;
    match marks {
        MarkSampler::FixedBall { radius } => Some((a + radius).powi(d as i32)),
        MarkSampler::UniformRadius { lo, hi } if hi > lo => {
            Some(((a + hi).powi(d1) - (a + lo).powi(d1)) / (d1 as f64 * (hi - lo)))
        }
        MarkSampler::UniformRadius { lo, .. } => Some((a + lo).powi(d as i32)),
        _ => None,
    }
}

/// Mixing parameter `π(a) = gamma ∫ E_B[φ_1((0, a), (y, B))] dy`: the mean
/// edge degree of a vertex with mark `a` added to the process.
///
/// Closed forms cover the geometric and exponential edge rules, and grain
/// intersection for ball or box marks with uniform or fixed sizes. Other
/// kernels with a finite range are integrated by Monte Carlo over the
/// range box; kernels with neither are a capability error.
pub fn mixing_parameter(model: &Model, a: &Mark, mc_samples: usize, seed: u64) -> Result<MixingEstimate> {
    let d = model.dimension;
    let gamma = model.gamma;
    let exact = |value: f64| Ok(MixingEstimate { value, std_error: 0.0 });
    if gamma == 0.0 || model.kernel.no_edges() {
        return exact(0.0);
    }
    match (model.kernel.level(1), &model.marks, a) {
        (Some(LevelFn::WithinDistance(r)), _, _) => return exact(gamma * unit_ball_volume(d) * r.powi(d as i32)),
        (Some(LevelFn::ExpDistance(rate)), _, _) => {
            let gamma_d = statrs::function::gamma::gamma(d as f64);
            return exact(gamma * d as f64 * unit_ball_volume(d) * gamma_d / rate.powi(d as i32));
        }
        (Some(LevelFn::GrainIntersection), marks, Mark::Ball { r }) => {
            if let Some(m) = ball_radius_moment(marks, *r, d) {
                return exact(gamma * unit_ball_volume(d) * m);
            }
        }
        (Some(LevelFn::GrainIntersection), MarkSampler::UniformBox { lo, hi }, Mark::Box { hw }) if hw.len() == d => {
            let mean_half = (lo + hi) / 2.0;
            return exact(gamma * hw.iter().map(|h| 2.0 * (h + mean_half)).product::<f64>());
        }
        (Some(LevelFn::Constant(_)), _, _) => {
            return Err(Error::Capability("constant positive edge probability has infinite mixing parameter".into()));
        }
        _ => {}
    }
    let extent = model.marks.max_extent(d).map(|m| m.max(a.extent()));
    let range = extent
        .and_then(|e| model.kernel.edge_range(e))
        .ok_or_else(|| Error::Capability("kernel has no finite range and no closed-form mixing parameter".into()))?;
    if mc_samples < 2 {
        return Err(rejected("Monte Carlo mixing parameter needs at least 2 samples"));
    }
    let mut rng = replication_rng(seed, 0, STREAM_REFERENCE);
    let origin = vec![0.0; d];
    let mut vals = Vec::with_capacity(mc_samples);
    for _ in 0..mc_samples {
        let y: Vec<f64> = (0..d).map(|_| range * (2.0 * rng.random::<f64>() - 1.0)).collect();
        let b = model.marks.sample(&mut rng, d);
        vals.push(model.kernel.evaluate(1, &[(&origin, a), (&y, &b)])?);
    }
    let scale = gamma * (2.0 * range).powi(d as i32);
    Ok(MixingEstimate { value: scale * stats::mean(&vals), std_error: scale * stats::std_error_of_mean(&vals) })
}

fn deterministic_mark(marks: &MarkSampler) -> bool {
    matches!(marks, MarkSampler::Constant { .. } | MarkSampler::FixedBall { .. })
        || matches!(marks, MarkSampler::UniformRadius { lo, hi } | MarkSampler::UniformBox { lo, hi } if lo == hi)
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DegreeTest {
    /// Chi-square goodness of fit against Poisson(π).
    Poisson { pi: f64, result: ChiSquareResult },
    /// Two-sample chi-square against draws of Poisson(π(V)), V from the mark law.
    MixedPoisson { reference: Vec<u64>, result: ChiSquareResult },
}

impl DegreeTest {
    pub fn result(&self) -> &ChiSquareResult {
        match self {
            DegreeTest::Poisson { result, .. } | DegreeTest::MixedPoisson { result, .. } => result,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DegreeReport {
    pub side: f64,
    pub degrees: Vec<u64>,
    /// `(degree, count)`, ascending.
    pub histogram: Vec<(u64, usize)>,
    pub test: DegreeTest,
    pub significance: f64,
    pub pass: bool,
    pub warnings: Vec<String>,
}

/// Edge degree of a vertex inserted at the origin, compared with the
/// (mixed) Poisson law with parameter `π(V)`.
pub fn degree_distribution_experiment(
    model: &Model,
    replications: usize,
    side: f64,
    master_seed: u64,
    significance: f64,
) -> Result<DegreeReport> {
    if replications < 2 {
        return Err(rejected("at least two replications are needed"));
    }
    let mut warnings = Vec::new();
    match model.edge_range() {
        Some(r) if side < 10.0 * r => warnings.push(format!(
            "window side {side} is below ten times the kernel range {r}; edge effects bias the degree law"
        )),
        None if !model.kernel.no_edges() => {
            warnings.push("kernel has no finite range; edge effects are not controlled".to_string())
        }
        _ => {}
    }
    let origin = vec![0.0; model.dimension];
    let degrees: Vec<u64> = (0..replications as u64)
        .into_par_iter()
        .map(|rep| {
            wrap_rep(rep, (|| {
                let config = model.sample(side, master_seed, rep)?;
                let extra = model.extra_point(&config, origin.clone())?;
                let k = build_complex(&config.with_point(extra.clone())?, &model.kernel)?;
                k.check_closed()?;
                Ok(k.simplex_degree(extra.id, 1)? as u64)
            })())
        })
        .collect::<Result<_>>()?;
    let test = if deterministic_mark(&model.marks) {
        let mut rng = replication_rng(master_seed, 0, STREAM_REFERENCE);
        let mark = model.marks.sample(&mut rng, model.dimension);
        let pi = mixing_parameter(model, &mark, 100_000, master_seed)?.value;
        DegreeTest::Poisson { pi, result: stats::chi_square_poisson(&degrees, pi)? }
    } else {
        let reference: Vec<u64> = (0..replications as u64)
            .into_par_iter()
            .map(|rep| {
                let mut rng = replication_rng(master_seed, rep, STREAM_REFERENCE);
                let mark = model.marks.sample(&mut rng, model.dimension);
                let pi = mixing_parameter(model, &mark, 20_000, master_seed ^ rep)?.value;
                Ok(if pi > 0.0 { Poisson::new(pi).expect("positive mean").sample(&mut rng) as u64 } else { 0 })
            })
            .collect::<Result<_>>()?;
        let result = stats::chi_square_two_sample(&degrees, &reference)?;
        DegreeTest::MixedPoisson { reference, result }
    };
    let mut histogram: Vec<(u64, usize)> = Vec::new();
    let mut sorted = degrees.clone();
    sorted.sort_unstable();
    for d in sorted {
        match histogram.last_mut() {
            Some((v, c)) if *v == d => *c += 1,
            _ => histogram.push((d, 1)),
        }
    }
    let pass = test.result().p_value >= significance;
    Ok(DegreeReport { side, degrees, histogram, test, significance, pass, warnings })
}

fn file_stem(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect()
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(io_err(path))
}

/// Writes `per_replication.csv`, `summary.csv`, `covariance.json`,
/// `report.json` and one histogram/Q-Q SVG per (side, functional).
pub fn write_experiment_outputs(report: &ExperimentReport, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut per_rep = csv::Writer::from_path(dir.join("per_replication.csv"))?;
    per_rep.write_record(["side", "rep", "functional", "value"])?;
    for row in &report.summaries {
        for s in row {
            for (rep, v) in s.values.iter().enumerate() {
                per_rep.write_record([s.side.to_string(), rep.to_string(), s.functional.clone(), v.to_string()])?;
            }
        }
    }
    per_rep.flush().map_err(io_err(dir.join("per_replication.csv")))?;

    let mut summary = csv::Writer::from_path(dir.join("summary.csv"))?;
    summary.write_record(["side", "functional", "mean", "var", "var_over_volume", "ks_stat", "ks_p"])?;
    for row in &report.summaries {
        for s in row {
            let (stat, p) = match s.ks.and_then(|k| k.result()) {
                Some(r) => (r.statistic.to_string(), r.p_value.to_string()),
                None => (String::new(), String::new()),
            };
            summary.write_record([
                s.side.to_string(),
                s.functional.clone(),
                s.mean.to_string(),
                s.variance.to_string(),
                s.var_over_volume.to_string(),
                stat,
                p,
            ])?;
        }
    }
    summary.flush().map_err(io_err(dir.join("summary.csv")))?;

    #[derive(Serialize)]
    struct CovJson<'a> {
        functionals: &'a [String],
        per_side: &'a [CovarianceAtSide],
    }
    write_file(
        &dir.join("covariance.json"),
        &serde_json::to_string_pretty(&CovJson { functionals: &report.functionals, per_side: &report.covariance })?,
    )?;
    write_file(&dir.join("report.json"), &serde_json::to_string_pretty(report)?)?;

    for row in &report.summaries {
        for s in row {
            let title = format!("{} at side {}", s.functional, s.side);
            let svg = crate::svg::histogram_qq(&s.values, &title);
            write_file(&dir.join(format!("hist_{}_{}.svg", s.side, file_stem(&s.functional))), &svg)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geometric(r: f64, gamma: f64) -> Model {
        Model::new(2, gamma, ConnectionKernel::geometric(2, r).unwrap(), MarkSampler::default()).unwrap()
    }

    #[test]
    fn mixing_parameter_closed_forms() {
        let m = geometric(0.5, 1.0);
        let pi = mixing_parameter(&m, &Mark::Constant(0.0), 0, 1).unwrap();
        assert!((pi.value - std::f64::consts::PI * 0.25).abs() < 1e-12);

        let zero = Model::new(2, 1.0, ConnectionKernel::constant(2, 0.0).unwrap(), MarkSampler::default()).unwrap();
        assert_eq!(mixing_parameter(&zero, &Mark::Constant(0.0), 0, 1).unwrap().value, 0.0);

        let disks = Model::new(
            2,
            1.0,
            ConnectionKernel::grain_intersection(2).unwrap(),
            MarkSampler::FixedBall { radius: 0.5 },
        )
        .unwrap();
        let pi = mixing_parameter(&disks, &Mark::Ball { r: 0.5 }, 0, 1).unwrap();
        assert!((pi.value - std::f64::consts::PI).abs() < 1e-12);

        let half = Model::new(2, 1.0, ConnectionKernel::constant(1, 0.5).unwrap(), MarkSampler::default()).unwrap();
        assert!(matches!(mixing_parameter(&half, &Mark::Constant(0.0), 10, 1), Err(Error::Capability(_))));
    }

    #[test]
    fn mixing_parameter_monte_carlo_matches_closed_form() {
        // uniform radii behind a custom sampler, so no closed form applies
        let marks = MarkSampler::custom_bounded("radius", 0.6, |rng, _| Mark::Ball { r: 0.2 + 0.4 * rng.random::<f64>() });
        let mc = Model::new(2, 1.0, ConnectionKernel::grain_intersection(1).unwrap(), marks).unwrap();
        let est = mixing_parameter(&mc, &Mark::Ball { r: 0.3 }, 200_000, 5).unwrap();
        // pi * E[(0.3 + R)^2], R ~ U[0.2, 0.6]
        let exact = std::f64::consts::PI * ((0.9f64).powi(3) - (0.5f64).powi(3)) / (3.0 * 0.4);
        assert!((est.value - exact).abs() < 4.0 * est.std_error, "{est:?} vs {exact}");
    }

    #[test]
    fn vertex_count_variance_and_constant_functional() {
        let mut cfg = ExperimentConfig::new(
            geometric(1.0, 1.0),
            vec!["vertices".parse().unwrap(), "const:3".parse().unwrap()],
            vec![4.0, 6.0],
            400,
        );
        cfg.master_seed = 11;
        let rep = run_clt_experiment(&cfg).unwrap();
        for si in 0..2 {
            let s = rep.summary(si, 0);
            assert!((s.var_over_volume - 1.0).abs() < 3.0 * s.var_over_volume_se, "{}", s.var_over_volume);
            let c = rep.summary(si, 1);
            assert!(c.degenerate);
            assert_eq!(c.ks, Some(KsOutcome::Degenerate));
            assert_eq!(rep.covariance[si].matrix[0][1], 0.0);
        }
        let z = &rep.summary(1, 0).standardized;
        assert!(stats::mean(z).abs() < 1e-12 && (stats::variance(z) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn experiments_are_deterministic() {
        let mut cfg = ExperimentConfig::new(geometric(1.0, 1.0), vec!["betti:0".parse().unwrap()], vec![3.0, 5.0], 30);
        cfg.master_seed = 3;
        let a = run_clt_experiment(&cfg).unwrap();
        let b = in_pool(Some(1), || run_clt_experiment(&cfg)).unwrap().unwrap();
        assert_eq!(a.summaries[1][0].values, b.summaries[1][0].values);
    }

    #[test]
    fn config_validation() {
        let cfg = ExperimentConfig::new(geometric(1.0, 1.0), vec![], vec![3.0], 10);
        assert!(run_clt_experiment(&cfg).is_err());
        let cfg = ExperimentConfig::new(geometric(1.0, 1.0), vec![FunctionalDescriptor::Euler], vec![5.0, 3.0], 10);
        assert!(run_clt_experiment(&cfg).is_err());
        let cfg = ExperimentConfig::new(geometric(1.0, 1.0), vec![FunctionalDescriptor::Euler], vec![3.0], 1);
        assert!(run_clt_experiment(&cfg).is_err());
    }

    #[test]
    fn duplicated_functional_gives_rank_one_covariance() {
        let f: FunctionalDescriptor = "f:1".parse().unwrap();
        let cfg = ExperimentConfig::new(geometric(1.0, 1.0), vec![f.clone(), f], vec![4.0, 5.0], 50);
        let rep = run_covariance_experiment(&cfg).unwrap();
        for c in &rep.per_side {
            assert_eq!(c.matrix[0][0], c.matrix[0][1]);
            assert!(c.psd);
            assert!(c.eigenvalues[0].abs() < 1e-9 * c.trace);
        }
    }

    #[test]
    fn poincare_vertex_count_and_constant() {
        let m = geometric(1.0, 1.0);
        let r = poincare_check(&m, &FunctionalDescriptor::Vertices, 4.0, 400, 50, 2).unwrap();
        assert_eq!(r.rhs, 16.0);
        assert_eq!(r.rhs_se, 0.0);
        assert!((r.lhs - r.rhs).abs() < 3.0 * r.combined_se, "{r:?}");
        let c = poincare_check(&m, &FunctionalDescriptor::Constant(2.0), 4.0, 20, 10, 2).unwrap();
        assert_eq!((c.lhs, c.rhs), (0.0, 0.0));
        assert!(c.pass);
    }

    #[test]
    fn stabilization_of_vertex_count_and_euler() {
        let m = geometric(1.0, 1.0);
        let r = stabilization_probe(&m, &FunctionalDescriptor::Vertices, &[4.0, 6.0, 8.0], 30, 1).unwrap();
        assert!(r.fractions.iter().all(|&f| f == 1.0));
        assert!(r.values.iter().flatten().all(|&v| v == 1.0));
        // Λχ depends only on the 1-neighbourhood of the origin
        let r = stabilization_probe(&m, &FunctionalDescriptor::Euler, &[4.0, 6.0], 30, 1).unwrap();
        assert_eq!(r.fractions, vec![1.0]);
    }

    #[test]
    fn degree_law_trivial_cases() {
        let zero = Model::new(2, 1.0, ConnectionKernel::constant(1, 0.0).unwrap(), MarkSampler::default()).unwrap();
        let r = degree_distribution_experiment(&zero, 50, 5.0, 1, 0.01).unwrap();
        assert!(r.degrees.iter().all(|&d| d == 0));
        assert!(r.pass);
        let empty = geometric(0.5, 0.0);
        let r = degree_distribution_experiment(&empty, 50, 5.0, 1, 0.01).unwrap();
        assert_eq!(r.histogram, vec![(0, 50)]);
        let small = degree_distribution_experiment(&geometric(1.0, 1.0), 10, 5.0, 1, 0.01).unwrap();
        assert_eq!(small.warnings.len(), 1);
    }

    #[test]
    fn model_spec_from_toml() {
        let spec: ModelSpec = toml::from_str(
            "dimension = 2\ngamma = 1.5\n[kernel]\nkind = \"geometric\"\nr = 1.0\n[marks]\nkind = \"constant\"\nvalue = 0.0\n",
        )
        .unwrap();
        let m = spec.build().unwrap();
        assert_eq!(m.kernel.alpha(), 2);
        assert_eq!(m.edge_range(), Some(1.0));
        assert!(toml::from_str::<ModelSpec>("dimension = 2\ngamma = 1\nbogus = 1\n[kernel]\nkind = \"geometric\"\nr = 1.0").is_err());
    }
}
