//! Command-line front end. Every subcommand reads the same TOML config,
//! validates it completely, and only then writes into `--out`.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::boolean::{build_nerve, configuration_from_grains, raster_betti_2d, PlacedGrain};
use crate::complex::{build_complex, SimplicialComplex};
use crate::config::{Config, ExperimentKind};
use crate::error::{io_err, Error, Result};
use crate::experiments::{
    degree_distribution_experiment, in_pool, poincare_check, run_clt_experiment, run_covariance_experiment,
    stabilization_probe, write_experiment_outputs, ExperimentConfig, Model,
};
use crate::functionals::{Functional, FunctionalDescriptor};
use crate::homology::betti_vector;
use crate::point_process::{sample_poisson, PointConfiguration, Window};
use crate::svg;

#[derive(Debug, Parser)]
#[command(name = "rcmplex", version, about = "Random connection model simplicial complexes")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// TOML file, or `preset:NAME` for a bundled one.
    #[arg(long, global = true, default_value = "preset:quickstart")]
    pub config: String,
    /// Override a config key, e.g. `--set model.gamma=2`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Also write SVG drawings.
    #[arg(long, global = true)]
    pub render: bool,
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Master seed; overrides `seed` in the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Sample a marked Poisson configuration.
    Sample,
    /// Build the complex of a sampled or given configuration.
    Build,
    /// Evaluate the configured functionals.
    Functional,
    /// Nerve of a union of grains and its Betti numbers.
    Nerve,
    /// Run the configured Monte-Carlo experiment.
    Experiment,
    /// Draw a configuration, complex or grain union as SVG.
    Render,
}

/// Files collected during a run, written only once everything succeeded.
#[derive(Default)]
struct Outputs {
    files: Vec<(PathBuf, String)>,
}

impl Outputs {
    fn add(&mut self, name: &str, body: String) {
        self.files.push((PathBuf::from(name), body));
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        self.add(name, serde_json::to_string_pretty(value)?);
        Ok(())
    }

    fn write(self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        for (name, body) in self.files {
            let p = dir.join(name);
            std::fs::write(&p, body).map_err(io_err(&p))?;
        }
        Ok(())
    }
}

struct Ctx {
    cfg: Config,
    global: GlobalArgs,
}

impl Ctx {
    fn seed(&self) -> u64 {
        self.global.seed.unwrap_or(self.cfg.seed)
    }

    fn threads(&self) -> Option<usize> {
        self.global.threads.or(self.cfg.threads)
    }

    fn model(&self) -> Result<Model> {
        self.cfg.model()?.build()
    }

    fn functionals(&self) -> Result<Vec<FunctionalDescriptor>> {
        if self.cfg.functionals.is_empty() {
            return Err(Error::Config("no functionals configured".into()));
        }
        self.cfg.functionals.iter().map(|f| FunctionalDescriptor::parse_in(f, &self.cfg.base_dir)).collect()
    }

    fn read(&self, p: &Path) -> Result<String> {
        let p = self.cfg.resolve(p);
        std::fs::read_to_string(&p).map_err(io_err(&p))
    }

    /// The configured input configuration, or a fresh sample.
    fn configuration(&self, model: Option<&Model>) -> Result<PointConfiguration> {
        if let Some(p) = &self.cfg.input.configuration {
            return PointConfiguration::from_json(&self.read(p)?);
        }
        let model = model.ok_or_else(|| Error::Config("missing [model] section".into()))?;
        let side = self
            .cfg
            .sample
            .side
            .ok_or_else(|| Error::Config("missing sample.side (or input.configuration)".into()))?;
        let window = match &self.cfg.sample.center {
            Some(c) if c.len() != model.dimension => {
                return Err(Error::Config(format!(
                    "sample.center has {} coordinates, model dimension is {}",
                    c.len(),
                    model.dimension
                )))
            }
            Some(c) => Window::new(c.clone(), side)?,
            None => model.window(side)?,
        };
        sample_poisson(&window, model.gamma, &model.marks, self.seed(), self.cfg.sample.replication)
    }

    fn optional_model(&self) -> Result<Option<Model>> {
        self.cfg.model.as_ref().map(|m| m.build()).transpose()
    }

    fn grains(&self) -> Result<Vec<PlacedGrain>> {
        let inline = self.cfg.nerve.as_ref().map(|n| n.grains.clone()).unwrap_or_default();
        let grains = match &self.cfg.input.grains {
            Some(p) if !inline.is_empty() => {
                return Err(Error::Config(format!(
                    "grains given both inline and in {}; use one",
                    p.display()
                )))
            }
            Some(p) => serde_json::from_str(&self.read(p)?)?,
            None => inline,
        };
        if grains.is_empty() {
            return Err(Error::Config("no grains: set [[nerve.grains]] or input.grains".into()));
        }
        Ok(grains)
    }
}

#[derive(Serialize)]
struct Evaluation {
    functional: String,
    value: f64,
}

#[derive(Serialize)]
struct NerveSummary {
    grains: usize,
    alpha: usize,
    helly: bool,
    f_vector: Vec<usize>,
    betti: Vec<usize>,
    raster: Option<RasterSummary>,
}

#[derive(Serialize)]
struct RasterSummary {
    resolution: usize,
    betti0: usize,
    betti1: usize,
}

fn print_betti(label: &str, b: &[usize]) {
    let parts: Vec<String> = b.iter().enumerate().map(|(p, v)| format!("b{p}={v}")).collect();
    println!("{label}: {}", parts.join(" "));
}

fn run_sample(ctx: &Ctx, out: &mut Outputs) -> Result<()> {
    let model = ctx.model()?;
    let config = ctx.configuration(Some(&model))?;
    println!("sampled {} points in a window of volume {}", config.len(), config.window.volume());
    out.add("configuration.json", config.to_json()?);
    if ctx.global.render {
        out.add("configuration.svg", svg::complex_svg(&config, &SimplicialComplex::empty(model.kernel.alpha()))?);
    }
    Ok(())
}

fn built(ctx: &Ctx) -> Result<(PointConfiguration, SimplicialComplex)> {
    let model = ctx.model()?;
    let config = ctx.configuration(Some(&model))?;
    let complex = build_complex(&config, &model.kernel)?;
    Ok((config, complex))
}

fn run_build(ctx: &Ctx, out: &mut Outputs) -> Result<()> {
    let (config, complex) = built(ctx)?;
    println!("f-vector: {:?}", complex.f_vector());
    if ctx.cfg.input.configuration.is_none() {
        out.add("configuration.json", config.to_json()?);
    }
    out.add("complex.json", complex.to_json()?);
    if ctx.global.render {
        out.add("complex.svg", svg::complex_svg(&config, &complex)?);
    }
    Ok(())
}

fn run_functional(ctx: &Ctx, out: &mut Outputs) -> Result<()> {
    let functionals = ctx.functionals()?;
    let (config, complex) = match &ctx.cfg.input.complex {
        Some(p) => (None, SimplicialComplex::from_json(&ctx.read(p)?)?),
        None => {
            let (c, k) = built(ctx)?;
            (Some(c), k)
        }
    };
    let mut rows = Vec::with_capacity(functionals.len());
    for f in &functionals {
        let value = f.evaluate(&complex)?;
        println!("{f} = {value}");
        rows.push(Evaluation { functional: f.to_string(), value });
    }
    out.json("functionals.json", &rows)?;
    if ctx.global.render {
        if let Some(c) = &config {
            out.add("complex.svg", svg::complex_svg(c, &complex)?);
        }
    }
    Ok(())
}

fn run_nerve(ctx: &Ctx, out: &mut Outputs) -> Result<()> {
    let section = ctx.cfg.nerve.clone().unwrap_or(crate::config::NerveSection {
        alpha: 3,
        helly: true,
        grains: Vec::new(),
        raster_resolution: None,
    });
    let grains = ctx.grains()?;
    let config = configuration_from_grains(&grains, ctx.seed())?;
    let nerve = build_nerve(&config, section.alpha, section.helly)?;
    let betti = betti_vector(&nerve, section.alpha)?;
    println!("{} grains, nerve f-vector {:?}", grains.len(), nerve.f_vector());
    print_betti("nerve Betti numbers", &betti);
    let raster = match section.raster_resolution {
        Some(res) => {
            let (b0, b1) = raster_betti_2d(&grains, res)?;
            print_betti(&format!("pixel Betti numbers at {res} per unit"), &[b0, b1]);
            Some(RasterSummary { resolution: res, betti0: b0, betti1: b1 })
        }
        None => None,
    };
    out.json(
        "nerve_summary.json",
        &NerveSummary {
            grains: grains.len(),
            alpha: section.alpha,
            helly: section.helly,
            f_vector: nerve.f_vector(),
            betti,
            raster,
        },
    )?;
    out.add("nerve.json", nerve.to_json()?);
    if ctx.global.render {
        out.add("nerve.svg", svg::nerve_svg(&grains, &nerve)?);
    }
    Ok(())
}

fn run_render(ctx: &Ctx, out: &mut Outputs) -> Result<()> {
    if ctx.cfg.input.grains.is_some() || ctx.cfg.nerve.as_ref().is_some_and(|n| !n.grains.is_empty()) {
        let grains = ctx.grains()?;
        let alpha = ctx.cfg.nerve.as_ref().map_or(3, |n| n.alpha);
        let helly = ctx.cfg.nerve.as_ref().is_none_or(|n| n.helly);
        let nerve = build_nerve(&configuration_from_grains(&grains, ctx.seed())?, alpha, helly)?;
        out.add("nerve.svg", svg::nerve_svg(&grains, &nerve)?);
        println!("rendered nerve of {} grains", grains.len());
        return Ok(());
    }
    let model = ctx.optional_model()?;
    let config = ctx.configuration(model.as_ref())?;
    let complex = match (&ctx.cfg.input.complex, &model) {
        (Some(p), _) => SimplicialComplex::from_json(&ctx.read(p)?)?,
        (None, Some(m)) => build_complex(&config, &m.kernel)?,
        (None, None) => {
            return Err(Error::Config("render needs input.complex or a [model] to build one".into()));
        }
    };
    out.add("complex.svg", svg::complex_svg(&config, &complex)?);
    println!("rendered complex with f-vector {:?}", complex.f_vector());
    Ok(())
}

fn run_experiment(ctx: &Ctx, out: &mut Outputs) -> Result<Option<PathBuf>> {
    let section = ctx.cfg.experiment()?.clone();
    let model = ctx.model()?;
    let seed = ctx.seed();
    let need_functional = || -> Result<FunctionalDescriptor> {
        let mut f = ctx.functionals()?;
        Ok(f.remove(0))
    };
    match section.kind {
        ExperimentKind::Clt => {
            let mut cfg = ExperimentConfig::new(model, ctx.functionals()?, section.sides, section.replications);
            cfg.master_seed = seed;
            cfg.significance = section.significance;
            cfg.tolerance = section.tolerance;
            cfg.validate()?;
            let report = run_clt_experiment(&cfg)?;
            for (fi, name) in report.functionals.iter().enumerate() {
                let s = report.last(fi);
                println!(
                    "{name}: side {} mean {:.4} var/|W| {:.4} ks_pass {:?}",
                    s.side, s.mean, s.var_over_volume, s.ks_pass
                );
            }
            for st in &report.stabilization {
                println!("{st:?}");
            }
            // Several files with fixed names; written by the library helper into a staging dir.
            let staging = ctx.global.out.join(".staging");
            write_experiment_outputs(&report, &staging)?;
            return Ok(Some(staging));
        }
        ExperimentKind::Covariance => {
            let mut cfg = ExperimentConfig::new(model, ctx.functionals()?, section.sides, section.replications);
            cfg.master_seed = seed;
            cfg.tolerance = section.tolerance;
            cfg.validate()?;
            let report = run_covariance_experiment(&cfg)?;
            println!(
                "max relative change {:?}, all PSD {}, stable {:?}",
                report.max_relative_change, report.all_psd, report.stable
            );
            out.json("covariance.json", &report)?;
        }
        ExperimentKind::Degree => {
            let side = *section.sides.last().ok_or_else(|| Error::Config("experiment.sides is empty".into()))?;
            let report =
                degree_distribution_experiment(&model, section.replications, side, seed, section.significance)?;
            let r = report.test.result();
            println!("chi-square {:.3} on {} dof, p = {:.4}, pass {}", r.statistic, r.dof, r.p_value, report.pass);
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            out.json("degree.json", &report)?;
        }
        ExperimentKind::Poincare => {
            let side = *section.sides.last().ok_or_else(|| Error::Config("experiment.sides is empty".into()))?;
            let f = need_functional()?;
            let inner = section.inner_replications.unwrap_or(section.replications);
            let report = poincare_check(&model, &f, side, section.replications, inner, seed)?;
            println!(
                "{}: Var {:.4} <= {:.4} (margin {:.4}), pass {}",
                report.functional, report.lhs, report.rhs, report.margin, report.pass
            );
            out.json("poincare.json", &report)?;
        }
        ExperimentKind::Stabilization => {
            let mut reports = Vec::new();
            for f in ctx.functionals()? {
                let report = stabilization_probe(&model, &f, &section.sides, section.replications, seed)?;
                println!("{}: agreement fractions {:?}", report.functional, report.fractions);
                reports.push(report);
            }
            out.json("stabilization.json", &reports)?;
        }
    }
    Ok(None)
}

/// Runs one parsed invocation.
pub fn run(cli: Cli) -> Result<()> {
    let cfg = Config::load(&cli.global.config, &cli.global.set)?;
    let ctx = Ctx { cfg, global: cli.global };
    let mut out = Outputs::default();
    let command = cli.command;
    let staged = in_pool(ctx.threads(), || -> Result<Option<PathBuf>> {
        match command {
            Command::Sample => run_sample(&ctx, &mut out).map(|_| None),
            Command::Build => run_build(&ctx, &mut out).map(|_| None),
            Command::Functional => run_functional(&ctx, &mut out).map(|_| None),
            Command::Nerve => run_nerve(&ctx, &mut out).map(|_| None),
            Command::Render => run_render(&ctx, &mut out).map(|_| None),
            Command::Experiment => run_experiment(&ctx, &mut out),
        }
    })??;
    let dir = &ctx.global.out;
    if let Some(staging) = staged {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        for entry in std::fs::read_dir(&staging).map_err(io_err(&staging))? {
            let entry = entry.map_err(io_err(&staging))?;
            let target = dir.join(entry.file_name());
            std::fs::rename(entry.path(), &target).map_err(io_err(&target))?;
        }
        std::fs::remove_dir(&staging).map_err(io_err(&staging))?;
    }
    out.write(dir)?;
    println!("outputs in {}", dir.display());
    Ok(())
}

/// Entry point for the binary: parses `std::env::args` and reports errors on stderr.
pub fn main() -> std::process::ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            std::process::ExitCode::FAILURE
        }
    }
}
