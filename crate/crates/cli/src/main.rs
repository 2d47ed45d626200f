//! `perspec` command-line interface.

mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use perspec::bands::{self, BrillouinGrid, SpectrumResult};
use perspec::constructions::CHECKERBOARD_TOL;
use perspec::{ErrorClass, RandomGenerator, StageGenerator, ZeroGenerator};
use serde::Serialize;
use serde_json::json;

use config::{ConfigError, GeneratorKind, JobConfig, Num, PotentialSpec};
use output::{num, sibling, Envelope, Plot, Table, Tolerances};

#[derive(Parser)]
#[command(name = "perspec", version, about = "Spectra of periodic lattice Schrödinger operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: Global,
}

#[derive(Args)]
struct Global {
    /// TOML job configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the JSON summary here instead of stdout; CSV tables go next to it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Also write an SVG plot.
    #[arg(long, global = true)]
    plot: bool,
    /// Brillouin grid nodes per direction.
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Pattern-search iterations for the band extrema.
    #[arg(long, global = true)]
    refine: Option<usize>,
    /// Seed for random potentials and random stage generators.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Band functions on the Brillouin grid.
    Bands,
    /// Band intervals, merged spectrum and gaps.
    Spectrum,
    /// Integrated density of states.
    Ids,
    /// Smoothed spectral measure of a finitely supported vector.
    Measure,
    /// Numerical evidence that the degenerate set is finite (d = 2).
    Certify,
    /// Limit-periodic iteration starting from the configured 2D period.
    ConstructLp,
    /// Spectrum of a built-in potential; needs no config.
    Example(ExampleArgs),
}

#[derive(Args)]
struct ExampleArgs {
    kind: ExampleKind,
    /// Period, comma separated.
    #[arg(long, value_delimiter = ',')]
    period: Option<Vec<i64>>,
    /// Checkerboard amplitude.
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
    /// Checkerboard dimension.
    #[arg(long, default_value_t = 2)]
    dimension: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExampleKind {
    Staircase,
    Checkerboard,
    Free,
}

enum Failure {
    Config(ConfigError),
    Core(perspec::Error),
    Io { path: PathBuf, err: std::io::Error },
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

impl From<perspec::Error> for Failure {
    fn from(e: perspec::Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) | Failure::Io { .. } => 2,
            Failure::Core(e) => match e.class() {
                ErrorClass::Validation => 2,
                ErrorClass::Assertion => 3,
                ErrorClass::Numerical => 4,
            },
        }
    }

    fn report(&self) -> serde_json::Value {
        let (kind, message, field) = match self {
            Failure::Config(e) => ("ConfigError", e.message.clone(), Some(e.field.clone())),
            Failure::Core(e) => (e.kind(), e.to_string(), None),
            Failure::Io { path, err } => ("IoError", err.to_string(), Some(path.display().to_string())),
        };
        json!({ "error": { "kind": kind, "message": message, "field": field } })
    }
}

type Outcome = Result<(), Failure>;

/// Everything a command produces before it is written out.
struct Product<R: Serialize> {
    tolerances: Tolerances,
    result: R,
    tables: Vec<Table>,
    plot: Plot,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.global.threads {
        if t == 0 {
            return fail(Failure::Config(ConfigError::new("--threads", "must be >= 1")));
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            return fail(Failure::Config(ConfigError::new("--threads", e.to_string())));
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => fail(f),
    }
}

fn fail(f: Failure) -> ExitCode {
    eprintln!("{}", f.report());
    ExitCode::from(f.exit_code())
}

fn load(g: &Global) -> Result<JobConfig, Failure> {
    let path = g.config.as_ref().ok_or_else(|| ConfigError::new("--config", "this command needs a config file"))?;
    let text = std::fs::read_to_string(path).map_err(|err| Failure::Io { path: path.clone(), err })?;
    let mut cfg = JobConfig::parse(&text)?;
    cfg.apply_overrides(g.grid, g.refine, g.seed);
    cfg.check_resolution()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Outcome {
    let g = &cli.global;
    match &cli.command {
        Command::Example(args) => {
            let cfg = example_config(args, g)?;
            let product = spectrum_cmd(&cfg)?;
            if let ExampleKind::Checkerboard = args.kind {
                check_checkerboard(&product.result, args.delta)?;
            }
            emit(g, "example", &cfg, product)
        }
        cmd => {
            let cfg = load(g)?;
            match cmd {
                Command::Bands => emit(g, "bands", &cfg, bands_cmd(&cfg)?),
                Command::Spectrum => emit(g, "spectrum", &cfg, spectrum_cmd(&cfg)?),
                Command::Ids => emit(g, "ids", &cfg, ids_cmd(&cfg)?),
                Command::Measure => emit(g, "measure", &cfg, measure_cmd(&cfg)?),
                Command::Certify => emit(g, "certify", &cfg, certify_cmd(&cfg)?),
                Command::ConstructLp => emit(g, "construct-lp", &cfg, lp_cmd(&cfg)?),
                Command::Example(_) => unreachable!(),
            }
        }
    }
}

fn example_config(args: &ExampleArgs, g: &Global) -> Result<JobConfig, Failure> {
    let (period, potential) = match args.kind {
        ExampleKind::Staircase => (args.period.clone().unwrap_or(vec![2, 2]), PotentialSpec::Staircase {}),
        ExampleKind::Free => (args.period.clone().unwrap_or(vec![2, 3]), PotentialSpec::Zero {}),
        ExampleKind::Checkerboard => {
            if args.period.is_some() {
                return Err(ConfigError::new("--period", "checkerboard period is fixed to 2 in every direction").into());
            }
            if args.dimension == 0 {
                return Err(ConfigError::new("--dimension", "must be >= 1").into());
            }
            (vec![2; args.dimension], PotentialSpec::Checkerboard { delta: Num(args.delta) })
        }
    };
    let mut cfg = JobConfig::new(period, potential);
    cfg.apply_overrides(g.grid, g.refine, g.seed);
    cfg.check_resolution()?;
    Ok(cfg)
}

fn check_checkerboard(sr: &SpectrumResult, delta: f64) -> Outcome {
    for b in &sr.bands {
        if b.upper > -delta + CHECKERBOARD_TOL && b.lower < delta - CHECKERBOARD_TOL {
            return Err(perspec::Error::GapViolation { lower: -delta, upper: delta }.into());
        }
    }
    Ok(())
}

fn emit<R: Serialize>(g: &Global, command: &str, cfg: &JobConfig, p: Product<R>) -> Outcome {
    let envelope = Envelope { tool: output::TOOL, version: output::VERSION, command, config: cfg, tolerances: p.tolerances, result: p.result };
    let mut text = serde_json::to_string_pretty(&envelope).expect("JSON serialization");
    text.push('\n');
    match &g.out {
        Some(path) => {
            output::write_text(path, &text).map_err(|e| io_failure(path, e))?;
            for t in &p.tables {
                let csv = sibling(path, &format!("{}.csv", t.name));
                output::write_csv(&csv, t).map_err(|e| io_failure(&csv, e))?;
            }
        }
        None => print!("{text}"),
    }
    if g.plot {
        let svg = match &g.out {
            Some(path) => sibling(path, "svg"),
            None => PathBuf::from(format!("perspec-{command}.svg")),
        };
        output::write_text(&svg, &output::render(&p.plot)).map_err(|e| io_failure(&svg, e))?;
    }
    Ok(())
}

fn io_failure(path: &Path, err: std::io::Error) -> Failure {
    Failure::Io { path: path.to_path_buf(), err }
}

fn spectrum_tolerances(sr: &SpectrumResult) -> Tolerances {
    Tolerances { extrema_tolerance: Some(sr.extrema_tolerance), ..Tolerances::base() }
}

fn bands_cmd(cfg: &JobConfig) -> Result<Product<serde_json::Value>, Failure> {
    let v = cfg.potential()?;
    let grid = BrillouinGrid::new(v.period().clone(), cfg.grid)?;
    let bs = perspec::compute_bands(&v, &grid)?;
    let d = v.dim();
    let mut header: Vec<String> = (1..=d).map(|j| format!("theta_{j}")).collect();
    header.extend((0..bs.band_count()).map(|j| format!("E_{j}")));
    let mut table = Table { name: "bands", header, rows: Vec::new() };
    for row in bs.rows() {
        table.push(row.into_iter().map(num));
    }
    let extrema: Vec<_> = (0..bs.band_count())
        .map(|j| {
            let (lo, ilo, hi, ihi) = bs.sampled_extrema(j);
            json!({ "band": j, "min": lo, "argmin_theta": grid.theta(ilo), "max": hi, "argmax_theta": grid.theta(ihi) })
        })
        .collect();
    let series = (0..bs.band_count())
        .map(|j| bs.sheets.iter().enumerate().map(|(i, s)| (i as f64, s[j])).collect())
        .collect();
    let tolerances = Tolerances {
        extrema_tolerance: Some(bands::extrema_tolerance(v.period(), cfg.grid, 0)),
        ..Tolerances::base()
    };
    Ok(Product {
        tolerances,
        result: json!({ "band_count": bs.band_count(), "nodes": grid.len(), "sampled_extrema": extrema }),
        tables: vec![table],
        plot: Plot::Lines {
            title: "band functions".into(),
            xlabel: "grid node (last index fastest)".into(),
            ylabel: "E".into(),
            series,
        },
    })
}

fn spectrum_cmd(cfg: &JobConfig) -> Result<Product<SpectrumResult>, Failure> {
    let v = cfg.potential()?;
    let sr = bands::spectrum(&v, cfg.grid, cfg.refine)?;
    let mut bands_t = Table::new("spectrum", &["kind", "index", "lower", "upper"]);
    for (kind, list) in [("band", &sr.bands), ("gap", &sr.gaps), ("unresolved", &sr.unresolved)] {
        for (i, b) in list.iter().enumerate() {
            bands_t.push([kind.to_string(), i.to_string(), num(b.lower), num(b.upper)]);
        }
    }
    Ok(Product {
        tolerances: spectrum_tolerances(&sr),
        plot: Plot::Bars { title: "bands".into(), xlabel: "E".into(), bars: sr.bands.iter().map(|b| (b.lower, b.upper)).collect() },
        tables: vec![bands_t],
        result: sr,
    })
}

fn ids_cmd(cfg: &JobConfig) -> Result<Product<serde_json::Value>, Failure> {
    let v = cfg.potential()?;
    let sec = cfg.ids_section()?;
    let energies = sec.energies.values("ids.energies")?;
    if sec.theta_n == 0 {
        return Err(ConfigError::new("ids.theta_n", "must be >= 1").into());
    }
    let curve = perspec::ids(&v, &energies, sec.theta_n)?;
    let mut finite = Vec::new();
    for (i, &ell) in sec.box_sizes.iter().enumerate() {
        if ell == 0 {
            return Err(ConfigError::new(format!("ids.box_sizes[{i}]"), "must be >= 1").into());
        }
        let k: Vec<f64> = energies.iter().map(|&e| perspec::ids_finite_volume(&v, ell, e)).collect::<Result<_, _>>()?;
        finite.push((ell, k));
    }
    let mut header = vec!["energy".to_string(), "k".to_string()];
    header.extend(finite.iter().map(|(l, _)| format!("k_box_{l}")));
    let mut table = Table { name: "ids", header, rows: Vec::new() };
    for (i, &e) in energies.iter().enumerate() {
        let mut row = vec![num(e), num(curve.k[i])];
        row.extend(finite.iter().map(|(_, k)| num(k[i])));
        table.push(row);
    }
    let mut series = vec![energies.iter().copied().zip(curve.k.iter().copied()).collect::<Vec<_>>()];
    series.extend(finite.iter().map(|(_, k)| energies.iter().copied().zip(k.iter().copied()).collect()));
    let fv: Vec<_> = finite.iter().map(|(l, k)| json!({ "ell": l, "k": k })).collect();
    Ok(Product {
        tolerances: Tolerances::base(),
        result: json!({ "curve": curve, "finite_volume": fv }),
        tables: vec![table],
        plot: Plot::Lines { title: "integrated density of states".into(), xlabel: "E".into(), ylabel: "k(E)".into(), series },
    })
}

fn measure_cmd(cfg: &JobConfig) -> Result<Product<serde_json::Value>, Failure> {
    let v = cfg.potential()?;
    let sec = cfg.measure_section()?;
    let energies = sec.energies.values("measure.energies")?;
    let u = sec.source_vector(v.dim())?;
    if sec.theta_n == 0 {
        return Err(ConfigError::new("measure.theta_n", "must be >= 1").into());
    }
    let m = perspec::spectral_density(&v, &u, &energies, sec.eps.0, sec.theta_n)?;
    let ratio = if sec.check_ratio {
        Some(perspec::density_ratio_bound(&v, &u, &energies, sec.eps.0, sec.theta_n)?)
    } else {
        None
    };
    let mut table = Table::new("measure", &["energy", "density"]);
    for (e, d) in m.energies.iter().zip(&m.density) {
        table.push([num(*e), num(*d)]);
    }
    let series = vec![m.energies.iter().copied().zip(m.density.iter().copied()).collect()];
    let tolerances = Tolerances {
        eps: Some(sec.eps.0),
        ratio_slack: ratio.as_ref().map(|_| perspec::dos::RATIO_SLACK),
        ..Tolerances::base()
    };
    Ok(Product {
        tolerances,
        result: json!({ "measure": m, "norm_sqr": u.norm_sqr(), "density_ratio": ratio }),
        tables: vec![table],
        plot: Plot::Lines { title: "spectral density".into(), xlabel: "E".into(), ylabel: "density".into(), series },
    })
}

fn certify_cmd(cfg: &JobConfig) -> Result<Product<perspec::CertificateReport>, Failure> {
    let v = cfg.potential()?;
    let sec = cfg.certify_section()?;
    if v.dim() != 2 {
        return Err(ConfigError::new("period", "certification needs a 2D period").into());
    }
    if sec.samples == 0 {
        return Err(ConfigError::new("certify.samples", "must be >= 1").into());
    }
    let r = perspec::certify_simplicity(&v, sec.energy.0, sec.samples)?;
    let mut table = Table::new("certify", &["variable", "radius", "re", "im", "log10_abs", "log10_scale", "relative_log10"]);
    for (var, list) in [("f", &r.f_samples), ("g", &r.g_samples)] {
        for s in list {
            table.push([
                var.to_string(),
                num(s.radius),
                num(s.point[0]),
                num(s.point[1]),
                num(s.log10_abs),
                num(s.log10_scale),
                num(s.relative_log10),
            ]);
        }
    }
    let series = [&r.f_samples, &r.g_samples]
        .iter()
        .map(|l| l.iter().enumerate().map(|(i, s)| (i as f64, s.relative_log10)).collect())
        .collect();
    let tolerances = Tolerances {
        threshold_log10: Some(r.threshold_log10),
        scan_tol: Some(perspec::certify::SCAN_TOL),
        ..Tolerances::base()
    };
    Ok(Product {
        tolerances,
        result: r,
        tables: vec![table],
        plot: Plot::Lines {
            title: "scale-relative resultants (f, g)".into(),
            xlabel: "sample".into(),
            ylabel: "log10 |R| / scale".into(),
            series,
        },
    })
}

fn lp_cmd(cfg: &JobConfig) -> Result<Product<perspec::LimitPeriodicPlan>, Failure> {
    let p = cfg.period_vector()?;
    if p.dim() != 2 {
        return Err(ConfigError::new("period", "the limit-periodic plan needs a 2D period").into());
    }
    if !matches!(cfg.potential, PotentialSpec::Zero {}) {
        return Err(ConfigError::new("potential", "construct-lp generates its own potentials; use kind = \"zero\"").into());
    }
    let sec = cfg.lp_section()?;
    if sec.stages == 0 {
        return Err(ConfigError::new("lp.stages", "must be >= 1").into());
    }
    let mut generator: Box<dyn StageGenerator> = match sec.generator {
        GeneratorKind::Zero => Box::new(ZeroGenerator),
        GeneratorKind::Random => {
            let seed = sec.seed.ok_or_else(|| ConfigError::new("lp.seed", "the random generator needs a seed"))?;
            if !(sec.fraction.0 > 0.0 && sec.fraction.0 <= 1.0) {
                return Err(ConfigError::new("lp.fraction", "must lie in (0, 1]").into());
            }
            Box::new(RandomGenerator { seed, fraction: sec.fraction.0 })
        }
    };
    let plan = perspec::lp_builder(p.dims()[0], p.dims()[1], sec.stages, generator.as_mut(), cfg.grid, cfg.refine)?;
    let mut table = Table::new(
        "stages",
        &["stage", "period_1", "period_2", "margin_before", "budget", "potential_norm", "clipped", "margin_after", "verify_margin", "interval"],
    );
    for s in &plan.stages {
        table.push([
            s.stage.to_string(),
            s.period[0].to_string(),
            s.period[1].to_string(),
            num(s.margin_before),
            num(s.budget),
            num(s.potential_norm),
            s.clipped.to_string(),
            num(s.margin_after),
            num(s.verify_margin),
            (s.interval && s.verify_interval).to_string(),
        ]);
    }
    let series = vec![
        plan.stages.iter().map(|s| (s.stage as f64, s.margin_after)).collect(),
        plan.stages.iter().map(|s| (s.stage as f64, s.budget)).collect(),
    ];
    let tolerances = Tolerances {
        extrema_tolerance: plan.stages.last().map(|s| s.extrema_tolerance),
        ..Tolerances::base()
    };
    Ok(Product {
        tolerances,
        result: plan,
        tables: vec![table],
        plot: Plot::Lines { title: "overlap margin and budget per stage".into(), xlabel: "stage".into(), ylabel: "value".into(), series },
    })
}
