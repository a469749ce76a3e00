//! Command-line front end: solve, validate, converge, polygon-limit, render, scars.

mod config;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use billiard_fem::analysis::{self, dedup_indices, write_atomic};
use billiard_fem::eigensolve::SolverOpts;
use billiard_fem::field::{self, GridSpec, Metric, RenderMode, ScarConfig, DEFAULT_STRIP_WIDTH};
use billiard_fem::geometry::{Region, RegionSpec};
use billiard_fem::mesh::MeshParams;
use billiard_fem::pipeline::{run_pipeline, Solution, StageError};

use config::{ConfigFile, IndexList, Resolution};

const DEFAULT_H: f64 = 1e-3;
const DEFAULT_STATES: usize = 16;
const DEFAULT_SIDES: &[usize] = &[5, 8, 16, 32, 64, 96];

#[derive(Parser, Debug)]
#[command(name = "billiard", version, about = "Finite-element spectra of 2D Dirichlet billiards")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Lowest eigenvalues to eigs.csv (n,k,E).
    Solve {
        #[command(flatten)]
        common: Common,
    },
    /// Compare against the closed-form spectrum (circle, equilateral triangle, rectangle).
    Validate {
        #[command(flatten)]
        common: Common,
    },
    /// Refinement error between h and h/2 for the given indices.
    Converge {
        #[command(flatten)]
        common: Common,
        /// Indices such as `1-16` or `100,200,300`.
        #[arg(long)]
        indices: Option<IndexList>,
    },
    /// Ground state of inscribed regular n-gons against the disk.
    PolygonLimit {
        #[command(flatten)]
        common: Common,
        /// Comma-separated side counts.
        #[arg(long, value_delimiter = ',')]
        sides: Option<Vec<usize>>,
        /// Circumradius.
        #[arg(long)]
        radius: Option<f64>,
    },
    /// Rasterize states to state_<n>.pgm.
    Render {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        raster: Raster,
        #[arg(long)]
        indices: Option<IndexList>,
    },
    /// Rank states by a localization metric; writes scars.csv and the top K rasters.
    Scars {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        raster: Raster,
        /// State range, e.g. `1-150`.
        #[arg(long)]
        indices: Option<IndexList>,
        #[arg(long)]
        metric: Option<Metric>,
        #[arg(long)]
        top: Option<usize>,
        /// Strip width as a fraction of the bounding box.
        #[arg(long)]
        strip_width: Option<f64>,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// Region spec, e.g. `stadium r=1 a=1`, `circle r=1`, `ngon sides=8`.
    #[arg(long)]
    region: Option<String>,
    /// Maximum triangle area.
    #[arg(long)]
    h: Option<f64>,
    /// Maximum boundary sagitta [default: sqrt(h)/10].
    #[arg(long)]
    chord_tol: Option<f64>,
    /// Element order, 1 or 2.
    #[arg(long)]
    order: Option<u8>,
    /// Number of eigenpairs.
    #[arg(long)]
    states: Option<usize>,
    /// Relative residual tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// `key = value` file with the same keys as the long flags; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct Raster {
    /// Raster size WxH.
    #[arg(long)]
    resolution: Option<Resolution>,
    #[arg(long)]
    mode: Option<RenderMode>,
}

enum CliError {
    Usage(String),
    Run(String),
}

impl From<StageError> for CliError {
    fn from(e: StageError) -> Self {
        CliError::Run(e.to_string())
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |e| CliError::Run(format!("cannot write {}: {e}", path.display()))
}

/// Effective settings after merging flags, config file and defaults.
struct Settings {
    command: &'static str,
    region: Region,
    params: MeshParams,
    order: u8,
    states: Option<usize>,
    tol: f64,
    out: PathBuf,
    extra: Vec<(&'static str, String)>,
}

impl Settings {
    fn resolve(command: &'static str, c: &Common, file: &ConfigFile, default_region: &str) -> Result<Self, CliError> {
        let region_text = file.pick(c.region.clone(), "region").map_err(usage)?;
        let spec: RegionSpec =
            region_text.as_deref().unwrap_or(default_region).parse().map_err(|e| usage(format!("{e}")))?;
        let region = Region::new(spec).map_err(|e| usage(e.to_string()))?;
        let h = file.pick(c.h, "h").map_err(usage)?.unwrap_or(DEFAULT_H);
        if !(h > 0.0 && h.is_finite()) {
            return Err(usage(format!("--h must be positive, got {h}")));
        }
        let mut params = MeshParams::new(h);
        if let Some(t) = file.pick(c.chord_tol, "chord-tol").map_err(usage)? {
            params = params.with_chord_tolerance(t);
        }
        params.validate().map_err(|e| usage(e.to_string()))?;
        let order = file.pick(c.order, "order").map_err(usage)?.unwrap_or(2);
        if !(order == 1 || order == 2) {
            return Err(usage(format!("--order must be 1 or 2, got {order}")));
        }
        let states = file.pick(c.states, "states").map_err(usage)?;
        if states == Some(0) {
            return Err(usage("--states must be at least 1"));
        }
        let tol = file.pick(c.tol, "tol").map_err(usage)?.unwrap_or(SolverOpts::default().rel_residual_tol);
        let out = file.pick(c.out.clone(), "out").map_err(usage)?.unwrap_or_else(|| PathBuf::from("."));
        Ok(Self { command, region, params, order, states, tol, out, extra: Vec::new() })
    }

    fn opts(&self, states: usize) -> Result<SolverOpts, CliError> {
        let o = SolverOpts { rel_residual_tol: self.tol, ..SolverOpts::new(states) };
        o.validate().map_err(|e| usage(e.to_string()))?;
        Ok(o)
    }

    fn prepare_out(&self) -> Result<(), CliError> {
        std::fs::create_dir_all(&self.out).map_err(io_err(&self.out))
    }

    fn write(&self, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let p = self.out.join(name);
        write_atomic(&p, bytes).map_err(io_err(&p))?;
        Ok(p)
    }

    fn meta(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "command = {}", self.command);
        let _ = writeln!(s, "version = {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(s, "region = {}", self.region.spec());
        let _ = writeln!(s, "h = {}", self.params.max_cell_measure);
        let _ = writeln!(s, "chord-tol = {}", self.params.chord_tolerance);
        let _ = writeln!(s, "order = {}", self.order);
        if let Some(n) = self.states {
            let _ = writeln!(s, "states = {n}");
        }
        let _ = writeln!(s, "tol = {}", self.tol);
        let _ = writeln!(s, "out = {}", self.out.display());
        for (k, v) in &self.extra {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }

    fn run(&self, states: usize) -> Result<Solution, CliError> {
        let opts = self.opts(states)?;
        log::info!("solving {} for {states} states at h = {}", self.region.spec(), self.params.max_cell_measure);
        Ok(run_pipeline(&self.region, self.params, self.order, &opts)?)
    }
}

fn load_config(c: &Common) -> Result<ConfigFile, CliError> {
    match &c.config {
        Some(p) => ConfigFile::load(p).map_err(usage),
        None => Ok(ConfigFile::default()),
    }
}

fn unique(list: IndexList) -> Vec<usize> {
    let (v, dropped) = dedup_indices(&list.0);
    if dropped {
        log::warn!("duplicate indices removed");
    }
    v
}

fn raster_settings(r: &Raster, file: &ConfigFile, default_mode: RenderMode) -> Result<(Resolution, RenderMode), CliError> {
    let res = file.pick(r.resolution, "resolution").map_err(usage)?.unwrap_or(Resolution {
        width: field::DEFAULT_RESOLUTION,
        height: field::DEFAULT_RESOLUTION,
    });
    let mode = file.pick(r.mode, "mode").map_err(usage)?.unwrap_or(default_mode);
    Ok((res, mode))
}

fn render_states(
    s: &Settings,
    sol: &Solution,
    indices: &[usize],
    res: Resolution,
    mode: RenderMode,
) -> Result<usize, CliError> {
    let grid = GridSpec::covering(&sol.disc, res.width, res.height).map_err(|e| usage(e.to_string()))?;
    let locator = field::PointLocator::new(&sol.disc);
    let mut gap = 0;
    for &n in indices {
        let pair = sol.spectrum.pairs.get(n - 1).ok_or_else(|| {
            CliError::Run(format!("state {n} is beyond the {} computed states", sol.spectrum.len()))
        })?;
        let f = field::evaluate_with(&sol.disc, &locator, &pair.coeffs, &grid).map_err(|e| CliError::Run(e.to_string()))?;
        gap = f.unlocated;
        s.write(&format!("state_{n}.pgm"), &field::render_pgm(&f, mode))?;
    }
    if gap > 0 {
        log::info!("{gap} raster points between the boundary and the meshed polygon were masked");
    }
    Ok(gap)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Solve { common } => {
            let file = load_config(&common)?;
            let mut s = Settings::resolve("solve", &common, &file, "stadium")?;
            let states = s.states.unwrap_or(DEFAULT_STATES);
            s.states = Some(states);
            s.prepare_out()?;
            let sol = s.run(states)?;
            s.write("eigs.csv", analysis::eigenvalues_csv(&sol.spectrum).as_bytes())?;
            s.write("run.meta", s.meta().as_bytes())?;
            println!("n_dof = {}, k_1 = {}", sol.disc.n_dof(), sol.spectrum.pairs[0].k);
        }
        Command::Validate { common } => {
            let file = load_config(&common)?;
            let mut s = Settings::resolve("validate", &common, &file, "circle r=1")?;
            let states = s.states.unwrap_or(DEFAULT_STATES);
            s.states = Some(states);
            let exact = analysis::exact_spectrum(&s.region, states).map_err(|e| CliError::Run(e.to_string()))?;
            s.prepare_out()?;
            let sol = s.run(states)?;
            let rows = analysis::validate_against_oracle(&exact, &sol.spectrum).map_err(|e| CliError::Run(e.to_string()))?;
            s.write("validation.csv", analysis::validation_csv(&rows).as_bytes())?;
            s.write("run.meta", s.meta().as_bytes())?;
            let worst = rows.iter().map(|r| r.delta_pct).fold(0.0, f64::max);
            println!("{} levels, max delta = {worst:.6}%", rows.len());
        }
        Command::Converge { common, indices } => {
            let file = load_config(&common)?;
            let mut s = Settings::resolve("converge", &common, &file, "stadium")?;
            let list = file.pick(indices, "indices").map_err(usage)?.unwrap_or(IndexList((1..=16).collect()));
            let idx = unique(list);
            let states = s.states.unwrap_or(0).max(*idx.last().unwrap());
            s.states = Some(states);
            s.extra.push(("indices", IndexList(idx.clone()).to_string()));
            s.prepare_out()?;
            let opts = s.opts(states)?;
            let rows = analysis::convergence_study(&s.region, s.params, s.order, &idx, &opts)?;
            s.write("refinement.csv", analysis::refinement_csv(&rows).as_bytes())?;
            s.write("run.meta", s.meta().as_bytes())?;
            let worst = rows.iter().map(|r| r.epsilon).fold(0.0, f64::max);
            println!("{} rows, max epsilon = {worst:e}", rows.len());
        }
        Command::PolygonLimit { common, sides, radius } => {
            let file = load_config(&common)?;
            let mut s = Settings::resolve("polygon-limit", &common, &file, "circle r=1")?;
            let sides = match sides {
                Some(v) => v,
                None => match file.pick::<String>(None, "sides").map_err(usage)? {
                    Some(t) => t
                        .split(',')
                        .map(|x| x.trim().parse::<usize>().map_err(|_| usage(format!("bad side count `{x}`"))))
                        .collect::<Result<_, _>>()?,
                    None => DEFAULT_SIDES.to_vec(),
                },
            };
            if sides.is_empty() || sides.iter().any(|&n| n < 3) {
                return Err(usage("every --sides value must be at least 3"));
            }
            let radius = file.pick(radius, "radius").map_err(usage)?.unwrap_or(1.0);
            if !(radius > 0.0 && radius.is_finite()) {
                return Err(usage(format!("--radius must be positive, got {radius}")));
            }
            s.states = Some(1);
            s.extra.push(("sides", sides.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")));
            s.extra.push(("radius", radius.to_string()));
            s.prepare_out()?;
            let rows = analysis::polygon_limit_study(&sides, radius, s.params, s.order, &s.opts(1)?)?;
            s.write("polygon_limit.csv", analysis::polygon_limit_csv(&rows).as_bytes())?;
            s.write("run.meta", s.meta().as_bytes())?;
            println!("{} polygons", rows.len());
        }
        Command::Render { common, raster, indices } => {
            let file = load_config(&common)?;
            let mut s = Settings::resolve("render", &common, &file, "stadium")?;
            let idx = unique(file.pick(indices, "indices").map_err(usage)?.unwrap_or(IndexList(vec![1])));
            let (res, mode) = raster_settings(&raster, &file, RenderMode::Density)?;
            let states = s.states.unwrap_or(*idx.last().unwrap());
            s.states = Some(states);
            s.extra.push(("indices", IndexList(idx.clone()).to_string()));
            s.extra.push(("resolution", res.to_string()));
            s.extra.push(("mode", mode.to_string()));
            if let Some(&n) = idx.iter().find(|&&n| n > states) {
                return Err(CliError::Run(format!("state {n} is beyond the {states} computed states")));
            }
            s.prepare_out()?;
            let sol = s.run(states)?;
            let gap = render_states(&s, &sol, &idx, res, mode)?;
            s.write("run.meta", s.meta().as_bytes())?;
            println!("{} images, {gap} boundary-gap pixels masked per image", idx.len());
        }
        Command::Scars { common, raster, indices, metric, top, strip_width } => {
            let file = load_config(&common)?;
            let mut s = Settings::resolve("scars", &common, &file, "stadium")?;
            let idx = unique(file.pick(indices, "indices").map_err(usage)?.unwrap_or(IndexList((1..=150).collect())));
            let (first, last) = (idx[0], *idx.last().unwrap());
            if idx.len() != last - first + 1 {
                return Err(usage("--indices must be a contiguous range for scars"));
            }
            let metric = file.pick(metric, "metric").map_err(usage)?.unwrap_or(Metric::VStrip);
            let top = file.pick(top, "top").map_err(usage)?.unwrap_or(10);
            let width = file.pick(strip_width, "strip-width").map_err(usage)?.unwrap_or(DEFAULT_STRIP_WIDTH);
            if !(width > 0.0 && width <= 1.0) {
                return Err(usage(format!("--strip-width must lie in (0, 1], got {width}")));
            }
            let (res, mode) = raster_settings(&raster, &file, RenderMode::Density)?;
            let states = s.states.unwrap_or(last).max(last);
            s.states = Some(states);
            s.extra.push(("indices", format!("{first}-{last}")));
            s.extra.push(("metric", metric.to_string()));
            s.extra.push(("top", top.to_string()));
            s.extra.push(("strip-width", width.to_string()));
            s.extra.push(("resolution", res.to_string()));
            s.extra.push(("mode", mode.to_string()));
            s.prepare_out()?;
            let sol = s.run(states)?;
            let cfg = ScarConfig { metric, strip_width: width, ..ScarConfig::default() };
            let reports = field::rank_scar_candidates(&sol.disc, &sol.spectrum, first, last, &cfg)
                .map_err(|e| CliError::Run(e.to_string()))?;
            s.write("scars.csv", analysis::scars_csv(&reports).as_bytes())?;
            let best: Vec<usize> = reports.iter().take(top).map(|r| r.n).collect();
            render_states(&s, &sol, &best, res, mode)?;
            s.write("run.meta", s.meta().as_bytes())?;
            println!("{} states ranked by {metric}", reports.len());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Run(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
