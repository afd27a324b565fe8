//! Configuration-driven experiment runner behind the `landau` binary.
//!
//! A config is a TOML file whose keys are read flat (`field.m = 1` or a
//! `[field]` table with `m = 1`, both give the key `field.m`). Unknown keys
//! are rejected with their line number.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use log::info;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::analysis::{
    clustering_constant, cluster_run, demailly_run, is_non_increasing, sphere_exact, torus_sigma,
};
use crate::eigensolve::EigenOptions;
use crate::error::{Error, Result};
use crate::geometry::{Potential, Profile, SphereConfig, TorusConfig};
use crate::kernels::{
    decay_run, near_diagonal_run, projector_kernel, solve_band, write_decay_gnuplot, write_kernel_slice_csv,
};
use crate::lattice::{convergent_grid, default_grid, LatticeOperator};
use crate::model_spectrum::{default_energy_cap, sigma_bands, SigmaSet};

#[derive(Debug, Parser)]
#[command(name = "landau", version, about = "Landau levels, band sets and projector kernels on magnetic surfaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML experiment config; defaults are used for missing keys.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Number of p values processed concurrently.
    #[arg(long, global = true, value_name = "K", default_value_t = 1)]
    pub jobs: usize,
    /// Overrides `seed` from the config.
    #[arg(long, global = true, value_name = "S")]
    pub seed: Option<u64>,
    /// Overrides `output_dir` from the config.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Band set and gaps.
    Sigma,
    /// Distances of lattice eigenvalues to the band set.
    Cluster,
    /// Eigenvalue counts against the Liouville prediction.
    Demailly,
    /// Projector kernel row at the grid centre.
    Kernel,
    /// Off-diagonal exponential decay fit.
    Decay,
    /// Rescaled kernel against the model kernel.
    Neardiag,
    /// Exact levels on the round sphere.
    Sphere,
    /// Lattice matrices in MatrixMarket format.
    ExportMatrix,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Sigma => "sigma",
            Self::Cluster => "cluster",
            Self::Demailly => "demailly",
            Self::Kernel => "kernel",
            Self::Decay => "decay",
            Self::Neardiag => "neardiag",
            Self::Sphere => "sphere",
            Self::ExportMatrix => "export-matrix",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Manifold {
    Torus,
    Sphere,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldSection {
    pub m: u32,
    pub epsilon: f64,
    pub profile: Profile,
    pub r_squared: f64,
    pub resolution: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSection {
    /// Fixed `N` for every `p`; otherwise a policy is applied per `p`.
    pub n: Option<usize>,
    /// `N = max(32, ceil(factor p))` when set, else `max(32, ceil(8 sqrt p))`.
    pub factor: Option<f64>,
}

impl GridSection {
    pub fn resolve(&self, p: u32) -> usize {
        match (self.n, self.factor) {
            (Some(n), _) => n,
            (None, Some(f)) => convergent_grid(p, f),
            (None, None) => default_grid(p),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowSpec {
    /// Merged band-set component, counted from the bottom.
    Band(usize),
    Interval { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tolerances {
    pub eigen: f64,
    /// Eigensolver tolerance for kernel commands.
    pub kernel: f64,
    /// Allowed relative defect of the sampled total flux.
    pub quadrature: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelSection {
    pub w_max: f64,
    pub spacing: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Thresholds {
    pub clustering_c: Option<f64>,
    pub monotone: bool,
    pub demailly_rel_error: f64,
    pub decay_r_squared: f64,
    pub decay_ratio_min: f64,
    pub decay_ratio_max: f64,
    pub diagonal_tol: f64,
    pub neardiag_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub manifold: Manifold,
    pub field: FieldSection,
    pub potential: String,
    pub p_list: Vec<u32>,
    pub grid: GridSection,
    pub window: WindowSpec,
    pub tolerances: Tolerances,
    pub kernel: KernelSection,
    pub k_max: usize,
    pub thresholds: Thresholds,
    pub seed: u64,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            manifold: Manifold::Torus,
            field: FieldSection {
                m: 1,
                epsilon: 0.0,
                profile: Profile::CosX,
                r_squared: 1.0 / (4.0 * PI),
                resolution: crate::analysis::DEFAULT_FIELD_RESOLUTION,
            },
            potential: "zero".into(),
            p_list: vec![4, 8, 16],
            grid: GridSection { n: None, factor: None },
            window: WindowSpec::Band(0),
            tolerances: Tolerances {
                eigen: 1e-8,
                kernel: 1e-11,
                quadrature: 1e-8,
            },
            kernel: KernelSection {
                w_max: 4.0,
                spacing: 0.5,
            },
            k_max: 3,
            thresholds: Thresholds {
                clustering_c: None,
                monotone: true,
                demailly_rel_error: 0.15,
                decay_r_squared: 0.9,
                decay_ratio_min: 0.7,
                decay_ratio_max: 1.4,
                diagonal_tol: 0.1,
                neardiag_ratio: 0.7,
            },
            seed: 0,
            output_dir: PathBuf::from("out"),
        }
    }
}

const KEYS: &[&str] = &[
    "manifold",
    "field.m",
    "field.epsilon",
    "field.profile",
    "field.r_squared",
    "field.resolution",
    "potential.preset",
    "p_list",
    "grid.n",
    "grid.factor",
    "window.band",
    "window.lo",
    "window.hi",
    "tolerances.eigen",
    "tolerances.kernel",
    "tolerances.quadrature",
    "kernel.w_max",
    "kernel.spacing",
    "sphere.k_max",
    "thresholds.clustering_c",
    "thresholds.monotone",
    "thresholds.demailly_rel_error",
    "thresholds.decay_r_squared",
    "thresholds.decay_ratio_min",
    "thresholds.decay_ratio_max",
    "thresholds.diagonal_tol",
    "thresholds.neardiag_ratio",
    "seed",
    "output_dir",
];

fn flatten(prefix: &str, table: &toml::Table, out: &mut BTreeMap<String, toml::Value>) {
    for (k, v) in table {
        let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            toml::Value::Table(t) => flatten(&key, t, out),
            other => {
                out.insert(key, other.clone());
            }
        }
    }
}

/// Line of each assigned key, following `[table]` headers.
fn key_lines(src: &str) -> HashMap<String, usize> {
    let mut lines = HashMap::new();
    let mut prefix = String::new();
    for (i, line) in src.lines().enumerate() {
        let t = line.split('#').next().unwrap_or("").trim();
        if t.starts_with('[') {
            prefix = t.trim_matches(|c| c == '[' || c == ']').trim().replace([' ', '"'], "");
            continue;
        }
        if let Some((k, _)) = t.split_once('=') {
            let k = k.trim().replace([' ', '"'], "");
            let full = if prefix.is_empty() { k } else { format!("{prefix}.{k}") };
            lines.entry(full).or_insert(i + 1);
        }
    }
    lines
}

struct Reader {
    values: BTreeMap<String, toml::Value>,
    lines: HashMap<String, usize>,
}

impl Reader {
    fn fail(&self, key: &str, msg: &str) -> Error {
        match self.lines.get(key) {
            Some(l) => Error::Config(format!("line {l}: key `{key}`: {msg}")),
            None => Error::Config(format!("key `{key}`: {msg}")),
        }
    }

    fn float(&self, key: &str) -> Result<Option<f64>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(toml::Value::Float(f)) => Ok(Some(*f)),
            Some(toml::Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(_) => Err(self.fail(key, "expected a number")),
        }
    }

    fn int(&self, key: &str) -> Result<Option<i64>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(toml::Value::Integer(i)) => Ok(Some(*i)),
            Some(_) => Err(self.fail(key, "expected an integer")),
        }
    }

    fn unsigned(&self, key: &str) -> Result<Option<u64>> {
        match self.int(key)? {
            Some(i) if i < 0 => Err(self.fail(key, "must be non-negative")),
            other => Ok(other.map(|i| i as u64)),
        }
    }

    fn string(&self, key: &str) -> Result<Option<String>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(toml::Value::String(s)) => Ok(Some(s.clone())),
            Some(_) => Err(self.fail(key, "expected a string")),
        }
    }

    fn boolean(&self, key: &str) -> Result<Option<bool>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(toml::Value::Boolean(b)) => Ok(Some(*b)),
            Some(_) => Err(self.fail(key, "expected true or false")),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(src: &str) -> Result<Self> {
        let table: toml::Table = toml::from_str(src).map_err(|e| Error::Config(e.to_string()))?;
        let mut values = BTreeMap::new();
        flatten("", &table, &mut values);
        let r = Reader {
            values,
            lines: key_lines(src),
        };
        if let Some(k) = r.values.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(r.fail(k, "unknown key"));
        }

        let mut c = Self::default();
        if let Some(m) = r.string("manifold")? {
            c.manifold = match m.as_str() {
                "torus" => Manifold::Torus,
                "sphere" => Manifold::Sphere,
                _ => return Err(r.fail("manifold", "expected \"torus\" or \"sphere\"")),
            };
        }
        if let Some(m) = r.unsigned("field.m")? {
            c.field.m = u32::try_from(m).map_err(|_| r.fail("field.m", "too large"))?;
        }
        if let Some(e) = r.float("field.epsilon")? {
            c.field.epsilon = e;
        }
        if let Some(name) = r.string("field.profile")? {
            c.field.profile = Profile::parse(&name).map_err(|e| r.fail("field.profile", &e.to_string()))?;
        }
        if let Some(r2) = r.float("field.r_squared")? {
            c.field.r_squared = r2;
        }
        if let Some(res) = r.unsigned("field.resolution")? {
            c.field.resolution = res as usize;
        }
        if let Some(pre) = r.string("potential.preset")? {
            if !matches!(pre.as_str(), "zero" | "renormalized") {
                return Err(r.fail("potential.preset", "expected \"zero\" or \"renormalized\""));
            }
            c.potential = pre;
        }
        if let Some(v) = r.values.get("p_list") {
            let arr = v.as_array().ok_or_else(|| r.fail("p_list", "expected an array of integers"))?;
            c.p_list = arr
                .iter()
                .map(|x| {
                    x.as_integer()
                        .filter(|&i| i >= 1 && i <= u32::MAX as i64)
                        .map(|i| i as u32)
                        .ok_or_else(|| r.fail("p_list", "entries must be positive integers"))
                })
                .collect::<Result<_>>()?;
            if c.p_list.is_empty() {
                return Err(r.fail("p_list", "must not be empty"));
            }
            if c.p_list.windows(2).any(|w| w[0] >= w[1]) {
                return Err(r.fail("p_list", "must be strictly ascending"));
            }
        }
        match r.values.get("grid.n") {
            None => {}
            Some(toml::Value::String(s)) if s == "auto" => c.grid.n = None,
            Some(_) => {
                let n = r.unsigned("grid.n")?.unwrap_or(0);
                if n < 8 {
                    return Err(r.fail("grid.n", "expected \"auto\" or an integer >= 8"));
                }
                c.grid.n = Some(n as usize);
            }
        }
        c.grid.factor = r.float("grid.factor")?;
        let band = r.unsigned("window.band")?;
        let (lo, hi) = (r.float("window.lo")?, r.float("window.hi")?);
        c.window = match (band, lo, hi) {
            (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
                return Err(r.fail("window.band", "give either window.band or window.lo/window.hi"))
            }
            (Some(b), None, None) => WindowSpec::Band(b as usize),
            (None, Some(lo), Some(hi)) if lo < hi => WindowSpec::Interval { lo, hi },
            (None, Some(_), Some(_)) => return Err(r.fail("window.lo", "window.lo must be below window.hi")),
            (None, Some(_), None) => return Err(r.fail("window.lo", "window.hi is missing")),
            (None, None, Some(_)) => return Err(r.fail("window.hi", "window.lo is missing")),
            (None, None, None) => c.window,
        };
        if let Some(t) = r.float("tolerances.eigen")? {
            c.tolerances.eigen = t;
        }
        if let Some(t) = r.float("tolerances.kernel")? {
            c.tolerances.kernel = t;
        }
        if let Some(t) = r.float("tolerances.quadrature")? {
            c.tolerances.quadrature = t;
        }
        if let Some(w) = r.float("kernel.w_max")? {
            c.kernel.w_max = w;
        }
        if let Some(s) = r.float("kernel.spacing")? {
            if s <= 0.0 {
                return Err(r.fail("kernel.spacing", "must be positive"));
            }
            c.kernel.spacing = s;
        }
        if let Some(k) = r.unsigned("sphere.k_max")? {
            c.k_max = k as usize;
        }
        let th = &mut c.thresholds;
        th.clustering_c = r.float("thresholds.clustering_c")?.or(th.clustering_c);
        th.monotone = r.boolean("thresholds.monotone")?.unwrap_or(th.monotone);
        th.demailly_rel_error = r.float("thresholds.demailly_rel_error")?.unwrap_or(th.demailly_rel_error);
        th.decay_r_squared = r.float("thresholds.decay_r_squared")?.unwrap_or(th.decay_r_squared);
        th.decay_ratio_min = r.float("thresholds.decay_ratio_min")?.unwrap_or(th.decay_ratio_min);
        th.decay_ratio_max = r.float("thresholds.decay_ratio_max")?.unwrap_or(th.decay_ratio_max);
        th.diagonal_tol = r.float("thresholds.diagonal_tol")?.unwrap_or(th.diagonal_tol);
        th.neardiag_ratio = r.float("thresholds.neardiag_ratio")?.unwrap_or(th.neardiag_ratio);
        if let Some(s) = r.unsigned("seed")? {
            c.seed = s;
        }
        if let Some(o) = r.string("output_dir")? {
            c.output_dir = PathBuf::from(o);
        }
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let src = fs::read_to_string(path)?;
        Self::from_toml(&src).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn torus(&self) -> Result<TorusConfig> {
        if self.manifold != Manifold::Torus {
            return Err(Error::Config("this command needs manifold = \"torus\"".into()));
        }
        let potential = match self.potential.as_str() {
            "renormalized" => Potential::Renormalized,
            _ => Potential::Zero,
        };
        TorusConfig::new(self.field.m, self.field.epsilon, self.field.profile, potential)
    }

    pub fn sphere(&self) -> Result<SphereConfig> {
        SphereConfig::new(self.field.r_squared)
    }

    pub fn eigen_options(&self, rel_tol: f64) -> EigenOptions {
        EigenOptions {
            rel_tol,
            seed: self.seed,
            ..EigenOptions::default()
        }
    }

    /// Band set of the configured manifold.
    pub fn sigma(&self) -> Result<SigmaSet> {
        match self.manifold {
            Manifold::Torus => {
                let torus = self.torus()?;
                let field = torus.field_grid(self.field.resolution)?;
                let total: f64 = field.points.iter().map(|pt| pt.weight).sum();
                let expected = 2.0 * PI * self.field.m as f64;
                if (total - expected).abs() > self.tolerances.quadrature * expected {
                    return Err(Error::Config(format!(
                        "sampled flux {total} differs from {expected} beyond tolerances.quadrature; raise field.resolution"
                    )));
                }
                torus_sigma(&torus, self.field.resolution, None)
            }
            Manifold::Sphere => {
                let samples = self.sphere()?.field_grid(self.field.resolution)?.samples();
                let cap = default_energy_cap(&samples);
                let a = SphereConfig::new(self.field.r_squared)?.frequency();
                let k_max = (cap / (2.0 * a)).ceil() as usize;
                sigma_bands(&samples, k_max, cap)
            }
        }
    }

    /// Window in energy units; explicit endpoints must avoid the band set.
    pub fn resolve_window(&self, sigma: &SigmaSet) -> Result<(f64, f64)> {
        match self.window {
            WindowSpec::Band(b) => sigma.component_window(b),
            WindowSpec::Interval { lo, hi } => {
                for end in [lo, hi] {
                    if end < sigma.energy_cap() && !sigma.avoids(end) {
                        return Err(Error::Config(format!(
                            "window endpoint {end} lies inside the band set; choose endpoints in a gap"
                        )));
                    }
                }
                Ok((lo, hi))
            }
        }
    }
}

/// Table of formatted cells, written as CSV and as whitespace columns.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.header)?;
        for row in &self.rows {
            out.write_record(row)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn write_columns(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "# {}", self.header.join(" "))?;
        for row in &self.rows {
            writeln!(w, "{}", row.join(" "))?;
        }
        Ok(())
    }

    /// Aligned text rendering for the terminal.
    pub fn render(&self) -> String {
        let widths: Vec<usize> = (0..self.header.len())
            .map(|c| {
                self.rows
                    .iter()
                    .map(|r| r[c].len())
                    .chain([self.header[c].len()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let line = |cells: &[String]| {
            cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:>w$}"))
                .collect::<Vec<_>>()
                .join("  ")
        };
        let mut s = line(&self.header);
        for row in &self.rows {
            s.push('\n');
            s.push_str(&line(row));
        }
        s
    }
}

fn num(x: f64) -> String {
    format!("{x:e}")
}

/// Result of one command: summary table, JSON summary and threshold breaches.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: Command,
    pub config: ExperimentConfig,
    pub summary: serde_json::Value,
    pub table: Table,
    pub breaches: Vec<String>,
    pub files: Vec<PathBuf>,
}

struct Output {
    summary: serde_json::Value,
    table: Table,
    breaches: Vec<String>,
    /// Per-`p` array files: name and contents.
    extra: Vec<(String, Vec<u8>)>,
}

fn sweep<T: Send>(jobs: usize, ps: &[u32], f: impl Fn(u32) -> Result<T> + Sync) -> Result<Vec<T>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    pool.install(|| ps.par_iter().map(|&p| f(p)).collect())
}

pub fn run(cli: &Cli) -> Result<Report> {
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        config.seed = s;
    }
    if let Some(o) = &cli.out {
        config.output_dir = o.clone();
    }
    run_command(cli.command, &config, cli.jobs)
}

/// Runs a command and writes `<cmd>.csv`, `<cmd>.json`, `<cmd>.dat` and any
/// per-`p` files into the output directory.
pub fn run_command(command: Command, config: &ExperimentConfig, jobs: usize) -> Result<Report> {
    info!("running {} over p = {:?}", command.name(), config.p_list);
    let out = match command {
        Command::Sigma => cmd_sigma(config)?,
        Command::Cluster => cmd_cluster(config, jobs)?,
        Command::Demailly => cmd_demailly(config, jobs)?,
        Command::Kernel => cmd_kernel(config, jobs)?,
        Command::Decay => cmd_decay(config, jobs)?,
        Command::Neardiag => cmd_neardiag(config, jobs)?,
        Command::Sphere => cmd_sphere(config)?,
        Command::ExportMatrix => cmd_export_matrix(config, jobs)?,
    };
    let dir = &config.output_dir;
    fs::create_dir_all(dir)?;
    let name = command.name();
    let mut files = Vec::new();
    let csv_path = dir.join(format!("{name}.csv"));
    out.table.write_csv(fs::File::create(&csv_path)?)?;
    files.push(csv_path);
    let dat_path = dir.join(format!("{name}.dat"));
    out.table.write_columns(fs::File::create(&dat_path)?)?;
    files.push(dat_path);
    for (file, bytes) in &out.extra {
        let path = dir.join(file);
        fs::write(&path, bytes)?;
        files.push(path);
    }
    let json_path = dir.join(format!("{name}.json"));
    files.push(json_path.clone());
    let report = Report {
        command,
        config: config.clone(),
        summary: out.summary,
        table: out.table,
        breaches: out.breaches,
        files,
    };
    fs::write(&json_path, serde_json::to_vec_pretty(&report)?)?;
    Ok(report)
}

fn cmd_sigma(config: &ExperimentConfig) -> Result<Output> {
    let sigma = config.sigma()?;
    let mut table = Table::new(&["k", "mu", "alpha", "beta"]);
    for b in sigma.bands() {
        let k = b.k.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(":");
        table.push(vec![k, b.mu.to_string(), num(b.alpha), num(b.beta)]);
    }
    Ok(Output {
        summary: json!({
            "components": sigma.components(),
            "gaps": sigma.gaps(),
            "energy_cap": sigma.energy_cap(),
        }),
        table,
        breaches: Vec::new(),
        extra: Vec::new(),
    })
}

fn cmd_cluster(config: &ExperimentConfig, jobs: usize) -> Result<Output> {
    let torus = config.torus()?;
    let sigma = config.sigma()?;
    let window = config.resolve_window(&sigma)?;
    let opts = config.eigen_options(config.tolerances.eigen);
    let runs = sweep(jobs, &config.p_list, |p| {
        cluster_run(&torus, &sigma, p, config.grid.resolve(p), window, &opts)
    })?;
    let mut table = Table::new(&["p", "n_grid", "count", "max_dist", "witness"]);
    let mut extra = Vec::new();
    for run in &runs {
        let r = &run.report;
        table.push(vec![
            r.p.to_string(),
            run.n_grid.to_string(),
            r.per_eig_dist.len().to_string(),
            num(r.max_dist),
            num(r.witness()),
        ]);
        let mut per = Table::new(&["lambda", "dist"]);
        for &(l, d) in &r.per_eig_dist {
            per.push(vec![num(l), num(d)]);
        }
        let mut buf = Vec::new();
        per.write_csv(&mut buf)?;
        extra.push((format!("cluster_p{}.csv", r.p), buf));
    }
    let reports: Vec<_> = runs.iter().map(|r| r.report.clone()).collect();
    let c = clustering_constant(&reports);
    let mut breaches = Vec::new();
    if config.thresholds.monotone && !is_non_increasing(&reports) {
        breaches.push("max_dist is not non-increasing in p".to_string());
    }
    if let Some(limit) = config.thresholds.clustering_c {
        if c > limit {
            breaches.push(format!("clustering constant {c} exceeds {limit}"));
        }
    }
    Ok(Output {
        summary: json!({ "window": window, "clustering_constant": c }),
        table,
        breaches,
        extra,
    })
}

fn cmd_demailly(config: &ExperimentConfig, jobs: usize) -> Result<Output> {
    let torus = config.torus()?;
    let sigma = config.sigma()?;
    let window = config.resolve_window(&sigma)?;
    let rows = sweep(jobs, &config.p_list, |p| {
        let n = config.grid.resolve(p);
        demailly_run(&torus, &sigma, p, n, window, config.field.resolution).map(|d| (p, n, d))
    })?;
    let mut table = Table::new(&["p", "n_grid", "predicted", "count", "relative_error"]);
    let mut breaches = Vec::new();
    for (p, n, d) in &rows {
        table.push(vec![
            p.to_string(),
            n.to_string(),
            num(d.predicted),
            d.count.to_string(),
            num(d.relative_error),
        ]);
        if d.relative_error > config.thresholds.demailly_rel_error {
            breaches.push(format!(
                "p = {p}: relative error {} exceeds {}",
                d.relative_error, config.thresholds.demailly_rel_error
            ));
        }
    }
    Ok(Output {
        summary: json!({ "window": window }),
        table,
        breaches,
        extra: Vec::new(),
    })
}

fn cmd_kernel(config: &ExperimentConfig, jobs: usize) -> Result<Output> {
    let torus = config.torus()?;
    let sigma = config.sigma()?;
    let window = config.resolve_window(&sigma)?;
    let opts = config.eigen_options(config.tolerances.kernel);
    let rows = sweep(jobs, &config.p_list, |p| {
        let n = config.grid.resolve(p);
        let solved = solve_band(&torus, p, n, window, &opts)?;
        let centre = solved.op.site(n / 2, n / 2);
        let kg = projector_kernel(&solved.window, p, n, &[centre])?;
        let mut slice = Vec::new();
        write_kernel_slice_csv(&kg, 0, &mut slice)?;
        Ok((p, n, kg.count, kg.trace(), kg.value(0, centre).re / p as f64, slice))
    })?;
    let mut table = Table::new(&["p", "n_grid", "count", "trace", "diagonal"]);
    let mut breaches = Vec::new();
    let mut extra = Vec::new();
    for (p, n, count, trace, diag, slice) in rows {
        table.push(vec![p.to_string(), n.to_string(), count.to_string(), num(trace), num(diag)]);
        if (trace - count as f64).abs() > 1e-8 * count as f64 {
            breaches.push(format!("p = {p}: trace {trace} differs from count {count}"));
        }
        extra.push((format!("kernel_p{p}.csv"), slice));
    }
    Ok(Output {
        summary: json!({ "window": window }),
        table,
        breaches,
        extra,
    })
}

fn cmd_decay(config: &ExperimentConfig, jobs: usize) -> Result<Output> {
    let torus = config.torus()?;
    let sigma = config.sigma()?;
    let window = config.resolve_window(&sigma)?;
    let opts = config.eigen_options(config.tolerances.kernel);
    let fits = sweep(jobs, &config.p_list, |p| {
        let n = config.grid.resolve(p);
        decay_run(&torus, p, n, window, &opts).map(|(_, fit)| (p, n, fit))
    })?;
    let th = &config.thresholds;
    let mut table = Table::new(&["p", "n_grid", "c_hat", "amplitude", "r_squared", "bins"]);
    let mut breaches = Vec::new();
    let mut extra = Vec::new();
    for (p, n, fit) in &fits {
        table.push(vec![
            p.to_string(),
            n.to_string(),
            num(fit.c_hat),
            num(fit.amplitude),
            num(fit.r_squared),
            fit.bins.len().to_string(),
        ]);
        if fit.c_hat <= 0.0 || fit.r_squared < th.decay_r_squared {
            breaches.push(format!("p = {p}: c_hat {} with r^2 {}", fit.c_hat, fit.r_squared));
        }
        let mut buf = Vec::new();
        write_decay_gnuplot(fit, *p, &mut buf)?;
        extra.push((format!("decay_p{p}.dat"), buf));
    }
    let ratio = match (fits.first(), fits.last()) {
        (Some(a), Some(b)) if fits.len() > 1 => Some(a.2.c_hat / b.2.c_hat),
        _ => None,
    };
    if let Some(r) = ratio {
        if !(th.decay_ratio_min..=th.decay_ratio_max).contains(&r) {
            breaches.push(format!(
                "c_hat ratio {r} outside [{}, {}]",
                th.decay_ratio_min, th.decay_ratio_max
            ));
        }
    }
    Ok(Output {
        summary: json!({ "window": window, "c_hat_ratio_first_last": ratio }),
        table,
        breaches,
        extra,
    })
}

fn cmd_neardiag(config: &ExperimentConfig, jobs: usize) -> Result<Output> {
    let torus = config.torus()?;
    let sigma = config.sigma()?;
    let window = config.resolve_window(&sigma)?;
    let opts = config.eigen_options(config.tolerances.kernel);
    let reports = sweep(jobs, &config.p_list, |p| {
        near_diagonal_run(&torus, p, config.grid.resolve(p), window, &opts, config.kernel.w_max, config.kernel.spacing)
    })?;
    let th = &config.thresholds;
    let mut table = Table::new(&[
        "p",
        "n_grid",
        "diagonal",
        "model_diagonal",
        "sup_rel_error",
        "phase_sup_rel_error",
        "samples",
        "max_snap",
    ]);
    let mut breaches = Vec::new();
    for r in &reports {
        table.push(vec![
            r.p.to_string(),
            r.n_grid.to_string(),
            num(r.diagonal),
            num(r.model_diagonal),
            num(r.sup_rel_error),
            r.phase_sup_rel_error.map_or_else(|| "nan".to_string(), num),
            r.samples.to_string(),
            num(r.max_snap),
        ]);
        if (r.diagonal - r.model_diagonal).abs() > th.diagonal_tol * r.model_diagonal {
            breaches.push(format!("p = {}: diagonal {} vs model {}", r.p, r.diagonal, r.model_diagonal));
        }
    }
    let ratio = match (reports.first(), reports.last()) {
        (Some(a), Some(b)) if reports.len() > 1 => Some(b.sup_rel_error / a.sup_rel_error),
        _ => None,
    };
    if let Some(r) = ratio {
        if r > th.neardiag_ratio {
            breaches.push(format!("sup_rel_error ratio {r} exceeds {}", th.neardiag_ratio));
        }
    }
    Ok(Output {
        summary: json!({ "window": window, "sup_rel_error_ratio_last_first": ratio, "reports": reports }),
        table,
        breaches,
        extra: Vec::new(),
    })
}

fn cmd_sphere(config: &ExperimentConfig) -> Result<Output> {
    let sphere = config.sphere()?;
    let mut table = Table::new(&["p", "k", "nu", "multiplicity", "dist"]);
    for &p in &config.p_list {
        for level in sphere_exact(&sphere, p, config.k_max) {
            table.push(vec![
                p.to_string(),
                level.k.to_string(),
                num(level.nu),
                level.multiplicity.to_string(),
                num(level.dist),
            ]);
        }
    }
    Ok(Output {
        summary: json!({ "r_squared": sphere.r_squared(), "frequency": sphere.frequency() }),
        table,
        breaches: Vec::new(),
        extra: Vec::new(),
    })
}

fn cmd_export_matrix(config: &ExperimentConfig, jobs: usize) -> Result<Output> {
    let torus = config.torus()?;
    let rows = sweep(jobs, &config.p_list, |p| {
        let n = config.grid.resolve(p);
        let op = LatticeOperator::assemble(&torus, p, n)?;
        let mut buf = Vec::new();
        op.write_matrix_market(&mut buf)?;
        Ok((p, n, op.dim(), op.matrix().nnz(), buf))
    })?;
    let mut table = Table::new(&["p", "n_grid", "dim", "nnz", "file"]);
    let mut extra = Vec::new();
    for (p, n, dim, nnz, buf) in rows {
        let file = format!("H_p{p}_N{n}.mtx");
        table.push(vec![p.to_string(), n.to_string(), dim.to_string(), nnz.to_string(), file.clone()]);
        extra.push((file, buf));
    }
    Ok(Output {
        summary: json!({}),
        table,
        breaches: Vec::new(),
        extra,
    })
}
