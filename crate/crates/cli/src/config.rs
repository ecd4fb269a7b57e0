use std::collections::BTreeMap;
use std::path::Path;

use clap::{Args, ValueEnum};
use heis_tube::{Domain, LevelSurface, Patch, SurfaceQuadrature, TubeMethod};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Distance,
    Geodesic,
    Project,
    Tube,
    Series,
    Reach,
    Verify,
    SingularScan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    #[default]
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    H1Closed,
    HnDet,
    Umbilic,
    Montecarlo,
}

impl From<Method> for TubeMethod {
    fn from(m: Method) -> Self {
        match m {
            Method::H1Closed => TubeMethod::H1Closed,
            Method::HnDet => TubeMethod::HnDet,
            Method::Umbilic => TubeMethod::Umbilic,
            Method::Montecarlo => TubeMethod::MonteCarlo,
        }
    }
}

/// Flags shared by every subcommand. Flags a command does not use are
/// rejected during resolution.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Built-in surface name or path to a surface JSON file.
    #[arg(long)]
    pub surface: Option<String>,
    /// Heisenberg dimension n (default 1, or inferred from --p).
    #[arg(long)]
    pub n: Option<usize>,
    /// Surface parameter, e.g. radius=2 or a=0.5.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    pub params: Vec<String>,
    /// Point coordinates x₁ y₁ … xₙ yₙ t.
    #[arg(long, num_args = 1.., allow_negative_numbers = true)]
    pub p: Option<Vec<f64>>,
    #[arg(long, num_args = 1.., allow_negative_numbers = true)]
    pub q: Option<Vec<f64>>,
    /// Unit horizontal direction in frame components.
    #[arg(long, num_args = 1.., allow_negative_numbers = true)]
    pub dir: Option<Vec<f64>>,
    #[arg(long, allow_negative_numbers = true)]
    pub curvature: Option<f64>,
    /// Arc lengths at which the geodesic is evaluated.
    #[arg(long, num_args = 1..)]
    pub length: Option<Vec<f64>>,
    /// Tube radii.
    #[arg(long, num_args = 1..)]
    pub r: Option<Vec<f64>>,
    /// Radius grid `A:B:K` (linear) or `log:A:B:K` (geometric), K points.
    #[arg(long, value_name = "SPEC")]
    pub r_grid: Option<String>,
    #[arg(long, value_enum)]
    pub method: Option<Method>,
    /// Lattice points per parameter axis.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Monte Carlo samples.
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Threshold on |N_h| for singular-scan.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Coordinate solved from g = 0 (0..2n, 2n is t).
    #[arg(long)]
    pub axis: Option<usize>,
    /// Starting value for the solved coordinate.
    #[arg(long, allow_negative_numbers = true)]
    pub guess: Option<f64>,
    /// Range `LO:HI` of one free coordinate; repeat in coordinate order.
    #[arg(long = "box", value_name = "LO:HI", allow_hyphen_values = true)]
    pub boxes: Vec<String>,
    /// Radial range of the first two free coordinates.
    #[arg(long, num_args = 2, value_names = ["INNER", "OUTER"])]
    pub annulus: Option<Vec<f64>>,
    /// Gauss–Legendre nodes per panel and axis.
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Panels per axis.
    #[arg(long)]
    pub panels: Option<usize>,
    /// Worker threads (fallback: HEIS_TUBE_THREADS).
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file instead of stdout.
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceConfig {
    /// Name or path as given.
    pub source: String,
    pub params: BTreeMap<String, f64>,
    /// The polynomial actually used, so a replay does not depend on the file.
    pub definition: serde_json::Value,
}

/// Fully resolved run; echoed into every output and accepted by `replay`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surface: Option<SurfaceConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub patch: Option<Patch>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature: Option<SurfaceQuadrature>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curvature: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lengths: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<Method>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    pub format: Format,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

impl RunConfig {
    pub fn surface(&self) -> Result<LevelSurface, CliError> {
        let cfg = self
            .surface
            .as_ref()
            .ok_or_else(|| CliError::usage(format!("{} needs --surface", self.command.name())))?;
        let s = LevelSurface::from_json(&cfg.definition.to_string()).map_err(CliError::from)?;
        if s.n() != self.n {
            return Err(CliError::usage(format!(
                "surface definition has n = {}, config has n = {}",
                s.n(),
                self.n
            )));
        }
        Ok(s)
    }

    pub fn patch(&self) -> Result<&Patch, CliError> {
        self.patch
            .as_ref()
            .ok_or_else(|| CliError::usage(format!("{} needs a patch", self.command.name())))
    }

    pub fn quadrature(&self) -> SurfaceQuadrature {
        self.quadrature.unwrap_or_default()
    }

    pub fn radii(&self) -> Result<&[f64], CliError> {
        self.radii
            .as_deref()
            .ok_or_else(|| CliError::usage(format!("{} needs --r or --r-grid", self.command.name())))
    }

    /// Checks a config read back from a file the same way flags are checked.
    pub fn validate(&self) -> Result<(), CliError> {
        let used = self.command.uses();
        let present = [
            ("surface", self.surface.is_some()),
            ("patch", self.patch.is_some()),
            ("quadrature", self.quadrature.is_some()),
            ("p", self.p.is_some()),
            ("q", self.q.is_some()),
            ("dir", self.dir.is_some()),
            ("curvature", self.curvature.is_some()),
            ("lengths", self.lengths.is_some()),
            ("radii", self.radii.is_some()),
            ("method", self.method.is_some()),
            ("grid", self.grid.is_some()),
            ("samples", self.samples.is_some()),
            ("seed", self.seed.is_some()),
            ("eps", self.eps.is_some()),
        ];
        for (key, set) in present {
            if set && !used.contains(&key) {
                return Err(CliError::usage(format!(
                    "'{key}' does not apply to {}",
                    self.command.name()
                )));
            }
        }
        if self.n == 0 {
            return Err(CliError::usage("n must be at least 1"));
        }
        let dim = 2 * self.n + 1;
        for (key, v) in [("p", &self.p), ("q", &self.q)] {
            if let Some(v) = v {
                if v.len() != dim {
                    return Err(CliError::usage(format!(
                        "--{key} needs {dim} coordinates, got {}",
                        v.len()
                    )));
                }
            }
        }
        if let Some(d) = &self.dir {
            if d.len() != 2 * self.n {
                return Err(CliError::usage(format!(
                    "--dir needs {} components, got {}",
                    2 * self.n,
                    d.len()
                )));
            }
        }
        if let Some(p) = &self.patch {
            if p.n() != self.n {
                return Err(CliError::usage(format!(
                    "patch has n = {}, config has n = {}",
                    p.n(),
                    self.n
                )));
            }
            Patch::new(p.axis, p.domain.clone(), p.guess).map_err(CliError::from)?;
        }
        if let Some(q) = self.quadrature {
            if q.nodes == 0 || q.panels == 0 {
                return Err(CliError::usage("--nodes and --panels must be positive"));
            }
        }
        if self.method == Some(Method::Montecarlo) && self.samples.is_none() {
            return Err(CliError::usage("--method montecarlo needs --samples"));
        }
        if self.threads == Some(0) {
            return Err(CliError::usage("--threads must be positive"));
        }
        Ok(())
    }
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Distance => "distance",
            Command::Geodesic => "geodesic",
            Command::Project => "project",
            Command::Tube => "tube",
            Command::Series => "series",
            Command::Reach => "reach",
            Command::Verify => "verify",
            Command::SingularScan => "singular-scan",
        }
    }

    /// Config keys the command reads.
    fn uses(self) -> &'static [&'static str] {
        match self {
            Command::Distance => &["p", "q"],
            Command::Geodesic => &["p", "dir", "curvature", "lengths"],
            Command::Project => &["surface", "patch", "p", "grid"],
            Command::Tube => &["surface", "patch", "quadrature", "radii", "method", "samples", "seed"],
            Command::Series => &["surface", "patch", "quadrature", "radii"],
            Command::Reach => &["surface", "patch", "grid"],
            Command::Verify => &["surface", "patch", "quadrature", "radii", "grid", "samples", "seed"],
            Command::SingularScan => &["surface", "patch", "grid", "eps"],
        }
    }

    fn needs_surface(self) -> bool {
        self.uses().contains(&"surface")
    }
}

/// Turns flags into a complete config, filling every default.
pub fn resolve(command: Command, args: &RunArgs) -> Result<RunConfig, CliError> {
    let flag_table = [
        ("surface", args.surface.is_some()),
        (
            "patch",
            args.axis.is_some() || args.guess.is_some() || !args.boxes.is_empty() || args.annulus.is_some(),
        ),
        ("quadrature", args.nodes.is_some() || args.panels.is_some()),
        ("p", args.p.is_some()),
        ("q", args.q.is_some()),
        ("dir", args.dir.is_some()),
        ("curvature", args.curvature.is_some()),
        ("lengths", args.length.is_some()),
        ("radii", args.r.is_some() || args.r_grid.is_some()),
        ("method", args.method.is_some()),
        ("grid", args.grid.is_some()),
        ("samples", args.samples.is_some()),
        ("seed", args.seed.is_some()),
        ("eps", args.eps.is_some()),
    ];
    for (key, set) in flag_table {
        if set && !command.uses().contains(&key) {
            return Err(CliError::usage(format!(
                "{} does not take {}",
                command.name(),
                flag_name(key)
            )));
        }
    }
    if !args.params.is_empty() && args.surface.is_none() {
        return Err(CliError::usage("--param needs --surface"));
    }

    let n = resolve_n(command, args)?;
    let mut cfg = RunConfig {
        command,
        n,
        surface: None,
        patch: None,
        quadrature: None,
        p: args.p.clone(),
        q: args.q.clone(),
        dir: args.dir.clone(),
        curvature: args.curvature,
        lengths: args.length.clone(),
        radii: None,
        method: args.method,
        grid: args.grid,
        samples: args.samples,
        seed: args.seed,
        eps: args.eps,
        threads: resolve_threads(args.threads)?,
        format: args.format.unwrap_or_default(),
        output: args.out.clone(),
    };

    match command {
        Command::Distance => {
            require(&cfg.p, "--p")?;
            require(&cfg.q, "--q")?;
        }
        Command::Geodesic => {
            require(&cfg.p, "--p")?;
            require(&cfg.dir, "--dir")?;
            cfg.curvature.get_or_insert(0.0);
            cfg.lengths.get_or_insert_with(|| vec![1.0]);
        }
        _ => {}
    }

    if command.needs_surface() {
        let source = args
            .surface
            .clone()
            .ok_or_else(|| CliError::usage(format!("{} needs --surface", command.name())))?;
        let params = parse_params(&args.params)?;
        let surface = load_surface(&source, n, &params)?;
        cfg.patch = Some(resolve_patch(&source, &surface, &params, args)?);
        cfg.surface = Some(SurfaceConfig {
            source,
            params,
            definition: serde_json::from_str(&surface.to_json()).expect("surface JSON is valid"),
        });
    }

    let radii = match (&args.r, &args.r_grid) {
        (Some(_), Some(_)) => return Err(CliError::usage("give --r or --r-grid, not both")),
        (Some(r), None) => Some(r.clone()),
        (None, Some(spec)) => Some(parse_r_grid(spec)?),
        (None, None) => None,
    };
    match command {
        Command::Tube => {
            cfg.radii = Some(radii.ok_or_else(|| CliError::usage("tube needs --r or --r-grid"))?);
            cfg.method = Some(
                args.method
                    .unwrap_or(if n == 1 { Method::H1Closed } else { Method::HnDet }),
            );
            cfg.quadrature = Some(quadrature(args));
            if cfg.method == Some(Method::Montecarlo) {
                cfg.seed.get_or_insert(0);
            } else if cfg.samples.is_some() || cfg.seed.is_some() {
                return Err(CliError::usage("--samples and --seed need --method montecarlo"));
            }
        }
        Command::Series => {
            cfg.radii = Some(radii.unwrap_or_else(default_series_radii));
            cfg.quadrature = Some(quadrature(args));
        }
        Command::Verify => {
            cfg.radii = Some(radii.unwrap_or_else(|| vec![0.05, 0.1]));
            cfg.quadrature = Some(quadrature(args));
            cfg.grid.get_or_insert(3);
            if cfg.samples.is_some() {
                cfg.seed.get_or_insert(0);
            } else if cfg.seed.is_some() {
                return Err(CliError::usage("--seed needs --samples"));
            }
        }
        Command::Project => {
            cfg.grid.get_or_insert(if n == 1 { 24 } else { 7 });
            require(&cfg.p, "--p")?;
        }
        Command::Reach => {
            cfg.grid.get_or_insert(if n == 1 { 8 } else { 4 });
        }
        Command::SingularScan => {
            cfg.grid.get_or_insert(if n == 1 { 64 } else { 9 });
            cfg.eps.get_or_insert(1e-8);
        }
        Command::Distance | Command::Geodesic => {}
    }
    cfg.validate()?;
    Ok(cfg)
}

fn flag_name(key: &str) -> &'static str {
    match key {
        "surface" => "--surface",
        "patch" => "--axis/--guess/--box/--annulus",
        "quadrature" => "--nodes/--panels",
        "p" => "--p",
        "q" => "--q",
        "dir" => "--dir",
        "curvature" => "--curvature",
        "lengths" => "--length",
        "radii" => "--r/--r-grid",
        "method" => "--method",
        "grid" => "--grid",
        "samples" => "--samples",
        "seed" => "--seed",
        _ => "--eps",
    }
}

fn require<T>(v: &Option<T>, flag: &str) -> Result<(), CliError> {
    v.as_ref()
        .map(|_| ())
        .ok_or_else(|| CliError::usage(format!("missing {flag}")))
}

fn resolve_n(command: Command, args: &RunArgs) -> Result<usize, CliError> {
    let from_points = [&args.p, &args.q]
        .into_iter()
        .flatten()
        .map(|v| {
            if v.len() < 3 || v.len() % 2 == 0 {
                Err(CliError::usage(format!(
                    "a point needs 2n + 1 coordinates, got {}",
                    v.len()
                )))
            } else {
                Ok((v.len() - 1) / 2)
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    let from_dir = args.dir.as_ref().map(|d| d.len() / 2);
    let inferred = from_points.first().copied().or(from_dir);
    let n = args.n.or(inferred).unwrap_or(1);
    if matches!(command, Command::Distance | Command::Geodesic) || args.n.is_some() {
        if let Some(m) = from_points.iter().find(|&&m| m != n) {
            return Err(CliError::usage(format!(
                "--n {n} conflicts with a point of dimension n = {m}"
            )));
        }
    }
    Ok(n)
}

fn resolve_threads(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var("HEIS_TUBE_THREADS") {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::usage(format!("HEIS_TUBE_THREADS must be a positive integer, got '{v}'"))),
        _ => Ok(None),
    }
}

fn quadrature(args: &RunArgs) -> SurfaceQuadrature {
    let d = SurfaceQuadrature::default();
    SurfaceQuadrature {
        nodes: args.nodes.unwrap_or(d.nodes),
        panels: args.panels.unwrap_or(d.panels),
    }
}

fn default_series_radii() -> Vec<f64> {
    (0..9).map(|k| 1e-3 * 10f64.powf(k as f64 / 4.0)).collect()
}

fn parse_params(raw: &[String]) -> Result<BTreeMap<String, f64>, CliError> {
    let mut out = BTreeMap::new();
    for item in raw {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| CliError::usage(format!("--param expects KEY=VALUE, got '{item}'")))?;
        let v: f64 = v
            .parse()
            .map_err(|_| CliError::usage(format!("--param {k}: '{v}' is not a number")))?;
        if out.insert(k.to_string(), v).is_some() {
            return Err(CliError::usage(format!("--param {k} given twice")));
        }
    }
    Ok(out)
}

pub fn parse_r_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::usage(format!("--r-grid expects A:B:K or log:A:B:K, got '{spec}'"));
    let (geometric, rest) = match spec.strip_prefix("log:") {
        Some(rest) => (true, rest),
        None => (false, spec),
    };
    let parts: Vec<&str> = rest.split(':').collect();
    let [a, b, k] = parts[..] else { return Err(bad()) };
    let (a, b): (f64, f64) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
    let k: usize = k.parse().map_err(|_| bad())?;
    if k == 0 || (geometric && !(a > 0.0 && b > 0.0)) {
        return Err(bad());
    }
    if k == 1 {
        return Ok(vec![a]);
    }
    let step = |i: usize| i as f64 / (k - 1) as f64;
    Ok((0..k)
        .map(|i| {
            if geometric {
                a * (b / a).powf(step(i))
            } else {
                a + (b - a) * step(i)
            }
        })
        .collect())
}

fn load_surface(source: &str, n: usize, params: &BTreeMap<String, f64>) -> Result<LevelSurface, CliError> {
    if LevelSurface::BUILTIN_NAMES.contains(&source) {
        return LevelSurface::builtin(source, n, params).map_err(CliError::from);
    }
    if !params.is_empty() {
        return Err(CliError::usage("--param only applies to built-in surfaces"));
    }
    let path = Path::new(source);
    if !path.exists() {
        return Err(CliError::usage(format!(
            "'{source}' is neither a built-in surface ({}) nor a file",
            LevelSurface::BUILTIN_NAMES.join(", ")
        )));
    }
    let text = std::fs::read_to_string(path).map_err(|e| CliError::usage(format!("reading {source}: {e}")))?;
    let s = LevelSurface::from_json(&text).map_err(CliError::from)?;
    if s.n() != n {
        return Err(CliError::usage(format!(
            "{source} defines a surface in n = {}, run has n = {n}",
            s.n()
        )));
    }
    Ok(s)
}

fn parse_range(raw: &str) -> Result<(f64, f64), CliError> {
    let bad = || CliError::usage(format!("--box expects LO:HI, got '{raw}'"));
    let (a, b) = raw.split_once(':').ok_or_else(bad)?;
    Ok((a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?))
}

/// Solved axis, box ranges, annulus radii and guess.
type PatchDefaults = (usize, Vec<(f64, f64)>, Option<(f64, f64)>, f64);

/// Default graph patch of each built-in surface.
fn builtin_patch(name: &str, n: usize, params: &BTreeMap<String, f64>) -> Option<PatchDefaults> {
    let t_axis = 2 * n;
    let free = |w: f64| vec![(-w, w); 2 * n];
    Some(match name {
        "halfspace-x1" => {
            let mut r = free(2.0);
            r[2 * n - 1] = (-4.0, 4.0);
            (0, r, None, 0.0)
        }
        "plane-t" => (t_axis, free(1.0)[2..].to_vec(), Some((0.1, 3.0)), 0.0),
        "saddle-t-xy" => {
            let mut r = free(1.0);
            r[0] = (-2.0, 2.0);
            r[1] = (-3.0, 3.0);
            (t_axis, r, None, 0.0)
        }
        "cylinder" => {
            let radius = params.get("radius").copied().unwrap_or(1.0);
            let w = 0.5 * radius / ((2 * n - 1) as f64).sqrt();
            let mut r = free(w);
            r[2 * n - 1] = (-1.0, 1.0);
            (0, r, None, radius)
        }
        "paraboloid" => (t_axis, free(1.0), None, 0.0),
        _ => return None,
    })
}

fn resolve_patch(
    source: &str,
    surface: &LevelSurface,
    params: &BTreeMap<String, f64>,
    args: &RunArgs,
) -> Result<Patch, CliError> {
    let n = surface.n();
    let default = builtin_patch(source, n, params);
    let explicit_domain = !args.boxes.is_empty() || args.annulus.is_some();
    let axis = args.axis.or(default.as_ref().map(|d| d.0)).unwrap_or(2 * n);
    if axis > 2 * n {
        return Err(CliError::usage(format!("--axis must be in 0..={}", 2 * n)));
    }
    let guess = args.guess.or(default.as_ref().map(|d| d.3)).unwrap_or(0.0);
    let (ranges, annulus) = if explicit_domain {
        let ranges = args
            .boxes
            .iter()
            .map(|b| parse_range(b))
            .collect::<Result<Vec<_>, _>>()?;
        let annulus = args.annulus.as_ref().map(|a| (a[0], a[1]));
        (ranges, annulus)
    } else if let Some((_, ranges, annulus, _)) = default {
        (ranges, annulus)
    } else {
        return Err(CliError::usage("a surface file needs --box or --annulus"));
    };
    let box_dims = if annulus.is_some() { 2 * n - 2 } else { 2 * n };
    if ranges.len() != box_dims {
        return Err(CliError::usage(format!(
            "expected {box_dims} --box ranges for n = {n}{}, got {}",
            if annulus.is_some() { " with --annulus" } else { "" },
            ranges.len()
        )));
    }
    let lo: Vec<f64> = ranges.iter().map(|r| r.0).collect();
    let hi: Vec<f64> = ranges.iter().map(|r| r.1).collect();
    let domain = match annulus {
        Some((inner, outer)) => Domain::Annulus { inner, outer, lo, hi },
        None => Domain::Box { lo, hi },
    };
    Patch::new(axis, domain, guess).map_err(CliError::from)
}
