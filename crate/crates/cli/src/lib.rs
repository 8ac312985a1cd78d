//! Experiment front end for `weylwalk`.
//!
//! Every command turns a resolved [`Config`] into [`Table`]s, which the binary
//! writes as CSV or JSON. Keeping the commands free of I/O lets tests call
//! them directly.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num::{BigRational, One};
use weylwalk::conditioning::{
    convergence_series, doubling_horizons, finite_horizon_rows, psi_points, psi_series, tail_fit, Precision,
};
use weylwalk::montecarlo::{estimate_survival, simulate_conditioned, simulate_walk, successor_frequencies};
use weylwalk::parse::{format_rational, parse_config, parse_weight};
use weylwalk::reps::{build_minuscule, minuscule_weights};
use weylwalk::walk::{
    conditioned_character_row, kernel_drifted, kernel_zero_drift, step_distribution, Theta,
};
use weylwalk::{build_root_system, Family, KernelRow, MinusculeRep, Prob, RootSystem, Weight};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Lib(#[from] weylwalk::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("output error: {0}")]
    Output(String),
}

impl CliError {
    /// 0 success, 2 configuration, 3 resource cap, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        use weylwalk::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Lib(e) if e.is_resource_cap() => 3,
            CliError::Lib(
                E::UnsupportedType { .. }
                | E::NotMinuscule { .. }
                | E::NotDominant(_)
                | E::NotInRootSpan(_)
                | E::DimensionMismatch { .. }
                | E::NotInLattice(_)
                | E::NonPositiveTheta
                | E::ThetaLength { .. }
                | E::DriftNotInterior
                | E::HorizonTooShort { .. }
                | E::Parse(_),
            ) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "weylwalk", version, about = "Conditioned random walks on weight lattices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Root system data and minuscule weights.
    Describe,
    /// Step law on P(δ).
    Steps,
    /// One conditioned transition row.
    Kernel,
    /// Finite-horizon rows against their limit.
    Convergence,
    /// Drifted rows as θ → 1 against the zero-drift row.
    ThetaSweep,
    /// Log-log slope of the survival probability.
    TailFit,
    /// Finite-horizon rows at a boundary θ against the character-ratio row.
    BoundarySweep,
    /// Monte Carlo trajectory and comparison with the exact values.
    Simulate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Raw flags; every field overrides the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// key=value file with the same keys as the flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub family: Option<String>,
    #[arg(long, global = true)]
    pub rank: Option<String>,
    /// Index of the minuscule fundamental weight δ.
    #[arg(long, global = true)]
    pub minuscule: Option<String>,
    /// Comma-separated rationals, e.g. 1/2,1/3,1/5.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub theta: Option<String>,
    /// ε-coordinates, `0`, `delta` or `omega<i>`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub start: Option<String>,
    #[arg(long, global = true)]
    pub n: Option<String>,
    #[arg(long = "n-max", global = true)]
    pub n_max: Option<String>,
    #[arg(long, global = true)]
    pub trials: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<String>,
    #[arg(long, global = true)]
    pub mode: Option<String>,
    #[arg(long, global = true)]
    pub format: Option<String>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

const KEYS: [&str; 12] = [
    "family", "rank", "minuscule", "theta", "start", "n", "n-max", "trials", "seed", "mode", "format", "out",
];

impl Flags {
    fn get(&self, key: &str) -> Option<String> {
        match key {
            "family" => self.family.clone(),
            "rank" => self.rank.clone(),
            "minuscule" => self.minuscule.clone(),
            "theta" => self.theta.clone(),
            "start" => self.start.clone(),
            "n" => self.n.clone(),
            "n-max" => self.n_max.clone(),
            "trials" => self.trials.clone(),
            "seed" => self.seed.clone(),
            "mode" => self.mode.clone(),
            "format" => self.format.clone(),
            "out" => self.out.as_ref().map(|p| p.display().to_string()),
            _ => None,
        }
    }
}

/// A validated experiment configuration.
#[derive(Debug, Clone)]
pub struct Config {
    pub rs: RootSystem,
    pub rep: MinusculeRep,
    pub theta: Theta,
    pub theta_given: bool,
    pub start: Option<Weight>,
    pub n: Option<usize>,
    pub n_max: Option<usize>,
    pub trials: usize,
    pub seed: u64,
    pub mode: Option<String>,
    pub format: Format,
    pub out: Option<PathBuf>,
}

fn cfg_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| cfg_err(format!("{key}: cannot parse '{v}'")))
}

impl Config {
    /// Merges the optional config file with the flags and validates the result.
    pub fn resolve(flags: &Flags) -> Result<Config> {
        let mut values: Vec<(String, String)> = Vec::new();
        if let Some(path) = &flags.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| cfg_err(format!("cannot read {}: {e}", path.display())))?;
            for (k, v) in parse_config(&text).map_err(|e| cfg_err(e.to_string()))? {
                if !KEYS.contains(&k.as_str()) {
                    return Err(cfg_err(format!("unknown key '{k}' in {}", path.display())));
                }
                values.retain(|(key, _)| key != &k);
                values.push((k, v));
            }
        }
        let get = |key: &str| -> Option<String> {
            flags
                .get(key)
                .or_else(|| values.iter().find(|(k, _)| k == key).map(|(_, v)| v.clone()))
        };

        let family_text = get("family").unwrap_or_else(|| "B".into());
        let family_text = family_text.trim();
        // "E6" style labels carry the rank.
        let (letter, suffix) = family_text.split_at(family_text.len().min(1));
        let family: Family = letter
            .parse()
            .map_err(|e: weylwalk::Error| cfg_err(e.to_string()))?;
        let suffix_rank = (!suffix.is_empty())
            .then(|| parse_num::<usize>("family", suffix))
            .transpose()?;
        let rank: usize = match (get("rank"), suffix_rank) {
            (Some(r), Some(s)) => {
                let r = parse_num("rank", &r)?;
                if r != s {
                    return Err(cfg_err(format!("family {family_text} conflicts with rank {r}")));
                }
                r
            }
            (Some(r), None) => parse_num("rank", &r)?,
            (None, Some(s)) => s,
            (None, None) => 3,
        };
        let rs = build_root_system(family, rank)?;
        let minuscule = match get("minuscule") {
            Some(i) => parse_num("minuscule", &i)?,
            None => *minuscule_weights(&rs)
                .first()
                .ok_or_else(|| cfg_err("type has no minuscule weight"))?,
        };
        let rep = build_minuscule(&rs, minuscule)?;
        let theta_given = get("theta").is_some();
        let theta = match get("theta") {
            Some(t) => t.parse::<Theta>()?,
            None => Theta::ones(rs.rank),
        };
        if theta.len() != rs.rank {
            return Err(weylwalk::Error::ThetaLength {
                expected: rs.rank,
                got: theta.len(),
            }
            .into());
        }
        let start = get("start").map(|s| parse_start(&rs, &rep, &s)).transpose()?;
        if let Some(w) = &start {
            if !rs.is_dominant(w) {
                return Err(weylwalk::Error::NotDominant(w.to_string()).into());
            }
            rs.integer_labels(w)?;
        }
        let opt_num = |key: &str| -> Result<Option<usize>> {
            get(key).map(|v| parse_num(key, &v)).transpose()
        };
        let format = match get("format").as_deref() {
            None | Some("csv") => Format::Csv,
            Some("json") => Format::Json,
            Some(other) => return Err(cfg_err(format!("format must be csv or json, got '{other}'"))),
        };
        let trials = opt_num("trials")?.unwrap_or(100_000);
        if trials == 0 {
            return Err(cfg_err("trials must be positive"));
        }
        Ok(Config {
            rs,
            rep,
            theta,
            theta_given,
            start,
            n: opt_num("n")?,
            n_max: opt_num("n-max")?,
            trials,
            seed: get("seed").map(|v| parse_num("seed", &v)).transpose()?.unwrap_or(0),
            mode: get("mode"),
            format,
            out: get("out").map(PathBuf::from),
        })
    }

    fn start_or(&self, default: &Weight) -> Weight {
        self.start.clone().unwrap_or_else(|| default.clone())
    }

    fn zero(&self) -> Weight {
        Weight::zero(self.rs.ambient_dim)
    }

    fn mode_in(&self, allowed: &[&str], default: &str) -> Result<String> {
        let mode = self.mode.clone().unwrap_or_else(|| default.to_string());
        if allowed.contains(&mode.as_str()) {
            Ok(mode)
        } else {
            Err(cfg_err(format!("mode must be one of {}, got '{mode}'", allowed.join("|"))))
        }
    }

    fn horizons(&self) -> Result<Vec<usize>> {
        let n = self.n.unwrap_or(25);
        let n_max = self.n_max.unwrap_or(400);
        if n < 2 || n_max < n {
            return Err(cfg_err(format!("need 2 <= n <= n-max, got n={n}, n-max={n_max}")));
        }
        Ok(doubling_horizons(n, n_max))
    }
}

fn parse_start(rs: &RootSystem, rep: &MinusculeRep, s: &str) -> Result<Weight> {
    let t = s.trim();
    if t == "0" {
        return Ok(Weight::zero(rs.ambient_dim));
    }
    if t == "delta" {
        return Ok(rep.delta.clone());
    }
    if let Some(i) = t.strip_prefix("omega") {
        let i: usize = parse_num("start", i)?;
        if i == 0 || i > rs.rank {
            return Err(cfg_err(format!("start: no fundamental weight omega{i}")));
        }
        return Ok(rs.fundamental_weight(i).clone());
    }
    let w = parse_weight(t)?;
    if w.dim() != rs.ambient_dim {
        return Err(weylwalk::Error::DimensionMismatch {
            expected: rs.ambient_dim,
            got: w.dim(),
        }
        .into());
    }
    Ok(w)
}

/// A rectangular result with a header row.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(headers: &[&str]) -> Self {
        Table {
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let i = self.headers.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i].as_str()).collect())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.headers).map_err(|e| CliError::Output(e.to_string()))?;
        for r in &self.rows {
            w.write_record(r).map_err(|e| CliError::Output(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Output(e.to_string()))
    }

    /// An array of objects keyed by the CSV headers, values as in the CSV.
    pub fn to_json(&self) -> Result<String> {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|r| {
                let obj: serde_json::Map<String, serde_json::Value> = self
                    .headers
                    .iter()
                    .cloned()
                    .zip(r.iter().map(|v| serde_json::Value::String(v.clone())))
                    .collect();
                serde_json::Value::Object(obj)
            })
            .collect();
        let mut s = serde_json::to_string_pretty(&rows).map_err(|e| CliError::Output(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

/// What a command produces: the main table (written to `--out` or stdout)
/// and an optional report that always goes to stdout.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub table: Table,
    pub report: Option<Table>,
}

impl From<Table> for Output {
    fn from(table: Table) -> Self {
        Output { table, report: None }
    }
}

fn f(x: f64) -> String {
    format!("{x}")
}

fn exact(p: &Prob) -> String {
    p.exact_string()
}

pub fn run(command: Command, cfg: &Config) -> Result<Output> {
    match command {
        Command::Describe => cmd_describe(cfg).map(Into::into),
        Command::Steps => cmd_steps(cfg).map(Into::into),
        Command::Kernel => cmd_kernel(cfg).map(Into::into),
        Command::Convergence => cmd_convergence(cfg).map(Into::into),
        Command::ThetaSweep => cmd_theta_sweep(cfg).map(Into::into),
        Command::TailFit => cmd_tailfit(cfg).map(Into::into),
        Command::BoundarySweep => cmd_boundary_sweep(cfg).map(Into::into),
        Command::Simulate => cmd_simulate(cfg),
    }
}

pub fn cmd_describe(cfg: &Config) -> Result<Table> {
    let rs = &cfg.rs;
    let mut t = Table::new(&["field", "index", "value"]);
    let mut add = |field: &str, index: usize, value: String| {
        t.push(vec![field.into(), index.to_string(), value]);
    };
    add("family", 0, rs.family.to_string());
    add("rank", 0, rs.rank.to_string());
    add("ambient_dim", 0, rs.ambient_dim.to_string());
    add("weyl_group_order", 0, rs.group_order().to_string());
    for (i, a) in rs.simple_roots.iter().enumerate() {
        add("simple_root", i + 1, a.to_string());
    }
    for (i, w) in rs.fundamental_weights.iter().enumerate() {
        add("fundamental_weight", i + 1, w.to_string());
    }
    add("positive_root_count", 0, rs.positive_roots.len().to_string());
    for (i, a) in rs.positive_roots.iter().enumerate() {
        add("positive_root", i + 1, a.to_string());
    }
    for i in minuscule_weights(rs) {
        add("minuscule_dim", i, build_minuscule(rs, i)?.dim().to_string());
    }
    Ok(t)
}

fn monomial(m: &[u32]) -> String {
    let parts: Vec<String> = m
        .iter()
        .enumerate()
        .filter(|(_, &k)| k > 0)
        .map(|(i, &k)| if k == 1 { format!("t{}", i + 1) } else { format!("t{}^{k}", i + 1) })
        .collect();
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join("*")
    }
}

pub fn cmd_steps(cfg: &Config) -> Result<Table> {
    let sd = step_distribution(&cfg.rep, &cfg.theta)?;
    let mut t = Table::new(&["step", "exponents", "monomial", "p_exact", "p_decimal"]);
    for ((s, m), p) in cfg.rep.steps.iter().zip(cfg.rep.step_exponents()).zip(&sd.probs) {
        let exps: Vec<String> = m.iter().map(|k| k.to_string()).collect();
        t.push(vec![
            s.to_string(),
            exps.join(","),
            monomial(m),
            format_rational(p),
            f(weylwalk::prob::rational_to_f64(p)),
        ]);
    }
    Ok(t)
}

fn row_table(row: &KernelRow) -> Table {
    let mut t = Table::new(&["source", "target", "p_exact", "p_decimal"]);
    for (w, p) in &row.entries {
        t.push(vec![row.source.to_string(), w.to_string(), exact(p), f(p.to_f64())]);
    }
    let total = row.total();
    t.push(vec![row.source.to_string(), "sum".into(), exact(&total), f(total.to_f64())]);
    t
}

/// The limit row the finite-horizon rows are compared against.
fn reference_row(cfg: &Config, lam: &Weight) -> Result<KernelRow> {
    if cfg.theta.is_one() {
        Ok(kernel_zero_drift(&cfg.rep, lam)?)
    } else if cfg.theta.is_interior() {
        Ok(kernel_drifted(&cfg.rep, &cfg.theta, lam)?)
    } else {
        Ok(conditioned_character_row(&cfg.rep, &cfg.theta, lam)?)
    }
}

pub fn cmd_kernel(cfg: &Config) -> Result<Table> {
    let lam = cfg.start_or(&cfg.rep.delta);
    let default = if cfg.theta.is_one() {
        "zero"
    } else if cfg.theta.is_interior() {
        "drifted"
    } else {
        "finite"
    };
    let row = match cfg.mode_in(&["drifted", "zero", "finite"], default)?.as_str() {
        "zero" => kernel_zero_drift(&cfg.rep, &lam)?,
        "drifted" => kernel_drifted(&cfg.rep, &cfg.theta, &lam)?,
        _ => {
            let n = cfg.n.unwrap_or(25);
            finite_horizon_rows(&cfg.rep, &cfg.theta, &lam, &[n], Precision::Auto)?
                .pop()
                .expect("one horizon")
        }
    };
    Ok(row_table(&row))
}

fn precision_label(theta: &Theta, n: usize) -> &'static str {
    let limit = if theta.is_one() {
        weylwalk::conditioning::AUTO_EXACT_HORIZON
    } else {
        weylwalk::conditioning::AUTO_EXACT_HORIZON_DRIFTED
    };
    if n <= limit {
        "exact"
    } else {
        "float"
    }
}

pub fn cmd_convergence(cfg: &Config) -> Result<Table> {
    let lam = cfg.start_or(&cfg.rep.delta);
    let horizons = cfg.horizons()?;
    let reference = reference_row(cfg, &lam)?;
    let series = convergence_series(&cfg.rep, &cfg.theta, &lam, &horizons, &reference, Precision::Auto)?;
    let label = precision_label(&cfg.theta, *horizons.last().unwrap_or(&0));
    let mut t = Table::new(&["n", "tv_distance", "tv_aitken", "precision"]);
    for p in series {
        t.push(vec![
            p.n.to_string(),
            f(p.tv),
            p.aitken_tv.map(f).unwrap_or_default(),
            label.into(),
        ]);
    }
    Ok(t)
}

pub fn cmd_theta_sweep(cfg: &Config) -> Result<Table> {
    let lam = cfg.start_or(&cfg.rep.delta);
    let d = cfg.rs.rank;
    let zero = kernel_zero_drift(&cfg.rep, &lam)?;
    let points: Vec<(String, Theta)> = if cfg.theta_given {
        vec![("0".into(), cfg.theta.clone())]
    } else {
        let k_max = cfg.n.unwrap_or(10) as u32;
        (1..=k_max)
            .map(|k| Ok((k.to_string(), Theta::toward_one(d, &BigRational::from_integer(0.into()), k)?)))
            .collect::<weylwalk::Result<_>>()?
    };
    let mut t = Table::new(&["k", "theta", "tv_distance"]);
    for (k, theta) in points {
        let row = kernel_drifted(&cfg.rep, &theta, &lam)?;
        t.push(vec![k, theta.to_string(), f(row.tv_distance(&zero))]);
    }
    Ok(t)
}

/// Windows `[N/4, N/2]`, `[N/2, N]` and `[N/4, N]`.
fn tail_windows(n: usize) -> [(usize, usize); 3] {
    [(n / 4, n / 2), (n / 2, n), (n / 4, n)]
}

pub fn cmd_tailfit(cfg: &Config) -> Result<Table> {
    let n = cfg.n_max.unwrap_or(400);
    let series: Vec<(usize, f64)> = match cfg.mode_in(&["dp", "synthetic"], "dp")?.as_str() {
        "synthetic" => (1..=n).map(|k| (k, (k as f64).powi(-2))).collect(),
        _ => {
            let lam = cfg.start_or(&cfg.zero());
            let psi = psi_series(&cfg.rep, &cfg.theta, &[lam], n, Precision::Auto)?;
            psi_points(&psi[0])
        }
    };
    let mut t = Table::new(&["window_lo", "window_hi", "points", "slope", "intercept", "max_residual"]);
    for (lo, hi) in tail_windows(n) {
        let fit = tail_fit(&series, lo, hi)?;
        t.push(vec![
            lo.to_string(),
            hi.to_string(),
            fit.points.to_string(),
            f(fit.slope),
            f(fit.intercept),
            f(fit.max_residual),
        ]);
    }
    Ok(t)
}

pub fn cmd_boundary_sweep(cfg: &Config) -> Result<Table> {
    let lam = cfg.start_or(&cfg.rep.delta);
    let theta = if cfg.theta_given {
        cfg.theta.clone()
    } else {
        let mut v = vec![BigRational::new(1.into(), 2.into()); cfg.rs.rank];
        v[0] = BigRational::one();
        Theta::new(v)?
    };
    if theta.values().iter().any(|t| *t > BigRational::one()) {
        return Err(cfg_err("boundary-sweep needs every theta_i <= 1"));
    }
    let horizons = cfg.horizons()?;
    let conjectured = conditioned_character_row(&cfg.rep, &theta, &lam)?;
    let rows = finite_horizon_rows(&cfg.rep, &theta, &lam, &horizons, Precision::Auto)?;
    let mut t = Table::new(&[
        "n",
        "target",
        "finite_decimal",
        "conjectured_exact",
        "conjectured_decimal",
        "difference",
        "tv_distance",
    ]);
    for (&n, row) in horizons.iter().zip(&rows) {
        let tv = row.tv_distance(&conjectured);
        for (w, p) in &row.entries {
            let c = conjectured.probability(w).cloned().unwrap_or_else(Prob::zero);
            t.push(vec![
                n.to_string(),
                w.to_string(),
                f(p.to_f64()),
                exact(&c),
                f(c.to_f64()),
                f(p.to_f64() - c.to_f64()),
                f(tv),
            ]);
        }
    }
    Ok(t)
}

pub fn cmd_simulate(cfg: &Config) -> Result<Output> {
    let n = cfg.n.unwrap_or(20);
    let sd = step_distribution(&cfg.rep, &cfg.theta)?;
    let mut traj_table = Table::new(&["step", "weight", "dominant"]);
    let report = match cfg.mode_in(&["walk", "conditioned"], "walk")?.as_str() {
        "conditioned" => {
            let start = cfg.start_or(&cfg.zero());
            let rep = cfg.rep.clone();
            let cfg2 = cfg.clone();
            let provider = move |w: &Weight| -> weylwalk::Result<KernelRow> {
                if cfg2.theta.is_one() {
                    kernel_zero_drift(&rep, w)
                } else {
                    kernel_drifted(&rep, &cfg2.theta, w)
                }
            };
            let traj = simulate_conditioned(&provider, &start, n, cfg.seed)?;
            for (k, p) in traj.points.iter().enumerate() {
                traj_table.push(vec![k.to_string(), p.to_string(), "true".into()]);
            }
            let at = cfg.rep.delta.clone();
            let expected = provider(&at)?;
            let (targets, counts) =
                successor_frequencies(&provider, &cfg.zero(), &at, 2, cfg.trials, cfg.seed)?;
            let total: u64 = counts.iter().sum();
            let mut r = Table::new(&["source", "target", "count", "empirical", "expected", "z_score"]);
            for (w, c) in targets.iter().zip(&counts) {
                let p = expected.probability(w).map(Prob::to_f64).unwrap_or(0.0);
                let emp = *c as f64 / total as f64;
                let sigma = (p * (1.0 - p) / total as f64).sqrt();
                r.push(vec![at.to_string(), w.to_string(), c.to_string(), f(emp), f(p), f((emp - p) / sigma)]);
            }
            r
        }
        _ => {
            let start = cfg.start_or(&cfg.zero());
            let traj = simulate_walk(&sd, &start, n, cfg.seed);
            for (k, p) in traj.points.iter().enumerate() {
                let dominant = traj.exited_at.map_or(true, |e| k < e);
                traj_table.push(vec![k.to_string(), p.to_string(), dominant.to_string()]);
            }
            let (est, se) = estimate_survival(&sd, &start, n, cfg.trials, cfg.seed)?;
            let psi = psi_series(&cfg.rep, &cfg.theta, &[start.clone()], n, Precision::Auto)?;
            let exact_psi = &psi[0][n];
            let mut r = Table::new(&[
                "start", "n", "trials", "seed", "estimate", "std_error", "psi_exact", "psi_decimal", "z_score",
            ]);
            let z = if se > 0.0 { (est - exact_psi.to_f64()) / se } else { 0.0 };
            r.push(vec![
                start.to_string(),
                n.to_string(),
                cfg.trials.to_string(),
                cfg.seed.to_string(),
                f(est),
                f(se),
                exact(exact_psi),
                f(exact_psi.to_f64()),
                f(z),
            ]);
            r
        }
    };
    Ok(Output {
        table: traj_table,
        report: Some(report),
    })
}

/// Renders and writes an output; returns what goes to stdout.
pub fn emit(output: &Output, cfg: &Config) -> Result<String> {
    let main = output.table.render(cfg.format)?;
    let mut stdout = String::new();
    match &cfg.out {
        Some(path) => std::fs::write(path, &main)?,
        None => stdout.push_str(&main),
    }
    if let Some(report) = &output.report {
        if !stdout.is_empty() {
            stdout.push('\n');
        }
        let _ = write!(stdout, "{}", report.render(cfg.format)?);
    }
    Ok(stdout)
}

/// Used by the binary: parse, run, write. Returns the process exit code.
pub fn main_with(cli: Cli) -> i32 {
    let result = Config::resolve(&cli.flags)
        .and_then(|cfg| run(cli.command, &cfg).and_then(|out| emit(&out, &cfg)));
    match result {
        Ok(stdout) => {
            print!("{stdout}");
            0
        }
        Err(e) => {
            eprintln!("weylwalk: {e}");
            e.exit_code()
        }
    }
}
