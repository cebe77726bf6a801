//! Command-line surface: loads a model, computes spectra, runs the brute-force
//! cross-checks, and writes plot-ready text files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::coarse::{coarse_on, CoarseCount};
use crate::duality::ExtendedReal;
use crate::error::{Error, Result};
use crate::format::fmt_f64;
use crate::geometry::{Geometric1D, Interval, Radius};
use crate::info::{cross_entropy, kl_divergence, lyapunov};
use crate::lq::{asymptotes, tau, tau_prime, variational_objective, variational_tau_grid, AsymptoteData};
use crate::model::IfsModel;
use crate::multifractal::{dim_attractor, f_alpha, spectrum_curve};
use crate::roots::similarity_dimension;
use crate::section::{empirical_tau_on, enumerate_section};
use crate::simplex::ProbabilityVector;

/// Upper limit on q-grid length.
pub const MAX_GRID_POINTS: usize = 1_000_000;

/// Grid points are snapped to multiples of `1/GRID_SCALE`, so `−10 + 110·0.1`
/// prints as `1`.
const GRID_SCALE: f64 = 1e9;

/// `q` values at which `check` compares section moment sums with `τ`.
pub const EMPIRICAL_Q: [f64; 5] = [-2.0, 0.0, 1.0, 2.0, 4.0];

/// Number of random `(q, w)` pairs in the KL spot check.
pub const KL_SPOT_CHECKS: usize = 100;

/// Default scale exponents for `sample`: `r_max^k`.
pub const SAMPLE_SCALE_EXPONENTS: [f64; 6] = [10.0, 30.0, 100.0, 300.0, 1000.0, 3000.0];

#[derive(Debug, Parser)]
#[command(name = "selfsim", version, about = "Spectra of self-similar measures with brute-force cross-checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write (q, τ(q)) to lq_points.txt with asymptote data in lq_meta.json
    Tau(CurveArgs),
    /// Write (α, f(α)) to multifractal_points.txt with marked points in multifractal_meta.json
    Spectrum(CurveArgs),
    /// Compare τ with its brute-force oracles; exit 1 on any gap over tolerance
    Check(CheckArgs),
    /// Sample points of the geometric realization and report local dimensions
    Sample(SampleArgs),
    /// Write the words of one section with their ratios and weights
    SectionDump(SectionArgs),
    /// Count section words in the band r^(α+ε) ≤ p ≤ r^(α−ε)
    Coarse(CoarseArgs),
}

#[derive(Debug, Clone, Args)]
pub struct IoArgs {
    /// Model JSON: {"ratios": [...], "probs": [...], "translations": [...]}
    #[arg(long)]
    pub model: PathBuf,
    /// Output directory, created if missing
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    #[arg(long, default_value_t = -10.0, allow_negative_numbers = true)]
    pub q_min: f64,
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    pub q_max: f64,
    #[arg(long, default_value_t = 0.1)]
    pub q_step: f64,
}

#[derive(Debug, Clone, Args)]
pub struct CurveArgs {
    #[command(flatten)]
    pub io: IoArgs,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub io: IoArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Comma-separated decreasing scales in (0,1); entries like `3^-12` allowed
    #[arg(long)]
    pub scales: Option<String>,
    /// Comma-separated α values for the coarse check
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<String>,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    /// Denominator of the simplex grid oracle
    #[arg(long, default_value_t = 128)]
    pub grid_n: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Tolerance override `name=value`; repeatable
    #[arg(long)]
    pub tolerance: Vec<String>,
}

#[derive(Debug, Clone, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub io: IoArgs,
    /// Comma-separated letter weights; defaults to the model weights
    #[arg(long)]
    pub sampler: Option<String>,
    #[arg(long, default_value_t = 10_000)]
    pub depth: usize,
    #[arg(long, default_value_t = 1)]
    pub points: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub scales: Option<String>,
    #[arg(long)]
    pub tolerance: Vec<String>,
}

#[derive(Debug, Clone, Args)]
pub struct SectionArgs {
    #[command(flatten)]
    pub io: IoArgs,
    /// A single scale; defaults to r_max^8
    #[arg(long)]
    pub scales: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct CoarseArgs {
    #[command(flatten)]
    pub io: IoArgs,
    #[arg(long)]
    pub scales: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<String>,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
}

/// Result of a command that ran to completion.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Pass,
    /// Some oracle gap exceeded its tolerance; carries the worst row.
    OracleFailure(String),
}

/// Process exit code for an error: 3 for SSC violations, 1 for failed
/// internal cross-checks, 2 for bad input.
pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::SscViolation { .. } => 3,
        Error::Integrity(_) | Error::RootFinding(_) => 1,
        _ => 2,
    }
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Tau(a) => cmd_tau(a),
        Command::Spectrum(a) => cmd_spectrum(a),
        Command::Check(a) => cmd_check(a),
        Command::Sample(a) => cmd_sample(a),
        Command::SectionDump(a) => cmd_section_dump(a),
        Command::Coarse(a) => cmd_coarse(a),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub grid: f64,
    pub empirical: f64,
    pub coarse: f64,
    pub kl: f64,
    pub tau1: f64,
    pub tau0: f64,
    pub duality: f64,
    pub local: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { grid: 5e-3, empirical: 0.1, coarse: 0.15, kl: 1e-9, tau1: 1e-12, tau0: 1e-10, duality: 1e-9, local: 0.05 }
    }
}

impl Tolerances {
    pub fn with_overrides(overrides: &[String]) -> Result<Self> {
        let mut t = Self::default();
        for o in overrides {
            let (name, value) =
                o.split_once('=').ok_or_else(|| Error::InvalidArgument(format!("tolerance `{o}` is not name=value")))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("tolerance `{o}` has a non-numeric value")))?;
            if !(value >= 0.0) {
                return Err(Error::InvalidArgument(format!("tolerance `{o}` must be nonnegative")));
            }
            let slot = match name.trim() {
                "grid" => &mut t.grid,
                "empirical" => &mut t.empirical,
                "coarse" => &mut t.coarse,
                "kl" => &mut t.kl,
                "tau1" => &mut t.tau1,
                "tau0" => &mut t.tau0,
                "duality" => &mut t.duality,
                "local" => &mut t.local,
                other => return Err(Error::InvalidArgument(format!("unknown tolerance `{other}`"))),
            };
            *slot = value;
        }
        Ok(t)
    }
}

/// `q_min, q_min + step, …` up to `q_max`, snapped to a fixed lattice.
pub fn q_grid(g: &GridArgs) -> Result<Vec<f64>> {
    if !(g.q_min.is_finite() && g.q_max.is_finite() && g.q_step > 0.0 && g.q_step.is_finite()) {
        return Err(Error::InvalidArgument("q grid needs finite bounds and a positive step".into()));
    }
    if g.q_max < g.q_min {
        return Err(Error::InvalidArgument(format!("q-max {} is below q-min {}", g.q_max, g.q_min)));
    }
    let steps = ((g.q_max - g.q_min) / g.q_step + 1e-9).floor();
    if steps + 1.0 > MAX_GRID_POINTS as f64 {
        return Err(Error::ResourceLimit { what: "q grid points", count: steps + 1.0, limit: MAX_GRID_POINTS as f64 });
    }
    let mut grid: Vec<f64> = (0..=steps as usize)
        .map(|i| {
            let q = ((g.q_min + i as f64 * g.q_step) * GRID_SCALE).round() / GRID_SCALE;
            if q == 0.0 {
                0.0
            } else {
                q
            }
        })
        .collect();
    grid.dedup();
    Ok(grid)
}

/// Parses `0.01`, `1e-3` or `3^-12` into a radius.
pub fn parse_scale(s: &str) -> Result<Radius> {
    let s = s.trim();
    let bad = || Error::InvalidArgument(format!("cannot parse scale `{s}`"));
    match s.split_once('^') {
        Some((base, exp)) => {
            let base: f64 = base.trim().parse().map_err(|_| bad())?;
            let exp: f64 = exp.trim().parse().map_err(|_| bad())?;
            Radius::power(base, exp)
        }
        None => Radius::new(s.parse().map_err(|_| bad())?),
    }
}

/// Comma-separated scales, strictly decreasing inside `(0, 1)`.
pub fn parse_scales(s: &str) -> Result<Vec<Radius>> {
    let scales = s.split(',').map(parse_scale).collect::<Result<Vec<_>>>()?;
    check_schedule(&scales)?;
    Ok(scales)
}

fn check_schedule(scales: &[Radius]) -> Result<()> {
    if scales.is_empty() {
        return Err(Error::InvalidArgument("empty scale schedule".into()));
    }
    if scales.iter().any(|r| r.ln() >= 0.0) {
        return Err(Error::InvalidArgument("scales must lie in (0, 1)".into()));
    }
    if scales.windows(2).any(|w| w[1].ln() >= w[0].ln()) {
        return Err(Error::InvalidArgument("scales must be strictly decreasing".into()));
    }
    Ok(())
}

/// `r_max^k`, `k = 4..=12`.
pub fn default_schedule(model: &IfsModel) -> Result<Vec<Radius>> {
    (4..=12).map(|k| Radius::power(model.max_ratio(), f64::from(k))).collect()
}

fn float_scales(scales: &[Radius]) -> Result<Vec<f64>> {
    scales
        .iter()
        .map(|r| {
            let v = r.value();
            if v > 0.0 {
                Ok(v)
            } else {
                Err(Error::InvalidArgument(format!("scale e^{} underflows", r.ln())))
            }
        })
        .collect()
}

fn parse_list(s: &str, what: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| Error::InvalidArgument(format!("cannot parse {what} `{x}`"))))
        .collect()
}

/// Five α evenly spaced strictly inside `(κ_min, κ_max)`; the single point
/// for a degenerate spectrum.
pub fn default_alphas(a: &AsymptoteData) -> Vec<f64> {
    if a.is_degenerate() {
        return vec![a.kappa_min];
    }
    (1..=5).map(|j| a.kappa_min + f64::from(j) / 6.0 * (a.kappa_max - a.kappa_min)).collect()
}

fn load(io: &IoArgs) -> Result<IfsModel> {
    let model = IfsModel::from_path(&io.model)?;
    fs::create_dir_all(&io.out)?;
    Ok(model)
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::write(dir.join(name), contents)?;
    Ok(())
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write(dir, name, &text)
}

fn fmt_ext(x: ExtendedReal) -> String {
    match x {
        ExtendedReal::Finite(v) => fmt_f64(v),
        ExtendedReal::NegInfinity => "-inf".into(),
    }
}

#[derive(Serialize)]
struct Line {
    slope: f64,
    intercept: f64,
}

#[derive(Serialize)]
struct LqMeta {
    kappa: Vec<f64>,
    kappa_min: f64,
    kappa_max: f64,
    s_min: f64,
    s_max: f64,
    asymptote_plus_inf: Line,
    asymptote_minus_inf: Line,
    marked_points: Vec<(f64, f64)>,
    q_min: f64,
    q_max: f64,
    q_step: f64,
    points: usize,
}

pub fn cmd_tau(args: &CurveArgs) -> Result<Outcome> {
    let model = load(&args.io)?;
    let grid = q_grid(&args.grid)?;
    let values = grid.par_iter().map(|&q| Ok((q, tau(&model, q)?.tau))).collect::<Result<Vec<_>>>()?;
    let mut text = String::new();
    for (q, t) in &values {
        writeln!(text, "{} {}", fmt_f64(*q), fmt_f64(*t)).expect("string write");
    }
    write(&args.io.out, "lq_points.txt", &text)?;

    let a = asymptotes(&model)?;
    let meta = LqMeta {
        kappa: a.kappa.clone(),
        kappa_min: a.kappa_min,
        kappa_max: a.kappa_max,
        s_min: a.s_min,
        s_max: a.s_max,
        asymptote_plus_inf: Line { slope: a.kappa_min, intercept: -a.s_min },
        asymptote_minus_inf: Line { slope: a.kappa_max, intercept: -a.s_max },
        marked_points: vec![(1.0, tau(&model, 1.0)?.tau), (0.0, tau(&model, 0.0)?.tau)],
        q_min: args.grid.q_min,
        q_max: args.grid.q_max,
        q_step: args.grid.q_step,
        points: values.len(),
    };
    write_json(&args.io.out, "lq_meta.json", &meta)?;
    Ok(Outcome::Pass)
}

#[derive(Serialize)]
struct SpectrumMeta {
    left_endpoint: (f64, f64),
    right_endpoint: (f64, f64),
    dim_measure: f64,
    dim_attractor: f64,
    alpha_at_q0: f64,
    degenerate: bool,
    rows: usize,
}

pub fn cmd_spectrum(args: &CurveArgs) -> Result<Outcome> {
    let model = load(&args.io)?;
    let curve = spectrum_curve(&model, &q_grid(&args.grid)?)?;
    let rows = curve.plot_rows();
    let mut text = String::new();
    for (alpha, f) in &rows {
        writeln!(text, "{} {}", fmt_f64(*alpha), fmt_f64(*f)).expect("string write");
    }
    write(&args.io.out, "multifractal_points.txt", &text)?;
    let meta = SpectrumMeta {
        left_endpoint: curve.left_endpoint,
        right_endpoint: curve.right_endpoint,
        dim_measure: curve.dim_measure,
        dim_attractor: curve.dim_attractor,
        alpha_at_q0: tau_prime(&model, 0.0)?,
        degenerate: curve.degenerate,
        rows: rows.len(),
    };
    write_json(&args.io.out, "multifractal_meta.json", &meta)?;
    Ok(Outcome::Pass)
}

/// One line of the `check` report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRow {
    pub check: String,
    pub detail: String,
    pub observed: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckRow {
    fn new(check: &str, detail: String, observed: f64, tolerance: f64) -> Self {
        Self { check: check.into(), detail, observed, tolerance, pass: observed <= tolerance }
    }

    /// How far over tolerance, for picking the worst offender.
    fn severity(&self) -> f64 {
        if self.tolerance > 0.0 {
            self.observed / self.tolerance
        } else {
            f64::INFINITY
        }
    }

    fn render(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}\t{}",
            self.check,
            self.detail,
            fmt_f64(self.observed),
            fmt_f64(self.tolerance),
            if self.pass { "PASS" } else { "FAIL" }
        )
    }
}

/// All oracle comparisons of the `check` command.
pub fn check_rows(model: &IfsModel, args: &CheckArgs) -> Result<Vec<CheckRow>> {
    model.require_positive()?;
    let tol = Tolerances::with_overrides(&args.tolerance)?;
    let grid = q_grid(&args.grid)?;
    let scales = match &args.scales {
        Some(s) => parse_scales(s)?,
        None => default_schedule(model)?,
    };
    let scales = float_scales(&scales)?;
    let a = asymptotes(model)?;
    let mut rows = Vec::new();

    // simplex grid oracle: never below τ, and close to it
    let grid_rows = grid
        .par_iter()
        .map(|&q| Ok((q, tau(model, q)?.tau, variational_tau_grid(model, q, args.grid_n)?.value)))
        .collect::<Result<Vec<_>>>()?;
    let (q_low, below) = grid_rows
        .iter()
        .map(|&(q, t, g)| (q, (t - g).max(0.0)))
        .fold((grid[0], 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
    rows.push(CheckRow::new(
        "grid-above-tau",
        format!("n={} worst q={}", args.grid_n, fmt_f64(q_low)),
        below,
        1e-12,
    ));
    let (q_worst, gap) = grid_rows
        .iter()
        .map(|&(q, t, g)| (q, (g - t).abs()))
        .fold((grid[0], 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
    rows.push(CheckRow::new("grid-gap", format!("n={} worst q={}", args.grid_n, fmt_f64(q_worst)), gap, tol.grid));

    // section moment sums along the schedule
    let sections = scales.iter().map(|&r| enumerate_section(model, r)).collect::<Result<Vec<_>>>()?;
    for q in EMPIRICAL_Q {
        let t = tau(model, q)?.tau;
        let finest = sections.last().expect("nonempty schedule");
        let gap = (empirical_tau_on(finest, q) - t).abs();
        rows.push(CheckRow::new("empirical-tau", format!("q={} r={}", fmt_f64(q), fmt_f64(finest.scale)), gap, tol.empirical));
    }

    // coarse counts against the spectrum at the finest scale
    let alphas = match &args.alpha {
        Some(s) => parse_list(s, "alpha")?,
        None => default_alphas(&a),
    };
    let finest = sections.last().expect("nonempty schedule");
    for &alpha in &alphas {
        let c = coarse_on(finest, alpha, args.eps);
        let excess = match (c.estimate, f_alpha(model, alpha)?) {
            (ExtendedReal::NegInfinity, _) => f64::NEG_INFINITY,
            (ExtendedReal::Finite(_), ExtendedReal::NegInfinity) => f64::INFINITY,
            (ExtendedReal::Finite(e), ExtendedReal::Finite(f)) => e - f,
        };
        rows.push(CheckRow::new(
            "coarse-excess",
            format!("alpha={} eps={} r={}", fmt_f64(alpha), fmt_f64(args.eps), fmt_f64(finest.scale)),
            excess,
            tol.coarse,
        ));
    }

    // KL identity at seeded random (q, w)
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let (q_lo, q_hi) = (grid[0], *grid.last().expect("nonempty grid"));
    let mut worst = (0.0f64, 0.0f64);
    for _ in 0..KL_SPOT_CHECKS {
        let q = if q_hi > q_lo { rng.random_range(q_lo..=q_hi) } else { q_lo };
        let weights: Vec<f64> = (0..model.alphabet_size()).map(|_| rng.random_range(1e-3..1.0)).collect();
        let w = ProbabilityVector::normalize(weights)?;
        let sol = tau(model, q)?;
        let gap = (variational_objective(model, q, &w)? - sol.tau - kl_divergence(&w, &sol.z)? / lyapunov(&w, model)?)
            .abs();
        if gap > worst.1 {
            worst = (q, gap);
        }
    }
    rows.push(CheckRow::new("kl-identity", format!("{KL_SPOT_CHECKS} pairs worst q={}", fmt_f64(worst.0)), worst.1, tol.kl));

    // anchors and multifractal identities
    rows.push(CheckRow::new("tau-at-1", "|tau(1)|".into(), tau(model, 1.0)?.tau.abs(), tol.tau1));
    let s = similarity_dimension(model.ratios())?;
    rows.push(CheckRow::new("tau-at-0", "|tau(0) + dim|".into(), (tau(model, 0.0)?.tau + s).abs(), tol.tau0));
    let dim = dim_attractor(model)?;
    let f0 = f_alpha(model, tau_prime(model, 0.0)?)?.finite().unwrap_or(f64::NEG_INFINITY);
    rows.push(CheckRow::new("f-peak", "|f(tau'(0)) - dim|".into(), (f0 - dim).abs(), tol.duality));
    let a1 = tau_prime(model, 1.0)?;
    let f1 = f_alpha(model, a1)?.finite().unwrap_or(f64::NEG_INFINITY);
    rows.push(CheckRow::new("f-tangency", "|f(tau'(1)) - tau'(1)|".into(), (f1 - a1).abs(), tol.duality));
    Ok(rows)
}

pub fn cmd_check(args: &CheckArgs) -> Result<Outcome> {
    let model = load(&args.io)?;
    let rows = check_rows(&model, args)?;
    let mut text = String::from("check\tdetail\tobserved\ttolerance\tstatus\n");
    for row in &rows {
        text.push_str(&row.render());
        text.push('\n');
    }
    write(&args.io.out, "check_report.tsv", &text)?;
    print!("{text}");
    let worst = rows.iter().filter(|r| !r.pass).max_by(|a, b| a.severity().total_cmp(&b.severity()));
    Ok(match worst {
        None => Outcome::Pass,
        Some(row) => Outcome::OracleFailure(row.render()),
    })
}

#[derive(Serialize)]
struct SampleMeta {
    sampler: ProbabilityVector,
    depth: usize,
    points: usize,
    seed: u64,
    hull: Interval,
    gap: f64,
    predicted: f64,
    deepest_ln_r: f64,
    deepest_quotients: Vec<f64>,
    tolerance: f64,
}

pub fn cmd_sample(args: &SampleArgs) -> Result<Outcome> {
    let model = load(&args.io)?;
    let tol = Tolerances::with_overrides(&args.tolerance)?;
    let geom = Geometric1D::new(model.clone())?;
    let sampler = match &args.sampler {
        Some(s) => ProbabilityVector::new(parse_list(s, "sampler weight")?)?,
        None => model.probs().clone(),
    };
    let scales = match &args.scales {
        Some(s) => parse_scales(s)?,
        None => SAMPLE_SCALE_EXPONENTS
            .iter()
            .map(|&k| Radius::power(model.max_ratio(), k))
            .collect::<Result<Vec<_>>>()?,
    };
    let predicted = cross_entropy(&sampler, model.probs())? / lyapunov(&sampler, &model)?;
    let points = geom.sample_points(&sampler, args.depth, args.seed, args.points)?;
    let reports = points
        .par_iter()
        .map(|p| geom.local_dimension_along(p, &scales))
        .collect::<Result<Vec<_>>>()?;

    let mut dump = String::new();
    for p in &points {
        writeln!(dump, "{}\t{}", p.word, fmt_f64(p.x)).expect("string write");
    }
    write(&args.io.out, "points.txt", &dump)?;

    let mut table = String::from("point\tln_r\tquotient\tpredicted\n");
    for (i, rows) in reports.iter().enumerate() {
        for row in rows {
            writeln!(table, "{i}\t{}\t{}\t{}", fmt_f64(row.ln_r), fmt_f64(row.quotient), fmt_f64(predicted))
                .expect("string write");
        }
    }
    write(&args.io.out, "local_dimension.tsv", &table)?;

    let deepest: Vec<f64> = reports.iter().map(|rows| rows.last().expect("nonempty schedule").quotient).collect();
    let meta = SampleMeta {
        sampler,
        depth: args.depth,
        points: args.points,
        seed: args.seed,
        hull: geom.hull(),
        gap: geom.gap(),
        predicted,
        deepest_ln_r: scales.last().expect("nonempty schedule").ln(),
        deepest_quotients: deepest.clone(),
        tolerance: tol.local,
    };
    write_json(&args.io.out, "sample_meta.json", &meta)?;

    let worst = deepest.iter().enumerate().map(|(i, q)| (i, (q - predicted).abs())).max_by(|a, b| a.1.total_cmp(&b.1));
    Ok(match worst {
        Some((i, dev)) if !(dev <= tol.local) => Outcome::OracleFailure(format!(
            "point {i}: quotient {} deviates from predicted {} by {} > {}",
            fmt_f64(deepest[i]),
            fmt_f64(predicted),
            fmt_f64(dev),
            fmt_f64(tol.local)
        )),
        _ => Outcome::Pass,
    })
}

pub fn cmd_section_dump(args: &SectionArgs) -> Result<Outcome> {
    let model = load(&args.io)?;
    let r = match &args.scales {
        Some(s) => {
            let scales = parse_scales(s)?;
            if scales.len() != 1 {
                return Err(Error::InvalidArgument("section-dump takes exactly one scale".into()));
            }
            float_scales(&scales)?[0]
        }
        None => model.max_ratio().powi(8),
    };
    let section = enumerate_section(&model, r)?;
    section.verify(&model)?;
    let mut buf = Vec::new();
    section.write_dump(&mut buf)?;
    fs::write(args.io.out.join("section.txt"), buf)?;
    Ok(Outcome::Pass)
}

pub fn cmd_coarse(args: &CoarseArgs) -> Result<Outcome> {
    let model = load(&args.io)?;
    let scales = match &args.scales {
        Some(s) => parse_scales(s)?,
        None => default_schedule(&model)?,
    };
    let alphas = match &args.alpha {
        Some(s) => parse_list(s, "alpha")?,
        None => default_alphas(&asymptotes(&model)?),
    };
    let mut table = String::from("r\talpha\teps\tN\testimate\n");
    for r in float_scales(&scales)? {
        let section = enumerate_section(&model, r)?;
        for &alpha in &alphas {
            let CoarseCount { r, alpha, eps, count, estimate } = coarse_on(&section, alpha, args.eps);
            writeln!(table, "{}\t{}\t{}\t{count}\t{}", fmt_f64(r), fmt_f64(alpha), fmt_f64(eps), fmt_ext(estimate))
                .expect("string write");
        }
    }
    write(&args.io.out, "coarse.tsv", &table)?;
    Ok(Outcome::Pass)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(lo: f64, hi: f64, step: f64) -> GridArgs {
        GridArgs { q_min: lo, q_max: hi, q_step: step }
    }

    #[test]
    fn default_grid_hits_integers() {
        let g = q_grid(&grid(-10.0, 10.0, 0.1)).unwrap();
        assert_eq!(g.len(), 201);
        assert!(g.contains(&1.0) && g.contains(&0.0) && g.contains(&-2.0));
        assert_eq!(*g.last().unwrap(), 10.0);
        assert!(q_grid(&grid(1.0, 0.0, 0.1)).is_err());
        assert!(q_grid(&grid(0.0, 1.0, 0.0)).is_err());
        assert_eq!(q_grid(&grid(2.0, 2.0, 0.5)).unwrap(), vec![2.0]);
    }

    #[test]
    fn scale_parsing() {
        let s = parse_scales("0.1, 3^-4,1e-3").unwrap();
        assert!((s[1].ln() + 4.0 * 3f64.ln()).abs() < 1e-15);
        assert!(parse_scales("0.1,0.2").is_err());
        assert!(parse_scales("1.5").is_err());
        assert!(parse_scales("x").is_err());
        assert!(parse_scale("3^-3000").is_ok());
    }

    #[test]
    fn tolerance_overrides() {
        let t = Tolerances::with_overrides(&["grid=1e-2".into(), "local = 0.1".into()]).unwrap();
        assert_eq!((t.grid, t.local), (1e-2, 0.1));
        assert!(Tolerances::with_overrides(&["nope=1".into()]).is_err());
        assert!(Tolerances::with_overrides(&["grid".into()]).is_err());
        assert!(Tolerances::with_overrides(&["grid=-1".into()]).is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::SscViolation { first: 0, second: 1 }), 3);
        assert_eq!(exit_code(&Error::Integrity("x".into())), 1);
        assert_eq!(exit_code(&Error::InvalidProbability("x".into())), 2);
    }

    #[test]
    fn cli_parses() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
        let cli = Cli::try_parse_from(["selfsim", "tau", "--model", "m.json", "--q-min", "-2", "--q-max", "4"]).unwrap();
        match cli.command {
            Command::Tau(a) => assert_eq!((a.grid.q_min, a.grid.q_max, a.grid.q_step), (-2.0, 4.0, 0.1)),
            other => panic!("{other:?}"),
        }
    }
}
