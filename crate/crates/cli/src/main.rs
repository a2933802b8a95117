use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use translates::bernstein::{self, EntireSample, GrowthFunction};
use translates::density::{self, IntervalFamily, PsiFunction};
use translates::expfit;
use translates::generator::{self, Certificate, StageConfig};
use translates::io::{svg_plot, write_text, Series};
use translates::pairgen::{self, PairConfig, Which};
use translates::span::{FitMode, TimeRule};
use translates::spectrum::{SignRule, Spectrum, Window};
use translates::Error;

#[derive(Parser, Debug)]
#[command(name = "translates", version, about = "Experiments on generators of discrete translates in L¹(ℝ)")]
struct Cli {
    /// Worker threads; 0 uses every core.  Results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// Output directory.
    #[arg(long, global = true, default_value = "translates-out")]
    out: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Beurling–Malliavin lower bound and substantial families.
    Density(DensityArgs),
    /// Bump-fit residual against the radius ρ.
    Radius(RadiusArgs),
    /// Stage-by-stage generator construction.
    Gen(GenArgs),
    /// The explicit pair of generators for perturbed integers.
    Pair(PairArgs),
    /// Growth-class diagnostics and uniqueness certificates.
    Bernstein(BernsteinArgs),
    /// Fast self-checks of the closed forms.
    Verify(VerifyArgs),
}

#[derive(Args, Debug, Serialize)]
struct DensityArgs {
    #[arg(long)]
    spectrum: PathBuf,
    #[arg(long, default_value_t = 1024.0)]
    horizon: f64,
    #[arg(long, default_value_t = 2.0)]
    s_min: f64,
    #[arg(long, default_value_t = 0.01)]
    tol: f64,
    /// Density for the exported family; defaults to the bound minus `tol`.
    #[arg(long)]
    d: Option<f64>,
    /// JSON file with a weight Ψ for a Ψ-substantial search.
    #[arg(long)]
    psi: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct RadiusArgs {
    #[arg(long)]
    spectrum: PathBuf,
    /// Comma-separated radii.
    #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
    rho: Vec<f64>,
    #[arg(long, default_value_t = 40.0)]
    max_freq: f64,
    #[arg(long, default_value_t = 1e-8)]
    ridge: f64,
    #[arg(long, default_value_t = expfit::DEFAULT_CELLS)]
    cells: usize,
}

#[derive(Args, Debug, Serialize)]
struct GenArgs {
    #[arg(long)]
    spectrum: PathBuf,
    /// Number of stages K.
    #[arg(long)]
    stages: u32,
    #[arg(long)]
    max_freqs: Option<usize>,
    #[arg(long, default_value_t = 4.0)]
    freq_factor: f64,
    #[arg(long, default_value_t = expfit::DEFAULT_RIDGE)]
    ridge: f64,
    #[arg(long, default_value_t = 256)]
    cells_per_unit: usize,
    /// Half-width of the φ sample window.
    #[arg(long, default_value_t = 50.0)]
    window: f64,
    #[arg(long, default_value_t = 1001)]
    samples: usize,
    /// Half-width of the time grid for the telescoping check.
    #[arg(long, default_value_t = 400.0)]
    telescope_t: f64,
    #[arg(long, default_value_t = 0.05)]
    telescope_dt: f64,
    #[arg(long)]
    no_telescope: bool,
}

#[derive(Args, Debug, Serialize)]
struct PairArgs {
    /// Spectrum for the span test; defaults to `n + 0.1·0.5^{|n|}`, `|n| ≤ 200`.
    #[arg(long)]
    spectrum: Option<PathBuf>,
    /// Defaults to 0.45π.
    #[arg(long)]
    a: Option<f64>,
    #[arg(long = "K", default_value_t = 30)]
    k: usize,
    #[arg(long, default_value_t = 8001)]
    grid_points: usize,
    /// Points of the exported profile on `[−4π, 4π]`.
    #[arg(long, default_value_t = 2001)]
    profile_points: usize,
    #[arg(long, value_delimiter = ',', default_value = "6,12,24")]
    windows: Vec<f64>,
    #[arg(long, default_value_t = 0.2)]
    target_scale: f64,
    #[arg(long, default_value_t = 1e-12)]
    ridge: f64,
    /// Reweighted iterations for the L¹ fit; plain weighted L² when absent.
    #[arg(long)]
    irls: Option<usize>,
    #[arg(long)]
    no_span: bool,
}

#[derive(Args, Debug, Serialize)]
struct BernsteinArgs {
    /// JSON configuration; the sin/log Carleman table when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Spectrum for the uniqueness certificate.
    #[arg(long)]
    spectrum: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct VerifyArgs {
    /// Optional spectrum whose density bound is reported.
    #[arg(long)]
    spectrum: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum SampleRef {
    Builtin(String),
    Custom(EntireSample),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BernsteinConfig {
    sigma: GrowthFunction,
    #[serde(default = "default_sample")]
    sample: SampleRef,
    #[serde(default)]
    omega_ys: Vec<f64>,
    #[serde(default = "default_radii")]
    carleman_radii: Vec<f64>,
    #[serde(default = "default_carleman_tol")]
    carleman_tol: f64,
    #[serde(default)]
    lemma35: Option<Lemma35Config>,
    #[serde(default)]
    uniqueness: Option<UniquenessConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Lemma35Config {
    psi: PsiFunction,
    intervals: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct UniquenessConfig {
    psi: PsiFunction,
    horizon: f64,
    #[serde(default = "default_s_min")]
    s_min: f64,
    #[serde(default = "default_threshold")]
    threshold: f64,
}

fn default_sample() -> SampleRef {
    SampleRef::Builtin("sin".into())
}
fn default_radii() -> Vec<f64> {
    vec![10.0, 30.0, 100.0, 300.0]
}
fn default_carleman_tol() -> f64 {
    1e-3
}
fn default_s_min() -> f64 {
    2.0
}
fn default_threshold() -> f64 {
    10.0
}

impl Default for BernsteinConfig {
    fn default() -> Self {
        BernsteinConfig {
            sigma: GrowthFunction::Log { c0: 1.0, c1: 1.0, shift: 1.0 },
            sample: default_sample(),
            omega_ys: vec![0.0, 1.0, 2.0, 4.0],
            carleman_radii: default_radii(),
            carleman_tol: default_carleman_tol(),
            lemma35: None,
            uniqueness: None,
        }
    }
}

/// A failed run: exit code, message and an optional diagnostic document.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
    diagnostic: Option<Value>,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into(), diagnostic: None }
    }

    fn numeric(message: impl Into<String>, diagnostic: Value) -> Self {
        Failure { code: 3, message: message.into(), diagnostic: Some(diagnostic) }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_) | Error::OutOfWindow { .. } | Error::BoundedGrowth(_) | Error::Io(_) | Error::Json(_) => {
                Failure::config(e.to_string())
            }
            _ => {
                let msg = e.to_string();
                Failure::numeric(msg.clone(), json!({ "error": msg }))
            }
        }
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

/// Output directory plus the list of files written so far.
struct Out {
    dir: PathBuf,
    files: Vec<String>,
}

impl Out {
    fn text(&mut self, name: &str, text: &str) -> Outcome<()> {
        write_text(&self.dir, name, text).map_err(|e| Failure::config(format!("cannot write {name}: {e}")))?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Outcome<()> {
        let mut s = serde_json::to_string_pretty(value).expect("report serializes");
        s.push('\n');
        self.text(name, &s)
    }
}

fn read_file(path: &Path) -> Outcome<String> {
    std::fs::read_to_string(path).map_err(|e| Failure::config(format!("cannot read {}: {e}", path.display())))
}

fn load_spectrum(path: &Path) -> Outcome<Spectrum> {
    Spectrum::from_json(&read_file(path)?).map_err(|e| Failure::config(format!("{}: {e}", path.display())))
}

fn spec_value(spec: &Spectrum) -> Value {
    serde_json::from_str(&spec.to_json()).expect("spectrum JSON parses")
}

fn load_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Outcome<T> {
    serde_json::from_str(&read_file(path)?).map_err(|e| Failure::config(format!("{}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start {} threads: {e}", cli.threads);
            return ExitCode::from(2);
        }
    };
    let mut out = Out { dir: cli.out.clone(), files: Vec::new() };
    let (name, params) = describe(&cli.command);
    let result = pool.install(|| run(&cli.command, &mut out));
    let (status, resolved, code) = match result {
        Ok(resolved) => ("ok", resolved, 0u8),
        Err(f) => {
            eprintln!("error: {}", f.message);
            if f.code == 2 && out.files.is_empty() {
                return ExitCode::from(2);
            }
            if let Some(diag) = &f.diagnostic {
                let doc = json!({ "command": name, "error": f.message, "diagnostic": diag });
                if let Err(e) = out.json("failure.json", &doc) {
                    eprintln!("error: {}", e.message);
                }
            }
            ("failed", Value::Null, f.code)
        }
    };
    let manifest = json!({
        "command": name,
        "version": env!("CARGO_PKG_VERSION"),
        "threads": cli.threads,
        "out": cli.out,
        "parameters": params,
        "resolved": resolved,
        "status": status,
        "outputs": out.files.clone(),
        "timestamp": SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
    });
    if let Err(e) = out.json("manifest.json", &manifest) {
        eprintln!("error: {}", e.message);
        return ExitCode::from(if code == 0 { 2 } else { code });
    }
    ExitCode::from(code)
}

fn describe(cmd: &Command) -> (&'static str, Value) {
    fn v<T: Serialize>(t: &T) -> Value {
        serde_json::to_value(t).expect("arguments serialize")
    }
    match cmd {
        Command::Density(a) => ("density", v(a)),
        Command::Radius(a) => ("radius", v(a)),
        Command::Gen(a) => ("gen", v(a)),
        Command::Pair(a) => ("pair", v(a)),
        Command::Bernstein(a) => ("bernstein", v(a)),
        Command::Verify(a) => ("verify", v(a)),
    }
}

/// Runs one command and returns the resolved parameters for the manifest.
fn run(cmd: &Command, out: &mut Out) -> Outcome<Value> {
    match cmd {
        Command::Density(a) => cmd_density(a, out),
        Command::Radius(a) => cmd_radius(a, out),
        Command::Gen(a) => cmd_gen(a, out),
        Command::Pair(a) => cmd_pair(a, out),
        Command::Bernstein(a) => cmd_bernstein(a, out),
        Command::Verify(a) => cmd_verify(a, out),
    }
}

/// First half-line (positive, then negative) where `search` finds a family.
fn search_halves(
    spec: &Spectrum,
    horizon: f64,
    search: impl Fn(&translates::spectrum::HalfLine<'_>, f64) -> translates::Result<Option<IntervalFamily>>,
) -> Outcome<Option<IntervalFamily>> {
    for h in [spec.positive(), spec.negative()] {
        if h.next_above(0.0).is_none() {
            continue;
        }
        if let Some(fam) = search(&h, horizon.min(h.horizon()))? {
            return Ok(Some(fam));
        }
    }
    Ok(None)
}

fn family_summary(fam: &Option<IntervalFamily>) -> Value {
    match fam {
        None => Value::Null,
        Some(f) => json!({
            "half": if f.reflected { "negative" } else { "positive" },
            "intervals": f.len(),
            "divergence_sum": f.divergence_sum(),
        }),
    }
}

fn cmd_density(a: &DensityArgs, out: &mut Out) -> Outcome<Value> {
    let spec = load_spectrum(&a.spectrum)?;
    let psi: Option<PsiFunction> = a.psi.as_deref().map(load_json).transpose()?;
    if let Some(p) = &psi {
        p.validate()?;
    }
    let bound = density::bm_lower_bound(&spec, a.horizon, a.s_min, a.tol)?;
    let d = a.d.unwrap_or(bound - a.tol);
    let family = if d > 0.0 && d.is_finite() {
        search_halves(&spec, a.horizon, |h, hz| density::substantial_search(h, d, hz, a.s_min))?
    } else {
        None
    };
    if let Some(f) = &family {
        out.text("family.csv", &f.to_csv())?;
    }
    let psi_family = match &psi {
        Some(p) => search_halves(&spec, a.horizon, |h, hz| density::psi_substantial_search(h, p, hz, a.s_min))?,
        None => None,
    };
    if let Some(f) = &psi_family {
        out.text("psi_family.csv", &f.to_csv())?;
    }
    let summary = json!({
        "bound": bound,
        "horizon": a.horizon,
        "s_min": a.s_min,
        "tol": a.tol,
        "family_d": d,
        "family": family_summary(&family),
        "psi": psi,
        "psi_family": family_summary(&psi_family),
    });
    out.json("summary.json", &summary)?;
    Ok(json!({ "spectrum": spec_value(&spec), "family_d": d }))
}

fn cmd_radius(a: &RadiusArgs, out: &mut Out) -> Outcome<Value> {
    if a.rho.is_empty() {
        return Err(Failure::config("the rho grid is empty"));
    }
    let spec = load_spectrum(&a.spectrum)?;
    let rows = expfit::radius_scan(&spec, &a.rho, a.max_freq, a.ridge, a.cells)?;
    out.text("radius.csv", &expfit::radius_csv(&rows))?;
    let series = Series { label: "residual".into(), points: rows.iter().map(|r| (r.rho, r.residual)).collect() };
    out.text("radius.svg", &svg_plot("Bump-fit residual", "ρ", "residual", &[series], true))?;
    let summary: Vec<Value> = rows
        .iter()
        .map(|r| json!({ "rho": r.rho, "residual": r.residual, "coef_norm": r.coef_norm, "n_freqs": r.n_freqs, "cells": r.cells }))
        .collect();
    out.json("summary.json", &summary)?;
    Ok(json!({ "spectrum": spec_value(&spec) }))
}

fn cmd_gen(a: &GenArgs, out: &mut Out) -> Outcome<Value> {
    if a.stages == 0 {
        return Err(Failure::config("--stages must be at least 1"));
    }
    if !(a.window > 0.0) || a.samples < 2 || !(a.telescope_t > 0.0 && a.telescope_dt > 0.0) {
        return Err(Failure::config("window, samples and telescope grid must be positive"));
    }
    let spec = load_spectrum(&a.spectrum)?;
    let cfg = StageConfig {
        freq_factor: a.freq_factor,
        max_freqs: a.max_freqs,
        ridge: a.ridge,
        cells_per_unit: a.cells_per_unit,
        ..StageConfig::default()
    };
    let mut stages = Vec::new();
    for _ in 0..a.stages {
        match generator::build_stage(&stages, &spec, &cfg) {
            Ok(s) => stages.push(s),
            Err(e) => {
                let certs: Vec<&Certificate> = stages.iter().map(|s| &s.cert).collect();
                out.json("certificates.json", &certs)?;
                let mut f = Failure::from(e);
                if f.code == 3 {
                    f.diagnostic = Some(json!({ "stage": stages.len() + 1, "error": f.message, "completed": certs }));
                }
                return Err(f);
            }
        }
    }
    let certs: Vec<&Certificate> = stages.iter().map(|s| &s.cert).collect();
    out.json("certificates.json", &certs)?;
    let last = &stages[stages.len() - 1];
    out.text("phi_hat_knots.csv", &last.g.to_csv())?;

    let n = a.samples;
    let h = 2.0 * a.window / (n - 1) as f64;
    let samples: Vec<(f64, f64)> = if stages.len() >= 2 {
        generator::assemble_phi(&stages, a.window, n)?.samples
    } else {
        (0..n).map(|i| -a.window + i as f64 * h).map(|t| (t, last.g.inverse_transform(t))).collect()
    };
    let mut csv = String::from("t,phi\n");
    for (t, v) in &samples {
        csv.push_str(&format!("{t:.16e},{v:.16e}\n"));
    }
    out.text("phi_samples.csv", &csv)?;
    let series = Series { label: "φ".into(), points: samples.clone() };
    out.text("phi.svg", &svg_plot("Generator φ", "t", "φ(t)", &[series], false))?;

    let mut tele = Vec::new();
    if !a.no_telescope {
        for k in 1..a.stages {
            tele.push(generator::telescoping_check(&stages, k, a.telescope_t, a.telescope_dt)?);
        }
        out.json("telescope.json", &tele)?;
    }
    let within = certs.iter().all(|c| c.eq1_measured <= c.delta && c.eq2_measured <= c.delta);
    out.json("summary.json", &json!({ "stages": a.stages, "certificates_within_delta": within, "phi_hat_norm": last.g.sobolev_norm() }))?;
    Ok(json!({ "spectrum": spec_value(&spec) }))
}

fn default_pair_spectrum() -> Spectrum {
    Spectrum::perturbed_integers(0.1, 0.5, SignRule::Plus, Window::Count(200)).expect("valid default spectrum")
}

fn cmd_pair(a: &PairArgs, out: &mut Out) -> Outcome<Value> {
    let cfg = PairConfig::new(a.a.unwrap_or(0.45 * PI), a.k)?;
    if a.profile_points < 2 || a.grid_points < 2 {
        return Err(Failure::config("point counts must be at least 2"));
    }
    let m = a.profile_points;
    let xs: Vec<f64> = (0..m).map(|i| -4.0 * PI + 8.0 * PI * i as f64 / (m - 1) as f64).collect();
    out.text("profile.csv", &pairgen::profile_csv(&cfg, &xs))?;
    let curve = |w: Which| xs.iter().map(|&x| (x, pairgen::phi_hat_closed_form(x, w, &cfg))).collect::<Vec<_>>();
    let (c1, c2) = (curve(Which::One), curve(Which::Two));
    let sum = c1.iter().zip(&c2).map(|(p, q)| (p.0, p.1 + q.1)).collect();
    let series = [
        Series { label: "φ̂₁".into(), points: c1 },
        Series { label: "φ̂₂".into(), points: c2 },
        Series { label: "sum".into(), points: sum },
    ];
    out.text("profile.svg", &svg_plot("Pair profiles", "x", "φ̂", &series, false))?;

    let margin = pairgen::positivity_margin(&cfg, a.grid_points);
    let verdict = if margin.positive { "PASS" } else { "FAIL" };
    out.json(
        "margin.json",
        &json!({ "a": cfg.a, "K": cfg.k, "kappa": cfg.kappa(), "in_span_range": cfg.in_span_range(), "margin": margin, "verdict": verdict }),
    )?;

    let spec = match &a.spectrum {
        Some(p) => load_spectrum(p)?,
        None => default_pair_spectrum(),
    };
    if !a.no_span {
        if a.windows.iter().any(|w| !(*w > 0.0)) {
            return Err(Failure::config("span windows must be positive"));
        }
        let mode = match a.irls {
            Some(iterations) => FitMode::Irls { iterations },
            None => FitMode::WeightedL2,
        };
        let target = pairgen::gaussian_target(a.target_scale);
        let targets: [(&str, TimeRule<'_>); 1] = [("gaussian", &target)];
        let mut rows = Vec::new();
        for &w in &a.windows {
            for single in [false, true] {
                rows.extend(pairgen::pair_span_test(&spec, &cfg, &targets, w, a.ridge, single, mode)?);
            }
        }
        let mut csv = String::from("target,window,generators,n_translates,l1_residual,target_l1,coef_norm\n");
        for r in &rows {
            csv.push_str(&format!(
                "{},{:.16e},{},{},{:.16e},{:.16e},{:.16e}\n",
                r.target, r.window, r.generators, r.n_translates, r.l1_residual, r.target_l1, r.coef_norm
            ));
        }
        out.text("span.csv", &csv)?;
        out.json("span.json", &rows)?;
    }
    Ok(json!({ "a": cfg.a, "K": cfg.k, "spectrum": spec_value(&spec) }))
}

fn resolve_sample(s: &SampleRef) -> Outcome<EntireSample> {
    match s {
        SampleRef::Custom(f) => Ok(f.clone()),
        SampleRef::Builtin(name) => EntireSample::builtins()
            .into_iter()
            .find(|(n, _)| n == name)
            .map(|(_, f)| f)
            .ok_or_else(|| Failure::config(format!("unknown builtin sample '{name}'"))),
    }
}

fn cmd_bernstein(a: &BernsteinArgs, out: &mut Out) -> Outcome<Value> {
    let cfg: BernsteinConfig = match &a.config {
        Some(p) => load_json(p)?,
        None => BernsteinConfig::default(),
    };
    cfg.sigma.validate()?;
    let f = resolve_sample(&cfg.sample)?;
    let spec = a.spectrum.as_deref().map(load_spectrum).transpose()?;
    if cfg.uniqueness.is_some() && spec.is_none() {
        return Err(Failure::config("a uniqueness section needs --spectrum"));
    }

    let omega = if cfg.omega_ys.is_empty() {
        Vec::new()
    } else {
        let om = bernstein::omega_from_sigma(&cfg.sigma)?;
        cfg.omega_ys.iter().map(|&y| om.check(y)).collect()
    };
    let carleman = if cfg.carleman_radii.is_empty() {
        None
    } else {
        let rep = bernstein::carleman_check(&f, &cfg.carleman_radii, &cfg.sigma, cfg.carleman_tol)?;
        let mut csv = String::from("R,log_integral,Q,carleman_line,carleman_circle\n");
        for r in &rep.rows {
            csv.push_str(&format!("{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n", r.r, r.log_integral, r.q, r.carleman_line, r.carleman_circle));
        }
        out.text("carleman.csv", &csv)?;
        let series = Series { label: "Q(R)".into(), points: rep.rows.iter().map(|r| (r.r.log10(), r.q)).collect() };
        out.text("carleman.svg", &svg_plot("Carleman lower bound", "log₁₀ R", "Q(R)", &[series], false))?;
        Some(rep)
    };
    let lemma35 = match &cfg.lemma35 {
        None => Vec::new(),
        Some(l) => l.intervals.iter().map(|&[lo, hi]| bernstein::lemma35_check(&f, lo, hi, &l.psi, &cfg.sigma)).collect::<translates::Result<Vec<_>>>()?,
    };
    let uniqueness = match (&cfg.uniqueness, &spec) {
        (Some(u), Some(spec)) => {
            u.psi.validate()?;
            let fam = search_halves(spec, u.horizon, |h, hz| density::psi_substantial_search(h, &u.psi, hz, u.s_min))?;
            let cert = match fam {
                Some(fam) => {
                    let c = bernstein::uniqueness_certificate(spec, &cfg.sigma, &u.psi, &fam, u.threshold)?;
                    out.text("divergence.csv", &c.to_csv())?;
                    json!(c)
                }
                None => json!({ "rows": [], "threshold": u.threshold, "pass": false, "reason": "no Ψ-substantial family within the horizon" }),
            };
            Some(cert)
        }
        _ => None,
    };
    let report = json!({
        "sigma": cfg.sigma,
        "sample": f,
        "omega": omega,
        "carleman": carleman,
        "lemma35": lemma35,
        "uniqueness": uniqueness,
    });
    out.json("bernstein.json", &report)?;
    Ok(serde_json::to_value(&cfg).expect("config serializes"))
}

#[derive(Serialize)]
struct Check {
    name: &'static str,
    value: f64,
    limit: f64,
    pass: bool,
}

fn cmd_verify(a: &VerifyArgs, out: &mut Out) -> Outcome<Value> {
    let mut checks = Vec::new();
    let mut push = |name, value: f64, limit: f64, pass: bool| checks.push(Check { name, value, limit, pass });

    let c = PairConfig::new(1.4, 30)?;
    let xs: Vec<f64> = (0..=400).map(|i| -10.0 * PI + 20.0 * PI * i as f64 / 400.0).collect();
    let quad = pairgen::phi_hat_quadrature(&xs, &c, 60.0);
    let err = xs.iter().zip(&quad).map(|(&x, q)| (pairgen::phi_hat_closed_form(x, Which::One, &c) - q).abs()).fold(0.0, f64::max);
    push("closed_form_vs_quadrature", err, 1e-5, err <= 1e-5);

    let shift = xs.iter().map(|&x| (pairgen::phi_hat_closed_form(x, Which::Two, &c) - pairgen::phi_hat_closed_form(x - PI, Which::One, &c)).abs()).fold(0.0, f64::max);
    push("phi2_is_shifted_phi1", shift, 0.0, shift == 0.0);

    for frac in [0.26, 0.35, 0.45] {
        let m = pairgen::positivity_margin(&PairConfig::new(frac * PI, 30)?, 8001);
        push("positivity_margin", m.min, 0.0, m.min > 0.0);
    }
    let edge = pairgen::positivity_margin(&PairConfig::new(PI / 4.0, 30)?, 8001);
    push("margin_at_quarter_pi", edge.min.abs(), 1e-12, edge.min.abs() <= 1e-12);

    let e2 = std::f64::consts::E.powi(2);
    let l34 = bernstein::lemma34_bound(3, 0.0, 2.0, &GrowthFunction::Affine { c0: 1.0, c1: 1.0 })?;
    let rel = (l34 / (8.0 * e2) - 1.0).abs();
    push("lemma34_bound_8e2", rel, 1e-6, rel <= 1e-6);

    let om = bernstein::omega_from_sigma(&GrowthFunction::Affine { c0: 0.0, c1: 1.0 })?;
    for y in [0.0, 1.0, 2.0, 4.0] {
        let r = om.check(y).integral_rel;
        push("omega_integral", r, 1.0 + 1e-6, r <= 1.0 + 1e-6);
    }

    let z = Spectrum::arithmetic(1.0, Window::Horizon(1024.0))?;
    let bz = density::bm_lower_bound(&z, 1024.0, 2.0, 0.01)?;
    push("density_of_integers", bz, 0.95, (0.95..=1.0).contains(&bz));

    let extra = match &a.spectrum {
        Some(p) => {
            let spec = load_spectrum(p)?;
            json!({ "bm_lower_bound": density::bm_lower_bound(&spec, 1024.0, 2.0, 0.01)? })
        }
        None => Value::Null,
    };
    let all = checks.iter().all(|c| c.pass);
    out.json("verify.json", &json!({ "checks": checks, "all_pass": all, "spectrum": extra }))?;
    if !all {
        let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.name).collect();
        return Err(Failure::numeric(format!("checks failed: {}", failed.join(", ")), json!({ "failed": failed })));
    }
    Ok(Value::Null)
}
