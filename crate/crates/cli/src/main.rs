mod svg;

use std::collections::HashMap;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use thc::hardness::{
    pad_coloring, reduce_from_graph, verify_witness, witness_from_coloring, Coloring, Graph,
    ThcInstance, Witness,
};
use thc::labeling::{
    build_flow_instance, check_contiguity, min_feasible_flow, solve_labeled_with_workers,
};
use thc::simgen::{self, SimConfig};
use thc::temporal::{evaluate_general, solve_local_with_workers};
use thc::ultrametric::{cut_at_height, instability_pair, to_dendrogram, Dendrogram};
use thc::{linf_distance, Distances, FitScheme, MetricSpace, TemporalSampling, FORMAT_VERSION};

#[derive(Parser)]
#[command(name = "thc", version, about = "Temporal hierarchical clustering toolkit")]
struct Cli {
    /// Also write the run report to this file.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Emit {
    Json,
    Svg,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Fkw,
    Subdominant,
}

impl From<Method> for FitScheme {
    fn from(m: Method) -> Self {
        match m {
            Method::Fkw => FitScheme::Fkw,
            Method::Subdominant => FitScheme::Subdominant,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Fit an ultrametric to a metric space and write its dendrogram.
    Fit {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "fkw")]
        method: Method,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        emit: Emit,
        /// Height of the cut line drawn in SVG output.
        #[arg(long)]
        cut: Option<f64>,
    },
    /// Cluster every level of a temporal sampling.
    Cluster {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "fkw")]
        method: Method,
        /// Run the labeling pipeline and certify contiguity.
        #[arg(long)]
        labels: bool,
        /// Contiguity radius to certify instead of the solution's locality.
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long, default_value = "thc-out")]
        out_dir: PathBuf,
        #[arg(long, value_enum, default_value = "json")]
        emit: Emit,
        /// Write the flow network and minimum flow as well.
        #[arg(long)]
        dump_flow: bool,
    },
    /// Cut a dendrogram at height `r`.
    #[command(allow_negative_numbers = true)]
    Cut {
        dendrogram: PathBuf,
        r: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        emit: Emit,
    },
    /// Build the two-level instance of a graph (JSON edge list or DIMACS).
    Reduce {
        graph: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Build the witness of a proper 3-coloring.
    Witness {
        graph: PathBuf,
        coloring: PathBuf,
        /// Split color classes until all three colors are used.
        #[arg(long)]
        pad: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check a witness against an instance; exit status 2 on rejection.
    Verify {
        instance: PathBuf,
        witness: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        chi: f64,
        #[arg(long, default_value_t = 0.0)]
        rho: f64,
    },
    /// Run the flocking simulation and write its temporal sampling.
    Simulate {
        /// JSON configuration; missing fields take their defaults.
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Log every tick.
        #[arg(long)]
        trace: bool,
    },
    /// Generate the unstable metric pair and compare both fitters on it.
    Figure4 {
        #[arg(long, default_value_t = 11)]
        n: usize,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long, default_value = "figure4")]
        out_dir: PathBuf,
    },
}

#[derive(Debug, Default, Serialize)]
struct Metrics {
    #[serde(skip_serializing_if = "Option::is_none")]
    fit_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    chi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rho: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rho_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    blocks: Option<usize>,
}

#[derive(Debug, Serialize)]
struct RunReport {
    format_version: u32,
    command: &'static str,
    config: Value,
    metrics: Metrics,
    certified: bool,
    #[serde(skip_serializing_if = "Value::is_null")]
    details: Value,
    elapsed_ms: f64,
    outputs: Vec<String>,
}

impl RunReport {
    fn new(command: &'static str, config: Value) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            command,
            config,
            metrics: Metrics::default(),
            certified: true,
            details: Value::Null,
            elapsed_ms: 0.0,
            outputs: Vec::new(),
        }
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn read_graph(path: &Path) -> Result<Graph> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if text.trim_start().starts_with('{') {
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    } else {
        Graph::from_dimacs(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

/// A bare sampling, or the `sampling` member of a simulation run.
fn read_sampling(path: &Path) -> Result<TemporalSampling> {
    let mut value: Value = read_json(path)?;
    if let Some(inner) = value.get_mut("sampling") {
        value = inner.take();
    }
    serde_json::from_value(value).with_context(|| format!("parsing {}", path.display()))
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Writes `text` to `path`, or to stdout when there is no path.
fn emit(path: Option<&Path>, text: &str, report: &mut RunReport) -> Result<()> {
    match path {
        Some(p) => {
            fs::write(p, text).with_context(|| format!("writing {}", p.display()))?;
            report.outputs.push(p.display().to_string());
        }
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn write_file(dir: &Path, name: &str, text: &str, report: &mut RunReport) -> Result<()> {
    emit(Some(&dir.join(name)), text, report)
}

fn fit(input: &Path, method: Method, output: Option<&Path>, fmt: Emit, cut: Option<f64>) -> Result<RunReport> {
    let space: MetricSpace = read_json(input)?;
    let scheme = FitScheme::from(method);
    let mut report = RunReport::new("fit", json!({ "input": input, "method": scheme }));
    let dendrogram = to_dendrogram(&scheme.fit(&space))?;
    let rebuilt = dendrogram.to_ultrametric()?;
    report.metrics.fit_error = Some(linf_distance(&space, &rebuilt)?);
    let text = match fmt {
        Emit::Json => to_json(&dendrogram)?,
        Emit::Svg => svg::dendrogram(&dendrogram, cut),
    };
    emit(output, &text, &mut report)?;
    Ok(report)
}

fn contours(d: &Dendrogram) -> Value {
    let mut heights: Vec<f64> = d.merges().iter().map(|m| m.height).collect();
    heights.dedup();
    let mut out = vec![json!({ "height": 0.0, "partition": d.cut(0.0) })];
    for h in heights.into_iter().filter(|&h| h > 0.0) {
        out.push(json!({ "height": h, "partition": d.cut(h) }));
    }
    Value::Array(out)
}

#[allow(clippy::too_many_arguments)]
fn cluster(
    input: &Path,
    method: Method,
    labels: bool,
    delta: Option<f64>,
    workers: usize,
    out_dir: &Path,
    fmt: Emit,
    dump_flow: bool,
) -> Result<RunReport> {
    let sampling = read_sampling(input)?;
    let scheme = FitScheme::from(method);
    let mut report = RunReport::new(
        "cluster",
        json!({
            "input": input, "method": scheme, "labels": labels, "delta": delta,
            "workers": workers, "out_dir": out_dir,
        }),
    );
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let workers = workers.max(1);
    let (local, labeled) = if labels {
        let sol = solve_labeled_with_workers(&sampling, scheme, workers)?;
        (sol.local.clone(), Some(sol))
    } else {
        (solve_local_with_workers(&sampling, scheme, workers), None)
    };
    write_file(out_dir, "local.json", &to_json(&local)?, &mut report)?;

    let dendrograms: Vec<Dendrogram> = local
        .ultrametrics
        .iter()
        .map(to_dendrogram)
        .collect::<thc::Result<_>>()?;
    write_file(out_dir, "dendrograms.json", &to_json(&dendrograms)?, &mut report)?;
    let contour_list: Vec<Value> = dendrograms.iter().map(contours).collect();
    write_file(out_dir, "contours.json", &to_json(&contour_list)?, &mut report)?;
    if fmt == Emit::Svg {
        for (i, d) in dendrograms.iter().enumerate() {
            write_file(out_dir, &format!("level{i}.svg"), &svg::dendrogram(d, None), &mut report)?;
        }
    }

    let mut details = serde_json::Map::new();
    match evaluate_general(&sampling, &local) {
        Ok(cert) => {
            report.metrics.chi = Some(cert.chi);
            report.metrics.delta = Some(cert.delta);
            report.metrics.rho = Some(cert.rho);
            report.metrics.rho_bound = Some(cert.rho_bound);
            details.insert("levels".into(), serde_json::to_value(&cert.levels)?);
        }
        Err(e @ thc::Error::Certification { .. }) => {
            report.certified = false;
            details.insert("certification_error".into(), Value::String(e.to_string()));
        }
        Err(e) => return Err(e.into()),
    }

    if let Some(sol) = labeled {
        sol.labeling.validate()?;
        write_file(out_dir, "labeling.json", &to_json(&sol.labeling)?, &mut report)?;
        let k = sol
            .labeling
            .levels
            .iter()
            .flatten()
            .flat_map(|lp| lp.labels.iter().copied())
            .max()
            .unwrap_or(0);
        report.metrics.k = Some(k);
        let radius = delta.unwrap_or(local.delta);
        let mut checks = Vec::new();
        for i in 0..sampling.len().saturating_sub(1) {
            let c = check_contiguity(
                &sol.labeling.levels[i],
                &sol.labeling.levels[i + 1],
                radius,
                sampling.ambient(),
            )?;
            if !c.holds() {
                report.certified = false;
            }
            checks.push(json!({ "levels": [i, i + 1], "result": c }));
        }
        details.insert("contiguity_delta".into(), json!(radius));
        details.insert("contiguity".into(), Value::Array(checks));
        if dump_flow {
            let net = build_flow_instance(&sampling, &local.correspondences)?;
            let flow = min_feasible_flow(&net)?;
            write_file(out_dir, "flow.json", &to_json(&json!({ "network": net, "flow": flow }))?, &mut report)?;
        }
        if fmt == Emit::Svg {
            if let Some(coords) = sampling.ambient().coords().filter(|c| c.iter().all(|p| p.len() == 2)) {
                let map: HashMap<String, (f64, f64)> = sampling
                    .ambient()
                    .ids()
                    .iter()
                    .cloned()
                    .zip(coords.iter().map(|c| (c[0], c[1])))
                    .collect();
                write_file(out_dir, "labels.svg", &svg::labeled_levels(&sol.labeling.levels, &map), &mut report)?;
            }
        }
    }
    report.details = Value::Object(details);
    let report_path = out_dir.join("report.json");
    report.outputs.push(report_path.display().to_string());
    Ok(report)
}

fn cut(path: &Path, r: f64, output: Option<&Path>, fmt: Emit) -> Result<RunReport> {
    if r.is_nan() || r < 0.0 {
        bail!("cut height must be non-negative, got {r}");
    }
    let d: Dendrogram = read_json(path)?;
    let mut report = RunReport::new("cut", json!({ "dendrogram": path, "r": r }));
    let partition = cut_at_height(&d.to_ultrametric()?, r);
    report.metrics.blocks = Some(partition.len());
    let text = match fmt {
        Emit::Json => to_json(&partition)?,
        Emit::Svg => svg::dendrogram(&d, Some(r)),
    };
    emit(output, &text, &mut report)?;
    Ok(report)
}

fn reduce(path: &Path, output: Option<&Path>) -> Result<RunReport> {
    let g = read_graph(path)?;
    let mut report = RunReport::new("reduce", json!({ "graph": path }));
    report.details = json!({ "vertices": g.len(), "edges": g.edge_count() });
    emit(output, &to_json(&reduce_from_graph(&g))?, &mut report)?;
    Ok(report)
}

fn witness(graph: &Path, coloring: &Path, pad: bool, output: Option<&Path>) -> Result<RunReport> {
    let g = read_graph(graph)?;
    let mut c: Coloring = read_json(coloring)?;
    let mut report = RunReport::new("witness", json!({ "graph": graph, "coloring": coloring, "pad": pad }));
    if pad {
        c = pad_coloring(&g, &c)?.context("graphs with fewer than three vertices have no witness")?;
    }
    let w = witness_from_coloring(&g, &c)?;
    let r = verify_witness(&reduce_from_graph(&g), &w, 1.0, 0.0)?;
    report.metrics.chi = Some(r.chi());
    report.metrics.rho = r.distortion;
    emit(output, &to_json(&w)?, &mut report)?;
    Ok(report)
}

fn verify(instance: &Path, witness: &Path, chi: f64, rho: f64) -> Result<RunReport> {
    let inst: ThcInstance = read_json(instance)?;
    let w: Witness = read_json(witness)?;
    let mut report = RunReport::new(
        "verify",
        json!({ "instance": instance, "witness": witness, "chi": chi, "rho": rho }),
    );
    let r = verify_witness(&inst, &w, chi, rho)?;
    report.metrics.chi = Some(r.chi());
    report.metrics.rho = r.distortion;
    report.certified = r.accepted;
    report.details = serde_json::to_value(&r)?;
    Ok(report)
}

fn simulate(config: Option<&Path>, seed: Option<u64>, output: Option<&Path>) -> Result<RunReport> {
    let mut cfg: SimConfig = match config {
        Some(p) => read_json(p)?,
        None => SimConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let out = simgen::run(&cfg)?;
    let mut report = RunReport::new("simulate", serde_json::to_value(&out.config)?);
    report.details = json!({ "population": out.population, "levels": out.sampling.len() });
    emit(output, &to_json(&out)?, &mut report)?;
    Ok(report)
}

fn figure4(n: usize, eps: f64, out_dir: &Path) -> Result<RunReport> {
    let pair = instability_pair(n, eps)?;
    let mut report = RunReport::new("figure4", json!({ "n": n, "eps": eps, "out_dir": out_dir }));
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    write_file(out_dir, "original.json", &to_json(&pair.original)?, &mut report)?;
    write_file(out_dir, "perturbed.json", &to_json(&pair.perturbed)?, &mut report)?;
    let input_gap = linf_distance(&pair.original, &pair.perturbed)?;
    let mut rows = Vec::new();
    for scheme in [FitScheme::Fkw, FitScheme::Subdominant] {
        let a = scheme.fit(&pair.original);
        let b = scheme.fit(&pair.perturbed);
        rows.push(json!({
            "method": scheme,
            "mu_uv": a.distance(&pair.u, &pair.v)?,
            "mu_uv_perturbed": b.distance(&pair.u, &pair.v)?,
            "fit_error": linf_distance(&pair.original, &a)?,
            "gap": linf_distance(&a, &b)?,
        }));
    }
    report.details = json!({
        "u": pair.u,
        "v": pair.v,
        "diameter": pair.original.diameter(),
        "input_gap": input_gap,
        "comparison": rows,
    });
    Ok(report)
}

fn execute(cli: &Cli) -> Result<(RunReport, bool)> {
    let start = Instant::now();
    let mut to_stdout = false;
    let mut report = match &cli.command {
        Command::Fit { input, method, output, emit, cut } => {
            to_stdout = output.is_none();
            fit(input, *method, output.as_deref(), *emit, *cut)?
        }
        Command::Cluster { input, method, labels, delta, workers, out_dir, emit, dump_flow } => {
            cluster(input, *method, *labels, *delta, *workers, out_dir, *emit, *dump_flow)?
        }
        Command::Cut { dendrogram, r, output, emit } => {
            to_stdout = output.is_none();
            cut(dendrogram, *r, output.as_deref(), *emit)?
        }
        Command::Reduce { graph, output } => {
            to_stdout = output.is_none();
            reduce(graph, output.as_deref())?
        }
        Command::Witness { graph, coloring, pad, output } => {
            to_stdout = output.is_none();
            witness(graph, coloring, *pad, output.as_deref())?
        }
        Command::Verify { instance, witness, chi, rho } => verify(instance, witness, *chi, *rho)?,
        Command::Simulate { config, seed, output, .. } => {
            to_stdout = output.is_none();
            simulate(config.as_deref(), *seed, output.as_deref())?
        }
        Command::Figure4 { n, eps, out_dir } => figure4(*n, *eps, out_dir)?,
    };
    report.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok((report, to_stdout))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { 1 } else { 0 });
        }
    };
    let trace = matches!(cli.command, Command::Simulate { trace: true, .. });
    let mut logger = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"));
    if trace {
        logger.filter_module("thc::simgen", log::LevelFilter::Trace);
    }
    logger.init();

    match execute(&cli).and_then(|(report, artifact_on_stdout)| {
        let text = to_json(&report)?;
        if let Command::Cluster { out_dir, .. } = &cli.command {
            fs::write(out_dir.join("report.json"), &text)?;
        }
        if let Some(p) = &cli.report {
            fs::write(p, &text).with_context(|| format!("writing {}", p.display()))?;
        }
        if artifact_on_stdout {
            eprint!("{text}");
        } else {
            print!("{text}");
        }
        Ok(report.certified)
    }) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
