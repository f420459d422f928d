//! Reproducibility front end: runs the volume, curvature and closed-form
//! experiments plus the verification suites, emitting deterministic CSV or
//! JSON tables. Output is a pure function of the seed and configuration,
//! independent of the worker count.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::json;

use bcrt::analysis::{appendix_report, volume_law_experiment, VolumeLawConfig, F_AT_ZERO};
use bcrt::curvature::{mc_curvature_run, CenterMode, McCurvatureConfig};
use bcrt::excursion::{sample_excursion, SamplerConfig};
use bcrt::selfcheck;
use bcrt::transport::{uniform_ball_measure, w1_edge_cut};
use bcrt::tree::{MetricTree, TreePoint};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(
    name = "bcrt",
    version,
    about = "Brownian-excursion random tree experiments"
)]
struct Cli {
    /// Base seed for all random streams.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Grid resolution of the excursion sampler.
    #[arg(long, global = true)]
    grid_n: Option<usize>,
    /// Number of Monte Carlo replicas (trials).
    #[arg(long, global = true)]
    replicas: Option<u64>,
    /// Ball radius for curvature experiments.
    #[arg(long, global = true)]
    delta: Option<f64>,
    /// Lower edge of the center-separation bin.
    #[arg(long, global = true)]
    ell_lo: Option<f64>,
    /// Upper edge of the center-separation bin.
    #[arg(long, global = true)]
    ell_hi: Option<f64>,
    /// Ball radii for the volume experiment (repeatable).
    #[arg(long = "eps", global = true)]
    eps: Vec<f64>,
    /// Output format.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Also write the table to this path.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (results are identical for any value).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Optional JSON file with default values for the flags above.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Centers {
    Uniform,
    Skeleton,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the verification suites (metric axioms, meets, intersections,
    /// Lipschitz witness, rerooting, distortion, oracle agreement).
    Selftest {
        /// Perturb the edge-cut cost inside the oracle-equivalence suite;
        /// any nonzero value must make the selftest fail.
        #[arg(long, default_value_t = 0.0, hide = true)]
        inject_w1_fault: f64,
    },
    /// Expected ball-volume law with the ancestry/offspring split.
    Volume,
    /// Binned Ollivier curvature and the Kantorovich witness statistic.
    Curvature {
        /// How Monte Carlo centers are drawn.
        #[arg(long, value_enum, default_value_t = Centers::Uniform)]
        centers: Centers,
    },
    /// Closed-form profile of the ratio function and its 19/128 limit.
    Analysis,
    /// Edge-cut transport throughput (timings go to stderr).
    TransportBench,
}

/// Defaults that a JSON config file may override; flags win over both.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    seed: Option<u64>,
    grid_n: Option<usize>,
    replicas: Option<u64>,
    delta: Option<f64>,
    ell_lo: Option<f64>,
    ell_hi: Option<f64>,
    eps: Option<Vec<f64>>,
    format: Option<String>,
    out: Option<PathBuf>,
    threads: Option<usize>,
}

#[derive(Debug, Clone)]
struct RunConfig {
    seed: u64,
    grid_n: usize,
    replicas: u64,
    delta: f64,
    ell_lo: f64,
    ell_hi: f64,
    eps: Vec<f64>,
    format: Format,
    out: Option<PathBuf>,
    threads: Option<usize>,
}

fn resolve_config(cli: &Cli) -> Result<RunConfig> {
    let file: FileConfig = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading config file {}", path.display()))?;
            serde_json::from_str(&text)
                .with_context(|| format!("parsing config file {}", path.display()))?
        }
        None => FileConfig::default(),
    };
    let format = match (&cli.format, file.format.as_deref()) {
        (Some(f), _) => *f,
        (None, Some("csv")) => Format::Csv,
        (None, Some("json")) => Format::Json,
        (None, Some(other)) => bail!("config file format must be csv or json, got {other:?}"),
        (None, None) => Format::Csv,
    };
    let eps = if !cli.eps.is_empty() {
        cli.eps.clone()
    } else {
        file.eps.unwrap_or_else(|| vec![0.1, 0.2, 0.3, 0.5])
    };
    let config = RunConfig {
        seed: cli.seed.or(file.seed).unwrap_or(1),
        grid_n: cli.grid_n.or(file.grid_n).unwrap_or(16_384),
        replicas: cli.replicas.or(file.replicas).unwrap_or(4_000),
        delta: cli.delta.or(file.delta).unwrap_or(0.02),
        ell_lo: cli.ell_lo.or(file.ell_lo).unwrap_or(0.45),
        ell_hi: cli.ell_hi.or(file.ell_hi).unwrap_or(0.55),
        eps,
        format,
        out: cli.out.clone().or(file.out),
        threads: cli.threads.or(file.threads),
    };
    if config.grid_n < 2 {
        bail!("grid_n must be at least 2");
    }
    if config.replicas == 0 {
        bail!("replicas must be at least 1");
    }
    if config.eps.iter().any(|&e| e <= 0.0) {
        bail!("every eps must be positive");
    }
    if !(config.ell_lo > 0.0 && config.ell_lo < config.ell_hi) {
        bail!("need 0 < ell_lo < ell_hi");
    }
    Ok(config)
}

fn metadata_line(config: &RunConfig) -> String {
    format!(
        "# seed={} grid_n={} replicas={} version={}",
        config.seed, config.grid_n, config.replicas, VERSION
    )
}

/// A table as ordered column names plus rows of preformatted cells.
struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn render(&self, format: Format, config: &RunConfig) -> String {
        match format {
            Format::Csv => {
                let mut out = String::new();
                out.push_str(&self.columns.join(","));
                out.push('\n');
                for row in &self.rows {
                    out.push_str(&row.join(","));
                    out.push('\n');
                }
                out.push_str(&metadata_line(config));
                out.push('\n');
                out
            }
            Format::Json => {
                let rows: Vec<serde_json::Value> = self
                    .rows
                    .iter()
                    .map(|row| {
                        let mut object = serde_json::Map::new();
                        for (name, cell) in self.columns.iter().zip(row) {
                            let value = cell
                                .parse::<f64>()
                                .ok()
                                .filter(|v| v.is_finite())
                                .map(|v| json!(v))
                                .unwrap_or_else(|| json!(cell));
                            object.insert((*name).to_string(), value);
                        }
                        serde_json::Value::Object(object)
                    })
                    .collect();
                let doc = json!({
                    "rows": rows,
                    "meta": {
                        "seed": config.seed,
                        "grid_n": config.grid_n,
                        "replicas": config.replicas,
                        "version": VERSION,
                    }
                });
                let mut text = serde_json::to_string_pretty(&doc).expect("table serializes");
                text.push('\n');
                text
            }
        }
    }
}

fn gate(pass: bool) -> String {
    if pass {
        "pass".into()
    } else {
        "fail".into()
    }
}

fn cmd_selftest(config: &RunConfig, inject: f64) -> Result<(Table, bool)> {
    let suites = selfcheck::run_all(config.seed, inject)?;
    let all_pass = suites.iter().all(|s| s.pass);
    let rows = suites
        .iter()
        .map(|s| {
            vec![
                s.name.clone(),
                s.checks.to_string(),
                format!("{:e}", s.worst),
                format!("{:e}", s.tol),
                gate(s.pass),
            ]
        })
        .collect();
    Ok((
        Table {
            columns: vec!["suite", "checks", "worst", "tol", "gate"],
            rows,
        },
        all_pass,
    ))
}

fn cmd_volume(config: &RunConfig) -> Result<(Table, bool)> {
    let rows = volume_law_experiment(&VolumeLawConfig {
        n: config.grid_n,
        seed: config.seed,
        replicas: config.replicas,
        eps_list: config.eps.clone(),
    })?;
    let all_pass = rows
        .iter()
        .all(|r| r.volume_gate && r.split_gate && r.root_vs_random_gate);
    let table_rows = rows
        .iter()
        .map(|r| {
            vec![
                r.eps.to_string(),
                r.mc_mean.to_string(),
                r.se.to_string(),
                r.closed_form.to_string(),
                gate(r.volume_gate),
                r.split_ancestry_mean.to_string(),
                r.split_ancestry_se.to_string(),
                r.split_offspring_mean.to_string(),
                r.split_offspring_se.to_string(),
                r.half_closed_form.to_string(),
                gate(r.split_gate),
                r.root_mean.to_string(),
                r.root_se.to_string(),
                gate(r.root_vs_random_gate),
            ]
        })
        .collect();
    Ok((
        Table {
            columns: vec![
                "eps",
                "mc_mean",
                "se",
                "closed_form",
                "volume_gate",
                "ancestry_mean",
                "ancestry_se",
                "offspring_mean",
                "offspring_se",
                "half_closed_form",
                "split_gate",
                "root_mean",
                "root_se",
                "root_vs_random_gate",
            ],
            rows: table_rows,
        },
        all_pass,
    ))
}

fn cmd_curvature(config: &RunConfig, centers: Centers) -> Result<(Table, bool)> {
    if !(config.delta > 0.0 && config.delta < config.ell_lo) {
        bail!("need 0 < delta < ell_lo for curvature runs");
    }
    let run = mc_curvature_run(&McCurvatureConfig {
        n: config.grid_n,
        seed: config.seed,
        replicas: config.replicas,
        delta: config.delta,
        ell_lo: config.ell_lo,
        ell_hi: config.ell_hi,
        centers: match centers {
            Centers::Uniform => CenterMode::UniformVertex,
            Centers::Skeleton => CenterMode::SkeletonPoint,
        },
    })?;
    let delta = config.delta;
    let band_lo = -2.0 * delta / run.mean_ell - 4.0 * run.kappa_se;
    let band_hi = -(F_AT_ZERO - 0.01) * delta / run.mean_ell + 4.0 * run.kappa_se;
    let band_gate = run.mean_kappa >= band_lo && run.mean_kappa <= band_hi;
    let gap_threshold = (F_AT_ZERO - 0.01) * delta;
    let gap_gate = run.gap_minus_ell_mean > gap_threshold - 4.0 * run.gap_minus_ell_se;
    let pathwise_gate = run.max_upper_slack <= 1e-9;
    let duality_gate = run.max_duality_slack <= 1e-9;
    let all_pass = band_gate && gap_gate && pathwise_gate && duality_gate;
    let row = vec![
        delta.to_string(),
        config.ell_lo.to_string(),
        config.ell_hi.to_string(),
        match centers {
            Centers::Uniform => "uniform".to_string(),
            Centers::Skeleton => "skeleton".to_string(),
        },
        run.trials.to_string(),
        run.accepted.to_string(),
        run.mean_ell.to_string(),
        run.mean_kappa.to_string(),
        run.kappa_se.to_string(),
        band_lo.to_string(),
        band_hi.to_string(),
        gate(band_gate),
        run.mean_w1.to_string(),
        run.w1_se.to_string(),
        run.gap_minus_ell_mean.to_string(),
        run.gap_minus_ell_se.to_string(),
        gap_threshold.to_string(),
        gate(gap_gate),
        gate(pathwise_gate),
        gate(duality_gate),
    ];
    Ok((
        Table {
            columns: vec![
                "delta",
                "ell_lo",
                "ell_hi",
                "centers",
                "trials",
                "accepted",
                "mean_ell",
                "mean_kappa",
                "kappa_se",
                "band_lo",
                "band_hi",
                "band_gate",
                "mean_w1",
                "w1_se",
                "gap_minus_ell_mean",
                "gap_minus_ell_se",
                "gap_threshold",
                "gap_gate",
                "pathwise_gate",
                "duality_gate",
            ],
            rows: vec![row],
        },
        all_pass,
    ))
}

fn cmd_analysis(config: &RunConfig) -> Result<(Table, bool)> {
    let report = appendix_report();
    let table_excess = report
        .numeric_f
        .iter()
        .map(|&(_, v)| v - F_AT_ZERO)
        .fold(f64::NEG_INFINITY, f64::max);
    let exact_gate = *report.f_at_zero.numer() == 19 && *report.f_at_zero.denom() == 128;
    let dominance_gate = table_excess <= 1e-12;
    let derivative_gate = report.derivative_at_zero_numeric.abs() < 1e-6;
    let max_gate = report.max_location == 0.0;
    let mut rows = vec![
        vec![
            "f_at_zero".into(),
            format!("{}", F_AT_ZERO),
            gate(exact_gate),
        ],
        vec![
            "f_at_zero_rational".into(),
            format!("{}/{}", report.f_at_zero.numer(), report.f_at_zero.denom()),
            gate(exact_gate),
        ],
        vec![
            "derivative_at_zero".into(),
            report.derivative_at_zero_numeric.to_string(),
            gate(derivative_gate),
        ],
        vec![
            "max_location".into(),
            report.max_location.to_string(),
            gate(max_gate),
        ],
        vec![
            "f_table_max_excess".into(),
            format!("{:e}", table_excess),
            gate(dominance_gate),
        ],
    ];
    for &eps in &config.eps {
        rows.push(vec![
            format!("expected_ball_volume({eps})"),
            bcrt::analysis::expected_ball_volume(eps).to_string(),
            "pass".into(),
        ]);
    }
    let all_pass = exact_gate && dominance_gate && derivative_gate && max_gate;
    Ok((
        Table {
            columns: vec!["quantity", "value", "gate"],
            rows,
        },
        all_pass,
    ))
}

fn cmd_transport_bench(config: &RunConfig) -> Result<(Table, bool)> {
    let sampler = SamplerConfig {
        n: config.grid_n,
        seed: config.seed,
        replica_index: 0,
    };
    let tree = MetricTree::encode(sample_excursion::<f64>(&sampler));
    let n = tree.n();
    let queries = config.replicas;
    let mut rng = {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(u64::MAX);
        rng
    };
    use rand::Rng;
    let started = std::time::Instant::now();
    let mut total_cost = 0.0f64;
    let mut checksum = 0.0f64;
    let mut performed = 0u64;
    while performed < queries {
        let x = TreePoint::Grid(rng.gen_range(0..n));
        let y = TreePoint::Grid(rng.gen_range(0..n));
        if tree.distance(&x, &y) <= config.delta {
            continue;
        }
        let mu = uniform_ball_measure(&tree, &x, config.delta)?;
        let nu = uniform_ball_measure(&tree, &y, config.delta)?;
        let cost = w1_edge_cut(&tree, &mu, &nu)?.cost;
        total_cost += cost;
        checksum = 0.5 * checksum + cost;
        performed += 1;
    }
    let elapsed = started.elapsed().as_secs_f64();
    eprintln!(
        "transport-bench: {performed} edge-cut W1 queries at n={n} in {elapsed:.3}s \
         ({:.0} queries/s)",
        performed as f64 / elapsed
    );
    let row = vec![
        n.to_string(),
        performed.to_string(),
        (total_cost / performed as f64).to_string(),
        checksum.to_string(),
    ];
    Ok((
        Table {
            columns: vec!["n", "queries", "mean_cost", "cost_checksum"],
            rows: vec![row],
        },
        true,
    ))
}

fn run() -> Result<ExitCode> {
    let cli = Cli::parse();
    let config = resolve_config(&cli)?;
    if let Some(threads) = config.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("building thread pool")?;
    }
    let (table, pass) = match &cli.command {
        Command::Selftest { inject_w1_fault } => cmd_selftest(&config, *inject_w1_fault)?,
        Command::Volume => cmd_volume(&config)?,
        Command::Curvature { centers } => cmd_curvature(&config, *centers)?,
        Command::Analysis => cmd_analysis(&config)?,
        Command::TransportBench => cmd_transport_bench(&config)?,
    };
    let rendered = table.render(config.format, &config);
    print!("{rendered}");
    if let Some(path) = &config.out {
        let mut file =
            fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
        file.write_all(rendered.as_bytes())?;
    }
    Ok(if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
