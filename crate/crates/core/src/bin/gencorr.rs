use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use gencorr::channels::ChannelKind;
use gencorr::classical_search::SearchConfig;
use gencorr::entropy::{total_correlation, von_neumann_entropy};
use gencorr::experiments::{
    default_spec, detect_sudden_change_with, run_sweep, seed_from_env, verify_anchors,
    verify_appendix, write_outputs, Measure, RunConfig, SuddenChangeOptions, SweepTable,
};
use gencorr::genuine_correlations::{
    degree_of, genuine_classical_ck, genuine_classical_cn, genuine_quantum_qk, genuine_quantum_qn,
    genuine_total_ik, genuine_total_in, multipartite_quantum_q, CorrelationReport, DegreeKind,
    Witness,
};
use gencorr::linalg::{DensityMatrix, PureState};
use gencorr::{Error, Result};

#[derive(Parser)]
#[command(name = "gencorr", version, about = "Genuine multipartite correlations under local decoherence")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep the damping parameter and write one CSV row per (c, p).
    Sweep(SweepArgs),
    /// Check reference values and closed forms; exits 1 on any failure.
    VerifyAnchors(AnchorArgs),
    /// Compare the dilated evolution with the explicit matrix elements.
    VerifyAppendix {
        #[arg(long, default_value_t = 11)]
        points: usize,
        #[arg(long, default_value_t = 1e-10)]
        tolerance: f64,
    },
    /// Evaluate quantifiers on a state stored as JSON.
    StateInfo(StateInfoArgs),
    /// Locate slope discontinuities in a sweep CSV.
    SuddenChange {
        csv: PathBuf,
        #[arg(long)]
        measure: String,
        #[arg(long, default_value_t = 10.0)]
        kappa: f64,
    },
}

#[derive(Args)]
struct SearchArgs {
    /// Random seed for the basis search (overrides GENCORR_SEED).
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    starts: Option<usize>,
    #[arg(long)]
    max_evals: Option<usize>,
    /// Key-value config file.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl SearchArgs {
    fn load_config(&self) -> Result<RunConfig> {
        match &self.config {
            Some(path) => RunConfig::load(path),
            None => Ok(RunConfig::default()),
        }
    }

    fn apply(&self, cfg: &mut SearchConfig) -> Result<()> {
        if let Some(seed) = seed_from_env()? {
            cfg.rng_seed = seed;
        }
        if let Some(seed) = self.seed {
            cfg.rng_seed = seed;
        }
        if let Some(s) = self.starts {
            cfg.starts = s;
            cfg.large_cell_starts = s;
        }
        if let Some(e) = self.max_evals {
            cfg.max_evals = e;
        }
        cfg.validate()
    }

    fn search_config(&self) -> Result<SearchConfig> {
        let mut cfg = SearchConfig::default();
        self.load_config()?.apply_search(&mut cfg);
        self.apply(&mut cfg)?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    channel: Option<ChannelKind>,
    /// Comma-separated Werner parameters.
    #[arg(long, value_delimiter = ',')]
    c: Option<Vec<f64>>,
    /// Number of equally spaced p values in [0, 1].
    #[arg(long)]
    points: Option<usize>,
    /// Comma-separated measures: I4, I3, I3_abEa, I3_aEaEb, Q4, Q3, C4, C3, F_W, F_GHZ.
    #[arg(long, value_delimiter = ',')]
    measures: Option<Vec<Measure>>,
    /// CSV path; a JSON manifest is written next to it. Stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Evaluate one representative per (a,E_a) <-> (b,E_b) orbit.
    #[arg(long)]
    symmetry: bool,
    #[command(flatten)]
    search: SearchArgs,
}

#[derive(Args)]
struct AnchorArgs {
    #[arg(long)]
    json: bool,
    #[command(flatten)]
    search: SearchArgs,
}

#[derive(Args)]
struct StateInfoArgs {
    /// JSON density matrix `{dims, re, im}` or pure state.
    file: PathBuf,
    /// Comma-separated: S, I, I<k>, Q, Q<k>, C<k>, degree-total,
    /// degree-quantum, degree-classical.
    #[arg(long, value_delimiter = ',', default_value = "S,I")]
    measures: Vec<String>,
    #[command(flatten)]
    search: SearchArgs,
}

fn sweep(args: SweepArgs, out: &mut dyn Write) -> Result<ExitCode> {
    let file = args.search.load_config()?;
    let mut spec = default_spec(file.channel.unwrap_or(ChannelKind::AmplitudeDamping));
    file.apply(&mut spec);
    args.search.apply(&mut spec.search)?;
    if let Some(ch) = args.channel {
        spec.channel = ch;
    }
    if let Some(c) = args.c {
        spec.c_values = c;
    }
    if args.points.is_some() {
        spec.p_points = args.points;
    }
    if let Some(m) = args.measures {
        spec.measures = m;
    }
    if args.out.is_some() {
        spec.output = args.out;
    }
    spec.symmetry |= args.symmetry;

    let table = run_sweep(&spec)?;
    for row in table.flagged() {
        eprintln!(
            "warning: c={} p={}: {}",
            row.c,
            row.p,
            row.flag.as_deref().unwrap_or("")
        );
    }
    match &spec.output {
        Some(path) => {
            let manifest = write_outputs(&spec, &table, path)?;
            eprintln!("wrote {} and {}", path.display(), manifest.display());
        }
        None => table.write_csv(out)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn anchors(args: AnchorArgs, out: &mut dyn Write) -> Result<ExitCode> {
    let cfg = args.search.search_config()?;
    let report = verify_anchors(&cfg)?;
    if args.json {
        print_json(out, &report)?;
    } else {
        for c in &report.checks {
            let rel = serde_json::to_value(c.relation)?;
            writeln!(
                out,
                "[{}] {}: observed {:e}, {} {:e} (tol {:e})",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                c.observed,
                rel.as_str().unwrap_or("?"),
                c.target,
                c.tolerance
            )?;
        }
    }
    Ok(if report.all_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn appendix(points: usize, tolerance: f64, out: &mut dyn Write) -> Result<ExitCode> {
    if points < 2 {
        return Err(Error::InvalidParameter("points must be at least 2".into()));
    }
    let cells = verify_appendix(points);
    writeln!(out, "channel,c,p,max_abs,frobenius")?;
    for c in &cells {
        writeln!(out, "{},{},{},{:e},{:e}", c.channel, c.c, c.p, c.max_abs, c.frobenius)?;
    }
    let worst = cells.iter().map(|c| c.frobenius).fold(0.0, f64::max);
    eprintln!("max Frobenius deviation {worst:e} (tolerance {tolerance:e})");
    Ok(if worst <= tolerance {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn load_state(path: &PathBuf) -> Result<DensityMatrix> {
    let text = std::fs::read_to_string(path)?;
    match serde_json::from_str::<DensityMatrix>(&text) {
        Ok(rho) => Ok(rho),
        Err(dm_err) => match serde_json::from_str::<PureState>(&text) {
            Ok(psi) => Ok(psi.density()),
            Err(_) => Err(Error::Json(dm_err)),
        },
    }
}

fn scalar(name: &str, v: f64) -> CorrelationReport {
    CorrelationReport {
        name: name.into(),
        value_bits: v,
        witness: Witness::None,
        evals: None,
        starts: None,
    }
}

fn state_measure(rho: &DensityMatrix, name: &str, cfg: &SearchConfig) -> Result<CorrelationReport> {
    let n = rho.n_subsystems();
    let k_of = |s: &str| -> Result<usize> {
        s.parse().map_err(|_| Error::UnknownMeasure(name.to_string()))
    };
    match name {
        "S" => return Ok(scalar("S", von_neumann_entropy(rho).expect_bits())),
        "I" => return Ok(scalar("I", total_correlation(rho)?.expect_bits())),
        "Q" => return Ok(multipartite_quantum_q(rho, cfg)?.report),
        _ => {}
    }
    if let Some(kind) = name.strip_prefix("degree-") {
        let kind: DegreeKind = kind.parse()?;
        let d = degree_of(rho, kind, cfg)?;
        return Ok(scalar(name, d as f64));
    }
    let (head, tail) = name.split_at(1.min(name.len()));
    let k = k_of(tail)?;
    match (head, k == n) {
        ("I", true) => genuine_total_in(rho),
        ("I", false) => genuine_total_ik(rho, k),
        ("Q", true) => genuine_quantum_qn(rho, cfg),
        ("Q", false) => genuine_quantum_qk(rho, k, cfg),
        ("C", true) => genuine_classical_cn(rho, cfg),
        ("C", false) => genuine_classical_ck(rho, k, cfg),
        _ => Err(Error::UnknownMeasure(name.to_string())),
    }
}

fn state_info(args: StateInfoArgs, out: &mut dyn Write) -> Result<ExitCode> {
    let cfg = args.search.search_config()?;
    let rho = load_state(&args.file)?;
    let reports = args
        .measures
        .iter()
        .map(|m| state_measure(&rho, m.trim(), &cfg))
        .collect::<Result<Vec<_>>>()?;
    print_json(out, &reports)?;
    Ok(ExitCode::SUCCESS)
}

fn sudden(csv: PathBuf, measure: &str, kappa: f64, out: &mut dyn Write) -> Result<ExitCode> {
    let table = SweepTable::load_csv(&csv)?;
    let measure: Measure = measure.parse()?;
    let opts = SuddenChangeOptions {
        kappa,
        ..SuddenChangeOptions::default()
    };
    print_json(out, &detect_sudden_change_with(&table, measure, &opts)?)?;
    Ok(ExitCode::SUCCESS)
}

fn print_json<T: Serialize>(out: &mut dyn Write, v: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, v)?;
    writeln!(out)?;
    Ok(())
}

fn execute(cli: Cli, out: &mut dyn Write) -> ExitCode {
    let result = match cli.command {
        Command::Sweep(a) => sweep(a, out),
        Command::VerifyAnchors(a) => anchors(a, out),
        Command::VerifyAppendix { points, tolerance } => appendix(points, tolerance, out),
        Command::StateInfo(a) => state_info(a, out),
        Command::SuddenChange {
            csv,
            measure,
            kappa,
        } => sudden(csv, &measure, kappa, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn main() -> ExitCode {
    execute(Cli::parse(), &mut std::io::stdout().lock())
}
