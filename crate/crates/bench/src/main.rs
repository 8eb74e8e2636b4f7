use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use motorscene_bench::aggregate::{aggregate_all, AggregateRow};
use motorscene_bench::catalog;
use motorscene_bench::record::{read_jsonl, write_csv};
use motorscene_bench::report::{clustered_sign_test, parse_contrasts};
use motorscene_bench::{
    aggregate, pairwise_report, protocol_snapshot, run_suite, BenchError, Endpoint, JsonlWriter, MethodAggregate,
    PairwiseRow, RunOptions, SnapshotConfig,
};
use motorscene_gateway::{GatewayConfig, MockFixture, MockProvider, Provider, StrategyName};

#[derive(Parser)]
#[command(name = "motorscene-bench", version, about = "Run and report language-to-scene-edit benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a suite and write records, aggregates, pairwise contrasts and the protocol snapshot.
    Run(RunArgs),
    /// Recompute aggregates and pairwise contrasts from a records file.
    Report(ReportArgs),
    /// Print the protocol snapshot as JSON.
    Snapshot(SnapshotArgs),
    /// Write the built-in suites and their mock fixtures as JSON files.
    Export(ExportArgs),
    /// List the built-in suites.
    List,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProviderChoice {
    Mock,
    Live,
}

#[derive(Args)]
struct RunArgs {
    /// Built-in suite name or path to a suite JSON file.
    #[arg(long)]
    suite: String,
    /// Comma-separated methods, overriding the suite's list.
    #[arg(long, value_delimiter = ',')]
    methods: Vec<StrategyName>,
    /// Attempt budget(s) k, overriding the suite's policies.
    #[arg(long = "policy", value_delimiter = ',')]
    policies: Vec<u32>,
    /// Repeats per task, overriding the suite's trial count
    #[arg(long)]
    trials: Option<u32>,
    #[arg(long, value_enum, default_value = "mock")]
    provider: ProviderChoice,
    /// Mock fixture; built-in suites default to their generated fixture.
    #[arg(long)]
    mock_fixture: Option<PathBuf>,
    /// Gateway config (TOML) for the live provider.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long, default_value = "bench-out")]
    out: PathBuf,
    /// Recorded in the snapshot; overrides the suite seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 1)]
    parallelism: usize,
    /// Pairwise contrasts like simple_cga:compact_se3 (default: all pairs).
    #[arg(long, default_value = "")]
    contrasts: String,
}

#[derive(Args)]
struct ReportArgs {
    /// records.jsonl written by `run`
    #[arg(long)]
    records: PathBuf,
    /// Restrict to one endpoint (parse, semantic, fidelity, exact_placement).
    #[arg(long)]
    endpoint: Option<String>,
    /// Report pass@k for this k only
    #[arg(long)]
    k: Option<u32>,
    #[arg(long, default_value = "")]
    contrasts: String,
    /// Write pairwise rows to this CSV instead of printing only.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also run the template-clustered sign test for each contrast.
    #[arg(long)]
    sign_test: bool,
}

#[derive(Args)]
struct SnapshotArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Defaults to the published snapshot time.
    #[arg(long)]
    timestamp: Option<String>,
}

#[derive(Args)]
struct ExportArgs {
    /// Directory receiving suites/ and fixtures/.
    #[arg(long, default_value = ".")]
    dir: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Report(args) => report(args),
        Command::Snapshot(args) => snapshot(args),
        Command::Export(args) => export(args),
        Command::List => {
            for name in catalog::BUILTIN {
                let cs = catalog::builtin(name).expect("listed suites exist");
                println!("{name:<16} {:>4} tasks  {}", cs.suite.task_count(), cs.suite.description);
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                BenchError::Io(_) => ExitCode::FAILURE,
                _ => ExitCode::from(2),
            }
        }
    }
}

fn gateway_config(path: Option<&Path>) -> Result<GatewayConfig, BenchError> {
    Ok(match path {
        Some(p) => GatewayConfig::from_path(p).map_err(|e| BenchError::Config(e.to_string()))?,
        None => GatewayConfig::default(),
    })
}

fn run(args: RunArgs) -> Result<(), BenchError> {
    let loaded = catalog::load(&args.suite)?;
    let mut suite = loaded.suite;
    if !args.methods.is_empty() {
        suite = suite.with_methods(args.methods.clone())?;
    }
    if !args.policies.is_empty() {
        suite = suite.with_policies(args.policies.clone())?;
    }
    if let Some(t) = args.trials {
        suite = suite.with_trials(t)?;
    }
    if let Some(seed) = args.seed {
        suite.seed = seed;
    }
    suite.validate()?;
    let contrasts = parse_contrasts(&args.contrasts)?;

    let config = gateway_config(args.config.as_deref())?;
    let provider: Arc<dyn Provider> = match args.provider {
        ProviderChoice::Live => {
            if !config.llm_available() {
                return Err(BenchError::Config(format!(
                    "live provider needs an API key in ${}",
                    config.api_key_env
                )));
            }
            config.build_provider().map_err(|e| BenchError::Config(e.to_string()))?
        }
        ProviderChoice::Mock => {
            let fixture = match (&args.mock_fixture, &config.mock_fixture, &loaded.catalog) {
                (Some(p), _, _) | (None, Some(p), _) => {
                    MockFixture::from_path(p).map_err(|e| BenchError::Config(e.to_string()))?
                }
                (None, None, Some(cs)) => catalog::mock_fixture(cs),
                (None, None, None) => {
                    return Err(BenchError::Config("a file suite needs --mock-fixture for the mock provider".into()))
                }
            };
            Arc::new(MockProvider::new(fixture).map_err(|e| BenchError::Config(e.to_string()))?)
        }
    };

    fs::create_dir_all(&args.out)?;
    let snap_cfg = SnapshotConfig::from_gateway(
        &config,
        chrono::Local::now().format("%Y-%m-%d %H:%M:%S").to_string(),
        suite.seed,
    );
    fs::write(
        args.out.join("snapshot.json"),
        serde_json::to_string_pretty(&protocol_snapshot(&snap_cfg)).expect("snapshot serializes"),
    )?;
    fs::write(args.out.join("suite.json"), suite.to_json())?;

    let mut writer = JsonlWriter::create(args.out.join("records.jsonl"))?;
    let options = RunOptions {
        parallelism: args.parallelism,
    };
    eprintln!(
        "running '{}' via {}: {} rows",
        suite.name,
        provider.id(),
        suite.jobs().len()
    );
    let records = run_suite(&suite, loaded.base_dir.as_deref(), provider.as_ref(), &options, |r| writer.write(r))?;

    let aggregates = aggregate_all(&records)?;
    write_aggregates(&args.out.join("aggregate.csv"), &aggregates)?;
    print_aggregates(&aggregates);
    if suite.methods.len() >= 2 {
        let pairs = pairwise_report(&aggregates, &contrasts)?;
        write_csv(args.out.join("pairwise.csv"), &pairs)?;
        print_pairs(&pairs);
    }
    let outages = records.iter().filter(|r| r.outage()).count();
    if outages > 0 {
        eprintln!("{outages} rows hit provider errors on every attempt; they count as failures");
    }
    eprintln!("wrote {}", args.out.display());
    Ok(())
}

fn write_aggregates(path: &Path, aggregates: &[MethodAggregate]) -> Result<(), BenchError> {
    let rows: Vec<AggregateRow> = aggregates.iter().map(AggregateRow::from).collect();
    write_csv(path, &rows)
}

fn print_aggregates(aggregates: &[MethodAggregate]) {
    println!(
        "{:<16} {:<20} {:>2} {:>9} {:>7} {:>17} {:>9} {:>9}",
        "endpoint", "method", "k", "succ/n", "rate", "95% CI", "tok(ok)", "lat(s)"
    );
    for a in aggregates {
        println!(
            "{:<16} {:<20} {:>2} {:>9} {:>6.1}% {:>17} {:>9} {:>9}",
            a.endpoint.as_str(),
            a.method.as_str(),
            a.k,
            format!("{}/{}", a.successes, a.n),
            100.0 * a.rate,
            format!("[{:.1}, {:.1}]", 100.0 * a.wilson.lo, 100.0 * a.wilson.hi),
            a.avg_completion_tokens_success_rows.map_or("-".into(), |t| format!("{t:.1}")),
            a.latency.as_ref().map_or("-".into(), |l| format!("{:.3}", l.total.mean)),
        );
    }
}

fn print_pairs(pairs: &[PairwiseRow]) {
    println!();
    println!(
        "{:<16} {:>2} {:<38} {:>24} {:>7} {:>7} {:>8}",
        "endpoint", "k", "contrast", "RD pp [95% CI]", "RR", "OR", "Fisher p"
    );
    for p in pairs {
        println!(
            "{:<16} {:>2} {:<38} {:>24} {:>7.3} {:>7.3} {:>8.4}",
            p.endpoint.as_str(),
            p.k,
            format!("{} vs {}", p.method_a, p.method_b),
            format!("{:+.1} [{:.1}, {:.1}]", p.risk_diff_pp, p.risk_diff_lo_pp, p.risk_diff_hi_pp),
            p.rr_haldane,
            p.or_haldane,
            p.fisher_p,
        );
    }
}

fn report(args: ReportArgs) -> Result<(), BenchError> {
    let records = read_jsonl(&args.records)?;
    let contrasts = parse_contrasts(&args.contrasts)?;
    let endpoint: Option<Endpoint> = args.endpoint.as_deref().map(str::parse).transpose()?;
    let aggregates: Vec<MethodAggregate> = match (endpoint, args.k) {
        (Some(e), Some(k)) => aggregate(&records, e, k)?,
        _ => aggregate_all(&records)?
            .into_iter()
            .filter(|a| endpoint.is_none_or(|e| a.endpoint == e) && args.k.is_none_or(|k| a.k == k))
            .collect(),
    };
    if aggregates.is_empty() {
        return Err(BenchError::Config("no aggregates match the requested endpoint and k".into()));
    }
    print_aggregates(&aggregates);
    let pairs = pairwise_report(&aggregates, &contrasts)?;
    print_pairs(&pairs);
    if let Some(out) = &args.out {
        write_csv(out, &pairs)?;
    }
    if args.sign_test {
        println!();
        for p in &pairs {
            let s = clustered_sign_test(&records, p.endpoint, p.k, p.method_a, p.method_b)?;
            println!(
                "sign test {} {} vs {} @{}: {} wins / {} losses / {} ties, p = {:.4}",
                p.endpoint, p.method_a, p.method_b, p.k, s.wins, s.losses, s.ties, s.p_two_sided
            );
        }
    }
    Ok(())
}

fn snapshot(args: SnapshotArgs) -> Result<(), BenchError> {
    let config = gateway_config(args.config.as_deref())?;
    let cfg = SnapshotConfig::from_gateway(&config, snapshot_time(args.timestamp), args.seed);
    println!("{}", serde_json::to_string_pretty(&protocol_snapshot(&cfg)).expect("snapshot serializes"));
    Ok(())
}

fn snapshot_time(given: Option<String>) -> String {
    given.unwrap_or_else(|| motorscene_bench::snapshot::PUBLISHED_TIMESTAMP.to_string())
}

fn export(args: ExportArgs) -> Result<(), BenchError> {
    let suites = args.dir.join("suites");
    let fixtures = args.dir.join("fixtures");
    fs::create_dir_all(&suites)?;
    fs::create_dir_all(&fixtures)?;
    for name in catalog::BUILTIN {
        let cs = catalog::builtin(name).expect("listed suites exist");
        fs::write(suites.join(format!("{name}.json")), cs.suite.to_json())?;
        fs::write(fixtures.join(format!("{name}_mock.json")), catalog::mock_fixture(&cs).to_json())?;
        println!("exported {name}");
    }
    Ok(())
}
