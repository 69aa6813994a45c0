use std::collections::BTreeMap;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use pi_core::ast::{parse_query, sql_catalog, SQL_SUBSET};
use pi_core::diff::{align, debug_json};
use pi_core::gen::{generate_olap_log, generate_templated_log, OlapEdit, OlapGenConfig};
use pi_core::log::{read_log_file, write_log};
use pi_core::mining::{build_graph, GraphJson, InteractionGraph, MetaFilter, MineOpts, PairMode, PairStrategy};
use pi_core::pilang::suggest_statements;
use pi_core::pipeline::{read_statements, synthesize_spec, InterfaceSpec};
use pi_core::synth::{SynthOpts, WidgetType, COST_FAMILIES};
use pi_service::{Backend, SqliteBackend};

/// Precision-interface tooling: mine a query log for structural changes and
/// synthesize interactive interfaces that express it.
#[derive(Parser)]
#[command(name = "pi", version)]
struct Cli {
    /// Log progress to stderr (repeat for more).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the interaction graph of a log.
    Mine {
        #[command(flatten)]
        mine: MineArgs,
        /// Graph JSON destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the comparison counters here.
        #[arg(long)]
        stats: Option<PathBuf>,
    },
    /// Synthesize interfaces from a mined graph.
    Synthesize {
        #[arg(long)]
        graph: PathBuf,
        #[command(flatten)]
        synth: SynthArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// mine + synthesize in one go.
    Run {
        #[command(flatten)]
        mine: MineArgs,
        #[command(flatten)]
        synth: SynthArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Keep the mined graph too.
        #[arg(long)]
        graph_out: Option<PathBuf>,
    },
    /// Propose PILang statements for frequent small differences.
    Suggest {
        #[arg(long)]
        log: PathBuf,
        #[arg(long, default_value_t = 100)]
        sample: usize,
        #[arg(long = "max-diffs", default_value_t = 3)]
        max_diffs: usize,
        /// Statements already written; pairs they explain are skipped.
        #[arg(long)]
        pilang: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print the alignment of two queries as JSON.
    Diff { a: PathBuf, b: PathBuf },
    /// Write a synthetic log as JSON lines.
    Generate {
        #[arg(long, default_value_t = 100)]
        steps: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Edit weights, e.g. `filter-change-val=4,dim-add=1`; unlisted edits never happen.
        #[arg(long)]
        edits: Option<String>,
        /// Template-heavy log instead of an OLAP session.
        #[arg(long)]
        templated: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serve a spec over HTTP against a CSV-backed database.
    Serve {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        db: PathBuf,
        #[arg(long)]
        table: String,
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: SocketAddr,
        /// Static UI bundle served under `/`.
        #[arg(long)]
        assets: Option<PathBuf>,
    },
}

#[derive(Args)]
struct MineArgs {
    #[arg(long)]
    log: PathBuf,
    #[arg(long)]
    pilang: PathBuf,
    /// `all` pairs or consecutive (`seq`) pairs.
    #[arg(long, default_value = "all")]
    pairs: String,
    #[arg(long, default_value = "both")]
    opt: MineOpts,
    /// Accept pairs that several statements explain only together.
    #[arg(long)]
    compose: bool,
    /// Only pair queries whose metadata has `key=value`.
    #[arg(long)]
    filter: Option<MetaFilter>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    /// Cost-family weights, e.g. `visual=1,effort=1`; missing families weigh 1.
    #[arg(long, default_value = "visual=1,effort=1")]
    alpha: String,
    #[arg(long, default_value_t = 1.0)]
    c0: f64,
    /// Widget types to choose from (comma-separated ids); all by default.
    #[arg(long)]
    widgets: Option<String>,
    /// Execute closure queries during synthesis to mask invalid ones.
    /// Not available.
    #[arg(long = "speculative-exec", hide = true)]
    speculative_exec: bool,
}

fn parse_alphas(s: &str) -> Result<Vec<f64>> {
    let mut given: BTreeMap<&str, f64> = BTreeMap::new();
    for kv in s.split(',').map(str::trim).filter(|kv| !kv.is_empty()) {
        let (k, v) = kv.split_once('=').ok_or_else(|| anyhow!("--alpha expects family=weight, got '{kv}'"))?;
        let k = k.trim();
        if !COST_FAMILIES.contains(&k) {
            bail!("unknown cost family '{k}' (expected one of {})", COST_FAMILIES.join(", "));
        }
        let v: f64 = v.trim().parse().with_context(|| format!("weight for {k}"))?;
        if !(v >= 0.0 && v.is_finite()) {
            bail!("weight for {k} must be a non-negative number");
        }
        given.insert(k, v);
    }
    Ok(COST_FAMILIES.iter().map(|f| given.get(f).copied().unwrap_or(1.0)).collect())
}

fn parse_widgets(s: &str) -> Result<Vec<WidgetType>> {
    s.split(',')
        .map(str::trim)
        .filter(|w| !w.is_empty())
        .map(|w| WidgetType::ALL.into_iter().find(|t| t.id() == w).ok_or_else(|| anyhow!("unknown widget type '{w}'")))
        .collect()
}

impl SynthArgs {
    fn opts(&self) -> Result<SynthOpts> {
        if self.speculative_exec {
            bail!("speculative closure execution is not available");
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            bail!("--gamma must lie in [0, 1]");
        }
        if !(self.c0 >= 0.0 && self.c0.is_finite()) {
            bail!("--c0 must be a non-negative number");
        }
        let types = match &self.widgets {
            Some(w) => parse_widgets(w)?,
            None => WidgetType::ALL.to_vec(),
        };
        Ok(SynthOpts { types, alphas: parse_alphas(&self.alpha)?, gamma: self.gamma, c0: self.c0, log_size: None })
    }
}

impl MineArgs {
    fn mine(&self) -> Result<(InteractionGraph, usize)> {
        let mode = match self.pairs.as_str() {
            "all" => PairMode::All,
            "seq" => PairMode::Sequential,
            other => bail!("unknown --pairs '{other}' (all|seq)"),
        };
        let log = read_log_file(&self.log).with_context(|| format!("{}", self.log.display()))?;
        let statements = read_statements(&self.pilang)?;
        let opts = MineOpts { compose: self.compose, ..self.opt };
        let strategy = PairStrategy { mode, filter: self.filter.clone() };
        let g = build_graph(&log.entries, &statements, &strategy, opts, sql_catalog())?;
        tracing::info!(queries = g.nodes.len(), edges = g.edge_count(), "mined");
        Ok((g, log.total()))
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, format!("{text}\n")).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut o = std::io::stdout().lock();
            writeln!(o, "{text}")?;
            Ok(())
        }
    }
}

fn graph_json(g: &InteractionGraph, log_size: usize) -> String {
    let j = GraphJson { log_size: Some(log_size), ..g.to_json() };
    serde_json::to_string_pretty(&j).expect("graph serializes")
}

/// Writes the interface spec; coverage short of gamma is exit status 2.
fn finish(spec: &InterfaceSpec, out: Option<&Path>) -> Result<ExitCode> {
    emit(out, &spec.to_json())?;
    if spec.coverage_met() {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("warning: coverage {:.4} is below gamma {}", spec.meta.coverage, spec.meta.gamma);
        Ok(ExitCode::from(2))
    }
}

fn read_sql(p: &Path) -> Result<pi_core::ast::AstNode> {
    let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
    parse_query(text.trim(), SQL_SUBSET).with_context(|| format!("{}", p.display()))
}

fn stem(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn parse_edits(s: &str) -> Result<BTreeMap<OlapEdit, f64>> {
    s.split(',')
        .map(str::trim)
        .filter(|kv| !kv.is_empty())
        .map(|kv| {
            let (k, v) = kv.split_once('=').unwrap_or((kv, "1"));
            let e = OlapEdit::ALL.into_iter().find(|e| e.name() == k.trim()).ok_or_else(|| anyhow!("unknown edit '{k}'"))?;
            Ok((e, v.trim().parse::<f64>().with_context(|| format!("weight for {k}"))?))
        })
        .collect()
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Command::Mine { mine, out, stats } => {
            let (g, total) = mine.mine()?;
            if let Some(p) = stats {
                emit(Some(&p), &serde_json::to_string_pretty(&g.stats)?)?;
            }
            emit(out.as_deref(), &graph_json(&g, total))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Synthesize { graph, synth, out } => {
            let opts = synth.opts()?;
            let text = std::fs::read_to_string(&graph).with_context(|| format!("reading {}", graph.display()))?;
            let j: GraphJson = serde_json::from_str(&text).with_context(|| format!("{}", graph.display()))?;
            let mut g = InteractionGraph::from_json(&j).with_context(|| format!("{}", graph.display()))?;
            let total = j.log_size.unwrap_or(g.nodes.len());
            let spec = synthesize_spec(&mut g, total, &opts)?;
            finish(&spec, out.as_deref())
        }
        Command::Run { mine, synth, out, graph_out } => {
            let opts = synth.opts()?;
            let (mut g, total) = mine.mine()?;
            if let Some(p) = graph_out {
                emit(Some(&p), &graph_json(&g, total))?;
            }
            let spec = synthesize_spec(&mut g, total, &opts)?;
            finish(&spec, out.as_deref())
        }
        Command::Suggest { log, sample, max_diffs, pilang, seed } => {
            let entries = read_log_file(&log).with_context(|| format!("{}", log.display()))?.entries;
            let existing = match pilang {
                Some(p) => read_statements(&p)?,
                None => vec![],
            };
            let mut o = std::io::stdout().lock();
            for s in suggest_statements(&entries, sample, max_diffs, &existing, sql_catalog(), seed)? {
                writeln!(o, "-- frequency {}, e.g. {} -> {}\n{}\n", s.frequency, s.example.0, s.example.1, s.statement)?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Diff { a, b } => {
            let t = align(&read_sql(&a)?, &read_sql(&b)?, sql_catalog()).with_pids(&stem(&a), &stem(&b));
            emit(None, &debug_json(&t, sql_catalog()))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Generate { steps, seed, edits, templated, out } => {
            let entries = if templated {
                generate_templated_log(steps, seed)
            } else {
                let mut cfg = OlapGenConfig { seed, steps, ..Default::default() };
                if let Some(e) = edits {
                    cfg.edits = parse_edits(&e)?;
                }
                generate_olap_log(&cfg)?
            };
            match out {
                Some(p) => write_log(&entries, std::fs::File::create(&p).with_context(|| format!("creating {}", p.display()))?)?,
                None => write_log(&entries, std::io::stdout().lock())?,
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Serve { spec, db, table, bind, assets } => {
            let text = std::fs::read_to_string(&spec).with_context(|| format!("reading {}", spec.display()))?;
            let spec: InterfaceSpec = serde_json::from_str(&text).with_context(|| format!("{}", spec.display()))?;
            let backend: Arc<dyn Backend> = Arc::new(SqliteBackend::from_csv(&db, &table).with_context(|| format!("{}", db.display()))?);
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(pi_service::serve(spec, backend, bind, assets))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => tracing::Level::WARN,
        1 => tracing::Level::INFO,
        _ => tracing::Level::DEBUG,
    };
    tracing_subscriber::fmt().with_writer(std::io::stderr).with_max_level(level).init();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
