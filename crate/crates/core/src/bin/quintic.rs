//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when learning fails or two machines differ,
//! 2 on usage and input errors.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context as _, Result};
use clap::{Args, Parser, Subcommand};

use quintic::automaton::{check_label_equivalence, parse, to_dot};
use quintic::bench::{emit, run_matrix, ExperimentSpec, Format};
use quintic::learner::{export_position, FinalResult, LearnerConfig, RunLimits};
use quintic::teacher::{InteractiveTeacher, Recorder, ReplayTeacher, SimulatedTeacher, Teacher};
use quintic::{
    run_quintic, run_remap, InputAlphabet, OutputAlphabet, Rational, ValuationKind, Variant,
};

#[derive(Parser)]
#[command(name = "quintic", version, about = "Learn quantitative automata from preferences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Learn a target file against a simulated teacher; prints DOT.
    Learn {
        #[arg(long)]
        target: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        /// Write the session transcript here.
        #[arg(long)]
        transcript: Option<PathBuf>,
        /// Write the metrics as JSON here.
        #[arg(long)]
        metrics: Option<PathBuf>,
    },
    /// Run an experiment matrix and write aggregates.
    Bench {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// csv or json; defaults to the extension of --out.
        #[arg(long)]
        format: Option<String>,
    },
    /// Learn from answers typed on the console (or replayed from a file).
    Teach {
        /// Input symbols, comma separated.
        #[arg(long)]
        inputs: String,
        /// Output values, comma separated, e.g. `0,1/2,2`.
        #[arg(long)]
        outputs: String,
        /// classification, sum, product or discounted:<gamma>.
        #[arg(long)]
        valuation: String,
        #[command(flatten)]
        run: RunArgs,
        /// Save every answer to a session file.
        #[arg(long, conflicts_with = "replay")]
        record: Option<PathBuf>,
        /// Answer from a saved session instead of the console.
        #[arg(long)]
        replay: Option<PathBuf>,
        /// Write hypotheses as DOT files here instead of printing them.
        #[arg(long)]
        dot_dir: Option<PathBuf>,
    },
    /// Dump the first solver problem over a target's table as SMT-LIB.
    ExportSmt {
        #[arg(long)]
        target: PathBuf,
        /// Sequences whose prefixes become upper rows, comma separated.
        #[arg(long, default_value = "")]
        rows: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a target file, and with --b whether two machines agree.
    Validate {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, default_value = "S-VE")]
    variant: String,
    /// Disable iterative deepening.
    #[arg(long)]
    no_ids: bool,
    /// Do not add counterexample prefixes to the table.
    #[arg(long)]
    no_cex_expansion: bool,
    #[arg(long)]
    max_steps: Option<u64>,
    #[arg(long)]
    time_limit_ms: Option<u64>,
}

impl RunArgs {
    fn variant(&self) -> Result<Variant> {
        Ok(self.variant.parse()?)
    }

    fn config(&self) -> Result<Option<LearnerConfig>> {
        Ok(self.variant()?.config().map(|c| LearnerConfig {
            ids_enabled: !self.no_ids,
            cex_expansion_enabled: !self.no_cex_expansion,
            limits: RunLimits {
                max_steps: self.max_steps,
                time_limit_ms: self.time_limit_ms,
                ..RunLimits::default()
            },
            ..c
        }))
    }

    fn run(&self, teacher: &mut dyn Teacher) -> Result<FinalResult> {
        Ok(match self.config()? {
            Some(cfg) => run_quintic(teacher, &cfg)?,
            None => run_remap(teacher)?,
        })
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(command: Command) -> Result<ExitCode> {
    match command {
        Command::Learn {
            target,
            run,
            transcript,
            metrics,
        } => learn(&target, &run, transcript.as_deref(), metrics.as_deref()),
        Command::Bench { spec, out, format } => bench(&spec, &out, format.as_deref()),
        Command::Teach {
            inputs,
            outputs,
            valuation,
            run,
            record,
            replay,
            dot_dir,
        } => teach(&inputs, &outputs, &valuation, &run, record, replay, dot_dir),
        Command::ExportSmt { target, rows, out } => export_smt(&target, &rows, out.as_deref()),
        Command::Validate { a, b } => validate(&a, b.as_deref()),
    }
}

fn read_target(path: &Path) -> Result<quintic::QuantitativeAutomaton> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse(&text).with_context(|| format!("parsing {}", path.display()))
}

fn report(result: &FinalResult) -> Result<ExitCode> {
    let m = &result.metrics;
    eprintln!(
        "pref_queries={} equiv_queries={} inequalities={} variables={} unknown_pairs={} solves={} solver_ms={:.1} backtracks={}",
        m.pref_queries,
        m.equiv_queries,
        m.inequality_count,
        m.variable_count,
        m.unknown_pair_count,
        m.maxsmt_solves,
        m.solver_time_ms,
        m.backtracks
    );
    match result.learned() {
        Some(a) => {
            print!("{}", to_dot(a));
            Ok(ExitCode::SUCCESS)
        }
        None => {
            if let quintic::Outcome::BudgetExceeded(reason) = &result.outcome {
                eprintln!("learning stopped: {reason}");
            }
            Ok(ExitCode::from(1))
        }
    }
}

fn learn(
    target: &Path,
    run: &RunArgs,
    transcript: Option<&Path>,
    metrics: Option<&Path>,
) -> Result<ExitCode> {
    let target = read_target(target)?;
    let mut teacher = SimulatedTeacher::new(target.clone());
    let result = run.run(&mut teacher)?;
    if let Some(p) = transcript {
        result
            .transcript
            .write_to(BufWriter::new(File::create(p)?))
            .with_context(|| format!("writing {}", p.display()))?;
    }
    if let Some(p) = metrics {
        std::fs::write(p, serde_json::to_string_pretty(&result.metrics)? + "\n")
            .with_context(|| format!("writing {}", p.display()))?;
    }
    if let Some(a) = result.learned() {
        if let Some(c) = check_label_equivalence(&target, a)? {
            eprintln!("learned machine differs from the target on {:?}", c.sequence);
            return Ok(ExitCode::from(1));
        }
    }
    report(&result)
}

fn bench(spec_path: &Path, out: &Path, format: Option<&str>) -> Result<ExitCode> {
    let text = std::fs::read_to_string(spec_path)
        .with_context(|| format!("reading {}", spec_path.display()))?;
    let spec = ExperimentSpec::from_json(&text)?;
    let base = spec_path.parent().unwrap_or(Path::new("."));
    let format = match format {
        None => Format::for_path(out),
        Some(f) if f.eq_ignore_ascii_case("csv") => Format::Csv,
        Some(f) if f.eq_ignore_ascii_case("json") => Format::Json,
        Some(f) => bail!("unknown format {f:?}; use csv or json"),
    };
    let result = run_matrix(&spec, base)?;
    emit(&result.rows, out, format).with_context(|| format!("writing {}", out.display()))?;
    let failed: Vec<_> = result.trials.iter().filter(|t| !t.success).collect();
    for t in &failed {
        eprintln!(
            "{} {} trial {}: {}",
            t.target,
            t.variant,
            t.trial,
            t.failure.as_deref().unwrap_or("failed")
        );
    }
    Ok(if failed.is_empty() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn parse_valuation(text: &str) -> Result<ValuationKind> {
    Ok(match text.trim() {
        "classification" => ValuationKind::Classification,
        "sum" => ValuationKind::Sum,
        "product" => ValuationKind::Product,
        t => match t.strip_prefix("discounted:") {
            Some(g) => ValuationKind::discounted(g.parse::<Rational>()?)?,
            None => bail!("unknown valuation {t:?}"),
        },
    })
}

fn teach(
    inputs: &str,
    outputs: &str,
    valuation: &str,
    run: &RunArgs,
    record: Option<PathBuf>,
    replay: Option<PathBuf>,
    dot_dir: Option<PathBuf>,
) -> Result<ExitCode> {
    let input = InputAlphabet::new(inputs.split(',').map(str::trim))?;
    let values = outputs
        .split(',')
        .map(|v| v.trim().parse::<Rational>())
        .collect::<quintic::Result<Vec<_>>>()?;
    let output = OutputAlphabet::from_values(values)?;
    let valuation = parse_valuation(valuation)?;
    if let Some(path) = replay {
        let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        let mut teacher = ReplayTeacher::parse(&text, input, output, valuation)?;
        return report(&run.run(&mut teacher)?);
    }
    let stdin = io::stdin();
    let mut console = InteractiveTeacher::new(input, output, valuation, stdin.lock(), io::stderr());
    if let Some(dir) = dot_dir {
        console = console.with_dot_dir(dir);
    }
    match record {
        Some(path) => {
            let file = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
            let mut teacher = Recorder::new(console, file);
            let result = run.run(&mut teacher)?;
            let (_, mut file) = teacher.into_parts();
            file.flush()?;
            report(&result)
        }
        None => report(&run.run(&mut console)?),
    }
}

fn export_smt(target: &Path, rows: &str, out: Option<&Path>) -> Result<ExitCode> {
    let target = read_target(target)?;
    let rows = rows
        .split(',')
        .filter(|r| !r.trim().is_empty())
        .map(|r| target.input().parse(r))
        .collect::<quintic::Result<Vec<_>>>()?;
    let mut teacher = SimulatedTeacher::new(target);
    let text = export_position(&mut teacher, &rows)?;
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn validate(a: &Path, b: Option<&Path>) -> Result<ExitCode> {
    let ma = read_target(a)?;
    let Some(b) = b else {
        println!(
            "{}: {} states, {} valuation, {} inputs",
            a.display(),
            ma.num_states(),
            ma.valuation().name(),
            ma.input().len()
        );
        return Ok(ExitCode::SUCCESS);
    };
    let mb = read_target(b)?;
    match check_label_equivalence(&ma, &mb)? {
        None => {
            println!("equivalent");
            Ok(ExitCode::SUCCESS)
        }
        Some(c) => {
            println!(
                "counterexample {} : {} vs {}",
                ma.input().format(&c.sequence),
                c.target_value,
                c.hypothesis_value
            );
            Ok(ExitCode::from(1))
        }
    }
}

