use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use lpi::cfa::{to_dot, Cfa};
use lpi::domain::Template;
use lpi::engine::{check_inductive, refine_ladder, run, AnalysisConfig, IntegerMode, Verdict};
use lpi::oracle::{interpret, kleene_tcd, KleeneOutcome, Limits};
use lpi::report::Report;
use lpi::templates::Preset;

#[derive(Parser)]
#[command(name = "lpi", version, about = "Numerical invariants by local policy iteration")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Domain {
    Intervals,
    Octagons,
    Rich,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Mode {
    Exact,
    Relaxed,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze a program and report invariants and assertion verdicts.
    Analyze {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "intervals")]
        domain: Domain,
        #[arg(long, default_value_t = 0)]
        unroll: usize,
        #[arg(long)]
        congruence: bool,
        #[arg(long, value_enum, default_value = "exact")]
        integer_mode: Mode,
        /// Try increasingly precise configurations until all assertions hold.
        #[arg(long)]
        refine: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// Print work counters in text output.
        #[arg(long)]
        stats: bool,
        /// Verify that the invariant is inductive; exit 2 if not.
        #[arg(long)]
        check_inductive: bool,
        /// Print the control-flow automaton in DOT and exit.
        #[arg(long)]
        dump_cfa: bool,
        /// Comma-separated heuristics to turn off: input-independence,
        /// syntactic-skip, redundant-lemma.
        #[arg(long, value_delimiter = ',')]
        opt_toggles: Vec<String>,
        /// Comma-separated templates used at every node, e.g. `i,j,x-y`.
        #[arg(long, value_delimiter = ',')]
        templates: Vec<String>,
        /// Add templates read off the assertions.
        #[arg(long)]
        assertion_templates: bool,
    },
    /// Concrete exploration and Kleene iteration, for debugging.
    #[command(hide = true)]
    Oracle {
        file: PathBuf,
        #[arg(long, default_value_t = 4)]
        range: i64,
        #[arg(long, default_value_t = 200)]
        kleene_cap: usize,
        #[arg(long, value_enum, default_value = "intervals")]
        domain: Domain,
    },
}

fn preset(d: Domain) -> Preset {
    match d {
        Domain::Intervals => Preset::Intervals,
        Domain::Octagons => Preset::Octagons,
        Domain::Rich => Preset::Rich,
    }
}

fn load(path: &Path) -> Result<Cfa, String> {
    let src = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    lpi::frontend::compile(&src).map_err(|e| format!("{}: {e}", path.display()))
}

fn analyze(cmd: Command) -> Result<ExitCode, String> {
    let Command::Analyze {
        file,
        domain,
        unroll,
        congruence,
        integer_mode,
        refine,
        format,
        stats,
        check_inductive: certify,
        dump_cfa,
        opt_toggles,
        templates,
        assertion_templates,
    } = cmd
    else {
        unreachable!()
    };
    let cfa = load(&file)?;
    if dump_cfa {
        emit(&to_dot(&cfa));
        return Ok(ExitCode::SUCCESS);
    }
    let mut cfg = AnalysisConfig::default().with_preset(preset(domain));
    cfg.unroll = unroll;
    cfg.congruence = congruence;
    cfg.integer_mode = match integer_mode {
        Mode::Exact => IntegerMode::Exact,
        Mode::Relaxed => IntegerMode::Relaxed,
    };
    cfg.templates.from_assertions = assertion_templates;
    for name in opt_toggles.iter().filter(|s| !s.is_empty()) {
        if !cfg.toggles.disable(name.trim()) {
            return Err(format!("unknown heuristic `{name}`"));
        }
    }
    let explicit: Vec<Template> = templates
        .iter()
        .filter(|s| !s.trim().is_empty())
        .map(|s| Template::parse(s).map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    if !explicit.is_empty() {
        cfg.templates.explicit = Some(explicit);
    }
    let started = Instant::now();
    let (step, result) = if refine {
        let (i, r) = refine_ladder(&cfa, &cfg).map_err(|e| e.to_string())?;
        (Some(i), r)
    } else {
        (None, run(&cfa, &cfg).map_err(|e| e.to_string())?)
    };
    let wall_ms = started.elapsed().as_millis() as u64;
    if certify && !check_inductive(&result).map_err(|e| e.to_string())? {
        return Err("the computed invariant is not inductive".into());
    }
    let report = Report::new(&result, step, wall_ms);
    let text = match format {
        Format::Json => report.to_json() + "\n",
        Format::Text => report.to_text(stats),
    };
    emit(&text);
    let unknown = result.verdicts.iter().any(|v| v.verdict == Verdict::Unknown);
    Ok(if unknown || !result.complete { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

fn oracle(cmd: Command) -> Result<ExitCode, String> {
    let Command::Oracle {
        file,
        range,
        kleene_cap,
        domain,
    } = cmd
    else {
        unreachable!()
    };
    let cfa = load(&file)?;
    let limits = Limits {
        nondet_min: -range,
        nondet_max: range,
        ..Limits::default()
    };
    let conc = interpret(&cfa, limits);
    println!("truncated: {}", conc.truncated);
    for (n, states) in &conc.reachable {
        println!("n{n}: {} states", states.len());
    }
    let cfg = lpi::templates::TemplateConfig {
        preset: preset(domain),
        ..Default::default()
    };
    let templates = lpi::templates::synthesize(&cfa, &lpi::cfa::live_variables(&cfa), &cfg);
    match kleene_tcd(&cfa, &templates, kleene_cap).map_err(|e| e.to_string())? {
        KleeneOutcome::DidNotConverge => println!("kleene: no convergence within {kleene_cap} iterations"),
        KleeneOutcome::Converged { values, iterations } => {
            println!("kleene: converged after {iterations} iterations");
            for (n, v) in values {
                match v {
                    None => println!("n{n}: unreachable"),
                    Some(m) => {
                        let parts: Vec<String> = m.iter().map(|(t, d)| format!("{t} <= {}", lpi::linear::fmt_rational(d))).collect();
                        println!("n{n}: {}", parts.join(", "));
                    }
                }
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(s: &str) {
    let _ = std::io::stdout().lock().write_all(s.as_bytes());
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let out = match cli.command {
        c @ Command::Analyze { .. } => analyze(c),
        c @ Command::Oracle { .. } => oracle(c),
    };
    match out {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
