use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use confcheck::appscan::ScanOptions;
use confcheck::cli::{self, CliError};
use confcheck::oracle::DEFAULT_MAX_STATES;
use confcheck::refine::Budgets;
use confcheck::symexec::DEFAULT_EXPANSION_BUDGET;

#[derive(Parser)]
#[command(name = "confcheck", version, about = "Configuration compatibility rules for versioned XML-configured frameworks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract constraints from every snapshot in a directory and write the rule file
    Extract {
        #[arg(long, env = "CONFCHECK_SNAPSHOTS")]
        snapshots: PathBuf,
        #[arg(long, env = "CONFCHECK_OUT")]
        out: PathBuf,
        /// Backward expansion budget per target
        #[arg(long, env = "CONFCHECK_BUDGET", default_value_t = DEFAULT_EXPANSION_BUDGET)]
        budget: usize,
        /// Configuration API table overriding the built-in one
        #[arg(long, env = "CONFCHECK_SPEC")]
        spec: Option<PathBuf>,
    },
    /// Print the constraints of one class
    Constraints {
        #[arg(long, env = "CONFCHECK_SNAPSHOT")]
        snapshot: PathBuf,
        #[arg(long, env = "CONFCHECK_CLASS")]
        class: String,
        #[arg(long, env = "CONFCHECK_BUDGET", default_value_t = DEFAULT_EXPANSION_BUDGET)]
        budget: usize,
        #[arg(long, env = "CONFCHECK_SPEC")]
        spec: Option<PathBuf>,
        #[arg(long)]
        dump_icfg: bool,
        #[arg(long)]
        dump_pi: bool,
    },
    /// Validate a rule file and print one rule id per line
    Rules {
        #[arg(long, env = "CONFCHECK_RULES")]
        rules: PathBuf,
    },
    /// Scan an app resource tree; exit 0 when clean, 1 with warnings, 2 on error
    Scan {
        #[arg(long, env = "CONFCHECK_RULES")]
        rules: PathBuf,
        #[arg(long, env = "CONFCHECK_APP")]
        app: PathBuf,
        #[arg(long, env = "CONFCHECK_NO_FILTER_V")]
        no_filter_v: bool,
        #[arg(long, env = "CONFCHECK_NO_FILTER_LIB")]
        no_filter_lib: bool,
        /// File with one library tag prefix per line
        #[arg(long, env = "CONFCHECK_LIB_PREFIXES")]
        lib_prefixes: Option<PathBuf>,
        #[arg(long, env = "CONFCHECK_OUT")]
        out: PathBuf,
    },
    /// Constraints of one class by exhaustive forward enumeration
    Oracle {
        #[arg(long, env = "CONFCHECK_SNAPSHOT")]
        snapshot: PathBuf,
        #[arg(long, env = "CONFCHECK_CLASS")]
        class: String,
        #[arg(long, env = "CONFCHECK_MAX_STATES", default_value_t = DEFAULT_MAX_STATES)]
        max_states: usize,
        #[arg(long, env = "CONFCHECK_SPEC")]
        spec: Option<PathBuf>,
    },
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn budgets(expansions: usize) -> Budgets {
    Budgets { expansions, ..Budgets::default() }
}

fn run(cmd: Command) -> Result<ExitCode> {
    match cmd {
        Command::Extract { snapshots, out, budget, spec } => {
            let spec = cli::load_spec(spec.as_deref())?;
            let snaps = cli::load_snapshot_dir(&snapshots)?;
            let result = cli::extract(&snaps, &spec, budgets(budget))?;
            write(&out, &result.rules_text())?;
            print!("{}", result.report());
        }
        Command::Constraints { snapshot, class, budget, spec, dump_icfg, dump_pi } => {
            let spec = cli::load_spec(spec.as_deref())?;
            let snap = cli::load_snapshot(&snapshot)?;
            let report = cli::class_constraints(&snap, &class, &spec, budgets(budget), dump_icfg, dump_pi)?;
            print!("{}", report.render());
            for d in &report.diagnostics {
                eprintln!("{d}");
            }
        }
        Command::Rules { rules } => {
            for r in cli::load_rules(&rules)? {
                println!("{r}");
            }
        }
        Command::Scan { rules, app, no_filter_v, no_filter_lib, lib_prefixes, out } => {
            let rules = cli::load_rules(&rules)?;
            let mut opts = ScanOptions { filter_v: !no_filter_v, filter_lib: !no_filter_lib, ..ScanOptions::default() };
            if let Some(p) = lib_prefixes {
                let text = fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?;
                opts.lib_prefixes = cli::parse_lib_prefixes(&text);
            }
            let report = cli::scan_app(&app, &rules, &opts)?;
            write(&out, &report.to_jsonl())?;
            for (file, why) in &report.skipped {
                eprintln!("skipped {file}: {why}");
            }
            println!("{}", report.summary());
            if report.final_count() > 0 {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Oracle { snapshot, class, max_states, spec } => {
            let spec = cli::load_spec(spec.as_deref())?;
            let snap = cli::load_snapshot(&snapshot)?;
            print!("{}", cli::render_constraints(&cli::oracle(&snap, &class, &spec, max_states)?));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let args = Cli::parse();
    match run(args.command) {
        Ok(code) => code,
        Err(e) => {
            if let Some(CliError::Usage(msg)) = e.downcast_ref::<CliError>() {
                eprintln!("usage error: {msg}");
            } else {
                eprintln!("error: {e:#}");
            }
            ExitCode::from(2)
        }
    }
}
