//! `transmeasure`: exact finite-stage computations for the Cantor-translate
//! measure, one JSON report per run.

mod commands;
mod input;
mod verify;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use transmeasure::cantor::CantorSchedule;
use transmeasure::rational::{format_q, parse_q, Q};

#[derive(Parser)]
#[command(name = "transmeasure", version, about = "Exact rational computations on fat Cantor translates")]
struct Cli {
    #[command(flatten)]
    config: ConfigArgs,

    /// Re-check every certificate in a saved report instead of running a command.
    #[arg(long, value_name = "REPORT")]
    verify: Option<PathBuf>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Args, Clone)]
pub struct ConfigArgs {
    /// Ambient dimension.
    #[arg(long, global = true, default_value_t = 1)]
    pub d: usize,
    /// Removal scale `c` in `r_k = c rho^k`.
    #[arg(long, global = true, default_value = "1")]
    pub c: String,
    /// Removal ratio `rho`.
    #[arg(long, global = true, default_value = "1/4")]
    pub rho: String,
    /// Deepest Cantor stage searched for gaps and covers.
    #[arg(long = "stage-cap", global = true, default_value_t = 12)]
    pub stage_cap: u32,
    /// Search budget (subsets, pair evaluations).
    #[arg(long, global = true, default_value_t = 4096)]
    pub budget: usize,
    /// Width target for adaptive measure bounds.
    #[arg(long, global = true, default_value = "1/1024")]
    pub tol: String,
    /// Recorded in the report; commands are deterministic.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Also write the report to this file.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Ring expression (or array of them) in JSON.
    #[arg(long = "expr-file", global = true)]
    pub expr_file: Option<PathBuf>,
    /// Materialized stage sets hold at most 2^bits boxes.
    #[arg(long = "max-stage-bits", global = true, default_value_t = 24)]
    pub max_stage_bits: u32,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
pub enum Side {
    Below,
    Above,
}

#[derive(Subcommand, Clone)]
pub enum Command {
    /// Schedule constants, stage lengths and measures, optional membership.
    CantorInfo {
        #[arg(long, default_value_t = 4)]
        stage: u32,
        /// Comma-separated point to test for membership.
        #[arg(long)]
        point: Option<String>,
    },
    /// Certified measure bounds; adaptive to --tol unless --stage is given.
    Measure {
        #[arg(long)]
        stage: Option<u32>,
    },
    /// Exact split of a stage set by an axis half-space.
    SplitCheck {
        #[arg(long)]
        threshold: String,
        #[arg(long, default_value_t = 0)]
        axis: usize,
        #[arg(long, value_enum, default_value = "below")]
        side: Side,
        #[arg(long, default_value_t = 4)]
        stage: u32,
    },
    /// Levels of the inductive ring construction over a generator pool.
    RnEnumerate {
        #[arg(long, default_value_t = 2)]
        pool_size: usize,
        #[arg(long, default_value_t = 2)]
        levels: u32,
        #[arg(long, default_value_t = 4)]
        reference_stage: u32,
    },
    /// Finite-cover upper bound for the outer measure of a target.
    CoverSearch {
        #[arg(long, default_value_t = 6)]
        stage: u32,
        /// JSON array of pool expressions (default: grid translates).
        #[arg(long)]
        pool_file: Option<PathBuf>,
        #[arg(long, default_value_t = 4)]
        pool_size: usize,
        /// Box target `lo1,..:hi1,..` (default: the expression, else the unit cube).
        #[arg(long)]
        target_box: Option<String>,
    },
    /// Open box inside a target missed by every element.
    UncoveredBox {
        /// Target `lo1,..:hi1,..` (default: unit cube).
        #[arg(long = "box")]
        target: Option<String>,
    },
    /// Witnesses against every subfamily of a grid pool on the unit cube.
    InfiniteCube {
        #[arg(long, default_value_t = 4)]
        pool_size: usize,
    },
    /// Cover a small cube by translates of the given cubes.
    Pack {
        #[arg(long)]
        sides: String,
        #[arg(long, default_value = "1/2")]
        target_side: String,
        #[arg(long, default_value = "1")]
        alpha: String,
    },
    /// Gauge-sum upper bound for a delta-cover of the Cantor set.
    HausdorffBound {
        /// Exponent s of h(t) = t^s.
        #[arg(long, default_value_t = 1)]
        gauge: u32,
        #[arg(long, default_value = "1")]
        delta: String,
        #[arg(long, default_value_t = 0)]
        min_stage: u32,
    },
    /// The covering argument with every inequality checked exactly.
    CorollaryDemo {
        #[arg(long, default_value_t = 1)]
        gauge: u32,
        #[arg(long, default_value = "1/4")]
        delta: String,
        /// Lower bound for the Cantor set's measure (default: its exact value).
        #[arg(long)]
        a: Option<String>,
    },
    /// Solve lambda(C^d ∩ {x_1 <= x}) = target, or evaluate it at --x.
    RangeSolve {
        #[arg(long)]
        target: Option<String>,
        #[arg(long)]
        x: Option<String>,
    },
    /// Double-counting check for a box scaled by rational factors.
    TileCheck {
        #[arg(long = "box")]
        base: String,
        #[arg(long)]
        q: String,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::CantorInfo { .. } => "cantor-info",
            Command::Measure { .. } => "measure",
            Command::SplitCheck { .. } => "split-check",
            Command::RnEnumerate { .. } => "rn-enumerate",
            Command::CoverSearch { .. } => "cover-search",
            Command::UncoveredBox { .. } => "uncovered-box",
            Command::InfiniteCube { .. } => "infinite-cube",
            Command::Pack { .. } => "pack",
            Command::HausdorffBound { .. } => "hausdorff-bound",
            Command::CorollaryDemo { .. } => "corollary-demo",
            Command::RangeSolve { .. } => "range-solve",
            Command::TileCheck { .. } => "tile-check",
        }
    }
}

/// Parsed run configuration, echoed in every report.
pub struct RunConfig {
    pub schedule: CantorSchedule,
    pub stage_cap: u32,
    pub budget: usize,
    pub tol: Q,
    pub seed: u64,
    pub args: ConfigArgs,
}

impl RunConfig {
    fn from_args(a: &ConfigArgs) -> Result<Self, Failure> {
        if a.stage_cap == 0 || a.budget == 0 || a.max_stage_bits == 0 {
            return Err(Failure::usage("caps and budgets must be positive"));
        }
        let c = parse_q(&a.c)?;
        let rho = parse_q(&a.rho)?;
        let schedule = CantorSchedule::new(a.d, c, rho)?.with_max_stage_bits(a.max_stage_bits);
        Ok(RunConfig {
            schedule,
            stage_cap: a.stage_cap,
            budget: a.budget,
            tol: parse_q(&a.tol)?,
            seed: a.seed,
            args: a.clone(),
        })
    }

    pub fn to_json(&self) -> Value {
        json!({
            "d": self.schedule.d,
            "c": format_q(&self.schedule.c),
            "rho": format_q(&self.schedule.rho),
            "stage_cap": self.stage_cap,
            "budget": self.budget,
            "tol": format_q(&self.tol),
            "seed": self.seed,
            "max_stage_bits": self.schedule.max_stage_bits(),
        })
    }
}

/// Why a run stopped, mapped to the exit code.
pub struct Failure {
    pub code: u8,
    pub kind: &'static str,
    pub message: String,
    pub partial: Option<Value>,
}

impl Failure {
    pub fn usage(msg: impl Into<String>) -> Self {
        Failure { code: 2, kind: "precondition", message: msg.into(), partial: None }
    }
}

impl From<transmeasure::Error> for Failure {
    fn from(e: transmeasure::Error) -> Self {
        use transmeasure::Error as E;
        let message = e.to_string();
        match e {
            E::ToleranceBudget { stage, best } => Failure {
                code: 3,
                kind: "budget",
                message,
                partial: Some(json!({ "stage": stage, "best": best })),
            },
            E::StageBudget { suggested, .. } => Failure {
                code: 3,
                kind: "budget",
                message,
                partial: Some(json!({ "suggested_stage": suggested })),
            },
            E::Budget(_) => Failure { code: 3, kind: "budget", message, partial: None },
            E::Internal(_) => Failure { code: 1, kind: "internal", message, partial: None },
            _ => Failure { code: 2, kind: "precondition", message, partial: None },
        }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::usage(format!("bad JSON: {e}"))
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::usage(format!("cannot read input: {e}"))
    }
}

fn emit(doc: &Value, out: Option<&PathBuf>) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(doc).expect("reports serialize");
    // a closed pipe downstream is not our failure
    let _ = writeln!(std::io::stdout().lock(), "{text}");
    if let Some(path) = out {
        std::fs::write(path, format!("{text}\n"))
            .map_err(|e| Failure { code: 1, kind: "internal", message: format!("cannot write report: {e}"), partial: None })?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match (&cli.verify, &cli.command) {
        (Some(path), _) => match verify::replay(path) {
            Ok((doc, accepted)) => match emit(&doc, cli.config.out.as_ref()) {
                Ok(()) if accepted => 0,
                Ok(()) => {
                    eprintln!("verification rejected the report");
                    1
                }
                Err(f) => f.code,
            },
            Err(f) => {
                eprintln!("error: {}", f.message);
                f.code
            }
        },
        (None, Some(cmd)) => run(&cli.config, cmd),
        (None, None) => {
            eprintln!("error: a subcommand or --verify is required (see --help)");
            2
        }
    };
    ExitCode::from(code)
}

fn run(args: &ConfigArgs, cmd: &Command) -> u8 {
    let config = match RunConfig::from_args(args) {
        Ok(c) => c,
        Err(f) => {
            eprintln!("error: {}", f.message);
            return f.code;
        }
    };
    let (input, outcome) = commands::execute(&config, cmd);
    let mut doc = json!({
        "command": cmd.name(),
        "config": config.to_json(),
        "input": input,
    });
    let code = match outcome {
        Ok(result) => {
            doc["result"] = result;
            0
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            doc["error"] = json!({ "kind": f.kind, "message": f.message, "partial": f.partial });
            f.code
        }
    };
    match emit(&doc, args.out.as_ref()) {
        Ok(()) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}
