use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use flock_core::analysis::{
    compare_games_multi, dense_gap_sample, find_region_boundaries_with, sweep_delta_e_with, sweep_records,
};
use flock_core::numfmt::format_sig;
use flock_core::oracle::{
    enumerate_spe_with, oracle_ct_approx_with, oracle_sfg_approx_with, GridSpec, OracleConfig, OracleResult,
};
use flock_core::verify::{verify_params, verify_random, VerifyOptions, VerifyReport};
use flock_core::{
    solve_ct, solve_dt, solve_sfg, Action, Execution, Game, GameParams, SpeOutcome, SpeResult, ThresholdReading,
    TieMode,
};

#[derive(Parser)]
#[command(name = "flockgame", version, about = "Equilibria of the two-agent flock formation game")]
struct Cli {
    /// Run everything on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one parameter file in closed form, or with the grid oracle.
    Solve(SolveArgs),
    /// Compare solver and oracle on seeded random instances or one file.
    Verify(VerifyArgs),
    /// Classify every game over a range of territory gaps.
    Sweep(SweepArgs),
    /// Locate the discrete-game region boundaries.
    Boundaries(BoundaryArgs),
    /// Qualitative comparison of the three games.
    Compare(CompareArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Ct,
    Dt,
    Sfg,
}

impl Mode {
    fn game(self) -> Game {
        match self {
            Mode::Ct => Game::Continuous,
            Mode::Dt => Game::Discrete,
            Mode::Sfg => Game::StrictFlocking,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Output {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Tie {
    LeaderFavorable,
    AllSupportable,
}

#[derive(Clone, Copy, ValueEnum)]
enum Reading {
    Resolved,
    Typeset,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, value_enum)]
    mode: Mode,
    #[arg(long)]
    params: PathBuf,
    #[arg(long, value_enum, default_value = "json")]
    output: Output,
    /// Use the backward-induction oracle instead of the closed form.
    #[arg(long)]
    oracle: bool,
    /// Oracle tie-breaking.
    #[arg(long, value_enum, default_value = "leader-favorable")]
    tie: Tie,
    /// Oracle grid step (ct and sfg only).
    #[arg(long)]
    step: Option<f64>,
    /// Write the oracle's best-response table here as CSV.
    #[arg(long)]
    table: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    mode: Mode,
    #[arg(long, default_value_t = 100)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    step: Option<f64>,
    /// Verify these parameter files instead of random draws.
    #[arg(long)]
    params: Vec<PathBuf>,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    params: PathBuf,
    /// Gap range `lo:hi`.
    #[arg(long, value_parser = parse_range)]
    range: (f64, f64),
    #[arg(long)]
    step: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundaryArgs {
    #[arg(long)]
    params: PathBuf,
    #[arg(long, value_parser = parse_range)]
    range: (f64, f64),
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Reading of the trailing threshold.
    #[arg(long, value_enum, default_value = "resolved")]
    reading: Reading,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    /// One or more base parameter files; gaps are sampled densely for each.
    #[arg(long, required = true)]
    params: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    output: Output,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected lo:hi, got {s:?}"))?;
    let lo: f64 = a.trim().parse().map_err(|e| format!("bad lower bound {a:?}: {e}"))?;
    let hi: f64 = b.trim().parse().map_err(|e| format!("bad upper bound {b:?}: {e}"))?;
    Ok((lo, hi))
}

enum Failure {
    Input(String),
    Mismatch(String),
}

impl From<flock_core::Error> for Failure {
    fn from(e: flock_core::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type CliResult<T> = Result<T, Failure>;

fn read_params(path: &Path) -> CliResult<GameParams> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    GameParams::from_json(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn csv_text(records: &[Vec<String>]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.write_record(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Input(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn action_text(a: Action) -> String {
    match a {
        Action::Exact(t) => format_sig(t),
        Action::JustBefore(t) => format!("{}-", format_sig(t)),
    }
}

fn outcome_records(case: &str, outcomes: &[SpeOutcome]) -> Vec<Vec<String>> {
    let mut rows = vec![["case", "t1", "t2", "type", "flock", "u1", "u2"].map(String::from).to_vec()];
    if outcomes.is_empty() {
        rows.push(vec![case.to_string(), String::new(), String::new(), String::new(), String::new(), String::new(), String::new()]);
    }
    for o in outcomes {
        rows.push(vec![
            case.to_string(),
            action_text(o.t1),
            action_text(o.t2),
            o.type_tag
                .map(|t| serde_json::to_value(t).unwrap().as_str().unwrap().to_string())
                .unwrap_or_default(),
            format!("{:?}", o.flock),
            format_sig(o.u1),
            format_sig(o.u2),
        ]);
    }
    rows
}

fn run_solve(args: &SolveArgs, exec: Execution) -> CliResult<()> {
    let params = read_params(&args.params)?;
    if !args.oracle {
        let res: SpeResult = match args.mode {
            Mode::Ct => solve_ct(&params)?,
            Mode::Dt => solve_dt(&params)?,
            Mode::Sfg => solve_sfg(&params)?,
        };
        let text = match args.output {
            Output::Json => res.to_json() + "\n",
            Output::Csv => csv_text(&outcome_records(res.case.code(), &res.outcomes))?,
        };
        return emit(args.out.as_deref(), &text);
    }
    let mode = match args.tie {
        Tie::LeaderFavorable => TieMode::LeaderFavorable,
        Tie::AllSupportable => TieMode::AllSupportable,
    };
    let config = OracleConfig {
        exec,
        ..OracleConfig::continuous()
    };
    let res: OracleResult = match args.mode {
        Mode::Dt => {
            params.require_unit_window()?;
            let config = OracleConfig {
                just_before: false,
                ..config
            };
            enumerate_spe_with(&params, GridSpec::unit(&params)?, mode, &config)?
        }
        Mode::Ct => oracle_ct_approx_with(&params, args.step.unwrap_or(flock_core::verify::CT_STEP), mode, &config)?,
        Mode::Sfg => {
            oracle_sfg_approx_with(&params, args.step.unwrap_or(flock_core::verify::SFG_STEP), mode, &config)?
        }
    };
    if let Some(path) = &args.table {
        emit(Some(path), &res.table.to_csv())?;
    }
    let text = match args.output {
        Output::Json => res.to_json() + "\n",
        Output::Csv => csv_text(&outcome_records("", &res.outcomes))?,
    };
    emit(args.out.as_deref(), &text)
}

fn run_verify(args: &VerifyArgs, exec: Execution) -> CliResult<()> {
    let options = VerifyOptions {
        step: args.step,
        exec,
        ..VerifyOptions::default()
    };
    let game = args.mode.game();
    let report: VerifyReport = if args.params.is_empty() {
        if args.trials == 0 {
            return Err(Failure::Input("trials must be at least 1".into()));
        }
        verify_random(game, args.seed, args.trials, &options)?
    } else {
        let list = args
            .params
            .iter()
            .map(|p| read_params(p))
            .collect::<CliResult<Vec<_>>>()?;
        verify_params(&list, game, &options)?
    };
    let text = if args.json {
        serde_json::to_string_pretty(&report).expect("report serializes") + "\n"
    } else {
        report.render()
    };
    print!("{text}");
    if report.all_passed() {
        Ok(())
    } else {
        Err(Failure::Mismatch(format!("{} of {} instances disagree", report.failed(), report.trials)))
    }
}

fn run_sweep(args: &SweepArgs, exec: Execution) -> CliResult<()> {
    let base = read_params(&args.params)?;
    let rows = sweep_delta_e_with(&base, args.range.0, args.range.1, args.step, exec)?;
    emit(args.out.as_deref(), &csv_text(&sweep_records(&rows))?)
}

fn run_boundaries(args: &BoundaryArgs) -> CliResult<()> {
    let base = read_params(&args.params)?;
    let reading = match args.reading {
        Reading::Resolved => ThresholdReading::Resolved,
        Reading::Typeset => ThresholdReading::Typeset,
    };
    let set = find_region_boundaries_with(&base, args.range.0, args.range.1, args.tol, reading)?;
    emit(args.out.as_deref(), &(set.to_json() + "\n"))
}

fn run_compare(args: &CompareArgs) -> CliResult<()> {
    let bases = args
        .params
        .iter()
        .map(|p| read_params(p))
        .collect::<CliResult<Vec<_>>>()?;
    let mut gaps = Vec::new();
    for b in &bases {
        gaps.extend(dense_gap_sample(b)?);
    }
    gaps.sort_by(f64::total_cmp);
    gaps.dedup();
    let table = compare_games_multi(&bases, &gaps)?;
    let text = match args.output {
        Output::Json => table.to_json() + "\n",
        Output::Csv => csv_text(&table.records())?,
    };
    emit(args.out.as_deref(), &text)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::default()
    };
    let result = match &cli.command {
        Command::Solve(a) => run_solve(a, exec),
        Command::Verify(a) => run_verify(a, exec),
        Command::Sweep(a) => run_sweep(a, exec),
        Command::Boundaries(a) => run_boundaries(a),
        Command::Compare(a) => run_compare(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Mismatch(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(2)
        }
    }
}
