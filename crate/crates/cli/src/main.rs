use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};

use samadyn_core::dynamics::TetherParams;
use samadyn_core::model::RobotParams;
use samadyn_core::sim::{compare_controllers, run_scenario, RmsSummary, Scenario, ScenarioLog};

#[derive(Debug, Parser)]
#[command(name = "samadyn", version, about = "Cable-suspended aerial manipulator simulator")]
struct Cli {
    /// Increase log verbosity (-v info, -vv debug, -vvv trace).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one scenario and write its log and RMS summary.
    Run(RunArgs),
    /// Run a scenario under both controllers and write the RMS comparison.
    Compare(RunArgs),
    /// Check a parameter file (and optionally a scenario) and print findings.
    Validate(ValidateArgs),
    /// Start the WebSocket teleoperation service.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
struct ParamsArg {
    /// Parameter file; defaults to $SAMADYN_PARAMS, then the built-in set.
    #[arg(long, env = "SAMADYN_PARAMS", value_parser = existing_file)]
    params: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long, value_parser = existing_file)]
    scenario: PathBuf,
    #[command(flatten)]
    params: ParamsArg,
    /// Output directory; defaults to ./out/<unix time>.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[command(flatten)]
    params: ParamsArg,
    #[arg(long, value_parser = existing_file)]
    scenario: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[command(flatten)]
    params: ParamsArg,
    #[arg(long, default_value_t = 8080, value_parser = clap::value_parser!(u16).range(1024..=65535))]
    port: u16,
}

fn existing_file(s: &str) -> Result<PathBuf, String> {
    let p = PathBuf::from(s);
    if p.is_file() {
        Ok(p)
    } else {
        Err(format!("no such file: {s}"))
    }
}

type Failure = String;

fn load_params(arg: &ParamsArg) -> Result<RobotParams, Failure> {
    match &arg.params {
        Some(p) => RobotParams::load(p).map_err(|e| format!("{}: {e}", p.display())),
        None => Ok(RobotParams::default_params()),
    }
}

fn load_scenario(path: &Path) -> Result<Scenario, Failure> {
    Scenario::load(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn out_dir(out: &Option<PathBuf>) -> Result<PathBuf, Failure> {
    let dir = match out {
        Some(d) => d.clone(),
        None => {
            let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
            PathBuf::from("out").join(secs.to_string())
        }
    };
    std::fs::create_dir_all(&dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    Ok(dir)
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), Failure> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| format!("{}: {e}", path.display()))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn summary_text(log: &ScenarioLog) -> Result<String, Failure> {
    let rms = log.rms_summary().map_err(|e| e.to_string())?;
    let mut s = String::new();
    let _ = writeln!(s, "scenario {}", log.scenario);
    let _ = writeln!(s, "controller {}", log.controller);
    let _ = writeln!(s, "params_sha256 {}", log.params_digest);
    let _ = writeln!(s, "duration_s {}", log.duration());
    let _ = writeln!(s, "clamp_events {}", log.clamp_events);
    for ((name, unit), v) in RmsSummary::CHANNELS.iter().zip(rms.values()) {
        let _ = writeln!(s, "rms_{name}_{unit} {v:.6}");
    }
    Ok(s)
}

fn run(args: &RunArgs) -> Result<(), Failure> {
    let params = load_params(&args.params)?;
    let scenario = load_scenario(&args.scenario)?;
    let tether = TetherParams::from_params(&params);
    let log = run_scenario(&scenario, &params, &tether, &params.rig).map_err(|e| format!("simulation failed: {e}"))?;
    let dir = out_dir(&args.out)?;
    let summary = summary_text(&log)?;
    write(&dir, "log.csv", &log.to_csv())?;
    write(&dir, "summary.txt", &summary)?;
    print!("{summary}");
    Ok(())
}

fn compare(args: &RunArgs) -> Result<(), Failure> {
    let params = load_params(&args.params)?;
    let scenario = load_scenario(&args.scenario)?;
    let (report, proposed, baseline) =
        compare_controllers(&scenario, &params).map_err(|e| format!("simulation failed: {e}"))?;
    let dir = out_dir(&args.out)?;
    let text = report.to_text();
    write(&dir, "report.txt", &text)?;
    write(&dir, "report.csv", &report.to_csv())?;
    write(&dir, "proposed.csv", &proposed.to_csv())?;
    write(&dir, "baseline.csv", &baseline.to_csv())?;
    print!("{text}");
    Ok(())
}

fn validate(args: &ValidateArgs) -> Result<(), Failure> {
    let mut findings = Vec::new();
    match &args.params.params {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            let params: RobotParams =
                serde_json::from_str(&text).map_err(|e| format!("{}: {}", path.display(), samadyn_core::Error::from(e)))?;
            findings.extend(params.validate().into_iter().map(|f| format!("params: {f}")));
        }
        None => findings.extend(RobotParams::default_params().validate()),
    }
    if let Some(path) = &args.scenario {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let sc: Scenario =
            serde_json::from_str(&text).map_err(|e| format!("{}: {}", path.display(), samadyn_core::Error::from(e)))?;
        if let Err(e) = sc.validate() {
            findings.push(format!("scenario: {e}"));
        }
    }
    for f in &findings {
        println!("{f}");
    }
    println!("{} finding(s)", findings.len());
    if findings.is_empty() {
        Ok(())
    } else {
        Err("validation failed".into())
    }
}

fn serve(args: &ServeArgs) -> Result<(), Failure> {
    let params = load_params(&args.params)?;
    let rt = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    rt.block_on(samadyn_teleop::serve(params, args.port)).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        2 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let result = match &cli.command {
        Command::Run(a) => run(a),
        Command::Compare(a) => compare(a),
        Command::Validate(a) => validate(a),
        Command::Serve(a) => serve(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
