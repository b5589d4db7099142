use std::fs::File;
use std::io::{BufReader, Write};
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use gesturequad_core::derive::{derive_settings, render};
use gesturequad_core::engine::{replay, ReplaySpeed};
use gesturequad_core::session::read_session;
use gesturequad_core::sim::Course;
use gesturequad_core::stats::{format_mss, TTestKind};
use gesturequad_core::ueq::{self, GroupBy, ItemMap, Scale, ScaleScores};
use gesturequad_core::{GestureKind, Settings};
use gesturequad_server::ServeConfig;

mod summary;

use summary::{table, RunSummary};

/// Gesture-controlled quadruped simulator.
#[derive(Parser)]
#[command(name = "gesturequad", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a live session: landmark frames in, robot telemetry out.
    Serve(ServeArgs),
    /// Feed a recorded session back through the pipeline.
    Replay(ReplayArgs),
    /// Derive body-pose angle bounds from the synthetic skeleton.
    DeriveConfig(DeriveArgs),
    /// Questionnaire scoring and completion-time statistics.
    #[command(subcommand)]
    Ueq(UeqCommand),
}

#[derive(Args)]
struct ConfigArgs {
    /// Gesture configuration (default: $GESTUREQUAD_CONFIG, then the bundled file).
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Course definition (default: the zigzag course).
    #[arg(long, value_name = "FILE")]
    course: Option<PathBuf>,
}

impl ConfigArgs {
    fn load(&self) -> Result<(Settings, Course)> {
        let settings = Settings::resolve(self.config.as_deref()).context("loading config")?;
        let course = match &self.course {
            Some(path) => Course::load(path).context("loading course")?,
            None => Course::zigzag(),
        };
        Ok((settings, course))
    }
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: IpAddr,
    #[arg(long, value_parser = parse_mode)]
    mode: GestureKind,
    #[command(flatten)]
    config: ConfigArgs,
    /// Write the session to this file.
    #[arg(long, value_name = "FILE")]
    record: Option<PathBuf>,
    /// Serve static console assets from this directory.
    #[arg(long, value_name = "DIR")]
    console: Option<PathBuf>,
}

#[derive(Args)]
struct ReplayArgs {
    file: PathBuf,
    /// Ignore recorded frame spacing.
    #[arg(long)]
    max_speed: bool,
    #[command(flatten)]
    config: ConfigArgs,
    /// Write the command log (one JSON object per line) to this file.
    #[arg(long, value_name = "FILE")]
    log: Option<PathBuf>,
}

#[derive(Args)]
struct DeriveArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file (default: standard output).
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum UeqCommand {
    /// Per-participant scale means.
    Score {
        #[arg(long, value_name = "FILE")]
        responses: PathBuf,
        #[command(flatten)]
        opts: UeqOpts,
    },
    /// Two-sample tests on every scale.
    Compare {
        #[arg(long, value_name = "FILE")]
        a: PathBuf,
        #[arg(long, value_name = "FILE")]
        b: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Pooled-variance t-test instead of Welch's.
        #[arg(long)]
        student: bool,
        #[command(flatten)]
        opts: UeqOpts,
    },
    /// Completion-time statistics.
    Times {
        #[arg(long, value_name = "FILE")]
        file: PathBuf,
        #[arg(long, default_value = "condition")]
        group_by: GroupBy,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct UeqOpts {
    /// Item-to-scale map (default: the bundled handbook map).
    #[arg(long, value_name = "FILE")]
    map: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

impl UeqOpts {
    fn item_map(&self) -> Result<ItemMap> {
        match &self.map {
            Some(path) => Ok(ItemMap::from_csv(open(path)?)
                .with_context(|| format!("item map {}", path.display()))?),
            None => Ok(ItemMap::bundled()),
        }
    }
}

fn parse_mode(s: &str) -> Result<GestureKind, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(BufReader::new(file))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let message = format!("{e:#}");
            let line: Vec<&str> = message
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .collect();
            eprintln!("error: {}", line.join(" "));
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Serve(args) => serve(args),
        Command::Replay(args) => replay_cmd(args),
        Command::DeriveConfig(args) => derive_cmd(args),
        Command::Ueq(cmd) => ueq_cmd(cmd),
    }
}

fn serve(args: ServeArgs) -> Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    let (settings, course) = args.config.load()?;
    let mut config = ServeConfig::new(settings, args.mode, course);
    config.record = args.record;
    config.console_dir = args.console;
    let addr = SocketAddr::new(args.host, args.port);

    let runtime = tokio::runtime::Runtime::new().context("starting runtime")?;
    let summary = runtime.block_on(async {
        let server = gesturequad_server::start(addr, config).await?;
        eprintln!(
            "listening on ws://{0}/producer and ws://{0}/observer (Ctrl-C to stop)",
            server.local_addr()
        );
        tokio::signal::ctrl_c()
            .await
            .context("waiting for Ctrl-C")?;
        anyhow::Ok(server.shutdown().await?)
    })?;
    print!(
        "{}",
        RunSummary::new(
            &summary.session_id,
            summary.mode,
            summary.course,
            &summary.commands
        )
    );
    Ok(())
}

fn replay_cmd(args: ReplayArgs) -> Result<()> {
    let (settings, course) = args.config.load()?;
    let session = read_session(open(&args.file)?)
        .with_context(|| format!("reading {}", args.file.display()))?;
    let hash = settings.hash();
    if session.header.config_hash != hash {
        eprintln!(
            "warning: session was recorded with config {} but is replayed with {hash}",
            session.header.config_hash
        );
    }
    let speed = if args.max_speed {
        ReplaySpeed::Max
    } else {
        ReplaySpeed::Realtime
    };
    let result = replay(&session, &settings, &course, speed).context("replay")?;
    if let Some(path) = &args.log {
        std::fs::write(path, result.command_log())
            .with_context(|| format!("writing {}", path.display()))?;
    }
    print!(
        "{}",
        RunSummary::new(
            &session.header.session_id,
            session.header.mode,
            result.engine.course_status(),
            result.engine.commands()
        )
    );
    Ok(())
}

fn derive_cmd(args: DeriveArgs) -> Result<()> {
    let derivation = derive_settings(args.seed).context("deriving bounds")?;
    let text = render(&derivation, args.seed);
    match &args.out {
        Some(path) => {
            std::fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?
        }
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    for r in &derivation.report {
        eprintln!(
            "{:<14} half-width {:>4.1}  stability {:.3}",
            r.pose.as_str(),
            r.half_width,
            r.stability
        );
    }
    Ok(())
}

fn scores_json(s: &ScaleScores) -> serde_json::Value {
    let mut v = json!(s.scales);
    v["pragmatic"] = json!(s.pragmatic);
    v["hedonic"] = json!(s.hedonic);
    v
}

fn scored(path: &Path, map: &ItemMap) -> Result<Vec<(ueq::UeqResponse, ScaleScores)>> {
    let responses =
        ueq::read_responses(open(path)?).with_context(|| format!("reading {}", path.display()))?;
    responses
        .into_iter()
        .map(|r| {
            let s = ueq::score(&r.answers, map)
                .with_context(|| format!("participant {}", r.participant_id))?;
            Ok((r, s))
        })
        .collect()
}

fn ueq_cmd(cmd: UeqCommand) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match cmd {
        UeqCommand::Score { responses, opts } => {
            let rows = scored(&responses, &opts.item_map()?)?;
            if opts.json {
                let v: Vec<_> = rows
                    .iter()
                    .map(|(r, s)| {
                        json!({
                            "participant_id": r.participant_id,
                            "condition": r.condition.to_string(),
                            "scores": scores_json(s),
                        })
                    })
                    .collect();
                writeln!(out, "{}", serde_json::to_string_pretty(&v)?)?;
            } else {
                let mut header = vec!["participant", "condition"];
                header.extend(Scale::ALL.iter().map(|s| s.as_str()));
                header.extend(["pragmatic", "hedonic"]);
                let body: Vec<Vec<String>> = rows
                    .iter()
                    .map(|(r, s)| {
                        let mut row = vec![r.participant_id.clone(), r.condition.to_string()];
                        row.extend(Scale::ALL.iter().map(|sc| format!("{:.2}", s.get(*sc))));
                        row.push(format!("{:.2}", s.pragmatic));
                        row.push(format!("{:.2}", s.hedonic));
                        row
                    })
                    .collect();
                write!(out, "{}", table(&header, &body))?;
            }
        }
        UeqCommand::Compare {
            a,
            b,
            alpha,
            student,
            opts,
        } => {
            let map = opts.item_map()?;
            let sa: Vec<_> = scored(&a, &map)?.into_iter().map(|(_, s)| s).collect();
            let sb: Vec<_> = scored(&b, &map)?.into_iter().map(|(_, s)| s).collect();
            let kind = if student {
                TTestKind::Student
            } else {
                TTestKind::Welch
            };
            let rows = ueq::compare(&sa, &sb, alpha, kind)?;
            if opts.json {
                let v = json!({ "test": kind, "alpha": alpha, "rows": rows });
                writeln!(out, "{}", serde_json::to_string_pretty(&v)?)?;
            } else {
                let body: Vec<Vec<String>> = rows
                    .iter()
                    .map(|r| {
                        vec![
                            r.scale.clone(),
                            format!("{:.2}", r.mean_a),
                            format!("{:.2}", r.mean_b),
                            format!("{:.3}", r.test.t),
                            format!("{:.2}", r.test.df),
                            format!("{:.4}", r.test.p),
                            if r.significant { "*" } else { "" }.to_string(),
                        ]
                    })
                    .collect();
                let header = ["scale", "mean_a", "mean_b", "t", "df", "p", "sig"];
                write!(out, "{}", table(&header, &body))?;
                writeln!(
                    out,
                    "{} t-test, alpha {alpha}",
                    if student { "Student" } else { "Welch" }
                )?;
            }
        }
        UeqCommand::Times {
            file,
            group_by,
            json,
        } => {
            let groups = ueq::grouped_times(open(&file)?, group_by)
                .with_context(|| format!("reading {}", file.display()))?;
            if json {
                writeln!(out, "{}", serde_json::to_string_pretty(&groups)?)?;
            } else {
                let body: Vec<Vec<String>> = groups
                    .iter()
                    .map(|(name, s)| {
                        let outliers: Vec<String> =
                            s.outliers.iter().map(|o| format_mss(*o)).collect();
                        vec![
                            name.clone(),
                            s.n.to_string(),
                            format_mss(s.mean),
                            format_mss(s.median),
                            format_mss(s.q1),
                            format_mss(s.q3),
                            format!("{:.1}", s.iqr),
                            outliers.join(" "),
                        ]
                    })
                    .collect();
                let header = [
                    "group", "n", "mean", "median", "q1", "q3", "iqr_s", "outliers",
                ];
                write!(out, "{}", table(&header, &body))?;
            }
        }
    }
    Ok(())
}
