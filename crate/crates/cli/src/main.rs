//! `socialgest`: generate skeleton clips, train detectors, detect, evaluate
//! and simulate two-peer sessions.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use socialgest::detector::{Detector, DetectorConfig};
use socialgest::dyad::{simulate_dyad, FusionConfig, NetParams};
use socialgest::eval::{render_report, run_pilot, PilotConfig, ReportFormat};
use socialgest::num::{fixed6, fmt6};
use socialgest::skeleton::{cohort, parse_clip, serialize_clip, synth_clip, SynthParams};
use socialgest::{load_bundle, save_bundle, train_bundle, Clip, GestureLabel, ModelBundle, TrainConfig, WindowConfig};

#[derive(Parser)]
#[command(name = "socialgest", version, about = "Skeleton-based social gesture recognition")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize one clip or a whole training cohort.
    Gen(GenArgs),
    /// Train the eight gesture detectors from a directory of clips.
    Train(TrainArgs),
    /// Run the streaming detector over a clip.
    Detect(DetectArgs),
    /// Evaluation protocols.
    Eval {
        #[command(subcommand)]
        protocol: EvalCommand,
    },
    /// Simulate two peers exchanging confidences over a lossy link.
    Dyad(DyadArgs),
    /// Summarize a model bundle.
    Inspect {
        #[arg(long)]
        model: PathBuf,
    },
}

#[derive(Args)]
#[command(group(clap::ArgGroup::new("what").required(true).args(["gesture", "cohort"])))]
struct GenArgs {
    /// Gesture to enact (R5, L5, RH, LH, RS, LS, RM, LM or none).
    #[arg(long)]
    gesture: Option<String>,
    /// Named cohort to write into the --out directory (train-default, train-small).
    #[arg(long)]
    cohort: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Per-joint noise, meters.
    #[arg(long, default_value_t = 0.01)]
    noise: f64,
    /// Synthetic performer; selects amplitude and timing habits.
    #[arg(long, default_value_t = 0)]
    participant: u64,
    /// Clip file, or directory for --cohort. Single clips go to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    /// Directory of .jsonl clips; labels come from their spans.
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, default_value_t = 50)]
    rounds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum DetectFormat {
    Events,
    Csv,
    Conf,
}

#[derive(Args)]
struct DetectArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    clip: PathBuf,
    #[arg(long, value_enum, default_value = "events")]
    format: DetectFormat,
}

#[derive(Subcommand)]
enum EvalCommand {
    /// Prompted pilot study with synthetic participants.
    Pilot(PilotArgs),
}

#[derive(Args)]
struct PilotArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 17)]
    participants: usize,
    #[arg(long, default_value_t = 0.01)]
    noise: f64,
    /// RM and LM enactments per participant; 0 skips that block.
    #[arg(long, default_value_t = 3)]
    mat_prompts: usize,
    #[arg(long)]
    report: PathBuf,
    /// text or csv; defaults to csv for a .csv report path and text otherwise.
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args)]
struct DyadArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    peer_a: PathBuf,
    #[arg(long)]
    peer_b: PathBuf,
    #[arg(long, default_value_t = 80.0)]
    latency_ms: f64,
    #[arg(long, default_value_t = 20.0)]
    jitter_ms: f64,
    #[arg(long, default_value_t = 0.0)]
    drop: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fire HOLD_HANDS when both peers rest a hand on the mat.
    #[arg(long)]
    hold_hands: bool,
    /// Write the message delivery trace (JSON lines) here.
    #[arg(long)]
    trace: Option<PathBuf>,
}

/// A data or validation failure; exits with status 2.
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn write(path: &Path, bytes: &[u8]) -> Outcome {
    fs::write(path, bytes).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn stdout(bytes: &[u8]) -> Outcome {
    let mut out = std::io::stdout().lock();
    out.write_all(bytes)?;
    out.flush()?;
    Ok(())
}

fn load_model(path: &Path) -> Result<ModelBundle, Failure> {
    load_bundle(&read(path)?).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn load_clip(path: &Path) -> Result<Clip, Failure> {
    parse_clip(&read(path)?).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn gen(args: GenArgs) -> Outcome {
    let params = SynthParams {
        noise_sigma: args.noise,
        participant_seed: args.participant,
        ..SynthParams::default()
    };
    if let Some(name) = args.cohort {
        let dir = args
            .out
            .ok_or_else(|| Failure("--cohort needs an --out directory".into()))?;
        let clips = cohort(&name, args.seed, &params)?;
        fs::create_dir_all(&dir).map_err(|e| Failure(format!("{}: {e}", dir.display())))?;
        for c in &clips {
            write(&dir.join(format!("{}.jsonl", c.name)), &serialize_clip(&c.clip))?;
        }
        eprintln!("wrote {} clips to {}", clips.len(), dir.display());
        return Ok(());
    }
    let label = args.gesture.expect("clap requires --gesture or --cohort");
    let gesture: GestureLabel = label.parse()?;
    let bytes = serialize_clip(&synth_clip(gesture, &params, args.seed)?);
    match args.out {
        Some(path) => write(&path, &bytes),
        None => stdout(&bytes),
    }
}

fn train(args: TrainArgs) -> Outcome {
    let mut paths: Vec<PathBuf> = fs::read_dir(&args.corpus)
        .map_err(|e| Failure(format!("{}: {e}", args.corpus.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Failure(format!("{}: no .jsonl clips", args.corpus.display())));
    }
    let corpus = paths.iter().map(|p| load_clip(p)).collect::<Result<Vec<_>, _>>()?;
    let volunteers: BTreeSet<&str> = corpus
        .iter()
        .filter_map(|c| c.meta.get("volunteer").map(String::as_str))
        .collect();
    let config = TrainConfig {
        rounds: args.rounds,
        seed: args.seed,
        volunteers: volunteers.len(),
        ..TrainConfig::default()
    };
    let bundle = train_bundle(&corpus, &WindowConfig::default(), &config)?;
    write(&args.out, &save_bundle(&bundle))?;
    eprintln!("trained on {} clips, wrote {}", corpus.len(), args.out.display());
    Ok(())
}

fn detect(args: DetectArgs) -> Outcome {
    let bundle = load_model(&args.model)?;
    let clip = load_clip(&args.clip)?;
    clip.validate()?;
    let mut det = Detector::new(&bundle, DetectorConfig::default(), clip.fps)?;
    let mut out = String::new();
    let mut events = Vec::new();
    if let DetectFormat::Conf = args.format {
        out.push_str("frame");
        for g in GestureLabel::ATOMIC {
            out.push(',');
            out.push_str(g.as_str());
        }
        out.push('\n');
    }
    for frame in &clip.frames {
        let step = det.step(frame)?;
        if let (DetectFormat::Conf, Some(_)) = (args.format, step.features) {
            out.push_str(&step.frame.to_string());
            for c in step.confidences {
                out.push(',');
                out.push_str(&fixed6(c));
            }
            out.push('\n');
        }
        events.extend(step.events);
    }
    events.extend(det.finish());
    match args.format {
        DetectFormat::Conf => {}
        DetectFormat::Events => {
            for e in &events {
                out.push_str(&format!(
                    "{} {} {} {} {}\n",
                    e.gesture,
                    e.start_frame,
                    e.peak_frame,
                    e.end_frame,
                    fixed6(e.peak_confidence)
                ));
            }
        }
        DetectFormat::Csv => {
            out.push_str("gesture,start_frame,peak_frame,end_frame,peak_confidence\n");
            for e in &events {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    e.gesture,
                    e.start_frame,
                    e.peak_frame,
                    e.end_frame,
                    fixed6(e.peak_confidence)
                ));
            }
        }
    }
    stdout(out.as_bytes())
}

fn pilot(args: PilotArgs) -> Outcome {
    let bundle = load_model(&args.model)?;
    let format = match &args.format {
        Some(f) => f.parse()?,
        None if args.report.extension().is_some_and(|x| x == "csv") => ReportFormat::Csv,
        None => ReportFormat::Text,
    };
    let mut config = PilotConfig {
        participants: args.participants,
        seed: args.seed,
        mat_prompts: args.mat_prompts,
        ..PilotConfig::default()
    };
    config.synth.noise_sigma = args.noise;
    let report = run_pilot(&bundle, &config)?;
    write(&args.report, &render_report(&report, format))?;
    let m = &report.matrix;
    stdout(
        format!(
            "overall accuracy {} ({}/{})\n",
            fixed6(report.overall_accuracy()),
            m.correct(),
            m.total()
        )
        .as_bytes(),
    )
}

fn dyad(args: DyadArgs) -> Outcome {
    let bundle = load_model(&args.model)?;
    let a = load_clip(&args.peer_a)?;
    let b = load_clip(&args.peer_b)?;
    let net = NetParams {
        latency: args.latency_ms / 1000.0,
        jitter: args.jitter_ms / 1000.0,
        drop_rate: args.drop,
        seed: args.seed,
    };
    let fusion = FusionConfig {
        hold_hands: args.hold_hands,
        ..FusionConfig::default()
    };
    let outcome = simulate_dyad(&a, &b, &bundle, &DetectorConfig::default(), &fusion, &net)?;
    if let Some(path) = &args.trace {
        write(path, outcome.trace_jsonl().as_bytes())?;
    }
    let mut out = String::new();
    for (peer, log) in [("A", &outcome.a), ("B", &outcome.b)] {
        for line in log.to_lines().lines() {
            out.push_str(&format!("{peer} {line}\n"));
        }
        if log.stale > 0 || !log.rejected.is_empty() || !log.refused.is_empty() {
            eprintln!(
                "peer {peer}: {} stale, {} undecodable, {} refused",
                log.stale,
                log.rejected.len(),
                log.refused.len()
            );
        }
    }
    let dropped = outcome.trace.iter().filter(|d| d.deliver_at.is_none()).count();
    eprintln!("{} messages, {dropped} dropped", outcome.trace.len());
    stdout(out.as_bytes())
}

fn inspect(model: &Path) -> Outcome {
    let bundle = load_model(model)?;
    let mut out = format!("feature spec {}\n", bundle.feature_spec_version);
    for (k, v) in &bundle.train_meta {
        out.push_str(&format!("{k} {v}\n"));
    }
    for m in &bundle.models {
        out.push_str(&format!(
            "{:<3} stumps={} alpha_sum={}\n",
            m.gesture.as_str(),
            m.stumps.len(),
            fmt6(m.alpha_sum())
        ));
    }
    stdout(out.as_bytes())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Gen(a) => gen(a),
        Command::Train(a) => train(a),
        Command::Detect(a) => detect(a),
        Command::Eval {
            protocol: EvalCommand::Pilot(a),
        } => pilot(a),
        Command::Dyad(a) => dyad(a),
        Command::Inspect { model } => inspect(&model),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
