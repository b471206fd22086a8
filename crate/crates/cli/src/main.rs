//! `qvote`: runs centralized or distributed phase-flip voting simulations
//! from flat key=value config files and reports tallies as a human table or
//! stable JSON.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use serde::Serialize;

use qvote_core::{
    AdversaryAction, AdversaryKind, Basis, Choice, Direction, DistributedSim, DistributedTally,
    Election, ElectionConfig, Error as CoreError, GateCounts, Phase, TallyMode,
    Verdict, VerificationResult,
};

const SCHEMA_VERSION: u32 = 1;

// exit codes; 1 is left to unexpected panics
const EXIT_PARSE: u8 = 2;
const EXIT_VALIDATION: u8 = 3;
const EXIT_CAPACITY: u8 = 4;
const EXIT_NO_VOTES: u8 = 5;
const EXIT_PROTOCOL_INCOMPLETE: u8 = 6;
const EXIT_TAMPER_DETECTED: u8 = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Centralized,
    Distributed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Structured,
}

#[derive(Debug, Parser)]
#[command(name = "qvote", about = "Phase-flip quantum voting simulator")]
struct Cli {
    /// Election pipeline to run
    #[arg(long, value_enum)]
    mode: Mode,

    /// Path to the key=value election config
    #[arg(long)]
    config: PathBuf,

    /// Override the config's shot count (0 = exact tally)
    #[arg(long)]
    shots: Option<usize>,

    /// Override the config's RNG seed
    #[arg(long)]
    seed: Option<u64>,

    /// Print the emitted gate sequence (centralized only)
    #[arg(long)]
    dump_circuit: bool,

    /// Print the protocol event trace (distributed only)
    #[arg(long)]
    trace: bool,

    /// Path to an adversary spec, one action per line (distributed only)
    #[arg(long)]
    adversary: Option<PathBuf>,

    /// Entanglement-verification rounds per voter (distributed only)
    #[arg(long)]
    verify_rounds: Option<usize>,

    /// Verification correlation threshold (distributed only)
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,

    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Human)]
    format: Format,

    /// Testing only: include per-voter ballots in distributed output
    #[arg(long)]
    unsafe_reveal_ballots: bool,
}

/// A failure with its designated exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn parse(message: impl Into<String>) -> Self {
        Self { code: EXIT_PARSE, message: message.into() }
    }

    fn validation(message: impl Into<String>) -> Self {
        Self { code: EXIT_VALIDATION, message: message.into() }
    }
}

fn failure_for(err: CoreError) -> Failure {
    let code = match err {
        CoreError::Capacity { .. } => EXIT_CAPACITY,
        CoreError::NoVotesCast => EXIT_NO_VOTES,
        CoreError::ProtocolIncomplete(_) => EXIT_PROTOCOL_INCOMPLETE,
        _ => EXIT_VALIDATION,
    };
    Failure { code, message: err.to_string() }
}

#[derive(Debug, Serialize)]
struct StructuredOutput {
    schema_version: u32,
    mode: String,
    config: ElectionConfig,
    tally: TallyResult2,
    #[serde(skip_serializing_if = "Option::is_none")]
    gate_counts: Option<GateCounts>,
    #[serde(skip_serializing_if = "Option::is_none")]
    verification: Option<Vec<VerificationResult>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tamper_detected: Option<bool>,
    /// Present only under --unsafe-reveal-ballots; doubles as the watermark.
    #[serde(skip_serializing_if = "Option::is_none")]
    unsafe_revealed_ballots: Option<Vec<qvote_core::Ballot>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    unresolved_ballots: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    circuit: Option<Vec<String>>,
}

/// Tally fields shared by both pipelines.
#[derive(Debug, Serialize)]
struct TallyResult2 {
    mode: TallyMode,
    post_selection_probability: Option<f64>,
    probabilities: Vec<f64>,
    counts: Vec<usize>,
    participating_votes: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    validate_flag_modes(cli)?;
    let text = std::fs::read_to_string(&cli.config)
        .map_err(|e| Failure::parse(format!("{}: {e}", cli.config.display())))?;
    let mut config = parse_config(&text)?;
    if let Some(shots) = cli.shots {
        config.shots = shots;
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    config.validate().map_err(failure_for)?;
    match cli.mode {
        Mode::Centralized => run_centralized(cli, config),
        Mode::Distributed => run_distributed(cli, config),
    }
}

fn validate_flag_modes(cli: &Cli) -> Result<(), Failure> {
    match cli.mode {
        Mode::Centralized => {
            let offending = [
                (cli.trace, "--trace"),
                (cli.adversary.is_some(), "--adversary"),
                (cli.verify_rounds.is_some(), "--verify-rounds"),
                (cli.unsafe_reveal_ballots, "--unsafe-reveal-ballots"),
            ];
            for (set, flag) in offending {
                if set {
                    return Err(Failure::validation(format!(
                        "{flag} applies to distributed mode only"
                    )));
                }
            }
        }
        Mode::Distributed => {
            if cli.dump_circuit {
                return Err(Failure::validation(
                    "--dump-circuit applies to centralized mode only",
                ));
            }
        }
    }
    Ok(())
}

/// Parses the flat key=value config format. Lines are `key = value`;
/// `#` starts a comment; keys are voters, candidates, state, choices,
/// shots, seed, schema.
fn parse_config(text: &str) -> Result<ElectionConfig, Failure> {
    let mut voters: Option<usize> = None;
    let mut candidates: Option<usize> = None;
    let mut state: Option<String> = None;
    let mut choices: Option<Vec<Choice>> = None;
    let mut shots = 0usize;
    let mut seed = 0u64;

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let lineno = lineno + 1;
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Failure::parse(format!("line {lineno}: expected `key = value`, got `{line}`"))
        })?;
        let (key, value) = (key.trim(), value.trim());
        let parse_usize = |v: &str, field: &str| {
            v.parse::<usize>().map_err(|_| {
                Failure::parse(format!("line {lineno}: {field} must be an integer, got `{v}`"))
            })
        };
        match key {
            "schema" => {
                let v = parse_usize(value, "schema")?;
                if v as u32 != SCHEMA_VERSION {
                    return Err(Failure::parse(format!(
                        "line {lineno}: unsupported schema version {v} (expected {SCHEMA_VERSION})"
                    )));
                }
            }
            "voters" => voters = Some(parse_usize(value, "voters")?),
            "candidates" => candidates = Some(parse_usize(value, "candidates")?),
            "state" => state = Some(value.to_string()),
            "choices" => {
                let mut parsed = Vec::new();
                for part in value.split(',') {
                    let part = part.trim();
                    if part == "abstain" {
                        parsed.push(Choice::Abstain);
                    } else {
                        parsed.push(Choice::Candidate(parse_usize(part, "choices entry")?));
                    }
                }
                choices = Some(parsed);
            }
            "shots" => shots = parse_usize(value, "shots")?,
            "seed" => {
                seed = value.parse::<u64>().map_err(|_| {
                    Failure::parse(format!("line {lineno}: seed must be an integer, got `{value}`"))
                })?;
            }
            other => {
                return Err(Failure::parse(format!("line {lineno}: unknown key `{other}`")));
            }
        }
    }

    let num_voters = voters.ok_or_else(|| Failure::parse("missing required key `voters`"))?;
    let num_candidates =
        candidates.ok_or_else(|| Failure::parse("missing required key `candidates`"))?;
    let choices = choices.ok_or_else(|| Failure::parse("missing required key `choices`"))?;
    let candidate_state = match state.as_deref() {
        None => qvote_core::default_candidate_state(num_candidates).map_err(failure_for)?,
        Some(s) => serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| Failure::parse(format!("unknown candidate state `{s}`")))?,
    };
    let config = ElectionConfig {
        num_voters,
        num_candidates,
        candidate_state,
        choices,
        shots,
        seed,
    };
    config.validate().map_err(failure_for)?;
    Ok(config)
}

/// Parses the line-based adversary spec: each line is space-separated
/// `key=value` pairs with keys voter, direction, phase, kind, basis, angle.
fn parse_adversary_spec(text: &str) -> Result<Vec<AdversaryAction>, Failure> {
    let mut actions = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let lineno = lineno + 1;
        let mut voter = None;
        let mut direction = None;
        let mut phase = None;
        let mut kind_name = None;
        let mut basis = None;
        let mut angle = None;
        for token in line.split_whitespace() {
            let (key, value) = token.split_once('=').ok_or_else(|| {
                Failure::parse(format!("adversary line {lineno}: expected key=value, got `{token}`"))
            })?;
            match key {
                "voter" => {
                    voter = Some(value.parse::<usize>().map_err(|_| {
                        Failure::parse(format!("adversary line {lineno}: bad voter `{value}`"))
                    })?)
                }
                "direction" => {
                    direction = Some(match value {
                        "to-voter" => Direction::ToVoter,
                        "to-center" => Direction::ToCenter,
                        _ => {
                            return Err(Failure::parse(format!(
                                "adversary line {lineno}: direction must be to-voter or to-center"
                            )))
                        }
                    })
                }
                "phase" => {
                    phase = Some(match value {
                        "setup" => Phase::Setup,
                        "voting" => Phase::Voting,
                        "verification" => Phase::Verification,
                        _ => {
                            return Err(Failure::parse(format!(
                                "adversary line {lineno}: phase must be setup, voting, or verification"
                            )))
                        }
                    })
                }
                "kind" => kind_name = Some(value.to_string()),
                "basis" => {
                    basis = Some(match value {
                        "x" | "X" => Basis::X,
                        "z" | "Z" => Basis::Z,
                        _ => {
                            return Err(Failure::parse(format!(
                                "adversary line {lineno}: basis must be x or z"
                            )))
                        }
                    })
                }
                "angle" => {
                    angle = Some(value.parse::<f64>().map_err(|_| {
                        Failure::parse(format!("adversary line {lineno}: bad angle `{value}`"))
                    })?)
                }
                other => {
                    return Err(Failure::parse(format!(
                        "adversary line {lineno}: unknown key `{other}`"
                    )))
                }
            }
        }
        let missing =
            |field: &str| Failure::parse(format!("adversary line {lineno}: missing `{field}`"));
        let kind = match kind_name.ok_or_else(|| missing("kind"))?.as_str() {
            "measure-in-channel" => AdversaryKind::MeasureInChannel {
                basis: basis.ok_or_else(|| missing("basis"))?,
            },
            "phase-tamper" => {
                AdversaryKind::PhaseTamper { angle: angle.ok_or_else(|| missing("angle"))? }
            }
            "bit-flip" => AdversaryKind::BitFlip,
            "swap-with-fresh" => AdversaryKind::SwapWithFresh,
            other => {
                return Err(Failure::parse(format!(
                    "adversary line {lineno}: unknown kind `{other}`"
                )))
            }
        };
        actions.push(AdversaryAction {
            voter: voter.ok_or_else(|| missing("voter"))?,
            direction: direction.ok_or_else(|| missing("direction"))?,
            phase: phase.ok_or_else(|| missing("phase"))?,
            kind,
        });
    }
    Ok(actions)
}

fn run_centralized(cli: &Cli, config: ElectionConfig) -> Result<(), Failure> {
    let election = Election::run(config.clone()).map_err(failure_for)?;
    let tally = if config.shots > 0 {
        election.tally_sampled(config.shots, config.seed).map_err(failure_for)?
    } else {
        election.tally_exact().map_err(failure_for)?
    };
    let circuit = cli.dump_circuit.then(|| {
        election.sequence().dump().lines().map(str::to_string).collect::<Vec<_>>()
    });
    let output = StructuredOutput {
        schema_version: SCHEMA_VERSION,
        mode: "centralized".into(),
        config,
        tally: TallyResult2 {
            mode: tally.mode,
            post_selection_probability: Some(tally.post_selection_probability),
            probabilities: tally.probabilities.clone(),
            counts: tally.counts.clone(),
            participating_votes: tally.participating_votes,
        },
        gate_counts: Some(election.gate_counts()),
        verification: None,
        tamper_detected: None,
        unsafe_revealed_ballots: None,
        unresolved_ballots: None,
        trace: None,
        circuit,
    };
    emit_report(cli, &output);
    Ok(())
}

fn run_distributed(cli: &Cli, config: ElectionConfig) -> Result<(), Failure> {
    let mut sim = DistributedSim::setup(&config, 1).map_err(failure_for)?;
    if let Some(path) = &cli.adversary {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::parse(format!("{}: {e}", path.display())))?;
        for action in parse_adversary_spec(&text)? {
            sim.inject_adversary(action).map_err(failure_for)?;
        }
    }
    sim.run_all_rounds().map_err(failure_for)?;

    let mut verification = None;
    let mut tamper_detected = false;
    if let Some(rounds) = cli.verify_rounds {
        let mut results = Vec::new();
        for voter in 0..config.num_voters {
            let result =
                sim.verify_entanglement(voter, rounds, cli.threshold).map_err(failure_for)?;
            tamper_detected |= result.verdict == Verdict::Disturbed;
            results.push(result);
        }
        verification = Some(results);
    }

    let mode = if config.shots > 0 { TallyMode::Sampled } else { TallyMode::Exact };
    let tally: DistributedTally = sim.distributed_tally(mode).map_err(failure_for)?;
    let trace = cli.trace.then(|| {
        sim.trace_export().lines().map(str::to_string).collect::<Vec<_>>()
    });
    let output = StructuredOutput {
        schema_version: SCHEMA_VERSION,
        mode: "distributed".into(),
        config,
        tally: TallyResult2 {
            mode: tally.mode,
            post_selection_probability: None,
            probabilities: tally.probabilities.clone(),
            counts: tally.counts.clone(),
            participating_votes: tally.participating_votes,
        },
        gate_counts: None,
        verification,
        tamper_detected: Some(tamper_detected),
        unsafe_revealed_ballots: cli.unsafe_reveal_ballots.then(|| tally.per_voter.clone()),
        unresolved_ballots: Some(tally.unresolved),
        trace,
        circuit: None,
    };
    emit_report(cli, &output);
    if tamper_detected {
        return Err(Failure {
            code: EXIT_TAMPER_DETECTED,
            message: "entanglement verification flagged a disturbed channel".into(),
        });
    }
    Ok(())
}

fn emit_report(cli: &Cli, output: &StructuredOutput) {
    match cli.format {
        Format::Structured => {
            println!("{}", serde_json::to_string_pretty(output).expect("serializable output"));
        }
        Format::Human => print_human(output),
    }
}

fn print_human(output: &StructuredOutput) {
    println!("{} election, {} voters, {} candidates", output.mode, output.config.num_voters, output.config.num_candidates);
    println!();
    println!("{:<12} {:>12} {:>8}", "candidate", "probability", "count");
    for (k, (p, c)) in output.tally.probabilities.iter().zip(&output.tally.counts).enumerate() {
        println!("{:<12} {:>12.6} {:>8}", k, p, c);
    }
    println!();
    println!("participating votes: {}", output.tally.participating_votes);
    if let Some(p) = output.tally.post_selection_probability {
        println!("post-selection probability: {p:.6}");
    }
    if let Some(u) = output.unresolved_ballots {
        if u > 0 {
            println!("unresolved ballots: {u}");
        }
    }
    if let Some(counts) = &output.gate_counts {
        println!(
            "gate counts: {} one-qubit, {} two-qubit, {} three-qubit ({} total)",
            counts.one_qubit,
            counts.two_qubit,
            counts.three_qubit,
            counts.total()
        );
    }
    if let Some(results) = &output.verification {
        for r in results {
            println!(
                "verification voter {}: xx={:.4} zz={:.4} over {} rounds -> {:?}",
                r.voter, r.xx_correlation, r.zz_correlation, r.rounds, r.verdict
            );
        }
    }
    if let Some(ballots) = &output.unsafe_revealed_ballots {
        println!("!! UNSAFE: per-voter ballots revealed (testing only)");
        for (j, b) in ballots.iter().enumerate() {
            println!("  voter {j}: {b:?}");
        }
    }
    if let Some(circuit) = &output.circuit {
        println!();
        println!("circuit dump:");
        for line in circuit {
            println!("{line}");
        }
    }
    if let Some(trace) = &output.trace {
        println!();
        println!("protocol trace:");
        for line in trace {
            println!("{line}");
        }
    }
}
