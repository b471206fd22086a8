//! Distributed voting: a center and N voters exchanging qubits over
//! tamperable channels, with sacrificial-pair entanglement verification.
//!
//! One global state vector backs every election qubit; actors only touch it
//! through handles and the round choreography, so locality is a protocol
//! rule rather than a simulator property. Each voter owns a candidate pair
//! slot plus a control-qubit slot, laid out voter-major from qubit 0.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::centralized::{CandidateBasisMap, Choice, ElectionConfig, TallyMode};
use crate::error::{Error, Result};
use crate::gates;
use crate::state::{ControlSpec, StateVector, MAX_QUBITS, POSTSELECT_EPS};

/// Shots-mode retry budget per voter (fresh pair re-issues).
pub const MAX_ROUND_RETRIES: usize = 32;

/// Minimum verification rounds for meaningful correlation statistics.
pub const MIN_VERIFY_ROUNDS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Owner {
    Center,
    Voter(usize),
    InChannel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Lineage {
    CandidateVoterSide,
    CandidateCenterSide,
    Control,
    VerificationPair,
}

/// One simulated qubit with its custody record.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QubitHandle {
    pub index: usize,
    pub owner: Owner,
    pub lineage: Lineage,
    pub voter: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Actor {
    Center,
    Voter(usize),
    Channel,
    Adversary,
}

impl std::fmt::Display for Actor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Actor::Center => write!(f, "center"),
            Actor::Voter(j) => write!(f, "voter{j}"),
            Actor::Channel => write!(f, "channel"),
            Actor::Adversary => write!(f, "adversary"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Action {
    Prepare,
    Send,
    Receive,
    ApplyGate,
    Measure,
    Verify,
    Adversary,
    Reject,
}

impl std::fmt::Display for Action {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Action::Prepare => "prepare",
            Action::Send => "send",
            Action::Receive => "receive",
            Action::ApplyGate => "apply-gate",
            Action::Measure => "measure",
            Action::Verify => "verify",
            Action::Adversary => "adversary",
            Action::Reject => "reject",
        };
        write!(f, "{s}")
    }
}

/// One step of the protocol choreography; the trace is the simulation's
/// omniscient audit log, invisible to the actors themselves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtocolEvent {
    pub seq: u64,
    pub actor: Actor,
    pub action: Action,
    pub payload: String,
}

impl ProtocolEvent {
    pub fn line(&self) -> String {
        format!("{} {} {} {}", self.seq, self.actor, self.action, self.payload)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    ToVoter,
    ToCenter,
}

/// Which protocol stage a channel trigger fires in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    Setup,
    Voting,
    Verification,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Basis {
    X,
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum AdversaryKind {
    MeasureInChannel { basis: Basis },
    PhaseTamper { angle: f64 },
    BitFlip,
    SwapWithFresh,
}

/// A registered channel attack: fires on every matching transfer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdversaryAction {
    pub voter: usize,
    pub direction: Direction,
    pub phase: Phase,
    #[serde(flatten)]
    pub kind: AdversaryKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Intact,
    Disturbed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationResult {
    pub voter: usize,
    pub rounds: usize,
    pub xx_correlation: f64,
    pub zz_correlation: f64,
    pub threshold: f64,
    pub verdict: Verdict,
}

/// A resolved or unresolved per-voter ballot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ballot {
    Candidate(usize),
    NoVote,
    Unresolved,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributedTally {
    pub mode: TallyMode,
    /// Indexed by voter; excluded from default CLI output.
    pub per_voter: Vec<Ballot>,
    pub counts: Vec<usize>,
    pub probabilities: Vec<f64>,
    pub participating_votes: usize,
    pub unresolved: usize,
}

/// The whole distributed election simulation.
pub struct DistributedSim {
    config: ElectionConfig,
    basis_map: CandidateBasisMap,
    candidate_width: usize,
    state: StateVector,
    handles: Vec<QubitHandle>,
    /// Classical mirror of the per-voter flag qubit.
    flags: Vec<bool>,
    round_complete: Vec<bool>,
    cast_choices: Vec<Option<Choice>>,
    gates_applied: Vec<usize>,
    verification_pairs_left: Vec<usize>,
    adversaries: Vec<AdversaryAction>,
    trace: Vec<ProtocolEvent>,
    rng: ChaCha8Rng,
}

impl DistributedSim {
    /// Step 1 of the protocol: the center prepares one candidate state per
    /// voter and ships the voter-side qubit, plus `pairs_per_voter - 1`
    /// sacrificial verification pairs.
    pub fn setup(config: &ElectionConfig, pairs_per_voter: usize) -> Result<Self> {
        if config.num_voters == 0 {
            return Err(Error::Config("empty election rejected".into()));
        }
        config.validate()?;
        if pairs_per_voter < 1 {
            return Err(Error::Config("pairs_per_voter must be at least 1".into()));
        }
        let m = config.candidate_qubits();
        let per_voter = m + 1;
        let total = config
            .num_voters
            .checked_mul(per_voter)
            .filter(|&t| t <= MAX_QUBITS)
            .ok_or(Error::Capacity {
                requested: config.num_voters * per_voter,
                max: MAX_QUBITS,
            })?;

        let cands =
            crate::centralized::prepare_candidate_state(config.candidate_state, config.num_candidates)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << total];
        let sub_mask = (1usize << per_voter) - 1;
        for (idx, amp) in amps.iter_mut().enumerate() {
            let mut a = Complex64::new(1.0, 0.0);
            let mut ok = true;
            for j in 0..config.num_voters {
                let shift = (config.num_voters - 1 - j) * per_voter;
                let sub = (idx >> shift) & sub_mask;
                let ctrl_bit = sub & 1;
                if ctrl_bit != 0 {
                    ok = false;
                    break;
                }
                a *= cands.amplitude(sub >> 1);
            }
            if ok {
                *amp = a;
            }
        }
        let state = StateVector::set_amplitudes(amps)?;

        let mut sim = Self {
            config: config.clone(),
            basis_map: CandidateBasisMap::for_kind(config.candidate_state, config.num_candidates),
            candidate_width: m,
            state,
            handles: Vec::new(),
            flags: vec![false; config.num_voters],
            round_complete: vec![false; config.num_voters],
            cast_choices: vec![None; config.num_voters],
            gates_applied: vec![0; config.num_voters],
            verification_pairs_left: vec![pairs_per_voter - 1; config.num_voters],
            adversaries: Vec::new(),
            trace: Vec::new(),
            rng: ChaCha8Rng::seed_from_u64(config.seed),
        };

        for j in 0..config.num_voters {
            let base = j * per_voter;
            sim.handles.push(QubitHandle {
                index: base,
                owner: Owner::Center,
                lineage: Lineage::CandidateVoterSide,
                voter: j,
            });
            for q in 1..m {
                sim.handles.push(QubitHandle {
                    index: base + q,
                    owner: Owner::Center,
                    lineage: Lineage::CandidateCenterSide,
                    voter: j,
                });
            }
            sim.handles.push(QubitHandle {
                index: base + m,
                owner: Owner::Center,
                lineage: Lineage::Control,
                voter: j,
            });
            sim.log(Actor::Center, Action::Prepare, format!("candidate-pair voter={j}"));
            // ship the voter-side half
            sim.set_owner(base, Owner::InChannel);
            sim.log(Actor::Center, Action::Send, format!("qubit={base} to=voter{j}"));
            sim.apply_channel_adversaries(j, Direction::ToVoter, Phase::Setup, base)?;
            sim.set_owner(base, Owner::Voter(j));
            sim.log(Actor::Voter(j), Action::Receive, format!("qubit={base}"));

            for p in 0..pairs_per_voter - 1 {
                sim.log(
                    Actor::Center,
                    Action::Prepare,
                    format!("verification-pair voter={j} pair={p}"),
                );
            }
        }
        Ok(sim)
    }

    pub fn config(&self) -> &ElectionConfig {
        &self.config
    }

    pub fn state(&self) -> &StateVector {
        &self.state
    }

    pub fn trace(&self) -> &[ProtocolEvent] {
        &self.trace
    }

    pub fn handles(&self) -> &[QubitHandle] {
        &self.handles
    }

    pub fn trace_export(&self) -> String {
        let mut out = String::new();
        for e in &self.trace {
            out.push_str(&e.line());
            out.push('\n');
        }
        out
    }

    /// Gates applied on behalf of a voter; stays at zero for rejected rounds.
    pub fn gates_applied(&self, voter: usize) -> usize {
        self.gates_applied[voter]
    }

    fn log(&mut self, actor: Actor, action: Action, payload: String) {
        let seq = self.trace.len() as u64;
        self.trace.push(ProtocolEvent { seq, actor, action, payload });
    }

    fn set_owner(&mut self, index: usize, owner: Owner) {
        let h = self
            .handles
            .iter_mut()
            .find(|h| h.index == index)
            .expect("handle exists");
        h.owner = owner;
    }

    fn voter_base(&self, voter: usize) -> usize {
        voter * (self.candidate_width + 1)
    }

    fn control_index(&self, voter: usize) -> usize {
        self.voter_base(voter) + self.candidate_width
    }

    /// Registers a channel attack to be applied at matching transfers.
    pub fn inject_adversary(&mut self, action: AdversaryAction) -> Result<()> {
        if action.voter >= self.config.num_voters {
            return Err(Error::Config(format!(
                "adversary trigger references voter {} of {}",
                action.voter, self.config.num_voters
            )));
        }
        self.adversaries.push(action);
        Ok(())
    }

    fn matching_adversaries(
        &self,
        voter: usize,
        direction: Direction,
        phase: Phase,
    ) -> Vec<AdversaryKind> {
        self.adversaries
            .iter()
            .filter(|a| a.voter == voter && a.direction == direction && a.phase == phase)
            .map(|a| a.kind)
            .collect()
    }

    /// Applies every matching attack to a global-state qubit in transit.
    fn apply_channel_adversaries(
        &mut self,
        voter: usize,
        direction: Direction,
        phase: Phase,
        qubit: usize,
    ) -> Result<()> {
        for kind in self.matching_adversaries(voter, direction, phase) {
            self.apply_adversary_to_global(kind, qubit)?;
            self.log(
                Actor::Adversary,
                Action::Adversary,
                format!("qubit={qubit} voter={voter} {}", kind_label(&kind)),
            );
        }
        Ok(())
    }

    fn apply_adversary_to_global(&mut self, kind: AdversaryKind, qubit: usize) -> Result<()> {
        match kind {
            AdversaryKind::BitFlip => self.state.apply_single(&gates::pauli_x(), qubit)?,
            AdversaryKind::PhaseTamper { angle } => {
                self.state.apply_single(&gates::phase(angle), qubit)?
            }
            AdversaryKind::MeasureInChannel { basis } => {
                if basis == Basis::X {
                    self.state.apply_single(&gates::hadamard(), qubit)?;
                }
                self.state.measure_qubit(qubit, &mut self.rng)?;
                if basis == Basis::X {
                    self.state.apply_single(&gates::hadamard(), qubit)?;
                }
            }
            AdversaryKind::SwapWithFresh => {
                let rec = self.state.measure_qubit(qubit, &mut self.rng)?;
                if rec.outcome == 1 {
                    self.state.apply_single(&gates::pauli_x(), qubit)?;
                }
            }
        }
        Ok(())
    }

    /// Control pattern and Z target for voter j's phase flip. For a Bell
    /// pair the gate is local to the control qubit and the voter-side half;
    /// wider candidate states condition on the full register.
    fn vote_pattern(&self, voter: usize, candidate: usize) -> (Vec<(usize, u8)>, usize) {
        let base = self.voter_base(voter);
        let ctrl = self.control_index(voter);
        let m = self.candidate_width;
        let pattern = self.basis_map.patterns[candidate];
        if self.config.candidate_state == crate::centralized::CandidateStateKind::BellPair {
            let vq = base; // voter-side half
            let bit = ((pattern >> (m - 1)) & 1) as u8;
            if bit == 1 {
                (vec![(ctrl, 1)], vq)
            } else {
                (vec![(vq, 0)], ctrl)
            }
        } else {
            let mut controls = vec![(ctrl, 1)];
            let mut target = None;
            for q in 0..m {
                let bit = ((pattern >> (m - 1 - q)) & 1) as u8;
                if bit == 1 && target.is_none() {
                    target = Some(base + q);
                } else {
                    controls.push((base + q, bit));
                }
            }
            match target {
                Some(t) => (controls, t),
                None => {
                    controls.retain(|&(q, _)| q != ctrl);
                    (controls, ctrl)
                }
            }
        }
    }

    /// Steps 2-4 for one voter: control qubit out in |+>, phase-flip vote,
    /// control qubit back, flag set.
    pub fn voting_round(&mut self, voter: usize, choice: Choice) -> Result<()> {
        if voter >= self.config.num_voters {
            return Err(Error::Config(format!("voter {voter} out of range")));
        }
        if self.flags[voter] {
            self.log(
                Actor::Center,
                Action::Reject,
                format!("voter={voter} reason=flag-set"),
            );
            return Err(Error::DoubleVote(voter));
        }
        let ctrl = self.control_index(voter);

        // center prepares |+> and ships it
        self.state.apply_single(&gates::hadamard(), ctrl)?;
        self.log(Actor::Center, Action::Prepare, format!("control voter={voter} qubit={ctrl}"));
        self.set_owner(ctrl, Owner::InChannel);
        self.log(Actor::Center, Action::Send, format!("qubit={ctrl} to=voter{voter}"));
        self.apply_channel_adversaries(voter, Direction::ToVoter, Phase::Voting, ctrl)?;
        self.set_owner(ctrl, Owner::Voter(voter));
        self.log(Actor::Voter(voter), Action::Receive, format!("qubit={ctrl}"));

        if let Choice::Candidate(k) = choice {
            if k >= self.config.num_candidates {
                return Err(Error::Config(format!("candidate {k} out of range")));
            }
            let (controls, target) = self.vote_pattern(voter, k);
            self.state
                .apply_controlled(&ControlSpec::new(controls, target), &gates::pauli_z())?;
            self.gates_applied[voter] += 1;
            self.log(
                Actor::Voter(voter),
                Action::ApplyGate,
                format!("vote candidate={k} qubit={target}"),
            );
        }

        // control comes back
        self.set_owner(ctrl, Owner::InChannel);
        self.log(Actor::Voter(voter), Action::Send, format!("qubit={ctrl} to=center"));
        self.apply_channel_adversaries(voter, Direction::ToCenter, Phase::Voting, ctrl)?;
        self.set_owner(ctrl, Owner::Center);
        self.log(Actor::Center, Action::Receive, format!("qubit={ctrl}"));

        self.flags[voter] = true;
        self.round_complete[voter] = true;
        self.cast_choices[voter] = Some(choice);
        self.log(Actor::Center, Action::ApplyGate, format!("flag voter={voter}"));
        Ok(())
    }

    /// Stabilizer-correlation test on sacrificial pairs: alternating rounds
    /// measure XX and ZZ; a Bell pair scores +1 on both.
    pub fn verify_entanglement(
        &mut self,
        voter: usize,
        rounds: usize,
        threshold: f64,
    ) -> Result<VerificationResult> {
        if voter >= self.config.num_voters {
            return Err(Error::Config(format!("voter {voter} out of range")));
        }
        if rounds < MIN_VERIFY_ROUNDS {
            return Err(Error::Statistics { min: MIN_VERIFY_ROUNDS, got: rounds });
        }
        let mut xx_sum = 0i64;
        let mut xx_rounds = 0usize;
        let mut zz_sum = 0i64;
        let mut zz_rounds = 0usize;
        for r in 0..rounds {
            // statistical mode: the center re-prepares a pair per round once
            // the sacrificial allocation is spent
            if self.verification_pairs_left[voter] > 0 {
                self.verification_pairs_left[voter] -= 1;
            } else {
                self.log(
                    Actor::Center,
                    Action::Prepare,
                    format!("verification-pair voter={voter} reissued round={r}"),
                );
            }
            let mut pair = StateVector::set_amplitudes(vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
            ])?;
            // voter half (qubit 0) transits the channel
            for kind in self.matching_adversaries(voter, Direction::ToVoter, Phase::Verification) {
                match kind {
                    AdversaryKind::BitFlip => pair.apply_single(&gates::pauli_x(), 0)?,
                    AdversaryKind::PhaseTamper { angle } => {
                        pair.apply_single(&gates::phase(angle), 0)?
                    }
                    AdversaryKind::MeasureInChannel { basis } => {
                        if basis == Basis::X {
                            pair.apply_single(&gates::hadamard(), 0)?;
                        }
                        pair.measure_qubit(0, &mut self.rng)?;
                        if basis == Basis::X {
                            pair.apply_single(&gates::hadamard(), 0)?;
                        }
                    }
                    AdversaryKind::SwapWithFresh => {
                        let rec = pair.measure_qubit(0, &mut self.rng)?;
                        if rec.outcome == 1 {
                            pair.apply_single(&gates::pauli_x(), 0)?;
                        }
                    }
                }
                self.log(
                    Actor::Adversary,
                    Action::Adversary,
                    format!("verification voter={voter} round={r} {}", kind_label(&kind)),
                );
            }
            let basis = if r % 2 == 0 { Basis::X } else { Basis::Z };
            if basis == Basis::X {
                pair.apply_single(&gates::hadamard(), 0)?;
                pair.apply_single(&gates::hadamard(), 1)?;
            }
            let o0 = pair.measure_qubit(0, &mut self.rng)?.outcome;
            let o1 = pair.measure_qubit(1, &mut self.rng)?.outcome;
            let product = if o0 == o1 { 1 } else { -1 };
            match basis {
                Basis::X => {
                    xx_sum += product;
                    xx_rounds += 1;
                }
                Basis::Z => {
                    zz_sum += product;
                    zz_rounds += 1;
                }
            }
        }
        let xx = xx_sum as f64 / xx_rounds.max(1) as f64;
        let zz = zz_sum as f64 / zz_rounds.max(1) as f64;
        let verdict = if xx.min(zz) < threshold { Verdict::Disturbed } else { Verdict::Intact };
        self.log(
            Actor::Voter(voter),
            Action::Verify,
            format!("rounds={rounds} xx={xx:.4} zz={zz:.4} verdict={verdict:?}"),
        );
        Ok(VerificationResult {
            voter,
            rounds,
            xx_correlation: xx,
            zz_correlation: zz,
            threshold,
            verdict,
        })
    }

    /// Runs every configured voter's round in ID order.
    pub fn run_all_rounds(&mut self) -> Result<()> {
        for (j, choice) in self.config.choices.clone().into_iter().enumerate() {
            self.voting_round(j, choice)?;
        }
        Ok(())
    }

    /// Tallying: per voter, Hadamard + measure the stored control; outcome 1
    /// opens the difference sector and the candidate register reveals the
    /// ballot. Exact mode inspects amplitudes; shots mode re-issues the
    /// round up to the retry budget.
    pub fn distributed_tally(&mut self, mode: TallyMode) -> Result<DistributedTally> {
        for j in 0..self.config.num_voters {
            if !self.round_complete[j] {
                return Err(Error::ProtocolIncomplete(j));
            }
        }
        let per_voter = match mode {
            TallyMode::Exact => self.tally_exact_ballots()?,
            TallyMode::Sampled => self.tally_sampled_ballots()?,
        };
        let mut counts = vec![0usize; self.config.num_candidates];
        let mut participating = 0usize;
        let mut unresolved = 0usize;
        for b in &per_voter {
            match b {
                Ballot::Candidate(k) => {
                    counts[*k] += 1;
                    participating += 1;
                }
                Ballot::NoVote => {}
                Ballot::Unresolved => unresolved += 1,
            }
        }
        let probabilities = counts
            .iter()
            .map(|&c| if participating > 0 { c as f64 / participating as f64 } else { 0.0 })
            .collect();
        Ok(DistributedTally {
            mode,
            per_voter,
            counts,
            probabilities,
            participating_votes: participating,
            unresolved,
        })
    }

    fn tally_exact_ballots(&mut self) -> Result<Vec<Ballot>> {
        let k_eff = self.config.k_eff() as f64;
        let mut ballots = Vec::with_capacity(self.config.num_voters);
        for j in 0..self.config.num_voters {
            let ctrl = self.control_index(j);
            self.state.apply_single(&gates::hadamard(), ctrl)?;
            self.log(Actor::Center, Action::ApplyGate, format!("tally-H voter={j} qubit={ctrl}"));
            let p1 = self.state.prob_one(ctrl)?;
            if p1 < POSTSELECT_EPS {
                // sum sector only: no phase kick, no ballot
                self.state.postselect(ctrl, 0)?;
                self.log(Actor::Center, Action::Measure, format!("control voter={j} outcome=0"));
                ballots.push(Ballot::NoVote);
                continue;
            }
            // control-consistency: a clean cast vote puts exactly 1/k_eff of
            // the weight in the difference sector
            if (p1 - 1.0 / k_eff).abs() > 1e-9 {
                self.log(
                    Actor::Center,
                    Action::Measure,
                    format!("control voter={j} anomalous p1={p1:.6}"),
                );
                ballots.push(Ballot::Unresolved);
                // collapse to the dominant branch to keep tallying the rest
                let outcome = if p1 >= 0.5 { 1 } else { 0 };
                self.state.postselect(ctrl, outcome)?;
                continue;
            }
            self.state.postselect(ctrl, 1)?;
            self.log(Actor::Center, Action::Measure, format!("control voter={j} outcome=1"));
            let base = self.voter_base(j);
            let cand_qubits: Vec<usize> = (base..base + self.candidate_width).collect();
            let marginal = self.state.marginal_distribution(&cand_qubits)?;
            let (pattern, weight) = marginal
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .unwrap();
            if *weight < 1.0 - 1e-9 {
                ballots.push(Ballot::Unresolved);
                continue;
            }
            self.log(
                Actor::Center,
                Action::Measure,
                format!("candidate voter={j} pattern={pattern:0width$b}", width = self.candidate_width),
            );
            match self.basis_map.candidate_for(pattern) {
                Some(k) => ballots.push(Ballot::Candidate(k)),
                None => ballots.push(Ballot::Unresolved),
            }
        }
        Ok(ballots)
    }

    fn tally_sampled_ballots(&mut self) -> Result<Vec<Ballot>> {
        let mut ballots = Vec::with_capacity(self.config.num_voters);
        for j in 0..self.config.num_voters {
            let mut resolved = Ballot::Unresolved;
            for attempt in 0..MAX_ROUND_RETRIES {
                let ctrl = self.control_index(j);
                self.state.apply_single(&gates::hadamard(), ctrl)?;
                let rec = self.state.measure_qubit(ctrl, &mut self.rng)?;
                self.log(
                    Actor::Center,
                    Action::Measure,
                    format!("control voter={j} attempt={attempt} outcome={}", rec.outcome),
                );
                if rec.outcome == 1 {
                    let base = self.voter_base(j);
                    let mut pattern = 0usize;
                    for q in base..base + self.candidate_width {
                        let bit = self.state.measure_qubit(q, &mut self.rng)?.outcome;
                        pattern = (pattern << 1) | bit as usize;
                    }
                    self.log(
                        Actor::Center,
                        Action::Measure,
                        format!("candidate voter={j} pattern={pattern:0width$b}", width = self.candidate_width),
                    );
                    if let Some(k) = self.basis_map.candidate_for(pattern) {
                        resolved = Ballot::Candidate(k);
                    }
                    break;
                }
                // sum sector: re-issue a fresh pair and replay the round
                if attempt + 1 < MAX_ROUND_RETRIES {
                    self.reissue_round(j)?;
                }
            }
            ballots.push(resolved);
        }
        Ok(ballots)
    }

    /// Discards a voter's collapsed sector and replays their round on a
    /// freshly prepared pair and control qubit.
    fn reissue_round(&mut self, voter: usize) -> Result<()> {
        let base = self.voter_base(voter);
        let per_voter = self.candidate_width + 1;
        // collapse the leftover sector so the sector factorizes
        for q in base..base + per_voter {
            let rec = self.state.measure_qubit(q, &mut self.rng)?;
            if rec.outcome == 1 {
                self.state.apply_single(&gates::pauli_x(), q)?;
            }
        }
        self.log(Actor::Center, Action::Prepare, format!("reissue voter={voter}"));
        // fresh candidate state: rotate the |0..0> sector into psi_cands
        self.prepare_candidate_in_place(voter)?;
        // replay the voting round without the flag gate (the flag already
        // covers this voter; the retry is part of the same logical round)
        let ctrl = self.control_index(voter);
        self.state.apply_single(&gates::hadamard(), ctrl)?;
        if let Some(Choice::Candidate(k)) = self.cast_choices[voter] {
            let (controls, target) = self.vote_pattern(voter, k);
            self.state
                .apply_controlled(&ControlSpec::new(controls, target), &gates::pauli_z())?;
            self.gates_applied[voter] += 1;
            self.log(Actor::Voter(voter), Action::ApplyGate, format!("vote-replay voter={voter}"));
        }
        Ok(())
    }

    /// Prepares |psi_cands> on a voter's candidate qubits assuming they are
    /// currently in |0..0>.
    fn prepare_candidate_in_place(&mut self, voter: usize) -> Result<()> {
        let base = self.voter_base(voter);
        match self.config.candidate_state {
            crate::centralized::CandidateStateKind::BellPair => {
                self.state.apply_single(&gates::hadamard(), base)?;
                self.state
                    .apply_controlled(&ControlSpec::new(vec![(base, 1)], base + 1), &gates::pauli_x())?;
            }
            crate::centralized::CandidateStateKind::WState => {
                // (|00> + |01> + |10>)/sqrt3: Ry splits |0> into
                // sqrt(2/3)|0> + sqrt(1/3)|1>, then the |0> branch fans out
                let theta = 2.0 * (1.0_f64 / 3.0).sqrt().asin();
                self.state.apply_single(&gates::ry(theta), base)?;
                self.state.apply_controlled(
                    &ControlSpec::new(vec![(base, 0)], base + 1),
                    &gates::hadamard(),
                )?;
            }
            crate::centralized::CandidateStateKind::UniformBasis => {
                return Err(Error::Config(
                    "uniform-basis candidate states are not supported in the distributed model"
                        .into(),
                ));
            }
        }
        Ok(())
    }
}

fn kind_label(kind: &AdversaryKind) -> String {
    match kind {
        AdversaryKind::MeasureInChannel { basis } => format!("measure-in-channel basis={basis:?}"),
        AdversaryKind::PhaseTamper { angle } => format!("phase-tamper angle={angle}"),
        AdversaryKind::BitFlip => "bit-flip".into(),
        AdversaryKind::SwapWithFresh => "swap-with-fresh".into(),
    }
}
