//! Single-machine election: ID-register superposition, phase-flip vote
//! casting, and tallying by control-qubit post-selection.
//!
//! Register layout is [ID (n qubits)] [control (1 qubit)] [candidate
//! (m qubits)], with qubit 0 the most significant index bit, so dumped kets
//! read in the same left-to-right order the registers are listed in.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::compiler::{expand_multi_controlled_z, GateCounts, GateSequence};
use crate::error::{Error, Result};
use crate::gates;
use crate::state::{bitstring, ControlSpec, StateVector, MAX_QUBITS, POSTSELECT_EPS};

/// How the candidate register is prepared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CandidateStateKind {
    /// (|00> + |11>)/sqrt2; two candidates.
    BellPair,
    /// (|00> + |01> + |10>)/sqrt3; three candidates.
    WState,
    /// Uniform superposition over the first K basis states of ceil(log2 K)
    /// qubits; arbitrary K.
    UniformBasis,
}

/// A single voter's ballot choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Choice {
    Candidate(usize),
    Abstain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElectionConfig {
    pub num_voters: usize,
    pub num_candidates: usize,
    pub candidate_state: CandidateStateKind,
    pub choices: Vec<Choice>,
    pub shots: usize,
    pub seed: u64,
}

impl ElectionConfig {
    /// Exact-mode config with the default candidate state for K.
    pub fn new(num_voters: usize, num_candidates: usize, choices: Vec<Choice>) -> Result<Self> {
        let candidate_state = default_candidate_state(num_candidates)?;
        let config = Self {
            num_voters,
            num_candidates,
            candidate_state,
            choices,
            shots: 0,
            seed: 0,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_voters < 1 {
            return Err(Error::Config("need at least one voter".into()));
        }
        if self.num_candidates < 2 {
            return Err(Error::Config("need at least two candidates".into()));
        }
        match self.candidate_state {
            CandidateStateKind::BellPair if self.num_candidates != 2 => {
                return Err(Error::Config(format!(
                    "bell-pair candidate state requires 2 candidates, got {}",
                    self.num_candidates
                )));
            }
            CandidateStateKind::WState if self.num_candidates != 3 => {
                return Err(Error::Config(format!(
                    "w-state candidate state requires 3 candidates, got {}",
                    self.num_candidates
                )));
            }
            _ => {}
        }
        if self.choices.len() != self.num_voters {
            return Err(Error::Config(format!(
                "{} choices for {} voters",
                self.choices.len(),
                self.num_voters
            )));
        }
        for (j, choice) in self.choices.iter().enumerate() {
            if let Choice::Candidate(k) = choice {
                if *k >= self.num_candidates {
                    return Err(Error::Config(format!(
                        "voter {j} chose candidate {k}, only {} candidates",
                        self.num_candidates
                    )));
                }
            }
        }
        Ok(())
    }

    /// ID register width; a single voter still gets one qubit.
    pub fn id_qubits(&self) -> usize {
        id_qubits_for(self.num_voters)
    }

    /// Candidate register width.
    pub fn candidate_qubits(&self) -> usize {
        match self.candidate_state {
            CandidateStateKind::BellPair | CandidateStateKind::WState => 2,
            CandidateStateKind::UniformBasis => {
                (usize::BITS - (self.num_candidates - 1).leading_zeros()) as usize
            }
        }
    }

    pub fn total_qubits(&self) -> usize {
        self.id_qubits() + 1 + self.candidate_qubits()
    }

    /// Number of equal-amplitude basis states in the candidate state; sets
    /// the post-selection success probability V/(N * k_eff).
    pub fn k_eff(&self) -> usize {
        match self.candidate_state {
            CandidateStateKind::BellPair => 2,
            CandidateStateKind::WState => 3,
            CandidateStateKind::UniformBasis => self.num_candidates,
        }
    }

    /// Number of non-abstaining voters.
    pub fn participating_votes(&self) -> usize {
        self.choices
            .iter()
            .filter(|c| matches!(c, Choice::Candidate(_)))
            .count()
    }
}

pub fn default_candidate_state(num_candidates: usize) -> Result<CandidateStateKind> {
    match num_candidates {
        0 | 1 => Err(Error::Config("need at least two candidates".into())),
        2 => Ok(CandidateStateKind::BellPair),
        3 => Ok(CandidateStateKind::WState),
        _ => Ok(CandidateStateKind::UniformBasis),
    }
}

fn id_qubits_for(num_voters: usize) -> usize {
    if num_voters <= 2 {
        1
    } else {
        (usize::BITS - (num_voters - 1).leading_zeros()) as usize
    }
}

/// Maps each candidate to the candidate-register basis bitstring whose phase
/// a vote for that candidate flips.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateBasisMap {
    /// Entry k is the m-bit pattern (as an integer) for candidate k.
    pub patterns: Vec<usize>,
    pub register_width: usize,
}

impl CandidateBasisMap {
    pub fn for_kind(kind: CandidateStateKind, num_candidates: usize) -> Self {
        match kind {
            // vote-for-0 flips |11>, vote-for-1 flips |00>: the difference
            // sector then reads |00> as a candidate-1 count and |11> as a
            // candidate-0 count
            CandidateStateKind::BellPair => Self { patterns: vec![0b11, 0b00], register_width: 2 },
            CandidateStateKind::WState => Self { patterns: vec![0b00, 0b01, 0b10], register_width: 2 },
            CandidateStateKind::UniformBasis => {
                let width = (usize::BITS - (num_candidates - 1).leading_zeros()) as usize;
                Self { patterns: (0..num_candidates).collect(), register_width: width }
            }
        }
    }

    /// Candidate index for a measured candidate-register pattern.
    pub fn candidate_for(&self, pattern: usize) -> Option<usize> {
        self.patterns.iter().position(|&p| p == pattern)
    }
}

/// Shot-mode statistics for one candidate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShotStats {
    pub hits: usize,
    pub frequency: f64,
    pub standard_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TallyMode {
    Exact,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TallyResult {
    pub mode: TallyMode,
    pub post_selection_probability: f64,
    /// Entry k is the conditional probability of candidate k given the
    /// difference sector.
    pub probabilities: Vec<f64>,
    /// Entry k is probability * V rounded half-to-even.
    pub counts: Vec<usize>,
    /// Non-abstaining voters.
    pub participating_votes: usize,
    /// Norm of the unnormalized difference branch; squares to the
    /// post-selection probability.
    pub normalization: f64,
    /// True when any probability * V sat exactly on a .5 rounding boundary.
    pub rounding_ambiguous: bool,
    /// Sampled mode only.
    pub shot_stats: Option<Vec<ShotStats>>,
    pub accepted_shots: Option<usize>,
    pub total_shots: Option<usize>,
}

/// A running election: the evolving state plus the participation ledger and
/// the gate sequence emitted for complexity accounting.
#[derive(Debug, Clone)]
pub struct Election {
    config: ElectionConfig,
    state: StateVector,
    basis_map: CandidateBasisMap,
    voted: Vec<bool>,
    sequence: GateSequence,
}

/// Uniform superposition over the first N basis states of the ID register.
pub fn prepare_id_register(num_voters: usize) -> Result<StateVector> {
    if num_voters < 1 {
        return Err(Error::Config("need at least one voter".into()));
    }
    let n = id_qubits_for(num_voters);
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
    let a = Complex64::new(1.0 / (num_voters as f64).sqrt(), 0.0);
    for amp in amps.iter_mut().take(num_voters) {
        *amp = a;
    }
    StateVector::set_amplitudes(amps)
}

/// Normalized candidate register for the given kind.
pub fn prepare_candidate_state(kind: CandidateStateKind, num_candidates: usize) -> Result<StateVector> {
    match kind {
        CandidateStateKind::BellPair => {
            if num_candidates != 2 {
                return Err(Error::Config("bell-pair requires 2 candidates".into()));
            }
            StateVector::set_amplitudes(vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
            ])
        }
        CandidateStateKind::WState => {
            if num_candidates != 3 {
                return Err(Error::Config("w-state requires 3 candidates".into()));
            }
            StateVector::set_amplitudes(vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
            ])
        }
        CandidateStateKind::UniformBasis => {
            if num_candidates < 2 {
                return Err(Error::Config("need at least two candidates".into()));
            }
            let width = (usize::BITS - (num_candidates - 1).leading_zeros()) as usize;
            let mut amps = vec![Complex64::new(0.0, 0.0); 1 << width];
            for amp in amps.iter_mut().take(num_candidates) {
                *amp = Complex64::new(1.0, 0.0);
            }
            StateVector::set_amplitudes(amps)
        }
    }
}

/// [IDs] (x) |+> (x) |psi_cands| as one product state.
pub fn prepare_initial(config: &ElectionConfig) -> Result<StateVector> {
    config.validate()?;
    let total = config.total_qubits();
    if total > MAX_QUBITS {
        return Err(Error::Capacity { requested: total, max: MAX_QUBITS });
    }
    let ids = prepare_id_register(config.num_voters)?;
    let cands = prepare_candidate_state(config.candidate_state, config.num_candidates)?;
    let m = config.candidate_qubits();
    let plus = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);

    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << total];
    for (idx, amp) in amps.iter_mut().enumerate() {
        let id_part = idx >> (m + 1);
        let cand_part = idx & ((1 << m) - 1);
        *amp = ids.amplitude(id_part) * plus * cands.amplitude(cand_part);
    }
    StateVector::set_amplitudes(amps)
}

impl Election {
    /// Prepares the initial state without casting any votes.
    pub fn new(config: ElectionConfig) -> Result<Self> {
        let state = prepare_initial(&config)?;
        let basis_map = CandidateBasisMap::for_kind(config.candidate_state, config.num_candidates);
        let voted = vec![false; config.num_voters];
        // ancillas for the emitted decomposition live above the election
        // register; they are bookkeeping only and never simulated
        let num_controls = config.id_qubits() + 1 + config.candidate_qubits() - 1;
        let sequence = GateSequence::new(config.total_qubits() + num_controls.saturating_sub(1));
        Ok(Self { config, state, basis_map, voted, sequence })
    }

    /// Prepares the state and casts every configured vote in ID order.
    pub fn run(config: ElectionConfig) -> Result<Self> {
        let choices = config.choices.clone();
        let mut election = Self::new(config)?;
        for (j, choice) in choices.iter().enumerate() {
            election.cast_vote(j, *choice)?;
        }
        Ok(election)
    }

    pub fn config(&self) -> &ElectionConfig {
        &self.config
    }

    pub fn state(&self) -> &StateVector {
        &self.state
    }

    pub fn basis_map(&self) -> &CandidateBasisMap {
        &self.basis_map
    }

    /// Gate sequence emitted so far (decomposed form, for counting/dumps).
    pub fn sequence(&self) -> &GateSequence {
        &self.sequence
    }

    pub fn gate_counts(&self) -> GateCounts {
        self.sequence.gate_count_report()
    }

    fn control_qubit(&self) -> usize {
        self.config.id_qubits()
    }

    /// The full control pattern and Z target realizing voter j's phase flip.
    fn vote_pattern(&self, voter: usize, candidate: usize) -> (Vec<(usize, u8)>, usize) {
        let n = self.config.id_qubits();
        let m = self.config.candidate_qubits();
        let pattern = self.basis_map.patterns[candidate];
        let mut controls = Vec::with_capacity(n + m);
        for q in 0..n {
            let bit = ((voter >> (n - 1 - q)) & 1) as u8;
            controls.push((q, bit));
        }
        controls.push((self.control_qubit(), 1));
        let cand_base = n + 1;
        // pick one 1-bit of the candidate pattern as the Z target; when the
        // pattern is all zeros the control qubit (always required 1) serves
        let mut target = None;
        for q in 0..m {
            let bit = ((pattern >> (m - 1 - q)) & 1) as u8;
            if bit == 1 && target.is_none() {
                target = Some(cand_base + q);
            } else {
                controls.push((cand_base + q, bit));
            }
        }
        match target {
            Some(t) => (controls, t),
            None => {
                // move the control qubit from controls to target
                let pos = controls
                    .iter()
                    .position(|&(q, _)| q == self.control_qubit())
                    .unwrap();
                controls.remove(pos);
                (controls, self.control_qubit())
            }
        }
    }

    /// Applies voter j's phase flip (or nothing for an abstention) and logs
    /// the decomposed gate sequence.
    pub fn cast_vote(&mut self, voter: usize, choice: Choice) -> Result<()> {
        if voter >= self.config.num_voters {
            return Err(Error::Config(format!(
                "voter {voter} out of range for {} voters",
                self.config.num_voters
            )));
        }
        if self.voted[voter] {
            return Err(Error::DoubleVote(voter));
        }
        self.voted[voter] = true;
        let candidate = match choice {
            Choice::Abstain => return Ok(()),
            Choice::Candidate(k) => {
                if k >= self.config.num_candidates {
                    return Err(Error::Config(format!("candidate {k} out of range")));
                }
                k
            }
        };
        let (controls, target) = self.vote_pattern(voter, candidate);
        self.state
            .apply_controlled(&ControlSpec::new(controls.clone(), target), &gates::pauli_z())?;
        let ancillas: Vec<usize> =
            (self.config.total_qubits()..self.sequence.num_qubits).collect();
        let expansion = expand_multi_controlled_z(&controls, target, &ancillas)?;
        self.sequence.extend(expansion);
        Ok(())
    }

    /// Hadamard on the control qubit, post-select the difference sector, and
    /// read the candidate marginal.
    pub fn tally_exact(&self) -> Result<TallyResult> {
        let config = &self.config;
        let mut state = self.state.clone();
        state.apply_single(&gates::hadamard(), self.control_qubit())?;
        let p = match state.postselect(self.control_qubit(), 1) {
            Ok(p) => p,
            Err(Error::ImpossibleOutcome { .. }) => return Err(Error::NoVotesCast),
            Err(e) => return Err(e),
        };
        let n = config.id_qubits();
        let m = config.candidate_qubits();
        let cand_qubits: Vec<usize> = (n + 1..n + 1 + m).collect();
        let marginal = state.marginal_distribution(&cand_qubits)?;
        let v = config.participating_votes();
        let mut probabilities = vec![0.0; config.num_candidates];
        for (pattern, prob) in marginal.iter().enumerate() {
            if *prob > POSTSELECT_EPS {
                match self.basis_map.candidate_for(pattern) {
                    Some(k) => probabilities[k] += prob,
                    None => {
                        return Err(Error::Config(format!(
                            "difference sector populated unmapped pattern {}",
                            bitstring(pattern, m)
                        )))
                    }
                }
            }
        }
        let (counts, ambiguous) = round_counts(&probabilities, v);
        Ok(TallyResult {
            mode: TallyMode::Exact,
            post_selection_probability: p,
            probabilities,
            counts,
            participating_votes: v,
            normalization: p.sqrt(),
            rounding_ambiguous: ambiguous,
            shot_stats: None,
            accepted_shots: None,
            total_shots: None,
        })
    }

    /// Repeated single-shot tallies: Hadamard the control, measure it, and
    /// when it lands in the difference sector measure the candidate register.
    /// Each shot runs on a fresh copy with a seed derived as seed + index.
    pub fn tally_sampled(&self, shots: usize, seed: u64) -> Result<TallyResult> {
        if shots == 0 {
            return Err(Error::InsufficientSamples(0));
        }
        let config = &self.config;
        let n = config.id_qubits();
        let m = config.candidate_qubits();
        let cand_qubits: Vec<usize> = (n + 1..n + 1 + m).collect();

        let mut post_h = self.state.clone();
        post_h.apply_single(&gates::hadamard(), self.control_qubit())?;

        let mut hits = vec![0usize; config.num_candidates];
        let mut accepted = 0usize;
        let mut control_ones = 0usize;
        for shot in 0..shots {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(shot as u64));
            let mut state = post_h.clone();
            let rec = state.measure_qubit(self.control_qubit(), &mut rng)?;
            if rec.outcome != 1 {
                continue;
            }
            control_ones += 1;
            let mut pattern = 0usize;
            for &q in &cand_qubits {
                let bit = state.measure_qubit(q, &mut rng)?.outcome;
                pattern = (pattern << 1) | bit as usize;
            }
            if let Some(k) = self.basis_map.candidate_for(pattern) {
                hits[k] += 1;
                accepted += 1;
            }
        }
        if accepted == 0 {
            return Err(Error::InsufficientSamples(shots));
        }
        let v = config.participating_votes();
        let probabilities: Vec<f64> =
            hits.iter().map(|&h| h as f64 / accepted as f64).collect();
        let stats: Vec<ShotStats> = hits
            .iter()
            .zip(&probabilities)
            .map(|(&h, &f)| ShotStats {
                hits: h,
                frequency: f,
                standard_error: (f * (1.0 - f) / accepted as f64).sqrt(),
            })
            .collect();
        let (counts, ambiguous) = round_counts(&probabilities, v);
        let post_p = control_ones as f64 / shots as f64;
        Ok(TallyResult {
            mode: TallyMode::Sampled,
            post_selection_probability: post_p,
            probabilities,
            counts,
            participating_votes: v,
            normalization: post_p.sqrt(),
            rounding_ambiguous: ambiguous,
            shot_stats: Some(stats),
            accepted_shots: Some(accepted),
            total_shots: Some(shots),
        })
    }
}

/// probability * V per candidate, rounded half-to-even; flags any exact .5.
fn round_counts(probabilities: &[f64], v: usize) -> (Vec<usize>, bool) {
    let mut ambiguous = false;
    let counts = probabilities
        .iter()
        .map(|p| {
            let raw = p * v as f64;
            let frac = raw - raw.floor();
            if (frac - 0.5).abs() < 1e-9 {
                ambiguous = true;
                // round half to even
                let floor = raw.floor() as usize;
                if floor % 2 == 0 {
                    floor
                } else {
                    floor + 1
                }
            } else {
                raw.round() as usize
            }
        })
        .collect();
    (counts, ambiguous)
}

/// The §5.1-style four-voter, two-candidate example configuration.
pub fn example_one_config() -> ElectionConfig {
    ElectionConfig::new(
        4,
        2,
        vec![
            Choice::Candidate(0),
            Choice::Candidate(1),
            Choice::Candidate(0),
            Choice::Candidate(1),
        ],
    )
    .unwrap()
}

/// The eight-voter, three-candidate example configuration.
pub fn example_two_config() -> ElectionConfig {
    // voters 000, 011, 101 -> candidate 0; 001, 100, 110 -> candidate 1;
    // 010, 111 -> candidate 2
    ElectionConfig::new(
        8,
        3,
        vec![
            Choice::Candidate(0),
            Choice::Candidate(1),
            Choice::Candidate(2),
            Choice::Candidate(0),
            Choice::Candidate(1),
            Choice::Candidate(0),
            Choice::Candidate(1),
            Choice::Candidate(2),
        ],
    )
    .unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn id_register_examples() {
        let s = prepare_id_register(4).unwrap();
        for i in 0..4 {
            assert!((s.amplitude(i).re - 0.5).abs() < 1e-15);
        }

        let s = prepare_id_register(1).unwrap();
        assert_eq!(s.num_qubits(), 1);
        assert!((s.amplitude(0).re - 1.0).abs() < 1e-15);

        let s = prepare_id_register(3).unwrap();
        let a = 1.0 / 3.0_f64.sqrt();
        for i in 0..3 {
            assert!((s.amplitude(i).re - a).abs() < 1e-15);
        }
        assert_eq!(s.amplitude(3).norm(), 0.0);
        assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn candidate_state_examples() {
        let bell = prepare_candidate_state(CandidateStateKind::BellPair, 2).unwrap();
        let r = 1.0 / 2.0_f64.sqrt();
        assert!((bell.amplitude(0).re - r).abs() < 1e-15);
        assert!((bell.amplitude(3).re - r).abs() < 1e-15);

        let w = prepare_candidate_state(CandidateStateKind::WState, 3).unwrap();
        let a = 1.0 / 3.0_f64.sqrt();
        for i in 0..3 {
            assert!((w.amplitude(i).re - a).abs() < 1e-15);
        }

        let u = prepare_candidate_state(CandidateStateKind::UniformBasis, 4).unwrap();
        for i in 0..4 {
            assert!((u.amplitude(i).re - 0.5).abs() < 1e-15);
        }

        assert!(prepare_candidate_state(CandidateStateKind::BellPair, 3).is_err());
    }

    #[test]
    fn initial_state_shapes() {
        // N=4 bell: 5-qubit state, amplitude 1/4 on {ID} x {0,1} x {00,11}
        let config = example_one_config();
        let s = prepare_initial(&config).unwrap();
        assert_eq!(s.num_qubits(), 5);
        let mut populated = 0;
        for idx in 0..32 {
            let a = s.amplitude(idx);
            if a.norm() > 1e-14 {
                populated += 1;
                assert!((a.re - 0.25).abs() < 1e-12);
            }
        }
        assert_eq!(populated, 16);

        // N=1 bell: 4 nonzero amplitudes of 1/2
        let config = ElectionConfig::new(1, 2, vec![Choice::Abstain]).unwrap();
        let s = prepare_initial(&config).unwrap();
        assert_eq!(s.num_qubits(), 4);
        let populated: usize = (0..16)
            .filter(|&i| s.amplitude(i).norm() > 1e-14)
            .inspect(|&i| assert!((s.amplitude(i).re - 0.5).abs() < 1e-12))
            .count();
        assert_eq!(populated, 4);

        // N=8 w-state: 6 qubits, 8 IDs x 2 control branches x 3 W-state
        // components = 48 nonzero amplitudes
        let config = example_two_config();
        let s = prepare_initial(&config).unwrap();
        assert_eq!(s.num_qubits(), 6);
        let populated = (0..64).filter(|&i| s.amplitude(i).norm() > 1e-14).count();
        assert_eq!(populated, 48);
    }

    #[test]
    fn cast_vote_flips_expected_branch() {
        // Example-1 voter 0 (ID 00, candidate 0): in the ID=00, control=1
        // branch the candidate component becomes |00> - |11>
        let config = example_one_config();
        let mut election = Election::new(config).unwrap();
        election.cast_vote(0, Choice::Candidate(0)).unwrap();
        let s = election.state();
        // index layout: [id1 id0][ctrl][c1 c0]; ID=00 ctrl=1 cands=00 -> 0b00100
        assert!(s.amplitude(0b00100).re > 0.0);
        // cands=11 -> 0b00111 got the sign flip
        assert!(s.amplitude(0b00111).re < 0.0);
        // control=0 sector untouched
        assert!(s.amplitude(0b00011).re > 0.0);
        // other IDs untouched
        assert!(s.amplitude(0b01111).re > 0.0);
    }

    #[test]
    fn abstain_is_identity() {
        let config = ElectionConfig::new(2, 2, vec![Choice::Abstain, Choice::Abstain]).unwrap();
        let before = prepare_initial(&config).unwrap();
        let election = Election::run(config).unwrap();
        assert_eq!(election.state(), &before);
    }

    #[test]
    fn double_vote_rejected() {
        let config = example_one_config();
        let mut election = Election::new(config).unwrap();
        election.cast_vote(0, Choice::Candidate(0)).unwrap();
        assert!(matches!(
            election.cast_vote(0, Choice::Candidate(1)),
            Err(Error::DoubleVote(0))
        ));
    }

    #[test]
    fn golden_example_one() {
        let election = Election::run(example_one_config()).unwrap();
        let tally = election.tally_exact().unwrap();
        assert!((tally.probabilities[0] - 0.5).abs() < 1e-12);
        assert!((tally.probabilities[1] - 0.5).abs() < 1e-12);
        assert_eq!(tally.counts, vec![2, 2]);
        assert!((tally.post_selection_probability - 0.5).abs() < 1e-12);
        assert_eq!(tally.participating_votes, 4);
    }

    #[test]
    fn golden_example_two() {
        let election = Election::run(example_two_config()).unwrap();
        let tally = election.tally_exact().unwrap();
        assert!((tally.probabilities[0] - 0.375).abs() < 1e-12);
        assert!((tally.probabilities[1] - 0.375).abs() < 1e-12);
        assert!((tally.probabilities[2] - 0.25).abs() < 1e-12);
        assert_eq!(tally.counts, vec![3, 3, 2]);
        assert!((tally.post_selection_probability - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn partial_participation() {
        // N=4, K=2, choices (0, 1, 0, abstain): {c0: 2/3, c1: 1/3}, V=3,
        // post-selection probability 3/8
        let config = ElectionConfig::new(
            4,
            2,
            vec![
                Choice::Candidate(0),
                Choice::Candidate(1),
                Choice::Candidate(0),
                Choice::Abstain,
            ],
        )
        .unwrap();
        let tally = Election::run(config).unwrap().tally_exact().unwrap();
        assert!((tally.probabilities[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((tally.probabilities[1] - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(tally.participating_votes, 3);
        assert!((tally.post_selection_probability - 3.0 / 8.0).abs() < 1e-12);
    }

    #[test]
    fn all_abstain_is_no_votes() {
        let config = ElectionConfig::new(2, 2, vec![Choice::Abstain, Choice::Abstain]).unwrap();
        let election = Election::run(config).unwrap();
        assert!(matches!(election.tally_exact(), Err(Error::NoVotesCast)));
    }

    #[test]
    fn order_independence() {
        let config = example_two_config();
        let forward = Election::run(config.clone()).unwrap();
        let mut reversed = Election::new(config.clone()).unwrap();
        for j in (0..config.num_voters).rev() {
            reversed.cast_vote(j, config.choices[j]).unwrap();
        }
        for i in 0..64 {
            assert!(
                (forward.state().amplitude(i) - reversed.state().amplitude(i)).norm() < 1e-12
            );
        }
    }

    #[test]
    fn normalization_matches_postselection() {
        let tally = Election::run(example_one_config()).unwrap().tally_exact().unwrap();
        assert!(
            (tally.normalization * tally.normalization - tally.post_selection_probability).abs()
                < 1e-10
        );
    }

    #[test]
    fn sampled_examples_within_three_sigma() {
        let shots = 100_000;
        for (config, expect) in [
            (example_one_config(), vec![0.5, 0.5]),
            (example_two_config(), vec![0.375, 0.375, 0.25]),
        ] {
            let election = Election::run(config).unwrap();
            let tally = election.tally_sampled(shots, 1234).unwrap();
            let accepted = tally.accepted_shots.unwrap();
            for (freq, p) in tally.probabilities.iter().zip(&expect) {
                let sigma = (p * (1.0 - p) / accepted as f64).sqrt();
                assert!((freq - p).abs() < 3.0 * sigma, "freq {freq} vs {p}");
            }
        }
    }

    #[test]
    fn single_shot_deterministic() {
        let election = Election::run(example_one_config()).unwrap();
        let a = election.tally_sampled(1, 7);
        let b = election.tally_sampled(1, 7);
        match (a, b) {
            (Ok(x), Ok(y)) => assert_eq!(x, y),
            (Err(Error::InsufficientSamples(_)), Err(Error::InsufficientSamples(_))) => {}
            other => panic!("non-deterministic single shot: {other:?}"),
        }
    }

    #[test]
    fn config_validation() {
        assert!(ElectionConfig::new(0, 2, vec![]).is_err());
        assert!(ElectionConfig::new(1, 1, vec![Choice::Abstain]).is_err());
        assert!(ElectionConfig::new(2, 2, vec![Choice::Abstain]).is_err());
        assert!(ElectionConfig::new(1, 2, vec![Choice::Candidate(2)]).is_err());
        let mut config = example_one_config();
        config.candidate_state = CandidateStateKind::WState;
        assert!(config.validate().is_err());
    }

    #[test]
    fn emitted_sequence_matches_direct_evolution() {
        // evolve prepare_initial through the decomposed sequence (with
        // ancillas appended) and compare against the directly-applied state
        let config = example_one_config();
        let election = Election::run(config.clone()).unwrap();
        let seq = election.sequence();
        let init = prepare_initial(&config).unwrap();
        let extra = seq.num_qubits - init.num_qubits();
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << seq.num_qubits];
        for (i, a) in init.amplitudes().iter().enumerate() {
            amps[i << extra] = *a;
        }
        let mut expanded = StateVector::set_amplitudes(amps).unwrap();
        seq.apply_to(&mut expanded).unwrap();
        for i in 0..1 << seq.num_qubits {
            let expect = if i & ((1 << extra) - 1) == 0 {
                election.state().amplitude(i >> extra)
            } else {
                Complex64::new(0.0, 0.0)
            };
            assert!((expanded.amplitude(i) - expect).norm() < 1e-10);
        }
    }
}
