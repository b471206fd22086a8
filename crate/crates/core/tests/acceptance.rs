//! End-to-end acceptance suite. Each numbered check prints exactly one
//! PASS/FAIL line; the test fails if any check fails.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines
//! on success as well.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qvote_core::{
    expand_ccu, expand_multi_controlled_z, gates, AdversaryAction, AdversaryKind, Basis, Choice,
    ControlSpec, Direction, DistributedSim, Election, ElectionConfig, Error, GateOp, GateSequence,
    Phase, StateVector, TallyMode, Verdict,
};

type CheckResult = Result<(), String>;

fn classical_counts(choices: &[Choice], num_candidates: usize) -> (Vec<usize>, usize) {
    let mut counts = vec![0usize; num_candidates];
    for c in choices {
        if let Choice::Candidate(k) = c {
            counts[*k] += 1;
        }
    }
    let v = counts.iter().sum();
    (counts, v)
}

/// All length-n choice vectors over {candidate 0..K-1, abstain}.
fn enumerate_choices(num_voters: usize, num_candidates: usize) -> Vec<Vec<Choice>> {
    let options = num_candidates + 1;
    let total = options.pow(num_voters as u32);
    let mut all = Vec::with_capacity(total);
    for mut code in 0..total {
        let mut choices = Vec::with_capacity(num_voters);
        for _ in 0..num_voters {
            let d = code % options;
            code /= options;
            choices.push(if d == num_candidates {
                Choice::Abstain
            } else {
                Choice::Candidate(d)
            });
        }
        all.push(choices);
    }
    all
}

fn check_golden(
    config: ElectionConfig,
    expected_probs: &[f64],
    expected_counts: &[usize],
) -> CheckResult {
    let election = Election::run(config).map_err(|e| e.to_string())?;
    let tally = election.tally_exact().map_err(|e| e.to_string())?;
    for (k, (&got, &want)) in tally.probabilities.iter().zip(expected_probs).enumerate() {
        if (got - want).abs() > 1e-12 {
            return Err(format!("candidate {k}: probability {got} != {want}"));
        }
    }
    if tally.counts != expected_counts {
        return Err(format!("counts {:?} != {:?}", tally.counts, expected_counts));
    }
    Ok(())
}

fn criterion_1() -> CheckResult {
    check_golden(qvote_core::example_one_config(), &[0.5, 0.5], &[2, 2])
}

fn criterion_2() -> CheckResult {
    check_golden(
        qvote_core::example_two_config(),
        &[0.375, 0.375, 0.25],
        &[3, 3, 2],
    )
}

/// Criteria 3 and 4 share the exhaustive N=6 enumeration; returns
/// (oracle_result, postselect_result).
fn criteria_3_and_4() -> (CheckResult, CheckResult) {
    let mut oracle: CheckResult = Ok(());
    let mut law: CheckResult = Ok(());
    let num_voters = 6;
    for num_candidates in [2usize, 3] {
        for choices in enumerate_choices(num_voters, num_candidates) {
            let config = match ElectionConfig::new(num_voters, num_candidates, choices.clone()) {
                Ok(c) => c,
                Err(e) => {
                    oracle = Err(format!("config rejected: {e}"));
                    continue;
                }
            };
            let k_eff = config.k_eff() as f64;
            let election = match Election::run(config) {
                Ok(e) => e,
                Err(e) => {
                    oracle = Err(format!("run failed: {e}"));
                    continue;
                }
            };
            let (expected, v) = classical_counts(&choices, num_candidates);
            match election.tally_exact() {
                Err(Error::NoVotesCast) if v == 0 => {
                    // post-selection law still holds trivially: weight 0
                    continue;
                }
                Err(e) => {
                    oracle = Err(format!("tally failed for {choices:?}: {e}"));
                    continue;
                }
                Ok(tally) => {
                    for (k, &p) in tally.probabilities.iter().enumerate() {
                        let want = expected[k] as f64 / v as f64;
                        if (p - want).abs() > 1e-10 && oracle.is_ok() {
                            oracle = Err(format!(
                                "{choices:?} candidate {k}: {p} != {want}"
                            ));
                        }
                    }
                    let want_p = v as f64 / (num_voters as f64 * k_eff);
                    if (tally.post_selection_probability - want_p).abs() > 1e-10 && law.is_ok() {
                        law = Err(format!(
                            "{choices:?}: post-selection {} != {want_p}",
                            tally.post_selection_probability
                        ));
                    }
                }
            }
        }
    }
    (oracle, law)
}

fn criterion_5() -> CheckResult {
    // (a) expand_ccu(Z) composes to CCZ = diag(1,...,1,-1)
    let seq = expand_ccu(&gates::pauli_z(), 0, 1, 2).map_err(|e| e.to_string())?;
    let mat = seq.compose_matrix().map_err(|e| e.to_string())?;
    for r in 0..8 {
        for c in 0..8 {
            let want = if r != c {
                0.0
            } else if r == 7 {
                -1.0
            } else {
                1.0
            };
            if (mat[r][c] - Complex64::new(want, 0.0)).norm() > 1e-8 {
                return Err(format!("CCU(Z) matrix entry ({r},{c}) = {}", mat[r][c]));
            }
        }
    }

    // (b) CCX -> CCZ -> CCX round-trips to the original op list
    let mut seq = GateSequence::new(3);
    seq.push(GateOp::single(gates::hadamard(), 0, "H"));
    seq.push(GateOp::controlled(gates::pauli_x(), vec![(0, 1), (1, 1)], 2, "CCX"));
    seq.push(GateOp::single(gates::hadamard(), 1, "H"));
    let original = seq.clone();
    seq.ccx_to_ccz(1).map_err(|e| e.to_string())?;
    seq.ccz_to_ccx(2).map_err(|e| e.to_string())?;
    if seq.dump() != original.dump() {
        return Err("rewrite round-trip did not restore the sequence".into());
    }

    // (c) expand_multi_controlled_z vs direct application, c in [1, 12]
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for c in 1..=12usize {
        let controls: Vec<(usize, u8)> = (0..c).map(|q| (q, (q % 2 == 0) as u8)).collect();
        let target = c;
        let ancillas: Vec<usize> = (c + 1..2 * c).collect();
        let seq = expand_multi_controlled_z(&controls, target, &ancillas)
            .map_err(|e| e.to_string())?;
        let data_qubits = c + 1;
        let total_qubits = (2 * c).max(c + 1);
        let anc_width = total_qubits - data_qubits;
        for trial in 0..20 {
            // random data state embedded with clean ancillas in the low bits
            let dim = 1usize << data_qubits;
            let mut amps = vec![Complex64::new(0.0, 0.0); 1 << total_qubits];
            for d in 0..dim {
                amps[d << anc_width] =
                    Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
            }
            let state = StateVector::set_amplitudes(amps).map_err(|e| e.to_string())?;
            let mut via_seq = state.clone();
            seq.apply_to(&mut via_seq).map_err(|e| e.to_string())?;
            let mut direct = state;
            direct
                .apply_controlled(&ControlSpec::new(controls.clone(), target), &gates::pauli_z())
                .map_err(|e| e.to_string())?;
            for i in 0..(1usize << total_qubits) {
                if (via_seq.amplitude(i) - direct.amplitude(i)).norm() > 1e-10 {
                    return Err(format!(
                        "c={c} trial={trial}: expansion deviates at index {i}"
                    ));
                }
            }
        }
    }
    Ok(())
}

fn criterion_6() -> CheckResult {
    // totals for full all-voters-vote circuits at K=2; the emission rule is
    // affine in the two-dimensional basis {N*n, N}
    let mut points = Vec::new();
    for num_voters in [4usize, 8, 16, 32] {
        let choices = vec![Choice::Candidate(0); num_voters];
        let config = ElectionConfig::new(num_voters, 2, choices).map_err(|e| e.to_string())?;
        let n = config.id_qubits();
        let election = Election::run(config).map_err(|e| e.to_string())?;
        let count = election.gate_counts().total();
        points.push((num_voters * n, num_voters, count));
    }
    // solve count = a*(N*n) + b*N from the first two points, integer-exact
    let (x1, n1, y1) = points[0];
    let (x2, n2, y2) = points[1];
    let det = (x1 * n2) as i64 - (x2 * n1) as i64;
    if det == 0 {
        return Err("degenerate fit system".into());
    }
    let a_num = (y1 * n2) as i64 - (y2 * n1) as i64;
    let b_num = (x1 * y2) as i64 - (x2 * y1) as i64;
    if a_num % det != 0 || b_num % det != 0 {
        return Err(format!("fit coefficients not integral: {a_num}/{det}, {b_num}/{det}"));
    }
    let a = a_num / det;
    let b = b_num / det;
    for &(x, n, y) in &points {
        let fit = a * x as i64 + b * n as i64;
        if fit != y as i64 {
            return Err(format!(
                "residual at N*n={x}: emitted {y}, fit {fit} (a={a}, b={b})"
            ));
        }
    }
    // doubling N never grows the count faster than N*n grows
    for w in points.windows(2) {
        let (x1, _, y1) = w[0];
        let (x2, _, y2) = w[1];
        if (y2 as f64) / (y1 as f64) > (x2 as f64) / (x1 as f64) + 1e-12 {
            return Err(format!(
                "super-linear growth: counts {y1} -> {y2} vs N*n {x1} -> {x2}"
            ));
        }
    }
    Ok(())
}

fn criterion_7() -> CheckResult {
    let shots = 100_000usize;
    let runs = 100usize;
    for (name, config) in [
        ("example-1", qvote_core::example_one_config()),
        ("example-2", qvote_core::example_two_config()),
    ] {
        let election = Election::run(config).map_err(|e| e.to_string())?;
        let exact = election.tally_exact().map_err(|e| e.to_string())?;
        let mut in_band = 0usize;
        for run in 0..runs {
            let tally = election
                .tally_sampled(shots, 0xACC0 + run as u64)
                .map_err(|e| e.to_string())?;
            let accepted = tally.accepted_shots.unwrap() as f64;
            let ok = exact
                .probabilities
                .iter()
                .zip(&tally.probabilities)
                .all(|(&p, &f)| {
                    let sigma = (p * (1.0 - p) / accepted).sqrt();
                    (f - p).abs() <= 3.0 * sigma
                });
            if ok {
                in_band += 1;
            }
        }
        if in_band < 99 {
            return Err(format!("{name}: only {in_band}/{runs} runs inside 3-sigma bands"));
        }
    }
    Ok(())
}

/// Criteria 8 and 10 share the exhaustive distributed enumeration.
fn criteria_8_and_10() -> (CheckResult, CheckResult) {
    let mut fidelity: CheckResult = Ok(());
    let mut double_vote: CheckResult = Ok(());
    for num_voters in 1..=4usize {
        for choices in enumerate_choices(num_voters, 2) {
            let config = match ElectionConfig::new(num_voters, 2, choices.clone()) {
                Ok(c) => c,
                Err(e) => {
                    fidelity = Err(format!("config rejected: {e}"));
                    continue;
                }
            };
            let mut sim = match DistributedSim::setup(&config, 1) {
                Ok(s) => s,
                Err(e) => {
                    fidelity = Err(format!("setup failed: {e}"));
                    continue;
                }
            };
            if let Err(e) = sim.run_all_rounds() {
                fidelity = Err(format!("rounds failed: {e}"));
                continue;
            }

            // criterion 10: a second round for every voter is rejected with
            // zero gates applied, trace-verified
            for voter in 0..num_voters {
                let gates_before = sim.gates_applied(voter);
                let trace_before = sim.trace().len();
                match sim.voting_round(voter, Choice::Candidate(0)) {
                    Err(Error::DoubleVote(j)) if j == voter => {}
                    other => {
                        if double_vote.is_ok() {
                            double_vote =
                                Err(format!("voter {voter}: second round gave {other:?}"));
                        }
                        continue;
                    }
                }
                let new_events = &sim.trace()[trace_before..];
                let gate_events = new_events
                    .iter()
                    .filter(|e| format!("{}", e.action) == "apply-gate")
                    .count();
                if (sim.gates_applied(voter) != gates_before || gate_events != 0)
                    && double_vote.is_ok()
                {
                    double_vote = Err(format!("voter {voter}: gates applied after rejection"));
                }
            }

            let tally = match sim.distributed_tally(TallyMode::Exact) {
                Ok(t) => t,
                Err(e) => {
                    fidelity = Err(format!("tally failed for {choices:?}: {e}"));
                    continue;
                }
            };
            let (expected, _) = classical_counts(&choices, 2);
            if tally.counts != expected && fidelity.is_ok() {
                fidelity = Err(format!(
                    "{choices:?}: counts {:?} != {:?}",
                    tally.counts, expected
                ));
            }
        }
    }
    (fidelity, double_vote)
}

fn criterion_9() -> CheckResult {
    let trials = 1000usize;
    let rounds = 200usize;
    let threshold = 0.5;
    let mut tampered_detected = 0usize;
    let mut clean_passed = 0usize;
    for trial in 0..trials {
        let mut config = ElectionConfig::new(1, 2, vec![Choice::Abstain]).unwrap();
        config.seed = trial as u64;

        let mut tampered = DistributedSim::setup(&config, 1).map_err(|e| e.to_string())?;
        tampered
            .inject_adversary(AdversaryAction {
                voter: 0,
                direction: Direction::ToVoter,
                phase: Phase::Verification,
                kind: AdversaryKind::MeasureInChannel { basis: Basis::Z },
            })
            .map_err(|e| e.to_string())?;
        let result = tampered
            .verify_entanglement(0, rounds, threshold)
            .map_err(|e| e.to_string())?;
        if result.verdict == Verdict::Disturbed {
            tampered_detected += 1;
        }

        let mut clean = DistributedSim::setup(&config, 1).map_err(|e| e.to_string())?;
        let result = clean
            .verify_entanglement(0, rounds, threshold)
            .map_err(|e| e.to_string())?;
        if result.verdict == Verdict::Intact {
            clean_passed += 1;
        }
    }
    if tampered_detected < 999 {
        return Err(format!("tampered channel detected in only {tampered_detected}/{trials}"));
    }
    if clean_passed < 999 {
        return Err(format!("clean channel passed in only {clean_passed}/{trials}"));
    }
    Ok(())
}

#[test]
fn acceptance() {
    let (c3, c4) = criteria_3_and_4();
    let (c8, c10) = criteria_8_and_10();
    let checks: Vec<(&str, CheckResult)> = vec![
        ("01 golden-example-1 (N=4 K=2 exact tally)", criterion_1()),
        ("02 golden-example-2 (N=8 K=3 exact tally)", criterion_2()),
        ("03 brute-force-oracle (N=6, all choice vectors, K in {2,3})", c3),
        ("04 post-selection-law (P(control=1) = V/(N*K_eff))", c4),
        ("05 decomposition-correctness (CCU, rewrites, multi-controlled Z)", criterion_5()),
        ("06 linear-gate-scaling (exact affine fit over {N*n, N})", criterion_6()),
        ("07 sampled-tally-convergence (100 runs x 1e5 shots, 3-sigma)", criterion_7()),
        ("08 distributed-fidelity (all choice vectors, N <= 4, K=2)", c8),
        ("09 tamper-detection (200-round verification, 1000 trials)", criterion_9()),
        ("10 double-vote-prevention (trace-verified rejection)", c10),
    ];
    let mut failures = Vec::new();
    for (name, result) in &checks {
        match result {
            Ok(()) => println!("acceptance {name}: PASS"),
            Err(why) => {
                println!("acceptance {name}: FAIL — {why}");
                failures.push(*name);
            }
        }
    }
    assert!(failures.is_empty(), "failed criteria: {failures:?}");
}
