//! Phase-flip quantum voting: a dense state-vector simulator, a
//! multi-controlled gate compiler, and centralized plus distributed
//! election protocols built on top of them.
//!
//! Votes are cast as multi-controlled Z gates that flip the sign of one
//! basis component per voter; a Hadamard on the shared control qubit then
//! routes all flipped components into the `control = 1` sector, where the
//! candidate-register marginal carries the tally.

pub mod centralized;
pub mod compiler;
pub mod distributed;
pub mod error;
pub mod gates;
pub mod state;

pub use centralized::{
    default_candidate_state, example_one_config, example_two_config, CandidateBasisMap,
    CandidateStateKind, Choice, Election, ElectionConfig, ShotStats, TallyMode, TallyResult,
};
pub use compiler::{
    abc_decompose, expand_ccu, expand_multi_controlled_z, verify_abc, AbcFactors, GateCounts,
    GateOp, GateSequence,
};
pub use distributed::{
    AdversaryAction, AdversaryKind, Ballot, Basis, Direction, DistributedSim, DistributedTally,
    Owner, Phase, ProtocolEvent, QubitHandle, Verdict, VerificationResult,
};
pub use error::{Error, Result};
pub use gates::SingleQubitUnitary;
pub use state::{ControlSpec, MeasurementRecord, StateVector, MAX_QUBITS};
