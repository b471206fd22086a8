use thiserror::Error;

/// Errors surfaced by the simulator and protocol layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit count {requested} outside supported range 1..={max}")]
    Capacity { requested: usize, max: usize },

    #[error("amplitude vector has zero norm")]
    ZeroNorm,

    #[error("{0}")]
    Shape(String),

    #[error("matrix deviates from unitarity by {deviation:.3e}")]
    NonUnitary { deviation: f64 },

    #[error("qubit index {index} out of range for {num_qubits}-qubit state")]
    QubitIndex { index: usize, num_qubits: usize },

    #[error("duplicate qubit index {0} in control/target set")]
    DuplicateIndex(usize),

    #[error("outcome {outcome} on qubit {qubit} has probability {probability:.3e} below threshold")]
    ImpossibleOutcome {
        qubit: usize,
        outcome: u8,
        probability: f64,
    },

    #[error("gate rewrite at position {position}: expected {expected}")]
    Rewrite { position: usize, expected: String },

    #[error("expansion of {controls}-control gate needs {needed} ancilla qubits, {available} available")]
    InsufficientAncillas {
        controls: usize,
        needed: usize,
        available: usize,
    },

    #[error("invalid election config: {0}")]
    Config(String),

    #[error("voter {0} has already cast a vote")]
    DoubleVote(usize),

    #[error("no votes cast: every voter abstained")]
    NoVotesCast,

    #[error("no accepted shots out of {0}")]
    InsufficientSamples(usize),

    #[error("verification needs at least {min} rounds, got {got}")]
    Statistics { min: usize, got: usize },

    #[error("protocol incomplete: voter {0} never completed a voting round")]
    ProtocolIncomplete(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
