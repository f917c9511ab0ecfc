use thiserror::Error;

/// Errors produced by the circuit model, engine, and planners.
#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit count and depth must be even and >= 2, got n={n}, t={t}")]
    InvalidLayout { n: usize, t: usize },

    #[error("qubit count {n} exceeds the dense-engine cap of {cap} (override with MCL_MAX_QUBITS)")]
    QubitCapExceeded { n: usize, cap: usize },

    #[error("qubit index {q} out of range for n={n}")]
    QubitOutOfRange { q: usize, n: usize },

    #[error("gate list has {got} entries, layout requires {want}")]
    GateCountMismatch { got: usize, want: usize },

    #[error("configuration dims ({n}, {t}) do not match layout ({ln}, {lt})")]
    ConfigDimsMismatch { n: usize, t: usize, ln: usize, lt: usize },

    #[error("measurement outcome set has zero Born weight; no normalized output exists")]
    ZeroWeight,

    #[error("requested {want} edge-disjoint measurement-free paths, only {have} exist")]
    InsufficientPaths { want: usize, have: usize },

    #[error("no open bridge found between paths {upper} and {lower} near logical layer {layer}")]
    NoBridgeFound { upper: usize, lower: usize, layer: usize },

    #[error("gadget at gate {placement} requires a measurement at qubit {q}, step {tau} that the plan cannot supply")]
    GadgetPreconditionViolated { placement: usize, q: usize, tau: usize },

    #[error("{count} blocks requested but only {max} distinct Pauli images exist for n={n}")]
    TooManyBlocks { count: usize, max: usize, n: usize },

    #[error("clifford circuit needs {need} brick-wall layers but only {have} are available")]
    DepthExceeded { need: usize, have: usize },

    #[error("logical circuit layer {layer} cannot be placed: {reason}")]
    UnplaceableLogicalLayer { layer: usize, reason: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("serialization: {0}")]
    Serde(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
