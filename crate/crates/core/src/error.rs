use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} must be finite and positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("range register would need {bits} bits (limit 62); loosen nu or the range bound")]
    WordWidth { bits: u32 },

    #[error("range word {word} does not fit in {bits} bits")]
    WordOverflow { word: u64, bits: u32 },

    #[error("value {value} outside representable range [{min}, {max}]; the planned range bound is too small")]
    RangeOverflow { value: f64, min: f64, max: f64 },

    #[error("grid index {index} out of range (limit {limit})")]
    GridIndex { index: usize, limit: usize },

    #[error("point {point:?} lies outside the function domain")]
    OutsideDomain { point: Vec<f64> },

    #[error("grid needs {bits} qubits, above the memory guard of {limit}; raise --max-grid-bits or loosen delta/epsilon")]
    MemoryGuard { bits: u32, limit: u32 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error(
        "residual entanglement: term ({label}, word {word}, grid {grid}) survives uncomputation"
    )]
    ResidualEntanglement {
        label: String,
        word: u64,
        grid: usize,
    },

    #[error("state is not normalized: squared norm {norm_sqr}")]
    Unnormalized { norm_sqr: f64 },

    #[error("duplicate basis triple in sparse state at grid index {grid}")]
    DuplicateTerm { grid: usize },

    #[error("gate-level QFT supports 1 <= n <= 12, got {n}")]
    GateWidth { n: u32 },

    #[error("qubit {qubit} outside register of width {width}")]
    QubitIndex { qubit: usize, width: usize },

    #[error("leakage analysis requires a linear model")]
    NotLinear,
}
