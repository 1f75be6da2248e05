use thiserror::Error;

/// Errors raised while building trees or evaluating free-energy quantities.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("failed to parse input: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("invalid inverse temperature: {0}")]
    InvalidTemperature(String),

    #[error("horizon must be a positive integer")]
    InvalidHorizon,

    #[error("unknown node `{0}`")]
    UnknownNode(String),

    #[error("node `{0}` is not reachable from the root")]
    Unreachable(String),

    #[error("node `{0}` has more than one parent or lies on a cycle")]
    NotATree(String),

    #[error("node `{node}` has duplicate edge label `{label}`")]
    DuplicateLabel { node: String, label: String },

    #[error("node `{node}` edge `{label}` has invalid probability {q}")]
    InvalidProbability { node: String, label: String, q: f64 },

    #[error("node `{node}` probabilities sum to {sum}, expected 1")]
    NotNormalized { node: String, sum: f64 },

    #[error("node `{node}` has a non-finite {what}")]
    NonFinite { node: String, what: &'static str },

    #[error("leaf `{node}` sits at depth {depth}, expected horizon {horizon}")]
    NonUniformDepth {
        node: String,
        depth: usize,
        horizon: usize,
    },

    #[error("internal node `{0}` carries a nonzero leaf_value")]
    LeafValueOnInternal(String),

    #[error("internal node `{0}` has no inverse temperature")]
    MissingTemperature(String),

    #[error("support mismatch: {0}")]
    SupportMismatch(String),

    #[error("distribution is invalid: {0}")]
    InvalidDistribution(String),

    #[error("policy error: {0}")]
    Policy(String),

    #[error("absolute continuity violated at `{0}`: p > 0 where q = 0")]
    NotAbsolutelyContinuous(String),

    #[error("zero inverse temperature is not allowed here: {0}")]
    ZeroTemperature(String),

    #[error("zero probability at `{0}`")]
    ZeroProbability(String),

    #[error("utilities are tied at `{0}`; a strict order is required")]
    TiedUtilities(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("node kind `{kind}` is not allowed for {rule}")]
    KindNotAllowed {
        kind: &'static str,
        rule: &'static str,
    },
}

impl Error {
    /// Process exit code for the CLI: 1 for input/parse failures, 2 for
    /// validation and domain errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) | Error::Io(_) => 1,
            _ => 2,
        }
    }

    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
            Error::InvalidTemperature(_) => "invalid_temperature",
            Error::InvalidHorizon => "invalid_horizon",
            Error::UnknownNode(_) => "unknown_node",
            Error::Unreachable(_) => "unreachable",
            Error::NotATree(_) => "not_a_tree",
            Error::DuplicateLabel { .. } => "duplicate_label",
            Error::InvalidProbability { .. } => "invalid_probability",
            Error::NotNormalized { .. } => "not_normalized",
            Error::NonFinite { .. } => "non_finite",
            Error::NonUniformDepth { .. } => "non_uniform_depth",
            Error::LeafValueOnInternal(_) => "leaf_value_on_internal",
            Error::MissingTemperature(_) => "missing_temperature",
            Error::SupportMismatch(_) => "support_mismatch",
            Error::InvalidDistribution(_) => "invalid_distribution",
            Error::Policy(_) => "policy",
            Error::NotAbsolutelyContinuous(_) => "not_absolutely_continuous",
            Error::ZeroTemperature(_) => "zero_temperature",
            Error::ZeroProbability(_) => "zero_probability",
            Error::TiedUtilities(_) => "tied_utilities",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::KindNotAllowed { .. } => "kind_not_allowed",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
