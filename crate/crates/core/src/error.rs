use thiserror::Error;

/// Errors raised by tree construction, penalty assembly, solving and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("tree has a directed cycle through: {}", .0.join(" -> "))]
    CycleDetected(Vec<String>),
    #[error("tree must have exactly one root, found {}: {}", .0.len(), .0.join(", "))]
    MultipleRoots(Vec<String>),
    #[error("node {node} has more than one parent: {}", .parents.join(", "))]
    MultipleParents { node: String, parents: Vec<String> },
    #[error(
        "internal node {node} has a single child {child}; drop {child} and attach its children to {node} (a one-child node duplicates its child)"
    )]
    SingleChildNode { node: String, child: String },
    #[error("edge {child} -> {parent} is listed more than once")]
    DuplicateEdge { child: String, parent: String },
    #[error("edge list is empty")]
    EmptyTree,
    #[error("node index {index} out of range for a tree with {p} nodes")]
    IndexOutOfRange { index: usize, p: usize },
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    #[error("eta must lie in [0, 1], got {0}")]
    EtaOutOfRange(f64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("linear system is singular: {0}")]
    SingularSystem(String),
    #[error("Q system is numerically singular (smallest singular value {0:e}); this indicates an invalid tree")]
    SingularQ(f64),
    #[error("composition constraint violated in {} row(s): {}", .rows.len(), fmt_rows(.rows))]
    CompositionViolated { rows: Vec<usize> },
    #[error("every solve on the tuning grid failed")]
    AllSolvesFailed,
    #[error("signal variance is zero for a non-trivial coefficient vector")]
    ZeroSignal,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("unknown scenario: {0}")]
    UnknownScenario(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("data is missing leaf columns: {}", .0.join(", "))]
    MissingColumn(Vec<String>),
    #[error("unsupported report schema version {0}")]
    SchemaVersion(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

fn fmt_rows(rows: &[usize]) -> String {
    const SHOWN: usize = 20;
    let mut s: Vec<String> = rows.iter().take(SHOWN).map(|r| r.to_string()).collect();
    if rows.len() > SHOWN {
        s.push("...".to_string());
    }
    s.join(", ")
}

pub type Result<T> = std::result::Result<T, Error>;
