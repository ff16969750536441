use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("space is not T0: points {0} and {1} are topologically indistinguishable")]
    NotT0(usize, usize),
    #[error("space too large: {0} points (limit {1})")]
    TooLarge(usize, usize),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("irreducible closed set {0:#b} has no generic point")]
    WitnessMissing(u64),
    #[error("map is not continuous")]
    NotContinuous,
    #[error("map is not open")]
    NotOpenMap,
    #[error("map is not surjective")]
    NotSurjective,
    #[error("map is not an embedding: {0}")]
    NotEmbedding(String),
    #[error("transfer produced {computed:#b}, expected {expected:#b}")]
    TransferMismatch { computed: u64, expected: u64 },
    #[error("family is not a subbasis (separating: {separating})")]
    NotSubbasis { separating: bool },
    #[error("family is not a basis")]
    NotABasis,
    #[error("incoherent overlap between pieces {0} and {1}: {2}")]
    IncoherentOverlap(usize, usize, String),
    #[error("codes for pair {0} do not partition the space")]
    NotComplementary(usize),
    #[error("bad translation: {0}")]
    BadTranslation(String),
    #[error("metric axiom violated: {0}")]
    MetricViolation(String),
    #[error("no ball of radius <= {radius} observed within fuel {fuel}")]
    InsufficientObservations { radius: String, fuel: usize },
    #[error("point stream violates relation {0}")]
    RelationViolated(String),
    #[error("coideal oracle breached its contract at cover {cover}")]
    OracleBreach { cover: usize },
    #[error("open set {0} is not dense in F")]
    DensityFailure(usize),
    #[error("not an ideal: {0}")]
    NotAnIdeal(String),
    #[error("not an open set of the copresented space")]
    NotOpen,
    #[error("illegal move by player {player} in round {round}: {reason}")]
    IllegalMove { player: u8, round: usize, reason: String },
    #[error("side game illegal: {0}")]
    SideGameIllegal(String),
    #[error("copresentation denotation is not finitely computable: {0}")]
    NotFinite(String),
    #[error("unknown suite {0}")]
    UnknownSuite(String),
    #[error("unknown demo {0}")]
    UnknownDemo(String),
    #[error("unsupported conversion: {0}")]
    UnsupportedConversion(String),
    #[error("schema error: {0}")]
    Schema(String),
}

pub type Result<T> = std::result::Result<T, Error>;
