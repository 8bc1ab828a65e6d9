use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,

    #[error("cannot invert an element that is zero up to its truncation floor")]
    InvertTruncatedZero,

    #[error("mismatched coefficient fields: {0} vs {1}")]
    MixedFields(String, String),

    #[error("field extension required: working field `{field}` does not contain {what}")]
    FieldExtensionRequired { field: String, what: String },

    #[error("leading form at degree {degree} has {terms} terms, expected a single monomial")]
    NonMonomialLeading { degree: i64, terms: usize },

    #[error("zero series has no leading form")]
    NoLeadingForm,

    #[error("{k} does not divide the leading exponent pair ({n1}, {n2})")]
    DivisibilityError { k: u32, n1: i64, n2: i64 },

    #[error("leading exponents ({h1}, {h2}) are not proportional to ({g1}, {g2})")]
    NonProportionalLeading { h1: i64, h2: i64, g1: i64, g2: i64 },

    #[error("required root denominator {k} does not divide gcd of exponents ({n1}, {n2})")]
    GcdObstruction { k: u32, n1: i64, n2: i64 },

    #[error("truncation floor too shallow: {0}")]
    FloorTooShallow(String),

    #[error("invalid torus data: {0}")]
    TorusError(String),

    #[error("lifting precondition failed: {0}")]
    LiftPrecondition(String),

    #[error("seed rejected: {0}")]
    SeedRejected(String),

    #[error("valuation inconsistency: {0}")]
    ValuationInconsistency(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
