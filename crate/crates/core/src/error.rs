use thiserror::Error;

use crate::index::Granularity;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CorpusError {
    #[error("invalid entity id {0:?}")]
    InvalidEntityId(String),
    #[error("document id must not be empty")]
    EmptyDocumentId,
    #[error("duplicate document id {0:?}")]
    DuplicateDocumentId(String),
    #[error("entity {entity:?} has a zero mention count")]
    ZeroCount { entity: String },
    #[error("entity {entity:?} listed more than once")]
    RepeatedEntity { entity: String },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QueryError {
    #[error("no entities of interest")]
    NoEntities,
    #[error("invalid range: {start} is after {end}")]
    InvalidRange { start: String, end: String },
    #[error("invalid beta {0}: must be a non-negative finite number")]
    InvalidBeta(f64),
    #[error("invalid top-k: must be a positive integer")]
    InvalidTopK,
    #[error("missing {0}")]
    Missing(&'static str),
    #[error("invalid date {0:?}: expected YYYY-MM-DD")]
    InvalidDate(String),
    #[error("invalid semantics {0:?}: expected \"all\" or \"any\"")]
    InvalidSemantics(String),
    #[error("invalid granularity {0:?}: expected day, week, month or year")]
    InvalidGranularity(String),
    #[error(transparent)]
    Entity(#[from] CorpusError),
    #[error("index built at {index} granularity but query asks for {query}")]
    GranularityMismatch {
        index: Granularity,
        query: Granularity,
    },
}

/// Violations of a scoring function's preconditions.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScoreError {
    #[error("document {0:?} has no entity mentions")]
    NoMentions(String),
    #[error("document {0:?} is not in the matched set")]
    NotMatched(String),
    #[error("entity {0} is an entity of interest")]
    EntityOfInterest(String),
    #[error("period {0} is not part of the query")]
    PeriodOutsideQuery(String),
    #[error("the matched set is empty")]
    EmptyMatch,
}
