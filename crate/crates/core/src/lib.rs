//! Ranking for entity-annotated, dated document archives.
//!
//! A structured query selects the documents published in a date range that
//! mention some entities of interest. All of them match equally, so this
//! crate orders them by combining three signals read only from the
//! annotations:
//!
//! - **relativeness**: how much of the document is about the entities of
//!   interest;
//! - **timeliness**: how busy the document's publication period was for
//!   those entities;
//! - **relatedness**: how many other entities it mentions that co-occur
//!   with the entities of interest, discounted when they co-occur with
//!   almost everything.
//!
//! ```
//! use entrank::{build_index, parse_corpus, rank, Granularity, QueryRequest};
//!
//! let corpus_text = r#"{"id":"d1","date":"1990-02-11","mentions":[{"entity":"dbr:Nelson_Mandela","count":3}]}"#;
//! let (corpus, _report) = parse_corpus(corpus_text.as_bytes()).unwrap();
//! let index = build_index(&corpus, Granularity::Month);
//! let query = QueryRequest {
//!     entities: vec!["dbr:Nelson_Mandela".into()],
//!     from: Some("1990-01-01".into()),
//!     to: Some("1990-12-31".into()),
//!     ..Default::default()
//! }
//! .resolve(corpus.catalog())
//! .unwrap();
//! let ranked = rank(&index, &query).unwrap();
//! assert_eq!(ranked.entries()[0].doc_id, "d1");
//! ```

#![forbid(unsafe_code)]

pub mod corpus;
mod error;
pub mod index;
pub mod oracle;
pub mod query;
pub mod ranking;
pub mod synth;

pub use corpus::{
    parse_corpus, parse_entity_catalog, CatalogReport, Corpus, Document, EntityCatalog, EntityId,
    IngestReport,
};
pub use error::{CorpusError, QueryError, ScoreError};
pub use index::{build_index, period_of, periods_in_range, CorpusIndex, DocIndex, Granularity, PeriodId};
pub use oracle::oracle_rank;
pub use query::{expand_category, match_documents, Query, QueryContext, QueryRequest, Semantics};
pub use ranking::{rank, RankedResult, ScoreBreakdown};
