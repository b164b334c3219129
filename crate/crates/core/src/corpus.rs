//! Document and entity data model, plus line-delimited ingest.
//!
//! A corpus file carries one JSON object per line:
//!
//! ```text
//! {"id":"d1","date":"1990-02-11","mentions":[{"entity":"dbr:Nelson_Mandela","count":3}]}
//! ```
//!
//! and an entity catalog file carries one object per line:
//!
//! ```text
//! {"entity":"dbr:F._W._de_Klerk","categories":["dbc:State_Presidents_of_South_Africa"]}
//! ```
//!
//! Bad records never abort an ingest. They are skipped and tallied in the
//! returned report.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{self, BufRead, Write};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::CorpusError;

/// Unique identifier of an entity, e.g. `dbr:Nelson_Mandela`.
///
/// Compared by exact, case-sensitive string equality.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EntityId(String);

impl EntityId {
    pub fn new(value: impl Into<String>) -> Result<Self, CorpusError> {
        let value = value.into();
        if value.is_empty() {
            return Err(CorpusError::InvalidEntityId(value));
        }
        if value.chars().any(|c| c.is_whitespace() || c.is_control()) {
            return Err(CorpusError::InvalidEntityId(value));
        }
        Ok(EntityId(value))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::str::FromStr for EntityId {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EntityId::new(s)
    }
}

impl std::borrow::Borrow<str> for EntityId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

/// An archived, dated document and the entities annotated in it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Document {
    id: String,
    published_at: NaiveDate,
    mentions: BTreeMap<EntityId, u32>,
}

impl Document {
    /// Builds a document, rejecting an empty id, zero counts and repeated
    /// entities.
    pub fn new(
        id: impl Into<String>,
        published_at: NaiveDate,
        mentions: impl IntoIterator<Item = (EntityId, u32)>,
    ) -> Result<Self, CorpusError> {
        let id = id.into();
        if id.is_empty() {
            return Err(CorpusError::EmptyDocumentId);
        }
        let mut map = BTreeMap::new();
        for (entity, count) in mentions {
            if count == 0 {
                return Err(CorpusError::ZeroCount { entity: entity.0 });
            }
            if map.insert(entity.clone(), count).is_some() {
                return Err(CorpusError::RepeatedEntity { entity: entity.0 });
            }
        }
        Ok(Document {
            id,
            published_at,
            mentions: map,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn published_at(&self) -> NaiveDate {
        self.published_at
    }

    /// Entity mention counts, keyed in ascending entity order.
    pub fn mentions(&self) -> &BTreeMap<EntityId, u32> {
        &self.mentions
    }

    pub fn count(&self, entity: &EntityId) -> u32 {
        self.mentions.get(entity).copied().unwrap_or(0)
    }

    pub fn mentions_entity(&self, entity: &EntityId) -> bool {
        self.mentions.contains_key(entity)
    }

    /// Sum of all mention counts in the document.
    pub fn total_mentions(&self) -> u64 {
        self.mentions.values().map(|&c| u64::from(c)).sum()
    }

    /// Documents without annotations are accepted but can never match.
    pub fn is_entity_less(&self) -> bool {
        self.mentions.is_empty()
    }
}

/// Optional entity to category metadata.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EntityCatalog {
    entries: BTreeMap<EntityId, BTreeSet<String>>,
}

impl EntityCatalog {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds categories for `entity`, merging with any already present.
    pub fn insert<I, S>(&mut self, entity: EntityId, categories: I)
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.entries
            .entry(entity)
            .or_default()
            .extend(categories.into_iter().map(Into::into));
    }

    pub fn categories(&self, entity: &EntityId) -> Option<&BTreeSet<String>> {
        self.entries.get(entity)
    }

    pub fn entries(&self) -> &BTreeMap<EntityId, BTreeSet<String>> {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// The document collection, its entity universe and catalog.
///
/// Documents are kept sorted by id so that two corpora built from the same
/// records in a different order compare equal.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Corpus {
    documents: Vec<Document>,
    catalog: EntityCatalog,
    entity_universe: BTreeSet<EntityId>,
}

impl Corpus {
    pub fn new(documents: Vec<Document>, catalog: EntityCatalog) -> Result<Self, CorpusError> {
        let mut documents = documents;
        documents.sort_by(|a, b| a.id.cmp(&b.id));
        if let Some(w) = documents.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(CorpusError::DuplicateDocumentId(w[0].id.clone()));
        }
        let entity_universe = documents
            .iter()
            .flat_map(|d| d.mentions.keys().cloned())
            .collect();
        Ok(Corpus {
            documents,
            catalog,
            entity_universe,
        })
    }

    /// Documents in ascending id order.
    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn catalog(&self) -> &EntityCatalog {
        &self.catalog
    }

    pub fn set_catalog(&mut self, catalog: EntityCatalog) {
        self.catalog = catalog;
    }

    pub fn entity_universe(&self) -> &BTreeSet<EntityId> {
        &self.entity_universe
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn document(&self, id: &str) -> Option<&Document> {
        self.documents
            .binary_search_by(|d| d.id.as_str().cmp(id))
            .ok()
            .map(|i| &self.documents[i])
    }

    /// Earliest and latest publication dates.
    pub fn date_span(&self) -> Option<(NaiveDate, NaiveDate)> {
        let min = self.documents.iter().map(|d| d.published_at).min()?;
        let max = self.documents.iter().map(|d| d.published_at).max()?;
        Some((min, max))
    }

    /// Writes the corpus in canonical line-delimited form: documents in id
    /// order, mentions in entity order, dates without a time suffix.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> io::Result<()> {
        for doc in &self.documents {
            let record = RawDocumentOut {
                id: &doc.id,
                date: doc.published_at.format("%Y-%m-%d").to_string(),
                mentions: doc
                    .mentions
                    .iter()
                    .map(|(e, &count)| RawMentionOut {
                        entity: e.as_str(),
                        count,
                    })
                    .collect(),
            };
            serde_json::to_writer(&mut out, &record)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Why a record was skipped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SkipReason {
    Malformed,
    Duplicate,
    Dateless,
}

/// Outcome of a corpus ingest.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IngestReport {
    pub accepted: usize,
    pub skipped: usize,
    pub malformed: usize,
    pub duplicate: usize,
    pub dateless: usize,
}

impl IngestReport {
    fn skip(&mut self, reason: SkipReason) {
        self.skipped += 1;
        match reason {
            SkipReason::Malformed => self.malformed += 1,
            SkipReason::Duplicate => self.duplicate += 1,
            SkipReason::Dateless => self.dateless += 1,
        }
    }

    /// Non-blank lines seen.
    pub fn total(&self) -> usize {
        self.accepted + self.skipped
    }
}

/// Outcome of a catalog ingest.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CatalogReport {
    pub accepted: usize,
    pub malformed: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    id: String,
    #[serde(default)]
    date: Option<serde_json::Value>,
    mentions: Vec<RawMention>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMention {
    entity: String,
    count: u32,
}

#[derive(Serialize)]
struct RawDocumentOut<'a> {
    id: &'a str,
    date: String,
    mentions: Vec<RawMentionOut<'a>>,
}

#[derive(Serialize)]
struct RawMentionOut<'a> {
    entity: &'a str,
    count: u32,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCatalogEntry {
    entity: String,
    #[serde(default)]
    categories: Vec<String>,
}

/// Parses a publication date, truncating any time-of-day suffix.
///
/// Accepts `YYYY-MM-DD` optionally followed by `T` or a space and anything
/// after it.
pub fn parse_date(raw: &str) -> Option<NaiveDate> {
    let raw = raw.trim();
    let (day, rest) = raw.split_at_checked(10)?;
    if !(rest.is_empty() || rest.starts_with('T') || rest.starts_with(' ')) {
        return None;
    }
    let b = day.as_bytes();
    let digits = |r: std::ops::Range<usize>| b[r].iter().all(u8::is_ascii_digit);
    if !(digits(0..4) && b[4] == b'-' && digits(5..7) && b[7] == b'-' && digits(8..10)) {
        return None;
    }
    NaiveDate::parse_from_str(day, "%Y-%m-%d").ok()
}

fn parse_document_line(line: &str) -> Result<Document, SkipReason> {
    let raw: RawDocument = serde_json::from_str(line).map_err(|_| SkipReason::Malformed)?;
    let mentions = raw
        .mentions
        .into_iter()
        .map(|m| EntityId::new(m.entity).map(|e| (e, m.count)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| SkipReason::Malformed)?;
    let date = raw
        .date
        .as_ref()
        .and_then(serde_json::Value::as_str)
        .and_then(parse_date)
        .ok_or(SkipReason::Dateless)?;
    Document::new(raw.id, date, mentions).map_err(|_| SkipReason::Malformed)
}

/// Reads a line-delimited corpus. The returned corpus has an empty catalog.
pub fn parse_corpus<R: BufRead>(source: R) -> io::Result<(Corpus, IngestReport)> {
    let mut report = IngestReport::default();
    let mut documents: BTreeMap<String, Document> = BTreeMap::new();
    for line in source.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match parse_document_line(&line) {
            Ok(doc) => {
                if documents.contains_key(doc.id()) {
                    report.skip(SkipReason::Duplicate);
                } else {
                    report.accepted += 1;
                    documents.insert(doc.id.clone(), doc);
                }
            }
            Err(reason) => report.skip(reason),
        }
    }
    let corpus = Corpus::new(documents.into_values().collect(), EntityCatalog::new())
        .expect("ids are unique by construction");
    Ok((corpus, report))
}

/// Reads a line-delimited entity catalog. Repeated entities merge their
/// category sets.
pub fn parse_entity_catalog<R: BufRead>(source: R) -> io::Result<(EntityCatalog, CatalogReport)> {
    let mut catalog = EntityCatalog::new();
    let mut report = CatalogReport::default();
    for line in source.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let entry = serde_json::from_str::<RawCatalogEntry>(&line)
            .ok()
            .filter(|e| e.categories.iter().all(|c| !c.is_empty()))
            .and_then(|e| EntityId::new(e.entity).ok().map(|id| (id, e.categories)));
        match entry {
            Some((entity, categories)) => {
                catalog.insert(entity, categories);
                report.accepted += 1;
            }
            None => report.malformed += 1,
        }
    }
    Ok((catalog, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ingest(text: &str) -> (Corpus, IngestReport) {
        parse_corpus(text.as_bytes()).unwrap()
    }

    #[test]
    fn entity_id_rejects_whitespace_and_empty() {
        assert!(EntityId::new("dbr:Nelson_Mandela").is_ok());
        assert!(EntityId::new("").is_err());
        assert!(EntityId::new("dbr:Nelson Mandela").is_err());
        assert!(EntityId::new("a\tb").is_err());
        assert!(EntityId::new("a\u{7}").is_err());
    }

    #[test]
    fn two_clean_records() {
        let (corpus, report) = ingest(concat!(
            r#"{"id":"d1","date":"1990-02-11","mentions":[{"entity":"A","count":2}]}"#,
            "\n",
            r#"{"id":"d2","date":"1990-03-01","mentions":[{"entity":"B","count":1}]}"#,
            "\n"
        ));
        assert_eq!(corpus.len(), 2);
        assert_eq!(report.accepted, 2);
        assert_eq!(report.skipped, 0);
    }

    #[test]
    fn invalid_calendar_date_is_dateless() {
        let (corpus, report) = ingest(concat!(
            r#"{"id":"d1","date":"1990-02-11","mentions":[{"entity":"A","count":2}]}"#,
            "\n",
            r#"{"id":"d2","date":"1990-13-99","mentions":[{"entity":"A","count":1}]}"#,
        ));
        assert_eq!(corpus.len(), 1);
        assert_eq!(
            report,
            IngestReport {
                accepted: 1,
                skipped: 1,
                dateless: 1,
                ..Default::default()
            }
        );
    }

    #[test]
    fn missing_date_is_dateless() {
        let (_, report) = ingest(r#"{"id":"d1","mentions":[{"entity":"A","count":2}]}"#);
        assert_eq!(report.dateless, 1);
        let (_, report) = ingest(r#"{"id":"d1","date":19900211,"mentions":[]}"#);
        assert_eq!(report.dateless, 1);
    }

    #[test]
    fn repeated_mention_key_is_malformed() {
        let (corpus, report) = ingest(
            r#"{"id":"d1","date":"1990-02-11","mentions":[{"entity":"A","count":2},{"entity":"A","count":3}]}"#,
        );
        assert!(corpus.is_empty());
        assert_eq!(report.malformed, 1);
        assert_eq!(report.skipped, 1);
    }

    #[test]
    fn malformed_variants() {
        let lines = [
            "not json",
            r#"{"id":"","date":"1990-01-01","mentions":[]}"#,
            r#"{"id":"d","date":"1990-01-01","mentions":[{"entity":"A","count":0}]}"#,
            r#"{"id":"d","date":"1990-01-01","mentions":[{"entity":"A","count":-1}]}"#,
            r#"{"id":"d","date":"1990-01-01","mentions":[{"entity":"has space","count":1}]}"#,
            r#"{"id":"d","date":"1990-01-01"}"#,
            r#"["d","1990-01-01"]"#,
        ];
        let (corpus, report) = ingest(&lines.join("\n"));
        assert!(corpus.is_empty());
        assert_eq!(report.malformed, lines.len());
    }

    #[test]
    fn duplicate_id_keeps_first() {
        let (corpus, report) = ingest(concat!(
            r#"{"id":"d1","date":"1990-02-11","mentions":[{"entity":"A","count":2}]}"#,
            "\n",
            r#"{"id":"d1","date":"1991-02-11","mentions":[{"entity":"B","count":2}]}"#,
        ));
        assert_eq!(report.duplicate, 1);
        assert_eq!(
            corpus.document("d1").unwrap().published_at(),
            NaiveDate::from_ymd_opt(1990, 2, 11).unwrap()
        );
    }

    #[test]
    fn blank_lines_ignored_and_entity_less_accepted() {
        let (corpus, report) =
            ingest("\n   \n{\"id\":\"d1\",\"date\":\"1990-02-11\",\"mentions\":[]}\n\n");
        assert_eq!(report.total(), 1);
        assert!(corpus.documents()[0].is_entity_less());
        assert!(corpus.entity_universe().is_empty());
    }

    #[test]
    fn time_suffix_truncated() {
        assert_eq!(
            parse_date("1990-02-11T23:59:59Z"),
            NaiveDate::from_ymd_opt(1990, 2, 11)
        );
        assert_eq!(
            parse_date("1990-02-11 08:00"),
            NaiveDate::from_ymd_opt(1990, 2, 11)
        );
        assert_eq!(parse_date("1990-2-11"), None);
        assert_eq!(parse_date("1990-02-111"), None);
        assert_eq!(parse_date("1990-02-30"), None);
        assert_eq!(parse_date("19900211"), None);
    }

    #[test]
    fn universe_is_union_of_mentions() {
        let (corpus, _) = ingest(concat!(
            r#"{"id":"d1","date":"1990-02-11","mentions":[{"entity":"A","count":2},{"entity":"B","count":1}]}"#,
            "\n",
            r#"{"id":"d2","date":"1990-03-01","mentions":[{"entity":"C","count":1}]}"#,
        ));
        let names: Vec<_> = corpus.entity_universe().iter().map(EntityId::as_str).collect();
        assert_eq!(names, ["A", "B", "C"]);
    }

    #[test]
    fn record_order_does_not_matter() {
        let a = r#"{"id":"d1","date":"1990-02-11","mentions":[{"entity":"A","count":2}]}"#;
        let b = r#"{"id":"d2","date":"1990-03-01","mentions":[{"entity":"B","count":1}]}"#;
        assert_eq!(ingest(&format!("{a}\n{b}")).0, ingest(&format!("{b}\n{a}")).0);
    }

    #[test]
    fn canonical_output_reingests_identically() {
        let (corpus, _) = ingest(concat!(
            r#"{"id":"d2","date":"1990-03-01T10:00:00","mentions":[{"entity":"B","count":1},{"entity":"A","count":4}]}"#,
            "\n",
            r#"{"id":"d1","date":"1990-02-11","mentions":[]}"#,
        ));
        let mut first = Vec::new();
        corpus.write_jsonl(&mut first).unwrap();
        let (again, _) = parse_corpus(first.as_slice()).unwrap();
        assert_eq!(again, corpus);
        let mut second = Vec::new();
        again.write_jsonl(&mut second).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn catalog_merges_repeated_entities() {
        let (catalog, report) = parse_entity_catalog(
            concat!(
                r#"{"entity":"E1","categories":["C1"]}"#,
                "\n",
                r#"{"entity":"E1","categories":["C2"]}"#,
                "\n",
                r#"{"entity":"E2","categories":[]}"#,
                "\n",
                r#"{"entity":"E3"}"#,
                "\n",
                r#"{"entity":"E4","categories":[""]}"#,
                "\n",
                "garbage",
            )
            .as_bytes(),
        )
        .unwrap();
        let e1 = EntityId::new("E1").unwrap();
        let cats: Vec<_> = catalog.categories(&e1).unwrap().iter().cloned().collect();
        assert_eq!(cats, ["C1", "C2"]);
        assert!(catalog.categories(&EntityId::new("E2").unwrap()).unwrap().is_empty());
        assert!(catalog.categories(&EntityId::new("E3").unwrap()).unwrap().is_empty());
        assert_eq!(report, CatalogReport { accepted: 4, malformed: 2 });
    }

    #[test]
    fn empty_catalog_source() {
        let (catalog, report) = parse_entity_catalog(&b""[..]).unwrap();
        assert!(catalog.is_empty());
        assert_eq!(report, CatalogReport::default());
    }
}
