//! Query model, category expansion and the matched document set.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::RwLock;

use chrono::NaiveDate;
use serde::Deserialize;

use crate::corpus::{parse_date, EntityCatalog, EntityId};
use crate::error::QueryError;
use crate::index::{periods_in_range, CorpusIndex, DocIndex, Granularity, PeriodId};

pub const DEFAULT_BETA: f64 = 0.5;

/// How the entities of interest combine when matching.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Semantics {
    /// Every entity of interest must be mentioned.
    All,
    /// At least one entity of interest must be mentioned.
    Any,
}

impl Semantics {
    pub fn as_str(self) -> &'static str {
        match self {
            Semantics::All => "all",
            Semantics::Any => "any",
        }
    }
}

impl fmt::Display for Semantics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Semantics {
    type Err = QueryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "all" => Ok(Semantics::All),
            "any" => Ok(Semantics::Any),
            _ => Err(QueryError::InvalidSemantics(s.to_string())),
        }
    }
}

/// A validated entity-centric temporal query.
#[derive(Clone, Debug, PartialEq)]
pub struct Query {
    eoi: BTreeSet<EntityId>,
    semantics: Semantics,
    start: NaiveDate,
    end: NaiveDate,
    granularity: Granularity,
    beta: f64,
    top_k: Option<usize>,
}

impl Query {
    /// A query with the default decay factor and no result limit.
    pub fn new(
        eoi: impl IntoIterator<Item = EntityId>,
        semantics: Semantics,
        start: NaiveDate,
        end: NaiveDate,
        granularity: Granularity,
    ) -> Result<Self, QueryError> {
        let eoi: BTreeSet<EntityId> = eoi.into_iter().collect();
        if eoi.is_empty() {
            return Err(QueryError::NoEntities);
        }
        if start > end {
            return Err(QueryError::InvalidRange {
                start: start.to_string(),
                end: end.to_string(),
            });
        }
        Ok(Query {
            eoi,
            semantics,
            start,
            end,
            granularity,
            beta: DEFAULT_BETA,
            top_k: None,
        })
    }

    pub fn with_beta(mut self, beta: f64) -> Result<Self, QueryError> {
        if !beta.is_finite() || beta < 0.0 {
            return Err(QueryError::InvalidBeta(beta));
        }
        self.beta = beta;
        Ok(self)
    }

    pub fn with_top_k(mut self, top_k: Option<usize>) -> Result<Self, QueryError> {
        if top_k == Some(0) {
            return Err(QueryError::InvalidTopK);
        }
        self.top_k = top_k;
        Ok(self)
    }

    /// Entities of interest, ascending.
    pub fn eoi(&self) -> &BTreeSet<EntityId> {
        &self.eoi
    }

    pub fn semantics(&self) -> Semantics {
        self.semantics
    }

    pub fn start(&self) -> NaiveDate {
        self.start
    }

    pub fn end(&self) -> NaiveDate {
        self.end
    }

    pub fn granularity(&self) -> Granularity {
        self.granularity
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn top_k(&self) -> Option<usize> {
        self.top_k
    }

    pub fn in_range(&self, date: NaiveDate) -> bool {
        self.start <= date && date <= self.end
    }
}

/// Unvalidated query fields, as read from flags or a query file.
///
/// The query file is a single JSON object with any of the fields below.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryRequest {
    #[serde(default)]
    pub entities: Vec<String>,
    #[serde(default)]
    pub categories: Vec<String>,
    pub semantics: Option<String>,
    pub from: Option<String>,
    pub to: Option<String>,
    pub granularity: Option<String>,
    pub beta: Option<f64>,
    pub top_k: Option<i64>,
}

impl QueryRequest {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Layers `overrides` on top of `self`: scalar fields that are set in
    /// `overrides` win, entity and category lists are concatenated.
    pub fn merged_with(mut self, overrides: QueryRequest) -> QueryRequest {
        self.entities.extend(overrides.entities);
        self.categories.extend(overrides.categories);
        self.semantics = overrides.semantics.or(self.semantics);
        self.from = overrides.from.or(self.from);
        self.to = overrides.to.or(self.to);
        self.granularity = overrides.granularity.or(self.granularity);
        self.beta = overrides.beta.or(self.beta);
        self.top_k = overrides.top_k.or(self.top_k);
        self
    }

    /// Validates the request, expanding categories against `catalog` and
    /// unioning them with the explicit entities.
    pub fn resolve(&self, catalog: &EntityCatalog) -> Result<Query, QueryError> {
        let mut eoi = BTreeSet::new();
        for raw in &self.entities {
            eoi.insert(EntityId::new(raw.as_str())?);
        }
        for category in &self.categories {
            eoi.extend(expand_category(catalog, category));
        }
        let semantics = match &self.semantics {
            Some(s) => s.parse()?,
            None => Semantics::All,
        };
        let granularity = match &self.granularity {
            Some(g) => g.parse()?,
            None => Granularity::Month,
        };
        let date = |field: &Option<String>, name| -> Result<NaiveDate, QueryError> {
            let raw = field.as_deref().ok_or(QueryError::Missing(name))?;
            parse_date(raw).ok_or_else(|| QueryError::InvalidDate(raw.to_string()))
        };
        let start = date(&self.from, "--from")?;
        let end = date(&self.to, "--to")?;
        let top_k = match self.top_k {
            None => None,
            Some(k) if k > 0 => Some(usize::try_from(k).map_err(|_| QueryError::InvalidTopK)?),
            Some(_) => return Err(QueryError::InvalidTopK),
        };
        Query::new(eoi, semantics, start, end, granularity)?
            .with_beta(self.beta.unwrap_or(DEFAULT_BETA))?
            .with_top_k(top_k)
    }
}

/// Entities whose category set contains `category`.
pub fn expand_category(catalog: &EntityCatalog, category: &str) -> BTreeSet<EntityId> {
    catalog
        .entries()
        .iter()
        .filter(|(_, cats)| cats.contains(category))
        .map(|(e, _)| e.clone())
        .collect()
}

/// Per-query state: the periods, the matched set and score caches.
#[derive(Debug)]
pub struct QueryContext<'a> {
    index: &'a CorpusIndex<'a>,
    query: Query,
    periods: Vec<PeriodId>,
    matched: Vec<DocIndex>,
    period_scores: BTreeMap<PeriodId, f64>,
    eoi_union_docs: Vec<DocIndex>,
    entity_scores: RwLock<HashMap<EntityId, f64>>,
}

fn union_sorted(lists: &[&[DocIndex]]) -> Vec<DocIndex> {
    let mut all: Vec<DocIndex> = lists.iter().flat_map(|l| l.iter().copied()).collect();
    all.sort_unstable();
    all.dedup();
    all
}

/// Computes the periods and matched documents for `query` over `idx`.
pub fn match_documents<'a>(
    idx: &'a CorpusIndex<'a>,
    query: &Query,
) -> Result<QueryContext<'a>, QueryError> {
    if idx.granularity() != query.granularity() {
        return Err(QueryError::GranularityMismatch {
            index: idx.granularity(),
            query: query.granularity(),
        });
    }
    let periods = periods_in_range(query.start(), query.end(), query.granularity())?;
    let postings: Vec<&[DocIndex]> = query.eoi().iter().map(|e| idx.docs_with_entity(e)).collect();
    let eoi_union_docs = union_sorted(&postings);
    let in_range = |d: &DocIndex| query.in_range(idx.document(*d).published_at());

    let matched: Vec<DocIndex> = match query.semantics() {
        Semantics::Any => eoi_union_docs.iter().copied().filter(in_range).collect(),
        Semantics::All => {
            let shortest = postings.iter().min_by_key(|l| l.len()).copied().unwrap_or(&[]);
            shortest
                .iter()
                .copied()
                .filter(|d| postings.iter().all(|l| l.binary_search(d).is_ok()))
                .filter(in_range)
                .collect()
        }
    };

    let mut period_scores = BTreeMap::new();
    if !matched.is_empty() {
        let mut counts: BTreeMap<&PeriodId, usize> = BTreeMap::new();
        for &d in &matched {
            *counts.entry(idx.doc_period(d)).or_default() += 1;
        }
        let total = matched.len() as f64;
        for p in &periods {
            let n = counts.get(p).copied().unwrap_or(0);
            period_scores.insert(p.clone(), n as f64 / total);
        }
    }

    Ok(QueryContext {
        index: idx,
        query: query.clone(),
        periods,
        matched,
        period_scores,
        eoi_union_docs,
        entity_scores: RwLock::new(HashMap::new()),
    })
}

impl<'a> QueryContext<'a> {
    pub fn index(&self) -> &'a CorpusIndex<'a> {
        self.index
    }

    pub fn query(&self) -> &Query {
        &self.query
    }

    /// `P_Q`, chronological.
    pub fn periods(&self) -> &[PeriodId] {
        &self.periods
    }

    /// `D_Q`, ascending.
    pub fn matched(&self) -> &[DocIndex] {
        &self.matched
    }

    pub fn is_matched(&self, doc: DocIndex) -> bool {
        self.matched.binary_search(&doc).is_ok()
    }

    /// Documents mentioning at least one entity of interest, corpus-wide.
    pub fn eoi_union_docs(&self) -> &[DocIndex] {
        &self.eoi_union_docs
    }

    /// Precomputed timeliness of `period`; `None` if the period is not in
    /// the query or nothing matched.
    pub fn period_score(&self, period: &PeriodId) -> Option<f64> {
        self.period_scores.get(period).copied()
    }

    pub fn period_scores(&self) -> &BTreeMap<PeriodId, f64> {
        &self.period_scores
    }

    /// Entity relatedness scores computed so far, ascending by entity.
    pub fn cached_entity_scores(&self) -> BTreeMap<EntityId, f64> {
        let map = self.entity_scores.read().unwrap_or_else(|e| e.into_inner());
        map.iter().map(|(e, s)| (e.clone(), *s)).collect()
    }

    /// Returns the cached score for `entity`, computing it with `compute`
    /// on first use. `compute` must be a pure function of the context so
    /// that racing threads store identical values.
    pub(crate) fn entity_score_with(&self, entity: &EntityId, compute: impl FnOnce() -> f64) -> f64 {
        if let Some(&s) = self
            .entity_scores
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .get(entity)
        {
            return s;
        }
        let score = compute();
        let mut map = self.entity_scores.write().unwrap_or_else(|e| e.into_inner());
        *map.entry(entity.clone()).or_insert(score)
    }
}
