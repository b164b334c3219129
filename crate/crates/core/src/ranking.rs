//! Relativeness, timeliness and relatedness scores and their combination.
//!
//! For a matched document `d` the final score is
//!
//! ```text
//! S(d) = timeliness(p_d) * relativeness(d) + beta * sum(relatedness(e) for e in E_d \ E_Q) / |E_d|
//! ```
//!
//! All sums run in ascending entity (or period) order so that scores are
//! reproducible bit for bit, whatever the thread count.

use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::corpus::{Document, EntityId};
use crate::error::{QueryError, ScoreError};
use crate::index::{intersection_len, period_of, CorpusIndex, DocIndex, PeriodId};
use crate::query::{match_documents, Query, QueryContext, Semantics};

/// Score components of one ranked document.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreBreakdown {
    pub doc_id: String,
    /// Period the document was published in.
    pub period: PeriodId,
    pub relativeness: f64,
    pub timeliness: f64,
    /// Mean relatedness over the document's entities, before weighting by
    /// beta.
    pub relatedness_term: f64,
    pub total: f64,
}

/// Breakdowns ordered by descending total, ties by ascending document id.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RankedResult {
    entries: Vec<ScoreBreakdown>,
}

impl RankedResult {
    /// Wraps entries that are already in rank order.
    pub fn from_ranked(entries: Vec<ScoreBreakdown>) -> Self {
        RankedResult { entries }
    }

    pub fn entries(&self) -> &[ScoreBreakdown] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<ScoreBreakdown> {
        self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, ScoreBreakdown> {
        self.entries.iter()
    }
}

impl<'r> IntoIterator for &'r RankedResult {
    type Item = &'r ScoreBreakdown;
    type IntoIter = std::slice::Iter<'r, ScoreBreakdown>;

    fn into_iter(self) -> Self::IntoIter {
        self.entries.iter()
    }
}

fn eoi_fraction(doc: &Document, eoi: &BTreeSet<EntityId>) -> Result<f64, ScoreError> {
    let all = doc.total_mentions();
    if all == 0 {
        return Err(ScoreError::NoMentions(doc.id().to_string()));
    }
    let of_interest: u64 = eoi.iter().map(|e| u64::from(doc.count(e))).sum();
    Ok(of_interest as f64 / all as f64)
}

/// Share of the document's mentions that are mentions of the entities of
/// interest.
pub fn relativeness_all(doc: &Document, eoi: &BTreeSet<EntityId>) -> Result<f64, ScoreError> {
    eoi_fraction(doc, eoi)
}

/// [`relativeness_all`] weighted by the share of entities of interest the
/// document mentions at all.
pub fn relativeness_any(doc: &Document, eoi: &BTreeSet<EntityId>) -> Result<f64, ScoreError> {
    let fraction = eoi_fraction(doc, eoi)?;
    let present = eoi.iter().filter(|e| doc.mentions_entity(e)).count();
    Ok(fraction * (present as f64 / eoi.len() as f64))
}

/// Share of the matched documents published during `period`.
pub fn timeliness(ctx: &QueryContext<'_>, period: &PeriodId) -> Result<f64, ScoreError> {
    if ctx.matched().is_empty() {
        return Err(ScoreError::EmptyMatch);
    }
    ctx.period_score(period)
        .ok_or_else(|| ScoreError::PeriodOutsideQuery(period.to_string()))
}

/// One minus the share of documents mentioning any entity of interest that
/// also mention `entity`. Computed over the whole corpus, not just the
/// query's periods.
pub fn idf(ctx: &QueryContext<'_>, entity: &EntityId) -> Result<f64, ScoreError> {
    let union = ctx.eoi_union_docs();
    if union.is_empty() {
        return Err(ScoreError::EmptyMatch);
    }
    let shared = intersection_len(ctx.index().docs_with_entity(entity), union);
    Ok(1.0 - shared as f64 / union.len() as f64)
}

fn co_occurrences(ctx: &QueryContext<'_>, entity: &EntityId) -> usize {
    let (Some(first), Some(last)) = (ctx.periods().first(), ctx.periods().last()) else {
        return 0;
    };
    ctx.index()
        .entity_periods(entity)
        .filter(|(p, _)| *p >= first && *p <= last)
        .map(|(_, docs)| intersection_len(docs, ctx.matched()))
        .sum()
}

/// idf-weighted rate at which `entity` co-occurs with the matched
/// documents across the query's periods. Memoized per context.
pub fn relatedness(ctx: &QueryContext<'_>, entity: &EntityId) -> Result<f64, ScoreError> {
    if ctx.query().eoi().contains(entity) {
        return Err(ScoreError::EntityOfInterest(entity.to_string()));
    }
    if ctx.matched().is_empty() {
        return Err(ScoreError::EmptyMatch);
    }
    Ok(ctx.entity_score_with(entity, || {
        let weight = idf(ctx, entity).expect("matched documents imply a non-empty union");
        let rate = co_occurrences(ctx, entity) as f64 / ctx.matched().len() as f64;
        weight * rate
    }))
}

/// Scores one matched document.
pub fn final_score(ctx: &QueryContext<'_>, doc: DocIndex) -> Result<ScoreBreakdown, ScoreError> {
    let idx = ctx.index();
    let document = idx.document(doc);
    if !ctx.is_matched(doc) {
        return Err(ScoreError::NotMatched(document.id().to_string()));
    }
    let query = ctx.query();
    let eoi = query.eoi();
    let relativeness = match query.semantics() {
        Semantics::All => relativeness_all(document, eoi)?,
        Semantics::Any => relativeness_any(document, eoi)?,
    };
    let period = period_of(document.published_at(), idx.granularity());
    let timeliness = timeliness(ctx, &period)?;

    let mut related_sum = 0.0;
    for entity in document.mentions().keys().filter(|e| !eoi.contains(*e)) {
        related_sum += relatedness(ctx, entity)?;
    }
    let relatedness_term = related_sum / document.mentions().len() as f64;
    let total = timeliness * relativeness + query.beta() * relatedness_term;

    Ok(ScoreBreakdown {
        doc_id: document.id().to_string(),
        period,
        relativeness,
        timeliness,
        relatedness_term,
        total,
    })
}

/// Scores and orders every matched document of `ctx`.
pub fn rank_matched(ctx: &QueryContext<'_>) -> RankedResult {
    let mut entries: Vec<ScoreBreakdown> = ctx
        .matched()
        .par_iter()
        .map(|&d| final_score(ctx, d).expect("matched documents satisfy every score precondition"))
        .collect();
    entries.sort_by(|a, b| {
        b.total
            .total_cmp(&a.total)
            .then_with(|| a.doc_id.cmp(&b.doc_id))
    });
    if let Some(k) = ctx.query().top_k() {
        entries.truncate(k);
    }
    RankedResult { entries }
}

/// Matches `query` against `idx` and ranks the result.
pub fn rank(idx: &CorpusIndex<'_>, query: &Query) -> Result<RankedResult, QueryError> {
    let ctx = match_documents(idx, query)?;
    Ok(rank_matched(&ctx))
}
