//! Brute-force reference ranking.
//!
//! Evaluates every score straight from the raw documents by scanning the
//! corpus, with no index and no caching across documents. It shares no
//! scoring code with [`crate::ranking`] and exists to cross-check it. The
//! relatedness score is evaluated in both its per-period form
//! (`sum_p ScoreP(p) * |D_{e,p} & D_Q| / |D_p & D_Q|`) and the collapsed
//! form (`sum_p |D_{e,p} & D_Q| / |D_Q|`), and the two must agree.
//!
//! Cost is roughly `O(|D_Q| * |E_d| * |D|)`; keep it to test-sized corpora.

use crate::corpus::{Corpus, Document, EntityId};
use crate::index::{period_of, periods_in_range, PeriodId};
use crate::query::{Query, Semantics};
use crate::ranking::{RankedResult, ScoreBreakdown};

/// Largest tolerated gap between the two relatedness forms.
pub const FORM_AGREEMENT_TOLERANCE: f64 = 1e-12;

struct Scan<'a> {
    docs: &'a [Document],
    query: &'a Query,
    periods: Vec<PeriodId>,
    /// Position of each document's publication period in `periods`.
    period_pos: Vec<Option<usize>>,
    in_dq: Vec<bool>,
    dq_len: usize,
}

impl Scan<'_> {
    fn mentions_any_eoi(&self, d: &Document) -> bool {
        self.query.eoi().iter().any(|e| d.mentions().contains_key(e))
    }

    fn score_p(&self, p: usize) -> f64 {
        let n = (0..self.docs.len())
            .filter(|&i| self.in_dq[i] && self.period_pos[i] == Some(p))
            .count();
        n as f64 / self.dq_len as f64
    }

    fn idf(&self, e: &EntityId) -> f64 {
        let union = self.docs.iter().filter(|d| self.mentions_any_eoi(d)).count();
        let with_e = self
            .docs
            .iter()
            .filter(|d| self.mentions_any_eoi(d) && d.mentions().contains_key(e))
            .count();
        1.0 - with_e as f64 / union as f64
    }

    fn score_e(&self, e: &EntityId) -> f64 {
        let idf = self.idf(e);
        let mut dp_dq = vec![0usize; self.periods.len()];
        let mut dep_dq = vec![0usize; self.periods.len()];
        for (i, d) in self.docs.iter().enumerate() {
            if !self.in_dq[i] {
                continue;
            }
            let Some(p) = self.period_pos[i] else { continue };
            dp_dq[p] += 1;
            if d.mentions().contains_key(e) {
                dep_dq[p] += 1;
            }
        }

        let mut per_period = 0.0;
        for p in 0..self.periods.len() {
            if dp_dq[p] > 0 {
                per_period += self.score_p(p) * (dep_dq[p] as f64 / dp_dq[p] as f64);
            }
        }
        let per_period = idf * per_period;

        let co: usize = dep_dq.iter().sum();
        let collapsed = idf * (co as f64 / self.dq_len as f64);

        assert!(
            (per_period - collapsed).abs() <= FORM_AGREEMENT_TOLERANCE,
            "relatedness forms disagree for {e}: {per_period} vs {collapsed}"
        );
        collapsed
    }

    fn score_d(&self, d: &Document) -> f64 {
        let eoi = self.query.eoi();
        let num: u64 = eoi
            .iter()
            .map(|e| u64::from(d.mentions().get(e).copied().unwrap_or(0)))
            .sum();
        let den: u64 = d.mentions().values().map(|&c| u64::from(c)).sum();
        let base = num as f64 / den as f64;
        match self.query.semantics() {
            Semantics::All => base,
            Semantics::Any => {
                let shared = eoi.iter().filter(|e| d.mentions().contains_key(*e)).count();
                base * (shared as f64 / eoi.len() as f64)
            }
        }
    }
}

/// Ranks `corpus` for `query` by direct evaluation.
///
/// # Panics
///
/// If the two relatedness forms disagree by more than
/// [`FORM_AGREEMENT_TOLERANCE`].
pub fn oracle_rank(corpus: &Corpus, query: &Query) -> RankedResult {
    let docs = corpus.documents();
    let g = query.granularity();
    let periods = periods_in_range(query.start(), query.end(), g)
        .expect("a validated query has start <= end");
    let period_pos = docs
        .iter()
        .map(|d| {
            let p = period_of(d.published_at(), g);
            periods.iter().position(|q| *q == p)
        })
        .collect();
    let in_dq: Vec<bool> = docs
        .iter()
        .map(|d| {
            let in_range = query.start() <= d.published_at() && d.published_at() <= query.end();
            let mentioned = |e: &EntityId| d.mentions().contains_key(e);
            let matches = match query.semantics() {
                Semantics::All => query.eoi().iter().all(mentioned),
                Semantics::Any => query.eoi().iter().any(mentioned),
            };
            in_range && matches
        })
        .collect();
    let dq_len = in_dq.iter().filter(|&&m| m).count();
    if dq_len == 0 {
        return RankedResult::default();
    }
    let scan = Scan {
        docs,
        query,
        periods,
        period_pos,
        in_dq,
        dq_len,
    };

    let mut entries = Vec::with_capacity(dq_len);
    for (i, d) in docs.iter().enumerate() {
        if !scan.in_dq[i] {
            continue;
        }
        let p = scan.period_pos[i].expect("matched documents are published within the query");
        let relativeness = scan.score_d(d);
        let timeliness = scan.score_p(p);
        let mut sum = 0.0;
        for e in d.mentions().keys() {
            if !query.eoi().contains(e) {
                sum += scan.score_e(e);
            }
        }
        let relatedness_term = sum / d.mentions().len() as f64;
        entries.push(ScoreBreakdown {
            doc_id: d.id().to_string(),
            period: scan.periods[p].clone(),
            relativeness,
            timeliness,
            relatedness_term,
            total: timeliness * relativeness + query.beta() * relatedness_term,
        });
    }

    entries.sort_by(|a, b| match b.total.total_cmp(&a.total) {
        std::cmp::Ordering::Equal => a.doc_id.as_bytes().cmp(b.doc_id.as_bytes()),
        other => other,
    });
    if let Some(k) = query.top_k() {
        entries.truncate(k);
    }
    RankedResult::from_ranked(entries)
}
