//! Calendar bucketing and the period-partitioned inverted indexes.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, Days, NaiveDate, Weekday};

use crate::corpus::{Corpus, Document, EntityId};
use crate::error::QueryError;

/// Position of a document in [`Corpus::documents`]. Since documents are
/// sorted by id, ascending positions are ascending ids.
pub type DocIndex = u32;

/// Calendar unit used to bucket publication dates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Granularity {
    Day,
    /// ISO-8601 weeks: Monday start, week 1 holds the year's first Thursday.
    Week,
    Month,
    Year,
}

impl Granularity {
    pub const ALL: [Granularity; 4] = [
        Granularity::Day,
        Granularity::Week,
        Granularity::Month,
        Granularity::Year,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Granularity::Day => "day",
            Granularity::Week => "week",
            Granularity::Month => "month",
            Granularity::Year => "year",
        }
    }
}

impl fmt::Display for Granularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Granularity {
    type Err = QueryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "day" => Ok(Granularity::Day),
            "week" => Ok(Granularity::Week),
            "month" => Ok(Granularity::Month),
            "year" => Ok(Granularity::Year),
            _ => Err(QueryError::InvalidGranularity(s.to_string())),
        }
    }
}

/// One calendar bucket. Keys are zero-padded so that, for four-digit
/// years, lexicographic order is chronological order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PeriodId {
    granularity: Granularity,
    key: String,
}

impl PeriodId {
    pub fn granularity(&self) -> Granularity {
        self.granularity
    }

    /// Canonical key: `YYYY-MM-DD`, `YYYY-Www`, `YYYY-MM` or `YYYY`.
    pub fn key(&self) -> &str {
        &self.key
    }

    /// Parses a canonical key. Returns `None` for anything that would not
    /// round-trip through [`period_of`].
    pub fn parse(granularity: Granularity, key: &str) -> Option<PeriodId> {
        let period = period_of(PeriodId::start_of(granularity, key)?, granularity);
        (period.key == key).then_some(period)
    }

    /// First calendar day of the period.
    pub fn first_day(&self) -> NaiveDate {
        PeriodId::start_of(self.granularity, &self.key).expect("period keys are canonical")
    }

    fn start_of(granularity: Granularity, key: &str) -> Option<NaiveDate> {
        match granularity {
            Granularity::Day => NaiveDate::parse_from_str(key, "%Y-%m-%d").ok(),
            Granularity::Week => {
                let (year, week) = key.split_once("-W")?;
                NaiveDate::from_isoywd_opt(year.parse().ok()?, week.parse().ok()?, Weekday::Mon)
            }
            Granularity::Month => NaiveDate::parse_from_str(&format!("{key}-01"), "%Y-%m-%d").ok(),
            Granularity::Year => NaiveDate::from_ymd_opt(key.parse().ok()?, 1, 1),
        }
    }
}

impl fmt::Display for PeriodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key)
    }
}

/// The bucket `date` falls into at granularity `g`.
pub fn period_of(date: NaiveDate, g: Granularity) -> PeriodId {
    let key = match g {
        Granularity::Day => date.format("%Y-%m-%d").to_string(),
        Granularity::Week => {
            let iso = date.iso_week();
            format!("{:04}-W{:02}", iso.year(), iso.week())
        }
        Granularity::Month => format!("{:04}-{:02}", date.year(), date.month()),
        Granularity::Year => format!("{:04}", date.year()),
    };
    PeriodId {
        granularity: g,
        key,
    }
}

fn period_start(date: NaiveDate, g: Granularity) -> NaiveDate {
    match g {
        Granularity::Day => date,
        Granularity::Week => date - Days::new(u64::from(date.weekday().num_days_from_monday())),
        Granularity::Month => date.with_day(1).unwrap(),
        Granularity::Year => NaiveDate::from_ymd_opt(date.year(), 1, 1).unwrap(),
    }
}

fn next_period_start(start: NaiveDate, g: Granularity) -> Option<NaiveDate> {
    match g {
        Granularity::Day => start.checked_add_days(Days::new(1)),
        Granularity::Week => start.checked_add_days(Days::new(7)),
        Granularity::Month => start.checked_add_months(chrono::Months::new(1)),
        Granularity::Year => start.checked_add_months(chrono::Months::new(12)),
    }
}

/// Every period intersecting `[start, end]`, in chronological order.
pub fn periods_in_range(
    start: NaiveDate,
    end: NaiveDate,
    g: Granularity,
) -> Result<Vec<PeriodId>, QueryError> {
    if start > end {
        return Err(QueryError::InvalidRange {
            start: start.to_string(),
            end: end.to_string(),
        });
    }
    let mut periods = Vec::new();
    let mut cursor = Some(period_start(start, g));
    while let Some(day) = cursor.filter(|d| *d <= end) {
        periods.push(period_of(day, g));
        cursor = next_period_start(day, g);
    }
    Ok(periods)
}

/// Number of entries held by each inverted index.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PostingStats {
    pub period_postings: usize,
    pub entity_postings: usize,
    pub entity_period_postings: usize,
    pub entity_period_cells: usize,
}

/// Inverted indexes over a corpus at one granularity.
///
/// Every posting list is sorted by [`DocIndex`]; entity/period cells are
/// stored only when non-empty.
#[derive(Debug)]
pub struct CorpusIndex<'c> {
    corpus: &'c Corpus,
    granularity: Granularity,
    doc_periods: Vec<PeriodId>,
    docs_by_period: BTreeMap<PeriodId, Vec<DocIndex>>,
    docs_by_entity: BTreeMap<EntityId, Vec<DocIndex>>,
    docs_by_entity_period: BTreeMap<EntityId, BTreeMap<PeriodId, Vec<DocIndex>>>,
}

/// Builds all indexes for `corpus` at granularity `g`.
pub fn build_index(corpus: &Corpus, g: Granularity) -> CorpusIndex<'_> {
    let docs = corpus.documents();
    assert!(docs.len() <= DocIndex::MAX as usize, "corpus too large");
    let mut doc_periods = Vec::with_capacity(docs.len());
    let mut docs_by_period: BTreeMap<PeriodId, Vec<DocIndex>> = BTreeMap::new();
    let mut docs_by_entity: BTreeMap<EntityId, Vec<DocIndex>> = BTreeMap::new();
    let mut docs_by_entity_period: BTreeMap<EntityId, BTreeMap<PeriodId, Vec<DocIndex>>> =
        BTreeMap::new();

    for (i, doc) in docs.iter().enumerate() {
        let i = i as DocIndex;
        let period = period_of(doc.published_at(), g);
        docs_by_period.entry(period.clone()).or_default().push(i);
        for entity in doc.mentions().keys() {
            match docs_by_entity.get_mut(entity) {
                Some(list) => list.push(i),
                None => {
                    docs_by_entity.insert(entity.clone(), vec![i]);
                }
            }
            let cells = match docs_by_entity_period.get_mut(entity) {
                Some(cells) => cells,
                None => docs_by_entity_period.entry(entity.clone()).or_default(),
            };
            match cells.get_mut(&period) {
                Some(list) => list.push(i),
                None => {
                    cells.insert(period.clone(), vec![i]);
                }
            }
        }
        doc_periods.push(period);
    }

    CorpusIndex {
        corpus,
        granularity: g,
        doc_periods,
        docs_by_period,
        docs_by_entity,
        docs_by_entity_period,
    }
}

impl<'c> CorpusIndex<'c> {
    pub fn corpus(&self) -> &'c Corpus {
        self.corpus
    }

    pub fn granularity(&self) -> Granularity {
        self.granularity
    }

    pub fn len(&self) -> usize {
        self.doc_periods.len()
    }

    pub fn is_empty(&self) -> bool {
        self.doc_periods.is_empty()
    }

    pub fn document(&self, doc: DocIndex) -> &'c Document {
        &self.corpus.documents()[doc as usize]
    }

    pub fn doc_index(&self, id: &str) -> Option<DocIndex> {
        self.corpus
            .documents()
            .binary_search_by(|d| d.id().cmp(id))
            .ok()
            .map(|i| i as DocIndex)
    }

    /// Period the document was published in.
    pub fn doc_period(&self, doc: DocIndex) -> &PeriodId {
        &self.doc_periods[doc as usize]
    }

    /// `D_p`: documents published during `period`.
    pub fn docs_in_period(&self, period: &PeriodId) -> &[DocIndex] {
        self.docs_by_period.get(period).map_or(&[], Vec::as_slice)
    }

    /// `D_e`: documents mentioning `entity`, corpus-wide.
    pub fn docs_with_entity(&self, entity: &EntityId) -> &[DocIndex] {
        self.docs_by_entity.get(entity).map_or(&[], Vec::as_slice)
    }

    /// `D_{e,p}`: documents mentioning `entity` published during `period`.
    pub fn docs_with_entity_in_period(&self, entity: &EntityId, period: &PeriodId) -> &[DocIndex] {
        self.docs_by_entity_period
            .get(entity)
            .and_then(|cells| cells.get(period))
            .map_or(&[], Vec::as_slice)
    }

    /// Non-empty `D_{e,p}` cells for `entity`, in period order.
    pub fn entity_periods(
        &self,
        entity: &EntityId,
    ) -> impl Iterator<Item = (&PeriodId, &[DocIndex])> + '_ {
        self.docs_by_entity_period
            .get(entity)
            .into_iter()
            .flat_map(|cells| cells.iter().map(|(p, d)| (p, d.as_slice())))
    }

    /// Non-empty periods with their document lists, chronologically.
    pub fn periods(&self) -> impl Iterator<Item = (&PeriodId, &[DocIndex])> + '_ {
        self.docs_by_period.iter().map(|(p, d)| (p, d.as_slice()))
    }

    pub fn entities(&self) -> impl Iterator<Item = (&EntityId, &[DocIndex])> + '_ {
        self.docs_by_entity.iter().map(|(e, d)| (e, d.as_slice()))
    }

    pub fn posting_stats(&self) -> PostingStats {
        PostingStats {
            period_postings: self.docs_by_period.values().map(Vec::len).sum(),
            entity_postings: self.docs_by_entity.values().map(Vec::len).sum(),
            entity_period_postings: self
                .docs_by_entity_period
                .values()
                .flat_map(BTreeMap::values)
                .map(Vec::len)
                .sum(),
            entity_period_cells: self.docs_by_entity_period.values().map(BTreeMap::len).sum(),
        }
    }
}

/// Size of the intersection of two ascending lists.
pub(crate) fn intersection_len(a: &[DocIndex], b: &[DocIndex]) -> usize {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    if small.len() * 16 < large.len() {
        return small.iter().filter(|x| large.binary_search(x).is_ok()).count();
    }
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < small.len() && j < large.len() {
        match small[i].cmp(&large[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;

    fn date(y: i32, m: u32, d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, d).unwrap()
    }

    fn keys(periods: &[PeriodId]) -> Vec<&str> {
        periods.iter().map(PeriodId::key).collect()
    }

    fn doc(id: &str, d: NaiveDate, mentions: &[(&str, u32)]) -> Document {
        Document::new(
            id,
            d,
            mentions.iter().map(|(e, c)| (EntityId::new(*e).unwrap(), *c)),
        )
        .unwrap()
    }

    #[test]
    fn granularity_tokens() {
        for g in Granularity::ALL {
            assert_eq!(g.as_str().parse::<Granularity>().unwrap(), g);
        }
        assert!("Month".parse::<Granularity>().is_err());
        assert!("quarter".parse::<Granularity>().is_err());
    }

    #[test]
    fn period_keys() {
        assert_eq!(period_of(date(1990, 2, 11), Granularity::Month).key(), "1990-02");
        assert_eq!(period_of(date(1990, 2, 11), Granularity::Year).key(), "1990");
        assert_eq!(period_of(date(1990, 2, 11), Granularity::Day).key(), "1990-02-11");
        // 1990-01-01 is a Monday.
        assert_eq!(period_of(date(1990, 1, 1), Granularity::Week).key(), "1990-W01");
        // Belongs to the last ISO week of the previous year.
        assert_eq!(period_of(date(2021, 1, 3), Granularity::Week).key(), "2020-W53");
        assert_eq!(period_of(date(2024, 12, 30), Granularity::Week).key(), "2025-W01");
    }

    #[test]
    fn periods_in_range_examples() {
        let months = periods_in_range(date(1990, 1, 1), date(1990, 12, 31), Granularity::Month).unwrap();
        assert_eq!(months.len(), 12);
        assert_eq!(months[0].key(), "1990-01");
        assert_eq!(months[11].key(), "1990-12");

        let one = periods_in_range(date(1990, 3, 15), date(1990, 3, 15), Granularity::Day).unwrap();
        assert_eq!(keys(&one), ["1990-03-15"]);

        let weeks = periods_in_range(date(1989, 12, 30), date(1990, 1, 2), Granularity::Week).unwrap();
        assert_eq!(keys(&weeks), ["1989-W52", "1990-W01"]);

        let years = periods_in_range(date(1989, 12, 31), date(1991, 1, 1), Granularity::Year).unwrap();
        assert_eq!(keys(&years), ["1989", "1990", "1991"]);

        assert!(matches!(
            periods_in_range(date(1990, 6, 1), date(1990, 1, 1), Granularity::Month),
            Err(QueryError::InvalidRange { .. })
        ));
    }

    #[test]
    fn period_key_round_trip() {
        for g in Granularity::ALL {
            let mut day = date(1988, 12, 20);
            while day < date(1992, 1, 15) {
                let p = period_of(day, g);
                assert_eq!(PeriodId::parse(g, p.key()), Some(p.clone()));
                assert_eq!(period_of(p.first_day(), g), p);
                assert!(p.first_day() <= day);
                day = day.succ_opt().unwrap();
            }
        }
        assert_eq!(PeriodId::parse(Granularity::Week, "1990-W1"), None);
        assert_eq!(PeriodId::parse(Granularity::Month, "1990-2"), None);
        assert_eq!(PeriodId::parse(Granularity::Week, "1990-W53"), None);
    }

    #[test]
    fn empty_index() {
        let corpus = Corpus::default();
        let idx = build_index(&corpus, Granularity::Month);
        assert!(idx.is_empty());
        assert_eq!(idx.periods().count(), 0);
        assert_eq!(idx.entities().count(), 0);
        assert_eq!(idx.posting_stats(), PostingStats::default());
    }

    #[test]
    fn single_document_index() {
        let corpus = Corpus::new(vec![doc("d", date(1990, 2, 11), &[("A", 2)])], Default::default())
            .unwrap();
        let idx = build_index(&corpus, Granularity::Month);
        let feb = PeriodId::parse(Granularity::Month, "1990-02").unwrap();
        let a = EntityId::new("A").unwrap();
        assert_eq!(idx.docs_in_period(&feb), [0]);
        assert_eq!(idx.docs_with_entity(&a), [0]);
        assert_eq!(idx.docs_with_entity_in_period(&a, &feb), [0]);
        assert_eq!(idx.document(0).id(), "d");
    }

    #[test]
    fn three_docs_two_months() {
        let corpus = Corpus::new(
            vec![
                doc("x", date(1990, 1, 31), &[("A", 1)]),
                doc("y", date(1990, 2, 1), &[("A", 1), ("B", 1)]),
                doc("z", date(1990, 1, 2), &[("B", 3)]),
            ],
            Default::default(),
        )
        .unwrap();
        let idx = build_index(&corpus, Granularity::Month);
        let sizes: Vec<(String, usize)> = idx
            .periods()
            .map(|(p, d)| (p.key().to_string(), d.len()))
            .collect();
        assert_eq!(sizes, [("1990-01".to_string(), 2), ("1990-02".to_string(), 1)]);
        let jan = PeriodId::parse(Granularity::Month, "1990-01").unwrap();
        let b = EntityId::new("B").unwrap();
        // ids sort x, y, z
        assert_eq!(idx.docs_with_entity_in_period(&b, &jan), [2]);
        assert_eq!(idx.docs_with_entity(&b), [1, 2]);
    }

    #[test]
    fn intersection_len_both_strategies() {
        let a: Vec<DocIndex> = (0..1000).step_by(3).collect();
        let b: Vec<DocIndex> = (0..1000).step_by(5).collect();
        assert_eq!(intersection_len(&a, &b), (0..1000).step_by(15).count());
        assert_eq!(intersection_len(&[15, 30, 998], &a), 2);
        assert_eq!(intersection_len(&[], &a), 0);
    }
}
