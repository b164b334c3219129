//! Seeded synthetic corpora for benchmarks and randomized testing.

use chrono::{Days, NaiveDate};
use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Corpus, Document, EntityCatalog, EntityId};

#[derive(Clone, Debug)]
pub struct SynthConfig {
    pub documents: usize,
    pub entities: usize,
    /// First and last publication date, inclusive.
    pub first_date: NaiveDate,
    pub last_date: NaiveDate,
    /// Distinct entities per document are drawn from `1..=max_entities_per_doc`.
    pub max_entities_per_doc: usize,
    pub max_count: u32,
    /// Exponent of the Zipf-like entity popularity; 0 is uniform.
    pub skew: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            documents: 1_000,
            entities: 100,
            first_date: NaiveDate::from_ymd_opt(1990, 1, 1).unwrap(),
            last_date: NaiveDate::from_ymd_opt(1990, 12, 31).unwrap(),
            max_entities_per_doc: 8,
            max_count: 5,
            skew: 1.0,
        }
    }
}

/// Name of the `i`-th synthetic entity.
pub fn entity(i: usize) -> EntityId {
    EntityId::new(format!("ent:{i:05}")).expect("well-formed id")
}

/// Name of the `i`-th synthetic document.
pub fn document_id(i: usize) -> String {
    format!("doc-{i:07}")
}

/// Generates a corpus. Equal configs and seeds give equal corpora.
pub fn synth_corpus(config: &SynthConfig, seed: u64) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let span = (config.last_date - config.first_date).num_days().max(0) as u64;
    let documents = if config.entities == 0 {
        (0..config.documents)
            .map(|i| {
                let day = config.first_date + Days::new(rng.gen_range(0..=span));
                Document::new(document_id(i), day, []).expect("valid document")
            })
            .collect()
    } else {
        let weights: Vec<f64> = (0..config.entities)
            .map(|i| 1.0 / ((i + 1) as f64).powf(config.skew))
            .collect();
        let popularity = WeightedIndex::new(&weights).expect("positive weights");
        let per_doc = config.max_entities_per_doc.clamp(1, config.entities);
        (0..config.documents)
            .map(|i| {
                let day = config.first_date + Days::new(rng.gen_range(0..=span));
                let wanted = rng.gen_range(1..=per_doc);
                let mut picked = std::collections::BTreeSet::new();
                // bounded so a heavy skew cannot stall generation
                for _ in 0..wanted * 8 {
                    if picked.len() == wanted {
                        break;
                    }
                    picked.insert(popularity.sample(&mut rng));
                }
                let mentions: Vec<(EntityId, u32)> = picked
                    .into_iter()
                    .map(|e| (entity(e), rng.gen_range(1..=config.max_count.max(1))))
                    .collect();
                Document::new(document_id(i), day, mentions).expect("valid document")
            })
            .collect()
    };
    Corpus::new(documents, EntityCatalog::new()).expect("ids are unique")
}
