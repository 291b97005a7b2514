//! Shared helpers for integration and acceptance tests.
#![allow(dead_code)]

use disamb_core::career_metrics::{build_report, histogram_csv, report_csv, tti_distribution, MetricConfig};
use disamb_core::continent::ContinentMap;
use disamb_core::corpus_model::{
    work_to_json_line, AuthorshipRecord, ConceptTag, FilterConfig, Institution, Position, WorkRecord,
};
use disamb_core::gender::{annotate, GenderDictionary, Thresholds};
use disamb_core::ingest::{Ingestor, LineSource};
use disamb_core::oracle::{oracle_report, OracleInputs};
use disamb_core::table::careers_tsv;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Career table, cohort report and histogram, all rendered.
#[derive(Debug, PartialEq, Eq)]
pub struct Rendered {
    pub careers: String,
    pub report: String,
    pub histogram: String,
}

pub struct Setup {
    pub filter: FilterConfig,
    pub metrics: MetricConfig,
    pub continents: ContinentMap,
    pub gender: Option<(GenderDictionary, Thresholds)>,
}

impl Default for Setup {
    fn default() -> Self {
        Self {
            filter: FilterConfig::default(),
            metrics: MetricConfig::default(),
            continents: ContinentMap::builtin(),
            gender: None,
        }
    }
}

pub fn jsonl(corpus: &[WorkRecord]) -> Vec<String> {
    corpus.iter().map(work_to_json_line).collect()
}

/// Streaming pipeline over `shards` in-memory sources.
pub fn run_pipeline(lines: &[String], shards: usize, threads: usize, setup: &Setup) -> Rendered {
    let per = lines.len().div_ceil(shards.max(1)).max(1);
    let sources: Vec<LineSource> = lines
        .chunks(per)
        .enumerate()
        .map(|(i, c)| LineSource::memory(format!("shard{i}"), c.join("\n").into_bytes()))
        .collect();
    let (finalized, _) = Ingestor::new(setup.filter.clone(), threads)
        .run(&sources, &setup.continents, |_| Ok(()))
        .expect("ingest");
    let mut careers = finalized.careers;
    if let Some((dict, t)) = &setup.gender {
        annotate(&mut careers, dict, t);
    }
    let report = build_report(&careers, &setup.metrics).expect("report");
    Rendered {
        careers: careers_tsv(&careers),
        report: report_csv(&report),
        histogram: histogram_csv(&tti_distribution(&careers)),
    }
}

pub fn run_oracle(lines: &[String], setup: &Setup) -> Rendered {
    let inputs = OracleInputs {
        filter: &setup.filter,
        metrics: &setup.metrics,
        continents: &setup.continents,
        gender: setup.gender.as_ref().map(|(d, t)| (d, t)),
    };
    let out = oracle_report(lines.iter().map(String::as_str), &inputs).expect("oracle");
    Rendered {
        careers: careers_tsv(&out.careers),
        report: report_csv(&out.report),
        histogram: histogram_csv(&out.histogram),
    }
}

const NAMES: &[&str] = &["Ana Ruiz", "A. Ruiz", "Bo Chen", "Chen Bo", "Dee", "Élodie Martin", "Ivan Petrov", ""];
const COUNTRIES: &[Option<&str>] = &[Some("US"), Some("fr"), Some("JP"), Some("BR"), Some("ZZ"), None];
const CONCEPTS: &[(&str, Option<u32>)] = &[
    ("C86803240", Some(0)),
    ("C71924100", Some(0)),
    ("C86803240", Some(1)),
    ("C41008148", Some(0)),
    ("C71924100", None),
];

/// Random multi-author works that exercise every filter and aggregation edge.
///
/// Authors come from `pool` when it is non-empty, otherwise from a small
/// generated pool so that ids collide across works.
pub fn messy_corpus(seed: u64, n_works: usize, pool: &[String], id_prefix: &str) -> Vec<WorkRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let own: Vec<String> = (0..(n_works / 3).max(4)).map(|i| format!("M{i}")).collect();
    let pool = if pool.is_empty() { &own[..] } else { pool };
    let mut out = Vec::with_capacity(n_works);
    for k in 0..n_works {
        let n_auth = rng.gen_range(0..=5);
        let labeled = rng.gen_bool(0.7);
        let authorships: Vec<AuthorshipRecord> = (0..n_auth)
            .map(|i| {
                let author_id = (!rng.gen_bool(0.05)).then(|| pool.choose(&mut rng).unwrap().clone());
                let position = if labeled {
                    Some(match (n_auth, i) {
                        (1, _) if rng.gen_bool(0.5) => Position::First,
                        (1, _) => Position::Solo,
                        (_, 0) => Position::First,
                        (n, i) if i + 1 == n => Position::Last,
                        _ => Position::Middle,
                    })
                } else {
                    None
                };
                let institutions = (0..rng.gen_range(0..3))
                    .map(|j| Institution {
                        institution_id: format!("I{j}"),
                        country_code: COUNTRIES.choose(&mut rng).unwrap().map(|c| c.to_ascii_uppercase()),
                    })
                    .collect();
                AuthorshipRecord {
                    author_id,
                    display_name: NAMES.choose(&mut rng).unwrap().to_string(),
                    position,
                    orcid: rng.gen_bool(0.2).then(|| "https://orcid.org/0000-0001".to_string()),
                    institutions,
                }
            })
            .collect();
        let concepts = (0..rng.gen_range(0..3))
            .map(|_| {
                let (id, level) = *CONCEPTS.choose(&mut rng).unwrap();
                ConceptTag { concept_id: id.into(), level }
            })
            .collect();
        out.push(WorkRecord {
            work_id: format!("{id_prefix}{k}"),
            publication_year: (!rng.gen_bool(0.03)).then(|| rng.gen_range(1994..=2022)),
            work_type: if rng.gen_bool(0.9) { "article".into() } else { "review".into() },
            is_retracted: rng.gen_bool(0.03),
            is_paratext: rng.gen_bool(0.03),
            source_type: match rng.gen_range(0..10) {
                0 => None,
                1 => Some("repository".into()),
                _ => Some("journal".into()),
            },
            concepts,
            authorships,
        });
    }
    out
}
