//! Synthetic corpora with known careers, and identity-split error injection.
//!
//! Career model (all knobs in [`SynthConfig`]):
//! - debut year uniform over the configured range, with at least one paper
//!   in the debut year. The default range starts well before a 2000-2018
//!   audit cohort so that corpora carry established careers as well;
//! - papers per active year ~ Poisson(`papers_per_year`);
//! - a fraction `pi_fraction` of authors become PIs. Training lasts
//!   0 years with probability `immediate_pi_rate`, otherwise
//!   1 + Geometric(1 / `training_mean_years`) years (mean `training_mean_years`).
//!   From the independence year on, papers are last-author with probability
//!   `pi_last_author_share`, and the independence year always holds at least
//!   one last-author paper. PIs publish until `horizon_year`;
//! - non-PIs publish for 1 + Geometric(1 / `training_mean_years`) years and never
//!   hold last authorship.
//!
//! Every emitted work is an eligible biomedical journal article with a single
//! explicitly positioned authorship.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric, Poisson};

use crate::corpus_model::{
    AuthorshipRecord, ConceptTag, Institution, Position, WorkRecord, BIOLOGY_CONCEPT,
    MEDICINE_CONCEPT,
};
use crate::error::{Error, Result};

const GIVEN_NAMES: &[&str] = &[
    "Maria", "John", "Wei", "Anna", "David", "Laura", "Hiroshi", "Fatima", "Carlos", "Sofia",
    "Michael", "Elena", "Ahmed", "Julia", "Pierre", "Ingrid", "Rajesh", "Emma", "Lucas", "Chloe",
    "Kenji", "Olga", "Thomas", "Priya", "Alex", "Jordan", "Min", "Sasha", "Robin", "Yuki",
];

const FAMILY_NAMES: &[&str] = &[
    "Smith", "Garcia", "Zhang", "Müller", "Rossi", "Kim", "Nguyen", "Silva", "Kowalski", "Tanaka",
    "Okafor", "Dubois", "Johansson", "Patel", "Ivanova", "Hernández",
];

const COUNTRIES: &[&str] = &["US", "CN", "GB", "DE", "JP", "BR", "IN", "FR", "AU", "NG", "CA", "KR"];

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub n_authors: u64,
    pub debut_first: i32,
    pub debut_last: i32,
    /// Last year anyone publishes.
    pub horizon_year: i32,
    pub training_mean_years: f64,
    pub papers_per_year: f64,
    pub pi_fraction: f64,
    pub immediate_pi_rate: f64,
    pub pi_last_author_share: f64,
    pub affiliation_presence_rate: f64,
    pub orcid_presence_rate: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_authors: 1000,
            debut_first: 1980,
            debut_last: 2018,
            horizon_year: 2023,
            training_mean_years: 8.0,
            papers_per_year: 2.0,
            pi_fraction: 0.3,
            immediate_pi_rate: 0.01,
            pi_last_author_share: 0.8,
            affiliation_presence_rate: 0.6,
            orcid_presence_rate: 0.3,
            seed: 0,
        }
    }
}

fn check_probability(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be in [0, 1], got {p}")))
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        check_probability("pi_fraction", self.pi_fraction)?;
        check_probability("immediate_pi_rate", self.immediate_pi_rate)?;
        check_probability("pi_last_author_share", self.pi_last_author_share)?;
        check_probability("affiliation_presence_rate", self.affiliation_presence_rate)?;
        check_probability("orcid_presence_rate", self.orcid_presence_rate)?;
        if self.debut_first > self.debut_last {
            return Err(Error::Config(format!(
                "empty debut range {}..={}",
                self.debut_first, self.debut_last
            )));
        }
        if self.horizon_year < self.debut_last {
            return Err(Error::Config(format!(
                "horizon {} precedes the last debut year {}",
                self.horizon_year, self.debut_last
            )));
        }
        if !self.training_mean_years.is_finite() || self.training_mean_years < 1.0 {
            return Err(Error::Config(format!(
                "training_mean_years must be a finite value >= 1, got {}",
                self.training_mean_years
            )));
        }
        if !self.papers_per_year.is_finite() || self.papers_per_year <= 0.0 {
            return Err(Error::Config(format!(
                "papers_per_year must be positive, got {}",
                self.papers_per_year
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruthWork {
    pub work_id: String,
    pub year: i32,
    pub position: Position,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrueAuthor {
    pub true_id: String,
    pub debut_year: i32,
    /// `None` for authors who never reach last authorship before the horizon.
    pub independence_year: Option<i32>,
    pub works: Vec<TruthWork>,
    pub split_year: Option<i32>,
    /// One id, or two once split: the second owns every work from `split_year` on.
    pub emitted_ids: Vec<String>,
}

impl TrueAuthor {
    pub fn is_anomalous(&self) -> bool {
        self.independence_year == Some(self.debut_year)
    }

    /// Emitted id that owns a work published in `year`.
    pub fn owner_for_year(&self, year: i32) -> &str {
        match self.split_year {
            Some(split) if year >= split => &self.emitted_ids[1],
            _ => &self.emitted_ids[0],
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GroundTruth {
    pub authors: Vec<TrueAuthor>,
}

impl GroundTruth {
    pub fn emitted_to_true(&self) -> BTreeMap<&str, &str> {
        self.authors
            .iter()
            .flat_map(|a| a.emitted_ids.iter().map(move |e| (e.as_str(), a.true_id.as_str())))
            .collect()
    }

    pub fn n_emitted(&self) -> usize {
        self.authors.iter().map(|a| a.emitted_ids.len()).sum()
    }

    pub fn n_splits(&self) -> usize {
        self.authors.iter().filter(|a| a.split_year.is_some()).count()
    }

    pub const TSV_HEADER: &'static str =
        "true_author_id\temitted_author_id\tdebut_year\tindependence_year\tsplit_year";

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        out.push_str(Self::TSV_HEADER);
        out.push('\n');
        for a in &self.authors {
            for e in &a.emitted_ids {
                let _ = writeln!(
                    out,
                    "{}\t{}\t{}\t{}\t{}",
                    a.true_id,
                    e,
                    a.debut_year,
                    a.independence_year.map(|y| y.to_string()).unwrap_or_default(),
                    a.split_year.map(|y| y.to_string()).unwrap_or_default()
                );
            }
        }
        out
    }
}

fn training_years(rng: &mut ChaCha8Rng, geo: &Geometric) -> i32 {
    1 + geo.sample(rng).min(200) as i32
}

/// Builds a corpus and its ground truth. Deterministic for a given config.
pub fn generate(cfg: &SynthConfig) -> Result<(Vec<WorkRecord>, GroundTruth)> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let geo = Geometric::new(1.0 / cfg.training_mean_years)
        .map_err(|e| Error::Config(e.to_string()))?;
    let poisson = Poisson::new(cfg.papers_per_year).map_err(|e| Error::Config(e.to_string()))?;

    let mut corpus = Vec::new();
    let mut truth = GroundTruth::default();
    let mut next_work = 0u64;

    for i in 0..cfg.n_authors {
        let true_id = format!("A{i}");
        let display_name = format!(
            "{} {}",
            GIVEN_NAMES[rng.gen_range(0..GIVEN_NAMES.len())],
            FAMILY_NAMES[rng.gen_range(0..FAMILY_NAMES.len())]
        );
        let institution = rng.gen_bool(cfg.affiliation_presence_rate).then(|| {
            let k = rng.gen_range(0..COUNTRIES.len() * 8);
            Institution {
                institution_id: format!("I{k}"),
                country_code: Some(COUNTRIES[k % COUNTRIES.len()].to_string()),
            }
        });
        let orcid = rng
            .gen_bool(cfg.orcid_presence_rate)
            .then(|| format!("https://orcid.org/0000-0002-{:04}-{:04}", i / 10_000, i % 10_000));

        let debut = rng.gen_range(cfg.debut_first..=cfg.debut_last);
        let is_pi = rng.gen_bool(cfg.pi_fraction);
        let (independence, last_active) = if is_pi {
            let dur = if rng.gen_bool(cfg.immediate_pi_rate) {
                0
            } else {
                training_years(&mut rng, &geo)
            };
            let indep = debut.saturating_add(dur);
            ((indep <= cfg.horizon_year).then_some(indep), cfg.horizon_year)
        } else {
            let len = training_years(&mut rng, &geo);
            (None, (debut + len - 1).min(cfg.horizon_year))
        };

        let mut works = Vec::new();
        for year in debut..=last_active {
            let mut n = poisson.sample(&mut rng) as u64;
            if year == debut {
                n = n.max(1);
            }
            if Some(year) == independence {
                n = n.max(1);
            }
            for k in 0..n {
                let independent = independence.is_some_and(|y| year >= y);
                let position = if independent {
                    if (k == 0 && Some(year) == independence) || rng.gen_bool(cfg.pi_last_author_share) {
                        Position::Last
                    } else {
                        Position::Middle
                    }
                } else if rng.gen_bool(0.5) {
                    Position::First
                } else {
                    Position::Middle
                };
                let work_id = format!("W{next_work}");
                next_work += 1;
                let concept = if rng.gen_bool(0.5) {
                    BIOLOGY_CONCEPT
                } else {
                    MEDICINE_CONCEPT
                };
                corpus.push(WorkRecord {
                    work_id: work_id.clone(),
                    publication_year: Some(year),
                    work_type: "article".into(),
                    is_retracted: false,
                    is_paratext: false,
                    source_type: Some("journal".into()),
                    concepts: vec![ConceptTag {
                        concept_id: concept.into(),
                        level: Some(0),
                    }],
                    authorships: vec![AuthorshipRecord {
                        author_id: Some(true_id.clone()),
                        display_name: display_name.clone(),
                        position: Some(position),
                        orcid: orcid.clone(),
                        institutions: institution.iter().cloned().collect(),
                    }],
                });
                works.push(TruthWork {
                    work_id,
                    year,
                    position,
                });
            }
        }
        truth.authors.push(TrueAuthor {
            emitted_ids: vec![true_id.clone()],
            true_id,
            debut_year: debut,
            independence_year: independence,
            works,
            split_year: None,
        });
    }
    Ok((corpus, truth))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub split_rate: f64,
}

impl SplitSpec {
    pub fn new(split_rate: f64) -> Result<Self> {
        check_probability("split_rate", split_rate)?;
        Ok(Self { split_rate })
    }
}

/// Splits selected authors into two profiles at a year strictly after debut.
///
/// Each true author draws its selection uniform and split point from the
/// seeded stream whatever the rate, so for a fixed seed the set of split
/// authors at rate `s` is contained in the set at any larger rate.
pub fn inject_splits(
    corpus: &[WorkRecord],
    truth: &GroundTruth,
    spec: SplitSpec,
    seed: u64,
) -> (Vec<WorkRecord>, GroundTruth) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5b11_7e55_d15a_3b16);
    let mut taken: HashSet<String> = truth
        .authors
        .iter()
        .flat_map(|a| a.emitted_ids.iter().cloned())
        .collect();
    let mut new_truth = truth.clone();
    let mut reassign: HashMap<&str, (String, String)> = HashMap::new();

    for (author, old) in new_truth.authors.iter_mut().zip(&truth.authors) {
        let u: f64 = rng.gen();
        let pick: u64 = rng.gen();
        if author.split_year.is_some() || u >= spec.split_rate {
            continue;
        }
        let later_years: Vec<i32> = old
            .works
            .iter()
            .map(|w| w.year)
            .filter(|&y| y > old.debut_year)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        if later_years.is_empty() {
            continue;
        }
        let split = later_years[(pick % later_years.len() as u64) as usize];
        let from = old.emitted_ids[0].clone();
        let mut fresh = format!("{from}-2");
        let mut bump = 2;
        while taken.contains(&fresh) {
            bump += 1;
            fresh = format!("{from}-{bump}");
        }
        taken.insert(fresh.clone());
        for w in old.works.iter().filter(|w| w.year >= split) {
            reassign.insert(w.work_id.as_str(), (from.clone(), fresh.clone()));
        }
        author.split_year = Some(split);
        author.emitted_ids.push(fresh);
    }

    let corrupted = corpus
        .iter()
        .map(|w| {
            let mut w = w.clone();
            if let Some((from, to)) = reassign.get(w.work_id.as_str()) {
                for a in &mut w.authorships {
                    if a.author_id.as_deref() == Some(from.as_str()) {
                        a.author_id = Some(to.clone());
                    }
                }
            }
            w
        })
        .collect();
    (corrupted, new_truth)
}

/// JSON Lines rendering of a corpus, one work per line.
pub fn corpus_jsonl(corpus: &[WorkRecord]) -> String {
    let mut out = String::with_capacity(corpus.len() * 400);
    for w in corpus {
        out.push_str(&crate::corpus_model::work_to_json_line(w));
        out.push('\n');
    }
    out
}
