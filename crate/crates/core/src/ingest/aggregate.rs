//! Mergeable per-shard state for the two ingest passes.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap, HashSet};

use serde::Serialize;

use crate::corpus_model::{is_last_author, FilterConfig, WorkRecord};
use crate::error::ParseError;

/// Associative, commutative combination with `Default` as the identity.
pub trait Merge: Default {
    fn merge(self, other: Self) -> Self;
}

/// Authors holding at least one eligible biomedical work.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AuthorSet {
    members: HashSet<Box<str>>,
}

impl AuthorSet {
    pub fn insert(&mut self, author_id: &str) {
        if !self.members.contains(author_id) {
            self.members.insert(author_id.into());
        }
    }

    pub fn contains(&self, author_id: &str) -> bool {
        self.members.contains(author_id)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn sorted_ids(&self) -> Vec<&str> {
        let mut ids: Vec<&str> = self.members.iter().map(|s| &**s).collect();
        ids.sort_unstable();
        ids
    }

    /// Adds every linked author on the work.
    pub fn absorb_work(&mut self, work: &WorkRecord) {
        for a in &work.authorships {
            if let Some(id) = a.author_id.as_deref() {
                self.insert(id);
            }
        }
    }
}

impl FromIterator<String> for AuthorSet {
    fn from_iter<T: IntoIterator<Item = String>>(iter: T) -> Self {
        Self {
            members: iter.into_iter().map(String::into_boxed_str).collect(),
        }
    }
}

impl Merge for AuthorSet {
    fn merge(self, other: Self) -> Self {
        let (mut big, small) = if self.members.len() >= other.members.len() {
            (self, other)
        } else {
            (other, self)
        };
        big.members.extend(small.members);
        big
    }
}

/// Most recent institutioned work seen for an author.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstitutionWitness {
    pub year: i32,
    pub work_id: String,
    pub country_code: Option<String>,
}

impl InstitutionWitness {
    /// Total order in which the preferred witness sorts first: later year,
    /// then smaller work id, then a present country before an absent one.
    fn preference(&self, other: &Self) -> Ordering {
        other
            .year
            .cmp(&self.year)
            .then_with(|| self.work_id.cmp(&other.work_id))
            .then_with(|| match (&self.country_code, &other.country_code) {
                (Some(a), Some(b)) => a.cmp(b),
                (Some(_), None) => Ordering::Less,
                (None, Some(_)) => Ordering::Greater,
                (None, None) => Ordering::Equal,
            })
    }

    fn pick(a: Option<Self>, b: Option<Self>) -> Option<Self> {
        match (a, b) {
            (Some(a), Some(b)) => Some(if a.preference(&b) == Ordering::Greater {
                b
            } else {
                a
            }),
            (a, b) => a.or(b),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuthorEntry {
    pub min_year: i32,
    pub min_last_year: Option<i32>,
    pub n_works: u64,
    pub any_affiliation: bool,
    pub any_orcid: bool,
    pub latest_institution: Option<InstitutionWitness>,
    pub name_counts: BTreeMap<String, u64>,
}

impl AuthorEntry {
    fn merge(mut self, other: Self) -> Self {
        self.min_year = self.min_year.min(other.min_year);
        self.min_last_year = match (self.min_last_year, other.min_last_year) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        self.n_works += other.n_works;
        self.any_affiliation |= other.any_affiliation;
        self.any_orcid |= other.any_orcid;
        self.latest_institution =
            InstitutionWitness::pick(self.latest_institution, other.latest_institution);
        for (name, count) in other.name_counts {
            *self.name_counts.entry(name).or_insert(0) += count;
        }
        self
    }

    /// Most frequent display name; ties go to the lexicographically smallest.
    pub fn preferred_name(&self) -> Option<&str> {
        self.name_counts
            .iter()
            .max_by(|(na, ca), (nb, cb)| ca.cmp(cb).then_with(|| nb.cmp(na)))
            .map(|(n, _)| n.as_str())
    }
}

/// Per-author career accumulators keyed by author id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PartialAggregate {
    entries: HashMap<Box<str>, AuthorEntry>,
}

impl PartialAggregate {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, author_id: &str) -> Option<&AuthorEntry> {
        self.entries.get(author_id)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &AuthorEntry)> {
        self.entries.iter().map(|(k, v)| (&**k, v))
    }

    pub fn into_entries(self) -> impl Iterator<Item = (String, AuthorEntry)> {
        self.entries.into_iter().map(|(k, v)| (k.into_string(), v))
    }

    /// Inserts or merges a single entry.
    pub fn add_entry(&mut self, author_id: &str, entry: AuthorEntry) {
        match self.entries.get_mut(author_id) {
            Some(existing) => {
                let prev = std::mem::replace(existing, placeholder());
                *existing = prev.merge(entry);
            }
            None => {
                self.entries.insert(author_id.into(), entry);
            }
        }
    }

    /// Folds one eligible work into the entries of every member on its byline.
    /// An author listed twice on a work counts the work once.
    pub fn absorb_work(&mut self, work: &WorkRecord, authors: &AuthorSet, cfg: &FilterConfig) {
        let Some(year) = work.publication_year else {
            return;
        };
        let mut counted: HashSet<&str> = HashSet::new();
        for a in &work.authorships {
            let Some(id) = a.author_id.as_deref() else {
                continue;
            };
            if !authors.contains(id) {
                continue;
            }
            let first_sighting = counted.insert(id);
            let witness = (!a.institutions.is_empty()).then(|| InstitutionWitness {
                year,
                work_id: work.work_id.clone(),
                country_code: a.country_code().map(str::to_string),
            });
            let mut name_counts = BTreeMap::new();
            if !a.display_name.trim().is_empty() {
                name_counts.insert(a.display_name.clone(), 1);
            }
            let contribution = AuthorEntry {
                min_year: year,
                min_last_year: is_last_author(a, cfg).then_some(year),
                n_works: u64::from(first_sighting),
                any_affiliation: !a.institutions.is_empty(),
                any_orcid: a.has_orcid(),
                latest_institution: witness,
                name_counts,
            };
            match self.entries.get_mut(id) {
                Some(existing) => {
                    let prev = std::mem::replace(existing, placeholder());
                    *existing = prev.merge(contribution);
                }
                None => {
                    self.entries.insert(id.into(), contribution);
                }
            }
        }
    }
}

fn placeholder() -> AuthorEntry {
    AuthorEntry {
        min_year: i32::MAX,
        min_last_year: None,
        n_works: 0,
        any_affiliation: false,
        any_orcid: false,
        latest_institution: None,
        name_counts: BTreeMap::new(),
    }
}

impl Merge for PartialAggregate {
    fn merge(self, other: Self) -> Self {
        let (mut big, small) = if self.entries.len() >= other.entries.len() {
            (self, other)
        } else {
            (other, self)
        };
        for (id, entry) in small.entries {
            match big.entries.get_mut(&id) {
                Some(existing) => {
                    let prev = std::mem::replace(existing, placeholder());
                    *existing = prev.merge(entry);
                }
                None => {
                    big.entries.insert(id, entry);
                }
            }
        }
        big
    }
}

const MAX_ERROR_SAMPLES: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct ParseDiagnostic {
    pub source: usize,
    pub line: u64,
    pub message: String,
}

/// Line and work counters for one pass.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ScanStats {
    /// Non-blank lines.
    pub lines_read: u64,
    pub blank_lines: u64,
    pub parse_errors: u64,
    pub works_missing_year: u64,
    pub works_eligible: u64,
    /// Eligible works that also carry a biomedical concept.
    pub works_biomedical: u64,
    /// Eligible works with at least one selected author on the byline.
    pub works_matched: u64,
    /// The earliest few parse failures by (source, line).
    pub error_samples: Vec<ParseDiagnostic>,
}

impl ScanStats {
    pub fn record_parse_error(&mut self, source: usize, line: u64, err: &ParseError) {
        self.parse_errors += 1;
        let diag = ParseDiagnostic {
            source,
            line,
            message: err.to_string(),
        };
        if self.error_samples.len() < MAX_ERROR_SAMPLES {
            self.error_samples.push(diag);
            self.error_samples.sort();
        } else if diag < *self.error_samples.last().expect("non-empty") {
            self.error_samples.pop();
            self.error_samples.push(diag);
            self.error_samples.sort();
        }
    }

    pub fn parse_error_rate(&self) -> f64 {
        if self.lines_read == 0 {
            0.0
        } else {
            self.parse_errors as f64 / self.lines_read as f64
        }
    }
}

impl Merge for ScanStats {
    fn merge(mut self, other: Self) -> Self {
        self.lines_read += other.lines_read;
        self.blank_lines += other.blank_lines;
        self.parse_errors += other.parse_errors;
        self.works_missing_year += other.works_missing_year;
        self.works_eligible += other.works_eligible;
        self.works_biomedical += other.works_biomedical;
        self.works_matched += other.works_matched;
        self.error_samples.extend(other.error_samples);
        self.error_samples.sort();
        self.error_samples.dedup();
        self.error_samples.truncate(MAX_ERROR_SAMPLES);
        self
    }
}

impl<A: Merge, B: Merge> Merge for (A, B) {
    fn merge(self, other: Self) -> Self {
        (self.0.merge(other.0), self.1.merge(other.1))
    }
}
