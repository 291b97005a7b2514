//! Two-pass, shard-parallel career aggregation.
//!
//! Pass A collects every author who appears on an eligible biomedical work.
//! Pass B streams the corpus again and folds *all* eligible works of those
//! authors into a [`PartialAggregate`]. Workers never share mutable state:
//! each line batch is folded into its own partial and sent to a single
//! reducer. Merging is commutative and associative, so the result does not
//! depend on thread count, scheduling or batch boundaries.

mod aggregate;
mod source;

use std::io::BufRead;

use rayon::iter::{ParallelBridge, ParallelIterator};
use serde::Serialize;

pub use aggregate::{
    AuthorEntry, AuthorSet, InstitutionWitness, Merge, ParseDiagnostic, PartialAggregate,
    ScanStats,
};
pub use source::{Batch, BatchReader, LineSource};

use crate::continent::ContinentMap;
use crate::corpus_model::{is_biomedical, is_eligible_work, parse_work_line, FilterConfig, WorkRecord};
use crate::error::{Error, ParseError, Result};
use crate::gender::Gender;

/// One researcher's reconstructed career.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuthorCareer {
    pub author_id: String,
    pub debut_year: i32,
    pub first_last_author_year: Option<i32>,
    pub n_works: u64,
    pub has_affiliation: bool,
    pub has_orcid: bool,
    pub country_code: Option<String>,
    pub continent: Option<String>,
    pub display_name: String,
    pub gender: Option<Gender>,
}

/// Parses and filters every line of a batch, handing eligible works to `on_work`.
fn scan_batch<F>(batch: &Batch, stats: &mut ScanStats, mut on_work: F)
where
    F: FnMut(&WorkRecord, &mut ScanStats),
{
    for (line_no, bytes) in batch.lines() {
        if bytes.iter().all(u8::is_ascii_whitespace) {
            stats.blank_lines += 1;
            continue;
        }
        stats.lines_read += 1;
        let parsed = std::str::from_utf8(bytes)
            .map_err(|_| ParseError::InvalidUtf8)
            .and_then(parse_work_line);
        let work = match parsed {
            Ok(w) => w,
            Err(e) => {
                stats.record_parse_error(batch.source, line_no, &e);
                continue;
            }
        };
        if work.publication_year.is_none() {
            stats.works_missing_year += 1;
        }
        if !is_eligible_work(&work) {
            continue;
        }
        stats.works_eligible += 1;
        on_work(&work, stats);
    }
}

fn pass_a_batch(cfg: &FilterConfig) -> impl Fn(&mut AuthorSet, &mut ScanStats, &Batch) + Sync + '_ {
    move |set, stats, batch| {
        scan_batch(batch, stats, |work, stats| {
            if is_biomedical(work, cfg) {
                stats.works_biomedical += 1;
                set.absorb_work(work);
            }
        })
    }
}

fn pass_b_batch<'a>(
    authors: &'a AuthorSet,
    cfg: &'a FilterConfig,
) -> impl Fn(&mut PartialAggregate, &mut ScanStats, &Batch) + Sync + 'a {
    move |agg, stats, batch| {
        scan_batch(batch, stats, |work, stats| {
            let touches = work
                .authorships
                .iter()
                .any(|a| a.author_id.as_deref().is_some_and(|id| authors.contains(id)));
            if touches {
                stats.works_matched += 1;
                agg.absorb_work(work, authors, cfg);
            }
        })
    }
}

fn single_stream<S: Merge>(
    reader: Box<dyn BufRead + Send>,
    fold: impl Fn(&mut S, &mut ScanStats, &Batch),
) -> Result<(S, ScanStats)> {
    let mut state = S::default();
    let mut stats = ScanStats::default();
    for batch in BatchReader::from_reader("<stream>", reader) {
        fold(&mut state, &mut stats, &batch?);
    }
    Ok((state, stats))
}

/// Pass A over a single stream.
pub fn scan_author_set<R: BufRead + Send + 'static>(
    reader: R,
    cfg: &FilterConfig,
) -> Result<(AuthorSet, ScanStats)> {
    single_stream(Box::new(reader), pass_a_batch(cfg))
}

/// Pass B over a single stream.
pub fn scan_careers<R: BufRead + Send + 'static>(
    reader: R,
    authors: &AuthorSet,
    cfg: &FilterConfig,
) -> Result<(PartialAggregate, ScanStats)> {
    single_stream(Box::new(reader), pass_b_batch(authors, cfg))
}

pub fn merge(a: PartialAggregate, b: PartialAggregate) -> PartialAggregate {
    a.merge(b)
}

/// Result of [`finalize`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Finalized {
    /// Sorted ascending by author id.
    pub careers: Vec<AuthorCareer>,
    /// Entries whose debut is at or before the configured cutoff.
    pub dropped_early_debut: u64,
}

pub fn finalize(p: PartialAggregate, continents: &ContinentMap, cfg: &FilterConfig) -> Finalized {
    let mut out = Finalized::default();
    for (author_id, entry) in p.into_entries() {
        if entry.min_year <= cfg.min_debut_year_exclusive {
            out.dropped_early_debut += 1;
            continue;
        }
        let country_code = entry
            .latest_institution
            .as_ref()
            .and_then(|w| w.country_code.clone());
        let continent = country_code
            .as_deref()
            .and_then(|c| continents.continent_of(c))
            .map(str::to_string);
        out.careers.push(AuthorCareer {
            display_name: entry.preferred_name().unwrap_or_default().to_string(),
            author_id,
            debut_year: entry.min_year,
            first_last_author_year: entry.min_last_year,
            n_works: entry.n_works,
            has_affiliation: entry.any_affiliation,
            has_orcid: entry.any_orcid,
            country_code,
            continent,
            gender: None,
        });
    }
    out.careers
        .sort_unstable_by(|a, b| a.author_id.cmp(&b.author_id));
    out
}

/// Counters from a complete two-pass run.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IngestSummary {
    pub pass_a: ScanStats,
    pub pass_b: ScanStats,
    pub authors_selected: u64,
    pub authors_aggregated: u64,
    pub careers_emitted: u64,
    pub dropped_early_debut: u64,
}

/// Drives both passes over a set of shards with a fixed worker count.
#[derive(Debug, Clone)]
pub struct Ingestor {
    pub filter: FilterConfig,
    pub threads: usize,
}

impl Ingestor {
    pub fn new(filter: FilterConfig, threads: usize) -> Self {
        Self {
            filter,
            threads: threads.max(1),
        }
    }

    fn run_pass<S, F>(&self, sources: &[LineSource], fold: F) -> Result<(S, ScanStats)>
    where
        S: Merge + Send,
        F: Fn(&mut S, &mut ScanStats, &Batch) + Sync,
    {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.threads)
            .build()
            .map_err(|e| Error::ThreadPool(e.to_string()))?;
        // Each batch folds into its own small partial; a single reducer owns
        // the only full-size accumulator, so memory tracks distinct authors
        // rather than authors times workers.
        let (tx, rx) = std::sync::mpsc::sync_channel::<Result<(S, ScanStats)>>(self.threads);
        std::thread::scope(|scope| {
            let reducer = scope.spawn(move || {
                let mut acc = (S::default(), ScanStats::default());
                let mut first_err = None;
                for part in rx {
                    match part {
                        Ok(p) if first_err.is_none() => acc = acc.merge(p),
                        Ok(_) => {}
                        Err(e) => {
                            first_err.get_or_insert(e);
                        }
                    }
                }
                match first_err {
                    Some(e) => Err(e),
                    None => Ok(acc),
                }
            });
            pool.install(|| {
                BatchReader::new(sources).par_bridge().for_each_with(tx, |tx, batch| {
                    let part = batch.map(|batch| {
                        let mut local = (S::default(), ScanStats::default());
                        fold(&mut local.0, &mut local.1, &batch);
                        local
                    });
                    // the reducer only stops once every sender is gone
                    let _ = tx.send(part);
                });
            });
            reducer.join().expect("reducer thread panicked")
        })
    }

    pub fn author_set(&self, sources: &[LineSource]) -> Result<(AuthorSet, ScanStats)> {
        self.run_pass(sources, pass_a_batch(&self.filter))
    }

    pub fn careers(
        &self,
        sources: &[LineSource],
        authors: &AuthorSet,
    ) -> Result<(PartialAggregate, ScanStats)> {
        self.run_pass(sources, pass_b_batch(authors, &self.filter))
    }

    /// Runs both passes and finalizes. `check_a` sees pass-A statistics
    /// before pass B starts and may abort the run.
    pub fn run<C>(
        &self,
        sources: &[LineSource],
        continents: &ContinentMap,
        check_a: C,
    ) -> Result<(Finalized, IngestSummary)>
    where
        C: FnOnce(&ScanStats) -> Result<()>,
    {
        let (authors, pass_a) = self.author_set(sources)?;
        check_a(&pass_a)?;
        let (partial, pass_b) = self.careers(sources, &authors)?;
        let authors_aggregated = partial.len() as u64;
        let finalized = finalize(partial, continents, &self.filter);
        let summary = IngestSummary {
            authors_selected: authors.len() as u64,
            authors_aggregated,
            careers_emitted: finalized.careers.len() as u64,
            dropped_early_debut: finalized.dropped_early_debut,
            pass_a,
            pass_b,
        };
        Ok((finalized, summary))
    }
}
