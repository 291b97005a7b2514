//! Time-to-independence, the debut-year anomaly, and stratified cohort reports.
//!
//! The windowed anomaly rate for a group of authors is
//! `n_anomalous / n_independent_within_window`, where the denominator counts
//! authors whose first last-author paper came at most `window_years` after
//! their debut and the numerator counts those whose first last-author paper
//! came in the debut year itself.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::io::Write;

use crate::error::{Error, Result};
use crate::gender::Gender;
use crate::ingest::AuthorCareer;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stratum {
    All,
    AffiliationPresence,
    OrcidPresence,
    Gender,
    ContinentGender,
}

impl Stratum {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "all" => Some(Stratum::All),
            "affiliation" => Some(Stratum::AffiliationPresence),
            "orcid" => Some(Stratum::OrcidPresence),
            "gender" => Some(Stratum::Gender),
            "continent-gender" => Some(Stratum::ContinentGender),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Stratum::All => "all",
            Stratum::AffiliationPresence => "affiliation",
            Stratum::OrcidPresence => "orcid",
            Stratum::Gender => "gender",
            Stratum::ContinentGender => "continent-gender",
        }
    }

    pub fn needs_gender(self) -> bool {
        matches!(self, Stratum::Gender | Stratum::ContinentGender)
    }
}

/// What "has affiliation" means for the affiliation stratum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AffiliationBasis {
    /// The resolved last-known institution carries a country code.
    #[default]
    CountryCode,
    /// Any work ever listed an institution.
    AnyInstitution,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricConfig {
    pub window_years: u32,
    pub cohort_start: i32,
    pub cohort_end: i32,
    pub strata: BTreeSet<Stratum>,
    pub affiliation_basis: AffiliationBasis,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self {
            window_years: 5,
            cohort_start: 2000,
            cohort_end: 2018,
            strata: [Stratum::All, Stratum::AffiliationPresence, Stratum::OrcidPresence]
                .into_iter()
                .collect(),
            affiliation_basis: AffiliationBasis::CountryCode,
        }
    }
}

impl MetricConfig {
    pub fn validate(&self) -> Result<()> {
        if self.cohort_start > self.cohort_end {
            return Err(Error::Config(format!(
                "cohort start {} is after cohort end {}",
                self.cohort_start, self.cohort_end
            )));
        }
        if self.strata.is_empty() {
            return Err(Error::Config("at least one stratum is required".into()));
        }
        Ok(())
    }

    pub fn in_cohort(&self, debut_year: i32) -> bool {
        (self.cohort_start..=self.cohort_end).contains(&debut_year)
    }
}

pub fn time_to_independence(c: &AuthorCareer) -> Option<i32> {
    c.first_last_author_year.map(|y| y - c.debut_year)
}

/// Counts for one stratum and debut year (or pooled, when `debut_year` is `None`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnomalyStat {
    pub stratum_key: String,
    pub debut_year: Option<i32>,
    pub n_authors: u64,
    pub n_independent_within_window: u64,
    pub n_anomalous: u64,
}

impl AnomalyStat {
    pub fn new(stratum_key: impl Into<String>, debut_year: Option<i32>) -> Self {
        Self {
            stratum_key: stratum_key.into(),
            debut_year,
            n_authors: 0,
            n_independent_within_window: 0,
            n_anomalous: 0,
        }
    }

    /// `None` when nobody in the group became a last author within the window.
    pub fn anomaly_rate(&self) -> Option<f64> {
        (self.n_independent_within_window > 0)
            .then(|| self.n_anomalous as f64 / self.n_independent_within_window as f64)
    }

    fn tally(&mut self, c: &AuthorCareer, window_years: u32) {
        self.n_authors += 1;
        if let Some(tti) = time_to_independence(c) {
            if tti <= window_years as i32 {
                self.n_independent_within_window += 1;
                if tti == 0 {
                    self.n_anomalous += 1;
                }
            }
        }
    }
}

/// Pooled windowed anomaly over every cohort member; careers whose debut falls
/// outside `[cohort_start, cohort_end]` are ignored.
pub fn windowed_anomaly_rate<'a, I>(cohort: I, cfg: &MetricConfig) -> AnomalyStat
where
    I: IntoIterator<Item = &'a AuthorCareer>,
{
    let mut stat = AnomalyStat::new("all", None);
    for c in cohort {
        if cfg.in_cohort(c.debut_year) {
            stat.tally(c, cfg.window_years);
        }
    }
    stat
}

fn gender_token(g: Option<Gender>) -> Option<&'static str> {
    match g {
        Some(Gender::Male) => Some("male"),
        Some(Gender::Female) => Some("female"),
        _ => None,
    }
}

fn presence(flag: bool) -> &'static str {
    if flag {
        "present"
    } else {
        "absent"
    }
}

/// Stratum keys a career belongs to under one stratification.
fn keys_for(c: &AuthorCareer, stratum: Stratum, cfg: &MetricConfig) -> Option<String> {
    match stratum {
        Stratum::All => Some("all".into()),
        Stratum::AffiliationPresence => {
            let has = match cfg.affiliation_basis {
                AffiliationBasis::CountryCode => c.country_code.is_some(),
                AffiliationBasis::AnyInstitution => c.has_affiliation,
            };
            Some(format!("affiliation:{}", presence(has)))
        }
        Stratum::OrcidPresence => Some(format!("orcid:{}", presence(c.has_orcid))),
        Stratum::Gender => gender_token(c.gender).map(|g| format!("gender:{g}")),
        Stratum::ContinentGender => {
            let continent = c.continent.as_deref()?;
            let g = gender_token(c.gender)?;
            Some(format!("continent-gender:{continent}:{g}"))
        }
    }
}

/// Every key a stratification can produce for this table.
fn key_universe(table: &[AuthorCareer], stratum: Stratum) -> Vec<String> {
    match stratum {
        Stratum::All => vec!["all".into()],
        Stratum::AffiliationPresence => vec!["affiliation:absent".into(), "affiliation:present".into()],
        Stratum::OrcidPresence => vec!["orcid:absent".into(), "orcid:present".into()],
        Stratum::Gender => vec!["gender:female".into(), "gender:male".into()],
        Stratum::ContinentGender => {
            let continents: BTreeSet<&str> =
                table.iter().filter_map(|c| c.continent.as_deref()).collect();
            continents
                .into_iter()
                .flat_map(|cont| {
                    ["female", "male"].map(|g| format!("continent-gender:{cont}:{g}"))
                })
                .collect()
        }
    }
}

/// One row per (stratum key, debut year) in the cohort range, sorted by both.
/// Empty groups are kept so "no data" stays distinguishable from zero.
pub fn build_report(table: &[AuthorCareer], cfg: &MetricConfig) -> Result<Vec<AnomalyStat>> {
    cfg.validate()?;
    if cfg.strata.iter().any(|s| s.needs_gender()) && table.iter().any(|c| c.gender.is_none()) {
        return Err(Error::MissingGender);
    }
    let mut rows: BTreeMap<(String, i32), AnomalyStat> = BTreeMap::new();
    for &stratum in &cfg.strata {
        for key in key_universe(table, stratum) {
            for year in cfg.cohort_start..=cfg.cohort_end {
                rows.insert((key.clone(), year), AnomalyStat::new(key.clone(), Some(year)));
            }
        }
    }
    for c in table.iter().filter(|c| cfg.in_cohort(c.debut_year)) {
        for &stratum in &cfg.strata {
            if let Some(key) = keys_for(c, stratum, cfg) {
                if let Some(row) = rows.get_mut(&(key, c.debut_year)) {
                    row.tally(c, cfg.window_years);
                }
            }
        }
    }
    Ok(rows.into_values().collect())
}

/// Counts by time-to-independence, plus authors who never held last authorship.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TtiHistogram {
    pub counts: BTreeMap<u32, u64>,
    pub never: u64,
}

impl TtiHistogram {
    pub fn add(&mut self, tti: Option<i32>) {
        match tti {
            Some(v) => *self.counts.entry(v.max(0) as u32).or_insert(0) += 1,
            None => self.never += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.never + self.counts.values().sum::<u64>()
    }

    pub fn independent(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Share of ever-independent authors whose independence came in the debut year.
    pub fn debut_year_share(&self) -> Option<f64> {
        let independent = self.independent();
        (independent > 0).then(|| self.counts.get(&0).copied().unwrap_or(0) as f64 / independent as f64)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TtiDistribution {
    pub pooled: TtiHistogram,
    pub by_debut_year: BTreeMap<i32, TtiHistogram>,
}

/// Histogram over the whole table with no window and no cohort cap.
pub fn tti_distribution(table: &[AuthorCareer]) -> TtiDistribution {
    let mut dist = TtiDistribution::default();
    for c in table {
        let tti = time_to_independence(c);
        dist.pooled.add(tti);
        dist.by_debut_year.entry(c.debut_year).or_default().add(tti);
    }
    dist
}

/// `num / den` with six decimals, rounded half to even, computed exactly.
pub fn format_rate(num: u64, den: u64) -> String {
    assert!(den > 0, "rate with zero denominator");
    const SCALE: u128 = 1_000_000;
    let scaled = num as u128 * SCALE;
    let den = den as u128;
    let mut q = scaled / den;
    let r = scaled % den;
    if 2 * r > den || (2 * r == den && q % 2 == 1) {
        q += 1;
    }
    format!("{}.{:06}", q / SCALE, q % SCALE)
}

pub(crate) fn csv_field(s: &str) -> std::borrow::Cow<'_, str> {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\"")).into()
    } else {
        s.into()
    }
}

pub const REPORT_HEADER: &str =
    "stratum_key,debut_year,n_authors,n_independent_within_window,n_anomalous,anomaly_rate";
pub const HISTOGRAM_HEADER: &str = "debut_year,tti,count";

pub fn report_csv(rows: &[AnomalyStat]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(REPORT_HEADER);
    out.push('\n');
    for r in rows {
        let rate = if r.n_independent_within_window > 0 {
            format_rate(r.n_anomalous, r.n_independent_within_window)
        } else {
            String::new()
        };
        let year = r.debut_year.map_or_else(|| "all".to_string(), |y| y.to_string());
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            csv_field(&r.stratum_key),
            year,
            r.n_authors,
            r.n_independent_within_window,
            r.n_anomalous,
            rate
        );
    }
    out
}

/// Pooled block first (`debut_year` = `all`), then each debut year ascending.
/// Within a block the never bucket (`tti` = -1) leads, then non-zero buckets.
pub fn histogram_csv(dist: &TtiDistribution) -> String {
    let mut out = String::new();
    out.push_str(HISTOGRAM_HEADER);
    out.push('\n');
    let mut block = |label: &str, h: &TtiHistogram| {
        if h.never > 0 {
            let _ = writeln!(out, "{label},-1,{}", h.never);
        }
        for (tti, count) in &h.counts {
            let _ = writeln!(out, "{label},{tti},{count}");
        }
    };
    block("all", &dist.pooled);
    for (year, h) in &dist.by_debut_year {
        block(&year.to_string(), h);
    }
    out
}

pub fn write_report<W: Write>(mut w: W, rows: &[AnomalyStat]) -> Result<()> {
    w.write_all(report_csv(rows).as_bytes())?;
    Ok(())
}

pub fn write_histogram<W: Write>(mut w: W, dist: &TtiDistribution) -> Result<()> {
    w.write_all(histogram_csv(dist).as_bytes())?;
    Ok(())
}
