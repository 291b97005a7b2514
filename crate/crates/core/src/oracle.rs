//! Naive reference pipeline: materializes the whole corpus and recomputes the
//! career table, cohort report, and histogram with direct loops. It shares the
//! line parser and the eligibility predicates with the streaming path but none
//! of the aggregation or reporting code, so the two can be checked against
//! each other.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::career_metrics::{AffiliationBasis, AnomalyStat, MetricConfig, Stratum, TtiDistribution, TtiHistogram};
use crate::continent::ContinentMap;
use crate::corpus_model::{
    is_biomedical, is_eligible_work, is_last_author, parse_work_line, FilterConfig, WorkRecord,
};
use crate::error::{Error, Result};
use crate::gender::{classify, Gender, GenderDictionary, Thresholds};
use crate::ingest::AuthorCareer;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleOutput {
    pub careers: Vec<AuthorCareer>,
    pub report: Vec<AnomalyStat>,
    pub histogram: TtiDistribution,
    pub parse_errors: u64,
}

pub struct OracleInputs<'a> {
    pub filter: &'a FilterConfig,
    pub metrics: &'a MetricConfig,
    pub continents: &'a ContinentMap,
    pub gender: Option<(&'a GenderDictionary, &'a Thresholds)>,
}

/// Reference report over JSON lines held in memory.
pub fn oracle_report<'l, I>(lines: I, inputs: &OracleInputs<'_>) -> Result<OracleOutput>
where
    I: IntoIterator<Item = &'l str>,
{
    let mut parse_errors = 0;
    let mut works: Vec<WorkRecord> = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        match parse_work_line(line) {
            Ok(w) => works.push(w),
            Err(_) => parse_errors += 1,
        }
    }
    let careers = oracle_careers(&works, inputs);
    let report = oracle_cohort_report(&careers, inputs.metrics)?;
    let histogram = oracle_histogram(&careers);
    Ok(OracleOutput {
        careers,
        report,
        histogram,
        parse_errors,
    })
}

pub fn oracle_careers(works: &[WorkRecord], inputs: &OracleInputs<'_>) -> Vec<AuthorCareer> {
    let cfg = inputs.filter;
    let eligible: Vec<&WorkRecord> = works.iter().filter(|w| is_eligible_work(w)).collect();

    let mut selected: BTreeSet<&str> = BTreeSet::new();
    for w in eligible.iter().filter(|w| is_biomedical(w, cfg)) {
        for a in &w.authorships {
            if let Some(id) = &a.author_id {
                selected.insert(id);
            }
        }
    }

    // author -> every (work, authorship) pair on eligible works
    let mut appearances: HashMap<&str, Vec<(&WorkRecord, usize)>> = HashMap::new();
    for w in &eligible {
        for (i, a) in w.authorships.iter().enumerate() {
            if let Some(id) = a.author_id.as_deref() {
                if selected.contains(id) {
                    appearances.entry(id).or_default().push((w, i));
                }
            }
        }
    }

    let mut careers = Vec::new();
    for id in &selected {
        let Some(apps) = appearances.get(id) else {
            continue;
        };
        let year = |w: &WorkRecord| w.publication_year.expect("eligible works carry a year");
        let debut = apps.iter().map(|(w, _)| year(w)).min().expect("non-empty");
        if debut <= cfg.min_debut_year_exclusive {
            continue;
        }
        let first_last = apps
            .iter()
            .filter(|(w, i)| is_last_author(&w.authorships[*i], cfg))
            .map(|(w, _)| year(w))
            .min();
        let distinct_works: BTreeSet<&str> = apps.iter().map(|(w, _)| w.work_id.as_str()).collect();
        let has_affiliation = apps.iter().any(|(w, i)| !w.authorships[*i].institutions.is_empty());
        let has_orcid = apps.iter().any(|(w, i)| w.authorships[*i].has_orcid());

        let mut witnesses: Vec<(i32, &str, Option<&str>)> = apps
            .iter()
            .filter(|(w, i)| !w.authorships[*i].institutions.is_empty())
            .map(|(w, i)| (year(w), w.work_id.as_str(), w.authorships[*i].country_code()))
            .collect();
        witnesses.sort_by_key(|&(y, wid, c)| (Reverse(y), wid, c.is_none(), c));
        let country_code = witnesses.first().and_then(|w| w.2).map(str::to_string);

        let mut name_counts: BTreeMap<&str, u64> = BTreeMap::new();
        for (w, i) in apps {
            let name = w.authorships[*i].display_name.as_str();
            if !name.trim().is_empty() {
                *name_counts.entry(name).or_default() += 1;
            }
        }
        let mut names: Vec<(&str, u64)> = name_counts.into_iter().collect();
        names.sort_by_key(|&(n, c)| (Reverse(c), n));
        let display_name = names.first().map(|(n, _)| n.to_string()).unwrap_or_default();

        let gender = inputs
            .gender
            .map(|(dict, t)| classify(&display_name, dict, t));
        careers.push(AuthorCareer {
            author_id: id.to_string(),
            debut_year: debut,
            first_last_author_year: first_last,
            n_works: distinct_works.len() as u64,
            has_affiliation,
            has_orcid,
            continent: country_code
                .as_deref()
                .and_then(|c| inputs.continents.continent_of(c))
                .map(str::to_string),
            country_code,
            display_name,
            gender,
        });
    }
    careers
}

fn belongs(c: &AuthorCareer, key: &str, cfg: &MetricConfig) -> bool {
    let gender_name = |g: Option<Gender>| match g {
        Some(Gender::Male) => "male",
        Some(Gender::Female) => "female",
        _ => "",
    };
    let has_aff = match cfg.affiliation_basis {
        AffiliationBasis::CountryCode => c.country_code.is_some(),
        AffiliationBasis::AnyInstitution => c.has_affiliation,
    };
    match key {
        "all" => true,
        "affiliation:present" => has_aff,
        "affiliation:absent" => !has_aff,
        "orcid:present" => c.has_orcid,
        "orcid:absent" => !c.has_orcid,
        "gender:male" => c.gender == Some(Gender::Male),
        "gender:female" => c.gender == Some(Gender::Female),
        other => {
            let Some(rest) = other.strip_prefix("continent-gender:") else {
                return false;
            };
            let Some((continent, g)) = rest.rsplit_once(':') else {
                return false;
            };
            c.continent.as_deref() == Some(continent) && gender_name(c.gender) == g
        }
    }
}

pub fn oracle_cohort_report(careers: &[AuthorCareer], cfg: &MetricConfig) -> Result<Vec<AnomalyStat>> {
    cfg.validate()?;
    let wants_gender = cfg.strata.contains(&Stratum::Gender) || cfg.strata.contains(&Stratum::ContinentGender);
    if wants_gender && careers.iter().any(|c| c.gender.is_none()) {
        return Err(Error::MissingGender);
    }
    let mut keys: Vec<String> = Vec::new();
    if cfg.strata.contains(&Stratum::All) {
        keys.push("all".into());
    }
    if cfg.strata.contains(&Stratum::AffiliationPresence) {
        keys.extend(["affiliation:present".into(), "affiliation:absent".into()]);
    }
    if cfg.strata.contains(&Stratum::OrcidPresence) {
        keys.extend(["orcid:present".into(), "orcid:absent".into()]);
    }
    if cfg.strata.contains(&Stratum::Gender) {
        keys.extend(["gender:male".into(), "gender:female".into()]);
    }
    if cfg.strata.contains(&Stratum::ContinentGender) {
        let continents: BTreeSet<&String> = careers.iter().filter_map(|c| c.continent.as_ref()).collect();
        for cont in continents {
            keys.push(format!("continent-gender:{cont}:male"));
            keys.push(format!("continent-gender:{cont}:female"));
        }
    }
    keys.sort();

    let mut rows = Vec::new();
    for key in &keys {
        for year in cfg.cohort_start..=cfg.cohort_end {
            let members: Vec<&AuthorCareer> = careers
                .iter()
                .filter(|c| c.debut_year == year && belongs(c, key, cfg))
                .collect();
            let within: Vec<i32> = members
                .iter()
                .filter_map(|c| c.first_last_author_year.map(|y| y - c.debut_year))
                .filter(|&t| t <= cfg.window_years as i32)
                .collect();
            rows.push(AnomalyStat {
                stratum_key: key.clone(),
                debut_year: Some(year),
                n_authors: members.len() as u64,
                n_independent_within_window: within.len() as u64,
                n_anomalous: within.iter().filter(|&&t| t == 0).count() as u64,
            });
        }
    }
    Ok(rows)
}

pub fn oracle_histogram(careers: &[AuthorCareer]) -> TtiDistribution {
    let fill = |subset: &[&AuthorCareer]| {
        let mut h = TtiHistogram::default();
        for c in subset {
            match c.first_last_author_year {
                Some(y) => *h.counts.entry((y - c.debut_year) as u32).or_default() += 1,
                None => h.never += 1,
            }
        }
        h
    };
    let all: Vec<&AuthorCareer> = careers.iter().collect();
    let years: BTreeSet<i32> = careers.iter().map(|c| c.debut_year).collect();
    TtiDistribution {
        pooled: fill(&all),
        by_debut_year: years
            .into_iter()
            .map(|y| {
                let subset: Vec<&AuthorCareer> = careers.iter().filter(|c| c.debut_year == y).collect();
                (y, fill(&subset))
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inputs<'a>(filter: &'a FilterConfig, metrics: &'a MetricConfig, continents: &'a ContinentMap) -> OracleInputs<'a> {
        OracleInputs {
            filter,
            metrics,
            continents,
            gender: None,
        }
    }

    #[test]
    fn empty_corpus_has_only_empty_rows() {
        let (f, m, c) = (FilterConfig::default(), MetricConfig::default(), ContinentMap::builtin());
        let out = oracle_report(std::iter::empty(), &inputs(&f, &m, &c)).unwrap();
        assert!(out.careers.is_empty());
        assert!(out.report.iter().all(|r| r.n_authors == 0));
        assert_eq!(out.histogram, TtiDistribution::default());
    }

    #[test]
    fn single_solo_work() {
        let (f, m, c) = (FilterConfig::default(), MetricConfig::default(), ContinentMap::builtin());
        let line = r#"{"id":"W1","publication_year":2010,"type":"article","concepts":[{"id":"C71924100","level":0}],"authorships":[{"author":{"id":"A1","display_name":"Solo Author"}}]}"#;
        let out = oracle_report([line], &inputs(&f, &m, &c)).unwrap();
        assert_eq!(out.careers.len(), 1);
        assert_eq!(out.careers[0].debut_year, 2010);
        assert_eq!(out.careers[0].first_last_author_year, Some(2010));
        assert_eq!(out.histogram.pooled.counts.get(&0), Some(&1));

        let strict = FilterConfig {
            solo_counts_as_last: false,
            ..FilterConfig::default()
        };
        let out = oracle_report([line], &inputs(&strict, &m, &c)).unwrap();
        assert_eq!(out.careers[0].first_last_author_year, None);
    }
}
