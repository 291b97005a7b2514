//! Name-based gender classification from an exported `name,p_gf` table.
//!
//! `p_gf` is the probability that a given name belongs to someone who has been
//! structurally gendered female. Classification uses inclusive thresholds: at
//! or below `male_max` is `Male`, at or above `female_min` is `Female`, and
//! everything in between (or missing from the table) is `Unclassified`.

use std::collections::HashMap;
use std::path::Path;

use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};
use crate::ingest::AuthorCareer;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Gender {
    Male,
    Female,
    Unclassified,
}

impl Gender {
    pub fn as_str(self) -> &'static str {
        match self {
            Gender::Male => "male",
            Gender::Female => "female",
            Gender::Unclassified => "unclassified",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "male" => Some(Gender::Male),
            "female" => Some(Gender::Female),
            "unclassified" => Some(Gender::Unclassified),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub male_max: f64,
    pub female_min: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            male_max: 0.2,
            female_min: 0.8,
        }
    }
}

impl Thresholds {
    pub fn new(male_max: f64, female_min: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&male_max)
            || !(0.0..=1.0).contains(&female_min)
            || male_max >= female_min
        {
            return Err(Error::Config(format!(
                "thresholds must satisfy 0 <= male_max < female_min <= 1 (got {male_max}, {female_min})"
            )));
        }
        Ok(Self {
            male_max,
            female_min,
        })
    }
}

/// Decomposes, strips combining marks, lowercases, and keeps the first
/// whitespace-delimited token.
pub fn normalize_given_name(raw: &str) -> Option<String> {
    let fold = |s: &str| -> String {
        s.nfkd()
            .filter(|c| !is_combining_mark(*c))
            .collect::<String>()
            .to_lowercase()
    };
    // compatibility forms can decompose into cased letters and vice versa
    let mut key = fold(raw.split_whitespace().next()?);
    for _ in 0..4 {
        let next = fold(&key);
        if next == key {
            break;
        }
        key = next;
    }
    let token = key.split_whitespace().next()?;
    Some(token.to_string())
}

/// A row the loader refused.
#[derive(Debug, Clone, PartialEq)]
pub struct RejectedRow {
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GenderDictionary {
    entries: HashMap<String, f64>,
    /// Keys seen more than once; the later row won.
    pub duplicate_keys: u64,
    pub rejected: Vec<RejectedRow>,
}

impl GenderDictionary {
    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|source| Error::Open {
            path: path.to_path_buf(),
            source,
        })?;
        let dict = Self::from_reader(file)?;
        if dict.is_empty() {
            return Err(Error::EmptyDictionary(path.to_path_buf()));
        }
        Ok(dict)
    }

    /// Reads `name,p_gf` rows. A leading `name,p_gf` header is skipped.
    pub fn from_reader<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut dict = Self::default();
        for (idx, record) in rdr.records().enumerate() {
            let record = record?;
            let line = record.position().map_or(idx as u64 + 1, |p| p.line());
            let name = record.get(0).unwrap_or_default();
            let prob = record.get(1).unwrap_or_default();
            if idx == 0 && name.eq_ignore_ascii_case("name") && prob.eq_ignore_ascii_case("p_gf") {
                continue;
            }
            if record.len() == 1 && name.is_empty() {
                continue;
            }
            let Some(key) = normalize_given_name(name) else {
                dict.rejected.push(RejectedRow {
                    line,
                    reason: "empty name".into(),
                });
                continue;
            };
            let p = match prob.parse::<f64>() {
                Ok(p) if (0.0..=1.0).contains(&p) => p,
                _ => {
                    dict.rejected.push(RejectedRow {
                        line,
                        reason: format!("probability {prob:?} is not a number in [0, 1]"),
                    });
                    continue;
                }
            };
            if dict.entries.insert(key, p).is_some() {
                dict.duplicate_keys += 1;
            }
        }
        Ok(dict)
    }

    pub fn from_entries<I, S>(entries: I) -> Self
    where
        I: IntoIterator<Item = (S, f64)>,
        S: AsRef<str>,
    {
        let mut dict = Self::default();
        for (name, p) in entries {
            if let Some(key) = normalize_given_name(name.as_ref()) {
                if dict.entries.insert(key, p.clamp(0.0, 1.0)).is_some() {
                    dict.duplicate_keys += 1;
                }
            }
        }
        dict
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn p_gf(&self, name: &str) -> Option<f64> {
        self.entries.get(&normalize_given_name(name)?).copied()
    }
}

pub fn classify(name: &str, dict: &GenderDictionary, t: &Thresholds) -> Gender {
    match dict.p_gf(name) {
        Some(p) if p <= t.male_max => Gender::Male,
        Some(p) if p >= t.female_min => Gender::Female,
        _ => Gender::Unclassified,
    }
}

/// Sets the gender column of every career from its display name.
pub fn annotate(careers: &mut [AuthorCareer], dict: &GenderDictionary, t: &Thresholds) {
    for c in careers {
        c.gender = Some(classify(&c.display_name, dict, t));
    }
}
