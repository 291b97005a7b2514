use std::collections::HashMap;
use std::path::Path;

use crate::error::{Error, Result};

const BUILTIN: &str = include_str!("../data/continents.csv");

/// ISO-3166 alpha-2 country code to continent name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContinentMap {
    by_country: HashMap<String, String>,
}

impl ContinentMap {
    /// The table shipped with the crate (`data/continents.csv`).
    pub fn builtin() -> Self {
        Self::parse(BUILTIN.as_bytes(), Path::new("<builtin continents.csv>"))
            .expect("builtin continent table is well formed")
    }

    pub fn empty() -> Self {
        Self {
            by_country: HashMap::new(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|source| Error::Open {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(file, path)
    }

    fn parse<R: std::io::Read>(reader: R, path: &Path) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut by_country = HashMap::new();
        for (idx, record) in rdr.records().enumerate() {
            let record = record?;
            let (Some(code), Some(continent)) = (record.get(0), record.get(1)) else {
                return Err(Error::Table {
                    path: path.to_path_buf(),
                    line: idx as u64 + 1,
                    message: "expected `country_code,continent`".into(),
                });
            };
            if idx == 0 && code.eq_ignore_ascii_case("country_code") {
                continue;
            }
            if code.is_empty() || continent.is_empty() {
                continue;
            }
            by_country.insert(code.to_ascii_uppercase(), continent.to_string());
        }
        Ok(Self { by_country })
    }

    pub fn continent_of(&self, country_code: &str) -> Option<&str> {
        self.by_country
            .get(&country_code.to_ascii_uppercase())
            .map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.by_country.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_country.is_empty()
    }
}
