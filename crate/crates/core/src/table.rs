//! Career table TSV: one row per author, sorted by author id, empty string for
//! absent values. Tabs and line breaks inside text fields are written as spaces.

use std::borrow::Cow;
use std::fmt::Write as _;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Error, Result};
use crate::gender::Gender;
use crate::ingest::AuthorCareer;

pub const CAREER_COLUMNS: [&str; 10] = [
    "author_id",
    "debut_year",
    "first_last_author_year",
    "n_works",
    "has_affiliation",
    "has_orcid",
    "country_code",
    "continent",
    "display_name",
    "gender",
];

fn clean(s: &str) -> Cow<'_, str> {
    if s.contains(['\t', '\n', '\r']) {
        s.replace(['\t', '\n', '\r'], " ").into()
    } else {
        s.into()
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Renders careers as TSV. Rows are written in canonical author-id order
/// regardless of the input order.
pub fn careers_tsv(careers: &[AuthorCareer]) -> String {
    let mut sorted: Vec<&AuthorCareer> = careers.iter().collect();
    sorted.sort_by(|a, b| a.author_id.cmp(&b.author_id));
    let mut out = String::with_capacity(80 * (careers.len() + 1));
    out.push_str(&CAREER_COLUMNS.join("\t"));
    out.push('\n');
    for c in sorted {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            clean(&c.author_id),
            c.debut_year,
            opt(c.first_last_author_year),
            c.n_works,
            c.has_affiliation,
            c.has_orcid,
            clean(c.country_code.as_deref().unwrap_or_default()),
            clean(c.continent.as_deref().unwrap_or_default()),
            clean(&c.display_name),
            c.gender.map(Gender::as_str).unwrap_or_default(),
        );
    }
    out
}

pub fn write_careers(path: &Path, careers: &[AuthorCareer]) -> Result<()> {
    std::fs::write(path, careers_tsv(careers)).map_err(|source| Error::Open {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_careers(path: &Path) -> Result<Vec<AuthorCareer>> {
    let file = std::fs::File::open(path).map_err(|source| Error::Open {
        path: path.to_path_buf(),
        source,
    })?;
    parse_careers(BufReader::new(file), path)
}

pub fn parse_careers<R: BufRead>(reader: R, path: &Path) -> Result<Vec<AuthorCareer>> {
    let bad = |line: u64, message: String| Error::Table {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = reader.lines();
    let header = match lines.next() {
        Some(h) => h.map_err(|source| Error::Io {
            path: path.to_path_buf(),
            line: 1,
            source,
        })?,
        None => return Err(bad(1, "missing header".into())),
    };
    if header.trim_end_matches('\r') != CAREER_COLUMNS.join("\t") {
        return Err(bad(1, format!("unexpected header {header:?}")));
    }
    let mut careers = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line_no = idx as u64 + 2;
        let line = line.map_err(|source| Error::Io {
            path: path.to_path_buf(),
            line: line_no,
            source,
        })?;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != CAREER_COLUMNS.len() {
            return Err(bad(
                line_no,
                format!("expected {} fields, found {}", CAREER_COLUMNS.len(), fields.len()),
            ));
        }
        let int = |i: usize| -> Result<i64> {
            fields[i]
                .parse::<i64>()
                .map_err(|_| bad(line_no, format!("{}: not an integer: {:?}", CAREER_COLUMNS[i], fields[i])))
        };
        let opt_int = |i: usize| -> Result<Option<i64>> {
            if fields[i].is_empty() {
                Ok(None)
            } else {
                int(i).map(Some)
            }
        };
        let flag = |i: usize| -> Result<bool> {
            match fields[i] {
                "true" => Ok(true),
                "false" => Ok(false),
                other => Err(bad(line_no, format!("{}: not a boolean: {other:?}", CAREER_COLUMNS[i]))),
            }
        };
        let text = |i: usize| (!fields[i].is_empty()).then(|| fields[i].to_string());
        let gender = match fields[9] {
            "" => None,
            g => Some(Gender::parse(g).ok_or_else(|| bad(line_no, format!("unknown gender {g:?}")))?),
        };
        let year = |v: i64| i32::try_from(v).map_err(|_| bad(line_no, format!("year out of range: {v}")));
        let career = AuthorCareer {
            author_id: fields[0].to_string(),
            debut_year: year(int(1)?)?,
            first_last_author_year: opt_int(2)?.map(year).transpose()?,
            n_works: u64::try_from(int(3)?).map_err(|_| bad(line_no, "negative n_works".into()))?,
            has_affiliation: flag(4)?,
            has_orcid: flag(5)?,
            country_code: text(6),
            continent: text(7),
            display_name: fields[8].to_string(),
            gender,
        };
        if career.author_id.is_empty() {
            return Err(bad(line_no, "empty author_id".into()));
        }
        if career.first_last_author_year.is_some_and(|y| y < career.debut_year) {
            return Err(bad(line_no, "first_last_author_year precedes debut_year".into()));
        }
        careers.push(career);
    }
    Ok(careers)
}
