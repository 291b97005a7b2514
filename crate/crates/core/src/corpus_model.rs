//! Works, authorships, and the filtering rules that decide which works count.
//!
//! Input lines are OpenAlex-shaped JSON objects. Only a small subset of keys is
//! recognized; everything else is skipped by the deserializer.

use std::borrow::Cow;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::ParseError;

/// Biology level-0 concept.
pub const BIOLOGY_CONCEPT: &str = "C86803240";
/// Medicine level-0 concept.
pub const MEDICINE_CONCEPT: &str = "C71924100";

const OPENALEX_PREFIX: &str = "https://openalex.org/";

/// Position of an author within a work's byline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Position {
    First,
    Middle,
    Last,
    /// The only author on the work.
    Solo,
}

impl Position {
    pub fn as_str(self) -> &'static str {
        match self {
            Position::First => "first",
            Position::Middle => "middle",
            Position::Last => "last",
            Position::Solo => "solo",
        }
    }

    fn from_label(label: &str) -> Option<Self> {
        match label.trim().to_ascii_lowercase().as_str() {
            "first" => Some(Position::First),
            "middle" => Some(Position::Middle),
            "last" => Some(Position::Last),
            "solo" => Some(Position::Solo),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConceptTag {
    /// Bare identifier, e.g. `C86803240`.
    pub concept_id: String,
    /// `None` when the input omitted the level.
    pub level: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Institution {
    pub institution_id: String,
    pub country_code: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuthorshipRecord {
    /// `None` for bylines the source could not link to an author profile.
    /// Such entries still occupy a byline slot but are never aggregated.
    pub author_id: Option<String>,
    pub display_name: String,
    /// Filled for every entry once [`derive_positions`] has run.
    pub position: Option<Position>,
    pub orcid: Option<String>,
    pub institutions: Vec<Institution>,
}

impl AuthorshipRecord {
    pub fn has_orcid(&self) -> bool {
        self.orcid.as_deref().is_some_and(|o| !o.trim().is_empty())
    }

    /// Country of the first listed institution that carries one.
    pub fn country_code(&self) -> Option<&str> {
        self.institutions
            .iter()
            .find_map(|inst| inst.country_code.as_deref())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorkRecord {
    pub work_id: String,
    pub publication_year: Option<i32>,
    pub work_type: String,
    pub is_retracted: bool,
    pub is_paratext: bool,
    pub source_type: Option<String>,
    pub concepts: Vec<ConceptTag>,
    /// Byline order exactly as in the input.
    pub authorships: Vec<AuthorshipRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilterConfig {
    pub biomedical_concepts: BTreeSet<String>,
    pub require_level_zero: bool,
    /// Whether a derived `Solo` position counts as last authorship.
    pub solo_counts_as_last: bool,
    /// Careers debuting in or before this year are dropped.
    pub min_debut_year_exclusive: i32,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            biomedical_concepts: [BIOLOGY_CONCEPT, MEDICINE_CONCEPT]
                .into_iter()
                .map(String::from)
                .collect(),
            require_level_zero: true,
            solo_counts_as_last: true,
            min_debut_year_exclusive: 1999,
        }
    }
}

impl FilterConfig {
    pub fn with_concepts<I, S>(mut self, concepts: I) -> Result<Self, crate::Error>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let set: BTreeSet<String> = concepts
            .into_iter()
            .map(|c| normalize_concept_id(c.as_ref()).to_string())
            .filter(|c| !c.is_empty())
            .collect();
        if set.is_empty() {
            return Err(crate::Error::Config(
                "biomedical concept set must not be empty".into(),
            ));
        }
        self.biomedical_concepts = set;
        Ok(self)
    }
}

/// Strips any URL prefix from a concept id (`https://openalex.org/C1` -> `C1`).
pub fn normalize_concept_id(raw: &str) -> &str {
    let raw = raw.trim();
    if let Some(rest) = raw.strip_prefix(OPENALEX_PREFIX) {
        return rest;
    }
    match raw.rfind('/') {
        Some(idx) if raw.contains("://") => &raw[idx + 1..],
        _ => raw,
    }
}

// Borrowing wire structs. Unknown keys are skipped.

#[derive(Deserialize)]
struct RawWork<'a> {
    #[serde(borrow, default)]
    id: Option<Cow<'a, str>>,
    #[serde(default)]
    publication_year: Option<i32>,
    #[serde(borrow, default, rename = "type")]
    work_type: Option<Cow<'a, str>>,
    #[serde(default)]
    is_retracted: Option<bool>,
    #[serde(default)]
    is_paratext: Option<bool>,
    #[serde(borrow, default)]
    primary_location: Option<RawLocation<'a>>,
    #[serde(borrow, default)]
    concepts: Option<Vec<RawConcept<'a>>>,
    #[serde(borrow, default)]
    authorships: Option<Vec<RawAuthorship<'a>>>,
}

#[derive(Deserialize)]
struct RawLocation<'a> {
    #[serde(borrow, default)]
    source: Option<RawSource<'a>>,
}

#[derive(Deserialize)]
struct RawSource<'a> {
    #[serde(borrow, default, rename = "type")]
    source_type: Option<Cow<'a, str>>,
}

#[derive(Deserialize)]
struct RawConcept<'a> {
    #[serde(borrow, default)]
    id: Option<Cow<'a, str>>,
    #[serde(default)]
    level: Option<u32>,
}

#[derive(Deserialize)]
struct RawAuthorship<'a> {
    #[serde(borrow, default)]
    author: Option<RawAuthor<'a>>,
    #[serde(borrow, default)]
    author_position: Option<Cow<'a, str>>,
    #[serde(borrow, default)]
    institutions: Option<Vec<RawInstitution<'a>>>,
}

#[derive(Deserialize)]
struct RawAuthor<'a> {
    #[serde(borrow, default)]
    id: Option<Cow<'a, str>>,
    #[serde(borrow, default)]
    display_name: Option<Cow<'a, str>>,
    #[serde(borrow, default)]
    orcid: Option<Cow<'a, str>>,
}

#[derive(Deserialize)]
struct RawInstitution<'a> {
    #[serde(borrow, default)]
    id: Option<Cow<'a, str>>,
    #[serde(borrow, default)]
    country_code: Option<Cow<'a, str>>,
}

fn non_empty(s: Option<Cow<'_, str>>) -> Option<String> {
    s.map(|s| s.trim().to_string()).filter(|s| !s.is_empty())
}

/// Parses one JSON Lines record into a [`WorkRecord`] with positions derived.
pub fn parse_work_line(line: &str) -> Result<WorkRecord, ParseError> {
    let raw: RawWork<'_> =
        serde_json::from_str(line).map_err(|e| ParseError::MalformedJson(e.to_string()))?;
    let work_id = non_empty(raw.id).ok_or(ParseError::MissingWorkId)?;

    let concepts = raw
        .concepts
        .unwrap_or_default()
        .into_iter()
        .filter_map(|c| {
            let id = c.id?;
            let bare = normalize_concept_id(&id);
            (!bare.is_empty()).then(|| ConceptTag {
                concept_id: bare.to_string(),
                level: c.level,
            })
        })
        .collect();

    let mut authorships: Vec<AuthorshipRecord> = raw
        .authorships
        .unwrap_or_default()
        .into_iter()
        .map(|a| {
            let (author_id, display_name, orcid) = match a.author {
                Some(author) => (
                    non_empty(author.id),
                    author
                        .display_name
                        .map(|n| n.into_owned())
                        .unwrap_or_default(),
                    non_empty(author.orcid),
                ),
                None => (None, String::new(), None),
            };
            let institutions = a
                .institutions
                .unwrap_or_default()
                .into_iter()
                .map(|inst| Institution {
                    institution_id: inst.id.map(Cow::into_owned).unwrap_or_default(),
                    country_code: non_empty(inst.country_code).map(|c| c.to_ascii_uppercase()),
                })
                .collect();
            AuthorshipRecord {
                author_id,
                display_name,
                position: a.author_position.as_deref().and_then(Position::from_label),
                orcid,
                institutions,
            }
        })
        .collect();
    derive_positions(&mut authorships);

    Ok(WorkRecord {
        work_id,
        publication_year: raw.publication_year,
        work_type: raw
            .work_type
            .map(|t| t.trim().to_string())
            .unwrap_or_default(),
        is_retracted: raw.is_retracted.unwrap_or(false),
        is_paratext: raw.is_paratext.unwrap_or(false),
        source_type: raw
            .primary_location
            .and_then(|loc| loc.source)
            .and_then(|src| non_empty(src.source_type)),
        concepts,
        authorships,
    })
}

/// Fills in missing byline positions from order. Explicit labels are kept.
///
/// Index 0 is `First`, the final index is `Last`, everything between is
/// `Middle`; a one-entry byline is `Solo`.
pub fn derive_positions(authorships: &mut [AuthorshipRecord]) {
    let n = authorships.len();
    for (idx, a) in authorships.iter_mut().enumerate() {
        if a.position.is_some() {
            continue;
        }
        a.position = Some(match (n, idx) {
            (1, _) => Position::Solo,
            (_, 0) => Position::First,
            (_, i) if i + 1 == n => Position::Last,
            _ => Position::Middle,
        });
    }
}

/// Non-retracted, non-paratext journal article with a publication year.
pub fn is_eligible_work(w: &WorkRecord) -> bool {
    w.work_type == "article"
        && !w.is_retracted
        && !w.is_paratext
        && w.publication_year.is_some()
        && w.source_type.as_deref().is_none_or(|s| s == "journal")
}

pub fn is_biomedical(w: &WorkRecord, cfg: &FilterConfig) -> bool {
    w.concepts.iter().any(|c| {
        cfg.biomedical_concepts.contains(c.concept_id.as_str())
            && (!cfg.require_level_zero || c.level == Some(0))
    })
}

pub fn is_last_author(a: &AuthorshipRecord, cfg: &FilterConfig) -> bool {
    match a.position {
        Some(Position::Last) => true,
        Some(Position::Solo) => cfg.solo_counts_as_last,
        _ => false,
    }
}

#[derive(Serialize)]
struct OutWork<'a> {
    id: &'a str,
    publication_year: Option<i32>,
    #[serde(rename = "type")]
    work_type: &'a str,
    is_retracted: bool,
    is_paratext: bool,
    primary_location: Option<OutLocation<'a>>,
    concepts: Vec<OutConcept>,
    authorships: Vec<OutAuthorship<'a>>,
}

#[derive(Serialize)]
struct OutLocation<'a> {
    source: OutSource<'a>,
}

#[derive(Serialize)]
struct OutSource<'a> {
    #[serde(rename = "type")]
    source_type: &'a str,
}

#[derive(Serialize)]
struct OutConcept {
    id: String,
    level: Option<u32>,
}

#[derive(Serialize)]
struct OutAuthorship<'a> {
    author: OutAuthor<'a>,
    author_position: Option<&'static str>,
    institutions: Vec<OutInstitution<'a>>,
}

#[derive(Serialize)]
struct OutAuthor<'a> {
    id: Option<&'a str>,
    display_name: &'a str,
    orcid: Option<&'a str>,
}

#[derive(Serialize)]
struct OutInstitution<'a> {
    id: &'a str,
    country_code: Option<&'a str>,
}

/// Serializes a work as a single JSON line (no trailing newline) in the same
/// shape [`parse_work_line`] reads. Concept ids are written URL-prefixed.
pub fn work_to_json_line(w: &WorkRecord) -> String {
    let out = OutWork {
        id: &w.work_id,
        publication_year: w.publication_year,
        work_type: &w.work_type,
        is_retracted: w.is_retracted,
        is_paratext: w.is_paratext,
        primary_location: w.source_type.as_deref().map(|t| OutLocation {
            source: OutSource { source_type: t },
        }),
        concepts: w
            .concepts
            .iter()
            .map(|c| OutConcept {
                id: format!("{OPENALEX_PREFIX}{}", c.concept_id),
                level: c.level,
            })
            .collect(),
        authorships: w
            .authorships
            .iter()
            .map(|a| OutAuthorship {
                author: OutAuthor {
                    id: a.author_id.as_deref(),
                    display_name: &a.display_name,
                    orcid: a.orcid.as_deref(),
                },
                author_position: a.position.map(Position::as_str),
                institutions: a
                    .institutions
                    .iter()
                    .map(|i| OutInstitution {
                        id: &i.institution_id,
                        country_code: i.country_code.as_deref(),
                    })
                    .collect(),
            })
            .collect(),
    };
    serde_json::to_string(&out).expect("work serialization is infallible")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const SPEC_LINE: &str = r#"{"id":"W1","publication_year":2005,"type":"article","is_retracted":false,"is_paratext":false,"concepts":[{"id":"https://openalex.org/C86803240","level":0}],"authorships":[{"author":{"id":"A1","display_name":"Jane Doe","orcid":null},"author_position":"first","institutions":[]}]}"#;

    fn bare(id: &str) -> AuthorshipRecord {
        AuthorshipRecord {
            author_id: Some(id.to_string()),
            display_name: String::new(),
            position: None,
            orcid: None,
            institutions: vec![],
        }
    }

    fn article(year: Option<i32>) -> WorkRecord {
        WorkRecord {
            work_id: "W".into(),
            publication_year: year,
            work_type: "article".into(),
            is_retracted: false,
            is_paratext: false,
            source_type: None,
            concepts: vec![],
            authorships: vec![],
        }
    }

    #[test]
    fn parses_reference_line() {
        let w = parse_work_line(SPEC_LINE).unwrap();
        assert_eq!(w.work_id, "W1");
        assert_eq!(w.publication_year, Some(2005));
        assert_eq!(w.work_type, "article");
        assert_eq!(
            w.concepts,
            vec![ConceptTag {
                concept_id: "C86803240".into(),
                level: Some(0)
            }]
        );
        assert_eq!(w.authorships.len(), 1);
        let a = &w.authorships[0];
        assert_eq!(a.author_id.as_deref(), Some("A1"));
        assert_eq!(a.display_name, "Jane Doe");
        assert_eq!(a.position, Some(Position::First));
        assert!(!a.has_orcid());
    }

    #[test]
    fn retraction_flag_passes_through() {
        let w = parse_work_line(r#"{"id":"W2","is_retracted":true,"type":"article"}"#).unwrap();
        assert!(w.is_retracted);
        assert!(w.authorships.is_empty());
        assert!(!is_eligible_work(&w));
    }

    #[test]
    fn malformed_json_is_an_error() {
        assert!(matches!(
            parse_work_line("{not json"),
            Err(ParseError::MalformedJson(_))
        ));
        assert!(matches!(
            parse_work_line("[1,2,3]"),
            Err(ParseError::MalformedJson(_))
        ));
        assert!(matches!(
            parse_work_line(r#"{"publication_year":"2005","id":"W"}"#),
            Err(ParseError::MalformedJson(_))
        ));
    }

    #[test]
    fn missing_work_id_is_an_error() {
        assert_eq!(
            parse_work_line(r#"{"publication_year":2001}"#),
            Err(ParseError::MissingWorkId)
        );
        assert_eq!(
            parse_work_line(r#"{"id":"  "}"#),
            Err(ParseError::MissingWorkId)
        );
    }

    #[test]
    fn source_type_and_institutions_are_read() {
        let line = r#"{"id":"W3","publication_year":2011,"type":"article","primary_location":{"source":{"type":"repository","display_name":"x"}},"authorships":[{"author":{"id":"A1","display_name":"A","orcid":"https://orcid.org/0000"},"institutions":[{"id":"I1","country_code":null},{"id":"I2","country_code":"gb"}]},{"author":{},"institutions":[]}]}"#;
        let w = parse_work_line(line).unwrap();
        assert_eq!(w.source_type.as_deref(), Some("repository"));
        assert!(!is_eligible_work(&w));
        let a = &w.authorships[0];
        assert!(a.has_orcid());
        assert_eq!(a.country_code(), Some("GB"));
        assert_eq!(a.position, Some(Position::First));
        assert_eq!(w.authorships[1].author_id, None);
        assert_eq!(w.authorships[1].position, Some(Position::Last));
    }

    #[test]
    fn derives_positions_from_order() {
        let mut three = vec![bare("A"), bare("B"), bare("C")];
        derive_positions(&mut three);
        let got: Vec<_> = three.iter().map(|a| a.position.unwrap()).collect();
        assert_eq!(got, [Position::First, Position::Middle, Position::Last]);

        let mut one = vec![bare("A")];
        derive_positions(&mut one);
        assert_eq!(one[0].position, Some(Position::Solo));

        let mut two = vec![bare("A"), bare("B")];
        derive_positions(&mut two);
        assert_eq!(two[0].position, Some(Position::First));
        assert_eq!(two[1].position, Some(Position::Last));
    }

    #[test]
    fn explicit_labels_win() {
        let mut list = vec![bare("A"), bare("B")];
        list[1].position = Some(Position::Middle);
        derive_positions(&mut list);
        assert_eq!(list[0].position, Some(Position::First));
        assert_eq!(list[1].position, Some(Position::Middle));
    }

    #[test]
    fn eligibility_rules() {
        assert!(is_eligible_work(&article(Some(2010))));
        assert!(!is_eligible_work(&article(None)));

        let mut w = article(Some(2010));
        w.is_retracted = true;
        assert!(!is_eligible_work(&w));

        let mut w = article(Some(2010));
        w.is_paratext = true;
        assert!(!is_eligible_work(&w));

        let mut w = article(Some(2010));
        w.work_type = "dataset".into();
        assert!(!is_eligible_work(&w));

        let mut w = article(Some(2010));
        w.source_type = Some("journal".into());
        assert!(is_eligible_work(&w));
        w.source_type = Some("conference".into());
        assert!(!is_eligible_work(&w));
    }

    #[test]
    fn biomedical_concepts() {
        let cfg = FilterConfig::default();
        let tagged = |id: &str, level| {
            let mut w = article(Some(2010));
            w.concepts.push(ConceptTag {
                concept_id: id.into(),
                level: Some(level),
            });
            w
        };
        assert!(is_biomedical(&tagged("C86803240", 0), &cfg));
        assert!(is_biomedical(&tagged("C71924100", 0), &cfg));
        assert!(!is_biomedical(&tagged("C12345", 0), &cfg));
        assert!(!is_biomedical(&tagged("C86803240", 1), &cfg));

        let relaxed = FilterConfig {
            require_level_zero: false,
            ..FilterConfig::default()
        };
        assert!(is_biomedical(&tagged("C86803240", 1), &relaxed));
    }

    #[test]
    fn last_author_rule() {
        let cfg = FilterConfig::default();
        let mut a = bare("A");
        a.position = Some(Position::Last);
        assert!(is_last_author(&a, &cfg));
        a.position = Some(Position::Solo);
        assert!(is_last_author(&a, &cfg));
        let strict = FilterConfig {
            solo_counts_as_last: false,
            ..FilterConfig::default()
        };
        assert!(!is_last_author(&a, &strict));
        a.position = Some(Position::First);
        assert!(!is_last_author(&a, &cfg));
    }

    #[test]
    fn empty_concept_set_rejected() {
        assert!(FilterConfig::default()
            .with_concepts(Vec::<String>::new())
            .is_err());
        let cfg = FilterConfig::default()
            .with_concepts(["https://openalex.org/C1"])
            .unwrap();
        assert!(cfg.biomedical_concepts.contains("C1"));
    }

    fn arb_work() -> impl Strategy<Value = WorkRecord> {
        let authorship = (
            proptest::option::of("[A-Z][0-9]{1,3}"),
            "[a-zA-Zé ]{0,12}",
            proptest::option::of(prop_oneof![
                Just(Position::First),
                Just(Position::Middle),
                Just(Position::Last),
                Just(Position::Solo)
            ]),
            proptest::option::of("[0-9-]{4,8}"),
            proptest::collection::vec(
                ("I[0-9]{1,2}", proptest::option::of("[A-Z]{2}")),
                0..3,
            ),
        )
            .prop_map(|(id, name, pos, orcid, insts)| AuthorshipRecord {
                author_id: id,
                display_name: name,
                position: pos,
                orcid,
                institutions: insts
                    .into_iter()
                    .map(|(i, c)| Institution {
                        institution_id: i,
                        country_code: c,
                    })
                    .collect(),
            });
        (
            "W[0-9]{1,4}",
            proptest::option::of(1990i32..2030),
            prop_oneof![Just("article".to_string()), Just("review".to_string())],
            any::<bool>(),
            any::<bool>(),
            proptest::option::of(prop_oneof![Just("journal".to_string()), Just("repository".to_string())]),
            proptest::collection::vec(("C[0-9]{1,9}", proptest::option::of(0u32..4)), 0..4),
            proptest::collection::vec(authorship, 0..6),
        )
            .prop_map(
                |(id, year, ty, retracted, paratext, source, concepts, mut authorships)| {
                    derive_positions(&mut authorships);
                    WorkRecord {
                        work_id: id,
                        publication_year: year,
                        work_type: ty,
                        is_retracted: retracted,
                        is_paratext: paratext,
                        source_type: source,
                        concepts: concepts
                            .into_iter()
                            .map(|(concept_id, level)| ConceptTag { concept_id, level })
                            .collect(),
                        authorships,
                    }
                },
            )
    }

    proptest! {
        #[test]
        fn serialized_work_parses_back(w in arb_work()) {
            prop_assert_eq!(parse_work_line(&work_to_json_line(&w)).unwrap(), w);
        }

        #[test]
        fn derive_positions_is_idempotent(n in 0usize..8, labelled in proptest::collection::vec(any::<bool>(), 8)) {
            let mut list: Vec<_> = (0..n).map(|i| {
                let mut a = bare(&format!("A{i}"));
                if labelled[i] { a.position = Some(Position::Middle); }
                a
            }).collect();
            derive_positions(&mut list);
            let once = list.clone();
            derive_positions(&mut list);
            prop_assert_eq!(once, list);
        }

        #[test]
        fn concept_prefix_does_not_matter(id in prop_oneof![Just("C86803240"), Just("C71924100"), Just("C42")], level in 0u32..3) {
            let cfg = FilterConfig::default();
            let bare_line = format!(r#"{{"id":"W","concepts":[{{"id":"{id}","level":{level}}}]}}"#);
            let url_line = format!(r#"{{"id":"W","concepts":[{{"id":"https://openalex.org/{id}","level":{level}}}]}}"#);
            let a = parse_work_line(&bare_line).unwrap();
            let b = parse_work_line(&url_line).unwrap();
            prop_assert_eq!(is_biomedical(&a, &cfg), is_biomedical(&b, &cfg));
        }

        #[test]
        fn parsing_arbitrary_text_never_panics(s in "\\PC{0,80}") {
            let _ = parse_work_line(&s);
        }
    }
}
