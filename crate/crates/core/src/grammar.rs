//! Speaker/audience condition grid and source-side hint prefixes.
//!
//! A [`HintCondition`] is one cell of the speaker × audience grid. Labels are
//! lowercase ASCII keys of the form `<speaker>[+<audience>]`, e.g. `she+them`,
//! plus the special `baseline` label for the unprefixed translation.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

const DEFAULT_EN_TEMPLATES: &str = include_str!("../data/templates/en.toml");

pub const BASELINE_LABEL: &str = "baseline";
pub const PARATAXIS_DELIMITER: char = ':';

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GrammarError {
    #[error("unknown condition `{0}`: no template for this label")]
    UnknownCondition(String),
    #[error("malformed condition label: unexpected token `{token}`")]
    MalformedLabel { token: String },
    #[error("invalid condition: {0}")]
    InvalidCondition(String),
    #[error("invalid template set: {0}")]
    InvalidTemplates(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GenderSpec {
    Masculine,
    Feminine,
    Unspecified,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NumberSpec {
    Singular,
    Plural,
    Unspecified,
}

/// One cell of the condition grid.
///
/// The unprefixed baseline and the `i` condition ("I said:") both leave every
/// attribute unspecified; they differ only in whether a hint is injected at all.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HintCondition {
    speaker: GenderSpec,
    audience_gender: GenderSpec,
    audience_number: NumberSpec,
    hinted: bool,
}

impl HintCondition {
    pub fn baseline() -> Self {
        HintCondition {
            speaker: GenderSpec::Unspecified,
            audience_gender: GenderSpec::Unspecified,
            audience_number: NumberSpec::Unspecified,
            hinted: false,
        }
    }

    /// A hinted condition. The audience must be one of: unspecified,
    /// singular masculine ("him"), singular feminine ("her"), or plural with
    /// no gender ("them").
    pub fn hinted(
        speaker: GenderSpec,
        audience_gender: GenderSpec,
        audience_number: NumberSpec,
    ) -> Result<Self, GrammarError> {
        match (audience_gender, audience_number) {
            (GenderSpec::Unspecified, NumberSpec::Unspecified)
            | (GenderSpec::Masculine, NumberSpec::Singular)
            | (GenderSpec::Feminine, NumberSpec::Singular)
            | (GenderSpec::Unspecified, NumberSpec::Plural) => Ok(HintCondition {
                speaker,
                audience_gender,
                audience_number,
                hinted: true,
            }),
            (g, n) => Err(GrammarError::InvalidCondition(format!(
                "audience {g:?}/{n:?} has no hint phrasing"
            ))),
        }
    }

    pub fn speaker(&self) -> GenderSpec {
        self.speaker
    }

    pub fn audience_gender(&self) -> GenderSpec {
        self.audience_gender
    }

    pub fn audience_number(&self) -> NumberSpec {
        self.audience_number
    }

    pub fn is_baseline(&self) -> bool {
        !self.hinted
    }

    pub fn label(&self) -> String {
        if !self.hinted {
            return BASELINE_LABEL.to_string();
        }
        let speaker = match self.speaker {
            GenderSpec::Masculine => "he",
            GenderSpec::Feminine => "she",
            GenderSpec::Unspecified => "i",
        };
        match (self.audience_gender, self.audience_number) {
            (GenderSpec::Masculine, _) => format!("{speaker}+him"),
            (GenderSpec::Feminine, _) => format!("{speaker}+her"),
            (_, NumberSpec::Plural) => format!("{speaker}+them"),
            _ => speaker.to_string(),
        }
    }
}

impl fmt::Display for HintCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for HintCondition {
    type Err = GrammarError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_condition_label(s)
    }
}

impl Serialize for HintCondition {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.label())
    }
}

impl<'de> Deserialize<'de> for HintCondition {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let label = String::deserialize(deserializer)?;
        parse_condition_label(&label).map_err(serde::de::Error::custom)
    }
}

/// Parses `<speaker>[+<audience>]` with speaker in {he, she, i, baseline} and
/// audience in {him, her, them}. `baseline` takes no audience.
pub fn parse_condition_label(label: &str) -> Result<HintCondition, GrammarError> {
    let malformed = |token: &str| GrammarError::MalformedLabel {
        token: token.to_string(),
    };
    let (speaker_tok, audience_tok) = match label.split_once('+') {
        Some((s, a)) => (s, Some(a)),
        None => (label, None),
    };
    let speaker = match speaker_tok {
        BASELINE_LABEL => {
            return match audience_tok {
                None => Ok(HintCondition::baseline()),
                Some(a) => Err(malformed(a)),
            };
        }
        "he" => GenderSpec::Masculine,
        "she" => GenderSpec::Feminine,
        "i" => GenderSpec::Unspecified,
        other => return Err(malformed(other)),
    };
    let (gender, number) = match audience_tok {
        None => (GenderSpec::Unspecified, NumberSpec::Unspecified),
        Some("him") => (GenderSpec::Masculine, NumberSpec::Singular),
        Some("her") => (GenderSpec::Feminine, NumberSpec::Singular),
        Some("them") => (GenderSpec::Unspecified, NumberSpec::Plural),
        Some(other) => return Err(malformed(other)),
    };
    HintCondition::hinted(speaker, gender, number)
}

/// Which slice of the speaker × audience grid to enumerate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GridMode {
    /// Baseline plus ten prefixed rows; first-person speakers only get the
    /// unspecified and plural audiences.
    #[default]
    Standard,
    /// Every speaker × audience combination.
    Full,
}

const SPEAKERS: [&str; 3] = ["he", "i", "she"];
const AUDIENCES: [Option<&str>; 4] = [None, Some("him"), Some("her"), Some("them")];

/// All grid labels in canonical order. Grid-ordered reports sort by the
/// position in this list.
pub fn canonical_labels(mode: GridMode) -> Vec<String> {
    let mut labels = vec![BASELINE_LABEL.to_string()];
    for speaker in SPEAKERS {
        for audience in AUDIENCES {
            // the published grid has no I/him or I/her rows
            if mode == GridMode::Standard
                && speaker == "i"
                && matches!(audience, Some("him" | "her"))
            {
                continue;
            }
            labels.push(match audience {
                Some(a) => format!("{speaker}+{a}"),
                None => speaker.to_string(),
            });
        }
    }
    labels
}

/// Sort key placing a label in full-grid order; unknown labels sort last.
pub fn grid_position(label: &str) -> usize {
    canonical_labels(GridMode::Full)
        .iter()
        .position(|l| l == label)
        .unwrap_or(usize::MAX)
}

/// Prefix texts keyed by condition label for one source language.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrefixTemplateSet {
    pub source_language: String,
    #[serde(default = "default_separator")]
    pub separator: String,
    #[serde(rename = "prefixes")]
    entries: BTreeMap<String, String>,
}

fn default_separator() -> String {
    " ".to_string()
}

impl PrefixTemplateSet {
    pub fn new(
        source_language: impl Into<String>,
        separator: impl Into<String>,
        entries: BTreeMap<String, String>,
    ) -> Result<Self, GrammarError> {
        let set = PrefixTemplateSet {
            source_language: source_language.into(),
            separator: separator.into(),
            entries,
        };
        set.validate()?;
        Ok(set)
    }

    /// The shipped English templates ("He said:", "She said to them:", ...).
    pub fn english() -> Self {
        Self::from_toml_str(DEFAULT_EN_TEMPLATES).expect("bundled English templates are valid")
    }

    pub fn from_toml_str(text: &str) -> Result<Self, GrammarError> {
        let set: PrefixTemplateSet =
            toml::from_str(text).map_err(|e| GrammarError::InvalidTemplates(e.to_string()))?;
        set.validate()?;
        Ok(set)
    }

    pub fn load(path: &Path) -> Result<Self, GrammarError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            GrammarError::InvalidTemplates(format!("cannot read {}: {e}", path.display()))
        })?;
        Self::from_toml_str(&text)
    }

    /// Keep only the given labels (used to build restricted grids).
    pub fn restricted_to(&self, labels: &[&str]) -> Self {
        PrefixTemplateSet {
            source_language: self.source_language.clone(),
            separator: self.separator.clone(),
            entries: self
                .entries
                .iter()
                .filter(|(k, _)| labels.contains(&k.as_str()))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    }

    pub fn get(&self, label: &str) -> Option<&str> {
        self.entries.get(label).map(String::as_str)
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    fn validate(&self) -> Result<(), GrammarError> {
        for (label, prefix) in &self.entries {
            let condition = parse_condition_label(label)
                .map_err(|e| GrammarError::InvalidTemplates(format!("key `{label}`: {e}")))?;
            if condition.is_baseline() {
                if !prefix.is_empty() {
                    return Err(GrammarError::InvalidTemplates(
                        "baseline must map to the empty prefix".into(),
                    ));
                }
            } else if !prefix.trim_end().ends_with(PARATAXIS_DELIMITER) {
                return Err(GrammarError::InvalidTemplates(format!(
                    "prefix for `{label}` must be non-empty and end with `{PARATAXIS_DELIMITER}`"
                )));
            }
        }
        Ok(())
    }
}

pub fn render_prefix<'t>(
    condition: &HintCondition,
    templates: &'t PrefixTemplateSet,
) -> Result<&'t str, GrammarError> {
    let label = condition.label();
    templates
        .get(&label)
        .ok_or(GrammarError::UnknownCondition(label))
}

/// Conditions that have a template, in grid order.
pub fn enumerate_grid(templates: &PrefixTemplateSet, mode: GridMode) -> Vec<HintCondition> {
    canonical_labels(mode)
        .iter()
        .filter(|label| templates.get(label).is_some())
        .map(|label| parse_condition_label(label).expect("canonical labels parse"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_english_prefixes() {
        let t = PrefixTemplateSet::english();
        let she_them = HintCondition::hinted(
            GenderSpec::Feminine,
            GenderSpec::Unspecified,
            NumberSpec::Plural,
        )
        .unwrap();
        assert_eq!(render_prefix(&she_them, &t).unwrap(), "She said to them:");
        let he = HintCondition::hinted(
            GenderSpec::Masculine,
            GenderSpec::Unspecified,
            NumberSpec::Unspecified,
        )
        .unwrap();
        assert_eq!(render_prefix(&he, &t).unwrap(), "He said:");
        assert_eq!(render_prefix(&HintCondition::baseline(), &t).unwrap(), "");
    }

    #[test]
    fn unknown_condition() {
        let t = PrefixTemplateSet::english().restricted_to(&["baseline"]);
        let err = render_prefix(&parse_condition_label("she").unwrap(), &t).unwrap_err();
        assert_eq!(err, GrammarError::UnknownCondition("she".into()));
    }

    #[test]
    fn standard_grid() {
        let grid = enumerate_grid(&PrefixTemplateSet::english(), GridMode::Standard);
        let labels: Vec<_> = grid.iter().map(|c| c.label()).collect();
        assert_eq!(
            labels,
            [
                "baseline", "he", "he+him", "he+her", "he+them", "i", "i+them", "she", "she+him",
                "she+her", "she+them"
            ]
        );
        assert!(!labels.contains(&"i+him".to_string()));
        assert!(!labels.contains(&"i+her".to_string()));
    }

    #[test]
    fn full_grid_adds_i_rows() {
        let grid = enumerate_grid(&PrefixTemplateSet::english(), GridMode::Full);
        assert_eq!(grid.len(), 13);
        assert_eq!(grid[6].label(), "i+him");
    }

    #[test]
    fn singleton_grid() {
        let t = PrefixTemplateSet::english().restricted_to(&["baseline"]);
        assert_eq!(
            enumerate_grid(&t, GridMode::Standard),
            vec![HintCondition::baseline()]
        );
    }

    #[test]
    fn parse_labels() {
        let c = parse_condition_label("she+them").unwrap();
        assert_eq!(
            (c.speaker(), c.audience_gender(), c.audience_number()),
            (
                GenderSpec::Feminine,
                GenderSpec::Unspecified,
                NumberSpec::Plural
            )
        );
        assert!(parse_condition_label("baseline").unwrap().is_baseline());
        assert!(!parse_condition_label("i").unwrap().is_baseline());
        assert_eq!(
            parse_condition_label("she+cats"),
            Err(GrammarError::MalformedLabel {
                token: "cats".into()
            })
        );
        assert_eq!(
            parse_condition_label("baseline+them"),
            Err(GrammarError::MalformedLabel {
                token: "them".into()
            })
        );
        assert!(parse_condition_label("She").is_err());
    }

    #[test]
    fn plural_audience_has_no_gender() {
        assert!(HintCondition::hinted(
            GenderSpec::Feminine,
            GenderSpec::Feminine,
            NumberSpec::Plural
        )
        .is_err());
    }

    #[test]
    fn templates_reject_bad_prefixes() {
        let mut entries = BTreeMap::new();
        entries.insert("he".to_string(), "He said".to_string());
        assert!(PrefixTemplateSet::new("en", " ", entries.clone()).is_err());
        entries.insert("he".to_string(), "He said:".to_string());
        entries.insert("baseline".to_string(), "Hi:".to_string());
        assert!(PrefixTemplateSet::new("en", " ", entries.clone()).is_err());
        entries.insert("baseline".to_string(), String::new());
        entries.insert("you".to_string(), "You:".to_string());
        assert!(PrefixTemplateSet::new("en", " ", entries).is_err());
    }

    #[test]
    fn label_roundtrip_over_full_grid() {
        for c in enumerate_grid(&PrefixTemplateSet::english(), GridMode::Full) {
            assert_eq!(parse_condition_label(&c.label()).unwrap(), c);
        }
    }
}
