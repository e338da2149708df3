//! Wrapping source sentences with a hint prefix, and stripping the translated
//! prefix back off the target side.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WrapError {
    #[error("cannot wrap an empty sentence")]
    EmptySentence,
    #[error("strip_rate of an empty outcome list")]
    EmptyInput,
    #[error("invalid strip rules: {0}")]
    InvalidRules(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WrappedSentence {
    pub original: String,
    pub prefix: String,
    pub wrapped: String,
}

pub fn wrap(sentence: &str, prefix: &str, separator: &str) -> Result<WrappedSentence, WrapError> {
    if sentence.trim().is_empty() {
        return Err(WrapError::EmptySentence);
    }
    let wrapped = if prefix.is_empty() {
        sentence.to_string()
    } else {
        format!("{prefix}{separator}{sentence}")
    };
    Ok(WrappedSentence {
        original: sentence.to_string(),
        prefix: prefix.to_string(),
        wrapped,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StripMethod {
    /// Nothing was injected (baseline), so nothing is removed.
    NoPrefix,
    ExactPattern,
    DelimiterHeuristic,
    Unstripped,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StripOutcome {
    pub stripped: String,
    pub method: StripMethod,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matched_pattern: Option<String>,
}

impl StripOutcome {
    pub fn is_stripped(&self) -> bool {
        self.method != StripMethod::Unstripped
    }
}

/// Target-side stripping rules for one language.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StripRuleSet {
    pub target_language: String,
    #[serde(default)]
    pub exact_patterns: Vec<String>,
    #[serde(default = "default_delimiter")]
    pub delimiter: String,
    #[serde(default = "default_max_prefix_tokens")]
    pub max_prefix_tokens: usize,
    /// Quote characters trimmed from the payload when it is wrapped in them
    /// right after the stripped prefix.
    #[serde(default)]
    pub quote_chars: Vec<char>,
}

fn default_delimiter() -> String {
    ":".to_string()
}

fn default_max_prefix_tokens() -> usize {
    6
}

impl StripRuleSet {
    pub fn new(target_language: impl Into<String>, exact_patterns: Vec<String>) -> Self {
        StripRuleSet {
            target_language: target_language.into(),
            exact_patterns,
            delimiter: default_delimiter(),
            max_prefix_tokens: default_max_prefix_tokens(),
            quote_chars: Vec::new(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self, WrapError> {
        let rules: StripRuleSet =
            toml::from_str(text).map_err(|e| WrapError::InvalidRules(e.to_string()))?;
        rules.validate()?;
        Ok(rules)
    }

    pub fn load(path: &Path) -> Result<Self, WrapError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| WrapError::InvalidRules(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<(), WrapError> {
        if self.max_prefix_tokens == 0 {
            return Err(WrapError::InvalidRules(
                "max_prefix_tokens must be >= 1".into(),
            ));
        }
        if self.delimiter.is_empty() {
            return Err(WrapError::InvalidRules(
                "delimiter must be non-empty".into(),
            ));
        }
        if self.exact_patterns.iter().any(|p| p.trim().is_empty()) {
            return Err(WrapError::InvalidRules("empty exact pattern".into()));
        }
        Ok(())
    }

    fn patterns_longest_first(&self) -> Vec<&str> {
        let mut patterns: Vec<&str> = self.exact_patterns.iter().map(String::as_str).collect();
        // stable: equal lengths keep their configured order
        patterns.sort_by_key(|p| std::cmp::Reverse(p.len()));
        patterns
    }
}

/// Removes the translated hint prefix from `raw`.
///
/// Exact patterns are tried first, longest first, at the start of the text.
/// Failing that, the first delimiter occurring inside the first
/// `max_prefix_tokens` whitespace tokens ends the prefix. A strip that would
/// leave nothing behind is treated as a failure.
pub fn strip(raw: &str, rules: &StripRuleSet) -> StripOutcome {
    let text = raw.trim_start();

    for pattern in rules.patterns_longest_first() {
        if let Some(rest) = text.strip_prefix(pattern) {
            if let Some(payload) = finish(rest, rules) {
                return StripOutcome {
                    stripped: payload,
                    method: StripMethod::ExactPattern,
                    matched_pattern: Some(pattern.to_string()),
                };
            }
        }
    }

    let window_end = token_window_end(text, rules.max_prefix_tokens);
    if let Some(pos) = text[..window_end].find(&rules.delimiter) {
        if let Some(payload) = finish(&text[pos + rules.delimiter.len()..], rules) {
            return StripOutcome {
                stripped: payload,
                method: StripMethod::DelimiterHeuristic,
                matched_pattern: None,
            };
        }
    }

    StripOutcome {
        stripped: raw.to_string(),
        method: StripMethod::Unstripped,
        matched_pattern: None,
    }
}

fn finish(rest: &str, rules: &StripRuleSet) -> Option<String> {
    let mut payload = rest.trim_start();
    if let Some(first) = payload.chars().next() {
        if rules.quote_chars.contains(&first) {
            payload = payload[first.len_utf8()..].trim();
            if let Some(last) = payload.chars().next_back() {
                if rules.quote_chars.contains(&last) {
                    payload = payload[..payload.len() - last.len_utf8()].trim_end();
                }
            }
        }
    }
    if payload.is_empty() {
        None
    } else {
        Some(payload.to_string())
    }
}

/// Byte offset of the end of the `n`-th whitespace token (or the text end).
fn token_window_end(text: &str, n: usize) -> usize {
    let mut seen = 0;
    let mut in_token = false;
    for (i, c) in text.char_indices() {
        if c.is_whitespace() {
            if in_token {
                seen += 1;
                if seen == n {
                    return i;
                }
            }
            in_token = false;
        } else {
            in_token = true;
        }
    }
    text.len()
}

/// Outcome for an unprefixed (baseline) translation: the raw text, untouched.
pub fn passthrough(raw: &str) -> StripOutcome {
    StripOutcome {
        stripped: raw.to_string(),
        method: StripMethod::NoPrefix,
        matched_pattern: None,
    }
}

/// Fraction of outcomes that were stripped, rounded half-up to 4 decimals
/// from the exact ratio.
pub fn strip_rate(outcomes: &[StripOutcome]) -> Result<f64, WrapError> {
    if outcomes.is_empty() {
        return Err(WrapError::EmptyInput);
    }
    let stripped = outcomes.iter().filter(|o| o.is_stripped()).count() as u64;
    let total = outcomes.len() as u64;
    let scaled = (stripped * 10_000 * 2 + total) / (2 * total);
    Ok(scaled as f64 / 10_000.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn en_rules() -> StripRuleSet {
        StripRuleSet::new(
            "en",
            vec![
                "She said:".into(),
                "She said to them:".into(),
                "He said:".into(),
            ],
        )
    }

    #[test]
    fn wrap_examples() {
        let w = wrap("I love you", "She said to them:", " ").unwrap();
        assert_eq!(w.wrapped, "She said to them: I love you");
        assert_eq!(w.original, "I love you");
        assert_eq!(wrap("I love you", "", " ").unwrap().wrapped, "I love you");
        assert_eq!(wrap("  ", "He said:", " "), Err(WrapError::EmptySentence));
    }

    #[test]
    fn passthrough_keeps_colons() {
        let out = passthrough("Note: bring water");
        assert_eq!(out.stripped, "Note: bring water");
        assert_eq!(out.method, StripMethod::NoPrefix);
        assert!(out.is_stripped());
        assert_eq!(
            strip("Note: bring water", &en_rules()).stripped,
            "bring water"
        );
    }

    #[test]
    fn exact_pattern_prefers_longest() {
        let out = strip("She said to them: I love you", &en_rules());
        assert_eq!(out.method, StripMethod::ExactPattern);
        assert_eq!(out.stripped, "I love you");
        assert_eq!(out.matched_pattern.as_deref(), Some("She said to them:"));
    }

    #[test]
    fn delimiter_heuristic() {
        let rules = StripRuleSet::new("pt", vec!["Ela disse:".into()]);
        let out = strip("Ele disse : eu fui chamado", &rules);
        assert_eq!(out.method, StripMethod::DelimiterHeuristic);
        assert_eq!(out.stripped, "eu fui chamado");
        assert!(out.matched_pattern.is_none());
    }

    #[test]
    fn colon_beyond_token_cap_is_left_alone() {
        let raw = "one two three four five six seven: eight";
        let out = strip(raw, &en_rules());
        assert_eq!(out.method, StripMethod::Unstripped);
        assert_eq!(out.stripped, raw);
        // the sixth token still counts
        let out = strip("one two three four five six: seven", &en_rules());
        assert_eq!(out.method, StripMethod::DelimiterHeuristic);
        assert_eq!(out.stripped, "seven");
    }

    #[test]
    fn no_colon_is_unstripped() {
        let out = strip("I love you all", &en_rules());
        assert_eq!(out.method, StripMethod::Unstripped);
        assert_eq!(out.stripped, "I love you all");
    }

    #[test]
    fn prefix_only_output_is_unstripped() {
        let out = strip("She said:", &en_rules());
        assert_eq!(out.method, StripMethod::Unstripped);
    }

    #[test]
    fn quotes_trimmed_when_configured() {
        let mut rules = StripRuleSet::new("fr", vec!["Elle a dit :".into()]);
        rules.quote_chars = vec!['«', '»'];
        let out = strip("Elle a dit : « je suis patiente »", &rules);
        assert_eq!(out.stripped, "je suis patiente");
        assert_eq!(out.method, StripMethod::ExactPattern);
    }

    #[test]
    fn rate() {
        let ok = StripOutcome {
            stripped: "x".into(),
            method: StripMethod::ExactPattern,
            matched_pattern: Some("p".into()),
        };
        let bad = StripOutcome {
            stripped: "x".into(),
            method: StripMethod::Unstripped,
            matched_pattern: None,
        };
        let mut v = vec![ok.clone(); 998];
        v.extend(vec![bad.clone(); 2]);
        assert_eq!(strip_rate(&v).unwrap(), 0.998);
        assert_eq!(strip_rate(&[bad.clone(), bad]).unwrap(), 0.0);
        assert_eq!(strip_rate(&[ok.clone(), ok]).unwrap(), 1.0);
        assert_eq!(strip_rate(&[]), Err(WrapError::EmptyInput));
    }

    #[test]
    fn rate_rounds_half_up() {
        let ok = StripOutcome {
            stripped: "x".into(),
            method: StripMethod::DelimiterHeuristic,
            matched_pattern: None,
        };
        let bad = StripOutcome {
            stripped: "x".into(),
            method: StripMethod::Unstripped,
            matched_pattern: None,
        };
        // 2/3 = 0.66666.. -> 0.6667
        assert_eq!(strip_rate(&[ok.clone(), ok, bad]).unwrap(), 0.6667);
    }

    #[test]
    fn rules_from_toml() {
        let rules = StripRuleSet::from_toml_str(
            "target_language = \"he\"\nexact_patterns = [\"היא אמרה:\"]\n",
        )
        .unwrap();
        assert_eq!(rules.delimiter, ":");
        assert_eq!(rules.max_prefix_tokens, 6);
        assert!(
            StripRuleSet::from_toml_str("target_language = \"he\"\nmax_prefix_tokens = 0\n")
                .is_err()
        );
    }

    proptest! {
        #[test]
        fn wrap_then_strip_roundtrips(
            sentence in "[A-Za-z][A-Za-z ,.!?'-]{0,40}[A-Za-z.!?]",
            idx in 0usize..3,
        ) {
            let rules = en_rules();
            let prefix = &rules.exact_patterns[idx];
            let w = wrap(&sentence, prefix, " ").unwrap();
            let out = strip(&w.wrapped, &rules);
            prop_assert_eq!(out.method, StripMethod::ExactPattern);
            prop_assert_eq!(out.stripped, sentence);
        }

        #[test]
        fn strip_never_grows(raw in "\\PC{1,80}") {
            let out = strip(&raw, &en_rules());
            prop_assert!(out.stripped.len() <= raw.len());
            if out.method == StripMethod::Unstripped {
                prop_assert_eq!(out.stripped, raw);
            }
        }

        #[test]
        fn baseline_wrap_is_identity(sentence in "[a-z][a-z ]{0,30}") {
            let w = wrap(&sentence, "", " ").unwrap();
            prop_assert_eq!(w.wrapped, sentence);
        }
    }
}
