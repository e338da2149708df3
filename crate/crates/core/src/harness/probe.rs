//! Multi-language gendered-form probe: translate a first-person sentence
//! under "He said:" and "She said:" and check which gendered form survives.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{read_to_string, HarnessError};
use crate::client::{translate_corpus, Backend, BackendSpec, TranslationCache};
use crate::grammar::{parse_condition_label, PrefixTemplateSet};
use crate::wrap::StripRuleSet;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeCase {
    pub language: String,
    pub source: String,
    pub masculine_form: String,
    pub feminine_form: String,
}

impl ProbeCase {
    pub fn new(
        language: &str,
        source: &str,
        masculine: &str,
        feminine: &str,
    ) -> Result<Self, HarnessError> {
        if masculine.trim().to_lowercase() == feminine.trim().to_lowercase() {
            return Err(HarnessError::Data(format!(
                "probe case `{language}`: masculine and feminine forms are identical"
            )));
        }
        if source.trim().is_empty() || masculine.trim().is_empty() || feminine.trim().is_empty() {
            return Err(HarnessError::Data(format!(
                "probe case `{language}` has an empty field"
            )));
        }
        Ok(ProbeCase {
            language: language.trim().to_string(),
            source: source.trim().to_string(),
            masculine_form: masculine.trim().to_string(),
            feminine_form: feminine.trim().to_string(),
        })
    }
}

/// Reads a TSV of `language, source, masculine_form, feminine_form`.
/// A header row starting with `language` and `#` comment lines are skipped.
pub fn load_probe_cases(path: &Path) -> Result<Vec<ProbeCase>, HarnessError> {
    let text = read_to_string(path)?;
    let mut cases = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if i == 0 && cols[0].trim() == "language" {
            continue;
        }
        if cols.len() != 4 {
            return Err(HarnessError::Data(format!(
                "{} line {}: expected 4 tab-separated fields, found {}",
                path.display(),
                i + 1,
                cols.len()
            )));
        }
        cases.push(ProbeCase::new(cols[0], cols[1], cols[2], cols[3])?);
    }
    if cases.is_empty() {
        return Err(HarnessError::Data(format!(
            "{}: no probe cases",
            path.display()
        )));
    }
    Ok(cases)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Detected {
    Masculine,
    Feminine,
    Neither,
}

fn words(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect()
}

fn contains_words(haystack: &[String], needle: &[String]) -> bool {
    !needle.is_empty() && haystack.windows(needle.len()).any(|w| w == needle)
}

/// Whole-word, case-insensitive detection. A form must appear as a complete
/// word sequence, so `написал` does not match inside `написала`.
pub fn detect(translation: &str, case: &ProbeCase) -> Detected {
    let text = words(translation);
    let masc = contains_words(&text, &words(&case.masculine_form));
    let fem = contains_words(&text, &words(&case.feminine_form));
    match (masc, fem) {
        (true, false) => Detected::Masculine,
        (false, true) => Detected::Feminine,
        _ => Detected::Neither,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeCaseResult {
    pub language: String,
    pub source: String,
    pub he_translation: String,
    pub he_detected: Detected,
    pub she_translation: String,
    pub she_detected: Detected,
    pub success: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub cases: Vec<ProbeCaseResult>,
    pub successes: usize,
    pub total: usize,
    pub fraction: f64,
}

impl ProbeResult {
    pub fn summary(&self) -> String {
        format!("{}/{}", self.successes, self.total)
    }

    pub fn failed_languages(&self) -> Vec<&str> {
        self.cases
            .iter()
            .filter(|c| !c.success)
            .map(|c| c.language.as_str())
            .collect()
    }

    pub fn to_csv(&self) -> Result<String, HarnessError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| HarnessError::Data(e.to_string());
        w.write_record([
            "language",
            "source",
            "he_translation",
            "he_detected",
            "she_translation",
            "she_detected",
            "success",
        ])
        .map_err(err)?;
        for c in &self.cases {
            w.write_record([
                c.language.clone(),
                c.source.clone(),
                c.he_translation.clone(),
                format!("{:?}", c.he_detected),
                c.she_translation.clone(),
                format!("{:?}", c.she_detected),
                c.success.to_string(),
            ])
            .map_err(err)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| HarnessError::Data(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Strip rules for `language`: `<rules_dir>/<language>.toml` when present,
/// otherwise delimiter-heuristic only.
pub fn rules_for(language: &str, rules_dir: Option<&Path>) -> Result<StripRuleSet, HarnessError> {
    if let Some(dir) = rules_dir {
        let p = dir.join(format!("{language}.toml"));
        if p.is_file() {
            return StripRuleSet::load(&p)
                .map_err(|e| HarnessError::Config(format!("{}: {e}", p.display())));
        }
    }
    Ok(StripRuleSet::new(language, Vec::new()))
}

/// Derives a per-language backend from `spec`. A table fixture that is a
/// directory resolves to `<dir>/<language>.tsv`.
pub fn backend_for_language(
    spec: &BackendSpec,
    language: &str,
    base_dir: &Path,
) -> Result<Backend, HarnessError> {
    let mut spec = spec.clone();
    spec.target_lang = language.to_string();
    if let Some(f) = &spec.fixture {
        let f = base_dir.join(f);
        if f.is_dir() {
            spec.fixture = Some(f.join(format!("{language}.tsv")));
        }
    }
    Ok(Backend::from_spec(&spec, base_dir)?)
}

/// Translates every case under the `he` and `she` prefixes. A case succeeds
/// when "He said:" yields the masculine form and "She said:" the feminine.
pub fn run_gender_probe(
    cases: &[ProbeCase],
    backend_for: &dyn Fn(&str) -> Result<Backend, HarnessError>,
    templates: &PrefixTemplateSet,
    rules_for: &dyn Fn(&str) -> Result<StripRuleSet, HarnessError>,
    cache: &mut TranslationCache,
) -> Result<ProbeResult, HarnessError> {
    if cases.is_empty() {
        return Err(HarnessError::Data("no probe cases".into()));
    }
    let he = parse_condition_label("he").expect("valid label");
    let she = parse_condition_label("she").expect("valid label");
    let mut results = Vec::with_capacity(cases.len());
    for case in cases {
        let backend = backend_for(&case.language)?;
        let rules = rules_for(&case.language)?;
        let source = [case.source.clone()];
        let mut run = |cond| -> Result<String, HarnessError> {
            let records = translate_corpus(&source, cond, &backend, cache, templates, &rules)
                .map_err(|e| match HarnessError::from(e) {
                    HarnessError::Backend(m) => {
                        HarnessError::Backend(format!("probe case `{}`: {m}", case.language))
                    }
                    other => other,
                })?;
            Ok(records[0].strip.stripped.clone())
        };
        let he_translation = run(&he)?;
        let she_translation = run(&she)?;
        let he_detected = detect(&he_translation, case);
        let she_detected = detect(&she_translation, case);
        results.push(ProbeCaseResult {
            language: case.language.clone(),
            source: case.source.clone(),
            he_translation,
            he_detected,
            she_translation,
            she_detected,
            success: he_detected == Detected::Masculine && she_detected == Detected::Feminine,
        });
    }
    let successes = results.iter().filter(|r| r.success).count();
    Ok(ProbeResult {
        total: results.len(),
        fraction: successes as f64 / results.len() as f64,
        successes,
        cases: results,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::client::{BackendKind, TableTranslator};
    use std::collections::HashMap;

    fn case() -> ProbeCase {
        ProbeCase::new("ru", "I wrote a message", "написал", "написала").unwrap()
    }

    #[test]
    fn detection_is_whole_word() {
        let c = case();
        assert_eq!(detect("Я написала сообщение", &c), Detected::Feminine);
        assert_eq!(detect("я НАПИСАЛ сообщение", &c), Detected::Masculine);
        assert_eq!(detect("Я отправил сообщение", &c), Detected::Neither);
        assert_eq!(detect("написал? написала!", &c), Detected::Neither);
    }

    #[test]
    fn identical_forms_rejected() {
        assert!(ProbeCase::new("xx", "s", "a", "A").is_err());
    }

    fn table_backend(rows: &[(&str, &str)]) -> Backend {
        let map: HashMap<String, String> = rows
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
        Backend::with_translator(
            BackendSpec::new("t", BackendKind::Table, "en", "ru"),
            Box::new(TableTranslator::new(map)),
        )
    }

    fn probe(rows: &'static [(&'static str, &'static str)]) -> ProbeResult {
        let templates = PrefixTemplateSet::english();
        run_gender_probe(
            &[case()],
            &|_| Ok(table_backend(rows)),
            &templates,
            &|l| rules_for(l, None),
            &mut TranslationCache::in_memory(),
        )
        .unwrap()
    }

    #[test]
    fn masculine_under_both_prefixes_fails() {
        let r = probe(&[
            (
                "He said: I wrote a message",
                "Он сказал: Я написал сообщение",
            ),
            (
                "She said: I wrote a message",
                "Она сказала: Я написал сообщение",
            ),
        ]);
        assert_eq!(r.cases[0].he_detected, Detected::Masculine);
        assert_eq!(r.cases[0].she_detected, Detected::Masculine);
        assert_eq!(r.summary(), "0/1");
        assert_eq!(r.failed_languages(), ["ru"]);
    }

    #[test]
    fn neither_form_fails_and_correct_pair_succeeds() {
        let r = probe(&[
            (
                "He said: I wrote a message",
                "Он сказал: Я отправил сообщение",
            ),
            (
                "She said: I wrote a message",
                "Она сказала: Я написала сообщение",
            ),
        ]);
        assert_eq!(r.cases[0].he_detected, Detected::Neither);
        assert!(!r.cases[0].success);

        let r = probe(&[
            (
                "He said: I wrote a message",
                "Он сказал: Я написал сообщение",
            ),
            (
                "She said: I wrote a message",
                "Она сказала: Я написала сообщение",
            ),
        ]);
        assert!(r.cases[0].success);
        assert_eq!(r.fraction, 1.0);
    }

    #[test]
    fn missing_translation_is_backend_error() {
        let templates = PrefixTemplateSet::english();
        let err = run_gender_probe(
            &[case()],
            &|_| Ok(table_backend(&[])),
            &templates,
            &|l| rules_for(l, None),
            &mut TranslationCache::in_memory(),
        )
        .unwrap_err();
        assert_eq!(err.exit_code(), 4);
        assert!(err.to_string().contains("ru"));
    }
}
