//! Experiment configuration: one TOML document, overridable from the CLI.
//!
//! Precedence: command-line flags, then the config file, then built-in
//! defaults. Relative paths resolve against the config file's directory.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::HarnessError;
use crate::client::BackendSpec;
use crate::grammar::{
    enumerate_grid, parse_condition_label, GridMode, HintCondition, PrefixTemplateSet,
};
use crate::morph::AnalysisConfig;
use crate::wrap::StripRuleSet;

/// Which conditions to run.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(untagged)]
pub enum ConditionSelection {
    /// `"table1"` or `"full-grid"`.
    Grid(String),
    Labels(Vec<String>),
}

impl Default for ConditionSelection {
    fn default() -> Self {
        ConditionSelection::Grid("table1".into())
    }
}

/// Text preparation applied to hypotheses and references right before BLEU.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Tokenizer {
    /// Input is already tokenized; split on whitespace only.
    #[default]
    None,
    /// Split punctuation off words, except between two word characters.
    Simple,
}

impl Tokenizer {
    pub fn name(self) -> &'static str {
        match self {
            Tokenizer::None => "none",
            Tokenizer::Simple => "simple",
        }
    }

    pub fn apply(self, text: &str) -> String {
        match self {
            Tokenizer::None => text.to_string(),
            Tokenizer::Simple => simple_tokenize(text),
        }
    }
}

fn is_punct(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(
            c,
            '“' | '”' | '„' | '«' | '»' | '…' | '—' | '–' | '׳' | '״' | '¿' | '¡'
        )
}

fn simple_tokenize(text: &str) -> String {
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::with_capacity(text.len() + 8);
    for (i, &c) in chars.iter().enumerate() {
        if is_punct(c) {
            let inner = i > 0
                && i + 1 < chars.len()
                && chars[i - 1].is_alphanumeric()
                && chars[i + 1].is_alphanumeric();
            if inner {
                out.push(c);
            } else {
                out.push(' ');
                out.push(c);
                out.push(' ');
            }
        } else {
            out.push(c);
        }
    }
    out.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditSection {
    pub conllu_dir: Option<PathBuf>,
    pub reference: Option<PathBuf>,
    pub speaker_lexicon: Option<PathBuf>,
    pub audience_lexicon: Option<PathBuf>,
    pub subject_relations: Option<Vec<String>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSection {
    pub cases: Option<PathBuf>,
    /// Directory of `<language>.toml` strip rule files.
    pub rules_dir: Option<PathBuf>,
}

/// The config document as written.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub backend: Option<String>,
    #[serde(default)]
    pub backends: Vec<BackendSpec>,
    pub templates: Option<PathBuf>,
    pub strip_rules: Option<PathBuf>,
    pub conditions: Option<ConditionSelection>,
    pub source_corpus: Option<PathBuf>,
    pub reference_corpus: Option<PathBuf>,
    pub cache: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub drop_unstripped: Option<bool>,
    pub lowercase_bleu: Option<bool>,
    pub tokenizer: Option<Tokenizer>,
    #[serde(default)]
    pub audit: AuditSection,
    #[serde(default)]
    pub probe: ProbeSection,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub conditions: Vec<String>,
    pub backend: Option<String>,
    pub cache: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub drop_unstripped: bool,
    pub lowercase_bleu: bool,
    pub full_grid: bool,
}

/// Fully resolved settings for one run.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub base_dir: PathBuf,
    pub backend: Option<BackendSpec>,
    pub templates: PrefixTemplateSet,
    pub strip_rules: Option<StripRuleSet>,
    pub conditions: Vec<HintCondition>,
    pub source_corpus: Option<PathBuf>,
    pub reference_corpus: Option<PathBuf>,
    pub cache: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub drop_unstripped: bool,
    pub lowercase_bleu: bool,
    pub tokenizer: Tokenizer,
    pub audit: AuditSection,
    pub probe: ProbeSection,
}

fn config_err(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}

impl ExperimentConfig {
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read config {}: {e}", path.display())))?;
        let file: ConfigFile =
            toml::from_str(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        let parent = match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p,
            _ => Path::new("."),
        };
        let base = parent
            .canonicalize()
            .map_err(|e| config_err(format!("{}: {e}", parent.display())))?;
        Self::resolve(file, &base, overrides)
    }

    /// Resolves a parsed document; used directly when no file is given.
    pub fn resolve(
        file: ConfigFile,
        base_dir: &Path,
        overrides: &Overrides,
    ) -> Result<Self, HarnessError> {
        let at = |p: PathBuf| if p.is_absolute() { p } else { base_dir.join(p) };

        let templates = match file.templates {
            Some(p) => {
                let p = at(p);
                require_file(&p, "templates")?;
                PrefixTemplateSet::load(&p).map_err(|e| config_err(e.to_string()))?
            }
            None => PrefixTemplateSet::english(),
        };
        let strip_rules = match file.strip_rules {
            Some(p) => {
                let p = at(p);
                require_file(&p, "strip_rules")?;
                Some(StripRuleSet::load(&p).map_err(|e| config_err(e.to_string()))?)
            }
            None => None,
        };

        for (i, b) in file.backends.iter().enumerate() {
            if file.backends[..i].iter().any(|o| o.name == b.name) {
                return Err(config_err(format!(
                    "backend name `{}` is not unique",
                    b.name
                )));
            }
            b.validate().map_err(|e| config_err(e.to_string()))?;
        }
        let wanted = overrides.backend.clone().or(file.backend);
        let backend = match wanted {
            Some(name) => Some(
                file.backends
                    .iter()
                    .find(|b| b.name == name)
                    .cloned()
                    .ok_or_else(|| config_err(format!("no backend named `{name}`")))?,
            ),
            None if file.backends.len() == 1 => file.backends.first().cloned(),
            None if file.backends.is_empty() => None,
            None => {
                return Err(config_err(
                    "several backends defined; choose one with `backend`",
                ))
            }
        };
        let backend = backend.map(|mut b| {
            b.fixture = b.fixture.map(at);
            b
        });

        let selection = if !overrides.conditions.is_empty() {
            ConditionSelection::Labels(overrides.conditions.clone())
        } else if overrides.full_grid {
            ConditionSelection::Grid("full-grid".into())
        } else {
            file.conditions.unwrap_or_default()
        };
        let conditions = resolve_conditions(&selection, &templates)?;

        Ok(ExperimentConfig {
            base_dir: base_dir.to_path_buf(),
            backend,
            templates,
            strip_rules,
            conditions,
            source_corpus: file.source_corpus.map(at),
            reference_corpus: file.reference_corpus.map(at),
            cache: overrides.cache.clone().or(file.cache.map(at)),
            output_dir: overrides
                .output_dir
                .clone()
                .or(file.output_dir.map(at))
                .unwrap_or_else(|| base_dir.join("out")),
            drop_unstripped: overrides.drop_unstripped || file.drop_unstripped.unwrap_or(false),
            lowercase_bleu: overrides.lowercase_bleu || file.lowercase_bleu.unwrap_or(false),
            tokenizer: file.tokenizer.unwrap_or_default(),
            audit: AuditSection {
                conllu_dir: file.audit.conllu_dir.map(at),
                reference: file.audit.reference.map(at),
                speaker_lexicon: file.audit.speaker_lexicon.map(at),
                audience_lexicon: file.audit.audience_lexicon.map(at),
                subject_relations: file.audit.subject_relations,
            },
            probe: ProbeSection {
                cases: file.probe.cases.map(at),
                rules_dir: file.probe.rules_dir.map(at),
            },
        })
    }

    pub fn backend(&self) -> Result<&BackendSpec, HarnessError> {
        self.backend
            .as_ref()
            .ok_or_else(|| config_err("no backend configured"))
    }

    pub fn strip_rules(&self) -> Result<&StripRuleSet, HarnessError> {
        self.strip_rules
            .as_ref()
            .ok_or_else(|| config_err("no strip_rules configured"))
    }

    pub fn analysis(&self) -> AnalysisConfig {
        match &self.audit.subject_relations {
            Some(rels) => AnalysisConfig {
                subject_relations: rels.iter().cloned().collect(),
            },
            None => AnalysisConfig::default(),
        }
    }

    /// Checks everything a translation run needs before it starts.
    pub fn check_experiment_inputs(&self) -> Result<(), HarnessError> {
        let backend = self.backend()?;
        if let Some(f) = &backend.fixture {
            require_file(f, "backend fixture")?;
        }
        self.strip_rules()?;
        for (p, what) in [
            (&self.source_corpus, "source_corpus"),
            (&self.reference_corpus, "reference_corpus"),
        ] {
            let p = p
                .as_ref()
                .ok_or_else(|| config_err(format!("{what} is not set")))?;
            require_file(p, what)?;
        }
        Ok(())
    }
}

fn require_file(path: &Path, what: &str) -> Result<(), HarnessError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(config_err(format!(
            "{what}: {} does not exist",
            path.display()
        )))
    }
}

/// Resolves a selection against the template set. The baseline is always
/// included because every report measures deltas against it.
pub fn resolve_conditions(
    selection: &ConditionSelection,
    templates: &PrefixTemplateSet,
) -> Result<Vec<HintCondition>, HarnessError> {
    let mut conditions = match selection {
        ConditionSelection::Grid(name) => match name.as_str() {
            "table1" => enumerate_grid(templates, GridMode::Standard),
            "full-grid" => enumerate_grid(templates, GridMode::Full),
            other => {
                return Err(config_err(format!(
                "conditions must be \"table1\", \"full-grid\" or a list of labels, not `{other}`"
            )))
            }
        },
        ConditionSelection::Labels(labels) => {
            let mut out: Vec<HintCondition> = Vec::new();
            for label in labels {
                let c = parse_condition_label(label).map_err(|e| config_err(e.to_string()))?;
                if templates.get(label).is_none() {
                    return Err(config_err(format!(
                        "unknown condition `{label}`: no template"
                    )));
                }
                if !out.contains(&c) {
                    out.push(c);
                }
            }
            out
        }
    };
    if !conditions.iter().any(HintCondition::is_baseline) {
        conditions.insert(0, HintCondition::baseline());
    }
    Ok(conditions)
}
