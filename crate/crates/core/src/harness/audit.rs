//! Morphological audit over dependency-parsed translations: one CoNLL-U file
//! per condition, compared against a parsed reference translation.

use std::path::{Path, PathBuf};

use serde::Serialize;

use super::svg::grouped_bar_chart;
use super::{read_to_string, write_file, HarnessError};
use crate::morph::{
    audience_number_chart, compare_to_reference, parse_conllu, reports_to_csv, speaker_chart,
    AnalysisConfig, ChartData, MorphReport, ParsedSentence, PronounLexicon, ReferenceComparison,
};

pub const REFERENCE_SERIES: &str = "reference";

/// Hebrew pronoun lexicon shipped with the crate.
pub fn hebrew_lexicon() -> PronounLexicon {
    PronounLexicon::parse(include_str!("../../data/lexicons/he.tsv"))
        .expect("bundled lexicon parses")
}

#[derive(Debug, Clone)]
pub struct AuditPaths {
    /// Directory holding `<condition label>.conllu` files.
    pub conllu_dir: PathBuf,
    pub reference: PathBuf,
    /// Bundled Hebrew lexicon when absent.
    pub speaker_lexicon: Option<PathBuf>,
    pub audience_lexicon: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
pub struct ChartBundle {
    pub speaker_gender: ChartData,
    pub audience_number: ChartData,
}

#[derive(Debug)]
pub struct AuditOutcome {
    pub reports: Vec<(String, MorphReport)>,
    pub reference: MorphReport,
    pub comparison: ReferenceComparison,
    pub charts: ChartBundle,
    pub written: Vec<PathBuf>,
}

fn load_lexicon(path: &Option<PathBuf>) -> Result<PronounLexicon, HarnessError> {
    match path {
        Some(p) => {
            PronounLexicon::load(p).map_err(|e| HarnessError::Data(format!("{}: {e}", p.display())))
        }
        None => Ok(hebrew_lexicon()),
    }
}

pub fn parse_conllu_file(path: &Path) -> Result<Vec<ParsedSentence>, HarnessError> {
    let text = read_to_string(path)?;
    parse_conllu(&text).map_err(|e| HarnessError::Data(format!("{}: {e}", path.display())))
}

/// Audits each condition's parses, compares them with the reference, and
/// writes `morph_report.csv`, `morph_comparison.csv`, `charts.json`,
/// `speaker_gender.svg` and `audience_number.svg` to `out_dir`.
pub fn run_morph_audit(
    paths: &AuditPaths,
    labels: &[String],
    config: &AnalysisConfig,
    out_dir: &Path,
) -> Result<AuditOutcome, HarnessError> {
    let expected: Vec<PathBuf> = labels
        .iter()
        .map(|l| paths.conllu_dir.join(format!("{l}.conllu")))
        .collect();
    let missing: Vec<String> = expected
        .iter()
        .chain(std::iter::once(&paths.reference))
        .filter(|p| !p.is_file())
        .map(|p| p.display().to_string())
        .collect();
    if !missing.is_empty() {
        return Err(HarnessError::Data(format!(
            "missing CoNLL-U input; expected: {}",
            missing.join(", ")
        )));
    }

    let speaker_lex = load_lexicon(&paths.speaker_lexicon)?;
    let audience_lex = load_lexicon(&paths.audience_lexicon)?;

    let mut reports = Vec::with_capacity(labels.len());
    for (label, path) in labels.iter().zip(&expected) {
        let sentences = parse_conllu_file(path)?;
        reports.push((
            label.clone(),
            MorphReport::compute(&sentences, &speaker_lex, &audience_lex, config),
        ));
    }
    let reference_sentences = parse_conllu_file(&paths.reference)?;
    let reference = MorphReport::compute(&reference_sentences, &speaker_lex, &audience_lex, config);
    let comparison = compare_to_reference(&reports, &reference)
        .map_err(|e| HarnessError::Config(e.to_string()))?;

    let mut with_reference = reports.clone();
    with_reference.push((REFERENCE_SERIES.to_string(), reference.clone()));
    let charts = ChartBundle {
        speaker_gender: speaker_chart(&with_reference),
        audience_number: audience_number_chart(&with_reference),
    };

    let csv_err = |e: csv::Error| HarnessError::Data(e.to_string());
    let outputs = [
        (
            "morph_report.csv",
            reports_to_csv(&with_reference).map_err(csv_err)?,
        ),
        (
            "morph_comparison.csv",
            comparison.to_csv().map_err(csv_err)?,
        ),
        (
            "charts.json",
            serde_json::to_string_pretty(&charts).expect("charts serialize") + "\n",
        ),
        (
            "speaker_gender.svg",
            grouped_bar_chart(&charts.speaker_gender),
        ),
        (
            "audience_number.svg",
            grouped_bar_chart(&charts.audience_number),
        ),
    ];
    let mut written = Vec::new();
    for (name, contents) in outputs {
        let p = out_dir.join(name);
        write_file(&p, contents)?;
        written.push(p);
    }

    Ok(AuditOutcome {
        reports,
        reference,
        comparison,
        charts,
        written,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const DOC: &str = "# sent_id = 1
1\tאני\tאני\tPRON\t_\tNumber=Sing|Person=1\t2\tnsubj\t_\t_
2\tהלכתי\tהלך\tVERB\t_\tGender=Fem|Number=Sing\t0\troot\t_\t_

";

    #[test]
    fn empty_dir_lists_expected_files() {
        let dir = tempfile::tempdir().unwrap();
        let paths = AuditPaths {
            conllu_dir: dir.path().to_path_buf(),
            reference: dir.path().join("reference.conllu"),
            speaker_lexicon: None,
            audience_lexicon: None,
        };
        let labels = vec!["baseline".to_string(), "she".to_string()];
        let err =
            run_morph_audit(&paths, &labels, &AnalysisConfig::default(), dir.path()).unwrap_err();
        let msg = err.to_string();
        assert_eq!(err.exit_code(), 3);
        for f in ["baseline.conllu", "she.conllu", "reference.conllu"] {
            assert!(msg.contains(f), "{msg}");
        }
    }

    #[test]
    fn parse_errors_name_the_file() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("baseline.conllu"), "1\tbroken\n\n").unwrap();
        std::fs::write(dir.path().join("ref.conllu"), DOC).unwrap();
        let paths = AuditPaths {
            conllu_dir: dir.path().to_path_buf(),
            reference: dir.path().join("ref.conllu"),
            speaker_lexicon: None,
            audience_lexicon: None,
        };
        let err = run_morph_audit(
            &paths,
            &["baseline".to_string()],
            &AnalysisConfig::default(),
            dir.path(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("baseline.conllu"), "{err}");
    }

    #[test]
    fn writes_all_outputs() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("baseline.conllu"), DOC).unwrap();
        std::fs::write(dir.path().join("ref.conllu"), DOC).unwrap();
        let paths = AuditPaths {
            conllu_dir: dir.path().to_path_buf(),
            reference: dir.path().join("ref.conllu"),
            speaker_lexicon: None,
            audience_lexicon: None,
        };
        let out = dir.path().join("out");
        let outcome = run_morph_audit(
            &paths,
            &["baseline".to_string()],
            &AnalysisConfig::default(),
            &out,
        )
        .unwrap();
        assert_eq!(outcome.written.len(), 5);
        assert_eq!(outcome.reports[0].1.speaker.feminine, 1);
        assert!(outcome
            .comparison
            .rows
            .iter()
            .all(|r| r.abs_diff.unwrap_or(0.0) == 0.0));
        let svg = std::fs::read_to_string(out.join("speaker_gender.svg")).unwrap();
        assert!(svg.contains("data-value=\"1.000\""));
    }
}
