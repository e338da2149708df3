//! The translation experiment: wrap, translate, strip and score every
//! configured condition, then write the records archive and the reports.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Tokenizer};
use super::{read_corpus, read_to_string, write_file, HarnessError};
use crate::bleu::{condition_report_paired, ConditionReport, MAX_ORDER};
use crate::client::{translate_corpus, Backend, TranslationCache, TranslationRecord};
use crate::grammar::{parse_condition_label, BASELINE_LABEL};
use crate::wrap::{strip_rate, StripMethod};

pub const RECORDS_FILE: &str = "records.jsonl";
pub const REPORT_CSV: &str = "report.csv";
pub const REPORT_JSON: &str = "report.json";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ScoreOptions {
    pub lowercase: bool,
    pub drop_unstripped: bool,
    pub tokenizer: Tokenizer,
}

impl ScoreOptions {
    pub fn from_config(cfg: &ExperimentConfig) -> Self {
        ScoreOptions {
            lowercase: cfg.lowercase_bleu,
            drop_unstripped: cfg.drop_unstripped,
            tokenizer: cfg.tokenizer,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub backend: String,
    pub sentences: usize,
    pub lowercase: bool,
    pub tokenizer: Tokenizer,
    /// `keep` or `drop`: what happened to pairs whose prefix was not stripped.
    pub unstripped_policy: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionSummary {
    pub condition: String,
    pub bleu: f64,
    pub precisions: [f64; MAX_ORDER],
    pub brevity_penalty: f64,
    pub length_ratio: f64,
    pub hyp_len: usize,
    pub ref_len: usize,
    pub delta_vs_baseline: f64,
    /// Absent for the baseline, which injects nothing.
    pub strip_rate: Option<f64>,
    pub unstripped: usize,
    pub scored_pairs: usize,
    /// BLEU under the other unstripped policy, for comparison.
    pub alternate_policy_bleu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub metadata: ReportMetadata,
    pub conditions: Vec<ConditionSummary>,
}

impl ExperimentReport {
    pub fn condition(&self, label: &str) -> Option<&ConditionSummary> {
        self.conditions.iter().find(|c| c.condition == label)
    }

    pub fn to_csv(&self) -> Result<String, HarnessError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| HarnessError::Data(e.to_string());
        let mut header: Vec<&str> = ConditionReport::CSV_HEADER.to_vec();
        header.extend([
            "strip_rate",
            "unstripped",
            "scored_pairs",
            "alternate_policy_bleu",
        ]);
        w.write_record(&header).map_err(csv_err)?;
        for c in &self.conditions {
            w.write_record([
                c.condition.clone(),
                format!("{:.2}", c.bleu),
                format!("{:.4}", c.precisions[0]),
                format!("{:.4}", c.precisions[1]),
                format!("{:.4}", c.precisions[2]),
                format!("{:.4}", c.precisions[3]),
                format!("{:.4}", c.brevity_penalty),
                format!("{:.4}", c.length_ratio),
                format!("{:.2}", c.delta_vs_baseline),
                c.strip_rate.map(|r| format!("{r:.4}")).unwrap_or_default(),
                c.unstripped.to_string(),
                c.scored_pairs.to_string(),
                format!("{:.2}", c.alternate_policy_bleu),
            ])
            .map_err(csv_err)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| HarnessError::Data(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

#[derive(Debug)]
pub struct ExperimentOutcome {
    pub report: ExperimentReport,
    pub records: Vec<TranslationRecord>,
    /// Translator invocations during this run, retries included.
    pub backend_calls: usize,
    pub records_path: PathBuf,
    pub csv_path: PathBuf,
    pub json_path: PathBuf,
}

/// Builds the configured backend.
pub fn build_backend(cfg: &ExperimentConfig) -> Result<Backend, HarnessError> {
    Ok(Backend::from_spec(cfg.backend()?, &cfg.base_dir)?)
}

/// Runs every condition in order against `backend` and writes
/// `records.jsonl`, `report.csv` and `report.json` to the output directory.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    backend: &Backend,
) -> Result<ExperimentOutcome, HarnessError> {
    cfg.check_experiment_inputs()?;
    let rules = cfg.strip_rules()?;
    let source_path = cfg.source_corpus.as_ref().expect("checked");
    let reference_path = cfg.reference_corpus.as_ref().expect("checked");
    let sources = read_corpus(source_path)?;
    let references = read_corpus(reference_path)?;
    if sources.len() != references.len() {
        return Err(HarnessError::Data(format!(
            "corpus length mismatch: {} has {} lines, {} has {}",
            source_path.display(),
            sources.len(),
            reference_path.display(),
            references.len()
        )));
    }

    let mut cache = match &cfg.cache {
        Some(path) => TranslationCache::open(path).map_err(HarnessError::io(path))?,
        None => TranslationCache::in_memory(),
    };
    if cache.skipped_lines() > 0 {
        log::warn!("cache: skipped {} unreadable lines", cache.skipped_lines());
    }

    let calls_before = backend.calls();
    let mut records = Vec::with_capacity(sources.len() * cfg.conditions.len());
    for condition in &cfg.conditions {
        log::info!(
            "condition {condition}: translating {} sentences",
            sources.len()
        );
        let batch = translate_corpus(
            &sources,
            condition,
            backend,
            &mut cache,
            &cfg.templates,
            rules,
        )?;
        records.extend(batch);
    }
    let backend_calls = backend.calls() - calls_before;

    let report = score_records(&records, &references, ScoreOptions::from_config(cfg))?;

    let records_path = cfg.output_dir.join(RECORDS_FILE);
    let csv_path = cfg.output_dir.join(REPORT_CSV);
    let json_path = cfg.output_dir.join(REPORT_JSON);
    write_file(&records_path, records_to_jsonl(&records))?;
    write_file(&csv_path, report.to_csv()?)?;
    write_file(&json_path, report.to_json())?;

    Ok(ExperimentOutcome {
        report,
        records,
        backend_calls,
        records_path,
        csv_path,
        json_path,
    })
}

pub fn records_to_jsonl(records: &[TranslationRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("record serializes"));
        out.push('\n');
    }
    out
}

pub fn load_records(path: &Path) -> Result<Vec<TranslationRecord>, HarnessError> {
    read_to_string(path)?
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l)
                .map_err(|e| HarnessError::Data(format!("{} line {}: {e}", path.display(), i + 1)))
        })
        .collect()
}

/// Recomputes the report from a records archive; no backend involved.
pub fn score_records(
    records: &[TranslationRecord],
    references: &[String],
    opts: ScoreOptions,
) -> Result<ExperimentReport, HarnessError> {
    let mut groups: Vec<(String, Vec<&TranslationRecord>)> = Vec::new();
    for r in records {
        match groups.iter_mut().find(|(l, _)| *l == r.condition_label) {
            Some((_, g)) => g.push(r),
            None => {
                parse_condition_label(&r.condition_label)
                    .map_err(|e| HarnessError::Data(format!("records: {e}")))?;
                groups.push((r.condition_label.clone(), vec![r]));
            }
        }
    }
    if groups.is_empty() {
        return Err(HarnessError::Data("no records to score".into()));
    }
    if !groups.iter().any(|(l, _)| l == BASELINE_LABEL) {
        return Err(HarnessError::Data(
            "records contain no baseline condition".into(),
        ));
    }
    for (label, g) in &groups {
        if g.len() != references.len() {
            return Err(HarnessError::Data(format!(
                "condition `{label}` has {} records but there are {} references",
                g.len(),
                references.len()
            )));
        }
    }

    let tokenized_refs: Vec<String> = references.iter().map(|r| opts.tokenizer.apply(r)).collect();
    let primary = bleu_under(&groups, &tokenized_refs, opts, opts.drop_unstripped)?;
    let alternate = bleu_under(&groups, &tokenized_refs, opts, !opts.drop_unstripped)?;

    let mut conditions = Vec::with_capacity(groups.len());
    for row in &primary.rows {
        let (_, g) = groups
            .iter()
            .find(|(l, _)| *l == row.condition)
            .expect("same labels");
        let outcomes: Vec<_> = g.iter().map(|r| r.strip.clone()).collect();
        let unstripped = outcomes
            .iter()
            .filter(|o| o.method == StripMethod::Unstripped)
            .count();
        let strip = if row.condition == BASELINE_LABEL {
            None
        } else {
            Some(strip_rate(&outcomes).map_err(|e| HarnessError::Data(e.to_string()))?)
        };
        let scored_pairs = if opts.drop_unstripped {
            g.len() - unstripped
        } else {
            g.len()
        };
        let s = &row.score;
        conditions.push(ConditionSummary {
            condition: row.condition.clone(),
            bleu: s.bleu,
            precisions: s.precisions,
            brevity_penalty: s.brevity_penalty,
            length_ratio: s.length_ratio,
            hyp_len: s.hyp_len,
            ref_len: s.ref_len,
            delta_vs_baseline: row.delta_vs_baseline,
            strip_rate: strip,
            unstripped,
            scored_pairs,
            alternate_policy_bleu: alternate
                .row(&row.condition)
                .map(|r| r.score.bleu)
                .unwrap_or(0.0),
        });
    }

    Ok(ExperimentReport {
        metadata: ReportMetadata {
            backend: records[0].backend_name.clone(),
            sentences: references.len(),
            lowercase: opts.lowercase,
            tokenizer: opts.tokenizer,
            unstripped_policy: if opts.drop_unstripped { "drop" } else { "keep" }.into(),
        },
        conditions,
    })
}

fn bleu_under(
    groups: &[(String, Vec<&TranslationRecord>)],
    references: &[String],
    opts: ScoreOptions,
    drop_unstripped: bool,
) -> Result<ConditionReport, HarnessError> {
    let mut owned: Vec<(String, Vec<String>, Vec<&str>)> = Vec::new();
    for (label, g) in groups {
        let mut hyps = Vec::new();
        let mut refs = Vec::new();
        for (r, reference) in g.iter().zip(references) {
            if drop_unstripped && r.strip.method == StripMethod::Unstripped {
                continue;
            }
            hyps.push(opts.tokenizer.apply(&r.strip.stripped));
            refs.push(reference.as_str());
        }
        owned.push((label.clone(), hyps, refs));
    }
    let borrowed: Vec<(String, &[String], &[&str])> = owned
        .iter()
        .map(|(l, h, r)| (l.clone(), h.as_slice(), r.as_slice()))
        .collect();
    condition_report_paired(&borrowed, opts.lowercase)
        .map_err(|e| HarnessError::Data(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wrap::{passthrough, StripOutcome};

    fn record(label: &str, text: &str, method: StripMethod) -> TranslationRecord {
        TranslationRecord {
            source: "src".into(),
            condition_label: label.into(),
            wrapped: "w".into(),
            raw_translation: text.into(),
            strip: StripOutcome {
                stripped: text.into(),
                method,
                matched_pattern: None,
            },
            backend_name: "t".into(),
            from_cache: false,
            timestamp: 0,
        }
    }

    #[test]
    fn drop_policy_changes_scored_pairs() {
        let refs: Vec<String> = vec!["a b c d e".into(), "f g h i j".into()];
        let records = vec![
            record("baseline", "a b c d e", StripMethod::NoPrefix),
            record("baseline", "f g h i j", StripMethod::NoPrefix),
            record("she", "a b c d e", StripMethod::ExactPattern),
            record("she", "She said: f g h i j", StripMethod::Unstripped),
        ];
        let keep = score_records(&records, &refs, ScoreOptions::default()).unwrap();
        let she = keep.condition("she").unwrap();
        assert_eq!(she.unstripped, 1);
        assert_eq!(she.scored_pairs, 2);
        assert_eq!(she.strip_rate, Some(0.5));
        assert!(she.bleu < 100.0);
        assert!((she.alternate_policy_bleu - 100.0).abs() < 1e-9);
        assert_eq!(keep.condition("baseline").unwrap().strip_rate, None);

        let drop = score_records(
            &records,
            &refs,
            ScoreOptions {
                drop_unstripped: true,
                ..Default::default()
            },
        )
        .unwrap();
        let she = drop.condition("she").unwrap();
        assert_eq!(she.scored_pairs, 1);
        assert!((she.bleu - 100.0).abs() < 1e-9);
        assert_eq!(drop.metadata.unstripped_policy, "drop");
    }

    #[test]
    fn missing_baseline_and_short_conditions_are_data_errors() {
        let refs: Vec<String> = vec!["a".into()];
        let r = vec![record("she", "a", StripMethod::ExactPattern)];
        assert!(matches!(
            score_records(&r, &refs, ScoreOptions::default()),
            Err(HarnessError::Data(_))
        ));
        let r = vec![
            record("baseline", "a", StripMethod::NoPrefix),
            record("baseline", "a", StripMethod::NoPrefix),
        ];
        assert!(matches!(
            score_records(&r, &refs, ScoreOptions::default()),
            Err(HarnessError::Data(_))
        ));
    }

    #[test]
    fn records_round_trip_through_jsonl() {
        let dir = tempfile::tempdir().unwrap();
        let mut r = record("baseline", "x", StripMethod::NoPrefix);
        r.strip = passthrough("x");
        let path = dir.path().join("r.jsonl");
        std::fs::write(&path, records_to_jsonl(&[r.clone(), r.clone()])).unwrap();
        assert_eq!(load_records(&path).unwrap(), vec![r.clone(), r]);
    }

    #[test]
    fn csv_has_one_row_per_condition() {
        let refs: Vec<String> = vec!["a b c d".into()];
        let records = vec![
            record("she+them", "a b c d", StripMethod::ExactPattern),
            record("baseline", "a b c d", StripMethod::NoPrefix),
        ];
        let report = score_records(&records, &refs, ScoreOptions::default()).unwrap();
        let csv = report.to_csv().unwrap();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("baseline,100.00,"));
        assert!(lines[2].starts_with("she+them,100.00,"));
        assert!(lines[2].contains(",1.0000,0,1,100.00"));
    }
}
