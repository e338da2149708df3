//! Corpus BLEU with the counting conventions of the Moses `multi-bleu.perl`
//! scorer: whitespace tokens, clipped n-gram counts (orders 1 to 4) summed
//! over the whole corpus, no smoothing, a single reference per hypothesis.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grammar::{grid_position, BASELINE_LABEL};

pub const MAX_ORDER: usize = 4;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BleuError {
    #[error("{hypotheses} hypotheses but {references} references")]
    LengthMismatch {
        hypotheses: usize,
        references: usize,
    },
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("condition `{condition}`: {source}")]
    Condition {
        condition: String,
        source: Box<BleuError>,
    },
    #[error("no baseline condition to compare against")]
    MissingBaseline,
    #[error("condition `{0}` appears more than once")]
    DuplicateCondition(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BleuScore {
    /// Percentage in [0, 100].
    pub bleu: f64,
    pub precisions: [f64; MAX_ORDER],
    pub brevity_penalty: f64,
    pub hyp_len: usize,
    pub ref_len: usize,
    pub length_ratio: f64,
}

impl fmt::Display for BleuScore {
    /// Same layout as the Moses script's summary line.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "BLEU = {:.2}, {:.1}/{:.1}/{:.1}/{:.1} (BP={:.3}, ratio={:.3}, hyp_len={}, ref_len={})",
            self.bleu,
            100.0 * self.precisions[0],
            100.0 * self.precisions[1],
            100.0 * self.precisions[2],
            100.0 * self.precisions[3],
            self.brevity_penalty,
            self.length_ratio,
            self.hyp_len,
            self.ref_len
        )
    }
}

fn ngram_counts<'a>(tokens: &'a [&'a str], n: usize) -> HashMap<&'a [&'a str], usize> {
    let mut counts = HashMap::new();
    for w in tokens.windows(n) {
        *counts.entry(w).or_insert(0) += 1;
    }
    counts
}

pub fn corpus_bleu<H, R>(
    hypotheses: &[H],
    references: &[R],
    lowercase: bool,
) -> Result<BleuScore, BleuError>
where
    H: AsRef<str>,
    R: AsRef<str>,
{
    if hypotheses.len() != references.len() {
        return Err(BleuError::LengthMismatch {
            hypotheses: hypotheses.len(),
            references: references.len(),
        });
    }
    if hypotheses.is_empty() {
        return Err(BleuError::EmptyCorpus);
    }

    let mut correct = [0u64; MAX_ORDER];
    let mut total = [0u64; MAX_ORDER];
    let mut hyp_len = 0usize;
    let mut ref_len = 0usize;

    for (hyp, reference) in hypotheses.iter().zip(references) {
        let (hyp, reference) = if lowercase {
            (
                hyp.as_ref().to_lowercase(),
                reference.as_ref().to_lowercase(),
            )
        } else {
            (hyp.as_ref().to_string(), reference.as_ref().to_string())
        };
        let hyp_tokens: Vec<&str> = hyp.split_whitespace().collect();
        let ref_tokens: Vec<&str> = reference.split_whitespace().collect();
        hyp_len += hyp_tokens.len();
        ref_len += ref_tokens.len();

        for n in 1..=MAX_ORDER {
            let hyp_counts = ngram_counts(&hyp_tokens, n);
            let ref_counts = ngram_counts(&ref_tokens, n);
            for (gram, count) in hyp_counts {
                total[n - 1] += count as u64;
                if let Some(&available) = ref_counts.get(gram) {
                    correct[n - 1] += count.min(available) as u64;
                }
            }
        }
    }

    let mut precisions = [0.0; MAX_ORDER];
    for n in 0..MAX_ORDER {
        if total[n] > 0 {
            precisions[n] = correct[n] as f64 / total[n] as f64;
        }
    }

    if ref_len == 0 {
        return Ok(BleuScore {
            bleu: 0.0,
            precisions,
            brevity_penalty: 1.0,
            hyp_len,
            ref_len,
            length_ratio: 0.0,
        });
    }

    // Empty output everywhere: the penalty's limit is 0.
    let brevity_penalty = if hyp_len == 0 {
        0.0
    } else if hyp_len < ref_len {
        (1.0 - ref_len as f64 / hyp_len as f64).exp()
    } else {
        1.0
    };
    let bleu = if precisions.contains(&0.0) {
        0.0
    } else {
        let mean_log = precisions.iter().map(|p| p.ln()).sum::<f64>() / MAX_ORDER as f64;
        100.0 * brevity_penalty * mean_log.exp()
    };

    Ok(BleuScore {
        bleu,
        precisions,
        brevity_penalty,
        hyp_len,
        ref_len,
        length_ratio: hyp_len as f64 / ref_len as f64,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionRow {
    pub condition: String,
    pub score: BleuScore,
    pub delta_vs_baseline: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub rows: Vec<ConditionRow>,
}

/// Scores each condition's hypotheses against the shared references.
/// Rows come back in grid order with deltas against the baseline row.
pub fn condition_report<H: AsRef<str>, R: AsRef<str>>(
    hypotheses_by_condition: &[(String, Vec<H>)],
    references: &[R],
    lowercase: bool,
) -> Result<ConditionReport, BleuError> {
    let pairs: Vec<(String, &[H], &[R])> = hypotheses_by_condition
        .iter()
        .map(|(label, hyps)| (label.clone(), hyps.as_slice(), references))
        .collect();
    condition_report_paired(&pairs, lowercase)
}

/// Like [`condition_report`] but with a reference list per condition, which
/// is needed when some sentence pairs are dropped for one condition only.
pub fn condition_report_paired<H: AsRef<str>, R: AsRef<str>>(
    conditions: &[(String, &[H], &[R])],
    lowercase: bool,
) -> Result<ConditionReport, BleuError> {
    let mut scored = Vec::with_capacity(conditions.len());
    for (label, hyps, refs) in conditions {
        if scored.iter().any(|(l, _): &(String, BleuScore)| l == label) {
            return Err(BleuError::DuplicateCondition(label.clone()));
        }
        let score = corpus_bleu(hyps, refs, lowercase).map_err(|e| BleuError::Condition {
            condition: label.clone(),
            source: Box::new(e),
        })?;
        scored.push((label.clone(), score));
    }
    let baseline = scored
        .iter()
        .find(|(l, _)| l == BASELINE_LABEL)
        .map(|(_, s)| s.bleu)
        .ok_or(BleuError::MissingBaseline)?;
    let mut rows: Vec<ConditionRow> = scored
        .into_iter()
        .map(|(condition, score)| ConditionRow {
            delta_vs_baseline: score.bleu - baseline,
            condition,
            score,
        })
        .collect();
    rows.sort_by_key(|r| grid_position(&r.condition));
    Ok(ConditionReport { rows })
}

impl ConditionReport {
    pub fn row(&self, condition: &str) -> Option<&ConditionRow> {
        self.rows.iter().find(|r| r.condition == condition)
    }

    pub const CSV_HEADER: [&'static str; 9] = [
        "condition",
        "bleu",
        "p1",
        "p2",
        "p3",
        "p4",
        "bp",
        "len_ratio",
        "delta_vs_baseline",
    ];

    pub fn to_csv(&self) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(Self::CSV_HEADER)?;
        for r in &self.rows {
            let s = &r.score;
            w.write_record([
                r.condition.clone(),
                format!("{:.2}", s.bleu),
                format!("{:.4}", s.precisions[0]),
                format!("{:.4}", s.precisions[1]),
                format!("{:.4}", s.precisions[2]),
                format!("{:.4}", s.precisions[3]),
                format!("{:.4}", s.brevity_penalty),
                format!("{:.4}", s.length_ratio),
                format!("{:.2}", r.delta_vs_baseline),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}
