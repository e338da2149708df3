//! Gender and number statistics over dependency parses of translations.
//!
//! Speaker side: first-person-singular subject pronouns and the gender of the
//! predicate governing them (a verb, or the adjective/noun of a copular
//! clause). Audience side: second-person pronouns, their number and gender,
//! and for subjects the gender/number of their governing predicate.

mod conllu;

use std::collections::{BTreeMap, BTreeSet};
use std::ops::AddAssign;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use conllu::{
    parse_conllu, ConlluError, Features, MultiwordRange, ParsedSentence, Token, Upos,
};

use crate::grammar::BASELINE_LABEL;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MorphError {
    #[error("lexicon line {line}: {reason}")]
    Lexicon { line: usize, reason: String },
    #[error("no baseline condition among the audited reports")]
    MissingBaseline,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GenderLabel {
    Masculine,
    Feminine,
    Both,
    Unmarked,
}

impl GenderLabel {
    /// Reads `Gender`: both Masc and Fem listed gives `Both`.
    pub fn from_feats(feats: &Features) -> Option<Self> {
        let g = feats.get("Gender")?;
        match (g.contains("Masc"), g.contains("Fem")) {
            (true, true) => Some(GenderLabel::Both),
            (true, false) => Some(GenderLabel::Masculine),
            (false, true) => Some(GenderLabel::Feminine),
            (false, false) => None,
        }
    }

    fn key(self) -> &'static str {
        match self {
            GenderLabel::Masculine => "masculine",
            GenderLabel::Feminine => "feminine",
            GenderLabel::Both => "both",
            GenderLabel::Unmarked => "unmarked",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NumberLabel {
    Singular,
    Plural,
    Unmarked,
}

impl NumberLabel {
    pub fn from_feats(feats: &Features) -> Option<Self> {
        let n = feats.get("Number")?;
        match (n.contains("Sing"), n.contains("Plur")) {
            (true, false) => Some(NumberLabel::Singular),
            (false, true) => Some(NumberLabel::Plural),
            _ => None,
        }
    }

    fn key(self) -> &'static str {
        match self {
            NumberLabel::Singular => "singular",
            NumberLabel::Plural => "plural",
            NumberLabel::Unmarked => "unmarked",
        }
    }
}

/// One pronoun form known to the audit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PronounEntry {
    pub form: String,
    pub lemma: Option<String>,
    pub person: u8,
    pub number: Option<NumberLabel>,
    pub gender: Option<GenderLabel>,
}

/// Pronoun list read from a TSV file: form, lemma, person, number, optional
/// gender. `_` marks an empty field; `#` starts a comment line.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PronounLexicon {
    pub entries: Vec<PronounEntry>,
}

impl PronounLexicon {
    pub fn parse(text: &str) -> Result<Self, MorphError> {
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let err = |reason: String| MorphError::Lexicon {
                line: i + 1,
                reason,
            };
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
            if !(4..=5).contains(&cols.len()) {
                return Err(err(format!("expected 4 or 5 fields, found {}", cols.len())));
            }
            let person = match cols[2] {
                "1" => 1,
                "2" => 2,
                "3" => 3,
                p => return Err(err(format!("bad person `{p}`"))),
            };
            let number = match cols[3] {
                "Sing" => Some(NumberLabel::Singular),
                "Plur" => Some(NumberLabel::Plural),
                "_" => None,
                n => return Err(err(format!("bad number `{n}`"))),
            };
            let gender = match cols.get(4).copied().unwrap_or("_") {
                "Masc" => Some(GenderLabel::Masculine),
                "Fem" => Some(GenderLabel::Feminine),
                "Fem,Masc" | "Masc,Fem" => Some(GenderLabel::Both),
                "_" => None,
                g => return Err(err(format!("bad gender `{g}`"))),
            };
            entries.push(PronounEntry {
                form: cols[0].to_string(),
                lemma: (cols[1] != "_").then(|| cols[1].to_string()),
                person,
                number,
                gender,
            });
        }
        Ok(PronounLexicon { entries })
    }

    pub fn load(path: &Path) -> Result<Self, MorphError> {
        let text = std::fs::read_to_string(path).map_err(|e| MorphError::Lexicon {
            line: 0,
            reason: format!("cannot read {}: {e}", path.display()),
        })?;
        Self::parse(&text)
    }

    /// Entry for a PRON token whose form or lemma is listed, restricted to
    /// entries accepted by `keep`.
    fn lookup(&self, token: &Token, keep: impl Fn(&PronounEntry) -> bool) -> Option<&PronounEntry> {
        if token.upos != Some(Upos::Pron) {
            return None;
        }
        let form = token.form.to_lowercase();
        let lemma = token.lemma.to_lowercase();
        // a form match beats a lemma match
        let kept = || self.entries.iter().filter(|e| keep(e));
        kept().find(|e| e.form.to_lowercase() == form).or_else(|| {
            kept().find(|e| e.lemma.as_ref().is_some_and(|l| l.to_lowercase() == lemma))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub subject_relations: BTreeSet<String>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            subject_relations: ["nsubj", "nsubj:pass", "nsubj:cop"]
                .into_iter()
                .map(String::from)
                .collect(),
        }
    }
}

impl AnalysisConfig {
    fn is_subject(&self, token: &Token) -> bool {
        self.subject_relations.contains(&token.deprel)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenderDistribution {
    pub masculine: u64,
    pub feminine: u64,
    pub both: u64,
    pub unmarked: u64,
}

impl GenderDistribution {
    pub fn add(&mut self, label: GenderLabel) {
        *self.slot(label) += 1;
    }

    fn slot(&mut self, label: GenderLabel) -> &mut u64 {
        match label {
            GenderLabel::Masculine => &mut self.masculine,
            GenderLabel::Feminine => &mut self.feminine,
            GenderLabel::Both => &mut self.both,
            GenderLabel::Unmarked => &mut self.unmarked,
        }
    }

    pub fn count(&self, label: GenderLabel) -> u64 {
        match label {
            GenderLabel::Masculine => self.masculine,
            GenderLabel::Feminine => self.feminine,
            GenderLabel::Both => self.both,
            GenderLabel::Unmarked => self.unmarked,
        }
    }

    pub fn total(&self) -> u64 {
        self.masculine + self.feminine + self.both + self.unmarked
    }

    /// Share among masculine, feminine and both; `None` when nothing is marked
    /// or for `Unmarked`.
    pub fn proportion_incl_both(&self, label: GenderLabel) -> Option<f64> {
        let denom = self.masculine + self.feminine + self.both;
        if label == GenderLabel::Unmarked || denom == 0 {
            return None;
        }
        Some(self.count(label) as f64 / denom as f64)
    }

    /// Share among masculine and feminine only.
    pub fn proportion_excl_both(&self, label: GenderLabel) -> Option<f64> {
        let denom = self.masculine + self.feminine;
        if !matches!(label, GenderLabel::Masculine | GenderLabel::Feminine) || denom == 0 {
            return None;
        }
        Some(self.count(label) as f64 / denom as f64)
    }
}

impl AddAssign for GenderDistribution {
    fn add_assign(&mut self, rhs: Self) {
        self.masculine += rhs.masculine;
        self.feminine += rhs.feminine;
        self.both += rhs.both;
        self.unmarked += rhs.unmarked;
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NumberDistribution {
    pub singular: u64,
    pub plural: u64,
    pub unmarked: u64,
}

impl NumberDistribution {
    pub fn add(&mut self, label: NumberLabel) {
        match label {
            NumberLabel::Singular => self.singular += 1,
            NumberLabel::Plural => self.plural += 1,
            NumberLabel::Unmarked => self.unmarked += 1,
        }
    }

    pub fn count(&self, label: NumberLabel) -> u64 {
        match label {
            NumberLabel::Singular => self.singular,
            NumberLabel::Plural => self.plural,
            NumberLabel::Unmarked => self.unmarked,
        }
    }

    pub fn total(&self) -> u64 {
        self.singular + self.plural + self.unmarked
    }

    /// Share among singular and plural.
    pub fn proportion(&self, label: NumberLabel) -> Option<f64> {
        let denom = self.singular + self.plural;
        if label == NumberLabel::Unmarked || denom == 0 {
            return None;
        }
        Some(self.count(label) as f64 / denom as f64)
    }
}

impl AddAssign for NumberDistribution {
    fn add_assign(&mut self, rhs: Self) {
        self.singular += rhs.singular;
        self.plural += rhs.plural;
        self.unmarked += rhs.unmarked;
    }
}

/// Second-person tallies.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AudienceStats {
    /// Number of every second-person pronoun.
    pub number: NumberDistribution,
    /// Gender of every second-person pronoun.
    pub gender: GenderDistribution,
    /// Gender of predicates governing second-person subjects.
    pub predicate_gender: GenderDistribution,
    /// Gender × number of those predicates, keyed `<gender>_<number>`.
    pub predicate_agreement: BTreeMap<String, u64>,
}

impl AddAssign for AudienceStats {
    fn add_assign(&mut self, rhs: Self) {
        self.number += rhs.number;
        self.gender += rhs.gender;
        self.predicate_gender += rhs.predicate_gender;
        for (k, v) in rhs.predicate_agreement {
            *self.predicate_agreement.entry(k).or_insert(0) += v;
        }
    }
}

pub fn agreement_key(gender: GenderLabel, number: NumberLabel) -> String {
    format!("{}_{}", gender.key(), number.key())
}

fn predicate<'a>(sentence: &'a ParsedSentence, subject: &Token) -> Option<&'a Token> {
    // The governing predicate is the subject's head: a verb, or in copular
    // clauses (overt or zero copula) the adjective/noun itself.
    sentence.head_of(subject)
}

fn predicate_gender(sentence: &ParsedSentence, subject: &Token) -> GenderLabel {
    predicate(sentence, subject)
        .and_then(|p| GenderLabel::from_feats(&p.feats))
        .unwrap_or(GenderLabel::Unmarked)
}

/// Whether `head` is the predicate of a copular clause with an overt copula.
pub fn has_copula(sentence: &ParsedSentence, head: &Token) -> bool {
    matches!(
        head.upos,
        Some(Upos::Adj | Upos::Noun | Upos::Propn | Upos::Pron)
    ) && sentence.dependents(head).any(|d| d.deprel == "cop")
}

/// Tallies the predicate gender for each first-person-singular subject pronoun.
pub fn speaker_gender_stats(
    sentences: &[ParsedSentence],
    lexicon: &PronounLexicon,
    config: &AnalysisConfig,
) -> GenderDistribution {
    let mut dist = GenderDistribution::default();
    for sentence in sentences {
        for token in &sentence.tokens {
            let is_speaker = lexicon
                .lookup(token, |e| {
                    e.person == 1 && e.number != Some(NumberLabel::Plural)
                })
                .is_some();
            if is_speaker && config.is_subject(token) {
                dist.add(predicate_gender(sentence, token));
            }
        }
    }
    dist
}

pub fn audience_stats(
    sentences: &[ParsedSentence],
    lexicon: &PronounLexicon,
    config: &AnalysisConfig,
) -> AudienceStats {
    let mut stats = AudienceStats::default();
    for sentence in sentences {
        for token in &sentence.tokens {
            let Some(entry) = lexicon.lookup(token, |e| e.person == 2) else {
                continue;
            };
            let number = NumberLabel::from_feats(&token.feats)
                .or(entry.number)
                .unwrap_or(NumberLabel::Unmarked);
            let gender = GenderLabel::from_feats(&token.feats)
                .or(entry.gender)
                .unwrap_or(GenderLabel::Unmarked);
            stats.number.add(number);
            stats.gender.add(gender);

            if config.is_subject(token) {
                let pred = predicate(sentence, token);
                let pred_gender = pred
                    .and_then(|p| GenderLabel::from_feats(&p.feats))
                    .unwrap_or(GenderLabel::Unmarked);
                let pred_number = pred
                    .and_then(|p| NumberLabel::from_feats(&p.feats))
                    .unwrap_or(NumberLabel::Unmarked);
                stats.predicate_gender.add(pred_gender);
                *stats
                    .predicate_agreement
                    .entry(agreement_key(pred_gender, pred_number))
                    .or_insert(0) += 1;
            }
        }
    }
    stats
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorphReport {
    pub sentences: u64,
    pub speaker: GenderDistribution,
    pub audience: AudienceStats,
}

impl MorphReport {
    pub fn compute(
        sentences: &[ParsedSentence],
        speaker_lexicon: &PronounLexicon,
        audience_lexicon: &PronounLexicon,
        config: &AnalysisConfig,
    ) -> Self {
        MorphReport {
            sentences: sentences.len() as u64,
            speaker: speaker_gender_stats(sentences, speaker_lexicon, config),
            audience: audience_stats(sentences, audience_lexicon, config),
        }
    }

    /// Total matched items: speaker pronouns plus second-person pronouns.
    pub fn matched_items(&self) -> u64 {
        self.speaker.total() + self.audience.number.total()
    }

    /// One row per category, speaker rows first.
    pub fn rows(&self) -> Vec<MorphRow> {
        let mut rows = Vec::new();
        let genders = [
            GenderLabel::Masculine,
            GenderLabel::Feminine,
            GenderLabel::Both,
            GenderLabel::Unmarked,
        ];
        for g in genders {
            let incl = self.speaker.proportion_incl_both(g);
            rows.push(MorphRow {
                category: format!("speaker.{}", g.key()),
                count: self.speaker.count(g),
                proportion: incl,
                proportion_incl_both: incl,
                proportion_excl_both: self.speaker.proportion_excl_both(g),
            });
        }
        for n in [
            NumberLabel::Singular,
            NumberLabel::Plural,
            NumberLabel::Unmarked,
        ] {
            rows.push(MorphRow::simple(
                format!("audience_number.{}", n.key()),
                self.audience.number.count(n),
                self.audience.number.proportion(n),
            ));
        }
        for (prefix, dist) in [
            ("audience_gender", &self.audience.gender),
            ("audience_predicate_gender", &self.audience.predicate_gender),
        ] {
            for g in genders {
                rows.push(MorphRow::simple(
                    format!("{prefix}.{}", g.key()),
                    dist.count(g),
                    dist.proportion_incl_both(g),
                ));
            }
        }
        let agreement_total: u64 = self.audience.predicate_agreement.values().sum();
        for (key, &count) in &self.audience.predicate_agreement {
            rows.push(MorphRow::simple(
                format!("audience_predicate.{key}"),
                count,
                (agreement_total > 0).then(|| count as f64 / agreement_total as f64),
            ));
        }
        rows
    }
}

impl AddAssign for MorphReport {
    fn add_assign(&mut self, rhs: Self) {
        self.sentences += rhs.sentences;
        self.speaker += rhs.speaker;
        self.audience += rhs.audience;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorphRow {
    pub category: String,
    pub count: u64,
    pub proportion: Option<f64>,
    pub proportion_incl_both: Option<f64>,
    pub proportion_excl_both: Option<f64>,
}

impl MorphRow {
    fn simple(category: String, count: u64, proportion: Option<f64>) -> Self {
        MorphRow {
            category,
            count,
            proportion,
            proportion_incl_both: None,
            proportion_excl_both: None,
        }
    }
}

fn fmt_opt(p: Option<f64>) -> String {
    p.map(|v| format!("{v:.6}")).unwrap_or_default()
}

/// `condition,category,count,proportion,proportion_incl_both,proportion_excl_both`;
/// undefined proportions are left empty.
pub fn reports_to_csv(reports: &[(String, MorphReport)]) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "condition",
        "category",
        "count",
        "proportion",
        "proportion_incl_both",
        "proportion_excl_both",
    ])?;
    for (condition, report) in reports {
        for row in report.rows() {
            w.write_record([
                condition.clone(),
                row.category,
                row.count.to_string(),
                fmt_opt(row.proportion),
                fmt_opt(row.proportion_incl_both),
                fmt_opt(row.proportion_excl_both),
            ])?;
        }
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub condition: String,
    pub category: String,
    pub proportion: Option<f64>,
    pub reference_proportion: Option<f64>,
    /// `None` when either side is undefined.
    pub abs_diff: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceComparison {
    pub rows: Vec<ComparisonRow>,
}

const COMPARED: [&str; 8] = [
    "speaker.masculine",
    "speaker.feminine",
    "speaker.both",
    "audience_number.singular",
    "audience_number.plural",
    "audience_gender.masculine",
    "audience_gender.feminine",
    "audience_gender.both",
];

fn proportion_of(report: &MorphReport, category: &str) -> Option<f64> {
    report
        .rows()
        .into_iter()
        .find(|r| r.category == category)
        .and_then(|r| r.proportion)
}

/// Absolute distance of every compared proportion from the reference's.
/// Conditions keep their given order.
pub fn compare_to_reference(
    condition_reports: &[(String, MorphReport)],
    reference: &MorphReport,
) -> Result<ReferenceComparison, MorphError> {
    if !condition_reports.iter().any(|(c, _)| c == BASELINE_LABEL) {
        return Err(MorphError::MissingBaseline);
    }
    let mut rows = Vec::new();
    for (condition, report) in condition_reports {
        for category in COMPARED {
            let p = proportion_of(report, category);
            let r = proportion_of(reference, category);
            rows.push(ComparisonRow {
                condition: condition.clone(),
                category: category.to_string(),
                proportion: p,
                reference_proportion: r,
                abs_diff: p.zip(r).map(|(a, b)| (a - b).abs()),
            });
        }
    }
    Ok(ReferenceComparison { rows })
}

impl ReferenceComparison {
    pub fn diff(&self, condition: &str, category: &str) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.condition == condition && r.category == category)
            .and_then(|r| r.abs_diff)
    }

    pub fn to_csv(&self) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "condition",
            "category",
            "proportion",
            "reference_proportion",
            "abs_diff",
        ])?;
        for r in &self.rows {
            w.write_record([
                r.condition.clone(),
                r.category.clone(),
                fmt_opt(r.proportion),
                fmt_opt(r.reference_proportion),
                fmt_opt(r.abs_diff),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Grouped-bar chart data: one series per condition (plus the reference),
/// one value per category.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartData {
    pub title: String,
    pub categories: Vec<String>,
    pub series: Vec<ChartSeries>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartSeries {
    pub name: String,
    /// Proportions; undefined values are 0 with `defined = false`.
    pub values: Vec<f64>,
    pub defined: bool,
}

pub fn speaker_chart(reports: &[(String, MorphReport)]) -> ChartData {
    let labels = [
        GenderLabel::Masculine,
        GenderLabel::Feminine,
        GenderLabel::Both,
    ];
    ChartData {
        title: "Gender of predicates governed by first-person subjects".into(),
        categories: labels.iter().map(|g| g.key().to_string()).collect(),
        series: reports
            .iter()
            .map(|(name, r)| {
                let values: Vec<Option<f64>> = labels
                    .iter()
                    .map(|&g| r.speaker.proportion_incl_both(g))
                    .collect();
                series(name, values)
            })
            .collect(),
    }
}

pub fn audience_number_chart(reports: &[(String, MorphReport)]) -> ChartData {
    let labels = [NumberLabel::Singular, NumberLabel::Plural];
    ChartData {
        title: "Number of second-person pronouns".into(),
        categories: labels.iter().map(|n| n.key().to_string()).collect(),
        series: reports
            .iter()
            .map(|(name, r)| {
                let values: Vec<Option<f64>> = labels
                    .iter()
                    .map(|&n| r.audience.number.proportion(n))
                    .collect();
                series(name, values)
            })
            .collect(),
    }
}

fn series(name: &str, values: Vec<Option<f64>>) -> ChartSeries {
    ChartSeries {
        name: name.to_string(),
        defined: values.iter().all(Option::is_some),
        values: values.into_iter().map(|v| v.unwrap_or(0.0)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const LEXICON: &str = "# form\tlemma\tperson\tnumber\tgender
אני\tאני\t1\tSing
אתה\tאתה\t2\tSing\tMasc
את\tאת\t2\tSing\tFem
אתם\tאתם\t2\tPlur\tMasc
אתן\tאתן\t2\tPlur\tFem
";

    fn lex() -> PronounLexicon {
        PronounLexicon::parse(LEXICON).unwrap()
    }

    fn report(doc: &str) -> MorphReport {
        let s = parse_conllu(doc).unwrap();
        MorphReport::compute(&s, &lex(), &lex(), &AnalysisConfig::default())
    }

    #[test]
    fn feminine_verb() {
        let r = report(
            "1\tאני\tאני\tPRON\t_\tNumber=Sing|Person=1\t2\tnsubj\t_\t_
2\tאוהבת\tאהב\tVERB\t_\tGender=Fem|Number=Sing\t0\troot\t_\t_
",
        );
        assert_eq!(r.speaker.feminine, 1);
        assert_eq!(r.speaker.total(), 1);
        assert_eq!(
            r.speaker.proportion_incl_both(GenderLabel::Feminine),
            Some(1.0)
        );
    }

    #[test]
    fn copular_adjective_with_both_genders() {
        let doc = "1\tאני\tאני\tPRON\t_\tNumber=Sing|Person=1\t3\tnsubj\t_\t_
2\tהייתי\tהיה\tAUX\t_\tPerson=1\t3\tcop\t_\t_
3\tנחמד\tנחמד\tADJ\t_\tGender=Fem,Masc\t0\troot\t_\t_
";
        let r = report(doc);
        assert_eq!(r.speaker.both, 1);
        let s = parse_conllu(doc).unwrap();
        assert!(has_copula(&s[0], &s[0].tokens[2]));
    }

    #[test]
    fn second_person_plural() {
        let r = report(
            "1\tאתם\tאתם\tPRON\t_\tNumber=Plur|Person=2\t2\tnsubj\t_\t_
2\tיודעים\tידע\tVERB\t_\tGender=Masc|Number=Plur\t0\troot\t_\t_
",
        );
        assert_eq!(r.audience.number.plural, 1);
        assert_eq!(r.audience.predicate_gender.masculine, 1);
        assert_eq!(
            r.audience.predicate_agreement.get("masculine_plural"),
            Some(&1)
        );
    }

    #[test]
    fn accusative_marker_is_not_a_pronoun() {
        // את as ADP is the object marker, not "you"
        let r = report(
            "1\tראיתי\tראה\tVERB\t_\t_\t0\troot\t_\t_
2\tאת\tאת\tADP\t_\t_\t3\tcase\t_\t_
3\tהכלב\tכלב\tNOUN\t_\tGender=Masc\t1\tobj\t_\t_
",
        );
        assert_eq!(r.audience.number.total(), 0);
    }

    #[test]
    fn unmarked_predicate_is_separate() {
        let r = report(
            "1\tאני\tאני\tPRON\t_\tNumber=Sing|Person=1\t2\tnsubj\t_\t_
2\tאמרתי\tאמר\tVERB\t_\tPerson=1\t0\troot\t_\t_
",
        );
        assert_eq!(r.speaker.unmarked, 1);
        assert_eq!(r.speaker.proportion_incl_both(GenderLabel::Feminine), None);
    }

    #[test]
    fn non_subject_first_person_is_ignored() {
        let r = report(
            "1\tאוהבים\tאהב\tVERB\t_\tGender=Masc|Number=Plur\t0\troot\t_\t_
2\tאותי\tאני\tPRON\t_\tPerson=1|Number=Sing\t1\tobj\t_\t_
",
        );
        // lemma matches the lexicon but the relation is obj
        assert_eq!(r.speaker.total(), 0);
    }

    #[test]
    fn lexicon_errors() {
        assert!(PronounLexicon::parse("a\tb\t4\tSing\n").is_err());
        assert!(PronounLexicon::parse("a\tb\t1\n").is_err());
        assert!(PronounLexicon::parse("a\tb\t1\tDual\n").is_err());
    }

    #[test]
    fn compare_needs_baseline() {
        let r = MorphReport::default();
        assert_eq!(
            compare_to_reference(&[("she".to_string(), r.clone())], &r),
            Err(MorphError::MissingBaseline)
        );
    }

    #[test]
    fn self_comparison_is_zero() {
        let r = report(
            "1\tאני\tאני\tPRON\t_\tNumber=Sing|Person=1\t2\tnsubj\t_\t_
2\tאוהבת\tאהב\tVERB\t_\tGender=Fem|Number=Sing\t0\troot\t_\t_
3\tאתכם\tאתם\tPRON\t_\tNumber=Plur|Person=2\t2\tobj\t_\t_
",
        );
        let cmp = compare_to_reference(&[("baseline".to_string(), r.clone())], &r).unwrap();
        for row in &cmp.rows {
            if let Some(d) = row.abs_diff {
                assert_eq!(d, 0.0);
            }
        }
        assert_eq!(cmp.diff("baseline", "speaker.feminine"), Some(0.0));
    }

    #[test]
    fn merge_by_addition() {
        let doc = "1\tאני\tאני\tPRON\t_\tNumber=Sing|Person=1\t2\tnsubj\t_\t_
2\tאוהבת\tאהב\tVERB\t_\tGender=Fem|Number=Sing\t0\troot\t_\t_
";
        let mut a = report(doc);
        a += report(doc);
        assert_eq!(a.speaker.feminine, 2);
        assert_eq!(a.sentences, 2);
    }

    #[test]
    fn csv_columns() {
        let csv = reports_to_csv(&[("baseline".into(), MorphReport::default())]).unwrap();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "condition,category,count,proportion,proportion_incl_both,proportion_excl_both"
        );
        assert_eq!(lines.next().unwrap(), "baseline,speaker.masculine,0,,,");
    }
}
