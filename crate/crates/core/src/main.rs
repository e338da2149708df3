use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use hintmt::client::TranslationCache;
use hintmt::grammar::render_prefix;
use hintmt::harness::audit::{run_morph_audit, AuditPaths};
use hintmt::harness::config::ConfigFile;
use hintmt::harness::experiment::{build_backend, records_to_jsonl, REPORT_CSV, REPORT_JSON};
use hintmt::harness::probe::{backend_for_language, rules_for};
use hintmt::harness::{
    load_probe_cases, load_records, read_corpus, read_to_string, run_experiment, run_gender_probe,
    score_records, write_file, ExperimentConfig, ExperimentReport, HarnessError, Overrides,
    ScoreOptions,
};

/// Gender/number hint injection for black-box machine translation.
///
/// Flags override the config file; the config file overrides built-in
/// defaults. Relative paths in the config resolve against its directory.
#[derive(Parser)]
#[command(name = "hintmt", version)]
struct Cli {
    /// TOML experiment config.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Condition label to run (repeatable); replaces the configured list.
    #[arg(long = "condition", global = true)]
    conditions: Vec<String>,
    /// Backend name from the config's `[[backends]]`.
    #[arg(long, global = true)]
    backend: Option<String>,
    /// JSON-lines translation cache.
    #[arg(long, global = true)]
    cache: Option<PathBuf>,
    /// Output directory.
    #[arg(long = "out", global = true)]
    out: Option<PathBuf>,
    /// Drop pairs whose prefix could not be stripped before scoring.
    #[arg(long, global = true)]
    drop_unstripped: bool,
    /// Lowercase hypotheses and references before BLEU.
    #[arg(long = "lc", global = true)]
    lowercase: bool,
    /// Every speaker/audience combination instead of the default grid.
    #[arg(long, global = true)]
    full_grid: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the conditions and their prefixes.
    Grid,
    /// Translate, strip and score every condition.
    Translate,
    /// Rescore a records archive without contacting any backend.
    Score {
        /// Defaults to `<out>/records.jsonl`.
        #[arg(long)]
        records: Option<PathBuf>,
    },
    /// Morphological audit of parsed translations.
    Audit {
        /// Directory of `<condition>.conllu` files.
        #[arg(long)]
        conllu_dir: Option<PathBuf>,
        /// Parsed reference translation.
        #[arg(long)]
        reference: Option<PathBuf>,
    },
    /// Gendered-form probe over several target languages.
    Probe {
        /// TSV of language, source, masculine_form, feminine_form.
        #[arg(long)]
        cases: Option<PathBuf>,
    },
    /// Print a saved BLEU report as a table.
    Report,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hintmt: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, HarnessError> {
    let overrides = Overrides {
        conditions: cli.conditions.clone(),
        backend: cli.backend.clone(),
        cache: cli.cache.clone(),
        output_dir: cli.out.clone(),
        drop_unstripped: cli.drop_unstripped,
        lowercase_bleu: cli.lowercase,
        full_grid: cli.full_grid,
    };
    match &cli.config {
        Some(path) => ExperimentConfig::load(path, &overrides),
        None => {
            let cwd = std::env::current_dir()
                .map_err(|e| HarnessError::Config(format!("no working directory: {e}")))?;
            ExperimentConfig::resolve(ConfigFile::default(), &cwd, &overrides)
        }
    }
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    let cfg = load_config(&cli)?;
    match cli.command {
        Command::Grid => {
            for c in &cfg.conditions {
                let prefix = render_prefix(c, &cfg.templates)
                    .map_err(|e| HarnessError::Config(e.to_string()))?;
                println!("{}\t{prefix}", c.label());
            }
        }
        Command::Translate => {
            cfg.check_experiment_inputs()?;
            let backend = build_backend(&cfg)?;
            let outcome = run_experiment(&cfg, &backend)?;
            print_report(&outcome.report);
            println!(
                "backend calls: {}; wrote {}, {}, {}",
                outcome.backend_calls,
                outcome.records_path.display(),
                outcome.csv_path.display(),
                outcome.json_path.display()
            );
        }
        Command::Score { records } => {
            let records_path = records.unwrap_or_else(|| cfg.output_dir.join("records.jsonl"));
            let records = load_records(&records_path)?;
            let reference_path = cfg
                .reference_corpus
                .as_ref()
                .ok_or_else(|| HarnessError::Config("reference_corpus is not set".into()))?;
            let references = read_corpus(reference_path)?;
            let report = score_records(&records, &references, ScoreOptions::from_config(&cfg))?;
            write_file(&cfg.output_dir.join(REPORT_CSV), report.to_csv()?)?;
            write_file(&cfg.output_dir.join(REPORT_JSON), report.to_json())?;
            // normalise the archive only if it came from elsewhere
            if records_path.parent() != Some(cfg.output_dir.as_path()) {
                write_file(
                    &cfg.output_dir.join("records.jsonl"),
                    records_to_jsonl(&records),
                )?;
            }
            print_report(&report);
        }
        Command::Audit {
            conllu_dir,
            reference,
        } => {
            let conllu_dir = conllu_dir
                .or_else(|| cfg.audit.conllu_dir.clone())
                .ok_or_else(|| HarnessError::Config("audit needs a CoNLL-U directory".into()))?;
            let reference = reference
                .or_else(|| cfg.audit.reference.clone())
                .ok_or_else(|| {
                    HarnessError::Config("audit needs a reference CoNLL-U file".into())
                })?;
            let paths = AuditPaths {
                conllu_dir,
                reference,
                speaker_lexicon: cfg.audit.speaker_lexicon.clone(),
                audience_lexicon: cfg.audit.audience_lexicon.clone(),
            };
            let labels: Vec<String> = cfg.conditions.iter().map(|c| c.label()).collect();
            let outcome = run_morph_audit(&paths, &labels, &cfg.analysis(), &cfg.output_dir)?;
            println!(
                "{:<12} {:>9} {:>7} {:>7} {:>7} {:>7}",
                "condition", "sentences", "masc", "fem", "sing", "plur"
            );
            let reference_row = ("reference".to_string(), outcome.reference.clone());
            for (label, r) in outcome
                .reports
                .iter()
                .chain(std::iter::once(&reference_row))
            {
                println!(
                    "{:<12} {:>9} {:>7} {:>7} {:>7} {:>7}",
                    label,
                    r.sentences,
                    r.speaker.masculine,
                    r.speaker.feminine,
                    r.audience.number.singular,
                    r.audience.number.plural
                );
            }
            for p in &outcome.written {
                println!("wrote {}", p.display());
            }
        }
        Command::Probe { cases } => {
            let cases_path = cases
                .or_else(|| cfg.probe.cases.clone())
                .ok_or_else(|| HarnessError::Config("probe needs a cases file".into()))?;
            let cases = load_probe_cases(&cases_path)?;
            let spec = cfg.backend()?.clone();
            let rules_dir = cfg.probe.rules_dir.clone();
            let mut cache = match &cfg.cache {
                Some(p) => TranslationCache::open(p).map_err(HarnessError::io(p))?,
                None => TranslationCache::in_memory(),
            };
            let result = run_gender_probe(
                &cases,
                &|lang| backend_for_language(&spec, lang, &cfg.base_dir),
                &cfg.templates,
                &|lang| rules_for(lang, rules_dir.as_deref()),
                &mut cache,
            )?;
            for c in &result.cases {
                println!(
                    "{:<4} he={:<10?} she={:<10?} {}",
                    c.language,
                    c.he_detected,
                    c.she_detected,
                    if c.success { "ok" } else { "FAIL" }
                );
            }
            println!("worked on {} languages", result.summary());
            write_file(&cfg.output_dir.join("probe.csv"), result.to_csv()?)?;
            write_file(
                &cfg.output_dir.join("probe.json"),
                serde_json::to_string_pretty(&result).expect("probe result serializes") + "\n",
            )?;
        }
        Command::Report => {
            let path = cfg.output_dir.join(REPORT_JSON);
            let text = read_to_string(&path)?;
            let report: ExperimentReport = serde_json::from_str(&text)
                .map_err(|e| HarnessError::Data(format!("{}: {e}", path.display())))?;
            print_report(&report);
        }
    }
    Ok(())
}

fn print_report(report: &ExperimentReport) {
    let m = &report.metadata;
    println!(
        "backend {} | {} sentences | lowercase {} | tokenizer {} | unstripped {}",
        m.backend,
        m.sentences,
        m.lowercase,
        m.tokenizer.name(),
        m.unstripped_policy
    );
    println!(
        "{:<12} {:>7} {:>7} {:>7} {:>11} {:>7}",
        "condition", "BLEU", "delta", "BP", "strip_rate", "unstrip"
    );
    for c in &report.conditions {
        println!(
            "{:<12} {:>7.2} {:>+7.2} {:>7.3} {:>11} {:>7}",
            c.condition,
            c.bleu,
            c.delta_vs_baseline,
            c.brevity_penalty,
            c.strip_rate
                .map(|r| format!("{r:.4}"))
                .unwrap_or_else(|| "-".into()),
            c.unstripped
        );
    }
}
