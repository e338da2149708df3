//! Random corpora scored by both `corpus_bleu` and the reference Perl script.
//! Skipped when no `perl` is on PATH.

use std::io::Write;
use std::path::Path;
use std::process::{Command, Stdio};

use hintmt::bleu::corpus_bleu;
use proptest::prelude::*;

fn perl_available() -> bool {
    Command::new("perl")
        .arg("-v")
        .stdout(Stdio::null())
        .status()
        .is_ok_and(|s| s.success())
}

fn moses_bleu(hyps: &[String], refs: &[String], lowercase: bool) -> f64 {
    let dir = tempfile::tempdir().unwrap();
    let ref_path = dir.path().join("ref.txt");
    std::fs::write(&ref_path, refs.join("\n") + "\n").unwrap();
    let script = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/oracle/multi-bleu.perl");
    let mut cmd = Command::new("perl");
    cmd.arg(&script);
    if lowercase {
        cmd.arg("-lc");
    }
    let mut child = cmd
        .arg(&ref_path)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all((hyps.join("\n") + "\n").as_bytes())
        .unwrap();
    let out = child.wait_with_output().unwrap();
    let line = String::from_utf8(out.stdout).unwrap();
    line.strip_prefix("BLEU = ")
        .and_then(|r| r.split(',').next())
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or_else(|| panic!("unexpected perl output: {line}"))
}

const VOCAB: [&str; 20] = [
    "a", "b", "c", "d", "e", "f", "g", "h", "I", "J", "the", "cat", "sat", "on", "mat", "dog",
    "ran", "Up", "down", "x",
];

fn sentence() -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(&VOCAB[..]), 1..=15).prop_map(|w| w.join(" "))
}

fn corpus() -> impl Strategy<Value = Vec<(String, String)>> {
    prop::collection::vec((sentence(), sentence()), 1..=50)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn matches_moses_script(pairs in corpus(), lowercase in any::<bool>()) {
        if !perl_available() {
            return Ok(());
        }
        let (hyps, refs): (Vec<String>, Vec<String>) = pairs.into_iter().unzip();
        let ours = corpus_bleu(&hyps, &refs, lowercase).unwrap().bleu;
        let theirs = moses_bleu(&hyps, &refs, lowercase);
        prop_assert!((ours - theirs).abs() <= 0.01, "ours {ours} moses {theirs}");
    }

    #[test]
    fn matches_moses_on_noisy_copies(
        refs in prop::collection::vec(sentence(), 1..=50),
        keep in prop::collection::vec(0.0f64..1.0, 50),
    ) {
        if !perl_available() {
            return Ok(());
        }
        // hypotheses are references with a tail dropped, to exercise the brevity penalty
        let hyps: Vec<String> = refs
            .iter()
            .zip(&keep)
            .map(|(r, k)| {
                let words: Vec<&str> = r.split(' ').collect();
                let n = ((words.len() as f64 * (0.5 + k / 2.0)).ceil() as usize).max(1);
                words[..n.min(words.len())].join(" ")
            })
            .collect();
        let ours = corpus_bleu(&hyps, &refs, false).unwrap().bleu;
        let theirs = moses_bleu(&hyps, &refs, false);
        prop_assert!((ours - theirs).abs() <= 0.01, "ours {ours} moses {theirs}");
    }
}
