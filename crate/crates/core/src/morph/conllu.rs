//! Reader for CoNLL-U (v2) dependency parses.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConlluError {
    #[error("line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("sentence `{sentence}`: token ids are not contiguous from 1 (line {line})")]
    NonContiguousIds { sentence: String, line: usize },
    #[error("sentence `{sentence}`: no root token")]
    MissingRoot { sentence: String },
    #[error("sentence `{sentence}`: more than one root token (line {line})")]
    MultipleRoots { sentence: String, line: usize },
}

/// Universal POS tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Upos {
    Adj,
    Adp,
    Adv,
    Aux,
    Cconj,
    Det,
    Intj,
    Noun,
    Num,
    Part,
    Pron,
    Propn,
    Punct,
    Sconj,
    Sym,
    Verb,
    X,
}

impl FromStr for Upos {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        use Upos::*;
        Ok(match s {
            "ADJ" => Adj,
            "ADP" => Adp,
            "ADV" => Adv,
            "AUX" => Aux,
            "CCONJ" => Cconj,
            "DET" => Det,
            "INTJ" => Intj,
            "NOUN" => Noun,
            "NUM" => Num,
            "PART" => Part,
            "PRON" => Pron,
            "PROPN" => Propn,
            "PUNCT" => Punct,
            "SCONJ" => Sconj,
            "SYM" => Sym,
            "VERB" => Verb,
            "X" => X,
            other => return Err(format!("unknown UPOS tag `{other}`")),
        })
    }
}

impl fmt::Display for Upos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = format!("{self:?}").to_uppercase();
        f.write_str(&s)
    }
}

pub type Features = BTreeMap<String, BTreeSet<String>>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub id: usize,
    pub form: String,
    pub lemma: String,
    pub upos: Option<Upos>,
    pub xpos: Option<String>,
    pub feats: Features,
    /// 0 for the root.
    pub head: usize,
    pub deprel: String,
}

impl Token {
    pub fn feature(&self, name: &str) -> Option<&BTreeSet<String>> {
        self.feats.get(name)
    }

    pub fn has_feature(&self, name: &str, value: &str) -> bool {
        self.feats.get(name).is_some_and(|v| v.contains(value))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiwordRange {
    pub first: usize,
    pub last: usize,
    pub form: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedSentence {
    pub sentence_id: String,
    pub tokens: Vec<Token>,
    /// Multiword-token ranges (`3-4`), kept out of `tokens`.
    pub multiword: Vec<MultiwordRange>,
    /// Ids of empty nodes (`5.1`), kept out of `tokens`.
    pub empty_nodes: Vec<String>,
}

impl ParsedSentence {
    /// Token by 1-based id.
    pub fn token(&self, id: usize) -> Option<&Token> {
        id.checked_sub(1).and_then(|i| self.tokens.get(i))
    }

    pub fn head_of(&self, token: &Token) -> Option<&Token> {
        self.token(token.head)
    }

    pub fn dependents<'a>(&'a self, head: &'a Token) -> impl Iterator<Item = &'a Token> + 'a {
        self.tokens.iter().filter(move |t| t.head == head.id)
    }
}

fn optional(field: &str) -> Option<String> {
    (field != "_").then(|| field.to_string())
}

fn parse_feats(field: &str) -> Result<Features, String> {
    let mut feats = Features::new();
    if field == "_" {
        return Ok(feats);
    }
    for pair in field.split('|') {
        let (name, values) = pair
            .split_once('=')
            .filter(|(n, v)| !n.is_empty() && !v.is_empty())
            .ok_or_else(|| format!("bad feature `{pair}`"))?;
        feats
            .entry(name.to_string())
            .or_default()
            .extend(values.split(',').map(str::to_string));
    }
    Ok(feats)
}

struct Pending {
    sentence_id: Option<String>,
    rows: Vec<(usize, Token)>,
    multiword: Vec<MultiwordRange>,
    empty_nodes: Vec<String>,
}

impl Pending {
    fn new() -> Self {
        Pending {
            sentence_id: None,
            rows: Vec::new(),
            multiword: Vec::new(),
            empty_nodes: Vec::new(),
        }
    }

    fn is_empty(&self) -> bool {
        self.rows.is_empty() && self.multiword.is_empty() && self.empty_nodes.is_empty()
    }

    fn finish(self, ordinal: usize) -> Result<ParsedSentence, ConlluError> {
        let sentence = self.sentence_id.unwrap_or_else(|| format!("s{ordinal}"));
        let count = self.rows.len();
        let mut root_seen = false;
        for (i, (line, token)) in self.rows.iter().enumerate() {
            if token.id != i + 1 {
                return Err(ConlluError::NonContiguousIds {
                    sentence,
                    line: *line,
                });
            }
            if token.head > count {
                return Err(ConlluError::MalformedLine {
                    line: *line,
                    reason: format!("head {} points past the last token {count}", token.head),
                });
            }
            if token.head == 0 {
                if root_seen {
                    return Err(ConlluError::MultipleRoots {
                        sentence,
                        line: *line,
                    });
                }
                root_seen = true;
            }
        }
        if !root_seen {
            return Err(ConlluError::MissingRoot { sentence });
        }
        Ok(ParsedSentence {
            sentence_id: sentence,
            tokens: self.rows.into_iter().map(|(_, t)| t).collect(),
            multiword: self.multiword,
            empty_nodes: self.empty_nodes,
        })
    }
}

/// Parses a whole CoNLL-U document. `# sent_id = ...` comments name their
/// sentence; unnamed sentences get `s<ordinal>` (1-based).
pub fn parse_conllu(document: &str) -> Result<Vec<ParsedSentence>, ConlluError> {
    let mut sentences = Vec::new();
    let mut pending = Pending::new();

    for (idx, raw_line) in document.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.strip_suffix('\r').unwrap_or(raw_line);
        if line.trim().is_empty() {
            if !pending.is_empty() {
                let done = std::mem::replace(&mut pending, Pending::new());
                sentences.push(done.finish(sentences.len() + 1)?);
            } else {
                pending.sentence_id = None;
            }
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((key, value)) = comment.split_once('=') {
                if key.trim() == "sent_id" {
                    pending.sentence_id = Some(value.trim().to_string());
                }
            }
            continue;
        }

        let malformed = |reason: String| ConlluError::MalformedLine {
            line: line_no,
            reason,
        };
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(malformed(format!(
                "expected 10 tab-separated fields, found {}",
                cols.len()
            )));
        }
        let id_field = cols[0];
        if let Some((first, last)) = id_field.split_once('-') {
            let first = first
                .parse()
                .map_err(|_| malformed(format!("bad range `{id_field}`")))?;
            let last = last
                .parse()
                .map_err(|_| malformed(format!("bad range `{id_field}`")))?;
            pending.multiword.push(MultiwordRange {
                first,
                last,
                form: cols[1].to_string(),
            });
            continue;
        }
        if id_field.contains('.') {
            pending.empty_nodes.push(id_field.to_string());
            continue;
        }
        let id: usize = id_field
            .parse()
            .ok()
            .filter(|&i| i > 0)
            .ok_or_else(|| malformed(format!("bad token id `{id_field}`")))?;
        let upos = match cols[3] {
            "_" => None,
            tag => Some(tag.parse::<Upos>().map_err(malformed)?),
        };
        let feats = parse_feats(cols[5]).map_err(malformed)?;
        let head: usize = cols[6]
            .parse()
            .map_err(|_| malformed(format!("bad head `{}`", cols[6])))?;
        if head == id {
            return Err(malformed(format!("token {id} is its own head")));
        }
        pending.rows.push((
            line_no,
            Token {
                id,
                form: cols[1].to_string(),
                lemma: cols[2].to_string(),
                upos,
                xpos: optional(cols[4]),
                feats,
                head,
                deprel: cols[7].to_string(),
            },
        ));
    }
    if !pending.is_empty() {
        sentences.push(pending.finish(sentences.len() + 1)?);
    }
    Ok(sentences)
}
