//! The named example corpus: closed alias definitions plus pairs of terms
//! with the verdicts expected from each game and falsifier.

use std::fmt;
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::bisim::GameConfig;
use crate::ctxequiv::{compare_semantics, Comparison, FalsifyBudget};
use crate::syntax::{parse_with_aliases, ParseError, Term};

const BUILTIN: &str = include_str!("../corpus/corpus.txt");

const BISIM_NAMES: [&str; 3] = ["distinguished", "likely-distinguished", "no-counterexample"];
const FALSIFY_NAMES: [&str; 3] = ["counterexample", "likely-counterexample", "none-found"];

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {source}")]
    Term { line: usize, source: ParseError },
}

fn syntax(line: usize, message: impl Into<String>) -> CorpusError {
    CorpusError::Syntax {
        line,
        message: message.into(),
    }
}

/// Expected verdict names for one semantics.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expectation {
    pub bisim: String,
    pub falsify: String,
}

impl fmt::Display for Expectation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.bisim, self.falsify)
    }
}

#[derive(Clone, Debug)]
pub struct Entry {
    pub name: String,
    pub left: Term,
    pub right: Term,
    pub expect_relaxed: Expectation,
    pub expect_original: Expectation,
    pub reference: String,
}

#[derive(Clone, Debug, Default)]
pub struct Corpus {
    pub aliases: Vec<(String, Term)>,
    pub entries: Vec<Entry>,
}

/// The corpus shipped with the crate.
pub fn builtin() -> Corpus {
    Corpus::parse(BUILTIN).expect("built-in corpus is well formed")
}

impl Corpus {
    pub fn parse(text: &str) -> Result<Corpus, CorpusError> {
        let mut corpus = Corpus::default();
        let mut stanza: Vec<(usize, &str, &str)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim();
            if trimmed.starts_with('#') {
                continue;
            }
            if trimmed.is_empty() {
                corpus.finish(&mut stanza)?;
                continue;
            }
            if let Some(def) = trimmed.strip_prefix("alias ") {
                let (name, body) = def
                    .split_once('=')
                    .ok_or_else(|| syntax(line, "alias needs `NAME = term`"))?;
                let name = name.trim();
                if corpus.alias(name).is_some() {
                    return Err(syntax(line, format!("duplicate alias `{name}`")));
                }
                let term = corpus.term(body, line)?;
                if !term.is_closed() {
                    return Err(syntax(line, format!("alias `{name}` is not closed")));
                }
                corpus.aliases.push((name.to_string(), term));
                continue;
            }
            let (key, value) = trimmed
                .split_once(':')
                .ok_or_else(|| syntax(line, "expected `key: value`"))?;
            stanza.push((line, key.trim(), value.trim()));
        }
        corpus.finish(&mut stanza)?;
        Ok(corpus)
    }

    pub fn alias(&self, name: &str) -> Option<&Term> {
        self.aliases.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    pub fn entry(&self, name: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.name == name)
    }

    /// Parses a term in which this corpus's aliases may be used.
    pub fn parse_term(&self, text: &str) -> Result<Term, ParseError> {
        parse_with_aliases(text, &|n| self.alias(n).cloned())
    }

    fn term(&self, text: &str, line: usize) -> Result<Term, CorpusError> {
        self.parse_term(text)
            .map_err(|source| CorpusError::Term { line, source })
    }

    fn finish(&mut self, stanza: &mut Vec<(usize, &str, &str)>) -> Result<(), CorpusError> {
        if stanza.is_empty() {
            return Ok(());
        }
        let first = stanza[0].0;
        let field = |key: &str| -> Result<(usize, &str), CorpusError> {
            stanza
                .iter()
                .find(|(_, k, _)| *k == key)
                .map(|(l, _, v)| (*l, *v))
                .ok_or_else(|| syntax(first, format!("missing `{key}:`")))
        };
        for (line, key, _) in stanza.iter() {
            let known = ["name", "left", "right", "expect-relaxed", "expect-original", "ref"];
            if !known.contains(key) {
                return Err(syntax(*line, format!("unknown field `{key}`")));
            }
        }
        let name = field("name")?.1.to_string();
        if self.entry(&name).is_some() {
            return Err(syntax(first, format!("duplicate entry `{name}`")));
        }
        let (l, src) = field("left")?;
        let left = self.term(src, l)?;
        let (l, src) = field("right")?;
        let right = self.term(src, l)?;
        let (l, src) = field("expect-relaxed")?;
        let expect_relaxed = expectation(src, l)?;
        let (l, src) = field("expect-original")?;
        let expect_original = expectation(src, l)?;
        let reference = field("ref")?.1.to_string();
        self.entries.push(Entry {
            name,
            left,
            right,
            expect_relaxed,
            expect_original,
            reference,
        });
        stanza.clear();
        Ok(())
    }
}

fn expectation(src: &str, line: usize) -> Result<Expectation, CorpusError> {
    let words: Vec<&str> = src.split_whitespace().collect();
    match words.as_slice() {
        [b, f] if BISIM_NAMES.contains(b) && FALSIFY_NAMES.contains(f) => Ok(Expectation {
            bisim: b.to_string(),
            falsify: f.to_string(),
        }),
        _ => Err(syntax(line, format!("bad expectation `{src}`"))),
    }
}

/// Outcome of running one entry.
#[derive(Clone, Debug)]
pub struct EntryReport {
    pub name: String,
    pub comparison: Comparison,
    pub relaxed: Expectation,
    pub original: Expectation,
    pub millis: u128,
}

impl EntryReport {
    pub fn expected(&self, entry: &Entry) -> bool {
        self.relaxed == entry.expect_relaxed && self.original == entry.expect_original
    }
}

pub fn run_entry(entry: &Entry, cfg: &GameConfig, budget: &FalsifyBudget) -> EntryReport {
    let start = Instant::now();
    let c = compare_semantics(&entry.left, &entry.right, cfg, budget);
    EntryReport {
        name: entry.name.clone(),
        relaxed: Expectation {
            bisim: c.relaxed_bisim.name().to_string(),
            falsify: c.relaxed_falsify.name().to_string(),
        },
        original: Expectation {
            bisim: c.program_bisim.name().to_string(),
            falsify: c.program_falsify.name().to_string(),
        },
        comparison: c,
        millis: start.elapsed().as_millis(),
    }
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub reports: Vec<EntryReport>,
    pub mismatches: Vec<String>,
    pub millis: u128,
}

impl RunReport {
    pub fn all_expected(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Runs every entry, in parallel, and compares against the expectations.
/// Reports come back in corpus order.
pub fn run(corpus: &Corpus, cfg: &GameConfig, budget: &FalsifyBudget) -> RunReport {
    let start = Instant::now();
    let reports: Vec<EntryReport> = corpus
        .entries
        .par_iter()
        .map(|e| run_entry(e, cfg, budget))
        .collect();
    let mismatches = corpus
        .entries
        .iter()
        .zip(&reports)
        .filter(|(e, r)| !r.expected(e))
        .map(|(e, _)| e.name.clone())
        .collect();
    RunReport {
        reports,
        mismatches,
        millis: start.elapsed().as_millis(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_parses() {
        let c = builtin();
        assert!(c.entries.len() >= 20);
        assert!(c.alias("OMEGA").is_some());
        assert!(c.entries.iter().all(|e| e.left.is_closed() && e.right.is_closed()));
    }

    #[test]
    fn aliases_expand() {
        let c = builtin();
        let t = c.parse_term("THETA").unwrap();
        let th = c.alias("TH").unwrap();
        assert!(t.alpha_eq(&Term::app(th.clone(), th.clone())));
    }

    #[test]
    fn malformed_stanzas_are_rejected() {
        assert!(Corpus::parse("name: a\nleft: \\x. x\n").is_err());
        let bad = "name: a\nleft: x\nright: x\nexpect-relaxed: same none-found\n\
                   expect-original: no-counterexample none-found\nref: r\n";
        assert!(matches!(Corpus::parse(bad), Err(CorpusError::Syntax { line: 4, .. })));
        assert!(Corpus::parse("alias A = (\\x. x\n").is_err());
    }
}
