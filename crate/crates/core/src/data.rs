//! SNLI-style JSON-lines ingestion, tokenization and the TSV cache format.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use log::warn;
use serde::Deserialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Entailment = 1,
    Contradiction = 2,
    Neutral = 3,
}

impl Label {
    pub const ALL: [Label; 3] = [Label::Entailment, Label::Contradiction, Label::Neutral];

    /// Zero-based position in the probability vector.
    pub fn index(self) -> usize {
        self as usize - 1
    }

    pub fn from_index(i: usize) -> Option<Label> {
        Label::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Label::Entailment => "entailment",
            Label::Contradiction => "contradiction",
            Label::Neutral => "neutral",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "entailment" | "1" => Ok(Label::Entailment),
            "contradiction" | "2" => Ok(Label::Contradiction),
            "neutral" | "3" => Ok(Label::Neutral),
            other => Err(format!("unknown label {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SentencePair {
    pub premise: Vec<String>,
    pub hypothesis: Vec<String>,
    pub label: Label,
    /// Zero-based line index in the source file.
    pub id: usize,
}

/// Lowercases, splits on whitespace and trims non-alphanumeric characters
/// from both ends of every token. Tokens that become empty are dropped.
pub fn tokenize(sentence: &str) -> Vec<String> {
    sentence
        .split_whitespace()
        .map(|t| t.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase())
        .filter(|t| !t.is_empty())
        .collect()
}

#[derive(Debug, Clone, Default)]
pub struct SnliLoad {
    pub pairs: Vec<SentencePair>,
    /// Lines with gold label "-", missing, or otherwise unrecognised.
    pub skipped_unknown_label: usize,
    /// Lines whose premise or hypothesis tokenizes to nothing.
    pub skipped_empty: usize,
    pub malformed: usize,
    /// Non-blank lines read; equals the sum of the four counts above.
    pub lines: usize,
}

#[derive(Deserialize)]
struct SnliLine {
    gold_label: Option<String>,
    sentence1: String,
    sentence2: String,
}

/// Reads one JSON object per line. Malformed lines are reported and counted;
/// the load fails if more than 1% of the lines are malformed.
pub fn load_snli(path: impl AsRef<Path>) -> Result<SnliLoad> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = SnliLoad::default();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.lines += 1;
        let rec: SnliLine = match serde_json::from_str(&line) {
            Ok(r) => r,
            Err(e) => {
                warn!("{}:{}: malformed line: {e}", path.display(), lineno + 1);
                out.malformed += 1;
                continue;
            }
        };
        let label = match rec.gold_label.as_deref().map(str::parse::<Label>) {
            Some(Ok(l)) => l,
            _ => {
                out.skipped_unknown_label += 1;
                continue;
            }
        };
        let premise = tokenize(&rec.sentence1);
        let hypothesis = tokenize(&rec.sentence2);
        if premise.is_empty() || hypothesis.is_empty() {
            out.skipped_empty += 1;
            continue;
        }
        out.pairs.push(SentencePair {
            premise,
            hypothesis,
            label,
            id: lineno,
        });
    }
    if out.malformed * 100 > out.lines {
        return Err(Error::Dataset {
            path: path.to_path_buf(),
            msg: format!("{} of {} lines malformed (limit 1%)", out.malformed, out.lines),
        });
    }
    Ok(out)
}

/// Writes `label TAB premise-tokens TAB hypothesis-tokens`, tokens joined by
/// single spaces.
pub fn write_tsv(path: impl AsRef<Path>, pairs: &[SentencePair]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let res: std::io::Result<()> = (|| {
        for p in pairs {
            writeln!(w, "{}\t{}\t{}", p.label, p.premise.join(" "), p.hypothesis.join(" "))?;
        }
        w.flush()
    })();
    res.map_err(|e| Error::io(path, e))
}

pub fn read_tsv(path: impl AsRef<Path>) -> Result<Vec<SentencePair>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut pairs = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |msg: String| Error::Dataset {
            path: path.to_path_buf(),
            msg: format!("line {}: {msg}", lineno + 1),
        };
        let mut cols = line.split('\t');
        let (Some(label), Some(prem), Some(hyp), None) =
            (cols.next(), cols.next(), cols.next(), cols.next())
        else {
            return Err(bad("expected three tab-separated columns".into()));
        };
        let label = label.parse::<Label>().map_err(bad)?;
        let premise: Vec<String> = prem.split_whitespace().map(String::from).collect();
        let hypothesis: Vec<String> = hyp.split_whitespace().map(String::from).collect();
        if premise.is_empty() || hypothesis.is_empty() {
            return Err(bad("empty sentence".into()));
        }
        pairs.push(SentencePair {
            premise,
            hypothesis,
            label,
            id: lineno,
        });
    }
    Ok(pairs)
}

/// Loads `.tsv` files with [`read_tsv`] and anything else with [`load_snli`].
pub fn load_pairs(path: impl AsRef<Path>) -> Result<Vec<SentencePair>> {
    let path = path.as_ref();
    if path.extension().is_some_and(|e| e == "tsv") {
        read_tsv(path)
    } else {
        let load = load_snli(path)?;
        log::info!(
            "{}: {} pairs ({} unknown label, {} empty, {} malformed)",
            path.display(),
            load.pairs.len(),
            load.skipped_unknown_label,
            load.skipped_empty,
            load.malformed
        );
        Ok(load.pairs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenize_examples() {
        assert_eq!(tokenize("John passed the exam."), ["john", "passed", "the", "exam"]);
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("  A   b "), ["a", "b"]);
        assert_eq!(tokenize("\"Hello,\" -- world!"), ["hello", "world"]);
        assert_eq!(tokenize("don't stop"), ["don't", "stop"]);
    }

    #[test]
    fn labels() {
        assert_eq!("entailment".parse::<Label>().unwrap() as u8, 1);
        assert_eq!("contradiction".parse::<Label>().unwrap() as u8, 2);
        assert_eq!("neutral".parse::<Label>().unwrap() as u8, 3);
        assert!("-".parse::<Label>().is_err());
        for l in Label::ALL {
            assert_eq!(Label::from_index(l.index()), Some(l));
        }
    }

    #[test]
    fn snli_accounting() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.jsonl");
        let body = [
            r#"{"gold_label":"entailment","sentence1":"A man sleeps.","sentence2":"A man rests."}"#,
            r#"{"gold_label":"-","sentence1":"A b.","sentence2":"C d."}"#,
            r#"{"sentence1":"A b.","sentence2":"C d."}"#,
            r#"{"gold_label":"neutral","sentence1":"...","sentence2":"C d."}"#,
            r#"{"gold_label":"contradiction","sentence1":"Dogs bark","sentence2":"Cats meow","extra":1}"#,
            "",
        ]
        .join("\n");
        std::fs::write(&path, body).unwrap();
        let load = load_snli(&path).unwrap();
        assert_eq!(load.pairs.len(), 2);
        assert_eq!(load.skipped_unknown_label, 2);
        assert_eq!(load.skipped_empty, 1);
        assert_eq!(load.malformed, 0);
        assert_eq!(load.lines, 5);
        assert_eq!(load.pairs[0].label, Label::Entailment);
        assert_eq!(load.pairs[0].hypothesis, ["a", "man", "rests"]);
        assert_eq!(load.pairs[1].id, 4);
    }

    #[test]
    fn snli_malformed_threshold() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.jsonl");
        let good = r#"{"gold_label":"neutral","sentence1":"a","sentence2":"b"}"#;
        let mut lines = vec![good; 200];
        lines.push("{not json");
        std::fs::write(&path, lines.join("\n")).unwrap();
        let load = load_snli(&path).unwrap();
        assert_eq!((load.pairs.len(), load.malformed), (200, 1));

        let lines = [good, "{oops", good];
        std::fs::write(&path, lines.join("\n")).unwrap();
        assert!(matches!(load_snli(&path), Err(Error::Dataset { .. })));
    }

    #[test]
    fn tsv_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.tsv");
        let pairs = vec![SentencePair {
            premise: tokenize("A dog runs."),
            hypothesis: tokenize("An animal moves."),
            label: Label::Neutral,
            id: 0,
        }];
        write_tsv(&path, &pairs).unwrap();
        assert_eq!(
            std::fs::read_to_string(&path).unwrap(),
            "neutral\ta dog runs\tan animal moves\n"
        );
        let back = load_pairs(&path).unwrap();
        assert_eq!(back, pairs);
    }
}
