//! Pre-trained word-embedding libraries.
//!
//! Two on-disk formats are understood:
//!
//! * text: one word per line, `word v1 v2 ... vd`, decimal floats separated
//!   by single spaces (GloVe style);
//! * binary: an ASCII header `|V| d\n`, then per word the word bytes, one
//!   space, and `d` little-endian `f32` values, optionally followed by `\n`
//!   (word2vec style).
//!
//! Values are widened to `f64` on load and all arithmetic stays in `f64`.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use log::warn;

use crate::error::{Error, Result};
use crate::numerics::{dot, norm};

/// Half-width of the context window used to fill in OOV vectors.
pub const DEFAULT_OOV_WINDOW: usize = 4;

/// Immutable word → vector table.
#[derive(Debug, Clone)]
pub struct EmbeddingLibrary {
    words: Vec<String>,
    index: HashMap<String, usize>,
    matrix: Vec<f64>,
    dim: usize,
    norms: Vec<f64>,
    duplicates: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VectorSource {
    InVocab,
    OovAveraged,
    Zero,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WordVector {
    pub values: Vec<f64>,
    pub source: VectorSource,
}

/// Incremental builder; the first occurrence of a word wins.
struct Builder {
    dim: usize,
    words: Vec<String>,
    index: HashMap<String, usize>,
    matrix: Vec<f64>,
    duplicates: usize,
}

impl Builder {
    fn new(dim: usize) -> Self {
        Builder {
            dim,
            words: Vec::new(),
            index: HashMap::new(),
            matrix: Vec::new(),
            duplicates: 0,
        }
    }

    fn push(&mut self, word: String, values: &[f64]) {
        debug_assert_eq!(values.len(), self.dim);
        if self.index.contains_key(&word) {
            self.duplicates += 1;
            return;
        }
        self.index.insert(word.clone(), self.words.len());
        self.words.push(word);
        self.matrix.extend_from_slice(values);
    }

    fn finish(self) -> EmbeddingLibrary {
        let norms = self.matrix.chunks_exact(self.dim).map(norm).collect();
        EmbeddingLibrary {
            words: self.words,
            index: self.index,
            matrix: self.matrix,
            dim: self.dim,
            norms,
            duplicates: self.duplicates,
        }
    }
}

impl EmbeddingLibrary {
    /// Builds a library from in-memory rows. Duplicate words keep their first
    /// vector.
    pub fn from_rows<I, S>(dim: usize, rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Vec<f64>)>,
        S: Into<String>,
    {
        if dim == 0 {
            return Err(Error::Dimension("embedding dimension must be positive".into()));
        }
        let mut b = Builder::new(dim);
        for (word, values) in rows {
            let word = word.into();
            if values.len() != dim {
                return Err(Error::Dimension(format!(
                    "vector for {word:?} has {} entries, expected {dim}",
                    values.len()
                )));
            }
            b.push(word, &values);
        }
        Ok(b.finish())
    }

    /// Loads the text format. The dimension comes from the first line unless
    /// `expected_dim` is given; in that case the last `d` fields of each line
    /// are the vector and everything before them is the word, which admits
    /// the handful of space-containing tokens found in some GloVe releases.
    pub fn load_text(path: impl AsRef<Path>, expected_dim: Option<usize>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_text(BufReader::new(file), expected_dim).map_err(|msg| Error::EmbeddingFormat {
            path: path.to_path_buf(),
            msg,
        })
    }

    fn read_text<R: BufRead>(
        reader: R,
        expected_dim: Option<usize>,
    ) -> std::result::Result<Self, String> {
        if expected_dim == Some(0) {
            return Err("expected dimension must be positive".into());
        }
        let mut builder: Option<Builder> = None;
        let mut values = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| format!("line {}: {e}", lineno + 1))?;
            let line = line.trim_end_matches(['\r', '\n']);
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(' ').filter(|f| !f.is_empty()).collect();
            let dim = match (&builder, expected_dim) {
                (Some(b), _) => b.dim,
                (None, Some(d)) => d,
                (None, None) => {
                    if fields.len() < 2 {
                        return Err(format!("line {}: no vector values", lineno + 1));
                    }
                    fields.len() - 1
                }
            };
            let (word, raw) = if expected_dim.is_some() {
                if fields.len() < dim + 1 {
                    return Err(format!(
                        "line {}: {} values, expected dimension {dim}",
                        lineno + 1,
                        fields.len().saturating_sub(1)
                    ));
                }
                let split = fields.len() - dim;
                (fields[..split].join(" "), &fields[split..])
            } else {
                if fields.len() != dim + 1 {
                    return Err(format!(
                        "line {}: inconsistent dimension ({} values, first line had {dim})",
                        lineno + 1,
                        fields.len() - 1
                    ));
                }
                (fields[0].to_string(), &fields[1..])
            };
            values.clear();
            for f in raw {
                let v: f64 = f
                    .parse()
                    .map_err(|_| format!("line {}: non-numeric field {f:?}", lineno + 1))?;
                values.push(v);
            }
            builder.get_or_insert_with(|| Builder::new(dim)).push(word, &values);
        }
        let builder = builder.ok_or_else(|| "file contains no vectors".to_string())?;
        if builder.duplicates > 0 {
            warn!("{} duplicate words ignored (first occurrence kept)", builder.duplicates);
        }
        Ok(builder.finish())
    }

    /// Loads the binary format.
    pub fn load_binary(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_binary(BufReader::new(file)).map_err(|msg| Error::EmbeddingFormat {
            path: path.to_path_buf(),
            msg,
        })
    }

    fn read_binary<R: BufRead>(mut reader: R) -> std::result::Result<Self, String> {
        let mut header = Vec::new();
        reader
            .read_until(b'\n', &mut header)
            .map_err(|e| format!("reading header: {e}"))?;
        if header.last() != Some(&b'\n') {
            return Err("truncated header".into());
        }
        let header = String::from_utf8_lossy(&header);
        let mut parts = header.split_ascii_whitespace();
        let parse = |s: Option<&str>, what: &str| -> std::result::Result<usize, String> {
            s.ok_or_else(|| format!("header is missing {what}"))?
                .parse::<usize>()
                .map_err(|_| format!("header {what} is not an integer"))
        };
        let count = parse(parts.next(), "word count")?;
        let dim = parse(parts.next(), "dimension")?;
        if dim == 0 {
            return Err("header dimension must be positive".into());
        }
        if parts.next().is_some() {
            return Err("header has extra fields".into());
        }

        let mut builder = Builder::new(dim);
        let mut raw = vec![0u8; dim * 4];
        let mut values = vec![0.0f64; dim];
        let mut word = Vec::new();
        let mut lossy = 0usize;
        for i in 0..count {
            word.clear();
            // Skip the optional newline that terminates the previous record.
            loop {
                let buf = reader.fill_buf().map_err(|e| e.to_string())?;
                match buf.first() {
                    Some(b'\n') => reader.consume(1),
                    Some(_) => break,
                    None => return Err(format!("truncated: header promises {count} words, found {i}")),
                }
            }
            reader.read_until(b' ', &mut word).map_err(|e| e.to_string())?;
            if word.pop() != Some(b' ') {
                return Err(format!("truncated in word {}", i + 1));
            }
            reader
                .read_exact(&mut raw)
                .map_err(|_| format!("truncated in vector of word {}", i + 1))?;
            for (v, b) in values.iter_mut().zip(raw.chunks_exact(4)) {
                *v = f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64;
            }
            let w = match String::from_utf8(word.clone()) {
                Ok(w) => w,
                Err(_) => {
                    lossy += 1;
                    String::from_utf8_lossy(&word).into_owned()
                }
            };
            builder.push(w, &values);
        }
        let mut rest = Vec::new();
        reader.read_to_end(&mut rest).map_err(|e| e.to_string())?;
        if rest.iter().any(|b| !b.is_ascii_whitespace()) {
            return Err(format!(
                "header count mismatch: {} trailing bytes after {count} words",
                rest.len()
            ));
        }
        if lossy > 0 {
            warn!("{lossy} words were not valid UTF-8; invalid bytes replaced");
        }
        if builder.duplicates > 0 {
            warn!("{} duplicate words ignored (first occurrence kept)", builder.duplicates);
        }
        Ok(builder.finish())
    }

    /// Writes the text format; values use the shortest representation that
    /// parses back to the same `f64`.
    pub fn write_text(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let res: std::io::Result<()> = (|| {
            for (i, word) in self.words.iter().enumerate() {
                w.write_all(word.as_bytes())?;
                for v in self.row(i) {
                    write!(w, " {v}")?;
                }
                w.write_all(b"\n")?;
            }
            w.flush()
        })();
        res.map_err(|e| Error::io(path, e))
    }

    /// Writes the binary format. Values are rounded to `f32`.
    pub fn write_binary(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let res: std::io::Result<()> = (|| {
            writeln!(w, "{} {}", self.len(), self.dim)?;
            for (i, word) in self.words.iter().enumerate() {
                w.write_all(word.as_bytes())?;
                w.write_all(b" ")?;
                for &v in self.row(i) {
                    w.write_all(&(v as f32).to_le_bytes())?;
                }
                w.write_all(b"\n")?;
            }
            w.flush()
        })();
        res.map_err(|e| Error::io(path, e))
    }

    /// Concatenates two libraries word-wise: `v(w) = [a(w) ‖ b(w)]`. The
    /// vocabulary is the union; a word missing from one side gets zeros for
    /// that half.
    pub fn concat(a: &EmbeddingLibrary, b: &EmbeddingLibrary) -> EmbeddingLibrary {
        let dim = a.dim + b.dim;
        let mut builder = Builder::new(dim);
        let mut row = vec![0.0; dim];
        let words = a
            .words
            .iter()
            .chain(b.words.iter().filter(|w| !a.index.contains_key(*w)));
        for word in words {
            row.fill(0.0);
            if let Some(v) = a.get(word) {
                row[..a.dim].copy_from_slice(v);
            }
            if let Some(v) = b.get(word) {
                row[a.dim..].copy_from_slice(v);
            }
            builder.push(word.clone(), &row);
        }
        builder.finish()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Number of duplicate entries dropped while loading.
    pub fn duplicates(&self) -> usize {
        self.duplicates
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.matrix[i * self.dim..(i + 1) * self.dim]
    }

    pub fn row_norm(&self, i: usize) -> f64 {
        self.norms[i]
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.index_of(word).map(|i| self.row(i))
    }

    /// The whole `|V| × d` matrix, row-major.
    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    /// Same library with every vector multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> EmbeddingLibrary {
        let matrix: Vec<f64> = self.matrix.iter().map(|v| v * factor).collect();
        let norms = matrix.chunks_exact(self.dim).map(norm).collect();
        EmbeddingLibrary {
            matrix,
            norms,
            ..self.clone()
        }
    }

    /// Vector for `tokens[position]`. Out-of-vocabulary tokens get the mean of
    /// the in-vocabulary tokens within `window` positions on either side, or
    /// the zero vector when there are none.
    pub fn lookup_with_oov(&self, tokens: &[String], position: usize, window: usize) -> WordVector {
        assert!(position < tokens.len(), "position {position} out of range");
        if let Some(v) = self.get(&tokens[position]) {
            return WordVector {
                values: v.to_vec(),
                source: VectorSource::InVocab,
            };
        }
        let lo = position.saturating_sub(window);
        let hi = (position + window).min(tokens.len() - 1);
        let mut sum = vec![0.0; self.dim];
        let mut n = 0usize;
        for (i, tok) in tokens.iter().enumerate().take(hi + 1).skip(lo) {
            if i == position {
                continue;
            }
            if let Some(v) = self.get(tok) {
                for (s, x) in sum.iter_mut().zip(v) {
                    *s += x;
                }
                n += 1;
            }
        }
        if n == 0 {
            return WordVector {
                values: sum,
                source: VectorSource::Zero,
            };
        }
        let inv = n as f64;
        sum.iter_mut().for_each(|s| *s /= inv);
        WordVector {
            values: sum,
            source: VectorSource::OovAveraged,
        }
    }

    /// Resolves every token of a sentence via [`lookup_with_oov`](Self::lookup_with_oov).
    pub fn resolve_sentence(&self, tokens: &[String], window: usize) -> Vec<WordVector> {
        (0..tokens.len())
            .map(|i| self.lookup_with_oov(tokens, i, window))
            .collect()
    }
}

/// Cosine similarity. A zero vector has similarity 0 with everything.
pub fn cosine(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Dimension(format!(
            "cosine of vectors with lengths {} and {}",
            x.len(),
            y.len()
        )));
    }
    Ok(cosine_with_norms(x, norm(x), y, norm(y)))
}

/// Cosine with both norms supplied by the caller.
pub(crate) fn cosine_with_norms(x: &[f64], nx: f64, y: &[f64], ny: f64) -> f64 {
    if nx == 0.0 || ny == 0.0 {
        return 0.0;
    }
    dot(x, y) / (nx * ny)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn text(s: &str) -> std::result::Result<EmbeddingLibrary, String> {
        EmbeddingLibrary::read_text(Cursor::new(s.as_bytes().to_vec()), None)
    }

    fn toks(s: &str) -> Vec<String> {
        s.split(' ').map(String::from).collect()
    }

    #[test]
    fn text_basic() {
        let lib = text("cat 0.1 0.2\ndog 0.3 0.4").unwrap();
        assert_eq!(lib.len(), 2);
        assert_eq!(lib.dim(), 2);
        assert_eq!(lib.get("dog").unwrap(), &[0.3, 0.4]);
    }

    #[test]
    fn text_first_occurrence_wins() {
        let lib = text("cat 0.1 0.2\ncat 9 9").unwrap();
        assert_eq!(lib.len(), 1);
        assert_eq!(lib.duplicates(), 1);
        assert_eq!(lib.get("cat").unwrap(), &[0.1, 0.2]);
    }

    #[test]
    fn text_errors() {
        let err = text("cat 0.1\ndog 0.3 0.4").unwrap_err();
        assert!(err.contains("inconsistent dimension"), "{err}");
        assert!(text("cat 0.1 zz").unwrap_err().contains("non-numeric"));
        assert!(text("").unwrap_err().contains("no vectors"));
        assert!(text("\n\n").is_err());
        let err = EmbeddingLibrary::read_text(Cursor::new(b"cat 0.1 0.2\n".to_vec()), Some(3))
            .unwrap_err();
        assert!(err.contains("expected dimension 3"), "{err}");
    }

    #[test]
    fn text_expected_dim_allows_spaced_words() {
        let lib =
            EmbeddingLibrary::read_text(Cursor::new(b". . . 1 2\ncat 3 4\n".to_vec()), Some(2))
                .unwrap();
        assert_eq!(lib.get(". . .").unwrap(), &[1.0, 2.0]);
        assert_eq!(lib.get("cat").unwrap(), &[3.0, 4.0]);
    }

    fn binary_bytes(count: usize, dim: usize, records: &[(&str, Vec<f32>)]) -> Vec<u8> {
        let mut out = format!("{count} {dim}\n").into_bytes();
        for (w, vals) in records {
            out.extend_from_slice(w.as_bytes());
            out.push(b' ');
            for v in vals {
                out.extend_from_slice(&v.to_le_bytes());
            }
            out.push(b'\n');
        }
        out
    }

    #[test]
    fn binary_basic() {
        let bytes = binary_bytes(
            2,
            3,
            &[("a", vec![1.0, 2.0, 3.0]), ("b", vec![0.5, -0.5, 0.25])],
        );
        let lib = EmbeddingLibrary::read_binary(Cursor::new(bytes)).unwrap();
        assert_eq!((lib.len(), lib.dim()), (2, 3));
        assert_eq!(lib.get("b").unwrap(), &[0.5, -0.5, 0.25]);
    }

    #[test]
    fn binary_without_record_newlines() {
        let mut bytes = b"2 1\n".to_vec();
        bytes.extend_from_slice(b"x ");
        bytes.extend_from_slice(&[0x00, 0x00, 0x80, 0x3F]);
        bytes.extend_from_slice(b"y ");
        bytes.extend_from_slice(&2.0f32.to_le_bytes());
        let lib = EmbeddingLibrary::read_binary(Cursor::new(bytes)).unwrap();
        assert_eq!(lib.get("x").unwrap(), &[1.0]);
        assert_eq!(lib.get("y").unwrap(), &[2.0]);
    }

    #[test]
    fn binary_errors() {
        let bytes = binary_bytes(2, 3, &[("a", vec![1.0, 2.0, 3.0])]);
        let err = EmbeddingLibrary::read_binary(Cursor::new(bytes)).unwrap_err();
        assert!(err.contains("truncated"), "{err}");

        let mut bytes = binary_bytes(1, 2, &[("a", vec![1.0, 2.0])]);
        bytes.truncate(bytes.len() - 3);
        assert!(EmbeddingLibrary::read_binary(Cursor::new(bytes))
            .unwrap_err()
            .contains("truncated"));

        let bytes = binary_bytes(1, 1, &[("a", vec![1.0]), ("b", vec![2.0])]);
        let err = EmbeddingLibrary::read_binary(Cursor::new(bytes)).unwrap_err();
        assert!(err.contains("count mismatch"), "{err}");

        assert!(EmbeddingLibrary::read_binary(Cursor::new(b"2 x\n".to_vec())).is_err());
    }

    #[test]
    fn binary_invalid_utf8_is_replaced() {
        let mut bytes = b"1 1\n".to_vec();
        bytes.extend_from_slice(&[b'a', 0xFF, b' ']);
        bytes.extend_from_slice(&1.0f32.to_le_bytes());
        let lib = EmbeddingLibrary::read_binary(Cursor::new(bytes)).unwrap();
        assert_eq!(lib.words()[0], "a\u{FFFD}");
    }

    #[test]
    fn concat_fills_missing_half_with_zeros() {
        let a = EmbeddingLibrary::from_rows(2, [("w", vec![1.0, 2.0]), ("both", vec![5.0, 6.0])])
            .unwrap();
        let b = EmbeddingLibrary::from_rows(2, [("both", vec![7.0, 8.0]), ("z", vec![3.0, 4.0])])
            .unwrap();
        let c = EmbeddingLibrary::concat(&a, &b);
        assert_eq!(c.dim(), 4);
        assert_eq!(c.len(), 3);
        assert_eq!(c.get("w").unwrap(), &[1.0, 2.0, 0.0, 0.0]);
        assert_eq!(c.get("z").unwrap(), &[0.0, 0.0, 3.0, 4.0]);
        assert_eq!(c.get("both").unwrap(), &[5.0, 6.0, 7.0, 8.0]);
    }

    #[test]
    fn concat_300_plus_300() {
        let a = EmbeddingLibrary::from_rows(300, [("x", vec![0.1; 300])]).unwrap();
        let b = EmbeddingLibrary::from_rows(300, [("x", vec![0.2; 300])]).unwrap();
        assert_eq!(EmbeddingLibrary::concat(&a, &b).dim(), 600);
    }

    #[test]
    fn oov_lookup() {
        let lib = EmbeddingLibrary::from_rows(
            2,
            [("cat", vec![3.0, 4.0]), ("a", vec![1.0, 0.0]), ("b", vec![0.0, 1.0])],
        )
        .unwrap();
        let v = lib.lookup_with_oov(&toks("the cat"), 1, 4);
        assert_eq!(v.source, VectorSource::InVocab);
        assert_eq!(v.values, vec![3.0, 4.0]);

        let v = lib.lookup_with_oov(&toks("a zzz b"), 1, 4);
        assert_eq!(v.source, VectorSource::OovAveraged);
        assert_eq!(v.values, vec![0.5, 0.5]);

        let v = lib.lookup_with_oov(&toks("qq zzz rr"), 1, 4);
        assert_eq!(v.source, VectorSource::Zero);
        assert_eq!(v.values, vec![0.0, 0.0]);

        // Window of 1 does not reach "b".
        let v = lib.lookup_with_oov(&toks("a zzz qq b"), 1, 1);
        assert_eq!(v.values, vec![1.0, 0.0]);
    }

    #[test]
    fn cosine_examples() {
        let v = [0.3, -1.2, 4.0];
        assert!((cosine(&v, &v).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert!((cosine(&[1.0, 0.0], &[1.0, 1.0]).unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert_eq!(cosine(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), 0.0);
        assert!(cosine(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn norms_match_rows() {
        let lib = text("a 3 4\nb 1 1\nc 0 0").unwrap();
        assert_eq!(lib.row_norm(0), 5.0);
        assert!((lib.row_norm(1) - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(lib.row_norm(2), 0.0);
    }
}
