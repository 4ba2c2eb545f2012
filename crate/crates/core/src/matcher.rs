//! Max-cosine word matching and the augmented pair sequence fed to the LSTM.
//!
//! Every word of the conditioned sentence is paired with the word of the
//! conditioning sentence whose vector has the highest cosine similarity with
//! it. Ties go to the smallest index. Zero vectors are similar to nothing, so
//! a zero-norm candidate is only chosen when every candidate has zero norm.

use crate::embedding::{cosine, cosine_with_norms, EmbeddingLibrary, WordVector};
use crate::error::{Error, Result};
use crate::numerics::norm;

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedSequence {
    /// `z_t = [own_t ‖ matched_t]`, each of length `step_dim`.
    pub steps: Vec<Vec<f64>>,
    /// Conditioning-side index matched to each conditioned position.
    pub matched_indices: Vec<usize>,
    /// Cosine similarity of each matched pair.
    pub similarities: Vec<f64>,
    pub step_dim: usize,
}

impl AugmentedSequence {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Reference matcher: recomputes both norms for every comparison.
pub fn match_word(query: &[f64], candidates: &[&[f64]]) -> Result<usize> {
    if candidates.is_empty() {
        return Err(Error::Empty("candidate list"));
    }
    let mut best: Option<(usize, f64)> = None;
    for (i, c) in candidates.iter().enumerate() {
        if norm(c) == 0.0 {
            continue;
        }
        let sim = cosine(query, c)?;
        if best.is_none_or(|(_, s)| sim > s) {
            best = Some((i, sim));
        }
    }
    Ok(best.map_or(0, |(i, _)| i))
}

/// Candidate vectors with their norms computed once.
#[derive(Debug, Clone)]
pub struct Candidates<'a> {
    rows: Vec<&'a [f64]>,
    norms: Vec<f64>,
}

impl<'a> Candidates<'a> {
    pub fn new(rows: Vec<&'a [f64]>) -> Self {
        let norms = rows.iter().map(|r| norm(r)).collect();
        Candidates { rows, norms }
    }

    /// Library rows by index, reusing the library's stored norms.
    pub fn from_library(lib: &'a EmbeddingLibrary, indices: &[usize]) -> Self {
        Candidates {
            rows: indices.iter().map(|&i| lib.row(i)).collect(),
            norms: indices.iter().map(|&i| lib.row_norm(i)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, i: usize) -> &'a [f64] {
        self.rows[i]
    }
}

/// Same result as [`match_word`], using the precomputed candidate norms.
/// Returns the index and the similarity.
pub fn match_fast(query: &[f64], candidates: &Candidates<'_>) -> Result<(usize, f64)> {
    if candidates.is_empty() {
        return Err(Error::Empty("candidate list"));
    }
    let qn = norm(query);
    let mut best: Option<(usize, f64)> = None;
    for (i, (row, &cn)) in candidates.rows.iter().zip(&candidates.norms).enumerate() {
        if row.len() != query.len() {
            return Err(Error::Dimension(format!(
                "query has length {}, candidate {i} has length {}",
                query.len(),
                row.len()
            )));
        }
        if cn == 0.0 {
            continue;
        }
        let sim = cosine_with_norms(query, qn, row, cn);
        if best.is_none_or(|(_, s)| sim > s) {
            best = Some((i, sim));
        }
    }
    Ok(best.unwrap_or((0, 0.0)))
}

/// Matches pre-resolved word vectors.
pub fn augment_vectors(conditioned: &[WordVector], conditioning: &[WordVector]) -> Result<AugmentedSequence> {
    if conditioned.is_empty() {
        return Err(Error::Empty("conditioned sentence"));
    }
    if conditioning.is_empty() {
        return Err(Error::Empty("conditioning sentence"));
    }
    let d = conditioned[0].values.len();
    let cands = Candidates::new(conditioning.iter().map(|v| v.values.as_slice()).collect());
    let mut steps = Vec::with_capacity(conditioned.len());
    let mut matched_indices = Vec::with_capacity(conditioned.len());
    let mut similarities = Vec::with_capacity(conditioned.len());
    for own in conditioned {
        let (j, sim) = match_fast(&own.values, &cands)?;
        let mut z = Vec::with_capacity(2 * d);
        z.extend_from_slice(&own.values);
        z.extend_from_slice(cands.row(j));
        steps.push(z);
        matched_indices.push(j);
        similarities.push(sim);
    }
    Ok(AugmentedSequence {
        steps,
        matched_indices,
        similarities,
        step_dim: 2 * d,
    })
}

/// Builds the augmented sequence of `conditioned` with reference to
/// `conditioning`. OOV tokens are resolved from their sentence context first.
pub fn build_augmented_sequence(
    conditioned: &[String],
    conditioning: &[String],
    lib: &EmbeddingLibrary,
    oov_window: usize,
) -> Result<AugmentedSequence> {
    if conditioned.is_empty() {
        return Err(Error::Empty("conditioned sentence"));
    }
    if conditioning.is_empty() {
        return Err(Error::Empty("conditioning sentence"));
    }
    let own = lib.resolve_sentence(conditioned, oov_window);
    let other = lib.resolve_sentence(conditioning, oov_window);
    augment_vectors(&own, &other)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn match_word_examples() {
        let c: [&[f64]; 2] = [&[1.0, 0.0], &[0.0, 1.0]];
        // cos([.9,.1],[1,0]) = .9/|q| > cos([.9,.1],[0,1]) = .1/|q|
        assert_eq!(match_word(&[0.9, 0.1], &c).unwrap(), 0);
        assert_eq!(match_word(&[9.0, 1.0], &c).unwrap(), 0);
        let tied: [&[f64]; 2] = [&[1.0, 1.0], &[1.0, 1.0]];
        assert_eq!(match_word(&[0.2, 0.7], &tied).unwrap(), 0);
        assert!(matches!(match_word(&[1.0], &[]), Err(Error::Empty(_))));
    }

    #[test]
    fn zero_candidates() {
        let c: [&[f64]; 3] = [&[0.0, 0.0], &[-1.0, 0.0], &[0.0, -1.0]];
        // All nonzero candidates have negative cosine; the zero one still loses.
        assert_eq!(match_word(&[1.0, 1.0], &c).unwrap(), 1);
        assert_eq!(match_fast(&[1.0, 1.0], &Candidates::new(c.to_vec())).unwrap().0, 1);
        let zeros: [&[f64]; 2] = [&[0.0, 0.0], &[0.0, 0.0]];
        assert_eq!(match_word(&[1.0, 1.0], &zeros).unwrap(), 0);
        assert_eq!(match_fast(&[1.0, 1.0], &Candidates::new(zeros.to_vec())).unwrap(), (0, 0.0));
        // Zero query against anything: all similarities 0, first nonzero wins.
        assert_eq!(match_word(&[0.0, 0.0], &c).unwrap(), 1);
    }

    #[test]
    fn single_candidate() {
        let c = Candidates::new(vec![&[0.3, -0.2][..]]);
        assert_eq!(match_fast(&[-5.0, 1.0], &c).unwrap().0, 0);
    }

    #[test]
    fn shapes() {
        let rows: Vec<(String, Vec<f64>)> = (0..6)
            .map(|i| (format!("w{i}"), (0..300).map(|j| ((i * 31 + j) % 7) as f64 - 3.0).collect()))
            .collect();
        let lib = EmbeddingLibrary::from_rows(300, rows).unwrap();
        let y: Vec<String> = ["w0", "w1", "w2", "w3"].iter().map(|s| s.to_string()).collect();
        let x: Vec<String> = ["w4", "w5"].iter().map(|s| s.to_string()).collect();
        let z = build_augmented_sequence(&y, &x, &lib, 4).unwrap();
        assert_eq!(z.len(), 4);
        assert_eq!(z.step_dim, 600);
        assert!(z.steps.iter().all(|s| s.len() == 600));
        assert!(z.matched_indices.iter().all(|&j| j < 2));
        let back = build_augmented_sequence(&x, &y, &lib, 4).unwrap();
        assert_eq!(back.len(), 2);
        assert!(build_augmented_sequence(&[], &x, &lib, 4).is_err());
        assert!(build_augmented_sequence(&y, &[], &lib, 4).is_err());
    }

    #[test]
    fn self_matching() {
        let lib = EmbeddingLibrary::from_rows(
            3,
            [
                ("a", vec![1.0, 0.1, 0.0]),
                ("b", vec![0.0, 1.0, 0.2]),
                ("c", vec![0.3, 0.0, 1.0]),
            ],
        )
        .unwrap();
        let s: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let z = build_augmented_sequence(&s, &s, &lib, 4).unwrap();
        assert_eq!(z.matched_indices, vec![0, 1, 2]);
        for sim in z.similarities {
            assert!((sim - 1.0).abs() < 1e-12);
        }
    }
}
