//! Latent answer space: a tf-idf weighted answer-fragment × answer matrix,
//! its truncated SVD, and the projection of question motifs into it.

pub mod container;
mod linalg;
mod matrix;
mod svd;

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::fragments::{extract_fragments, FragmentConfig};
use crate::motifs::QuestionMotifView;

pub use matrix::{DenseMatrix, SparseMatrix};
pub use svd::{truncated_svd, SvdFactors, DROP_RELATIVE};

/// Norm below which a projected row is treated as zero.
pub const DEGENERATE_NORM: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdfVariant {
    /// `ln(N / df)`
    #[default]
    Plain,
    /// `ln((1 + N) / (1 + df)) + 1`
    Smooth,
}

impl IdfVariant {
    pub fn idf(self, n_docs: usize, df: usize) -> f64 {
        let (n, df) = (n_docs as f64, df as f64);
        match self {
            IdfVariant::Plain => (n / df).ln(),
            IdfVariant::Smooth => ((1.0 + n) / (1.0 + df)).ln() + 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AnswerMatrix {
    /// Rows are answer fragments (canonical strings, sorted); columns are
    /// QA pairs in corpus order, labelled by pair id.
    pub matrix: SparseMatrix,
    /// Rows that are entirely zero after weighting (e.g. idf = 0).
    pub zero_rows: Vec<usize>,
}

/// Term-document matrix over answer fragments: raw counts (number of answer
/// sentences containing the fragment), fragments present in fewer than
/// `min_answers` answers dropped, tf-idf weighted and row-normalized.
pub fn build_answer_matrix(
    corpus: &Corpus,
    cfg: &FragmentConfig,
    min_answers: usize,
    idf: IdfVariant,
) -> Result<AnswerMatrix> {
    if min_answers == 0 {
        return Err(Error::InvalidParameter {
            name: "n_A",
            reason: "must be at least 1".into(),
        });
    }
    let per_answer: Vec<BTreeMap<String, usize>> = corpus
        .pairs()
        .par_iter()
        .map(|pair| {
            let mut counts = BTreeMap::new();
            for s in &pair.answer_sentences {
                if let Ok(set) = extract_fragments(s, cfg) {
                    for f in set.fragments {
                        *counts.entry(f.canonical()).or_insert(0) += 1;
                    }
                }
            }
            counts
        })
        .collect();

    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for counts in &per_answer {
        for f in counts.keys() {
            *df.entry(f.as_str()).or_insert(0) += 1;
        }
    }
    let kept: Vec<(&str, usize)> = df.into_iter().filter(|&(_, n)| n >= min_answers).collect();
    if kept.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    let row_of: HashMap<&str, usize> = kept.iter().enumerate().map(|(i, (f, _))| (*f, i)).collect();
    let n_docs = corpus.len();
    let weights: Vec<f64> = kept.iter().map(|&(_, n)| idf.idf(n_docs, n)).collect();

    let mut triplets = Vec::new();
    for (col, counts) in per_answer.iter().enumerate() {
        for (f, &tf) in counts {
            if let Some(&row) = row_of.get(f.as_str()) {
                triplets.push((row, col, tf as f64 * weights[row]));
            }
        }
    }
    let row_labels = kept.iter().map(|(f, _)| f.to_string()).collect();
    let col_labels = corpus.pairs().iter().map(|p| p.pair_id.clone()).collect();
    let mut matrix = SparseMatrix::from_triplets(row_labels, col_labels, triplets)?;
    let zero_rows = matrix.normalize_rows();
    if !zero_rows.is_empty() {
        log::info!("{} answer fragments have all-zero weight", zero_rows.len());
    }
    Ok(AnswerMatrix { matrix, zero_rows })
}

/// Rank-`d` factorization `A ≈ U S Vᵀ` with labels carried over from `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentSpace {
    pub u: DenseMatrix,
    pub s: Vec<f64>,
    pub v: DenseMatrix,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub rank_deficient: bool,
}

impl LatentSpace {
    pub fn fit(a: &SparseMatrix, d: usize, seed: u64) -> Result<Self> {
        let f = truncated_svd(a, d, seed)?;
        Ok(LatentSpace {
            u: f.u,
            s: f.s,
            v: f.v,
            row_labels: a.row_labels.clone(),
            col_labels: a.col_labels.clone(),
            rank_deficient: f.rank_deficient,
        })
    }

    /// Effective rank (number of kept components).
    pub fn rank(&self) -> usize {
        self.s.len()
    }
}

/// Unit-norm latent vectors for motifs. Degenerate rows are all zero.
#[derive(Debug, Clone, PartialEq)]
pub struct MotifEmbedding {
    pub vectors: DenseMatrix,
    pub degenerate: Vec<bool>,
    pub labels: Vec<String>,
}

impl MotifEmbedding {
    pub fn dim(&self) -> usize {
        self.vectors.cols
    }

    pub fn len(&self) -> usize {
        self.vectors.rows
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.rows == 0
    }

    pub fn vector(&self, motif: usize) -> Option<&[f64]> {
        (!self.degenerate[motif]).then(|| self.vectors.row(motif))
    }

    pub fn usable(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&i| !self.degenerate[i])
    }
}

/// Motif × QA-pair indicator matrix with unit-norm rows. Column `j`
/// corresponds to `views[j]`.
pub fn build_motif_matrix(views: &[QuestionMotifView], motif_labels: Vec<String>) -> Result<SparseMatrix> {
    let mut triplets = Vec::new();
    for (col, view) in views.iter().enumerate() {
        for &m in &view.contained_motifs {
            triplets.push((m, col, 1.0));
        }
    }
    let col_labels = views.iter().map(|v| v.pair_id.clone()).collect();
    let mut q = SparseMatrix::from_triplets(motif_labels, col_labels, triplets)?;
    q.normalize_rows();
    Ok(q)
}

/// `Q V S⁻¹` without row normalization.
pub fn project_rows_raw(q: &SparseMatrix, space: &LatentSpace) -> Result<DenseMatrix> {
    if q.col_labels != space.col_labels {
        return Err(Error::Alignment);
    }
    let r = space.rank();
    let mut out = DenseMatrix::zeros(q.n_rows, r);
    for i in 0..q.n_rows {
        for (j, val) in q.row(i) {
            let vrow = space.v.row(j);
            for k in 0..r {
                out.data[i * r + k] += val * vrow[k];
            }
        }
        for k in 0..r {
            out.data[i * r + k] /= space.s[k];
        }
    }
    Ok(out)
}

/// Motif embeddings `Q V S⁻¹`, rows scaled to unit norm. Numerically zero
/// rows are flagged degenerate.
pub fn project_motifs(q: &SparseMatrix, space: &LatentSpace) -> Result<MotifEmbedding> {
    let mut vectors = project_rows_raw(q, space)?;
    let r = vectors.cols;
    let mut degenerate = vec![false; vectors.rows];
    for (i, flag) in degenerate.iter_mut().enumerate() {
        let row = &mut vectors.data[i * r..(i + 1) * r];
        let n = linalg::norm(row);
        if n < DEGENERATE_NORM {
            row.iter_mut().for_each(|x| *x = 0.0);
            *flag = true;
        } else {
            row.iter_mut().for_each(|x| *x /= n);
        }
    }
    Ok(MotifEmbedding {
        vectors,
        degenerate,
        labels: q.row_labels.clone(),
    })
}

/// Latent vector of a question: the unit-normalized sum of the embeddings of
/// its usable sink motifs.
pub fn project_question(view: &QuestionMotifView, emb: &MotifEmbedding) -> Result<Vec<f64>> {
    let mut sum = vec![0.0; emb.dim()];
    let mut used = 0;
    for &m in &view.sink_motifs {
        if let Some(v) = emb.vector(m) {
            for (s, x) in sum.iter_mut().zip(v) {
                *s += x;
            }
            used += 1;
        }
    }
    if used == 0 {
        return Err(Error::Unassignable);
    }
    let scale = 1.0 / (used as f64).sqrt();
    sum.iter_mut().for_each(|x| *x *= scale);
    let n = linalg::norm(&sum);
    if n < DEGENERATE_NORM {
        return Err(Error::Unassignable);
    }
    sum.iter_mut().for_each(|x| *x /= n);
    Ok(sum)
}

/// Unit-normalized copy of a vector, or `None` if it is numerically zero.
pub fn normalized(v: &[f64]) -> Option<Vec<f64>> {
    let n = linalg::norm(v);
    (n >= DEGENERATE_NORM).then(|| v.iter().map(|x| x / n).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn view(sinks: &[usize]) -> QuestionMotifView {
        QuestionMotifView {
            pair_id: "q".into(),
            contained_motifs: sinks.iter().copied().collect(),
            sink_motifs: sinks.iter().copied().collect::<BTreeSet<_>>(),
        }
    }

    fn emb(rows: &[Vec<f64>], degenerate: &[bool]) -> MotifEmbedding {
        MotifEmbedding {
            vectors: DenseMatrix::from_rows(rows),
            degenerate: degenerate.to_vec(),
            labels: (0..rows.len()).map(|i| i.to_string()).collect(),
        }
    }

    #[test]
    fn single_sink_is_its_embedding() {
        let e = emb(&[vec![0.6, 0.8], vec![1.0, 0.0]], &[false, false]);
        let got = project_question(&view(&[0]), &e).unwrap();
        assert!((got[0] - 0.6).abs() < 1e-15 && (got[1] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn orthogonal_sinks_average() {
        let e = emb(&[vec![1.0, 0.0], vec![0.0, 1.0]], &[false, false]);
        let got = project_question(&view(&[0, 1]), &e).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((got[0] - h).abs() < 1e-15 && (got[1] - h).abs() < 1e-15);
    }

    #[test]
    fn no_usable_sink_is_unassignable() {
        let e = emb(&[vec![0.0, 0.0]], &[true]);
        assert!(matches!(project_question(&view(&[0]), &e), Err(Error::Unassignable)));
        assert!(matches!(project_question(&view(&[]), &e), Err(Error::Unassignable)));
    }

    #[test]
    fn idf_variants() {
        assert_eq!(IdfVariant::Plain.idf(3, 3), 0.0);
        assert!((IdfVariant::Plain.idf(4, 1) - 4f64.ln()).abs() < 1e-15);
        assert!((IdfVariant::Smooth.idf(3, 3) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn misaligned_columns_rejected() {
        let space = LatentSpace {
            u: DenseMatrix::from_rows(&[vec![1.0]]),
            s: vec![1.0],
            v: DenseMatrix::from_rows(&[vec![1.0]]),
            row_labels: vec!["f".into()],
            col_labels: vec!["p1".into()],
            rank_deficient: false,
        };
        let q = SparseMatrix::from_triplets(vec!["m".into()], vec!["p2".into()], vec![(0, 0, 1.0)]).unwrap();
        assert!(matches!(project_motifs(&q, &space), Err(Error::Alignment)));
    }
}
