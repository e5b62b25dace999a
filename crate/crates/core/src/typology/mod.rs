//! Question types: k-means clusters of motif embeddings, with per-question
//! and per-answer-fragment assignment and a binary model container.

pub mod kmeans;

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::latent::container::{ByteReader, ByteWriter};
use crate::latent::{normalized, project_question, DenseMatrix, LatentSpace, MotifEmbedding};
use crate::motifs::{MotifModel, QuestionMotifView};

pub use kmeans::{kmeans, nearest, KMeansFit, KMeansParams};

pub const MODEL_MAGIC: &[u8; 8] = b"QTYPMODL";
pub const MODEL_VERSION: u32 = 1;

/// Every parameter that shaped a model, kept for provenance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Minimum motif support.
    pub n: usize,
    /// Motif equivalence threshold.
    pub p: f64,
    /// Minimum number of answers an answer fragment must occur in.
    pub n_a: usize,
    /// Latent rank.
    pub d: usize,
    /// Number of question types.
    pub k: usize,
    pub seed: u64,
    pub restarts: usize,
    pub max_size: usize,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            n: 100,
            p: 0.9,
            n_a: 100,
            d: 25,
            k: 8,
            seed: 0,
            restarts: 10,
            max_size: 4,
            max_iter: 300,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypeModel {
    pub params: ModelParams,
    /// `k × d` centroids.
    pub centroids: DenseMatrix,
    /// Type of each motif; `None` for degenerate embeddings.
    pub motif_assignment: Vec<Option<usize>>,
    /// Type of each answer fragment (row of U); `None` for zero rows.
    pub answer_fragment_assignment: Vec<Option<usize>>,
    pub inertia: f64,
    /// Optional human-readable names, one per type.
    pub type_labels: Vec<String>,
}

impl TypeModel {
    pub fn k(&self) -> usize {
        self.centroids.rows
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeAssignment {
    pub pair_id: String,
    pub type_id: usize,
    pub distance: f64,
    #[serde(skip)]
    pub projection: Vec<f64>,
}

/// Clusters the usable motif embeddings into `params.k` types.
pub fn fit_types(emb: &MotifEmbedding, params: &ModelParams) -> Result<TypeModel> {
    if params.k < 2 {
        return Err(Error::InvalidParameter {
            name: "k",
            reason: "need at least 2 types".into(),
        });
    }
    let usable: Vec<usize> = emb.usable().collect();
    if usable.len() < params.k {
        return Err(Error::Infeasible {
            needed: params.k,
            found: usable.len(),
        });
    }
    let rows: Vec<Vec<f64>> = usable.iter().map(|&i| emb.vectors.row(i).to_vec()).collect();
    let points = DenseMatrix::from_rows(&rows);
    let fit = kmeans(
        &points,
        &KMeansParams {
            k: params.k,
            restarts: params.restarts,
            max_iter: params.max_iter,
            tol: params.tol,
            seed: params.seed,
        },
    );
    let mut motif_assignment = vec![None; emb.len()];
    for (pos, &m) in usable.iter().enumerate() {
        motif_assignment[m] = Some(fit.labels[pos]);
    }
    Ok(TypeModel {
        params: *params,
        centroids: fit.centroids,
        motif_assignment,
        answer_fragment_assignment: Vec::new(),
        inertia: fit.inertia,
        type_labels: Vec::new(),
    })
}

/// Projects a question through its sink motifs and assigns the nearest type.
pub fn assign_question(view: &QuestionMotifView, emb: &MotifEmbedding, model: &TypeModel) -> Result<TypeAssignment> {
    let projection = project_question(view, emb)?;
    let (type_id, d2) = nearest(&model.centroids, &projection);
    Ok(TypeAssignment {
        pair_id: view.pair_id.clone(),
        type_id,
        distance: d2.sqrt(),
        projection,
    })
}

/// Nearest type for every unit-normalized row of U; zero rows get `None`.
pub fn assign_answer_fragments(space: &LatentSpace, model: &TypeModel) -> Vec<Option<usize>> {
    (0..space.u.rows)
        .map(|i| normalized(space.u.row(i)).map(|x| nearest(&model.centroids, &x).0))
        .collect()
}

fn write_assignment(w: &mut ByteWriter, a: &[Option<usize>]) {
    w.u64(a.len() as u64);
    for x in a {
        w.u64(x.map_or(u64::MAX, |v| v as u64));
    }
}

fn read_assignment(r: &mut ByteReader, k: usize) -> Result<Vec<Option<usize>>> {
    let n = r.usize()?;
    let mut out = Vec::with_capacity(n.min(1 << 20));
    for _ in 0..n {
        let v = r.u64()?;
        out.push(if v == u64::MAX {
            None
        } else if (v as usize) < k {
            Some(v as usize)
        } else {
            return Err(Error::Corrupt(format!("type id {v} out of range")));
        });
    }
    Ok(out)
}

fn json_blob<T: Serialize>(w: &mut ByteWriter, what: &str, value: &T) -> Result<()> {
    let bytes = serde_json::to_vec(value).map_err(|e| Error::json(what, e))?;
    w.blob(&bytes);
    Ok(())
}

fn read_json<T: for<'de> Deserialize<'de>>(r: &mut ByteReader, what: &str) -> Result<T> {
    serde_json::from_slice(r.blob()?).map_err(|e| Error::json(what, e))
}

#[derive(Serialize, Deserialize)]
struct Header {
    params: ModelParams,
    inertia: f64,
    type_labels: Vec<String>,
    rank_deficient: bool,
}

/// Serializes a fitted model together with the latent space and motif
/// embeddings it was fitted on.
pub fn encode_model(model: &TypeModel, space: &LatentSpace, emb: &MotifEmbedding) -> Result<Vec<u8>> {
    let mut w = ByteWriter::default();
    w.bytes(MODEL_MAGIC);
    w.u32(MODEL_VERSION);
    json_blob(
        &mut w,
        "model header",
        &Header {
            params: model.params,
            inertia: model.inertia,
            type_labels: model.type_labels.clone(),
            rank_deficient: space.rank_deficient,
        },
    )?;
    w.matrix(&model.centroids);
    write_assignment(&mut w, &model.motif_assignment);
    write_assignment(&mut w, &model.answer_fragment_assignment);

    w.matrix(&space.u);
    w.u64(space.s.len() as u64);
    for &s in &space.s {
        w.f64(s);
    }
    w.matrix(&space.v);
    json_blob(&mut w, "row labels", &space.row_labels)?;
    json_blob(&mut w, "column labels", &space.col_labels)?;

    w.matrix(&emb.vectors);
    w.u64(emb.degenerate.len() as u64);
    w.bytes(&emb.degenerate.iter().map(|&b| b as u8).collect::<Vec<_>>());
    json_blob(&mut w, "motif labels", &emb.labels)?;
    Ok(w.buf)
}

pub fn decode_model(bytes: &[u8]) -> Result<(TypeModel, LatentSpace, MotifEmbedding)> {
    let mut r = ByteReader::new(bytes);
    if r.take(8)? != MODEL_MAGIC {
        return Err(Error::Corrupt("not a model container".into()));
    }
    let version = r.u32()?;
    if version != MODEL_VERSION {
        return Err(Error::IncompatibleVersion {
            found: version,
            expected: MODEL_VERSION,
        });
    }
    let header: Header = read_json(&mut r, "model header")?;
    let centroids = r.matrix()?;
    let k = centroids.rows;
    let motif_assignment = read_assignment(&mut r, k)?;
    let answer_fragment_assignment = read_assignment(&mut r, k)?;

    let u = r.matrix()?;
    let n_s = r.usize()?;
    if n_s > u.cols {
        return Err(Error::Corrupt("singular value count exceeds rank".into()));
    }
    let s = (0..n_s).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
    let v = r.matrix()?;
    let row_labels = read_json(&mut r, "row labels")?;
    let col_labels = read_json(&mut r, "column labels")?;
    let space = LatentSpace {
        u,
        s,
        v,
        row_labels,
        col_labels,
        rank_deficient: header.rank_deficient,
    };
    space.check_shape()?;

    let vectors = r.matrix()?;
    let n_deg = r.usize()?;
    let degenerate = r.take(n_deg)?.iter().map(|&b| b != 0).collect::<Vec<_>>();
    let labels: Vec<String> = read_json(&mut r, "motif labels")?;
    r.finish()?;
    if degenerate.len() != vectors.rows || labels.len() != vectors.rows || motif_assignment.len() != vectors.rows {
        return Err(Error::Corrupt("motif sections disagree on the number of motifs".into()));
    }
    if centroids.cols != vectors.cols {
        return Err(Error::Corrupt("centroid dimension does not match embeddings".into()));
    }
    let model = TypeModel {
        params: header.params,
        centroids,
        motif_assignment,
        answer_fragment_assignment,
        inertia: header.inertia,
        type_labels: header.type_labels,
    };
    Ok((
        model,
        space,
        MotifEmbedding {
            vectors,
            degenerate,
            labels,
        },
    ))
}

pub fn save_model(model: &TypeModel, space: &LatentSpace, emb: &MotifEmbedding, path: &Path) -> Result<()> {
    let bytes = encode_model(model, space, emb)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<(TypeModel, LatentSpace, MotifEmbedding)> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_model(&bytes)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeSummary {
    pub type_id: usize,
    pub label: Option<String>,
    pub motif_count: usize,
    pub answer_fragment_count: usize,
    /// `(motif, support)`, highest support first.
    pub top_motifs: Vec<(String, usize)>,
    /// `(fragment, distance to centroid)`, closest first.
    pub top_answer_fragments: Vec<(String, f64)>,
}

/// Per-type listing of the most supported motifs and the answer fragments
/// closest to the centroid.
pub fn summarize_types(model: &TypeModel, motifs: &MotifModel, space: &LatentSpace, top: usize) -> Vec<TypeSummary> {
    (0..model.k())
        .map(|t| {
            let mut ms: Vec<(String, usize)> = model
                .motif_assignment
                .iter()
                .enumerate()
                .filter(|(_, a)| **a == Some(t))
                .map(|(m, _)| {
                    let motif = &motifs.motifs()[m];
                    (motif.canonical(&motifs.vocab), motif.support)
                })
                .collect();
            let motif_count = ms.len();
            ms.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
            ms.truncate(top);

            let mut frags: Vec<(String, f64)> = model
                .answer_fragment_assignment
                .iter()
                .enumerate()
                .filter(|(_, a)| **a == Some(t))
                .filter_map(|(i, _)| {
                    let x = normalized(space.u.row(i))?;
                    let d = kmeans::squared_distance(&x, model.centroids.row(t)).sqrt();
                    Some((space.row_labels[i].clone(), d))
                })
                .collect();
            let answer_fragment_count = frags.len();
            frags.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
            frags.truncate(top);
            TypeSummary {
                type_id: t,
                label: model.type_labels.get(t).cloned(),
                motif_count,
                answer_fragment_count,
                top_motifs: ms,
                top_answer_fragments: frags,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn toy() -> (TypeModel, LatentSpace, MotifEmbedding) {
        let emb = MotifEmbedding {
            vectors: DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 0.0], vec![0.8, 0.6]]),
            degenerate: vec![false, false, true, false],
            labels: vec!["a".into(), "b".into(), "c".into(), "d".into()],
        };
        let params = ModelParams {
            k: 2,
            restarts: 2,
            ..Default::default()
        };
        let mut model = fit_types(&emb, &params).unwrap();
        let space = LatentSpace {
            u: DenseMatrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 0.0]]),
            s: vec![2.0, 1.0],
            v: DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 0.0]]),
            row_labels: vec!["f1".into(), "f2".into()],
            col_labels: vec!["p1".into(), "p2".into(), "p3".into()],
            rank_deficient: false,
        };
        model.answer_fragment_assignment = assign_answer_fragments(&space, &model);
        (model, space, emb)
    }

    #[test]
    fn degenerate_motifs_unassigned() {
        let (model, _, _) = toy();
        assert_eq!(model.motif_assignment[2], None);
        assert!(model.motif_assignment.iter().enumerate().all(|(i, a)| (i == 2) == a.is_none()));
    }

    #[test]
    fn zero_fragment_row_unassigned() {
        let (model, _, _) = toy();
        assert!(model.answer_fragment_assignment[0].is_some());
        assert_eq!(model.answer_fragment_assignment[1], None);
    }

    #[test]
    fn too_few_embeddings() {
        let (_, _, emb) = toy();
        let params = ModelParams {
            k: 4,
            ..Default::default()
        };
        assert!(matches!(fit_types(&emb, &params), Err(Error::Infeasible { needed: 4, found: 3 })));
    }

    #[test]
    fn encode_decode_encode_identical() {
        let (model, space, emb) = toy();
        let bytes = encode_model(&model, &space, &emb).unwrap();
        let (m2, s2, e2) = decode_model(&bytes).unwrap();
        assert_eq!(encode_model(&m2, &s2, &e2).unwrap(), bytes);
        assert_eq!(m2, model);
    }

    #[test]
    fn truncated_model_is_corrupt() {
        let (model, space, emb) = toy();
        let bytes = encode_model(&model, &space, &emb).unwrap();
        for cut in [3, 20, bytes.len() / 2, bytes.len() - 1] {
            assert!(matches!(decode_model(&bytes[..cut]), Err(Error::Corrupt(_))), "cut at {cut}");
        }
    }

    #[test]
    fn wrong_version_is_incompatible() {
        let (model, space, emb) = toy();
        let mut bytes = encode_model(&model, &space, &emb).unwrap();
        bytes[8..12].copy_from_slice(&2u32.to_le_bytes());
        assert!(matches!(
            decode_model(&bytes),
            Err(Error::IncompatibleVersion { found: 2, expected: 1 })
        ));
    }

    #[test]
    fn question_on_centroid_has_zero_distance() {
        let (mut model, _, emb) = toy();
        model.centroids = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let view = QuestionMotifView {
            pair_id: "q".into(),
            contained_motifs: BTreeSet::from([0]),
            sink_motifs: BTreeSet::from([0]),
        };
        let a = assign_question(&view, &emb, &model).unwrap();
        assert_eq!(a.type_id, 1);
        assert_eq!(a.distance, 0.0);
        let empty = QuestionMotifView {
            pair_id: "q".into(),
            contained_motifs: BTreeSet::new(),
            sink_motifs: BTreeSet::new(),
        };
        assert!(matches!(assign_question(&empty, &emb, &model), Err(Error::Unassignable)));
    }
}
