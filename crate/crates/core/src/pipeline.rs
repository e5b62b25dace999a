//! Staged pipeline over a working directory. Each stage reads its
//! predecessors' artifacts, writes its own directory and a `manifest.json`
//! recording input hashes, parameters, output hashes and timings.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{self, AnalysisConfig, AnalysisReport};
use crate::corpus::{filter_analysis_subset, load_corpus, question_sentences_of, Corpus, FilterConfig, GovernmentPeriod, Timeline};
use crate::error::{Error, Result};
use crate::fragments::{extract_fragments, fragments_tsv, parse_fragments_tsv, FragmentConfig, FragmentSet};
use crate::latent::container::{decode_matrix, encode_matrix};
use crate::latent::{build_answer_matrix, build_motif_matrix, project_motifs, IdfVariant, LatentSpace, MotifEmbedding};
use crate::motifs::{MotifModel, MotifParams, QuestionMotifView};
use crate::synthetic::purity;
use crate::typology::{
    assign_answer_fragments, assign_question, fit_types, load_model, save_model, summarize_types, ModelParams,
    TypeAssignment, TypeSummary,
};

pub const MANIFEST_VERSION: u32 = 1;
const TOP_PER_TYPE: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    Ingest,
    Fragments,
    Motifs,
    Space,
    Fit,
    Assign,
    Analyze,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 8] = [
        Stage::Ingest,
        Stage::Fragments,
        Stage::Motifs,
        Stage::Space,
        Stage::Fit,
        Stage::Assign,
        Stage::Analyze,
        Stage::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Fragments => "fragments",
            Stage::Motifs => "motifs",
            Stage::Space => "space",
            Stage::Fit => "fit",
            Stage::Assign => "assign",
            Stage::Analyze => "analyze",
            Stage::Report => "report",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Stage::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown stage {s:?}")))
    }
}

/// Numeric parameters of the whole pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Params {
    pub n: usize,
    pub p: f64,
    pub n_a: usize,
    pub d: usize,
    pub k: usize,
    pub seed: u64,
    pub max_size: usize,
    pub restarts: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub idf: IdfVariant,
}

impl Default for Params {
    fn default() -> Self {
        let m = ModelParams::default();
        Params {
            n: m.n,
            p: m.p,
            n_a: m.n_a,
            d: m.d,
            k: m.k,
            seed: m.seed,
            max_size: m.max_size,
            restarts: m.restarts,
            max_iter: m.max_iter,
            tol: m.tol,
            idf: IdfVariant::Plain,
        }
    }
}

impl Params {
    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, name: &'static str, reason: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::InvalidParameter {
                    name,
                    reason: reason.into(),
                })
            }
        };
        check(self.n >= 1, "n", "must be at least 1")?;
        check(self.p > 0.5 && self.p <= 1.0, "p", "must be in (0.5, 1]")?;
        check(self.n_a >= 1, "n_A", "must be at least 1")?;
        check(self.d >= 1, "d", "must be at least 1")?;
        check(self.k >= 2, "k", "must be at least 2")?;
        check(self.max_size >= 1, "max_size", "must be at least 1")?;
        check(self.restarts >= 1, "restarts", "must be at least 1")?;
        check(self.max_iter >= 1, "max_iter", "must be at least 1")?;
        check(self.tol >= 0.0 && self.tol.is_finite(), "tol", "must be a finite non-negative number")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Metadata JSONL.
    pub corpus: PathBuf,
    /// CoNLL-U parses.
    pub parses: PathBuf,
    #[serde(default)]
    pub workdir: Option<PathBuf>,
    /// Optional `pair_id<TAB>label` file; enables a purity score in the report.
    #[serde(default)]
    pub labels: Option<PathBuf>,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub fragments: FragmentConfig,
    #[serde(default)]
    pub filters: FilterConfig,
    #[serde(default)]
    pub timeline: Vec<GovernmentPeriod>,
    #[serde(default)]
    pub analysis: AnalysisConfig,
}

impl PipelineConfig {
    /// Reads a JSON config. Relative paths are resolved against the config
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: PipelineConfig = serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        resolve(&mut cfg.corpus);
        resolve(&mut cfg.parses);
        if let Some(w) = cfg.workdir.as_mut() {
            resolve(w);
        }
        if let Some(l) = cfg.labels.as_mut() {
            resolve(l);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.timeline()?;
        Ok(())
    }

    pub fn timeline(&self) -> Result<Timeline> {
        Timeline::new(self.timeline.clone())
    }

    pub fn model_params(&self, seed: u64) -> ModelParams {
        let p = &self.params;
        ModelParams {
            n: p.n,
            p: p.p,
            n_a: p.n_a,
            d: p.d,
            k: p.k,
            seed,
            restarts: p.restarts,
            max_size: p.max_size,
            max_iter: p.max_iter,
            tol: p.tol,
        }
    }
}

/// Seed for a named stage, derived from the master seed.
pub fn sub_seed(master: u64, name: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update(name.as_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: u32,
    pub stage: String,
    pub tool_version: String,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
    pub params: serde_json::Value,
    pub elapsed_ms: u128,
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn to_json<T: Serialize>(what: &str, value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::json(what, e))
}

fn jsonl<T: Serialize>(what: &str, items: &[T]) -> Result<String> {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(item).map_err(|e| Error::json(what, e))?);
        out.push('\n');
    }
    Ok(out)
}

fn read_jsonl<T: for<'de> Deserialize<'de>>(what: &str, text: &str) -> Result<Vec<T>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(|e| Error::json(what, e)))
        .collect()
}

/// What a stage did, for logging.
#[derive(Debug, Clone)]
pub struct StageOutcome {
    pub stage: Stage,
    pub summary: String,
    pub manifest: Manifest,
}

pub struct Pipeline {
    pub cfg: PipelineConfig,
    pub workdir: PathBuf,
}

impl Pipeline {
    pub fn new(cfg: PipelineConfig, workdir: PathBuf) -> Result<Self> {
        cfg.validate()?;
        Ok(Pipeline { cfg, workdir })
    }

    pub fn stage_dir(&self, stage: Stage) -> PathBuf {
        self.workdir.join(stage.name())
    }

    pub fn artifact(&self, stage: Stage, file: &str) -> PathBuf {
        self.stage_dir(stage).join(file)
    }

    /// Path of a predecessor artifact, or a dependency error naming the stage
    /// that produces it.
    fn require(&self, stage: Stage, file: &str) -> Result<PathBuf> {
        let path = self.artifact(stage, file);
        if path.exists() {
            Ok(path)
        } else {
            Err(Error::MissingArtifact {
                stage: stage.name(),
                path,
            })
        }
    }

    pub fn run_all(&self) -> Result<Vec<StageOutcome>> {
        Stage::ALL.into_iter().map(|s| self.run(s)).collect()
    }

    pub fn run(&self, stage: Stage) -> Result<StageOutcome> {
        let start = Instant::now();
        let dir = self.stage_dir(stage);
        let (inputs, params) = self.inputs_for(stage)?;
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let (outputs, summary) = match stage {
            Stage::Ingest => self.ingest()?,
            Stage::Fragments => self.fragments()?,
            Stage::Motifs => self.motifs()?,
            Stage::Space => self.space()?,
            Stage::Fit => self.fit()?,
            Stage::Assign => self.assign()?,
            Stage::Analyze => self.analyze()?,
            Stage::Report => self.report()?,
        };
        let mut input_hashes = BTreeMap::new();
        for p in &inputs {
            input_hashes.insert(self.display_path(p), sha256_file(p)?);
        }
        let mut output_hashes = BTreeMap::new();
        for name in &outputs {
            output_hashes.insert(name.clone(), sha256_file(&dir.join(name))?);
        }
        let manifest = Manifest {
            version: MANIFEST_VERSION,
            stage: stage.name().into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            inputs: input_hashes,
            outputs: output_hashes,
            params,
            elapsed_ms: start.elapsed().as_millis(),
        };
        write_file(&dir.join("manifest.json"), to_json("manifest", &manifest)?)?;
        log::info!("{stage}: {summary}");
        Ok(StageOutcome {
            stage,
            summary,
            manifest,
        })
    }

    fn display_path(&self, p: &Path) -> String {
        p.strip_prefix(&self.workdir).unwrap_or(p).display().to_string()
    }

    /// Input files and the parameters that shape each stage. Missing inputs
    /// fail here, before any work is done.
    fn inputs_for(&self, stage: Stage) -> Result<(Vec<PathBuf>, serde_json::Value)> {
        use serde_json::json;
        let c = &self.cfg;
        let p = &c.params;
        let ingest = |pl: &Self| -> Result<Vec<PathBuf>> {
            Ok(vec![
                pl.require(Stage::Ingest, "metadata.jsonl")?,
                pl.require(Stage::Ingest, "parses.conllu")?,
            ])
        };
        let motif_files = |pl: &Self| -> Result<Vec<PathBuf>> {
            Ok(vec![
                pl.require(Stage::Motifs, "motif_table.tsv")?,
                pl.require(Stage::Motifs, "dag.json")?,
                pl.require(Stage::Motifs, "merged.tsv")?,
                pl.require(Stage::Motifs, "question_views.jsonl")?,
            ])
        };
        Ok(match stage {
            Stage::Ingest => {
                for path in [&c.corpus, &c.parses] {
                    if !path.exists() {
                        return Err(Error::Config(format!("input file {} does not exist", path.display())));
                    }
                }
                (
                    vec![c.corpus.clone(), c.parses.clone()],
                    json!({ "filters": c.filters, "timeline": c.timeline }),
                )
            }
            Stage::Fragments => (ingest(self)?, json!({ "fragments": c.fragments })),
            Stage::Motifs => (
                vec![self.require(Stage::Fragments, "question_fragments.tsv")?, self.require(Stage::Ingest, "metadata.jsonl")?],
                json!({ "n": p.n, "p": p.p, "max_size": p.max_size }),
            ),
            Stage::Space => {
                let mut v = ingest(self)?;
                v.extend(motif_files(self)?);
                (
                    v,
                    json!({ "n_a": p.n_a, "d": p.d, "idf": p.idf, "seed": p.seed,
                            "space_seed": sub_seed(p.seed, "space"), "fragments": c.fragments }),
                )
            }
            Stage::Fit => {
                let mut v = motif_files(self)?;
                for f in ["u.bin", "s.bin", "v.bin", "labels.json", "motif_embeddings.bin", "motif_embeddings.json"] {
                    v.push(self.require(Stage::Space, f)?);
                }
                (
                    v,
                    json!({ "k": p.k, "restarts": p.restarts, "max_iter": p.max_iter, "tol": p.tol,
                            "seed": p.seed, "fit_seed": sub_seed(p.seed, "fit") }),
                )
            }
            Stage::Assign => (
                vec![self.require(Stage::Fit, "model.bin")?, self.require(Stage::Motifs, "question_views.jsonl")?],
                json!({}),
            ),
            Stage::Analyze => {
                let mut v = ingest(self)?;
                v.push(self.require(Stage::Ingest, "analysis_subset.txt")?);
                v.push(self.require(Stage::Assign, "assignments.jsonl")?);
                (v, json!({ "analysis": c.analysis, "k": p.k }))
            }
            Stage::Report => {
                let mut v = vec![
                    self.require(Stage::Ingest, "summary.json")?,
                    self.require(Stage::Motifs, "motif_table.tsv")?,
                    self.require(Stage::Fit, "type_summary.json")?,
                    self.require(Stage::Assign, "assignments.jsonl")?,
                    self.require(Stage::Analyze, "analysis.json")?,
                ];
                if let Some(l) = &c.labels {
                    v.push(l.clone());
                }
                (v, json!({}))
            }
        })
    }

    /// The ingested corpus with affiliations filled in.
    pub fn load_ingested(&self) -> Result<Corpus> {
        let (mut corpus, report) = load_corpus(
            &self.require(Stage::Ingest, "metadata.jsonl")?,
            &self.require(Stage::Ingest, "parses.conllu")?,
        )?;
        if !report.errors.is_empty() {
            return Err(Error::Corrupt(format!(
                "ingested corpus no longer loads cleanly: {}",
                report.errors[0]
            )));
        }
        corpus.assign_affiliations(&self.cfg.timeline()?);
        Ok(corpus)
    }

    fn ingest(&self) -> Result<(Vec<String>, String)> {
        let (mut corpus, report) = load_corpus(&self.cfg.corpus, &self.cfg.parses)?;
        if corpus.is_empty() {
            return Err(Error::Config(format!(
                "no valid QA pairs in {} ({} record errors)",
                self.cfg.corpus.display(),
                report.errors.len()
            )));
        }
        for e in report.errors.iter().take(20) {
            log::warn!("{e}");
        }
        corpus.assign_affiliations(&self.cfg.timeline()?);
        let (subset, filter) = filter_analysis_subset(&corpus, &self.cfg.filters);
        let dir = self.stage_dir(Stage::Ingest);
        corpus.save(&dir.join("metadata.jsonl"), &dir.join("parses.conllu"))?;
        let errors: String = report.errors.iter().map(|e| format!("{e}\n")).collect();
        write_file(&dir.join("load_errors.txt"), errors)?;
        let ids: String = subset.pairs().iter().map(|p| format!("{}\n", p.pair_id)).collect();
        write_file(&dir.join("analysis_subset.txt"), ids)?;
        let summary = serde_json::json!({
            "pairs": corpus.len(),
            "question_sentences": corpus.pairs().iter().map(|p| p.question_count()).sum::<usize>(),
            "record_errors": report.errors.len(),
            "filter": filter,
        });
        write_file(&dir.join("summary.json"), to_json("ingest summary", &summary)?)?;
        Ok((
            names(&["metadata.jsonl", "parses.conllu", "load_errors.txt", "analysis_subset.txt", "summary.json"]),
            format!(
                "{} pairs loaded, {} record errors, {} in analysis subset",
                corpus.len(),
                report.errors.len(),
                filter.retained
            ),
        ))
    }

    fn fragments(&self) -> Result<(Vec<String>, String)> {
        let corpus = self.load_ingested()?;
        let mut sets = Vec::new();
        for pair in corpus.pairs() {
            for s in question_sentences_of(pair) {
                match extract_fragments(s, &self.cfg.fragments) {
                    Ok(set) => sets.push(set),
                    Err(e) => log::warn!("{}: {e}", s.id),
                }
            }
        }
        let dir = self.stage_dir(Stage::Fragments);
        write_file(&dir.join("question_fragments.tsv"), fragments_tsv(&sets))?;
        let distinct: BTreeSet<_> = sets.iter().flat_map(|s| s.fragments.iter()).collect();
        Ok((
            names(&["question_fragments.tsv"]),
            format!("{} question sentences, {} distinct fragments", sets.len(), distinct.len()),
        ))
    }

    fn load_views(&self) -> Result<Vec<QuestionMotifView>> {
        read_jsonl("question views", &read_text(&self.require(Stage::Motifs, "question_views.jsonl")?)?)
    }

    fn load_motifs(&self) -> Result<MotifModel> {
        MotifModel::from_artifacts(
            &read_text(&self.require(Stage::Motifs, "motif_table.tsv")?)?,
            &read_text(&self.require(Stage::Motifs, "dag.json")?)?,
            &read_text(&self.require(Stage::Motifs, "merged.tsv")?)?,
        )
    }

    fn motifs(&self) -> Result<(Vec<String>, String)> {
        let sets = parse_fragments_tsv(&read_text(&self.require(Stage::Fragments, "question_fragments.tsv")?)?)?;
        let p = &self.cfg.params;
        let model = MotifModel::build(
            &sets,
            &MotifParams {
                min_support: p.n,
                max_size: p.max_size,
                p: p.p,
            },
        )?;

        let pair_ids = pair_ids_in_order(&read_text(&self.require(Stage::Ingest, "metadata.jsonl")?)?)?;
        let mut by_pair: BTreeMap<&str, Vec<FragmentSet>> = BTreeMap::new();
        for s in &sets {
            by_pair.entry(pair_of(&s.owner_id)).or_default().push(s.clone());
        }
        let views: Vec<QuestionMotifView> = pair_ids
            .iter()
            .map(|id| model.utterance_view(id, by_pair.get(id.as_str()).map_or(&[][..], |v| v)))
            .collect();
        let covered = views.iter().filter(|v| !v.contained_motifs.is_empty()).count();

        let dir = self.stage_dir(Stage::Motifs);
        write_file(&dir.join("motif_table.tsv"), model.motif_table_tsv())?;
        write_file(&dir.join("dag.json"), model.dag_json())?;
        write_file(&dir.join("merged.tsv"), model.merged_tsv())?;
        write_file(&dir.join("question_views.jsonl"), jsonl("question views", &views)?)?;
        let summary = serde_json::json!({
            "mined_motifs": model.merged.len(),
            "motifs": model.len(),
            "edges": model.graph.edges.len(),
            "questions": views.len(),
            "covered_questions": covered,
        });
        write_file(&dir.join("summary.json"), to_json("motif summary", &summary)?)?;
        Ok((
            names(&["motif_table.tsv", "dag.json", "merged.tsv", "question_views.jsonl", "summary.json"]),
            format!(
                "{} motifs ({} before merging), {covered}/{} questions covered",
                model.len(),
                model.merged.len(),
                views.len()
            ),
        ))
    }

    fn space(&self) -> Result<(Vec<String>, String)> {
        let corpus = self.load_ingested()?;
        let motifs = self.load_motifs()?;
        let views = self.load_views()?;
        let p = &self.cfg.params;
        let a = build_answer_matrix(&corpus, &self.cfg.fragments, p.n_a, p.idf)?;
        let space = LatentSpace::fit(&a.matrix, p.d, sub_seed(p.seed, "space"))?;
        if views.iter().map(|v| &v.pair_id).ne(space.col_labels.iter()) {
            return Err(Error::Alignment);
        }
        let labels = motifs.motifs().iter().map(|m| m.canonical(&motifs.vocab)).collect();
        let q = build_motif_matrix(&views, labels)?;
        let emb = project_motifs(&q, &space)?;

        let dir = self.stage_dir(Stage::Space);
        space.save_dir(&dir)?;
        write_file(&dir.join("motif_embeddings.bin"), encode_matrix(&emb.vectors))?;
        let meta = EmbeddingMeta {
            labels: emb.labels.clone(),
            degenerate: emb.degenerate.clone(),
        };
        write_file(&dir.join("motif_embeddings.json"), to_json("embedding labels", &meta)?)?;
        let degenerate = emb.degenerate.iter().filter(|d| **d).count();
        let summary = serde_json::json!({
            "answer_fragments": a.matrix.n_rows,
            "answers": a.matrix.n_cols,
            "nonzeros": a.matrix.nnz(),
            "zero_rows": a.zero_rows.len(),
            "rank": space.rank(),
            "rank_deficient": space.rank_deficient,
            "singular_values": space.s,
            "degenerate_motifs": degenerate,
        });
        write_file(&dir.join("summary.json"), to_json("space summary", &summary)?)?;
        Ok((
            names(&[
                "u.bin",
                "s.bin",
                "v.bin",
                "labels.json",
                "motif_embeddings.bin",
                "motif_embeddings.json",
                "summary.json",
            ]),
            format!(
                "{}×{} answer matrix, rank {}, {degenerate} degenerate motif embeddings",
                a.matrix.n_rows,
                a.matrix.n_cols,
                space.rank()
            ),
        ))
    }

    fn load_embedding(&self) -> Result<MotifEmbedding> {
        let vectors = decode_matrix(
            &fs::read(self.require(Stage::Space, "motif_embeddings.bin")?)
                .map_err(|e| Error::io(self.artifact(Stage::Space, "motif_embeddings.bin"), e))?,
        )?;
        let meta: EmbeddingMeta = serde_json::from_str(&read_text(&self.require(Stage::Space, "motif_embeddings.json")?)?)
            .map_err(|e| Error::json("embedding labels", e))?;
        if meta.labels.len() != vectors.rows || meta.degenerate.len() != vectors.rows {
            return Err(Error::Corrupt("motif embedding labels do not match the matrix".into()));
        }
        Ok(MotifEmbedding {
            vectors,
            degenerate: meta.degenerate,
            labels: meta.labels,
        })
    }

    fn fit(&self) -> Result<(Vec<String>, String)> {
        let motifs = self.load_motifs()?;
        let space = LatentSpace::load_dir(&self.stage_dir(Stage::Space))?;
        let emb = self.load_embedding()?;
        if emb.len() != motifs.len() {
            return Err(Error::Corrupt("motif embeddings and motif table disagree".into()));
        }
        let params = self.cfg.model_params(sub_seed(self.cfg.params.seed, "fit"));
        let mut model = fit_types(&emb, &params)?;
        model.answer_fragment_assignment = assign_answer_fragments(&space, &model);
        let summaries = summarize_types(&model, &motifs, &space, TOP_PER_TYPE);

        let dir = self.stage_dir(Stage::Fit);
        save_model(&model, &space, &emb, &dir.join("model.bin"))?;
        write_file(&dir.join("type_summary.json"), to_json("type summary", &summaries)?)?;
        write_file(&dir.join("type_summary.txt"), type_summary_text(&summaries))?;
        Ok((
            names(&["model.bin", "type_summary.json", "type_summary.txt"]),
            format!("{} types over {} usable motifs, inertia {:.4}", model.k(), emb.usable().count(), model.inertia),
        ))
    }

    fn assign(&self) -> Result<(Vec<String>, String)> {
        let (model, _, emb) = load_model(&self.require(Stage::Fit, "model.bin")?)?;
        let views = self.load_views()?;
        let mut assigned = Vec::new();
        let mut unassigned = String::new();
        for v in &views {
            match assign_question(v, &emb, &model) {
                Ok(a) => assigned.push(a),
                Err(Error::Unassignable) => {
                    unassigned.push_str(&v.pair_id);
                    unassigned.push('\n');
                }
                Err(e) => return Err(e),
            }
        }
        let dir = self.stage_dir(Stage::Assign);
        write_file(&dir.join("assignments.jsonl"), jsonl("assignments", &assigned)?)?;
        write_file(&dir.join("unassigned.txt"), &unassigned)?;
        analysis::export_latent_features(&assigned, &dir.join("latent_features.csv"))?;
        Ok((
            names(&["assignments.jsonl", "unassigned.txt", "latent_features.csv"]),
            format!("{} of {} questions assigned", assigned.len(), views.len()),
        ))
    }

    pub fn load_assignments(&self) -> Result<Vec<TypeAssignment>> {
        read_jsonl("assignments", &read_text(&self.require(Stage::Assign, "assignments.jsonl")?)?)
    }

    fn analyze(&self) -> Result<(Vec<String>, String)> {
        let corpus = self.load_ingested()?;
        let subset: BTreeSet<String> = read_text(&self.require(Stage::Ingest, "analysis_subset.txt")?)?
            .lines()
            .map(str::to_string)
            .collect();
        let assignments: Vec<TypeAssignment> = self
            .load_assignments()?
            .into_iter()
            .filter(|a| subset.contains(&a.pair_id))
            .collect();
        let k = self.cfg.params.k;
        let timeline = self.cfg.timeline()?;
        let records = analysis::build_records(&corpus, &assignments, &timeline, k)?;
        let report = analysis::run_analysis(&records, &timeline, k, &self.cfg.analysis);
        let props = analysis::propensities(&records, k);

        let dir = self.stage_dir(Stage::Analyze);
        write_file(&dir.join("analysis.json"), to_json("analysis", &report)?)?;
        write_file(&dir.join("affiliation.csv"), report.affiliation_csv())?;
        write_file(&dir.join("tenure.csv"), report.tenure_csv())?;
        write_file(&dir.join("switch.csv"), report.switch_csv())?;
        write_file(&dir.join("cohort.csv"), report.cohort_csv())?;
        write_file(&dir.join("propensities.csv"), props.to_csv())?;
        write_file(&dir.join("plot_data.json"), to_json("plot data", &report.plot_data(&[]))?)?;
        Ok((
            names(&[
                "analysis.json",
                "affiliation.csv",
                "tenure.csv",
                "switch.csv",
                "cohort.csv",
                "propensities.csv",
                "plot_data.json",
            ]),
            format!("{} typed questions in the analysis subset", records.len()),
        ))
    }

    fn report(&self) -> Result<(Vec<String>, String)> {
        let ingest: serde_json::Value = serde_json::from_str(&read_text(&self.require(Stage::Ingest, "summary.json")?)?)
            .map_err(|e| Error::json("ingest summary", e))?;
        let motif_summary: serde_json::Value =
            serde_json::from_str(&read_text(&self.require(Stage::Motifs, "summary.json")?)?)
                .map_err(|e| Error::json("motif summary", e))?;
        let types: Vec<TypeSummary> = serde_json::from_str(&read_text(&self.require(Stage::Fit, "type_summary.json")?)?)
            .map_err(|e| Error::json("type summary", e))?;
        let assignments = self.load_assignments()?;
        let analysis: AnalysisReport = serde_json::from_str(&read_text(&self.require(Stage::Analyze, "analysis.json")?)?)
            .map_err(|e| Error::json("analysis", e))?;
        let purity_score = match &self.cfg.labels {
            Some(path) => Some(label_purity(&read_text(path)?, &assignments)?),
            None => None,
        };

        let mut md = String::from("# Question typology report\n\n");
        md.push_str(&format!("- QA pairs: {}\n", ingest["pairs"]));
        md.push_str(&format!("- Record errors at load: {}\n", ingest["record_errors"]));
        md.push_str(&format!("- Analysis subset: {}\n", ingest["filter"]["retained"]));
        md.push_str(&format!(
            "- Motifs: {} ({} before merging)\n",
            motif_summary["motifs"], motif_summary["mined_motifs"]
        ));
        md.push_str(&format!(
            "- Questions containing a motif: {} of {}\n",
            motif_summary["covered_questions"], motif_summary["questions"]
        ));
        md.push_str(&format!("- Questions assigned a type: {}\n", assignments.len()));
        if let Some(p) = purity_score {
            md.push_str(&format!("- Purity against reference labels: {p:.4}\n"));
        }
        md.push_str("\n## Types\n\n");
        md.push_str(&type_summary_text(&types));
        md.push_str("\n## Affiliation log-odds\n\n| type | side | log-odds | 95% CI | binomial p |\n|---|---|---|---|---|\n");
        for e in &analysis.affiliation {
            md.push_str(&format!(
                "| {} | {} | {:.3} | [{:.3}, {:.3}] | {:.3e} {} |\n",
                e.type_id,
                e.affiliation.as_str(),
                e.log_odds.lor,
                e.log_odds.ci_low,
                e.log_odds.ci_high,
                e.binomial_p,
                e.stars
            ));
        }
        let dir = self.stage_dir(Stage::Report);
        write_file(&dir.join("report.md"), &md)?;
        let summary = serde_json::json!({ "purity": purity_score, "assigned": assignments.len() });
        write_file(&dir.join("summary.json"), to_json("report summary", &summary)?)?;
        Ok((
            names(&["report.md", "summary.json"]),
            match purity_score {
                Some(p) => format!("report written, purity {p:.4}"),
                None => "report written".into(),
            },
        ))
    }
}

#[derive(Serialize, Deserialize)]
struct EmbeddingMeta {
    labels: Vec<String>,
    degenerate: Vec<bool>,
}

fn names(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

/// Pair id of a sentence id `<pair_id>:q:<i>`.
fn pair_of(sent_id: &str) -> &str {
    sent_id.rsplitn(3, ':').nth(2).unwrap_or(sent_id)
}

fn pair_ids_in_order(metadata: &str) -> Result<Vec<String>> {
    #[derive(Deserialize)]
    struct Id {
        pair_id: String,
    }
    metadata
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str::<Id>(l).map(|r| r.pair_id).map_err(|e| Error::json("metadata", e)))
        .collect()
}

/// Purity of the assigned types against `pair_id<TAB>label` lines (a header
/// line is skipped). Assigned pairs without a label are ignored.
pub fn label_purity(labels_tsv: &str, assignments: &[TypeAssignment]) -> Result<f64> {
    let mut labels: BTreeMap<&str, usize> = BTreeMap::new();
    let mut label_ids: BTreeMap<&str, usize> = BTreeMap::new();
    for line in labels_tsv.lines().skip(1).filter(|l| !l.is_empty()) {
        let (id, label) = line
            .split_once('\t')
            .ok_or_else(|| Error::Corrupt(format!("label line {line:?}")))?;
        let n = label_ids.len();
        let l = *label_ids.entry(label).or_insert(n);
        labels.insert(id, l);
    }
    let pairs: Vec<(usize, usize)> = assignments
        .iter()
        .filter_map(|a| labels.get(a.pair_id.as_str()).map(|&l| (a.type_id, l)))
        .collect();
    Ok(purity(&pairs))
}

fn type_summary_text(types: &[TypeSummary]) -> String {
    let mut out = String::new();
    for t in types {
        out.push_str(&format!(
            "### Type {}{}\n{} motifs, {} answer fragments\n\nTop motifs:\n",
            t.type_id,
            t.label.as_ref().map_or(String::new(), |l| format!(" ({l})")),
            t.motif_count,
            t.answer_fragment_count
        ));
        for (m, s) in &t.top_motifs {
            out.push_str(&format!("  {s:>6}  {m}\n"));
        }
        out.push_str("Top answer fragments:\n");
        for (f, dist) in &t.top_answer_fragments {
            out.push_str(&format!("  {dist:>6.3}  {f}\n"));
        }
        out.push('\n');
    }
    out
}
