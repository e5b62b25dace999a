//! Analyses over typed questions: affiliation log-odds, per-asker
//! propensities, behaviour around government changes, tenure and cohorts.

pub mod stats;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Affiliation, Corpus, Timeline};
use crate::error::{Error, Result};
use crate::latent::container::csv_field;
use crate::typology::TypeAssignment;

pub use stats::{
    binomial_test, log_odds_ratio, mann_whitney_u, median, stars, wilcoxon_signed_rank, LogOdds, TestResult,
    ZeroMethod,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionRecord {
    pub pair_id: String,
    pub type_id: usize,
    pub asker_id: String,
    pub affiliation: Option<Affiliation>,
    pub tenure_years: Option<u32>,
    pub first_office_date: Option<NaiveDate>,
    pub date: NaiveDate,
}

/// Joins type assignments with asker metadata. Pairs without an assignment
/// are left out; assignments naming unknown pairs or types are errors.
pub fn build_records(
    corpus: &Corpus,
    assignments: &[TypeAssignment],
    timeline: &Timeline,
    k: usize,
) -> Result<Vec<QuestionRecord>> {
    let mut out = Vec::with_capacity(assignments.len());
    for a in assignments {
        let pair = corpus
            .get(&a.pair_id)
            .ok_or_else(|| Error::Corrupt(format!("assignment for unknown pair {}", a.pair_id)))?;
        if a.type_id >= k {
            return Err(Error::Corrupt(format!("type {} of pair {} is out of range", a.type_id, a.pair_id)));
        }
        out.push(QuestionRecord {
            pair_id: a.pair_id.clone(),
            type_id: a.type_id,
            asker_id: pair.asker.speaker_id.clone(),
            affiliation: timeline.affiliation(&pair.asker.party, pair.date),
            tenure_years: pair.asker_tenure_years(),
            first_office_date: pair.asker.first_office_date,
            date: pair.date,
        });
    }
    out.sort_by(|a, b| (a.date, &a.pair_id).cmp(&(b.date, &b.pair_id)));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropensityTable {
    pub k: usize,
    /// Per asker, the number of questions of each type.
    pub counts: BTreeMap<String, Vec<usize>>,
}

impl PropensityTable {
    pub fn total(&self, asker: &str) -> usize {
        self.counts.get(asker).map_or(0, |c| c.iter().sum())
    }

    /// `P_{M,t}`: share of the asker's questions that have type `t`.
    pub fn propensity(&self, asker: &str, t: usize) -> Option<f64> {
        let c = self.counts.get(asker)?;
        let n: usize = c.iter().sum();
        (n > 0).then(|| c[t] as f64 / n as f64)
    }

    pub fn row(&self, asker: &str) -> Option<Vec<f64>> {
        let c = self.counts.get(asker)?;
        let n: usize = c.iter().sum();
        (n > 0).then(|| c.iter().map(|&x| x as f64 / n as f64).collect())
    }

    /// Drops askers with fewer than `min_questions` questions.
    pub fn with_min_questions(&self, min_questions: usize) -> PropensityTable {
        PropensityTable {
            k: self.k,
            counts: self
                .counts
                .iter()
                .filter(|(_, c)| c.iter().sum::<usize>() >= min_questions)
                .map(|(a, c)| (a.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("asker_id,questions");
        for t in 0..self.k {
            out.push_str(&format!(",type_{t}"));
        }
        out.push('\n');
        for (asker, c) in &self.counts {
            let n: usize = c.iter().sum();
            out.push_str(&format!("{},{n}", csv_field(asker)));
            for &x in c {
                out.push_str(&format!(",{}", x as f64 / n as f64));
            }
            out.push('\n');
        }
        out
    }
}

pub fn propensities<'a>(records: impl IntoIterator<Item = &'a QuestionRecord>, k: usize) -> PropensityTable {
    let mut counts: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for r in records {
        counts.entry(r.asker_id.clone()).or_insert_with(|| vec![0; k])[r.type_id] += 1;
    }
    PropensityTable { k, counts }
}

/// Log-odds of type `t` for questions satisfying `in_group` against all the
/// other records.
pub fn log_odds_by_group(records: &[QuestionRecord], t: usize, in_group: impl Fn(&QuestionRecord) -> bool) -> Result<LogOdds> {
    let mut cells = [0u64; 4];
    for r in records {
        let idx = match (in_group(r), r.type_id == t) {
            (true, true) => 0,
            (true, false) => 1,
            (false, true) => 2,
            (false, false) => 3,
        };
        cells[idx] += 1;
    }
    log_odds_ratio(cells[0], cells[1], cells[2], cells[3])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffiliationEffect {
    pub type_id: usize,
    pub affiliation: Affiliation,
    pub log_odds: LogOdds,
    /// Share of type-`t` questions asked by the group.
    pub share_in_type: f64,
    /// Share of all questions asked by the group.
    pub share_overall: f64,
    /// Binomial test of the in-type share against the overall share.
    pub binomial_p: f64,
    pub stars: String,
}

/// For each type and for government and opposition separately, the log-odds
/// of the type against the complement of the group. Only records with a known
/// affiliation take part.
pub fn affiliation_effects(records: &[QuestionRecord], k: usize) -> Vec<AffiliationEffect> {
    let known: Vec<QuestionRecord> = records.iter().filter(|r| r.affiliation.is_some()).cloned().collect();
    let n = known.len() as u64;
    let jobs: Vec<(usize, Affiliation)> = (0..k)
        .flat_map(|t| [Affiliation::Government, Affiliation::Opposition].map(|a| (t, a)))
        .collect();
    jobs.par_iter()
        .filter_map(|&(t, aff)| {
            let lo = log_odds_by_group(&known, t, |r| r.affiliation == Some(aff)).ok()?;
            let [a, b, c, _] = lo.table;
            let in_type = a + c;
            let share_overall = (a + b) as f64 / n as f64;
            let binomial_p = if in_type == 0 || share_overall <= 0.0 || share_overall >= 1.0 {
                1.0
            } else {
                binomial_test(a, in_type, share_overall).ok()?
            };
            Some(AffiliationEffect {
                type_id: t,
                affiliation: aff,
                log_odds: lo,
                share_in_type: if in_type == 0 { 0.0 } else { a as f64 / in_type as f64 },
                share_overall,
                binomial_p,
                stars: stars(binomial_p).to_string(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeTenure {
    pub type_id: usize,
    pub questions: usize,
    pub median: Option<f64>,
    pub u: Option<f64>,
    pub p: Option<f64>,
    pub stars: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TenureReport {
    pub affiliation: Option<Affiliation>,
    pub overall_median: f64,
    pub per_type: Vec<TypeTenure>,
}

/// Median asker tenure per type, each compared with the tenures of the
/// remaining questions by a Mann-Whitney test. `affiliation` restricts the
/// records; `None` uses all of them.
pub fn median_tenure_by_type(records: &[QuestionRecord], affiliation: Option<Affiliation>, k: usize) -> Result<TenureReport> {
    let rows: Vec<(usize, f64)> = records
        .iter()
        .filter(|r| affiliation.is_none() || r.affiliation == affiliation)
        .filter_map(|r| Some((r.type_id, r.tenure_years? as f64)))
        .collect();
    if rows.is_empty() {
        return Err(Error::Undefined("no records with a known tenure".into()));
    }
    let all: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let per_type = (0..k)
        .into_par_iter()
        .map(|t| {
            let (inside, outside): (Vec<&(usize, f64)>, Vec<&(usize, f64)>) = rows.iter().partition(|r| r.0 == t);
            let inside: Vec<f64> = inside.into_iter().map(|r| r.1).collect();
            let outside: Vec<f64> = outside.into_iter().map(|r| r.1).collect();
            let test = mann_whitney_u(&inside, &outside).ok();
            TypeTenure {
                type_id: t,
                questions: inside.len(),
                median: median(&inside),
                u: test.map(|r| r.statistic),
                p: test.map(|r| r.p),
                stars: test.map_or("", |r| stars(r.p)).to_string(),
            }
        })
        .collect();
    Ok(TenureReport {
        affiliation,
        overall_median: median(&all).expect("nonempty"),
        per_type,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SwitchDirection {
    ToGovernment,
    ToOpposition,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedTypeComparison {
    pub type_id: usize,
    pub mean_before: f64,
    pub mean_after: f64,
    pub statistic: Option<f64>,
    pub p: Option<f64>,
    pub stars: String,
    /// All paired differences were zero, so no test was run.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchGroup {
    pub direction: SwitchDirection,
    /// `(asker, election)` units passing the question threshold.
    pub askers: usize,
    pub per_type: Vec<PairedTypeComparison>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchReport {
    pub min_questions: usize,
    pub groups: Vec<SwitchGroup>,
}

fn dominant_affiliation<'a>(records: impl Iterator<Item = &'a QuestionRecord>) -> Option<Affiliation> {
    let mut counts: BTreeMap<Affiliation, usize> = BTreeMap::new();
    for r in records {
        if let Some(a) = r.affiliation {
            *counts.entry(a).or_default() += 1;
        }
    }
    counts.into_iter().max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0))).map(|(a, _)| a)
}

/// Propensities of askers whose side changed at an election, using all their
/// questions in the government period before and the one after. Each
/// `(asker, election)` with at least `min_questions` on both sides is one
/// paired observation.
pub fn switch_analysis(
    records: &[QuestionRecord],
    timeline: &Timeline,
    elections: &[NaiveDate],
    k: usize,
    min_questions: usize,
    zero: ZeroMethod,
) -> SwitchReport {
    let mut pairs: BTreeMap<SwitchDirection, Vec<(Vec<f64>, Vec<f64>)>> = BTreeMap::new();
    for &election in elections {
        let (Some(prev), Some(next)) = timeline.around(election) else {
            log::warn!("election {election} does not start a government period; skipped");
            continue;
        };
        let mut by_asker: BTreeMap<&str, (Vec<&QuestionRecord>, Vec<&QuestionRecord>)> = BTreeMap::new();
        for r in records {
            if prev.contains(r.date) {
                by_asker.entry(&r.asker_id).or_default().0.push(r);
            } else if next.contains(r.date) {
                by_asker.entry(&r.asker_id).or_default().1.push(r);
            }
        }
        for (before, after) in by_asker.values() {
            if before.len() < min_questions || after.len() < min_questions {
                continue;
            }
            let direction = match (
                dominant_affiliation(before.iter().copied()),
                dominant_affiliation(after.iter().copied()),
            ) {
                (Some(Affiliation::Opposition), Some(Affiliation::Government)) => SwitchDirection::ToGovernment,
                (Some(Affiliation::Government), Some(Affiliation::Opposition)) => SwitchDirection::ToOpposition,
                _ => continue,
            };
            let b = propensities(before.iter().copied(), k);
            let a = propensities(after.iter().copied(), k);
            let row = |t: &PropensityTable| t.counts.keys().next().and_then(|id| t.row(id)).expect("one asker");
            pairs.entry(direction).or_default().push((row(&b), row(&a)));
        }
    }
    let groups = pairs
        .into_iter()
        .map(|(direction, units)| SwitchGroup {
            direction,
            askers: units.len(),
            per_type: (0..k)
                .map(|t| {
                    let before: Vec<f64> = units.iter().map(|u| u.0[t]).collect();
                    let after: Vec<f64> = units.iter().map(|u| u.1[t]).collect();
                    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
                    let test = wilcoxon_signed_rank(&before, &after, zero);
                    PairedTypeComparison {
                        type_id: t,
                        mean_before: mean(&before),
                        mean_after: mean(&after),
                        statistic: test.as_ref().ok().map(|r| r.statistic),
                        p: test.as_ref().ok().map(|r| r.p),
                        stars: test.as_ref().map_or("", |r| stars(r.p)).to_string(),
                        degenerate: matches!(test, Err(Error::DegenerateSample(_))),
                    }
                })
                .collect(),
        })
        .collect();
    SwitchReport { min_questions, groups }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortTypeComparison {
    pub type_id: usize,
    pub mean_new: Option<f64>,
    pub mean_old: Option<f64>,
    pub u: Option<f64>,
    pub p: Option<f64>,
    pub stars: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortGroup {
    pub affiliation: Affiliation,
    pub new_askers: usize,
    pub old_askers: usize,
    /// One of the cohorts has no askers, so no comparison was possible.
    pub empty_cohort: bool,
    pub per_type: Vec<CohortTypeComparison>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortReport {
    pub groups: Vec<CohortGroup>,
}

/// Compares askers first elected at an election with those already in office,
/// using propensities over the government period that the election starts.
/// Askers are split by their side during that period; units from several
/// elections are pooled.
pub fn cohort_analysis(
    records: &[QuestionRecord],
    timeline: &Timeline,
    elections: &[NaiveDate],
    k: usize,
    min_questions: usize,
) -> CohortReport {
    // (affiliation, is_new) -> propensity rows
    let mut units: BTreeMap<(Affiliation, bool), Vec<Vec<f64>>> = BTreeMap::new();
    for &election in elections {
        let (_, Some(sitting)) = timeline.around(election) else {
            log::warn!("election {election} does not start a government period; skipped");
            continue;
        };
        let mut by_asker: BTreeMap<&str, Vec<&QuestionRecord>> = BTreeMap::new();
        for r in records.iter().filter(|r| sitting.contains(r.date) && r.first_office_date.is_some()) {
            by_asker.entry(&r.asker_id).or_default().push(r);
        }
        for rs in by_asker.values() {
            if rs.len() < min_questions {
                continue;
            }
            let Some(aff @ (Affiliation::Government | Affiliation::Opposition)) = dominant_affiliation(rs.iter().copied())
            else {
                continue;
            };
            let is_new = rs[0].first_office_date.expect("filtered") >= election;
            let table = propensities(rs.iter().copied(), k);
            let row = table.row(&rs[0].asker_id).expect("nonempty");
            units.entry((aff, is_new)).or_default().push(row);
        }
    }
    let groups = [Affiliation::Government, Affiliation::Opposition]
        .into_iter()
        .map(|aff| {
            let empty = Vec::new();
            let new = units.get(&(aff, true)).unwrap_or(&empty);
            let old = units.get(&(aff, false)).unwrap_or(&empty);
            let per_type = (0..k)
                .map(|t| {
                    let x: Vec<f64> = new.iter().map(|r| r[t]).collect();
                    let y: Vec<f64> = old.iter().map(|r| r[t]).collect();
                    let mean = |v: &[f64]| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
                    let test = mann_whitney_u(&x, &y).ok();
                    CohortTypeComparison {
                        type_id: t,
                        mean_new: mean(&x),
                        mean_old: mean(&y),
                        u: test.map(|r| r.statistic),
                        p: test.map(|r| r.p),
                        stars: test.map_or("", |r| stars(r.p)).to_string(),
                    }
                })
                .collect();
            CohortGroup {
                affiliation: aff,
                new_askers: new.len(),
                old_askers: old.len(),
                empty_cohort: new.is_empty() || old.is_empty(),
                per_type,
            }
        })
        .collect();
    CohortReport { groups }
}

/// CSV with one row per assigned question: pair id, type, distance to the
/// centroid, then the latent coordinates.
pub fn latent_features_csv(assignments: &[TypeAssignment]) -> String {
    let d = assignments.first().map_or(0, |a| a.projection.len());
    let mut out = String::from("pair_id,type_id,distance");
    for i in 0..d {
        out.push_str(&format!(",x{i}"));
    }
    out.push('\n');
    for a in assignments {
        out.push_str(&format!("{},{},{}", csv_field(&a.pair_id), a.type_id, a.distance));
        for x in &a.projection {
            out.push_str(&format!(",{x}"));
        }
        out.push('\n');
    }
    out
}

pub fn export_latent_features(assignments: &[TypeAssignment], path: &Path) -> Result<()> {
    fs::write(path, latent_features_csv(assignments)).map_err(|e| Error::io(path, e))
}

/// Reads back a file written by [`export_latent_features`]. Pair ids must not
/// contain commas or quotes.
pub fn read_latent_features(text: &str) -> Result<Vec<TypeAssignment>> {
    let mut lines = text.lines();
    lines.next().ok_or_else(|| Error::Corrupt("empty feature file".into()))?;
    lines
        .enumerate()
        .map(|(i, line)| {
            let bad = || Error::Corrupt(format!("feature file row {}", i + 1));
            let mut cols = line.split(',');
            let pair_id = cols.next().ok_or_else(bad)?.to_string();
            let type_id = cols.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
            let distance = cols.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
            let projection = cols.map(|c| c.parse().map_err(|_| bad())).collect::<Result<_>>()?;
            Ok(TypeAssignment {
                pair_id,
                type_id,
                distance,
                projection,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    #[serde(default)]
    pub elections: Vec<NaiveDate>,
    #[serde(default = "default_switch_min")]
    pub switch_min_questions: usize,
    #[serde(default = "default_cohort_min")]
    pub cohort_min_questions: usize,
    #[serde(default)]
    pub zero_method: ZeroMethod,
}

fn default_switch_min() -> usize {
    5
}

fn default_cohort_min() -> usize {
    1
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            elections: Vec::new(),
            switch_min_questions: default_switch_min(),
            cohort_min_questions: default_cohort_min(),
            zero_method: ZeroMethod::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub k: usize,
    pub questions: usize,
    pub type_counts: Vec<usize>,
    pub affiliation: Vec<AffiliationEffect>,
    pub tenure: Vec<TenureReport>,
    pub switch: SwitchReport,
    pub cohort: CohortReport,
}

pub fn run_analysis(records: &[QuestionRecord], timeline: &Timeline, k: usize, cfg: &AnalysisConfig) -> AnalysisReport {
    let mut type_counts = vec![0; k];
    for r in records {
        type_counts[r.type_id] += 1;
    }
    let tenure = [Affiliation::Government, Affiliation::Opposition]
        .into_iter()
        .filter_map(|a| median_tenure_by_type(records, Some(a), k).ok())
        .collect();
    AnalysisReport {
        k,
        questions: records.len(),
        type_counts,
        affiliation: affiliation_effects(records, k),
        tenure,
        switch: switch_analysis(records, timeline, &cfg.elections, k, cfg.switch_min_questions, cfg.zero_method),
        cohort: cohort_analysis(records, timeline, &cfg.elections, k, cfg.cohort_min_questions),
    }
}

fn opt(x: Option<f64>) -> String {
    x.map_or(String::new(), |v| v.to_string())
}

impl AnalysisReport {
    pub fn affiliation_csv(&self) -> String {
        let mut out = String::from(
            "type_id,affiliation,a,b,c,d,log_odds,ci_low,ci_high,corrected,share_in_type,share_overall,binomial_p,stars\n",
        );
        for e in &self.affiliation {
            let lo = &e.log_odds;
            let [a, b, c, d] = lo.table;
            out.push_str(&format!(
                "{},{},{a},{b},{c},{d},{},{},{},{},{},{},{},{}\n",
                e.type_id,
                e.affiliation.as_str(),
                lo.lor,
                lo.ci_low,
                lo.ci_high,
                lo.corrected,
                e.share_in_type,
                e.share_overall,
                e.binomial_p,
                e.stars
            ));
        }
        out
    }

    pub fn tenure_csv(&self) -> String {
        let mut out = String::from("affiliation,overall_median,type_id,questions,median,u,p,stars\n");
        for r in &self.tenure {
            let aff = r.affiliation.map_or("all", Affiliation::as_str);
            for t in &r.per_type {
                out.push_str(&format!(
                    "{aff},{},{},{},{},{},{},{}\n",
                    r.overall_median,
                    t.type_id,
                    t.questions,
                    opt(t.median),
                    opt(t.u),
                    opt(t.p),
                    t.stars
                ));
            }
        }
        out
    }

    pub fn switch_csv(&self) -> String {
        let mut out = String::from("direction,askers,type_id,mean_before,mean_after,statistic,p,stars,degenerate\n");
        for g in &self.switch.groups {
            let dir = match g.direction {
                SwitchDirection::ToGovernment => "to_government",
                SwitchDirection::ToOpposition => "to_opposition",
            };
            for t in &g.per_type {
                out.push_str(&format!(
                    "{dir},{},{},{},{},{},{},{},{}\n",
                    g.askers,
                    t.type_id,
                    t.mean_before,
                    t.mean_after,
                    opt(t.statistic),
                    opt(t.p),
                    t.stars,
                    t.degenerate
                ));
            }
        }
        out
    }

    pub fn cohort_csv(&self) -> String {
        let mut out = String::from("affiliation,new_askers,old_askers,type_id,mean_new,mean_old,u,p,stars\n");
        for g in &self.cohort.groups {
            for t in &g.per_type {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{}\n",
                    g.affiliation.as_str(),
                    g.new_askers,
                    g.old_askers,
                    t.type_id,
                    opt(t.mean_new),
                    opt(t.mean_old),
                    opt(t.u),
                    opt(t.p),
                    t.stars
                ));
            }
        }
        out
    }

    /// Per-figure series for external plotting.
    pub fn plot_data(&self, type_labels: &[String]) -> serde_json::Value {
        let label = |t: usize| type_labels.get(t).cloned().unwrap_or_else(|| format!("type {t}"));
        let log_odds: Vec<_> = [Affiliation::Government, Affiliation::Opposition]
            .iter()
            .map(|aff| {
                let points: Vec<_> = self
                    .affiliation
                    .iter()
                    .filter(|e| e.affiliation == *aff)
                    .map(|e| {
                        serde_json::json!({
                            "type_id": e.type_id,
                            "label": label(e.type_id),
                            "value": e.log_odds.lor,
                            "ci": [e.log_odds.ci_low, e.log_odds.ci_high],
                            "p": e.binomial_p,
                            "stars": e.stars,
                        })
                    })
                    .collect();
                serde_json::json!({ "series": aff.as_str(), "points": points })
            })
            .collect();
        let switch: Vec<_> = self
            .switch
            .groups
            .iter()
            .map(|g| {
                let points: Vec<_> = g
                    .per_type
                    .iter()
                    .map(|t| {
                        serde_json::json!({
                            "type_id": t.type_id,
                            "label": label(t.type_id),
                            "before": t.mean_before,
                            "after": t.mean_after,
                            "p": t.p,
                            "stars": t.stars,
                        })
                    })
                    .collect();
                serde_json::json!({ "series": g.direction, "askers": g.askers, "points": points })
            })
            .collect();
        let tenure: Vec<_> = self
            .tenure
            .iter()
            .map(|r| {
                let points: Vec<_> = r
                    .per_type
                    .iter()
                    .map(|t| {
                        serde_json::json!({
                            "type_id": t.type_id,
                            "label": label(t.type_id),
                            "value": t.median,
                            "p": t.p,
                            "stars": t.stars,
                        })
                    })
                    .collect();
                serde_json::json!({ "series": r.affiliation, "overall": r.overall_median, "points": points })
            })
            .collect();
        let cohort: Vec<_> = self
            .cohort
            .groups
            .iter()
            .map(|g| {
                let points: Vec<_> = g
                    .per_type
                    .iter()
                    .map(|t| {
                        serde_json::json!({
                            "type_id": t.type_id,
                            "label": label(t.type_id),
                            "new": t.mean_new,
                            "old": t.mean_old,
                            "p": t.p,
                            "stars": t.stars,
                        })
                    })
                    .collect();
                serde_json::json!({
                    "series": g.affiliation,
                    "new_askers": g.new_askers,
                    "old_askers": g.old_askers,
                    "empty_cohort": g.empty_cohort,
                    "points": points,
                })
            })
            .collect();
        serde_json::json!({
            "affiliation_log_odds": log_odds,
            "switch_propensities": switch,
            "tenure_medians": tenure,
            "cohort_propensities": cohort,
        })
    }
}
