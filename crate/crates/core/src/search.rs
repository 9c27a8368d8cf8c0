//! Attribute relevance-feedback search: sessions accumulate "more / equally /
//! less than this reference" constraints on descriptor components and rank the
//! corpus by how many constraints each image satisfies.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::descriptor::{component_index, Descriptor, COMPONENT_LABELS, DESCRIPTOR_LEN};
use crate::error::{Error, Result};
use crate::rank_eval::{gamma_for, DEFAULT_GAMMA_FRACTION};

pub const PAGE_SIZE: usize = 8;
pub const MAX_ITERATIONS: u32 = 10;
/// Targets ranked within this many images count as found.
pub const FOUND_RANK: usize = 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    More,
    Equally,
    Less,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::More => "more",
            Relation::Equally => "equally",
            Relation::Less => "less",
        })
    }
}

/// The target has `relation` more/equally/less `attribute` than `ref_id`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FeedbackConstraint {
    pub ref_id: String,
    pub attribute: String,
    pub relation: Relation,
}

/// Secondary ranking key among images satisfying equally many constraints.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    /// Sum of signed margins over all constraints.
    Slack,
    /// Sum of the negative margins only, so images satisfying every constraint tie.
    #[default]
    ViolationOnly,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SessionConfig {
    pub page_size: usize,
    pub max_iterations: u32,
    pub tie_break: TieBreak,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self { page_size: PAGE_SIZE, max_iterations: MAX_ITERATIONS, tie_break: TieBreak::default() }
    }
}

/// Descriptor rows by image id, sorted by id, with per-component "equally"
/// bands and standard deviations.
#[derive(Clone, Debug, PartialEq)]
pub struct SearchCorpus {
    ids: Vec<String>,
    rows: Vec<Vec<f64>>,
    index: HashMap<String, usize>,
    epsilon: Vec<f64>,
    std: Vec<f64>,
}

impl SearchCorpus {
    pub fn new(entries: Vec<(String, Descriptor)>) -> Result<Self> {
        Self::with_epsilon_fraction(entries, DEFAULT_GAMMA_FRACTION)
    }

    /// Band of component `a` is `fraction × range(a)` over the corpus.
    pub fn with_epsilon_fraction(mut entries: Vec<(String, Descriptor)>, fraction: f64) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        if let Some(w) = entries.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::Malformed(format!("duplicate image id `{}`", w[0].0)));
        }
        let (ids, rows): (Vec<String>, Vec<Vec<f64>>) =
            entries.into_iter().map(|(id, d)| (id, d.values().to_vec())).unzip();
        let n = rows.len() as f64;
        let column = |a: usize| rows.iter().map(move |r| r[a]);
        let epsilon = (0..DESCRIPTOR_LEN).map(|a| gamma_for(column(a), fraction)).collect();
        let std = (0..DESCRIPTOR_LEN)
            .map(|a| {
                let mean = column(a).sum::<f64>() / n;
                (column(a).map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt()
            })
            .collect();
        let index = ids.iter().enumerate().map(|(i, id)| (id.clone(), i)).collect();
        Ok(Self { ids, rows, index, epsilon, std })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    fn require(&self, id: &str) -> Result<usize> {
        self.position(id).ok_or_else(|| Error::UnknownImage(id.to_string()))
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    pub fn epsilon(&self) -> &[f64] {
        &self.epsilon
    }

    pub fn std(&self) -> &[f64] {
        &self.std
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Resolved {
    reference: usize,
    attribute: usize,
    relation: Relation,
}

fn resolve(corpus: &SearchCorpus, c: &FeedbackConstraint) -> Result<Resolved> {
    let attribute = component_index(&c.attribute).ok_or_else(|| Error::UnknownAttribute(c.attribute.clone()))?;
    Ok(Resolved { reference: corpus.require(&c.ref_id)?, attribute, relation: c.relation })
}

/// Signed margin of one constraint for candidate row `i`, positive iff satisfied.
fn margin(corpus: &SearchCorpus, i: usize, c: &Resolved) -> (bool, f64) {
    let vc = corpus.rows[i][c.attribute];
    let vr = corpus.rows[c.reference][c.attribute];
    let eps = corpus.epsilon[c.attribute];
    match c.relation {
        Relation::More => (vc > vr, vc - vr),
        Relation::Less => (vc < vr, vr - vc),
        Relation::Equally => ((vc - vr).abs() <= eps, eps - (vc - vr).abs()),
    }
}

fn score(corpus: &SearchCorpus, i: usize, constraints: &[Resolved], tie_break: TieBreak) -> (usize, f64) {
    constraints.iter().fold((0, 0.0), |(sat, slack), c| {
        let (ok, m) = margin(corpus, i, c);
        let m = match tie_break {
            TieBreak::Slack => m,
            TieBreak::ViolationOnly => m.min(0.0),
        };
        (sat + usize::from(ok), slack + m)
    })
}

/// Number of constraints `candidate_id` satisfies and the sum of their signed margins.
pub fn relevance_score(corpus: &SearchCorpus, candidate_id: &str, constraints: &[FeedbackConstraint]) -> Result<(usize, f64)> {
    let i = corpus.require(candidate_id)?;
    let resolved = constraints.iter().map(|c| resolve(corpus, c)).collect::<Result<Vec<_>>>()?;
    Ok(score(corpus, i, &resolved, TieBreak::Slack))
}

/// Indices of the corpus ordered by (satisfied desc, slack desc, id asc).
fn rank(corpus: &SearchCorpus, constraints: &[Resolved], tie_break: TieBreak) -> Vec<usize> {
    let scores: Vec<(usize, f64)> = (0..corpus.len()).map(|i| score(corpus, i, constraints, tie_break)).collect();
    let mut order: Vec<usize> = (0..corpus.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b].0.cmp(&scores[a].0).then_with(|| scores[b].1.total_cmp(&scores[a].1)).then(a.cmp(&b))
    });
    order
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Farthest-point selection of `n` images other than `exclude`, seeded by the
/// image nearest the corpus centroid. Ties go to the lower id.
fn diverse_references(corpus: &SearchCorpus, exclude: usize, n: usize) -> Vec<usize> {
    let count = corpus.len() as f64;
    let centroid: Vec<f64> =
        (0..DESCRIPTOR_LEN).map(|a| corpus.rows.iter().map(|r| r[a]).sum::<f64>() / count).collect();
    let candidates: Vec<usize> = (0..corpus.len()).filter(|&i| i != exclude).collect();
    let argmax = |key: &dyn Fn(usize) -> f64, pool: &[usize]| {
        pool.iter().copied().fold(None, |best: Option<(usize, f64)>, i| {
            let k = key(i);
            match best {
                Some((_, bk)) if bk >= k => best,
                _ => Some((i, k)),
            }
        })
    };
    let Some((seed, _)) = argmax(&|i| -squared_distance(&corpus.rows[i], &centroid), &candidates) else {
        return Vec::new();
    };
    let mut chosen = vec![seed];
    let mut nearest: Vec<f64> = corpus.rows.iter().map(|r| squared_distance(r, &corpus.rows[seed])).collect();
    while chosen.len() < n.min(candidates.len()) {
        let pool: Vec<usize> = candidates.iter().copied().filter(|i| !chosen.contains(i)).collect();
        let Some((next, _)) = argmax(&|i| nearest[i], &pool) else { break };
        chosen.push(next);
        for (d, r) in nearest.iter_mut().zip(&corpus.rows) {
            *d = d.min(squared_distance(r, &corpus.rows[next]));
        }
    }
    chosen
}

/// State after one iteration, as stored in a transcript.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: u32,
    /// Feedback that produced this iteration; empty for iteration 0.
    pub feedback: Vec<FeedbackConstraint>,
    pub reference_ids: Vec<String>,
    /// 1-based rank of the target.
    pub target_rank: usize,
    pub percentile_rank: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionTranscript {
    pub target_id: String,
    pub config: SessionConfig,
    pub iterations: Vec<IterationRecord>,
}

impl SessionTranscript {
    /// Whether the target reached rank `threshold` after some feedback round.
    pub fn found_within(&self, threshold: usize) -> bool {
        self.iterations.iter().skip(1).any(|r| r.target_rank <= threshold)
    }

    pub fn percentile_is_monotone(&self) -> bool {
        self.iterations.windows(2).all(|w| w[1].percentile_rank >= w[0].percentile_rank)
    }
}

#[derive(Clone, Debug)]
pub struct SearchSession {
    corpus: Arc<SearchCorpus>,
    config: SessionConfig,
    target: usize,
    constraints: Vec<Resolved>,
    ranking: Vec<usize>,
    references: Vec<usize>,
    history: Vec<IterationRecord>,
}

impl SearchSession {
    pub fn new(corpus: Arc<SearchCorpus>, target_id: &str, config: SessionConfig) -> Result<Self> {
        if corpus.len() < config.page_size + 1 {
            return Err(Error::CorpusTooSmall { need: config.page_size + 1, got: corpus.len() });
        }
        let target = corpus.require(target_id)?;
        let references = diverse_references(&corpus, target, config.page_size);
        let ranking = rank(&corpus, &[], config.tie_break);
        let mut session =
            Self { corpus, config, target, constraints: Vec::new(), ranking, references, history: Vec::new() };
        session.record(Vec::new());
        Ok(session)
    }

    fn record(&mut self, feedback: Vec<FeedbackConstraint>) {
        let entry = IterationRecord {
            iteration: self.history.len() as u32,
            feedback,
            reference_ids: self.reference_ids(),
            target_rank: self.target_rank(),
            percentile_rank: self.percentile_rank(),
        };
        self.history.push(entry);
    }

    pub fn corpus(&self) -> &Arc<SearchCorpus> {
        &self.corpus
    }

    pub fn config(&self) -> SessionConfig {
        self.config
    }

    pub fn target_id(&self) -> &str {
        &self.corpus.ids[self.target]
    }

    pub fn iteration(&self) -> u32 {
        self.history.len() as u32 - 1
    }

    pub fn is_exhausted(&self) -> bool {
        self.iteration() >= self.config.max_iterations
    }

    pub fn reference_ids(&self) -> Vec<String> {
        self.references.iter().map(|&i| self.corpus.ids[i].clone()).collect()
    }

    pub fn constraints(&self) -> Vec<FeedbackConstraint> {
        self.constraints
            .iter()
            .map(|c| FeedbackConstraint {
                ref_id: self.corpus.ids[c.reference].clone(),
                attribute: COMPONENT_LABELS[c.attribute].to_string(),
                relation: c.relation,
            })
            .collect()
    }

    /// Image ids in current rank order.
    pub fn ranking(&self) -> Vec<&str> {
        self.ranking.iter().map(|&i| self.corpus.ids[i].as_str()).collect()
    }

    /// 1-based rank of the target in the current ranking.
    pub fn target_rank(&self) -> usize {
        self.ranking.iter().position(|&i| i == self.target).map_or(self.ranking.len(), |p| p + 1)
    }

    /// Fraction of the other images ranked strictly below the target.
    pub fn percentile_rank(&self) -> f64 {
        let n = self.corpus.len();
        if n < 2 {
            return 1.0;
        }
        (n - self.target_rank()) as f64 / (n - 1) as f64
    }

    /// The target is among the shown reference images.
    pub fn is_found(&self) -> bool {
        self.history.len() > 1 && self.target_rank() <= self.config.page_size
    }

    /// Appends `feedback`, reranks the corpus and shows the new top page.
    pub fn apply_feedback(&mut self, feedback: Vec<FeedbackConstraint>) -> Result<()> {
        if self.is_exhausted() {
            return Err(Error::IterationsExhausted(self.config.max_iterations));
        }
        let mut resolved = Vec::with_capacity(feedback.len());
        for c in &feedback {
            let r = resolve(&self.corpus, c)?;
            if !self.references.contains(&r.reference) {
                return Err(Error::NotAReference(c.ref_id.clone()));
            }
            resolved.push(r);
        }
        self.constraints.extend(resolved);
        self.ranking = rank(&self.corpus, &self.constraints, self.config.tie_break);
        self.references = self.ranking.iter().copied().take(self.config.page_size).collect();
        self.record(feedback);
        Ok(())
    }

    pub fn transcript(&self) -> SessionTranscript {
        SessionTranscript { target_id: self.target_id().to_string(), config: self.config, iterations: self.history.clone() }
    }

    /// Rebuilds a session from its transcript, checking every recorded state.
    pub fn replay(corpus: Arc<SearchCorpus>, transcript: &SessionTranscript) -> Result<Self> {
        let mut session = Self::new(corpus, &transcript.target_id, transcript.config)?;
        for (i, rec) in transcript.iterations.iter().enumerate() {
            if i > 0 {
                session.apply_feedback(rec.feedback.clone())?;
            }
            if session.history.last() != Some(rec) {
                return Err(Error::Malformed(format!("transcript diverges at iteration {i}")));
            }
        }
        Ok(session)
    }
}

/// One truthful constraint per reference image, on the component where the
/// target differs most from it in units of the component's standard deviation.
pub fn oracle_feedback(session: &SearchSession, truth: &SearchCorpus) -> Result<Vec<FeedbackConstraint>> {
    let target = truth.row(truth.require(session.target_id())?).to_vec();
    session
        .reference_ids()
        .into_iter()
        .map(|ref_id| {
            let r = truth.row(truth.require(&ref_id)?);
            let mut best = (None, f64::NEG_INFINITY);
            for a in 0..DESCRIPTOR_LEN {
                if truth.std[a] > 0.0 {
                    let gap = (target[a] - r[a]).abs() / truth.std[a];
                    if gap > best.1 {
                        best = (Some(a), gap);
                    }
                }
            }
            let a = best.0.unwrap_or(0);
            let d = target[a] - r[a];
            let relation = if d.abs() <= truth.epsilon[a] {
                Relation::Equally
            } else if d > 0.0 {
                Relation::More
            } else {
                Relation::Less
            };
            Ok(FeedbackConstraint { ref_id, attribute: COMPONENT_LABELS[a].to_string(), relation })
        })
        .collect()
}

/// Runs oracle feedback until the target is shown or iterations run out.
pub fn run_oracle_session(corpus: Arc<SearchCorpus>, truth: &SearchCorpus, target_id: &str, config: SessionConfig) -> Result<SessionTranscript> {
    let mut session = SearchSession::new(corpus, target_id, config)?;
    while !session.is_exhausted() && !session.is_found() {
        let feedback = oracle_feedback(&session, truth)?;
        session.apply_feedback(feedback)?;
    }
    Ok(session.transcript())
}

/// Fraction of sessions whose target reached rank [`FOUND_RANK`] after feedback.
pub fn search_accuracy(transcripts: &[SessionTranscript]) -> f64 {
    if transcripts.is_empty() {
        return 0.0;
    }
    transcripts.iter().filter(|t| t.found_within(FOUND_RANK)).count() as f64 / transcripts.len() as f64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub sessions: usize,
    pub search_accuracy: f64,
    /// Mean percentile rank per iteration; finished sessions carry their last value.
    pub mean_percentile_rank: Vec<f64>,
    pub monotone_sessions: usize,
}

pub fn summarize(transcripts: &[SessionTranscript], max_iterations: u32) -> SimulationSummary {
    let steps = max_iterations as usize + 1;
    let mut mean = vec![0.0; steps];
    for t in transcripts {
        for (k, m) in mean.iter_mut().enumerate() {
            let rec = t.iterations.get(k).or(t.iterations.last());
            *m += rec.map_or(0.0, |r| r.percentile_rank);
        }
    }
    if !transcripts.is_empty() {
        for m in &mut mean {
            *m /= transcripts.len() as f64;
        }
    }
    SimulationSummary {
        sessions: transcripts.len(),
        search_accuracy: search_accuracy(transcripts),
        mean_percentile_rank: mean,
        monotone_sessions: transcripts.iter().filter(|t| t.percentile_is_monotone()).count(),
    }
}

/// Oracle sessions for each target, in parallel; transcripts keep target order.
pub fn simulate_search(corpus: Arc<SearchCorpus>, truth: &SearchCorpus, targets: &[String], config: SessionConfig) -> Result<(SimulationSummary, Vec<SessionTranscript>)> {
    let transcripts = targets
        .par_iter()
        .map(|t| run_oracle_session(corpus.clone(), truth, t, config))
        .collect::<Result<Vec<_>>>()?;
    Ok((summarize(&transcripts, config.max_iterations), transcripts))
}

