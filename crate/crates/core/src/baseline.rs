//! Feature-based logistic-regression baseline in the entity-candidate
//! setting: every entity or literal mentioned at or before a question's
//! position is a candidate, labeled by whether it is a gold answer.
//!
//! Seven feature families are extracted per (question, candidate) pair:
//!
//! 1. candidate mention frequency in the story so far;
//! 2. candidate word count;
//! 3. unigrams and bigrams of the candidate surface;
//! 4. cross products of non-stop question words and candidate words;
//! 5. average minimum token distance from each non-stop question word to
//!    a candidate mention;
//! 6. non-stop words shared between the question and a +-10 token window
//!    around the candidate's mentions;
//! 7. summed story frequencies of those shared words to the left of the
//!    candidate's first mention, to the right of its last mention, and
//!    both.
//!
//! Named features hash into a fixed-size weight vector (FNV-1a modulo the
//! dimension). Training minimizes binary cross-entropy with mini-batch
//! Adam; the decision threshold is tuned on validation data to maximize
//! macro-F1.

use crate::dataset::{SplitAssignment, StoryRecord};
use crate::eval::{candidates_at, score_question, Candidate, PRFReport, Prediction, QuestionScore};
use crate::kb::{QuestionCategory, Value};
use crate::question::AnswerEntry;
use once_cell::sync::Lazy;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashSet};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("training set has only one label class")]
    DegenerateLabels,
    #[error("validation set is empty")]
    EmptyValidation,
    #[error("no training examples")]
    EmptyTraining,
    #[error("io error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("model file error: {0}")]
    Model(#[from] serde_json::Error),
}

static STOPWORDS: Lazy<HashSet<&'static str>> =
    Lazy::new(|| include_str!("../../../data/stopwords.txt").lines().collect());

pub fn is_stopword(w: &str) -> bool {
    STOPWORDS.contains(w)
}

fn content_words(tokens: &[String]) -> Vec<String> {
    tokens
        .iter()
        .map(|t| t.to_lowercase())
        .filter(|t| !is_stopword(t) && t.chars().any(|c| c.is_alphanumeric()))
        .collect()
}

// ---------------------------------------------------------------------------
// Story context and feature extraction
// ---------------------------------------------------------------------------

/// Token-level view of one story: global token offsets per statement and
/// occurrence positions per (lowercased) word.
pub struct StoryContext<'s> {
    story: &'s StoryRecord,
    statement_offset: Vec<usize>,
    word_positions: BTreeMap<String, Vec<usize>>,
    tokens_lower: Vec<String>,
}

impl<'s> StoryContext<'s> {
    pub fn new(story: &'s StoryRecord) -> Self {
        let mut statement_offset = Vec::with_capacity(story.statements.len());
        let mut word_positions: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        let mut tokens_lower = Vec::new();
        let mut offset = 0;
        for stmt in &story.statements {
            statement_offset.push(offset);
            for tok in &stmt.tokens {
                let lower = tok.to_lowercase();
                word_positions.entry(lower.clone()).or_default().push(offset);
                tokens_lower.push(lower);
                offset += 1;
            }
        }
        Self { story, statement_offset, word_positions, tokens_lower }
    }

    /// Global token offset of the start of a statement.
    fn offset(&self, statement: usize) -> usize {
        self.statement_offset[statement]
    }

    /// Number of story tokens visible at the given position.
    fn visible_tokens(&self, position: usize) -> usize {
        match self.statement_offset.get(position + 1) {
            Some(&next) => next,
            None => self.tokens_lower.len(),
        }
    }

    /// Occurrence positions of `word` strictly before `limit`.
    fn occurrences(&self, word: &str, limit: usize) -> &[usize] {
        match self.word_positions.get(word) {
            Some(positions) => {
                let end = positions.partition_point(|&p| p < limit);
                &positions[..end]
            }
            None => &[],
        }
    }
}

/// One labeled training/evaluation example.
#[derive(Clone, Debug)]
pub struct CandidateExample {
    pub qid: String,
    pub candidate: Candidate,
    pub label: bool,
    pub features: Vec<(u32, f32)>,
}

/// All candidates of one question, ready for scoring.
#[derive(Clone, Debug)]
pub struct QuestionExamples {
    pub qid: String,
    pub world: String,
    pub category: QuestionCategory,
    pub gold: Vec<AnswerEntry>,
    pub examples: Vec<CandidateExample>,
}

/// Named sparse feature vector (pre-hashing).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FeatureVector {
    pub features: Vec<(String, f64)>,
}

impl FeatureVector {
    fn push(&mut self, name: impl Into<String>, value: f64) {
        self.features.push((name.into(), value));
    }

    /// Hashes names into index space, summing collisions.
    pub fn hashed(&self, dim: usize) -> Vec<(u32, f32)> {
        let mut map: BTreeMap<u32, f32> = BTreeMap::new();
        for (name, value) in &self.features {
            let idx = (crate::world::fnv1a64_public(name.as_bytes()) % dim as u64) as u32;
            *map.entry(idx).or_default() += *value as f32;
        }
        map.into_iter().collect()
    }
}

/// Extracts the seven feature families for one candidate of one question.
pub fn extract_features(
    ctx: &StoryContext<'_>,
    question_tokens: &[String],
    candidate: &Candidate,
    position: usize,
) -> FeatureVector {
    let mut out = FeatureVector::default();
    let limit = ctx.visible_tokens(position);

    // 1. mention frequency
    out.push("freq", candidate.spans.len() as f64);

    // 2. word count of the candidate surface
    let cand_tokens: Vec<String> =
        crate::realize::tokenize(&candidate.canonical).iter().map(|t| t.to_lowercase()).collect();
    out.push("len", cand_tokens.len() as f64);

    // 3. unigrams and bigrams within the candidate
    for t in &cand_tokens {
        out.push(format!("uni={t}"), 1.0);
    }
    for pair in cand_tokens.windows(2) {
        out.push(format!("bi={}_{}", pair[0], pair[1]), 1.0);
    }

    // 4. question-word x candidate-word cross products
    let q_words: Vec<String> = {
        let mut seen = BTreeSet::new();
        content_words(question_tokens)
            .into_iter()
            .filter(|w| seen.insert(w.clone()))
            .collect()
    };
    let cand_content: BTreeSet<&String> =
        cand_tokens.iter().filter(|t| !is_stopword(t)).collect();
    for qw in &q_words {
        for cw in &cand_content {
            out.push(format!("xq={qw}|{cw}"), 1.0);
        }
    }

    // Global positions of the candidate's mentions.
    let mention_positions: Vec<(usize, usize)> = candidate
        .spans
        .iter()
        .map(|s| (ctx.offset(s.statement) + s.start, ctx.offset(s.statement) + s.end))
        .collect();

    // 5. average minimum distance from question words to the candidate
    if !q_words.is_empty() && !mention_positions.is_empty() {
        let mut total = 0.0;
        for qw in &q_words {
            let occurrences = ctx.occurrences(qw, limit);
            let min_dist = occurrences
                .iter()
                .flat_map(|&q| {
                    mention_positions
                        .iter()
                        .map(move |&(s, _)| (q as i64 - s as i64).unsigned_abs() as usize)
                })
                .min()
                .unwrap_or(limit);
            total += min_dist as f64;
        }
        out.push("dist", total / q_words.len() as f64);
    }

    // 6. question words occurring within +-10 tokens of a mention
    let mut window_words: BTreeSet<String> = BTreeSet::new();
    for &(start, end) in &mention_positions {
        let lo = start.saturating_sub(10);
        let hi = (end + 10).min(limit);
        for tok in &ctx.tokens_lower[lo..hi] {
            if !is_stopword(tok) && tok.chars().any(|c| c.is_alphanumeric()) {
                window_words.insert(tok.clone());
            }
        }
    }
    let overlap: Vec<&String> = q_words.iter().filter(|w| window_words.contains(*w)).collect();
    for w in &overlap {
        out.push(format!("ctx={w}"), 1.0);
    }

    // 7. frequencies of the overlap words left / right / both sides
    if let (Some(&(first_start, _)), Some(&(_, last_end))) =
        (mention_positions.first(), mention_positions.last())
    {
        let mut left = 0usize;
        let mut right = 0usize;
        for w in &overlap {
            let occ = ctx.occurrences(w, limit);
            left += occ.iter().filter(|&&p| p < first_start).count();
            right += occ.iter().filter(|&&p| p >= last_end).count();
        }
        out.push("ovl_left", left as f64);
        out.push("ovl_right", right as f64);
        out.push("ovl_both", (left + right) as f64);
    }

    out
}

/// Builds labeled candidate examples for every question of the stories.
pub fn build_examples(stories: &[StoryRecord], hash_dim: usize) -> Vec<QuestionExamples> {
    stories
        .par_iter()
        .flat_map(|story| {
            let ctx = StoryContext::new(story);
            story
                .questions
                .iter()
                .map(|q| {
                    let gold_values: BTreeSet<&Value> =
                        q.answers.iter().map(|a| &a.entity).collect();
                    let examples = candidates_at(story, q.position)
                        .into_iter()
                        .map(|candidate| {
                            let named =
                                extract_features(&ctx, &q.tokens, &candidate, q.position);
                            CandidateExample {
                                qid: q.qid.clone(),
                                label: gold_values.contains(&candidate.value),
                                features: named.hashed(hash_dim),
                                candidate,
                            }
                        })
                        .collect();
                    QuestionExamples {
                        qid: q.qid.clone(),
                        world: story.world.clone(),
                        category: q.category,
                        gold: q.answers.clone(),
                        examples,
                    }
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Model and training
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrainConfig {
    pub lr: f64,
    pub batch: usize,
    pub epochs: usize,
    pub seed: u64,
    pub hash_dim: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { lr: 0.01, batch: 10_000, epochs: 5, seed: 0, hash_dim: 1 << 20 }
    }
}

/// Trained model: hashed weight vector, bias, and decision threshold.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LogRegModel {
    pub version: u32,
    pub dim: usize,
    pub bias: f32,
    pub threshold: f64,
    pub meta: TrainConfig,
    /// Sparse (index, weight) pairs; absent indices are zero.
    weights: Vec<(u32, f32)>,
    #[serde(skip)]
    dense: Vec<f32>,
}

impl LogRegModel {
    fn new(dense: Vec<f32>, bias: f32, meta: TrainConfig) -> Self {
        let weights = dense
            .iter()
            .enumerate()
            .filter(|(_, w)| **w != 0.0)
            .map(|(i, w)| (i as u32, *w))
            .collect();
        Self { version: 1, dim: dense.len(), bias, threshold: 0.5, meta, weights, dense }
    }

    fn ensure_dense(&mut self) {
        if self.dense.len() != self.dim {
            let mut dense = vec![0.0; self.dim];
            for &(i, w) in &self.weights {
                dense[i as usize] = w;
            }
            self.dense = dense;
        }
    }

    pub fn score(&self, features: &[(u32, f32)]) -> f64 {
        debug_assert_eq!(self.dense.len(), self.dim, "model not hydrated");
        let z: f32 = self.bias
            + features.iter().map(|&(i, v)| self.dense[i as usize] * v).sum::<f32>();
        sigmoid(z as f64)
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<(), TrainError> {
        let body = serde_json::to_string(self)?;
        std::fs::write(path.as_ref(), body).map_err(|source| TrainError::Io {
            path: path.as_ref().display().to_string(),
            source,
        })
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self, TrainError> {
        let body =
            std::fs::read_to_string(path.as_ref()).map_err(|source| TrainError::Io {
                path: path.as_ref().display().to_string(),
                source,
            })?;
        let mut model: LogRegModel = serde_json::from_str(&body)?;
        model.ensure_dense();
        Ok(model)
    }
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Binary cross-entropy loss and gradient over a batch, given dense
/// weights. Gradients are returned sparsely over the touched indices.
pub fn batch_loss_and_grad(
    weights: &[f32],
    bias: f32,
    batch: &[(&Vec<(u32, f32)>, bool)],
) -> (f64, BTreeMap<u32, f64>, f64) {
    let mut loss = 0.0;
    let mut grad: BTreeMap<u32, f64> = BTreeMap::new();
    let mut grad_bias = 0.0;
    let n = batch.len().max(1) as f64;
    for (features, label) in batch {
        let z: f64 = bias as f64
            + features.iter().map(|&(i, v)| weights[i as usize] as f64 * v as f64).sum::<f64>();
        let p = sigmoid(z);
        let y = if *label { 1.0 } else { 0.0 };
        let eps = 1e-12;
        loss -= y * (p + eps).ln() + (1.0 - y) * (1.0 - p + eps).ln();
        let delta = p - y;
        grad_bias += delta;
        for &(i, v) in features.iter() {
            *grad.entry(i).or_default() += delta * v as f64;
        }
    }
    for g in grad.values_mut() {
        *g /= n;
    }
    (loss / n, grad, grad_bias / n)
}

/// Adam state for one scalar parameter.
#[derive(Clone, Copy, Default)]
struct Moment {
    m: f64,
    v: f64,
}

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

/// Trains by mini-batch Adam over binary cross-entropy. Deterministic in
/// the seed. Returns the model and the mean training loss per epoch.
pub fn train(
    questions: &[QuestionExamples],
    cfg: &TrainConfig,
) -> Result<(LogRegModel, Vec<f64>), TrainError> {
    let flat: Vec<(&Vec<(u32, f32)>, bool)> = questions
        .iter()
        .flat_map(|q| q.examples.iter().map(|e| (&e.features, e.label)))
        .collect();
    if flat.is_empty() {
        return Err(TrainError::EmptyTraining);
    }
    if flat.iter().all(|(_, l)| *l) || flat.iter().all(|(_, l)| !*l) {
        return Err(TrainError::DegenerateLabels);
    }

    let mut weights = vec![0.0f32; cfg.hash_dim];
    let mut bias = 0.0f32;
    let mut moments: BTreeMap<u32, Moment> = BTreeMap::new();
    let mut bias_moment = Moment::default();
    let mut step = 0u64;
    let batch_size = cfg.batch.min(flat.len()).max(1);
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        let mut order: Vec<usize> = (0..flat.len()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(
            crate::world::derive_story_seed(cfg.seed, "train-epoch", epoch as u64),
        );
        order.shuffle(&mut rng);

        let mut epoch_loss = 0.0;
        let mut batches = 0.0;
        for chunk in order.chunks(batch_size) {
            let batch: Vec<(&Vec<(u32, f32)>, bool)> =
                chunk.iter().map(|&i| flat[i]).collect();
            let (loss, grad, grad_bias) = batch_loss_and_grad(&weights, bias, &batch);
            epoch_loss += loss;
            batches += 1.0;
            step += 1;
            let correction1 = 1.0 - BETA1.powi(step as i32);
            let correction2 = 1.0 - BETA2.powi(step as i32);
            for (i, g) in grad {
                let moment = moments.entry(i).or_default();
                moment.m = BETA1 * moment.m + (1.0 - BETA1) * g;
                moment.v = BETA2 * moment.v + (1.0 - BETA2) * g * g;
                let m_hat = moment.m / correction1;
                let v_hat = moment.v / correction2;
                weights[i as usize] -= (cfg.lr * m_hat / (v_hat.sqrt() + ADAM_EPS)) as f32;
            }
            bias_moment.m = BETA1 * bias_moment.m + (1.0 - BETA1) * grad_bias;
            bias_moment.v = BETA2 * bias_moment.v + (1.0 - BETA2) * grad_bias * grad_bias;
            let m_hat = bias_moment.m / correction1;
            let v_hat = bias_moment.v / correction2;
            bias -= (cfg.lr * m_hat / (v_hat.sqrt() + ADAM_EPS)) as f32;
        }
        epoch_losses.push(epoch_loss / batches.max(1.0));
    }

    Ok((LogRegModel::new(weights, bias, cfg.clone()), epoch_losses))
}

// ---------------------------------------------------------------------------
// Threshold tuning and prediction
// ---------------------------------------------------------------------------

fn macro_f1_at(questions: &[QuestionExamples], scores: &[Vec<f64>], threshold: f64) -> f64 {
    let mut total = 0.0;
    for (q, qscores) in questions.iter().zip(scores) {
        let predicted: Vec<String> = q
            .examples
            .iter()
            .zip(qscores)
            .filter(|(_, s)| **s >= threshold)
            .map(|(e, _)| e.candidate.canonical.clone())
            .collect();
        let (_, _, f1) = score_question(&q.gold, &predicted);
        total += f1;
    }
    total / questions.len().max(1) as f64
}

/// Chooses the threshold maximizing validation macro-F1 among midpoints of
/// adjacent distinct scores (plus 0 and 1). Ties break toward the lower
/// threshold.
pub fn tune_threshold(
    model: &LogRegModel,
    validation: &[QuestionExamples],
) -> Result<f64, TrainError> {
    if validation.iter().all(|q| q.examples.is_empty()) {
        return Err(TrainError::EmptyValidation);
    }
    let scores: Vec<Vec<f64>> = validation
        .iter()
        .map(|q| q.examples.iter().map(|e| model.score(&e.features)).collect())
        .collect();
    let mut distinct: Vec<f64> = scores.iter().flatten().copied().collect();
    distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
    distinct.dedup();
    let mut candidates = vec![0.0];
    candidates.extend(distinct.windows(2).map(|w| (w[0] + w[1]) / 2.0));
    candidates.push(1.0);

    let mut best = (f64::NEG_INFINITY, 1.0);
    for &t in &candidates {
        let f1 = macro_f1_at(validation, &scores, t);
        if f1 > best.0 + 1e-12 {
            best = (f1, t);
        }
    }
    Ok(best.1)
}

/// Predicts the answer set for one question's candidates.
pub fn predict(model: &LogRegModel, question: &QuestionExamples) -> Prediction {
    let mut answers = Vec::new();
    for e in &question.examples {
        if model.score(&e.features) >= model.threshold {
            let a = e.candidate.canonical.clone();
            if !answers.contains(&a) {
                answers.push(a);
            }
        }
    }
    Prediction { qid: question.qid.clone(), answers }
}

/// Scores a set of questions with a trained model.
pub fn evaluate_model(model: &LogRegModel, questions: &[QuestionExamples]) -> PRFReport {
    let scores: Vec<QuestionScore> = questions
        .par_iter()
        .map(|q| {
            let prediction = predict(model, q);
            let (precision, recall, f1) = score_question(&q.gold, &prediction.answers);
            QuestionScore {
                qid: q.qid.clone(),
                world: q.world.clone(),
                category: q.category,
                precision,
                recall,
                f1,
            }
        })
        .collect();
    PRFReport::from_scores(scores)
}

/// End-to-end run: build examples from a split dataset, train on the
/// train stories, tune the threshold on validation, and report test
/// scores.
pub struct BaselineRun {
    pub model: LogRegModel,
    pub epoch_losses: Vec<f64>,
    pub report: PRFReport,
}

pub fn run_baseline(
    stories: &[StoryRecord],
    split: &SplitAssignment,
    cfg: &TrainConfig,
) -> Result<BaselineRun, TrainError> {
    use crate::dataset::Split;
    let select = |split_kind: Split| -> Vec<StoryRecord> {
        let ids = split.ids(split_kind);
        stories.iter().filter(|s| ids.contains(s.story_id.as_str())).cloned().collect()
    };
    let train_stories = select(Split::Train);
    let val_stories = select(Split::Val);
    let test_stories = select(Split::Test);

    let train_examples = build_examples(&train_stories, cfg.hash_dim);
    let (mut model, epoch_losses) = train(&train_examples, cfg)?;
    let val_examples = build_examples(&val_stories, cfg.hash_dim);
    model.threshold = tune_threshold(&model, &val_examples)?;
    let test_examples = build_examples(&test_stories, cfg.hash_dim);
    let report = evaluate_model(&model, &test_examples);
    Ok(BaselineRun { model, epoch_losses, report })
}

#[cfg(test)]
mod tests;
