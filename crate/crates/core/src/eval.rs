//! Scoring: per-question precision/recall/F1 over answer sets, macro
//! aggregation by world and category, and entity-candidate extraction for
//! classification-style models.

use crate::dataset::StoryRecord;
use crate::kb::{QuestionCategory, Value};
use crate::question::{AnswerEntry, AnswerSpan};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("prediction references unknown question id '{0}'")]
    UnknownQid(String),
    #[error("question id '{0}' scored more than once")]
    DuplicateQid(String),
    #[error("no questions to score")]
    Empty,
}

/// One system prediction: answer strings for one question.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Prediction {
    pub qid: String,
    pub answers: Vec<String>,
}

/// Normalizes an answer string for matching: case-fold, strip leading and
/// trailing ASCII punctuation, collapse whitespace runs.
pub fn normalize_answer(s: &str) -> String {
    let trimmed = s
        .trim_matches(|c: char| c.is_ascii_punctuation() || c.is_whitespace())
        .to_lowercase();
    trimmed.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Scores one question. Each prediction (after normalization and
/// deduplication) matches at most one gold entry, by equality against any
/// of the entry's normalized surface forms; each gold entry is matchable
/// at most once. Conventions: both sides empty scores perfect, exactly
/// one side empty scores zero.
pub fn score_question(gold: &[AnswerEntry], predicted: &[String]) -> (f64, f64, f64) {
    let mut preds: Vec<String> = Vec::new();
    for p in predicted {
        let n = normalize_answer(p);
        if !n.is_empty() && !preds.contains(&n) {
            preds.push(n);
        }
    }
    let gold_sets: Vec<BTreeSet<String>> = gold
        .iter()
        .map(|g| g.surface_forms.iter().map(|s| normalize_answer(s)).collect())
        .collect();
    if preds.is_empty() && gold_sets.is_empty() {
        return (1.0, 1.0, 1.0);
    }
    if preds.is_empty() || gold_sets.is_empty() {
        return (0.0, 0.0, 0.0);
    }
    let mut taken = vec![false; gold_sets.len()];
    let mut matched = 0usize;
    for p in &preds {
        if let Some(i) = gold_sets
            .iter()
            .enumerate()
            .position(|(i, set)| !taken[i] && set.contains(p))
        {
            taken[i] = true;
            matched += 1;
        }
    }
    let precision = matched as f64 / preds.len() as f64;
    let recall = matched as f64 / gold_sets.len() as f64;
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    (precision, recall, f1)
}

/// Per-question score row.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuestionScore {
    pub qid: String,
    pub world: String,
    pub category: QuestionCategory,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Unweighted macro average over a set of questions.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct PRFCell {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub count: usize,
}

impl PRFCell {
    fn from_scores<'a>(scores: impl Iterator<Item = &'a QuestionScore>) -> PRFCell {
        let mut cell = PRFCell::default();
        for s in scores {
            cell.precision += s.precision;
            cell.recall += s.recall;
            cell.f1 += s.f1;
            cell.count += 1;
        }
        if cell.count > 0 {
            let n = cell.count as f64;
            cell.precision /= n;
            cell.recall /= n;
            cell.f1 /= n;
        }
        cell
    }
}

/// Macro-averaged report: per world, per category, per world x category,
/// and overall.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PRFReport {
    pub per_question: Vec<QuestionScore>,
    pub per_world: BTreeMap<String, PRFCell>,
    pub per_category: BTreeMap<String, PRFCell>,
    pub per_world_category: BTreeMap<String, BTreeMap<String, PRFCell>>,
    pub overall: PRFCell,
}

impl PRFReport {
    pub fn from_scores(per_question: Vec<QuestionScore>) -> PRFReport {
        let mut worlds: BTreeSet<&str> = BTreeSet::new();
        for s in &per_question {
            worlds.insert(&s.world);
        }
        let per_world = worlds
            .iter()
            .map(|w| {
                (
                    w.to_string(),
                    PRFCell::from_scores(per_question.iter().filter(|s| s.world == *w)),
                )
            })
            .collect();
        let per_category = QuestionCategory::ALL
            .iter()
            .map(|c| {
                (
                    c.label().to_string(),
                    PRFCell::from_scores(per_question.iter().filter(|s| s.category == *c)),
                )
            })
            .collect();
        let per_world_category = worlds
            .iter()
            .map(|w| {
                let inner = QuestionCategory::ALL
                    .iter()
                    .map(|c| {
                        (
                            c.label().to_string(),
                            PRFCell::from_scores(
                                per_question
                                    .iter()
                                    .filter(|s| s.world == *w && s.category == *c),
                            ),
                        )
                    })
                    .collect();
                (w.to_string(), inner)
            })
            .collect();
        let overall = PRFCell::from_scores(per_question.iter());
        PRFReport { per_question, per_world, per_category, per_world_category, overall }
    }
}

/// Scores a prediction file against a dataset. Questions without a
/// prediction are scored as empty predictions.
pub fn evaluate(
    stories: &[StoryRecord],
    predictions: &[Prediction],
) -> Result<PRFReport, EvalError> {
    let mut by_qid: BTreeMap<&str, &Prediction> = BTreeMap::new();
    for p in predictions {
        if by_qid.insert(&p.qid, p).is_some() {
            return Err(EvalError::DuplicateQid(p.qid.clone()));
        }
    }
    let mut known: BTreeSet<&str> = BTreeSet::new();
    let mut scores = Vec::new();
    static EMPTY: Vec<String> = Vec::new();
    for story in stories {
        for q in &story.questions {
            known.insert(&q.qid);
            let answers = by_qid.get(q.qid.as_str()).map(|p| &p.answers).unwrap_or(&EMPTY);
            let (precision, recall, f1) = score_question(&q.answers, answers);
            scores.push(QuestionScore {
                qid: q.qid.clone(),
                world: story.world.clone(),
                category: q.category,
                precision,
                recall,
                f1,
            });
        }
    }
    if scores.is_empty() {
        return Err(EvalError::Empty);
    }
    for p in predictions {
        if !known.contains(p.qid.as_str()) {
            return Err(EvalError::UnknownQid(p.qid.clone()));
        }
    }
    Ok(PRFReport::from_scores(scores))
}

impl std::fmt::Display for PRFReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "{:<12} {:>6} | {:>6} {:>6} {:>6} | {:>6} {:>6} {:>6} {:>6}",
            "world", "n", "P", "R", "F1", "1rel*", "1rel", "2rel", "3rel"
        )?;
        for (world, cell) in &self.per_world {
            let wc = &self.per_world_category[world];
            let cat_f1 = |c: QuestionCategory| {
                let cell = &wc[c.label()];
                if cell.count == 0 {
                    "-".to_string()
                } else {
                    format!("{:.1}", 100.0 * cell.f1)
                }
            };
            writeln!(
                f,
                "{:<12} {:>6} | {:>6.1} {:>6.1} {:>6.1} | {:>6} {:>6} {:>6} {:>6}",
                world,
                cell.count,
                100.0 * cell.precision,
                100.0 * cell.recall,
                100.0 * cell.f1,
                cat_f1(QuestionCategory::SingleEntitySingleRelation),
                cat_f1(QuestionCategory::MultiEntitySingleRelation),
                cat_f1(QuestionCategory::MultiEntityTwoRelations),
                cat_f1(QuestionCategory::MultiEntityThreeRelations),
            )?;
        }
        writeln!(
            f,
            "{:<12} {:>6} | {:>6.1} {:>6.1} {:>6.1} |",
            "overall",
            self.overall.count,
            100.0 * self.overall.precision,
            100.0 * self.overall.recall,
            100.0 * self.overall.f1,
        )?;
        writeln!(f, "(* single-entity; F1 columns are macro percentages)")
    }
}

// ---------------------------------------------------------------------------
// Entity-setting candidates
// ---------------------------------------------------------------------------

/// One answer candidate: an entity or literal mentioned in the story.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub value: Value,
    /// Canonical answer string emitted when this candidate is predicted.
    pub canonical: String,
    pub surfaces: Vec<String>,
    pub first_mention: usize,
    pub spans: Vec<AnswerSpan>,
}

/// All distinct entities and literals mentioned anywhere in the story, in
/// first-mention order.
pub fn entity_candidates(story: &StoryRecord) -> Vec<Candidate> {
    candidates_at(story, story.statements.len().saturating_sub(1))
}

/// Candidates restricted to mentions at or before `position`.
pub fn candidates_at(story: &StoryRecord, position: usize) -> Vec<Candidate> {
    let mut order: Vec<Value> = Vec::new();
    let mut map: BTreeMap<Value, Candidate> = BTreeMap::new();
    for (i, stmt) in story.statements.iter().enumerate().take(position + 1) {
        for m in &stmt.mentions {
            let surface = crate::realize::detokenize(&stmt.tokens[m.start..m.end]);
            let entry = map.entry(m.entity.clone()).or_insert_with(|| {
                order.push(m.entity.clone());
                Candidate {
                    value: m.entity.clone(),
                    canonical: story.canonical_surface(&m.entity),
                    surfaces: Vec::new(),
                    first_mention: i,
                    spans: Vec::new(),
                }
            });
            if !entry.surfaces.contains(&surface) {
                entry.surfaces.push(surface);
            }
            entry.spans.push(AnswerSpan { statement: i, start: m.start, end: m.end });
        }
    }
    order.into_iter().map(|v| map.remove(&v).unwrap()).collect()
}

#[cfg(test)]
mod tests;
