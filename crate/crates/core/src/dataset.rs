//! Dataset serialization (JSONL, one story per line), corpus statistics,
//! and train/validation/test split construction.
//!
//! The wire schema is versioned and documented in `docs/dataset-schema.md`.
//! Field names are load-bearing: `story_id`, `world`, `seed`,
//! `statements[].{text,tokens,mentions[].{entity,start,end,strategy}}`,
//! `questions[].{qid,position,category,query,text,tokens,answers[]
//! .{entity,surface_forms,spans[]}}`, `entities{id:{etype,name}}`.

use crate::kb::{EntityId, QuestionCategory, Value};
use crate::question::{AnswerEntry, QuestionInstance};
use crate::realize::{Mention, Statement, Strategy};
use crate::story::StoryBundle;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("io error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("format error at line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("world '{world}' has {have} stories, need at least {need}")]
    InsufficientStories { world: String, have: usize, need: usize },
    #[error("unknown world '{0}'")]
    UnknownWorld(String),
}

// ---------------------------------------------------------------------------
// Wire records
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MentionRecord {
    pub entity: Value,
    pub start: usize,
    pub end: usize,
    pub strategy: Strategy,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatementRecord {
    pub text: String,
    pub tokens: Vec<String>,
    pub mentions: Vec<MentionRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuestionRecord {
    pub qid: String,
    pub position: usize,
    pub category: QuestionCategory,
    /// S-expression form of the query AST (see `docs/dataset-schema.md`).
    pub query: String,
    pub text: String,
    pub tokens: Vec<String>,
    pub answers: Vec<AnswerEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntityMeta {
    pub etype: String,
    pub name: String,
}

/// One story, as serialized. `entities` maps every KB id the story ever
/// created to its type and canonical name.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StoryRecord {
    pub story_id: String,
    pub world: String,
    pub seed: u64,
    pub statements: Vec<StatementRecord>,
    pub questions: Vec<QuestionRecord>,
    pub entities: BTreeMap<u64, EntityMeta>,
}

impl From<&StoryBundle> for StoryRecord {
    fn from(bundle: &StoryBundle) -> Self {
        let entity_name = |id: EntityId| {
            bundle
                .entity_table
                .get(&id)
                .map(|r| r.canonical_name.clone())
                .unwrap_or_default()
        };
        StoryRecord {
            story_id: bundle.story_id.clone(),
            world: bundle.world.clone(),
            seed: bundle.seed,
            statements: bundle
                .statements
                .iter()
                .map(|s: &Statement| StatementRecord {
                    text: s.text.clone(),
                    tokens: s.tokens.clone(),
                    mentions: s
                        .mentions
                        .iter()
                        .map(|m: &Mention| MentionRecord {
                            entity: m.entity.clone(),
                            start: m.start,
                            end: m.end,
                            strategy: m.strategy,
                        })
                        .collect(),
                })
                .collect(),
            questions: bundle
                .questions
                .iter()
                .map(|q: &QuestionInstance| QuestionRecord {
                    qid: q.qid.clone(),
                    position: q.position,
                    category: q.category,
                    query: crate::sexpr::render_atoms(&q.query.atoms, entity_name),
                    text: q.text.clone(),
                    tokens: q.tokens.clone(),
                    answers: q.answers.clone(),
                })
                .collect(),
            entities: bundle
                .entity_table
                .values()
                .map(|r| {
                    (r.id.0, EntityMeta { etype: r.etype.clone(), name: r.canonical_name.clone() })
                })
                .collect(),
        }
    }
}

impl StoryRecord {
    /// Canonical answer string for a KB value: the entity's table name or
    /// the literal text.
    pub fn canonical_surface(&self, value: &Value) -> String {
        match value {
            Value::Entity(id) => {
                self.entities.get(&id.0).map(|m| m.name.clone()).unwrap_or_default()
            }
            Value::Literal(l) => l.text.clone(),
        }
    }
}

fn validate_record(record: &StoryRecord, line: usize) -> Result<(), DatasetError> {
    let check_value = |v: &Value| -> Result<(), DatasetError> {
        if let Value::Entity(id) = v {
            if !record.entities.contains_key(&id.0) {
                return Err(DatasetError::Format {
                    line,
                    message: format!("entity {id} not in entity table of {}", record.story_id),
                });
            }
        }
        Ok(())
    };
    for stmt in &record.statements {
        for m in &stmt.mentions {
            check_value(&m.entity)?;
        }
    }
    for q in &record.questions {
        if q.position >= record.statements.len() && !record.statements.is_empty() {
            return Err(DatasetError::Format {
                line,
                message: format!("question {} position {} out of range", q.qid, q.position),
            });
        }
        for a in &q.answers {
            check_value(&a.entity)?;
        }
    }
    Ok(())
}

/// Writes one JSON object per line.
pub fn write_dataset(stories: &[StoryRecord], path: impl AsRef<Path>) -> Result<(), DatasetError> {
    let path = path.as_ref();
    let io_err = |source| DatasetError::Io { path: path.display().to_string(), source };
    let file = std::fs::File::create(path).map_err(io_err)?;
    let mut out = BufWriter::new(file);
    for story in stories {
        serde_json::to_writer(&mut out, story)
            .map_err(|e| io_err(std::io::Error::other(e)))?;
        out.write_all(b"\n").map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

/// Reads a JSONL dataset, reporting the line number of any malformed row.
pub fn read_dataset(path: impl AsRef<Path>) -> Result<Vec<StoryRecord>, DatasetError> {
    let path = path.as_ref();
    let io_err = |source| DatasetError::Io { path: path.display().to_string(), source };
    let file = std::fs::File::open(path).map_err(io_err)?;
    let reader = BufReader::new(file);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(io_err)?;
        if line.trim().is_empty() {
            continue;
        }
        let record: StoryRecord = serde_json::from_str(&line)
            .map_err(|e| DatasetError::Format { line: line_no, message: e.to_string() })?;
        validate_record(&record, line_no)?;
        out.push(record);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Statistics
// ---------------------------------------------------------------------------

/// Aggregate statistics for one reporting unit (a world, or the corpus).
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct StatsBlock {
    pub stories: usize,
    pub questions: usize,
    pub avg_entity_mentions_per_story: f64,
    pub avg_answers_per_question: f64,
    pub avg_statements_per_story: f64,
    pub avg_story_tokens: f64,
    pub avg_question_tokens: f64,
    pub avg_answer_tokens: f64,
    /// Distinct tokens across statements and questions.
    pub vocab_tokens: usize,
    /// Distinct statement tokens outside entity mention spans.
    pub vocab_tokens_excluding_mentions: usize,
    /// Distinct canonical entity names.
    pub vocab_entities: usize,
    pub category_counts: BTreeMap<String, usize>,
    pub category_percent: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StatsReport {
    pub per_world: BTreeMap<String, StatsBlock>,
    pub overall: StatsBlock,
}

fn block(stories: &[&StoryRecord]) -> StatsBlock {
    let mut mentions = 0usize;
    let mut answers = 0usize;
    let mut statements = 0usize;
    let mut story_tokens = 0usize;
    let mut question_tokens = 0usize;
    let mut answer_tokens = 0usize;
    let mut questions = 0usize;
    let mut vocab: BTreeSet<&str> = BTreeSet::new();
    let mut vocab_excl: BTreeSet<&str> = BTreeSet::new();
    let mut entity_names: BTreeSet<&str> = BTreeSet::new();
    let mut category_counts: BTreeMap<String, usize> = QuestionCategory::ALL
        .iter()
        .map(|c| (c.label().to_string(), 0))
        .collect();

    for story in stories {
        statements += story.statements.len();
        questions += story.questions.len();
        for meta in story.entities.values() {
            entity_names.insert(&meta.name);
        }
        for stmt in &story.statements {
            story_tokens += stmt.tokens.len();
            mentions += stmt.mentions.len();
            let mut in_mention = vec![false; stmt.tokens.len()];
            for m in &stmt.mentions {
                for flag in in_mention.iter_mut().take(m.end).skip(m.start) {
                    *flag = true;
                }
            }
            for (tok, covered) in stmt.tokens.iter().zip(&in_mention) {
                vocab.insert(tok);
                if !covered {
                    vocab_excl.insert(tok);
                }
            }
        }
        for q in &story.questions {
            question_tokens += q.tokens.len();
            *category_counts.get_mut(q.category.label()).unwrap() += 1;
            for tok in &q.tokens {
                vocab.insert(tok);
            }
            answers += q.answers.len();
            for a in &q.answers {
                let canonical = match &a.entity {
                    Value::Entity(id) => story
                        .entities
                        .get(&id.0)
                        .map(|m| m.name.clone())
                        .unwrap_or_default(),
                    Value::Literal(l) => l.text.clone(),
                };
                answer_tokens += crate::realize::tokenize(&canonical).len();
            }
        }
    }

    let n_stories = stories.len().max(1) as f64;
    let n_questions = questions.max(1) as f64;
    let n_answers = answers.max(1) as f64;
    let category_percent = category_counts
        .iter()
        .map(|(k, &v)| (k.clone(), 100.0 * v as f64 / n_questions))
        .collect();
    StatsBlock {
        stories: stories.len(),
        questions,
        avg_entity_mentions_per_story: mentions as f64 / n_stories,
        avg_answers_per_question: answers as f64 / n_questions,
        avg_statements_per_story: statements as f64 / n_stories,
        avg_story_tokens: story_tokens as f64 / n_stories,
        avg_question_tokens: question_tokens as f64 / n_questions,
        avg_answer_tokens: answer_tokens as f64 / n_answers,
        vocab_tokens: vocab.len(),
        vocab_tokens_excluding_mentions: vocab_excl.len(),
        vocab_entities: entity_names.len(),
        category_counts,
        category_percent,
    }
}

/// Computes the full report. Deterministic.
pub fn compute_stats(stories: &[StoryRecord]) -> Result<StatsReport, DatasetError> {
    if stories.is_empty() {
        return Err(DatasetError::EmptyDataset);
    }
    let mut by_world: BTreeMap<String, Vec<&StoryRecord>> = BTreeMap::new();
    for s in stories {
        by_world.entry(s.world.clone()).or_default().push(s);
    }
    let per_world = by_world.iter().map(|(w, group)| (w.clone(), block(group))).collect();
    let overall = block(&stories.iter().collect::<Vec<_>>());
    Ok(StatsReport { per_world, overall })
}

impl std::fmt::Display for StatsReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut cols: Vec<(&str, &StatsBlock)> =
            self.per_world.iter().map(|(w, b)| (w.as_str(), b)).collect();
        cols.push(("all", &self.overall));
        write!(f, "{:<34}", "statistic")?;
        for (name, _) in &cols {
            write!(f, "{name:>14}")?;
        }
        writeln!(f)?;
        macro_rules! row {
            ($label:expr, $field:ident, usize) => {{
                write!(f, "{:<34}", $label)?;
                for (_, b) in &cols {
                    write!(f, "{:>14}", b.$field)?;
                }
                writeln!(f)?;
            }};
            ($label:expr, $field:ident, f64) => {{
                write!(f, "{:<34}", $label)?;
                for (_, b) in &cols {
                    write!(f, "{:>14.1}", b.$field)?;
                }
                writeln!(f)?;
            }};
        }
        row!("stories", stories, usize);
        row!("questions", questions, usize);
        row!("avg entity mentions / story", avg_entity_mentions_per_story, f64);
        row!("avg answers / question", avg_answers_per_question, f64);
        row!("avg statements / story", avg_statements_per_story, f64);
        row!("avg tokens in stories", avg_story_tokens, f64);
        row!("avg tokens in questions", avg_question_tokens, f64);
        row!("avg tokens in answers", avg_answer_tokens, f64);
        row!("vocab (tokens)", vocab_tokens, usize);
        row!("vocab (tokens, no mentions)", vocab_tokens_excluding_mentions, usize);
        row!("vocab (entities)", vocab_entities, usize);
        for cat in QuestionCategory::ALL {
            write!(f, "{:<34}", format!("% {}", cat.label()))?;
            for (_, b) in &cols {
                write!(f, "{:>14.1}", b.category_percent[cat.label()])?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Splits
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitRatios {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        Self { train: 0.8, val: 0.1, test: 0.1 }
    }
}

impl SplitRatios {
    /// Parses "80/10/10" (any scale; normalized).
    pub fn parse(s: &str) -> Option<Self> {
        let parts: Vec<f64> = s.split('/').map(|p| p.trim().parse().ok()).collect::<Option<_>>()?;
        if parts.len() != 3 || parts.iter().any(|p| *p < 0.0) {
            return None;
        }
        let total: f64 = parts.iter().sum();
        if total <= 0.0 {
            return None;
        }
        Some(Self { train: parts[0] / total, val: parts[1] / total, test: parts[2] / total })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SplitMode {
    WithinWorld,
    CrossWorld { held_out: String },
}

/// Story-level split assignment. Stories are never divided.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SplitAssignment {
    pub mode: String,
    pub seed: u64,
    pub assignments: BTreeMap<String, Split>,
}

impl SplitAssignment {
    pub fn ids(&self, split: Split) -> BTreeSet<&str> {
        self.assignments
            .iter()
            .filter(|(_, s)| **s == split)
            .map(|(id, _)| id.as_str())
            .collect()
    }
}

fn shuffled_ids(group: &[&StoryRecord], world: &str, seed: u64) -> Vec<String> {
    let mut ids: Vec<String> = group.iter().map(|s| s.story_id.clone()).collect();
    ids.sort_unstable();
    let mut rng =
        ChaCha8Rng::seed_from_u64(seed ^ crate::world::derive_story_seed(seed, world, 0));
    ids.shuffle(&mut rng);
    ids
}

/// Builds a deterministic split. Within-world mode splits each world's
/// stories by ratio with at least one story per part; cross-world mode
/// holds out one world entirely for test and splits the rest into
/// train/val.
pub fn make_splits(
    stories: &[StoryRecord],
    mode: SplitMode,
    ratios: SplitRatios,
    seed: u64,
) -> Result<SplitAssignment, DatasetError> {
    if stories.is_empty() {
        return Err(DatasetError::EmptyDataset);
    }
    let mut by_world: BTreeMap<String, Vec<&StoryRecord>> = BTreeMap::new();
    for s in stories {
        by_world.entry(s.world.clone()).or_default().push(s);
    }
    let mut assignments = BTreeMap::new();
    match &mode {
        SplitMode::WithinWorld => {
            for (world, group) in &by_world {
                let n = group.len();
                if n < 3 {
                    return Err(DatasetError::InsufficientStories {
                        world: world.clone(),
                        have: n,
                        need: 3,
                    });
                }
                let n_val = ((n as f64 * ratios.val).round() as usize).max(1);
                let n_test = ((n as f64 * ratios.test).round() as usize).max(1);
                if n_val + n_test >= n {
                    return Err(DatasetError::InsufficientStories {
                        world: world.clone(),
                        have: n,
                        need: n_val + n_test + 1,
                    });
                }
                let ids = shuffled_ids(group, world, seed);
                for (i, id) in ids.into_iter().enumerate() {
                    let split = if i < n_val {
                        Split::Val
                    } else if i < n_val + n_test {
                        Split::Test
                    } else {
                        Split::Train
                    };
                    assignments.insert(id, split);
                }
            }
        }
        SplitMode::CrossWorld { held_out } => {
            if !by_world.contains_key(held_out) {
                return Err(DatasetError::UnknownWorld(held_out.clone()));
            }
            for (world, group) in &by_world {
                if world == held_out {
                    for s in group {
                        assignments.insert(s.story_id.clone(), Split::Test);
                    }
                    continue;
                }
                let n = group.len();
                let val_fraction = if ratios.train + ratios.val > 0.0 {
                    ratios.val / (ratios.train + ratios.val)
                } else {
                    0.1
                };
                let n_val = ((n as f64 * val_fraction).round() as usize).max(1).min(n);
                let ids = shuffled_ids(group, world, seed);
                for (i, id) in ids.into_iter().enumerate() {
                    let split = if i < n_val { Split::Val } else { Split::Train };
                    assignments.insert(id, split);
                }
            }
        }
    }
    Ok(SplitAssignment {
        mode: match &mode {
            SplitMode::WithinWorld => "within".to_string(),
            SplitMode::CrossWorld { held_out } => format!("cross:{held_out}"),
        },
        seed,
        assignments,
    })
}

#[cfg(test)]
mod tests;
