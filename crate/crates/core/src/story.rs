//! Full story generation: drives the simulation, realizes each event as a
//! statement, and interleaves questions, all from one seeded stream.

use crate::kb::{EntityId, EntityRecord};
use crate::question::{
    MentionIndex, QuestionConfig, QuestionError, QuestionInstance, QuestionSampler,
};
use crate::realize::{realize_event, DiscourseContext, RealizeError, RealizeView, Statement};
use crate::world::{derive_story_seed, SimError, Simulation, Trace, WorldDefinition};
use rayon::prelude::*;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StoryError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Realize(#[from] RealizeError),
    #[error(transparent)]
    Question(#[from] QuestionError),
}

#[derive(Clone, Debug)]
pub struct StoryConfig {
    pub statements: usize,
    pub question: QuestionConfig,
}

impl Default for StoryConfig {
    fn default() -> Self {
        Self { statements: 100, question: QuestionConfig::default() }
    }
}

/// One generated story plus the trace needed for oracle replay.
#[derive(Clone, Debug)]
pub struct StoryBundle {
    pub story_id: String,
    pub world: String,
    pub seed: u64,
    pub statements: Vec<Statement>,
    pub questions: Vec<QuestionInstance>,
    pub entity_table: BTreeMap<EntityId, EntityRecord>,
    pub trace: Trace,
}

/// Generates one story. Deterministic in `(def, story_id, seed, cfg)`.
pub fn generate_story(
    def: &WorldDefinition,
    story_id: &str,
    seed: u64,
    cfg: &StoryConfig,
) -> Result<StoryBundle, StoryError> {
    let mut sim = Simulation::new(def, seed);
    let mut ctx = DiscourseContext::default();
    let mut mentions = MentionIndex::default();
    let mut sampler = QuestionSampler::default();
    let mut statements = Vec::with_capacity(cfg.statements);
    let mut questions = Vec::new();
    let mut events = Vec::with_capacity(cfg.statements);

    for i in 0..cfg.statements {
        let view = RealizeView::build(sim.state(), def);
        let event = sim.step()?;
        let view = view.with_event(&event, def);
        let statement = realize_event(&event, &view, &mut ctx, def, sim.rng())?;
        mentions.note_statement(i, &statement);
        statements.push(statement);
        events.push(event);

        // Questions ask about the state after this statement.
        let question_view = RealizeView::build(sim.state(), def);
        let (state, rng) = sim.state_and_rng();
        questions.extend(sampler.maybe_ask(
            story_id,
            i,
            state,
            &question_view,
            &ctx,
            def,
            &mentions,
            &cfg.question,
            rng,
        )?);
    }

    let entity_table =
        sim.state().entities().map(|r| (r.id, r.clone())).collect::<BTreeMap<_, _>>();
    Ok(StoryBundle {
        story_id: story_id.to_string(),
        world: def.name.clone(),
        seed,
        statements,
        questions,
        entity_table,
        trace: Trace { catalog: def.catalog.clone(), events },
    })
}

/// Generates `count` stories for one world in parallel. Per-story seeds
/// derive from `(base_seed, world, index)`, so the result is independent
/// of thread scheduling; output order is by story index.
pub fn generate_stories(
    def: &WorldDefinition,
    base_seed: u64,
    count: usize,
    cfg: &StoryConfig,
) -> Result<Vec<StoryBundle>, StoryError> {
    (0..count)
        .into_par_iter()
        .map(|index| {
            let story_id = format!("{}-{:04}", def.name, index);
            let seed = derive_story_seed(base_seed, &def.name, index as u64);
            generate_story(def, &story_id, seed, cfg)
        })
        .collect()
}
