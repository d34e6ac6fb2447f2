//! Rendering simulation events as first-person narrative statements.
//!
//! Every entity or literal a statement surfaces is recorded as a
//! [`Mention`] with an exact token span and the gold KB id. Referring
//! expressions are chosen among four strategies under admissibility rules
//! tight enough that a rule-based resolver recovers the gold id from the
//! surface alone (see [`resolver`]):
//!
//! - `canonical` — the full name, always admissible; a shorter alternate
//!   form only when no other entity in scope shares it;
//! - `pronoun` — only when the entity is the unique entity of its
//!   pronoun class (human / non-human) mentioned within the salience
//!   window (the previous 3 statements);
//! - `definite` — an attribute description like "the meeting about the
//!   hiring plan", only when it currently denotes a unique live entity;
//! - `recency` — a phrase like "the meeting I last added", only for the
//!   most recently introduced live entity of the type.
//!
//! Literal values always surface verbatim (modulo sentence-initial
//! capitalization) and never take pronouns.

pub mod resolver;
mod token;

pub use token::{detokenize, token_spans, tokenize};

use crate::kb::{EntityId, Pronoun, Value, WorldState};
use crate::world::{is_alive, SimulationEvent, WorldDefinition};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use thiserror::Error;

/// How a mention refers to its entity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Canonical,
    Pronoun,
    Definite,
    Recency,
}

/// One surfaced entity or literal, with its token span.
#[derive(Clone, Debug, PartialEq)]
pub struct Mention {
    pub entity: Value,
    pub surface: String,
    /// Token span, end-exclusive.
    pub start: usize,
    pub end: usize,
    pub strategy: Strategy,
}

/// One realized narrative sentence.
#[derive(Clone, Debug, PartialEq)]
pub struct Statement {
    pub text: String,
    pub tokens: Vec<String>,
    pub mentions: Vec<Mention>,
    pub event_step: usize,
}

#[derive(Debug, Error)]
pub enum RealizeError {
    #[error("event '{0}' has no template in this world")]
    UnknownEvent(String),
    #[error("template slot '{{{slot}}}' of event '{event}' is unbound")]
    TemplateSlotUnbound { event: String, slot: String },
    #[error("mention '{surface}' does not align with token boundaries in '{text}'")]
    SpanMisaligned { surface: String, text: String },
}

/// Salience bookkeeping: which entities the last few statements mentioned.
#[derive(Clone, Debug)]
pub struct DiscourseContext {
    window: usize,
    recent: VecDeque<BTreeSet<EntityId>>,
}

impl Default for DiscourseContext {
    fn default() -> Self {
        Self::new(3)
    }
}

impl DiscourseContext {
    pub fn new(window: usize) -> Self {
        Self { window, recent: VecDeque::new() }
    }

    pub fn note_statement(&mut self, statement: &Statement) {
        let mentioned: BTreeSet<EntityId> = statement
            .mentions
            .iter()
            .filter_map(|m| m.entity.as_entity())
            .collect();
        self.recent.push_back(mentioned);
        while self.recent.len() > self.window {
            self.recent.pop_front();
        }
    }

    pub fn mentioned_in_window(&self) -> BTreeSet<EntityId> {
        self.recent.iter().flatten().copied().collect()
    }
}

#[derive(Clone, Debug)]
pub struct ViewEntity {
    pub id: EntityId,
    pub etype: String,
    pub name: String,
    pub alts: Vec<String>,
    pub pronoun: Pronoun,
}

/// An owned snapshot of everything referring-expression choice needs,
/// built from the state *before* an event applies and extended with the
/// entities the event introduces.
#[derive(Clone, Debug, Default)]
pub struct RealizeView {
    /// Live entities (plus this event's new ones).
    entities: BTreeMap<EntityId, ViewEntity>,
    new_ids: BTreeSet<EntityId>,
    /// Pronoun class of every entity ever created, live or not.
    human: BTreeMap<EntityId, bool>,
    /// Rendered definite description per live entity.
    definite: BTreeMap<EntityId, String>,
    definite_counts: BTreeMap<String, usize>,
    /// Most recently introduced live entity per type.
    latest_of_type: BTreeMap<String, EntityId>,
    /// Case-folded canonical and alternate surface counts over `entities`.
    name_counts: BTreeMap<String, usize>,
}

pub(crate) fn fold(s: &str) -> String {
    s.to_ascii_lowercase()
}

impl RealizeView {
    pub fn build(state: &WorldState, def: &WorldDefinition) -> Self {
        let mut view = RealizeView::default();
        for record in state.entities() {
            let Some(et) = def.entity_type(&record.etype) else { continue };
            view.human.insert(record.id, et.human);
            if !is_alive(state, def, record.id) {
                continue;
            }
            view.insert_entity(ViewEntity {
                id: record.id,
                etype: record.etype.clone(),
                name: record.canonical_name.clone(),
                alts: record.alt_surface_forms.clone(),
                pronoun: record.pronoun,
            });
            if let Some(d) = &et.definite {
                if let Some(fact) = state
                    .active_facts(&d.relation)
                    .find(|f| f.args.first() == Some(&Value::Entity(record.id)))
                {
                    let value_surface = match &fact.args[1] {
                        Value::Literal(l) => l.text.clone(),
                        Value::Entity(id) => state
                            .entity(*id)
                            .map(|r| r.canonical_name.clone())
                            .unwrap_or_default(),
                    };
                    let rendered = d.pattern.replace("{}", &value_surface);
                    *view.definite_counts.entry(fold(&rendered)).or_default() += 1;
                    view.definite.insert(record.id, rendered);
                }
            }
        }
        view
    }

    fn insert_entity(&mut self, entity: ViewEntity) {
        *self.name_counts.entry(fold(&entity.name)).or_default() += 1;
        for alt in &entity.alts {
            *self.name_counts.entry(fold(alt)).or_default() += 1;
        }
        let latest = self.latest_of_type.entry(entity.etype.clone()).or_insert(entity.id);
        if entity.id >= *latest {
            *latest = entity.id;
        }
        self.entities.insert(entity.id, entity);
    }

    /// Adds the entities a just-fired event introduces. They are in scope
    /// for canonical reference but excluded from anaphora.
    pub fn with_event(mut self, event: &SimulationEvent, def: &WorldDefinition) -> Self {
        for effect in &event.effects_applied {
            if let crate::kb::EffectRecord::NewEntity { record } = effect {
                self.new_ids.insert(record.id);
                let human =
                    def.entity_type(&record.etype).map(|t| t.human).unwrap_or(false);
                self.human.insert(record.id, human);
                self.insert_entity(ViewEntity {
                    id: record.id,
                    etype: record.etype.clone(),
                    name: record.canonical_name.clone(),
                    alts: record.alt_surface_forms.clone(),
                    pronoun: record.pronoun,
                });
            }
        }
        self
    }

    pub fn entity(&self, id: EntityId) -> Option<&ViewEntity> {
        self.entities.get(&id)
    }

    pub fn is_new(&self, id: EntityId) -> bool {
        self.new_ids.contains(&id)
    }

    pub fn is_human(&self, id: EntityId) -> Option<bool> {
        self.human.get(&id).copied()
    }

    pub fn live_entities(&self) -> impl Iterator<Item = &ViewEntity> {
        self.entities.values()
    }

    pub fn definite_surface(&self, id: EntityId) -> Option<&str> {
        self.definite.get(&id).map(String::as_str)
    }

    pub fn latest_of_type(&self, etype: &str) -> Option<EntityId> {
        self.latest_of_type.get(etype).copied()
    }
}

const WEIGHT_CANONICAL: f64 = 0.40;
const WEIGHT_ALT: f64 = 0.15;
const WEIGHT_PRONOUN: f64 = 0.15;
const WEIGHT_DEFINITE: f64 = 0.15;
const WEIGHT_RECENCY: f64 = 0.15;

/// All admissible (strategy, surface, weight) options for an entity.
pub fn reference_options(
    id: EntityId,
    view: &RealizeView,
    ctx: &DiscourseContext,
    def: &WorldDefinition,
) -> Vec<(Strategy, String, f64)> {
    let entity = view.entity(id).expect("referenced entity is in scope");
    let mut options = vec![(Strategy::Canonical, entity.name.clone(), WEIGHT_CANONICAL)];
    if view.is_new(id) {
        // Fresh entities are introduced by full name only.
        return options;
    }
    for alt in &entity.alts {
        if view.name_counts.get(&fold(alt)).copied().unwrap_or(0) == 1 {
            options.push((Strategy::Canonical, alt.clone(), WEIGHT_ALT));
        }
    }
    let window = ctx.mentioned_in_window();
    if window.contains(&id) {
        let class = view.is_human(id).unwrap_or(false);
        let rivals = window
            .iter()
            .filter(|w| view.is_human(**w) == Some(class))
            .count();
        if rivals == 1 {
            options.push((Strategy::Pronoun, entity.pronoun.surface().to_string(), WEIGHT_PRONOUN));
        }
    }
    if let Some(surface) = view.definite_surface(id) {
        if view.definite_counts.get(&fold(surface)).copied() == Some(1) {
            options.push((Strategy::Definite, surface.to_string(), WEIGHT_DEFINITE));
        }
    }
    if view.latest_of_type(&entity.etype) == Some(id) {
        if let Some(phrase) =
            def.entity_type(&entity.etype).and_then(|t| t.recency_phrase.clone())
        {
            options.push((Strategy::Recency, phrase, WEIGHT_RECENCY));
        }
    }
    options
}

/// Samples a referring expression among the admissible options.
pub fn choose_referring_expression(
    value: &Value,
    view: &RealizeView,
    ctx: &DiscourseContext,
    def: &WorldDefinition,
    rng: &mut ChaCha8Rng,
) -> (Strategy, String) {
    match value {
        Value::Literal(l) => (Strategy::Canonical, l.text.clone()),
        Value::Entity(id) => {
            let options = reference_options(*id, view, ctx, def);
            let total: f64 = options.iter().map(|(_, _, w)| w).sum();
            let mut pick = rng.gen::<f64>() * total;
            for (strategy, surface, w) in &options {
                pick -= w;
                if pick <= 0.0 {
                    return (*strategy, surface.clone());
                }
            }
            let (strategy, surface, _) = options.into_iter().next_back().unwrap();
            (strategy, surface)
        }
    }
}

/// Incremental statement assembly with mention span tracking.
#[derive(Default)]
pub struct SurfaceBuilder {
    text: String,
    mentions: Vec<(Value, usize, usize, Strategy)>,
}

impl SurfaceBuilder {
    pub fn push_text(&mut self, s: &str) {
        self.text.push_str(s);
    }

    pub fn push_mention(&mut self, value: Value, surface: &str, strategy: Strategy) {
        let start = self.text.len();
        self.text.push_str(surface);
        self.mentions.push((value, start, self.text.len(), strategy));
    }

    /// Capitalizes the sentence, tokenizes, and maps each mention's byte
    /// range to a token span. Fails fast on misaligned templates.
    pub fn finish(self, event_step: usize) -> Result<Statement, RealizeError> {
        let mut text = self.text;
        if let Some(first) = text.get(..1) {
            if first.chars().all(|c| c.is_ascii_lowercase()) {
                let upper = first.to_ascii_uppercase();
                text.replace_range(..1, &upper);
            }
        }
        let spans = token_spans(&text);
        let tokens: Vec<String> = spans.iter().map(|&(s, e)| text[s..e].to_string()).collect();
        let mut mentions = Vec::with_capacity(self.mentions.len());
        for (value, bstart, bend, strategy) in self.mentions {
            let covered: Vec<usize> = spans
                .iter()
                .enumerate()
                .filter(|(_, &(s, e))| s >= bstart && e <= bend)
                .map(|(i, _)| i)
                .collect();
            let aligned = covered
                .first()
                .zip(covered.last())
                .map(|(&f, &l)| spans[f].0 == bstart && spans[l].1 == bend)
                .unwrap_or(false);
            if !aligned {
                return Err(RealizeError::SpanMisaligned {
                    surface: text.get(bstart..bend).unwrap_or("").to_string(),
                    text: text.clone(),
                });
            }
            mentions.push(Mention {
                entity: value,
                surface: text[bstart..bend].to_string(),
                start: covered[0],
                end: covered[covered.len() - 1] + 1,
                strategy,
            });
        }
        Ok(Statement { text, tokens, mentions, event_step })
    }
}

pub(crate) enum Segment<'t> {
    Text(&'t str),
    Slot(&'t str),
}

pub(crate) fn parse_template(template: &str) -> Vec<Segment<'_>> {
    let mut segments = Vec::new();
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        if let Some(close) = rest[open..].find('}') {
            if open > 0 {
                segments.push(Segment::Text(&rest[..open]));
            }
            segments.push(Segment::Slot(&rest[open + 1..open + close]));
            rest = &rest[open + close + 1..];
        } else {
            break;
        }
    }
    if !rest.is_empty() {
        segments.push(Segment::Text(rest));
    }
    segments
}

/// Renders one simulation event as a statement, records mention spans, and
/// updates the discourse context.
pub fn realize_event(
    event: &SimulationEvent,
    view: &RealizeView,
    ctx: &mut DiscourseContext,
    def: &WorldDefinition,
    rng: &mut ChaCha8Rng,
) -> Result<Statement, RealizeError> {
    let template = def
        .events
        .iter()
        .find(|t| t.name == event.template)
        .ok_or_else(|| RealizeError::UnknownEvent(event.template.clone()))?;
    let surface = &template.realizations[rng.gen_range(0..template.realizations.len())];

    let mut builder = SurfaceBuilder::default();
    for segment in parse_template(surface) {
        match segment {
            Segment::Text(t) => builder.push_text(t),
            Segment::Slot(slot) => {
                let value = event.bindings.get(slot).ok_or_else(|| {
                    RealizeError::TemplateSlotUnbound {
                        event: event.template.clone(),
                        slot: slot.to_string(),
                    }
                })?;
                let (strategy, text) =
                    choose_referring_expression(value, view, ctx, def, rng);
                builder.push_mention(value.clone(), &text, strategy);
            }
        }
    }
    let statement = builder.finish(event.step)?;
    ctx.note_statement(&statement);
    Ok(statement)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{generate_trace, load_world, PoolSource, Simulation};
    use rand::SeedableRng;

    fn meeting_world() -> WorldDefinition {
        load_world("meeting", &PoolSource::Embedded).unwrap()
    }

    /// Drives a full story, returning its statements.
    fn realize_story(def: &WorldDefinition, seed: u64, n: usize) -> Vec<Statement> {
        let mut sim = Simulation::new(def, seed);
        let mut ctx = DiscourseContext::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xF00D);
        let mut out = Vec::new();
        for _ in 0..n {
            let view = RealizeView::build(sim.state(), def);
            let event = sim.step().unwrap();
            let view = view.with_event(&event, def);
            out.push(realize_event(&event, &view, &mut ctx, def, &mut rng).unwrap());
        }
        out
    }

    #[test]
    fn introductions_surface_the_canonical_name() {
        let def = meeting_world();
        let statements = realize_story(&def, 11, 30);
        let trace = generate_trace(&def, 11, 30).unwrap();
        let state = trace.final_state().unwrap();
        for (stmt, event) in statements.iter().zip(&trace.events) {
            for effect in &event.effects_applied {
                if let crate::kb::EffectRecord::NewEntity { record } = effect {
                    let m = stmt
                        .mentions
                        .iter()
                        .find(|m| m.entity == Value::Entity(record.id))
                        .unwrap_or_else(|| panic!("no mention of new entity in '{}'", stmt.text));
                    assert_eq!(m.strategy, Strategy::Canonical);
                    assert_eq!(fold(&m.surface), fold(&record.canonical_name));
                }
            }
        }
        assert!(state.entity_count() > 0);
    }

    #[test]
    fn spans_slice_to_surfaces() {
        for world in crate::world::builtin_world_names() {
            let def = load_world(world, &PoolSource::Embedded).unwrap();
            for seed in [1, 2, 3] {
                for stmt in realize_story(&def, seed, 100) {
                    for m in &stmt.mentions {
                        let joined = detokenize(&stmt.tokens[m.start..m.end].to_vec());
                        assert_eq!(
                            joined, m.surface,
                            "world {world} seed {seed} text '{}'",
                            stmt.text
                        );
                    }
                    assert_eq!(detokenize(&stmt.tokens), stmt.text);
                }
            }
        }
    }

    #[test]
    fn mentions_do_not_overlap() {
        let def = meeting_world();
        for stmt in realize_story(&def, 4, 100) {
            let mut last_end = 0;
            let mut sorted: Vec<_> = stmt.mentions.clone();
            sorted.sort_by_key(|m| m.start);
            for m in sorted {
                assert!(m.start >= last_end, "overlap in '{}'", stmt.text);
                assert!(m.end <= stmt.tokens.len());
                last_end = m.end;
            }
        }
    }

    #[test]
    fn anaphora_strategies_show_up() {
        let def = meeting_world();
        let mut seen: BTreeSet<&str> = BTreeSet::new();
        for seed in 0..12 {
            for stmt in realize_story(&def, seed, 100) {
                for m in &stmt.mentions {
                    seen.insert(match m.strategy {
                        Strategy::Canonical => "canonical",
                        Strategy::Pronoun => "pronoun",
                        Strategy::Definite => "definite",
                        Strategy::Recency => "recency",
                    });
                }
            }
        }
        assert_eq!(seen.len(), 4, "saw strategies {seen:?}");
    }

    #[test]
    fn resolver_recovers_every_gold_id() {
        let mut anaphora_total = 0;
        for world in crate::world::builtin_world_names() {
            let def = load_world(world, &PoolSource::Embedded).unwrap();
            for seed in [5, 6] {
                let mut sim = Simulation::new(&def, seed);
                let mut ctx = DiscourseContext::default();
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xF00D);
                let mut statements = Vec::new();
                let mut events = Vec::new();
                for _ in 0..100 {
                    let view = RealizeView::build(sim.state(), &def);
                    let event = sim.step().unwrap();
                    let view = view.with_event(&event, &def);
                    statements
                        .push(realize_event(&event, &view, &mut ctx, &def, &mut rng).unwrap());
                    events.push(event);
                }
                let trace = crate::world::Trace { catalog: def.catalog.clone(), events };
                anaphora_total += resolver::resolve_story(&statements, &trace, &def, 3)
                    .unwrap_or_else(|e| panic!("world {world} seed {seed}: {e}"));
            }
        }
        assert!(anaphora_total > 100, "only {anaphora_total} anaphoric mentions");
    }

    #[test]
    fn resolver_flags_a_swapped_gold_id() {
        let def = meeting_world();
        let mut sim = Simulation::new(&def, 9);
        let mut ctx = DiscourseContext::default();
        let mut rng = ChaCha8Rng::seed_from_u64(9 ^ 0xF00D);
        let mut statements = Vec::new();
        let mut events = Vec::new();
        for _ in 0..40 {
            let view = RealizeView::build(sim.state(), &def);
            let event = sim.step().unwrap();
            let view = view.with_event(&event, &def);
            statements.push(realize_event(&event, &view, &mut ctx, &def, &mut rng).unwrap());
            events.push(event);
        }
        // Corrupt one entity mention's gold id; the resolver must notice.
        let ids: Vec<crate::kb::EntityId> = statements
            .iter()
            .flat_map(|s| s.mentions.iter())
            .filter_map(|m| m.entity.as_entity())
            .collect();
        let (wrong, target) = (ids[0], ids[ids.len() - 1]);
        assert_ne!(wrong, target);
        'outer: for stmt in statements.iter_mut().rev() {
            for m in stmt.mentions.iter_mut() {
                if m.entity == Value::Entity(target) {
                    m.entity = Value::Entity(wrong);
                    break 'outer;
                }
            }
        }
        let trace = crate::world::Trace { catalog: def.catalog.clone(), events };
        assert!(resolver::resolve_story(&statements, &trace, &def, 3).is_err());
    }

    #[test]
    fn template_parsing_handles_adjacent_slots() {
        let segs = parse_template("{a} went to {b}.");
        assert!(matches!(segs[0], Segment::Slot("a")));
        assert!(matches!(segs[1], Segment::Text(" went to ")));
        assert!(matches!(segs[2], Segment::Slot("b")));
        assert!(matches!(segs[3], Segment::Text(".")));
    }
}
