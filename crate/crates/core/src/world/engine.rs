//! The seeded simulation loop: choosing event templates, binding their
//! parameters against the live state, applying effects, and recording a
//! replayable trace.

use crate::kb::{
    apply_effect_record, EffectRecord, EntityId, KbError, Literal, Pronoun, RelationCatalog,
    Value, WorldState,
};
use crate::world::schema::{EffectDecl, EventTemplate, PatternAtom, PatternTerm, WorldDefinition};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("no event template is applicable at step {0}")]
    NoApplicableTemplate(usize),
    #[error(transparent)]
    Kb(#[from] KbError),
}

/// One applied simulation step: which template fired, with which bindings,
/// and the concrete effects. `effects_applied` alone reproduces the state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationEvent {
    pub step: usize,
    pub template: String,
    pub bindings: BTreeMap<String, Value>,
    pub effects_applied: Vec<EffectRecord>,
}

/// A full event trace plus the relation catalog needed to replay it.
#[derive(Clone, Debug)]
pub struct Trace {
    pub catalog: Arc<RelationCatalog>,
    pub events: Vec<SimulationEvent>,
}

impl Trace {
    /// State after replaying all events with index <= `step`.
    pub fn state_at(&self, step: usize) -> Result<WorldState, KbError> {
        if self.events.is_empty() || step + 1 > self.events.len() {
            return Err(KbError::StepOutOfRange {
                step,
                max: self.events.len().saturating_sub(1),
            });
        }
        let mut state = WorldState::new(self.catalog.clone());
        for event in &self.events[..=step] {
            for effect in &event.effects_applied {
                apply_effect_record(&mut state, effect)?;
            }
            state.advance_step();
        }
        Ok(state)
    }

    pub fn final_state(&self) -> Result<WorldState, KbError> {
        if self.events.is_empty() {
            // An empty trace replays to the empty state.
            return Ok(WorldState::new(self.catalog.clone()));
        }
        self.state_at(self.events.len() - 1)
    }
}

/// Derives the per-story seed from the base seed, world name and story
/// index: `splitmix64(splitmix64(base ^ fnv1a64(world)) ^ index)`.
pub fn derive_story_seed(base_seed: u64, world: &str, story_index: u64) -> u64 {
    splitmix64(splitmix64(base_seed ^ fnv1a64(world.as_bytes())) ^ story_index)
}

pub(crate) fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xCBF2_9CE4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01B3);
    }
    hash
}

/// Per-story pool state: entity names and unique literals draw without
/// replacement; other literals draw uniformly.
struct StoryPools {
    remaining: BTreeMap<String, Vec<String>>,
    all: BTreeMap<String, Vec<String>>,
}

impl StoryPools {
    fn new(def: &WorldDefinition, rng: &mut ChaCha8Rng) -> Self {
        let mut remaining = BTreeMap::new();
        for (name, values) in &def.pools {
            let mut shuffled = values.clone();
            shuffled.shuffle(rng);
            remaining.insert(name.clone(), shuffled);
        }
        Self { remaining, all: def.pools.clone() }
    }

    fn draw_unique(&mut self, pool: &str) -> Option<String> {
        self.remaining.get_mut(pool).and_then(Vec::pop)
    }

    fn can_draw_unique(&self, pool: &str, count: usize) -> bool {
        self.remaining.get(pool).map_or(false, |v| v.len() >= count)
    }

    fn draw_uniform(&self, pool: &str, exclude: Option<&str>, rng: &mut ChaCha8Rng) -> Option<String> {
        let values = self.all.get(pool)?;
        let eligible: Vec<&String> =
            values.iter().filter(|v| Some(v.as_str()) != exclude).collect();
        if eligible.is_empty() {
            return None;
        }
        Some(eligible[rng.gen_range(0..eligible.len())].clone())
    }
}

/// Binds pattern variables against the active facts of `state`, returning
/// all distinct bindings in a deterministic order.
pub fn match_pattern(
    state: &WorldState,
    atoms: &[PatternAtom],
) -> Vec<BTreeMap<String, Value>> {
    let mut bindings: Vec<BTreeMap<String, Value>> = vec![BTreeMap::new()];
    for atom in atoms {
        let mut next = BTreeSet::new();
        for binding in &bindings {
            for fact in state.active_facts(&atom.relation) {
                if let Some(extended) = unify(binding, atom, &fact.args) {
                    next.insert(extended);
                }
            }
        }
        bindings = next.into_iter().collect();
        if bindings.is_empty() {
            break;
        }
    }
    bindings
}

fn unify(
    binding: &BTreeMap<String, Value>,
    atom: &PatternAtom,
    args: &[Value],
) -> Option<BTreeMap<String, Value>> {
    let mut out = binding.clone();
    for (term, actual) in atom.terms.iter().zip(args) {
        match term {
            PatternTerm::Wildcard => {}
            PatternTerm::Var(v) => match out.get(v) {
                Some(bound) if bound != actual => return None,
                Some(_) => {}
                None => {
                    out.insert(v.clone(), actual.clone());
                }
            },
        }
    }
    Some(out)
}

/// True if some active fact matches the atom under the given binding;
/// variables not present in the binding act as wildcards.
fn pattern_holds(state: &WorldState, atom: &PatternAtom, binding: &BTreeMap<String, Value>) -> bool {
    state.active_facts(&atom.relation).any(|fact| {
        atom.terms.iter().zip(&fact.args).all(|(term, actual)| match term {
            PatternTerm::Wildcard => true,
            PatternTerm::Var(v) => binding.get(v).map_or(true, |b| b == actual),
        })
    })
}

/// A running simulation of one story. Owns its state, rng and pool
/// cursors; `step` fires one weighted-sampled event template.
pub struct Simulation<'d> {
    def: &'d WorldDefinition,
    state: WorldState,
    pools: StoryPools,
    rng: ChaCha8Rng,
}

impl<'d> Simulation<'d> {
    pub fn new(def: &'d WorldDefinition, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pools = StoryPools::new(def, &mut rng);
        Self { def, state: WorldState::new(def.catalog.clone()), pools, rng }
    }

    pub fn state(&self) -> &WorldState {
        &self.state
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// Split borrow for callers that need the state and rng together.
    pub fn state_and_rng(&mut self) -> (&WorldState, &mut ChaCha8Rng) {
        (&self.state, &mut self.rng)
    }

    fn template_bindings(&self, template: &EventTemplate) -> Vec<BTreeMap<String, Value>> {
        let mut bindings = match_pattern(&self.state, &template.pre);
        if !template.forbid.is_empty() {
            bindings.retain(|b| {
                !template.forbid.iter().any(|atom| pattern_holds(&self.state, atom, b))
            });
        }
        bindings
    }

    fn pools_available(&self, template: &EventTemplate) -> bool {
        let mut unique_needs: BTreeMap<&str, usize> = BTreeMap::new();
        for decl in &template.new {
            if let Some(et) = self.def.entity_types.get(&decl.type_name) {
                *unique_needs.entry(et.pool.as_str()).or_default() += 1;
            } else if let Some(lt) = self.def.literal_types.get(&decl.type_name) {
                if lt.unique {
                    *unique_needs.entry(lt.pool.as_str()).or_default() += 1;
                }
            }
        }
        unique_needs
            .iter()
            .all(|(pool, &count)| self.pools.can_draw_unique(pool, count))
    }

    /// Fires one event: samples a satisfiable template by weight, a binding
    /// uniformly among its matches, applies effects, and advances the step.
    pub fn step(&mut self) -> Result<SimulationEvent, SimError> {
        let mut candidates: Vec<(usize, Vec<BTreeMap<String, Value>>)> = Vec::new();
        for (i, template) in self.def.events.iter().enumerate() {
            if !self.pools_available(template) {
                continue;
            }
            let bindings = self.template_bindings(template);
            if bindings.is_empty() && !template.pre.is_empty() {
                continue;
            }
            let bindings = if template.pre.is_empty() && bindings.is_empty() {
                vec![BTreeMap::new()]
            } else {
                bindings
            };
            candidates.push((i, bindings));
        }
        if candidates.is_empty() {
            return Err(SimError::NoApplicableTemplate(self.state.step()));
        }

        let total: f64 = candidates.iter().map(|(i, _)| self.def.events[*i].weight).sum();
        let mut pick = self.rng.gen::<f64>() * total;
        let mut chosen = candidates.len() - 1;
        for (k, (i, _)) in candidates.iter().enumerate() {
            pick -= self.def.events[*i].weight;
            if pick <= 0.0 {
                chosen = k;
                break;
            }
        }
        let (template_idx, bindings) = &candidates[chosen];
        let template = &self.def.events[*template_idx];
        let mut binding = bindings[self.rng.gen_range(0..bindings.len())].clone();

        let mut effects_applied = Vec::new();

        // Create new entities / sample new literal values.
        for decl in &template.new {
            if let Some(et) = self.def.entity_types.get(&decl.type_name) {
                let name = self
                    .pools
                    .draw_unique(&et.pool)
                    .expect("pool availability checked above");
                let pronoun = if et.human {
                    if self.rng.gen_bool(0.5) { Pronoun::He } else { Pronoun::She }
                } else {
                    Pronoun::It
                };
                let alts = alt_surface_forms(&name, et.human);
                let id = self.state.new_entity(&et.name, &name, alts, pronoun);
                effects_applied.push(EffectRecord::NewEntity {
                    record: self.state.entity(id).unwrap().clone(),
                });
                self.state.assert_fact(&et.presence, vec![id.into()])?;
                effects_applied.push(EffectRecord::Assert {
                    relation: et.presence.clone(),
                    args: vec![id.into()],
                });
                binding.insert(decl.var.clone(), id.into());
            } else {
                let lt = &self.def.literal_types[&decl.type_name];
                let exclude: Option<String> = decl.distinct_from.as_ref().and_then(|d| {
                    binding.get(d).and_then(|v| v.as_literal()).map(|l| l.text.clone())
                });
                let text = if lt.unique {
                    self.pools.draw_unique(&lt.pool).expect("pool availability checked above")
                } else {
                    self.pools
                        .draw_uniform(&lt.pool, exclude.as_deref(), &mut self.rng)
                        .expect("literal pools hold at least two values")
                };
                binding.insert(decl.var.clone(), Literal::new(&lt.name, text).into());
            }
        }

        // Apply declared effects.
        for effect in &template.effects {
            match effect {
                EffectDecl::Assert { relation, vars } => {
                    let args: Vec<Value> =
                        vars.iter().map(|v| binding[v].clone()).collect();
                    self.state.assert_fact(relation, args.clone())?;
                    effects_applied
                        .push(EffectRecord::Assert { relation: relation.clone(), args });
                }
                EffectDecl::Retract { relation, vars } => {
                    let args: Vec<Value> =
                        vars.iter().map(|v| binding[v].clone()).collect();
                    self.state.retract_fact(relation, &args)?;
                    effects_applied
                        .push(EffectRecord::Retract { relation: relation.clone(), args });
                }
                EffectDecl::Destroy { var } => {
                    let id = binding[var]
                        .as_entity()
                        .expect("destroy target is an entity by validation");
                    for (relation, args) in self.state.retract_all_about(id) {
                        effects_applied.push(EffectRecord::Retract { relation, args });
                    }
                }
            }
        }

        let event = SimulationEvent {
            step: self.state.step(),
            template: template.name.clone(),
            bindings: binding,
            effects_applied,
        };
        self.state.advance_step();
        Ok(event)
    }
}

/// Shorter surfaces an entity may be referred to by. People can go by
/// their first name when that is unambiguous in context.
pub fn alt_surface_forms(name: &str, human: bool) -> Vec<String> {
    if !human {
        return Vec::new();
    }
    match name.split_whitespace().next() {
        Some(first) if first != name => vec![first.to_string()],
        _ => Vec::new(),
    }
}

/// Generates a trace of exactly `n_statements` events, deterministically
/// in `(def, seed, n_statements)`.
pub fn generate_trace(
    def: &WorldDefinition,
    seed: u64,
    n_statements: usize,
) -> Result<Trace, SimError> {
    let mut sim = Simulation::new(def, seed);
    let mut events = Vec::with_capacity(n_statements);
    for _ in 0..n_statements {
        events.push(sim.step()?);
    }
    Ok(Trace { catalog: def.catalog.clone(), events })
}

/// True while the entity's presence fact is active.
pub fn is_alive(state: &WorldState, def: &WorldDefinition, id: EntityId) -> bool {
    let Some(record) = state.entity(id) else { return false };
    let Some(et) = def.entity_types.get(&record.etype) else { return false };
    state
        .active_facts(&et.presence)
        .any(|f| f.args.first() == Some(&Value::Entity(id)))
}
