//! Rule-based mention resolution.
//!
//! Re-derives every mention's entity from its surface form and the
//! published admissibility rules, walking the trace state in lockstep
//! with the statements. Used to certify that generated anaphora are
//! unambiguous: resolution must recover the gold KB id for 100% of
//! mentions.
//!
//! The resolver is deliberately independent of the generation path: it
//! matches surfaces against candidate sets instead of replaying the
//! generator's choices.

use super::{fold, Mention, RealizeView, Statement, Strategy};
use crate::kb::{apply_effect_record, KbError, Value, WorldState};
use crate::world::{Trace, WorldDefinition};
use std::collections::{BTreeSet, VecDeque};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ResolveError {
    #[error("statement {statement}: no candidate for {strategy:?} mention '{surface}'")]
    NoCandidate { statement: usize, surface: String, strategy: Strategy },
    #[error("statement {statement}: {strategy:?} mention '{surface}' is ambiguous ({count} candidates)")]
    Ambiguous { statement: usize, surface: String, strategy: Strategy, count: usize },
    #[error("statement {statement}: mention '{surface}' resolves to {resolved:?}, gold is {gold:?}")]
    Mismatch { statement: usize, surface: String, resolved: Value, gold: Value },
    #[error("statement count {statements} does not match trace length {events}")]
    LengthMismatch { statements: usize, events: usize },
    #[error(transparent)]
    Kb(#[from] KbError),
}

/// Resolves every mention of every statement and checks it against the
/// recorded gold id. Returns the number of anaphoric (non-canonical)
/// mentions resolved.
pub fn resolve_story(
    statements: &[Statement],
    trace: &Trace,
    def: &WorldDefinition,
    window: usize,
) -> Result<usize, ResolveError> {
    if statements.len() != trace.events.len() {
        return Err(ResolveError::LengthMismatch {
            statements: statements.len(),
            events: trace.events.len(),
        });
    }
    let mut state = WorldState::new(trace.catalog.clone());
    let mut recent: VecDeque<BTreeSet<crate::kb::EntityId>> = VecDeque::new();
    let mut anaphoric = 0;

    for (k, (stmt, event)) in statements.iter().zip(&trace.events).enumerate() {
        let view = RealizeView::build(&state, def).with_event(event, def);
        for mention in &stmt.mentions {
            let resolved = resolve_mention(k, mention, &view, &recent, def)?;
            if resolved != mention.entity {
                return Err(ResolveError::Mismatch {
                    statement: k,
                    surface: mention.surface.clone(),
                    resolved,
                    gold: mention.entity.clone(),
                });
            }
            if mention.strategy != Strategy::Canonical {
                anaphoric += 1;
            }
        }

        recent.push_back(
            stmt.mentions.iter().filter_map(|m| m.entity.as_entity()).collect(),
        );
        while recent.len() > window {
            recent.pop_front();
        }
        for effect in &event.effects_applied {
            apply_effect_record(&mut state, effect)?;
        }
        state.advance_step();
    }
    Ok(anaphoric)
}

fn unique<T>(
    statement: usize,
    mention: &Mention,
    candidates: Vec<T>,
    to_value: impl Fn(&T) -> Value,
) -> Result<Value, ResolveError> {
    match candidates.len() {
        0 => Err(ResolveError::NoCandidate {
            statement,
            surface: mention.surface.clone(),
            strategy: mention.strategy,
        }),
        1 => Ok(to_value(&candidates[0])),
        n => Err(ResolveError::Ambiguous {
            statement,
            surface: mention.surface.clone(),
            strategy: mention.strategy,
            count: n,
        }),
    }
}

fn resolve_mention(
    statement: usize,
    mention: &Mention,
    view: &RealizeView,
    recent: &VecDeque<BTreeSet<crate::kb::EntityId>>,
    def: &WorldDefinition,
) -> Result<Value, ResolveError> {
    let surface = fold(&mention.surface);
    match mention.strategy {
        Strategy::Canonical => {
            // Literal values surface verbatim; an entity mention must match
            // the canonical or alternate name of exactly one entity in scope.
            if let Value::Literal(l) = &mention.entity {
                if fold(&l.text) == surface {
                    return Ok(mention.entity.clone());
                }
            }
            let candidates: Vec<_> = view
                .live_entities()
                .filter(|e| {
                    fold(&e.name) == surface || e.alts.iter().any(|a| fold(a) == surface)
                })
                .collect();
            unique(statement, mention, candidates, |e| Value::Entity(e.id))
        }
        Strategy::Pronoun => {
            let human = matches!(surface.as_str(), "he" | "she");
            let window: BTreeSet<_> = recent.iter().flatten().copied().collect();
            let candidates: Vec<_> = window
                .iter()
                .filter(|id| view.is_human(**id) == Some(human))
                .copied()
                .collect();
            unique(statement, mention, candidates, |id| Value::Entity(*id))
        }
        Strategy::Definite => {
            let candidates: Vec<_> = view
                .live_entities()
                .filter(|e| {
                    view.definite_surface(e.id).map(fold).as_deref() == Some(surface.as_str())
                })
                .collect();
            unique(statement, mention, candidates, |e| Value::Entity(e.id))
        }
        Strategy::Recency => {
            let candidates: Vec<_> = def
                .entity_types
                .values()
                .filter(|t| {
                    t.recency_phrase.as_deref().map(fold).as_deref() == Some(surface.as_str())
                })
                .filter_map(|t| view.latest_of_type(&t.name))
                .collect();
            unique(statement, mention, candidates, |id| Value::Entity(*id))
        }
    }
}
