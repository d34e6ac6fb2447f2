//! Declarative world definitions and the seeded simulation engine that
//! turns them into event traces.

mod engine;
mod pools;
mod schema;

pub use engine::{
    alt_surface_forms, derive_story_seed, generate_trace, is_alive, match_pattern, SimError,
    Simulation, SimulationEvent, Trace,
};
pub use pools::{PoolError, PoolSet, PoolSource};
pub use schema::{
    builtin_world_names, load_world, parse_world, DefiniteDef, EffectDecl, EntityTypeDef,
    EventKind, EventTemplate, LiteralTypeDef, NewDecl, PatternAtom, PatternTerm, QuestionEntry,
    WorldDefinition, WorldError,
};

#[cfg(test)]
mod tests;
