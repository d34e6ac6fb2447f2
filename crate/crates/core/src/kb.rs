//! Dynamic knowledge base: typed entities, arity-1..3 relations with
//! time-stamped assert/retract, and a conjunctive query evaluator.
//!
//! Facts are never deleted; retraction stamps `retracted_at` so the full
//! trace can be replayed to any step. Relations may declare a functional
//! key set, in which case asserting a fact with an already-active key
//! retracts the previous value (e.g. an assignment keeps exactly one due
//! date at a time).

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

/// Identifier of an entity within one story. Never reused.
#[derive(
    Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default,
)]
#[serde(transparent)]
pub struct EntityId(pub u64);

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

/// A typed literal value (date, room number, email, ...). Literals have
/// no identity beyond their `(kind, text)` pair and never get entity ids,
/// but they do receive mention spans in the narrative.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Literal {
    pub kind: String,
    pub text: String,
}

impl Literal {
    pub fn new(kind: impl Into<String>, text: impl Into<String>) -> Self {
        Self { kind: kind.into(), text: text.into() }
    }
}

/// Argument of a fact: either an entity reference or a typed literal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Entity(EntityId),
    Literal(Literal),
}

impl Value {
    pub fn as_entity(&self) -> Option<EntityId> {
        match self {
            Value::Entity(id) => Some(*id),
            Value::Literal(_) => None,
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Value::Entity(_) => None,
            Value::Literal(l) => Some(l),
        }
    }
}

impl From<EntityId> for Value {
    fn from(id: EntityId) -> Self {
        Value::Entity(id)
    }
}

impl From<Literal> for Value {
    fn from(l: Literal) -> Self {
        Value::Literal(l)
    }
}

/// Third-person pronoun assigned to an entity at creation time.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pronoun {
    He,
    She,
    It,
}

impl Pronoun {
    pub fn surface(self) -> &'static str {
        match self {
            Pronoun::He => "he",
            Pronoun::She => "she",
            Pronoun::It => "it",
        }
    }

    pub fn is_human(self) -> bool {
        !matches!(self, Pronoun::It)
    }
}

/// One entity in a story's entity table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntityRecord {
    pub id: EntityId,
    pub etype: String,
    pub canonical_name: String,
    /// Shorter surfaces that may stand in for the canonical name
    /// (e.g. a person's first name). May be ambiguous story-wide;
    /// the realizer only uses one when it is unambiguous in context.
    pub alt_surface_forms: Vec<String>,
    pub pronoun: Pronoun,
}

/// Argument type of a relation position.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ArgType {
    Entity(String),
    Literal(String),
}

impl ArgType {
    pub fn type_name(&self) -> &str {
        match self {
            ArgType::Entity(n) | ArgType::Literal(n) => n,
        }
    }
}

/// Declared signature of a relation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelationSchema {
    pub name: String,
    pub arg_types: Vec<ArgType>,
    /// If set, a new assertion whose arguments at these positions match an
    /// active fact retracts that fact first (single-valued attribute).
    pub functional_over: Option<BTreeSet<usize>>,
}

impl RelationSchema {
    pub fn arity(&self) -> usize {
        self.arg_types.len()
    }

    /// Positions outside the functional key. For a single-valued attribute
    /// like `Due(assignment, date)` with key `{0}` this is `[1]`.
    pub fn value_positions(&self) -> Vec<usize> {
        match &self.functional_over {
            Some(key) => (0..self.arity()).filter(|i| !key.contains(i)).collect(),
            None => Vec::new(),
        }
    }
}

/// All relation signatures of one world, shared read-only.
pub type RelationCatalog = BTreeMap<String, RelationSchema>;

/// One time-stamped fact. Retraction is soft: the fact stays in the trace
/// with `retracted_at` set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fact {
    pub relation: String,
    pub args: Vec<Value>,
    pub asserted_at: usize,
    pub retracted_at: Option<usize>,
}

impl Fact {
    pub fn is_active(&self) -> bool {
        self.retracted_at.is_none()
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum KbError {
    #[error("unknown relation '{0}'")]
    UnknownRelation(String),
    #[error("relation '{relation}' expects {expected} arguments, got {got}")]
    ArityMismatch { relation: String, expected: usize, got: usize },
    #[error("relation '{relation}' argument {position} expects {expected}, got {got}")]
    TypeMismatch { relation: String, position: usize, expected: String, got: String },
    #[error("entity {0} does not exist")]
    DanglingEntity(EntityId),
    #[error("no active fact {relation}({args}) to retract")]
    NoSuchActiveFact { relation: String, args: String },
    #[error("step {step} out of range (trace ends at step {max})")]
    StepOutOfRange { step: usize, max: usize },
    #[error("query is not well-formed: {0}")]
    MalformedQuery(String),
}

/// The dynamic KB for a single story. Owned by one generation task;
/// snapshots may be shared read-only.
#[derive(Clone, Debug)]
pub struct WorldState {
    catalog: Arc<RelationCatalog>,
    entities: BTreeMap<EntityId, EntityRecord>,
    facts: Vec<Fact>,
    /// Indices of currently active facts, per relation, in assertion order.
    active: BTreeMap<String, Vec<usize>>,
    step: usize,
    next_entity: u64,
}

impl WorldState {
    pub fn new(catalog: Arc<RelationCatalog>) -> Self {
        Self {
            catalog,
            entities: BTreeMap::new(),
            facts: Vec::new(),
            active: BTreeMap::new(),
            step: 0,
            next_entity: 0,
        }
    }

    pub fn catalog(&self) -> &Arc<RelationCatalog> {
        &self.catalog
    }

    pub fn step(&self) -> usize {
        self.step
    }

    pub fn advance_step(&mut self) {
        self.step += 1;
    }

    pub fn entities(&self) -> impl Iterator<Item = &EntityRecord> {
        self.entities.values()
    }

    pub fn entity(&self, id: EntityId) -> Option<&EntityRecord> {
        self.entities.get(&id)
    }

    pub fn entity_count(&self) -> usize {
        self.entities.len()
    }

    pub fn facts(&self) -> &[Fact] {
        &self.facts
    }

    pub fn active_facts(&self, relation: &str) -> impl Iterator<Item = &Fact> {
        self.active
            .get(relation)
            .into_iter()
            .flatten()
            .map(move |&i| &self.facts[i])
    }

    /// Creates a fresh entity with the next free id.
    pub fn new_entity(
        &mut self,
        etype: impl Into<String>,
        canonical_name: impl Into<String>,
        alt_surface_forms: Vec<String>,
        pronoun: Pronoun,
    ) -> EntityId {
        let id = EntityId(self.next_entity);
        self.next_entity += 1;
        self.entities.insert(
            id,
            EntityRecord {
                id,
                etype: etype.into(),
                canonical_name: canonical_name.into(),
                alt_surface_forms,
                pronoun,
            },
        );
        id
    }

    /// Re-inserts an entity with a fixed id during trace replay.
    pub fn restore_entity(&mut self, record: EntityRecord) {
        self.next_entity = self.next_entity.max(record.id.0 + 1);
        self.entities.insert(record.id, record);
    }

    fn check_args(&self, relation: &str, args: &[Value]) -> Result<(), KbError> {
        let schema = self
            .catalog
            .get(relation)
            .ok_or_else(|| KbError::UnknownRelation(relation.to_string()))?;
        if schema.arity() != args.len() {
            return Err(KbError::ArityMismatch {
                relation: relation.to_string(),
                expected: schema.arity(),
                got: args.len(),
            });
        }
        for (i, (arg, ty)) in args.iter().zip(&schema.arg_types).enumerate() {
            match (arg, ty) {
                (Value::Entity(id), ArgType::Entity(t)) => {
                    let rec = self.entities.get(id).ok_or(KbError::DanglingEntity(*id))?;
                    if &rec.etype != t {
                        return Err(KbError::TypeMismatch {
                            relation: relation.to_string(),
                            position: i,
                            expected: t.clone(),
                            got: rec.etype.clone(),
                        });
                    }
                }
                (Value::Literal(l), ArgType::Literal(t)) => {
                    if &l.kind != t {
                        return Err(KbError::TypeMismatch {
                            relation: relation.to_string(),
                            position: i,
                            expected: t.clone(),
                            got: l.kind.clone(),
                        });
                    }
                }
                (Value::Entity(_), ArgType::Literal(t)) => {
                    return Err(KbError::TypeMismatch {
                        relation: relation.to_string(),
                        position: i,
                        expected: t.clone(),
                        got: "entity".to_string(),
                    });
                }
                (Value::Literal(l), ArgType::Entity(t)) => {
                    return Err(KbError::TypeMismatch {
                        relation: relation.to_string(),
                        position: i,
                        expected: t.clone(),
                        got: format!("literal {}", l.kind),
                    });
                }
            }
        }
        Ok(())
    }

    /// Asserts a fact at the current step. Functional relations retract a
    /// conflicting active fact first; asserting an exact active duplicate
    /// is a no-op.
    pub fn assert_fact(&mut self, relation: &str, args: Vec<Value>) -> Result<(), KbError> {
        self.check_args(relation, &args)?;
        if self
            .active_facts(relation)
            .any(|f| f.args == args)
        {
            return Ok(());
        }
        let functional_over = self.catalog[relation].functional_over.clone();
        if let Some(key) = functional_over {
            let step = self.step;
            let conflicting: Vec<usize> = self
                .active
                .get(relation)
                .map(|idxs| {
                    idxs.iter()
                        .copied()
                        .filter(|&i| {
                            key.iter().all(|&k| self.facts[i].args[k] == args[k])
                        })
                        .collect()
                })
                .unwrap_or_default();
            for i in conflicting {
                self.facts[i].retracted_at = Some(step);
                self.active.get_mut(relation).unwrap().retain(|&j| j != i);
            }
        }
        let idx = self.facts.len();
        self.facts.push(Fact {
            relation: relation.to_string(),
            args,
            asserted_at: self.step,
            retracted_at: None,
        });
        self.active.entry(relation.to_string()).or_default().push(idx);
        Ok(())
    }

    /// Retracts the active fact with exactly these arguments.
    pub fn retract_fact(&mut self, relation: &str, args: &[Value]) -> Result<(), KbError> {
        self.check_args(relation, args)?;
        let idx = self
            .active
            .get(relation)
            .and_then(|idxs| idxs.iter().copied().find(|&i| self.facts[i].args == args));
        match idx {
            Some(i) => {
                self.facts[i].retracted_at = Some(self.step);
                self.active.get_mut(relation).unwrap().retain(|&j| j != i);
                Ok(())
            }
            None => Err(KbError::NoSuchActiveFact {
                relation: relation.to_string(),
                args: args
                    .iter()
                    .map(|v| format!("{v:?}"))
                    .collect::<Vec<_>>()
                    .join(", "),
            }),
        }
    }

    /// Retracts every active fact that mentions the given entity and
    /// returns the (relation, args) pairs retracted, in assertion order.
    pub fn retract_all_about(&mut self, id: EntityId) -> Vec<(String, Vec<Value>)> {
        let target = Value::Entity(id);
        let mut hit: Vec<usize> = self
            .active
            .values()
            .flatten()
            .copied()
            .filter(|&i| self.facts[i].args.contains(&target))
            .collect();
        hit.sort_unstable();
        let mut out = Vec::with_capacity(hit.len());
        for i in hit {
            self.facts[i].retracted_at = Some(self.step);
            let rel = self.facts[i].relation.clone();
            self.active.get_mut(&rel).unwrap().retain(|&j| j != i);
            out.push((rel, self.facts[i].args.clone()));
        }
        out
    }

    /// Evaluates a conjunctive query against the active facts. Pure.
    pub fn execute_query(&self, query: &Query) -> Result<BTreeSet<Value>, KbError> {
        query.validate(&self.catalog)?;
        let mut bindings: Vec<Binding> = vec![Binding::default()];
        for atom in &query.atoms {
            let mut next = Vec::new();
            for b in &bindings {
                for fact in self.active_facts(&atom.relation) {
                    if let Some(extended) = b.unify(atom, fact) {
                        next.push(extended);
                    }
                }
            }
            next.sort();
            next.dedup();
            bindings = next;
            if bindings.is_empty() {
                break;
            }
        }
        Ok(bindings.into_iter().filter_map(|b| b.x).collect())
    }
}

/// Query variable: the answer variable `x` or the single existential `y`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Var {
    Answer,
    Existential,
}

impl Var {
    pub fn symbol(self) -> &'static str {
        match self {
            Var::Answer => "?x",
            Var::Existential => "?y",
        }
    }
}

/// Term inside a query atom.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Term {
    Var(Var),
    Const(Value),
}

/// One atom of a conjunctive query: a relation applied to terms.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Atom {
    pub relation: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn has_var(&self, v: Var) -> bool {
        self.args.iter().any(|t| matches!(t, Term::Var(w) if *w == v))
    }
}

/// Question category by the number and shape of relations involved.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum QuestionCategory {
    #[serde(rename = "single_entity_single_relation")]
    SingleEntitySingleRelation,
    #[serde(rename = "multi_entity_single_relation")]
    MultiEntitySingleRelation,
    #[serde(rename = "multi_entity_two_relations")]
    MultiEntityTwoRelations,
    #[serde(rename = "multi_entity_three_relations")]
    MultiEntityThreeRelations,
}

impl QuestionCategory {
    pub const ALL: [QuestionCategory; 4] = [
        QuestionCategory::SingleEntitySingleRelation,
        QuestionCategory::MultiEntitySingleRelation,
        QuestionCategory::MultiEntityTwoRelations,
        QuestionCategory::MultiEntityThreeRelations,
    ];

    pub fn atom_count(self) -> usize {
        match self {
            QuestionCategory::SingleEntitySingleRelation => 1,
            QuestionCategory::MultiEntitySingleRelation => 1,
            QuestionCategory::MultiEntityTwoRelations => 2,
            QuestionCategory::MultiEntityThreeRelations => 3,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            QuestionCategory::SingleEntitySingleRelation => "single_entity_single_relation",
            QuestionCategory::MultiEntitySingleRelation => "multi_entity_single_relation",
            QuestionCategory::MultiEntityTwoRelations => "multi_entity_two_relations",
            QuestionCategory::MultiEntityThreeRelations => "multi_entity_three_relations",
        }
    }
}

/// A conjunctive query `λx.[∃y.] A1 ∧ ... ∧ An` with 1..=3 atoms.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Query {
    pub atoms: Vec<Atom>,
    pub category: QuestionCategory,
}

impl Query {
    pub fn uses_existential(&self) -> bool {
        self.atoms.iter().any(|a| a.has_var(Var::Existential))
    }

    /// Checks the structural invariants: declared relations, correct
    /// arities, answer variable present, atom count matching the category,
    /// connectedness, and the functional-relation shape for category 1.
    pub fn validate(&self, catalog: &RelationCatalog) -> Result<(), KbError> {
        if self.atoms.is_empty() || self.atoms.len() > 3 {
            return Err(KbError::MalformedQuery(format!(
                "{} atoms (expected 1..=3)",
                self.atoms.len()
            )));
        }
        if self.atoms.len() != self.category.atom_count() {
            return Err(KbError::MalformedQuery(format!(
                "category {:?} requires {} atoms, got {}",
                self.category,
                self.category.atom_count(),
                self.atoms.len()
            )));
        }
        for atom in &self.atoms {
            let schema = catalog
                .get(&atom.relation)
                .ok_or_else(|| KbError::UnknownRelation(atom.relation.clone()))?;
            if schema.arity() != atom.args.len() {
                return Err(KbError::ArityMismatch {
                    relation: atom.relation.clone(),
                    expected: schema.arity(),
                    got: atom.args.len(),
                });
            }
        }
        if !self.atoms.iter().any(|a| a.has_var(Var::Answer)) {
            return Err(KbError::MalformedQuery(
                "answer variable ?x does not occur".to_string(),
            ));
        }
        // Connectedness: with only x and y available, the conjunction is
        // connected iff every atom carries a variable and, when y occurs at
        // all, some atom links x and y.
        if self.atoms.len() > 1 {
            let every_atom_has_var = self
                .atoms
                .iter()
                .all(|a| a.has_var(Var::Answer) || a.has_var(Var::Existential));
            let linked = !self.uses_existential()
                || self
                    .atoms
                    .iter()
                    .any(|a| a.has_var(Var::Answer) && a.has_var(Var::Existential));
            if !every_atom_has_var || !linked {
                return Err(KbError::MalformedQuery(
                    "atoms do not form a connected conjunction".to_string(),
                ));
            }
        }
        if self.category == QuestionCategory::SingleEntitySingleRelation {
            let atom = &self.atoms[0];
            let schema = &catalog[&atom.relation];
            let key = schema.functional_over.as_ref().ok_or_else(|| {
                KbError::MalformedQuery(format!(
                    "category-1 query over non-functional relation '{}'",
                    atom.relation
                ))
            })?;
            for (i, term) in atom.args.iter().enumerate() {
                let is_key = key.contains(&i);
                match term {
                    Term::Const(_) if is_key => {}
                    Term::Var(Var::Answer) if !is_key => {}
                    _ => {
                        return Err(KbError::MalformedQuery(
                            "category-1 query must bind all key arguments to constants \
                             and the answer to the value position"
                                .to_string(),
                        ))
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
struct Binding {
    x: Option<Value>,
    y: Option<Value>,
}

impl Binding {
    fn get(&self, v: Var) -> Option<&Value> {
        match v {
            Var::Answer => self.x.as_ref(),
            Var::Existential => self.y.as_ref(),
        }
    }

    fn set(&mut self, v: Var, val: Value) {
        match v {
            Var::Answer => self.x = Some(val),
            Var::Existential => self.y = Some(val),
        }
    }

    fn unify(&self, atom: &Atom, fact: &Fact) -> Option<Binding> {
        let mut out = self.clone();
        for (term, actual) in atom.args.iter().zip(&fact.args) {
            match term {
                Term::Const(expected) => {
                    if expected != actual {
                        return None;
                    }
                }
                Term::Var(v) => match out.get(*v) {
                    Some(bound) if bound != actual => return None,
                    Some(_) => {}
                    None => out.set(*v, actual.clone()),
                },
            }
        }
        Some(out)
    }
}

/// Replays trace events in order and returns the state after `step`.
/// The trace itself lives in the `world` module; this helper applies one
/// event's already-concrete effect records.
pub fn apply_effect_record(state: &mut WorldState, effect: &EffectRecord) -> Result<(), KbError> {
    match effect {
        EffectRecord::NewEntity { record } => {
            state.restore_entity(record.clone());
            Ok(())
        }
        EffectRecord::Assert { relation, args } => state.assert_fact(relation, args.clone()),
        EffectRecord::Retract { relation, args } => state.retract_fact(relation, args),
    }
}

/// A concrete, replayable effect as applied during simulation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum EffectRecord {
    NewEntity { record: EntityRecord },
    Assert { relation: String, args: Vec<Value> },
    Retract { relation: String, args: Vec<Value> },
}
