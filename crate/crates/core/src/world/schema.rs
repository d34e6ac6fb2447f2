//! Declarative world definitions: parsing and validation of
//! `*.world.json` documents into a typed [`WorldDefinition`].
//!
//! The document format has six top-level sections — `version`, `name`,
//! `entity_types`, `relations`, `events`, `realizations`, `weights` — and
//! is described field-by-field in `docs/world-format.md`.

use crate::kb::{ArgType, RelationCatalog, RelationSchema};
use crate::world::pools::{PoolError, PoolSet, PoolSource};
use serde::Deserialize;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum WorldError {
    #[error("unknown world '{0}' (built-ins: meeting, homework, software, department, shopping)")]
    UnknownWorld(String),
    #[error("world schema error at {location}: {message}")]
    Schema { location: String, message: String },
    #[error("failed to parse world document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Pool(#[from] PoolError),
    #[error("failed to read {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

fn schema_err(location: impl Into<String>, message: impl Into<String>) -> WorldError {
    WorldError::Schema { location: location.into(), message: message.into() }
}

// ---------------------------------------------------------------------------
// Raw document shape (serde)
// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWorld {
    version: u32,
    name: String,
    entity_types: Vec<RawType>,
    relations: Vec<RawRelation>,
    events: Vec<RawEvent>,
    realizations: RawRealizations,
    weights: RawWeights,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawType {
    name: String,
    #[serde(default = "default_kind")]
    kind: String,
    pool: String,
    #[serde(default)]
    human: bool,
    /// Unary relation asserted on creation; its retraction removes the
    /// entity from play. Required for entity kinds.
    presence: Option<String>,
    /// Wh-phrase used when asking for entities of this type.
    wh: Option<String>,
    recency_phrase: Option<String>,
    definite: Option<RawDefinite>,
    /// Literal kinds only: sample values without replacement per story.
    #[serde(default)]
    unique: bool,
}

fn default_kind() -> String {
    "entity".to_string()
}

#[derive(Debug, Deserialize, Clone)]
#[serde(deny_unknown_fields)]
struct RawDefinite {
    relation: String,
    pattern: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRelation {
    name: String,
    args: Vec<String>,
    functional_over: Option<Vec<usize>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEvent {
    name: String,
    kind: String,
    #[serde(default)]
    pre: Vec<Vec<String>>,
    #[serde(default)]
    forbid: Vec<Vec<String>>,
    #[serde(default)]
    new: Vec<RawNew>,
    #[serde(default)]
    effects: Vec<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNew {
    var: String,
    #[serde(rename = "type")]
    type_name: String,
    distinct_from: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRealizations {
    events: BTreeMap<String, Vec<String>>,
    questions: BTreeMap<String, Vec<RawQuestionEntry>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawQuestionEntry {
    answer: usize,
    #[serde(default)]
    given: Vec<usize>,
    wh: String,
    subject: Option<String>,
    vp: Vec<String>,
    #[serde(default)]
    vp_plural: Vec<String>,
    #[serde(default)]
    np: Vec<String>,
    /// Given positions whose slot may host a relative noun phrase instead
    /// of a constant. Defaults to all given positions; set to [] when the
    /// slot is a grammatical subject and a plural phrase would not agree.
    join: Option<Vec<usize>>,
    /// True if the vp reads as a plain predicate ("is attending X") and can
    /// follow "and" in a conjoined question; aux-inverted phrasings
    /// ("do I have for X") cannot.
    #[serde(default)]
    conj: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWeights {
    events: BTreeMap<String, f64>,
    question_categories: Vec<f64>,
}

// ---------------------------------------------------------------------------
// Validated definition
// ---------------------------------------------------------------------------

/// Entity type declaration.
#[derive(Clone, Debug)]
pub struct EntityTypeDef {
    pub name: String,
    pub human: bool,
    pub pool: String,
    pub presence: String,
    pub wh: String,
    pub recency_phrase: Option<String>,
    pub definite: Option<DefiniteDef>,
}

/// Attribute-based definite description ("the meeting about {}").
#[derive(Clone, Debug)]
pub struct DefiniteDef {
    pub relation: String,
    pub pattern: String,
}

/// Literal kind declaration.
#[derive(Clone, Debug)]
pub struct LiteralTypeDef {
    pub name: String,
    pub pool: String,
    pub unique: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EventKind {
    Introduce,
    Update,
    StateChange,
}

/// Pattern term in an event precondition.
#[derive(Clone, Debug, PartialEq)]
pub enum PatternTerm {
    Var(String),
    Wildcard,
}

#[derive(Clone, Debug)]
pub struct PatternAtom {
    pub relation: String,
    pub terms: Vec<PatternTerm>,
}

#[derive(Clone, Debug)]
pub struct NewDecl {
    pub var: String,
    pub type_name: String,
    pub distinct_from: Option<String>,
}

#[derive(Clone, Debug)]
pub enum EffectDecl {
    Assert { relation: String, vars: Vec<String> },
    Retract { relation: String, vars: Vec<String> },
    /// Retract every active fact about the entity, including its presence.
    Destroy { var: String },
}

/// One event template: preconditions bind variables against the active
/// state, effects mutate it, and realization templates verbalize it.
#[derive(Clone, Debug)]
pub struct EventTemplate {
    pub name: String,
    pub kind: EventKind,
    pub pre: Vec<PatternAtom>,
    pub forbid: Vec<PatternAtom>,
    pub new: Vec<NewDecl>,
    pub effects: Vec<EffectDecl>,
    pub realizations: Vec<String>,
    pub weight: f64,
}

/// One question surface pattern for a relation, keyed by which argument is
/// asked for (`answer`) and which arguments are expressed (`given`).
/// Unexpressed non-answer arguments are existentially quantified.
#[derive(Clone, Debug)]
pub struct QuestionEntry {
    pub answer: usize,
    pub given: Vec<usize>,
    pub wh: String,
    /// Plural subject phrase when this (unary) relation restricts the
    /// answer set of another clause, e.g. "which undergraduates".
    pub subject: Option<String>,
    pub vp: Vec<String>,
    pub vp_plural: Vec<String>,
    pub np: Vec<String>,
    /// Given positions that may host a join noun phrase.
    pub join_slots: Vec<usize>,
    /// Usable as a non-first conjunct in an intersection question.
    pub conj: bool,
}

/// A fully validated world: schema, event templates, surface templates,
/// pools, and sampling weights. Immutable after load.
#[derive(Clone, Debug)]
pub struct WorldDefinition {
    pub name: String,
    pub version: u32,
    pub entity_types: BTreeMap<String, EntityTypeDef>,
    pub literal_types: BTreeMap<String, LiteralTypeDef>,
    pub catalog: Arc<RelationCatalog>,
    pub events: Vec<EventTemplate>,
    pub question_templates: BTreeMap<String, Vec<QuestionEntry>>,
    pub category_weights: [f64; 4],
    pub pools: PoolSet,
}

impl WorldDefinition {
    pub fn entity_type(&self, name: &str) -> Option<&EntityTypeDef> {
        self.entity_types.get(name)
    }

    pub fn is_entity_type(&self, name: &str) -> bool {
        self.entity_types.contains_key(name)
    }
}

const BUILTIN_NAMES: [&str; 5] = ["meeting", "homework", "software", "department", "shopping"];

macro_rules! builtin {
    ($name:literal) => {
        ($name, include_str!(concat!("../../../../worlds/", $name, ".world.json")))
    };
}

const BUILTINS: [(&str, &str); 5] = [
    builtin!("meeting"),
    builtin!("homework"),
    builtin!("software"),
    builtin!("department"),
    builtin!("shopping"),
];

pub fn builtin_world_names() -> &'static [&'static str] {
    &BUILTIN_NAMES
}

/// Loads a world by built-in name or from a `*.world.json` path.
pub fn load_world(source: &str, pools: &PoolSource) -> Result<WorldDefinition, WorldError> {
    if let Some((_, body)) = BUILTINS.iter().find(|(n, _)| *n == source) {
        return parse_world(body, pools);
    }
    if source.ends_with(".json") {
        let body = std::fs::read_to_string(source)
            .map_err(|e| WorldError::Io { path: source.to_string(), source: e })?;
        return parse_world(&body, pools);
    }
    Err(WorldError::UnknownWorld(source.to_string()))
}

/// Parses and validates a world document from its JSON text.
pub fn parse_world(body: &str, pools: &PoolSource) -> Result<WorldDefinition, WorldError> {
    let raw: RawWorld = serde_json::from_str(body)?;
    validate(raw, pools)
}

fn parse_var(loc: &str, s: &str) -> Result<String, WorldError> {
    match s.strip_prefix('?') {
        Some(v) if !v.is_empty() && v != "_" => Ok(v.to_string()),
        _ => Err(schema_err(loc, format!("expected a '?var' reference, got '{s}'"))),
    }
}

fn parse_pattern_term(loc: &str, s: &str) -> Result<PatternTerm, WorldError> {
    if s == "?_" {
        return Ok(PatternTerm::Wildcard);
    }
    Ok(PatternTerm::Var(parse_var(loc, s)?))
}

fn parse_pattern_atom(
    loc: &str,
    raw: &[String],
    catalog: &RelationCatalog,
) -> Result<PatternAtom, WorldError> {
    let (rel, rest) = raw
        .split_first()
        .ok_or_else(|| schema_err(loc, "empty atom"))?;
    let schema = catalog
        .get(rel)
        .ok_or_else(|| schema_err(loc, format!("unknown relation '{rel}'")))?;
    if schema.arity() != rest.len() {
        return Err(schema_err(
            loc,
            format!("relation '{rel}' expects {} arguments, got {}", schema.arity(), rest.len()),
        ));
    }
    let terms = rest
        .iter()
        .map(|t| parse_pattern_term(loc, t))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PatternAtom { relation: rel.clone(), terms })
}

fn slot_vars(template: &str) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    let bytes = template.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'{' {
            if let Some(j) = template[i + 1..].find('}') {
                out.insert(template[i + 1..i + 1 + j].to_string());
                i += j + 2;
                continue;
            }
        }
        i += 1;
    }
    out
}

fn validate(raw: RawWorld, pool_source: &PoolSource) -> Result<WorldDefinition, WorldError> {
    let mut entity_types = BTreeMap::new();
    let mut literal_types = BTreeMap::new();
    let mut pool_names = BTreeSet::new();

    for (i, t) in raw.entity_types.iter().enumerate() {
        let loc = format!("entity_types[{i}] ({})", t.name);
        pool_names.insert(t.pool.clone());
        match t.kind.as_str() {
            "entity" => {
                let presence = t
                    .presence
                    .clone()
                    .ok_or_else(|| schema_err(&loc, "entity type needs a presence relation"))?;
                let wh = t
                    .wh
                    .clone()
                    .ok_or_else(|| schema_err(&loc, "entity type needs a wh phrase"))?;
                entity_types.insert(
                    t.name.clone(),
                    EntityTypeDef {
                        name: t.name.clone(),
                        human: t.human,
                        pool: t.pool.clone(),
                        presence,
                        wh,
                        recency_phrase: t.recency_phrase.clone(),
                        definite: t.definite.clone().map(|d| DefiniteDef {
                            relation: d.relation,
                            pattern: d.pattern,
                        }),
                    },
                );
            }
            "literal" => {
                literal_types.insert(
                    t.name.clone(),
                    LiteralTypeDef {
                        name: t.name.clone(),
                        pool: t.pool.clone(),
                        unique: t.unique,
                    },
                );
            }
            other => return Err(schema_err(&loc, format!("unknown kind '{other}'"))),
        }
    }

    // Relations.
    let mut catalog = RelationCatalog::new();
    for (i, r) in raw.relations.iter().enumerate() {
        let loc = format!("relations[{i}] ({})", r.name);
        if r.args.is_empty() || r.args.len() > 3 {
            return Err(schema_err(&loc, format!("arity {} outside 1..=3", r.args.len())));
        }
        let mut arg_types = Vec::new();
        for a in &r.args {
            if entity_types.contains_key(a) {
                arg_types.push(ArgType::Entity(a.clone()));
            } else if literal_types.contains_key(a) {
                arg_types.push(ArgType::Literal(a.clone()));
            } else {
                return Err(schema_err(&loc, format!("undeclared argument type '{a}'")));
            }
        }
        let functional_over = match &r.functional_over {
            Some(key) => {
                let set: BTreeSet<usize> = key.iter().copied().collect();
                if set.iter().any(|&k| k >= r.args.len()) {
                    return Err(schema_err(&loc, "functional key index out of range"));
                }
                if set.len() >= r.args.len() {
                    return Err(schema_err(&loc, "functional key covers every argument"));
                }
                Some(set)
            }
            None => None,
        };
        if catalog
            .insert(
                r.name.clone(),
                RelationSchema { name: r.name.clone(), arg_types, functional_over },
            )
            .is_some()
        {
            return Err(schema_err(&loc, "duplicate relation"));
        }
    }

    // Presence and definite cross-references.
    for t in entity_types.values() {
        let loc = format!("entity_types ({})", t.name);
        let presence = catalog
            .get(&t.presence)
            .ok_or_else(|| schema_err(&loc, format!("unknown presence relation '{}'", t.presence)))?;
        if presence.arg_types != vec![ArgType::Entity(t.name.clone())] {
            return Err(schema_err(
                &loc,
                format!("presence relation '{}' must be unary over {}", t.presence, t.name),
            ));
        }
        if let Some(d) = &t.definite {
            let rel = catalog
                .get(&d.relation)
                .ok_or_else(|| schema_err(&loc, format!("unknown definite relation '{}'", d.relation)))?;
            if rel.arity() != 2 || rel.arg_types[0] != ArgType::Entity(t.name.clone()) {
                return Err(schema_err(
                    &loc,
                    format!("definite relation '{}' must be binary with {} first", d.relation, t.name),
                ));
            }
            if !d.pattern.contains("{}") {
                return Err(schema_err(&loc, "definite pattern must contain '{}'"));
            }
        }
    }

    // Events.
    let mut events = Vec::new();
    for (i, e) in raw.events.iter().enumerate() {
        let loc = format!("events[{i}] ({})", e.name);
        let kind = match e.kind.as_str() {
            "introduce" => EventKind::Introduce,
            "update" => EventKind::Update,
            "state-change" => EventKind::StateChange,
            other => return Err(schema_err(&loc, format!("unknown event kind '{other}'"))),
        };
        let pre = e
            .pre
            .iter()
            .map(|a| parse_pattern_atom(&format!("{loc}.pre"), a, &catalog))
            .collect::<Result<Vec<_>, _>>()?;
        let forbid = e
            .forbid
            .iter()
            .map(|a| parse_pattern_atom(&format!("{loc}.forbid"), a, &catalog))
            .collect::<Result<Vec<_>, _>>()?;

        let mut bound: BTreeSet<String> = pre
            .iter()
            .flat_map(|a| a.terms.iter())
            .filter_map(|t| match t {
                PatternTerm::Var(v) => Some(v.clone()),
                PatternTerm::Wildcard => None,
            })
            .collect();

        let mut new = Vec::new();
        for n in &e.new {
            let nloc = format!("{loc}.new ({})", n.var);
            if bound.contains(&n.var) {
                return Err(schema_err(&nloc, "variable already bound by a precondition"));
            }
            if !entity_types.contains_key(&n.type_name) && !literal_types.contains_key(&n.type_name)
            {
                return Err(schema_err(&nloc, format!("undeclared type '{}'", n.type_name)));
            }
            if let Some(d) = &n.distinct_from {
                if !bound.contains(d) {
                    return Err(schema_err(&nloc, format!("distinct_from '?{d}' is not bound")));
                }
                if entity_types.contains_key(&n.type_name) {
                    return Err(schema_err(&nloc, "distinct_from only applies to literals"));
                }
            }
            bound.insert(n.var.clone());
            new.push(NewDecl {
                var: n.var.clone(),
                type_name: n.type_name.clone(),
                distinct_from: n.distinct_from.clone(),
            });
        }

        let mut effects = Vec::new();
        let mut asserted_vars: BTreeSet<String> =
            new.iter().map(|n| n.var.clone()).collect();
        for (j, eff) in e.effects.iter().enumerate() {
            let eloc = format!("{loc}.effects[{j}]");
            let (op, rest) = eff
                .split_first()
                .ok_or_else(|| schema_err(&eloc, "empty effect"))?;
            match op.as_str() {
                "assert" | "retract" => {
                    let (rel, args) = rest
                        .split_first()
                        .ok_or_else(|| schema_err(&eloc, "missing relation"))?;
                    let schema = catalog
                        .get(rel)
                        .ok_or_else(|| schema_err(&eloc, format!("unknown relation '{rel}'")))?;
                    if schema.arity() != args.len() {
                        return Err(schema_err(
                            &eloc,
                            format!(
                                "relation '{rel}' expects {} arguments, got {}",
                                schema.arity(),
                                args.len()
                            ),
                        ));
                    }
                    let mut vars = Vec::new();
                    for (k, a) in args.iter().enumerate() {
                        let v = parse_var(&eloc, a)?;
                        if !bound.contains(&v) {
                            return Err(schema_err(&eloc, format!("unbound variable '?{v}'")));
                        }
                        // Arg type compatibility is var-type checkable only
                        // for new vars; precondition vars are checked via
                        // their source relation positions at runtime by the
                        // KB type checker.
                        if let Some(decl) = new.iter().find(|n| n.var == v) {
                            let expected = schema.arg_types[k].type_name();
                            if decl.type_name != expected {
                                return Err(schema_err(
                                    &eloc,
                                    format!(
                                        "variable '?{v}' has type {} but position {k} of '{rel}' needs {expected}",
                                        decl.type_name
                                    ),
                                ));
                            }
                        }
                        vars.push(v);
                    }
                    if op == "assert" {
                        asserted_vars.extend(vars.iter().cloned());
                        effects.push(EffectDecl::Assert { relation: rel.clone(), vars });
                    } else {
                        effects.push(EffectDecl::Retract { relation: rel.clone(), vars });
                    }
                }
                "destroy" => {
                    let v = match rest {
                        [one] => parse_var(&eloc, one)?,
                        _ => return Err(schema_err(&eloc, "destroy takes exactly one variable")),
                    };
                    if !bound.contains(&v) {
                        return Err(schema_err(&eloc, format!("unbound variable '?{v}'")));
                    }
                    effects.push(EffectDecl::Destroy { var: v });
                }
                other => return Err(schema_err(&eloc, format!("unknown effect '{other}'"))),
            }
        }

        let realizations = raw
            .realizations
            .events
            .get(&e.name)
            .cloned()
            .ok_or_else(|| schema_err(&loc, "no realization templates"))?;
        if realizations.is_empty() {
            return Err(schema_err(&loc, "realization template list is empty"));
        }
        // Every asserted value must be surfaced so answers always have a
        // mention span; new entities must be surfaced so they can be
        // referred back to.
        let mut must_surface = asserted_vars;
        must_surface.extend(new.iter().map(|n| n.var.clone()));
        for (j, tpl) in realizations.iter().enumerate() {
            let slots = slot_vars(tpl);
            for s in &slots {
                if !bound.contains(s) {
                    return Err(schema_err(
                        format!("{loc}.realizations[{j}]"),
                        format!("template slot '{{{s}}}' is unbound"),
                    ));
                }
            }
            for v in &must_surface {
                if !slots.contains(v) {
                    return Err(schema_err(
                        format!("{loc}.realizations[{j}]"),
                        format!("asserted value '?{v}' must appear in the template"),
                    ));
                }
            }
        }

        let weight = *raw
            .weights
            .events
            .get(&e.name)
            .ok_or_else(|| schema_err(&loc, "no weight"))?;
        if !(weight > 0.0) {
            return Err(schema_err(&loc, "weight must be > 0"));
        }

        events.push(EventTemplate {
            name: e.name.clone(),
            kind,
            pre,
            forbid,
            new,
            effects,
            realizations,
            weight,
        });
    }

    for name in raw.realizations.events.keys() {
        if !events.iter().any(|e| &e.name == name) {
            return Err(schema_err(
                format!("realizations.events ({name})"),
                "realization for undeclared event",
            ));
        }
    }
    for name in raw.weights.events.keys() {
        if !events.iter().any(|e| &e.name == name) {
            return Err(schema_err(format!("weights.events ({name})"), "weight for undeclared event"));
        }
    }

    // Question templates.
    let mut question_templates: BTreeMap<String, Vec<QuestionEntry>> = BTreeMap::new();
    for (rel, entries) in &raw.realizations.questions {
        let schema = catalog
            .get(rel)
            .ok_or_else(|| {
                schema_err(format!("realizations.questions ({rel})"), "unknown relation")
            })?;
        let mut out = Vec::new();
        for (i, q) in entries.iter().enumerate() {
            let loc = format!("realizations.questions ({rel})[{i}]");
            let arity = schema.arity();
            if q.answer >= arity {
                return Err(schema_err(&loc, "answer position out of range"));
            }
            let given: BTreeSet<usize> = q.given.iter().copied().collect();
            if given.contains(&q.answer) {
                return Err(schema_err(&loc, "answer position listed in given"));
            }
            if given.iter().any(|&g| g >= arity) {
                return Err(schema_err(&loc, "given position out of range"));
            }
            // Unexpressed non-answer positions are existential; at most one
            // existential variable is available.
            if arity - 1 - given.len() > 1 {
                return Err(schema_err(&loc, "more than one unexpressed argument"));
            }
            if q.vp.is_empty() {
                return Err(schema_err(&loc, "vp template list is empty"));
            }
            for tpl in q.vp.iter().chain(&q.vp_plural).chain(&q.np) {
                let slots = slot_vars(tpl);
                for g in &given {
                    if !slots.contains(&g.to_string()) {
                        return Err(schema_err(
                            &loc,
                            format!("template '{tpl}' is missing slot '{{{g}}}'"),
                        ));
                    }
                }
                for s in &slots {
                    match s.parse::<usize>() {
                        Ok(idx) if given.contains(&idx) => {}
                        _ => {
                            return Err(schema_err(
                                &loc,
                                format!("template '{tpl}' uses slot '{{{s}}}' outside given"),
                            ))
                        }
                    }
                }
            }
            if q.subject.is_some() && arity != 1 {
                return Err(schema_err(&loc, "subject phrases only apply to unary relations"));
            }
            let join_slots = match &q.join {
                Some(slots) => {
                    if slots.iter().any(|s| !given.contains(s)) {
                        return Err(schema_err(&loc, "join position not in given"));
                    }
                    slots.clone()
                }
                None => given.iter().copied().collect(),
            };
            out.push(QuestionEntry {
                answer: q.answer,
                given: given.into_iter().collect(),
                wh: q.wh.clone(),
                subject: q.subject.clone(),
                vp: q.vp.clone(),
                vp_plural: q.vp_plural.clone(),
                np: q.np.clone(),
                join_slots,
                conj: q.conj,
            });
        }
        question_templates.insert(rel.clone(), out);
    }

    // Category weights.
    if raw.weights.question_categories.len() != 4 {
        return Err(schema_err("weights.question_categories", "expected 4 weights"));
    }
    if raw.weights.question_categories.iter().any(|w| !(w > &0.0)) {
        return Err(schema_err("weights.question_categories", "weights must be > 0"));
    }
    let mut category_weights = [0.0; 4];
    category_weights.copy_from_slice(&raw.weights.question_categories);

    // Resolve pools.
    let mut pools = PoolSet::new();
    for name in pool_names {
        pools.insert(name.clone(), pool_source.load(&name)?);
    }

    Ok(WorldDefinition {
        name: raw.name,
        version: raw.version,
        entity_types,
        literal_types,
        catalog: Arc::new(catalog),
        events,
        question_templates,
        category_weights,
        pools,
    })
}
