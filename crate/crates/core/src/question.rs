//! Question sampling, realization, and gold-answer computation.
//!
//! Questions are conjunctive queries sampled so that at least one answer
//! exists: every shape is seeded from an active fact, so the seed binding
//! witnesses non-emptiness. Four categories are supported:
//!
//! 1. single entity / single relation — a functional lookup, all key
//!    arguments bound to constants ("what is John's email address?");
//! 2. multiple entities / single relation — one atom, possibly with an
//!    unexpressed existential argument ("who is attending the standup?");
//! 3. multiple entities / two relations — either a chain through an
//!    existential join variable ("who is enrolled in courses that I am
//!    teaching?") or an intersection of two predicates on the answer;
//! 4. multiple entities / three relations — a chain plus a unary
//!    restriction on the answer ("which undergraduates are enrolled in
//!    courses that I am teaching?").

use crate::kb::{
    ArgType, Atom, Fact, KbError, Query, QuestionCategory, Term, Value, Var, WorldState,
};
use crate::realize::{
    choose_referring_expression, parse_template, DiscourseContext, RealizeError, RealizeView,
    Segment, Statement,
};
use crate::world::{QuestionEntry, WorldDefinition};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum QuestionError {
    #[error("no satisfiable {0:?} query exists in this state")]
    NoQueryAvailable(QuestionCategory),
    #[error("no question template for {relation} (answer {answer}, given {given:?})")]
    MissingQuestionTemplate { relation: String, answer: usize, given: Vec<usize> },
    #[error("answer {0:?} has no mention span")]
    UnmentionedAnswer(Value),
    #[error(transparent)]
    Kb(#[from] KbError),
    #[error(transparent)]
    Realize(#[from] RealizeError),
}

/// One mention occurrence of an answer value.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AnswerSpan {
    pub statement: usize,
    pub start: usize,
    pub end: usize,
}

/// One gold answer: the KB value, every surface it appeared under, and
/// every mention span up to the question position.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnswerEntry {
    pub entity: Value,
    pub surface_forms: Vec<String>,
    pub spans: Vec<AnswerSpan>,
}

/// A realized question with its query AST and gold answers.
#[derive(Clone, Debug, PartialEq)]
pub struct QuestionInstance {
    pub qid: String,
    /// Statement index after which the question appears.
    pub position: usize,
    pub category: QuestionCategory,
    pub query: Query,
    pub text: String,
    pub tokens: Vec<String>,
    pub answers: Vec<AnswerEntry>,
}

/// Running index of every mention in the story so far.
#[derive(Clone, Debug, Default)]
pub struct MentionIndex {
    map: BTreeMap<Value, Vec<(AnswerSpan, String)>>,
}

impl MentionIndex {
    pub fn note_statement(&mut self, index: usize, statement: &Statement) {
        for m in &statement.mentions {
            self.map.entry(m.entity.clone()).or_default().push((
                AnswerSpan { statement: index, start: m.start, end: m.end },
                m.surface.clone(),
            ));
        }
    }

    pub fn entry_for(&self, value: &Value) -> Option<AnswerEntry> {
        let spans = self.map.get(value)?;
        let mut surface_forms: Vec<String> = Vec::new();
        for (_, surface) in spans {
            if !surface_forms.contains(surface) {
                surface_forms.push(surface.clone());
            }
        }
        Some(AnswerEntry {
            entity: value.clone(),
            surface_forms,
            spans: spans.iter().map(|(s, _)| s.clone()).collect(),
        })
    }
}

fn arg_entity_type<'d>(def: &'d WorldDefinition, relation: &str, pos: usize) -> Option<&'d str> {
    match &def.catalog.get(relation)?.arg_types[pos] {
        ArgType::Entity(t) => Some(t),
        ArgType::Literal(_) => None,
    }
}

/// True when the entry asks for the value of a functional relation with
/// every key argument bound — the category-1 shape.
fn is_cat1_shape(def: &WorldDefinition, relation: &str, entry: &QuestionEntry) -> bool {
    let Some(schema) = def.catalog.get(relation) else { return false };
    let Some(key) = &schema.functional_over else { return false };
    !key.contains(&entry.answer)
        && entry.given.len() == schema.arity() - 1
        && key.iter().all(|k| entry.given.contains(k))
}

fn entries(def: &WorldDefinition) -> impl Iterator<Item = (&String, &QuestionEntry)> {
    def.question_templates
        .iter()
        .flat_map(|(rel, list)| list.iter().map(move |e| (rel, e)))
}

fn find_entry<'d>(
    def: &'d WorldDefinition,
    relation: &str,
    answer: usize,
    given: &BTreeSet<usize>,
) -> Option<&'d QuestionEntry> {
    def.question_templates.get(relation)?.iter().find(|e| {
        e.answer == answer && e.given.iter().copied().collect::<BTreeSet<_>>() == *given
    })
}

fn pick<'a, T>(items: &'a [T], rng: &mut ChaCha8Rng) -> Option<&'a T> {
    if items.is_empty() {
        None
    } else {
        Some(&items[rng.gen_range(0..items.len())])
    }
}

fn make_atom(relation: &str, arity: usize, answer: usize, consts: &BTreeMap<usize, Value>) -> Atom {
    let args = (0..arity)
        .map(|i| {
            if i == answer {
                Term::Var(Var::Answer)
            } else if let Some(v) = consts.get(&i) {
                Term::Const(v.clone())
            } else {
                Term::Var(Var::Existential)
            }
        })
        .collect();
    Atom { relation: relation.to_string(), args }
}

fn consts_from_fact(fact: &Fact, given: &[usize]) -> BTreeMap<usize, Value> {
    given.iter().map(|&i| (i, fact.args[i].clone())).collect()
}

/// Samples a satisfiable query of the requested category, or fails with
/// `NoQueryAvailable` after a bounded number of attempts.
pub fn sample_query(
    state: &WorldState,
    def: &WorldDefinition,
    category: QuestionCategory,
    rng: &mut ChaCha8Rng,
) -> Result<Query, QuestionError> {
    const ATTEMPTS: usize = 40;
    for _ in 0..ATTEMPTS {
        if let Some(query) = try_sample(state, def, category, rng) {
            debug_assert!(query.validate(&def.catalog).is_ok(), "sampled invalid query");
            return Ok(query);
        }
    }
    Err(QuestionError::NoQueryAvailable(category))
}

fn try_sample(
    state: &WorldState,
    def: &WorldDefinition,
    category: QuestionCategory,
    rng: &mut ChaCha8Rng,
) -> Option<Query> {
    match category {
        QuestionCategory::SingleEntitySingleRelation => {
            let candidates: Vec<(&String, &QuestionEntry)> = entries(def)
                .filter(|(rel, e)| {
                    is_cat1_shape(def, rel, e) && state.active_facts(rel).next().is_some()
                })
                .collect();
            let (rel, entry) = pick(&candidates, rng)?;
            let facts: Vec<&Fact> = state.active_facts(rel).collect();
            let fact = pick(&facts, rng)?;
            let consts = consts_from_fact(fact, &entry.given);
            let arity = def.catalog[rel.as_str()].arity();
            Some(Query {
                atoms: vec![make_atom(rel, arity, entry.answer, &consts)],
                category,
            })
        }
        QuestionCategory::MultiEntitySingleRelation => {
            let candidates: Vec<(&String, &QuestionEntry)> = entries(def)
                .filter(|(rel, e)| {
                    !is_cat1_shape(def, rel, e) && state.active_facts(rel).next().is_some()
                })
                .collect();
            let (rel, entry) = pick(&candidates, rng)?;
            let facts: Vec<&Fact> = state.active_facts(rel).collect();
            let fact = pick(&facts, rng)?;
            let consts = consts_from_fact(fact, &entry.given);
            let arity = def.catalog[rel.as_str()].arity();
            Some(Query {
                atoms: vec![make_atom(rel, arity, entry.answer, &consts)],
                category,
            })
        }
        QuestionCategory::MultiEntityTwoRelations => {
            if rng.gen::<f64>() < 0.7 {
                let (a1, a2, _) = sample_chain(state, def, rng, false)?;
                Some(Query { atoms: vec![a1, a2], category })
            } else {
                let (a1, a2) = sample_intersection(state, def, rng)?;
                Some(Query { atoms: vec![a1, a2], category })
            }
        }
        QuestionCategory::MultiEntityThreeRelations => {
            // The chain's joint witness also has to satisfy the unary
            // filter, otherwise the conjunction could be empty.
            let (a1, a2, witness) = sample_chain(state, def, rng, true)?;
            let xtype = match &witness {
                Value::Entity(id) => state.entity(*id)?.etype.clone(),
                Value::Literal(_) => return None,
            };
            let unaries: Vec<(&String, &QuestionEntry)> = entries(def)
                .filter(|(rel, e)| {
                    e.subject.is_some()
                        && def.catalog[rel.as_str()].arity() == 1
                        && arg_entity_type(def, rel, 0) == Some(xtype.as_str())
                        && rel.as_str() != a1.relation
                        && state
                            .active_facts(rel)
                            .any(|f| f.args[0] == witness)
                })
                .collect();
            let (urel, _) = pick(&unaries, rng)?;
            let unary = Atom { relation: urel.to_string(), args: vec![Term::Var(Var::Answer)] };
            Some(Query { atoms: vec![a1, a2, unary], category })
        }
    }
}

/// Samples `R1(..x.., y, consts) ∧ R2(y, consts)`. When `for_cat4` is set,
/// R1 additionally needs a plural verb phrase so a subject restriction can
/// replace its wh-phrase.
fn sample_chain(
    state: &WorldState,
    def: &WorldDefinition,
    rng: &mut ChaCha8Rng,
    for_cat4: bool,
) -> Option<(Atom, Atom, Value)> {
    let hosts: Vec<(&String, &QuestionEntry)> = entries(def)
        .filter(|(rel, e)| {
            let schema = &def.catalog[rel.as_str()];
            !is_cat1_shape(def, rel, e)
                && e.given.len() == schema.arity() - 1
                && (!for_cat4 || !e.vp_plural.is_empty())
                && e.join_slots
                    .iter()
                    .any(|&j| arg_entity_type(def, rel, j).is_some())
                && state.active_facts(rel).next().is_some()
        })
        .collect();
    let (rel1, e1) = pick(&hosts, rng)?;
    let joinable: Vec<usize> = e1
        .join_slots
        .iter()
        .copied()
        .filter(|&j| arg_entity_type(def, rel1, j).is_some())
        .collect();
    let join = *pick(&joinable, rng)?;
    let join_type = arg_entity_type(def, rel1, join)?;
    let facts1: Vec<&Fact> = state.active_facts(rel1).collect();
    let f1 = pick(&facts1, rng)?;
    let y_val = f1.args[join].clone();

    let seconds: Vec<(&String, &QuestionEntry)> = entries(def)
        .filter(|(rel, e)| {
            let schema = &def.catalog[rel.as_str()];
            !e.np.is_empty()
                && e.given.len() == schema.arity() - 1
                && arg_entity_type(def, rel, e.answer) == Some(join_type)
                && state
                    .active_facts(rel)
                    .any(|f| f.args[e.answer] == y_val)
        })
        .collect();
    let (rel2, e2) = pick(&seconds, rng)?;
    let facts2: Vec<&Fact> = state
        .active_facts(rel2)
        .filter(|f| f.args[e2.answer] == y_val)
        .collect();
    let f2 = pick(&facts2, rng)?;

    let mut consts1 = consts_from_fact(f1, &e1.given);
    consts1.remove(&join);
    let atom1 = {
        let arity = def.catalog[rel1.as_str()].arity();
        let args = (0..arity)
            .map(|i| {
                if i == e1.answer {
                    Term::Var(Var::Answer)
                } else if i == join {
                    Term::Var(Var::Existential)
                } else {
                    Term::Const(consts1[&i].clone())
                }
            })
            .collect();
        Atom { relation: rel1.to_string(), args }
    };
    let consts2 = consts_from_fact(f2, &e2.given);
    let atom2 = {
        let arity = def.catalog[rel2.as_str()].arity();
        let args = (0..arity)
            .map(|i| {
                if i == e2.answer {
                    Term::Var(Var::Existential)
                } else {
                    Term::Const(consts2[&i].clone())
                }
            })
            .collect();
        Atom { relation: rel2.to_string(), args }
    };
    if atom1 == atom2 {
        return None;
    }
    let witness = f1.args[e1.answer].clone();
    Some((atom1, atom2, witness))
}

/// Samples `R1(x, consts) ∧ R2(x, consts)` with both verb phrases usable
/// in a conjunction.
fn sample_intersection(
    state: &WorldState,
    def: &WorldDefinition,
    rng: &mut ChaCha8Rng,
) -> Option<(Atom, Atom)> {
    let firsts: Vec<(&String, &QuestionEntry)> = entries(def)
        .filter(|(rel, e)| {
            let schema = &def.catalog[rel.as_str()];
            e.conj
                && e.given.len() == schema.arity() - 1
                && arg_entity_type(def, rel, e.answer).is_some()
                && state.active_facts(rel).next().is_some()
        })
        .collect();
    let (rel1, e1) = pick(&firsts, rng)?;
    let xtype = arg_entity_type(def, rel1, e1.answer)?;
    let facts1: Vec<&Fact> = state.active_facts(rel1).collect();
    let f1 = pick(&facts1, rng)?;
    let x_val = f1.args[e1.answer].clone();

    let seconds: Vec<(&String, &QuestionEntry)> = entries(def)
        .filter(|(rel, e)| {
            let schema = &def.catalog[rel.as_str()];
            e.conj
                && e.given.len() == schema.arity() - 1
                && arg_entity_type(def, rel, e.answer) == Some(xtype)
                && state.active_facts(rel).any(|f| f.args[e.answer] == x_val)
        })
        .collect();
    let (rel2, e2) = pick(&seconds, rng)?;
    let facts2: Vec<&Fact> = state
        .active_facts(rel2)
        .filter(|f| f.args[e2.answer] == x_val)
        .collect();
    let f2 = pick(&facts2, rng)?;

    let build = |rel: &str, e: &QuestionEntry, consts: &BTreeMap<usize, Value>| {
        let arity = def.catalog[rel].arity();
        let args = (0..arity)
            .map(|i| {
                if i == e.answer {
                    Term::Var(Var::Answer)
                } else {
                    Term::Const(consts[&i].clone())
                }
            })
            .collect();
        Atom { relation: rel.to_string(), args }
    };
    let atom1 = build(rel1, e1, &consts_from_fact(f1, &e1.given));
    let atom2 = build(rel2, e2, &consts_from_fact(f2, &e2.given));
    if atom1 == atom2 {
        return None;
    }
    Some((atom1, atom2))
}

// ---------------------------------------------------------------------------
// Realization
// ---------------------------------------------------------------------------

struct AtomView<'q> {
    relation: &'q str,
    answer: usize,
    given: BTreeSet<usize>,
    consts: BTreeMap<usize, &'q Value>,
    join: Option<usize>,
}

fn analyze<'q>(atom: &'q Atom, answer_var: Var) -> AtomView<'q> {
    let mut view = AtomView {
        relation: &atom.relation,
        answer: 0,
        given: BTreeSet::new(),
        consts: BTreeMap::new(),
        join: None,
    };
    for (i, term) in atom.args.iter().enumerate() {
        match term {
            Term::Var(v) if *v == answer_var => view.answer = i,
            Term::Var(_) => view.join = Some(i),
            Term::Const(c) => {
                view.given.insert(i);
                view.consts.insert(i, c);
            }
        }
    }
    view
}

struct QuestionBuilder<'a> {
    builder: crate::realize::SurfaceBuilder,
    view: &'a RealizeView,
    ctx: &'a DiscourseContext,
    def: &'a WorldDefinition,
}

impl<'a> QuestionBuilder<'a> {
    fn fill(&mut self, template: &str, consts: &BTreeMap<usize, &Value>, np: Option<(usize, &str)>, rng: &mut ChaCha8Rng) {
        for segment in parse_template(template) {
            match segment {
                Segment::Text(t) => self.builder.push_text(t),
                Segment::Slot(slot) => {
                    let idx: usize = slot.parse().expect("validated numeric slot");
                    if let Some((join, text)) = np {
                        if idx == join {
                            self.builder.push_text(text);
                            continue;
                        }
                    }
                    let value = consts[&idx];
                    let (strategy, surface) =
                        choose_referring_expression(value, self.view, self.ctx, self.def, rng);
                    self.builder.push_mention(value.clone(), &surface, strategy);
                }
            }
        }
    }
}

/// Renders a rendered noun phrase for the second atom of a chain. Constant
/// slots inside the phrase use plain canonical surfaces so the phrase can
/// be embedded anywhere.
fn render_np(
    entry: &QuestionEntry,
    view_: &RealizeView,
    av: &AtomView<'_>,
    rng: &mut ChaCha8Rng,
) -> String {
    let template = &entry.np[rng.gen_range(0..entry.np.len())];
    let mut out = String::new();
    for segment in parse_template(template) {
        match segment {
            Segment::Text(t) => out.push_str(t),
            Segment::Slot(slot) => {
                let idx: usize = slot.parse().expect("validated numeric slot");
                let surface = match av.consts[&idx] {
                    Value::Literal(l) => l.text.clone(),
                    Value::Entity(id) => {
                        view_.entity(*id).map(|e| e.name.clone()).unwrap_or_default()
                    }
                };
                out.push_str(&surface);
            }
        }
    }
    out
}

fn lookup<'d>(
    def: &'d WorldDefinition,
    av: &AtomView<'_>,
    include_join: bool,
) -> Result<&'d QuestionEntry, QuestionError> {
    let mut given = av.given.clone();
    if include_join {
        if let Some(j) = av.join {
            given.insert(j);
        }
    }
    find_entry(def, av.relation, av.answer, &given).ok_or_else(|| {
        QuestionError::MissingQuestionTemplate {
            relation: av.relation.to_string(),
            answer: av.answer,
            given: given.into_iter().collect(),
        }
    })
}

/// Realizes a query as a natural-language question. Constants may surface
/// anaphorically (the discourse context is read, never written).
pub fn realize_question(
    query: &Query,
    view: &RealizeView,
    ctx: &DiscourseContext,
    def: &WorldDefinition,
    rng: &mut ChaCha8Rng,
) -> Result<(String, Vec<String>), QuestionError> {
    let mut qb = QuestionBuilder {
        builder: crate::realize::SurfaceBuilder::default(),
        view,
        ctx,
        def,
    };
    match query.atoms.len() {
        1 => {
            let av = analyze(&query.atoms[0], Var::Answer);
            let entry = lookup(def, &av, false)?;
            let vp = &entry.vp[rng.gen_range(0..entry.vp.len())];
            qb.builder.push_text(&entry.wh);
            qb.builder.push_text(" ");
            qb.fill(vp, &av.consts, None, rng);
        }
        2 if !query.uses_existential() => {
            let av1 = analyze(&query.atoms[0], Var::Answer);
            let av2 = analyze(&query.atoms[1], Var::Answer);
            let e1 = lookup(def, &av1, false)?;
            let e2 = lookup(def, &av2, false)?;
            let vp1 = &e1.vp[rng.gen_range(0..e1.vp.len())];
            let vp2 = &e2.vp[rng.gen_range(0..e2.vp.len())];
            qb.builder.push_text(&e1.wh);
            qb.builder.push_text(" ");
            qb.fill(vp1, &av1.consts, None, rng);
            qb.builder.push_text(" and ");
            qb.fill(vp2, &av2.consts, None, rng);
        }
        n @ (2 | 3) => {
            let host_idx = query
                .atoms
                .iter()
                .position(|a| a.has_var(Var::Answer) && a.has_var(Var::Existential))
                .ok_or_else(|| KbError::MalformedQuery("no chain atom".into()))?;
            let second_idx = query
                .atoms
                .iter()
                .position(|a| !a.has_var(Var::Answer) && a.has_var(Var::Existential))
                .ok_or_else(|| KbError::MalformedQuery("no joined atom".into()))?;
            let unary_idx = (0..n).find(|i| *i != host_idx && *i != second_idx);

            let av1 = analyze(&query.atoms[host_idx], Var::Answer);
            let av2 = analyze(&query.atoms[second_idx], Var::Existential);
            let e1 = lookup(def, &av1, true)?;
            let e2 = lookup(def, &av2, false)?;
            let np = render_np(e2, view, &av2, rng);

            let (head, vps): (String, &Vec<String>) = match unary_idx {
                Some(u) => {
                    let avu = analyze(&query.atoms[u], Var::Answer);
                    let eu = lookup(def, &avu, false)?;
                    let subject = eu.subject.clone().ok_or_else(|| {
                        QuestionError::MissingQuestionTemplate {
                            relation: avu.relation.to_string(),
                            answer: 0,
                            given: vec![],
                        }
                    })?;
                    if e1.vp_plural.is_empty() {
                        return Err(QuestionError::MissingQuestionTemplate {
                            relation: av1.relation.to_string(),
                            answer: av1.answer,
                            given: e1.given.clone(),
                        });
                    }
                    (subject, &e1.vp_plural)
                }
                None => (e1.wh.clone(), &e1.vp),
            };
            let vp = &vps[rng.gen_range(0..vps.len())];
            qb.builder.push_text(&head);
            qb.builder.push_text(" ");
            let join = av1.join.expect("chain atom has a join position");
            qb.fill(vp, &av1.consts, Some((join, &np)), rng);
        }
        _ => {
            return Err(QuestionError::Kb(KbError::MalformedQuery(format!(
                "{} atoms",
                query.atoms.len()
            ))))
        }
    }
    qb.builder.push_text("?");
    let statement = qb.builder.finish(0)?;
    Ok((statement.text, statement.tokens))
}

/// Computes the gold answers for a query at the given state: the result
/// set of the query, each carrying every mention span up to `position`.
pub fn compute_gold_answers(
    state: &WorldState,
    query: &Query,
    mentions: &MentionIndex,
) -> Result<Vec<AnswerEntry>, QuestionError> {
    let values = state.execute_query(query)?;
    let mut out = Vec::with_capacity(values.len());
    for value in values {
        let entry = mentions
            .entry_for(&value)
            .ok_or_else(|| QuestionError::UnmentionedAnswer(value.clone()))?;
        out.push(entry);
    }
    Ok(out)
}

/// Question interleaving configuration.
#[derive(Clone, Debug)]
pub struct QuestionConfig {
    /// Probability of asking after each statement.
    pub question_rate: f64,
    /// Maximum questions per emission point.
    pub burst: usize,
    /// Hard cap per story.
    pub max_questions: usize,
}

impl Default for QuestionConfig {
    fn default() -> Self {
        Self { question_rate: 0.6, burst: 2, max_questions: 300 }
    }
}

/// Per-story question sampler with duplicate suppression: the same
/// (query, answer set) pair is never asked twice.
#[derive(Default)]
pub struct QuestionSampler {
    asked: BTreeMap<String, BTreeSet<Value>>,
    emitted: usize,
}

impl QuestionSampler {
    #[allow(clippy::too_many_arguments)]
    pub fn maybe_ask(
        &mut self,
        story_id: &str,
        position: usize,
        state: &WorldState,
        view: &RealizeView,
        ctx: &DiscourseContext,
        def: &WorldDefinition,
        mentions: &MentionIndex,
        cfg: &QuestionConfig,
        rng: &mut ChaCha8Rng,
    ) -> Result<Vec<QuestionInstance>, QuestionError> {
        let mut out = Vec::new();
        if self.emitted >= cfg.max_questions || rng.gen::<f64>() >= cfg.question_rate {
            return Ok(out);
        }
        let burst = rng.gen_range(1..=cfg.burst.max(1));
        for _ in 0..burst {
            if self.emitted >= cfg.max_questions {
                break;
            }
            let category = sample_category(def, rng);
            let Ok(query) = sample_query(state, def, category, rng) else { continue };
            let answers = compute_gold_answers(state, &query, mentions)?;
            if answers.is_empty() {
                continue;
            }
            let key = crate::sexpr::render_atoms(&query.atoms, |id| {
                state.entity(id).map(|e| e.canonical_name.clone()).unwrap_or_default()
            });
            let answer_set: BTreeSet<Value> =
                answers.iter().map(|a| a.entity.clone()).collect();
            if self.asked.get(&key) == Some(&answer_set) {
                continue;
            }
            let (text, tokens) = realize_question(&query, view, ctx, def, rng)?;
            self.asked.insert(key, answer_set);
            let qid = format!("{story_id}-q{:03}", self.emitted);
            self.emitted += 1;
            out.push(QuestionInstance {
                qid,
                position,
                category,
                query,
                text,
                tokens,
                answers,
            });
        }
        Ok(out)
    }
}

fn sample_category(def: &WorldDefinition, rng: &mut ChaCha8Rng) -> QuestionCategory {
    let total: f64 = def.category_weights.iter().sum();
    let mut pick = rng.gen::<f64>() * total;
    for (cat, w) in QuestionCategory::ALL.iter().zip(&def.category_weights) {
        pick -= w;
        if pick <= 0.0 {
            return *cat;
        }
    }
    QuestionCategory::MultiEntityThreeRelations
}

#[cfg(test)]
mod tests;
