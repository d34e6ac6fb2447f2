use super::*;
use crate::kb::{Literal, Pronoun, QuestionCategory, WorldState};
use crate::realize::SurfaceBuilder;
use crate::story::{generate_story, StoryConfig};
use crate::world::{load_world, PoolSource, Simulation, WorldDefinition};
use rand::SeedableRng;

fn world(name: &str) -> WorldDefinition {
    load_world(name, &PoolSource::Embedded).unwrap()
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn simulate(def: &WorldDefinition, seed: u64, steps: usize) -> Simulation<'_> {
    let mut sim = Simulation::new(def, seed);
    for _ in 0..steps {
        sim.step().unwrap();
    }
    sim
}

#[test]
fn empty_state_has_no_queries() {
    let def = world("meeting");
    let state = WorldState::new(def.catalog.clone());
    let mut r = rng(0);
    for cat in QuestionCategory::ALL {
        assert!(matches!(
            sample_query(&state, &def, cat, &mut r),
            Err(QuestionError::NoQueryAvailable(_))
        ));
    }
}

#[test]
fn category_shapes_hold_by_construction() {
    for name in crate::world::builtin_world_names() {
        let def = world(name);
        let sim = simulate(&def, 17, 80);
        let mut r = rng(3);
        for cat in QuestionCategory::ALL {
            for _ in 0..20 {
                let Ok(q) = sample_query(sim.state(), &def, cat, &mut r) else { continue };
                assert_eq!(q.atoms.len(), cat.atom_count(), "world {name} {cat:?}");
                q.validate(&def.catalog)
                    .unwrap_or_else(|e| panic!("world {name} {cat:?}: {e}"));
                assert!(!sim.state().execute_query(&q).unwrap().is_empty());
                if cat == QuestionCategory::SingleEntitySingleRelation {
                    let schema = &def.catalog[&q.atoms[0].relation];
                    assert!(schema.functional_over.is_some());
                    assert!(sim.state().execute_query(&q).unwrap().len() == 1);
                }
                if cat == QuestionCategory::MultiEntityThreeRelations {
                    assert!(
                        q.atoms.iter().any(|a| a.args.len() == 1),
                        "cat-4 query lacks a unary filter: {q:?}"
                    );
                }
            }
        }
    }
}

#[test]
fn questions_realize_for_every_category() {
    for name in crate::world::builtin_world_names() {
        let def = world(name);
        let sim = simulate(&def, 23, 90);
        let view = crate::realize::RealizeView::build(sim.state(), &def);
        let ctx = DiscourseContext::default();
        let mut r = rng(5);
        let mut seen = BTreeSet::new();
        for _ in 0..200 {
            let cat = sample_category(&def, &mut r);
            let Ok(q) = sample_query(sim.state(), &def, cat, &mut r) else { continue };
            let (text, tokens) = realize_question(&q, &view, &ctx, &def, &mut r)
                .unwrap_or_else(|e| panic!("world {name}: {e} for {q:?}"));
            assert!(text.ends_with('?'), "not a question: {text}");
            assert!(tokens.len() >= 3, "too short: {text}");
            assert!(
                text.chars().next().unwrap().is_ascii_uppercase(),
                "not capitalized: {text}"
            );
            seen.insert(cat);
        }
        assert_eq!(seen.len(), 4, "world {name} realized categories {seen:?}");
    }
}

#[test]
fn answers_change_after_functional_overwrite() {
    let def = world("homework");
    let mut state = WorldState::new(def.catalog.clone());
    let hw = state.new_entity("assignment", "Homework 3", vec![], Pronoun::It);
    state.assert_fact("Assignment", vec![hw.into()]).unwrap();
    state
        .assert_fact("Due", vec![hw.into(), Literal::new("date", "Thursday").into()])
        .unwrap();

    // Synthetic statements give every value a mention span.
    let mut mentions = MentionIndex::default();
    let mut builder = SurfaceBuilder::default();
    builder.push_mention(hw.into(), "Homework 3", crate::realize::Strategy::Canonical);
    builder.push_text(" is due on ");
    builder.push_mention(
        Literal::new("date", "Thursday").into(),
        "Thursday",
        crate::realize::Strategy::Canonical,
    );
    builder.push_text(".");
    mentions.note_statement(0, &builder.finish(0).unwrap());

    let query = Query {
        atoms: vec![Atom {
            relation: "Due".into(),
            args: vec![Term::Const(hw.into()), Term::Var(Var::Answer)],
        }],
        category: QuestionCategory::SingleEntitySingleRelation,
    };
    let before = compute_gold_answers(&state, &query, &mentions).unwrap();
    assert_eq!(before.len(), 1);
    assert_eq!(before[0].entity, Literal::new("date", "Thursday").into());
    assert_eq!(before[0].surface_forms, vec!["Thursday".to_string()]);

    state.advance_step();
    state
        .assert_fact("Due", vec![hw.into(), Literal::new("date", "Friday").into()])
        .unwrap();
    let mut builder = SurfaceBuilder::default();
    builder.push_mention(hw.into(), "Homework 3", crate::realize::Strategy::Canonical);
    builder.push_text(" is now due on ");
    builder.push_mention(
        Literal::new("date", "Friday").into(),
        "Friday",
        crate::realize::Strategy::Canonical,
    );
    builder.push_text(".");
    mentions.note_statement(1, &builder.finish(1).unwrap());

    let after = compute_gold_answers(&state, &query, &mentions).unwrap();
    assert_eq!(after.len(), 1);
    assert_eq!(after[0].entity, Literal::new("date", "Friday").into());
}

#[test]
fn unmentioned_answer_fails_fast() {
    let def = world("homework");
    let mut state = WorldState::new(def.catalog.clone());
    let hw = state.new_entity("assignment", "Homework 1", vec![], Pronoun::It);
    state.assert_fact("Assignment", vec![hw.into()]).unwrap();
    let query = Query {
        atoms: vec![Atom {
            relation: "Assignment".into(),
            args: vec![Term::Var(Var::Answer)],
        }],
        category: QuestionCategory::MultiEntitySingleRelation,
    };
    let err = compute_gold_answers(&state, &query, &MentionIndex::default()).unwrap_err();
    assert!(matches!(err, QuestionError::UnmentionedAnswer(_)));
}

#[test]
fn stories_cap_questions_and_preserve_order() {
    let def = world("meeting");
    let cfg = StoryConfig {
        statements: 60,
        question: QuestionConfig { question_rate: 1.0, burst: 3, max_questions: 10 },
    };
    let story = generate_story(&def, "meeting-0000", 8, &cfg).unwrap();
    assert_eq!(story.statements.len(), 60);
    assert_eq!(story.questions.len(), 10);
    let positions: Vec<usize> = story.questions.iter().map(|q| q.position).collect();
    let mut sorted = positions.clone();
    sorted.sort_unstable();
    assert_eq!(positions, sorted, "positions must be non-decreasing");
    let mut qids: Vec<&str> = story.questions.iter().map(|q| q.qid.as_str()).collect();
    qids.dedup();
    assert_eq!(qids.len(), 10, "qids must be unique");
}

#[test]
fn zero_max_questions_means_no_questions() {
    let def = world("shopping");
    let cfg = StoryConfig {
        statements: 30,
        question: QuestionConfig { question_rate: 1.0, burst: 2, max_questions: 0 },
    };
    let story = generate_story(&def, "shopping-0000", 8, &cfg).unwrap();
    assert!(story.questions.is_empty());
}

#[test]
fn no_duplicate_question_with_same_answers() {
    let def = world("department");
    let cfg = StoryConfig {
        statements: 100,
        question: QuestionConfig { question_rate: 1.0, burst: 3, max_questions: 300 },
    };
    let story = generate_story(&def, "department-0000", 21, &cfg).unwrap();
    let mut seen: BTreeMap<String, Vec<BTreeSet<Value>>> = BTreeMap::new();
    for q in &story.questions {
        let key = crate::sexpr::render_atoms(&q.query.atoms, |id| {
            story.entity_table[&id].canonical_name.clone()
        });
        let answers: BTreeSet<Value> = q.answers.iter().map(|a| a.entity.clone()).collect();
        let prior = seen.entry(key).or_default();
        assert!(
            prior.last() != Some(&answers),
            "duplicate consecutive (query, answers): {} at {}",
            q.text,
            q.position
        );
        prior.push(answers);
    }
}

#[test]
fn gold_answers_are_nonempty_with_spans() {
    for name in crate::world::builtin_world_names() {
        let def = world(name);
        let story = generate_story(&def, "x-0000", 33, &StoryConfig::default()).unwrap();
        assert!(!story.questions.is_empty(), "world {name} generated no questions");
        for q in &story.questions {
            assert!(!q.answers.is_empty(), "empty answers for {}", q.text);
            for a in &q.answers {
                assert!(!a.spans.is_empty());
                assert!(!a.surface_forms.is_empty());
                for span in &a.spans {
                    assert!(span.statement <= q.position, "future span in {}", q.text);
                    let stmt = &story.statements[span.statement];
                    let joined =
                        crate::realize::detokenize(&stmt.tokens[span.start..span.end]);
                    assert!(
                        a.surface_forms.contains(&joined),
                        "span text '{joined}' not among surface forms {:?}",
                        a.surface_forms
                    );
                }
            }
        }
    }
}
