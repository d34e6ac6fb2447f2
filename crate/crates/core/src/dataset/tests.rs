use super::*;
use crate::story::{generate_stories, StoryConfig};
use crate::world::{load_world, PoolSource};

fn small_corpus() -> Vec<StoryRecord> {
    let mut out = Vec::new();
    for world in ["meeting", "shopping"] {
        let def = load_world(world, &PoolSource::Embedded).unwrap();
        let cfg = StoryConfig { statements: 40, ..StoryConfig::default() };
        for bundle in generate_stories(&def, 7, 4, &cfg).unwrap() {
            out.push(StoryRecord::from(&bundle));
        }
    }
    out
}

#[test]
fn roundtrip_is_identity() {
    let corpus = small_corpus();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("data.jsonl");
    write_dataset(&corpus, &path).unwrap();
    let back = read_dataset(&path).unwrap();
    assert_eq!(corpus, back);

    // Byte-stable across rewrites.
    let path2 = dir.path().join("data2.jsonl");
    write_dataset(&back, &path2).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&path2).unwrap());
}

#[test]
fn truncated_line_reports_its_number() {
    let corpus = small_corpus();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("data.jsonl");
    write_dataset(&corpus, &path).unwrap();
    let mut text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    let cut = lines[2].len() / 2;
    let mangled = format!("{}\n{}\n{}\n", lines[0], lines[1], &lines[2][..cut]);
    text = mangled;
    std::fs::write(&path, text).unwrap();
    match read_dataset(&path) {
        Err(DatasetError::Format { line, .. }) => assert_eq!(line, 3),
        other => panic!("expected format error, got {other:?}"),
    }
}

#[test]
fn minimal_handwritten_record_parses() {
    let rec = r#"{"story_id":"w-0000","world":"w","seed":1,
        "statements":[{"text":"I met Ann Lee.","tokens":["I","met","Ann","Lee","."],
            "mentions":[{"entity":0,"start":2,"end":4,"strategy":"canonical"}]}],
        "questions":[{"qid":"w-0000-q000","position":0,
            "category":"multi_entity_single_relation",
            "query":"(and (Person ?x))","text":"Who do I know?",
            "tokens":["Who","do","I","know","?"],
            "answers":[{"entity":0,"surface_forms":["Ann Lee"],
                "spans":[{"statement":0,"start":2,"end":4}]}]}],
        "entities":{"0":{"etype":"person","name":"Ann Lee"}}}"#
        .replace('\n', "");
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mini.jsonl");
    std::fs::write(&path, format!("{rec}\n")).unwrap();
    let stories = read_dataset(&path).unwrap();
    assert_eq!(stories.len(), 1);
    assert_eq!(stories[0].statements[0].mentions[0].entity, Value::Entity(EntityId(0)));
    let parsed = crate::sexpr::parse_atoms(&stories[0].questions[0].query).unwrap();
    assert_eq!(parsed[0].0.relation, "Person");
}

#[test]
fn dangling_entity_reference_is_rejected() {
    let rec = r#"{"story_id":"w-0000","world":"w","seed":1,
        "statements":[{"text":"Hi.","tokens":["Hi","."],
            "mentions":[{"entity":5,"start":0,"end":1,"strategy":"canonical"}]}],
        "questions":[],"entities":{}}"#
        .replace('\n', "");
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.jsonl");
    std::fs::write(&path, format!("{rec}\n")).unwrap();
    assert!(matches!(read_dataset(&path), Err(DatasetError::Format { line: 1, .. })));
}

#[test]
fn stats_small_arithmetic() {
    // One story, 2 questions with 1 and 3 answers -> avg 2.0.
    let corpus = small_corpus();
    let mut story = corpus[0].clone();
    story.questions.truncate(2);
    let take = |n: usize, q: &QuestionRecord| {
        let mut q = q.clone();
        q.answers = q.answers.iter().cloned().cycle().take(n).collect();
        q
    };
    story.questions[0] = take(1, &story.questions[0]);
    story.questions[1] = take(3, &story.questions[1]);
    let report = compute_stats(std::slice::from_ref(&story)).unwrap();
    assert_eq!(report.overall.questions, 2);
    assert!((report.overall.avg_answers_per_question - 2.0).abs() < 1e-12);
}

#[test]
fn stats_percentages_sum_to_100() {
    let report = compute_stats(&small_corpus()).unwrap();
    for (world, block) in &report.per_world {
        let total: f64 = block.category_percent.values().sum();
        assert!((total - 100.0).abs() < 0.1, "world {world}: {total}");
    }
    assert!(report.overall.vocab_tokens >= report.overall.vocab_tokens_excluding_mentions);
    assert!(compute_stats(&[]).is_err());
}

#[test]
fn within_world_splits_are_disjoint_and_exhaustive() {
    let corpus = small_corpus();
    let split = make_splits(&corpus, SplitMode::WithinWorld, SplitRatios::default(), 11).unwrap();
    assert_eq!(split.assignments.len(), corpus.len());
    let train = split.ids(Split::Train);
    let val = split.ids(Split::Val);
    let test = split.ids(Split::Test);
    assert_eq!(train.len() + val.len() + test.len(), corpus.len());
    assert!(train.is_disjoint(&val) && train.is_disjoint(&test) && val.is_disjoint(&test));
    // Deterministic.
    let again = make_splits(&corpus, SplitMode::WithinWorld, SplitRatios::default(), 11).unwrap();
    assert_eq!(split.assignments, again.assignments);
    let other_seed =
        make_splits(&corpus, SplitMode::WithinWorld, SplitRatios::default(), 12).unwrap();
    assert_ne!(split.assignments, other_seed.assignments);
}

#[test]
fn ten_story_ratio_gives_8_1_1() {
    let def = load_world("meeting", &PoolSource::Embedded).unwrap();
    let cfg = StoryConfig { statements: 10, ..StoryConfig::default() };
    let stories: Vec<StoryRecord> = generate_stories(&def, 3, 10, &cfg)
        .unwrap()
        .iter()
        .map(StoryRecord::from)
        .collect();
    let split = make_splits(&stories, SplitMode::WithinWorld, SplitRatios::default(), 1).unwrap();
    assert_eq!(split.ids(Split::Train).len(), 8);
    assert_eq!(split.ids(Split::Val).len(), 1);
    assert_eq!(split.ids(Split::Test).len(), 1);
}

#[test]
fn cross_world_holds_out_the_whole_world() {
    let corpus = small_corpus();
    let split = make_splits(
        &corpus,
        SplitMode::CrossWorld { held_out: "meeting".to_string() },
        SplitRatios::default(),
        5,
    )
    .unwrap();
    for story in &corpus {
        let s = split.assignments[&story.story_id];
        if story.world == "meeting" {
            assert_eq!(s, Split::Test);
        } else {
            assert_ne!(s, Split::Test);
        }
    }
    assert!(matches!(
        make_splits(
            &corpus,
            SplitMode::CrossWorld { held_out: "atlantis".into() },
            SplitRatios::default(),
            5
        ),
        Err(DatasetError::UnknownWorld(_))
    ));
}

#[test]
fn too_few_stories_is_an_error() {
    let corpus: Vec<StoryRecord> = small_corpus().into_iter().take(2).collect();
    assert!(matches!(
        make_splits(&corpus, SplitMode::WithinWorld, SplitRatios::default(), 1),
        Err(DatasetError::InsufficientStories { .. })
    ));
}
