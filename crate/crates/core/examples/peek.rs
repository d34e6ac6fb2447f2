use storyworlds_core::dataset::{compute_stats, StoryRecord};
use storyworlds_core::story::{generate_stories, StoryConfig};
use storyworlds_core::world::{builtin_world_names, load_world, PoolSource};

fn main() {
    let t = std::time::Instant::now();
    let mut records = Vec::new();
    for world in builtin_world_names() {
        let def = load_world(world, &PoolSource::Embedded).unwrap();
        for b in generate_stories(&def, 1, 20, &StoryConfig::default()).unwrap() {
            records.push(StoryRecord::from(&b));
        }
    }
    println!("generated {} stories in {:?}", records.len(), t.elapsed());
    println!("{}", compute_stats(&records).unwrap());
}
