// Object attributes from detector output: hypernym counts and a 10x10
// location grid, plus per-class detection availability.

use std::io::Cursor;

use visdiv::corpus::ClassLabel;
use visdiv::objects::{availability_stats, hypernym_counts, ingest_detections_from, location_grid, HypernymMap};

const DETECTIONS: &str = r#"{"image_id":"dog_1","class_id":0,"class_name":"terrier","bbox":[0.1,0.1,0.5,0.6],"confidence":0.9}
{"image_id":"dog_1","class_id":1,"class_name":"beagle","bbox":[0.5,0.5,0.9,0.9],"confidence":0.7}
{"image_id":"dog_1","class_id":2,"class_name":"sofa","bbox":[0.0,0.6,1.0,1.0],"confidence":0.3}
{"image_id":"hope_1","class_id":2,"class_name":"sofa","bbox":[0.2,0.2,0.4,0.4],"confidence":0.8}
{"image_id":"bad","class_id":1,"class_name":"beagle","bbox":[0.6,0.1,0.2,0.3],"confidence":0.8}
"#;

const HYPERNYMS: &str = "class_name,hypernym_id,hypernym_name\nterrier,0,dog\nbeagle,0,dog\nsofa,1,furniture\n";

pub fn run_example() -> visdiv::Result<()> {
    let dets = ingest_detections_from(Cursor::new(DETECTIONS), "detections.jsonl", 3)?;
    println!("{} detections kept, {} rejected", dets.total(), dets.reject_count());
    let map = HypernymMap::from_csv(HYPERNYMS.as_bytes(), "hypernyms.csv", 2)?;
    let counts = hypernym_counts("dog_1", dets.get("dog_1"), &map, 0.5)?;
    println!("hypernym counts for dog_1: {:?}", counts.values);
    let grid = location_grid("dog_1", dets.get("dog_1"));
    for row in grid.values.chunks(10) {
        println!("{}", row.iter().map(|v| format!("{v:.0}")).collect::<Vec<_>>().join(""));
    }
    let concrete = ["dog_1".to_string(), "dog_2".to_string()];
    let abstract_ = ["hope_1".to_string(), "hope_2".to_string(), "hope_3".to_string()];
    let stats = availability_stats([(ClassLabel::Concrete, &concrete[..]), (ClassLabel::Abstract, &abstract_[..])], &dets);
    println!("with detections: abstract {:.1}%, concrete {:.1}%", stats.abstract_pct, stats.concrete_pct);
    Ok(())
}

#[allow(dead_code)]
fn main() -> visdiv::Result<()> {
    run_example()
}
