// Exact cosine nearest neighbours and the share of each image's neighbours
// that come from its own concept.

use std::collections::BTreeMap;

use visdiv::corpus::ClassLabel;
use visdiv::features::Attribute;
use visdiv::neighbors::{neighbor_report, write_class_table, NeighborIndex};

pub fn run_example() -> visdiv::Result<()> {
    let mut items = Vec::new();
    let mut concept_of = BTreeMap::new();
    for (concept, spread) in [("apple", 0.05), ("hope", 1.0)] {
        for i in 0..6 {
            let id = format!("{concept}_{i}");
            let t = i as f64 * spread;
            let v = if concept == "apple" { vec![1.0, t, 0.1] } else { vec![t.cos(), t.sin(), 0.5] };
            items.push((id.clone(), v));
            concept_of.insert(id, concept.to_string());
        }
    }
    let class_of = BTreeMap::from([("apple".to_string(), ClassLabel::Concrete), ("hope".to_string(), ClassLabel::Abstract)]);
    let index = NeighborIndex::new(items)?;
    for n in index.query("apple_0", 3)?.neighbors {
        println!("apple_0 -> {} ({:.4})", n.image_id, n.similarity);
    }
    let report = neighbor_report(Attribute::Color, &index, &concept_of, &class_of, 5)?;
    let mut out = Vec::new();
    write_class_table(&mut out, &[(Attribute::Color, &report.per_class)])?;
    print!("{}", String::from_utf8_lossy(&out));
    Ok(())
}

#[allow(dead_code)]
fn main() -> visdiv::Result<()> {
    run_example()
}
