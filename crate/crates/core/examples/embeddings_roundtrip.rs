// Write ViT-style embeddings in both supported formats and load them back
// as feature vectors.

use visdiv::embeddings::{ingest_embeddings, EmbeddingFile};

pub fn run_example() -> visdiv::Result<()> {
    let dir = std::env::temp_dir().join(format!("visdiv-embeddings-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| visdiv::Error::Validation(e.to_string()))?;
    let file = EmbeddingFile {
        model_tag: "vit-b16".into(),
        dim: 768,
        rows: (0..3).map(|i| (format!("img{i}"), (0..768).map(|j| ((i * 768 + j) % 17) as f32 / 17.0).collect())).collect(),
    };
    let bin = dir.join("vit.vdem");
    let jsonl = dir.join("vit.jsonl");
    file.save_binary(&bin)?;
    file.write_jsonl(&jsonl)?;
    for path in [&bin, &jsonl] {
        let rows = ingest_embeddings(path, Some(768))?;
        let first = &rows["img0"];
        println!("{}: {} rows, attribute {}, dim {}", path.display(), rows.len(), first.attribute, first.dim);
    }
    assert_eq!(EmbeddingFile::read(&bin)?, EmbeddingFile::read(&jsonl)?);
    let _ = std::fs::remove_dir_all(&dir);
    Ok(())
}

#[allow(dead_code)]
fn main() -> visdiv::Result<()> {
    run_example()
}
