//! Procedural test corpora: small textured images grouped into concepts
//! whose visual variety is controlled.
//!
//! Every image is a coloured sinusoidal grating with a soft blob on top.
//! Images of a "concrete" concept share one grating/blob design and differ
//! only by small phase and position jitter; images of an "abstract" concept
//! each draw a fresh design. Alongside the images the generator writes a
//! manifest, concreteness norms, object detections with a hypernym map, and
//! a ViT-tagged embedding file, so every attribute can be exercised.

use std::f64::consts::PI;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{write_jsonl, ClassLabel, DatasetTag, ImageRecord};
use crate::embeddings::EmbeddingFile;
use crate::error::{Error, Result};
use crate::learning::derive_seed;
use crate::objects::Detection;
use crate::pixels::PixelGrid;

const CONCRETE_WORDS: [&str; 12] = [
    "apple", "banana", "chair", "dog", "guitar", "hammer", "lemon", "piano", "rabbit", "spoon", "tomato", "violin",
];
const ABSTRACT_WORDS: [&str; 12] = [
    "belief", "concept", "duty", "essence", "faith", "hope", "idea", "justice", "mercy", "notion", "reason", "virtue",
];

#[derive(Debug, Clone)]
pub struct SyntheticSpec {
    pub concepts_per_class: usize,
    pub images_per_concept: usize,
    pub side: usize,
    pub seed: u64,
    pub detector_classes: usize,
    pub hypernyms: usize,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            concepts_per_class: 8,
            images_per_concept: 25,
            side: 64,
            seed: 1,
            detector_classes: 24,
            hypernyms: 6,
        }
    }
}

/// Paths written by [`generate`].
#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub root: PathBuf,
    pub manifest: PathBuf,
    pub norms: PathBuf,
    pub detections: PathBuf,
    pub hypernyms: PathBuf,
    pub vit: PathBuf,
    pub concepts: Vec<(String, ClassLabel)>,
}

#[derive(Debug, Clone, Copy)]
struct Design {
    angle: f64,
    cycles: f64,
    phase: f64,
    colors: [[f64; 3]; 3],
    blob: (f64, f64, f64),
}

impl Design {
    fn random<R: Rng>(rng: &mut R, side: f64) -> Self {
        let mut color = || [0, 1, 2].map(|_| rng.random_range(0.0..255.0));
        let colors = [color(), color(), color()];
        Design {
            angle: rng.random_range(0.0..PI),
            cycles: rng.random_range(1.5..8.0),
            phase: rng.random_range(0.0..2.0 * PI),
            colors,
            blob: (
                rng.random_range(0.2 * side..0.8 * side),
                rng.random_range(0.2 * side..0.8 * side),
                rng.random_range(0.1 * side..0.25 * side),
            ),
        }
    }

    fn jittered<R: Rng>(&self, rng: &mut R, side: f64) -> Self {
        let d = 0.03 * side;
        Design {
            phase: self.phase + rng.random_range(-0.3..0.3),
            blob: (
                self.blob.0 + rng.random_range(-d..d),
                self.blob.1 + rng.random_range(-d..d),
                self.blob.2,
            ),
            ..*self
        }
    }

    fn render<R: Rng>(&self, rng: &mut R, side: usize) -> PixelGrid {
        let (c, s) = (self.angle.cos(), self.angle.sin());
        let k = 2.0 * PI * self.cycles / side as f64;
        let (bx, by, br) = self.blob;
        let mut noise = Vec::with_capacity(side * side * 3);
        for _ in 0..side * side * 3 {
            noise.push(rng.random_range(-6.0..6.0));
        }
        PixelGrid::rgb_from_fn(side, side, |x, y| {
            let (xf, yf) = (x as f64, y as f64);
            let t = 0.5 + 0.5 * (k * (xf * c + yf * s) + self.phase).sin();
            let d = ((xf - bx).powi(2) + (yf - by).powi(2)).sqrt();
            let w = (1.0 - d / br).clamp(0.0, 1.0);
            let base = (y * side + x) * 3;
            std::array::from_fn(|ch| {
                let g = self.colors[0][ch] * (1.0 - t) + self.colors[1][ch] * t;
                let v = g * (1.0 - w) + self.colors[2][ch] * w + noise[base + ch];
                v.round().clamp(0.0, 255.0) as u8
            })
        })
    }
}

fn lemma(words: &[&str], i: usize) -> String {
    if i < words.len() {
        words[i].to_string()
    } else {
        format!("{}{}", words[i % words.len()], i / words.len())
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |e| Error::io(path, e)
}

/// Write a corpus under `dir` (created if needed).
pub fn generate(dir: &Path, spec: &SyntheticSpec) -> Result<SyntheticCorpus> {
    if spec.concepts_per_class == 0 || spec.images_per_concept == 0 || spec.side < 16 {
        return Err(Error::validation("synthetic corpus needs concepts, images and a side of at least 16"));
    }
    let images_dir = dir.join("images");
    fs::create_dir_all(&images_dir).map_err(io_err(&images_dir))?;
    let side = spec.side as f64;

    let mut concepts = Vec::new();
    for i in 0..spec.concepts_per_class {
        concepts.push((lemma(&CONCRETE_WORDS, i), ClassLabel::Concrete));
        concepts.push((lemma(&ABSTRACT_WORDS, i), ClassLabel::Abstract));
    }

    let mut records = Vec::new();
    let mut detections = Vec::new();
    let mut vit = EmbeddingFile {
        model_tag: "vit-synthetic".into(),
        dim: 768,
        rows: Vec::new(),
    };
    let mut norms = String::from("word,concreteness\n");
    for (ci, (word, label)) in concepts.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, ci as u64));
        let rating = match label {
            ClassLabel::Concrete => rng.random_range(4.85..5.0),
            _ => rng.random_range(1.1..1.9),
        };
        norms.push_str(&format!("{word},{rating:.2}\n"));
        let design = Design::random(&mut rng, side);
        let class_id = rng.random_range(0..spec.detector_classes) as u32;
        for j in 0..spec.images_per_concept {
            let id = format!("{word}_{j:03}");
            let d = match label {
                ClassLabel::Concrete => design.jittered(&mut rng, side),
                _ => Design::random(&mut rng, side),
            };
            let img = d.render(&mut rng, spec.side);
            let rel = PathBuf::from("images").join(format!("{id}.png"));
            img.save_png(&dir.join(&rel))?;

            let thumb = img.resize(16, 16)?;
            vit.rows.push((id.clone(), thumb.as_bytes().iter().map(|&b| b as f32 / 255.0).collect()));

            let (cls, present) = match label {
                ClassLabel::Concrete => (class_id, rng.random_bool(0.9)),
                _ => (rng.random_range(0..spec.detector_classes) as u32, rng.random_bool(0.4)),
            };
            if present {
                let (bx, by, br) = d.blob;
                let b = |v: f64| (v / side).clamp(0.0, 1.0);
                detections.push(Detection {
                    image_id: id.clone(),
                    class_id: cls,
                    class_name: format!("class{cls:02}"),
                    bbox: [b(bx - br), b(by - br), b(bx + br), b(by + br)],
                    confidence: (rng.random_range(0.55..0.95f64) * 100.0).round() / 100.0,
                });
            }
            records.push(ImageRecord {
                image_id: id,
                lemma: word.clone(),
                dataset_tag: DatasetTag::Other,
                source_path: rel,
                width: spec.side as u32,
                height: spec.side as u32,
            });
        }
    }

    let manifest = dir.join("manifest.jsonl");
    write_jsonl(&manifest, &records)?;
    let norms_path = dir.join("norms.csv");
    fs::write(&norms_path, norms).map_err(io_err(&norms_path))?;
    let det_path = dir.join("detections.jsonl");
    write_jsonl(&det_path, &detections)?;
    let hyp_path = dir.join("hypernyms.csv");
    let mut f = fs::File::create(&hyp_path).map_err(io_err(&hyp_path))?;
    writeln!(f, "class_name,hypernym_id,hypernym_name").map_err(io_err(&hyp_path))?;
    for c in 0..spec.detector_classes {
        let h = c % spec.hypernyms;
        writeln!(f, "class{c:02},{h},group{h}").map_err(io_err(&hyp_path))?;
    }
    let vit_path = dir.join("vit.vdem");
    vit.save_binary(&vit_path)?;

    Ok(SyntheticCorpus {
        root: dir.to_path_buf(),
        manifest,
        norms: norms_path,
        detections: det_path,
        hypernyms: hyp_path,
        vit: vit_path,
        concepts,
    })
}
