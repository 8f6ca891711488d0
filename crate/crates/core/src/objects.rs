//! Object-detection signals: hypernym class counts, an overlapping spatial
//! grid of object occupancy, and detection availability statistics.
//!
//! Detections are produced by an external detector and read from JSON Lines.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::ClassLabel;
use crate::error::{Error, Result};
use crate::features::{Attribute, FeatureVector};

pub const DETECTOR_CLASSES: usize = 9418;
pub const HYPERNYM_CLASSES: usize = 1401;
pub const DEFAULT_CONF_MIN: f64 = 0.5;

pub const GRID_SIDE: usize = 10;
pub const LOCATION_DIM: usize = GRID_SIDE * GRID_SIDE;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub image_id: String,
    pub class_id: u32,
    pub class_name: String,
    /// `[x0, y0, x1, y1]`, normalised to the unit square.
    pub bbox: [f64; 4],
    pub confidence: f64,
}

impl Detection {
    fn check(&self, class_count: usize) -> std::result::Result<(), String> {
        let [x0, y0, x1, y1] = self.bbox;
        if !self.bbox.iter().all(|v| v.is_finite() && (0.0..=1.0).contains(v)) {
            return Err("bbox coordinates outside [0, 1]".into());
        }
        if x0 >= x1 || y0 >= y1 {
            return Err("bbox requires x0 < x1 and y0 < y1".into());
        }
        if !(0.0..=1.0).contains(&self.confidence) {
            return Err("confidence outside [0, 1]".into());
        }
        if self.class_id as usize >= class_count {
            return Err(format!("class_id {} outside [0, {class_count})", self.class_id));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RejectedDetection {
    pub line: usize,
    pub reason: String,
}

/// Detections grouped by image.
#[derive(Debug, Clone, Default)]
pub struct DetectionSet {
    by_image: BTreeMap<String, Vec<Detection>>,
    pub rejected: Vec<RejectedDetection>,
}

impl DetectionSet {
    /// Detections for an image; images absent from the file have none.
    pub fn get(&self, image_id: &str) -> &[Detection] {
        self.by_image.get(image_id).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn reject_count(&self) -> usize {
        self.rejected.len()
    }

    pub fn images(&self) -> impl Iterator<Item = &String> {
        self.by_image.keys()
    }

    pub fn total(&self) -> usize {
        self.by_image.values().map(Vec::len).sum()
    }
}

/// Read a detections file. Malformed JSON is a hard error carrying its line
/// number; schema-valid records that violate the bbox/confidence/class
/// invariants are rejected and counted.
pub fn ingest_detections(path: &Path, class_count: usize) -> Result<DetectionSet> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    ingest_detections_from(BufReader::new(f), &path.display().to_string(), class_count)
}

pub fn ingest_detections_from<R: BufRead>(reader: R, source_name: &str, class_count: usize) -> Result<DetectionSet> {
    let mut set = DetectionSet::default();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(source_name, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let det: Detection =
            serde_json::from_str(&line).map_err(|e| Error::parse(source_name, i + 1, e.to_string()))?;
        match det.check(class_count) {
            Ok(()) => set.by_image.entry(det.image_id.clone()).or_default().push(det),
            Err(reason) => set.rejected.push(RejectedDetection { line: i + 1, reason }),
        }
    }
    Ok(set)
}

/// Total mapping from detector class names to hypernym ids.
#[derive(Debug, Clone, Default)]
pub struct HypernymMap {
    entries: BTreeMap<String, usize>,
    hypernym_names: Vec<Option<String>>,
}

#[derive(Deserialize)]
struct HypernymRow {
    class_name: String,
    hypernym_id: usize,
    hypernym_name: String,
}

impl HypernymMap {
    /// Read a `class_name,hypernym_id,hypernym_name` CSV. Every id must be
    /// below `hypernym_count`, and a class may map to only one hypernym.
    pub fn from_csv<R: Read>(reader: R, source_name: &str, hypernym_count: usize) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut map = HypernymMap {
            entries: BTreeMap::new(),
            hypernym_names: vec![None; hypernym_count],
        };
        for (i, row) in rdr.deserialize::<HypernymRow>().enumerate() {
            let line = i + 2;
            let row = row.map_err(|e| Error::parse(source_name, line, e.to_string()))?;
            if row.hypernym_id >= hypernym_count {
                return Err(Error::parse(
                    source_name,
                    line,
                    format!("hypernym_id {} outside [0, {hypernym_count})", row.hypernym_id),
                ));
            }
            if let Some(prev) = map.entries.insert(row.class_name.clone(), row.hypernym_id) {
                if prev != row.hypernym_id {
                    return Err(Error::parse(
                        source_name,
                        line,
                        format!("class `{}` mapped to both {prev} and {}", row.class_name, row.hypernym_id),
                    ));
                }
            }
            map.hypernym_names[row.hypernym_id].get_or_insert(row.hypernym_name);
        }
        Ok(map)
    }

    pub fn load(path: &Path, hypernym_count: usize) -> Result<Self> {
        let f = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv(f, &path.display().to_string(), hypernym_count)
    }

    pub fn hypernym_count(&self) -> usize {
        self.hypernym_names.len()
    }

    pub fn class_count(&self) -> usize {
        self.entries.len()
    }

    pub fn hypernym_of(&self, class_name: &str) -> Option<usize> {
        self.entries.get(class_name).copied()
    }

    pub fn hypernym_name(&self, id: usize) -> Option<&str> {
        self.hypernym_names.get(id).and_then(|n| n.as_deref())
    }

    /// Check that every listed detector class is mapped.
    pub fn check_total<'a>(&self, class_names: impl IntoIterator<Item = &'a str>) -> Result<()> {
        let missing: Vec<&str> = class_names.into_iter().filter(|c| !self.entries.contains_key(*c)).collect();
        if missing.is_empty() {
            Ok(())
        } else {
            Err(Error::validation(format!(
                "hypernym map is missing {} class(es), e.g. `{}`",
                missing.len(),
                missing[0]
            )))
        }
    }
}

/// Raw hypernym counts of detections with `confidence >= conf_min`.
pub fn hypernym_counts(image_id: &str, dets: &[Detection], map: &HypernymMap, conf_min: f64) -> Result<FeatureVector> {
    let mut counts = vec![0.0; map.hypernym_count()];
    for d in dets.iter().filter(|d| d.confidence >= conf_min) {
        let h = map.hypernym_of(&d.class_name).ok_or_else(|| {
            Error::validation(format!("class `{}` has no hypernym mapping", d.class_name))
        })?;
        counts[h] += 1.0;
    }
    Ok(FeatureVector {
        image_id: image_id.to_string(),
        attribute: Attribute::Yolo,
        dim: counts.len(),
        values: counts,
    })
}

/// Unit-square extent `[lo, hi]` of grid cell `i` along one axis: cells have
/// side 2/11 and stride 1/11, so neighbours overlap by half a cell.
pub fn cell_span(i: usize) -> (f64, f64) {
    (i as f64 / 11.0, (i + 2) as f64 / 11.0)
}

/// Number of boxes intersecting each cell of the overlapping 10x10 grid with
/// positive area. Index `row * 10 + col`, rows along y.
pub fn location_grid(image_id: &str, dets: &[Detection]) -> FeatureVector {
    let mut grid = vec![0.0; LOCATION_DIM];
    for d in dets {
        let [x0, y0, x1, y1] = d.bbox;
        for row in 0..GRID_SIDE {
            let (cy0, cy1) = cell_span(row);
            if y1.min(cy1) - y0.max(cy0) <= 0.0 {
                continue;
            }
            for col in 0..GRID_SIDE {
                let (cx0, cx1) = cell_span(col);
                if x1.min(cx1) - x0.max(cx0) > 0.0 {
                    grid[row * GRID_SIDE + col] += 1.0;
                }
            }
        }
    }
    FeatureVector {
        image_id: image_id.to_string(),
        attribute: Attribute::ObjectLoc,
        dim: LOCATION_DIM,
        values: grid,
    }
}

/// Percentage of images with at least one detection, averaged over the
/// concepts of each class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AvailabilityStats {
    pub abstract_pct: f64,
    pub concrete_pct: f64,
}

pub fn availability_stats<'a, I>(concepts: I, detections: &DetectionSet) -> AvailabilityStats
where
    I: IntoIterator<Item = (ClassLabel, &'a [String])>,
{
    let mut acc: BTreeMap<ClassLabel, (f64, usize)> = BTreeMap::new();
    for (label, images) in concepts {
        if images.is_empty() {
            continue;
        }
        let hits = images.iter().filter(|id| !detections.get(id).is_empty()).count();
        let e = acc.entry(label).or_insert((0.0, 0));
        e.0 += 100.0 * hits as f64 / images.len() as f64;
        e.1 += 1;
    }
    let mean = |l| acc.get(&l).map(|&(s, n)| s / n as f64).unwrap_or(0.0);
    AvailabilityStats {
        abstract_pct: mean(ClassLabel::Abstract),
        concrete_pct: mean(ClassLabel::Concrete),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn det(class: &str, bbox: [f64; 4], conf: f64) -> Detection {
        Detection {
            image_id: "img1".into(),
            class_id: 0,
            class_name: class.into(),
            bbox,
            confidence: conf,
        }
    }

    fn map() -> HypernymMap {
        let csv = "class_name,hypernym_id,hypernym_name\nbanana,3,fruit\napple,3,fruit\ndog,7,animal\n";
        HypernymMap::from_csv(csv.as_bytes(), "map.csv", 10).unwrap()
    }

    #[test]
    fn empty_file_maps_everything_to_nothing() {
        let set = ingest_detections_from("".as_bytes(), "d", DETECTOR_CLASSES).unwrap();
        assert!(set.get("anything").is_empty());
        assert_eq!(set.reject_count(), 0);
    }

    #[test]
    fn single_record() {
        let line = r#"{"image_id":"img1","class_id":12,"class_name":"banana","bbox":[0.1,0.1,0.5,0.5],"confidence":0.9}"#;
        let set = ingest_detections_from(line.as_bytes(), "d", DETECTOR_CLASSES).unwrap();
        assert_eq!(set.get("img1").len(), 1);
        assert_eq!(set.get("img1")[0].class_name, "banana");
    }

    #[test]
    fn invalid_boxes_are_rejected_and_counted() {
        let lines = [
            r#"{"image_id":"a","class_id":1,"class_name":"x","bbox":[0.6,0.1,0.5,0.5],"confidence":0.9}"#,
            r#"{"image_id":"a","class_id":1,"class_name":"x","bbox":[0.1,0.1,1.5,0.5],"confidence":0.9}"#,
            r#"{"image_id":"a","class_id":99999,"class_name":"x","bbox":[0.1,0.1,0.5,0.5],"confidence":0.9}"#,
            r#"{"image_id":"a","class_id":1,"class_name":"x","bbox":[0.1,0.1,0.5,0.5],"confidence":0.9}"#,
        ]
        .join("\n");
        let set = ingest_detections_from(lines.as_bytes(), "d", DETECTOR_CLASSES).unwrap();
        assert_eq!(set.reject_count(), 3);
        assert_eq!(set.rejected[0].line, 1);
        assert_eq!(set.get("a").len(), 1);
    }

    #[test]
    fn malformed_line_is_a_parse_error() {
        let err = ingest_detections_from("{}\n".as_bytes(), "d", 10).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn counts() {
        let m = map();
        let full = [0.0, 0.0, 1.0, 1.0];
        assert_eq!(hypernym_counts("i", &[], &m, 0.5).unwrap().values, vec![0.0; 10]);
        let two = hypernym_counts("i", &[det("banana", full, 0.9), det("apple", full, 0.9)], &m, 0.5).unwrap();
        assert_eq!(two.values[3], 2.0);
        let dets = [det("banana", full, 0.9), det("dog", full, 0.9), det("banana", full, 0.6), det("dog", full, 0.2)];
        let v = hypernym_counts("i", &dets, &m, 0.5).unwrap();
        assert_eq!((v.values[3], v.values[7]), (2.0, 1.0));
        assert_eq!(v.values.iter().sum::<f64>(), 3.0);
        assert!(hypernym_counts("i", &[det("cat", full, 0.9)], &m, 0.5).is_err());
    }

    #[test]
    fn map_validation() {
        assert!(HypernymMap::from_csv("class_name,hypernym_id,hypernym_name\na,10,x\n".as_bytes(), "m", 10).is_err());
        assert!(HypernymMap::from_csv("class_name,hypernym_id,hypernym_name\na,1,x\na,2,y\n".as_bytes(), "m", 10).is_err());
        let m = map();
        assert!(m.check_total(["banana", "dog"]).is_ok());
        assert!(m.check_total(["banana", "cat"]).is_err());
        assert_eq!(m.hypernym_name(3), Some("fruit"));
    }

    #[test]
    fn full_frame_box_hits_every_cell() {
        let g = location_grid("i", &[det("x", [0.0, 0.0, 1.0, 1.0], 1.0)]);
        assert!(g.values.iter().all(|&v| v == 1.0));
        assert!(location_grid("i", &[]).values.iter().all(|&v| v == 0.0));
    }

    // Oracle: enumerate all 100 cell rectangles and intersect with
    // [0, 0.15]^2 directly. Cell i spans [i/11, (i+2)/11]; 0.15 > 1/11 = 0.0909
    // and < 2/11, so columns/rows 0 and 1 intersect and no others.
    #[test]
    fn corner_box_hits_first_two_rows_and_columns() {
        let g = location_grid("i", &[det("x", [0.0, 0.0, 0.15, 0.15], 1.0)]);
        let mut expected = vec![0.0; 100];
        for r in 0..10 {
            for c in 0..10 {
                let (x0, x1) = (c as f64 / 11.0, (c + 2) as f64 / 11.0);
                let (y0, y1) = (r as f64 / 11.0, (r + 2) as f64 / 11.0);
                let ix = 0.15f64.min(x1) - 0.0f64.max(x0);
                let iy = 0.15f64.min(y1) - 0.0f64.max(y0);
                if ix > 0.0 && iy > 0.0 {
                    expected[r * 10 + c] = 1.0;
                }
            }
        }
        assert_eq!(g.values, expected);
        assert_eq!(g.values.iter().sum::<f64>(), 4.0);
    }

    #[test]
    fn availability() {
        let set = ingest_detections_from(
            r#"{"image_id":"b","class_id":1,"class_name":"x","bbox":[0.1,0.1,0.5,0.5],"confidence":0.9}"#.as_bytes(),
            "d",
            10,
        )
        .unwrap();
        let ids: Vec<String> = ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect();
        let s = availability_stats([(ClassLabel::Concrete, ids.as_slice())], &set);
        assert_eq!(s.concrete_pct, 25.0);
        assert_eq!(s.abstract_pct, 0.0);
        let none = availability_stats([(ClassLabel::Abstract, ids.as_slice())], &DetectionSet::default());
        assert_eq!((none.abstract_pct, none.concrete_pct), (0.0, 0.0));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn bbox() -> impl Strategy<Value = [f64; 4]> {
            (0.0f64..0.99, 0.0f64..0.99, 0.001f64..1.0, 0.001f64..1.0).prop_map(|(x0, y0, wx, wy)| {
                [x0, y0, (x0 + wx).min(1.0), (y0 + wy).min(1.0)]
            }).prop_filter("positive area", |b| b[0] < b[2] && b[1] < b[3])
        }

        proptest! {
            #[test]
            fn grid_is_bounded_and_monotone(boxes in proptest::collection::vec(bbox(), 0..8), extra in bbox()) {
                let dets: Vec<_> = boxes.iter().map(|b| det("x", *b, 1.0)).collect();
                let g = location_grid("i", &dets);
                prop_assert!(g.values.iter().all(|&v| v <= dets.len() as f64));
                let mut more = dets.clone();
                more.push(det("x", extra, 1.0));
                let g2 = location_grid("i", &more);
                prop_assert!(g.values.iter().zip(&g2.values).all(|(a, b)| b >= a));
                // every positive-area box touches at least one cell
                prop_assert!(location_grid("i", &[det("x", extra, 1.0)]).values.iter().any(|&v| v > 0.0));
            }

            #[test]
            fn counts_sum_to_passing_detections(confs in proptest::collection::vec(0.0f64..=1.0, 0..20), conf_min in 0.0f64..=1.0) {
                let m = map();
                let dets: Vec<_> = confs.iter().enumerate().map(|(i, &c)| det(["banana", "apple", "dog"][i % 3], [0.0, 0.0, 0.5, 0.5], c)).collect();
                let v = hypernym_counts("i", &dets, &m, conf_min).unwrap();
                let passing = confs.iter().filter(|&&c| c >= conf_min).count() as f64;
                prop_assert_eq!(v.values.iter().sum::<f64>(), passing);
            }
        }
    }
}
