//! Annotation data model for spatio-temporal scene graphs.
//!
//! A dataset is an ordered list of videos; each video is an ordered list of
//! frames; each frame carries objects (with category and normalized bounding
//! box) and relation labels `(subject, predicate, object)`. Predicate classes
//! are grouped into named categories (e.g. attention / spatial / contacting)
//! and receive dense ids across the whole ontology.

mod json;
mod preset;
mod synth;

pub use json::{annotations_from_json, annotations_to_json, load_annotations_file, save_annotations_file};
pub use preset::action_genome_ontology;
pub use synth::{synth_longtail_dataset, SynthConfig};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One named predicate category with its ordered class names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredicateCategory {
    pub name: String,
    pub classes: Vec<String>,
}

/// The predicate and object-category vocabulary.
///
/// Predicate class ids are dense in `[0, num_predicates)`, assigned by
/// category order then class order within the category.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredicateOntology {
    categories: Vec<PredicateCategory>,
    object_categories: Vec<String>,
}

impl PredicateOntology {
    pub fn new(categories: Vec<PredicateCategory>, object_categories: Vec<String>) -> Result<Self> {
        if categories.is_empty() {
            return Err(Error::config("ontology needs at least one predicate category"));
        }
        if object_categories.is_empty() {
            return Err(Error::config("ontology needs at least one object category"));
        }
        let mut seen = std::collections::BTreeSet::new();
        for cat in &categories {
            if cat.classes.is_empty() {
                return Err(Error::config(format!(
                    "predicate category '{}' has no classes",
                    cat.name
                )));
            }
            for class in &cat.classes {
                if !seen.insert(class.clone()) {
                    return Err(Error::config(format!("duplicate predicate class name '{class}'")));
                }
            }
        }
        Ok(Self { categories, object_categories })
    }

    pub fn categories(&self) -> &[PredicateCategory] {
        &self.categories
    }

    pub fn object_categories(&self) -> &[String] {
        &self.object_categories
    }

    /// Total number of predicate classes across all categories.
    pub fn num_predicates(&self) -> usize {
        self.categories.iter().map(|c| c.classes.len()).sum()
    }

    pub fn num_object_categories(&self) -> usize {
        self.object_categories.len()
    }

    /// Dense id ranges per category, in category order.
    pub fn category_ranges(&self) -> Vec<std::ops::Range<u32>> {
        let mut ranges = Vec::with_capacity(self.categories.len());
        let mut start = 0u32;
        for cat in &self.categories {
            let end = start + cat.classes.len() as u32;
            ranges.push(start..end);
            start = end;
        }
        ranges
    }

    /// Name of a predicate class by dense id.
    pub fn predicate_name(&self, id: u32) -> Option<&str> {
        let mut rest = id as usize;
        for cat in &self.categories {
            if rest < cat.classes.len() {
                return Some(&cat.classes[rest]);
            }
            rest -= cat.classes.len();
        }
        None
    }

    /// Dense id of a predicate class by name.
    pub fn predicate_id(&self, name: &str) -> Option<u32> {
        let mut base = 0u32;
        for cat in &self.categories {
            if let Some(pos) = cat.classes.iter().position(|c| c == name) {
                return Some(base + pos as u32);
            }
            base += cat.classes.len() as u32;
        }
        None
    }

    pub fn object_category_id(&self, name: &str) -> Option<u32> {
        self.object_categories.iter().position(|c| c == name).map(|p| p as u32)
    }
}

/// Axis-aligned box with normalized corner coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl BoundingBox {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        let b = Self { x0, y0, x1, y1 };
        if b.is_valid() {
            Ok(b)
        } else {
            Err(Error::domain(format!("invalid bounding box [{x0}, {y0}, {x1}, {y1}]")))
        }
    }

    pub fn is_valid(&self) -> bool {
        let in_unit = |v: f64| (0.0..=1.0).contains(&v);
        in_unit(self.x0)
            && in_unit(self.y0)
            && in_unit(self.x1)
            && in_unit(self.y1)
            && self.x0 <= self.x1
            && self.y0 <= self.y1
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.x0, self.y0, self.x1, self.y1]
    }
}

/// An object observed in one frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectAnnotation {
    pub id: u32,
    pub category: u32,
    pub bbox: BoundingBox,
}

/// One relation label; `slot` is its position in the frame's relation list
/// and is the stable key mask files address labels by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationInstance {
    pub subject: u32,
    pub object: u32,
    pub predicate: u32,
    pub slot: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameAnnotations {
    pub index: u32,
    pub objects: Vec<ObjectAnnotation>,
    pub relations: Vec<RelationInstance>,
}

impl FrameAnnotations {
    pub fn object(&self, id: u32) -> Option<&ObjectAnnotation> {
        self.objects.iter().find(|o| o.id == id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoAnnotations {
    pub id: String,
    pub frames: Vec<FrameAnnotations>,
}

/// Ground-truth annotations for a whole dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetAnnotations {
    pub ontology: PredicateOntology,
    pub videos: Vec<VideoAnnotations>,
}

impl DatasetAnnotations {
    /// Total number of relation labels.
    pub fn num_labels(&self) -> u64 {
        self.videos
            .iter()
            .flat_map(|v| &v.frames)
            .map(|f| f.relations.len() as u64)
            .sum()
    }

    pub fn num_frames(&self) -> usize {
        self.videos.iter().map(|v| v.frames.len()).sum()
    }
}

/// Per-predicate-class label counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCountTable {
    pub counts: Vec<u64>,
    pub total: u64,
}

impl ClassCountTable {
    /// Shannon entropy (nats) of the class distribution; 0 for an empty table.
    pub fn entropy(&self) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        let n = self.total as f64;
        self.counts
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let p = c as f64 / n;
                -p * p.ln()
            })
            .sum()
    }
}

/// Count labels per predicate class.
pub fn count_predicates(data: &DatasetAnnotations) -> ClassCountTable {
    let mut counts = vec![0u64; data.ontology.num_predicates()];
    let mut total = 0u64;
    for video in &data.videos {
        for frame in &video.frames {
            for rel in &frame.relations {
                counts[rel.predicate as usize] += 1;
                total += 1;
            }
        }
    }
    ClassCountTable { counts, total }
}

/// Check every structural invariant; returns one message per violation,
/// each naming the video/frame/relation it was found at.
pub fn validate_annotations(data: &DatasetAnnotations) -> Vec<String> {
    let mut violations = Vec::new();
    let num_preds = data.ontology.num_predicates() as u32;
    let num_obj_cats = data.ontology.num_object_categories() as u32;

    let mut video_ids = std::collections::BTreeSet::new();
    for video in &data.videos {
        if !video_ids.insert(&video.id) {
            violations.push(format!("video {}: duplicate video id", video.id));
        }
        let mut last_frame: Option<u32> = None;
        for frame in &video.frames {
            let at = format!("video {} frame {}", video.id, frame.index);
            if let Some(prev) = last_frame {
                if frame.index <= prev {
                    violations.push(format!("{at}: frame indices not strictly increasing"));
                }
            }
            last_frame = Some(frame.index);

            let mut object_ids = std::collections::BTreeSet::new();
            for obj in &frame.objects {
                if !object_ids.insert(obj.id) {
                    violations.push(format!("{at}: duplicate object id {}", obj.id));
                }
                if obj.category >= num_obj_cats {
                    violations.push(format!("{at}: object {} has unknown category {}", obj.id, obj.category));
                }
                if !obj.bbox.is_valid() {
                    violations.push(format!("{at}: object {} has invalid bounding box", obj.id));
                }
            }

            let mut triples = std::collections::BTreeSet::new();
            for (idx, rel) in frame.relations.iter().enumerate() {
                let rat = format!("{at} relation {idx}");
                if rel.slot != idx as u32 {
                    violations.push(format!("{rat}: slot {} does not match list position", rel.slot));
                }
                if rel.subject == rel.object {
                    violations.push(format!("{rat}: subject and object are the same id {}", rel.subject));
                }
                for side in [rel.subject, rel.object] {
                    if !object_ids.contains(&side) {
                        violations.push(format!("{rat}: references missing object id {side}"));
                    }
                }
                if rel.predicate >= num_preds {
                    violations.push(format!("{rat}: unknown predicate id {}", rel.predicate));
                }
                if !triples.insert((rel.subject, rel.object, rel.predicate)) {
                    violations.push(format!(
                        "{rat}: duplicate (subject, object, predicate) = ({}, {}, {})",
                        rel.subject, rel.object, rel.predicate
                    ));
                }
            }
        }
    }
    violations
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_ontology() -> PredicateOntology {
        PredicateOntology::new(
            vec![PredicateCategory {
                name: "rel".into(),
                classes: vec!["p0".into(), "p1".into(), "p2".into()],
            }],
            vec!["agent".into(), "thing".into()],
        )
        .unwrap()
    }

    fn frame_with(relations: Vec<(u32, u32, u32)>) -> FrameAnnotations {
        let bbox = BoundingBox::new(0.1, 0.1, 0.4, 0.4).unwrap();
        FrameAnnotations {
            index: 0,
            objects: vec![
                ObjectAnnotation { id: 1, category: 0, bbox },
                ObjectAnnotation { id: 2, category: 1, bbox },
                ObjectAnnotation { id: 3, category: 1, bbox },
            ],
            relations: relations
                .into_iter()
                .enumerate()
                .map(|(slot, (s, o, p))| RelationInstance {
                    subject: s,
                    object: o,
                    predicate: p,
                    slot: slot as u32,
                })
                .collect(),
        }
    }

    #[test]
    fn count_empty_dataset_is_zero() {
        let data = DatasetAnnotations { ontology: tiny_ontology(), videos: vec![] };
        let table = count_predicates(&data);
        assert_eq!(table.total, 0);
        assert!(table.counts.iter().all(|&c| c == 0));
        assert_eq!(table.entropy(), 0.0);
    }

    #[test]
    fn count_single_frame() {
        let data = DatasetAnnotations {
            ontology: tiny_ontology(),
            videos: vec![VideoAnnotations {
                id: "v".into(),
                frames: vec![frame_with(vec![(1, 2, 0), (1, 2, 1), (1, 3, 0)])],
            }],
        };
        let table = count_predicates(&data);
        assert_eq!(table.counts, vec![2, 1, 0]);
        assert_eq!(table.total, 3);
    }

    #[test]
    fn validate_accepts_well_formed_frame() {
        let data = DatasetAnnotations {
            ontology: tiny_ontology(),
            videos: vec![VideoAnnotations {
                id: "v".into(),
                frames: vec![frame_with(vec![(1, 2, 0), (1, 2, 1)])],
            }],
        };
        assert!(validate_annotations(&data).is_empty());
    }

    #[test]
    fn validate_flags_missing_object() {
        let data = DatasetAnnotations {
            ontology: tiny_ontology(),
            videos: vec![VideoAnnotations { id: "v".into(), frames: vec![frame_with(vec![(1, 9, 0)])] }],
        };
        let violations = validate_annotations(&data);
        assert_eq!(violations.len(), 1);
        assert!(violations[0].contains("missing object id 9"), "{violations:?}");
    }

    #[test]
    fn validate_flags_duplicate_triple() {
        let data = DatasetAnnotations {
            ontology: tiny_ontology(),
            videos: vec![VideoAnnotations {
                id: "v".into(),
                frames: vec![frame_with(vec![(1, 2, 0), (1, 2, 0)])],
            }],
        };
        let violations = validate_annotations(&data);
        assert_eq!(violations.len(), 1);
        assert!(violations[0].contains("duplicate (subject, object, predicate)"));
    }

    #[test]
    fn predicate_ids_are_dense_across_categories() {
        let ont = PredicateOntology::new(
            vec![
                PredicateCategory { name: "a".into(), classes: vec!["x".into(), "y".into()] },
                PredicateCategory { name: "b".into(), classes: vec!["z".into()] },
            ],
            vec!["o".into()],
        )
        .unwrap();
        assert_eq!(ont.num_predicates(), 3);
        assert_eq!(ont.predicate_id("z"), Some(2));
        assert_eq!(ont.predicate_name(2), Some("z"));
        assert_eq!(ont.category_ranges(), vec![0..2, 2..3]);
    }
}
