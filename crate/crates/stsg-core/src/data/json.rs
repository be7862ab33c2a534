//! JSON annotation file format.
//!
//! ```json
//! {
//!   "ontology": {
//!     "categories": [{"name": "attention", "classes": ["looking_at"]}],
//!     "objects": ["person", "cup"]
//!   },
//!   "videos": [{
//!     "id": "v0000",
//!     "frames": [{
//!       "t": 0,
//!       "objects": [{"id": 0, "cat": "person", "box": [0.1, 0.1, 0.5, 0.9]}],
//!       "relations": [{"sub": 0, "obj": 1, "pred": "looking_at"}]
//!     }]
//!   }]
//! }
//! ```
//!
//! Class and category names are mapped to dense ids on load; relation `slot`s
//! are assigned by array order. Loading validates the result and rejects any
//! file with violations.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{
    validate_annotations, BoundingBox, DatasetAnnotations, FrameAnnotations, ObjectAnnotation,
    PredicateCategory, PredicateOntology, RelationInstance, VideoAnnotations,
};

#[derive(Serialize, Deserialize)]
struct FileDoc {
    ontology: FileOntology,
    videos: Vec<FileVideo>,
}

#[derive(Serialize, Deserialize)]
struct FileOntology {
    categories: Vec<FileCategory>,
    objects: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct FileCategory {
    name: String,
    classes: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct FileVideo {
    id: String,
    frames: Vec<FileFrame>,
}

#[derive(Serialize, Deserialize)]
struct FileFrame {
    t: u32,
    objects: Vec<FileObject>,
    relations: Vec<FileRelation>,
}

#[derive(Serialize, Deserialize)]
struct FileObject {
    id: u32,
    cat: String,
    #[serde(rename = "box")]
    bbox: [f64; 4],
}

#[derive(Serialize, Deserialize)]
struct FileRelation {
    sub: u32,
    obj: u32,
    pred: String,
}

/// Serialize a dataset to the annotation JSON format.
pub fn annotations_to_json(data: &DatasetAnnotations) -> String {
    let doc = FileDoc {
        ontology: FileOntology {
            categories: data
                .ontology
                .categories()
                .iter()
                .map(|c| FileCategory { name: c.name.clone(), classes: c.classes.clone() })
                .collect(),
            objects: data.ontology.object_categories().to_vec(),
        },
        videos: data
            .videos
            .iter()
            .map(|v| FileVideo {
                id: v.id.clone(),
                frames: v
                    .frames
                    .iter()
                    .map(|f| FileFrame {
                        t: f.index,
                        objects: f
                            .objects
                            .iter()
                            .map(|o| FileObject {
                                id: o.id,
                                cat: data.ontology.object_categories()[o.category as usize].clone(),
                                bbox: o.bbox.as_array(),
                            })
                            .collect(),
                        relations: f
                            .relations
                            .iter()
                            .map(|r| FileRelation {
                                sub: r.subject,
                                obj: r.object,
                                pred: data
                                    .ontology
                                    .predicate_name(r.predicate)
                                    .expect("predicate id in range")
                                    .to_string(),
                            })
                            .collect(),
                    })
                    .collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("annotation document serializes")
}

/// Parse the annotation JSON format, mapping names to dense ids, and validate.
pub fn annotations_from_json(text: &str) -> Result<DatasetAnnotations> {
    let doc: FileDoc = serde_json::from_str(text)?;
    let ontology = PredicateOntology::new(
        doc.ontology
            .categories
            .into_iter()
            .map(|c| PredicateCategory { name: c.name, classes: c.classes })
            .collect(),
        doc.ontology.objects,
    )?;

    let mut videos = Vec::with_capacity(doc.videos.len());
    for v in doc.videos {
        let mut frames = Vec::with_capacity(v.frames.len());
        for f in v.frames {
            let at = format!("video {} frame {}", v.id, f.t);
            let objects = f
                .objects
                .into_iter()
                .map(|o| {
                    let category = ontology.object_category_id(&o.cat).ok_or_else(|| {
                        Error::config(format!("{at}: unknown object category '{}'", o.cat))
                    })?;
                    Ok(ObjectAnnotation {
                        id: o.id,
                        category,
                        bbox: BoundingBox {
                            x0: o.bbox[0],
                            y0: o.bbox[1],
                            x1: o.bbox[2],
                            y1: o.bbox[3],
                        },
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let relations = f
                .relations
                .into_iter()
                .enumerate()
                .map(|(slot, r)| {
                    let predicate = ontology.predicate_id(&r.pred).ok_or_else(|| {
                        Error::config(format!("{at} relation {slot}: unknown predicate '{}'", r.pred))
                    })?;
                    Ok(RelationInstance { subject: r.sub, object: r.obj, predicate, slot: slot as u32 })
                })
                .collect::<Result<Vec<_>>>()?;
            frames.push(FrameAnnotations { index: f.t, objects, relations });
        }
        videos.push(VideoAnnotations { id: v.id, frames });
    }

    let data = DatasetAnnotations { ontology, videos };
    let violations = validate_annotations(&data);
    if !violations.is_empty() {
        return Err(Error::InvalidData(violations));
    }
    Ok(data)
}

/// Write a dataset to `path` in the annotation JSON format.
pub fn save_annotations_file(data: &DatasetAnnotations, path: &Path) -> Result<()> {
    std::fs::write(path, annotations_to_json(data))?;
    Ok(())
}

/// Load and validate an annotation JSON file.
pub fn load_annotations_file(path: &Path) -> Result<DatasetAnnotations> {
    let text = std::fs::read_to_string(path)?;
    annotations_from_json(&text)
}
