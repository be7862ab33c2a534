//! Synthetic long-tailed dataset generation.
//!
//! Stands in for a real spatio-temporal scene-graph dataset at desk scale:
//! each video holds a fixed agent + object cast, each agent-object pair
//! carries relation labels drawn per category from a Zipf distribution over
//! that category's classes (rank 0 = head), and labels persist across the
//! video's frames so objects stay continuous for anticipation training.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::stream::substream;

use super::{
    BoundingBox, DatasetAnnotations, FrameAnnotations, ObjectAnnotation, PredicateCategory,
    PredicateOntology, RelationInstance, VideoAnnotations,
};

/// Parameters for [`synth_longtail_dataset`].
#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub videos: usize,
    pub frames_per_video: usize,
    pub pairs_per_frame: usize,
    /// Zipf exponent for per-category class frequencies; 0 is uniform.
    pub zipf_exponent: f64,
    /// Number of predicate classes in each category.
    pub classes_per_category: Vec<usize>,
    /// Probability that a pair carries at least one label in a category.
    pub label_rate: f64,
    pub seed: u64,
}

impl SynthConfig {
    fn validate(&self) -> Result<()> {
        if self.videos == 0 || self.frames_per_video == 0 || self.pairs_per_frame == 0 {
            return Err(Error::config("videos, frames_per_video and pairs_per_frame must be >= 1"));
        }
        if self.classes_per_category.is_empty() {
            return Err(Error::config("need at least one predicate category"));
        }
        if self.classes_per_category.iter().any(|&n| n == 0) {
            return Err(Error::config("every predicate category needs at least one class"));
        }
        if !(self.zipf_exponent >= 0.0) {
            return Err(Error::config("zipf_exponent must be >= 0"));
        }
        if !(self.label_rate > 0.0 && self.label_rate <= 1.0) {
            return Err(Error::config("label_rate must be in (0, 1]"));
        }
        Ok(())
    }
}

const OBJECT_CATEGORIES: usize = 9; // "agent" + 8 generic things
const EXTRA_LABEL_PROB: f64 = 0.3;

/// Cumulative Zipf weights over `n` ranks with exponent `s`.
struct ZipfTable {
    cumulative: Vec<f64>,
}

impl ZipfTable {
    fn new(n: usize, s: f64) -> Self {
        let mut cumulative = Vec::with_capacity(n);
        let mut acc = 0.0;
        for rank in 0..n {
            acc += ((rank + 1) as f64).powf(-s);
            cumulative.push(acc);
        }
        Self { cumulative }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> usize {
        let total = *self.cumulative.last().expect("non-empty table");
        let u = rng.gen::<f64>() * total;
        self.cumulative.partition_point(|&c| c <= u).min(self.cumulative.len() - 1)
    }
}

fn synth_ontology(classes_per_category: &[usize]) -> PredicateOntology {
    let categories = classes_per_category
        .iter()
        .enumerate()
        .map(|(i, &n)| PredicateCategory {
            name: format!("group{i}"),
            classes: (0..n).map(|j| format!("g{i}_p{j:02}")).collect(),
        })
        .collect();
    let mut objects = vec!["agent".to_string()];
    objects.extend((0..OBJECT_CATEGORIES - 1).map(|i| format!("thing{i}")));
    PredicateOntology::new(categories, objects).expect("synthetic ontology is well-formed")
}

/// Generate a deterministic long-tailed dataset.
///
/// Pair labels are drawn once per video and repeated on every frame, so the
/// per-class totals follow the Zipf profile while objects and relations stay
/// continuous across time. Every labeled (pair, category) carries at least
/// one class, occasionally two.
pub fn synth_longtail_dataset(cfg: &SynthConfig) -> Result<DatasetAnnotations> {
    cfg.validate()?;
    let ontology = synth_ontology(&cfg.classes_per_category);
    let ranges = ontology.category_ranges();
    let zipf: Vec<ZipfTable> = cfg
        .classes_per_category
        .iter()
        .map(|&n| ZipfTable::new(n, cfg.zipf_exponent))
        .collect();

    let mut videos = Vec::with_capacity(cfg.videos);
    for v in 0..cfg.videos {
        let mut rng = substream(cfg.seed, "synth-video", v as u64);
        let video_id = format!("v{v:04}");

        // Object cast: id 0 is the agent, ids 1..=pairs are its partners.
        let num_objects = cfg.pairs_per_frame + 1;
        let categories: Vec<u32> = (0..num_objects)
            .map(|k| if k == 0 { 0 } else { rng.gen_range(1..OBJECT_CATEGORIES as u32) })
            .collect();
        let mut centers: Vec<(f64, f64)> =
            (0..num_objects).map(|_| (rng.gen_range(0.2..0.8), rng.gen_range(0.2..0.8))).collect();
        let halves: Vec<(f64, f64)> = (0..num_objects)
            .map(|_| (rng.gen_range(0.03..0.12), rng.gen_range(0.03..0.12)))
            .collect();

        // Per-pair label sets, fixed for the whole video.
        let mut pair_labels: Vec<Vec<u32>> = Vec::with_capacity(cfg.pairs_per_frame);
        for _ in 0..cfg.pairs_per_frame {
            let mut labels = Vec::new();
            for (cat, range) in ranges.iter().enumerate() {
                if rng.gen::<f64>() >= cfg.label_rate {
                    continue;
                }
                let want = 1 + usize::from(
                    rng.gen::<f64>() < EXTRA_LABEL_PROB && cfg.classes_per_category[cat] > 1,
                );
                let mut chosen: Vec<u32> = Vec::with_capacity(want);
                while chosen.len() < want {
                    let class = range.start + zipf[cat].sample(&mut rng) as u32;
                    if !chosen.contains(&class) {
                        chosen.push(class);
                    }
                }
                labels.extend(chosen);
            }
            pair_labels.push(labels);
        }

        let mut frames = Vec::with_capacity(cfg.frames_per_video);
        for t in 0..cfg.frames_per_video {
            let objects: Vec<ObjectAnnotation> = (0..num_objects)
                .map(|k| {
                    let (hw, hh) = halves[k];
                    let (cx, cy) = centers[k];
                    ObjectAnnotation {
                        id: k as u32,
                        category: categories[k],
                        bbox: BoundingBox {
                            x0: (cx - hw).clamp(0.0, 1.0),
                            y0: (cy - hh).clamp(0.0, 1.0),
                            x1: (cx + hw).clamp(0.0, 1.0),
                            y1: (cy + hh).clamp(0.0, 1.0),
                        },
                    }
                })
                .collect();

            let mut relations = Vec::new();
            for (pair, labels) in pair_labels.iter().enumerate() {
                for &predicate in labels {
                    relations.push(RelationInstance {
                        subject: 0,
                        object: (pair + 1) as u32,
                        predicate,
                        slot: relations.len() as u32,
                    });
                }
            }
            frames.push(FrameAnnotations { index: t as u32, objects, relations });

            // Smooth drift for the next frame's boxes.
            for center in centers.iter_mut() {
                center.0 = (center.0 + rng.gen_range(-0.01..0.01)).clamp(0.15, 0.85);
                center.1 = (center.1 + rng.gen_range(-0.01..0.01)).clamp(0.15, 0.85);
            }
        }
        videos.push(VideoAnnotations { id: video_id, frames });
    }

    Ok(DatasetAnnotations { ontology, videos })
}
