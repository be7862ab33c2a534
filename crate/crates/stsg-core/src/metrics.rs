//! Recall@K and meanRecall@K over assembled scene graphs.
//!
//! A ground-truth triplet counts as recovered when some prediction in the
//! confidence-ranked top-K prefix matches it: same subject/object identity
//! (default) or same categories with box IoU above a threshold, plus the
//! same predicate. Recall is averaged per frame; mean recall pools per-class
//! hits and totals across the split before dividing, then averages the
//! classes present in the ground truth.

use serde::{Deserialize, Serialize};

use crate::data::{BoundingBox, FrameAnnotations, ObjectAnnotation};
use crate::graphbuild::SceneGraph;

/// Graph assembly strategy an evaluation uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    With,
    No,
    Semi,
}

impl Strategy {
    pub fn label(&self) -> &'static str {
        match self {
            Strategy::With => "with",
            Strategy::No => "no",
            Strategy::Semi => "semi",
        }
    }
}

/// Triplet matching rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Matching {
    PairIdentity,
    Iou,
}

/// Evaluation settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSpec {
    /// K values, ascending.
    pub ks: Vec<usize>,
    pub strategy: Strategy,
    pub matching: Matching,
    pub iou_threshold: f64,
    /// Uniform semi-constraint confidence threshold.
    pub semi_threshold: f64,
    /// Portion of each video observed before anticipating (anticipation
    /// evaluation only).
    pub observed_fraction: Option<f64>,
}

/// Preset observed fractions commonly reported.
pub const OBSERVED_FRACTION_PRESETS: [f64; 4] = [0.3, 0.5, 0.7, 0.9];

impl Default for EvalSpec {
    fn default() -> Self {
        Self {
            ks: vec![10, 20, 50],
            strategy: Strategy::No,
            matching: Matching::PairIdentity,
            iou_threshold: 0.5,
            semi_threshold: 0.5,
            observed_fraction: None,
        }
    }
}

impl EvalSpec {
    pub fn validate(&self) -> crate::Result<()> {
        if self.ks.is_empty() || self.ks.iter().any(|&k| k == 0) {
            return Err(crate::Error::config("ks must be non-empty and positive"));
        }
        if self.ks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(crate::Error::config("ks must be strictly ascending"));
        }
        if let Some(f) = self.observed_fraction {
            if !(f > 0.0 && f < 1.0) {
                return Err(crate::Error::config("observed_fraction must be in (0, 1)"));
            }
        }
        Ok(())
    }
}

/// Metric values for one K.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMetrics {
    pub k: usize,
    /// Absent when no frame carries ground truth.
    pub recall: Option<f64>,
    pub mean_recall: Option<f64>,
    /// Per-class recall; `None` for classes absent from the ground truth.
    pub per_class: Vec<Option<f64>>,
}

/// Results of one evaluation under one strategy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricTable {
    pub strategy: Strategy,
    pub rows: Vec<KMetrics>,
}

impl MetricTable {
    pub fn row(&self, k: usize) -> Option<&KMetrics> {
        self.rows.iter().find(|r| r.k == k)
    }
}

/// One frame to evaluate: its ground truth, the predicted graph, and
/// (for IoU matching) the object table predictions refer to. When
/// `pred_objects` is `None` predictions resolve against the ground-truth
/// objects.
#[derive(Debug, Clone, Copy)]
pub struct FrameEval<'a> {
    pub gt: &'a FrameAnnotations,
    pub graph: &'a SceneGraph,
    pub pred_objects: Option<&'a [ObjectAnnotation]>,
}

/// Intersection over union of two boxes; 0 when the union is empty.
pub fn iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let ix = (a.x1.min(b.x1) - a.x0.max(b.x0)).max(0.0);
    let iy = (a.y1.min(b.y1) - a.y0.max(b.y0)).max(0.0);
    let inter = ix * iy;
    let area = |r: &BoundingBox| (r.x1 - r.x0) * (r.y1 - r.y0);
    let union = area(a) + area(b) - inter;
    if union <= 0.0 {
        0.0
    } else {
        inter / union
    }
}

fn lookup<'a>(objects: &'a [ObjectAnnotation], id: u32) -> Option<&'a ObjectAnnotation> {
    objects.iter().find(|o| o.id == id)
}

/// Greedy one-to-one matching of the top-`k` prediction prefix against the
/// frame's ground truth, in prediction-rank order. Returns matched
/// ground-truth relation indices.
pub fn match_triplets(frame: &FrameEval, k: usize, spec: &EvalSpec) -> Vec<usize> {
    let gt = frame.gt;
    let pred_objects = frame.pred_objects.unwrap_or(&gt.objects);
    let mut matched_gt = vec![false; gt.relations.len()];
    let mut matched = Vec::new();
    for pred in frame.graph.triplets.iter().take(k) {
        let candidate = gt.relations.iter().enumerate().find(|(idx, rel)| {
            if matched_gt[*idx] || rel.predicate != pred.predicate {
                return false;
            }
            match spec.matching {
                Matching::PairIdentity => rel.subject == pred.subject && rel.object == pred.object,
                Matching::Iou => {
                    let (Some(ps), Some(po)) =
                        (lookup(pred_objects, pred.subject), lookup(pred_objects, pred.object))
                    else {
                        return false;
                    };
                    let (Some(gs), Some(go)) =
                        (lookup(&gt.objects, rel.subject), lookup(&gt.objects, rel.object))
                    else {
                        return false;
                    };
                    ps.category == gs.category
                        && po.category == go.category
                        && iou(&ps.bbox, &gs.bbox) >= spec.iou_threshold
                        && iou(&po.bbox, &go.bbox) >= spec.iou_threshold
                }
            }
        });
        if let Some((idx, _)) = candidate {
            matched_gt[idx] = true;
            matched.push(idx);
        }
    }
    matched
}

/// Compute R@K and mR@K for every K in the spec over aligned frames.
pub fn evaluate(frames: &[FrameEval], num_classes: usize, spec: &EvalSpec) -> MetricTable {
    let mut rows = Vec::with_capacity(spec.ks.len());
    for &k in &spec.ks {
        let mut frame_recalls: Vec<f64> = Vec::new();
        let mut class_hits = vec![0u64; num_classes];
        let mut class_totals = vec![0u64; num_classes];
        for frame in frames {
            let gt_count = frame.gt.relations.len();
            if gt_count == 0 {
                continue;
            }
            let matched = match_triplets(frame, k, spec);
            frame_recalls.push(matched.len() as f64 / gt_count as f64);
            for rel in &frame.gt.relations {
                class_totals[rel.predicate as usize] += 1;
            }
            for idx in matched {
                class_hits[frame.gt.relations[idx].predicate as usize] += 1;
            }
        }
        let recall = if frame_recalls.is_empty() {
            None
        } else {
            Some(frame_recalls.iter().sum::<f64>() / frame_recalls.len() as f64)
        };
        let per_class: Vec<Option<f64>> = class_hits
            .iter()
            .zip(&class_totals)
            .map(|(&h, &t)| if t == 0 { None } else { Some(h as f64 / t as f64) })
            .collect();
        let present: Vec<f64> = per_class.iter().filter_map(|&r| r).collect();
        let mean_recall = if present.is_empty() {
            None
        } else {
            Some(present.iter().sum::<f64>() / present.len() as f64)
        };
        rows.push(KMetrics { k, recall, mean_recall, per_class });
    }
    MetricTable { strategy: spec.strategy, rows }
}

/// Per-frame recall at each K (dataset mean over frames with ground truth).
pub fn recall_at_k(frames: &[FrameEval], num_classes: usize, spec: &EvalSpec) -> Vec<Option<f64>> {
    evaluate(frames, num_classes, spec).rows.into_iter().map(|r| r.recall).collect()
}

/// Mean per-class recall at each K plus the per-class vectors.
pub fn mean_recall_at_k(
    frames: &[FrameEval],
    num_classes: usize,
    spec: &EvalSpec,
) -> Vec<(Option<f64>, Vec<Option<f64>>)> {
    evaluate(frames, num_classes, spec)
        .rows
        .into_iter()
        .map(|r| (r.mean_recall, r.per_class))
        .collect()
}
