//! Loss primitives with exact gradients, and the masked composite objectives.
//!
//! Every function returns `(value, gradient)` computed in closed form; there
//! is no autodiff anywhere. Masked positive labels are removed from the
//! computation entirely, so their gradient entries are bitwise zero.
//! Subgradients at hinge kinks take the inactive branch (0).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Raw (unnormalized) per-predicate scores for one object pair at one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct PredicateScores(pub Vec<f64>);

/// Normalized per-object-category probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectCategoryScores(pub Vec<f64>);

impl ObjectCategoryScores {
    pub fn validate(&self) -> Result<()> {
        if self.0.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::domain("object probabilities must be finite and non-negative"));
        }
        let sum: f64 = self.0.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::domain(format!("object probabilities must sum to 1 (got {sum})")));
        }
        Ok(())
    }
}

/// Weights for the composite objectives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
    pub l4: f64,
    pub l5: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self { l1: 1.0, l2: 1.0, l3: 1.0, l4: 1.0, l5: 1.0 }
    }
}

impl LossWeights {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in
            [("l1", self.l1), ("l2", self.l2), ("l3", self.l3), ("l4", self.l4), ("l5", self.l5)]
        {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::config(format!("loss weight {name} must be finite and >= 0")));
            }
        }
        Ok(())
    }
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&x| (x - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

const PROB_FLOOR: f64 = 1e-12;

/// Multi-label margin loss over one score vector.
///
/// `sum over positive u, negative v of max(0, 1 - s[u] + s[v])`: every
/// positive must beat every negative by a margin of 1. The gradient is the
/// exact subgradient, 0 at kink points.
pub fn multilabel_margin_with_grad(scores: &[f64], positives: &[u32]) -> Result<(f64, Vec<f64>)> {
    if positives.is_empty() {
        return Err(Error::domain("margin loss undefined for an empty positive set"));
    }
    let n = scores.len();
    for &u in positives {
        if u as usize >= n {
            return Err(Error::domain(format!("positive class {u} out of range 0..{n}")));
        }
    }
    let is_positive = {
        let mut mask = vec![false; n];
        for &u in positives {
            mask[u as usize] = true;
        }
        mask
    };
    let mut value = 0.0;
    let mut grad = vec![0.0; n];
    for &u in positives {
        let su = scores[u as usize];
        for (v, &sv) in scores.iter().enumerate() {
            if is_positive[v] {
                continue;
            }
            let hinge = 1.0 - su + sv;
            if hinge > 0.0 {
                value += hinge;
                grad[u as usize] -= 1.0;
                grad[v] += 1.0;
            }
        }
    }
    Ok((value, grad))
}

/// Margin loss with per-positive-label mask bits; `true` voids that label.
///
/// Masked positives are deleted from the computation (they act as neither
/// positive nor negative), so the per-label loss terms partition exactly:
/// the masked and complement-masked losses sum to the unmasked loss. If all
/// positives are masked the result is `(0, zero gradient)`.
pub fn masked_predicate_loss(
    scores: &[f64],
    positives: &[u32],
    mask_bits: &[bool],
) -> Result<(f64, Vec<f64>)> {
    if positives.is_empty() {
        return Err(Error::domain("margin loss undefined for an empty positive set"));
    }
    if mask_bits.len() != positives.len() {
        return Err(Error::internal(format!(
            "mask bits ({}) misaligned with positive labels ({})",
            mask_bits.len(),
            positives.len()
        )));
    }
    let n = scores.len();
    for &u in positives {
        if u as usize >= n {
            return Err(Error::domain(format!("positive class {u} out of range 0..{n}")));
        }
    }
    let is_positive = {
        let mut mask = vec![false; n];
        for &u in positives {
            mask[u as usize] = true;
        }
        mask
    };
    let mut value = 0.0;
    let mut grad = vec![0.0; n];
    for (&u, &masked) in positives.iter().zip(mask_bits) {
        if masked {
            continue;
        }
        let su = scores[u as usize];
        for (v, &sv) in scores.iter().enumerate() {
            if is_positive[v] {
                continue;
            }
            let hinge = 1.0 - su + sv;
            if hinge > 0.0 {
                value += hinge;
                grad[u as usize] -= 1.0;
                grad[v] += 1.0;
            }
        }
    }
    Ok((value, grad))
}

/// Cross-entropy over normalized probabilities.
///
/// Returns `-log p[label]` (probability floored at 1e-12, never infinite)
/// and the gradient in pre-softmax logit space, `p - one_hot(label)`.
pub fn cross_entropy_with_grad(
    probs: &ObjectCategoryScores,
    label: usize,
) -> Result<(f64, Vec<f64>)> {
    probs.validate()?;
    let p = &probs.0;
    if label >= p.len() {
        return Err(Error::domain(format!("label {label} out of range 0..{}", p.len())));
    }
    let value = -(p[label].max(PROB_FLOOR)).ln();
    let mut grad = p.clone();
    grad[label] -= 1.0;
    Ok((value, grad))
}

fn huber(d: f64) -> f64 {
    let a = d.abs();
    if a <= 1.0 {
        0.5 * d * d
    } else {
        a - 0.5
    }
}

fn huber_grad(d: f64) -> f64 {
    if d.abs() <= 1.0 {
        d
    } else {
        d.signum()
    }
}

/// Elementwise Huber (smooth-L1) distance, summed; transition at |d| = 1.
/// The gradient is with respect to `a`.
pub fn smooth_l1_with_grad(a: &[f64], b: &[f64]) -> Result<(f64, Vec<f64>)> {
    if a.len() != b.len() {
        return Err(Error::domain(format!(
            "smooth_l1 length mismatch: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let mut value = 0.0;
    let mut grad = Vec::with_capacity(a.len());
    for (&x, &y) in a.iter().zip(b) {
        let d = x - y;
        value += huber(d);
        grad.push(huber_grad(d));
    }
    Ok((value, grad))
}

/// One loss term with its gradient over the term's own input vector.
#[derive(Debug, Clone, PartialEq)]
pub struct TermGrad {
    pub value: f64,
    pub grad: Vec<f64>,
}

/// Per-frame loss terms for the generation objective.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FrameTerms {
    /// Masked predicate-classification terms, one per object pair.
    pub gen: Vec<TermGrad>,
    /// Object-classification terms.
    pub obj: Vec<TermGrad>,
}

/// Loss terms for one anticipation cutoff.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CutoffTerms {
    /// Masked anticipated predicate-classification terms.
    pub ant: Vec<TermGrad>,
    /// Bounding-box regression terms.
    pub boxes: Vec<TermGrad>,
    /// Representation reconstruction terms.
    pub recon: Vec<TermGrad>,
}

/// Per-term values and weighted gradients of a composite objective.
///
/// `total = l1*gen + l2*obj + l3*ant + l4*boxes + l5*recon`; each gradient
/// list is aligned with the corresponding input terms in order and already
/// scaled by its weight.
#[derive(Debug, Clone, PartialEq)]
pub struct LossBreakdown {
    pub gen: f64,
    pub obj: f64,
    pub ant: f64,
    pub boxes: f64,
    pub recon: f64,
    pub total: f64,
    pub gen_grads: Vec<Vec<f64>>,
    pub obj_grads: Vec<Vec<f64>>,
    pub ant_grads: Vec<Vec<f64>>,
    pub boxes_grads: Vec<Vec<f64>>,
    pub recon_grads: Vec<Vec<f64>>,
}

/// Value-only view of a breakdown, suitable for reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossSummary {
    pub gen: f64,
    pub obj: f64,
    pub ant: f64,
    pub boxes: f64,
    pub recon: f64,
    pub total: f64,
}

impl LossBreakdown {
    pub fn summary(&self) -> LossSummary {
        LossSummary {
            gen: self.gen,
            obj: self.obj,
            ant: self.ant,
            boxes: self.boxes,
            recon: self.recon,
            total: self.total,
        }
    }
}

fn weighted(terms: &[&TermGrad], weight: f64) -> (f64, Vec<Vec<f64>>) {
    let mut sum = 0.0;
    let mut grads = Vec::with_capacity(terms.len());
    for term in terms {
        sum += term.value;
        grads.push(term.grad.iter().map(|g| weight * g).collect());
    }
    (sum, grads)
}

/// Video scene-graph generation objective:
/// `sum over frames of (l1 * masked predicate loss + l2 * object losses)`.
pub fn vidsgg_objective(frames: &[FrameTerms], weights: &LossWeights) -> LossBreakdown {
    let gen_terms: Vec<&TermGrad> = frames.iter().flat_map(|f| &f.gen).collect();
    let obj_terms: Vec<&TermGrad> = frames.iter().flat_map(|f| &f.obj).collect();
    let (gen, gen_grads) = weighted(&gen_terms, weights.l1);
    let (obj, obj_grads) = weighted(&obj_terms, weights.l2);
    LossBreakdown {
        gen,
        obj,
        ant: 0.0,
        boxes: 0.0,
        recon: 0.0,
        total: weights.l1 * gen + weights.l2 * obj,
        gen_grads,
        obj_grads,
        ant_grads: vec![],
        boxes_grads: vec![],
        recon_grads: vec![],
    }
}

/// Scene-graph anticipation objective: the generation objective over observed
/// frames plus, per cutoff, weighted anticipated-predicate, box-regression
/// and reconstruction terms. An empty cutoff list (fewer than 4 frames)
/// contributes zero, which is not an error.
pub fn sga_objective(
    frames: &[FrameTerms],
    cutoffs: &[CutoffTerms],
    weights: &LossWeights,
) -> LossBreakdown {
    let mut out = vidsgg_objective(frames, weights);
    let ant_terms: Vec<&TermGrad> = cutoffs.iter().flat_map(|c| &c.ant).collect();
    let boxes_terms: Vec<&TermGrad> = cutoffs.iter().flat_map(|c| &c.boxes).collect();
    let recon_terms: Vec<&TermGrad> = cutoffs.iter().flat_map(|c| &c.recon).collect();
    let (ant, ant_grads) = weighted(&ant_terms, weights.l3);
    let (boxes, boxes_grads) = weighted(&boxes_terms, weights.l4);
    let (recon, recon_grads) = weighted(&recon_terms, weights.l5);
    out.ant = ant;
    out.boxes = boxes;
    out.recon = recon;
    out.ant_grads = ant_grads;
    out.boxes_grads = boxes_grads;
    out.recon_grads = recon_grads;
    out.total += weights.l3 * ant + weights.l4 * boxes + weights.l5 * recon;
    out
}
