//! Curriculum-guided per-epoch label masking.
//!
//! Each epoch a fraction of the relation labels is masked (their loss terms
//! voided). The masking ratio follows a schedule; which labels are masked is
//! decided by sampling per-class *kept* counts from a multinomial (uniform
//! over classes by default) so that, as the ratio rises, the surviving label
//! distribution flattens toward uniform: masks land mostly on head classes
//! while tail classes stay largely untouched. Exactly
//! `min(N, round(N * ratio))` labels are masked, every time.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::data::{count_predicates, DatasetAnnotations};
use crate::error::{Error, Result};
use crate::stream::{derive_seed, substream};

/// Masking-ratio schedule over epochs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum MaskSchedule {
    /// Ratio grows linearly: `min(epoch * sampling_ratio, max_ratio)`.
    /// Epoch 0 is unmasked (conventional) training.
    Linear { sampling_ratio: f64, max_ratio: f64 },
    /// Constant ratio regardless of epoch.
    Fixed { ratio: f64 },
}

impl MaskSchedule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            MaskSchedule::Linear { sampling_ratio, max_ratio } => {
                if !(sampling_ratio > 0.0) {
                    return Err(Error::config("linear schedule requires sampling_ratio > 0"));
                }
                if !(0.0..=1.0).contains(&max_ratio) {
                    return Err(Error::config("max_ratio must be in [0, 1]"));
                }
            }
            MaskSchedule::Fixed { ratio } => {
                if !(0.0..=1.0).contains(&ratio) {
                    return Err(Error::config("fixed ratio must be in [0, 1]"));
                }
            }
        }
        Ok(())
    }
}

/// Masking ratio for an epoch under a schedule, clamped to [0, 1].
pub fn masking_ratio(epoch: u32, schedule: &MaskSchedule) -> f64 {
    match *schedule {
        MaskSchedule::Linear { sampling_ratio, max_ratio } => {
            (f64::from(epoch) * sampling_ratio).min(max_ratio).clamp(0.0, 1.0)
        }
        MaskSchedule::Fixed { ratio } => ratio,
    }
}

/// Per-class target counts summing to `n_target`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetCounts {
    pub per_class: Vec<u64>,
    pub n_target: u64,
}

fn validate_probs(probs: &[f64]) -> Result<()> {
    if probs.is_empty() {
        return Err(Error::config("probability vector must be non-empty"));
    }
    if probs.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
        return Err(Error::config("probabilities must be finite and non-negative"));
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::config(format!("probabilities must sum to 1 (got {sum})")));
    }
    Ok(())
}

/// Draw a multinomial sample via sequential conditional binomials.
fn multinomial(n: u64, probs: &[f64], rng: &mut ChaCha8Rng) -> Vec<u64> {
    let mut out = vec![0u64; probs.len()];
    let mut remaining = n;
    let mut prob_rest = 1.0f64;
    for (k, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if k == probs.len() - 1 {
            out[k] = remaining;
            break;
        }
        let cond = if prob_rest <= 0.0 { 1.0 } else { (p / prob_rest).clamp(0.0, 1.0) };
        let draw = Binomial::new(remaining, cond).expect("conditional prob in [0,1]").sample(rng);
        out[k] = draw;
        remaining -= draw;
        prob_rest -= p;
    }
    out
}

/// Sample `Multinomial(n_target, probs)` deterministically from a seed.
pub fn sample_target_counts(n_target: u64, probs: &[f64], rng_seed: u64) -> Result<TargetCounts> {
    validate_probs(probs)?;
    let mut rng = substream(rng_seed, "multinomial", 0);
    let per_class = multinomial(n_target, probs, &mut rng);
    Ok(TargetCounts { per_class, n_target })
}

/// Cap `initial` at `caps` per class and redistribute the surplus over the
/// remaining capacity (proportional to capacity) until the total reaches
/// `min(sum(initial), sum(caps))`. At most one redistribution round per class.
fn redistribute_capped(initial: &[u64], caps: &[u64], rng: &mut ChaCha8Rng) -> Vec<u64> {
    let goal: u64 = initial.iter().sum::<u64>().min(caps.iter().sum());
    let mut want: Vec<u64> = initial.iter().zip(caps).map(|(&w, &c)| w.min(c)).collect();
    loop {
        let have: u64 = want.iter().sum();
        if have >= goal {
            break;
        }
        let surplus = goal - have;
        let capacity: Vec<u64> = want.iter().zip(caps).map(|(&w, &c)| c - w).collect();
        let total_cap: u64 = capacity.iter().sum();
        if total_cap == 0 {
            break;
        }
        if total_cap <= surplus {
            // Everything left must be taken.
            for (w, &c) in want.iter_mut().zip(caps) {
                *w = c;
            }
            continue;
        }
        let probs: Vec<f64> = capacity.iter().map(|&c| c as f64 / total_cap as f64).collect();
        let extra = multinomial(surplus, &probs, rng);
        for ((w, &e), &cap) in want.iter_mut().zip(&extra).zip(caps) {
            *w = (*w + e).min(cap);
        }
    }
    want
}

/// Position of one relation label: `(video id, frame index, slot)`.
/// Ordering is lexicographic on that triple.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LabelPosition {
    pub video: String,
    pub frame: u32,
    pub slot: u32,
}

/// Per-class lists of label positions, each in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositionIndex {
    pub per_class: Vec<Vec<LabelPosition>>,
}

impl PositionIndex {
    pub fn num_labels(&self) -> u64 {
        self.per_class.iter().map(|v| v.len() as u64).sum()
    }

    pub fn availability(&self) -> Vec<u64> {
        self.per_class.iter().map(|v| v.len() as u64).collect()
    }
}

/// Collect every label position into its class bucket.
pub fn build_position_index(data: &DatasetAnnotations) -> PositionIndex {
    let mut per_class: Vec<Vec<LabelPosition>> = vec![Vec::new(); data.ontology.num_predicates()];
    for video in &data.videos {
        for frame in &video.frames {
            for rel in &frame.relations {
                per_class[rel.predicate as usize].push(LabelPosition {
                    video: video.id.clone(),
                    frame: frame.index,
                    slot: rel.slot,
                });
            }
        }
    }
    for positions in per_class.iter_mut() {
        positions.sort();
    }
    PositionIndex { per_class }
}

/// The kept (unmasked) label subset for one epoch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilteredDataset {
    pub kept: BTreeSet<LabelPosition>,
}

/// Exclude `min(targets[k], available[k])` positions per class, sampled
/// uniformly without replacement on an independent substream per class;
/// surplus from exhausted classes is redistributed proportional to remaining
/// capacity so that exactly `min(n_target, N)` positions end up excluded.
pub fn build_filtered_dataset(
    index: &PositionIndex,
    targets: &TargetCounts,
    rng_seed: u64,
) -> FilteredDataset {
    let caps = index.availability();
    let mut redist_rng = substream(rng_seed, "redistribute", 0);
    let excluded = redistribute_capped(&targets.per_class, &caps, &mut redist_rng);

    let mut kept = BTreeSet::new();
    for (class, positions) in index.per_class.iter().enumerate() {
        let take = excluded[class] as usize;
        let n = positions.len();
        debug_assert!(take <= n);
        if take == 0 {
            kept.extend(positions.iter().cloned());
            continue;
        }
        if take == n {
            continue;
        }
        // Partial Fisher-Yates over indices: the first `take` are excluded.
        let mut rng = substream(rng_seed, "class-select", class as u64);
        let mut order: Vec<usize> = (0..n).collect();
        for i in 0..take {
            let j = rng.gen_range(i..n);
            order.swap(i, j);
        }
        for &idx in &order[take..] {
            kept.insert(positions[idx].clone());
        }
    }
    FilteredDataset { kept }
}

/// Per-epoch mask bits addressable by label position: `true` means masked
/// (the label's loss is voided), `false` means kept.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskSet {
    pub epoch: u32,
    pub bits: BTreeMap<LabelPosition, bool>,
}

impl MaskSet {
    pub fn num_masked(&self) -> u64 {
        self.bits.values().filter(|&&m| m).count() as u64
    }

    pub fn is_masked(&self, position: &LabelPosition) -> Option<bool> {
        self.bits.get(position).copied()
    }
}

/// Materialize mask bits for every label in `data`: 0 for kept, 1 otherwise.
pub fn build_masks(
    data: &DatasetAnnotations,
    filtered: &FilteredDataset,
    epoch: u32,
) -> Result<MaskSet> {
    let mut bits = BTreeMap::new();
    for video in &data.videos {
        for frame in &video.frames {
            for rel in &frame.relations {
                let pos =
                    LabelPosition { video: video.id.clone(), frame: frame.index, slot: rel.slot };
                let masked = !filtered.kept.contains(&pos);
                bits.insert(pos, masked);
            }
        }
    }
    for pos in &filtered.kept {
        if !bits.contains_key(pos) {
            return Err(Error::internal(format!(
                "kept position ({}, {}, {}) does not exist in the dataset",
                pos.video, pos.frame, pos.slot
            )));
        }
    }
    Ok(MaskSet { epoch, bits })
}

/// End-to-end mask generation for one epoch.
///
/// The schedule gives the masking ratio; `round(N * ratio)` labels are
/// masked. Per-class *kept* counts are drawn from
/// `Multinomial(N - n_masked, probs)` (uniform `probs` unless overridden),
/// capped at per-class availability with capacity-proportional
/// redistribution; the complement per class is excluded by uniform sampling
/// without replacement. Deterministic given `(epoch, rng_seed)`.
pub fn generate_epoch_masks(
    epoch: u32,
    schedule: &MaskSchedule,
    data: &DatasetAnnotations,
    probs_override: Option<&[f64]>,
    rng_seed: u64,
) -> Result<MaskSet> {
    schedule.validate()?;
    let num_classes = data.ontology.num_predicates();
    let ratio = masking_ratio(epoch, schedule);
    let counts = count_predicates(data);
    let n = counts.total;
    let n_masked = ((n as f64 * ratio).round() as u64).min(n);
    let n_kept = n - n_masked;

    let uniform = vec![1.0 / num_classes as f64; num_classes];
    let probs = match probs_override {
        Some(p) => {
            if p.len() != num_classes {
                return Err(Error::config(format!(
                    "probs override has {} entries for {} classes",
                    p.len(),
                    num_classes
                )));
            }
            p
        }
        None => &uniform,
    };

    let epoch_seed = derive_seed(rng_seed, "epoch", u64::from(epoch));
    let kept_goal = sample_target_counts(n_kept, probs, derive_seed(epoch_seed, "kept-targets", 0))?;
    let index = build_position_index(data);
    let caps = index.availability();
    let mut redist_rng = substream(epoch_seed, "kept-redistribute", 0);
    let kept_final = redistribute_capped(&kept_goal.per_class, &caps, &mut redist_rng);

    let mask_targets: Vec<u64> = caps.iter().zip(&kept_final).map(|(&a, &k)| a - k).collect();
    let n_target: u64 = mask_targets.iter().sum();
    debug_assert_eq!(n_target, n_masked);
    let targets = TargetCounts { per_class: mask_targets, n_target };

    let filtered = build_filtered_dataset(&index, &targets, derive_seed(epoch_seed, "select", 0));
    build_masks(data, &filtered, epoch)
}

/// Serialized mask file: `{epoch, ratio, seed, masks: [...]}` with positions
/// in lexicographic order. Byte-identical across runs for identical inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskFile {
    pub epoch: u32,
    pub ratio: f64,
    pub seed: u64,
    pub masks: Vec<MaskFileEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskFileEntry {
    pub video: String,
    pub frame: u32,
    pub slot: u32,
    pub m: u8,
}

/// Render a mask set as its on-disk JSON document.
pub fn mask_file_json(masks: &MaskSet, ratio: f64, seed: u64) -> String {
    let doc = MaskFile {
        epoch: masks.epoch,
        ratio,
        seed,
        masks: masks
            .bits
            .iter()
            .map(|(pos, &m)| MaskFileEntry {
                video: pos.video.clone(),
                frame: pos.frame,
                slot: pos.slot,
                m: u8::from(m),
            })
            .collect(),
    };
    serde_json::to_string(&doc).expect("mask file serializes")
}

/// Parse a mask file back into a [`MaskSet`].
pub fn mask_set_from_json(text: &str) -> Result<MaskSet> {
    let doc: MaskFile = serde_json::from_str(text)?;
    let mut bits = BTreeMap::new();
    for entry in doc.masks {
        bits.insert(
            LabelPosition { video: entry.video, frame: entry.frame, slot: entry.slot },
            entry.m != 0,
        );
    }
    Ok(MaskSet { epoch: doc.epoch, bits })
}
