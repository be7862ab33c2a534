//! Scene-graph assembly from per-pair predicate scores.
//!
//! Three strategies: one predicate per (pair, category) by argmax, all
//! predicates, or predicates above a per-class confidence threshold.
//! Confidence is the per-pair, per-category softmax of the raw scores, so
//! thresholds live in (0, 1).

use serde::{Deserialize, Serialize};

use crate::data::PredicateOntology;
use crate::loss::softmax;

/// Raw predicate scores for one object pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PairScores {
    pub subject: u32,
    pub object: u32,
    /// One score per predicate class, ontology order.
    pub scores: Vec<f64>,
}

/// One assembled relationship with its confidence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Triplet {
    pub subject: u32,
    pub object: u32,
    pub predicate: u32,
    pub confidence: f64,
}

/// Triplets of one frame, sorted by descending confidence with ties broken
/// by (pair input order, predicate id).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneGraph {
    pub frame: u32,
    pub triplets: Vec<Triplet>,
}

/// Per-predicate-class thresholds for the semi-constraint strategy.
#[derive(Debug, Clone, PartialEq)]
pub struct SemiConstraintThresholds(pub Vec<f64>);

impl SemiConstraintThresholds {
    pub fn uniform(num_classes: usize, theta: f64) -> Self {
        Self(vec![theta; num_classes])
    }
}

/// Candidate triplet plus its tie-break keys.
struct Ranked {
    triplet: Triplet,
    pair_order: usize,
}

fn sort_into_graph(frame: u32, mut ranked: Vec<Ranked>) -> SceneGraph {
    ranked.sort_by(|a, b| {
        b.triplet
            .confidence
            .partial_cmp(&a.triplet.confidence)
            .expect("finite confidences")
            .then(a.pair_order.cmp(&b.pair_order))
            .then(a.triplet.predicate.cmp(&b.triplet.predicate))
    });
    SceneGraph { frame, triplets: ranked.into_iter().map(|r| r.triplet).collect() }
}

/// Per-category softmax confidences for one pair's scores.
fn pair_confidences(scores: &[f64], ontology: &PredicateOntology) -> Vec<f64> {
    let mut conf = vec![0.0; scores.len()];
    for range in ontology.category_ranges() {
        let slice = &scores[range.start as usize..range.end as usize];
        let sm = softmax(slice);
        conf[range.start as usize..range.end as usize].copy_from_slice(&sm);
    }
    conf
}

/// Emit the argmax class of every (pair, category); ties go to the lowest
/// class id. Exactly `pairs * categories` triplets.
pub fn assemble_with_constraint(
    frame: u32,
    pairs: &[PairScores],
    ontology: &PredicateOntology,
) -> SceneGraph {
    let mut ranked = Vec::with_capacity(pairs.len() * ontology.categories().len());
    for (pair_order, pair) in pairs.iter().enumerate() {
        let conf = pair_confidences(&pair.scores, ontology);
        for range in ontology.category_ranges() {
            let mut best = range.start;
            for k in range.clone() {
                if pair.scores[k as usize] > pair.scores[best as usize] {
                    best = k;
                }
            }
            ranked.push(Ranked {
                triplet: Triplet {
                    subject: pair.subject,
                    object: pair.object,
                    predicate: best,
                    confidence: conf[best as usize],
                },
                pair_order,
            });
        }
    }
    sort_into_graph(frame, ranked)
}

/// Emit every (pair, class) with its confidence.
pub fn assemble_no_constraint(
    frame: u32,
    pairs: &[PairScores],
    ontology: &PredicateOntology,
) -> SceneGraph {
    let num_classes = ontology.num_predicates();
    let mut ranked = Vec::with_capacity(pairs.len() * num_classes);
    for (pair_order, pair) in pairs.iter().enumerate() {
        let conf = pair_confidences(&pair.scores, ontology);
        for k in 0..num_classes as u32 {
            ranked.push(Ranked {
                triplet: Triplet {
                    subject: pair.subject,
                    object: pair.object,
                    predicate: k,
                    confidence: conf[k as usize],
                },
                pair_order,
            });
        }
    }
    sort_into_graph(frame, ranked)
}

/// Emit every (pair, class) whose confidence strictly exceeds its class
/// threshold.
pub fn assemble_semi_constraint(
    frame: u32,
    pairs: &[PairScores],
    ontology: &PredicateOntology,
    thresholds: &SemiConstraintThresholds,
) -> SceneGraph {
    let num_classes = ontology.num_predicates();
    let mut ranked = Vec::new();
    for (pair_order, pair) in pairs.iter().enumerate() {
        let conf = pair_confidences(&pair.scores, ontology);
        for k in 0..num_classes {
            if conf[k] > thresholds.0[k] {
                ranked.push(Ranked {
                    triplet: Triplet {
                        subject: pair.subject,
                        object: pair.object,
                        predicate: k as u32,
                        confidence: conf[k],
                    },
                    pair_order,
                });
            }
        }
    }
    sort_into_graph(frame, ranked)
}

/// Serialize scene graphs as JSON lines, one frame per line.
pub fn scene_graphs_to_jsonl(graphs: &[SceneGraph]) -> String {
    let mut out = String::new();
    for graph in graphs {
        #[derive(Serialize)]
        struct Line<'a> {
            t: u32,
            triplets: Vec<LineTriplet<'a>>,
        }
        #[derive(Serialize)]
        struct LineTriplet<'a> {
            sub: u32,
            obj: u32,
            pred: u32,
            conf: f64,
            #[serde(skip)]
            _marker: std::marker::PhantomData<&'a ()>,
        }
        let line = Line {
            t: graph.frame,
            triplets: graph
                .triplets
                .iter()
                .map(|t| LineTriplet {
                    sub: t.subject,
                    obj: t.object,
                    pred: t.predicate,
                    conf: t.confidence,
                    _marker: std::marker::PhantomData,
                })
                .collect(),
        };
        out.push_str(&serde_json::to_string(&line).expect("scene graph serializes"));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{PredicateCategory, PredicateOntology};
    use crate::stream::substream;
    use rand::Rng;
    use std::collections::BTreeSet;

    fn ontology(classes: &[usize]) -> PredicateOntology {
        PredicateOntology::new(
            classes
                .iter()
                .enumerate()
                .map(|(i, &n)| PredicateCategory {
                    name: format!("c{i}"),
                    classes: (0..n).map(|j| format!("c{i}_p{j}")).collect(),
                })
                .collect(),
            vec!["o".into()],
        )
        .unwrap()
    }

    fn random_pairs(n: usize, classes: usize, rng: &mut rand_chacha::ChaCha8Rng) -> Vec<PairScores> {
        (0..n)
            .map(|i| PairScores {
                subject: 0,
                object: i as u32 + 1,
                scores: (0..classes).map(|_| rng.gen_range(-2.0..2.0)).collect(),
            })
            .collect()
    }

    #[test]
    fn with_constraint_picks_argmax() {
        let ont = ontology(&[3]);
        let pairs = vec![PairScores { subject: 0, object: 1, scores: vec![0.1, 0.7, 0.2] }];
        let graph = assemble_with_constraint(0, &pairs, &ont);
        assert_eq!(graph.triplets.len(), 1);
        assert_eq!(graph.triplets[0].predicate, 1);
    }

    #[test]
    fn with_constraint_tie_breaks_to_lowest_id() {
        let ont = ontology(&[3]);
        let pairs = vec![PairScores { subject: 0, object: 1, scores: vec![0.5, 0.5, 0.1] }];
        let graph = assemble_with_constraint(0, &pairs, &ont);
        assert_eq!(graph.triplets[0].predicate, 0);
    }

    #[test]
    fn with_constraint_matches_argmax_oracle() {
        let ont = ontology(&[2, 4]);
        let mut rng = substream(1, "graph-test", 0);
        for _ in 0..50 {
            let pairs = random_pairs(4, 6, &mut rng);
            let graph = assemble_with_constraint(0, &pairs, &ont);
            assert_eq!(graph.triplets.len(), 4 * 2);
            for pair in &pairs {
                for range in ont.category_ranges() {
                    let best = range
                        .clone()
                        .max_by(|&a, &b| {
                            pair.scores[a as usize]
                                .partial_cmp(&pair.scores[b as usize])
                                .unwrap()
                                .then(b.cmp(&a))
                        })
                        .unwrap();
                    assert!(graph.triplets.iter().any(|t| t.subject == pair.subject
                        && t.object == pair.object
                        && t.predicate == best));
                }
            }
        }
    }

    #[test]
    fn no_constraint_cardinality_and_order() {
        let ont = ontology(&[5]);
        let mut rng = substream(2, "graph-test", 1);
        let pairs = random_pairs(1, 5, &mut rng);
        let graph = assemble_no_constraint(0, &pairs, &ont);
        assert_eq!(graph.triplets.len(), 5);
        for pair in graph.triplets.windows(2) {
            assert!(pair[0].confidence >= pair[1].confidence);
        }
    }

    #[test]
    fn semi_constraint_extreme_thresholds() {
        let ont = ontology(&[4]);
        let mut rng = substream(3, "graph-test", 2);
        let pairs = random_pairs(3, 4, &mut rng);
        let low = SemiConstraintThresholds::uniform(4, f64::NEG_INFINITY);
        let high = SemiConstraintThresholds::uniform(4, f64::INFINITY);
        let all = assemble_semi_constraint(0, &pairs, &ont, &low);
        let none = assemble_semi_constraint(0, &pairs, &ont, &high);
        assert_eq!(all, assemble_no_constraint(0, &pairs, &ont));
        assert!(none.triplets.is_empty());
    }

    #[test]
    fn semi_constraint_equals_filter_oracle() {
        let ont = ontology(&[3, 3]);
        let mut rng = substream(4, "graph-test", 3);
        for _ in 0..50 {
            let pairs = random_pairs(4, 6, &mut rng);
            let theta = SemiConstraintThresholds::uniform(6, 0.5);
            let semi = assemble_semi_constraint(0, &pairs, &ont, &theta);
            let filtered: Vec<Triplet> = assemble_no_constraint(0, &pairs, &ont)
                .triplets
                .into_iter()
                .filter(|t| t.confidence > 0.5)
                .collect();
            assert_eq!(semi.triplets, filtered);
        }
    }

    #[test]
    fn containment_chain_over_random_frames() {
        let ont = ontology(&[3, 4]);
        let mut rng = substream(5, "graph-test", 4);
        for _ in 0..100 {
            let pairs = random_pairs(3, 7, &mut rng);
            let key = |t: &Triplet| (t.subject, t.object, t.predicate);
            let with: BTreeSet<_> =
                assemble_with_constraint(0, &pairs, &ont).triplets.iter().map(key).collect();
            let no: BTreeSet<_> =
                assemble_no_constraint(0, &pairs, &ont).triplets.iter().map(key).collect();
            let semi: BTreeSet<_> = assemble_semi_constraint(
                0,
                &pairs,
                &ont,
                &SemiConstraintThresholds::uniform(7, 0.4),
            )
            .triplets
            .iter()
            .map(key)
            .collect();
            assert!(with.is_subset(&no));
            assert!(semi.is_subset(&no));
        }
    }

    #[test]
    fn argmax_invariant_under_per_pair_shift() {
        let ont = ontology(&[4]);
        let mut rng = substream(6, "graph-test", 5);
        for _ in 0..50 {
            let pairs = random_pairs(2, 4, &mut rng);
            let shifted: Vec<PairScores> = pairs
                .iter()
                .map(|p| PairScores {
                    subject: p.subject,
                    object: p.object,
                    scores: p.scores.iter().map(|s| s + 3.7).collect(),
                })
                .collect();
            let a = assemble_with_constraint(0, &pairs, &ont);
            let b = assemble_with_constraint(0, &shifted, &ont);
            let preds = |g: &SceneGraph| {
                let mut v: Vec<(u32, u32, u32)> =
                    g.triplets.iter().map(|t| (t.subject, t.object, t.predicate)).collect();
                v.sort();
                v
            };
            assert_eq!(preds(&a), preds(&b));
        }
    }

    #[test]
    fn jsonl_one_line_per_frame() {
        let graphs = vec![
            SceneGraph {
                frame: 0,
                triplets: vec![Triplet { subject: 0, object: 1, predicate: 2, confidence: 0.5 }],
            },
            SceneGraph { frame: 1, triplets: vec![] },
        ];
        let text = scene_graphs_to_jsonl(&graphs);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[0].contains("\"t\":0"));
        assert!(lines[1].contains("\"triplets\":[]"));
    }
}
