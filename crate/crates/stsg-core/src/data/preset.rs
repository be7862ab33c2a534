//! Built-in ontology preset matching the Action Genome vocabulary.

use super::{PredicateCategory, PredicateOntology};

/// The Action Genome predicate split (attention / spatial / contacting) and
/// its 36 object categories. Ships as a convenience preset; the rest of the
/// crate is vocabulary-agnostic.
pub fn action_genome_ontology() -> PredicateOntology {
    let cat = |name: &str, classes: &[&str]| PredicateCategory {
        name: name.to_string(),
        classes: classes.iter().map(|s| s.to_string()).collect(),
    };
    PredicateOntology::new(
        vec![
            cat("attention", &["looking_at", "not_looking_at", "unsure"]),
            cat("spatial", &["above", "beneath", "in_front_of", "behind", "on_the_side_of", "in"]),
            cat(
                "contacting",
                &[
                    "carrying",
                    "covered_by",
                    "drinking_from",
                    "eating",
                    "have_it_on_the_back",
                    "holding",
                    "leaning_on",
                    "lying_on",
                    "not_contacting",
                    "other_relationship",
                    "sitting_on",
                    "standing_on",
                    "touching",
                    "twisting",
                    "wearing",
                    "wiping",
                    "writing_on",
                ],
            ),
        ],
        [
            "person",
            "bag",
            "bed",
            "blanket",
            "book",
            "box",
            "broom",
            "chair",
            "closet/cabinet",
            "clothes",
            "cup/glass/bottle",
            "dish",
            "door",
            "doorknob",
            "doorway",
            "floor",
            "food",
            "groceries",
            "laptop",
            "light",
            "medicine",
            "mirror",
            "paper/notebook",
            "phone/camera",
            "picture",
            "pillow",
            "refrigerator",
            "sandwich",
            "shelf",
            "shoe",
            "sofa/couch",
            "table",
            "television",
            "towel",
            "vacuum",
            "window",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect(),
    )
    .expect("preset ontology is well-formed")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_has_expected_sizes() {
        let ont = action_genome_ontology();
        assert_eq!(ont.num_predicates(), 26);
        assert_eq!(ont.num_object_categories(), 36);
        assert_eq!(ont.categories().len(), 3);
        assert_eq!(ont.predicate_id("looking_at"), Some(0));
        assert_eq!(ont.predicate_id("writing_on"), Some(25));
    }
}
