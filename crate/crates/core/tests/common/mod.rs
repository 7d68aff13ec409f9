#![allow(dead_code)]

use lampwalk_core::{Element, Group, Letter, LampConfig, WreathElement, WreathProduct};
use proptest::prelude::*;

pub fn word(rank: usize, max_len: usize) -> impl Strategy<Value = Vec<Letter>> {
    let r = rank as i8;
    prop::collection::vec((1..=r, any::<bool>()), 0..=max_len)
        .prop_map(|v| v.into_iter().map(|(i, neg)| if neg { -i } else { i }).collect())
}

/// Random element of `group` as the image of a random word (vectors are drawn
/// directly for ℤᵈ and residues for ℤ/m).
pub fn element(group: Group) -> BoxedStrategy<Element> {
    match group {
        Group::IntVector { dim } => prop::collection::vec(-50i64..=50, dim)
            .prop_map(Element::Vector)
            .boxed(),
        Group::Cyclic { modulus } => (0..modulus).prop_map(Element::Residue).boxed(),
        g => word(g.rank(), 12)
            .prop_map(move |w| g.evaluate(&w).unwrap())
            .boxed(),
    }
}

pub fn wreath_element(w: WreathProduct) -> BoxedStrategy<WreathElement> {
    let lamp = w.lamp.clone();
    let entries = prop::collection::vec(
        (element(w.base.clone()), element(w.lamp.clone())),
        0..6,
    );
    (entries, element(w.base.clone()))
        .prop_map(move |(e, base)| WreathElement {
            lamps: LampConfig::from_entries(&lamp, e).unwrap(),
            base,
        })
        .boxed()
}

pub fn small_vector_group(dim: usize) -> Group {
    Group::int_vector(dim).unwrap()
}
