//! Flows, Fox derivatives and the Magnus embedding `F_d/[N,N] → ℤᵈ ≀ F_d/N`.
//!
//! The lamp of the image at a vertex `g` is the vector of flow values on the
//! `d` outgoing positive edges at `g`; the base is the projection `π(u)`.
//! Two words agree in `F_d/[N,N]` exactly when their flows agree.

pub mod flow;
pub mod fox;
pub mod solvable;

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::group::{Element, Group, Letter};
use crate::wreath::{LampConfig, WreathElement, WreathProduct};

pub use flow::{flow_inverse, flow_multiply, flow_of_word, trace_word, Edge, Flow, FlowShape};
pub use fox::{fox_derivative, fox_derivative_by_rules, GroupRingVector};
pub use solvable::SolvableElement;

/// The ambient group `ℤᵈ ≀ Q` of the Magnus image over `quotient`.
pub fn magnus_target(quotient: &Group) -> Result<WreathProduct> {
    Ok(WreathProduct::new(Group::int_vector(quotient.rank())?, quotient.clone()))
}

/// Lamp configuration `g ↦ (f((g, g·x_i, x_i)))_i` of a flow.
pub fn flow_to_lamps(quotient: &Group, f: &Flow) -> LampConfig {
    let d = quotient.rank();
    let mut sites: BTreeMap<Element, Vec<i64>> = BTreeMap::new();
    for (e, v) in f.iter() {
        sites.entry(e.origin.clone()).or_insert_with(|| vec![0; d])[e.label - 1] = v;
    }
    let lamp = Group::IntVector { dim: d };
    let mut out = LampConfig::new();
    for (g, v) in sites {
        out.set(&lamp, g, Element::Vector(v));
    }
    out
}

/// Inverse of [`flow_to_lamps`]: reads edge values back from `ℤᵈ` lamps.
pub fn lamps_to_flow(quotient: &Group, lamps: &LampConfig) -> Result<Flow> {
    let d = quotient.rank();
    let mut f = Flow::new();
    for (g, value) in lamps.iter() {
        let Element::Vector(v) = value else {
            return Err(Error::FamilyMismatch {
                expected: "IntVector".into(),
                found: value.family().into(),
            });
        };
        if v.len() != d {
            return Err(Error::validation("lamp", format!("expected dimension {d}, got {}", v.len())));
        }
        for (i, &x) in v.iter().enumerate() {
            f.add(Edge::new(g.clone(), i + 1), x);
        }
    }
    Ok(f)
}

/// Magnus image of a word.
pub fn magnus_embed(quotient: &Group, letters: &[Letter]) -> Result<WreathElement> {
    let (f, base) = trace_word(quotient, letters)?;
    Ok(WreathElement {
        lamps: flow_to_lamps(quotient, &f),
        base,
    })
}

/// Magnus image of a flow-backed solvable element, over its quotient.
pub fn magnus_embed_solvable(u: &SolvableElement) -> WreathElement {
    WreathElement {
        lamps: flow_to_lamps(&u.quotient(), u.flow()),
        base: u.projection().clone(),
    }
}

/// Magnus image assembled from `Σ_i π(∂_i u)·t_i` via the derivation rules,
/// independently of the flow tracer.
pub fn magnus_embed_fox(quotient: &Group, letters: &[Letter]) -> Result<WreathElement> {
    let d = quotient.rank();
    let mut sites: BTreeMap<Element, Vec<i64>> = BTreeMap::new();
    for i in 1..=d {
        for (g, c) in fox_derivative_by_rules(quotient, letters, i)?.iter() {
            sites.entry(g.clone()).or_insert_with(|| vec![0; d])[i - 1] = c;
        }
    }
    let lamp = Group::int_vector(d)?;
    let mut lamps = LampConfig::new();
    for (g, v) in sites {
        lamps.set(&lamp, g, Element::Vector(v));
    }
    Ok(WreathElement {
        lamps,
        base: quotient.evaluate(letters)?,
    })
}

/// Whether `letters` is trivial in `F_d/[N,N]`, `N` the kernel onto `quotient`.
pub fn is_identity(quotient: &Group, letters: &[Letter]) -> Result<bool> {
    Ok(flow_of_word(quotient, letters)?.is_empty())
}

/// Whether two words agree in `F_d/[N,N]`.
pub fn equal(quotient: &Group, u: &[Letter], v: &[Letter]) -> Result<bool> {
    Ok(flow_of_word(quotient, u)? == flow_of_word(quotient, v)?)
}
