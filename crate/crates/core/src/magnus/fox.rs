//! Projected Fox derivatives `π(∂_i u) ∈ ℤ(F_d/N)`.
//!
//! Two independent routes are provided: reading the `x_i`-labelled edges off
//! the flow of `u`, and the derivation rules `∂(uv) = ∂u + u·∂v`,
//! `∂_i x_j = δ_ij`, `∂_i x_i⁻¹ = -x_i⁻¹` applied by recursive splitting.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::group::{Element, Group, Letter};
use crate::magnus::flow;

/// Finitely supported integer combination of group elements.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroupRingVector {
    coeffs: BTreeMap<Element, i64>,
}

impl GroupRingVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn coefficient(&self, g: &Element) -> i64 {
        self.coeffs.get(g).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Element, i64)> {
        self.coeffs.iter().map(|(g, c)| (g, *c))
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add_term(&mut self, g: Element, c: i64) {
        if c == 0 {
            return;
        }
        let slot = self.coeffs.entry(g.clone()).or_insert(0);
        *slot = slot.checked_add(c).expect("integer overflow in group ring");
        if *slot == 0 {
            self.coeffs.remove(&g);
        }
    }

    /// `g · self` (left multiplication of every basis element).
    pub fn left_mul(&self, group: &Group, g: &Element) -> Result<Self> {
        let mut out = GroupRingVector::new();
        for (h, c) in self.iter() {
            out.add_term(group.multiply(g, h)?, c);
        }
        Ok(out)
    }

    pub fn add(&mut self, other: &GroupRingVector) {
        for (g, c) in other.iter() {
            self.add_term(g.clone(), c);
        }
    }
}

fn check_index(quotient: &Group, i: usize) -> Result<()> {
    if i == 0 || i > quotient.rank() {
        return Err(Error::Usage(format!(
            "derivative index {i} outside 1..={}",
            quotient.rank()
        )));
    }
    Ok(())
}

/// `π(∂_i u)` read off the flow: coefficient of `g` is the flow value on the
/// edge `(g, g·x_i, x_i)`.
pub fn fox_derivative(quotient: &Group, letters: &[Letter], i: usize) -> Result<GroupRingVector> {
    check_index(quotient, i)?;
    let f = flow::flow_of_word(quotient, letters)?;
    let mut out = GroupRingVector::new();
    for (e, v) in f.iter().filter(|(e, _)| e.label == i) {
        out.add_term(e.origin.clone(), v);
    }
    Ok(out)
}

/// `π(∂_i u)` by the derivation rules, splitting `u` in halves.
pub fn fox_derivative_by_rules(
    quotient: &Group,
    letters: &[Letter],
    i: usize,
) -> Result<GroupRingVector> {
    check_index(quotient, i)?;
    rules(quotient, letters, i).map(|(d, _)| d)
}

fn rules(quotient: &Group, letters: &[Letter], i: usize) -> Result<(GroupRingVector, Element)> {
    match letters {
        [] => Ok((GroupRingVector::new(), quotient.identity())),
        [l] => {
            let image = quotient.letter(*l)?;
            let mut d = GroupRingVector::new();
            if l.unsigned_abs() as usize == i {
                if *l > 0 {
                    d.add_term(quotient.identity(), 1);
                } else {
                    // 0 = ∂(x x⁻¹) = ∂x + x ∂(x⁻¹)
                    d.add_term(image.clone(), -1);
                }
            }
            Ok((d, image))
        }
        _ => {
            let (left, right) = letters.split_at(letters.len() / 2);
            let (mut du, pu) = rules(quotient, left, i)?;
            let (dv, pv) = rules(quotient, right, i)?;
            du.add(&dv.left_mul(quotient, &pu)?);
            Ok((du, quotient.multiply(&pu, &pv)?))
        }
    }
}
