//! Integer flows on the labelled Cayley graph of a quotient `F_d/N`.
//!
//! Only positively labelled edges `(g, g·x_i, x_i)` are stored. Crossing an
//! edge against its orientation contributes `-1` to the positive edge.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{letter_char, Element, Group, Letter};

/// Positively labelled edge `(origin, origin·x_label, x_label)`; `label` is 1-based.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub origin: Element,
    pub label: usize,
}

impl Edge {
    pub fn new(origin: Element, label: usize) -> Self {
        Edge { origin, label }
    }

    pub fn terminus(&self, quotient: &Group) -> Result<Element> {
        quotient.multiply(&self.origin, &quotient.generator(self.label)?)
    }
}

/// Finitely supported integer function on edges; zero values are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Flow {
    values: BTreeMap<Edge, i64>,
}

/// Source/sink structure of a geometric flow.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FlowShape {
    Circulation,
    Path { source: Element, sink: Element },
}

/// One serialized flow entry: `(origin, label, value)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FlowTriple(pub String, pub usize, pub i64);

impl Flow {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, edge: &Edge) -> i64 {
        self.values.get(edge).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Edge, i64)> {
        self.values.iter().map(|(e, v)| (e, *v))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Adds `delta` to the value on `edge`, dropping the entry if it cancels.
    pub fn add(&mut self, edge: Edge, delta: i64) {
        if delta == 0 {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.values.entry(edge) {
            Entry::Vacant(v) => {
                v.insert(delta);
            }
            Entry::Occupied(mut o) => {
                let next = o
                    .get()
                    .checked_add(delta)
                    .expect("integer overflow in flow value");
                if next == 0 {
                    o.remove();
                } else {
                    *o.get_mut() = next;
                }
            }
        }
    }

    pub fn add_flow(&mut self, other: &Flow) {
        for (e, v) in other.iter() {
            self.add(e.clone(), v);
        }
    }

    pub fn negated(&self) -> Flow {
        Flow {
            values: self.values.iter().map(|(e, v)| (e.clone(), -v)).collect(),
        }
    }

    /// Left translation: every edge origin `o` becomes `g·o`.
    pub fn translated(&self, quotient: &Group, g: &Element) -> Result<Flow> {
        if *g == quotient.identity() {
            return Ok(self.clone());
        }
        let mut out = Flow::new();
        for (e, v) in self.iter() {
            out.add(Edge::new(quotient.multiply(g, &e.origin)?, e.label), v);
        }
        Ok(out)
    }

    /// Net flow at every vertex with nonzero net flow.
    pub fn net_flows(&self, quotient: &Group) -> Result<BTreeMap<Element, i64>> {
        let mut net: BTreeMap<Element, i64> = BTreeMap::new();
        for (e, v) in self.iter() {
            *net.entry(e.origin.clone()).or_default() += v;
            *net.entry(e.terminus(quotient)?).or_default() -= v;
        }
        net.retain(|_, v| *v != 0);
        Ok(net)
    }

    /// Net flow at `g`: outgoing values minus incoming values.
    pub fn net_flow(&self, quotient: &Group, g: &Element) -> Result<i64> {
        quotient.check(g)?;
        let mut total = 0i64;
        for (e, v) in self.iter() {
            if e.origin == *g {
                total += v;
            }
            if e.terminus(quotient)? == *g {
                total -= v;
            }
        }
        Ok(total)
    }

    /// Classifies the flow as a circulation or a unit source/sink flow.
    pub fn shape(&self, quotient: &Group) -> Result<FlowShape> {
        let net = self.net_flows(quotient)?;
        let mut source = None;
        let mut sink = None;
        for (g, v) in net {
            match v {
                1 if source.is_none() => source = Some(g),
                -1 if sink.is_none() => sink = Some(g),
                _ => return Err(Error::Integrity(format!("flow is not geometric (net {v} at {g})"))),
            }
        }
        match (source, sink) {
            (None, None) => Ok(FlowShape::Circulation),
            (Some(source), Some(sink)) => Ok(FlowShape::Path { source, sink }),
            _ => Err(Error::Integrity("flow has an unmatched source or sink".into())),
        }
    }

    /// Sink of the flow, or the identity for a circulation.
    pub fn endpoint(&self, quotient: &Group) -> Result<Element> {
        match self.shape(quotient)? {
            FlowShape::Circulation => Ok(quotient.identity()),
            FlowShape::Path { sink, .. } => Ok(sink),
        }
    }

    pub fn to_triples(&self) -> Vec<FlowTriple> {
        self.iter()
            .map(|(e, v)| FlowTriple(e.origin.to_string(), e.label, v))
            .collect()
    }
}

impl fmt::Display for Flow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, (e, v)) in self.iter().enumerate() {
            if k > 0 {
                f.write_str(";")?;
            }
            write!(f, "{}@{}:{}", e.origin, letter_char(e.label as Letter), v)?;
        }
        f.write_str("}")
    }
}

/// Traces the path of `letters` from the identity of `quotient`, returning
/// its flow and its terminal vertex.
pub fn trace_word(quotient: &Group, letters: &[Letter]) -> Result<(Flow, Element)> {
    let mut gens = Vec::with_capacity(quotient.rank());
    for i in 1..=quotient.rank() {
        let g = quotient.generator(i)?;
        let ginv = quotient.inverse(&g)?;
        gens.push((g, ginv));
    }
    let mut flow = Flow::new();
    let mut pos = quotient.identity();
    for &l in letters {
        let i = l.unsigned_abs() as usize;
        if l == 0 || i > gens.len() {
            return Err(Error::Parse(format!(
                "letter {l} outside rank {}",
                quotient.rank()
            )));
        }
        let (g, ginv) = &gens[i - 1];
        if l > 0 {
            let next = quotient.multiply(&pos, g)?;
            flow.add(Edge::new(pos, i), 1);
            pos = next;
        } else {
            pos = quotient.multiply(&pos, ginv)?;
            flow.add(Edge::new(pos.clone(), i), -1);
        }
    }
    Ok((flow, pos))
}

/// Geometric flow of the path traced by `letters` from the identity.
pub fn flow_of_word(quotient: &Group, letters: &[Letter]) -> Result<Flow> {
    trace_word(quotient, letters).map(|(f, _)| f)
}

pub(crate) fn concat_unchecked(
    quotient: &Group,
    f: &Flow,
    f_endpoint: &Element,
    g: &Flow,
) -> Result<Flow> {
    let mut out = f.clone();
    out.add_flow(&g.translated(quotient, f_endpoint)?);
    Ok(out)
}

pub(crate) fn inverse_unchecked(quotient: &Group, f: &Flow, f_endpoint: &Element) -> Result<Flow> {
    let back = quotient.inverse(f_endpoint)?;
    Ok(f.translated(quotient, &back)?.negated())
}

/// Flow of the concatenated path: `f` followed by `g` translated to start at
/// `f_endpoint`. Fails if `f_endpoint` is not the endpoint of `f`.
pub fn flow_multiply(quotient: &Group, f: &Flow, f_endpoint: &Element, g: &Flow) -> Result<Flow> {
    let actual = f.endpoint(quotient)?;
    if actual != *f_endpoint {
        return Err(Error::Usage(format!(
            "endpoint mismatch: flow ends at {actual}, caller passed {f_endpoint}"
        )));
    }
    concat_unchecked(quotient, f, f_endpoint, g)
}

/// Flow of the reversed path, re-based at the identity.
pub fn flow_inverse(quotient: &Group, f: &Flow) -> Result<Flow> {
    let end = f.endpoint(quotient)?;
    inverse_unchecked(quotient, f, &end)
}
