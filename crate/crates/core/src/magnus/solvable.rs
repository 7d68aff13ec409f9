//! Free solvable groups `S_{d,k} = F_d / F_d^{(k)}` represented recursively:
//! an element of level `k ≥ 2` is its flow on the Cayley graph of
//! `S_{d,k-1}` (level 1 being ℤᵈ), together with its cached projection.

use std::fmt;

use crate::error::{Error, Result};
use crate::group::{Element, Group, Letter};
use crate::magnus::flow::{self, Edge, Flow};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SolvableElement {
    rank: usize,
    level: usize,
    flow: Flow,
    /// Image in `S_{d,k-1}`: the sink of `flow`, or the identity for a circulation.
    projection: Element,
}

/// The group `S_{d,k-1}` whose Cayley graph carries level-`k` flows.
pub fn quotient_of(rank: usize, level: usize) -> Group {
    Group::solvable(rank, level - 1).expect("level >= 2 and valid rank")
}

impl SolvableElement {
    pub fn identity(rank: usize, level: usize) -> Self {
        assert!(level >= 2, "flow-backed solvable elements start at level 2");
        SolvableElement {
            rank,
            level,
            flow: Flow::new(),
            projection: quotient_of(rank, level).identity(),
        }
    }

    pub fn generator(rank: usize, level: usize, i: usize) -> Result<Self> {
        let q = quotient_of(rank, level);
        let mut flow = Flow::new();
        flow.add(Edge::new(q.identity(), i), 1);
        Ok(SolvableElement {
            rank,
            level,
            flow,
            projection: q.generator(i)?,
        })
    }

    /// θ(u) for a word `u`.
    pub fn from_word(rank: usize, level: usize, letters: &[Letter]) -> Result<Self> {
        if level < 2 {
            return Err(Error::Usage("flow-backed elements need level >= 2".into()));
        }
        let q = quotient_of(rank, level);
        let (flow, projection) = flow::trace_word(&q, letters)?;
        Ok(SolvableElement {
            rank,
            level,
            flow,
            projection,
        })
    }

    /// Builds an element from a flow, deriving the projection from the flow's
    /// source/sink structure. The flow must start at the identity.
    pub fn from_flow(rank: usize, level: usize, flow: Flow) -> Result<Self> {
        let q = quotient_of(rank, level);
        let projection = match flow.shape(&q)? {
            flow::FlowShape::Circulation => q.identity(),
            flow::FlowShape::Path { source, sink } => {
                if source != q.identity() {
                    return Err(Error::Integrity(format!(
                        "flow has source {source}, expected the identity"
                    )));
                }
                sink
            }
        };
        Ok(SolvableElement {
            rank,
            level,
            flow,
            projection,
        })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn flow(&self) -> &Flow {
        &self.flow
    }

    pub fn projection(&self) -> &Element {
        &self.projection
    }

    pub fn quotient(&self) -> Group {
        quotient_of(self.rank, self.level)
    }

    pub fn is_identity(&self) -> bool {
        self.flow.is_empty()
    }
}

impl fmt::Display for SolvableElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.flow)
    }
}

fn same_group(a: &SolvableElement, b: &SolvableElement) -> Result<()> {
    if a.rank != b.rank || a.level != b.level {
        return Err(Error::Usage(format!(
            "level mismatch: S_{{{},{}}} vs S_{{{},{}}}",
            a.rank, a.level, b.rank, b.level
        )));
    }
    Ok(())
}

pub fn multiply(a: &SolvableElement, b: &SolvableElement) -> Result<SolvableElement> {
    same_group(a, b)?;
    let q = a.quotient();
    Ok(SolvableElement {
        rank: a.rank,
        level: a.level,
        flow: flow::concat_unchecked(&q, &a.flow, &a.projection, &b.flow)?,
        projection: q.multiply(&a.projection, &b.projection)?,
    })
}

pub fn inverse(a: &SolvableElement) -> Result<SolvableElement> {
    let q = a.quotient();
    Ok(SolvableElement {
        rank: a.rank,
        level: a.level,
        flow: flow::inverse_unchecked(&q, &a.flow, &a.projection)?,
        projection: q.inverse(&a.projection)?,
    })
}
