//! Exact arithmetic in the wreath product `A ≀ B = (⊕_B A) ⋊ B`.
//!
//! Elements are pairs `(f, b)` of a finitely supported lamp configuration
//! `f : B → A` and a base position `b`. The product is
//! `(f, b)·(f', b') = (f ⊕ (b·f'), b b')` with `(b·f)(x) = f(b⁻¹x)`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{Element, Group};

/// Finitely supported map from base elements to non-identity lamp values.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LampConfig {
    values: BTreeMap<Element, Element>,
}

impl LampConfig {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a configuration, combining repeated sites and dropping identities.
    pub fn from_entries<I>(lamp: &Group, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Element, Element)>,
    {
        let mut out = LampConfig::new();
        for (site, value) in entries {
            lamp.check(&value)?;
            out.combine(lamp, site, &value)?;
        }
        Ok(out)
    }

    /// Point mass `δ_site^value`.
    pub fn delta(lamp: &Group, site: Element, value: Element) -> Result<Self> {
        Self::from_entries(lamp, [(site, value)])
    }

    pub fn get(&self, site: &Element) -> Option<&Element> {
        self.values.get(site)
    }

    /// Lamp value at `site`, the identity when off.
    pub fn value(&self, lamp: &Group, site: &Element) -> Element {
        self.values
            .get(site)
            .cloned()
            .unwrap_or_else(|| lamp.identity())
    }

    pub fn support(&self) -> impl Iterator<Item = &Element> {
        self.values.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Element, &Element)> {
        self.values.iter()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Replaces the value at `site` with `current·value`; returns `(old, new)`.
    pub fn combine(&mut self, lamp: &Group, site: Element, value: &Element) -> Result<(Element, Element)> {
        let id = lamp.identity();
        let old = self.values.get(&site).cloned().unwrap_or_else(|| id.clone());
        let new = lamp.multiply(&old, value)?;
        if new == id {
            self.values.remove(&site);
        } else {
            self.values.insert(site, new.clone());
        }
        Ok((old, new))
    }

    /// Sets the value at `site` (removing the entry for the identity).
    pub fn set(&mut self, lamp: &Group, site: Element, value: Element) {
        if value == lamp.identity() {
            self.values.remove(&site);
        } else {
            self.values.insert(site, value);
        }
    }

    /// Restriction to the sites satisfying `keep`.
    pub fn restricted<F>(&self, mut keep: F) -> LampConfig
    where
        F: FnMut(&Element) -> bool,
    {
        LampConfig {
            values: self
                .values
                .iter()
                .filter(|(s, _)| keep(s))
                .map(|(s, v)| (s.clone(), v.clone()))
                .collect(),
        }
    }

    pub fn to_pairs(&self) -> Vec<(String, String)> {
        self.values
            .iter()
            .map(|(s, v)| (s.to_string(), v.to_string()))
            .collect()
    }
}

impl fmt::Display for LampConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, (s, v)) in self.values.iter().enumerate() {
            if k > 0 {
                f.write_str("; ")?;
            }
            write!(f, "delta({s})={v}")?;
        }
        Ok(())
    }
}

/// Element `(lamps, base)` of a wreath product.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WreathElement {
    pub lamps: LampConfig,
    pub base: Element,
}

/// Canonical serialized form: sorted support, explicit base.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WreathElementRecord {
    pub lamps: Vec<(String, String)>,
    pub base: String,
}

impl WreathElement {
    pub fn to_record(&self) -> WreathElementRecord {
        WreathElementRecord {
            lamps: self.lamps.to_pairs(),
            base: self.base.to_string(),
        }
    }
}

impl fmt::Display for WreathElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] @ {}", self.lamps, self.base)
    }
}

/// One lamp change produced by applying an increment in place.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LampChange {
    pub site: Element,
    pub old: Element,
    pub new: Element,
}

/// The ambient group `A ≀ B`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WreathProduct {
    pub lamp: Group,
    pub base: Group,
}

impl WreathProduct {
    pub fn new(lamp: Group, base: Group) -> Self {
        WreathProduct { lamp, base }
    }

    pub fn identity(&self) -> WreathElement {
        WreathElement {
            lamps: LampConfig::new(),
            base: self.base.identity(),
        }
    }

    pub fn check(&self, u: &WreathElement) -> Result<()> {
        self.base.check(&u.base)?;
        let id = self.lamp.identity();
        for (s, v) in u.lamps.iter() {
            self.base.check(s)?;
            self.lamp.check(v)?;
            if *v == id {
                return Err(Error::Integrity(format!("stored identity lamp at {s}")));
            }
        }
        Ok(())
    }

    /// `(b·f)(x) = f(b⁻¹x)`: the configuration shifted by left multiplication.
    pub fn translate_config(&self, b: &Element, f: &LampConfig) -> Result<LampConfig> {
        if *b == self.base.identity() {
            return Ok(f.clone());
        }
        let mut values = BTreeMap::new();
        for (s, v) in f.iter() {
            values.insert(self.base.multiply(b, s)?, v.clone());
        }
        Ok(LampConfig { values })
    }

    pub fn multiply(&self, u: &WreathElement, v: &WreathElement) -> Result<WreathElement> {
        let mut lamps = u.lamps.clone();
        for (s, a) in v.lamps.iter() {
            let site = self.base.multiply(&u.base, s)?;
            lamps.combine(&self.lamp, site, a)?;
        }
        Ok(WreathElement {
            lamps,
            base: self.base.multiply(&u.base, &v.base)?,
        })
    }

    /// `(f, b)⁻¹ = (b⁻¹·f⁻¹, b⁻¹)`.
    pub fn inverse(&self, u: &WreathElement) -> Result<WreathElement> {
        let binv = self.base.inverse(&u.base)?;
        let mut values = BTreeMap::new();
        for (s, v) in u.lamps.iter() {
            values.insert(self.base.multiply(&binv, s)?, self.lamp.inverse(v)?);
        }
        Ok(WreathElement {
            lamps: LampConfig { values },
            base: binv,
        })
    }

    /// `a ↦ (δ_{e_B}^a, e_B)`.
    pub fn embed_lamp(&self, a: &Element) -> Result<WreathElement> {
        Ok(WreathElement {
            lamps: LampConfig::delta(&self.lamp, self.base.identity(), a.clone())?,
            base: self.base.identity(),
        })
    }

    /// `b ↦ (𝟙, b)`.
    pub fn embed_base(&self, b: &Element) -> Result<WreathElement> {
        self.base.check(b)?;
        Ok(WreathElement {
            lamps: LampConfig::new(),
            base: b.clone(),
        })
    }

    /// Right-multiplies the state `(lamps, position)` by `g` in place and
    /// reports every site whose lamp changed.
    pub fn apply_in_place(
        &self,
        lamps: &mut LampConfig,
        position: &mut Element,
        g: &WreathElement,
    ) -> Result<Vec<LampChange>> {
        let mut changes = Vec::with_capacity(g.lamps.len());
        for (s, a) in g.lamps.iter() {
            let site = self.base.multiply(position, s)?;
            let (old, new) = lamps.combine(&self.lamp, site.clone(), a)?;
            changes.push(LampChange { site, old, new });
        }
        *position = self.base.multiply(position, &g.base)?;
        Ok(changes)
    }

    /// Parses `delta(pos)=value` entries separated by `;`, optionally
    /// followed by `@ base`. Missing base means the identity.
    pub fn parse_element(&self, text: &str) -> Result<WreathElement> {
        let (lamp_part, base_part) = match text.split_once('@') {
            Some((l, b)) => (l, Some(b)),
            None => (text, None),
        };
        let mut entries = Vec::new();
        for item in lamp_part.split(';').map(str::trim).filter(|s| !s.is_empty()) {
            let rest = item
                .strip_prefix("delta(")
                .ok_or_else(|| Error::Parse(format!("expected delta(pos)=value, got {item:?}")))?;
            let (pos, value) = rest
                .split_once(")=")
                .ok_or_else(|| Error::Parse(format!("expected delta(pos)=value, got {item:?}")))?;
            entries.push((
                self.base.parse_element(pos)?,
                self.lamp.parse_element(value)?,
            ));
        }
        let base = match base_part {
            Some(b) => self.base.parse_element(b)?,
            None => self.base.identity(),
        };
        Ok(WreathElement {
            lamps: LampConfig::from_entries(&self.lamp, entries)?,
            base,
        })
    }
}

impl fmt::Display for WreathProduct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} wr {}", self.lamp, self.base)
    }
}
