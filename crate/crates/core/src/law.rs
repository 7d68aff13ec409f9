//! A common interface over the group families, used by convolution and walks.

use crate::error::Result;
use crate::group::{Element, Group};
use crate::wreath::{WreathElement, WreathProduct};

pub trait GroupLaw: Sync {
    type Elem: Clone + Ord + Send + Sync + std::fmt::Debug;

    fn identity(&self) -> Self::Elem;
    fn compose(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem>;
    fn invert(&self, a: &Self::Elem) -> Result<Self::Elem>;
}

impl GroupLaw for Group {
    type Elem = Element;

    fn identity(&self) -> Element {
        Group::identity(self)
    }

    fn compose(&self, a: &Element, b: &Element) -> Result<Element> {
        self.multiply(a, b)
    }

    fn invert(&self, a: &Element) -> Result<Element> {
        self.inverse(a)
    }
}

impl GroupLaw for WreathProduct {
    type Elem = WreathElement;

    fn identity(&self) -> WreathElement {
        WreathProduct::identity(self)
    }

    fn compose(&self, a: &WreathElement, b: &WreathElement) -> Result<WreathElement> {
        self.multiply(a, b)
    }

    fn invert(&self, a: &WreathElement) -> Result<WreathElement> {
        self.inverse(a)
    }
}
