//! Exact group arithmetic and random-walk statistics for wreath products and
//! free solvable groups.
//!
//! - [`group`]: base and lamp group families with canonical forms.
//! - [`wreath`]: lamp configurations and the wreath product law.
//! - [`magnus`]: flows on Cayley graphs, Fox derivatives, the Magnus embedding.
//! - [`walks`]: seeded sample paths with lamp modification logs.
//! - [`entropy`]: exact convolution entropies and plug-in estimators.
//! - [`diagnostics`]: coarse trajectories, bad increments and reconstruction.

pub mod diagnostics;
pub mod entropy;
pub mod error;
pub mod exec;
pub mod group;
pub mod law;
pub mod magnus;
pub mod walks;
pub mod wreath;

pub use error::{Error, Result};
pub use exec::Exec;
pub use group::{Element, Group, Letter, Word};
pub use law::GroupLaw;
pub use wreath::{LampConfig, WreathElement, WreathProduct};
