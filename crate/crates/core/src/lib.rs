//! Relative categories, their classification diagrams and homotopy colimits,
//! with finite machine checks of the comparison between them.

pub mod budget;
pub mod classify;
pub mod error;
pub mod fincat;
pub mod harness;
pub mod hocolim_cat;
pub mod homology;
pub mod rewrite;
pub mod sset;
pub mod util;

pub use budget::Budget;
pub use error::{Error, Result};
pub use classify::{ClassificationDiagram, SegalReport};
pub use fincat::{FinCategory, FinMonoid, RelFunctor, RelativeCategory};
pub use harness::{VerificationReport, VerifyConfig};
pub use hocolim_cat::{DiagramOfRelCats, HocolimCategory, InsertDirection, Variance};
pub use homology::{HomologyGroup, WeCertificate};
pub use sset::{SimplicialMap, TruncatedSimplicialSet};
