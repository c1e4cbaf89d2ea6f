//! File formats, built-in fixtures and the end-to-end verifier.

pub mod corpus;
pub mod format;
pub mod verify;

pub use format::{parse_diagram_file, parse_relcat, serialize_relcat, ArrowSpec, DiagramFile};
pub use verify::{comparison_map, verify_theorem, VerificationReport, VerifyConfig};
