//! Decomposition of one-relator group presentations into towers of HNN
//! extensions, free products and embeddings, with certificates for the
//! resulting asymptotic dimension bound `asdim G ≤ ⌈|r|/2⌉`.

pub mod freegroup;
pub mod io;
pub mod presentation;
pub mod random;
pub mod rewriting;
pub mod tower;
pub mod verify;

pub use freegroup::{GeneratorId, Letter, Origin, Registry, Sign, Word, WordError};
pub use presentation::{parse_presentation, ParseError, Presentation, PresentationError};
pub use rewriting::{Case1Result, Case2Result, Renamed, RewriteError};
pub use tower::{bound_of, build_best_tower, build_tower, ceil_half, BoundReport, CertificateNode, NodeKind};
pub use verify::{verify_certificate, Verification, Violation};
