//! Orthogonal matrices with prescribed zero diagonals. Every construction
//! comes with a certificate, and the certified matrices settle two-eigenvalue
//! questions for several bipartite and multipartite graph families.

pub mod construct;
pub mod format;
pub mod gfield;
pub mod graphs;
pub mod numerics;
pub mod planner;
pub mod verify;

pub use construct::ConstructError;
pub use format::{FormatError, MatrixFile};
pub use gfield::{FieldError, FiniteField};
pub use graphs::{q2_certificate, GraphSpec, Q2Certificate, Q2Status};
pub use numerics::{NumericsError, RealMatrix};
pub use planner::{execute, exists, plan, ConstructionPlan, Kind, PlanError};
pub use verify::{certify, Claim, IntMatrix, OrthoCertificate};
