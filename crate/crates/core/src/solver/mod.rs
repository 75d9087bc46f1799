//! Optimization layer: the users' convex response problem, the operator's
//! dispatch heuristic, a chaotic differential evolution search, and the
//! bi-level loop that ties them together.

pub mod de;
pub mod dispatch;
pub mod qp;
pub mod stackelberg;
