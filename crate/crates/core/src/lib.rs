//! Exact non-Archimedean probability.
//!
//! Numerosities and probabilities of events in infinite sample spaces are
//! computed as elements of the ordered field `Q(a, t, g)`, where the
//! generators are the Lambda-limits of grid sizes. Every symbolic count is a
//! quasi-polynomial in the grid index and can be checked against brute-force
//! enumeration of the finite grids.

pub mod poly;
pub mod surd;
pub mod eventual;
pub mod events;
pub mod hyperreal;
pub mod engine;
pub mod oracle;
