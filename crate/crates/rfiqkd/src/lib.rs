//! Toolkit for a fully passive cross-encoded time-bin RFI-QKD receiver.
//!
//! The crate covers three stages that can run standalone or as one pipeline:
//!
//! 1. [`receiver`] — a parametric simulator of the transmitter, drifting
//!    interferometer phases and the defective passive receiver, producing
//!    per-window count statistics with a known ground-truth POVM.
//! 2. [`qdsc`] — detector self-characterization: reconstructs the receiver
//!    POVMs from count statistics alone via dimensional reduction,
//!    convex-hull boundary filtering, direct ellipse fitting and inversion
//!    of the response-range relations.
//! 3. [`security`] — RFI-QKD security quantities: the correlation parameter
//!    C by convex minimization over bipartite states consistent with the
//!    observed statistics, Eve's information and the secret-key fraction,
//!    with finite-key statistical deviations.
//!
//! See the `examples/` directory for one runnable example per capability,
//! and the `rfiqkd` binary for the file-based command-line pipeline.

pub mod cli;
pub mod io;
pub mod qdsc;
pub mod quantum;
pub mod receiver;
pub mod security;
