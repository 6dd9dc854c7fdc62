//! Two-user topological MISO broadcast channel with alternating CSIT.

pub mod bounds;
pub mod channel;
pub mod harness;
pub mod linalg;
pub mod rng;
pub mod schemes;
pub mod state;
