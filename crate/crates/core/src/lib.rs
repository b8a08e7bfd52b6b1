//! Deterministic simulator for multi-model federated learning over a
//! mobile-edge network.
//!
//! A master model is trained through a set of slave models: each epoch a
//! selector assigns one slave architecture to every device, devices train
//! locally and upload, base stations mitigate structurally mismatched
//! uploads, partially aggregate per slave model, distill slave knowledge
//! into their master replica, and a cloud averages the masters. A model
//! poisoning adversary, a closed-form timing model, and a DRL-based
//! selector complete the loop.
//!
//! Everything is seeded and pure where possible: the same configuration
//! and seed reproduce every emitted number.

pub mod adversary;
pub mod data;
pub mod error;
pub mod experiment;
pub mod net;
pub mod nn;
pub mod protocol;
pub mod rng;
pub mod selector;
pub mod timing;

pub use error::{Error, Result};
