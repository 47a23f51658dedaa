//! Coalitional manipulation of Plurality, Two-Round and IRV elections under
//! the Perturbed Culture model.
//!
//! The crate provides exact CM deciders for the three rules, a brute-force
//! oracle to validate them, closed-form thresholds for the expected-profile
//! analysis, a reproducible Monte-Carlo harness, and the fitting routines used
//! to read slopes and power laws off the simulated rates.

pub mod analysis;
pub mod culture;
pub mod dataset;
pub mod error;
pub mod experiment;
pub mod manipulation;
pub mod profile;
pub mod rules;
pub mod theory;

pub use culture::{PerturbedCulture, SeedPolicy};
pub use error::{Error, Result};
pub use manipulation::{cm, CmOutcome, Witness};
pub use profile::{Candidate, CandidateSet, DiscreteProfile, Ranking, WeightedProfile};
pub use rules::{Rule, TieBreak};
