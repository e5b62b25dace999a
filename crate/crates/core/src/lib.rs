//! Induces a typology of questions from a parsed question–answer corpus.
//!
//! The pipeline extracts lexico-syntactic fragments from each question,
//! mines frequent fragment sets (motifs), embeds motifs in a latent space
//! built from the answers they receive, and clusters them into question
//! types. The [`analysis`] module then relates types to who asks them.

pub mod analysis;
pub mod corpus;
pub mod error;
pub mod fragments;
pub mod latent;
pub mod motifs;
pub mod pipeline;
pub mod synthetic;
pub mod typology;

pub use error::{Error, Result};
