//! Rule-based detection of unethical behavior in open-source repositories.
//!
//! Repository facts are captured from a code-hosting REST API or loaded from
//! offline snapshots ([`ingestion`]), exported as base relations for a small
//! datalog engine ([`rules`]), and checked by six detectors ([`detectors`])
//! that combine rule packs with similarity scoring ([`similarity`]) and
//! license identification ([`license`]).

pub mod cli;
pub mod detectors;
pub mod fact_model;
pub mod fixtures;
pub mod ingestion;
pub mod license;
pub mod report;
pub mod rules;
pub mod similarity;
pub mod source;
