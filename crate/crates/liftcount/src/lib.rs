//! Exact weighted first-order model counting for two-variable logic with
//! counting and modulo quantifiers.
//!
//! A problem is parsed from the sentence grammar ([`logic::parse_problem`]),
//! compiled into a normal form ([`normalize::normalize`]) and counted by a
//! layered dynamic program over element configurations ([`engine`]).
//! [`oracle`] counts the same problem by brute-force grounding.

pub mod arith;
pub mod bench;
pub mod cells;
pub mod engine;
mod error;
pub mod logic;
pub mod normalize;
pub mod oracle;

pub use error::{Error, Result};
