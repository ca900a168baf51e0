//! Toolkit for games with the lexicographical improvement property.
//!
//! The crate covers finite normal-form games, bottleneck congestion games
//! built from congestion models, bottleneck routing on digraphs, and
//! splittable (infinite) bottleneck congestion games. Costs are exact
//! rationals throughout the finite parts so that order comparisons and
//! minimal gaps are decidable.
//!
//! Brute-force kernels (profile tabulation, move scanning, improvement
//! graphs) run on rayon when the `parallel` feature is enabled, which is the
//! default. Every kernel also has a sequential path selected through
//! [`Exec`].

pub mod analysis;
pub mod congestion;
pub mod dynamics;
pub mod error;
pub mod exec;
pub mod fixtures;
pub mod game;
pub mod gamefile;
pub mod generate;
pub mod lexorder;
pub mod potential;
pub mod rational;
pub mod routing;
pub mod splittable;
pub mod transform;

pub use error::{Error, Result};
pub use exec::Exec;
pub use game::{Budget, FiniteGame, ImprovingMove, MoveMode, Profile};
pub use rational::Rational;
