//! Planning and verification of multi-robot missions with reduced
//! inter-robot synchronization.
//!
//! A mission is an LTL formula without the next operator, interpreted over
//! the sequence of region observations produced by a team of robots moving
//! through a partitioned planar environment. The toolkit
//!
//! * validates the environment and builds per-robot motion abstractions
//!   ([`env`], [`abstraction`]),
//! * translates formulas to Büchi automata and finds an optimal satisfying
//!   prefix–suffix team run ([`ltl`], [`buchi`], [`planner`]),
//! * reduces the set of moments at which robots must synchronize along that
//!   run, classifying each kept moment as weak (meet) or strong (move
//!   together) ([`syncreduce`]),
//! * compiles per-robot control/communication strategies and simulates their
//!   asynchronous execution ([`strategy`], [`sim`]).
//!
//! The [`pipeline`] module chains the stages end to end and is what the CLI
//! binary drives.

pub mod abstraction;
pub mod buchi;
pub mod env;
pub mod geom;
pub mod ltl;
pub mod planner;
pub mod syncreduce;

/// Version tag written into every JSON artifact this crate emits.
pub const SCHEMA_VERSION: u32 = 1;
