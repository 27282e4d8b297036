//! Exact conditional-probability event trees with turtleback and tree
//! diagram rendering.
//!
//! A model is an [`EventTree`]: the root is the sample space, each node an
//! event weighted by its probability given the path above it. Queries select
//! leaf sets by positional [`Pattern`]s; [`layout`] turns the same tree into
//! a recursive partition of a disk whose sector areas are the path products.

pub mod cli;
pub mod corpus;
pub mod engine;
pub mod envelope;
pub mod error;
pub mod layout;
pub mod model;
pub mod prob;
pub mod render;
pub mod synth;
pub mod textio;
pub mod verify;

pub use engine::{conditional_probability, evaluate, event_probability, explain, QueryResult};
pub use error::{Error, SyntaxError};
pub use model::{
    leaves, level_partition, path_probability, validate, Diagnostic, EventName, EventNode,
    EventTree, LeafAtom, Partition,
};
pub use prob::Prob;
pub use textio::{parse_model, parse_query, serialize_model, Pattern, Query, Segment};
