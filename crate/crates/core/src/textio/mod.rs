//! Text formats: `.tb` model files and `P(...)` query strings.

mod model;
mod query;

pub use model::{parse_model, parse_model_unchecked, serialize_model};
pub use query::{parse_pattern, parse_query, Pattern, Query, Segment};
