//! Exact unitary (t+1)-designs on U(d) from unitary t-groups.

pub mod chars;
pub mod design;
pub mod error;
pub mod group;
pub mod invariant;
pub mod matcore;
pub mod par;
pub mod presets;
pub mod zerofind;

pub use error::{Error, Result};
