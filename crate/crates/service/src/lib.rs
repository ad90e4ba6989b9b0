//! Command-line and HTTP front ends for `dimcf`.
//!
//! Sessions (a dataset plus the projector fitted on it) are written by
//! `dimcf fit` and served read-only by `dimcf serve`.

pub mod api;
pub mod cli;
pub mod session;

pub use api::{router, API_VERSION};
pub use session::{FitSettings, Session, SessionStore};
