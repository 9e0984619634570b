//! Front ends for the mobishift engine: the `mobishift` command and its JSON
//! service. Both emit the payload strings built in `mobishift_core::api`.

pub mod http;
pub mod reports;

pub use http::router;
