//! Exact-repair minimum-storage regenerating codes over small finite fields.

pub mod codec;
pub mod construct;
pub mod gf;
pub mod linalg;
pub mod repair;
pub mod sim;
pub mod verify;
