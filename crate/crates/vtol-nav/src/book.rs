//! Doc-test hooks for the guide in `book/`: each chapter is included as
//! module documentation so `cargo test --doc` compiles and runs every code
//! snippet the book shows.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
