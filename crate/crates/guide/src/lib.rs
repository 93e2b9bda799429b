//! Doc-test shim for the mdbook guide in `book/`.
//!
//! mdbook cannot compile its code listings against crate dependencies, so
//! every chapter is included here as module documentation and
//! `cargo test --doc -p cpm-guide` runs each snippet. A chapter that
//! drifts from the library API fails the build.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/waveforms.md")]
pub mod waveforms {}

#[doc = include_str!("../../../book/src/channel.md")]
pub mod channel {}

#[doc = include_str!("../../../book/src/frontend.md")]
pub mod frontend {}

#[doc = include_str!("../../../book/src/coherent.md")]
pub mod coherent {}

#[doc = include_str!("../../../book/src/noncoherent.md")]
pub mod noncoherent {}

#[doc = include_str!("../../../book/src/complexity.md")]
pub mod complexity {}

#[doc = include_str!("../../../book/src/analysis.md")]
pub mod analysis {}

#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}
