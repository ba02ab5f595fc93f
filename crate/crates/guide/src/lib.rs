//! Doc-tests for the book. Each module pulls in one chapter.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/norms.md")]
pub mod norms {}
#[doc = include_str!("../../../book/src/pimples.md")]
pub mod pimples {}
#[doc = include_str!("../../../book/src/orbits.md")]
pub mod orbits {}
#[doc = include_str!("../../../book/src/isometries.md")]
pub mod isometries {}
#[doc = include_str!("../../../book/src/representations.md")]
pub mod representations {}
#[doc = include_str!("../../../book/src/complex.md")]
pub mod complex {}
#[doc = include_str!("../../../book/src/complex-norms.md")]
pub mod complex_norms {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
