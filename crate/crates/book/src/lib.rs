//! Chapters of the guide in `book/`, compiled here so `cargo test` runs
//! their listings. One module per chapter keeps failures traceable.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/model.md")]
pub mod model {}
#[doc = include_str!("../../../book/src/limit-laws.md")]
pub mod limit_laws {}
#[doc = include_str!("../../../book/src/primes.md")]
pub mod primes {}
#[doc = include_str!("../../../book/src/jump-instants.md")]
pub mod jump_instants {}
#[doc = include_str!("../../../book/src/eigenvalue.md")]
pub mod eigenvalue {}
#[doc = include_str!("../../../book/src/paths.md")]
pub mod paths {}
#[doc = include_str!("../../../book/src/reproducibility.md")]
pub mod reproducibility {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
