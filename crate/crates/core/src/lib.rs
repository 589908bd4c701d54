//! Depth-n vulnerability scanning for MiniSol contracts.
//!
//! A contract is parsed and lowered by [`frontend`], its storage
//! dependencies are computed by [`depgraph`], and [`explorer`] executes
//! sequences of transactions symbolically with [`symcore`], deciding path
//! conditions with [`solver`]. Every end state goes through [`detectors`].
//!
//! Two strategies are available. [`explorer::Strategy::BruteForce`] extends
//! every surviving sequence with every public function.
//! [`explorer::Strategy::RawPruned`] only extends it with functions that read
//! storage the last one wrote.
//!
//! ```
//! use depthscan::corpus;
//! use depthscan::explorer::{explore, ContractBundle, Limits, Strategy};
//!
//! let bundle = ContractBundle::analyze(corpus::SUICIDE).unwrap();
//! let ex = explore(&bundle, 2, Strategy::RawPruned, &Limits::default()).unwrap();
//! assert_eq!(ex.findings[0].sequence, ["setOwner", "kill"]);
//! ```
//!
//! The guide in `book/` covers each stage in more detail. Its code blocks
//! are compiled and run as doctests.

pub mod bench;
pub mod corpus;
pub mod depgraph;
pub mod detectors;
pub mod explorer;
pub mod frontend;
pub mod report;
pub mod solver;
pub mod symcore;

// Runs the book's code blocks under `cargo test --doc`.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/minisol.md")]
    mod minisol {}
    #[doc = include_str!("../../../book/src/dependencies.md")]
    mod dependencies {}
    #[doc = include_str!("../../../book/src/exploration.md")]
    mod exploration {}
    #[doc = include_str!("../../../book/src/detectors.md")]
    mod detectors {}
    #[doc = include_str!("../../../book/src/solver.md")]
    mod solver {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/bench.md")]
    mod bench {}
}
