//! Threshold cascades on networks, and Boolean circuits built from them.
//!
//! A node of a [`Network`](net::Network) becomes *labeled* according to the
//! fraction `ν` of its in-neighbors that are already labeled and its
//! threshold `φ`:
//!
//! * [`Rule::Monotone`](net::Rule::Monotone) labels when `ν ≥ φ`,
//! * [`Rule::Antagonistic`](net::Rule::Antagonistic) labels when `ν < φ`.
//!
//! Monotone nodes act as OR/AND/threshold gates; antagonistic nodes act as
//! NOR/NAND/NOT and so form a universal gate basis.
//!
//! The crate is organized by task:
//!
//! * [`net`]: graph generation, thresholds, statistics, the JSON network file;
//! * [`engine`]: the labeling rules and the cascade scheduler;
//! * [`circuit`]: an expression language compiled into cascade networks;
//! * [`analyze`]: exhaustive fixpoint search and schedule sensitivity;
//! * [`exp`]: cascade-frequency sweeps over mean degree.
//!
//! ```
//! use cascade_logic::circuit::{compile, parse_expr, truth_table, Basis};
//!
//! let xor = compile(&parse_expr("a ^ b").unwrap(), Basis::NandOnly).unwrap();
//! let table = truth_table(&xor).unwrap();
//! assert_eq!(table.output_column(0), [false, true, true, false]);
//! ```

pub mod analyze;
pub mod circuit;
pub mod engine;
pub mod exp;
pub mod net;
pub mod rng;

// Code blocks in the guide under book/ compile and run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/networks.md")]
    mod networks {}
    #[doc = include_str!("../../../book/src/dynamics.md")]
    mod dynamics {}
    #[doc = include_str!("../../../book/src/gates.md")]
    mod gates {}
    #[doc = include_str!("../../../book/src/circuits.md")]
    mod circuits {}
    #[doc = include_str!("../../../book/src/determinism.md")]
    mod determinism {}
    #[doc = include_str!("../../../book/src/sweeps.md")]
    mod sweeps {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
