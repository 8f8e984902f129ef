//! Generalized TF-1 pseudorandom generators and a practical recovery of
//! their internal state from a keystream.
//!
//! A TF-1 generator keeps four `w`-bit words and is attacked through an
//! asymmetry in its output: a zero output word pins `a + c = 0`, after which
//! the low `w/2 + 1` columns of the state can be guessed and checked one
//! keystream bit at a time. The whole attack costs on the order of
//! `16 * 2^(1.5w)` operations against an intended strength of `2^(2w)`.
//!
//! - [`word`]: width-parametric words.
//! - [`generator`]: the generator, the instance contract and truncated evaluation.
//! - [`tfcheck`]: structural and statistical checks of the generator.
//! - [`attack`]: the two-stage state recovery.
//! - [`oracle`]: exhaustive ground truth at tiny widths.
//! - [`cli`]: file formats and the `tf1` command line.

pub mod attack;
pub mod cli;
pub mod error;
pub mod generator;
pub mod mix;
pub mod oracle;
pub mod tfcheck;
pub mod word;

pub use error::{Error, Result};
pub use generator::{ColumnPrefix, GeneratorInstance, Keystream, State, Tf1, Tf1Params};
pub use word::{Word, WordSpec};
