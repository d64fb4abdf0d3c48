//! Exact computations with finite F_p-braces and finite nilpotent pre-Lie
//! algebras: both directions of the brace / pre-Lie correspondence, the
//! classification of one-generated algebras of order p^4, and left
//! nilpotent radicals of small braces.

pub mod brace;
pub mod classify_p4;
pub mod cli;
pub mod correspondence;
pub mod error;
pub mod fpcore;
pub mod prelie;
pub mod radical;

pub use error::{Error, Result};
