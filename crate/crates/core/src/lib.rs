//! Stickelberger elements and Iwasawa invariants for abelian extensions of
//! rational function fields over finite fields.

pub mod artin_schreier;
pub mod character;
pub mod corpus;
pub mod cyclo;
pub mod error;
pub mod extension;
pub mod ffpoly;
pub mod group;
pub mod groupring;
pub mod intmat;
pub mod iwasawa;
pub mod lfunc;
pub mod stickelberger;
pub mod units;
pub mod unitsreg;

pub use error::{Error, Result};
