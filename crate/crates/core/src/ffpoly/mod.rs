//! Arithmetic over F_q, polynomials in F_q[T], and the places of F_q(T).

mod field;
mod place;
mod poly;

pub use field::{make_extension_field, ExtensionField, FieldSpec};
pub use place::{
    enumerate_places, necklace_count, ord_at, places_of_degree, Place, RationalFunction,
};
pub use poly::{is_irreducible, Poly};
