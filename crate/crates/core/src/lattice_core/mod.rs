//! Local-field shape data, weight tables, cone search and signed-permutation
//! Weyl groups.

mod cone;
mod local;
mod weights;
mod weyl;

pub use cone::{cone_find, cone_search, ConeConstraint, ConeError, ConeQuery, DEFAULT_RADIUS};
pub use local::{is_prime, LocalDatum, LocalError};
pub use weights::{very_regular, WeightError, WeightTable};
pub use weyl::{minus_identity, shift_cycle, weyl_elements, PermError, SignedPerm, WeylElements, WeylType};
