//! Lattice carriers and their order operations.

mod bitset;
mod descriptor;
mod monotone;
mod poset;
mod value;

pub use bitset::BitSet;
pub use descriptor::{Height, LatticeDescriptor, LatticeKind, DEFAULT_TOLERANCE, ENUMERATION_LIMIT};
pub use monotone::{
    check_monotone_exhaustive, check_monotone_sampled, check_monotone_sampled_scaled, MonotoneWitness,
    MonotonicityReport,
};
pub use poset::FinitePoset;
pub use value::{ext_add, ext_mul, ext_real, ext_sub_clamped, LatticeValue};
