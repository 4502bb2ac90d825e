//! Partial strings (pomsets) with sequential and concurrent composition,
//! refinement by monotonic bijective morphisms, downward-closed programs
//! with a bounded fixed-point refinement procedure, relaxed-consistency
//! memory axioms, and quadratic/cubic partial-order constraint encodings
//! for bounded model checking.

pub mod encoder;
pub mod label;
pub mod lfp;
pub mod memory;
pub mod program;
pub mod pstring;
pub mod refine;
pub mod text;

pub use label::{Addr, Label, LoadTag, Reg, StoreTag};
pub use program::Program;
pub use pstring::{EventId, Join, PartialString};
pub use refine::{find_morphism, refines, Method, Morphism};
