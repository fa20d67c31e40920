//! Exact autocorrelation analysis on finite abelian grids.
//!
//! A rational-valued function on Z/a_1 x ... x Z/a_r has, for each order n,
//! an autocorrelation table indexed by (n-1)-tuples of shifts. This crate
//! computes those tables exactly, and runs the reverse direction: given
//! oracle access to the tables up to a parity-dependent order cap, it
//! rebuilds the function up to translation. All arithmetic is exact, in Q
//! or in the cyclotomic field Q(xi_N) for N the grid exponent; the only
//! numerics are high-precision fixed-point embeddings used to steer an
//! integer lattice search whose answers are verified exactly before use.
//!
//! The pieces, bottom up:
//!
//! - [`groups`]: grid elements, subgroups in column Hermite form,
//!   quotients with lifted duals, annihilators.
//! - [`cyclotomic`]: Q(xi_N) in the power basis with exact automorphisms
//!   and restriction to subfields.
//! - [`spectral`]: rational functions, spectra, and the exact Fourier
//!   transform between them.
//! - [`moments`]: autocorrelation tables, zero-sum query sequences, and
//!   the capped oracle the reconstruction consumes.
//! - [`recon`]: the reconstruction pipeline (power telescoping, verified
//!   root extraction, prime-component alignment, assembly).
//! - [`families`]: example families whose low-order moments provably
//!   coincide, plus the exact agreement checker.
//!
//! The supporting [`linalg`] (integer Smith and Hermite forms), [`numeric`]
//! (fixed-point complex arithmetic), and [`lattice`] (LLL and nearest
//! plane) modules are public for reuse and testing.

pub mod cyclotomic;
pub mod error;
pub mod families;
pub mod groups;
pub mod lattice;
pub mod linalg;
pub mod moments;
pub mod numeric;
pub mod recon;
pub mod spectral;

pub use cyclotomic::{CycCtx, CycNum};
pub use error::{Error, Result};
pub use families::{
    agreement_order, agreement_order_data, family_delta, family_divisor, family_sharp,
    family_threer, family_z6, Agreement,
};
pub use groups::{annihilator, quotient_by, subgroup_generated, Grid, QuotientMap, Subgroup};
pub use moments::{
    autocorr, autocorr_inversion_check, transformed_moment_spec, transformed_moment_table,
    MomentOracle, MomentSource, MomentTable, OracleStats, ZeroSumSeq,
};
pub use recon::{
    reconstruct, reconstruct_source, reconstruct_traced, required_order_cap, verify_translation,
    ReconConfig, ReconTrace,
};
pub use spectral::{dft, idft, idft_rational, RatFn, SpecFn};
