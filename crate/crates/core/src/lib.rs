//! Exact divisor arithmetic on blow-ups of rational surfaces.
//!
//! The crate rebuilds surfaces as iterated blow-ups of the plane, contracts
//! chains of rational curves to cyclic quotient singularities, and checks the
//! resulting numerical invariants (canonical pullbacks, `K^2`, positivity on
//! test curves, 2-divisibility, double-cover invariants and deformation
//! counts) in exact rational arithmetic. Constructions are described by JSON
//! scenario files and checked by [`scenario::run_scenario`].

pub mod blowup;
pub mod contraction;
pub mod cover;
pub mod cyclic;
pub mod expr;
pub mod linalg;
pub mod qlattice;
pub mod scenario;

pub use blowup::{BlowUpRecord, BlowupError, CurveConfig, DualGraph, SurfaceModel};
pub use contraction::{
    contract, global_h1_budget, k_squared_via_formula, moduli_dim, nef_ample_check, verify_pullback_display,
    ContractionError, SingularSurface, SingularityRecord,
};
pub use cover::{
    branch_at_nodes, double_cover_invariants, invariant_deformation_dim, make_cover, CoverError, CoverInvariants,
    CoverSpec,
};
pub use cyclic::{
    chain_to_mq, classify_t, hj_expand, local_qg_t1_dim, milnor_number, wahl_chain, Chain, CyclicError,
    CyclicQuotient, TClassification,
};
pub use expr::ClassExpr;
pub use qlattice::{BasisLabel, DivisorClass, Lattice, LatticeError, Rational};
