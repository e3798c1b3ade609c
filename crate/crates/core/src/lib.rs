//! Constructive Cesàro-mean subsequence selection on finite atomic measure
//! spaces.
//!
//! Everything here is pure computation over value-per-atom densities:
//!
//! - [`measure`]: spaces, densities, `L^p` norms, pairings and Cesàro means.
//! - [`gallery`]: the classical test sequences (Rademacher, spikes, moving
//!   bumps, orthonormal vectors) and table ingestion.
//! - [`diagnostics`]: uniform integrability, tightness and set-test
//!   diagnostics for weak convergence in `L^1`.
//! - [`selectors`]: the greedy subsequence extractions with their
//!   certificates.
//! - [`oracle`]: exhaustive verifiers used to falsify certificates at small
//!   scale.
//!
//! The crate is `no_std` and only needs `alloc`.

#![cfg_attr(not(test), no_std)]
#![warn(missing_debug_implementations)]
// `!(x > 0.0)` style guards are how NaN gets rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod diagnostics;
mod error;
pub mod gallery;
pub mod measure;
pub mod oracle;
pub mod selectors;

pub use error::{Error, FailedCondition, Result};

pub mod prelude {
    pub use crate::diagnostics::{
        dunford_pettis_report, tightness_tail, ui_modulus, weak_null_test, DPReport, TestSet,
        Verdict,
    };
    pub use crate::gallery::{
        load_sequence, make_moving_bump, make_orthonormal_counting, make_rademacher,
        make_rademacher_with, make_spike, FunctionSequence, SequenceTable,
    };
    pub use crate::measure::{
        cesaro_mean, dual_pairing, integrate_over_set, lp_norm, AtomSet, Density, MeasureSpace,
    };
    pub use crate::oracle::{
        brute_force_sup_theta, exact_ui_modulus, exhaustive_weak_test, replay_pair_log,
        OracleBudget,
    };
    pub use crate::selectors::{
        banach_saks_lp_select, diagonal_extract, duality_map, hilbert_greedy_select,
        okada_select, szlenk_epsilon_select, truncation_split, zeta_constant, CesaroTrace,
        Selection, SelectionRule, SubsequenceSelection,
    };
    pub use crate::{Error, Result};
}
