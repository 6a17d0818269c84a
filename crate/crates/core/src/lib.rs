//! Exact arithmetic in multivariate Iwasawa algebras at finite precision.
//!
//! Everything is computed in `Z/p^N [t_1, ..., t_d] / (total degree > D)`:
//! scalars are residues mod `p^N`, coefficients of power series are kept up
//! to total degree `D`, and every downstream equality is an equality *at
//! precision N and degree D*. Residues that vanish mod `p^N` are reported
//! through a saturation marker instead of being silently treated as zero,
//! and computations that lose information (degree overflow, undecidable
//! pivots) either set an auditable flag or fail loudly.
//!
//! The crate is organised in layers:
//!
//! * [`padic`] — scalars mod `p^N`, valuations, matrices and Smith form;
//! * [`cyclo`] — cyclotomic integers `Z_p[zeta]` in the power basis;
//! * [`ring`] — the truncated power-series ring, group elements,
//!   characters, specialization, evaluation and divisibility;
//! * [`weierstrass`] — single-variable Weierstrass preparation;
//! * [`parse`] — the `grammar_v1` expression language and printer;
//! * [`flats`] — simple elements, flats of characters, zero-set counting;
//! * [`modules`] — elementary/presented modules, characteristic ideals and
//!   the base-change (descent) identity;
//! * [`factors`] — the local and global correction factors and the
//!   compatibility checker;
//! * [`scenario`] — the `scenario_v1` file format, generator and mutator;
//! * [`growth`] — rank growth along the tower and kappa fitting.

pub mod cyclo;
pub mod divide;
pub mod error;
pub mod factors;
pub mod flats;
pub mod growth;
pub mod modules;
pub mod padic;
pub mod parse;
pub mod ring;
pub mod scenario;
pub mod weierstrass;

mod cyclopoly;
mod linalg;

pub use cyclo::{CycloInt, RootOfUnity};
pub use error::Error;
pub use factors::{
    CokernelOrder, CompatReport, Eigenvalue, FactorEntry, GlobalTorsionData, PlaceData,
    Reduction, ScreenReport,
};
pub use flats::{ZeroSetReport, ZpFlat};
pub use growth::{GrowthSeries, KappaFit};
pub use modules::{
    CharIdeal, CyclicSummand, ElementaryModule, PresentedModule, PseudoNullOutcome,
    PseudoNullWitness, Verdict,
};
pub use padic::{PadicInt, Valuation, ZpMatrix};
pub use ring::{Character, GroupWord, IwasawaElement, RingCtx};
pub use scenario::{
    EigenSpec, GlobalSpec, PlaceSpec, ReductionSpec, Scenario, ScenarioFile, SCENARIO_VERSION,
};
