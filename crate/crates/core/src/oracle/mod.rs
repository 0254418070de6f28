//! Certification of the maximum-principle algebra and of the `(r, θ)`
//! system on exact polynomial jets.
//!
//! Every identity is evaluated by hand-derived chain rules; the unit tests
//! check those against Richardson-extrapolated finite differences of the
//! underlying polynomial map.

mod identities;
mod jet;
mod suite;

pub use identities::{
    q_case1, q_quantity, reaction_term, verify_evolution_of_s, verify_rtheta_system, Case1,
    EvolutionTerms, QValues, RThetaResiduals, RThetaTerms, SEvolution, CASE1_GAP,
};
pub use jet::{Jet, MinimizingJet, Second, Third};
pub use suite::{run_suite, IdentityReport, JetSource, SuiteReport, MIN_DET};
