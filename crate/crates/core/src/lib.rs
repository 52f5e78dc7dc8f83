//! Gaussian weighted graph states and their EPR steering structure.
//!
//! The crate builds the linear tripartite and four-mode square weighted
//! graph-state families from squeezed vacua and beam-splitter networks,
//! evaluates the Gaussian steering quantifier over arbitrary bipartitions,
//! and checks CKW-type monogamy and entanglement persistence over parameter
//! sweeps.

pub mod error;
pub mod numeric;
pub mod states;
pub mod steering;
pub mod sweep;
pub mod symplectic;

pub use error::{Error, Result};
pub use numeric::{NumericPolicy, POLICY};
pub use states::{
    build_from_network, build_state, closed_form_cov, closed_form_fourmode_cov,
    closed_form_tripartite_cov, fourmode_network_unitary, nullifier_variances,
    transmittance_from_weight, tripartite_network_unitary, weights_from_transmittance, FamilyKind,
    GraphWeights, Orientation, SqueezedInput, StateFamily,
};
pub use steering::{
    classify_directionality, find_zero_crossing, gaussian_steering, group_steering, log_negativity,
    monogamy_residuals, pairwise_steering_table, DirectionalityClass, EntanglementValue,
    MonogamyResidual, SteeringValue, ZeroCrossing,
};
pub use symplectic::{
    apply_symplectic, partial_transpose, schur_complement, symplectic_eigenvalues, symplectic_form,
    unitary_to_symplectic, Bipartition, CovarianceMatrix, ModeUnitary, SymplecticForm,
    SymplecticMatrix,
};
