//! Finite-difference Schrödinger operators on boxes and the resolvent tests
//! built on them.

mod eigen;
mod goodness;
mod hamiltonian;
pub mod linalg;
mod move_point;
mod profile;
mod resolvent;

pub use eigen::{
    dense_eigen, dense_eigenvalues, lowest_eigenvalue, nearest_eigenvalue, spectral_window, SolverConfig,
    SpectralWindow,
};
pub use goodness::{
    classify_free_good, classify_good, classify_good_config, DecaySample, Discretization, FreeEvidence,
    FreeGoodReport, FreeSiteParams, GoodnessParams, GoodnessReport, Verdict,
};
pub use hamiltonian::{free_dirichlet_eigenvalues, DiscreteHamiltonian};
pub use move_point::{max_displacement, move_point_check, KernelCheck, MovePointRegime, MovePointReport};
pub use profile::{ProfileShape, SingleSiteProfile};
pub use resolvent::{
    combes_thomas_bound, distance_to_spectrum, local_decay, probe_centers, probe_pairs, resolvent_norm, ProbeParams,
    Resolvent, BLOW_UP_DISTANCE,
};
