//! Spectral computations for the Green operators of the sub-Laplacian family
//! `L_alpha = L_0 + i alpha T` on compact Heisenberg manifolds.

pub mod error;
pub mod green;
pub mod io;
pub mod lattice;
pub mod oracle;
pub mod scalar;
pub mod schatten;
pub mod spectrum;
pub mod sum;

pub use error::{Error, Result};
pub use lattice::{dual_lattice, make_lattice, minimal_vector, shell_count_upper_bound, LatticeBasis, LatticePoint, Shell};
pub use scalar::Scalar;
pub use spectrum::{
    coalesce_records, counting_function, is_kernel, lambda_of, mu_of, spectrum_records, spectrum_stream,
    type_a_lambda, type_a_multiplicity, type_b_lambda, EigenIndex, EigenRecord, ManifoldParams, Multiplicity,
    SpectralGroup, Spectrum,
};
pub use schatten::{divergence_witness, schatten_partial, tail_bound, Cutoffs, SchattenReport, TailBound, Verdict};
pub use green::{
    closed_form_constant, green_apply, l2_norm, monotonicity_check, operator_apply, ratio, ratio_bounded_verdict,
    sharp_constant, sobolev_gain_check, sobolev_norm, ConstantReport, GainCheck, Grid, RatioVerdict, SpectralFunction,
    SpectralTerm,
};
