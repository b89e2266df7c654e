//! Green's functions of the Dirichlet problem and the operator identities
//! built on them: the Krein-type resolvent formula, the trace identity and
//! the spectral shift function.

pub mod green;
pub mod identities;
pub mod ssf;

pub use green::{
    free_green, free_green_diag, green_diag, green_diag_with, green_offdiag, green_offdiag_with, pole_check,
    GreenEvaluation,
};
pub use identities::{
    check_split_poles, krein_resolvent_residual, krein_resolvent_residual_with, krein_unchecked,
    trace_identity_from_spectra, trace_identity_residual, trace_sum, KreinCheck, TraceCheck,
};
pub use ssf::{spectral_shift_function, StepFunction};
