//! C ABI over the `s2m` core.
//!
//! Handles are opaque pointers created by `*_new` functions and released by
//! the matching `*_free`. Every fallible function returns an [`S2mStatus`];
//! the message of the last failure on the calling thread is available from
//! [`s2m_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::OnceLock;

use s2m::error::Error;
use s2m::green_trace::green_diag_with;
use s2m::matrix_identity::{identity_sweep, SymmetricMatrix};
use s2m::reconstruction::{
    c_via_limit, c_via_ratio, default_schedule, esq_free_ratio, esq_limit_normalized, pair_split_labels,
    spectral_shift_guard, LimitNormalization, PairedLabels, SpectraPair,
};
use s2m::sl_engine::{dirichlet_eigenvalues_with, split_eigenvalues_with, DirichletProblem, Potential, SolverOptions};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum S2mStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    BufferTooSmall = 4,
    PoleProximity = 5,
    Numerical = 6,
    Panic = 7,
}

/// Normalization used by [`s2m_pair_esq`] and [`s2m_pair_normalization`].
pub const S2M_METHOD_LIMIT: u32 = 0;
pub const S2M_METHOD_RATIO: u32 = 1;

/// A Dirichlet problem `-u'' + V u` on `[a, b]`.
pub struct S2mProblem {
    problem: DirichletProblem,
    opts: SolverOptions,
}

/// Full and split spectra for one split point, guarded and labelled.
pub struct S2mSpectraPair {
    pair: SpectraPair,
    labels: PairedLabels,
    limit: OnceLock<Result<LimitNormalization, Error>>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> S2mStatus {
    match e {
        Error::PoleProximity { .. } => S2mStatus::PoleProximity,
        Error::Domain(_)
        | Error::Index { .. }
        | Error::Shape(_)
        | Error::Dimension(_)
        | Error::NotHermitian { .. }
        | Error::InvalidPotential(_)
        | Error::TruncationTooSmall(_) => S2mStatus::InvalidArgument,
        _ => S2mStatus::Numerical,
    }
}

/// Runs `f`, recording errors and converting panics.
fn guarded<F: FnOnce() -> Result<(), (S2mStatus, String)>>(f: F) -> S2mStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => S2mStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            S2mStatus::Panic
        }
    }
}

fn core(e: Error) -> (S2mStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(name: &str) -> (S2mStatus, String) {
    (S2mStatus::NullPointer, format!("{name} is null"))
}

fn method_arg(method: u32) -> Result<u32, (S2mStatus, String)> {
    match method {
        S2M_METHOD_LIMIT | S2M_METHOD_RATIO => Ok(method),
        m => Err((S2mStatus::InvalidArgument, format!("unknown method {m}"))),
    }
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn s2m_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn s2m_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a problem on `[a, b]`. `potential_json` uses the same JSON form as
/// the CLI config (`{"type": "polynomial", "coeffs": [0, 1]}`); null means `V = 0`.
/// `grid_size` of 0 selects the default mesh.
///
/// # Safety
/// `potential_json` must be null or a valid NUL-terminated string, and `out`
/// must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn s2m_problem_new(
    a: f64,
    b: f64,
    potential_json: *const c_char,
    grid_size: usize,
    out: *mut *mut S2mProblem,
) -> S2mStatus {
    guarded(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let potential = if potential_json.is_null() {
            Potential::Zero
        } else {
            let text = CStr::from_ptr(potential_json)
                .to_str()
                .map_err(|e| (S2mStatus::Parse, format!("potential is not UTF-8: {e}")))?;
            serde_json::from_str(text).map_err(|e| (S2mStatus::Parse, e.to_string()))?
        };
        let problem = DirichletProblem::new(a, b, potential).map_err(core)?;
        let mut opts = SolverOptions::default();
        if grid_size != 0 {
            opts.grid_size = grid_size;
        }
        opts.validate().map_err(core)?;
        *out = Box::into_raw(Box::new(S2mProblem { problem, opts }));
        Ok(())
    })
}

/// # Safety
/// `problem` must be null or a handle from [`s2m_problem_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn s2m_problem_free(problem: *mut S2mProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Writes the lowest `k` Dirichlet eigenvalues into `out[0..k]`.
///
/// # Safety
/// `problem` must be a live handle and `out` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn s2m_dirichlet_eigenvalues(
    problem: *const S2mProblem,
    k: usize,
    out: *mut f64,
    len: usize,
) -> S2mStatus {
    guarded(|| {
        let p = problem.as_ref().ok_or_else(|| null("problem"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        if len < k {
            return Err((S2mStatus::BufferTooSmall, format!("need {k} slots, have {len}")));
        }
        let spec = dirichlet_eigenvalues_with(&p.problem, k, &p.opts).map_err(core)?;
        std::slice::from_raw_parts_mut(out, k).copy_from_slice(&spec.values);
        Ok(())
    })
}

/// Distinct eigenvalues of the split operator at `x0` holding `k` entries
/// with multiplicity. `values` and `multiplicities` receive up to `len`
/// entries; the number written goes to `*written`.
///
/// # Safety
/// `problem` must be a live handle; `values` and `multiplicities` must point
/// to `len` elements and `written` must be valid.
#[no_mangle]
pub unsafe extern "C" fn s2m_split_eigenvalues(
    problem: *const S2mProblem,
    x0: f64,
    k: usize,
    values: *mut f64,
    multiplicities: *mut u8,
    len: usize,
    written: *mut usize,
) -> S2mStatus {
    guarded(|| {
        let p = problem.as_ref().ok_or_else(|| null("problem"))?;
        if values.is_null() || multiplicities.is_null() || written.is_null() {
            return Err(null("output buffer"));
        }
        let split = split_eigenvalues_with(&p.problem, x0, k, &p.opts).map_err(core)?;
        let n = split.len();
        if len < n {
            return Err((S2mStatus::BufferTooSmall, format!("need {n} slots, have {len}")));
        }
        std::slice::from_raw_parts_mut(values, n).copy_from_slice(&split.values);
        std::slice::from_raw_parts_mut(multiplicities, n).copy_from_slice(&split.multiplicities);
        *written = n;
        Ok(())
    })
}

/// Diagonal Green's function `G(z, x0, x0)`, refusing `z` near an eigenvalue.
///
/// # Safety
/// `problem` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn s2m_green_diag(problem: *const S2mProblem, z: f64, x0: f64, out: *mut f64) -> S2mStatus {
    guarded(|| {
        let p = problem.as_ref().ok_or_else(|| null("problem"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = green_diag_with(&p.problem, z, x0, &p.opts).map_err(core)?.value;
        Ok(())
    })
}

fn finish_pair(pair: SpectraPair) -> Result<S2mSpectraPair, (S2mStatus, String)> {
    let pair = spectral_shift_guard(&pair);
    let labels = pair_split_labels(&pair.split, pair.a, pair.b).map_err(core)?;
    Ok(S2mSpectraPair { pair, labels, limit: OnceLock::new() })
}

/// Computes both spectra of `problem` at `x0` with truncation `k`.
///
/// # Safety
/// `problem` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn s2m_pair_new(
    problem: *const S2mProblem,
    x0: f64,
    k: usize,
    out: *mut *mut S2mSpectraPair,
) -> S2mStatus {
    guarded(|| {
        let p = problem.as_ref().ok_or_else(|| null("problem"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let pair = SpectraPair::compute(&p.problem, x0, k, &p.opts).map_err(core)?;
        *out = Box::into_raw(Box::new(finish_pair(pair)?));
        Ok(())
    })
}

/// Closed-form pair for `V = 0` on `[a, b]`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn s2m_pair_new_free(
    a: f64,
    b: f64,
    x0: f64,
    k: usize,
    out: *mut *mut S2mSpectraPair,
) -> S2mStatus {
    guarded(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let pair = SpectraPair::free(a, b, x0, k).map_err(core)?;
        *out = Box::into_raw(Box::new(finish_pair(pair)?));
        Ok(())
    })
}

/// # Safety
/// `pair` must be null or a handle from an `s2m_pair_new*` call not yet freed.
#[no_mangle]
pub unsafe extern "C" fn s2m_pair_free(pair: *mut S2mSpectraPair) {
    if !pair.is_null() {
        drop(Box::from_raw(pair));
    }
}

impl S2mSpectraPair {
    fn limit(&self) -> Result<&LimitNormalization, (S2mStatus, String)> {
        self.limit.get_or_init(|| c_via_limit(&self.pair, &default_schedule())).as_ref().map_err(|e| core(e.clone()))
    }
}

/// The normalization constant `C(x0) = G(0, x0, x0)` by either method.
///
/// # Safety
/// `pair` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn s2m_pair_normalization(pair: *const S2mSpectraPair, method: u32, out: *mut f64) -> S2mStatus {
    guarded(|| {
        let h = pair.as_ref().ok_or_else(|| null("pair"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = match method_arg(method)? {
            S2M_METHOD_LIMIT => h.limit()?.c,
            _ => c_via_ratio(&h.pair, &h.labels).map_err(core)?.c,
        };
        Ok(())
    })
}

/// Squared normalized eigenfunction `e_k(x0)²` and its tail estimate.
/// `tail` may be null.
///
/// # Safety
/// `pair` must be a live handle, `esq` a valid pointer, `tail` null or valid.
#[no_mangle]
pub unsafe extern "C" fn s2m_pair_esq(
    pair: *const S2mSpectraPair,
    k: usize,
    method: u32,
    esq: *mut f64,
    tail: *mut f64,
) -> S2mStatus {
    guarded(|| {
        let h = pair.as_ref().ok_or_else(|| null("pair"))?;
        let esq = esq.as_mut().ok_or_else(|| null("esq"))?;
        let r = match method_arg(method)? {
            S2M_METHOD_LIMIT => esq_limit_normalized(&h.pair, k, h.limit()?),
            _ => esq_free_ratio(&h.pair, &h.labels, k),
        }
        .map_err(core)?;
        *esq = r.esq;
        if let Some(t) = tail.as_mut() {
            *t = r.tail_estimate;
        }
        Ok(())
    })
}

/// Eigenvector components `|v_{k,l}|²` of a Hermitian `n × n` matrix from
/// eigenvalues alone. `re` and `im` are row-major (`im` may be null for a
/// real matrix). Cell `(k, l)` lands at `out[(k-1)*n + (l-1)]`, with NaN for
/// non-generic cells, and `generic` (may be null) receives 1 or 0 per cell.
///
/// # Safety
/// `re` must point to `n*n` doubles, `im` to `n*n` doubles or be null, and
/// `out`/`generic` to `len` elements.
#[no_mangle]
pub unsafe extern "C" fn s2m_matrix_components(
    n: usize,
    re: *const f64,
    im: *const f64,
    out: *mut f64,
    generic: *mut u8,
    len: usize,
) -> S2mStatus {
    guarded(|| {
        if re.is_null() || out.is_null() {
            return Err(null("re/out"));
        }
        let nn = n.checked_mul(n).ok_or((S2mStatus::InvalidArgument, "n overflows".to_owned()))?;
        if n == 0 {
            return Err((S2mStatus::InvalidArgument, "n must be positive".into()));
        }
        if len < nn {
            return Err((S2mStatus::BufferTooSmall, format!("need {nn} slots, have {len}")));
        }
        let rows = |p: *const f64| -> Vec<Vec<f64>> {
            std::slice::from_raw_parts(p, nn).chunks(n).map(<[f64]>::to_vec).collect()
        };
        let real = rows(re);
        let imag = (!im.is_null()).then(|| rows(im));
        let a = SymmetricMatrix::from_parts(&real, imag.as_deref()).map_err(core)?;
        let reports = identity_sweep(&a).map_err(core)?;
        let out = std::slice::from_raw_parts_mut(out, nn);
        let mut flags = (!generic.is_null()).then(|| std::slice::from_raw_parts_mut(generic, nn));
        for r in &reports {
            let i = (r.k - 1) * n + (r.ell - 1);
            out[i] = r.from_spectra.unwrap_or(f64::NAN);
            if let Some(f) = flags.as_deref_mut() {
                f[i] = u8::from(r.generic);
            }
        }
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_mapping() {
        assert_eq!(
            status_of(&Error::PoleProximity { z: 0.0, eigenvalue: 0.0, distance: 0.0 }),
            S2mStatus::PoleProximity
        );
        assert_eq!(status_of(&Error::Domain("x".into())), S2mStatus::InvalidArgument);
        assert_eq!(status_of(&Error::ZeroRatio(3)), S2mStatus::Numerical);
    }

    #[test]
    fn panics_become_status() {
        let s = guarded(|| panic!("boom"));
        assert_eq!(s, S2mStatus::Panic);
        assert!(!s2m_last_error().is_null());
    }

    #[test]
    fn unknown_method_rejected() {
        assert!(method_arg(7).is_err());
        assert_eq!(method_arg(S2M_METHOD_RATIO), Ok(S2M_METHOD_RATIO));
    }
}
