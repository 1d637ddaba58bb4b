//! C ABI over `btwalk`.
//!
//! Objects cross the boundary as opaque handles (`BtwConfig`, `BtwVertex`)
//! that the caller releases with the matching `*_free`. Every fallible call
//! returns a [`BtwStatus`]; on failure, [`btw_last_error_message`] describes
//! the error for the calling thread. Strings returned through `char **` out
//! parameters are owned by the caller and released with [`btw_string_free`].
//! Exact quantities (matrix entries, types, squared distances) travel as
//! rational strings such as `"-3/2"`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use btwalk::building::{act, cartan_type, distance_sq, BuildingVertex};
use btwalk::cli::{run_experiment, CliError, Command, ExperimentConfig, RunOptions};
use btwalk::padic::{format_rational, parse_rational, Matrix3, Prime, Rational};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BtwStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ConfigError = 3,
    MathError = 4,
    IoError = 5,
    CheckFailed = 6,
    Panic = 7,
}

/// Parsed experiment configuration.
pub struct BtwConfig {
    inner: ExperimentConfig,
}

/// A vertex of the building of SL₃(ℚ_p).
pub struct BtwVertex {
    inner: BuildingVertex,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

struct Failure(BtwStatus, String);

impl From<CliError> for Failure {
    fn from(e: CliError) -> Self {
        let status = match e {
            CliError::Config(_) => BtwStatus::ConfigError,
            CliError::Math(_) => BtwStatus::MathError,
            CliError::Io(_) => BtwStatus::IoError,
            CliError::CheckFailed => BtwStatus::CheckFailed,
        };
        Failure(status, e.to_string())
    }
}

impl From<btwalk::Error> for Failure {
    fn from(e: btwalk::Error) -> Self {
        Failure(BtwStatus::MathError, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(BtwStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> BtwStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BtwStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            BtwStatus::Panic
        }
    }
}

/// # Safety
/// `s` is null or a valid nul-terminated string.
unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| Failure(BtwStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

/// # Safety
/// `out` is null or valid for writes.
unsafe fn write_out<T>(out: *mut *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// # Safety
/// `out` is null or valid for writes.
unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = CString::new(s).expect("no interior nul").into_raw();
    Ok(())
}

fn prime(p: u64) -> Result<Prime, Failure> {
    Prime::new(p).map_err(|e| Failure(BtwStatus::ConfigError, e.to_string()))
}

/// # Safety
/// `entries` is null or points to 9 readable string pointers.
unsafe fn read_matrix(entries: *const *const c_char) -> Result<Matrix3, Failure> {
    if entries.is_null() {
        return Err(null("entries"));
    }
    let mut rows: [[Rational; 3]; 3] = Default::default();
    for (k, slot) in rows.iter_mut().flatten().enumerate() {
        let s = read_str(*entries.add(k), "matrix entry")?;
        *slot = parse_rational(s)
            .ok_or_else(|| Failure(BtwStatus::ConfigError, format!("not a rational number: {s:?}")))?;
    }
    Ok(Matrix3::from_rows(rows))
}

/// Message describing the last failure on this thread; empty if none.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn btw_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` is null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn btw_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a JSON experiment configuration.
///
/// # Safety
/// `json` is a nul-terminated string; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn btw_config_from_json(json: *const c_char, out: *mut *mut BtwConfig) -> BtwStatus {
    guard(|| {
        let text = read_str(json, "json")?;
        let inner = ExperimentConfig::from_json(text)?;
        write_out(out, BtwConfig { inner }, "out")
    })
}

/// Overrides the configured seed.
///
/// # Safety
/// `config` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn btw_config_set_seed(config: *mut BtwConfig, seed: u64) -> BtwStatus {
    guard(|| {
        let c = config.as_mut().ok_or_else(|| null("config"))?;
        c.inner.seed = seed;
        Ok(())
    })
}

/// # Safety
/// `config` is null or a handle from [`btw_config_from_json`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn btw_config_free(config: *mut BtwConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Runs one command (`"walk"`, `"lyapunov"`, `"opposition"`, `"stationary"`,
/// `"germ"`, `"tree-demo"` or `"check"`). The report written to standard
/// output by the command-line tool is returned in `report`. `out_dir` may be
/// null; `workers = 0` uses all cores.
///
/// # Safety
/// `config` is a live handle; `command` is a nul-terminated string;
/// `out_dir` is null or a nul-terminated string; `report` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn btw_run(
    config: *const BtwConfig,
    command: *const c_char,
    out_dir: *const c_char,
    workers: u32,
    report: *mut *mut c_char,
) -> BtwStatus {
    guard(|| {
        let c = config.as_ref().ok_or_else(|| null("config"))?;
        let name = read_str(command, "command")?;
        let cmd = [
            Command::Walk,
            Command::Lyapunov,
            Command::Opposition,
            Command::Stationary,
            Command::Germ,
            Command::TreeDemo,
            Command::Check,
        ]
        .into_iter()
        .find(|k| k.name() == name)
        .ok_or_else(|| Failure(BtwStatus::ConfigError, format!("unknown command {name:?}")))?;
        let out_dir = if out_dir.is_null() {
            None
        } else {
            Some(PathBuf::from(read_str(out_dir, "out_dir")?))
        };
        let opts = RunOptions {
            out_dir,
            workers: workers as usize,
        };
        let mut buf = Vec::new();
        let result = run_experiment(&c.inner, cmd, &opts, &mut buf);
        let text = String::from_utf8(buf).expect("reports are UTF-8");
        write_string(report, text)?;
        result.map_err(Failure::from)
    })
}

/// The standard vertex [ℤ_p³].
///
/// # Safety
/// `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn btw_vertex_standard(p: u64, out: *mut *mut BtwVertex) -> BtwStatus {
    guard(|| {
        let inner = BuildingVertex::standard(prime(p)?);
        write_out(out, BtwVertex { inner }, "out")
    })
}

/// The vertex spanned by the columns of an invertible rational matrix given
/// as 9 row-major rational strings.
///
/// # Safety
/// `entries` points to 9 nul-terminated strings; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn btw_vertex_from_basis(
    p: u64,
    entries: *const *const c_char,
    out: *mut *mut BtwVertex,
) -> BtwStatus {
    guard(|| {
        let m = read_matrix(entries)?;
        let inner = BuildingVertex::from_basis(prime(p)?, &m)?;
        write_out(out, BtwVertex { inner }, "out")
    })
}

/// g·x for g in SL₃(ℚ) given as 9 row-major rational strings.
///
/// # Safety
/// `x` is a live handle; `entries` points to 9 nul-terminated strings;
/// `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn btw_vertex_act(
    x: *const BtwVertex,
    entries: *const *const c_char,
    out: *mut *mut BtwVertex,
) -> BtwStatus {
    guard(|| {
        let x = x.as_ref().ok_or_else(|| null("x"))?;
        let g = read_matrix(entries)?;
        let inner = act(&g, &x.inner)?;
        write_out(out, BtwVertex { inner }, "out")
    })
}

/// Canonical basis of a vertex as JSON: `{"basis": [[..],[..],[..]]}`.
///
/// # Safety
/// `x` is a live handle; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn btw_vertex_to_json(x: *const BtwVertex, out: *mut *mut c_char) -> BtwStatus {
    guard(|| {
        let x = x.as_ref().ok_or_else(|| null("x"))?;
        write_string(out, serde_json::to_string(&x.inner).expect("vertex serializes"))
    })
}

/// # Safety
/// `x` is null or a vertex handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn btw_vertex_free(x: *mut BtwVertex) {
    if !x.is_null() {
        drop(Box::from_raw(x));
    }
}

/// Cartan type θ(x, y) as a JSON array of three rational strings.
///
/// # Safety
/// `x`, `y` are live handles; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn btw_cartan_type(
    x: *const BtwVertex,
    y: *const BtwVertex,
    out: *mut *mut c_char,
) -> BtwStatus {
    guard(|| {
        let (x, y) = (x.as_ref().ok_or_else(|| null("x"))?, y.as_ref().ok_or_else(|| null("y"))?);
        let theta = cartan_type(&x.inner, &y.inner);
        write_string(out, serde_json::to_string(&theta).expect("type serializes"))
    })
}

/// d(x, y)² as a rational string.
///
/// # Safety
/// `x`, `y` are live handles; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn btw_distance_sq(x: *const BtwVertex, y: *const BtwVertex, out: *mut *mut c_char) -> BtwStatus {
    guard(|| {
        let (x, y) = (x.as_ref().ok_or_else(|| null("x"))?, y.as_ref().ok_or_else(|| null("y"))?);
        if x.inner.prime() != y.inner.prime() {
            return Err(btwalk::Error::PrimeMismatch(x.inner.prime().get(), y.inner.prime().get()).into());
        }
        write_string(out, format_rational(&distance_sq(&x.inner, &y.inner)))
    })
}
