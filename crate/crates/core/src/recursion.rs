//! The `h_n` / `e_n` recursions behind the sharp constant 4.
//!
//! `h_1(c) = c - 4/c`, `h_n(c) = c - 4/h_{n-1}(c)`. A boundary solution of the
//! real backward flow can only be caught when every `h_n(c)` stays positive,
//! which happens exactly for `c >= 4`. The roots `x_n` of `h_n` increase to 4.
//!
//! `e_n(c, eps)` tracks the slack introduced by allowing the driving term to
//! come within `eps` of a boundary solution; a certified `eps` satisfies
//! `h_N(c) + e_N(c, eps) < 0` at the first index where `h_N(c) < 0`.

use thiserror::Error;

/// Default cap on the number of recursion steps.
pub const DEFAULT_CAP: usize = 10_000;

/// `h_n(c)` values within this distance of zero are treated as exact roots and
/// trigger the nudge to a larger `c`.
const ROOT_SNAP: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RecursionError {
    #[error("c = {0} is outside (0, 4)")]
    OutOfRange(f64),
    #[error("h_n({c}) stays positive for n <= {cap}; raise the cap")]
    CapReached { c: f64, cap: usize },
    #[error("no representable eps > 0 certifies c = {c} at index {index}")]
    Underflow { c: f64, index: usize },
}

/// `h_1..h_n` at `c`, stopping after the first nonpositive entry.
///
/// The returned vector is shorter than `n` exactly when some `h_k <= 0` made
/// the later terms undefined.
pub fn h_sequence(c: f64, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n.min(1 << 16));
    let mut prev = c;
    for _ in 0..n {
        if prev <= 0.0 {
            break;
        }
        let h = c - 4.0 / prev;
        out.push(h);
        prev = h;
    }
    out
}

/// `h_n(c)`, or `None` when an earlier `h_k(c) <= 0` leaves it undefined.
pub fn h_n(c: f64, n: usize) -> Option<f64> {
    assert!(n >= 1, "h_n is indexed from 1");
    if !(c > 0.0) {
        return None;
    }
    let seq = h_sequence(c, n);
    (seq.len() == n).then(|| seq[n - 1])
}

/// Smallest `n <= cap` with `h_n(c) <= 0`.
pub fn first_nonpositive(c: f64, cap: usize) -> Option<usize> {
    if !(c > 0.0) {
        return None;
    }
    let mut prev = c;
    for n in 1..=cap {
        let h = c - 4.0 / prev;
        if h <= 0.0 {
            return Some(n);
        }
        prev = h;
    }
    None
}

/// True when `h_1..h_n` are all defined and `h_n(x) > 0`, i.e. `x > x_n`.
fn above_root(x: f64, n: usize) -> bool {
    h_n(x, n).is_some_and(|h| h > 0.0)
}

/// Root `x_n` of `h_n` by bisection on `(x_{n-1}, 4]`.
pub fn x_n_root(n: usize, tol: f64) -> f64 {
    assert!(n >= 1, "x_n is indexed from 1");
    x_roots(n, tol)[n - 1]
}

/// `x_1..x_n`, each found by bisection inside `(x_{k-1}, 4]`.
pub fn x_roots(n: usize, tol: f64) -> Vec<f64> {
    let tol = tol.max(0.0);
    let mut out = Vec::with_capacity(n);
    let mut lower = 0.0;
    for k in 1..=n {
        let (mut lo, mut hi) = (lower, 4.0);
        for _ in 0..200 {
            if hi - lo <= tol {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if above_root(mid, k) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let root = 0.5 * (lo + hi);
        out.push(root);
        lower = root;
    }
    out
}

/// `e_n(c, eps)`, undefined (`None`) when some `h_k(c) <= 0` for `k < n`.
pub fn e_n(c: f64, eps: f64, n: usize) -> Option<f64> {
    assert!(n >= 1, "e_n is indexed from 1");
    if !(c > 0.0) || !(eps > 0.0) {
        return None;
    }
    // h_0 = c turns the first step into the general one
    let mut h = c;
    let mut e = eps;
    for _ in 0..n {
        if h <= 0.0 {
            return None;
        }
        e = eps + 4.0 * e / (h * h) * (h / e).ln_1p();
        h = c - 4.0 / h;
    }
    Some(e)
}

/// A certified separation `epsilon` for a given norm bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonCertificate {
    /// Norm bound requested.
    pub c: f64,
    /// Bound actually used; larger than `c` when `h_n(c)` hit zero exactly.
    pub c_used: f64,
    /// Index `N` with `h_N(c_used) < 0`.
    pub index: usize,
    pub h: f64,
    pub e: f64,
    /// Largest eps found with `h_N(c_used) + e_N(c_used, eps) < 0`.
    pub epsilon: f64,
}

impl EpsilonCertificate {
    /// Re-evaluates the certifying inequality from scratch.
    pub fn holds(&self) -> bool {
        match (h_n(self.c_used, self.index), e_n(self.c_used, self.epsilon, self.index)) {
            (Some(h), Some(e)) => h + e < 0.0,
            _ => false,
        }
    }
}

/// Largest eps (to relative tolerance `tol` in log scale) with `e_N(c', eps) < -h_N(c')`.
///
/// Any solution of the real backward flow started right of the driving term
/// then ends at least eps away from it at time 1.
pub fn epsilon_bound(c: f64, cap: usize, tol: f64) -> Result<EpsilonCertificate, RecursionError> {
    if !(c > 0.0 && c < 4.0) {
        return Err(RecursionError::OutOfRange(c));
    }
    let n_star = first_nonpositive(c, cap).ok_or(RecursionError::CapReached { c, cap })?;
    let h_star = h_n(c, n_star).expect("defined up to the first nonpositive index");

    let (c_used, index) = if h_star >= -ROOT_SNAP * c {
        let roots = x_roots(n_star + 1, 1e-15);
        (0.5 * (roots[n_star - 1] + roots[n_star]), n_star + 1)
    } else {
        (c, n_star)
    };
    let h = h_n(c_used, index)
        .filter(|h| *h < 0.0)
        .ok_or(RecursionError::CapReached { c, cap })?;

    let certifies = |eps: f64| e_n(c_used, eps, index).is_some_and(|e| h + e < 0.0);

    // e_N(eps) > eps, so -h itself never certifies
    let mut hi = -h;
    let mut lo = hi;
    loop {
        lo *= 1e-3;
        if lo < f64::MIN_POSITIVE {
            return Err(RecursionError::Underflow { c, index });
        }
        if certifies(lo) {
            break;
        }
        hi = lo;
    }
    let tol = tol.max(1e-15);
    while hi / lo > 1.0 + tol {
        let mid = (lo * hi).sqrt();
        if mid <= lo || mid >= hi {
            break;
        }
        if certifies(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(EpsilonCertificate {
        c,
        c_used,
        index,
        h,
        e: e_n(c_used, lo, index).expect("certified"),
        epsilon: lo,
    })
}

/// One table row: `e_n` is `None` once undefined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecursionRow {
    pub n: usize,
    pub h: f64,
    pub x: f64,
    pub e: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecursionReport {
    pub c: f64,
    pub rows: Vec<RecursionRow>,
    /// First index with `h_n(c) <= 0`, if within the cap.
    pub n_star: Option<usize>,
    pub certificate: Option<EpsilonCertificate>,
}

/// Tabulates `h_n(c)`, `x_n` and `e_n(c, eps)` for `n = 1..=rows` (fewer once `h` turns nonpositive).
///
/// `eps` defaults to the certified value when `c < 4` and one exists.
pub fn report(c: f64, rows: usize, eps: Option<f64>, cap: usize) -> RecursionReport {
    let hs = h_sequence(c, rows);
    let xs = x_roots(hs.len(), 1e-14);
    let n_star = first_nonpositive(c, cap);
    let certificate = (c > 0.0 && c < 4.0)
        .then(|| epsilon_bound(c, cap, 1e-6).ok())
        .flatten();
    let eps = eps.or(certificate.map(|cert| cert.epsilon));
    let rows = hs
        .iter()
        .zip(&xs)
        .enumerate()
        .map(|(i, (&h, &x))| RecursionRow {
            n: i + 1,
            h,
            x,
            e: eps.and_then(|eps| e_n(c, eps, i + 1)),
        })
        .collect();
    RecursionReport {
        c,
        rows,
        n_star,
        certificate,
    }
}
