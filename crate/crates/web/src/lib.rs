//! Browser bindings: exact q(n), the certified sandwich around it and the
//! normalised bound inequalities. The `*_impl` functions are plain Rust so they
//! can be tested natively.

use std::cell::RefCell;
use std::collections::hash_map::Entry;
use std::collections::HashMap;

use qcert::budget::{bound_poly, bound_value_with, inv_sqrt, BoundPoly, Side};
use qcert::certify::{IneqId, IneqPoly, RingPoly};
use qcert::exact_q::QTable;
use qcert::numerics::{Interval, Precision};
use wasm_bindgen::prelude::*;

/// Largest index served to the page.
pub const N_LIMIT: usize = 20_000;

thread_local! {
    static TABLE: RefCell<Option<QTable>> = const { RefCell::new(None) };
    static BOUNDS: RefCell<HashMap<(u32, u32), (BoundPoly, BoundPoly)>> = RefCell::new(HashMap::new());
    static INEQS: RefCell<HashMap<IneqId, (usize, RingPoly)>> = RefCell::new(HashMap::new());
}

fn with_table<R>(need: usize, f: impl FnOnce(&QTable) -> R) -> Result<R, String> {
    if need > N_LIMIT {
        return Err(format!("n must be at most {N_LIMIT}"));
    }
    TABLE.with(|cell| {
        let mut slot = cell.borrow_mut();
        if slot.as_ref().is_none_or(|t| t.n_max() < need) {
            // grow geometrically so that scrubbing a slider stays cheap
            let target = need.max(slot.as_ref().map_or(0, |t| 2 * t.n_max())).clamp(64, N_LIMIT);
            *slot = Some(QTable::compute(target));
        }
        Ok(f(slot.as_ref().unwrap()))
    })
}

/// Sample points `lo, ..., hi` spread evenly, without repeats.
fn grid(lo: u32, hi: u32, points: u32) -> Vec<u64> {
    let (lo, hi) = (lo as u64, hi.max(lo) as u64);
    let k = points.max(2) as u64 - 1;
    let mut v: Vec<u64> = (0..=k).map(|i| lo + (hi - lo) * i / k).collect();
    v.dedup();
    v
}

pub fn q_impl(n: u32) -> Result<String, String> {
    with_table(n as usize, |t| t.q(n as usize).to_string())
}

/// Triples `(n, L/q - 1, U/q - 1)` for `q(n + s)` with truncation order `order`.
/// Points below the validity threshold of the bounds are skipped.
pub fn sandwich_impl(s: u32, order: u32, lo: u32, hi: u32, points: u32) -> Result<Vec<f64>, String> {
    let prec = Precision::default();
    let ns = grid(lo, hi, points);
    let top = *ns.last().unwrap() as usize + s as usize;
    BOUNDS.with(|cell| -> Result<Vec<f64>, String> {
        let mut cache = cell.borrow_mut();
        if let Entry::Vacant(e) = cache.entry((s, order)) {
            let l = bound_poly(s, order, Side::Lower, prec).map_err(|e| e.to_string())?;
            let u = bound_poly(s, order, Side::Upper, prec).map_err(|e| e.to_string())?;
            e.insert((l, u));
        }
        let (l, u) = &cache[&(s, order)];
        with_table(top, |t| {
            let mut out = Vec::with_capacity(3 * ns.len());
            for &n in ns.iter().filter(|&&n| n >= l.n_min.max(u.n_min)) {
                let q = Interval::from_bigint(&t.qi(n as usize + s as usize));
                let rel = |b: &BoundPoly| -> Option<f64> {
                    let v = bound_value_with(b, n, prec).ok()?;
                    Some(v.div(&q, prec).ok()?.sub(&Interval::one(), prec).to_f64())
                };
                if let (Some(a), Some(b)) = (rel(l), rel(u)) {
                    out.extend([n as f64, a, b]);
                }
            }
            out
        })
    })
}

/// Pairs `(n, P(x) / x^d)` with `x = n^{-1/2}`, where `P` is the expanded bound
/// inequality and `x^d` its largest monomial factor. The sign is the sign of `P`.
pub fn inequality_impl(ineq: &str, lo: u32, hi: u32, points: u32) -> Result<Vec<f64>, String> {
    let id: IneqId = ineq.parse().map_err(|e: qcert::certify::CertifyError| e.to_string())?;
    let prec = Precision::default();
    INEQS.with(|cell| {
        let mut cache = cell.borrow_mut();
        if let Entry::Vacant(e) = cache.entry(id) {
            let p = IneqPoly::build(id, id.default_order(), prec).map_err(|e| e.to_string())?;
            e.insert(p.expanded.strip_low_zeros());
        }
        let (_, p) = &cache[&id];
        let mut out = Vec::new();
        for n in grid(lo.max(1), hi, points) {
            out.extend([n as f64, p.eval(&inv_sqrt(n, prec), prec).to_f64()]);
        }
        Ok(out)
    })
}

/// Exact `q(n)` as a decimal string.
#[wasm_bindgen]
pub fn q(n: u32) -> Result<String, JsError> {
    q_impl(n).map_err(|e| JsError::new(&e))
}

/// Flattened `(n, L/q - 1, U/q - 1)` triples.
#[wasm_bindgen]
pub fn sandwich(s: u32, order: u32, lo: u32, hi: u32, points: u32) -> Result<Vec<f64>, JsError> {
    sandwich_impl(s, order, lo, hi, points).map_err(|e| JsError::new(&e))
}

/// Flattened `(n, normalised value)` pairs.
#[wasm_bindgen]
pub fn inequality(ineq: &str, lo: u32, hi: u32, points: u32) -> Result<Vec<f64>, JsError> {
    inequality_impl(ineq, lo, hi, points).map_err(|e| JsError::new(&e))
}
