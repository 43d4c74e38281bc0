//! C ABI for the qshedge pricing engine.
//!
//! Handles are opaque pointers created from the same JSON documents the
//! CLI reads and freed by the matching `_free` function. Every entry
//! point catches panics and reports them as `QSH_INTERNAL_ERROR`; the
//! per-thread message behind [`qsh_last_error`] describes the most recent
//! failure on the calling thread.
//!
//! Passing a negative or zero `tolerance` selects the default 1e-9.

use libc::{c_char, c_double, c_int, size_t};
use qshedge::arbitrage::MarketClass;
use qshedge::model::{parse_model, ModelPayload, PayoffSpec};
use qshedge::multiperiod::{backward_superhedge, global_aip, ScenarioTree};
use qshedge::pricing::{superhedge_price, Claim, Closedness, OnePeriodMarket, PriceStatus};
use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

/// Status codes returned by fallible entry points.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QshStatus {
    QshOk = 0,
    QshInvalidArgument = 1,
    QshParseError = 2,
    QshInstantaneousProfit = 3,
    QshAipOnly = 4,
    QshInternalError = 5,
}

/// Market classification values written by `qsh_classify`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QshClass {
    QshClassNa = 0,
    QshClassAipOnly = 1,
    QshClassIp = 2,
}

/// Closedness diagnostics written by `qsh_price`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QshClosedness {
    QshStrictlyClosed = 0,
    QshDegenerateClosed = 1,
    QshBoundaryCase = 2,
    QshNotClosed = 3,
}

/// Opaque one-period market handle.
pub struct QshMarket {
    inner: OnePeriodMarket,
}

/// Opaque scenario-tree handle.
pub struct QshTree {
    inner: ScenarioTree,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).ok();
    });
}

fn clear_error() {
    LAST_ERROR.with(|slot| slot.borrow_mut().take());
}

/// Message for the most recent error on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn qsh_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(ptr::null(), |msg| msg.as_ptr())
    })
}

fn tolerance_or_default(tolerance: c_double) -> f64 {
    if tolerance > 0.0 && tolerance.is_finite() {
        tolerance
    } else {
        qshedge::DEFAULT_TOLERANCE
    }
}

/// # Safety
/// `json` must be a valid NUL-terminated UTF-8 string.
unsafe fn read_str<'a>(json: *const c_char) -> Option<&'a str> {
    if json.is_null() {
        set_error("null string argument");
        return None;
    }
    match CStr::from_ptr(json).to_str() {
        Ok(s) => Some(s),
        Err(_) => {
            set_error("string argument is not UTF-8");
            None
        }
    }
}

fn guard<T, F: FnOnce() -> Option<T>>(body: F) -> Option<T> {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(value) => value,
        Err(panic) => {
            let msg = panic
                .downcast_ref::<String>()
                .map(String::as_str)
                .or_else(|| panic.downcast_ref::<&str>().copied())
                .unwrap_or("invariant breach");
            set_error(msg);
            None
        }
    }
}

fn guard_status<F: FnOnce() -> QshStatus>(body: F) -> QshStatus {
    guard(|| Some(body())).unwrap_or(QshStatus::QshInternalError)
}

/// Parses a one-period model document. Returns null on error; see
/// [`qsh_last_error`].
///
/// # Safety
/// `json` must be a valid NUL-terminated UTF-8 string.
#[no_mangle]
pub unsafe extern "C" fn qsh_market_from_json(json: *const c_char) -> *mut QshMarket {
    guard(|| {
        let text = read_str(json)?;
        let model = match parse_model(text) {
            Ok(m) => m,
            Err(e) => {
                set_error(&e.to_string());
                return None;
            }
        };
        let ModelPayload::OnePeriod(one) = &model.payload else {
            set_error("document is not a one-period model");
            return None;
        };
        match one.to_market(false) {
            Ok(market) => {
                clear_error();
                Some(Box::into_raw(Box::new(QshMarket { inner: market })))
            }
            Err(e) => {
                set_error(&e.to_string());
                None
            }
        }
    })
    .unwrap_or(ptr::null_mut())
}

/// Frees a market handle; null is ignored.
///
/// # Safety
/// `market` must come from [`qsh_market_from_json`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn qsh_market_free(market: *mut QshMarket) {
    if !market.is_null() {
        drop(Box::from_raw(market));
    }
}

/// Parses a tree model document. Returns null on error.
///
/// # Safety
/// `json` must be a valid NUL-terminated UTF-8 string.
#[no_mangle]
pub unsafe extern "C" fn qsh_tree_from_json(json: *const c_char) -> *mut QshTree {
    guard(|| {
        let text = read_str(json)?;
        let model = match parse_model(text) {
            Ok(m) => m,
            Err(e) => {
                set_error(&e.to_string());
                return None;
            }
        };
        let ModelPayload::Tree(spec) = &model.payload else {
            set_error("document is not a tree model");
            return None;
        };
        match spec.to_tree(false) {
            Ok(tree) => {
                clear_error();
                Some(Box::into_raw(Box::new(QshTree { inner: tree })))
            }
            Err(e) => {
                set_error(&e.to_string());
                None
            }
        }
    })
    .unwrap_or(ptr::null_mut())
}

/// Frees a tree handle; null is ignored.
///
/// # Safety
/// `tree` must come from [`qsh_tree_from_json`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn qsh_tree_free(tree: *mut QshTree) {
    if !tree.is_null() {
        drop(Box::from_raw(tree));
    }
}

/// Asset count d of the market.
///
/// # Safety
/// `market` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn qsh_market_dimension(market: *const QshMarket) -> size_t {
    if market.is_null() {
        return 0;
    }
    (*market).inner.dimension()
}

fn payoff_claim(market: &OnePeriodMarket, payoff_json: &str) -> Result<Claim, qshedge::Error> {
    let spec: PayoffSpec = serde_json_from(payoff_json)?;
    spec.validate(market.dimension())?;
    let mut table = Vec::new();
    for z in market.support().points() {
        let g = spec
            .evaluate(z)
            .ok_or_else(|| qshedge::Error::MissingValue(z.to_string()))?;
        table.push((z.clone(), g));
    }
    Ok(Claim::OnSupport(table))
}

fn serde_json_from<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, qshedge::Error> {
    serde_json::from_str(text).map_err(|e| qshedge::Error::Parse(e.to_string()))
}

/// Superhedging price of the payoff (JSON `PayoffSpec`, e.g.
/// `{"call": {"strike": 100.0}}`).
///
/// Writes the price to `price_out`; with status
/// `QSH_INSTANTANEOUS_PROFIT` the price is negative infinity and
/// `theta_out` is untouched. `theta_out`, when non-null, must hold
/// `qsh_market_dimension` doubles and receives the optimal hedge.
/// `closedness_out`, when non-null, receives a [`QshClosedness`] value.
///
/// # Safety
/// `market` must be a live handle; `payoff_json` a valid NUL-terminated
/// UTF-8 string; out pointers either null or properly sized.
#[no_mangle]
pub unsafe extern "C" fn qsh_price(
    market: *const QshMarket,
    payoff_json: *const c_char,
    tolerance: c_double,
    price_out: *mut c_double,
    theta_out: *mut c_double,
    closedness_out: *mut c_int,
) -> QshStatus {
    guard_status(|| {
        if market.is_null() || price_out.is_null() {
            set_error("null market or price_out");
            return QshStatus::QshInvalidArgument;
        }
        let market = &(*market).inner;
        let Some(text) = read_str(payoff_json) else {
            return QshStatus::QshInvalidArgument;
        };
        let claim = match payoff_claim(market, text) {
            Ok(c) => c,
            Err(e) => {
                set_error(&e.to_string());
                return QshStatus::QshParseError;
            }
        };
        let result = match superhedge_price(market, &claim, tolerance_or_default(tolerance)) {
            Ok(r) => r,
            Err(e) => {
                set_error(&e.to_string());
                return QshStatus::QshParseError;
            }
        };
        *price_out = result.price;
        if !closedness_out.is_null() {
            *closedness_out = match result.closedness {
                Closedness::StrictlyClosed => QshClosedness::QshStrictlyClosed,
                Closedness::DegenerateClosed => QshClosedness::QshDegenerateClosed,
                Closedness::BoundaryCase => QshClosedness::QshBoundaryCase,
                Closedness::NotClosed => QshClosedness::QshNotClosed,
            } as c_int;
        }
        match result.status {
            PriceStatus::InstantaneousProfit => QshStatus::QshInstantaneousProfit,
            PriceStatus::Finite => {
                if !theta_out.is_null() {
                    let theta = result.theta_hat.expect("finite price has a hedge");
                    for (k, &c) in theta.coords().iter().enumerate() {
                        *theta_out.add(k) = c;
                    }
                }
                clear_error();
                QshStatus::QshOk
            }
        }
    })
}

/// Classifies the market: writes a [`QshClass`] to `class_out` and mirrors
/// it in the status (NA -> OK, AIP-only -> QSH_AIP_ONLY, IP ->
/// QSH_INSTANTANEOUS_PROFIT).
///
/// # Safety
/// `market` must be a live handle; `class_out` non-null.
#[no_mangle]
pub unsafe extern "C" fn qsh_classify(
    market: *const QshMarket,
    tolerance: c_double,
    class_out: *mut c_int,
) -> QshStatus {
    guard_status(|| {
        if market.is_null() || class_out.is_null() {
            set_error("null market or class_out");
            return QshStatus::QshInvalidArgument;
        }
        let class = qshedge::arbitrage::classify(&(*market).inner, tolerance_or_default(tolerance));
        clear_error();
        match class {
            MarketClass::Na => {
                *class_out = QshClass::QshClassNa as c_int;
                QshStatus::QshOk
            }
            MarketClass::AipOnly => {
                *class_out = QshClass::QshClassAipOnly as c_int;
                QshStatus::QshAipOnly
            }
            MarketClass::Ip => {
                *class_out = QshClass::QshClassIp as c_int;
                QshStatus::QshInstantaneousProfit
            }
        }
    })
}

/// Global AIP and NA verdicts for a tree (1 = holds, 0 = fails).
///
/// # Safety
/// `tree` must be a live handle; out pointers may be null.
#[no_mangle]
pub unsafe extern "C" fn qsh_tree_check(
    tree: *const QshTree,
    tolerance: c_double,
    global_aip_out: *mut c_int,
    global_na_out: *mut c_int,
) -> QshStatus {
    guard_status(|| {
        if tree.is_null() {
            set_error("null tree");
            return QshStatus::QshInvalidArgument;
        }
        let report = global_aip(&(*tree).inner, tolerance_or_default(tolerance));
        if !global_aip_out.is_null() {
            *global_aip_out = report.global_aip as c_int;
        }
        if !global_na_out.is_null() {
            *global_na_out = report.global_na as c_int;
        }
        clear_error();
        if !report.global_aip {
            QshStatus::QshInstantaneousProfit
        } else if !report.global_na {
            QshStatus::QshAipOnly
        } else {
            QshStatus::QshOk
        }
    })
}

/// Root cost of backward superhedging the payoff over the tree.
///
/// # Safety
/// `tree` must be a live handle; `payoff_json` a valid NUL-terminated
/// UTF-8 string; `root_cost_out` non-null.
#[no_mangle]
pub unsafe extern "C" fn qsh_tree_hedge_root(
    tree: *const QshTree,
    payoff_json: *const c_char,
    tolerance: c_double,
    root_cost_out: *mut c_double,
) -> QshStatus {
    guard_status(|| {
        if tree.is_null() || root_cost_out.is_null() {
            set_error("null tree or root_cost_out");
            return QshStatus::QshInvalidArgument;
        }
        let tree = &(*tree).inner;
        let Some(text) = read_str(payoff_json) else {
            return QshStatus::QshInvalidArgument;
        };
        let spec: PayoffSpec = match serde_json_from(text) {
            Ok(s) => s,
            Err(e) => {
                set_error(&e.to_string());
                return QshStatus::QshParseError;
            }
        };
        if let Err(e) = spec.validate(tree.dimension()) {
            set_error(&e.to_string());
            return QshStatus::QshParseError;
        }
        let mut payoff = std::collections::BTreeMap::new();
        for node in tree.nodes().filter(|n| n.children.is_empty()) {
            match spec.evaluate(&node.price) {
                Some(g) => {
                    payoff.insert(node.id, g);
                }
                None => {
                    set_error(&format!("no payoff for leaf {}", node.id));
                    return QshStatus::QshParseError;
                }
            }
        }
        match backward_superhedge(tree, &payoff, tolerance_or_default(tolerance)) {
            Ok(values) => {
                *root_cost_out = values[&tree.root()]
                    .value()
                    .expect("root is always reachable");
                clear_error();
                QshStatus::QshOk
            }
            Err(qshedge::Error::GlobalIpDetected(node)) => {
                set_error(&format!("instantaneous profit at node {node}"));
                QshStatus::QshInstantaneousProfit
            }
            Err(e) => {
                set_error(&e.to_string());
                QshStatus::QshParseError
            }
        }
    })
}
