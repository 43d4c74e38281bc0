//! Exercises the C entry points from Rust, the way a foreign caller would.

use qshedge_ffi::*;
use std::ffi::{CStr, CString};
use std::ptr;

fn cstring(text: &str) -> CString {
    CString::new(text).unwrap()
}

fn binomial_json(y: f64) -> CString {
    cstring(&format!(
        r#"{{
            "schema": 1,
            "kind": "one_period",
            "d": 1,
            "y": [{y}],
            "atoms": [{{"y": [80.0]}}, {{"y": [120.0]}}],
            "priors": [[0.5, 0.5]]
        }}"#
    ))
}

fn last_error() -> String {
    unsafe {
        let ptr = qsh_last_error();
        if ptr.is_null() {
            String::new()
        } else {
            CStr::from_ptr(ptr).to_string_lossy().into_owned()
        }
    }
}

#[test]
fn market_prices_through_the_c_surface() {
    unsafe {
        let market = qsh_market_from_json(binomial_json(100.0).as_ptr());
        assert!(!market.is_null(), "parse failed: {}", last_error());
        assert_eq!(qsh_market_dimension(market), 1);

        let payoff = cstring(r#"{"call": {"strike": 100.0}}"#);
        let mut price = 0.0f64;
        let mut theta = [0.0f64; 1];
        let mut closedness = -1i32;
        let status = qsh_price(
            market,
            payoff.as_ptr(),
            0.0,
            &mut price,
            theta.as_mut_ptr(),
            &mut closedness,
        );
        assert_eq!(status, QshStatus::QshOk);
        assert!((price - 10.0).abs() < 1e-9);
        assert!((theta[0] - 0.5).abs() < 1e-9);
        assert_eq!(closedness, QshClosedness::QshStrictlyClosed as i32);

        let mut class = -1i32;
        assert_eq!(qsh_classify(market, 0.0, &mut class), QshStatus::QshOk);
        assert_eq!(class, QshClass::QshClassNa as i32);

        qsh_market_free(market);
    }
}

#[test]
fn instantaneous_profit_reports_status_and_class() {
    unsafe {
        let market = qsh_market_from_json(binomial_json(130.0).as_ptr());
        assert!(!market.is_null());

        let payoff = cstring(r#"{"call": {"strike": 100.0}}"#);
        let mut price = 0.0f64;
        let status = qsh_price(
            market,
            payoff.as_ptr(),
            0.0,
            &mut price,
            ptr::null_mut(),
            ptr::null_mut(),
        );
        assert_eq!(status, QshStatus::QshInstantaneousProfit);
        assert_eq!(price, f64::NEG_INFINITY);

        let mut class = -1i32;
        assert_eq!(
            qsh_classify(market, 0.0, &mut class),
            QshStatus::QshInstantaneousProfit
        );
        assert_eq!(class, QshClass::QshClassIp as i32);

        qsh_market_free(market);
    }
}

#[test]
fn parse_errors_surface_messages() {
    unsafe {
        let market = qsh_market_from_json(cstring("{\"broken\":").as_ptr());
        assert!(market.is_null());
        assert!(!last_error().is_empty());

        // A tree document is not a market.
        let tree_doc = cstring(
            r#"{"schema": 1, "kind": "tree", "horizon": 0,
                "nodes": [{"id": 0, "depth": 0, "price": [1.0]}]}"#,
        );
        let market = qsh_market_from_json(tree_doc.as_ptr());
        assert!(market.is_null());
        assert!(last_error().contains("one-period"));

        assert!(qsh_market_from_json(ptr::null()).is_null());
    }
}

#[test]
fn tree_checks_and_hedges() {
    unsafe {
        let json = cstring(
            r#"{
                "schema": 1,
                "kind": "tree",
                "horizon": 2,
                "nodes": [
                    {"id": 0, "depth": 0, "price": [100.0], "children": [1, 2],
                     "child_priors": [[0.5, 0.5]]},
                    {"id": 1, "depth": 1, "price": [80.0], "children": [3, 4],
                     "child_priors": [[0.5, 0.5]]},
                    {"id": 2, "depth": 1, "price": [120.0], "children": [5, 6],
                     "child_priors": [[0.5, 0.5]]},
                    {"id": 3, "depth": 2, "price": [64.0]},
                    {"id": 4, "depth": 2, "price": [96.0]},
                    {"id": 5, "depth": 2, "price": [96.0]},
                    {"id": 6, "depth": 2, "price": [144.0]}
                ]
            }"#,
        );
        let tree = qsh_tree_from_json(json.as_ptr());
        assert!(!tree.is_null(), "parse failed: {}", last_error());

        let mut aip = -1i32;
        let mut na = -1i32;
        assert_eq!(
            qsh_tree_check(tree, 0.0, &mut aip, &mut na),
            QshStatus::QshOk
        );
        assert_eq!((aip, na), (1, 1));

        let payoff = cstring(r#"{"call": {"strike": 100.0}}"#);
        let mut root = 0.0f64;
        assert_eq!(
            qsh_tree_hedge_root(tree, payoff.as_ptr(), 0.0, &mut root),
            QshStatus::QshOk
        );
        assert!((root - 11.0).abs() < 1e-9);

        qsh_tree_free(tree);
        qsh_market_free(ptr::null_mut()); // null-safe frees
        qsh_tree_free(ptr::null_mut());
    }
}
