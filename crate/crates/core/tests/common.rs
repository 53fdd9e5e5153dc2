// Shared helpers for the integration tests; not every test file uses all of them.
#![allow(dead_code)]

use proptest::prelude::*;
use stbc_ia::linalg::{c, CMat, C64, M2};

pub fn cplx() -> impl Strategy<Value = C64> {
    (-3.0f64..3.0, -3.0f64..3.0).prop_map(|(re, im)| c(re, im))
}

pub fn mat2() -> impl Strategy<Value = M2> {
    prop::array::uniform4(cplx()).prop_map(|a| M2::from_rows([[a[0], a[1]], [a[2], a[3]]]))
}

/// A 2×2 matrix with determinant bounded away from zero relative to its size.
pub fn well_conditioned() -> impl Strategy<Value = M2> {
    mat2().prop_filter("well conditioned", |m| {
        let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
        det.norm() > 0.05 * m.frob_norm_sq().max(1e-3)
    })
}

pub fn close<const R: usize, const C: usize>(a: &CMat<R, C>, b: &CMat<R, C>, tol: f64) -> bool {
    a.max_abs_diff(b) <= tol * (1.0 + a.frob_norm().max(b.frob_norm()))
}
