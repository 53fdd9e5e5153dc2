//! Linear alignment baseline for the same downlink: a shared random 6×4
//! precoding basis, receive filters that null the other cell, and
//! zero-forcing inside the cell.

use rand::Rng;

use crate::channels::{add_awgn, cn_mat, ChannelSetCell, Constellation, SymbolFrame};
use crate::error::Result;
use crate::linalg::{inverse, kron_i3, left_null_basis, CMat, CVec};

#[derive(Clone, Copy, Debug)]
pub struct DliaState {
    pub p: CMat<6, 4>,
    /// Orthonormal 2×6 receive filters `u[j][i]`.
    pub u: [[CMat<2, 6>; 2]; 2],
    /// Precoders of both base stations, columns ordered `(i, k)`.
    pub f: [CMat<6, 4>; 2],
    /// Per-stream amplitude after filtering, same order as `f`.
    pub d: [[f64; 4]; 2],
}

pub fn random_basis<R: Rng + ?Sized>(rng: &mut R) -> CMat<6, 4> {
    cn_mat(rng)
}

/// Rows spanning the left null space of `(I₃ ⊗ I^{[ji]ᵀ}) P`.
pub fn dlia_receive_filters(ch: &ChannelSetCell, p: &CMat<6, 4>) -> Result<[[CMat<2, 6>; 2]; 2]> {
    let mut u = [[CMat::<2, 6>::zeros(); 2]; 2];
    for j in 0..2 {
        for i in 0..2 {
            u[j][i] = left_null_basis::<6, 4, 2>(&(kron_i3(&ch.i[j][i].transpose()) * *p))?;
        }
    }
    Ok(u)
}

pub fn dlia_precoders(ch: &ChannelSetCell, p: &CMat<6, 4>) -> Result<DliaState> {
    let u = dlia_receive_filters(ch, p)?;
    let mut f = [CMat::<6, 4>::zeros(); 2];
    let mut d = [[0.0; 4]; 2];
    for j in 0..2 {
        let mut m = CMat::<4, 4>::zeros();
        for i in 0..2 {
            m.set_block(2 * i, 0, &(u[j][i] * kron_i3(&ch.h[j][i].transpose()) * *p));
        }
        let fj = *p * inverse(&m)?;
        for k in 0..4 {
            let dk = (0.75 / fj.col(k).frob_norm_sq()).sqrt();
            f[j].set_col(k, &fj.col(k).scale_re(dk));
            d[j][k] = dk;
        }
    }
    Ok(DliaState { p: *p, u, f, d })
}

pub fn dlia_encode(frame: &SymbolFrame, st: &DliaState) -> [CVec<6>; 2] {
    [0, 1].map(|j| {
        let s = frame.s[j];
        st.f[j] * CVec::from_col([s[0][0], s[0][1], s[1][0], s[1][1]])
    })
}

/// Received 6-vectors `y[j][i]` in time-major order.
pub fn dlia_channel_output<R: Rng + ?Sized>(ch: &ChannelSetCell, x: &[CVec<6>; 2], rng: &mut R, noise_var: f64) -> [[CVec<6>; 2]; 2] {
    [0, 1].map(|j| {
        [0, 1].map(|i| {
            let clean = kron_i3(&ch.h[j][i].transpose()) * x[j] + kron_i3(&ch.i[j][i].transpose()) * x[1 - j];
            add_awgn(&clean, rng, noise_var)
        })
    })
}

pub fn dlia_decode(st: &DliaState, y: &CVec<6>, j: usize, i: usize, c: Constellation, power: f64) -> [u32; 2] {
    let z = st.u[j][i] * *y;
    let amp = power.sqrt();
    [0, 1].map(|k| c.slice(z.at(k) / (st.d[j][2 * i + k] * amp)))
}

/// `γ = d²`, ordered `(j, i, k)`.
pub fn dlia_gammas(st: &DliaState) -> [f64; 8] {
    let mut out = [0.0; 8];
    for j in 0..2 {
        for k in 0..4 {
            out[4 * j + k] = st.d[j][k] * st.d[j][k];
        }
    }
    out
}
