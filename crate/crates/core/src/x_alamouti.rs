//! Alamouti-embedded alignment for the 2×2 double-antenna X channel.
//!
//! Transmitter `j` sends an Alamouti block for receiver 1 in slots 1–2 and
//! one for receiver 2 in slots 2–3, each premultiplied by the normalized
//! inverse of the link it would otherwise interfere through. At the
//! unintended receiver the two transmitters' blocks collapse onto the same
//! scaled Alamouti pattern, which the receiver strips with additions.
//!
//! The same machinery serves the two-cell uplink, where the inverted link is
//! the inter-cell link instead of the opposite cross channel; see
//! [`AlignedLinks`].

use rand::Rng;

use crate::channels::{add_awgn, ChannelSetX, Constellation, SymbolFrame};
use crate::error::{Error, Result};
use crate::linalg::{inverse2, CMat, CVec, C64, M2};

/// √(3/4): splits the block power 3P evenly over the two Alamouti blocks.
pub const TX_SCALE: f64 = 0.866_025_403_784_438_6;

/// Gate on the equivalent-channel blocks used for decoupling.
pub const HAT_NORM_MIN: f64 = 1e-9;

/// Noise variances of `[ŷ1; ŷ2]` after aligned-interference removal.
pub const SIGMA_HAT: [f64; 4] = [1.0, 2.0, 1.0, 2.0];

/// Link set the aligned scheme is built on: `desired[j][i]` carries the
/// symbols of transmitter `j` to receiver `i`, `cross[j][i]` is the link
/// through which those symbols reach the other receiver.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlignedLinks {
    pub desired: [[M2; 2]; 2],
    pub cross: [[M2; 2]; 2],
}

impl AlignedLinks {
    pub fn x_channel(ch: &ChannelSetX) -> Self {
        let h = ch.h;
        AlignedLinks {
            desired: h,
            cross: [[h[0][1], h[0][0]], [h[1][1], h[1][0]]],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct XBeamformers {
    pub v: [[M2; 2]; 2],
    pub c: [[f64; 2]; 2],
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct XTransmitBlock {
    pub x: [CMat<3, 2>; 2],
}

/// `V = c · cross⁻¹` with `c = 1/‖cross⁻¹‖_F`.
pub fn beamformers_from_cross(cross: &[[M2; 2]; 2]) -> Result<XBeamformers> {
    let mut v = [[M2::zeros(); 2]; 2];
    let mut c = [[0.0; 2]; 2];
    for j in 0..2 {
        for i in 0..2 {
            let inv = inverse2(&cross[j][i])?;
            let cc = 1.0 / inv.frob_norm();
            v[j][i] = inv.scale_re(cc);
            c[j][i] = cc;
        }
    }
    Ok(XBeamformers { v, c })
}

pub fn x_beamformers(ch: &ChannelSetX) -> Result<XBeamformers> {
    beamformers_from_cross(&AlignedLinks::x_channel(ch).cross)
}

/// 3×2 slot pattern for receiver `i`. Receiver 1's Alamouti rows occupy
/// slots 1–2; receiver 2's occupy slots 3 and 2, so the conjugated row
/// always sits in the shared middle slot.
pub fn slot_block(s: [C64; 2], i: usize) -> CMat<3, 2> {
    let plain = 2 * i;
    let mut x = CMat::<3, 2>::zeros();
    x[(plain, 0)] = s[0];
    x[(plain, 1)] = s[1];
    x[(1, 0)] = -s[1].conj();
    x[(1, 1)] = s[0].conj();
    x
}

/// `X^{[j]} = √(3/4)(A₁ V^{[j1]} + A₂ V^{[j2]})`.
pub fn x_encode(frame: &SymbolFrame, bf: &XBeamformers) -> XTransmitBlock {
    let mut x = [CMat::<3, 2>::zeros(); 2];
    for (j, xj) in x.iter_mut().enumerate() {
        for i in 0..2 {
            *xj = *xj + slot_block(frame.s[j][i], i) * bf.v[j][i];
        }
        *xj = xj.scale_re(TX_SCALE);
    }
    XTransmitBlock { x }
}

/// `Y^{[i]} = Σ_j X^{[j]} H^{[ji]} + W^{[i]}`.
pub fn x_channel_output<R: Rng + ?Sized>(ch: &ChannelSetX, tx: &XTransmitBlock, rng: &mut R, noise_var: f64) -> [CMat<3, 2>; 2] {
    let mut y = [CMat::<3, 2>::zeros(); 2];
    for (i, yi) in y.iter_mut().enumerate() {
        let clean = tx.x[0] * ch.h[0][i] + tx.x[1] * ch.h[1][i];
        *yi = add_awgn(&clean, rng, noise_var);
    }
    y
}

/// Combined interfering symbols at receiver `i`:
/// `I_k = Σ_j c^{[jī]} s_k^{[jī]}`.
pub fn aligned_interference(frame: &SymbolFrame, bf: &XBeamformers, i: usize) -> [C64; 2] {
    let o = 1 - i;
    let mut out = [C64::new(0.0, 0.0); 2];
    for (k, ik) in out.iter_mut().enumerate() {
        *ik = frame.s[0][o][k] * bf.c[0][o] + frame.s[1][o][k] * bf.c[1][o];
    }
    out
}

/// `ỹ = [Y₁₁, Y₂₁*, Y₃₁, Y₁₂, Y₂₂*, Y₃₂]` (the same pattern at both receivers).
pub fn x_receive_stack(y: &CMat<3, 2>, _i: usize) -> CVec<6> {
    CVec::from_col([
        y[(0, 0)],
        y[(1, 0)].conj(),
        y[(2, 0)],
        y[(0, 1)],
        y[(1, 1)].conj(),
        y[(2, 1)],
    ])
}

/// Removes the aligned interference by adding and subtracting stack entries.
pub fn x_cancel_aligned(yt: &CVec<6>, i: usize) -> (CVec<2>, CVec<2>) {
    let t = |k: usize| yt.at(k - 1);
    if i == 0 {
        (CVec::from_col([t(1), t(2) + t(6)]), CVec::from_col([t(4), t(5) - t(3)]))
    } else {
        (CVec::from_col([t(3), t(2) + t(4)]), CVec::from_col([t(6), t(5) - t(1)]))
    }
}

/// Per-antenna blocks `Ĥ_n = [[h̃₁ₙ, h̃₂ₙ], [h̃₂ₙ*, −h̃₁ₙ*]]` of an equivalent
/// channel `H̃ = V H`.
pub fn hat_blocks(ht: &M2) -> [M2; 2] {
    [0, 1].map(|n| M2::from_rows([[ht[(0, n)], ht[(1, n)]], [ht[(1, n)].conj(), -ht[(0, n)].conj()]]))
}

/// `N = [Ĥ₁/‖Ĥ₁‖²; −Ĥ₂/‖Ĥ₂‖²]`; `Nᴴ` nulls the symbols carried by `hats`.
pub fn decoupler(hats: &[M2; 2]) -> Result<CMat<4, 2>> {
    let n1 = hats[0].frob_norm_sq();
    let n2 = hats[1].frob_norm_sq();
    if n1.sqrt() <= HAT_NORM_MIN || n2.sqrt() <= HAT_NORM_MIN {
        return Err(Error::Conditioning("equivalent channel block vanishes"));
    }
    let mut n = CMat::<4, 2>::zeros();
    n.set_block(0, 0, &hats[0].scale_re(1.0 / n1));
    n.set_block(2, 0, &hats[1].scale_re(-1.0 / n2));
    Ok(n)
}

/// Stacks the two per-antenna blocks into the 4×2 channel of one user.
pub fn stack_hats(hats: &[M2; 2]) -> CMat<4, 2> {
    let mut d = CMat::<4, 2>::zeros();
    d.set_block(0, 0, &hats[0]);
    d.set_block(2, 0, &hats[1]);
    d
}

/// Nulls the other transmitter's symbols: returns `ŷ = Nᴴ[ŷ₁; ŷ₂]` and the
/// remaining Alamouti channel `Ĥ = Nᴴ D_own`.
pub fn x_decouple_users(y1: &CVec<2>, y2: &CVec<2>, hats_other: &[M2; 2], hats_own: &[M2; 2]) -> Result<(CVec<2>, M2)> {
    let nh = decoupler(hats_other)?.herm();
    let mut ys = CVec::<4>::zeros();
    ys.set_block(0, 0, y1);
    ys.set_block(2, 0, y2);
    Ok((nh * ys, nh * stack_hats(hats_own)))
}

/// Symbol-by-symbol matched-filter decisions; returns the labels.
pub fn x_ml_decode(y: &CVec<2>, hh: &M2, c: Constellation, power: f64) -> [u32; 2] {
    let amp = power.sqrt();
    [0, 1].map(|k| {
        let h = hh.col(k);
        let g = h.frob_norm_sq() * TX_SCALE * amp;
        c.slice(h.inner(y) / g)
    })
}

/// Per-realization quantities of the aligned scheme.
#[derive(Clone, Copy, Debug)]
pub struct AlignedState {
    pub bf: XBeamformers,
    /// `H̃^{[ji]} = V^{[ji]} desired^{[ji]}`.
    pub ht: [[M2; 2]; 2],
    /// `hats[j][i]` are the two `Ĥ_n` blocks of `H̃^{[ji]}`.
    pub hats: [[[M2; 2]; 2]; 2],
}

pub fn aligned_state(links: &AlignedLinks) -> Result<AlignedState> {
    let bf = beamformers_from_cross(&links.cross)?;
    let mut ht = [[M2::zeros(); 2]; 2];
    let mut hats = [[[M2::zeros(); 2]; 2]; 2];
    for j in 0..2 {
        for i in 0..2 {
            ht[j][i] = bf.v[j][i] * links.desired[j][i];
            hats[j][i] = hat_blocks(&ht[j][i]);
            for h in &hats[j][i] {
                if h.frob_norm() <= HAT_NORM_MIN {
                    return Err(Error::Conditioning("equivalent channel block vanishes"));
                }
            }
        }
    }
    Ok(AlignedState { bf, ht, hats })
}

/// Decodes all four desired labels at receiver `i` from its block.
pub fn aligned_receive(state: &AlignedState, y: &CMat<3, 2>, i: usize, c: Constellation, power: f64) -> Result<[[u32; 2]; 2]> {
    let yt = x_receive_stack(y, i);
    let (y1, y2) = x_cancel_aligned(&yt, i);
    let mut out = [[0; 2]; 2];
    for (j, o) in out.iter_mut().enumerate() {
        let (yh, hh) = x_decouple_users(&y1, &y2, &state.hats[1 - j][i], &state.hats[j][i])?;
        *o = x_ml_decode(&yh, &hh, c, power);
    }
    Ok(out)
}

/// Instantaneous normalized receive SNR of one stream, plus the
/// noise-whitening-free companion `γ̄`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SnrSample {
    pub gamma: f64,
    pub gamma_bar: f64,
}

/// SNR of `s_k^{[ji]}` at receiver `i` after both cancellation steps:
/// `γ = (3/4) vᴴ (Nᴴ Σ N)⁻¹ v` with `v = Nᴴ ĥ_k`, `Σ = diag(1,2,1,2)`.
pub fn aligned_gamma(state: &AlignedState, j: usize, i: usize, k: usize) -> Result<SnrSample> {
    let hats_o = &state.hats[1 - j][i];
    let n = decoupler(hats_o)?;
    let nh = n.herm();
    let d = stack_hats(&state.hats[j][i]).col(k);
    let v = nh * d;
    let sig = CMat::<4, 4>::diag(SIGMA_HAT.map(|s| C64::new(s, 0.0)));
    let kmat = nh * sig * n;
    let kinv = inverse2(&kmat)?;
    let gamma = 0.75 * v.inner(&(kinv * v)).re;
    let b = 1.0 / (0.5 / hats_o[0].frob_norm_sq() + 0.5 / hats_o[1].frob_norm_sq());
    let gamma_bar = b * v.frob_norm_sq();
    Ok(SnrSample { gamma, gamma_bar })
}

/// All eight stream SNRs, ordered `(j, i, k)` lexicographically.
pub fn aligned_gammas(state: &AlignedState) -> Result<[f64; 8]> {
    let mut out = [0.0; 8];
    for j in 0..2 {
        for i in 0..2 {
            for k in 0..2 {
                out[4 * j + 2 * i + k] = aligned_gamma(state, j, i, k)?.gamma;
            }
        }
    }
    Ok(out)
}

/// SNR of stream `(j, i, k)` for one X-channel realization.
pub fn x_gamma(ch: &ChannelSetX, j: usize, i: usize, k: usize) -> Result<SnrSample> {
    aligned_gamma(&aligned_state(&AlignedLinks::x_channel(ch))?, j, i, k)
}

/// Covariance `Φ` of the components of `γ̄` for `s₁^{[11]}`, conditioned on
/// every link except the desired one.
pub fn phi_matrix(ch: &ChannelSetX) -> Result<M2> {
    let links = AlignedLinks::x_channel(ch);
    let state = aligned_state(&links)?;
    let inv = inverse2(&links.cross[0][0])?;
    let total = inv.frob_norm_sq();
    let theta = M2::diag([0, 1].map(|m| C64::new(inv.row(m).frob_norm_sq() / total, 0.0)));
    let hats = &state.hats[1][0];
    let n1 = hats[0].frob_norm_sq();
    let n2 = hats[1].frob_norm_sq();
    let b = 1.0 / (0.5 / n1 + 0.5 / n2);
    let phi = (hats[0].herm() * theta * hats[0]).scale_re(1.0 / (n1 * n1))
        + (hats[1].herm() * theta * hats[1]).scale_re(1.0 / (n2 * n2));
    Ok(phi.scale_re(b))
}

/// The 4×4 matrix whose full rank shows the desired symbols at receiver 1
/// are linearly independent.
pub fn desired_rank_matrix(state: &AlignedState) -> CMat<4, 4> {
    let a = state.ht[0][0];
    let b = state.ht[1][0];
    let mut m = CMat::<4, 4>::zeros();
    for n in 0..2 {
        let r = 2 * n;
        m[(r, 0)] = a[(0, n)];
        m[(r, 1)] = a[(1, n)];
        m[(r, 2)] = b[(0, n)];
        m[(r, 3)] = b[(1, n)];
        m[(r + 1, 0)] = -a[(1, n)].conj();
        m[(r + 1, 1)] = a[(0, n)].conj();
        m[(r + 1, 2)] = -b[(1, n)].conj();
        m[(r + 1, 3)] = b[(0, n)].conj();
    }
    m
}

/// Equivalent 6×6 system of receiver `i` in stack coordinates: columns are
/// `s₁, s₂` of transmitter 1, `s₁, s₂` of transmitter 2, then `I₁, I₂`,
/// all including the √(3/4) transmit scale.
pub fn stacked_system(state: &AlignedState, i: usize) -> CMat<6, 6> {
    let mut m = CMat::<6, 6>::zeros();
    for j in 0..2 {
        let h = state.ht[j][i];
        for n in 0..2 {
            // Rows of antenna n: slot of the first Alamouti row, then the
            // conjugated second row, in stack order.
            let (r_first, r_conj) = if i == 0 { (3 * n, 3 * n + 1) } else { (3 * n + 2, 3 * n + 1) };
            m[(r_first, 2 * j)] = h[(0, n)];
            m[(r_first, 2 * j + 1)] = h[(1, n)];
            m[(r_conj, 2 * j)] = h[(1, n)].conj();
            m[(r_conj, 2 * j + 1)] = -h[(0, n)].conj();
        }
    }
    let one = C64::new(1.0, 0.0);
    if i == 0 {
        // I₁ at slot 3 antenna 1 and conj slot 2 antenna 2; I₂ opposite.
        m[(2, 4)] = one;
        m[(4, 4)] = one;
        m[(1, 5)] = -one;
        m[(5, 5)] = one;
    } else {
        m[(0, 4)] = one;
        m[(4, 4)] = one;
        m[(1, 5)] = -one;
        m[(3, 5)] = one;
    }
    m.scale_re(TX_SCALE)
}
