//! Linear alignment baseline for the M = 2 X channel, with its zero-forcing
//! receiver, and the two-block Alamouti variant built on top of it.
//!
//! Vectors are time-major: `x = [x₁; x₂; x₃]` with `x_t` the antenna
//! vector of slot `t`, so a link acts as `I₃ ⊗ G` with `G = Hᵀ` (the row
//! model `Y = X H` read column-wise).

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channels::{add_awgn, ChannelSetX, Constellation, SymbolFrame};
use crate::error::{Error, Result};
use crate::linalg::{eig2x2, inverse, inverse2, kron_i3, CMat, CVec, Eig2, C64, M2};

/// How the transmit power of each transmitter is spread over its streams.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JashPower {
    /// One common factor per transmitter so its block power is 3P.
    #[default]
    PerTransmitter,
    /// Every stream column scaled to power 3P/4.
    PerStream,
}

#[derive(Clone, Copy, Debug)]
pub struct JashBeamformers {
    /// `vbar[j][i]`: 6×2 beamformer of transmitter `j` for receiver `i`,
    /// power scaling included.
    pub vbar: [[CMat<6, 2>; 2]; 2],
    pub eig: Eig2,
    /// Scale applied to transmitter 1's unit-eigenvector designs.
    pub beta1: f64,
    pub alpha21: f64,
    pub alpha22: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JashGammaParts {
    pub kappa: C64,
    pub delta11: f64,
    pub delta22: f64,
}

fn g(ch: &ChannelSetX, j: usize, i: usize) -> M2 {
    ch.h[j][i].transpose()
}

/// `[[a, b], [b', a'], [0, 0]]`-style 6×2 design from two 2-vectors placed in
/// the given slots (`first` then `second`).
fn design(u1: &CVec<2>, u2: &CVec<2>, first: usize, second: usize) -> CMat<6, 2> {
    let mut v = CMat::<6, 2>::zeros();
    for r in 0..2 {
        v[(2 * first + r, 0)] = u1.at(r);
        v[(2 * first + r, 1)] = u2.at(r);
        v[(2 * second + r, 0)] = u2.at(r);
        v[(2 * second + r, 1)] = u1.at(r);
    }
    v
}

pub fn jash_beamformers(ch: &ChannelSetX, power: JashPower) -> Result<JashBeamformers> {
    let g11 = g(ch, 0, 0);
    let g21 = g(ch, 1, 0);
    let g12 = g(ch, 0, 1);
    let g22 = g(ch, 1, 1);
    let g11i = inverse2(&g11)?;
    let g21i = inverse2(&g21)?;
    let g22i = inverse2(&g22)?;
    let eig = eig2x2(&(g11i * g21 * g22i * g12))?;
    let v11 = design(&eig.u1, &eig.u2, 0, 1);
    let v12 = design(&eig.u1, &eig.u2, 0, 2);
    let v21 = kron_i3(&(g22i * g12)) * v11;
    let v22 = kron_i3(&(g21i * g11)) * v12;
    let (beta1, alpha21, alpha22) = match power {
        JashPower::PerTransmitter => {
            let t2 = v21.frob_norm_sq() + v22.frob_norm_sq();
            let b1 = (3.0 / (v11.frob_norm_sq() + v12.frob_norm_sq())).sqrt();
            let b2 = (3.0 / t2).sqrt();
            (b1, b2, b2)
        }
        JashPower::PerStream => {
            // Both columns of each design have equal norm, so one factor
            // per beamformer gives every stream 3/4.
            let col = |v: &CMat<6, 2>| (0.75 / v.col(0).frob_norm_sq()).sqrt();
            (col(&v11), col(&v21), col(&v22))
        }
    };
    if !(alpha21.is_finite() && alpha22.is_finite()) {
        return Err(Error::Conditioning("beamformer power normalization"));
    }
    Ok(JashBeamformers {
        vbar: [[v11.scale_re(beta1), v12.scale_re(beta1)], [v21.scale_re(alpha21), v22.scale_re(alpha22)]],
        eig,
        beta1,
        alpha21,
        alpha22,
    })
}

/// `x^{[j]} = v̄^{[j1]} s^{[j1]} + v̄^{[j2]} s^{[j2]}`.
pub fn jash_encode(frame: &SymbolFrame, bf: &JashBeamformers) -> [CVec<6>; 2] {
    [0, 1].map(|j| {
        let mut x = CVec::<6>::zeros();
        for i in 0..2 {
            let s = CVec::from_col(frame.s[j][i]);
            x = x + bf.vbar[j][i] * s;
        }
        x
    })
}

/// `y^{[i]} = Σ_j (I₃ ⊗ G^{[ji]}) x^{[j]} + w^{[i]}`.
pub fn jash_channel_output<R: Rng + ?Sized>(ch: &ChannelSetX, x: &[CVec<6>; 2], rng: &mut R, noise_var: f64) -> [CVec<6>; 2] {
    [0, 1].map(|i| {
        let clean = kron_i3(&g(ch, 0, i)) * x[0] + kron_i3(&g(ch, 1, i)) * x[1];
        add_awgn(&clean, rng, noise_var)
    })
}

/// Equivalent system at receiver `i`: columns are the two desired streams of
/// transmitter 1, those of transmitter 2, then the aligned interference
/// directions (transmitter 1's beamformer for the other receiver).
pub fn jash_system(ch: &ChannelSetX, bf: &JashBeamformers, i: usize) -> CMat<6, 6> {
    let o = 1 - i;
    let a = kron_i3(&g(ch, 0, i)) * bf.vbar[0][i];
    let b = kron_i3(&g(ch, 1, i)) * bf.vbar[1][i];
    let c = kron_i3(&g(ch, 0, i)) * bf.vbar[0][o];
    let mut m = CMat::<6, 6>::zeros();
    m.set_block(0, 0, &a);
    m.set_block(0, 2, &b);
    m.set_block(0, 4, &c);
    m
}

/// Per-realization receiver state: zero-forcing matrices of both receivers.
#[derive(Clone, Copy, Debug)]
pub struct JashState {
    pub bf: JashBeamformers,
    pub zf: [CMat<6, 6>; 2],
}

pub fn jash_state(ch: &ChannelSetX, power: JashPower) -> Result<JashState> {
    let bf = jash_beamformers(ch, power)?;
    let zf = [inverse(&jash_system(ch, &bf, 0))?, inverse(&jash_system(ch, &bf, 1))?];
    Ok(JashState { bf, zf })
}

/// Zero-forced statistics `z = s + n` for the four desired streams, ordered
/// `(j, k)`.
pub fn jash_zf(state: &JashState, y: &CVec<6>, i: usize) -> [C64; 4] {
    let w = &state.zf[i];
    [0, 1, 2, 3].map(|r| (0..6).map(|c| w[(r, c)] * y.at(c)).sum())
}

/// Decodes the desired labels `[j][k]` at receiver `i`.
pub fn jash_decode(state: &JashState, y: &CVec<6>, i: usize, c: Constellation, power: f64) -> [[u32; 2]; 2] {
    let z = jash_zf(state, y, i);
    let amp = power.sqrt();
    [[c.slice(z[0] / amp), c.slice(z[1] / amp)], [c.slice(z[2] / amp), c.slice(z[3] / amp)]]
}

/// SNR of `s_k^{[ji]}`: the inverse noise gain of its zero-forcing row.
pub fn jash_gamma(state: &JashState, j: usize, i: usize, k: usize) -> f64 {
    let r = 2 * j + k;
    1.0 / state.zf[i].row(r).frob_norm_sq()
}

pub fn jash_gammas(state: &JashState) -> [f64; 8] {
    let mut out = [0.0; 8];
    for j in 0..2 {
        for i in 0..2 {
            for k in 0..2 {
                out[4 * j + 2 * i + k] = jash_gamma(state, j, i, k);
            }
        }
    }
    out
}

/// `κ` and the diagonal of `Δ = (uᴴ G₁₁ᴴ G₁₁ u)⁻¹` for receiver 1.
pub fn jash_gamma_parts(ch: &ChannelSetX, eig: &Eig2) -> Result<JashGammaParts> {
    let gu = g(ch, 0, 0) * eig.vectors();
    let delta = inverse2(&(gu.herm() * gu))?;
    Ok(JashGammaParts { kappa: eig.kappa, delta11: delta[(0, 0)].re, delta22: delta[(1, 1)].re })
}

/// Upper-bound SNR of `s₁^{[11]}` when the aligned-interference constraints
/// are dropped: `β²|1−κ|² / (δ₁₁ + |κ|² δ₂₂)`, on the same power scale as
/// [`jash_gamma`].
pub fn jash_gamma_upper(ch: &ChannelSetX, bf: &JashBeamformers) -> Result<f64> {
    let p = jash_gamma_parts(ch, &bf.eig)?;
    let one = C64::new(1.0, 0.0);
    Ok(bf.beta1 * bf.beta1 * (one - p.kappa).norm_sqr() / (p.delta11 + p.kappa.norm_sqr() * p.delta22))
}

/// Effective SNRs of the two-block Alamouti variant: `γ₁ + γ₂` per
/// (transmitter, receiver) pair, ordered `(j, i)`.
pub fn modified_jash_gamma(state: &JashState) -> [f64; 4] {
    let mut out = [0.0; 4];
    for j in 0..2 {
        for i in 0..2 {
            out[2 * j + i] = jash_gamma(state, j, i, 0) + jash_gamma(state, j, i, 1);
        }
    }
    out
}

/// Symbols of the two alignment blocks: pair `(a, b)` of every link goes out
/// as `(a, b)` in block 1 and `(−b*, a*)` in block 2.
pub fn modified_jash_encode(frame: &SymbolFrame, bf: &JashBeamformers) -> [[CVec<6>; 2]; 2] {
    let mut second = *frame;
    for j in 0..2 {
        for i in 0..2 {
            let [a, b] = frame.s[j][i];
            second.s[j][i] = [-b.conj(), a.conj()];
        }
    }
    [jash_encode(frame, bf), jash_encode(&second, bf)]
}

/// Maximal-ratio combining of the two blocks' zero-forced outputs, then
/// nearest-point decisions; returns labels `[j][k]` at receiver `i`.
pub fn modified_jash_decode(state: &JashState, y1: &CVec<6>, y2: &CVec<6>, i: usize, c: Constellation, power: f64) -> [[u32; 2]; 2] {
    let z = jash_zf(state, y1, i);
    let zp = jash_zf(state, y2, i);
    let amp = power.sqrt();
    [0, 1].map(|j| {
        let g1 = jash_gamma(state, j, i, 0);
        let g2 = jash_gamma(state, j, i, 1);
        let (z1, z2) = (z[2 * j], z[2 * j + 1]);
        let (z1p, z2p) = (zp[2 * j], zp[2 * j + 1]);
        let a = (z1 * g1 + z2p.conj() * g2) / (g1 + g2);
        let b = (z2 * g2 - z1p.conj() * g1) / (g1 + g2);
        [c.slice(a / amp), c.slice(b / amp)]
    })
}
