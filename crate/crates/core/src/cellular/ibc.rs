//! Downlink: each base station serves its two users with rotated Alamouti
//! blocks. Precoding makes the block meant for one user arrive at the
//! other user of the same cell in swapped-Alamouti form, which the
//! receiver's combining cancels; a padding row does the same for the other
//! cell's transmission.

use rand::Rng;

use crate::channels::{add_awgn, ChannelSetCell, Constellation, SymbolFrame};
use crate::error::{Error, Result};
use crate::linalg::{alamouti_embed, inverse2, CMat, C64, M2};
use crate::x_alamouti::HAT_NORM_MIN;

#[derive(Clone, Copy, Debug)]
pub struct IbcPrecoders {
    /// `P^{[ji]} = α^{[ji]} B^{[ji]} R^{[ji]}`.
    pub p: [[M2; 2]; 2],
    pub alpha: [[f64; 2]; 2],
    /// Alamouti-structured bracket `B^{[ji]}`.
    pub b: [[M2; 2]; 2],
    /// `R^{[ji]}`, built from the rows of `H̃^{[jī]}`.
    pub r: [[M2; 2]; 2],
    /// `H̃^{[ji]} = H^{[ji]} (I^{[ji]})⁻¹`.
    pub ht: [[M2; 2]; 2],
    pub i_inv: [[M2; 2]; 2],
    /// Scalar gain of both combined outputs at user `(j, i)`.
    pub gain: [[C64; 2]; 2],
}

/// `Ĥ_m`: Alamouti matrix of row `m` of `h`.
pub fn row_alamouti(h: &M2, m: usize) -> M2 {
    alamouti_embed(h[(m, 0)], h[(m, 1)])
}

/// Maps rows of `H̃` to the swapped-Alamouti form when multiplied from the
/// left: `R H̃` has anti-Alamouti structure.
fn r_matrix(g: &M2, n1: f64, n2: f64) -> M2 {
    M2::from_rows([
        [g[(0, 0)].conj() / n1, -g[(1, 0)].conj() / n2],
        [g[(0, 1)].conj() / n1, -g[(1, 1)].conj() / n2],
    ])
}

/// Matrix mapping rotated symbols `c` to the combined outputs at a user
/// whose effective channel is `e = R H̃`.
pub fn ibc_equivalent(e: &M2) -> M2 {
    M2::from_rows([
        [e[(0, 0)] + e[(1, 1)].conj(), e[(1, 0)] - e[(0, 1)].conj()],
        [e[(0, 1)] - e[(1, 0)].conj(), e[(1, 1)] + e[(0, 0)].conj()],
    ])
}

pub fn ibc_precoders(ch: &ChannelSetCell) -> Result<IbcPrecoders> {
    let mut i_inv = [[M2::zeros(); 2]; 2];
    let mut ht = [[M2::zeros(); 2]; 2];
    for j in 0..2 {
        for i in 0..2 {
            i_inv[j][i] = inverse2(&ch.i[j][i])?;
            ht[j][i] = ch.h[j][i] * i_inv[j][i];
        }
    }
    let zero = [[M2::zeros(); 2]; 2];
    let mut out = IbcPrecoders { p: zero, alpha: [[0.0; 2]; 2], b: zero, r: zero, ht, i_inv, gain: [[C64::new(0.0, 0.0); 2]; 2] };
    let min = HAT_NORM_MIN * HAT_NORM_MIN;
    for j in 0..2 {
        for i in 0..2 {
            let f = &ht[j][i];
            let g = &ht[j][1 - i];
            let n1 = g.row(0).frob_norm_sq();
            let n2 = g.row(1).frob_norm_sq();
            if n1 <= min || n2 <= min {
                return Err(Error::Conditioning("effective channel row vanishes"));
            }
            let b = row_alamouti(f, 0).herm() * row_alamouti(g, 0) - (row_alamouti(f, 1).herm() * row_alamouti(g, 1)).scale_re(n1 / n2);
            let b = b.scale_re(1.0 / n1);
            let r = r_matrix(g, n1, n2);
            let pu = b * r;
            let norm = pu.frob_norm();
            if !(norm > 0.0 && norm.is_finite()) {
                return Err(Error::Conditioning("precoder vanishes"));
            }
            let alpha = 1.0 / (std::f64::consts::SQRT_2 * norm);
            out.p[j][i] = pu.scale_re(alpha);
            out.alpha[j][i] = alpha;
            out.b[j][i] = b;
            out.r[j][i] = r;
        }
    }
    for j in 0..2 {
        for i in 0..2 {
            let e = out.b[j][i] * out.r[j][i] * ht[j][i];
            out.gain[j][i] = (e[(0, 0)] + e[(1, 1)].conj()).scale(out.alpha[j][i]);
        }
    }
    Ok(out)
}

/// Rotated symbols `c^{[ji]}`: first row of `α S^{[ji]} B^{[ji]}`.
pub fn rotated_symbols(frame: &SymbolFrame, pre: &IbcPrecoders, j: usize, i: usize) -> [C64; 2] {
    let [a, b] = frame.s[j][i];
    let m = (alamouti_embed(a, b) * pre.b[j][i]).scale_re(pre.alpha[j][i]);
    [m[(0, 0)], m[(0, 1)]]
}

/// Base-station blocks. Cell 1 sends the precoded pair in slots 1–2 and a
/// padding row in slot 3; cell 2 sends the padding row first and the pair
/// in reverse order.
pub fn ibc_encode(frame: &SymbolFrame, pre: &IbcPrecoders) -> [CMat<3, 2>; 2] {
    [0, 1].map(|j| {
        let mut top = M2::zeros();
        for i in 0..2 {
            let [a, b] = frame.s[j][i];
            top = top + alamouti_embed(a, b) * pre.p[j][i];
        }
        let pad = [-top[(1, 1)].conj(), top[(1, 0)].conj()];
        let rows = if j == 0 { [top.as_rows()[0], top.as_rows()[1], pad] } else { [pad, top.as_rows()[1], top.as_rows()[0]] };
        CMat::from_rows(rows)
    })
}

/// `Y^{[ji]} = X^{[j]} H^{[ji]} + X^{[j̄]} I^{[ji]} + W^{[ji]}`, indexed `[j][i]`.
pub fn ibc_channel_output<R: Rng + ?Sized>(ch: &ChannelSetCell, x: &[CMat<3, 2>; 2], rng: &mut R, noise_var: f64) -> [[CMat<3, 2>; 2]; 2] {
    [0, 1].map(|j| [0, 1].map(|i| add_awgn(&(x[j] * ch.h[j][i] + x[1 - j] * ch.i[j][i]), rng, noise_var)))
}

/// Combined outputs `ŷ` of user `(j, i)` after removing the inter-cell link.
pub fn ibc_receive(y: &CMat<3, 2>, pre: &IbcPrecoders, j: usize, i: usize) -> [C64; 2] {
    let yt = *y * pre.i_inv[j][i];
    let first = if j == 0 { 0 } else { 2 };
    [yt[(first, 0)] + yt[(1, 1)].conj(), yt[(first, 1)] - yt[(1, 0)].conj()]
}

/// Noise-whitening stack used to check that all interference at user
/// `(j, i)` lies in the span of [`interference_span`].
pub fn interference_stack(y: &CMat<3, 2>, pre: &IbcPrecoders, j: usize, i: usize) -> CMat<6, 1> {
    let yt = *y * pre.i_inv[j][i];
    let (f, l) = if j == 0 { (0, 2) } else { (2, 0) };
    CMat::from_col([yt[(f, 0)], yt[(f, 1)], yt[(1, 0)].conj(), yt[(1, 1)].conj(), yt[(l, 0)], yt[(l, 1)]])
}

/// Subspace of [`interference_stack`] that the combining annihilates.
pub fn interference_span() -> CMat<6, 4> {
    let one = C64::new(1.0, 0.0);
    let mut q = CMat::<6, 4>::zeros();
    q[(1, 0)] = one;
    q[(2, 0)] = one;
    q[(0, 1)] = -one;
    q[(3, 1)] = one;
    q[(4, 2)] = one;
    q[(5, 3)] = one;
    q
}

fn require_psk(c: Constellation) -> Result<()> {
    if c.is_psk() {
        Ok(())
    } else {
        Err(Error::PskRequired { scheme: "ibc_alamouti".into(), constellation: c.name().into() })
    }
}

/// Labels of user `(j, i)`; rejects non-PSK constellations.
pub fn ibc_decode(pre: &IbcPrecoders, y: &CMat<3, 2>, j: usize, i: usize, c: Constellation, power: f64) -> Result<[u32; 2]> {
    require_psk(c)?;
    let yh = ibc_receive(y, pre, j, i);
    let g = pre.gain[j][i] * power.sqrt();
    Ok([c.slice(yh[0] / g), c.slice(yh[1] / g)])
}

/// `γ = |g|² / ‖(I^{[ji]})⁻¹‖²_F`, ordered `(j, i, k)`.
pub fn ibc_gammas(pre: &IbcPrecoders) -> [f64; 8] {
    let mut out = [0.0; 8];
    for j in 0..2 {
        for i in 0..2 {
            let g = pre.gain[j][i].norm_sqr() / pre.i_inv[j][i].frob_norm_sq();
            out[4 * j + 2 * i] = g;
            out[4 * j + 2 * i + 1] = g;
        }
    }
    out
}
