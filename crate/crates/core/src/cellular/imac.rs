//! Uplink: four users, two per cell, each sending one Alamouti block shaped
//! by the normalized inverse of its inter-cell link.

use rand::Rng;

use crate::channels::{add_awgn, ChannelSetCell, SymbolFrame};
use crate::error::Result;
use crate::linalg::CMat;
use crate::x_alamouti::{aligned_state, slot_block, AlignedLinks, AlignedState, XBeamformers, TX_SCALE};

/// Users `(j, i)` reach base station `i` through `h[j][i]` and leak into
/// base station `ī` through `i[j][i]`. The index `j` plays the role of the
/// X-channel transmitter, `i` that of the intended receiver.
pub fn imac_links(ch: &ChannelSetCell) -> AlignedLinks {
    AlignedLinks { desired: ch.h, cross: ch.i }
}

pub fn imac_state(ch: &ChannelSetCell) -> Result<AlignedState> {
    aligned_state(&imac_links(ch))
}

/// Blocks `x[j][i]` of the four users.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ImacTransmit {
    pub x: [[CMat<3, 2>; 2]; 2],
}

pub fn imac_encode(frame: &SymbolFrame, bf: &XBeamformers) -> ImacTransmit {
    let mut x = [[CMat::<3, 2>::zeros(); 2]; 2];
    for (j, row) in x.iter_mut().enumerate() {
        for (i, xji) in row.iter_mut().enumerate() {
            *xji = (slot_block(frame.s[j][i], i) * bf.v[j][i]).scale_re(TX_SCALE);
        }
    }
    ImacTransmit { x }
}

/// `Y^{[i]} = Σ_j X^{[ji]} H^{[ji]} + Σ_j X^{[jī]} I^{[jī]} + W^{[i]}`.
pub fn imac_channel_output<R: Rng + ?Sized>(ch: &ChannelSetCell, tx: &ImacTransmit, rng: &mut R, noise_var: f64) -> [CMat<3, 2>; 2] {
    [0, 1].map(|i| {
        let o = 1 - i;
        let mut clean = CMat::<3, 2>::zeros();
        for j in 0..2 {
            clean = clean + tx.x[j][i] * ch.h[j][i] + tx.x[j][o] * ch.i[j][o];
        }
        add_awgn(&clean, rng, noise_var)
    })
}
