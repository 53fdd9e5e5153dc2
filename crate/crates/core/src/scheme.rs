//! Scheme registry: one Monte Carlo trial of each transmission scheme, for
//! bit-error counting and for SNR sampling.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cellular::{downlink_ia, ibc, imac};
use crate::channels::{sample_cell_channels, sample_x_channels, with_redraw, ChannelSetCell, Constellation, SymbolFrame};
use crate::error::{Error, Result};
use crate::jash::{self, JashPower};
use crate::x_alamouti::{aligned_gammas, aligned_receive, aligned_state, x_channel_output, x_encode, AlignedLinks};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeId {
    XAlamouti,
    Jash,
    JashModified,
    Imac,
    IbcAlamouti,
    IbcDownlinkIa,
}

impl SchemeId {
    pub const ALL: [SchemeId; 6] = [Self::XAlamouti, Self::Jash, Self::JashModified, Self::Imac, Self::IbcAlamouti, Self::IbcDownlinkIa];

    pub fn name(self) -> &'static str {
        match self {
            Self::XAlamouti => "x_alamouti",
            Self::Jash => "jash",
            Self::JashModified => "jash_modified",
            Self::Imac => "imac",
            Self::IbcAlamouti => "ibc_alamouti",
            Self::IbcDownlinkIa => "ibc_downlink_ia",
        }
    }

    /// Channel uses spanned by one trial.
    pub fn channel_uses(self) -> u32 {
        match self {
            Self::JashModified => 6,
            _ => 3,
        }
    }

    pub fn check_constellation(self, c: Constellation) -> Result<()> {
        if self == Self::IbcAlamouti && !c.is_psk() {
            return Err(Error::PskRequired { scheme: self.name().into(), constellation: c.name().into() });
        }
        Ok(())
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|id| id.name() == s).ok_or_else(|| Error::UnknownScheme(s.to_string()))
    }
}

/// Bit-error tally of one or more trials.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Tally {
    pub bit_errors: u64,
    pub bits: u64,
    pub trials: u64,
    pub redraws: u64,
}

impl Tally {
    pub fn merge(&mut self, o: &Tally) {
        self.bit_errors += o.bit_errors;
        self.bits += o.bits;
        self.trials += o.trials;
        self.redraws += o.redraws;
    }
}

/// A scheme together with its tunable options.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Scheme {
    pub id: SchemeId,
    pub jash_power: JashPower,
}

impl From<SchemeId> for Scheme {
    fn from(id: SchemeId) -> Self {
        Scheme { id, jash_power: JashPower::default() }
    }
}

#[inline]
fn errors(sent: u32, got: u32) -> u64 {
    u64::from((sent ^ got).count_ones())
}

impl Scheme {
    /// One trial: fresh channel, eight random symbols, noise of variance
    /// `noise_var` per entry, transmit power `power`.
    pub fn ber_trial(&self, rng: &mut ChaCha8Rng, c: Constellation, power: f64, noise_var: f64) -> Result<Tally> {
        self.id.check_constellation(c)?;
        let mut t = Tally { trials: 1, ..Tally::default() };
        let bps = u64::from(c.bits_per_symbol());
        match self.id {
            SchemeId::XAlamouti => {
                let (ch, st) = with_redraw(rng, &mut t.redraws, |r| sample_x_channels(r), |ch| aligned_state(&AlignedLinks::x_channel(ch)))?;
                let frame = SymbolFrame::random(rng, c, power);
                let y = x_channel_output(&ch, &x_encode(&frame, &st.bf), rng, noise_var);
                for i in 0..2 {
                    let got = aligned_receive(&st, &y[i], i, c, power)?;
                    for j in 0..2 {
                        for k in 0..2 {
                            t.bit_errors += errors(frame.labels[j][i][k], got[j][k]);
                        }
                    }
                }
                t.bits = 8 * bps;
            }
            SchemeId::Imac => {
                let (ch, st) = with_redraw(rng, &mut t.redraws, |r| sample_cell_channels(r), imac::imac_state)?;
                let frame = SymbolFrame::random(rng, c, power);
                let y = imac::imac_channel_output(&ch, &imac::imac_encode(&frame, &st.bf), rng, noise_var);
                for i in 0..2 {
                    let got = aligned_receive(&st, &y[i], i, c, power)?;
                    for j in 0..2 {
                        for k in 0..2 {
                            t.bit_errors += errors(frame.labels[j][i][k], got[j][k]);
                        }
                    }
                }
                t.bits = 8 * bps;
            }
            SchemeId::Jash => {
                let p = self.jash_power;
                let (ch, st) = with_redraw(rng, &mut t.redraws, |r| sample_x_channels(r), |ch| jash::jash_state(ch, p))?;
                let frame = SymbolFrame::random(rng, c, power);
                let y = jash::jash_channel_output(&ch, &jash::jash_encode(&frame, &st.bf), rng, noise_var);
                for i in 0..2 {
                    let got = jash::jash_decode(&st, &y[i], i, c, power);
                    for j in 0..2 {
                        for k in 0..2 {
                            t.bit_errors += errors(frame.labels[j][i][k], got[j][k]);
                        }
                    }
                }
                t.bits = 8 * bps;
            }
            SchemeId::JashModified => {
                let p = self.jash_power;
                let (ch, st) = with_redraw(rng, &mut t.redraws, |r| sample_x_channels(r), |ch| jash::jash_state(ch, p))?;
                let frame = SymbolFrame::random(rng, c, power);
                let [x1, x2] = jash::modified_jash_encode(&frame, &st.bf);
                let y1 = jash::jash_channel_output(&ch, &x1, rng, noise_var);
                let y2 = jash::jash_channel_output(&ch, &x2, rng, noise_var);
                for i in 0..2 {
                    let got = jash::modified_jash_decode(&st, &y1[i], &y2[i], i, c, power);
                    for j in 0..2 {
                        for k in 0..2 {
                            t.bit_errors += errors(frame.labels[j][i][k], got[j][k]);
                        }
                    }
                }
                t.bits = 8 * bps;
            }
            SchemeId::IbcAlamouti => {
                let (ch, pre) = with_redraw(rng, &mut t.redraws, |r| sample_cell_channels(r), ibc::ibc_precoders)?;
                let frame = SymbolFrame::random(rng, c, power);
                let y = ibc::ibc_channel_output(&ch, &ibc::ibc_encode(&frame, &pre), rng, noise_var);
                for j in 0..2 {
                    for i in 0..2 {
                        let got = ibc::ibc_decode(&pre, &y[j][i], j, i, c, power)?;
                        for k in 0..2 {
                            t.bit_errors += errors(frame.labels[j][i][k], got[k]);
                        }
                    }
                }
                t.bits = 8 * bps;
            }
            SchemeId::IbcDownlinkIa => {
                let (ch, st) = with_redraw(rng, &mut t.redraws, draw_dlia, |(ch, p)| downlink_ia::dlia_precoders(ch, p))?;
                let ch = ch.0;
                let frame = SymbolFrame::random(rng, c, power);
                let y = downlink_ia::dlia_channel_output(&ch, &downlink_ia::dlia_encode(&frame, &st), rng, noise_var);
                for j in 0..2 {
                    for i in 0..2 {
                        let got = downlink_ia::dlia_decode(&st, &y[j][i], j, i, c, power);
                        for k in 0..2 {
                            t.bit_errors += errors(frame.labels[j][i][k], got[k]);
                        }
                    }
                }
                t.bits = 8 * bps;
            }
        }
        Ok(t)
    }

    /// Per-symbol SNRs of one realization, eight values. The two-block
    /// variant reports each pair's combined SNR for both of its symbols.
    pub fn gamma_trial<R: Rng + ?Sized>(&self, rng: &mut R, redraws: &mut u64) -> Result<[f64; 8]> {
        let p = self.jash_power;
        let g = match self.id {
            SchemeId::XAlamouti => with_redraw(rng, redraws, |r| sample_x_channels(r), |ch| aligned_gammas(&aligned_state(&AlignedLinks::x_channel(ch))?))?.1,
            SchemeId::Imac => with_redraw(rng, redraws, |r| sample_cell_channels(r), |ch| aligned_gammas(&imac::imac_state(ch)?))?.1,
            SchemeId::Jash => with_redraw(rng, redraws, |r| sample_x_channels(r), |ch| Ok(jash::jash_gammas(&jash::jash_state(ch, p)?)))?.1,
            SchemeId::JashModified => {
                let g4 = with_redraw(rng, redraws, |r| sample_x_channels(r), |ch| Ok(jash::modified_jash_gamma(&jash::jash_state(ch, p)?)))?.1;
                [g4[0], g4[0], g4[1], g4[1], g4[2], g4[2], g4[3], g4[3]]
            }
            SchemeId::IbcAlamouti => with_redraw(rng, redraws, |r| sample_cell_channels(r), |ch| Ok(ibc::ibc_gammas(&ibc::ibc_precoders(ch)?)))?.1,
            SchemeId::IbcDownlinkIa => with_redraw(rng, redraws, draw_dlia, |(ch, p)| Ok(downlink_ia::dlia_gammas(&downlink_ia::dlia_precoders(ch, p)?)))?.1,
        };
        Ok(g)
    }

    /// SNR of the first stream (transmitter 1 to receiver 1, symbol 1), the
    /// quantity whose outage probability sets the diversity order.
    pub fn first_gamma<R: Rng + ?Sized>(&self, rng: &mut R, redraws: &mut u64) -> Result<f64> {
        let p = self.jash_power;
        match self.id {
            SchemeId::XAlamouti => {
                with_redraw(rng, redraws, |r| sample_x_channels(r), |ch| crate::x_alamouti::x_gamma(ch, 0, 0, 0).map(|s| s.gamma)).map(|x| x.1)
            }
            SchemeId::Jash => with_redraw(rng, redraws, |r| sample_x_channels(r), |ch| Ok(jash::jash_gamma(&jash::jash_state(ch, p)?, 0, 0, 0))).map(|x| x.1),
            SchemeId::JashModified => {
                with_redraw(rng, redraws, |r| sample_x_channels(r), |ch| Ok(jash::modified_jash_gamma(&jash::jash_state(ch, p)?)[0])).map(|x| x.1)
            }
            _ => self.gamma_trial(rng, redraws).map(|g| g[0]),
        }
    }

    /// Distinct per-stream SNRs of one realization, for outage statistics:
    /// eight streams, or four combined pairs for the two-block variant.
    pub fn stream_gammas<R: Rng + ?Sized>(&self, rng: &mut R, redraws: &mut u64) -> Result<GammaSet> {
        if self.id == SchemeId::JashModified {
            let p = self.jash_power;
            let g4 = with_redraw(rng, redraws, |r| sample_x_channels(r), |ch| Ok(jash::modified_jash_gamma(&jash::jash_state(ch, p)?)))?.1;
            let mut vals = [0.0; 8];
            vals[..4].copy_from_slice(&g4);
            return Ok(GammaSet { vals, len: 4 });
        }
        Ok(GammaSet { vals: self.gamma_trial(rng, redraws)?, len: 8 })
    }

    /// Symbols per trial that count towards the rate.
    pub fn symbols_per_use(&self) -> f64 {
        8.0 / f64::from(self.id.channel_uses())
    }
}

/// Up to eight SNR values without allocation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GammaSet {
    vals: [f64; 8],
    len: usize,
}

impl AsRef<[f64]> for GammaSet {
    fn as_ref(&self) -> &[f64] {
        &self.vals[..self.len]
    }
}

fn draw_dlia<R: Rng + ?Sized>(rng: &mut R) -> (ChannelSetCell, crate::linalg::CMat<6, 4>) {
    let ch = sample_cell_channels(rng);
    (ch, downlink_ia::random_basis(rng))
}
