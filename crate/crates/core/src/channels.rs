//! Fading channels, constellations, noise and seeded random streams.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMat, C64, M2};

/// Redraw budget per trial before a conditioning failure becomes an error.
pub const MAX_REDRAWS: u32 = 64;

/// One circular complex Gaussian sample with variance `var`.
#[inline]
pub fn cn<R: Rng + ?Sized>(rng: &mut R, var: f64) -> C64 {
    let s = (0.5 * var).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re * s, im * s)
}

pub fn cn_mat<const R: usize, const C: usize, G: Rng + ?Sized>(rng: &mut G) -> CMat<R, C> {
    CMat::from_fn(|_, _| cn(rng, 1.0))
}

/// All links of the two-user double-antenna X channel; `h[j][i]` runs from
/// transmitter `j` to receiver `i` (zero-based).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelSetX {
    pub h: [[M2; 2]; 2],
}

/// Two-cell network: desired links `h[j][i]` and interfering links `i[j][i]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelSetCell {
    pub h: [[M2; 2]; 2],
    pub i: [[M2; 2]; 2],
}

pub fn sample_x_channels<R: Rng + ?Sized>(rng: &mut R) -> ChannelSetX {
    let mut h = [[M2::zeros(); 2]; 2];
    for row in &mut h {
        for m in row.iter_mut() {
            *m = cn_mat(rng);
        }
    }
    ChannelSetX { h }
}

pub fn sample_cell_channels<R: Rng + ?Sized>(rng: &mut R) -> ChannelSetCell {
    let x = sample_x_channels(rng);
    let y = sample_x_channels(rng);
    ChannelSetCell { h: x.h, i: y.h }
}

/// Draws with `draw` until `build` succeeds, counting redraws.
///
/// Only conditioning failures trigger a redraw; any other error is returned.
pub fn with_redraw<R, S, T>(
    rng: &mut R,
    redraws: &mut u64,
    mut draw: impl FnMut(&mut R) -> S,
    mut build: impl FnMut(&S) -> Result<T>,
) -> Result<(S, T)>
where
    R: Rng + ?Sized,
{
    for _ in 0..MAX_REDRAWS {
        let s = draw(rng);
        match build(&s) {
            Ok(t) => return Ok((s, t)),
            Err(e) if e.is_conditioning() => *redraws += 1,
            Err(e) => return Err(e),
        }
    }
    Err(Error::ResampleExhausted(MAX_REDRAWS))
}

/// Adds circular complex Gaussian noise of variance `var` to every entry.
/// `var = 0` leaves the block untouched.
pub fn add_awgn<const R: usize, const C: usize, G: Rng + ?Sized>(block: &CMat<R, C>, rng: &mut G, var: f64) -> CMat<R, C> {
    if var == 0.0 {
        return *block;
    }
    let mut out = *block;
    for r in 0..R {
        for col in 0..C {
            out[(r, col)] += cn(rng, var);
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Constellation {
    #[serde(rename = "BPSK")]
    Bpsk,
    #[serde(rename = "QPSK")]
    Qpsk,
    #[serde(rename = "PSK16")]
    Psk16,
    #[serde(rename = "QAM16")]
    Qam16,
}

const QAM_SCALE: f64 = 0.316_227_766_016_837_94; // 1/√10

#[inline]
fn gray(m: u32) -> u32 {
    m ^ (m >> 1)
}

#[inline]
fn gray_inverse(mut g: u32) -> u32 {
    let mut m = g;
    while g > 0 {
        g >>= 1;
        m ^= g;
    }
    m
}

// Per-axis 16QAM labels: 00→−3, 01→−1, 11→+1, 10→+3.
#[inline]
fn qam_axis(bits: u32) -> f64 {
    match bits & 3 {
        0b00 => -3.0,
        0b01 => -1.0,
        0b11 => 1.0,
        _ => 3.0,
    }
}

#[inline]
fn qam_slice(x: f64) -> u32 {
    if x < -2.0 {
        0b00
    } else if x < 0.0 {
        0b01
    } else if x < 2.0 {
        0b11
    } else {
        0b10
    }
}

impl Constellation {
    pub const ALL: [Constellation; 4] = [Self::Bpsk, Self::Qpsk, Self::Psk16, Self::Qam16];

    pub fn name(self) -> &'static str {
        match self {
            Self::Bpsk => "BPSK",
            Self::Qpsk => "QPSK",
            Self::Psk16 => "PSK16",
            Self::Qam16 => "QAM16",
        }
    }

    pub fn bits_per_symbol(self) -> u32 {
        match self {
            Self::Bpsk => 1,
            Self::Qpsk => 2,
            Self::Psk16 | Self::Qam16 => 4,
        }
    }

    pub fn size(self) -> u32 {
        1 << self.bits_per_symbol()
    }

    pub fn is_psk(self) -> bool {
        !matches!(self, Self::Qam16)
    }

    /// Unit-energy point carrying `label` (bits read most significant first).
    #[inline]
    pub fn point(self, label: u32) -> C64 {
        match self {
            Self::Bpsk => C64::new(if label & 1 == 0 { 1.0 } else { -1.0 }, 0.0),
            Self::Qpsk => C64::new(
                if label & 2 == 0 { FRAC_1_SQRT_2 } else { -FRAC_1_SQRT_2 },
                if label & 1 == 0 { FRAC_1_SQRT_2 } else { -FRAC_1_SQRT_2 },
            ),
            Self::Psk16 => C64::from_polar(1.0, 2.0 * PI * gray_inverse(label & 15) as f64 / 16.0),
            Self::Qam16 => C64::new(qam_axis(label >> 2) * QAM_SCALE, qam_axis(label) * QAM_SCALE),
        }
    }

    /// All unit-energy points, indexed by label.
    pub fn points(self) -> Vec<C64> {
        (0..self.size()).map(|l| self.point(l)).collect()
    }

    /// Label of the nearest unit-energy point to `z`.
    #[inline]
    pub fn slice(self, z: C64) -> u32 {
        match self {
            Self::Bpsk => u32::from(z.re < 0.0),
            Self::Qpsk => (u32::from(z.re < 0.0) << 1) | u32::from(z.im < 0.0),
            Self::Psk16 => {
                let m = (z.im.atan2(z.re) * 16.0 / (2.0 * PI)).round() as i64;
                gray(m.rem_euclid(16) as u32)
            }
            Self::Qam16 => (qam_slice(z.re / QAM_SCALE) << 2) | qam_slice(z.im / QAM_SCALE),
        }
    }

    /// Gray-maps `bits` (one bit per byte, 0 or 1) onto points scaled by √P.
    pub fn modulate(self, bits: &[u8], power: f64) -> Result<Vec<C64>> {
        let b = self.bits_per_symbol() as usize;
        if bits.len() % b != 0 {
            return Err(Error::BitCount { bits: bits.len(), per_symbol: b });
        }
        let amp = power.sqrt();
        Ok(bits
            .chunks(b)
            .map(|chunk| {
                let label = chunk.iter().fold(0u32, |acc, &x| (acc << 1) | u32::from(x & 1));
                self.point(label) * amp
            })
            .collect())
    }

    /// Minimum-distance decision against the points scaled by √P.
    pub fn demodulate_nearest(self, z: C64, power: f64) -> (C64, Vec<u8>) {
        let amp = power.sqrt();
        let label = self.slice(z / amp);
        let bits = (0..self.bits_per_symbol()).rev().map(|k| ((label >> k) & 1) as u8).collect();
        (self.point(label) * amp, bits)
    }
}

impl fmt::Display for Constellation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Constellation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "BPSK" => Ok(Self::Bpsk),
            "QPSK" | "4PSK" => Ok(Self::Qpsk),
            "PSK16" | "16PSK" => Ok(Self::Psk16),
            "QAM16" | "16QAM" => Ok(Self::Qam16),
            _ => Err(Error::UnknownConstellation(s.to_string())),
        }
    }
}

/// Symbols `s[j][i][k]` for one block: transmitter `j`, receiver `i`,
/// symbol `k`, scaled by √P, with their labels.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymbolFrame {
    pub s: [[[C64; 2]; 2]; 2],
    pub labels: [[[u32; 2]; 2]; 2],
}

impl SymbolFrame {
    pub fn random<R: RngCore + ?Sized>(rng: &mut R, c: Constellation, power: f64) -> Self {
        let amp = power.sqrt();
        let mut f = SymbolFrame { s: [[[C64::new(0.0, 0.0); 2]; 2]; 2], labels: [[[0; 2]; 2]; 2] };
        let mask = c.size() - 1;
        for j in 0..2 {
            for i in 0..2 {
                for k in 0..2 {
                    let l = rng.next_u32() & mask;
                    f.labels[j][i][k] = l;
                    f.s[j][i][k] = c.point(l) * amp;
                }
            }
        }
        f
    }

    pub fn zeros() -> Self {
        SymbolFrame { s: [[[C64::new(0.0, 0.0); 2]; 2]; 2], labels: [[[0; 2]; 2]; 2] }
    }
}

/// Seeding rule: a trial's generator depends only on the master seed, a lane
/// (which experiment the trial belongs to) and the trial index.
///
/// The 256-bit ChaCha8 key is four SplitMix64 outputs started from
/// `master_seed ^ (lane · 0xD1B54A32D192ED03)`; the trial index selects the
/// ChaCha stream. Changing this rule changes every published curve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngSpec {
    pub master_seed: u64,
}

#[inline]
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngSpec {
    pub fn new(master_seed: u64) -> Self {
        Self { master_seed }
    }

    pub fn lane_key(&self, lane: u64) -> [u8; 32] {
        let mut st = self.master_seed ^ lane.wrapping_mul(0xD1B5_4A32_D192_ED03);
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut st).to_le_bytes());
        }
        key
    }

    pub fn trial_rng(&self, lane: u64, trial: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.lane_key(lane));
        rng.set_stream(trial);
        rng
    }
}

/// Stable 64-bit lane identifier from a label (FNV-1a).
pub fn lane_id(parts: &[&str]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for p in parts {
        for b in p.bytes().chain(std::iter::once(0x1f)) {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}
