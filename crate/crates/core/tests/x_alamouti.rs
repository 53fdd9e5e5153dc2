use std::f64::consts::FRAC_1_SQRT_2;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stbc_ia::channels::{cn, sample_x_channels, ChannelSetX, Constellation, SymbolFrame};
use stbc_ia::linalg::{c, inverse, is_alamouti, CMat, CVec, C64, M2};
use stbc_ia::x_alamouti::*;

fn zero() -> C64 {
    c(0.0, 0.0)
}

fn one() -> C64 {
    c(1.0, 0.0)
}

fn state(ch: &ChannelSetX) -> AlignedState {
    aligned_state(&AlignedLinks::x_channel(ch)).unwrap()
}

fn channels(seed: u64, n: usize) -> Vec<ChannelSetX> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| sample_x_channels(&mut rng)).collect()
}

/// Receiver-1 system written out row by row. Unknowns are
/// `[s₁¹¹, s₂¹¹, s₁²¹, s₂²¹, I₁, I₂]`, all times √(3/4).
fn oracle_rx1(a: &M2, b: &M2) -> CMat<6, 6> {
    let (o, z) = (one(), zero());
    CMat::from_rows([
        [a[(0, 0)], a[(1, 0)], b[(0, 0)], b[(1, 0)], z, z],
        [a[(1, 0)].conj(), -a[(0, 0)].conj(), b[(1, 0)].conj(), -b[(0, 0)].conj(), z, -o],
        [z, z, z, z, o, z],
        [a[(0, 1)], a[(1, 1)], b[(0, 1)], b[(1, 1)], z, z],
        [a[(1, 1)].conj(), -a[(0, 1)].conj(), b[(1, 1)].conj(), -b[(0, 1)].conj(), o, z],
        [z, z, z, z, z, o],
    ])
}

/// Receiver-2 system: the plain Alamouti row sits in slot 3.
fn oracle_rx2(a: &M2, b: &M2) -> CMat<6, 6> {
    let (o, z) = (one(), zero());
    CMat::from_rows([
        [z, z, z, z, o, z],
        [a[(1, 0)].conj(), -a[(0, 0)].conj(), b[(1, 0)].conj(), -b[(0, 0)].conj(), z, -o],
        [a[(0, 0)], a[(1, 0)], b[(0, 0)], b[(1, 0)], z, z],
        [z, z, z, z, z, o],
        [a[(1, 1)].conj(), -a[(0, 1)].conj(), b[(1, 1)].conj(), -b[(0, 1)].conj(), o, z],
        [a[(0, 1)], a[(1, 1)], b[(0, 1)], b[(1, 1)], z, z],
    ])
}

fn unknowns(frame: &SymbolFrame, bf: &XBeamformers, i: usize) -> CVec<6> {
    let o = 1 - i;
    let int = [0, 1].map(|k| frame.s[0][o][k] * bf.c[0][o] + frame.s[1][o][k] * bf.c[1][o]);
    CVec::from_col([frame.s[0][i][0], frame.s[0][i][1], frame.s[1][i][0], frame.s[1][i][1], int[0], int[1]]).scale_re(TX_SCALE)
}

#[test]
fn identity_cross_channel_gives_scaled_identity() {
    let ch = ChannelSetX { h: [[M2::identity(); 2]; 2] };
    let bf = x_beamformers(&ch).unwrap();
    for j in 0..2 {
        for i in 0..2 {
            assert!(bf.v[j][i].max_abs_diff(&M2::identity().scale_re(FRAC_1_SQRT_2)) < 1e-15);
            assert!((bf.c[j][i] - FRAC_1_SQRT_2).abs() < 1e-15);
        }
    }
}

#[test]
fn beamformers_are_unit_power_and_bounded() {
    for ch in channels(1, 2000) {
        let bf = x_beamformers(&ch).unwrap();
        for v in bf.v.iter().flatten() {
            assert!(((*v * v.herm()).trace().re - 1.0).abs() < 1e-12);
            assert!(v.entries().all(|e| e.norm() <= 1.0 + 1e-12));
        }
    }
}

#[test]
fn stacked_system_matches_written_out_matrices() {
    for ch in channels(2, 500) {
        let st = state(&ch);
        let want = [oracle_rx1(&st.ht[0][0], &st.ht[1][0]), oracle_rx2(&st.ht[0][1], &st.ht[1][1])];
        for i in 0..2 {
            let got = stacked_system(&st, i);
            assert!(got.max_abs_diff(&want[i].scale_re(TX_SCALE)) < 1e-12, "receiver {i}");
        }
    }
}

#[test]
fn noiseless_receive_stack_follows_the_system() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for ch in channels(3, 500) {
        let st = state(&ch);
        let frame = SymbolFrame::random(&mut rng, Constellation::Qam16, 2.0);
        let y = x_channel_output(&ch, &x_encode(&frame, &st.bf), &mut rng, 0.0);
        let want = [oracle_rx1(&st.ht[0][0], &st.ht[1][0]), oracle_rx2(&st.ht[0][1], &st.ht[1][1])];
        for i in 0..2 {
            let stack = x_receive_stack(&y[i], i);
            let model = want[i] * unknowns(&frame, &st.bf, i);
            assert!(stack.max_abs_diff(&model) < 1e-10);
        }
    }
}

#[test]
fn interference_collapses_onto_one_alamouti_pattern() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for ch in channels(4, 500) {
        let bf = x_beamformers(&ch).unwrap();
        let mut frame = SymbolFrame::random(&mut rng, Constellation::Qpsk, 1.0);
        for i in 0..2 {
            // Silence the symbols meant for receiver i; what remains there is
            // interference only.
            let mut f = frame;
            f.s[0][i] = [zero(); 2];
            f.s[1][i] = [zero(); 2];
            let y = x_channel_output(&ch, &x_encode(&f, &bf), &mut rng, 0.0)[i];
            let int = aligned_interference(&f, &bf, i);
            let want = slot_block(int, 1 - i).scale_re(TX_SCALE);
            assert!(y.max_abs_diff(&want) < 1e-10);
        }
        frame.s = [[[zero(); 2]; 2]; 2];
        let y = x_channel_output(&ch, &x_encode(&frame, &bf), &mut rng, 0.0);
        assert!(y.iter().all(|b| b.frob_norm() == 0.0));
    }
}

#[test]
fn slot_patterns() {
    let s = [c(1.0, 2.0), c(3.0, -1.0)];
    let a = slot_block(s, 0);
    let b = slot_block(s, 1);
    assert_eq!(a.row(0).entries().collect::<Vec<_>>(), s.to_vec());
    assert_eq!(a.row(2).frob_norm(), 0.0);
    assert_eq!(b.row(0).frob_norm(), 0.0);
    assert_eq!(b.row(2).entries().collect::<Vec<_>>(), s.to_vec());
    for m in [a, b] {
        assert_eq!(m[(1, 0)], -s[1].conj());
        assert_eq!(m[(1, 1)], s[0].conj());
    }
}

#[test]
fn silent_stream_leaves_its_slot_empty() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for ch in channels(5, 200) {
        let bf = x_beamformers(&ch).unwrap();
        let mut f = SymbolFrame::random(&mut rng, Constellation::Qpsk, 1.0);
        f.s[0][1] = [zero(); 2];
        f.s[1][0] = [zero(); 2];
        let tx = x_encode(&f, &bf);
        assert_eq!(tx.x[0].row(2).frob_norm(), 0.0);
        assert_eq!(tx.x[1].row(0).frob_norm(), 0.0);
        assert!(x_encode(&SymbolFrame::zeros(), &bf).x.iter().all(|x| x.frob_norm() == 0.0));
    }
}

#[test]
fn block_power_is_three_p() {
    let p = 10.0;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let n = 100_000;
    let mut acc = [0.0; 2];
    for _ in 0..n {
        let ch = sample_x_channels(&mut rng);
        let Ok(bf) = x_beamformers(&ch) else { continue };
        let f = SymbolFrame::random(&mut rng, Constellation::Qpsk, p);
        let tx = x_encode(&f, &bf);
        for j in 0..2 {
            acc[j] += tx.x[j].frob_norm_sq();
        }
    }
    for a in acc {
        let mean = a / n as f64;
        assert!((mean / (3.0 * p) - 1.0).abs() < 0.01, "block power {mean}");
    }
}

#[test]
fn cancellation_removes_aligned_interference() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for ch in channels(7, 500) {
        let bf = x_beamformers(&ch).unwrap();
        for i in 0..2 {
            let mut f = SymbolFrame::random(&mut rng, Constellation::Psk16, 3.0);
            f.s[0][i] = [zero(); 2];
            f.s[1][i] = [zero(); 2];
            let y = x_channel_output(&ch, &x_encode(&f, &bf), &mut rng, 0.0)[i];
            let (y1, y2) = x_cancel_aligned(&x_receive_stack(&y, i), i);
            assert!(y1.frob_norm() < 1e-12 && y2.frob_norm() < 1e-12);
        }
    }
}

#[test]
fn cancelled_noise_has_covariance_one_two_one_two() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let n = 200_000;
    for i in 0..2 {
        let mut cov = CMat::<4, 4>::zeros();
        for _ in 0..n {
            let w = CMat::<3, 2>::from_fn(|_, _| cn(&mut rng, 1.0));
            let (a, b) = x_cancel_aligned(&x_receive_stack(&w, i), i);
            let v = CVec::<4>::from_col([a.at(0), a.at(1), b.at(0), b.at(1)]);
            cov = cov + v * v.herm();
        }
        let cov = cov.scale_re(1.0 / n as f64);
        let want = CMat::<4, 4>::diag(SIGMA_HAT.map(|s| c(s, 0.0)));
        assert!(cov.max_abs_diff(&want) < 0.02, "receiver {i}: {cov:?}");
    }
}

#[test]
fn noiseless_recovery_for_every_constellation() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for con in Constellation::ALL {
        for ch in channels(9, 300) {
            let st = state(&ch);
            let f = SymbolFrame::random(&mut rng, con, 5.0);
            let y = x_channel_output(&ch, &x_encode(&f, &st.bf), &mut rng, 0.0);
            for i in 0..2 {
                let got = aligned_receive(&st, &y[i], i, con, 5.0).unwrap();
                for j in 0..2 {
                    assert_eq!(got[j], f.labels[j][i], "{con}");
                }
            }
        }
    }
}

#[test]
fn first_symbol_statistic_ignores_second_symbol() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for ch in channels(10, 300) {
        let st = state(&ch);
        let f = SymbolFrame::random(&mut rng, Constellation::Qpsk, 1.0);
        let mut g = f;
        g.s[0][0][1] = c(-7.0, 3.0);
        let stat = |frame: &SymbolFrame, k: usize| {
            let y = x_channel_output(&ch, &x_encode(frame, &st.bf), &mut ChaCha8Rng::seed_from_u64(0), 0.0)[0];
            let (y1, y2) = x_cancel_aligned(&x_receive_stack(&y, 0), 0);
            let (yh, hh) = x_decouple_users(&y1, &y2, &st.hats[1][0], &st.hats[0][0]).unwrap();
            hh.col(k).inner(&yh)
        };
        let (a, b) = (stat(&f, 0), stat(&g, 0));
        assert!((a - b).norm() < 1e-9 * (1.0 + a.norm()));
        assert!((stat(&f, 1) - stat(&g, 1)).norm() > 1e-6);
    }
}

#[test]
fn decoupled_channel_is_alamouti_and_desired_symbols_are_independent() {
    for ch in channels(11, 1000) {
        let st = state(&ch);
        for i in 0..2 {
            for j in 0..2 {
                let nh = decoupler(&st.hats[1 - j][i]).unwrap().herm();
                assert!((nh * stack_hats(&st.hats[1 - j][i])).frob_norm() < 1e-10);
                let hh = nh * stack_hats(&st.hats[j][i]);
                assert!(is_alamouti(&hh, 1e-10 * (1.0 + hh.frob_norm())));
            }
        }
        assert!(inverse(&desired_rank_matrix(&st)).is_ok());
    }
}

#[test]
fn gamma_lies_between_three_eighths_and_three_quarters_of_gamma_bar() {
    for ch in channels(12, 5000) {
        for (j, i, k) in [(0, 0, 0), (1, 0, 1), (0, 1, 1), (1, 1, 0)] {
            let s = x_gamma(&ch, j, i, k).unwrap();
            assert!(s.gamma <= 0.75 * s.gamma_bar * (1.0 + 1e-9));
            assert!(s.gamma >= 0.375 * s.gamma_bar * (1.0 - 1e-9));
        }
    }
}

#[test]
fn gamma_closed_form_for_diagonal_channels() {
    // All links identity except transmitter 2 → receiver 1 = diag(1, −1):
    // N has orthogonal blocks and the SNR works out to 1/2 for both symbols.
    let mut h = [[M2::identity(); 2]; 2];
    h[1][0] = M2::diag([one(), -one()]);
    let ch = ChannelSetX { h };
    for k in 0..2 {
        let s = x_gamma(&ch, 0, 0, k).unwrap();
        assert!((s.gamma - 0.5).abs() < 1e-12, "{}", s.gamma);
        assert!((s.gamma_bar - 1.0).abs() < 1e-12);
    }
}

#[test]
fn phi_matches_sample_covariance() {
    // Φ is E over the desired link of the per-component γ̄ structure; check
    // its trace identity E[γ̄] = tr Φ by averaging over fresh desired links.
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..5 {
        let base = sample_x_channels(&mut rng);
        let phi = phi_matrix(&base).unwrap();
        let n = 40_000;
        let mut acc = 0.0;
        for _ in 0..n {
            let mut ch = base;
            ch.h[0][0] = CMat::from_fn(|_, _| cn(&mut rng, 1.0));
            acc += x_gamma(&ch, 0, 0, 0).unwrap().gamma_bar;
        }
        let mean = acc / n as f64;
        let tr = phi.trace().re;
        assert!((mean / tr - 1.0).abs() < 0.03, "mean {mean} vs trace {tr}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cancellation_holds_for_any_symbols(seed in any::<u64>(), s in prop::array::uniform8((-2.0f64..2.0, -2.0f64..2.0))) {
        let ch = sample_x_channels(&mut ChaCha8Rng::seed_from_u64(seed));
        let Ok(st) = aligned_state(&AlignedLinks::x_channel(&ch)) else { return Ok(()) };
        let mut f = SymbolFrame::zeros();
        for (n, (re, im)) in s.iter().enumerate() {
            f.s[n / 4][(n / 2) % 2][n % 2] = c(*re, *im);
        }
        let y = x_channel_output(&ch, &x_encode(&f, &st.bf), &mut ChaCha8Rng::seed_from_u64(0), 0.0);
        for i in 0..2 {
            let (y1, y2) = x_cancel_aligned(&x_receive_stack(&y[i], i), i);
            // After cancellation only the desired streams remain.
            for j in 0..2 {
                let (yh, hh) = x_decouple_users(&y1, &y2, &st.hats[1 - j][i], &st.hats[j][i]).unwrap();
                let want = hh * CVec::from_col(f.s[j][i]).scale_re(TX_SCALE);
                prop_assert!(yh.max_abs_diff(&want) < 1e-8 * (1.0 + want.frob_norm()));
            }
        }
    }
}
