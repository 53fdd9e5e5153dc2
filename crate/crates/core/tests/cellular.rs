use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stbc_ia::cellular::*;
use stbc_ia::channels::{sample_cell_channels, sample_x_channels, ChannelSetCell, Constellation, SymbolFrame};
use stbc_ia::linalg::{c, inverse2, is_alamouti, is_swapped_alamouti, kron_i3, span_residual, CMat, CVec, M2};
use stbc_ia::x_alamouti::{aligned_receive, aligned_state, x_channel_output, x_encode, AlignedLinks};
use stbc_ia::Error;

fn cells(seed: u64, n: usize) -> Vec<ChannelSetCell> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| sample_cell_channels(&mut rng)).collect()
}

fn zero_pair() -> [stbc_ia::linalg::C64; 2] {
    [c(0.0, 0.0); 2]
}

#[test]
fn uplink_reduces_to_x_channel_when_cross_links_coincide() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..500 {
        let x = sample_x_channels(&mut rng);
        let cell = ChannelSetCell { h: x.h, i: [[x.h[0][1], x.h[0][0]], [x.h[1][1], x.h[1][0]]] };
        let (Ok(a), Ok(b)) = (imac_state(&cell), aligned_state(&AlignedLinks::x_channel(&x))) else { continue };
        assert_eq!(a.bf, b.bf);
        let f = SymbolFrame::random(&mut rng, Constellation::Qpsk, 100.0);
        let seed: u64 = rand::Rng::random(&mut rng);
        let ya = imac_channel_output(&cell, &imac_encode(&f, &a.bf), &mut ChaCha8Rng::seed_from_u64(seed), 1.0);
        let yb = x_channel_output(&x, &x_encode(&f, &b.bf), &mut ChaCha8Rng::seed_from_u64(seed), 1.0);
        for i in 0..2 {
            assert!(ya[i].max_abs_diff(&yb[i]) < 1e-12);
            let da = aligned_receive(&a, &ya[i], i, Constellation::Qpsk, 100.0).unwrap();
            let db = aligned_receive(&b, &yb[i], i, Constellation::Qpsk, 100.0).unwrap();
            assert_eq!(da, db);
        }
    }
}

#[test]
fn uplink_noiseless_recovery() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for con in Constellation::ALL {
        for ch in cells(2, 200) {
            let st = imac_state(&ch).unwrap();
            let f = SymbolFrame::random(&mut rng, con, 3.0);
            let y = imac_channel_output(&ch, &imac_encode(&f, &st.bf), &mut rng, 0.0);
            for i in 0..2 {
                let got = aligned_receive(&st, &y[i], i, con, 3.0).unwrap();
                for j in 0..2 {
                    assert_eq!(got[j], f.labels[j][i]);
                }
            }
        }
    }
}

#[test]
fn row_alamouti_blocks() {
    let h = M2::from_rows([[c(1.0, 2.0), c(3.0, 4.0)], [c(-1.0, 0.5), c(0.0, -2.0)]]);
    for m in 0..2 {
        let a = row_alamouti(&h, m);
        assert!(is_alamouti(&a, 1e-15));
        assert_eq!(a.row(0).entries().collect::<Vec<_>>(), h.row(m).entries().collect::<Vec<_>>());
    }
}

#[test]
fn intra_cell_leakage_is_swapped_alamouti() {
    for ch in cells(3, 1000) {
        let pre = ibc_precoders(&ch).unwrap();
        for j in 0..2 {
            for i in 0..2 {
                let m = pre.p[j][1 - i] * pre.ht[j][i];
                assert!(is_swapped_alamouti(&m, 1e-9 * m.frob_norm()));
            }
        }
    }
}

#[test]
fn padding_rows_complete_alamouti_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for ch in cells(4, 300) {
        let pre = ibc_precoders(&ch).unwrap();
        let f = SymbolFrame::random(&mut rng, Constellation::Psk16, 1.0);
        let x = ibc_encode(&f, &pre);
        // Cell 1: slots 2 and 3 form an Alamouti pair.
        let a = M2::from_rows([x[0].as_rows()[1], x[0].as_rows()[2]]);
        assert!(is_alamouti(&a, 1e-12));
        // Cell 2: slot 3 over slot 2 is swapped-Alamouti after reading the
        // padding row in slot 1 as the conjugate partner of slot 2.
        let b = M2::from_rows([x[1].as_rows()[1], x[1].as_rows()[0]]);
        assert!(is_alamouti(&b, 1e-12));
    }
}

#[test]
fn downlink_block_power_is_three_p() {
    let p = 5.0;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 100_000;
    let mut acc = [0.0; 2];
    let mut used = 0;
    for _ in 0..n {
        let ch = sample_cell_channels(&mut rng);
        let Ok(pre) = ibc_precoders(&ch) else { continue };
        used += 1;
        let f = SymbolFrame::random(&mut rng, Constellation::Qpsk, p);
        let x = ibc_encode(&f, &pre);
        for j in 0..2 {
            acc[j] += x[j].frob_norm_sq();
        }
    }
    for a in acc {
        let mean = a / used as f64;
        assert!((mean / (3.0 * p) - 1.0).abs() < 0.01, "{mean}");
    }
}

#[test]
fn psk_envelope_is_constant() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for con in [Constellation::Bpsk, Constellation::Qpsk, Constellation::Psk16] {
        let f = SymbolFrame::random(&mut rng, con, 7.0);
        assert!(f.s.iter().flatten().flatten().all(|s| (s.norm_sqr() - 7.0).abs() < 1e-12));
    }
}

#[test]
fn downlink_noiseless_recovery() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for con in [Constellation::Bpsk, Constellation::Qpsk, Constellation::Psk16] {
        for ch in cells(7, 300) {
            let pre = ibc_precoders(&ch).unwrap();
            let f = SymbolFrame::random(&mut rng, con, 2.0);
            let y = ibc_channel_output(&ch, &ibc_encode(&f, &pre), &mut rng, 0.0);
            for j in 0..2 {
                for i in 0..2 {
                    assert_eq!(ibc_decode(&pre, &y[j][i], j, i, con, 2.0).unwrap(), f.labels[j][i], "{con}");
                }
            }
        }
    }
}

#[test]
fn downlink_rejects_qam() {
    let ch = cells(8, 1).pop().unwrap();
    let pre = ibc_precoders(&ch).unwrap();
    let y = CMat::<3, 2>::zeros();
    assert!(matches!(ibc_decode(&pre, &y, 0, 0, Constellation::Qam16, 1.0), Err(Error::PskRequired { .. })));
}

#[test]
fn combined_outputs_follow_rotated_symbols() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for ch in cells(9, 300) {
        let pre = ibc_precoders(&ch).unwrap();
        let f = SymbolFrame::random(&mut rng, Constellation::Qpsk, 1.0);
        let y = ibc_channel_output(&ch, &ibc_encode(&f, &pre), &mut rng, 0.0);
        for j in 0..2 {
            for i in 0..2 {
                let e = ibc_equivalent(&(pre.r[j][i] * pre.ht[j][i]));
                let rot = rotated_symbols(&f, &pre, j, i);
                let yh = ibc_receive(&y[j][i], &pre, j, i);
                // ŷ = E c, so the rotated symbols come back through E⁻¹.
                let got = inverse2(&e).unwrap() * CVec::from_col(yh);
                for k in 0..2 {
                    assert!((got.at(k) - rot[k]).norm() < 1e-8 * (1.0 + rot[k].norm()));
                    assert!((yh[k] - pre.gain[j][i] * f.s[j][i][k]).norm() < 1e-8);
                }
            }
        }
    }
}

#[test]
fn interference_stays_in_the_cancelled_subspace() {
    let q = interference_span();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for ch in cells(10, 500) {
        let pre = ibc_precoders(&ch).unwrap();
        let frame = SymbolFrame::random(&mut rng, Constellation::Qpsk, 1.0);
        for j in 0..2 {
            for i in 0..2 {
                let mut f = frame;
                f.s[j][i] = zero_pair();
                let y = ibc_channel_output(&ch, &ibc_encode(&f, &pre), &mut rng, 0.0);
                assert!(span_residual(&q, &interference_stack(&y[j][i], &pre, j, i)) < 1e-10);
                let yh = ibc_receive(&y[j][i], &pre, j, i);
                assert!(yh[0].norm() < 1e-9 && yh[1].norm() < 1e-9);
            }
        }
    }
}

fn dlia_states(seed: u64, n: usize) -> Vec<(ChannelSetCell, DliaState)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let ch = sample_cell_channels(&mut rng);
            let p = random_basis(&mut rng);
            (ch, dlia_precoders(&ch, &p).unwrap())
        })
        .collect()
}

#[test]
fn linear_filters_null_the_other_cell() {
    for (ch, st) in dlia_states(11, 500) {
        for j in 0..2 {
            for i in 0..2 {
                let u = st.u[j][i];
                assert!((u * u.herm()).max_abs_diff(&M2::identity()) < 1e-10);
                let leak = u * kron_i3(&ch.i[j][i].transpose()) * st.f[1 - j];
                assert!(leak.frob_norm() < 1e-9 * st.f[1 - j].frob_norm(), "{}", leak.frob_norm());
                // Inside the cell only the user's own two streams survive.
                let own = u * kron_i3(&ch.h[j][i].transpose()) * st.f[j];
                for k in 0..4 {
                    for r in 0..2 {
                        let want = if k == 2 * i + r { st.d[j][k] } else { 0.0 };
                        assert!((own[(r, k)] - c(want, 0.0)).norm() < 1e-8 * (1.0 + want));
                    }
                }
            }
        }
    }
}

#[test]
fn linear_baseline_noiseless_recovery_and_power() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for (ch, st) in dlia_states(12, 300) {
        for col in 0..4 {
            for j in 0..2 {
                assert!((st.f[j].col(col).frob_norm_sq() - 0.75).abs() < 1e-10);
            }
        }
        let f = SymbolFrame::random(&mut rng, Constellation::Qam16, 9.0);
        let y = dlia_channel_output(&ch, &dlia_encode(&f, &st), &mut rng, 0.0);
        for j in 0..2 {
            for i in 0..2 {
                assert_eq!(dlia_decode(&st, &y[j][i], j, i, Constellation::Qam16, 9.0), f.labels[j][i]);
            }
        }
        let g = dlia_gammas(&st);
        assert!((g[5] - st.d[1][1] * st.d[1][1]).abs() < 1e-15);
    }
}
