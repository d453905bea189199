use std::collections::HashSet;

use mmlink::channel::{compose_channel, steering_vector};
use mmlink::combining::compute_weight;
use mmlink::pilots::{build_pilot_grid, Direction};
use mmlink::transceiver::water_filling;
use mmlink::{BandConfig, BandId, ChannelTensor, C64};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn sorted_profile() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..10.0, 1..9).prop_map(|mut v| {
        v.sort_by(|a, b| b.partial_cmp(a).unwrap());
        v
    })
}

proptest! {
    #[test]
    fn water_filling_kkt(sigma in sorted_profile(), noise in 1e-3f64..10.0, p in 0.01f64..20.0) {
        let power = water_filling(&sigma, noise, p);
        prop_assert!(power.iter().all(|&x| x >= 0.0));
        if sigma[0] > 0.0 {
            prop_assert!((power.iter().sum::<f64>() - p).abs() < 1e-9);
        }
        let levels: Vec<f64> = sigma
            .iter()
            .zip(&power)
            .filter(|(_, &x)| x > 0.0)
            .map(|(s, x)| x + noise / (s * s))
            .collect();
        if let Some(&mu) = levels.first() {
            for l in &levels {
                prop_assert!((l - mu).abs() < 1e-9 * mu.max(1.0));
            }
            for (s, x) in sigma.iter().zip(&power) {
                if *x == 0.0 && *s > 0.0 {
                    prop_assert!(noise / (s * s) >= mu - 1e-9 * mu.max(1.0));
                }
            }
        }
    }

    #[test]
    fn weight_monotone(noise in 1e-3f64..10.0, kappa in 0.0f64..1e3, dn in 1e-3f64..1.0, dk in 1e-3f64..10.0) {
        let w = compute_weight(8, 8, noise, kappa).w_hat;
        prop_assert!((0.0..=1.0).contains(&w));
        prop_assert!(compute_weight(8, 8, noise + dn, kappa).w_hat >= w);
        prop_assert!(compute_weight(8, 8, noise, kappa + dk).w_hat >= w);
    }

    #[test]
    fn steering_norm_is_element_count(m in 1usize..33, d in 0.1f64..1.0, theta in -1.6f64..1.6) {
        let a = steering_vector(m, d, theta);
        prop_assert!((a.norm_squared() - m as f64).abs() < 1e-9);
    }

    #[test]
    fn composition_is_the_weighted_sum(kappa in 0.0f64..100.0, eta in 0.0f64..4.0, seed in 0u64..1000) {
        let (m, n_sub, n_sym) = (2, 3, 2);
        let val = |i: usize, salt: u64| {
            let x = ((i as u64 + 1) * 2654435761 ^ (seed + salt)) % 1000;
            x as f64 / 500.0 - 1.0
        };
        let los: Vec<DMatrix<C64>> = (0..n_sym)
            .map(|k| DMatrix::from_fn(m, m, |r, t| C64::new(val(k * 4 + r * 2 + t, 1), val(k * 4 + r * 2 + t, 2))))
            .collect();
        let sp = ChannelTensor::from_fn(BandId::MmWave, (m, m, n_sub, n_sym), |r, t, n, k| {
            let i = ((k * n_sub + n) * m + t) * m + r;
            C64::new(val(i, 3), val(i, 4))
        });
        let h = compose_channel(&los, &sp, kappa, eta).unwrap();
        let a = (eta * kappa / (1.0 + kappa)).sqrt();
        let b = (eta / (1.0 + kappa)).sqrt();
        for k in 0..n_sym {
            for n in 0..n_sub {
                for r in 0..m {
                    for t in 0..m {
                        let want = los[k][(r, t)] * a + sp.get(r, t, n, k) * b;
                        prop_assert!((h.get(r, t, n, k) - want).norm() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn pilot_partition(m_exp in 0u32..5, k_p in prop::sample::select(vec![1usize, 2, 4]), mult in 1usize..5) {
        let m = 1usize << m_exp;
        prop_assume!(m % k_p == 0);
        let stride = m / k_p;
        let mut band = BandConfig::mmw_table1().with_subcarriers(stride * mult);
        band.m_tx = m;
        band.m_rx = m;
        let grid = build_pilot_grid(&band, k_p, 1).unwrap();
        for d in [Direction::Forward, Direction::Reverse] {
            let g = grid.direction(d);
            let mut used = HashSet::new();
            let mut symbols = HashSet::new();
            for ant in 0..g.n_antennas {
                symbols.insert(g.symbol(ant));
                for n in g.subcarriers(ant) {
                    prop_assert!(used.insert((g.symbol(ant), n)), "collision at {:?}", (g.symbol(ant), n));
                    prop_assert!((g.value(ant, 0).norm() - 1.0).abs() < 1e-12);
                }
            }
            // every (symbol, subcarrier) of the K_P training symbols is used exactly once
            prop_assert_eq!(used.len(), k_p * band.n_subcarriers);
            prop_assert_eq!(symbols.len(), k_p);
        }
    }
}
