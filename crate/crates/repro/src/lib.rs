//! Acceptance criteria for the simulator.
//!
//! Each `criterion_*` function runs one criterion at its stated size and
//! tolerance and returns an [`Outcome`] listing every individual check. The
//! `acceptance` test target prints them and fails if any check fails.

use std::collections::HashSet;
use std::f64::consts::PI;
use std::time::{Duration, Instant};

use mmlink::channel::{steering_vector, JakesConfig, JakesProcess, DEFAULT_SINUSOIDS};
use mmlink::combining::compute_weight;
use mmlink::metrics::{error_covariance, gain_matrix, sinr_per_stream, spectral_efficiency, SinrGrid};
use mmlink::montecarlo::{perfect_closed_form_se, run_realization, run_sweep, Param, SweepAxis, SweepRecord, SweepSpec, PRESETS};
use mmlink::pilots::{build_pilot_grid, Direction};
use mmlink::transceiver::{water_filling, SubcarrierDesign};
use mmlink::{BandConfig, EstimationMethod, SimConfig, C64};
use mmlink_cli::{cmd_run, SpecSource};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct Outcome {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub details: Vec<String>,
    pub elapsed: Duration,
}

struct Checks {
    passed: bool,
    details: Vec<String>,
}

impl Checks {
    fn new() -> Self {
        Checks {
            passed: true,
            details: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        self.passed &= ok;
        self.details.push(format!("{} {}", if ok { "ok  " } else { "FAIL" }, what.into()));
    }

    fn note(&mut self, what: impl Into<String>) {
        self.details.push(format!("     {}", what.into()));
    }

    fn finish(mut self, id: u8, title: &'static str, start: Instant, budget: Option<Duration>) -> Outcome {
        let elapsed = start.elapsed();
        if let Some(b) = budget {
            self.check(elapsed <= b, format!("runtime {:.1} s within {} s", elapsed.as_secs_f64(), b.as_secs()));
        }
        Outcome {
            id,
            title,
            passed: self.passed,
            details: self.details,
            elapsed,
        }
    }
}

/// Acceptance runs use the defaults with 336 mmWave subcarriers and 8×8 arrays.
pub fn scaled_base(n_realizations: usize) -> SimConfig {
    let mut c = SimConfig::scaled();
    c.n_realizations = n_realizations;
    c
}

fn find<'a>(records: &'a [SweepRecord], kappa: f64, v: f64, snr: f64, k_p: usize, m: EstimationMethod) -> &'a SweepRecord {
    records
        .iter()
        .find(|r| {
            (r.k_factor_db - kappa).abs() < 1e-9
                && (r.velocity_kmh - v).abs() < 1e-6
                && (r.snr_db - snr).abs() < 1e-9
                && r.pilot_k_p == k_p
                && r.method == m
        })
        .expect("sweep point present")
}

fn spread(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    max - min
}

fn fmt_list(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>().join(" / ")
}

// ---------------------------------------------------------------------------
// 1. deterministic math

fn bisection_water_filling(sigma: &[f64], noise: f64, p: f64) -> Vec<f64> {
    let inv: Vec<f64> = sigma
        .iter()
        .map(|s| if *s > 0.0 { noise / (s * s) } else { f64::INFINITY })
        .collect();
    let top = inv.iter().cloned().filter(|v| v.is_finite()).fold(0.0, f64::max);
    let fill = |mu: f64| inv.iter().map(|v| (mu - v).max(0.0)).sum::<f64>();
    let (mut lo, mut hi) = (0.0, p + top);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if fill(mid) > p {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mu = 0.5 * (lo + hi);
    inv.iter().map(|v| (mu - v).max(0.0)).collect()
}

pub fn criterion_1_math_oracles() -> Outcome {
    const TOL: f64 = 1e-8;
    let start = Instant::now();
    let mut c = Checks::new();

    let mut worst: f64 = 0.0;
    for &(m, d, th) in &[(4usize, 0.5, 0.0), (2, 0.5, PI / 2.0), (8, 0.5, PI / 6.0), (8, 0.5, -1.2), (16, 0.5, 0.7)] {
        let a = steering_vector(m, d, th);
        for i in 0..m {
            let ph = -2.0 * PI * i as f64 * d * th.sin();
            worst = worst.max((a[i] - C64::new(ph.cos(), ph.sin())).norm());
        }
        worst = worst.max((a.norm_squared() - m as f64).abs());
    }
    c.check(worst < TOL, format!("steering vectors: max deviation {worst:.1e}"));

    let w1 = compute_weight(8, 8, 1.0, 1.0).w_hat;
    let w2 = compute_weight(8, 8, 0.7, 1e12).w_hat;
    let w3 = compute_weight(8, 8, 0.0, 1.0).w_hat;
    c.check(
        (w1 - 64.0 / 97.0).abs() < TOL && (w2 - 64.0 / 65.0).abs() < TOL && w3 == 0.0,
        format!("combining weight: 8x8 σ²=1 κ=1 gives {w1:.10} (64/97); κ→∞ gives {w2:.10} (64/65); σ²=0 gives {w3}"),
    );

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut rand_mat = |r: usize, k: usize| {
        DMatrix::from_fn(r, k, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    };
    let (h, q, f) = (rand_mat(2, 2), rand_mat(2, 2), rand_mat(2, 2));
    let p = [0.6, 0.4];
    let d = SubcarrierDesign::from_parts(q.clone(), f.clone(), vec![1.0, 1.0], p.to_vec());
    let g = gain_matrix(h.as_view(), &d);
    let mut dev: f64 = 0.0;
    for mu in 0..2 {
        for nu in 0..2 {
            let mut acc = C64::new(0.0, 0.0);
            for r in 0..2 {
                for t in 0..2 {
                    acc += q[(r, mu)].conj() * h[(r, t)] * f[(t, nu)] * p[nu].sqrt();
                }
            }
            dev = dev.max((acc - g[(mu, nu)]).norm());
        }
    }
    c.check(dev < TOL, format!("gain matrix vs explicit product: {dev:.1e}"));

    let (gp, ge) = (rand_mat(3, 3), rand_mat(3, 3));
    let eps = &gp - &ge;
    let cov = &eps * eps.adjoint() / C64::new(3.0, 0.0);
    let got = error_covariance(&gp, &ge).unwrap();
    let dev = (0..3).map(|i| (got[i] - cov[(i, i)].re).abs()).fold(0.0, f64::max);
    c.check(dev < TOL, format!("error covariance vs (1/ℓ)εεᴴ: {dev:.1e}"));

    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let gm = DMatrix::from_row_slice(2, 2, &[one, one, zero, one]);
    let s = sinr_per_stream(&gm, &DMatrix::identity(2, 2), &[0.0, 0.0], 1.0);
    c.check(
        (s[0] - 0.5).abs() < TOL && (s[1] - 1.0).abs() < TOL,
        format!("SINR of [[1,1],[0,1]] at σ²=1: {s:?}"),
    );
    let se1 = spectral_efficiency(&SinrGrid::from_vec(8, 1, 1, vec![1.0; 8]).unwrap()).unwrap().se_bits_per_s_per_hz;
    let se2 = spectral_efficiency(&SinrGrid::from_vec(2, 1, 1, vec![3.0, 1.0]).unwrap()).unwrap().se_bits_per_s_per_hz;
    c.check((se1 - 8.0).abs() < TOL && (se2 - 3.0).abs() < TOL, format!("SE examples: {se1} and {se2}"));

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    let mut kkt_ok = true;
    for _ in 0..1000 {
        let l = rng.random_range(1..=8);
        let mut sigma: Vec<f64> = (0..l).map(|_| rng.random_range(0.0..5.0f64)).collect();
        sigma.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let noise = 10f64.powf(rng.random_range(-2.0..1.5));
        let pt = 10f64.powf(rng.random_range(-1.0..1.0));
        let got = water_filling(&sigma, noise, pt);
        let want = bisection_water_filling(&sigma, noise, pt);
        worst = got.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(worst, f64::max);
        kkt_ok &= (got.iter().sum::<f64>() - pt).abs() < TOL && got.iter().all(|&x| x >= 0.0);
    }
    c.check(
        worst < TOL && kkt_ok,
        format!("water-filling vs bisection on 1000 profiles: max deviation {worst:.1e}, sum and sign constraints hold: {kkt_ok}"),
    );
    c.finish(1, "deterministic-math oracle suite", start, Some(Duration::from_secs(10)))
}

// ---------------------------------------------------------------------------
// 2. Jakes

fn bessel_j0(x: f64) -> f64 {
    let q = -(x * x) / 4.0;
    let (mut term, mut sum) = (1.0, 1.0);
    for k in 1..60 {
        term *= q / (k * k) as f64;
        sum += term;
    }
    sum
}

pub fn criterion_2_jakes() -> Outcome {
    let start = Instant::now();
    let mut c = Checks::new();
    let nu = 250.0;
    let products: Vec<f64> = (0..=20).map(|i| i as f64 * 0.025).collect();
    let dt = 0.025 / nu / 4.0;
    let lags: Vec<f64> = products.iter().map(|x| x / nu).collect();
    let draws = 200;
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut mean = vec![0.0; lags.len()];
    for _ in 0..draws {
        let p = JakesProcess::new(
            JakesConfig {
                n_sinusoids: DEFAULT_SINUSOIDS,
                max_doppler_hz: nu,
            },
            &mut rng,
        );
        for (m, r) in mean.iter_mut().zip(p.empirical_autocorrelation(&lags, dt, 4000)) {
            *m += r / draws as f64;
        }
    }
    let mut worst: (f64, f64) = (0.0, 0.0);
    for (x, r) in products.iter().zip(&mean) {
        let dev = (r - bessel_j0(2.0 * PI * x)).abs();
        if dev > worst.1 {
            worst = (*x, dev);
        }
    }
    c.check(
        worst.1 <= 0.05,
        format!(
            "mean autocorrelation of {draws} draws vs J0(2πν_maxτ) over ν_maxτ ∈ [0, 0.5]: max |Δ| {:.4} at ν_maxτ = {:.3}",
            worst.1, worst.0
        ),
    );
    c.finish(2, "Jakes temporal correlation", start, Some(Duration::from_secs(30)))
}

// ---------------------------------------------------------------------------
// 3. pilot goldens

const GOLDENS: [(usize, &str); 3] = [
    (1, include_str!("../../core/tests/golden/pilots_m8_kp1_n16.csv")),
    (2, include_str!("../../core/tests/golden/pilots_m8_kp2_n16.csv")),
    (4, include_str!("../../core/tests/golden/pilots_m8_kp4_n16.csv")),
];

fn enumerate_pilots(m: usize, k_p: usize, n: usize) -> String {
    let stride = m / k_p;
    let mut out = String::from("antenna,direction,symbol,subcarrier\n");
    for (dir, base) in [("forward", 0), ("reverse", k_p)] {
        for a in 1..=m {
            let mut sc = (a - 1) % stride + 1;
            while sc <= n {
                out.push_str(&format!("{a},{dir},{},{sc}\n", base + (a - 1) / stride + 1));
                sc += stride;
            }
        }
    }
    out
}

pub fn criterion_3_pilot_goldens() -> Outcome {
    let start = Instant::now();
    let mut c = Checks::new();
    let mut band = BandConfig::mmw_table1().with_subcarriers(16);
    band.m_tx = 8;
    band.m_rx = 8;
    for (k_p, golden) in GOLDENS {
        let grid = build_pilot_grid(&band, k_p, 0).unwrap();
        let csv = grid.to_csv();
        c.check(
            csv == golden && csv == enumerate_pilots(8, k_p, 16),
            format!("K_P = {k_p}: {} rows match the committed golden and the direct enumeration", csv.lines().count() - 1),
        );
        let mut disjoint = true;
        for d in [Direction::Forward, Direction::Reverse] {
            let g = grid.direction(d);
            let mut used = HashSet::new();
            for a in 0..g.n_antennas {
                for n in g.subcarriers(a) {
                    disjoint &= used.insert((g.symbol(a), n));
                }
            }
            disjoint &= used.len() == k_p * 16;
        }
        c.check(disjoint, format!("K_P = {k_p}: antennas never share a (symbol, subcarrier) resource"));
    }
    c.finish(3, "pilot-pattern goldens", start, None)
}

// ---------------------------------------------------------------------------
// 4. static trend

pub fn criterion_4_static_trend(workers: usize) -> Outcome {
    let start = Instant::now();
    let mut c = Checks::new();
    let spec = SweepSpec {
        base: scaled_base(200),
        axes: vec![
            SweepAxis::reals(Param::KFactorDb, &[-20.0]),
            SweepAxis::reals(Param::VelocityKmh, &[0.0]),
            SweepAxis::reals(Param::SnrDb, &[0.0, 10.0]),
            SweepAxis::pilots(&[1, 2, 4]),
            SweepAxis::methods(&[EstimationMethod::Conventional]),
        ],
    };
    let rec = run_sweep(&spec, workers).expect("sweep runs");
    for (snr, targets, tol) in [(0.0, [2.7, 3.4, 3.5], 0.7), (10.0, [7.0, 11.0, 12.5], 1.5)] {
        let se: Vec<f64> = [1, 2, 4]
            .iter()
            .map(|&k| find(&rec, -20.0, 0.0, snr, k, EstimationMethod::Conventional).se_mean)
            .collect();
        c.check(
            se[0] < se[1] && se[1] < se[2],
            format!("SNR {snr} dB: conventional SE increases with the pattern ({})", fmt_list(&se)),
        );
        for (i, k) in [1, 2, 4].iter().enumerate() {
            c.check(
                (se[i] - targets[i]).abs() <= tol,
                format!("SNR {snr} dB, K_P = {k}: SE {:.3} within {} ± {tol}", se[i], targets[i]),
            );
        }
    }
    c.finish(4, "static trend at κ = −20 dB (N = 336, L = 200)", start, Some(Duration::from_secs(600)))
}

// ---------------------------------------------------------------------------
// 5. high-κ convergence

pub fn criterion_5_high_kappa(workers: usize) -> Outcome {
    let start = Instant::now();
    let mut c = Checks::new();
    let kappas = [20.0, 30.0];
    let spec = SweepSpec {
        base: scaled_base(200),
        axes: vec![
            SweepAxis::reals(Param::KFactorDb, &kappas),
            SweepAxis::reals(Param::VelocityKmh, &[0.0]),
            SweepAxis::reals(Param::SnrDb, &[0.0]),
            SweepAxis::pilots(&[1, 2, 4]),
            SweepAxis::methods(&EstimationMethod::ALL),
        ],
    };
    let rec = run_sweep(&spec, workers).expect("sweep runs");
    for kappa in kappas {
        for m in EstimationMethod::ALL {
            let se: Vec<f64> = [1, 2, 4].iter().map(|&k| find(&rec, kappa, 0.0, 0.0, k, m).se_mean).collect();
            c.check(
                spread(&se) < 0.3,
                format!("κ = {kappa} dB, {}: spread across patterns {:.3} ({})", m.as_str(), spread(&se), fmt_list(&se)),
            );
        }
        for k in [1, 2, 4] {
            let conv = find(&rec, kappa, 0.0, 0.0, k, EstimationMethod::Conventional).se_mean;
            let ooba = find(&rec, kappa, 0.0, 0.0, k, EstimationMethod::OobaMrc).se_mean;
            c.check(ooba >= conv, format!("κ = {kappa} dB, K_P = {k}: OOBA-MRC {ooba:.3} ≥ conventional {conv:.3}"));
        }
    }
    c.finish(5, "high-κ convergence (static, SNR 0 dB)", start, None)
}

// ---------------------------------------------------------------------------
// 6 and 7. dynamic sweeps

pub const DYNAMIC_VELOCITIES_KMH: [f64; 6] = [0.0, 50.0, 75.0, 100.0, 150.0, 200.0];

/// κ ∈ {−20, 20} dB × the criterion velocities × all patterns, conventional
/// and OOBA-MRC, SNR 0 dB, 300 realizations.
pub fn dynamic_sweep(workers: usize) -> (Vec<SweepRecord>, Duration) {
    let start = Instant::now();
    let spec = SweepSpec {
        base: scaled_base(300),
        axes: vec![
            SweepAxis::reals(Param::KFactorDb, &[-20.0, 20.0]),
            SweepAxis::reals(Param::VelocityKmh, &DYNAMIC_VELOCITIES_KMH),
            SweepAxis::reals(Param::SnrDb, &[0.0]),
            SweepAxis::pilots(&[1, 2, 4]),
            SweepAxis::methods(&[EstimationMethod::Conventional, EstimationMethod::OobaMrc]),
        ],
    };
    (run_sweep(&spec, workers).expect("sweep runs"), start.elapsed())
}

fn curve(rec: &[SweepRecord], kappa: f64, k_p: usize, m: EstimationMethod) -> Vec<f64> {
    DYNAMIC_VELOCITIES_KMH
        .iter()
        .map(|&v| find(rec, kappa, v, 0.0, k_p, m).se_mean)
        .collect()
}

pub fn criterion_6_nlos_crossover(rec: &[SweepRecord], sweep_time: Duration) -> Outcome {
    let start = Instant::now() - sweep_time;
    let mut c = Checks::new();
    for m in [EstimationMethod::Conventional, EstimationMethod::OobaMrc] {
        let curves: Vec<Vec<f64>> = [1, 2, 4].iter().map(|&k| curve(rec, -20.0, k, m)).collect();
        for (k, cv) in [1, 2, 4].iter().zip(&curves) {
            c.check(
                cv.windows(2).all(|w| w[1] < w[0]),
                format!("{}, K_P = {k}: SE decreases with velocity ({})", m.as_str(), fmt_list(cv)),
            );
        }
        let beats = |other: &Vec<f64>, lo: f64, hi: f64| {
            DYNAMIC_VELOCITIES_KMH
                .iter()
                .zip(curves[0].iter().zip(other))
                .filter(|(v, (a, b))| **v >= lo && **v <= hi && a > b)
                .map(|(v, _)| *v)
                .collect::<Vec<f64>>()
        };
        let over4 = beats(&curves[2], 50.0, 125.0);
        c.check(
            !over4.is_empty(),
            format!("{}: K_P = 1 exceeds K_P = 4 somewhere in [50, 125] km/h (at {over4:?})", m.as_str()),
        );
        let over2 = beats(&curves[1], 100.0, 200.0);
        c.check(
            !over2.is_empty(),
            format!("{}: K_P = 1 exceeds K_P = 2 somewhere in [100, 200] km/h (at {over2:?})", m.as_str()),
        );
        let last = curves.iter().map(|cv| *cv.last().unwrap()).collect::<Vec<f64>>();
        c.check(
            last[2] < last[0] && last[2] < last[1],
            format!("{}: K_P = 4 is the worst pattern at 200 km/h ({})", m.as_str(), fmt_list(&last)),
        );
    }
    c.note(format!("velocities {DYNAMIC_VELOCITIES_KMH:?} km/h"));
    c.finish(6, "dynamic NLOS crossover (κ = −20 dB, SNR 0 dB, L = 300)", start, None)
}

pub fn criterion_7_los_robustness(rec: &[SweepRecord], sweep_time: Duration) -> Outcome {
    let start = Instant::now() - sweep_time;
    let mut c = Checks::new();
    let ooba: Vec<Vec<f64>> = [1, 2, 4].iter().map(|&k| curve(rec, 20.0, k, EstimationMethod::OobaMrc)).collect();
    let conv: Vec<Vec<f64>> = [1, 2, 4]
        .iter()
        .map(|&k| curve(rec, 20.0, k, EstimationMethod::Conventional))
        .collect();
    for (i, v) in DYNAMIC_VELOCITIES_KMH.iter().enumerate() {
        let at: Vec<f64> = ooba.iter().map(|cv| cv[i]).collect();
        c.check(
            spread(&at) < 0.3,
            format!("{v} km/h: OOBA-MRC spread across patterns {:.3} ({})", spread(&at), fmt_list(&at)),
        );
    }
    let mut above = true;
    for (o, cv) in ooba.iter().zip(&conv) {
        above &= o.iter().zip(cv).all(|(a, b)| a > b);
    }
    c.check(above, "OOBA-MRC exceeds conventional for every pattern at every velocity");
    for (k, cv) in [1, 2, 4].iter().zip(&ooba) {
        let ratio = cv[0] / cv.last().unwrap();
        c.check(
            (1.2..=1.8).contains(&ratio),
            format!("K_P = {k}: OOBA-MRC static / 200 km/h = {:.3} / {:.3} = {ratio:.3} in [1.2, 1.8]", cv[0], cv.last().unwrap()),
        );
    }
    c.finish(7, "dynamic LOS robustness (κ = 20 dB, SNR 0 dB, L = 300)", start, None)
}

// ---------------------------------------------------------------------------
// 8. determinism

pub fn criterion_8_determinism() -> Outcome {
    let start = Instant::now();
    let mut c = Checks::new();
    for name in PRESETS {
        let src = SpecSource {
            preset: Some(name.to_string()),
            overrides: vec![("n_realizations".into(), "4".into())],
            seed: Some(20_240_601),
            ..SpecSource::default()
        };
        let run = |workers| cmd_run(&src, workers, None).map(|o| o.unwrap_or_default());
        match (run(1), run(2), run(0)) {
            (Ok(a), Ok(b), Ok(d)) => c.check(
                a == b && a == d && a.lines().count() > 1,
                format!("preset {name}: {} rows, identical bytes with 1, 2 and default workers", a.lines().count() - 1),
            ),
            (a, b, d) => c.check(
                false,
                format!("preset {name}: run failed ({:?})", [a.err(), b.err(), d.err()].map(|e| e.map(|e| e.message))),
            ),
        }
    }
    c.finish(8, "determinism across worker counts (every preset, L = 4)", start, None)
}

// ---------------------------------------------------------------------------
// 9. perfect-CSI closed form

pub fn criterion_9_perfect_closed_form() -> Outcome {
    let start = Instant::now();
    let mut c = Checks::new();
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for (kappa, snr, k_p) in [(-20.0, 0.0, 1), (0.0, 10.0, 2), (20.0, -5.0, 4), (30.0, 10.0, 1)] {
        let mut cfg = scaled_base(1);
        cfg.k_factor_sub6_db = kappa;
        cfg.snr_db_mmw = snr;
        cfg.pilot_symbols_per_direction = k_p;
        cfg.estimation_method = EstimationMethod::PerfectCsi;
        for r in 0..5 {
            let se = run_realization(&cfg, r).expect("realization runs");
            let closed = perfect_closed_form_se(&cfg, r).expect("closed form");
            worst = worst.max((se - closed).abs());
            count += 1;
        }
    }
    c.check(
        worst < 1e-9,
        format!("{count} realizations at v = 0: max |SE − water-filling closed form| = {worst:.1e}"),
    );
    c.finish(9, "perfect-CSI closed form", start, None)
}
