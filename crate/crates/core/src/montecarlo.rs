//! Seeded realizations and parameter sweeps.
//!
//! One realization draws the geometry and both bands' channels once and then
//! evaluates every requested pilot pattern and method on them. Seeds depend
//! only on `(master_seed, realization, band, purpose)`, so all sweep points
//! see the same random numbers and results do not depend on the number of
//! workers.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use crate::channel::{
    compose_channel, free_space_sequence, make_tdl_profile, sample_geometry, stochastic_channel, JakesConfig,
    LosGeometry,
};
use crate::combining::{combine_mrc, compute_weight, conventional_estimate};
use crate::config::{BandConfig, BandId, EstimationMethod, SimConfig};
use crate::error::{Error, Result};
use crate::estimation::{
    estimate_angles, estimate_k_factor, ls_estimate, oob_aided_estimate, two_way_ls_estimate, ChannelEstimate,
    EstimateSource,
};
use crate::metrics::{link_sinr, spectral_efficiency, water_filling_se};
use crate::pilots::{build_pilot_grid, transmit_training, Direction};
use crate::seed::{Purpose, SeedTree};
use crate::tensor::ChannelTensor;
use crate::transceiver::{design_link, LinkDesign};

/// Which training direction(s) feed the in-band LS estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrainingEstimate {
    Forward,
    Reverse,
    TwoWay,
}

pub const DEFAULT_TRAINING_ESTIMATE: TrainingEstimate = TrainingEstimate::Forward;

/// Both bands' true channels for one realization, covering the longest
/// pilot pattern requested.
#[derive(Debug, Clone)]
pub struct RealizationChannels {
    pub geometry: LosGeometry,
    pub sub6: ChannelTensor,
    pub mmw: ChannelTensor,
}

pub fn synthesize_channels(cfg: &SimConfig, realization: u64, max_k_p: usize) -> Result<RealizationChannels> {
    let tree = SeedTree::new(cfg.master_seed);
    let mut rng = tree.rng(realization, None, Purpose::Geometry);
    let geometry = sample_geometry(&mut rng, cfg.velocity_mps, &cfg.sub6, &cfg.mmw);
    let band_channel = |band: &BandConfig| -> Result<ChannelTensor> {
        let n_sym = band.n_symbols_total(max_k_p);
        let profile = make_tdl_profile(band.rms_delay_spread_s, band.n_taps)?;
        let jakes = JakesConfig {
            n_sinusoids: cfg.jakes_sinusoids,
            max_doppler_hz: band.max_doppler_hz(cfg.velocity_mps),
        };
        let seed = tree.derive(realization, Some(band.band_id), Purpose::Stochastic);
        let sp = stochastic_channel(&profile, band, n_sym, jakes, seed);
        let los = free_space_sequence(&geometry, band, n_sym);
        compose_channel(&los, &sp, cfg.k_factor_linear(band.band_id), 1.0)
    };
    Ok(RealizationChannels {
        sub6: band_channel(&cfg.sub6)?,
        mmw: band_channel(&cfg.mmw)?,
        geometry,
    })
}

/// In-band LS estimate of one band for pilot pattern `k_p`.
pub fn training_estimate(
    cfg: &SimConfig,
    h: &ChannelTensor,
    k_p: usize,
    realization: u64,
    policy: TrainingEstimate,
) -> Result<ChannelEstimate> {
    let band = cfg.band(h.band);
    let tree = SeedTree::new(cfg.master_seed);
    let grid = build_pilot_grid(band, k_p, tree.derive(realization, Some(band.band_id), Purpose::PilotSymbols))?;
    let noise_seed = tree.derive(realization, Some(band.band_id), Purpose::TrainingNoise);
    let obs = transmit_training(h, &grid, cfg.noise_power(band.band_id), noise_seed)?;
    match policy {
        TrainingEstimate::Forward => ls_estimate(&obs, &grid, Direction::Forward, band.band_id),
        TrainingEstimate::Reverse => ls_estimate(&obs, &grid, Direction::Reverse, band.band_id),
        TrainingEstimate::TwoWay => two_way_ls_estimate(&obs, &grid, band.band_id),
    }
}

/// Perfect designs from the true mmWave channel at each absolute symbol.
struct PerfectCache {
    designs: Vec<Option<LinkDesign>>,
}

impl PerfectCache {
    fn build(h: &ChannelTensor, symbols: impl Iterator<Item = usize>, p_total: f64, noise: f64) -> Result<Self> {
        let mut designs: Vec<Option<LinkDesign>> = vec![None; h.n_symbols()];
        for k in symbols {
            if designs[k].is_none() {
                let est = ChannelEstimate::from_tensor_symbol(h, k, EstimateSource::Perfect);
                designs[k] = Some(design_link(&est, p_total, noise)?);
            }
        }
        Ok(PerfectCache { designs })
    }

    fn design(&self, k: usize) -> &LinkDesign {
        self.designs[k].as_ref().expect("perfect design cached for every data symbol")
    }

    fn gain_diag(&self, n: usize, k: usize) -> Vec<f64> {
        let d = &self.design(k).subcarriers[n];
        d.sigma.iter().zip(&d.power).map(|(s, p)| s * p.sqrt()).collect()
    }
}

/// Diagnostics of one pattern's estimation chain.
#[derive(Debug, Clone, PartialEq)]
pub struct OobaDiagnostics {
    pub kappa_hat: f64,
    pub aod_hat: f64,
    pub aoa_hat: f64,
    pub w_hat: f64,
}

/// SE of every `(pattern, method)` pair for one realization, pattern-major.
pub fn run_realization_multi(
    cfg: &SimConfig,
    patterns: &[usize],
    methods: &[EstimationMethod],
    realization: u64,
) -> Result<Vec<f64>> {
    run_realization_with(cfg, patterns, methods, realization, DEFAULT_TRAINING_ESTIMATE)
}

pub fn run_realization_with(
    cfg: &SimConfig,
    patterns: &[usize],
    methods: &[EstimationMethod],
    realization: u64,
    policy: TrainingEstimate,
) -> Result<Vec<f64>> {
    let max_k_p = patterns.iter().copied().max().unwrap_or(1);
    let ch = synthesize_channels(cfg, realization, max_k_p)?;
    evaluate_realization(cfg, &ch, patterns, methods, realization, policy)
}

pub fn evaluate_realization(
    cfg: &SimConfig,
    ch: &RealizationChannels,
    patterns: &[usize],
    methods: &[EstimationMethod],
    realization: u64,
    policy: TrainingEstimate,
) -> Result<Vec<f64>> {
    let mmw = &cfg.mmw;
    let k_d = mmw.n_data_symbols;
    if k_d == 0 {
        return Err(Error::NoDataSymbols {
            total: mmw.n_symbols_total(max_of(patterns)),
            training: 2 * max_of(patterns),
        });
    }
    let p_total = mmw.tx_power_watt;
    let noise = cfg.noise_power(BandId::MmWave);
    let data_symbols = patterns.iter().flat_map(|&k_p| 2 * k_p..2 * k_p + k_d);
    let perfect = PerfectCache::build(&ch.mmw, data_symbols, p_total, noise)?;
    let needs_ooba = methods.contains(&EstimationMethod::OobaMrc);

    let mut out = Vec::with_capacity(patterns.len() * methods.len());
    for &k_p in patterns {
        let first = 2 * k_p;
        let inband = if methods.iter().any(|m| *m != EstimationMethod::PerfectCsi) {
            Some(training_estimate(cfg, &ch.mmw, k_p, realization, policy)?)
        } else {
            None
        };
        let combined = match (&inband, needs_ooba) {
            (Some(inband), true) => Some(ooba_estimate(cfg, &ch.sub6, inband, k_p, realization, policy)?.0),
            _ => None,
        };
        for method in methods {
            let se = match method {
                EstimationMethod::PerfectCsi => {
                    let mut acc = 0.0;
                    for k in first..first + k_d {
                        let grid = link_sinr(&ch.mmw, perfect.design(k), k, 1, noise, |n, kk| {
                            perfect.gain_diag(n, kk)
                        })?;
                        acc += spectral_efficiency(&grid)?.se_bits_per_s_per_hz;
                    }
                    acc / k_d as f64
                }
                EstimationMethod::Conventional | EstimationMethod::OobaMrc => {
                    let est = if *method == EstimationMethod::Conventional {
                        conventional_estimate(inband.as_ref().expect("in-band estimate computed"))
                    } else {
                        combined.clone().expect("combined estimate computed")
                    };
                    let design = design_link(&est, p_total, noise)?;
                    let grid = link_sinr(&ch.mmw, &design, first, k_d, noise, |n, k| perfect.gain_diag(n, k))?;
                    spectral_efficiency(&grid)?.se_bits_per_s_per_hz
                }
            };
            out.push(se);
        }
    }
    Ok(out)
}

fn max_of(patterns: &[usize]) -> usize {
    patterns.iter().copied().max().unwrap_or(1)
}

/// OOBA-MRC estimate for one pattern: K-factor and LOS angles from the
/// sub-6 GHz LS estimate, LOS gain from the mmWave in-band estimate.
pub fn ooba_estimate(
    cfg: &SimConfig,
    sub6: &ChannelTensor,
    inband_mmw: &ChannelEstimate,
    k_p: usize,
    realization: u64,
    policy: TrainingEstimate,
) -> Result<(ChannelEstimate, OobaDiagnostics)> {
    let est_sub6 = training_estimate(cfg, sub6, k_p, realization, policy)?;
    let kappa = estimate_k_factor(&est_sub6)?.kappa_linear;
    let (aod, aoa) = estimate_angles(&est_sub6, cfg.sub6.element_spacing_wavelengths, cfg.angle_grid_points);
    let oob = oob_aided_estimate((aod, aoa), inband_mmw, &cfg.mmw)?;
    let w = compute_weight(cfg.mmw.m_tx, cfg.mmw.m_rx, cfg.noise_power(BandId::MmWave), kappa);
    let combined = combine_mrc(&oob, inband_mmw, w)?;
    Ok((
        combined,
        OobaDiagnostics {
            kappa_hat: kappa,
            aod_hat: aod,
            aoa_hat: aoa,
            w_hat: w.w_hat,
        },
    ))
}

/// SE of one realization for the configured method and pattern.
pub fn run_realization(cfg: &SimConfig, realization: u64) -> Result<f64> {
    Ok(run_realization_multi(cfg, &[cfg.k_p()], &[cfg.estimation_method], realization)?[0])
}

/// Closed-form water-filling SE of the perfect designs over the data
/// symbols of pattern `cfg.k_p()`.
pub fn perfect_closed_form_se(cfg: &SimConfig, realization: u64) -> Result<f64> {
    let ch = synthesize_channels(cfg, realization, cfg.k_p())?;
    let noise = cfg.noise_power(BandId::MmWave);
    let first = 2 * cfg.k_p();
    let k_d = cfg.mmw.n_data_symbols;
    let mut acc = 0.0;
    for k in first..first + k_d {
        let est = ChannelEstimate::from_tensor_symbol(&ch.mmw, k, EstimateSource::Perfect);
        acc += water_filling_se(&design_link(&est, cfg.mmw.tx_power_watt, noise)?, noise);
    }
    Ok(acc / k_d as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Param {
    KFactorDb,
    VelocityKmh,
    SnrDb,
    PilotKp,
    Method,
}

impl Param {
    pub fn as_str(self) -> &'static str {
        match self {
            Param::KFactorDb => "k_factor_db",
            Param::VelocityKmh => "velocity_kmh",
            Param::SnrDb => "snr_db",
            Param::PilotKp => "pilot_k_p",
            Param::Method => "method",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "k_factor_db" => Param::KFactorDb,
            "velocity_kmh" => Param::VelocityKmh,
            "snr_db" => Param::SnrDb,
            "pilot_k_p" => Param::PilotKp,
            "method" => Param::Method,
            other => return Err(Error::Config(format!("unknown sweep axis `{other}`"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamValue {
    Real(f64),
    Int(usize),
    Method(EstimationMethod),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub param: Param,
    pub values: Vec<ParamValue>,
}

impl SweepAxis {
    pub fn reals(param: Param, values: &[f64]) -> Self {
        SweepAxis {
            param,
            values: values.iter().map(|&v| ParamValue::Real(v)).collect(),
        }
    }

    pub fn pilots(values: &[usize]) -> Self {
        SweepAxis {
            param: Param::PilotKp,
            values: values.iter().map(|&v| ParamValue::Int(v)).collect(),
        }
    }

    pub fn methods(values: &[EstimationMethod]) -> Self {
        SweepAxis {
            param: Param::Method,
            values: values.iter().map(|&v| ParamValue::Method(v)).collect(),
        }
    }
}

/// Cartesian product of `axes` (first axis varies slowest) over `base`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub base: SimConfig,
    pub axes: Vec<SweepAxis>,
}

impl SweepSpec {
    pub fn single(base: SimConfig) -> Self {
        SweepSpec { base, axes: Vec::new() }
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for axis in &self.axes {
            if !seen.insert(axis.param) {
                return Err(Error::Config(format!("duplicate sweep axis `{}`", axis.param.as_str())));
            }
            if axis.values.is_empty() {
                return Err(Error::Config(format!("sweep axis `{}` has no values", axis.param.as_str())));
            }
            for v in &axis.values {
                let ok = matches!(
                    (axis.param, v),
                    (Param::KFactorDb | Param::VelocityKmh | Param::SnrDb, ParamValue::Real(_))
                        | (Param::PilotKp, ParamValue::Int(_))
                        | (Param::Method, ParamValue::Method(_))
                );
                if !ok {
                    return Err(Error::Config(format!("bad value {v:?} for axis `{}`", axis.param.as_str())));
                }
            }
        }
        for cfg in self.points() {
            cfg.check()?;
        }
        Ok(())
    }

    /// Every sweep point as a full configuration, in output order.
    pub fn points(&self) -> Vec<SimConfig> {
        let mut points = vec![self.base.clone()];
        for axis in &self.axes {
            let mut next = Vec::with_capacity(points.len() * axis.values.len());
            for p in &points {
                for v in &axis.values {
                    let mut c = p.clone();
                    apply_param(&mut c, axis.param, *v);
                    next.push(c);
                }
            }
            points = next;
        }
        points
    }
}

impl SweepSpec {
    /// Parses a config file: the `SimConfig` keys plus an optional `[sweep]`
    /// table mapping axis names to value arrays. Axes are ordered
    /// `k_factor_db, velocity_kmh, snr_db, pilot_k_p, method`.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
        let sweep = match table.remove("sweep") {
            None => toml::Table::new(),
            Some(toml::Value::Table(t)) => t,
            Some(_) => return Err(Error::Parse("`sweep` must be a table".into())),
        };
        let base = SimConfig::from_table(table)?;
        let mut axes = Vec::new();
        for (key, value) in &sweep {
            let param = Param::parse(key)?;
            let list = value
                .as_array()
                .ok_or_else(|| Error::Parse(format!("sweep.{key} must be an array")))?;
            let values = list
                .iter()
                .map(|v| parse_param_value(param, v))
                .collect::<Result<Vec<_>>>()?;
            axes.push(SweepAxis { param, values });
        }
        axes.sort_by_key(|a| a.param);
        Ok(SweepSpec { base, axes })
    }

    /// Applies a `key=value` override. A key naming a sweep axis collapses
    /// that axis to the single value; anything else goes to the base config.
    pub fn with_override(&self, key: &str, value: &str) -> Result<Self> {
        let mut out = self.clone();
        if let Some(param) = axis_alias(key.trim()) {
            if let Some(axis) = out.axes.iter_mut().find(|a| a.param == param) {
                let parsed: toml::Value = format!("v = {value}")
                    .parse::<toml::Table>()
                    .ok()
                    .and_then(|mut t| t.remove("v"))
                    .unwrap_or_else(|| toml::Value::String(value.to_string()));
                axis.values = vec![parse_param_value(param, &parsed)?];
                return Ok(out);
            }
        }
        out.base = out.base.with_override(key, value)?;
        Ok(out)
    }
}

fn axis_alias(key: &str) -> Option<Param> {
    match key {
        "k_factor_db" | "k_factor_sub6_db" => Some(Param::KFactorDb),
        "velocity_kmh" => Some(Param::VelocityKmh),
        "snr_db" | "snr_db_mmw" => Some(Param::SnrDb),
        "pilot_k_p" | "k_p" | "pilot_symbols_per_direction" => Some(Param::PilotKp),
        "method" | "estimation_method" => Some(Param::Method),
        _ => None,
    }
}

fn parse_param_value(param: Param, v: &toml::Value) -> Result<ParamValue> {
    let bad = || Error::Parse(format!("invalid value {v} for sweep axis `{}`", param.as_str()));
    Ok(match param {
        Param::KFactorDb | Param::VelocityKmh | Param::SnrDb => {
            ParamValue::Real(v.as_float().or_else(|| v.as_integer().map(|i| i as f64)).ok_or_else(bad)?)
        }
        Param::PilotKp => ParamValue::Int(
            v.as_integer()
                .and_then(|i| usize::try_from(i).ok())
                .ok_or_else(bad)?,
        ),
        Param::Method => ParamValue::Method(v.as_str().ok_or_else(bad)?.parse()?),
    })
}

fn apply_param(cfg: &mut SimConfig, param: Param, value: ParamValue) {
    match (param, value) {
        (Param::KFactorDb, ParamValue::Real(v)) => cfg.k_factor_sub6_db = v,
        (Param::VelocityKmh, ParamValue::Real(v)) => cfg.velocity_mps = v / 3.6,
        (Param::SnrDb, ParamValue::Real(v)) => {
            cfg.snr_db_mmw = v;
            cfg.snr_db_sub6 = None;
        }
        (Param::PilotKp, ParamValue::Int(v)) => cfg.pilot_symbols_per_direction = v,
        (Param::Method, ParamValue::Method(m)) => cfg.estimation_method = m,
        _ => {}
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub k_factor_db: f64,
    pub velocity_kmh: f64,
    pub snr_db: f64,
    pub pilot_k_p: usize,
    pub method: EstimationMethod,
    pub se_mean: f64,
    pub se_stderr: f64,
    pub n_realizations: usize,
    /// Share of the compute time of the realizations this point was
    /// evaluated with. Not part of the CSV.
    pub wall_time_s: f64,
}

/// Key of the points that can share channel realizations: everything except
/// pilot pattern and method.
fn group_key(cfg: &SimConfig) -> Vec<u8> {
    let mut c = cfg.clone();
    c.pilot_symbols_per_direction = 1;
    c.estimation_method = EstimationMethod::Conventional;
    c.to_toml_string().unwrap_or_default().into_bytes()
}

struct Group {
    cfg: SimConfig,
    patterns: Vec<usize>,
    methods: Vec<EstimationMethod>,
    /// `(point index, pattern index, method index)`
    members: Vec<(usize, usize, usize)>,
}

fn build_groups(points: &[SimConfig]) -> Vec<Group> {
    let mut index: BTreeMap<Vec<u8>, usize> = BTreeMap::new();
    let mut groups: Vec<Group> = Vec::new();
    for (i, p) in points.iter().enumerate() {
        let key = group_key(p);
        let g = *index.entry(key).or_insert_with(|| {
            groups.push(Group {
                cfg: p.clone(),
                patterns: Vec::new(),
                methods: Vec::new(),
                members: Vec::new(),
            });
            groups.len() - 1
        });
        let group = &mut groups[g];
        let pi = position_or_push(&mut group.patterns, p.k_p());
        let mi = position_or_push(&mut group.methods, p.estimation_method);
        group.members.push((i, pi, mi));
    }
    groups
}

fn position_or_push<T: PartialEq + Copy>(v: &mut Vec<T>, x: T) -> usize {
    match v.iter().position(|y| *y == x) {
        Some(i) => i,
        None => {
            v.push(x);
            v.len() - 1
        }
    }
}

fn describe_point(cfg: &SimConfig) -> String {
    format!(
        "k_factor_db={} velocity_kmh={} snr_db={} pilot_k_p={} method={}",
        fmt_sig6(cfg.k_factor_sub6_db),
        fmt_sig6(cfg.velocity_kmh()),
        fmt_sig6(cfg.snr_db_mmw),
        cfg.k_p(),
        cfg.estimation_method.as_str()
    )
}

/// Runs every point of `spec` with `base.n_realizations` realizations each.
///
/// `workers == 0` uses the default thread count; `workers == 1` (or a
/// build without the `parallel` feature) runs sequentially. Output is
/// identical for every worker count.
pub fn run_sweep(spec: &SweepSpec, workers: usize) -> Result<Vec<SweepRecord>> {
    spec.validate()?;
    let points = spec.points();
    let groups = build_groups(&points);
    let n_real = spec.base.n_realizations;
    let items: Vec<(usize, u64)> = (0..groups.len())
        .flat_map(|g| (0..n_real as u64).map(move |r| (g, r)))
        .collect();

    let work = |&(g, r): &(usize, u64)| -> Result<(Vec<f64>, f64)> {
        let group = &groups[g];
        let start = Instant::now();
        let res = catch_unwind(AssertUnwindSafe(|| {
            run_realization_multi(&group.cfg, &group.patterns, &group.methods, r)
        }));
        let elapsed = start.elapsed().as_secs_f64();
        match res {
            Ok(v) => v.map(|v| (v, elapsed)),
            Err(payload) => {
                let message = payload
                    .downcast_ref::<&str>()
                    .map(|s| s.to_string())
                    .or_else(|| payload.downcast_ref::<String>().cloned())
                    .unwrap_or_else(|| "unknown panic".into());
                Err(Error::RealizationPanicked {
                    point: describe_point(&group.cfg),
                    index: r as usize,
                    message,
                })
            }
        }
    };
    let results = execute(&items, workers, work)?;

    let mut per_point: Vec<Vec<f64>> = vec![Vec::with_capacity(n_real); points.len()];
    let mut time_per_point = vec![0.0; points.len()];
    for ((g, _), (values, elapsed)) in items.iter().zip(&results) {
        let group = &groups[*g];
        let share = elapsed / group.members.len() as f64;
        for &(pt, pi, mi) in &group.members {
            per_point[pt].push(values[pi * group.methods.len() + mi]);
            time_per_point[pt] += share;
        }
    }

    Ok(points
        .iter()
        .zip(per_point)
        .zip(time_per_point)
        .map(|((cfg, samples), wall)| {
            let (mean, stderr) = mean_stderr(&samples);
            SweepRecord {
                k_factor_db: cfg.k_factor_sub6_db,
                velocity_kmh: cfg.velocity_kmh(),
                snr_db: cfg.snr_db_mmw,
                pilot_k_p: cfg.k_p(),
                method: cfg.estimation_method,
                se_mean: mean,
                se_stderr: stderr,
                n_realizations: samples.len(),
                wall_time_s: wall,
            }
        })
        .collect())
}

#[cfg(feature = "parallel")]
fn execute<T, F>(items: &[(usize, u64)], workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&(usize, u64)) -> Result<T> + Sync,
{
    use rayon::prelude::*;
    if workers == 1 {
        return items.iter().map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| items.par_iter().map(&f).collect())
}

#[cfg(not(feature = "parallel"))]
fn execute<T, F>(items: &[(usize, u64)], _workers: usize, f: F) -> Result<Vec<T>>
where
    F: Fn(&(usize, u64)) -> Result<T>,
{
    items.iter().map(f).collect()
}

/// Sample mean and standard error `s/√L` (sample standard deviation with
/// `L−1`; zero for fewer than two samples).
pub fn mean_stderr(samples: &[f64]) -> (f64, f64) {
    let n = samples.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

pub const CSV_HEADER: &str = "k_factor_db,velocity_kmh,snr_db,pilot_k_p,method,se_mean,se_stderr,n_realizations";

/// Results CSV with LF line endings and 6 significant digits.
pub fn records_to_csv(records: &[SweepRecord]) -> String {
    let mut s = String::new();
    s.push_str(CSV_HEADER);
    s.push('\n');
    for r in records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            fmt_sig6(r.k_factor_db),
            fmt_sig6(r.velocity_kmh),
            fmt_sig6(r.snr_db),
            r.pilot_k_p,
            r.method.as_str(),
            fmt_sig6(r.se_mean),
            fmt_sig6(r.se_stderr),
            r.n_realizations
        );
    }
    s
}

/// `%g`-style formatting with 6 significant digits.
pub fn fmt_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.5e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        let fixed = format!("{:.*}", decimals, x);
        trim_zeros(&fixed)
    } else {
        format!("{}e{}{:02}", trim_zeros(mantissa), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        let t = s.trim_end_matches('0').trim_end_matches('.');
        if t == "-0" { "0".into() } else { t.into() }
    } else {
        s.into()
    }
}

pub const PRESETS: [&str; 5] = ["fig2a", "fig2b", "fig3a", "fig3b", "table1-smoke"];

pub const FIG2_K_FACTORS_DB: [f64; 11] = [-20.0, -15.0, -10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0];
pub const FIG3_VELOCITIES_KMH: [f64; 9] = [0.0, 25.0, 50.0, 75.0, 100.0, 125.0, 150.0, 175.0, 200.0];

/// Named experiment grids on the scaled defaults (336 mmWave subcarriers).
/// The K-factor sweeps use 200 realizations per point, the velocity sweeps 300.
pub fn preset(name: &str) -> Result<SweepSpec> {
    let mut base = SimConfig::scaled();
    base.n_realizations = 200;
    let all_patterns = SweepAxis::pilots(&[1, 2, 4]);
    let all_methods = SweepAxis::methods(&EstimationMethod::ALL);
    let fig2 = |snr: f64| SweepSpec {
        base: base.clone(),
        axes: vec![
            SweepAxis::reals(Param::SnrDb, &[snr]),
            SweepAxis::reals(Param::VelocityKmh, &[0.0]),
            SweepAxis::reals(Param::KFactorDb, &FIG2_K_FACTORS_DB),
            all_patterns.clone(),
            all_methods.clone(),
        ],
    };
    let fig3 = |kappa: f64| SweepSpec {
        base: SimConfig {
            n_realizations: 300,
            ..base.clone()
        },
        axes: vec![
            SweepAxis::reals(Param::SnrDb, &[0.0]),
            SweepAxis::reals(Param::KFactorDb, &[kappa]),
            SweepAxis::reals(Param::VelocityKmh, &FIG3_VELOCITIES_KMH),
            all_patterns.clone(),
            all_methods.clone(),
        ],
    };
    Ok(match name {
        "fig2a" => fig2(0.0),
        "fig2b" => fig2(10.0),
        "fig3a" => fig3(-20.0),
        "fig3b" => fig3(20.0),
        "table1-smoke" => {
            let mut b = base.clone();
            b.n_realizations = 4;
            SweepSpec {
                base: b,
                axes: vec![all_methods.clone()],
            }
        }
        other => {
            return Err(Error::Config(format!(
                "unknown preset `{other}` (expected one of {})",
                PRESETS.join(", ")
            )))
        }
    })
}
