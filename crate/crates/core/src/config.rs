//! Band and experiment configuration.
//!
//! A [`SimConfig`] describes one simulation point: both band configurations,
//! the propagation and noise conditions, the pilot pattern and the estimation
//! method under test. It is read from a flat TOML file with one table per band
//! and validated with [`SimConfig::validate`], which reports every violation
//! instead of stopping at the first one.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::SPEED_OF_LIGHT;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BandId {
    Sub6,
    #[serde(rename = "mmwave")]
    MmWave,
}

impl BandId {
    pub fn tag(self) -> u64 {
        match self {
            BandId::Sub6 => 1,
            BandId::MmWave => 2,
        }
    }
}

impl fmt::Display for BandId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BandId::Sub6 => f.write_str("sub6"),
            BandId::MmWave => f.write_str("mmwave"),
        }
    }
}

/// Which channel estimate feeds the mmWave link design.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EstimationMethod {
    /// In-band LS estimate with linear interpolation only.
    #[serde(rename = "conventional")]
    Conventional,
    /// In-band estimate fused with the out-of-band aided LOS estimate.
    #[serde(rename = "ooba-mrc")]
    OobaMrc,
    /// Genie design from the true instantaneous channel.
    #[serde(rename = "perfect")]
    PerfectCsi,
}

impl EstimationMethod {
    pub const ALL: [EstimationMethod; 3] = [
        EstimationMethod::Conventional,
        EstimationMethod::OobaMrc,
        EstimationMethod::PerfectCsi,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EstimationMethod::Conventional => "conventional",
            EstimationMethod::OobaMrc => "ooba-mrc",
            EstimationMethod::PerfectCsi => "perfect",
        }
    }
}

impl fmt::Display for EstimationMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EstimationMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "conventional" | "conv" => Ok(EstimationMethod::Conventional),
            "ooba-mrc" | "ooba" | "oobamrc" | "ooba_mrc" => Ok(EstimationMethod::OobaMrc),
            "perfect" | "perfect-csi" | "perfectcsi" | "perfect_csi" => {
                Ok(EstimationMethod::PerfectCsi)
            }
            other => Err(Error::Parse(format!("unknown estimation method '{other}'"))),
        }
    }
}

fn default_spacing() -> f64 {
    0.5
}

fn default_taps() -> usize {
    12
}

/// OFDM and array parameters of one band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandConfig {
    pub band_id: BandId,
    pub carrier_freq_hz: f64,
    pub bandwidth_hz: f64,
    pub subcarrier_spacing_hz: f64,
    pub n_subcarriers: usize,
    /// Data symbols K_D following the 2*K_P training symbols. Zero for a band
    /// that only carries training.
    pub n_data_symbols: usize,
    pub m_tx: usize,
    pub m_rx: usize,
    #[serde(default = "default_spacing")]
    pub element_spacing_wavelengths: f64,
    pub tx_power_watt: f64,
    pub rms_delay_spread_s: f64,
    #[serde(default = "default_taps")]
    pub n_taps: usize,
}

impl BandConfig {
    pub fn sub6_table1() -> Self {
        BandConfig {
            band_id: BandId::Sub6,
            carrier_freq_hz: 2.55e9,
            bandwidth_hz: 20.16e6,
            subcarrier_spacing_hz: 60e3,
            n_subcarriers: 336,
            n_data_symbols: 0,
            m_tx: 8,
            m_rx: 8,
            element_spacing_wavelengths: 0.5,
            tx_power_watt: 1.0,
            rms_delay_spread_s: 1148e-9,
            n_taps: 12,
        }
    }

    pub fn mmw_table1() -> Self {
        BandConfig {
            band_id: BandId::MmWave,
            carrier_freq_hz: 25.5e9,
            bandwidth_hz: 403.2e6,
            subcarrier_spacing_hz: 120e3,
            n_subcarriers: 3360,
            n_data_symbols: 7,
            m_tx: 8,
            m_rx: 8,
            element_spacing_wavelengths: 0.5,
            tx_power_watt: 1.0,
            rms_delay_spread_s: 841e-9,
            n_taps: 12,
        }
    }

    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_freq_hz
    }

    /// Total OFDM symbols K = 2*K_P + K_D for the given pilot pattern.
    pub fn n_symbols_total(&self, k_p: usize) -> usize {
        2 * k_p + self.n_data_symbols
    }

    /// OFDM symbol duration used for time evolution (1/Δf, CP excluded).
    pub fn symbol_duration_s(&self) -> f64 {
        1.0 / self.subcarrier_spacing_hz
    }

    /// Maximum Doppler shift v/λ for a receiver speed in m/s.
    pub fn max_doppler_hz(&self, velocity_mps: f64) -> f64 {
        velocity_mps / self.wavelength_m()
    }

    /// Keeps Δf and shrinks the band to `n` subcarriers.
    pub fn with_subcarriers(mut self, n: usize) -> Self {
        self.n_subcarriers = n;
        self.bandwidth_hz = n as f64 * self.subcarrier_spacing_hz;
        self
    }

    fn collect_violations(&self, name: &str, k_p: usize, out: &mut Vec<Violation>) {
        let mut push = |field: &str, message: String| {
            out.push(Violation {
                field: format!("{name}.{field}"),
                message,
            })
        };
        for (field, v) in [
            ("carrier_freq_hz", self.carrier_freq_hz),
            ("bandwidth_hz", self.bandwidth_hz),
            ("subcarrier_spacing_hz", self.subcarrier_spacing_hz),
            ("tx_power_watt", self.tx_power_watt),
            ("element_spacing_wavelengths", self.element_spacing_wavelengths),
        ] {
            if !(v.is_finite() && v > 0.0) {
                push(field, format!("must be finite and > 0 (got {v})"));
            }
        }
        if !(self.rms_delay_spread_s.is_finite() && self.rms_delay_spread_s >= 0.0) {
            push(
                "rms_delay_spread_s",
                format!("must be finite and >= 0 (got {})", self.rms_delay_spread_s),
            );
        }
        if self.bandwidth_hz > 0.0 && self.subcarrier_spacing_hz > 0.0 {
            let ratio = self.bandwidth_hz / self.subcarrier_spacing_hz;
            let rounded = ratio.round();
            if (ratio - rounded).abs() > 1e-9 * ratio.max(1.0) {
                push(
                    "bandwidth_hz",
                    format!(
                        "bandwidth / subcarrier spacing = {ratio:.6} is not an integer subcarrier count"
                    ),
                );
            } else if rounded as usize != self.n_subcarriers {
                push(
                    "n_subcarriers",
                    format!(
                        "must equal bandwidth / subcarrier spacing = {rounded} (got {})",
                        self.n_subcarriers
                    ),
                );
            }
        }
        if self.m_tx == 0 {
            push("m_tx", "must be >= 1".into());
        }
        if self.m_rx == 0 {
            push("m_rx", "must be >= 1".into());
        }
        if self.n_taps == 0 {
            push("n_taps", "must be >= 1".into());
        } else if self.n_taps < 2 && self.rms_delay_spread_s > 0.0 {
            push(
                "n_taps",
                "must be >= 2 when rms_delay_spread_s > 0".into(),
            );
        }
        if matches!(k_p, 1 | 2 | 4) {
            for (field, m) in [("m_tx", self.m_tx), ("m_rx", self.m_rx)] {
                if m == 0 {
                    continue;
                }
                if m % k_p != 0 {
                    push(field, format!("K_P must divide {field} (K_P = {k_p}, {field} = {m})"));
                } else if self.n_subcarriers % (m / k_p) != 0 {
                    push(
                        "n_subcarriers",
                        format!(
                            "comb stride {field}/K_P = {} must divide n_subcarriers = {}",
                            m / k_p,
                            self.n_subcarriers
                        ),
                    );
                }
            }
        }
    }
}

/// One experiment point. Large-scale gain is fixed to 1 and average
/// stochastic entry power is 1, so SNR = P_T / σ_w² per band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub k_factor_sub6_db: f64,
    #[serde(default)]
    pub k_factor_scale_db: f64,
    pub snr_db_mmw: f64,
    /// Defaults to `snr_db_mmw + 20` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snr_db_sub6: Option<f64>,
    pub velocity_mps: f64,
    pub pilot_symbols_per_direction: usize,
    pub n_realizations: usize,
    #[serde(serialize_with = "ser_seed", deserialize_with = "de_seed")]
    pub master_seed: u64,
    pub estimation_method: EstimationMethod,
    #[serde(default = "default_sinusoids")]
    pub jakes_sinusoids: usize,
    #[serde(default = "default_angle_grid")]
    pub angle_grid_points: usize,
    pub sub6: BandConfig,
    pub mmw: BandConfig,
}

fn default_sinusoids() -> usize {
    32
}

fn default_angle_grid() -> usize {
    181
}

pub const SCALED_MMW_SUBCARRIERS: usize = 336;

/// Offset of the default sub-6 GHz SNR above the mmWave SNR, in dB.
pub const SUB6_SNR_OFFSET_DB: f64 = 20.0;

impl Default for SimConfig {
    fn default() -> Self {
        Self::table1()
    }
}

impl SimConfig {
    /// Full-size defaults for both bands.
    pub fn table1() -> Self {
        SimConfig {
            k_factor_sub6_db: 0.0,
            k_factor_scale_db: 0.0,
            snr_db_mmw: 0.0,
            snr_db_sub6: None,
            velocity_mps: 0.0,
            pilot_symbols_per_direction: 1,
            n_realizations: 1000,
            master_seed: 42,
            estimation_method: EstimationMethod::Conventional,
            jakes_sinusoids: 32,
            angle_grid_points: 181,
            sub6: BandConfig::sub6_table1(),
            mmw: BandConfig::mmw_table1(),
        }
    }

    /// The defaults with the mmWave band cut to 336 subcarriers at the same
    /// spacing. Used by the presets to keep sweeps tractable.
    pub fn scaled() -> Self {
        let mut c = Self::table1();
        c.mmw = c.mmw.with_subcarriers(SCALED_MMW_SUBCARRIERS);
        c
    }

    pub fn band(&self, id: BandId) -> &BandConfig {
        match id {
            BandId::Sub6 => &self.sub6,
            BandId::MmWave => &self.mmw,
        }
    }

    pub fn k_p(&self) -> usize {
        self.pilot_symbols_per_direction
    }

    pub fn k_factor_sub6_linear(&self) -> f64 {
        db_to_linear(self.k_factor_sub6_db)
    }

    /// κ^(m) = c_κ · κ^(s).
    pub fn k_factor_mmw_linear(&self) -> f64 {
        db_to_linear(self.k_factor_scale_db) * self.k_factor_sub6_linear()
    }

    pub fn k_factor_linear(&self, band: BandId) -> f64 {
        match band {
            BandId::Sub6 => self.k_factor_sub6_linear(),
            BandId::MmWave => self.k_factor_mmw_linear(),
        }
    }

    pub fn snr_db(&self, band: BandId) -> f64 {
        match band {
            BandId::MmWave => self.snr_db_mmw,
            BandId::Sub6 => self
                .snr_db_sub6
                .unwrap_or(self.snr_db_mmw + SUB6_SNR_OFFSET_DB),
        }
    }

    /// σ_w² = P_T / SNR.
    pub fn noise_power(&self, band: BandId) -> f64 {
        self.band(band).tx_power_watt / db_to_linear(self.snr_db(band))
    }

    pub fn velocity_kmh(&self) -> f64 {
        self.velocity_mps * 3.6
    }

    /// Every violated invariant; empty means valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let k_p = self.pilot_symbols_per_direction;
        if !matches!(k_p, 1 | 2 | 4) {
            out.push(Violation::new(
                "pilot_symbols_per_direction",
                format!("K_P must be one of 1, 2, 4 (got {k_p})"),
            ));
            for (name, band) in [("sub6", &self.sub6), ("mmw", &self.mmw)] {
                if k_p > 0 && band.m_tx % k_p != 0 {
                    out.push(Violation::new(
                        &format!("{name}.m_tx"),
                        format!("K_P must divide m_tx (K_P = {k_p}, m_tx = {})", band.m_tx),
                    ));
                }
            }
        }
        self.sub6.collect_violations("sub6", k_p, &mut out);
        self.mmw.collect_violations("mmw", k_p, &mut out);
        if self.sub6.band_id != BandId::Sub6 {
            out.push(Violation::new("sub6.band_id", "must be \"sub6\"".into()));
        }
        if self.mmw.band_id != BandId::MmWave {
            out.push(Violation::new("mmw.band_id", "must be \"mmwave\"".into()));
        }
        if self.mmw.n_data_symbols == 0 {
            out.push(Violation::new(
                "mmw.n_data_symbols",
                "no data symbols remain; must be >= 1".into(),
            ));
        }
        for (field, v) in [
            ("k_factor_sub6_db", self.k_factor_sub6_db),
            ("k_factor_scale_db", self.k_factor_scale_db),
            ("snr_db_mmw", self.snr_db_mmw),
            ("snr_db_sub6", self.snr_db(BandId::Sub6)),
        ] {
            if !v.is_finite() {
                out.push(Violation::new(field, format!("must be finite (got {v})")));
            }
        }
        if !(self.velocity_mps.is_finite() && self.velocity_mps >= 0.0) {
            out.push(Violation::new(
                "velocity_mps",
                format!("must be finite and >= 0 (got {})", self.velocity_mps),
            ));
        }
        if self.n_realizations == 0 {
            out.push(Violation::new("n_realizations", "must be >= 1".into()));
        }
        if self.jakes_sinusoids == 0 {
            out.push(Violation::new("jakes_sinusoids", "must be >= 1".into()));
        }
        if self.angle_grid_points < 3 {
            out.push(Violation::new("angle_grid_points", "must be >= 3".into()));
        }
        out
    }

    /// `Ok(())` when valid, otherwise every violation wrapped in an error.
    pub fn check(&self) -> Result<()> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(v))
        }
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let table: toml::Table = s.parse().map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
        Self::from_table(table)
    }

    pub fn from_table(table: toml::Table) -> Result<Self> {
        SimConfig::deserialize(toml::Value::Table(table)).map_err(|e| {
            Error::InvalidConfig(vec![Violation::new("config", e.to_string())])
        })
    }

    pub fn to_table(&self) -> Result<toml::Table> {
        match toml::Value::try_from(self).map_err(|e| Error::Parse(e.to_string()))? {
            toml::Value::Table(t) => Ok(t),
            _ => unreachable!("SimConfig serializes to a table"),
        }
    }

    /// Applies one `key=value` override, as given on the command line.
    pub fn with_override(&self, key: &str, value: &str) -> Result<Self> {
        let mut table = self.to_table()?;
        apply_override(&mut table, key, value)?;
        Self::from_table(table)
    }
}

/// Sets `key` (dotted path, aliases accepted) in a raw config table.
///
/// Values are parsed as TOML literals; anything that does not parse is taken
/// as a bare string. `velocity_kmh` is converted to `velocity_mps`.
pub fn apply_override(table: &mut toml::Table, key: &str, value: &str) -> Result<()> {
    let mut parsed = parse_value(value);
    let key = key.trim();
    let canonical = match key {
        "velocity_kmh" => {
            let kmh = parsed
                .as_float()
                .or_else(|| parsed.as_integer().map(|i| i as f64))
                .ok_or_else(|| Error::Parse(format!("velocity_kmh expects a number, got '{value}'")))?;
            parsed = toml::Value::Float(kmh / 3.6);
            "velocity_mps"
        }
        "k_factor_db" => "k_factor_sub6_db",
        "snr_db" => "snr_db_mmw",
        "method" => "estimation_method",
        "pilot_k_p" | "k_p" => "pilot_symbols_per_direction",
        "seed" => "master_seed",
        other => other,
    };
    if canonical == "estimation_method" {
        if let Some(s) = parsed.as_str() {
            let m: EstimationMethod = s.parse()?;
            parsed = toml::Value::String(m.as_str().to_string());
        }
    }
    // Float fields given as integer literals.
    if let toml::Value::Integer(i) = parsed {
        if is_float_key(canonical) {
            parsed = toml::Value::Float(i as f64);
        }
    }
    let mut parts = canonical.split('.').peekable();
    let mut cursor = table;
    while let Some(part) = parts.next() {
        if parts.peek().is_none() {
            cursor.insert(part.to_string(), parsed);
            return Ok(());
        }
        cursor = cursor
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| Error::Parse(format!("'{part}' in '{key}' is not a section")))?;
    }
    Err(Error::Parse(format!("empty override key '{key}'")))
}

fn is_float_key(key: &str) -> bool {
    let leaf = key.rsplit('.').next().unwrap_or(key);
    leaf.ends_with("_hz")
        || leaf.ends_with("_db")
        || leaf.ends_with("_mps")
        || leaf.ends_with("_s")
        || leaf.ends_with("_watt")
        || leaf == "element_spacing_wavelengths"
        || leaf == "snr_db_mmw"
        || leaf == "snr_db_sub6"
}

fn parse_value(raw: &str) -> toml::Value {
    let doc = format!("v = {raw}");
    match doc.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.to_string())),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

/// A violated configuration invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl Violation {
    pub fn new(field: &str, message: String) -> Self {
        Violation {
            field: field.to_string(),
            message,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}

// TOML integers are signed 64-bit; larger seeds go through a hex string.
fn ser_seed<S: Serializer>(seed: &u64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if *seed <= i64::MAX as u64 {
        s.serialize_i64(*seed as i64)
    } else {
        s.serialize_str(&format!("{seed:#x}"))
    }
}

fn de_seed<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<u64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Int(i64),
        Str(String),
    }
    match Raw::deserialize(d)? {
        Raw::Int(i) if i >= 0 => Ok(i as u64),
        Raw::Int(i) => Err(serde::de::Error::custom(format!("seed must be >= 0 (got {i})"))),
        Raw::Str(s) => parse_seed(&s).map_err(serde::de::Error::custom),
    }
}

/// Parses a decimal or `0x`-prefixed seed.
pub fn parse_seed(s: &str) -> std::result::Result<u64, String> {
    let s = s.trim();
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse::<u64>(),
    };
    parsed.map_err(|e| format!("invalid seed '{s}': {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table1_defaults_are_valid() {
        assert!(SimConfig::table1().validate().is_empty());
        assert_eq!(BandConfig::sub6_table1().n_subcarriers, 336);
        assert_eq!(BandConfig::mmw_table1().n_subcarriers, 3360);
    }

    #[test]
    fn k_p_must_divide_m_tx() {
        let mut cfg = SimConfig::table1();
        cfg.pilot_symbols_per_direction = 3;
        let v = cfg.validate();
        assert!(v.iter().any(|v| v.message.contains("K_P must divide m_tx")), "{v:?}");
    }

    #[test]
    fn non_integer_subcarrier_count() {
        let mut cfg = SimConfig::table1();
        cfg.sub6.bandwidth_hz = 20e6;
        let v = cfg.validate();
        assert!(v.iter().any(|v| v.field == "sub6.bandwidth_hz"), "{v:?}");
    }

    #[test]
    fn wavelengths_match_table() {
        let cfg = SimConfig::table1();
        assert!((cfg.sub6.wavelength_m() - 0.1176).abs() < 5e-5);
        assert!((cfg.mmw.wavelength_m() - 0.01176).abs() < 5e-6);
    }

    #[test]
    fn noise_power_from_snr() {
        let mut cfg = SimConfig::table1();
        cfg.snr_db_mmw = 10.0;
        assert!((cfg.noise_power(BandId::MmWave) - 0.1).abs() < 1e-15);
        assert!((cfg.noise_power(BandId::Sub6) - 0.001).abs() < 1e-15);
        cfg.snr_db_sub6 = Some(0.0);
        assert!((cfg.noise_power(BandId::Sub6) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn k_factor_scaling() {
        let mut cfg = SimConfig::table1();
        cfg.k_factor_sub6_db = 10.0;
        cfg.k_factor_scale_db = 3.0;
        let expected = 10.0 * db_to_linear(3.0);
        assert!((cfg.k_factor_mmw_linear() - expected).abs() < 1e-12);
    }

    #[test]
    fn toml_round_trip() {
        let mut cfg = SimConfig::table1();
        cfg.master_seed = u64::MAX - 7;
        cfg.velocity_mps = 100.0 / 3.6;
        cfg.snr_db_sub6 = Some(17.25);
        let text = cfg.to_toml_string().unwrap();
        let back = SimConfig::from_toml_str(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn unknown_keys_rejected() {
        let mut text = SimConfig::table1().to_toml_string().unwrap();
        text = format!("bogus_key = 1\n{text}");
        match SimConfig::from_toml_str(&text) {
            Err(Error::InvalidConfig(v)) => assert!(v[0].message.contains("bogus_key")),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn overrides_and_aliases() {
        let cfg = SimConfig::table1()
            .with_override("velocity_kmh", "36")
            .unwrap()
            .with_override("method", "ooba")
            .unwrap()
            .with_override("mmw.rms_delay_spread_s", "0")
            .unwrap()
            .with_override("k_factor_db", "20")
            .unwrap();
        assert!((cfg.velocity_mps - 10.0).abs() < 1e-12);
        assert_eq!(cfg.estimation_method, EstimationMethod::OobaMrc);
        assert_eq!(cfg.mmw.rms_delay_spread_s, 0.0);
        assert_eq!(cfg.k_factor_sub6_db, 20.0);
        assert!(SimConfig::table1().with_override("nope", "1").is_err());
    }
}
