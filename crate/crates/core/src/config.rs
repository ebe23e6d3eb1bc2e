//! TOML run configuration. Every field has a default and every field can be
//! overridden from the command line.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::code_spec::{CodeSpec, CrcPoly};
use crate::cost::CostWeights;
use crate::error::{param, Error, Result};
use crate::flip::EisScaling;
use crate::io;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub frames: u64,
    /// Early stop after this many frame errors; 0 disables.
    pub max_errors: u64,
    pub code: CodeConfig,
    pub channel: ChannelSection,
    pub decoder: DecoderConfig,
    pub cost: CostSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            frames: 100_000,
            max_errors: 200,
            code: CodeConfig::default(),
            channel: ChannelSection::default(),
            decoder: DecoderConfig::default(),
            cost: CostSection::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CodeConfig {
    /// Codeword length N.
    pub length: usize,
    pub k: usize,
    /// CRC generator, e.g. `"0x107"`; `"0x1"` disables the CRC.
    pub crc_poly: String,
    pub design_snr_db: f64,
    /// Frozen-mask CSV replacing the density-evolution construction.
    pub mask: Option<PathBuf>,
}

impl Default for CodeConfig {
    fn default() -> Self {
        Self { length: 1024, k: 170, crc_poly: CrcPoly::CRC8.to_string(), design_snr_db: 2.5, mask: None }
    }
}

impl CodeConfig {
    pub fn build(&self) -> Result<CodeSpec> {
        if !self.length.is_power_of_two() || self.length < 2 {
            return param(format!("code length {} is not a power of two >= 2", self.length));
        }
        let n = self.length.trailing_zeros();
        let poly: CrcPoly = self.crc_poly.parse()?;
        match &self.mask {
            Some(path) => {
                let file = std::fs::File::open(path).map_err(|e| Error::Parameter(format!("mask {}: {e}", path.display())))?;
                let mask = io::read_mask(file)?;
                CodeSpec::new(n, self.k, mask, poly, self.design_snr_db)
            }
            None => CodeSpec::construct(n, self.k, poly, self.design_snr_db),
        }
    }
}

/// Which rate turns Eb/N0 into a noise level.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateConvention {
    /// K / N; CRC bits count as overhead.
    #[default]
    Info,
    /// (K + C) / N.
    InfoPlusCrc,
}

impl RateConvention {
    pub fn rate(self, spec: &CodeSpec) -> f64 {
        match self {
            RateConvention::Info => spec.k() as f64 / spec.len() as f64,
            RateConvention::InfoPlusCrc => spec.non_frozen_count() as f64 / spec.len() as f64,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelSection {
    pub rate: RateConvention,
    /// Single point; ignored when `ebn0_range` is set.
    pub ebn0_db: f64,
    /// `start:stop:step`, inclusive of `stop`.
    pub ebn0_range: Option<String>,
}

impl Default for ChannelSection {
    fn default() -> Self {
        Self { rate: RateConvention::Info, ebn0_db: 2.5, ebn0_range: None }
    }
}

impl ChannelSection {
    pub fn points(&self) -> Result<Vec<f64>> {
        match &self.ebn0_range {
            Some(r) => parse_range(r),
            None => Ok(vec![self.ebn0_db]),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecoderConfig {
    pub name: String,
    pub t_max: usize,
    pub plan: Option<PathBuf>,
    pub eis_scaling: EisScaling,
    /// Corrections the oracle may make in FER runs; 0 means unlimited.
    pub oracle_budget: usize,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        Self { name: "scflip".into(), t_max: 10, plan: None, eis_scaling: EisScaling::Divide, oracle_budget: 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostSection {
    pub pe: u32,
    pub q: u32,
    pub t_max: u32,
    pub weights: CostWeights,
}

impl Default for CostSection {
    fn default() -> Self {
        Self { pe: 32, q: 6, t_max: 10, weights: CostWeights::default() }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Parameter(format!("config {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Hash of the resolved configuration, for reproducibility headers.
    pub fn hash(&self) -> String {
        let mut h = DefaultHasher::new();
        self.to_toml().hash(&mut h);
        format!("{:016x}", h.finish())
    }
}

/// Parses `start:stop:step` into an inclusive list of points.
pub fn parse_range(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let [start, stop, step] = parts.as_slice() else {
        return Err(Error::Parse(format!("range {s:?} is not start:stop:step")));
    };
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| Error::Parse(format!("range {s:?}: {e}")));
    let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
    if step.is_nan() || step <= 0.0 || stop < start || !start.is_finite() || !stop.is_finite() {
        return Err(Error::Parse(format!("range {s:?} needs start <= stop and step > 0")));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    // Round to suppress accumulated representation noise in the printed dB.
    Ok((0..count).map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = RunConfig::default();
        assert_eq!(RunConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
        assert_eq!(cfg.hash(), RunConfig::default().hash());
    }

    #[test]
    fn partial_file_keeps_defaults() {
        let cfg = RunConfig::from_toml("seed = 9\n[code]\nk = 64\nlength = 256\n[decoder]\nname = \"eis\"\neis_scaling = \"one_minus_weight\"\n").unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.code.k, 64);
        assert_eq!(cfg.code.crc_poly, "0x107");
        assert_eq!(cfg.decoder.eis_scaling, EisScaling::OneMinusWeight);
        let spec = cfg.code.build().unwrap();
        assert_eq!((spec.len(), spec.k(), spec.c()), (256, 64, 8));
    }

    #[test]
    fn bad_config_is_rejected() {
        assert!(RunConfig::from_toml("sed = 1").is_err());
        assert!(RunConfig::from_toml("[code]\nlength = \"x\"").is_err());
        let c = CodeConfig { length: 1000, ..Default::default() };
        assert!(c.build().is_err());
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("2:3:0.5").unwrap(), vec![2.0, 2.5, 3.0]);
        assert_eq!(parse_range("1:1.3:0.1").unwrap(), vec![1.0, 1.1, 1.2, 1.3]);
        assert!(parse_range("3:2:0.5").is_err());
        assert!(parse_range("1:2").is_err());
        assert!(parse_range("1:2:0").is_err());
    }
}
