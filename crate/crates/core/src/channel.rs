//! BPSK over AWGN and LLR demapping.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::sc_kernel::LlrFrame;

/// LLR magnitude used in place of `2y/sigma^2` on a noiseless channel.
pub const LLR_SATURATION: f64 = 1e6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub ebn0_db: f64,
    /// Rate used to convert Eb/N0 into a noise level.
    pub rate: f64,
    pub seed: u64,
    /// Skip the noise entirely and feed saturated LLRs.
    #[serde(default)]
    pub noiseless: bool,
}

impl ChannelConfig {
    pub fn new(ebn0_db: f64, rate: f64, seed: u64) -> Result<Self> {
        let cfg = Self { ebn0_db, rate, seed, noiseless: false };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn noiseless(rate: f64, seed: u64) -> Self {
        Self { ebn0_db: f64::INFINITY, rate, seed, noiseless: true }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rate > 0.0 && self.rate <= 1.0) {
            return param(format!("rate {} outside (0, 1]", self.rate));
        }
        if !self.noiseless && !self.ebn0_db.is_finite() {
            return param("Eb/N0 must be finite");
        }
        Ok(())
    }

    /// Noise standard deviation; zero on a noiseless channel.
    pub fn sigma(&self) -> Result<f64> {
        if self.noiseless {
            Ok(0.0)
        } else {
            ebn0_to_sigma(self.ebn0_db, self.rate)
        }
    }

    /// Independent stream for frame `frame_index`. The same (seed, frame)
    /// always yields the same stream, whichever worker draws it.
    pub fn frame_rng(&self, frame_index: u64) -> ChaCha8Rng {
        frame_rng(self.seed, frame_index)
    }
}

pub fn frame_rng(seed: u64, frame_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(frame_index);
    rng
}

/// 0 -> +1, 1 -> -1.
pub fn modulate(x: &[u8]) -> Vec<f64> {
    x.iter().map(|&b| 1.0 - 2.0 * f64::from(b)).collect()
}

pub fn ebn0_to_sigma(ebn0_db: f64, rate: f64) -> Result<f64> {
    if rate <= 0.0 || rate.is_nan() {
        return param(format!("rate must be positive, got {rate}"));
    }
    Ok((1.0 / (2.0 * rate * 10f64.powf(ebn0_db / 10.0))).sqrt())
}

/// Adds i.i.d. N(0, sigma^2) noise drawn from `rng`.
pub fn transmit<R: Rng + ?Sized>(s: &[f64], sigma: f64, rng: &mut R) -> Vec<f64> {
    if sigma == 0.0 {
        return s.to_vec();
    }
    s.iter()
        .map(|&v| {
            let n: f64 = rng.sample(StandardNormal);
            v + sigma * n
        })
        .collect()
}

/// `2y / sigma^2`; positive favours bit 0.
pub fn demap_llr(y: &[f64], sigma: f64) -> Result<LlrFrame> {
    if sigma <= 0.0 || sigma.is_nan() {
        return param(format!("demapping needs sigma > 0, got {sigma}; use saturated_llrs for a noiseless channel"));
    }
    let scale = 2.0 / (sigma * sigma);
    LlrFrame::new(y.iter().map(|&v| scale * v).collect())
}

/// Hard-decision LLRs of magnitude [`LLR_SATURATION`].
pub fn saturated_llrs(s: &[f64]) -> LlrFrame {
    LlrFrame::new(s.iter().map(|&v| if v < 0.0 { -LLR_SATURATION } else { LLR_SATURATION }).collect())
        .expect("saturated LLRs are finite")
}

/// BPSK, noise and demapping for one codeword.
pub fn channel_llrs<R: Rng + ?Sized>(codeword: &[u8], sigma: f64, rng: &mut R) -> Result<LlrFrame> {
    let s = modulate(codeword);
    if sigma == 0.0 {
        Ok(saturated_llrs(&s))
    } else {
        demap_llr(&transmit(&s, sigma, rng), sigma)
    }
}
