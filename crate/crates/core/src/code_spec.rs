//! Polar code definition: frozen-set construction, GF(2) encoding and CRC
//! attachment.

use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::Deref;
use std::str::FromStr;

use crate::error::{param, Error, Result};

/// A sequence of GF(2) elements stored one per byte.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitVector(Vec<u8>);

impl BitVector {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if let Some(pos) = bits.iter().position(|&b| b > 1) {
            return param(format!("bit {pos} has value {} (expected 0 or 1)", bits[pos]));
        }
        Ok(Self(bits))
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0; len])
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        Self(bits.iter().map(|&b| u8::from(b)).collect())
    }

    /// Parses a string of `0`/`1` characters.
    pub fn from_bit_str(s: &str) -> Result<Self> {
        s.chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::Parse(format!("unexpected character {other:?} in bit string"))),
            })
            .collect::<Result<Vec<u8>>>()
            .map(Self)
    }

    /// Parses a hex string into bits, most significant bit of each digit first.
    /// The result is truncated to `len` bits.
    pub fn from_hex(s: &str, len: usize) -> Result<Self> {
        let digits = s.trim().trim_start_matches("0x");
        if digits.len() * 4 < len {
            return param(format!("hex string carries {} bits, need {len}", digits.len() * 4));
        }
        let mut bits = Vec::with_capacity(digits.len() * 4);
        for c in digits.chars() {
            let d = c
                .to_digit(16)
                .ok_or_else(|| Error::Parse(format!("invalid hex digit {c:?}")))?;
            bits.extend((0..4).rev().map(|s| ((d >> s) & 1) as u8));
        }
        bits.truncate(len);
        Ok(Self(bits))
    }

    /// Hex rendering, zero-padded on the right to a whole number of digits.
    pub fn to_hex(&self) -> String {
        self.0
            .chunks(4)
            .map(|chunk| {
                let d = chunk.iter().enumerate().fold(0u32, |acc, (i, &b)| acc | (u32::from(b) << (3 - i)));
                char::from_digit(d, 16).unwrap()
            })
            .collect()
    }

    pub fn into_inner(self) -> Vec<u8> {
        self.0
    }

    pub fn xor(&self, other: &Self) -> Result<Self> {
        if self.len() != other.len() {
            return param(format!("xor of lengths {} and {}", self.len(), other.len()));
        }
        Ok(Self(self.0.iter().zip(&other.0).map(|(a, b)| a ^ b).collect()))
    }
}

impl Deref for BitVector {
    type Target = [u8];

    fn deref(&self) -> &[u8] {
        &self.0
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.0.iter().map(|&b| if b == 1 { '1' } else { '0' }).collect();
        write!(f, "BitVector({s})")
    }
}

/// CRC generator polynomial. `value` holds every coefficient including the
/// leading `x^degree` term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CrcPoly {
    degree: usize,
    value: u64,
}

impl CrcPoly {
    pub const MAX_DEGREE: usize = 32;

    /// x^8 + x^2 + x + 1.
    pub const CRC8: CrcPoly = CrcPoly { degree: 8, value: 0x107 };

    /// The trivial polynomial `1`: no CRC bits, every word passes.
    pub const NONE: CrcPoly = CrcPoly { degree: 0, value: 1 };

    pub fn from_value(value: u64) -> Result<Self> {
        if value == 0 {
            return param("CRC polynomial must be nonzero");
        }
        let degree = 63 - value.leading_zeros() as usize;
        if degree > Self::MAX_DEGREE {
            return param(format!("CRC degree {degree} exceeds {}", Self::MAX_DEGREE));
        }
        if value & 1 == 0 {
            return param("CRC polynomial must have a nonzero constant term");
        }
        Ok(Self { degree, value })
    }

    /// Coefficients from the highest degree down to the constant term.
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        let first = bits.iter().position(|&b| b == 1).ok_or_else(|| Error::Parameter("CRC polynomial must be nonzero".into()))?;
        let value = bits[first..].iter().fold(0u64, |acc, &b| (acc << 1) | u64::from(b & 1));
        Self::from_value(value)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    /// Remainder of `bits(x) * x^degree` modulo the polynomial, as `degree`
    /// bits, most significant first.
    pub fn remainder(&self, bits: &[u8]) -> Vec<u8> {
        let c = self.degree;
        if c == 0 {
            return Vec::new();
        }
        let mask = (1u64 << c) - 1;
        let low = self.value & mask;
        let mut reg = 0u64;
        for &b in bits {
            let feedback = ((reg >> (c - 1)) & 1) ^ u64::from(b);
            reg = (reg << 1) & mask;
            if feedback == 1 {
                reg ^= low;
            }
        }
        (0..c).rev().map(|s| ((reg >> s) & 1) as u8).collect()
    }
}

impl Default for CrcPoly {
    fn default() -> Self {
        Self::CRC8
    }
}

impl FromStr for CrcPoly {
    type Err = Error;

    /// Accepts `0x107` style hex or a plain decimal value.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let value = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
            Some(hex) => u64::from_str_radix(hex, 16),
            None => s.parse(),
        }
        .map_err(|e| Error::Parse(format!("CRC polynomial {s:?}: {e}")))?;
        Self::from_value(value)
    }
}

impl fmt::Display for CrcPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#x}", self.value)
    }
}

/// Appends the CRC remainder of `info` to it.
pub fn crc_attach(info: &BitVector, poly: &CrcPoly) -> BitVector {
    let mut out = info.to_vec();
    out.extend(poly.remainder(info));
    BitVector(out)
}

/// True iff `word` (information bits followed by `degree` CRC bits) is a
/// multiple of the polynomial.
pub fn crc_check(word: &[u8], poly: &CrcPoly) -> bool {
    let c = poly.degree();
    if word.len() < c {
        return false;
    }
    let (info, tail) = word.split_at(word.len() - c);
    poly.remainder(info) == tail
}

/// The static definition of a CRC-concatenated polar code PC(N, K).
#[derive(Clone, Debug, PartialEq)]
pub struct CodeSpec {
    n: u32,
    k: usize,
    c: usize,
    frozen_mask: Vec<bool>,
    crc_poly: CrcPoly,
    design_snr_db: f64,
    info_indices: Vec<usize>,
}

impl CodeSpec {
    /// Builds a code from an explicit frozen mask.
    pub fn new(n: u32, k: usize, frozen_mask: Vec<bool>, crc_poly: CrcPoly, design_snr_db: f64) -> Result<Self> {
        if n == 0 || n > 24 {
            return param(format!("log2 code length {n} out of range 1..=24"));
        }
        let len = 1usize << n;
        let c = crc_poly.degree();
        if k == 0 {
            return param("K must be positive");
        }
        if k + c > len {
            return param(format!("K + C = {} exceeds N = {len}", k + c));
        }
        if frozen_mask.len() != len {
            return param(format!("frozen mask has {} entries, expected {len}", frozen_mask.len()));
        }
        let info_indices: Vec<usize> = frozen_mask
            .iter()
            .enumerate()
            .filter_map(|(i, &f)| (!f).then_some(i))
            .collect();
        if info_indices.len() != k + c {
            return param(format!(
                "frozen mask leaves {} positions unfrozen, expected K + C = {}",
                info_indices.len(),
                k + c
            ));
        }
        Ok(Self { n, k, c, frozen_mask, crc_poly, design_snr_db, info_indices })
    }

    /// Builds a code whose frozen set comes from Gaussian-approximation
    /// density evolution at `design_snr_db`.
    pub fn construct(n: u32, k: usize, crc_poly: CrcPoly, design_snr_db: f64) -> Result<Self> {
        let mask = construct_frozen_set(n, k + crc_poly.degree(), design_snr_db)?;
        Self::new(n, k, mask, crc_poly, design_snr_db)
    }

    /// Log2 of the code length.
    pub fn n(&self) -> u32 {
        self.n
    }

    /// Code length N.
    pub fn len(&self) -> usize {
        1 << self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn c(&self) -> usize {
        self.c
    }

    /// K + C, the number of unfrozen positions.
    pub fn non_frozen_count(&self) -> usize {
        self.k + self.c
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.len() as f64
    }

    pub fn frozen_mask(&self) -> &[bool] {
        &self.frozen_mask
    }

    pub fn is_frozen(&self, index: usize) -> bool {
        self.frozen_mask[index]
    }

    pub fn crc_poly(&self) -> &CrcPoly {
        &self.crc_poly
    }

    pub fn design_snr_db(&self) -> f64 {
        self.design_snr_db
    }

    /// Unfrozen leaf indices in ascending order; position in this slice is the
    /// unfrozen rank.
    pub fn info_indices(&self) -> &[usize] {
        &self.info_indices
    }

    /// Unfrozen rank of a leaf index, if it is unfrozen.
    pub fn rank_of(&self, leaf: usize) -> Option<usize> {
        self.info_indices.binary_search(&leaf).ok()
    }

    /// Stable identifier of the code structure (length, K, CRC, frozen set).
    pub fn fingerprint(&self) -> String {
        let mut h = DefaultHasher::new();
        self.n.hash(&mut h);
        self.k.hash(&mut h);
        self.crc_poly.hash(&mut h);
        self.frozen_mask.hash(&mut h);
        format!("PC({},{})+crc{}:{:016x}", self.len(), self.k, self.c, h.finish())
    }

    /// Spreads K + C bits over the unfrozen positions of a length-N vector.
    pub fn embed(&self, message_with_crc: &[u8]) -> Result<BitVector> {
        if message_with_crc.len() != self.non_frozen_count() {
            return param(format!(
                "message has {} bits, expected K + C = {}",
                message_with_crc.len(),
                self.non_frozen_count()
            ));
        }
        let mut u = vec![0u8; self.len()];
        for (&pos, &b) in self.info_indices.iter().zip(message_with_crc) {
            u[pos] = b;
        }
        Ok(BitVector(u))
    }

    /// Reads the unfrozen positions of a length-N vector.
    pub fn extract(&self, u: &[u8]) -> BitVector {
        BitVector(self.info_indices.iter().map(|&i| u[i]).collect())
    }
}

/// In-place multiplication by the n-fold Kronecker power of [[1,0],[1,1]].
/// The transform is its own inverse.
pub fn polar_transform(x: &mut [u8]) {
    let len = x.len();
    debug_assert!(len.is_power_of_two());
    let mut half = 1;
    while half < len {
        for block in x.chunks_mut(2 * half) {
            let (a, b) = block.split_at_mut(half);
            for (ai, bi) in a.iter_mut().zip(b.iter()) {
                *ai ^= *bi;
            }
        }
        half *= 2;
    }
}

/// Encodes K + C bits into an N-bit codeword.
pub fn encode(message_with_crc: &[u8], spec: &CodeSpec) -> Result<BitVector> {
    let mut u = spec.embed(message_with_crc)?;
    polar_transform(&mut u.0);
    Ok(u)
}

/// Frozen mask (true = frozen) keeping the `non_frozen_count` most reliable
/// synthetic channels.
///
/// Reliabilities are the LLR means of Gaussian-approximation density
/// evolution. The design point is a channel SNR `1/sigma^2` (not Eb/N0), so
/// the BPSK channel LLR mean is `2 * 10^(snr/10)`.
pub fn construct_frozen_set(n: u32, non_frozen_count: usize, design_snr_db: f64) -> Result<Vec<bool>> {
    if n == 0 || n > 24 {
        return param(format!("log2 code length {n} out of range 1..=24"));
    }
    let len = 1usize << n;
    if non_frozen_count > len {
        return param(format!("{non_frozen_count} unfrozen positions exceed N = {len}"));
    }
    if !design_snr_db.is_finite() {
        return param("design SNR must be finite");
    }
    let m0 = 2.0 * 10f64.powf(design_snr_db / 10.0);
    let means = ga_means(n, m0);
    let mut order: Vec<usize> = (0..len).collect();
    // Most reliable first; on equal means prefer the larger index.
    order.sort_by(|&a, &b| means[b].total_cmp(&means[a]).then(b.cmp(&a)));
    let mut mask = vec![true; len];
    for &i in &order[..non_frozen_count] {
        mask[i] = false;
    }
    Ok(mask)
}

/// Density-evolution LLR means of the N synthetic channels, natural index
/// order.
fn ga_means(n: u32, m0: f64) -> Vec<f64> {
    let mut means = vec![m0];
    for _ in 0..n {
        means = means
            .iter()
            .flat_map(|&m| [check_node_mean(m), 2.0 * m])
            .collect();
    }
    means
}

/// ln phi(x) with Chung's two-piece approximation, clamped to phi <= 1.
fn ln_phi(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x < 10.0 {
        (-0.4527 * x.powf(0.86) + 0.0218).min(0.0)
    } else {
        0.5 * (std::f64::consts::PI / x).ln() - x / 4.0 + (1.0 - 10.0 / (7.0 * x)).ln()
    }
}

/// Mean of the check-node combination of two channels with mean `m`:
/// phi^-1(1 - (1 - phi(m))^2), evaluated in the log domain.
fn check_node_mean(m: f64) -> f64 {
    let lp = ln_phi(m);
    let target = lp + (2.0 - lp.exp()).ln();
    if target >= 0.0 {
        return 0.0;
    }
    let mut hi = m.max(1.0);
    while ln_phi(hi) > target {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ln_phi(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}
