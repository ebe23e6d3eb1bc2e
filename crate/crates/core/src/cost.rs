//! Logic-cost estimate of a semi-parallel SC-Flip decoder, with and without
//! the runtime sorter that fixed index selection removes.

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};

/// Unit cost of each basic block.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CostWeights {
    pub xor: f64,
    pub mux: f64,
    /// Adder; the "Sum" rows.
    pub sum: f64,
    pub comparator: f64,
    /// D flip-flop storage.
    pub register: f64,
}

impl Default for CostWeights {
    fn default() -> Self {
        Self { xor: 1.0, mux: 3.0, sum: 5.0, comparator: 5.0, register: 4.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    /// Parallel processing elements.
    pub pe: u32,
    /// LLR quantization bits.
    pub q: u32,
    pub t_max: u32,
    #[serde(default)]
    pub weights: CostWeights,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostBreakdown {
    pub f: f64,
    pub g: f64,
    pub c: f64,
    pub sorter: f64,
    pub scflip_total: f64,
    pub fis_total: f64,
    /// Share of the SC-Flip total taken by the sorter.
    pub sorter_fraction: f64,
}

impl CostModel {
    pub fn new(pe: u32, q: u32, t_max: u32) -> Self {
        Self { pe, q, t_max, weights: CostWeights::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.pe == 0 || self.q == 0 {
            return param("Pe and Q must be positive");
        }
        let w = &self.weights;
        if [w.xor, w.mux, w.sum, w.comparator, w.register].iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return param("unit costs must be finite and non-negative");
        }
        Ok(())
    }
}

pub fn estimate_cost(model: &CostModel) -> Result<CostBreakdown> {
    model.validate()?;
    let w = &model.weights;
    let (pe, q, t) = (f64::from(model.pe), f64::from(model.q), f64::from(model.t_max));

    let f = pe * q * w.comparator + 2.0 * pe * w.xor + pe * q * w.mux;
    let g = pe * q * w.sum + pe * w.mux;
    let c = pe * w.mux;
    let sorter = t * q * w.register + t * q * w.comparator + 2.0 * t * q * w.mux;

    let fis_total = f + g + c;
    let scflip_total = fis_total + sorter;
    let sorter_fraction = if scflip_total > 0.0 { sorter / scflip_total } else { 0.0 };
    Ok(CostBreakdown { f, g, c, sorter, scflip_total, fis_total, sorter_fraction })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_configuration() {
        let b = estimate_cost(&CostModel::new(32, 6, 10)).unwrap();
        assert_eq!((b.f, b.g, b.c, b.sorter), (1600.0, 1056.0, 96.0, 900.0));
        assert_eq!(b.scflip_total, 3652.0);
        assert!((b.sorter_fraction - 0.246).abs() < 5e-4);
    }

    #[test]
    fn no_flips_no_sorter() {
        let b = estimate_cost(&CostModel::new(32, 6, 0)).unwrap();
        assert_eq!(b.sorter_fraction, 0.0);
        assert_eq!(b.fis_total, b.scflip_total);
    }

    #[test]
    fn unit_everything() {
        let ones = CostWeights { xor: 1.0, mux: 1.0, sum: 1.0, comparator: 1.0, register: 1.0 };
        let b = estimate_cost(&CostModel { pe: 1, q: 1, t_max: 1, weights: ones }).unwrap();
        assert_eq!((b.f, b.g, b.c, b.sorter, b.scflip_total), (4.0, 2.0, 1.0, 4.0, 11.0));
    }

    #[test]
    fn rejects_degenerate_models() {
        assert!(estimate_cost(&CostModel::new(0, 6, 10)).is_err());
        let mut m = CostModel::new(1, 1, 1);
        m.weights.mux = -1.0;
        assert!(estimate_cost(&m).is_err());
    }
}
