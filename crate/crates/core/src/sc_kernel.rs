//! Successive-cancellation decoding as a depth-first traversal of the
//! decoding tree, left branch first.

use std::collections::BTreeMap;
use std::ops::Deref;

use crate::code_spec::{BitVector, CodeSpec};
use crate::error::{param, Result};

/// Soft values in the natural-log LLR domain, ln P(0)/P(1).
#[derive(Clone, Debug, PartialEq, Default)]
pub struct LlrFrame(Vec<f64>);

impl LlrFrame {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return param(format!("LLR {i} is not finite ({})", values[i]));
        }
        Ok(Self(values))
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for LlrFrame {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Left-child LLR: sign product times minimum magnitude, with sgn(0) = +1.
#[inline]
pub fn f_op(a: f64, b: f64) -> f64 {
    let mag = a.abs().min(b.abs());
    if (a < 0.0) != (b < 0.0) {
        -mag
    } else {
        mag
    }
}

/// Right-child LLR given the left partial sum.
#[inline]
pub fn g_op(a: f64, b: f64, beta_left: u8) -> f64 {
    if beta_left == 0 {
        b + a
    } else {
        b - a
    }
}

/// Partial-sum combination: `[left ^ right, right]`.
pub fn combine(beta_left: &[u8], beta_right: &[u8]) -> Result<BitVector> {
    if beta_left.len() != beta_right.len() {
        return param(format!("combine of lengths {} and {}", beta_left.len(), beta_right.len()));
    }
    let mut out: Vec<u8> = beta_left.iter().zip(beta_right).map(|(l, r)| l ^ r).collect();
    out.extend_from_slice(beta_right);
    BitVector::new(out)
}

/// Hook consulted at every unfrozen leaf. Frozen leaves always decide 0 and
/// never reach the decider.
pub trait LeafDecider {
    /// `hard` is the free decision (0 iff `llr >= 0`); the return value is
    /// the bit actually committed.
    fn decide(&mut self, index: usize, llr: f64, hard: u8) -> u8;
}

/// Free decisions everywhere.
#[derive(Clone, Copy, Debug, Default)]
pub struct Free;

impl LeafDecider for Free {
    fn decide(&mut self, _index: usize, _llr: f64, hard: u8) -> u8 {
        hard
    }
}

/// Leaf index -> forced bit value.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ForcedDecisions(BTreeMap<usize, u8>);

impl ForcedDecisions {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(index: usize, bit: u8) -> Self {
        Self(BTreeMap::from([(index, bit & 1)]))
    }

    pub fn insert(&mut self, index: usize, bit: u8) {
        self.0.insert(index, bit & 1);
    }

    pub fn get(&self, index: usize) -> Option<u8> {
        self.0.get(&index).copied()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, u8)> + '_ {
        self.0.iter().map(|(&i, &b)| (i, b))
    }

    pub fn validate(&self, spec: &CodeSpec) -> Result<()> {
        for (i, _) in self.iter() {
            if i >= spec.len() || spec.is_frozen(i) {
                return param(format!("forced decision at leaf {i}, which is frozen or out of range"));
            }
        }
        Ok(())
    }
}

impl LeafDecider for &ForcedDecisions {
    fn decide(&mut self, index: usize, _llr: f64, hard: u8) -> u8 {
        self.get(index).unwrap_or(hard)
    }
}

/// Output of one SC pass.
#[derive(Clone, Debug, PartialEq)]
pub struct ScResult {
    /// Estimated input vector u, length N.
    pub u_hat: BitVector,
    /// Decision LLR at every leaf, frozen ones included.
    pub leaf_llrs: LlrFrame,
    /// `u_hat` at the unfrozen positions, K + C bits.
    pub info_hat: BitVector,
}

/// Reusable SC decoder with one LLR and one partial-sum buffer per tree
/// stage. Stage `s` buffers hold `2^s` entries; stage `n` is the root.
#[derive(Clone, Debug)]
pub struct ScDecoder {
    n: u32,
    alpha: Vec<Vec<f64>>,
    beta: Vec<Vec<u8>>,
    u_hat: Vec<u8>,
    leaf_llrs: Vec<f64>,
}

impl ScDecoder {
    pub fn new(n: u32) -> Self {
        let alpha = (0..=n).map(|s| vec![0.0; 1 << s]).collect();
        let beta = (0..=n).map(|s| vec![0; 1 << s]).collect();
        Self { n, alpha, beta, u_hat: vec![0; 1 << n], leaf_llrs: vec![0.0; 1 << n] }
    }

    pub fn for_spec(spec: &CodeSpec) -> Self {
        Self::new(spec.n())
    }

    /// Plain SC with the given forced decisions.
    pub fn decode(&mut self, channel_llrs: &[f64], spec: &CodeSpec, forced: &ForcedDecisions) -> Result<ScResult> {
        forced.validate(spec)?;
        self.decode_with(channel_llrs, spec, &mut &*forced)
    }

    /// SC pass where every unfrozen decision goes through `decider`.
    pub fn decode_with<D: LeafDecider>(&mut self, channel_llrs: &[f64], spec: &CodeSpec, decider: &mut D) -> Result<ScResult> {
        if spec.n() != self.n {
            *self = Self::new(spec.n());
        }
        if channel_llrs.len() != spec.len() {
            return param(format!("{} channel LLRs for a length-{} code", channel_llrs.len(), spec.len()));
        }
        self.alpha[self.n as usize].copy_from_slice(channel_llrs);
        self.node(self.n as usize, 0, spec.frozen_mask(), decider);
        Ok(ScResult {
            u_hat: BitVector::new(self.u_hat.clone())?,
            leaf_llrs: LlrFrame(self.leaf_llrs.clone()),
            info_hat: spec.extract(&self.u_hat),
        })
    }

    fn node<D: LeafDecider>(&mut self, stage: usize, offset: usize, frozen: &[bool], decider: &mut D) {
        if stage == 0 {
            let llr = self.alpha[0][0];
            let bit = if frozen[offset] {
                0
            } else {
                let hard = u8::from(llr < 0.0);
                decider.decide(offset, llr, hard) & 1
            };
            self.leaf_llrs[offset] = llr;
            self.u_hat[offset] = bit;
            self.beta[0][0] = bit;
            return;
        }
        let half = 1usize << (stage - 1);

        {
            let (lower, upper) = self.alpha.split_at_mut(stage);
            let (parent, child) = (&upper[0], &mut lower[stage - 1]);
            for i in 0..half {
                child[i] = f_op(parent[i], parent[i + half]);
            }
        }
        self.node(stage - 1, offset, frozen, decider);

        {
            let (lower, upper) = self.alpha.split_at_mut(stage);
            let (parent, child) = (&upper[0], &mut lower[stage - 1]);
            let beta_left = &self.beta[stage - 1];
            for i in 0..half {
                child[i] = g_op(parent[i], parent[i + half], beta_left[i]);
            }
        }
        {
            let (lower, upper) = self.beta.split_at_mut(stage);
            upper[0][..half].copy_from_slice(&lower[stage - 1]);
        }
        self.node(stage - 1, offset + half, frozen, decider);

        let (lower, upper) = self.beta.split_at_mut(stage);
        let (own, right) = (&mut upper[0], &lower[stage - 1]);
        for (o, r) in own[..half].iter_mut().zip(right) {
            *o ^= r;
        }
        own[half..2 * half].copy_from_slice(&right[..half]);
    }
}

/// One-shot SC decode with a throwaway decoder.
pub fn sc_decode(channel_llrs: &[f64], spec: &CodeSpec, forced: &ForcedDecisions) -> Result<ScResult> {
    ScDecoder::for_spec(spec).decode(channel_llrs, spec, forced)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code_spec::{encode, CrcPoly};

    #[test]
    fn f_op_examples() {
        assert_eq!(f_op(2.0, 3.0), 2.0);
        assert_eq!(f_op(-2.0, 3.0), -2.0);
        assert_eq!(f_op(-2.0, -3.0), 2.0);
        for x in [-4.0, 0.0, 7.5] {
            assert_eq!(f_op(0.0, x), 0.0);
            assert!(f_op(0.0, x).is_sign_positive() || x < 0.0);
        }
    }

    #[test]
    fn g_op_examples() {
        assert_eq!(g_op(2.0, 3.0, 0), 5.0);
        assert_eq!(g_op(2.0, 3.0, 1), 1.0);
        assert_eq!(g_op(0.0, -1.25, 0), -1.25);
        assert_eq!(g_op(0.0, -1.25, 1), -1.25);
    }

    #[test]
    fn combine_examples() {
        assert_eq!(&*combine(&[1], &[1]).unwrap(), &[0, 1]);
        assert_eq!(&*combine(&[0, 1], &[1, 1]).unwrap(), &[1, 0, 1, 1]);
        assert_eq!(&*combine(&[1, 0, 1], &[0, 0, 0]).unwrap(), &[1, 0, 1, 0, 0, 0]);
        assert!(combine(&[1], &[1, 0]).is_err());
    }

    #[test]
    fn llr_frame_rejects_non_finite() {
        assert!(LlrFrame::new(vec![1.0, f64::NAN]).is_err());
        assert!(LlrFrame::new(vec![f64::INFINITY]).is_err());
        assert!(LlrFrame::new(vec![0.0, -3.0]).is_ok());
    }

    fn pc85() -> CodeSpec {
        CodeSpec::construct(3, 5, CrcPoly::NONE, 2.5).unwrap()
    }

    #[test]
    fn noiseless_decode_recovers_message() {
        let spec = pc85();
        let msg = [1, 0, 1, 1, 0];
        let x = encode(&msg, &spec).unwrap();
        let llrs: Vec<f64> = x.iter().map(|&b| if b == 0 { 1e6 } else { -1e6 }).collect();
        let r = sc_decode(&llrs, &spec, &ForcedDecisions::new()).unwrap();
        assert_eq!(&*r.info_hat, &msg);
        assert_eq!(r.leaf_llrs.len(), 8);
    }

    #[test]
    fn pc85_hand_trellis() {
        // Worked by hand: y = [0.9, -1.2, 0.4, 2.1, -0.3, 0.8, 1.5, -0.7].
        // Stage 2 left:  f(.9,-.3)=-.3 f(-1.2,.8)=-.8 f(.4,1.5)=.4 f(2.1,-.7)=-.7
        // u0,u1,u2 frozen -> beta=0, so alpha(u3) follows g with zero sums:
        //   stage1 left of left: f(-.3,.4)=-.3, f(-.8,-.7)=.7 ; u0: f(-.3,.7)=-.3 frozen 0
        //   u1: g(-.3,.7,0)=.4 frozen 0 ; stage1 right: g(-.3,.4,0)=.1, g(-.8,-.7,0)=-1.5
        //   u2: f(.1,-1.5)=-.1 frozen 0 ; u3: g(.1,-1.5,0)=-1.4 -> 1
        // Left half partial sums: [u2^u3, u3] combined with [0,0] -> [1,1,1,1].
        // Stage 2 right: g(.9,-.3,1)=-1.2 g(-1.2,.8,1)=2.0 g(.4,1.5,1)=1.1 g(2.1,-.7,1)=-2.8
        //   f(-1.2,1.1)=-1.1, f(2.0,-2.8)=-2.0 ; u4: f(-1.1,-2.0)=1.1 -> 0
        //   u5: g(-1.1,-2.0,0)=-3.1 -> 1
        //   g(-1.2,1.1,1)=2.3, g(2.0,-2.8,1)=-4.8 ; u6: f(2.3,-4.8)=-2.3 -> 1
        //   u7: g(2.3,-4.8,1)=-7.1 -> 1
        let spec = pc85();
        let y = [0.9, -1.2, 0.4, 2.1, -0.3, 0.8, 1.5, -0.7];
        let r = sc_decode(&y, &spec, &ForcedDecisions::new()).unwrap();
        assert_eq!(&*r.u_hat, &[0, 0, 0, 1, 0, 1, 1, 1]);
        let expect = [-0.3, 0.4, -0.1, -1.4, 1.1, -3.1, -2.3, -7.1];
        for (got, want) in r.leaf_llrs.iter().zip(expect) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn forced_decision_keeps_prefix() {
        let spec = pc85();
        let y = [0.9, -1.2, 0.4, 2.1, -0.3, 0.8, 1.5, -0.7];
        let base = sc_decode(&y, &spec, &ForcedDecisions::new()).unwrap();
        let forced = ForcedDecisions::single(4, 1 - base.u_hat[4]);
        let alt = sc_decode(&y, &spec, &forced).unwrap();
        assert_ne!(alt.u_hat[4], base.u_hat[4]);
        assert_eq!(&alt.u_hat[..4], &base.u_hat[..4]);
        assert_eq!(&alt.leaf_llrs[..5], &base.leaf_llrs[..5]);
    }

    #[test]
    fn forced_frozen_index_is_rejected() {
        let spec = pc85();
        let err = sc_decode(&[1.0; 8], &spec, &ForcedDecisions::single(0, 1));
        assert!(err.is_err());
        assert!(sc_decode(&[1.0; 4], &spec, &ForcedDecisions::new()).is_err());
    }

    #[test]
    fn decoder_resizes_for_other_code() {
        let mut dec = ScDecoder::new(2);
        let spec = pc85();
        let r = dec.decode(&[1.0; 8], &spec, &ForcedDecisions::new()).unwrap();
        assert_eq!(r.u_hat.len(), 8);
    }
}
