//! Combinations of more than two filters.
//!
//! Three topologies: a binary tree of two-filter mixers, a one-layer affine
//! combination and a one-layer convex combination through a softmax.

use crate::combo2::{MixerState, DEFAULT_A_MAX, DEFAULT_EPS, DEFAULT_ETA};
use crate::error::{check_len, invalid, Error, Result};
use crate::filters::{AdaptiveFilter, StepResult};

/// Binary tree of two-filter mixers. Leaves index component outputs.
#[derive(Debug, Clone, PartialEq)]
pub enum HierarchyNode {
    Leaf(usize),
    Internal { left: Box<HierarchyNode>, right: Box<HierarchyNode>, mixer: MixerState },
}

impl HierarchyNode {
    pub fn node(left: HierarchyNode, right: HierarchyNode, mixer: MixerState) -> Self {
        HierarchyNode::Internal { left: Box::new(left), right: Box::new(right), mixer }
    }

    /// Balanced tree over leaves `0..k`, one fresh mixer per internal node.
    ///
    /// For `k = 4` this is `((0, 1), (2, 3))`.
    pub fn balanced(k: usize, mut mixer: impl FnMut() -> Result<MixerState>) -> Result<Self> {
        fn build(
            lo: usize,
            hi: usize,
            mixer: &mut dyn FnMut() -> Result<MixerState>,
        ) -> Result<HierarchyNode> {
            if hi - lo == 1 {
                return Ok(HierarchyNode::Leaf(lo));
            }
            let mid = lo + (hi - lo).div_ceil(2);
            let left = build(lo, mid, mixer)?;
            let right = build(mid, hi, mixer)?;
            Ok(HierarchyNode::node(left, right, mixer()?))
        }
        if k == 0 {
            return Err(invalid("a hierarchy needs at least one leaf"));
        }
        build(0, k, &mut mixer)
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            HierarchyNode::Leaf(_) => 1,
            HierarchyNode::Internal { left, right, .. } => left.leaf_count() + right.leaf_count(),
        }
    }

    /// Mixing parameters in pre-order (root first).
    pub fn lambdas(&self) -> Vec<f64> {
        let mut out = Vec::new();
        self.collect_lambdas(&mut out);
        out
    }

    fn collect_lambdas(&self, out: &mut Vec<f64>) {
        if let HierarchyNode::Internal { left, right, mixer } = self {
            out.push(mixer.lambda());
            left.collect_lambdas(out);
            right.collect_lambdas(out);
        }
    }

    pub fn output(&self, ys: &[f64]) -> Result<f64> {
        match self {
            HierarchyNode::Leaf(i) => ys.get(*i).copied().ok_or(Error::MissingLeaf(*i)),
            HierarchyNode::Internal { left, right, mixer } => {
                Ok(mixer.output(left.output(ys)?, right.output(ys)?))
            }
        }
    }

    /// Step every mixer with its local error `d - y_local` and local child
    /// outputs. Returns this node's output before the update.
    pub fn adapt(&mut self, d: f64, ys: &[f64]) -> Result<f64> {
        match self {
            HierarchyNode::Leaf(i) => ys.get(*i).copied().ok_or(Error::MissingLeaf(*i)),
            HierarchyNode::Internal { left, right, mixer } => {
                let yl = left.adapt(d, ys)?;
                let yr = right.adapt(d, ys)?;
                let y = mixer.output(yl, yr);
                mixer.step(d - y, yl, yr)?;
                Ok(y)
            }
        }
    }
}

/// Components plus a combination tree.
#[derive(Debug, Clone)]
pub struct HierarchicalCombo<F> {
    pub filters: Vec<F>,
    pub tree: HierarchyNode,
    outputs: Vec<f64>,
}

impl<F: AdaptiveFilter> HierarchicalCombo<F> {
    pub fn new(filters: Vec<F>, tree: HierarchyNode) -> Result<Self> {
        check_len(filters.len(), tree.leaf_count())?;
        let outputs = vec![0.0; filters.len()];
        Ok(HierarchicalCombo { filters, tree, outputs })
    }

    pub fn step(&mut self, u: &[f64], d: f64) -> Result<StepResult> {
        for (y, f) in self.outputs.iter_mut().zip(&self.filters) {
            *y = f.predict(u)?;
        }
        let output = self.tree.adapt(d, &self.outputs)?;
        for (y, f) in self.outputs.iter().zip(self.filters.iter_mut()) {
            f.update(u, d - y)?;
        }
        Ok(StepResult { output, error: d - output })
    }
}

/// Shift-invariant softmax.
pub fn softmax(a: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len()];
    softmax_into(a, &mut out);
    out
}

fn softmax_into(a: &[f64], out: &mut [f64]) {
    let max = a.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for (o, &x) in out.iter_mut().zip(a) {
        *o = (x - max).exp();
        total += *o;
    }
    for o in out.iter_mut() {
        *o /= total;
    }
}

/// One-layer convex combination with softmax weights.
///
/// Update: `a_k += mu e lambda_k (y_k - y)`, the stochastic gradient of `e^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftmaxMixer {
    a: Vec<f64>,
    lambda: Vec<f64>,
    step: f64,
    a_max: Option<f64>,
    normalized: bool,
    eta: f64,
    eps: f64,
    p: f64,
}

impl SoftmaxMixer {
    /// Uniform weights, `a` clamped to `[-4, 4]`, no power normalization.
    pub fn new(k: usize, step: f64) -> Result<Self> {
        if k < 2 {
            return Err(invalid(format!("softmax layer needs at least 2 inputs, got {k}")));
        }
        if !(step > 0.0 && step.is_finite()) {
            return Err(invalid(format!("mixer step size must be positive, got {step}")));
        }
        Ok(SoftmaxMixer {
            a: vec![0.0; k],
            lambda: vec![1.0 / k as f64; k],
            step,
            a_max: Some(DEFAULT_A_MAX),
            normalized: false,
            eta: DEFAULT_ETA,
            eps: DEFAULT_EPS,
            p: 0.0,
        })
    }

    /// `None` disables saturation of `a`.
    pub fn with_a_max(mut self, a_max: Option<f64>) -> Result<Self> {
        if let Some(m) = a_max {
            if !(m > 0.0 && m.is_finite()) {
                return Err(invalid(format!("a_max must be positive, got {m}")));
            }
        }
        self.a_max = a_max;
        Ok(self)
    }

    /// Divide the step by `eps + p`, `p` tracking the mean of `(y_k - y)^2`.
    pub fn with_normalization(mut self, eta: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&eta) {
            return Err(invalid(format!("eta = {eta} out of [0, 1)")));
        }
        self.normalized = true;
        self.eta = eta;
        Ok(self)
    }

    pub fn with_a(mut self, a: &[f64]) -> Result<Self> {
        check_len(self.a.len(), a.len())?;
        self.a.copy_from_slice(a);
        if let Some(m) = self.a_max {
            self.a.iter_mut().for_each(|x| *x = x.clamp(-m, m));
        }
        softmax_into(&self.a, &mut self.lambda);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn output(&self, ys: &[f64]) -> Result<f64> {
        check_len(self.a.len(), ys.len())?;
        Ok(crate::dot(&self.lambda, ys))
    }

    /// Form the output, then step `a`. Returns output and error.
    pub fn step(&mut self, d: f64, ys: &[f64]) -> Result<StepResult> {
        let y = self.output(ys)?;
        let e = d - y;
        let gain = if self.normalized {
            let m = ys.iter().map(|yk| (yk - y) * (yk - y)).sum::<f64>() / ys.len() as f64;
            self.p = self.eta * self.p + (1.0 - self.eta) * m;
            self.step / (self.eps + self.p)
        } else {
            self.step
        };
        for ((a, l), yk) in self.a.iter_mut().zip(&self.lambda).zip(ys) {
            *a += gain * e * l * (yk - y);
            if let Some(m) = self.a_max {
                *a = a.clamp(-m, m);
            }
        }
        if self.a.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("softmax auxiliary parameter"));
        }
        softmax_into(&self.a, &mut self.lambda);
        Ok(StepResult { output: y, error: e })
    }
}

/// One-layer affine combination `y = y_K + sum_k lambda_k (y_k - y_K)`,
/// adapted with a power-normalized LMS rule.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineLayer {
    lambda: Vec<f64>,
    step: f64,
    eta: f64,
    eps: f64,
    p: f64,
}

impl AffineLayer {
    /// `K` inputs with all weights starting at `1/K`.
    pub fn new(k: usize, step: f64) -> Result<Self> {
        if k < 2 {
            return Err(invalid(format!("affine layer needs at least 2 inputs, got {k}")));
        }
        if !(step > 0.0 && step.is_finite()) {
            return Err(invalid(format!("mixer step size must be positive, got {step}")));
        }
        Ok(AffineLayer {
            lambda: vec![1.0 / k as f64; k - 1],
            step,
            eta: DEFAULT_ETA,
            eps: DEFAULT_EPS,
            p: 0.0,
        })
    }

    pub fn with_eta(mut self, eta: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&eta) {
            return Err(invalid(format!("eta = {eta} out of [0, 1)")));
        }
        self.eta = eta;
        Ok(self)
    }

    pub fn with_lambda(mut self, lambda: &[f64]) -> Result<Self> {
        check_len(self.lambda.len(), lambda.len())?;
        self.lambda.copy_from_slice(lambda);
        Ok(self)
    }

    /// The `K - 1` free weights; the last is `1 - sum`.
    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn power(&self) -> f64 {
        self.p
    }

    pub fn output(&self, ys: &[f64]) -> Result<f64> {
        check_len(self.lambda.len() + 1, ys.len())?;
        let (head, last) = ys.split_at(self.lambda.len());
        let yk = last[0];
        Ok(yk + self.lambda.iter().zip(head).map(|(l, y)| l * (y - yk)).sum::<f64>())
    }

    pub fn step(&mut self, d: f64, ys: &[f64]) -> Result<StepResult> {
        let y = self.output(ys)?;
        let e = d - y;
        let (head, last) = ys.split_at(self.lambda.len());
        let yk = last[0];
        let m = head.iter().map(|y| (y - yk) * (y - yk)).sum::<f64>() / head.len() as f64;
        self.p = self.eta * self.p + (1.0 - self.eta) * m;
        let gain = self.step / (self.eps + self.p);
        for (l, yj) in self.lambda.iter_mut().zip(head) {
            *l += gain * e * (yj - yk);
        }
        if self.lambda.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("affine layer weight"));
        }
        Ok(StepResult { output: y, error: e })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combo2::{sigmoid, MixingRule};
    use proptest::prelude::*;

    fn cvx() -> Result<MixerState> {
        MixerState::new(MixingRule::CvxPnLms, 0.5)
    }

    fn fixed(lambda: f64) -> MixerState {
        MixerState::new(MixingRule::AffLms, 1.0).unwrap().with_lambda(lambda).unwrap()
    }

    #[test]
    fn balanced_shapes() {
        let t = HierarchyNode::balanced(4, cvx).unwrap();
        assert_eq!(t.leaf_count(), 4);
        assert_eq!(t.lambdas().len(), 3);
        let t = HierarchyNode::balanced(5, cvx).unwrap();
        assert_eq!(t.leaf_count(), 5);
        assert!(HierarchyNode::balanced(0, cvx).is_err());
    }

    #[test]
    fn hierarchical_output_examples() {
        use HierarchyNode::Leaf;
        let tree = |l21, l11, l12| {
            HierarchyNode::node(
                HierarchyNode::node(Leaf(0), Leaf(1), fixed(l11)),
                HierarchyNode::node(Leaf(2), Leaf(3), fixed(l12)),
                fixed(l21),
            )
        };
        assert_eq!(tree(1.0, 1.0, 1.0).output(&[5.0, 6.0, 7.0, 8.0]).unwrap(), 5.0);
        assert_eq!(tree(1.0, 0.5, 0.3).output(&[0.0, 2.0, 9.0, 9.0]).unwrap(), 1.0);
        let t = tree(0.25, 0.5, 0.1);
        let ys = [1.0, 2.0, 3.0, 4.0];
        let expected = 0.25 * (0.5 * 1.0 + 0.5 * 2.0) + 0.75 * (0.1 * 3.0 + 0.9 * 4.0);
        assert!((t.output(&ys).unwrap() - expected).abs() < 1e-15);
        assert!(matches!(t.output(&ys[..3]), Err(Error::MissingLeaf(3))));

        let two = HierarchyNode::node(Leaf(0), Leaf(1), fixed(0.3));
        assert_eq!(
            two.output(&[1.5, -2.0]).unwrap(),
            crate::combo2::combine_outputs(0.3, 1.5, -2.0)
        );
    }

    #[test]
    fn single_node_adapt_is_cvx_step() {
        let mut tree = HierarchyNode::balanced(2, cvx).unwrap();
        let mut m = cvx().unwrap();
        for (d, y1, y2) in [(1.0, 0.2, 0.9), (0.5, 0.4, -0.3), (-1.0, 0.0, -2.0)] {
            tree.adapt(d, &[y1, y2]).unwrap();
            let e = d - m.output(y1, y2);
            m.cvx_step(e, y1, y2).unwrap();
        }
        assert_eq!(tree.lambdas()[0].to_bits(), m.lambda().to_bits());
    }

    #[test]
    fn top_mixer_sees_subtree_outputs() {
        let mut tree = HierarchyNode::balanced(4, cvx).unwrap();
        let ys = [1.0, 3.0, -1.0, 0.0];
        let d = 0.7;
        let mut top = cvx().unwrap();
        let (yl, yr) = (0.5 * 1.0 + 0.5 * 3.0, 0.5 * -1.0 + 0.5 * 0.0);
        top.step(d - top.output(yl, yr), yl, yr).unwrap();
        tree.adapt(d, &ys).unwrap();
        assert_eq!(tree.lambdas()[0].to_bits(), top.lambda().to_bits());
    }

    #[test]
    fn equal_children_leave_lambda_unchanged() {
        let mut tree = HierarchyNode::balanced(2, cvx).unwrap();
        tree.adapt(3.0, &[1.0, 1.0]).unwrap();
        assert_eq!(tree.lambdas(), vec![0.5]);
    }

    #[test]
    fn softmax_examples() {
        assert_eq!(softmax(&[0.7; 4]), vec![0.25; 4]);
        let (a1, a2) = (0.3, -1.1);
        let l = softmax(&[a1, a2]);
        assert!((l[0] - sigmoid(a1 - a2)).abs() < 1e-15);
        let big = softmax(&[1000.0, 999.0]);
        assert!(big.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn softmax_two_inputs_moves_like_cvx() {
        let mut s = SoftmaxMixer::new(2, 1.0).unwrap();
        // e (y1 - y2) > 0
        s.step(2.0, &[1.5, 0.0]).unwrap();
        assert!(s.lambda()[0] > 0.5);
        let mut s = SoftmaxMixer::new(2, 1.0).unwrap();
        s.step(-2.0, &[1.5, 0.0]).unwrap();
        assert!(s.lambda()[0] < 0.5);
    }

    #[test]
    fn softmax_no_update_cases() {
        let mut s = SoftmaxMixer::new(3, 1.0).unwrap().with_a(&[0.1, -0.2, 0.3]).unwrap();
        let a0 = s.a().to_vec();
        s.step(2.0, &[0.4, 0.4, 0.4]).unwrap();
        assert_eq!(s.a(), &a0[..]);
        let y = s.output(&[1.0, 2.0, 3.0]).unwrap();
        s.step(y, &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(s.a(), &a0[..]);
    }

    #[test]
    fn softmax_update_is_gradient_descent() {
        let ys = [0.3, -1.2, 2.0, 0.7];
        let d = 0.9;
        let a0 = [0.2, -0.5, 0.1, 1.3];
        let mu = 1e-3;
        let sq_err = |a: &[f64]| {
            let l = softmax(a);
            let y: f64 = l.iter().zip(&ys).map(|(l, y)| l * y).sum();
            (d - y) * (d - y)
        };
        let mut s = SoftmaxMixer::new(4, mu).unwrap().with_a_max(None).unwrap().with_a(&a0).unwrap();
        s.step(d, &ys).unwrap();
        for k in 0..4 {
            let h = 1e-6;
            let mut ap = a0;
            let mut am = a0;
            ap[k] += h;
            am[k] -= h;
            let grad = (sq_err(&ap) - sq_err(&am)) / (2.0 * h);
            let expected = -0.5 * mu * grad;
            let got = s.a()[k] - a0[k];
            assert!(((got - expected) / expected).abs() < 1e-6, "k={k} got={got} expected={expected}");
        }
    }

    #[test]
    fn affine_layer_examples() {
        let l = AffineLayer::new(3, 0.1).unwrap().with_lambda(&[0.3, 0.3]).unwrap();
        assert!((l.output(&[1.0, 2.0, 3.0]).unwrap() - 2.1).abs() < 1e-15);
        let mut l = AffineLayer::new(3, 0.1).unwrap();
        let before = l.lambda().to_vec();
        l.step(5.0, &[2.0, 2.0, 2.0]).unwrap();
        assert_eq!(l.lambda(), &before[..]);
    }

    #[test]
    fn affine_layer_with_two_inputs_is_aff_pn_lms() {
        let mut layer = AffineLayer::new(2, 0.5).unwrap();
        let mut m = MixerState::new(MixingRule::AffPnLms, 0.5).unwrap();
        let data = [(1.0, 0.3, 0.9), (0.2, -0.4, 0.1), (2.0, 1.7, 1.1), (0.0, 0.5, -0.5)];
        for (d, y1, y2) in data {
            let out = layer.step(d, &[y1, y2]).unwrap();
            let y = m.output(y1, y2);
            assert_eq!(out.output.to_bits(), y.to_bits());
            m.step(d - y, y1, y2).unwrap();
            assert_eq!(layer.lambda()[0].to_bits(), m.lambda().to_bits());
        }
    }

    proptest! {
        #[test]
        fn softmax_is_probability_vector(a in prop::collection::vec(-50.0f64..50.0, 2..10)) {
            let l = softmax(&a);
            prop_assert!(l.iter().all(|&x| x >= 0.0));
            prop_assert!((l.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn softmax_shift_invariant(
            a in prop::collection::vec(-64i32..64, 2..8),
            c in -64i32..64,
        ) {
            // dyadic values keep the shift exact
            let a: Vec<f64> = a.iter().map(|&x| x as f64 / 8.0).collect();
            let shifted: Vec<f64> = a.iter().map(|x| x + c as f64 / 8.0).collect();
            prop_assert_eq!(softmax(&a), softmax(&shifted));
        }

        #[test]
        fn softmax_mixer_stays_on_simplex(
            steps in prop::collection::vec((-3.0f64..3.0, prop::collection::vec(-3.0f64..3.0, 3)), 1..50),
        ) {
            let mut s = SoftmaxMixer::new(3, 5.0).unwrap();
            for (d, ys) in steps {
                s.step(d, &ys).unwrap();
                prop_assert!(s.a().iter().all(|a| a.abs() <= DEFAULT_A_MAX));
                prop_assert!(s.lambda().iter().all(|&x| x >= 0.0));
                prop_assert!((s.lambda().iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }
}
