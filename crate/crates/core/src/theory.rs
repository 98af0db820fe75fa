//! Closed-form steady-state tracking analysis under the random-walk model.
//!
//! All quantities are steady-state values: `zeta` denotes an EMSE, `zeta12`
//! the cross-EMSE between two component filters. RLS filters are described by
//! `beta = 1 - forgetting`.

use nalgebra::{Cholesky, DMatrix};

use crate::error::{invalid, Error, Result};

/// Relative tolerance for the degenerate (indeterminate) combination case.
pub const CASE4_TOL: f64 = 1e-12;

/// Tracking scenario: noise variance, input covariance `R` and random-walk
/// increment covariance `Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackingSpec {
    noise_var: f64,
    r: DMatrix<f64>,
    q: DMatrix<f64>,
}

fn check_psd(name: &str, m: &DMatrix<f64>) -> Result<()> {
    if !m.is_square() {
        return Err(invalid(format!("{name} must be square")));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("covariance entry"));
    }
    let scale = m.amax().max(f64::MIN_POSITIVE);
    if (m - m.transpose()).amax() > 1e-12 * scale {
        return Err(invalid(format!("{name} is not symmetric")));
    }
    let min_eig = m.clone().symmetric_eigen().eigenvalues.min();
    if min_eig < -1e-10 * scale {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(())
}

impl TrackingSpec {
    pub fn new(noise_var: f64, r: DMatrix<f64>, q: DMatrix<f64>) -> Result<Self> {
        if !(noise_var > 0.0 && noise_var.is_finite()) {
            return Err(invalid(format!("noise variance must be positive, got {noise_var}")));
        }
        check_psd("R", &r)?;
        check_psd("Q", &q)?;
        if r.nrows() != q.nrows() {
            return Err(Error::DimensionMismatch { expected: r.nrows(), found: q.nrows() });
        }
        Ok(TrackingSpec { noise_var, r, q })
    }

    /// White input with `R = r_var I` and isotropic `Q` with the given trace.
    pub fn white(len: usize, noise_var: f64, r_var: f64, trace_q: f64) -> Result<Self> {
        if len == 0 {
            return Err(invalid("filter length must be positive"));
        }
        let r = DMatrix::from_diagonal_element(len, len, r_var);
        let q = DMatrix::from_diagonal_element(len, len, trace_q / len as f64);
        Self::new(noise_var, r, q)
    }

    pub fn len(&self) -> usize {
        self.r.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }

    pub fn r(&self) -> &DMatrix<f64> {
        &self.r
    }

    pub fn q(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn trace_r(&self) -> f64 {
        self.r.trace()
    }

    pub fn trace_q(&self) -> f64 {
        self.q.trace()
    }

    /// `Tr{QR}` without forming the product.
    pub fn trace_qr(&self) -> f64 {
        self.q.component_mul(&self.r.transpose()).sum()
    }

    /// Same scenario with `Q` replaced.
    pub fn with_q(&self, q: DMatrix<f64>) -> Result<Self> {
        Self::new(self.noise_var, self.r.clone(), q)
    }
}

/// Component filter family and adaptation parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Component {
    Lms { step: f64 },
    /// `beta = 1 - forgetting factor`.
    Rls { beta: f64 },
}

impl Component {
    fn validate(&self) -> Result<()> {
        match *self {
            Component::Lms { step } if !(step > 0.0 && step.is_finite()) => {
                Err(invalid(format!("LMS step must be positive, got {step}")))
            }
            Component::Rls { beta } if !(beta > 0.0 && beta < 1.0) => {
                Err(invalid(format!("RLS beta must lie in (0, 1), got {beta}")))
            }
            _ => Ok(()),
        }
    }
}

pub fn lms_emse(step: f64, spec: &TrackingSpec) -> Result<f64> {
    Component::Lms { step }.validate()?;
    Ok(0.5 * (step * spec.noise_var * spec.trace_r() + spec.trace_q() / step))
}

pub fn rls_emse(beta: f64, spec: &TrackingSpec) -> Result<f64> {
    Component::Rls { beta }.validate()?;
    Ok(0.5 * (beta * spec.noise_var * spec.len() as f64 + spec.trace_qr() / beta))
}

pub fn emse(c: Component, spec: &TrackingSpec) -> Result<f64> {
    match c {
        Component::Lms { step } => lms_emse(step, spec),
        Component::Rls { beta } => rls_emse(beta, spec),
    }
}

/// Optimal tracking parameters of both families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalParams {
    pub step: f64,
    pub beta: f64,
    pub zeta_lms: f64,
    pub zeta_rls: f64,
}

pub fn optimal_params(spec: &TrackingSpec) -> Result<OptimalParams> {
    let (tq, tqr) = (spec.trace_q(), spec.trace_qr());
    if !(tq > 0.0 && tqr > 0.0) {
        return Err(invalid("stationary scenario (Tr{Q} = 0) has no optimal tracking parameter"));
    }
    let s_lms = spec.noise_var * spec.trace_r();
    let s_rls = spec.noise_var * spec.len() as f64;
    Ok(OptimalParams {
        step: (tq / s_lms).sqrt(),
        beta: (tqr / s_rls).sqrt(),
        zeta_lms: (s_lms * tq).sqrt(),
        zeta_rls: (s_rls * tqr).sqrt(),
    })
}

/// `(mu R + beta I)^{-1} R`.
fn mixed_resolvent(step: f64, beta: f64, r: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = r.nrows();
    let a = r * step + DMatrix::from_diagonal_element(n, n, beta);
    let chol = Cholesky::new(a).ok_or(Error::SingularMatrix)?;
    Ok(chol.solve(r))
}

pub fn cross_emse(c1: Component, c2: Component, spec: &TrackingSpec) -> Result<f64> {
    c1.validate()?;
    c2.validate()?;
    let s2 = spec.noise_var;
    Ok(match (c1, c2) {
        (Component::Lms { step: m1 }, Component::Lms { step: m2 }) => {
            (m1 * m2 * s2 * spec.trace_r() + spec.trace_q()) / (m1 + m2)
        }
        (Component::Rls { beta: b1 }, Component::Rls { beta: b2 }) => {
            (b1 * b2 * s2 * spec.len() as f64 + spec.trace_qr()) / (b1 + b2)
        }
        (Component::Lms { step }, Component::Rls { beta })
        | (Component::Rls { beta }, Component::Lms { step }) => {
            let x = mixed_resolvent(step, beta, &spec.r)?;
            step * beta * s2 * x.trace() + (&spec.q * x).trace()
        }
    })
}

/// EMSE and excess quantities of a pair, `delta_i = zeta_i - zeta12`.
///
/// `denom = delta1 + delta2 = E{(e_a1 - e_a2)^2}` is stored separately so that
/// closed forms can supply it without cancellation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairEmse {
    pub zeta1: f64,
    pub zeta2: f64,
    pub zeta12: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub denom: f64,
}

impl PairEmse {
    /// Validates positivity and the Cauchy-Schwarz bound `zeta12^2 <= zeta1 zeta2`.
    pub fn new(zeta1: f64, zeta2: f64, zeta12: f64) -> Result<Self> {
        if !(zeta1 > 0.0 && zeta2 > 0.0) || !zeta12.is_finite() {
            return Err(invalid(format!("EMSEs must be positive, got {zeta1}, {zeta2}")));
        }
        let bound = zeta1 * zeta2;
        if zeta12 * zeta12 > bound * (1.0 + 1e-12) {
            return Err(Error::CauchySchwarz { z12_sq: zeta12 * zeta12, bound });
        }
        let (delta1, delta2) = (zeta1 - zeta12, zeta2 - zeta12);
        let denom = (zeta1 + zeta2 - 2.0 * zeta12).max(0.0);
        Ok(PairEmse { zeta1, zeta2, zeta12, delta1, delta2, denom })
    }

    /// Two filters of the same family whose EMSE has the form
    /// `(a^2 s + t) / (2a)` with cross term `(a1 a2 s + t) / (a1 + a2)`.
    ///
    /// Excess terms are evaluated in factored form, so nearly identical
    /// parameters do not lose precision.
    pub fn same_family(a1: f64, a2: f64, s: f64, t: f64) -> Result<Self> {
        if !(a1 > 0.0 && a2 > 0.0 && s > 0.0 && t >= 0.0) {
            return Err(invalid("same-family parameters must be positive"));
        }
        let sum = a1 + a2;
        let diff = a1 - a2;
        Ok(PairEmse {
            zeta1: (a1 * a1 * s + t) / (2.0 * a1),
            zeta2: (a2 * a2 * s + t) / (2.0 * a2),
            zeta12: (a1 * a2 * s + t) / sum,
            delta1: diff * (a1 * a1 * s - t) / (2.0 * a1 * sum),
            delta2: -diff * (a2 * a2 * s - t) / (2.0 * a2 * sum),
            denom: diff * diff * (a1 * a2 * s + t) / (2.0 * sum * a1 * a2),
        })
    }

    /// Pair quantities for two components in a tracking scenario.
    pub fn from_components(c1: Component, c2: Component, spec: &TrackingSpec) -> Result<Self> {
        let s2 = spec.noise_var;
        match (c1, c2) {
            (Component::Lms { step: m1 }, Component::Lms { step: m2 }) => {
                c1.validate()?;
                c2.validate()?;
                Self::same_family(m1, m2, s2 * spec.trace_r(), spec.trace_q())
            }
            (Component::Rls { beta: b1 }, Component::Rls { beta: b2 }) => {
                c1.validate()?;
                c2.validate()?;
                Self::same_family(b1, b2, s2 * spec.len() as f64, spec.trace_qr())
            }
            _ => Self::new(emse(c1, spec)?, emse(c2, spec)?, cross_emse(c1, c2, spec)?),
        }
    }

    fn is_degenerate(&self) -> bool {
        self.delta1.abs() + self.delta2.abs() < CASE4_TOL * self.zeta1.max(self.zeta2)
    }

    /// EMSE of the combination for a fixed mixing parameter.
    pub fn combined(&self, lambda: f64) -> f64 {
        self.zeta2 - 2.0 * lambda * self.delta2 + lambda * lambda * self.denom
    }
}

/// Constraint on the mixing parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Affine,
    Convex,
}

/// Optimal mixing parameter; `Indeterminate` when both errors coincide and
/// any value is optimal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaOpt {
    Value(f64),
    Indeterminate,
}

impl LambdaOpt {
    pub fn value(self) -> Option<f64> {
        match self {
            LambdaOpt::Value(v) => Some(v),
            LambdaOpt::Indeterminate => None,
        }
    }
}

pub fn optimal_lambda_pair(pair: &PairEmse, mode: Mode) -> LambdaOpt {
    if pair.is_degenerate() || pair.denom <= 0.0 {
        return LambdaOpt::Indeterminate;
    }
    let lambda = pair.delta2 / pair.denom;
    LambdaOpt::Value(match mode {
        Mode::Affine => lambda,
        Mode::Convex => lambda.clamp(0.0, 1.0),
    })
}

pub fn optimal_emse_pair(pair: &PairEmse, mode: Mode) -> f64 {
    match optimal_lambda_pair(pair, mode) {
        LambdaOpt::Indeterminate => pair.zeta1,
        LambdaOpt::Value(l) if l == 1.0 => pair.zeta1,
        LambdaOpt::Value(l) if l == 0.0 => pair.zeta2,
        LambdaOpt::Value(l) => pair.zeta1 - (1.0 - l) * pair.delta1,
    }
}

pub fn optimal_lambda(zeta1: f64, zeta2: f64, zeta12: f64, mode: Mode) -> Result<LambdaOpt> {
    Ok(optimal_lambda_pair(&PairEmse::new(zeta1, zeta2, zeta12)?, mode))
}

pub fn optimal_emse(zeta1: f64, zeta2: f64, zeta12: f64, mode: Mode) -> Result<f64> {
    Ok(optimal_emse_pair(&PairEmse::new(zeta1, zeta2, zeta12)?, mode))
}

/// Operating regime of a combination.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `zeta1 <= zeta12`: filter 1 is best, affine `lambda > 1`.
    Case1,
    /// `zeta2 <= zeta12`: filter 2 is best, affine `lambda < 0`.
    Case2,
    /// `zeta12` below both EMSEs: both combinations beat both components.
    Case3,
    /// Identical errors.
    Case4,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::Case1 => "case1",
            Regime::Case2 => "case2",
            Regime::Case3 => "case3",
            Regime::Case4 => "case4",
        }
    }
}

pub fn classify_pair(pair: &PairEmse) -> Regime {
    if pair.is_degenerate() {
        Regime::Case4
    } else if pair.delta1 <= 0.0 {
        Regime::Case1
    } else if pair.delta2 <= 0.0 {
        Regime::Case2
    } else {
        Regime::Case3
    }
}

pub fn classify_regime(zeta1: f64, zeta2: f64, zeta12: f64) -> Result<Regime> {
    Ok(classify_pair(&PairEmse::new(zeta1, zeta2, zeta12)?))
}

/// Normalized squared deviation in dB.
pub fn nsd(zeta: f64, zeta_ref: f64) -> f64 {
    crate::db(zeta / zeta_ref)
}

/// Complete steady-state analysis of a two-filter combination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryResult {
    pub pair: PairEmse,
    pub lambda_aff: LambdaOpt,
    pub lambda_cvx: LambdaOpt,
    pub zeta_aff: f64,
    pub zeta_cvx: f64,
    pub regime: Regime,
    /// Optimal LMS EMSE used as NSD reference; `None` for stationary scenarios.
    pub zeta_ref: Option<f64>,
}

impl TheoryResult {
    fn nsd_of(&self, z: f64) -> Option<f64> {
        self.zeta_ref.map(|r| nsd(z, r))
    }
    pub fn nsd1(&self) -> Option<f64> {
        self.nsd_of(self.pair.zeta1)
    }
    pub fn nsd2(&self) -> Option<f64> {
        self.nsd_of(self.pair.zeta2)
    }
    pub fn nsd_aff(&self) -> Option<f64> {
        self.nsd_of(self.zeta_aff)
    }
    pub fn nsd_cvx(&self) -> Option<f64> {
        self.nsd_of(self.zeta_cvx)
    }
}

pub fn analyze_pair(pair: PairEmse, zeta_ref: Option<f64>) -> TheoryResult {
    TheoryResult {
        pair,
        lambda_aff: optimal_lambda_pair(&pair, Mode::Affine),
        lambda_cvx: optimal_lambda_pair(&pair, Mode::Convex),
        zeta_aff: optimal_emse_pair(&pair, Mode::Affine),
        zeta_cvx: optimal_emse_pair(&pair, Mode::Convex),
        regime: classify_pair(&pair),
        zeta_ref,
    }
}

pub fn analyze(c1: Component, c2: Component, spec: &TrackingSpec) -> Result<TheoryResult> {
    let pair = PairEmse::from_components(c1, c2, spec)?;
    let zeta_ref = optimal_params(spec).ok().map(|o| o.zeta_lms);
    Ok(analyze_pair(pair, zeta_ref))
}

/// Symmetric Toeplitz matrix with the given first row.
pub fn toeplitz(row: &[f64]) -> DMatrix<f64> {
    let n = row.len();
    DMatrix::from_fn(n, n, |i, j| row[i.abs_diff(j)])
}

/// `scale [alpha R / Tr{R} + (1 - alpha) R^{-1} / Tr{R^{-1}}]`.
pub fn q_mixture(r: &DMatrix<f64>, alpha: f64, scale: f64) -> Result<DMatrix<f64>> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(invalid(format!("alpha {alpha} not in [0, 1]")));
    }
    let inv = Cholesky::new(r.clone()).ok_or(Error::NotPositiveDefinite)?.inverse();
    let inv = (&inv + inv.transpose()) * 0.5;
    Ok((r / r.trace() * alpha + &inv / inv.trace() * (1.0 - alpha)) * scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn spec(trace_q: f64) -> TrackingSpec {
        // sigma_v^2 Tr{R} = 1e-2
        TrackingSpec::white(7, 1e-2, 1.0 / 7.0, trace_q).unwrap()
    }

    #[test]
    fn lms_examples() {
        let s = spec(1e-6);
        assert_relative_eq!(lms_emse(0.01, &s).unwrap(), 1e-4, max_relative = 1e-12);
        let o = optimal_params(&s).unwrap();
        assert_relative_eq!(o.step, 1e-2, max_relative = 1e-12);
        assert_relative_eq!(lms_emse(o.step, &s).unwrap(), o.zeta_lms, max_relative = 1e-12);
        assert_relative_eq!(o.zeta_lms, (1e-2f64 * 1e-6).sqrt(), max_relative = 1e-12);
        let s0 = spec(0.0);
        assert_relative_eq!(lms_emse(0.02, &s0).unwrap(), 0.02 * 1e-2 / 2.0, max_relative = 1e-12);
        assert!(optimal_params(&s0).is_err());
        assert!(lms_emse(0.0, &s).is_err());
    }

    #[test]
    fn optimal_params_scale_with_sqrt_q() {
        let a = optimal_params(&spec(1e-6)).unwrap();
        let b = optimal_params(&spec(1e-4)).unwrap();
        assert_relative_eq!(b.step, 10.0 * a.step, max_relative = 1e-12);
        assert_relative_eq!(b.zeta_lms, 10.0 * a.zeta_lms, max_relative = 1e-12);
    }

    #[test]
    fn rls_examples() {
        let m = 7;
        let r = DMatrix::from_diagonal_element(m, m, 1.0);
        let q = DMatrix::from_diagonal_element(m, m, 1e-8 / 7.0);
        let s = TrackingSpec::new(1e-2, r, q).unwrap();
        assert_relative_eq!(s.trace_qr(), 1e-8, max_relative = 1e-12);
        let o = optimal_params(&s).unwrap();
        assert_relative_eq!(o.beta, (1e-8f64 / 0.07).sqrt(), max_relative = 1e-12);
        assert_relative_eq!(o.beta, 3.78e-4, max_relative = 1e-3);
        let z = rls_emse(o.beta, &s).unwrap();
        assert_relative_eq!(z, o.zeta_rls, max_relative = 1e-12);
        assert_relative_eq!(z, 2.6458e-5, max_relative = 1e-4);
        assert!(rls_emse(1.0, &s).is_err());
        let s0 = s.with_q(DMatrix::zeros(m, m)).unwrap();
        assert_relative_eq!(rls_emse(0.01, &s0).unwrap(), 0.01 * 1e-2 * 7.0 / 2.0);
    }

    #[test]
    fn cross_emse_reduces_to_emse_for_equal_parameters() {
        let s = spec(1e-5);
        let lms = Component::Lms { step: 0.03 };
        assert_relative_eq!(
            cross_emse(lms, lms, &s).unwrap(),
            lms_emse(0.03, &s).unwrap(),
            max_relative = 1e-12
        );
        let rls = Component::Rls { beta: 0.002 };
        assert_relative_eq!(
            cross_emse(rls, rls, &s).unwrap(),
            rls_emse(0.002, &s).unwrap(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn lms_rls_cross_emse_white_input() {
        let (m, r, tq, s2, mu, beta) = (5usize, 0.3, 2e-5, 1e-2, 0.05, 0.004);
        let s = TrackingSpec::white(m, s2, r, tq).unwrap();
        let expected = (mu * beta * s2 * m as f64 * r + r * tq) / (mu * r + beta);
        let got = cross_emse(Component::Lms { step: mu }, Component::Rls { beta }, &s).unwrap();
        assert_relative_eq!(got, expected, max_relative = 1e-12);
        let swapped = cross_emse(Component::Rls { beta }, Component::Lms { step: mu }, &s).unwrap();
        assert_eq!(got, swapped);
    }

    #[test]
    fn lambda_and_emse_examples() {
        let l = optimal_lambda(1.0, 2.0, 0.5, Mode::Affine).unwrap().value().unwrap();
        assert_relative_eq!(l, 0.75, max_relative = 1e-15);
        assert_eq!(optimal_lambda(1.0, 2.0, 0.5, Mode::Convex).unwrap(), LambdaOpt::Value(l));
        assert_relative_eq!(optimal_emse(1.0, 2.0, 0.5, Mode::Affine).unwrap(), 0.875);

        let z = 1.2;
        assert_relative_eq!(
            optimal_lambda(1.0, 2.0, z, Mode::Affine).unwrap().value().unwrap(),
            4.0 / 3.0,
            max_relative = 1e-12
        );
        assert_eq!(optimal_lambda(1.0, 2.0, z, Mode::Convex).unwrap(), LambdaOpt::Value(1.0));
        assert_eq!(optimal_emse(1.0, 2.0, z, Mode::Convex).unwrap(), 1.0);

        let p = PairEmse::new(2.0, 1.0, 1.0).unwrap();
        assert_eq!(optimal_lambda_pair(&p, Mode::Affine), LambdaOpt::Value(0.0));
    }

    #[test]
    fn emse_forms_agree_in_the_interior() {
        let p = PairEmse::new(1.0, 2.0, 0.5).unwrap();
        let l = optimal_lambda_pair(&p, Mode::Affine).value().unwrap();
        let a = p.zeta1 - (1.0 - l) * p.delta1;
        let b = p.zeta2 - l * p.delta2;
        assert!((a - b).abs() < 1e-12);
        assert!((p.combined(l) - a).abs() < 1e-12);
    }

    #[test]
    fn regimes() {
        assert_eq!(classify_regime(1.0, 2.0, 1.2).unwrap(), Regime::Case1);
        assert_eq!(classify_regime(2.0, 1.0, 1.2).unwrap(), Regime::Case2);
        assert_eq!(classify_regime(1.0, 2.0, 0.5).unwrap(), Regime::Case3);
        assert_eq!(classify_regime(0.3, 0.3, 0.3).unwrap(), Regime::Case4);
        assert_eq!(optimal_lambda(0.3, 0.3, 0.3, Mode::Affine).unwrap(), LambdaOpt::Indeterminate);
        assert_eq!(optimal_emse(0.3, 0.3, 0.3, Mode::Affine).unwrap(), 0.3);
        assert!(matches!(classify_regime(1.0, 2.0, 1.5), Err(Error::CauchySchwarz { .. })));
    }

    #[test]
    fn nsd_examples() {
        assert_eq!(nsd(3.0, 3.0), 0.0);
        assert_relative_eq!(nsd(2.0, 1.0), 3.0103, max_relative = 1e-5);
    }

    #[test]
    fn factored_deltas_match_direct_difference() {
        let s = spec(3e-6);
        let (m1, m2) = (0.1, 0.005);
        let p = PairEmse::from_components(
            Component::Lms { step: m1 },
            Component::Lms { step: m2 },
            &s,
        )
        .unwrap();
        let direct = PairEmse::new(p.zeta1, p.zeta2, p.zeta12).unwrap();
        assert_relative_eq!(p.delta1, direct.delta1, max_relative = 1e-10);
        assert_relative_eq!(p.delta2, direct.delta2, max_relative = 1e-10);
        assert_relative_eq!(p.denom, direct.denom, max_relative = 1e-10);
    }

    #[test]
    fn toeplitz_and_q_mixture() {
        let row: Vec<f64> = (0..7).map(|k| 0.8f64.powi(k) / 7.0).collect();
        let r = toeplitz(&row);
        assert_eq!(r[(2, 5)], row[3]);
        assert_eq!(r[(5, 2)], row[3]);
        for alpha in [0.0, 0.3, 1.0] {
            let q = q_mixture(&r, alpha, 1e-5).unwrap();
            assert_relative_eq!(q.trace(), 1e-5, max_relative = 1e-12);
        }
        let q1 = q_mixture(&r, 1.0, 1e-5).unwrap();
        assert_relative_eq!(q1[(0, 1)], r[(0, 1)] * 1e-5, max_relative = 1e-12);
        assert!(q_mixture(&r, 1.5, 1e-5).is_err());
    }

    #[test]
    fn spec_rejects_bad_covariances() {
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        let id = DMatrix::identity(2, 2);
        assert!(matches!(
            TrackingSpec::new(1.0, bad, id.clone()),
            Err(Error::NotPositiveDefinite)
        ));
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 1.0]);
        assert!(TrackingSpec::new(1.0, asym, id.clone()).is_err());
        assert!(TrackingSpec::new(0.0, id.clone(), id).is_err());
    }
}
