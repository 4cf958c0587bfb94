//! nu-rearrangements, distribution functions and the discrete Lorentz
//! quasi-norms `l^mu_eta(u, nu)`.
//!
//! The weighted space `l^mu_eta(u, nu)` is evaluated by multiplying every
//! entry by `u_Q` first. `xi > 0` switches to the weight `t^xi eta(t)`,
//! i.e. the space `l^mu_{xi,eta}(u, nu)`.

use crate::dyadic::MeasureSpec;
use crate::error::{Error, Result};
use crate::seq::{CoeffSeq, CubeWeights, UnitWeights};
use crate::weights::WeightFn;

/// Default relative tolerance for quadrature-backed weights.
pub const DEFAULT_TOL: f64 = 1e-11;

/// `s*_nu` as a right-continuous step function: `values[k]` on
/// `[breakpoints[k], breakpoints[k+1])`, zero after the last breakpoint.
#[derive(Clone, Debug, PartialEq)]
pub struct StepRearrangement {
    pub breakpoints: Vec<f64>,
    pub values: Vec<f64>,
}

impl StepRearrangement {
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn eval(&self, t: f64) -> f64 {
        let k = self.breakpoints.partition_point(|&b| b <= t);
        if k == 0 || k > self.values.len() {
            return 0.0;
        }
        self.values[k - 1]
    }

    /// `T_m`, the nu-mass of the support.
    pub fn total_mass(&self) -> f64 {
        self.breakpoints.last().copied().unwrap_or(0.0)
    }
}

#[derive(Clone, Copy)]
pub struct LorentzParams<'a> {
    pub eta: &'a WeightFn,
    /// `mu` in `(0, inf]`.
    pub mu: f64,
    pub xi: f64,
    pub weights: Option<&'a dyn CubeWeights>,
    pub tol: f64,
}

impl<'a> LorentzParams<'a> {
    pub fn new(eta: &'a WeightFn, mu: f64) -> Self {
        Self {
            eta,
            mu,
            xi: 0.0,
            weights: None,
            tol: DEFAULT_TOL,
        }
    }

    pub fn with_xi(mut self, xi: f64) -> Self {
        self.xi = xi;
        self
    }

    pub fn with_weights(mut self, u: &'a dyn CubeWeights) -> Self {
        self.weights = Some(u);
        self
    }

    /// `t^xi eta(t)`.
    pub fn effective_weight(&self) -> WeightFn {
        if self.xi == 0.0 {
            self.eta.clone()
        } else {
            self.eta.shifted(self.xi)
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0) {
            return Err(Error::Param(format!(
                "mu must be in (0, inf], got {}",
                self.mu
            )));
        }
        if !(self.xi >= 0.0) {
            return Err(Error::Param(format!("xi must be >= 0, got {}", self.xi)));
        }
        Ok(())
    }
}

fn weighted_entries(s: &CoeffSeq, m: &MeasureSpec, u: Option<&dyn CubeWeights>) -> Vec<(f64, f64)> {
    let u = u.unwrap_or(&UnitWeights);
    s.iter()
        .map(|(q, v)| ((u.weight(q) * v).abs(), m.mass(q)))
        .filter(|&(a, _)| a > 0.0)
        .collect()
}

/// Non-increasing rearrangement of `|u_Q s_Q|` with respect to `nu`; equal
/// magnitudes are merged into one step.
pub fn rearrange(s: &CoeffSeq, m: &MeasureSpec, u: Option<&dyn CubeWeights>) -> StepRearrangement {
    let mut entries = weighted_entries(s, m, u);
    entries.sort_by(|a, b| b.0.total_cmp(&a.0).then(b.1.total_cmp(&a.1)));
    let mut breakpoints = vec![0.0];
    let mut values: Vec<f64> = Vec::new();
    let mut group_masses: Vec<f64> = Vec::new();
    for (a, mass) in entries {
        if values.last() == Some(&a) {
            *group_masses.last_mut().unwrap() += mass;
        } else {
            values.push(a);
            group_masses.push(mass);
        }
    }
    let mut acc = 0.0;
    for gm in group_masses {
        acc += gm;
        breakpoints.push(acc);
    }
    StepRearrangement {
        breakpoints,
        values,
    }
}

/// `lambda_nu(lambda) = nu({Q : |u_Q s_Q| > lambda})`.
pub fn distribution(
    s: &CoeffSeq,
    m: &MeasureSpec,
    lambda: f64,
    u: Option<&dyn CubeWeights>,
) -> f64 {
    let mut masses: Vec<f64> = weighted_entries(s, m, u)
        .into_iter()
        .filter(|&(a, _)| a > lambda)
        .map(|(_, mass)| mass)
        .collect();
    crate::dyadic::sum_descending(&mut masses)
}

/// `||s||_{l^mu_{xi,eta}(u,nu)}` from the rearrangement.
///
/// For `mu < inf` the integral is accumulated by parts,
/// `sum_k (v_k^mu - v_{k+1}^mu) G(T_k)` with `G(T) = int_0^T eta~(t)^mu dt/t`,
/// which keeps every term nonnegative. For `mu = inf` the supremum of
/// `eta~(t) s*(t)` is taken at step right ends `T_k`: `eta~` is nondecreasing
/// and `s*` is constant on `[T_{k-1}, T_k)`.
pub fn lorentz_norm(s: &CoeffSeq, m: &MeasureSpec, p: &LorentzParams<'_>) -> Result<f64> {
    p.validate()?;
    let r = rearrange(s, m, p.weights);
    if r.is_empty() {
        return Ok(0.0);
    }
    let w = p.effective_weight();
    let top = r.values[0];
    if p.mu.is_infinite() {
        return Ok(r
            .values
            .iter()
            .zip(&r.breakpoints[1..])
            .map(|(&v, &t)| v * w.eval(t))
            .fold(0.0, f64::max));
    }
    let g = w.powered(p.mu);
    let mut terms = Vec::with_capacity(r.values.len());
    for (k, &v) in r.values.iter().enumerate() {
        let next = r.values.get(k + 1).copied().unwrap_or(0.0);
        let jump = (v / top).powf(p.mu) - (next / top).powf(p.mu);
        terms.push(jump * g.integral_dt_over_t(0.0, r.breakpoints[k + 1], p.tol)?);
    }
    let total = crate::dyadic::sum_descending(&mut terms);
    Ok(top * total.powf(1.0 / p.mu))
}

/// Distribution-function form
/// `(mu int_0^inf [lambda eta~(lambda_nu(lambda))]^mu dlambda/lambda)^{1/mu}`
/// (`sup_lambda lambda eta~(lambda_nu(lambda))` for `mu = inf`).
///
/// The factor `mu` normalizes the form so that a level set `c 1_Gamma`
/// evaluates to `c eta~(nu(Gamma))`. `lambda_nu` is a step function of
/// `lambda`, so the integral is a finite sum of `int lambda^{mu-1}` pieces.
pub fn lorentz_norm_via_distribution(
    s: &CoeffSeq,
    m: &MeasureSpec,
    p: &LorentzParams<'_>,
) -> Result<f64> {
    p.validate()?;
    let w = p.effective_weight();
    if !w.in_w_plus() {
        return Err(Error::Capability(format!(
            "distribution form needs t^xi eta(t) in W_+, got {w}"
        )));
    }
    let u = p.weights.unwrap_or(&UnitWeights);
    let mut levels: Vec<f64> = s.iter().map(|(q, v)| (u.weight(q) * v).abs()).collect();
    levels.retain(|&a| a > 0.0);
    if levels.is_empty() {
        return Ok(0.0);
    }
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let top = *levels.last().unwrap();

    // lambda in (lo, hi]: lambda_nu is constant, evaluated just below hi
    let mut lo = 0.0;
    let mut pieces = Vec::with_capacity(levels.len());
    let mut sup: f64 = 0.0;
    for &hi in &levels {
        let mass = distribution(s, m, 0.5 * (lo + hi), p.weights);
        let height = w.eval(mass);
        if p.mu.is_infinite() {
            sup = sup.max(hi * height);
        } else {
            let span = (hi / top).powf(p.mu) - (lo / top).powf(p.mu);
            pieces.push(span * height.powf(p.mu));
        }
        lo = hi;
    }
    if p.mu.is_infinite() {
        return Ok(sup);
    }
    let total = crate::dyadic::sum_descending(&mut pieces);
    Ok(top * total.powf(1.0 / p.mu))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::{CubeSet, DyadicCube};

    fn q1(j: i32, k: i64) -> DyadicCube {
        DyadicCube::new(j, vec![k])
    }

    /// Under nu_{-1} the atom on |Q| = 1/2 has mass 2, the one on |Q| = 2 has mass 1/2.
    fn two_atoms() -> (CoeffSeq, MeasureSpec) {
        let s = CoeffSeq::from_pairs(1, [(q1(1, 0), 3.0), (q1(-1, 5), 1.0)]).unwrap();
        (s, MeasureSpec::new(-1.0))
    }

    #[test]
    fn rearrangement_of_two_atoms() {
        let (s, m) = two_atoms();
        let r = rearrange(&s, &m, None);
        assert_eq!(r.breakpoints, vec![0.0, 2.0, 2.5]);
        // masses: nu_{-1}(Q_{1,0}) = 2, nu_{-1}(Q_{-1,5}) = 1/2
        assert_eq!(r.values, vec![3.0, 1.0]);
        assert!(rearrange(&CoeffSeq::zero(1), &m, None).is_empty());
    }

    #[test]
    fn spec_two_atom_steps() {
        // nu_1 gives masses 0.5 (j = 1) and 2 (j = -1)
        let s = CoeffSeq::from_pairs(1, [(q1(1, 0), 3.0), (q1(-1, 0), 1.0)]).unwrap();
        let r = rearrange(&s, &MeasureSpec::new(1.0), None);
        assert_eq!(r.breakpoints, vec![0.0, 0.5, 2.5]);
        assert_eq!(r.values, vec![3.0, 1.0]);
        assert_eq!(r.eval(0.2), 3.0);
        assert_eq!(r.eval(0.5), 1.0);
        assert_eq!(r.eval(2.5), 0.0);
    }

    #[test]
    fn ties_merge_into_one_step() {
        let s =
            CoeffSeq::from_pairs(1, [(q1(0, 0), 2.0), (q1(0, 1), -2.0), (q1(0, 2), 1.0)]).unwrap();
        let r = rearrange(&s, &MeasureSpec::counting(), None);
        assert_eq!(r.breakpoints, vec![0.0, 2.0, 3.0]);
        assert_eq!(r.values, vec![2.0, 1.0]);
    }

    #[test]
    fn distribution_examples() {
        let s = CoeffSeq::from_pairs(1, [(q1(1, 0), 3.0), (q1(-1, 0), 1.0)]).unwrap();
        // nu_1: masses 0.5 and 2
        let m = MeasureSpec::new(1.0);
        assert_eq!(distribution(&s, &m, 2.0, None), 0.5);
        assert_eq!(distribution(&s, &m, 3.0, None), 0.0);
        assert_eq!(distribution(&s, &m, 1e-300, None), 2.5);
    }

    #[test]
    fn two_forms_on_the_worked_example() {
        let s = CoeffSeq::from_pairs(1, [(q1(1, 0), 3.0), (q1(-1, 0), 1.0)]).unwrap();
        let m = MeasureSpec::new(1.0);
        let eta = WeightFn::power(2.0).unwrap();
        let p = LorentzParams::new(&eta, 2.0);
        let a = lorentz_norm(&s, &m, &p).unwrap();
        let b = lorentz_norm_via_distribution(&s, &m, &p).unwrap();
        assert!((a - 6.5f64.sqrt()).abs() < 1e-14);
        assert!((b - 6.5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn atom_sup_norm() {
        let eta = WeightFn::power(3.0).unwrap();
        let p = LorentzParams::new(&eta, f64::INFINITY);
        for (j, alpha) in [(0, 0.0), (3, 0.5), (-2, 1.7)] {
            let q = q1(j, 1);
            let m = MeasureSpec::new(alpha);
            let s = CoeffSeq::atom(q.clone(), -2.5);
            let v = lorentz_norm(&s, &m, &p).unwrap();
            assert!((v - 2.5 * eta.eval(m.mass(&q))).abs() < 1e-14 * v);
            let w = lorentz_norm_via_distribution(&s, &m, &p).unwrap();
            assert!((w - v).abs() < 1e-14 * v);
        }
    }

    #[test]
    fn normalized_indicator_sup_norm_is_eta_of_mass() {
        let gamma = CubeSet::new(1, [q1(0, 0), q1(1, 0), q1(3, 9), q1(-1, 4)]).unwrap();
        let m = MeasureSpec::new(0.6);
        let u = |q: &DyadicCube| q.volume_pow(-0.3);
        let s = CoeffSeq::normalized_indicator(&gamma, &u);
        for eta in [
            WeightFn::power(1.5).unwrap(),
            WeightFn::power_log(2.0, 0.5).unwrap(),
        ] {
            let p = LorentzParams::new(&eta, f64::INFINITY).with_weights(&u);
            let v = lorentz_norm(&s, &m, &p).unwrap();
            let expected = eta.eval(m.total(&gamma));
            assert!((v - expected).abs() <= 1e-14 * expected);
        }
    }

    #[test]
    fn divergence_is_reported() {
        let eta = WeightFn::power(f64::INFINITY).unwrap();
        let s = CoeffSeq::atom(q1(0, 0), 1.0);
        let m = MeasureSpec::counting();
        let p = LorentzParams::new(&eta, 2.0);
        assert!(matches!(
            lorentz_norm(&s, &m, &p),
            Err(Error::Divergence(_))
        ));
        assert!(matches!(
            lorentz_norm_via_distribution(&s, &m, &p),
            Err(Error::Capability(_))
        ));
        // the shift t^xi restores convergence
        let v = lorentz_norm(&s, &m, &p.with_xi(0.5)).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
        // and mu = inf is fine without it
        assert_eq!(
            lorentz_norm(&s, &m, &LorentzParams::new(&eta, f64::INFINITY)).unwrap(),
            1.0
        );
    }

    #[test]
    fn power_log_uses_quadrature_consistently() {
        let eta = WeightFn::power_log(2.0, 0.5).unwrap();
        let s =
            CoeffSeq::from_pairs(1, [(q1(0, 0), 2.0), (q1(1, 1), 1.0), (q1(2, 0), 0.5)]).unwrap();
        let m = MeasureSpec::new(0.5);
        let p = LorentzParams::new(&eta, 1.5);
        let direct = lorentz_norm(&s, &m, &p).unwrap();
        // brute-force midpoint rule in u = ln t of int (eta s*)^mu dt/t
        let r = rearrange(&s, &m, None);
        // one midpoint grid per step so no cell straddles a jump
        let mut acc = 0.0;
        for k in 0..r.values.len() {
            let hi = r.breakpoints[k + 1].ln();
            let lo = if k == 0 { -80.0 } else { r.breakpoints[k].ln() };
            let n = 200_000;
            let h = (hi - lo) / n as f64;
            for i in 0..n {
                let t = (lo + (i as f64 + 0.5) * h).exp();
                acc += (eta.eval(t) * r.values[k]).powf(1.5) * h;
            }
        }
        let reference = acc.powf(1.0 / 1.5);
        assert!(
            (direct - reference).abs() < 1e-6 * reference,
            "{direct} vs {reference}"
        );
    }
}
