//! Triebel-Lizorkin `f^s_{p,q}` and Besov `b^s_{p,q}` sequence quasi-norms on
//! finitely supported sequences.
//!
//! In `f^s_{p,q}` the term of a cube is
//! `|Q|^{-s/d+1/q-1/2} |s_Q| chi_Q |Q|^{-1/q} = |Q|^{-s/d-1/2} |s_Q| chi_Q`,
//! so the inner function is `(sum_Q (a_Q chi_Q)^q)^{1/q}` with
//! `a_Q = |Q|^{-s/d-1/2}|s_Q|`, or `max_Q a_Q chi_Q` when `q = inf`. It is
//! piecewise constant on the containment forest and integrates exactly.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dyadic::{integrate_cube_function, Accumulate, DyadicCube, MeasureSpec};
use crate::error::{Error, Result};
use crate::lorentz::{lorentz_norm, LorentzParams};
use crate::seq::{CoeffSeq, CubeWeights};
use crate::weights::WeightFn;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpaceKind {
    TriebelLizorkin,
    Besov,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceParams {
    pub kind: SpaceKind,
    pub s: f64,
    pub p: f64,
    pub q: f64,
    pub d: usize,
}

impl SpaceParams {
    /// `f^s_{p,q}`, `0 < p < inf`, `0 < q <= inf`.
    pub fn tl(s: f64, p: f64, q: f64, d: usize) -> Result<Self> {
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::Param(format!(
                "f^s_(p,q) needs 0 < p < inf, got p = {p}"
            )));
        }
        Self::checked(SpaceKind::TriebelLizorkin, s, p, q, d)
    }

    /// `b^s_{p,q}`, `0 < p, q <= inf`.
    pub fn besov(s: f64, p: f64, q: f64, d: usize) -> Result<Self> {
        if !(p > 0.0) {
            return Err(Error::Param(format!("b^s_(p,q) needs p > 0, got p = {p}")));
        }
        Self::checked(SpaceKind::Besov, s, p, q, d)
    }

    fn checked(kind: SpaceKind, s: f64, p: f64, q: f64, d: usize) -> Result<Self> {
        if !s.is_finite() {
            return Err(Error::Param(format!("smoothness must be finite, got {s}")));
        }
        if !(q > 0.0) {
            return Err(Error::Param(format!("fine exponent must be > 0, got {q}")));
        }
        if d == 0 {
            return Err(Error::Param("dimension must be >= 1".into()));
        }
        Ok(Self { kind, s, p, q, d })
    }

    /// `rho = min(1, p, q)`: `||a+b||^rho <= ||a||^rho + ||b||^rho`.
    pub fn rho(&self) -> f64 {
        1f64.min(self.p).min(self.q)
    }

    /// Exponent `e` with `||e_Q|| = |Q|^e`, i.e. `-s/d + 1/p - 1/2`.
    pub fn atom_exponent(&self) -> f64 {
        -self.s / self.d as f64 + recip(self.p) - 0.5
    }

    /// `||e_Q|| = |Q|^{-s/d+1/p-1/2}`, same for both scales of spaces.
    pub fn atom_norm(&self, q: &DyadicCube) -> f64 {
        q.volume_pow(self.atom_exponent())
    }

    /// `||s||^p = sum_Q w_Q |s_Q|^p` holds exactly when `p = q < inf`
    /// (`f^s_{p,p} = b^s_{p,p}`).
    pub fn is_additive(&self) -> bool {
        self.p == self.q && self.p.is_finite()
    }

    /// `w_Q = ||e_Q||^p` for additive spaces.
    pub fn additive_weight(&self, q: &DyadicCube) -> f64 {
        q.volume_pow(self.p * self.atom_exponent())
    }

    pub fn norm(&self, s: &CoeffSeq) -> Result<f64> {
        match self.kind {
            SpaceKind::TriebelLizorkin => tl_norm(s, self),
            SpaceKind::Besov => besov_norm(s, self),
        }
    }
}

impl fmt::Display for SpaceParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.kind {
            SpaceKind::TriebelLizorkin => "f",
            SpaceKind::Besov => "b",
        };
        write!(
            f,
            "{tag}(s={},p={},q={},d={})",
            self.s, self.p, self.q, self.d
        )
    }
}

fn recip(x: f64) -> f64 {
    if x.is_infinite() {
        0.0
    } else {
        1.0 / x
    }
}

fn check_dim(s: &CoeffSeq, params: &SpaceParams) -> Result<()> {
    if s.dim() != params.d && !s.is_empty() {
        return Err(Error::Param(format!(
            "sequence of dimension {} measured in a space of dimension {}",
            s.dim(),
            params.d
        )));
    }
    Ok(())
}

/// `||s||_{f^s_{p,q}}`, exact up to rounding.
pub fn tl_norm(s: &CoeffSeq, params: &SpaceParams) -> Result<f64> {
    if params.kind != SpaceKind::TriebelLizorkin {
        return Err(Error::Param(format!(
            "{params} is not a Triebel-Lizorkin space"
        )));
    }
    check_dim(s, params)?;
    let shift = -params.s / params.d as f64 - 0.5;
    let coeffs: Vec<(DyadicCube, f64)> = s
        .iter()
        .map(|(q, v)| (q.clone(), q.volume_pow(shift) * v.abs()))
        .collect();
    let top = coeffs.iter().map(|(_, a)| *a).fold(0.0, f64::max);
    if top == 0.0 {
        return Ok(0.0);
    }
    let (p, q) = (params.p, params.q);
    let inner = if q.is_infinite() {
        let terms: Vec<_> = coeffs.into_iter().map(|(c, a)| (c, a / top)).collect();
        integrate_cube_function(&terms, Accumulate::Max, p, p)?
    } else {
        let terms: Vec<_> = coeffs
            .into_iter()
            .map(|(c, a)| (c, (a / top).powf(q)))
            .collect();
        integrate_cube_function(&terms, Accumulate::Sum, p / q, p)?
    };
    Ok(top * inner)
}

/// `||s||_{b^s_{p,q}}` as a nested sum over scales (sups for infinite exponents).
pub fn besov_norm(s: &CoeffSeq, params: &SpaceParams) -> Result<f64> {
    if params.kind != SpaceKind::Besov {
        return Err(Error::Param(format!("{params} is not a Besov space")));
    }
    check_dim(s, params)?;
    let e = params.atom_exponent();
    let mut by_scale: BTreeMap<i32, Vec<f64>> = BTreeMap::new();
    for (q, v) in s.iter() {
        by_scale
            .entry(q.scale())
            .or_default()
            .push(q.volume_pow(e) * v.abs());
    }
    let top = by_scale.values().flatten().copied().fold(0.0, f64::max);
    if top == 0.0 {
        return Ok(0.0);
    }
    let levels: Vec<f64> = by_scale
        .into_values()
        .map(|mut terms| {
            terms.iter_mut().for_each(|a| *a /= top);
            lp_sum(&mut terms, params.p)
        })
        .collect();
    let mut levels = levels;
    Ok(top * lp_sum(&mut levels, params.q))
}

/// `(sum |x|^p)^{1/p}`, or the max for `p = inf`.
fn lp_sum(values: &mut [f64], p: f64) -> f64 {
    if p.is_infinite() {
        return values.iter().copied().fold(0.0, f64::max);
    }
    let mut powered: Vec<f64> = values.iter().map(|a| a.powf(p)).collect();
    crate::dyadic::sum_descending(&mut powered).powf(1.0 / p)
}

/// `u_Q = ||e_Q||_{f_2}` for a normalization space `f_2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightSeq {
    pub generator: SpaceParams,
}

impl WeightSeq {
    pub fn new(generator: SpaceParams) -> Self {
        Self { generator }
    }
}

impl CubeWeights for WeightSeq {
    fn weight(&self, q: &DyadicCube) -> f64 {
        self.generator.atom_norm(q)
    }
}

pub fn weight_of(q: &DyadicCube, w: &WeightSeq) -> f64 {
    w.weight(q)
}

/// `alpha = p1((s2 - s1)/d - 1/p2) + 1`.
pub fn critical_alpha(s1: f64, p1: f64, f2: &SpaceParams) -> f64 {
    p1 * ((f2.s - s1) / f2.d as f64 - 1.0 / f2.p) + 1.0
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LorentzBesovCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
    pub alpha: f64,
    pub gamma: f64,
}

/// Compares `||s||_{l^{tau,tau}(u, nu_alpha)}` (u from `f2`) against
/// `||s||_{b^gamma_{tau,tau}}` with `gamma = s1 + d(1/tau - 1/p1)(1 - alpha)`.
pub fn lorentz_equals_besov_check(
    s: &CoeffSeq,
    s1: f64,
    p1: f64,
    f2: &SpaceParams,
    tau: f64,
) -> Result<LorentzBesovCheck> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::Param(format!("tau must be in (0, inf), got {tau}")));
    }
    let d = f2.d as f64;
    let alpha = critical_alpha(s1, p1, f2);
    let gamma = s1 + d * (1.0 / tau - 1.0 / p1) * (1.0 - alpha);
    let u = WeightSeq::new(*f2);
    let eta = WeightFn::power(tau)?;
    let lhs = lorentz_norm(
        s,
        &MeasureSpec::new(alpha),
        &LorentzParams::new(&eta, tau).with_weights(&u),
    )?;
    let rhs = besov_norm(s, &SpaceParams::besov(gamma, tau, tau, f2.d)?)?;
    let ok = (lhs - rhs).abs() <= 1e-10 * lhs.max(rhs).max(1.0);
    Ok(LorentzBesovCheck {
        lhs,
        rhs,
        ok,
        alpha,
        gamma,
    })
}
