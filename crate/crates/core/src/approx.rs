//! Restricted nonlinear approximation: the error `sigma_nu(t, s)` of the best
//! approximant supported on a set of `nu`-mass at most `t`, the
//! approximation quasi-norm `A^xi_mu(f, nu)`, the dyadic representation
//! `s = sum_k s_k` and empirical Jackson/Bernstein constants.
//!
//! Every error space here is a lattice, so for a fixed support `Gamma` the
//! best approximant is `s` restricted to `Gamma`: any other `t` supported on
//! `Gamma` leaves `|s - t| >= |s 1_{Gamma^c}|` entrywise. The infimum over
//! `Sigma_{t,nu}` is therefore a subset-selection problem over `supp s`.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dyadic::{sum_descending, CubeSet, DyadicCube, MeasureSpec};
use crate::error::{Error, Result};
use crate::lorentz::{lorentz_norm, LorentzParams};
use crate::seq::{CoeffSeq, CubeWeights};
use crate::spaces::SpaceParams;

/// Largest support the exhaustive solver accepts.
pub const BRUTE_MAX: usize = 20;
/// Largest support the mask-based profile solvers accept.
pub const PROFILE_MAX: usize = 128;
/// Relative slack in `nu(Gamma) <= t`, absorbing summation order.
pub const FIT_SLACK: f64 = 1e-12;
const NODE_CAP: u64 = 50_000_000;

/// `nu(Gamma) <= t` up to rounding.
pub fn fits(mass: f64, t: f64) -> bool {
    mass <= t * (1.0 + FIT_SLACK)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    Brute,
    Knapsack,
    Greedy,
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Solver::Brute => "brute",
            Solver::Knapsack => "knapsack",
            Solver::Greedy => "greedy",
        })
    }
}

impl FromStr for Solver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "brute" => Ok(Solver::Brute),
            "knapsack" => Ok(Solver::Knapsack),
            "greedy" => Ok(Solver::Greedy),
            other => Err(Error::Param(format!(
                "unknown solver `{other}` (expected brute, knapsack or greedy)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproxParams {
    pub xi: f64,
    /// `mu` in `(0, inf]`.
    pub mu: f64,
    pub f: SpaceParams,
    pub m: MeasureSpec,
    /// Ordering weights `u` for the greedy solver, which keeps the largest
    /// `|u_Q s_Q|` first. `None` uses `||e_Q||_f nu(Q)^{-1/p}`, the density
    /// order of the additive case.
    pub greedy_weights: Option<crate::spaces::WeightSeq>,
}

impl ApproxParams {
    pub fn new(xi: f64, mu: f64, f: SpaceParams, m: MeasureSpec) -> Result<Self> {
        if !(xi > 0.0 && xi.is_finite()) {
            return Err(Error::Param(format!("xi must be in (0, inf), got {xi}")));
        }
        if !(mu > 0.0) {
            return Err(Error::Param(format!("mu must be in (0, inf], got {mu}")));
        }
        if !m.alpha.is_finite() {
            return Err(Error::Param(format!(
                "alpha must be finite, got {}",
                m.alpha
            )));
        }
        Ok(Self {
            xi,
            mu,
            f,
            m,
            greedy_weights: None,
        })
    }

    pub fn with_greedy_weights(mut self, u: crate::spaces::WeightSeq) -> Self {
        self.greedy_weights = Some(u);
        self
    }

    fn greedy_key(&self, q: &DyadicCube, v: f64) -> f64 {
        match &self.greedy_weights {
            Some(u) => (u.weight(q) * v).abs(),
            None => {
                let p = if self.f.p.is_finite() { self.f.p } else { 1.0 };
                self.f.atom_norm(q) * self.m.mass(q).powf(-1.0 / p) * v.abs()
            }
        }
    }
}

/// The entries of `s` in a fixed order, addressed by bit masks.
struct Items<'a> {
    s: &'a CoeffSeq,
    cubes: Vec<DyadicCube>,
    values: Vec<f64>,
    masses: Vec<f64>,
}

impl<'a> Items<'a> {
    fn new(s: &'a CoeffSeq, a: &ApproxParams) -> Result<Self> {
        if !s.is_empty() && s.dim() != a.f.d {
            return Err(Error::Param(format!(
                "sequence of dimension {} approximated in a space of dimension {}",
                s.dim(),
                a.f.d
            )));
        }
        let (cubes, values): (Vec<_>, Vec<_>) = s.iter().map(|(q, v)| (q.clone(), v)).unzip();
        let masses = cubes.iter().map(|q| a.m.mass(q)).collect();
        Ok(Self {
            s,
            cubes,
            values,
            masses,
        })
    }

    fn len(&self) -> usize {
        self.cubes.len()
    }

    fn full_mask(&self) -> u128 {
        if self.len() == 128 {
            u128::MAX
        } else {
            (1u128 << self.len()) - 1
        }
    }

    fn mass(&self, mask: u128) -> f64 {
        (0..self.len())
            .filter(|&i| mask >> i & 1 == 1)
            .map(|i| self.masses[i])
            .sum()
    }

    fn restricted(&self, mask: u128) -> CoeffSeq {
        let mut out = CoeffSeq::zero(self.s.dim());
        for i in (0..self.len()).filter(|&i| mask >> i & 1 == 1) {
            out.set(self.cubes[i].clone(), self.values[i]);
        }
        out
    }

    fn kept_set(&self, mask: u128) -> CubeSet {
        CubeSet::new(
            self.s.dim(),
            (0..self.len())
                .filter(|&i| mask >> i & 1 == 1)
                .map(|i| self.cubes[i].clone()),
        )
        .expect("cubes share the sequence dimension")
    }

    /// `||s - s 1_Gamma||_f`, evaluated by the norm itself.
    fn residual_error(&self, mask: u128, f: &SpaceParams) -> Result<f64> {
        f.norm(&self.restricted(!mask & self.full_mask()))
    }

    /// `w_i = ||e_Q||_f^p |s_Q|^p`, so `||s 1_A||^p = sum_{i in A} w_i`.
    fn additive_weights(&self, f: &SpaceParams) -> Vec<f64> {
        self.cubes
            .iter()
            .zip(&self.values)
            .map(|(q, v)| f.additive_weight(q) * v.abs().powf(f.p))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigmaResult {
    pub error: f64,
    pub kept: CubeSet,
    /// False when the branch-and-bound node cap stopped the search early.
    pub certified: bool,
}

/// `sigma_nu(t, s)` and an optimal support. `Brute` enumerates every subset
/// (at most `BRUTE_MAX` entries); `Knapsack` needs an additive error space
/// (`p = q`). `Greedy` is rejected here, see [`sigma_greedy`].
pub fn sigma_exact(s: &CoeffSeq, t: f64, a: &ApproxParams, solver: Solver) -> Result<SigmaResult> {
    check_budget(t)?;
    let items = Items::new(s, a)?;
    match solver {
        Solver::Brute => {
            require_brute(&items)?;
            let full = items.full_mask();
            let best = (0..=full)
                .into_par_iter()
                .filter(|&mask| fits(items.mass(mask), t))
                .map(|mask| items.residual_error(mask, &a.f).map(|e| (e, mask)))
                .try_reduce(|| (f64::INFINITY, 0), |x, y| Ok(better(x, y)))?;
            Ok(SigmaResult {
                error: best.0,
                kept: items.kept_set(best.1),
                certified: true,
            })
        }
        Solver::Knapsack => {
            require_additive(&a.f)?;
            if items.len() > PROFILE_MAX {
                return Err(Error::Capability(format!(
                    "knapsack solver handles at most {PROFILE_MAX} entries, got {}",
                    items.len()
                )));
            }
            let weights = items.additive_weights(&a.f);
            let (mask, certified) = knapsack(&weights, &items.masses, t);
            Ok(SigmaResult {
                error: items.residual_error(mask, &a.f)?,
                kept: items.kept_set(mask),
                certified,
            })
        }
        Solver::Greedy => Err(Error::Capability(
            "greedy selection is not exact; call sigma_greedy".into(),
        )),
    }
}

fn check_budget(t: f64) -> Result<()> {
    if !(t >= 0.0) {
        return Err(Error::Param(format!("budget must be >= 0, got {t}")));
    }
    Ok(())
}

fn require_brute(items: &Items<'_>) -> Result<()> {
    if items.len() > BRUTE_MAX {
        return Err(Error::Capability(format!(
            "exhaustive search handles at most {BRUTE_MAX} entries, got {}",
            items.len()
        )));
    }
    Ok(())
}

fn require_additive(f: &SpaceParams) -> Result<()> {
    if !f.is_additive() {
        return Err(Error::Capability(format!(
            "knapsack solver needs p = q < inf, got {f}"
        )));
    }
    Ok(())
}

/// Smaller error wins; ties go to the smaller mask so the result does not
/// depend on the reduction order.
fn better(x: (f64, u128), y: (f64, u128)) -> (f64, u128) {
    match x.0.total_cmp(&y.0) {
        std::cmp::Ordering::Less => x,
        std::cmp::Ordering::Greater => y,
        std::cmp::Ordering::Equal => {
            if x.1 <= y.1 {
                x
            } else {
                y
            }
        }
    }
}

/// 0/1 knapsack `max sum_A w_i` subject to `sum_A m_i <= t` by depth-first
/// branch and bound with the fractional (density-order) relaxation bound.
/// Returns the kept mask and whether the tree was exhausted.
fn knapsack(weights: &[f64], masses: &[f64], t: f64) -> (u128, bool) {
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&i, &j| {
        (weights[j] / masses[j])
            .total_cmp(&(weights[i] / masses[i]))
            .then(i.cmp(&j))
    });
    let w: Vec<f64> = order.iter().map(|&i| weights[i]).collect();
    let m: Vec<f64> = order.iter().map(|&i| masses[i]).collect();

    struct Search<'s> {
        w: &'s [f64],
        m: &'s [f64],
        t: f64,
        best_value: f64,
        best: u128,
        nodes: u64,
    }

    impl Search<'_> {
        fn bound(&self, k: usize, mass: f64, value: f64) -> f64 {
            let mut room = self.t * (1.0 + FIT_SLACK) - mass;
            let mut b = value;
            for i in k..self.w.len() {
                if self.m[i] <= room {
                    room -= self.m[i];
                    b += self.w[i];
                } else {
                    b += self.w[i] * (room / self.m[i]);
                    break;
                }
            }
            b
        }

        fn go(&mut self, k: usize, mass: f64, value: f64, chosen: u128) {
            self.nodes += 1;
            if value > self.best_value {
                self.best_value = value;
                self.best = chosen;
            }
            if k == self.w.len() || self.nodes > NODE_CAP {
                return;
            }
            // slack for rounding in the bound itself
            if self.bound(k, mass, value) * (1.0 + 1e-12) <= self.best_value {
                return;
            }
            if fits(mass + self.m[k], self.t) {
                self.go(
                    k + 1,
                    mass + self.m[k],
                    value + self.w[k],
                    chosen | 1u128 << k,
                );
            }
            self.go(k + 1, mass, value, chosen);
        }
    }

    let mut search = Search {
        w: &w,
        m: &m,
        t,
        best_value: 0.0,
        best: 0,
        nodes: 0,
    };
    search.go(0, 0.0, 0.0, 0);
    let certified = search.nodes <= NODE_CAP;
    let mut mask = 0u128;
    for (pos, &i) in order.iter().enumerate() {
        if search.best >> pos & 1 == 1 {
            mask |= 1u128 << i;
        }
    }
    (mask, certified)
}

/// Greedy selection: cubes in decreasing `|u_Q s_Q|`, each admitted when it
/// still fits the budget. Never better than [`sigma_exact`].
pub fn sigma_greedy(s: &CoeffSeq, t: f64, a: &ApproxParams) -> Result<SigmaResult> {
    check_budget(t)?;
    let items = Items::new(s, a)?;
    if items.len() > PROFILE_MAX {
        return Err(Error::Capability(format!(
            "greedy solver handles at most {PROFILE_MAX} entries, got {}",
            items.len()
        )));
    }
    let mut mask = 0u128;
    let mut mass = 0.0;
    for i in greedy_order(&items, a) {
        if fits(mass + items.masses[i], t) {
            mass += items.masses[i];
            mask |= 1u128 << i;
        }
    }
    Ok(SigmaResult {
        error: items.residual_error(mask, &a.f)?,
        kept: items.kept_set(mask),
        certified: true,
    })
}

fn greedy_order(items: &Items<'_>, a: &ApproxParams) -> Vec<usize> {
    let keys: Vec<f64> = (0..items.len())
        .map(|i| a.greedy_key(&items.cubes[i], items.values[i]))
        .collect();
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by(|&i, &j| keys[j].total_cmp(&keys[i]).then(i.cmp(&j)));
    order
}

/// `t -> sigma_nu(t, s)` as a step function: `errors[i]` on
/// `[breakpoints[i], breakpoints[i+1])`, with `breakpoints[0] = 0`, the last
/// breakpoint `nu(supp s)` and the last error `0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigmaProfile {
    pub breakpoints: Vec<f64>,
    pub errors: Vec<f64>,
    pub supports: Vec<CubeSet>,
}

impl SigmaProfile {
    pub fn len(&self) -> usize {
        self.breakpoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.breakpoints.len() <= 1
    }

    fn index_at(&self, t: f64) -> usize {
        self.breakpoints
            .iter()
            .rposition(|&b| fits(b, t))
            .unwrap_or(0)
    }

    pub fn sigma_at(&self, t: f64) -> f64 {
        self.errors[self.index_at(t)]
    }

    /// The approximant realizing `sigma_at(t)`.
    pub fn support_at(&self, t: f64) -> &CubeSet {
        &self.supports[self.index_at(t)]
    }

    /// `sup_t t^xi sigma(t)`, reached as `t` approaches a breakpoint from below.
    pub fn weighted_sup(&self, xi: f64) -> f64 {
        self.errors
            .iter()
            .zip(&self.breakpoints[1..])
            .map(|(&e, &t)| e * t.powf(xi))
            .fold(0.0, f64::max)
    }
}

/// Tabulates `sigma_nu(t, s)` at every budget where it changes. `Knapsack`
/// walks the Pareto frontier of (mass, kept weight) exactly; `Brute`
/// enumerates all subsets; `Greedy` uses the threshold sets
/// `{Q : |u_Q s_Q| >= lambda}`, an upper bound on the exact profile.
pub fn sigma_profile(s: &CoeffSeq, a: &ApproxParams, solver: Solver) -> Result<SigmaProfile> {
    let items = Items::new(s, a)?;
    if items.len() > PROFILE_MAX {
        return Err(Error::Capability(format!(
            "profiles handle at most {PROFILE_MAX} entries, got {}",
            items.len()
        )));
    }
    let candidates: Vec<u128> = match solver {
        Solver::Brute => {
            require_brute(&items)?;
            (0..=items.full_mask()).collect()
        }
        Solver::Knapsack => {
            require_additive(&a.f)?;
            pareto_masks(&items.additive_weights(&a.f), &items.masses)
        }
        Solver::Greedy => {
            let mut masks = vec![0u128];
            let mut mask = 0u128;
            for i in greedy_order(&items, a) {
                mask |= 1u128 << i;
                masks.push(mask);
            }
            masks
        }
    };
    let mut points: Vec<(f64, f64, u128)> = candidates
        .into_par_iter()
        .map(|mask| {
            items
                .residual_error(mask, &a.f)
                .map(|e| (items.mass(mask), e, mask))
        })
        .collect::<Result<_>>()?;
    points.sort_by(|x, y| {
        x.0.total_cmp(&y.0)
            .then(x.1.total_cmp(&y.1))
            .then(x.2.cmp(&y.2))
    });

    let mut profile = SigmaProfile {
        breakpoints: Vec::new(),
        errors: Vec::new(),
        supports: Vec::new(),
    };
    for (mass, err, mask) in points {
        if profile.errors.last().is_some_and(|&last| err >= last) {
            continue;
        }
        profile.breakpoints.push(mass);
        profile.errors.push(err);
        profile.supports.push(items.kept_set(mask));
    }
    if profile.breakpoints.is_empty() {
        profile.breakpoints.push(0.0);
        profile.errors.push(0.0);
        profile.supports.push(CubeSet::empty(s.dim()));
    }
    Ok(profile)
}

/// Masks on the Pareto frontier of `(sum m, sum w)`: a mask survives when no
/// mask of no larger mass keeps at least as much weight.
fn pareto_masks(weights: &[f64], masses: &[f64]) -> Vec<u128> {
    let mut frontier: Vec<(f64, f64, u128)> = vec![(0.0, 0.0, 0)];
    for i in 0..weights.len() {
        let extended: Vec<(f64, f64, u128)> = frontier
            .iter()
            .map(|&(m, w, mask)| (m + masses[i], w + weights[i], mask | 1u128 << i))
            .collect();
        let mut merged = frontier;
        merged.extend(extended);
        merged.sort_by(|x, y| x.0.total_cmp(&y.0).then(y.1.total_cmp(&x.1)));
        let mut kept: Vec<(f64, f64, u128)> = Vec::with_capacity(merged.len());
        for point in merged {
            if kept.last().is_none_or(|last| point.1 > last.1) {
                kept.push(point);
            }
        }
        frontier = kept;
    }
    frontier.into_iter().map(|(_, _, mask)| mask).collect()
}

/// Exact profile with the cheapest exact solver for `a.f`.
pub fn exact_profile(s: &CoeffSeq, a: &ApproxParams) -> Result<SigmaProfile> {
    let solver = if a.f.is_additive() {
        Solver::Knapsack
    } else {
        Solver::Brute
    };
    sigma_profile(s, a, solver)
}

/// `||s||_{A^xi_mu} = (int_0^inf [t^xi sigma(t)]^mu dt/t)^{1/mu}` from a
/// profile: on `[t_i, t_{i+1})` the integral is
/// `e_i^mu (t_{i+1}^{xi mu} - t_i^{xi mu}) / (xi mu)`.
pub fn approx_norm_from_profile(profile: &SigmaProfile, xi: f64, mu: f64) -> f64 {
    if mu.is_infinite() {
        return profile.weighted_sup(xi);
    }
    let r = xi * mu;
    let top = profile.errors[0];
    if top == 0.0 {
        return 0.0;
    }
    let mut pieces: Vec<f64> = profile
        .errors
        .iter()
        .zip(profile.breakpoints.windows(2))
        .map(|(&e, w)| (e / top).powf(mu) * (w[1].powf(r) - w[0].powf(r)) / r)
        .collect();
    top * sum_descending(&mut pieces).powf(1.0 / mu)
}

pub fn approx_norm(s: &CoeffSeq, a: &ApproxParams, solver: Solver) -> Result<f64> {
    Ok(approx_norm_from_profile(
        &sigma_profile(s, a, solver)?,
        a.xi,
        a.mu,
    ))
}

/// `(ln 2 sum_k [2^{k xi} sigma(2^k)]^mu)^{1/mu}` (`sup_k` for `mu = inf`).
///
/// Comparing each `[2^k, 2^{k+1})` piece of the integral with its endpoints
/// puts the integral form within `[2^{-xi}, 2^{xi}]` times this value. The
/// `k` below the first positive breakpoint form a geometric tail summed in
/// closed form; `sigma` vanishes from `nu(supp s)` on.
pub fn approx_norm_dyadic(profile: &SigmaProfile, xi: f64, mu: f64) -> f64 {
    let top = profile.errors[0];
    if top == 0.0 {
        return 0.0;
    }
    let t1 = profile.breakpoints[1];
    let t_end = *profile.breakpoints.last().unwrap();
    // largest k with 2^k < t1
    let mut k0 = t1.log2().floor() as i32;
    while (k0 as f64).exp2() >= t1 {
        k0 -= 1;
    }
    while ((k0 + 1) as f64).exp2() < t1 {
        k0 += 1;
    }
    let k_end = t_end.log2().ceil() as i32 + 1;
    let term = |k: i32| (k as f64 * xi).exp2() * profile.sigma_at((k as f64).exp2());
    if mu.is_infinite() {
        return (k0..=k_end).map(term).fold(0.0, f64::max);
    }
    let r = xi * mu;
    // sum_{k <= k0} (2^{k xi} top)^mu
    let tail = (k0 as f64 * r).exp2() / (1.0 - (-r).exp2());
    let mut pieces: Vec<f64> = (k0 + 1..=k_end).map(|k| (term(k) / top).powf(mu)).collect();
    pieces.push(tail);
    top * (std::f64::consts::LN_2 * sum_descending(&mut pieces)).powf(1.0 / mu)
}

/// One piece `s_k` of the dyadic representation, `nu(supp s_k) <= 2^k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub k: i32,
    pub seq: CoeffSeq,
    pub norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub pieces: Vec<Piece>,
    /// `(sum_k [2^{k xi} ||s_k||_f]^mu)^{1/mu}`.
    pub score: f64,
}

impl Decomposition {
    pub fn reconstruct(&self, d: usize) -> CoeffSeq {
        self.pieces
            .iter()
            .fold(CoeffSeq::zero(d), |acc, piece| acc.add(&piece.seq))
    }
}

/// `s = sum_k (phi_k - phi_{k-1})` where `phi_k` is a best approximant with
/// budget `2^{k-1}`. Only finitely many pieces are nonzero: `phi_k = 0` once
/// `2^{k-1}` is below every `nu(Q)`, and `phi_k = s` once `2^{k-1} >= nu(supp s)`.
/// The `phi_k` are restrictions of `s`, so the pieces sum back to `s`
/// coefficient by coefficient without rounding.
pub fn decompose(s: &CoeffSeq, a: &ApproxParams) -> Result<Decomposition> {
    if s.is_empty() {
        return Ok(Decomposition {
            pieces: Vec::new(),
            score: 0.0,
        });
    }
    let profile = exact_profile(s, a)?;
    let min_mass = s.cubes().map(|q| a.m.mass(q)).fold(f64::INFINITY, f64::min);
    let total = *profile.breakpoints.last().unwrap();
    let phi = |k: i32| -> CoeffSeq {
        let kept = profile.support_at(((k - 1) as f64).exp2());
        s.filter(|q| kept.contains(q))
    };
    let mut k = min_mass.log2().floor() as i32;
    while !phi(k).is_empty() {
        k -= 1;
    }
    let mut prev = phi(k);
    let mut pieces = Vec::new();
    loop {
        k += 1;
        let cur = phi(k);
        let seq = cur.sub(&prev);
        if !seq.is_empty() {
            let norm = a.f.norm(&seq)?;
            pieces.push(Piece { k, seq, norm });
        }
        if fits(total, ((k - 1) as f64).exp2()) {
            break;
        }
        prev = cur;
    }
    let terms = pieces.iter().map(|p| (p.k as f64 * a.xi).exp2() * p.norm);
    let score = if a.mu.is_infinite() {
        terms.fold(0.0, f64::max)
    } else {
        let mut pw: Vec<f64> = terms.map(|x| x.powf(a.mu)).collect();
        sum_descending(&mut pw).powf(1.0 / a.mu)
    };
    Ok(Decomposition { pieces, score })
}

/// Bounds `[lo, hi]` with `lo <= score / ||s||_{A^xi_mu} <= hi` for the
/// decomposition built from exact best approximants.
///
/// Upper: `||s_k||^rho <= sigma(2^{k-1})^rho + sigma(2^{k-2})^rho`.
/// Lower: `sigma(2^k) <= ||sum_{j>k} s_j||` and a discrete Hardy inequality
/// with exponent `r0 = min(rho, mu)`.
pub fn decomposition_ratio_bounds(xi: f64, mu: f64, rho: f64) -> (f64, f64) {
    let ln2 = std::f64::consts::LN_2;
    if mu.is_infinite() {
        let hardy = ((-xi * rho).exp2() / (1.0 - (-xi * rho).exp2())).powf(1.0 / rho);
        return (1.0 / (xi.exp2() * hardy), (1.0 / rho + 3.0 * xi).exp2());
    }
    let r0 = rho.min(mu);
    let hardy = ((-xi * r0).exp2() / (1.0 - (-xi * r0).exp2())).powf(1.0 / r0);
    let lo = 1.0 / (xi.exp2() * ln2.powf(1.0 / mu) * hardy);
    let split = (mu / rho - 1.0).max(0.0).exp2();
    let hi = (split * ((xi * mu).exp2() + (2.0 * xi * mu).exp2()) / ln2).powf(1.0 / mu) * xi.exp2();
    (lo, hi)
}

/// `sup_{s, t} t^xi sigma_nu(t, s) / ||s||_{l^mu_{xi,eta}(u, nu)}` over a suite.
/// `lp` must carry the same `xi` and `mu` as `a`; its measure is `a.m`.
pub fn jackson_constant(
    suite: &[CoeffSeq],
    a: &ApproxParams,
    lp: &LorentzParams<'_>,
    solver: Solver,
) -> Result<f64> {
    check_lorentz_match(a, lp)?;
    let ratios: Vec<f64> = suite
        .par_iter()
        .filter(|s| !s.is_empty())
        .map(|s| {
            let profile = sigma_profile(s, a, solver)?;
            let num = profile.weighted_sup(a.xi);
            Ok(num / lorentz_norm(s, &a.m, lp)?)
        })
        .collect::<Result<_>>()?;
    Ok(ratios.into_iter().fold(0.0, f64::max))
}

/// `sup_s ||s||_{l^mu_{xi,eta}(u, nu)} / (nu(supp s)^xi ||s||_f)` over a suite.
pub fn bernstein_constant(
    suite: &[CoeffSeq],
    a: &ApproxParams,
    lp: &LorentzParams<'_>,
) -> Result<f64> {
    check_lorentz_match(a, lp)?;
    let ratios: Vec<f64> = suite
        .par_iter()
        .filter(|s| !s.is_empty())
        .map(|s| {
            let budget = a.m.total(s.cubes());
            Ok(lorentz_norm(s, &a.m, lp)? / (budget.powf(a.xi) * a.f.norm(s)?))
        })
        .collect::<Result<_>>()?;
    Ok(ratios.into_iter().fold(0.0, f64::max))
}

fn check_lorentz_match(a: &ApproxParams, lp: &LorentzParams<'_>) -> Result<()> {
    if lp.xi != a.xi || lp.mu != a.mu {
        return Err(Error::Param(format!(
            "Lorentz parameters (xi={}, mu={}) differ from the approximation ones (xi={}, mu={})",
            lp.xi, lp.mu, a.xi, a.mu
        )));
    }
    Ok(())
}
