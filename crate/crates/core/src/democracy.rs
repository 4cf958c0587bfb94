//! Democracy of normalized indicators: `||sum_{Q in Gamma} e_Q/u_Q||_{f1}`
//! against `nu_alpha(Gamma)^{1/p1}`, with `u_Q = ||e_Q||_{f2}`.
//!
//! With `g = (s2 - s1)/d - 1/p2` the normalized indicator has TL term
//! `|Q|^g chi_Q`, so its `f1` norm is `(int [sum_Q |Q|^{g q1} chi_Q]^{p1/q1})^{1/p1}`.
//! The norm does not see `alpha`; only the comparison mass `nu_alpha(Gamma)`
//! does. At the critical `alpha`, `g = (alpha - 1)/p1`.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dyadic::{integrate_cube_function, Accumulate, CubeSet, DyadicCube, MeasureSpec};
use crate::error::{Error, Result};
use crate::spaces::{critical_alpha, SpaceKind, SpaceParams};

/// Families with more cubes than this are only evaluated in closed form.
pub const MAX_EXPLICIT_CUBES: usize = 1 << 18;
const ALPHA_EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DemocracyCase {
    pub f1: SpaceParams,
    pub f2: SpaceParams,
    pub alpha: f64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub admissible: bool,
    pub reason: String,
}

impl DemocracyCase {
    pub fn new(f1: SpaceParams, f2: SpaceParams, alpha: f64) -> Result<Self> {
        if f1.kind != SpaceKind::TriebelLizorkin {
            return Err(Error::Param(format!(
                "f1 must be a Triebel-Lizorkin space, got {f1}"
            )));
        }
        if f1.d != f2.d {
            return Err(Error::Param(format!(
                "f1 and f2 live in different dimensions ({} and {})",
                f1.d, f2.d
            )));
        }
        if !f2.p.is_finite() {
            return Err(Error::Param("f2 needs a finite p".into()));
        }
        if !alpha.is_finite() {
            return Err(Error::Param(format!("alpha must be finite, got {alpha}")));
        }
        Ok(Self { f1, f2, alpha })
    }

    /// Same spaces, measure `nu_{alpha_c}`.
    pub fn at_critical(f1: SpaceParams, f2: SpaceParams) -> Result<Self> {
        Self::new(f1, f2, critical_alpha(f1.s, f1.p, &f2))
    }

    pub fn d(&self) -> usize {
        self.f1.d
    }

    pub fn measure(&self) -> MeasureSpec {
        MeasureSpec::new(self.alpha)
    }

    pub fn critical_alpha(&self) -> f64 {
        critical_alpha(self.f1.s, self.f1.p, &self.f2)
    }

    /// `g = (s2 - s1)/d - 1/p2`, the exponent of `|Q|` in the TL term.
    pub fn term_exponent(&self) -> f64 {
        (self.f2.s - self.f1.s) / self.d() as f64 - 1.0 / self.f2.p
    }

    /// `gamma = g q1` (finite `q1`).
    pub fn gamma(&self) -> f64 {
        self.term_exponent() * self.f1.q
    }

    /// The two-sided democracy verdict for `eta = t^{1/p1}`.
    pub fn predicted_admissible(&self) -> Verdict {
        let ac = self.critical_alpha();
        if (self.alpha - ac).abs() > ALPHA_EPS {
            return Verdict {
                admissible: false,
                reason: format!(
                    "alpha = {} differs from p1((s2-s1)/d - 1/p2) + 1 = {ac}",
                    self.alpha
                ),
            };
        }
        if (self.alpha - 1.0).abs() > ALPHA_EPS {
            return Verdict {
                admissible: true,
                reason: format!("alpha = {ac} is critical and alpha != 1"),
            };
        }
        if self.f1.p == self.f1.q {
            Verdict {
                admissible: true,
                reason: "alpha = 1 with (s2-s1)/d = 1/p2 and p1 = q1".into(),
            }
        } else {
            Verdict {
                admissible: false,
                reason: format!(
                    "alpha = 1 forces p1 = q1, got p1 = {} and q1 = {}",
                    self.f1.p, self.f1.q
                ),
            }
        }
    }
}

impl fmt::Display for DemocracyCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "f1={} f2={} alpha={}", self.f1, self.f2, self.alpha)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum GammaFamily {
    /// `N^d` disjoint cubes of side `L = 2^l` tiling `[0, NL)^d`.
    DisjointGrid { n: u32, l: i32 },
    /// Every dyadic cube in `[0,1)^d` at scales `0..N`.
    Tower { n: u32 },
    /// `N` unit cubes along the first axis.
    ShiftedRow { n: u32 },
    /// `n` distinct cubes, scales uniform in `[-j_max, j_max]`, inside
    /// `[0, 2^window_log2)^d` when the cube fits there.
    RandomMixed {
        n: u32,
        j_max: i32,
        window_log2: i32,
        seed: u64,
    },
}

impl GammaFamily {
    pub fn tag(&self) -> &'static str {
        match self {
            GammaFamily::DisjointGrid { .. } => "disjoint-grid",
            GammaFamily::Tower { .. } => "tower",
            GammaFamily::ShiftedRow { .. } => "shifted-row",
            GammaFamily::RandomMixed { .. } => "random-mixed",
        }
    }

    pub fn n(&self) -> u32 {
        match *self {
            GammaFamily::DisjointGrid { n, .. }
            | GammaFamily::Tower { n }
            | GammaFamily::ShiftedRow { n }
            | GammaFamily::RandomMixed { n, .. } => n,
        }
    }

    /// `l` of `L = 2^l` for the grid, 0 otherwise.
    pub fn l(&self) -> i32 {
        match *self {
            GammaFamily::DisjointGrid { l, .. } => l,
            _ => 0,
        }
    }

    /// Number of cubes, `None` on overflow.
    pub fn cardinality(&self, d: usize) -> Option<u128> {
        let d = d as u32;
        match *self {
            GammaFamily::DisjointGrid { n, .. } => (n as u128).checked_pow(d),
            GammaFamily::Tower { n } => {
                // sum_{j<N} 2^{jd}
                (0..n).try_fold(0u128, |acc, j| {
                    let shift = j.checked_mul(d)?;
                    (shift < 127).then(|| acc.checked_add(1u128 << shift))?
                })
            }
            GammaFamily::ShiftedRow { n } | GammaFamily::RandomMixed { n, .. } => Some(n as u128),
        }
    }

    pub fn generate(&self, d: usize) -> Result<CubeSet> {
        let count = self.cardinality(d).unwrap_or(u128::MAX);
        if count > MAX_EXPLICIT_CUBES as u128 {
            return Err(Error::Capability(format!(
                "{} family with N = {} in d = {d} has too many cubes to list",
                self.tag(),
                self.n()
            )));
        }
        let cubes: Vec<DyadicCube> = match *self {
            GammaFamily::DisjointGrid { n, l } => lattice(d, n as i64)
                .map(|k| DyadicCube::new(-l, k))
                .collect(),
            GammaFamily::Tower { n } => (0..n as i32)
                .flat_map(|j| DyadicCube::subcubes_of_unit(j, d))
                .collect(),
            GammaFamily::ShiftedRow { n } => (0..n as i64)
                .map(|i| {
                    let mut k = vec![0; d];
                    k[0] = i;
                    DyadicCube::new(0, k)
                })
                .collect(),
            GammaFamily::RandomMixed {
                n,
                j_max,
                window_log2,
                seed,
            } => random_mixed(d, n as usize, j_max, window_log2, seed)?,
        };
        CubeSet::new(d, cubes)
    }

    /// `nu_alpha(Gamma)` in closed form, where one exists.
    pub fn nu_closed(&self, d: usize, alpha: f64) -> Option<f64> {
        let d = d as f64;
        match *self {
            GammaFamily::DisjointGrid { n, l } => {
                Some((l as f64 * alpha * d).exp2() * (n as f64).powf(d))
            }
            // scale j has 2^{jd} cubes of mass 2^{-jd alpha}
            GammaFamily::Tower { n } => Some(geometric(n, d * (1.0 - alpha))),
            GammaFamily::ShiftedRow { n } => Some(n as f64),
            GammaFamily::RandomMixed { .. } => None,
        }
    }

    /// `||sum_Gamma e_Q/u_Q||_{f1}` in closed form, where one exists.
    pub fn value_closed(&self, case: &DemocracyCase) -> Option<f64> {
        let d = case.d() as f64;
        let g = case.term_exponent();
        let p1 = case.f1.p;
        match *self {
            // |Q|^g (N L)^{d/p1}
            GammaFamily::DisjointGrid { n, l } => {
                let side = l as f64;
                Some((side * d * g).exp2() * ((side).exp2() * n as f64).powf(d / p1))
            }
            // constant on [0,1)^d: the l^{q1} norm over scales of 2^{-jdg}
            GammaFamily::Tower { n } => {
                let q1 = case.f1.q;
                if q1.is_infinite() {
                    let last = (n as f64 - 1.0) * -d * g;
                    Some(0f64.max(last).exp2())
                } else {
                    Some(geometric(n, -d * g * q1).powf(1.0 / q1))
                }
            }
            GammaFamily::ShiftedRow { n } => Some((n as f64).powf(1.0 / p1)),
            GammaFamily::RandomMixed { .. } => None,
        }
    }
}

impl fmt::Display for GammaFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            GammaFamily::DisjointGrid { n, l } => write!(f, "disjoint-grid(N={n},L=2^{l})"),
            GammaFamily::Tower { n } => write!(f, "tower(N={n})"),
            GammaFamily::ShiftedRow { n } => write!(f, "shifted-row(N={n})"),
            GammaFamily::RandomMixed {
                n,
                j_max,
                window_log2,
                seed,
            } => write!(
                f,
                "random-mixed(n={n},J={j_max},W=2^{window_log2},seed={seed})"
            ),
        }
    }
}

/// `sum_{j=0}^{n-1} 2^{j x}`, summed from its largest term.
fn geometric(n: u32, x: f64) -> f64 {
    if x == 0.0 {
        return n as f64;
    }
    let n = n as f64;
    // (1 - 2^{-n|x|}) / (1 - 2^{-|x|}), times the largest term when x > 0
    let ratio = exp2_m1(-n * x.abs()) / exp2_m1(-x.abs());
    if x > 0.0 {
        ((n - 1.0) * x).exp2() * ratio
    } else {
        ratio
    }
}

/// `2^x - 1` without cancellation near 0.
fn exp2_m1(x: f64) -> f64 {
    (x * std::f64::consts::LN_2).exp_m1()
}

fn lattice(d: usize, n: i64) -> impl Iterator<Item = Vec<i64>> {
    let total = (n as u128).pow(d as u32) as u64;
    (0..total).map(move |mut idx| {
        let mut k = vec![0; d];
        for slot in k.iter_mut() {
            *slot = (idx % n as u64) as i64;
            idx /= n as u64;
        }
        k
    })
}

fn random_mixed(
    d: usize,
    n: usize,
    j_max: i32,
    window_log2: i32,
    seed: u64,
) -> Result<Vec<DyadicCube>> {
    if j_max < 0 {
        return Err(Error::Param(format!("j_max must be >= 0, got {j_max}")));
    }
    if !(-30..=30).contains(&window_log2) || j_max > 30 {
        return Err(Error::Param(
            "window and scale range must stay within 2^30".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = std::collections::BTreeSet::new();
    let mut attempts = 0usize;
    while seen.len() < n {
        attempts += 1;
        if attempts > 1000 * n.max(1) {
            return Err(Error::Param(format!(
                "cannot draw {n} distinct cubes with J = {j_max} and window 2^{window_log2}"
            )));
        }
        let j = rng.gen_range(-j_max..=j_max);
        // cubes of side 2^{-j} inside [0, 2^w): positions below 2^{w+j}
        let span = 1i64 << (window_log2 + j).clamp(0, 60);
        let k: Vec<i64> = (0..d).map(|_| rng.gen_range(0..span)).collect();
        seen.insert(DyadicCube::new(j, k));
    }
    Ok(seen.into_iter().collect())
}

/// `||sum_{Q in Gamma} e_Q/u_Q||_{f1}` by exact integration of
/// `[sum_Q |Q|^{g q1} chi_Q]^{p1/q1}` over the containment forest.
pub fn democracy_value(gamma: &CubeSet, case: &DemocracyCase) -> Result<f64> {
    if gamma.is_empty() {
        return Ok(0.0);
    }
    if gamma.dim() != case.d() {
        return Err(Error::Param(format!(
            "cube set of dimension {} for a case in dimension {}",
            gamma.dim(),
            case.d()
        )));
    }
    let g = case.term_exponent();
    let (p1, q1) = (case.f1.p, case.f1.q);
    // factor out the largest |Q|^g so the integrand stays in range
    let top = gamma.iter().map(|q| q.volume_pow(g)).fold(0.0, f64::max);
    if q1.is_infinite() {
        let terms: Vec<(DyadicCube, f64)> = gamma
            .iter()
            .map(|q| (q.clone(), q.volume_pow(g) / top))
            .collect();
        return Ok(top * integrate_cube_function(&terms, Accumulate::Max, p1, p1)?);
    }
    let terms: Vec<(DyadicCube, f64)> = gamma
        .iter()
        .map(|q| (q.clone(), (q.volume_pow(g) / top).powf(q1)))
        .collect();
    Ok(top * integrate_cube_function(&terms, Accumulate::Sum, p1 / q1, p1)?)
}

/// One family member in a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub family: String,
    pub n: u32,
    pub l: i32,
    pub nu: f64,
    pub value: f64,
    /// `value / nu^{1/p1}`.
    pub ratio: f64,
    /// Whether closed forms produced the row.
    pub closed_form: bool,
}

/// Evaluates one family: listed explicitly when small enough, otherwise by
/// its closed forms.
pub fn family_row(family: &GammaFamily, case: &DemocracyCase) -> Result<SweepRow> {
    let d = case.d();
    let small = family
        .cardinality(d)
        .is_some_and(|c| c <= MAX_EXPLICIT_CUBES as u128);
    let (nu, value, closed_form) = if small {
        let gamma = family.generate(d)?;
        (
            case.measure().total(gamma.iter()),
            democracy_value(&gamma, case)?,
            false,
        )
    } else {
        let nu = family.nu_closed(d, case.alpha);
        let value = family.value_closed(case);
        match (nu, value) {
            (Some(nu), Some(value)) => (nu, value, true),
            _ => {
                return Err(Error::Capability(format!(
                    "{family} is too large to list and has no closed form"
                )))
            }
        }
    };
    Ok(SweepRow {
        family: family.to_string(),
        n: family.n(),
        l: family.l(),
        nu,
        value,
        ratio: value / nu.powf(1.0 / case.f1.p),
        closed_form,
    })
}

/// Rows for every family, in the order given.
pub fn democracy_ratio_sweep(
    case: &DemocracyCase,
    families: &[GammaFamily],
) -> Result<Vec<SweepRow>> {
    families.par_iter().map(|f| family_row(f, case)).collect()
}

/// `max ratio / min ratio` over rows (1 for fewer than two rows).
pub fn ratio_spread(rows: &[SweepRow]) -> f64 {
    let (lo, hi) = rows.iter().fold((f64::INFINITY, 0f64), |(lo, hi), r| {
        (lo.min(r.ratio), hi.max(r.ratio))
    });
    if rows.is_empty() {
        1.0
    } else {
        hi / lo
    }
}

/// Spread of the ratio over `draws` random-mixed sets of `n` cubes.
pub fn random_spread(
    case: &DemocracyCase,
    n: u32,
    draws: usize,
    j_max: i32,
    window_log2: i32,
    seed: u64,
) -> Result<f64> {
    let families: Vec<GammaFamily> = (0..draws as u64)
        .map(|i| GammaFamily::RandomMixed {
            n,
            j_max,
            window_log2,
            seed: seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(i),
        })
        .collect();
    Ok(ratio_spread(&democracy_ratio_sweep(case, &families)?))
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (sx, sy) = points
        .iter()
        .fold((0.0, 0.0), |(a, b), &(x, y)| (a + x.ln(), b + y.ln()));
    let (mx, my) = (sx / n, sy / n);
    let (num, den) = points.iter().fold((0.0, 0.0), |(num, den), &(x, y)| {
        let dx = x.ln() - mx;
        (num + dx * (y.ln() - my), den + dx * dx)
    });
    num / den
}

/// Fitted exponent of the tower/row spread against `N`; for `alpha = 1` and
/// `(s2-s1)/d = 1/p2` the spread is exactly `N^{|1/q1 - 1/p1|}`.
pub fn divergence_exponent(case: &DemocracyCase, sizes: &[u32]) -> Result<f64> {
    let points: Vec<(f64, f64)> = sizes
        .par_iter()
        .map(|&n| {
            let rows = democracy_ratio_sweep(
                case,
                &[GammaFamily::Tower { n }, GammaFamily::ShiftedRow { n }],
            )?;
            Ok((n as f64, ratio_spread(&rows)))
        })
        .collect::<Result<_>>()?;
    Ok(loglog_slope(&points))
}
