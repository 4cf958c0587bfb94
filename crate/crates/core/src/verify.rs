//! The ten acceptance suites. Each returns a [`CriterionResult`]; the test
//! harness asserts on them and the CLI turns them into report rows.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::approx::{
    approx_norm, approx_norm_dyadic, approx_norm_from_profile, bernstein_constant, decompose,
    decomposition_ratio_bounds, exact_profile, fits, jackson_constant, sigma_exact, ApproxParams,
    Solver,
};
use crate::democracy::{
    democracy_ratio_sweep, democracy_value, divergence_exponent, random_spread, ratio_spread,
    DemocracyCase, GammaFamily,
};
use crate::dyadic::{CubeSet, DyadicCube, MeasureSpec};
use crate::error::Result;
use crate::lorentz::{lorentz_norm, lorentz_norm_via_distribution, LorentzParams};
use crate::seq::{CoeffSeq, CubeWeights};
use crate::spaces::{
    besov_norm, critical_alpha, lorentz_equals_besov_check, tl_norm, SpaceParams, WeightSeq,
};
use crate::weights::{LogGrid, WeightFn};

pub const DEFAULT_SEED: u64 = 20_100_613;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Added to every critical `alpha` in the democracy suites; nonzero
    /// values are negative controls.
    pub alpha_offset: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            alpha_offset: 0.0,
        }
    }
}

impl VerifyConfig {
    fn rng(&self, id: u8) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed ^ (id as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub tolerance: f64,
    /// Largest observed deviation in the criterion's own units.
    pub worst: f64,
    pub detail: String,
    /// The property a failure violates.
    pub anchor: String,
    pub seconds: f64,
}

struct Outcome {
    passed: bool,
    worst: f64,
    detail: String,
}

fn finish(
    id: u8,
    name: &str,
    tolerance: f64,
    anchor: &str,
    start: Instant,
    body: Result<Outcome>,
) -> CriterionResult {
    let (passed, worst, detail) = match body {
        Ok(o) => (o.passed, o.worst, o.detail),
        Err(e) => (false, f64::NAN, format!("error: {e}")),
    };
    CriterionResult {
        id,
        name: name.into(),
        passed,
        tolerance,
        worst,
        detail,
        anchor: anchor.into(),
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn rel_err(x: f64, y: f64) -> f64 {
    if x == y {
        0.0
    } else {
        (x - y).abs() / x.abs().max(y.abs())
    }
}

/// Random sequence of `n` distinct cubes, scales in `[-j_max, j_max]`,
/// clustered near the origin so that containments occur.
pub fn random_sequence(rng: &mut ChaCha8Rng, d: usize, n: usize, j_max: i32) -> CoeffSeq {
    let mut s = CoeffSeq::zero(d);
    while s.len() < n {
        let j = rng.gen_range(-j_max..=j_max);
        let span = 1i64 << (j + 2).clamp(0, 40);
        let k: Vec<i64> = (0..d).map(|_| rng.gen_range(-1..span)).collect();
        let v = rng.gen_range(0.05..2.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        s.set(DyadicCube::new(j, k), v);
    }
    s
}

fn draw_exponent(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo.ln()..hi.ln()).exp()
}

/// Atom norms against `|Q|^{-s/d+1/p-1/2}`.
pub fn criterion_1(cfg: &VerifyConfig) -> CriterionResult {
    let start = Instant::now();
    let mut rng = cfg.rng(1);
    let body = (|| {
        let mut worst = 0f64;
        for i in 0..200 {
            let d = rng.gen_range(1..=3);
            let s = rng.gen_range(-2.0..2.0);
            let q = if i % 5 == 0 {
                f64::INFINITY
            } else {
                draw_exponent(&mut rng, 0.3, 8.0)
            };
            let (space, p) = if i % 2 == 0 {
                let p = draw_exponent(&mut rng, 0.3, 8.0);
                (SpaceParams::tl(s, p, q, d)?, p)
            } else {
                let p = if i % 7 == 1 {
                    f64::INFINITY
                } else {
                    draw_exponent(&mut rng, 0.3, 8.0)
                };
                (SpaceParams::besov(s, p, q, d)?, p)
            };
            let j = rng.gen_range(-10..=10);
            let k: Vec<i64> = (0..d).map(|_| rng.gen_range(-50..50)).collect();
            let cube = DyadicCube::new(j, k);
            let c = rng.gen_range(0.5..2.0);
            let got = space.norm(&CoeffSeq::atom(cube.clone(), c))? / c;
            let pinv = if p.is_infinite() { 0.0 } else { 1.0 / p };
            // |Q| = 2^{-jd}, computed independently of the library's volume_pow
            let expect = (-(j as f64) * d as f64 * (-s / d as f64 + pinv - 0.5)).exp2();
            worst = worst.max(rel_err(got, expect));
        }
        Ok(Outcome {
            passed: worst <= 1e-12,
            worst,
            detail: format!("200 atoms, max relative error {worst:.3e}"),
        })
    })();
    finish(
        1,
        "atom norms",
        1e-12,
        "||e_Q||_f = |Q|^{-s/d+1/p-1/2}",
        start,
        body,
    )
}

fn random_space_pair(
    rng: &mut ChaCha8Rng,
    d: usize,
    alpha: f64,
    q1: Option<f64>,
) -> Result<DemocracyCase> {
    let s1 = rng.gen_range(-1.0..1.0);
    let p1 = draw_exponent(rng, 0.5, 4.0);
    let q1 = q1.unwrap_or_else(|| draw_exponent(rng, 0.5, 4.0));
    let p2 = draw_exponent(rng, 0.5, 4.0);
    let s2 = s1 + d as f64 * ((alpha - 1.0) / p1 + 1.0 / p2);
    DemocracyCase::new(
        SpaceParams::tl(s1, p1, q1, d)?,
        SpaceParams::tl(s2, p2, 2.0, d)?,
        alpha,
    )
}

/// Closed forms for the grid, tower and row families.
pub fn criterion_2(cfg: &VerifyConfig) -> CriterionResult {
    let start = Instant::now();
    let mut rng = cfg.rng(2);
    let body = (|| {
        let mut worst = 0f64;
        let mut checked = 0;
        for d in [1usize, 2] {
            for draw in 0..4 {
                let alpha = if draw == 0 {
                    0.0
                } else {
                    rng.gen_range(-1.0..2.0)
                };
                let c = random_space_pair(&mut rng, d, alpha, None)?;
                let c = DemocracyCase {
                    alpha: c.alpha + cfg.alpha_offset,
                    ..c
                };
                let (p1, q1) = (c.f1.p, c.f1.q);
                let gamma = c.gamma();
                for n in [1u32, 2, 4, 8] {
                    for l in [0i32, 1, 2] {
                        let big_l = (l as f64).exp2();
                        let cubes = GammaFamily::DisjointGrid { n, l }.generate(d)?;
                        let value = democracy_value(&cubes, &c)?;
                        let dd = d as f64;
                        let expect =
                            big_l.powf(dd * (gamma / q1 + 1.0 / p1)) * (n as f64).powf(dd / p1);
                        let nu = c.measure().total(cubes.iter());
                        let nu_expect = (big_l.powf(c.alpha) * n as f64).powf(dd);
                        worst = worst
                            .max(rel_err(value, expect))
                            .max(rel_err(nu, nu_expect));
                        checked += 1;
                    }
                }
            }
            // alpha = 1 with (s2 - s1)/d = 1/p2
            for q1 in [0.7, 2.0, 5.0] {
                let c = random_space_pair(&mut rng, d, 1.0, Some(q1))?;
                for n in [1u32, 2, 4, 8] {
                    let tower = GammaFamily::Tower { n }.generate(d)?;
                    let v = democracy_value(&tower, &c)?;
                    let nu1 = MeasureSpec::new(1.0).total(tower.iter());
                    let row = GammaFamily::ShiftedRow { n }.generate(d)?;
                    let r = democracy_value(&row, &c)?;
                    worst = worst
                        .max(rel_err(v, (n as f64).powf(1.0 / q1)))
                        .max(rel_err(r, (n as f64).powf(1.0 / c.f1.p)))
                        .max(rel_err(nu1, n as f64));
                    checked += 1;
                }
            }
        }
        Ok(Outcome {
            passed: worst <= 1e-9,
            worst,
            detail: format!("{checked} family evaluations, max relative error {worst:.3e}"),
        })
    })();
    finish(
        2,
        "democracy closed forms",
        1e-9,
        "grid: L^{d(gamma/q1+1/p1)} N^{d/p1} with nu_alpha = (L^alpha N)^d; tower N^{1/q1}; row N^{1/p1}",
        start,
        body,
    )
}

/// Bounded ratios for admissible cases, divergence otherwise.
pub fn criterion_3(cfg: &VerifyConfig) -> CriterionResult {
    let start = Instant::now();
    let mut rng = cfg.rng(3);
    let body = (|| {
        let mut notes = Vec::new();
        let mut passed = true;
        let mut worst_growth = 0f64;
        let mut worst_scale = 0f64;
        let draws: Vec<(DemocracyCase, u64)> = (0..20)
            .map(|i| {
                let d = 1 + i % 2;
                let alpha = if i % 4 == 3 {
                    rng.gen_range(1.2..2.0)
                } else {
                    rng.gen_range(-1.0..0.8)
                };
                let c = random_space_pair(&mut rng, d, alpha, None)?;
                Ok((
                    DemocracyCase {
                        alpha: c.alpha + cfg.alpha_offset,
                        ..c
                    },
                    rng.gen(),
                ))
            })
            .collect::<Result<_>>()?;
        let results: Vec<(f64, f64, f64, bool)> = draws
            .par_iter()
            .map(|(c, seed)| {
                let small = random_spread(c, 16, 100, 3, 2, *seed)?;
                let large = random_spread(c, 32, 100, 3, 2, seed.wrapping_add(1))?;
                let grid: Vec<GammaFamily> = (-3..=3)
                    .map(|l| GammaFamily::DisjointGrid { n: 3, l })
                    .collect();
                let scale = ratio_spread(&democracy_ratio_sweep(c, &grid)?) - 1.0;
                Ok((small, large, scale, c.predicted_admissible().admissible))
            })
            .collect::<Result<_>>()?;
        let mut max_spread = 0f64;
        let mut min_growth = f64::INFINITY;
        for (small, large, scale, admissible) in &results {
            let growth = large / small;
            min_growth = min_growth.min(growth);
            worst_growth = worst_growth.max(growth);
            worst_scale = worst_scale.max(*scale);
            max_spread = max_spread.max(small.max(*large));
            passed &= *admissible && growth < 1.5 && *scale <= 1e-9;
        }
        notes.push(format!(
            "20 admissible draws: max spread {max_spread:.3}, change on doubling x{min_growth:.3}..x{worst_growth:.3}, grid scale drift {worst_scale:.1e}"
        ));
        let sizes: Vec<u32> = (3..=10).map(|k| 1u32 << k).collect();
        let mut worst_fit = 0f64;
        for _ in 0..6 {
            let d = rng.gen_range(1..=2);
            let mut c = random_space_pair(&mut rng, d, 1.0, None)?;
            if c.f1.p == c.f1.q {
                continue;
            }
            c.alpha += cfg.alpha_offset;
            let e = divergence_exponent(&c, &sizes)?;
            let target = (1.0 / c.f1.q - 1.0 / c.f1.p).abs();
            worst_fit = worst_fit.max((e - target).abs());
            passed &= !c.predicted_admissible().admissible;
        }
        passed &= worst_fit <= 0.05;
        notes.push(format!(
            "alpha = 1, p1 != q1: max exponent error {worst_fit:.2e}"
        ));
        Ok(Outcome {
            passed,
            worst: worst_growth,
            detail: notes.join("; "),
        })
    })();
    finish(
        3,
        "admissibility dichotomy",
        1.5,
        "democracy holds iff alpha = p1((s2-s1)/d - 1/p2) + 1 and (alpha != 1 or p1 = q1)",
        start,
        body,
    )
}

/// `l^{tau,tau}(u, nu_alpha) = b^gamma_{tau,tau}` with equal quasi-norms.
pub fn criterion_4(cfg: &VerifyConfig) -> CriterionResult {
    let start = Instant::now();
    let mut rng = cfg.rng(4);
    let body = (|| {
        let taus = [0.5, 1.0, 1.7, 3.0];
        let mut worst = 0f64;
        let mut passed = true;
        for i in 0..50 {
            let d = rng.gen_range(1..=2);
            let s1 = rng.gen_range(-1.0..1.0);
            let p1 = draw_exponent(&mut rng, 0.5, 4.0);
            let f2 = SpaceParams::tl(
                rng.gen_range(-1.0..1.5),
                draw_exponent(&mut rng, 0.5, 4.0),
                2.0,
                d,
            )?;
            let tau = taus[i % 4];
            let s = random_sequence(&mut rng, d, 30, 4);
            let check = lorentz_equals_besov_check(&s, s1, p1, &f2, tau)?;
            worst = worst.max((check.lhs - check.rhs).abs() / check.lhs.max(check.rhs).max(1.0));
            passed &= check.ok;
        }
        Ok(Outcome {
            passed,
            worst,
            detail: format!("50 draws, max |lhs - rhs| / max(lhs, rhs, 1) = {worst:.3e}"),
        })
    })();
    finish(
        4,
        "Lorentz = Besov",
        1e-10,
        "l^{tau,tau}(u, nu_alpha) = b^gamma_{tau,tau} with equal quasi-norms, gamma = s1 + d(1/tau - 1/p1)(1 - alpha)",
        start,
        body,
    )
}

/// Knapsack against full enumeration.
pub fn criterion_5(cfg: &VerifyConfig) -> CriterionResult {
    let start = Instant::now();
    let mut rng = cfg.rng(5);
    let body = (|| {
        let mut worst = 0f64;
        let mut passed = true;
        let mut support_matches = 0;
        let instances: Vec<(CoeffSeq, ApproxParams, f64)> = (0..50)
            .map(|i| {
                let d = 1 + i % 2;
                let p = draw_exponent(&mut rng, 0.5, 3.0);
                let s = rng.gen_range(-1.0..1.0);
                let f = if i % 3 == 0 {
                    SpaceParams::besov(s, p, p, d)?
                } else {
                    SpaceParams::tl(s, p, p, d)?
                };
                let a = ApproxParams::new(0.5, 2.0, f, MeasureSpec::new(rng.gen_range(-0.5..1.5)))?;
                let seq = random_sequence(&mut rng, d, 14, 3);
                let t = rng.gen_range(0.0..1.0) * a.m.total(seq.cubes());
                Ok((seq, a, t))
            })
            .collect::<Result<_>>()?;
        for (seq, a, t) in &instances {
            let brute = sigma_exact(seq, *t, a, Solver::Brute)?;
            let knap = sigma_exact(seq, *t, a, Solver::Knapsack)?;
            let e = rel_err(brute.error, knap.error);
            worst = worst.max(e);
            if brute.kept == knap.kept {
                support_matches += 1;
            } else {
                passed &= e <= 1e-12;
            }
            passed &= knap.certified;
        }
        Ok(Outcome {
            passed,
            worst,
            detail: format!(
                "50 instances of 14 entries (2^14 subsets each), {support_matches} identical supports, max error gap {worst:.3e}"
            ),
        })
    })();
    finish(
        5,
        "sigma oracle equivalence",
        1e-12,
        "sigma_nu(t, s) = inf over supports Gamma with nu(Gamma) <= t of ||s - s 1_Gamma||_f",
        start,
        body,
    )
}

/// Integral and dyadic forms of the approximation norm; single-atom closed form.
pub fn criterion_6(cfg: &VerifyConfig) -> CriterionResult {
    let start = Instant::now();
    let mut rng = cfg.rng(6);
    let body = (|| {
        let mut worst_ratio = 1f64;
        let mut passed = true;
        for i in 0..100 {
            let d = 1 + i % 2;
            let p = draw_exponent(&mut rng, 0.5, 3.0);
            let additive = i % 4 != 0;
            let f = if additive {
                SpaceParams::tl(rng.gen_range(-1.0..1.0), p, p, d)?
            } else {
                SpaceParams::tl(
                    rng.gen_range(-1.0..1.0),
                    p,
                    draw_exponent(&mut rng, 0.5, 3.0),
                    d,
                )?
            };
            let xi = rng.gen_range(0.1..2.0);
            let mu = if i % 5 == 0 {
                f64::INFINITY
            } else {
                draw_exponent(&mut rng, 0.3, 4.0)
            };
            let a = ApproxParams::new(xi, mu, f, MeasureSpec::new(rng.gen_range(-0.5..1.5)))?;
            let n = if additive { 12 } else { 8 };
            let s = random_sequence(&mut rng, d, n, 3);
            let profile = exact_profile(&s, &a)?;
            let integral = approx_norm_from_profile(&profile, xi, mu);
            let dyadic = approx_norm_dyadic(&profile, xi, mu);
            let r = integral / dyadic;
            let lo = (-xi).exp2() * (1.0 - 1e-12);
            let hi = xi.exp2() * (1.0 + 1e-12);
            passed &= r >= lo && r <= hi;
            // distance of the log-ratio to the allowed band edge, in units of xi
            worst_ratio = worst_ratio.max(r.log2().abs() / xi);
        }
        let mut worst_atom = 0f64;
        for _ in 0..50 {
            let d = rng.gen_range(1..=2);
            let p = draw_exponent(&mut rng, 0.5, 3.0);
            let f = SpaceParams::tl(
                rng.gen_range(-1.0..1.0),
                p,
                draw_exponent(&mut rng, 0.5, 3.0),
                d,
            )?;
            let xi = rng.gen_range(0.1..2.0);
            let mu = draw_exponent(&mut rng, 0.3, 4.0);
            let a = ApproxParams::new(xi, mu, f, MeasureSpec::new(rng.gen_range(-0.5..1.5)))?;
            let q = DyadicCube::new(rng.gen_range(-6..=6), vec![rng.gen_range(-5..5); d]);
            let c = rng.gen_range(0.1..3.0);
            let s = CoeffSeq::atom(q.clone(), c);
            let expect = f.norm(&s)? * a.m.mass(&q).powf(xi) * (xi * mu).powf(-1.0 / mu);
            let got = approx_norm(&s, &a, Solver::Brute)?;
            worst_atom = worst_atom.max(rel_err(got, expect));
        }
        passed &= worst_atom <= 1e-10;
        Ok(Outcome {
            passed,
            worst: worst_atom,
            detail: format!(
                "100 profiles: max |log2(integral/dyadic)|/xi = {worst_ratio:.3} (limit 1); 50 atoms: max relative error {worst_atom:.3e}"
            ),
        })
    })();
    finish(
        6,
        "approximation-norm consistency",
        1e-10,
        "(int [t^xi sigma(t)]^mu dt/t)^{1/mu} ~ (sum_k [2^{k xi} sigma(2^k)]^mu)^{1/mu}",
        start,
        body,
    )
}

/// A dyadic partition of `[0,1)` into `n` cubes, split at random leaves.
pub fn random_partition(rng: &mut ChaCha8Rng, n: usize) -> Vec<DyadicCube> {
    let mut leaves = vec![DyadicCube::unit(1)];
    while leaves.len() < n {
        let i = rng.gen_range(0..leaves.len());
        let q = leaves.swap_remove(i);
        let k = q.position()[0];
        leaves.push(DyadicCube::new(q.scale() + 1, vec![2 * k]));
        leaves.push(DyadicCube::new(q.scale() + 1, vec![2 * k + 1]));
    }
    leaves.sort();
    leaves
}

/// Normalized indicators and random-coefficient sequences over two
/// partitions of `[0,1)` into `n` cubes (one uniform, one random).
pub fn partition_suite(rng: &mut ChaCha8Rng, n: usize, u: &dyn CubeWeights) -> Vec<CoeffSeq> {
    let uniform = DyadicCube::subcubes_of_unit(n.trailing_zeros() as i32, 1);
    let mixed = random_partition(rng, n);
    let mut suite = Vec::new();
    for cubes in [uniform, mixed] {
        let set = CubeSet::new(1, cubes.clone()).expect("one-dimensional cubes");
        suite.push(CoeffSeq::normalized_indicator(&set, u));
        let mut half = cubes.clone();
        half.shuffle(rng);
        half.truncate(n / 2);
        let half = CubeSet::new(1, half).expect("one-dimensional cubes");
        suite.push(CoeffSeq::normalized_indicator(&half, u));
        for _ in 0..3 {
            let pairs: Vec<(DyadicCube, f64)> = cubes
                .iter()
                .map(|q| (q.clone(), rng.gen_range(0.1..1.0) / u.weight(q)))
                .collect();
            suite.push(CoeffSeq::from_pairs(1, pairs).expect("finite values"));
        }
    }
    suite
}

/// One-dimensional Jackson/Bernstein setting: `f = f1`, Lorentz weights
/// `u_Q = ||e_Q||_{f2}`, measure `nu_alpha`.
#[derive(Clone, Debug)]
pub struct SuiteSetup {
    pub f1: SpaceParams,
    pub f2: SpaceParams,
    pub alpha: f64,
    pub xi: f64,
    pub mu: f64,
    pub eta: WeightFn,
    pub solver: Solver,
}

impl SuiteSetup {
    /// `f1 = f^0_{2,2}`, `eta = t^{1/2}`, `xi = 1/2`, `mu = 1`.
    pub fn standard(f2: SpaceParams, alpha: f64) -> Result<Self> {
        Ok(Self {
            f1: SpaceParams::tl(0.0, 2.0, 2.0, 1)?,
            f2,
            alpha,
            xi: 0.5,
            mu: 1.0,
            eta: WeightFn::power(2.0)?,
            solver: Solver::Knapsack,
        })
    }
}

/// Jackson (`jackson = true`) or Bernstein constants of [`partition_suite`]
/// at each size; the suite for size `n` is drawn from `seed ^ n`.
pub fn suite_constants(
    seed: u64,
    setup: &SuiteSetup,
    sizes: &[usize],
    jackson: bool,
) -> Result<Vec<f64>> {
    let u = WeightSeq::new(setup.f2);
    let a = ApproxParams::new(setup.xi, setup.mu, setup.f1, MeasureSpec::new(setup.alpha))?;
    let lp = LorentzParams::new(&setup.eta, a.mu)
        .with_xi(a.xi)
        .with_weights(&u);
    sizes
        .iter()
        .map(|&n| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ n as u64);
            let suite = partition_suite(&mut rng, n, &u);
            if jackson {
                jackson_constant(&suite, &a, &lp, setup.solver)
            } else {
                bernstein_constant(&suite, &a, &lp)
            }
        })
        .collect()
}

fn constants_over_sizes(seed: u64, f2: SpaceParams, alpha: f64, jackson: bool) -> Result<Vec<f64>> {
    suite_constants(
        seed,
        &SuiteSetup::standard(f2, alpha)?,
        &[16, 32, 64],
        jackson,
    )
}

/// Empirical Jackson and Bernstein constants: stable when admissible,
/// growing for the wrong measure.
pub fn criterion_7(cfg: &VerifyConfig) -> CriterionResult {
    let start = Instant::now();
    let mut rng = cfg.rng(7);
    let body = (|| {
        let mut passed = true;
        let mut notes = Vec::new();
        let mut worst_drift = 1f64;
        // f1 = f^0_{2,2}; f2 fixes the critical alpha: 0 (counting) and 1/2
        for s2 in [0.0, 0.25] {
            let f2 = SpaceParams::tl(s2, 2.0, 2.0, 1)?;
            let ac = critical_alpha(0.0, 2.0, &f2);
            let seed: u64 = rng.gen();
            for jackson in [true, false] {
                let kind = if jackson { "Jackson" } else { "Bernstein" };
                let good = constants_over_sizes(seed, f2, ac, jackson)?;
                let (lo, hi) = good
                    .iter()
                    .fold((f64::INFINITY, 0f64), |(l, h), &c| (l.min(c), h.max(c)));
                let drift = hi / lo;
                worst_drift = worst_drift.max(drift);
                passed &= good.iter().all(|c| c.is_finite() && *c > 0.0) && drift < 4.0;
                let shift = if jackson { 0.5 } else { -0.5 };
                let bad = constants_over_sizes(seed, f2, ac + shift, jackson)?;
                let grows = bad.windows(2).all(|w| w[1] > w[0]);
                passed &= grows;
                notes.push(format!(
                    "{kind} alpha={ac}: {:.4}/{:.4}/{:.4} (drift x{drift:.3}); alpha={}: {:.4}/{:.4}/{:.4}{}",
                    good[0],
                    good[1],
                    good[2],
                    ac + shift,
                    bad[0],
                    bad[1],
                    bad[2],
                    if grows { "" } else { " NOT GROWING" }
                ));
            }
        }
        Ok(Outcome {
            passed,
            worst: worst_drift,
            detail: notes.join("; "),
        })
    })();
    finish(
        7,
        "Jackson/Bernstein constants",
        4.0,
        "sigma_nu(t, s) <= C t^{-xi} ||s||_{l^mu_{xi,eta}(u,nu)} and ||s||_{l^mu_{xi,eta}(u,nu)} <= C t^xi ||s||_f on Sigma_{t,nu}",
        start,
        body,
    )
}

/// Dyadic representation: exact reconstruction, budgets, two-sided bound.
pub fn criterion_8(cfg: &VerifyConfig) -> CriterionResult {
    let start = Instant::now();
    let mut rng = cfg.rng(8);
    let body = (|| {
        let mut passed = true;
        let mut lo_seen = f64::INFINITY;
        let mut hi_seen = 0f64;
        let mut slack = f64::INFINITY;
        for i in 0..100 {
            let d = 1 + i % 2;
            let p = draw_exponent(&mut rng, 0.5, 3.0);
            let additive = i % 5 != 0;
            let q = if additive {
                p
            } else {
                draw_exponent(&mut rng, 0.5, 3.0)
            };
            let f = SpaceParams::tl(rng.gen_range(-1.0..1.0), p, q, d)?;
            let xi = rng.gen_range(0.2..1.5);
            let mu = if i % 7 == 0 {
                f64::INFINITY
            } else {
                draw_exponent(&mut rng, 0.5, 4.0)
            };
            let a = ApproxParams::new(xi, mu, f, MeasureSpec::new(rng.gen_range(-0.5..1.5)))?;
            let s = random_sequence(&mut rng, d, if additive { 12 } else { 8 }, 3);
            let dec = decompose(&s, &a)?;
            passed &= dec.reconstruct(d) == s;
            for piece in &dec.pieces {
                passed &= fits(a.m.total(piece.seq.cubes()), (piece.k as f64).exp2());
            }
            let norm = approx_norm_from_profile(&exact_profile(&s, &a)?, xi, mu);
            let ratio = dec.score / norm;
            let (lo, hi) = decomposition_ratio_bounds(xi, mu, f.rho());
            passed &= ratio >= lo * (1.0 - 1e-12) && ratio <= hi * (1.0 + 1e-12);
            lo_seen = lo_seen.min(ratio);
            hi_seen = hi_seen.max(ratio);
            slack = slack.min((ratio / lo).min(hi / ratio));
        }
        Ok(Outcome {
            passed,
            worst: hi_seen / lo_seen,
            detail: format!(
                "100 cases reconstruct exactly; score/norm observed in [{lo_seen:.4}, {hi_seen:.4}]; closest approach to a per-case bound: factor {slack:.3}"
            ),
        })
    })();
    finish(
        8,
        "representation theorem",
        0.0,
        "||s||_{A^xi_mu} ~ inf over s = sum_k s_k, s_k in Sigma_{2^k,nu}, of (sum_k [2^{k xi} ||s_k||_f]^mu)^{1/mu}",
        start,
        body,
    )
}

fn random_weight(rng: &mut ChaCha8Rng) -> Result<WeightFn> {
    let p = draw_exponent(rng, 0.3, 6.0);
    if rng.gen_bool(0.5) {
        WeightFn::power(p)
    } else {
        let b = rng.gen_range(-1.0..1.0) / p;
        WeightFn::power_log(p, b)
    }
}

/// Geometric-sum bound, smoothing constants, Boyd index of the power family.
pub fn criterion_9(cfg: &VerifyConfig) -> CriterionResult {
    let start = Instant::now();
    let mut rng = cfg.rng(9);
    let body = (|| {
        let mut passed = true;
        let mut worst = 0f64;
        let mut violations = 0;
        for _ in 0..10_000 {
            let eta = random_weight(&mut rng)?;
            let t = rng.gen_range(-60.0..60.0f64).exp2();
            let j = rng.gen_range(0..300);
            let (sum, bound) = eta.geometric_sum_bound(t, j)?;
            worst = worst.max(sum / bound);
            // a long sum may land on its limit up to rounding
            if sum > bound * (1.0 + 1e-12) {
                violations += 1;
            }
        }
        passed &= violations == 0;
        let mut smooth_worst = 0f64;
        let grid = LogGrid {
            log2_min: -40.0,
            log2_max: 40.0,
            points: 81,
        };
        for _ in 0..20 {
            let eta = random_weight(&mut rng)?;
            let (c1, c2) = eta.smoothing_constants()?;
            for t in grid.iter() {
                let r = eta.smoothed_weight(t, 1e-10)? / eta.eval(t);
                let ok = r >= c1 * (1.0 - 1e-9) && r <= c2 * (1.0 + 1e-9);
                passed &= ok;
                smooth_worst = smooth_worst.max((c1 / r).max(r / c2));
            }
        }
        let mut boyd_exact = true;
        for _ in 0..100 {
            let p = draw_exponent(&mut rng, 0.2, 10.0);
            let eta = WeightFn::power(p)?;
            let t = rng.gen_range(-50.0..-1.0f64).exp2();
            boyd_exact &= eta.boyd_lower_index(t) == 1.0 / p;
        }
        passed &= boyd_exact;
        Ok(Outcome {
            passed,
            worst,
            detail: format!(
                "10^4 draws: {violations} violations, max sum/bound - 1 = {:.2e}; smoothing ratio max excess {smooth_worst:.4} (<= 1); power Boyd index exact: {boyd_exact}",
                worst - 1.0
            ),
        })
    })();
    finish(
        9,
        "weight classes",
        0.0,
        "sum_j eta(s0^j t) <= eta(t)/(1 - delta); C1 eta <= int_0^t eta(s) ds/s <= C2 eta",
        start,
        body,
    )
}

/// A sequence dominated by `t`: entries shrunk by random factors, some dropped.
fn dominated(rng: &mut ChaCha8Rng, t: &CoeffSeq) -> CoeffSeq {
    let mut s = CoeffSeq::zero(t.dim());
    for (q, v) in t.iter() {
        if rng.gen_bool(0.8) {
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            s.set(q.clone(), sign * v * rng.gen_range(0.0..=1.0));
        }
    }
    s
}

type NormFn = Box<dyn Fn(&CoeffSeq) -> Result<f64> + Sync>;

struct NormCase {
    name: String,
    norm: NormFn,
    /// `None`: no power-triangle inequality is claimed.
    rho: Option<f64>,
}

fn lattice_cases(rng: &mut ChaCha8Rng) -> Result<Vec<NormCase>> {
    let mut cases: Vec<NormCase> = Vec::new();
    for _ in 0..3 {
        let f = SpaceParams::tl(
            rng.gen_range(-1.0..1.0),
            draw_exponent(rng, 0.4, 4.0),
            if rng.gen_bool(0.3) {
                f64::INFINITY
            } else {
                draw_exponent(rng, 0.4, 4.0)
            },
            1,
        )?;
        cases.push(NormCase {
            name: f.to_string(),
            norm: Box::new(move |s| tl_norm(s, &f)),
            rho: Some(f.rho()),
        });
        let b = SpaceParams::besov(
            rng.gen_range(-1.0..1.0),
            if rng.gen_bool(0.3) {
                f64::INFINITY
            } else {
                draw_exponent(rng, 0.4, 4.0)
            },
            draw_exponent(rng, 0.4, 4.0),
            1,
        )?;
        cases.push(NormCase {
            name: b.to_string(),
            norm: Box::new(move |s| besov_norm(s, &b)),
            rho: Some(b.rho()),
        });
    }
    for (eta, mu, xi, alpha) in [
        (WeightFn::power(2.0)?, 1.0, 0.0, 0.5),
        (WeightFn::power(0.8)?, 0.5, 0.0, 1.0),
        (WeightFn::power(1.5)?, f64::INFINITY, 0.3, 0.0),
        (WeightFn::power(3.0)?, 4.0, 0.0, -0.5),
        (WeightFn::power_log(2.0, 0.4)?, 1.5, 0.2, 0.5),
    ] {
        let name = format!("lorentz(eta={eta},mu={mu},xi={xi},alpha={alpha})");
        let p_eff = 1.0 / eta.shifted(xi).inv_p();
        let u = WeightSeq::new(SpaceParams::tl(0.3, 1.5, 2.0, 1)?);
        let m = MeasureSpec::new(alpha);
        let rho = (mu <= p_eff).then_some(mu.min(1.0));
        let e1 = eta.clone();
        cases.push(NormCase {
            name: name.clone(),
            norm: Box::new(move |s| {
                lorentz_norm(
                    s,
                    &m,
                    &LorentzParams::new(&e1, mu).with_xi(xi).with_weights(&u),
                )
            }),
            rho,
        });
        if eta.shifted(xi).in_w_plus() {
            let e2 = eta.clone();
            cases.push(NormCase {
                name: format!("{name} distribution form"),
                norm: Box::new(move |s| {
                    lorentz_norm_via_distribution(s, &m, &LorentzParams::new(&e2, mu).with_xi(xi))
                }),
                rho: None,
            });
        }
    }
    for (p, q, xi, mu) in [(1.0, 1.0, 0.5, 2.0), (2.0, 0.7, 1.0, f64::INFINITY)] {
        let f = SpaceParams::tl(0.2, p, q, 1)?;
        let a = ApproxParams::new(xi, mu, f, MeasureSpec::new(0.5))?;
        cases.push(NormCase {
            name: format!("approx(f={f},xi={xi},mu={mu})"),
            norm: Box::new(move |s| {
                Ok(approx_norm_from_profile(&exact_profile(s, &a)?, a.xi, a.mu))
            }),
            rho: None,
        });
    }
    Ok(cases)
}

/// Homogeneity, monotonicity and the rho-power triangle inequality.
pub fn criterion_10(cfg: &VerifyConfig) -> CriterionResult {
    let start = Instant::now();
    let mut rng = cfg.rng(10);
    let body = (|| {
        let cases = lattice_cases(&mut rng)?;
        let pairs: Vec<(CoeffSeq, CoeffSeq, CoeffSeq, f64)> = (0..500)
            .map(|i| {
                let n = if i % 10 == 0 { 8 } else { 6 };
                let a = random_sequence(&mut rng, 1, n, 3);
                let b = random_sequence(&mut rng, 1, n, 3);
                let s = dominated(&mut rng, &a);
                let c = rng.gen_range(-4.0..4.0);
                (a, b, s, c)
            })
            .collect();
        let results: Vec<(String, usize, f64, f64)> = cases
            .par_iter()
            .map(|case| {
                let mut failures = 0;
                let mut homog = 0f64;
                let mut tri = 0f64;
                for (i, (a, b, s, c)) in pairs.iter().enumerate() {
                    // approximation norms are exact but costly; a sub-sample suffices
                    if case.rho.is_none() && case.name.starts_with("approx") && i % 5 != 0 {
                        continue;
                    }
                    let na = (case.norm)(a)?;
                    let nb = (case.norm)(b)?;
                    let ns = (case.norm)(s)?;
                    // powers of two scale every intermediate exactly
                    let two = (case.norm)(&a.scaled(-0.25))?;
                    if two != 0.25 * na {
                        failures += 1;
                    }
                    let nc = (case.norm)(&a.scaled(*c))?;
                    let h = rel_err(nc, c.abs() * na);
                    homog = homog.max(h);
                    if h > 1e-12 {
                        failures += 1;
                    }
                    if ns > na * (1.0 + 1e-12) {
                        failures += 1;
                    }
                    if let Some(rho) = case.rho {
                        let lhs = (case.norm)(&a.add(b))?.powf(rho);
                        let rhs = na.powf(rho) + nb.powf(rho);
                        let excess = lhs / rhs - 1.0;
                        tri = tri.max(excess);
                        if excess > 1e-12 {
                            failures += 1;
                        }
                    }
                }
                Ok((case.name.clone(), failures, homog, tri))
            })
            .collect::<Result<_>>()?;
        let failures: usize = results.iter().map(|r| r.1).sum();
        let homog = results.iter().map(|r| r.2).fold(0.0, f64::max);
        let tri = results
            .iter()
            .map(|r| r.3)
            .fold(f64::NEG_INFINITY, f64::max);
        let failing: Vec<&str> = results
            .iter()
            .filter(|r| r.1 > 0)
            .map(|r| r.0.as_str())
            .collect();
        Ok(Outcome {
            passed: failures == 0,
            worst: homog.max(tri.max(0.0)),
            detail: format!(
                "{} norms x 500 pairs: {failures} failures, max homogeneity error {homog:.2e}, max triangle excess {tri:.2e}{}",
                results.len(),
                if failing.is_empty() { String::new() } else { format!(", failing: {}", failing.join(", ")) }
            ),
        })
    })();
    finish(
        10,
        "lattice axioms",
        1e-12,
        "||c s|| = |c| ||s||; |s| <= |t| => ||s|| <= ||t||; ||s+t||^rho <= ||s||^rho + ||t||^rho",
        start,
        body,
    )
}

pub fn run_criterion(id: u8, cfg: &VerifyConfig) -> Option<CriterionResult> {
    Some(match id {
        1 => criterion_1(cfg),
        2 => criterion_2(cfg),
        3 => criterion_3(cfg),
        4 => criterion_4(cfg),
        5 => criterion_5(cfg),
        6 => criterion_6(cfg),
        7 => criterion_7(cfg),
        8 => criterion_8(cfg),
        9 => criterion_9(cfg),
        10 => criterion_10(cfg),
        _ => return None,
    })
}

pub fn run_all(cfg: &VerifyConfig) -> Vec<CriterionResult> {
    (1..=10).filter_map(|id| run_criterion(id, cfg)).collect()
}
