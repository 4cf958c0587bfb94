//! One runner per subcommand. Each returns unsorted rows; the caller sorts.

use std::path::Path;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use restricted_approx::approx::{
    approx_norm_dyadic, approx_norm_from_profile, decompose, decomposition_ratio_bounds,
    exact_profile, sigma_exact, sigma_greedy, sigma_profile, ApproxParams, SigmaResult, Solver,
};
use restricted_approx::democracy::{
    democracy_ratio_sweep, divergence_exponent, random_spread, ratio_spread, DemocracyCase,
    GammaFamily,
};
use restricted_approx::lorentz::{lorentz_norm, LorentzParams};
use restricted_approx::report::ReportRow;
use restricted_approx::spaces::{besov_norm, critical_alpha, lorentz_equals_besov_check, tl_norm};
use restricted_approx::verify::{
    random_sequence, run_criterion, suite_constants, SuiteSetup, VerifyConfig,
};
use restricted_approx::{CoeffSeq, CubeSet, Error, MeasureSpec, SpaceParams, WeightSeq};

use crate::config::{
    parse_solver, parse_weight, ConfigError, ExperimentConfig, SpaceSpec, SuiteSection,
};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Sequence { path: String, source: Error },
    #[error("{0}")]
    Compute(#[from] Error),
    #[error("{0}")]
    Usage(String),
}

type Rows = Result<Vec<ReportRow>, RunError>;

const CLOSED_FORM_TOL: f64 = 1e-9;
const GROWTH_LIMIT: f64 = 1.5;
const FIT_TOL: f64 = 0.05;

fn space_tag(spec: &SpaceSpec) -> String {
    format!("{}:s={},p={},q={}", spec.kind, spec.s, spec.p, spec.q)
}

fn cubes_text(set: &CubeSet) -> String {
    set.iter()
        .map(|q| q.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

fn rel_err(x: f64, y: f64) -> f64 {
    if x == y {
        0.0
    } else {
        (x - y).abs() / x.abs().max(y.abs())
    }
}

fn load_sequence(cfg: &ExperimentConfig) -> Result<(CoeffSeq, String), RunError> {
    let path = cfg
        .sequence
        .as_ref()
        .ok_or_else(|| RunError::Usage("this subcommand needs `sequence` in the config".into()))?;
    let shown = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.clone(),
        source: e,
    })?;
    let s = CoeffSeq::parse(&text, cfg.d).map_err(|source| RunError::Sequence {
        path: shown,
        source,
    })?;
    let name = Path::new(path)
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok((s, name))
}

fn approx_params(cfg: &ExperimentConfig) -> Result<ApproxParams, RunError> {
    let f = cfg.space.build(cfg.d, "space")?;
    Ok(ApproxParams::new(
        cfg.approx.xi,
        cfg.approx.mu,
        f,
        MeasureSpec::new(cfg.alpha),
    )?)
}

fn resolve_solver(choice: Option<Solver>, f: &SpaceParams, fallback: Solver) -> Solver {
    choice.unwrap_or(if f.is_additive() {
        Solver::Knapsack
    } else {
        fallback
    })
}

/// `f^s_{p,q}`, `b^s_{p,q}`, `l^mu_{xi,eta}(u, nu_alpha)` and `A^xi_mu` of a
/// coefficient file.
pub fn run_norm(cfg: &ExperimentConfig) -> Rows {
    let (s, file) = load_sequence(cfg)?;
    let base = format!("d={} alpha={} sequence={file}", cfg.d, cfg.alpha);
    let sp = &cfg.space;
    let mut rows = Vec::new();

    for (id, kind) in [("norm/1-tl", "tl"), ("norm/2-besov", "besov")] {
        let spec = SpaceSpec {
            kind: kind.into(),
            ..sp.clone()
        };
        let params = format!("{base} space={}", space_tag(&spec));
        let start = Instant::now();
        let row = match spec.build(cfg.d, "space") {
            Ok(f) => {
                let v = if kind == "tl" {
                    tl_norm(&s, &f)?
                } else {
                    besov_norm(&s, &f)?
                };
                ReportRow::new(id, "norm", params, kind, v)
            }
            Err(e) => {
                ReportRow::new(id, "norm", params, kind, f64::NAN).detail(format!("undefined: {e}"))
            }
        };
        rows.push(row.timed(start.elapsed().as_secs_f64()));
    }

    let f = sp.build(cfg.d, "space")?;
    let l = &cfg.lorentz;
    let eta = parse_weight(&l.eta, "lorentz.eta")?;
    let u = WeightSeq::new(f);
    let m = MeasureSpec::new(cfg.alpha);
    let mut lp = LorentzParams::new(&eta, l.mu).with_xi(l.xi);
    if l.weights == "space" {
        lp = lp.with_weights(&u);
    }
    let params = format!(
        "{base} space={} eta={} mu={} xi={} weights={}",
        space_tag(sp),
        l.eta,
        l.mu,
        l.xi,
        l.weights
    );
    let start = Instant::now();
    let row = match lorentz_norm(&s, &m, &lp) {
        Ok(v) => ReportRow::new("norm/3-lorentz", "norm", params, "lorentz", v),
        Err(Error::Divergence(msg)) => {
            ReportRow::new("norm/3-lorentz", "norm", params, "lorentz", f64::INFINITY)
                .check(false, f64::NAN, "the Lorentz quasi-norm is finite")
                .detail(format!("divergent: {msg}"))
        }
        Err(e) => return Err(e.into()),
    };
    rows.push(row.timed(start.elapsed().as_secs_f64()));

    let a = approx_params(cfg)?;
    let solver = resolve_solver(
        parse_solver(&cfg.approx.solver, "approx.solver")?,
        &a.f,
        Solver::Brute,
    );
    let start = Instant::now();
    let v = approx_norm_from_profile(&sigma_profile(&s, &a, solver)?, a.xi, a.mu);
    rows.push(
        ReportRow::new(
            "norm/4-approx",
            "norm",
            format!(
                "{base} space={} xi={} mu={} solver={solver}",
                space_tag(sp),
                a.xi,
                a.mu
            ),
            "approx",
            v,
        )
        .timed(start.elapsed().as_secs_f64()),
    );
    Ok(rows)
}

/// Exact and greedy `sigma_nu(t, s)` at every configured budget.
pub fn run_sigma(cfg: &ExperimentConfig) -> Rows {
    let (s, file) = load_sequence(cfg)?;
    let a = approx_params(cfg)?;
    let solver = resolve_solver(
        parse_solver(&cfg.approx.solver, "approx.solver")?,
        &a.f,
        Solver::Brute,
    );
    let base = format!(
        "d={} alpha={} sequence={file} space={}",
        cfg.d,
        cfg.alpha,
        space_tag(&cfg.space)
    );
    let mut rows = vec![ReportRow::new(
        "sigma/000-norm",
        "sigma",
        base.clone(),
        "norm",
        a.f.norm(&s)?,
    )];
    for (i, &t) in cfg.approx.budgets.iter().enumerate() {
        let params = format!("{base} t={t}");
        let start = Instant::now();
        let exact: SigmaResult = if solver == Solver::Greedy {
            sigma_greedy(&s, t, &a)?
        } else {
            sigma_exact(&s, t, &a, solver)?
        };
        let elapsed = start.elapsed().as_secs_f64();
        rows.push(
            ReportRow::new(
                format!("sigma/{:03}-a-{solver}", i + 1),
                "sigma",
                format!("{params} solver={solver}"),
                "sigma",
                exact.error,
            )
            .check(
                exact.certified,
                f64::NAN,
                "branch and bound finished within its node cap",
            )
            .detail(format!("kept: {}", cubes_text(&exact.kept)))
            .timed(elapsed),
        );
        if solver != Solver::Greedy {
            let start = Instant::now();
            let greedy = sigma_greedy(&s, t, &a)?;
            let ratio = if exact.error == 0.0 {
                if greedy.error == 0.0 {
                    1.0
                } else {
                    f64::INFINITY
                }
            } else {
                greedy.error / exact.error
            };
            rows.push(
                ReportRow::new(
                    format!("sigma/{:03}-b-greedy", i + 1),
                    "sigma",
                    format!("{params} solver=greedy"),
                    "sigma",
                    greedy.error,
                )
                .detail(format!(
                    "greedy/exact = {ratio}; kept: {}",
                    cubes_text(&greedy.kept)
                ))
                .timed(start.elapsed().as_secs_f64()),
            );
        }
    }
    Ok(rows)
}

/// Integral and dyadic forms of `||s||_{A^xi_mu}` and the dyadic
/// representation.
pub fn run_approx_norm(cfg: &ExperimentConfig) -> Rows {
    let (s, file) = load_sequence(cfg)?;
    let a = approx_params(cfg)?;
    let solver = resolve_solver(
        parse_solver(&cfg.approx.solver, "approx.solver")?,
        &a.f,
        Solver::Brute,
    );
    let params = format!(
        "d={} alpha={} sequence={file} space={} xi={} mu={} solver={solver}",
        cfg.d,
        cfg.alpha,
        space_tag(&cfg.space),
        a.xi,
        a.mu
    );
    let start = Instant::now();
    let profile = sigma_profile(&s, &a, solver)?;
    let integral = approx_norm_from_profile(&profile, a.xi, a.mu);
    let dyadic = approx_norm_dyadic(&profile, a.xi, a.mu);
    let elapsed = start.elapsed().as_secs_f64();
    let gap = if integral == 0.0 && dyadic == 0.0 {
        0.0
    } else {
        (integral / dyadic).log2().abs() / a.xi
    };
    let mut rows = vec![
        ReportRow::new(
            "approx-norm/1-integral",
            "approx-norm",
            params.clone(),
            "integral",
            integral,
        )
        .timed(elapsed),
        ReportRow::new(
            "approx-norm/2-dyadic",
            "approx-norm",
            params.clone(),
            "dyadic",
            dyadic,
        )
        .timed(elapsed),
        ReportRow::new(
            "approx-norm/3-sandwich",
            "approx-norm",
            params.clone(),
            "|log2(integral/dyadic)|/xi",
            gap,
        )
        .check(
            gap <= 1.0 + 1e-12,
            1.0,
            "2^{-xi} <= integral/dyadic <= 2^xi",
        )
        .detail(format!("{} breakpoints", profile.len())),
    ];

    if exact_profile(&s, &a).is_ok() {
        let start = Instant::now();
        let dec = decompose(&s, &a)?;
        let exact = dec.reconstruct(s.dim()) == s;
        let within = dec.pieces.iter().all(|p| {
            let mass = a.m.total(p.seq.cubes());
            restricted_approx::approx::fits(mass, (p.k as f64).exp2())
        });
        let elapsed = start.elapsed().as_secs_f64();
        rows.push(
            ReportRow::new(
                "approx-norm/4-reconstruction",
                "approx-norm",
                params.clone(),
                "pieces",
                dec.pieces.len() as f64,
            )
            .check(
                exact && within,
                0.0,
                "sum_k s_k = s with nu(supp s_k) <= 2^k",
            )
            .detail(format!(
                "exact reconstruction: {exact}; budgets respected: {within}"
            ))
            .timed(elapsed),
        );
        let (lo, hi) = decomposition_ratio_bounds(a.xi, a.mu, a.f.rho());
        let ratio = if integral == 0.0 {
            1.0
        } else {
            dec.score / integral
        };
        rows.push(
            ReportRow::new(
                "approx-norm/5-representation",
                "approx-norm",
                params,
                "score/integral",
                ratio,
            )
            .check(
                lo <= ratio && ratio <= hi,
                hi,
                "score of the dyadic representation ~ ||s||_{A^xi_mu}",
            )
            .detail(format!("score {}; bounds [{lo}, {hi}]", dec.score))
            .timed(elapsed),
        );
    }
    Ok(rows)
}

fn default_families(case: &DemocracyCase) -> Vec<GammaFamily> {
    let mut families = Vec::new();
    for n in [1, 2, 4, 8] {
        for l in 0..=2 {
            families.push(GammaFamily::DisjointGrid { n, l });
        }
        if case.d() == 1 || n <= 4 {
            families.push(GammaFamily::Tower { n });
        }
        families.push(GammaFamily::ShiftedRow { n });
    }
    families
}

/// Democracy sweep: ratios per family with closed-form checks, scale
/// invariance, random spread on doubling and the `alpha = 1` fit.
pub fn run_democracy(cfg: &ExperimentConfig, seed: u64) -> Rows {
    let dem = &cfg.democracy;
    let f1 = dem.f1.build(cfg.d, "democracy.f1")?;
    let f2 = dem.f2.build(cfg.d, "democracy.f2")?;
    let alpha = dem.alpha.unwrap_or_else(|| critical_alpha(f1.s, f1.p, &f2));
    let case = DemocracyCase::new(f1, f2, alpha)?;
    let verdict = case.predicted_admissible();
    let base = format!(
        "d={} f1={} f2={} alpha={alpha}",
        cfg.d,
        space_tag(&dem.f1),
        space_tag(&dem.f2)
    );
    let anchor = "||sum_Gamma e_Q/||e_Q||_f2||_f1 ~ nu_alpha(Gamma)^{1/p1}";
    let mut rows = vec![ReportRow::new(
        "democracy/0-verdict",
        "democracy",
        base.clone(),
        "predicted admissible",
        if verdict.admissible { 1.0 } else { 0.0 },
    )
    .detail(verdict.reason.clone())];

    let families = dem
        .families
        .clone()
        .unwrap_or_else(|| default_families(&case));
    let start = Instant::now();
    let sweep = democracy_ratio_sweep(&case, &families)?;
    let per_row = start.elapsed().as_secs_f64() / families.len().max(1) as f64;
    for (i, (family, row)) in families.iter().zip(&sweep).enumerate() {
        let mut r = ReportRow::new(
            format!("democracy/1-family-{:03}", i + 1),
            "democracy",
            format!("{base} family={family}"),
            "ratio",
            row.ratio,
        );
        let mut detail = format!("nu={} value={}", row.nu, row.value);
        match (
            family.nu_closed(cfg.d, alpha),
            family.value_closed(&case),
            row.closed_form,
        ) {
            (Some(nu), Some(value), false) => {
                let err = rel_err(row.nu, nu).max(rel_err(row.value, value));
                detail.push_str(&format!(" closed nu={nu} value={value} rel err={err:e}"));
                r = r.check(
                    err <= CLOSED_FORM_TOL,
                    CLOSED_FORM_TOL,
                    "the family's closed forms for nu_alpha and the norm",
                );
            }
            (_, _, true) => detail.push_str(" (closed forms)"),
            _ => {}
        }
        rows.push(r.detail(detail).timed(per_row));
    }
    rows.push(
        ReportRow::new(
            "democracy/2-spread",
            "democracy",
            base.clone(),
            "max/min ratio",
            ratio_spread(&sweep),
        )
        .detail(format!("over {} families", sweep.len())),
    );

    let start = Instant::now();
    let grid: Vec<GammaFamily> = (-3..=3)
        .map(|l| GammaFamily::DisjointGrid { n: 3, l })
        .collect();
    let drift = ratio_spread(&democracy_ratio_sweep(&case, &grid)?) - 1.0;
    rows.push(
        ReportRow::new(
            "democracy/3-scale-drift",
            "democracy",
            format!("{base} family=disjoint-grid n=3 l=-3..3"),
            "max/min ratio - 1",
            drift,
        )
        .check(drift <= CLOSED_FORM_TOL, CLOSED_FORM_TOL, anchor)
        .timed(start.elapsed().as_secs_f64()),
    );

    let start = Instant::now();
    let n = dem.random_n;
    let small = random_spread(&case, n, dem.random_draws, dem.j_max, dem.window_log2, seed)?;
    let large = random_spread(
        &case,
        2 * n,
        dem.random_draws,
        dem.j_max,
        dem.window_log2,
        seed.wrapping_add(1),
    )?;
    let growth = large / small;
    rows.push(
        ReportRow::new(
            "democracy/4-random-growth",
            "democracy",
            format!(
                "{base} family=random-mixed n={n},{} draws={} j_max={} window_log2={} seed={seed}",
                2 * n,
                dem.random_draws,
                dem.j_max,
                dem.window_log2
            ),
            "spread(2n)/spread(n)",
            growth,
        )
        .check(growth < GROWTH_LIMIT, GROWTH_LIMIT, anchor)
        .detail(format!("spread n={n}: {small}; n={}: {large}", 2 * n))
        .timed(start.elapsed().as_secs_f64()),
    );

    if alpha == 1.0 && f1.p != f1.q {
        let start = Instant::now();
        let e = divergence_exponent(&case, &dem.fit_sizes)?;
        let target = (1.0 / f1.q - 1.0 / f1.p).abs();
        rows.push(
            ReportRow::new(
                "democracy/5-divergence",
                "democracy",
                format!("{base} sizes={:?}", dem.fit_sizes),
                "fitted exponent",
                e,
            )
            .check(
                (e - target).abs() <= FIT_TOL,
                FIT_TOL,
                "tower/row spread grows as N^{|1/q1 - 1/p1|}",
            )
            .detail(format!("expected {target}"))
            .timed(start.elapsed().as_secs_f64()),
        );
    }
    Ok(rows)
}

fn suite_rows(cfg: &ExperimentConfig, seed: u64, jackson: bool) -> Rows {
    let (name, sec): (&str, &SuiteSection) = if jackson {
        ("jackson", &cfg.jackson)
    } else {
        ("bernstein", &cfg.bernstein)
    };
    let f1 = sec.f1.build(1, &format!("{name}.f1"))?;
    let f2 = sec.f2.build(1, &format!("{name}.f2"))?;
    let alpha = sec.alpha.unwrap_or_else(|| critical_alpha(f1.s, f1.p, &f2));
    let solver = resolve_solver(
        parse_solver(&sec.solver, &format!("{name}.solver"))?,
        &f1,
        Solver::Greedy,
    );
    let setup = SuiteSetup {
        f1,
        f2,
        alpha,
        xi: sec.xi,
        mu: sec.mu,
        eta: parse_weight(&sec.eta, &format!("{name}.eta"))?,
        solver,
    };
    let base = format!(
        "d=1 f1={} f2={} alpha={alpha} eta={} xi={} mu={} seed={seed}",
        space_tag(&sec.f1),
        space_tag(&sec.f2),
        sec.eta,
        sec.xi,
        sec.mu
    );
    let base = if jackson {
        format!("{base} solver={solver}")
    } else {
        base
    };
    let mut rows = Vec::new();
    let mut values = Vec::new();
    for &n in &sec.sizes {
        let start = Instant::now();
        let c = suite_constants(seed, &setup, &[n], jackson)?[0];
        let mut row = ReportRow::new(
            format!("{name}/{n:04}"),
            name,
            format!("{base} size={n}"),
            "constant",
            c,
        )
        .timed(start.elapsed().as_secs_f64());
        if jackson && solver == Solver::Greedy {
            row = row.detail("greedy errors: upper bound on the constant");
        }
        rows.push(row);
        values.push(c);
    }
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, 0f64), |(l, h), &c| (l.min(c), h.max(c)));
    let drift = hi / lo;
    let anchor = if jackson {
        "sigma_nu(t, s) <= C t^{-xi} ||s||_{l^mu_{xi,eta}(u,nu)}"
    } else {
        "||s||_{l^mu_{xi,eta}(u,nu)} <= C t^xi ||s||_f on Sigma_{t,nu}"
    };
    rows.push(
        ReportRow::new(
            format!("{name}/drift"),
            name,
            format!("{base} sizes={:?}", sec.sizes),
            "max/min constant",
            drift,
        )
        .check(
            drift.is_finite() && drift < sec.max_drift,
            sec.max_drift,
            anchor,
        ),
    );
    Ok(rows)
}

pub fn run_jackson(cfg: &ExperimentConfig, seed: u64) -> Rows {
    suite_rows(cfg, seed, true)
}

pub fn run_bernstein(cfg: &ExperimentConfig, seed: u64) -> Rows {
    suite_rows(cfg, seed, false)
}

/// `l^{tau,tau}(u, nu_alpha) = b^gamma_{tau,tau}` on random sequences.
pub fn run_lorentz_besov(cfg: &ExperimentConfig, seed: u64) -> Rows {
    let lb = &cfg.lorentz_besov;
    let f2 = lb.f2.build(cfg.d, "lorentz_besov.f2")?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(lb.draws);
    for i in 0..lb.draws {
        let tau = lb.taus[i % lb.taus.len()];
        let start = Instant::now();
        let s = random_sequence(&mut rng, cfg.d, lb.support, lb.j_max);
        let c = lorentz_equals_besov_check(&s, lb.s1, lb.p1, &f2, tau)?;
        let err = (c.lhs - c.rhs).abs() / c.lhs.max(c.rhs).max(1.0);
        rows.push(
            ReportRow::new(
                format!("lorentz-besov/{:04}", i + 1),
                "lorentz-besov",
                format!(
                    "d={} s1={} p1={} f2={} tau={tau} support={} j_max={} seed={seed} draw={}",
                    cfg.d,
                    lb.s1,
                    lb.p1,
                    space_tag(&lb.f2),
                    lb.support,
                    lb.j_max,
                    i + 1
                ),
                "|lhs-rhs|/max(lhs,rhs,1)",
                err,
            )
            .check(
                c.ok,
                1e-10,
                "l^{tau,tau}(u, nu_alpha) = b^gamma_{tau,tau} with equal quasi-norms",
            )
            .detail(format!(
                "lhs={} rhs={} alpha={} gamma={}",
                c.lhs, c.rhs, c.alpha, c.gamma
            ))
            .timed(start.elapsed().as_secs_f64()),
        );
    }
    Ok(rows)
}

pub fn run_verify_all(cfg: &ExperimentConfig, seed: u64) -> Rows {
    let vc = VerifyConfig {
        seed,
        alpha_offset: cfg.verify.alpha_offset,
    };
    Ok(cfg
        .verify
        .criteria
        .iter()
        .filter_map(|&id| run_criterion(id, &vc))
        .map(|r| {
            let mut row = ReportRow::from(&r);
            row.params = format!(
                "{} seed={seed} alpha_offset={}",
                row.params, vc.alpha_offset
            );
            row
        })
        .collect())
}
