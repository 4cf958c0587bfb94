//! TOML experiment configuration.
//!
//! Every section is optional and falls back to the defaults below; unknown
//! keys are rejected. [`ExperimentConfig::validate`] range-checks every
//! numeric field before anything is computed.

use std::path::{Path, PathBuf};

use restricted_approx::approx::Solver;
use restricted_approx::democracy::GammaFamily;
use restricted_approx::verify::DEFAULT_SEED;
use restricted_approx::{SpaceKind, SpaceParams, WeightFn};
use serde::Deserialize;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {msg}")]
    Syntax { path: PathBuf, msg: String },
    #[error("config field `{field}`: {msg}")]
    Invalid { field: String, msg: String },
}

fn invalid(field: &str, msg: impl ToString) -> ConfigError {
    ConfigError::Invalid {
        field: field.into(),
        msg: msg.to_string(),
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    /// `tl` or `besov`.
    #[serde(default = "tl_kind")]
    pub kind: String,
    #[serde(default)]
    pub s: f64,
    #[serde(default = "two")]
    pub p: f64,
    #[serde(default = "two")]
    pub q: f64,
}

fn tl_kind() -> String {
    "tl".into()
}

fn two() -> f64 {
    2.0
}

impl Default for SpaceSpec {
    fn default() -> Self {
        Self {
            kind: tl_kind(),
            s: 0.0,
            p: 2.0,
            q: 2.0,
        }
    }
}

impl SpaceSpec {
    pub fn build(&self, d: usize, field: &str) -> Result<SpaceParams, ConfigError> {
        match self.kind.as_str() {
            "tl" => SpaceParams::tl(self.s, self.p, self.q, d),
            "besov" => SpaceParams::besov(self.s, self.p, self.q, d),
            other => {
                return Err(invalid(
                    &format!("{field}.kind"),
                    format!("`{other}` is not tl or besov"),
                ))
            }
        }
        .map_err(|e| invalid(field, e))
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LorentzSection {
    pub eta: String,
    pub mu: f64,
    pub xi: f64,
    /// `space` uses `u_Q = ||e_Q||_f`, `unit` uses `u_Q = 1`.
    pub weights: String,
}

impl Default for LorentzSection {
    fn default() -> Self {
        Self {
            eta: "power:p=2".into(),
            mu: 2.0,
            xi: 0.0,
            weights: "space".into(),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ApproxSection {
    pub xi: f64,
    pub mu: f64,
    /// `auto` picks knapsack for additive errors and brute force otherwise.
    pub solver: String,
    pub budgets: Vec<f64>,
}

impl Default for ApproxSection {
    fn default() -> Self {
        Self {
            xi: 0.5,
            mu: 1.0,
            solver: "auto".into(),
            budgets: vec![0.25, 0.5, 1.0, 2.0, 4.0],
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DemocracySection {
    pub f1: SpaceSpec,
    pub f2: SpaceSpec,
    /// Defaults to the critical value for `f1`, `f2`.
    pub alpha: Option<f64>,
    /// Defaults to grids N in {1,2,4,8} x L in {1,2,4}, towers and rows N <= 8.
    pub families: Option<Vec<GammaFamily>>,
    pub fit_sizes: Vec<u32>,
    pub random_n: u32,
    pub random_draws: usize,
    pub j_max: i32,
    pub window_log2: i32,
}

impl Default for DemocracySection {
    fn default() -> Self {
        Self {
            f1: SpaceSpec::default(),
            f2: SpaceSpec::default(),
            alpha: None,
            families: None,
            fit_sizes: (3..=10).map(|k| 1 << k).collect(),
            random_n: 16,
            random_draws: 100,
            j_max: 3,
            window_log2: 2,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SuiteSection {
    pub f1: SpaceSpec,
    pub f2: SpaceSpec,
    pub alpha: Option<f64>,
    pub eta: String,
    pub xi: f64,
    pub mu: f64,
    pub solver: String,
    pub sizes: Vec<usize>,
    pub max_drift: f64,
}

impl Default for SuiteSection {
    fn default() -> Self {
        Self {
            f1: SpaceSpec::default(),
            f2: SpaceSpec::default(),
            alpha: None,
            eta: "power:p=2".into(),
            xi: 0.5,
            mu: 1.0,
            solver: "auto".into(),
            sizes: vec![16, 32, 64],
            max_drift: 4.0,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LorentzBesovSection {
    pub s1: f64,
    pub p1: f64,
    pub f2: SpaceSpec,
    pub taus: Vec<f64>,
    pub draws: usize,
    pub support: usize,
    pub j_max: i32,
}

impl Default for LorentzBesovSection {
    fn default() -> Self {
        Self {
            s1: 0.0,
            p1: 2.0,
            f2: SpaceSpec {
                s: 0.25,
                ..SpaceSpec::default()
            },
            taus: vec![0.5, 1.0, 1.7, 3.0],
            draws: 50,
            support: 30,
            j_max: 4,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySection {
    pub criteria: Vec<u8>,
    pub alpha_offset: f64,
}

impl Default for VerifySection {
    fn default() -> Self {
        Self {
            criteria: (1..=10).collect(),
            alpha_offset: 0.0,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub d: usize,
    /// Measure `nu_alpha` for `norm`, `sigma` and `approx-norm`.
    pub alpha: f64,
    /// Coefficient file, `j k1 [k2 ...] value` per line; relative paths are
    /// resolved against the config file's directory.
    pub sequence: Option<PathBuf>,
    pub space: SpaceSpec,
    pub lorentz: LorentzSection,
    pub approx: ApproxSection,
    pub democracy: DemocracySection,
    pub jackson: SuiteSection,
    pub bernstein: SuiteSection,
    pub lorentz_besov: LorentzBesovSection,
    pub verify: VerifySection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            d: 1,
            alpha: 0.0,
            sequence: None,
            space: SpaceSpec::default(),
            lorentz: LorentzSection::default(),
            approx: ApproxSection::default(),
            democracy: DemocracySection::default(),
            jackson: SuiteSection::default(),
            bernstein: SuiteSection::default(),
            lorentz_besov: LorentzBesovSection::default(),
            verify: VerifySection::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str, path: &Path) -> Result<Self, ConfigError> {
        let mut cfg: Self = toml::from_str(text).map_err(|e| ConfigError::Syntax {
            path: path.to_path_buf(),
            msg: e.to_string(),
        })?;
        if let (Some(seq), Some(dir)) = (&cfg.sequence, path.parent()) {
            if seq.is_relative() {
                cfg.sequence = Some(dir.join(seq));
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, path)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(1..=8).contains(&self.d) {
            return Err(invalid("d", "dimension must be in 1..=8"));
        }
        finite("alpha", self.alpha)?;
        self.space.build(self.d, "space")?;

        parse_weight(&self.lorentz.eta, "lorentz.eta")?;
        positive_or_inf("lorentz.mu", self.lorentz.mu)?;
        if !(self.lorentz.xi >= 0.0 && self.lorentz.xi.is_finite()) {
            return Err(invalid("lorentz.xi", "must be finite and >= 0"));
        }
        if !matches!(self.lorentz.weights.as_str(), "space" | "unit") {
            return Err(invalid("lorentz.weights", "expected `space` or `unit`"));
        }

        positive_finite("approx.xi", self.approx.xi)?;
        positive_or_inf("approx.mu", self.approx.mu)?;
        parse_solver(&self.approx.solver, "approx.solver")?;
        for &t in &self.approx.budgets {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(invalid(
                    "approx.budgets",
                    format!("budget {t} is not finite and >= 0"),
                ));
            }
        }

        let dem = &self.democracy;
        let f1 = dem.f1.build(self.d, "democracy.f1")?;
        if f1.kind != SpaceKind::TriebelLizorkin {
            return Err(invalid("democracy.f1.kind", "must be tl"));
        }
        dem.f2.build(self.d, "democracy.f2")?;
        if let Some(a) = dem.alpha {
            finite("democracy.alpha", a)?;
        }
        if dem.fit_sizes.len() < 2 || dem.fit_sizes.contains(&0) {
            return Err(invalid(
                "democracy.fit_sizes",
                "need at least two positive sizes",
            ));
        }
        if dem.random_n == 0 || dem.random_draws < 2 {
            return Err(invalid(
                "democracy",
                "random_n must be >= 1 and random_draws >= 2",
            ));
        }
        if !(0..=20).contains(&dem.j_max) || !(0..=20).contains(&dem.window_log2) {
            return Err(invalid(
                "democracy",
                "j_max and window_log2 must be in 0..=20",
            ));
        }
        if let Some(families) = &dem.families {
            for f in families {
                if f.n() == 0 {
                    return Err(invalid(
                        "democracy.families",
                        format!("{f}: n must be >= 1"),
                    ));
                }
            }
        }

        for (name, suite) in [("jackson", &self.jackson), ("bernstein", &self.bernstein)] {
            suite.f1.build(1, &format!("{name}.f1"))?;
            suite.f2.build(1, &format!("{name}.f2"))?;
            if let Some(a) = suite.alpha {
                finite(&format!("{name}.alpha"), a)?;
            }
            parse_weight(&suite.eta, &format!("{name}.eta"))?;
            positive_finite(&format!("{name}.xi"), suite.xi)?;
            positive_or_inf(&format!("{name}.mu"), suite.mu)?;
            parse_solver(&suite.solver, &format!("{name}.solver"))?;
            if suite.sizes.is_empty()
                || suite
                    .sizes
                    .iter()
                    .any(|&n| !n.is_power_of_two() || !(2..=128).contains(&n))
            {
                return Err(invalid(
                    &format!("{name}.sizes"),
                    "sizes must be powers of two in 2..=128",
                ));
            }
            if !(suite.max_drift >= 1.0) {
                return Err(invalid(&format!("{name}.max_drift"), "must be >= 1"));
            }
        }

        let lb = &self.lorentz_besov;
        finite("lorentz_besov.s1", lb.s1)?;
        positive_finite("lorentz_besov.p1", lb.p1)?;
        lb.f2.build(self.d, "lorentz_besov.f2")?;
        if lb.taus.is_empty() {
            return Err(invalid("lorentz_besov.taus", "need at least one tau"));
        }
        for &tau in &lb.taus {
            positive_finite("lorentz_besov.taus", tau)?;
        }
        if lb.support == 0 || !(0..=20).contains(&lb.j_max) {
            return Err(invalid(
                "lorentz_besov",
                "support must be >= 1 and j_max in 0..=20",
            ));
        }

        for &id in &self.verify.criteria {
            if !(1..=10).contains(&id) {
                return Err(invalid("verify.criteria", format!("no criterion {id}")));
            }
        }
        finite("verify.alpha_offset", self.verify.alpha_offset)?;
        Ok(())
    }
}

fn finite(field: &str, x: f64) -> Result<(), ConfigError> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, format!("{x} is not finite")))
    }
}

fn positive_finite(field: &str, x: f64) -> Result<(), ConfigError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, format!("{x} is not in (0, inf)")))
    }
}

fn positive_or_inf(field: &str, x: f64) -> Result<(), ConfigError> {
    if x > 0.0 {
        Ok(())
    } else {
        Err(invalid(field, format!("{x} is not in (0, inf]")))
    }
}

pub fn parse_weight(spec: &str, field: &str) -> Result<WeightFn, ConfigError> {
    spec.parse().map_err(|e| invalid(field, e))
}

/// `None` stands for `auto`.
pub fn parse_solver(spec: &str, field: &str) -> Result<Option<Solver>, ConfigError> {
    if spec == "auto" {
        return Ok(None);
    }
    spec.parse().map(Some).map_err(|e| invalid(field, e))
}
