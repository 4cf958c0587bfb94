//! Weight functions `eta` for discrete Lorentz spaces.
//!
//! Two families ship: `eta(t) = t^{1/p}` and the power-log weight
//! `eta(t) = t^{1/p} (1 + |ln t|)^b`. The power-log weight is nondecreasing
//! exactly when `|b| <= 1/p`, so larger `|b|` is rejected at construction.
//! `p = inf` gives the constant weight `1_{t>0}`, which is doubling but not
//! in `W` (it does not vanish at `0+`) and never certifies for `W_+`.
//!
//! Sup-type quantities (`M_eta`, the lower Boyd index) have closed forms for
//! the power family. For power-log they are sampled on a logarithmic grid,
//! which gives a lower bound of the true supremum.

use std::f64::consts::LN_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::adaptive_simpson;

/// Safety factor applied to a sampled `M_eta(s0)` before it is stored as `delta`.
const DELTA_MARGIN: f64 = 1.1;
const CERTIFY_GRID_POINTS: usize = 512;
const MAX_DYADIC_PIECES: usize = 20_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum WeightFamily {
    Power,
    PowerLog { b: f64 },
}

/// A pair `(s0, delta)` with `M_eta(s0) <= delta < 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub s0: f64,
    pub delta: f64,
}

/// Logarithmic sampling grid `t = 2^x`, `x` evenly spaced in `[log2_min, log2_max]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogGrid {
    pub log2_min: f64,
    pub log2_max: f64,
    pub points: usize,
}

impl Default for LogGrid {
    fn default() -> Self {
        Self {
            log2_min: -64.0,
            log2_max: 64.0,
            points: CERTIFY_GRID_POINTS,
        }
    }
}

impl LogGrid {
    pub fn dense() -> Self {
        Self {
            points: 8192,
            ..Self::default()
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        let n = self.points.max(2);
        let step = (self.log2_max - self.log2_min) / (n - 1) as f64;
        (0..n).map(move |i| (self.log2_min + step * i as f64).exp2())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightFn {
    family: WeightFamily,
    /// `1/p`; zero for `p = inf`.
    inv_p: f64,
    doubling: f64,
    certificate: Option<Certificate>,
}

impl WeightFn {
    /// `t^{1/p}`; `p = f64::INFINITY` gives the constant weight.
    pub fn power(p: f64) -> Result<Self> {
        if !(p > 0.0) {
            return Err(Error::Param(format!("power weight needs p > 0, got {p}")));
        }
        Ok(Self::from_parts(WeightFamily::Power, 1.0 / p))
    }

    /// `t^{1/p} (1 + |ln t|)^b`, requires `0 < p < inf` and `|b| <= 1/p`.
    pub fn power_log(p: f64, b: f64) -> Result<Self> {
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::Param(format!(
                "power-log weight needs finite p > 0, got {p}"
            )));
        }
        if !b.is_finite() || b.abs() > 1.0 / p * (1.0 + 1e-12) {
            return Err(Error::Param(format!(
                "power-log weight t^(1/{p})(1+|ln t|)^{b} is not nondecreasing; need |b| <= 1/p"
            )));
        }
        Ok(Self::from_parts(WeightFamily::PowerLog { b }, 1.0 / p))
    }

    fn from_parts(family: WeightFamily, inv_p: f64) -> Self {
        let doubling = match family {
            WeightFamily::Power => inv_p.exp2(),
            WeightFamily::PowerLog { b } => inv_p.exp2() * (1.0 + LN_2).powf(b.abs()),
        };
        let mut w = Self {
            family,
            inv_p,
            doubling,
            certificate: None,
        };
        w.certificate = w.find_certificate();
        w
    }

    pub fn family(&self) -> WeightFamily {
        self.family
    }

    pub fn p(&self) -> f64 {
        1.0 / self.inv_p
    }

    pub fn inv_p(&self) -> f64 {
        self.inv_p
    }

    /// `C_dbl = sup_t eta(2t)/eta(t)`, closed form for both families.
    pub fn doubling_constant(&self) -> f64 {
        self.doubling
    }

    pub fn certificate(&self) -> Option<Certificate> {
        self.certificate
    }

    pub fn in_w_plus(&self) -> bool {
        self.certificate.is_some()
    }

    pub fn is_power(&self) -> bool {
        matches!(self.family, WeightFamily::Power)
    }

    /// `t^xi eta(t)`.
    pub fn shifted(&self, xi: f64) -> Self {
        Self::from_parts(self.family, self.inv_p + xi)
    }

    /// `eta(t)^r`, `r > 0`.
    pub fn powered(&self, r: f64) -> Self {
        let family = match self.family {
            WeightFamily::Power => WeightFamily::Power,
            WeightFamily::PowerLog { b } => WeightFamily::PowerLog { b: b * r },
        };
        Self::from_parts(family, self.inv_p * r)
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let base = if self.inv_p == 0.0 {
            1.0
        } else {
            t.powf(self.inv_p)
        };
        match self.family {
            WeightFamily::Power => base,
            WeightFamily::PowerLog { b } => base * (1.0 + t.ln().abs()).powf(b),
        }
    }

    /// `M_eta(s) = sup_{t>0} eta(st)/eta(t)`. Closed form `s^{1/p}` for the
    /// power family; otherwise the supremum over `grid` (a lower bound).
    pub fn dilation_fn(&self, s: f64, grid: &LogGrid) -> f64 {
        assert!(s > 0.0, "dilation needs s > 0");
        match self.family {
            WeightFamily::Power => {
                if self.inv_p == 0.0 {
                    1.0
                } else {
                    s.powf(self.inv_p)
                }
            }
            WeightFamily::PowerLog { .. } => {
                let ratio = |t: f64| self.eval(s * t) / self.eval(t);
                // t = 1 and t = 1/s are where the log factor kinks
                grid.iter()
                    .chain([1.0, 1.0 / s])
                    .map(ratio)
                    .fold(0.0, f64::max)
            }
        }
    }

    fn find_certificate(&self) -> Option<Certificate> {
        if self.inv_p <= 0.0 {
            return None;
        }
        match self.family {
            WeightFamily::Power => Some(Certificate {
                s0: 0.5,
                delta: (-self.inv_p).exp2(),
            }),
            WeightFamily::PowerLog { .. } => {
                let grid = LogGrid::default();
                (1..=32).find_map(|k| {
                    let s0 = (-(k as f64)).exp2();
                    let delta = DELTA_MARGIN * self.dilation_fn(s0, &grid);
                    (delta < 1.0).then_some(Certificate { s0, delta })
                })
            }
        }
    }

    fn require_certificate(&self) -> Result<Certificate> {
        self.certificate
            .ok_or_else(|| Error::Capability(format!("weight {self} is not certified in W_+")))
    }

    /// `(sum_{j=0}^{cutoff} eta(s0^j t), eta(t)/(1 - delta))`.
    pub fn geometric_sum_bound(&self, t: f64, cutoff: usize) -> Result<(f64, f64)> {
        let cert = self.require_certificate()?;
        if t <= 0.0 {
            return Ok((0.0, 0.0));
        }
        let mut sum = 0.0;
        let mut x = t;
        for _ in 0..=cutoff {
            sum += self.eval(x);
            x *= cert.s0;
        }
        Ok((sum, self.eval(t) / (1.0 - cert.delta)))
    }

    /// Proof constants `(C1, C2)` with `C1 eta <= g <= C2 eta`.
    pub fn smoothing_constants(&self) -> Result<(f64, f64)> {
        let cert = self.require_certificate()?;
        Ok((
            LN_2 / self.doubling,
            (1.0 / cert.s0).ln() / (1.0 - cert.delta),
        ))
    }

    /// `g(t) = int_0^t eta(s)/s ds`; `p t^{1/p}` for the power family,
    /// adaptive quadrature over `[s0^{j+1} t, s0^j t]` otherwise.
    pub fn smoothed_weight(&self, t: f64, tol: f64) -> Result<f64> {
        let cert = self.require_certificate()?;
        if !(tol > 0.0) {
            return Err(Error::Param(format!(
                "tolerance must be positive, got {tol}"
            )));
        }
        if t <= 0.0 {
            return Ok(0.0);
        }
        if self.is_power() {
            return Ok(t.powf(self.inv_p) / self.inv_p);
        }
        let step = (1.0 / cert.s0).ln();
        let tail_factor = step / (1.0 - cert.delta);
        let mut total = 0.0;
        let mut hi = t.ln();
        for _ in 0..MAX_DYADIC_PIECES {
            let lo = hi - step;
            let piece_tol = 0.25 * tol * self.eval(hi.exp()) * step;
            total += self.log_integral(lo, hi, piece_tol)?;
            hi = lo;
            // remaining pieces sum to at most eta(e^hi) ln(1/s0)/(1-delta)
            let tail = self.eval(hi.exp()) * tail_factor;
            if tail <= 0.5 * tol * total {
                return Ok(total + 0.5 * tail);
            }
        }
        Err(Error::Numeric {
            msg: format!("smoothed weight at t = {t} did not converge"),
            achieved: self.eval(hi.exp()) * tail_factor / total,
        })
    }

    /// `int_{e^lo}^{e^hi} eta(s) ds/s = int_lo^hi eta(e^u) du`, split at the kink `u = 0`.
    fn log_integral(&self, lo: f64, hi: f64, abs_tol: f64) -> Result<f64> {
        let f = |u: f64| self.eval(u.exp());
        let tol = abs_tol.max(f64::MIN_POSITIVE);
        if lo < 0.0 && hi > 0.0 {
            Ok(adaptive_simpson(&f, lo, 0.0, 0.5 * tol)?
                + adaptive_simpson(&f, 0.0, hi, 0.5 * tol)?)
        } else {
            adaptive_simpson(&f, lo, hi, tol)
        }
    }

    /// `int_a^b eta(t) dt/t` for `0 <= a <= b`, to relative accuracy `tol`.
    pub fn integral_dt_over_t(&self, a: f64, b: f64, tol: f64) -> Result<f64> {
        if b <= a {
            return Ok(0.0);
        }
        if self.inv_p == 0.0 {
            if a == 0.0 {
                return Err(Error::Divergence(format!(
                    "int_0 eta(t) dt/t diverges for {self}"
                )));
            }
            return Ok(match self.family {
                WeightFamily::Power => (b / a).ln(),
                _ => unreachable!("power-log has finite p"),
            });
        }
        if self.is_power() {
            let r = self.inv_p;
            return Ok((b.powf(r) - a.powf(r)) / r);
        }
        if a == 0.0 {
            return self.smoothed_weight(b, tol);
        }
        let scale = self.eval(b) * (b / a).ln();
        self.log_integral(a.ln(), b.ln(), tol * scale)
    }

    /// `log M_eta(t_min) / log t_min`; exactly `1/p` for the power family.
    pub fn boyd_lower_index(&self, t_min: f64) -> f64 {
        assert!(t_min > 0.0 && t_min < 1.0, "t_min must lie in (0,1)");
        if self.is_power() {
            return self.inv_p;
        }
        self.dilation_fn(t_min, &LogGrid::default()).ln() / t_min.ln()
    }
}

impl fmt::Display for WeightFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.p();
        match self.family {
            WeightFamily::Power => write!(f, "power:p={p}"),
            WeightFamily::PowerLog { b } => write!(f, "powerlog:p={p},b={b}"),
        }
    }
}

impl FromStr for WeightFn {
    type Err = Error;

    /// `power:p=2`, `power:p=inf`, `powerlog:p=2,b=0.5`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: &str| Error::Param(format!("weight spec `{s}`: {msg}"));
        let (tag, rest) = s.split_once(':').ok_or_else(|| bad("missing `:`"))?;
        let mut p = None;
        let mut b = None;
        for kv in rest.split(',').filter(|kv| !kv.trim().is_empty()) {
            let (key, value) = kv
                .split_once('=')
                .ok_or_else(|| bad("expected key=value"))?;
            let value: f64 = match value.trim() {
                "inf" => f64::INFINITY,
                v => v.parse().map_err(|_| bad("value is not a number"))?,
            };
            match key.trim() {
                "p" => p = Some(value),
                "b" => b = Some(value),
                _ => return Err(bad("unknown key")),
            }
        }
        let p = p.ok_or_else(|| bad("missing p"))?;
        match tag.trim() {
            "power" if b.is_none() => WeightFn::power(p),
            "powerlog" => WeightFn::power_log(p, b.ok_or_else(|| bad("missing b"))?),
            _ => Err(bad("unknown family")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn log_grid(lo: i32, hi: i32, per_octave: i32) -> Vec<f64> {
        (lo * per_octave..=hi * per_octave)
            .map(|i| (i as f64 / per_octave as f64).exp2())
            .collect()
    }

    #[test]
    fn eval_examples() {
        assert_eq!(WeightFn::power(2.0).unwrap().eval(4.0), 2.0);
        assert_eq!(WeightFn::power(1.0).unwrap().eval(0.0), 0.0);
        assert_eq!(WeightFn::power_log(2.0, 0.5).unwrap().eval(1.0), 1.0);
        assert_eq!(WeightFn::power(f64::INFINITY).unwrap().eval(0.0), 0.0);
    }

    #[test]
    fn rejects_non_monotone_power_log() {
        assert!(WeightFn::power_log(2.0, 1.0).is_err());
        assert!(WeightFn::power_log(2.0, -0.6).is_err());
        assert!(WeightFn::power(0.0).is_err());
    }

    #[test]
    fn dilation_examples() {
        let grid = LogGrid::default();
        assert_eq!(WeightFn::power(2.0).unwrap().dilation_fn(4.0, &grid), 2.0);
        let pl = WeightFn::power_log(2.0, 0.5).unwrap();
        assert!((pl.dilation_fn(1.0, &grid) - 1.0).abs() < 1e-15);
        for w in [
            pl,
            WeightFn::power_log(2.0, -0.5).unwrap(),
            WeightFn::power(0.7).unwrap(),
        ] {
            for s in [0.1, 0.5, 0.99, 1.0] {
                assert!(w.dilation_fn(s, &grid) <= 1.0 + 1e-15);
            }
        }
    }

    #[test]
    fn geometric_sums() {
        let (sum, bound) = WeightFn::power(1.0)
            .unwrap()
            .geometric_sum_bound(1.0, 20)
            .unwrap();
        assert_eq!(bound, 2.0);
        assert!(sum < 2.0 && sum > 2.0 - 1e-5);

        // p = 2 with s0 = 1/4: delta = 1/2, partial sums 2 - 2^{-J}
        let w = WeightFn::power(2.0).unwrap();
        let cert = Certificate {
            s0: 0.25,
            delta: 0.5,
        };
        let mut partial = 0.0;
        for j in 0..=30 {
            partial += w.eval(cert.s0.powi(j));
        }
        assert!((partial - (2.0 - 0.5f64.powi(30))).abs() < 1e-15);
        assert!(partial < 1.0 / (1.0 - cert.delta));

        assert_eq!(w.geometric_sum_bound(0.0, 10).unwrap(), (0.0, 0.0));
        let flat = WeightFn::power(f64::INFINITY).unwrap();
        assert!(matches!(
            flat.geometric_sum_bound(1.0, 3),
            Err(Error::Capability(_))
        ));
    }

    #[test]
    fn smoothed_closed_forms() {
        assert_eq!(
            WeightFn::power(1.0)
                .unwrap()
                .smoothed_weight(3.0, 1e-10)
                .unwrap(),
            3.0
        );
        assert_eq!(
            WeightFn::power(2.0)
                .unwrap()
                .smoothed_weight(4.0, 1e-10)
                .unwrap(),
            4.0
        );
    }

    #[test]
    fn smoothed_power_log_matches_series() {
        // b = 1/p: int_0^1 s^{r-1}(1 - ln s)^b ds, compare with a fine Riemann sum in u = ln s
        let w = WeightFn::power_log(2.0, 0.5).unwrap();
        let g = w.smoothed_weight(1.0, 1e-10).unwrap();
        let mut reference = 0.0;
        let h: f64 = 1e-4;
        let mut u = -h / 2.0;
        while u > -120.0 {
            reference += w.eval(u.exp()) * h;
            u -= h;
        }
        assert!((g - reference).abs() < 1e-7 * g);
        let (c1, c2) = w.smoothing_constants().unwrap();
        assert!(g >= c1 * w.eval(1.0) && g <= c2 * w.eval(1.0));
    }

    #[test]
    fn boyd_indices() {
        assert_eq!(WeightFn::power(2.0).unwrap().boyd_lower_index(0.5), 0.5);
        assert_eq!(WeightFn::power(1.0).unwrap().boyd_lower_index(0.5), 1.0);
        let pl = WeightFn::power_log(2.0, 0.5).unwrap();
        // sup is attained near t = 1: M(s) = s^{1/2} (1 + |ln s|)^{1/2}
        for k in [40.0f64, 400.0] {
            let t_min = (-k).exp2();
            let est = pl.boyd_lower_index(t_min);
            let exact = 0.5 - 0.5 * (1.0 + t_min.ln().abs()).ln() / t_min.ln().abs();
            assert!((est - exact).abs() < 1e-12, "{est} vs {exact}");
            let dense = pl.dilation_fn(t_min, &LogGrid::dense()).ln() / t_min.ln();
            assert!((est - dense).abs() < 1e-12);
        }
        let (near, far) = (
            pl.boyd_lower_index((-40f64).exp2()),
            pl.boyd_lower_index((-400f64).exp2()),
        );
        assert!(near < far && far < 0.5 && 0.5 - far < 0.02);
    }

    #[test]
    fn monotone_and_doubling_on_grid() {
        let weights = [
            WeightFn::power(0.3).unwrap(),
            WeightFn::power(3.0).unwrap(),
            WeightFn::power_log(2.0, 0.5).unwrap(),
            WeightFn::power_log(1.5, -0.6).unwrap(),
        ];
        let grid = log_grid(-40, 40, 16);
        for w in &weights {
            for pair in grid.windows(2) {
                assert!(w.eval(pair[0]) <= w.eval(pair[1]), "{w} at {}", pair[0]);
            }
            for &t in &grid {
                assert!(w.eval(2.0 * t) <= w.doubling_constant() * w.eval(t) * (1.0 + 1e-14));
            }
        }
    }

    #[test]
    fn shifted_weights_certify() {
        for w in [
            WeightFn::power_log(2.0, 0.5).unwrap(),
            WeightFn::power_log(2.0, -0.5).unwrap(),
            WeightFn::power(f64::INFINITY).unwrap(),
        ] {
            for xi in [0.05, 0.5, 2.0] {
                let s = w.shifted(xi);
                let cert = s.certificate().expect("t^xi eta is in W_+");
                assert!(cert.delta < 1.0 && cert.s0 < 1.0);
            }
        }
    }

    #[test]
    fn parse_specs() {
        let w: WeightFn = "power:p=2".parse().unwrap();
        assert_eq!(w, WeightFn::power(2.0).unwrap());
        let w: WeightFn = "powerlog:p=2,b=0.5".parse().unwrap();
        assert_eq!(w.to_string(), "powerlog:p=2,b=0.5");
        assert!("power:p=inf".parse::<WeightFn>().unwrap().eval(3.0) == 1.0);
        assert!("cubic:p=2".parse::<WeightFn>().is_err());
        assert!("power:q=2".parse::<WeightFn>().is_err());
    }

    #[test]
    fn integral_over_steps() {
        let w = WeightFn::power_log(2.0, 0.5).unwrap();
        let whole = w.integral_dt_over_t(0.0, 3.0, 1e-11).unwrap();
        let split = w.integral_dt_over_t(0.0, 0.7, 1e-11).unwrap()
            + w.integral_dt_over_t(0.7, 3.0, 1e-11).unwrap();
        assert!((whole - split).abs() < 1e-9 * whole);
        let flat = WeightFn::power(f64::INFINITY).unwrap();
        assert!(matches!(
            flat.integral_dt_over_t(0.0, 1.0, 1e-9),
            Err(Error::Divergence(_))
        ));
    }
}
