//! Finitely supported coefficient sequences `s = {s_Q}` over dyadic cubes.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dyadic::{parse_cube_fields, CubeSet, DyadicCube};
use crate::error::{Error, Result};

/// A positive weight per cube, `u = {u_Q}`.
pub trait CubeWeights: Sync {
    fn weight(&self, q: &DyadicCube) -> f64;
}

/// `u_Q = 1` for every cube.
#[derive(Clone, Copy, Debug, Default)]
pub struct UnitWeights;

impl CubeWeights for UnitWeights {
    fn weight(&self, _q: &DyadicCube) -> f64 {
        1.0
    }
}

impl<F: Fn(&DyadicCube) -> f64 + Sync> CubeWeights for F {
    fn weight(&self, q: &DyadicCube) -> f64 {
        self(q)
    }
}

/// Zero entries are never stored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoeffSeq {
    d: usize,
    entries: BTreeMap<DyadicCube, f64>,
}

impl CoeffSeq {
    pub fn zero(d: usize) -> Self {
        Self {
            d,
            entries: BTreeMap::new(),
        }
    }

    /// Repeated cubes are summed.
    pub fn from_pairs(
        d: usize,
        pairs: impl IntoIterator<Item = (DyadicCube, f64)>,
    ) -> Result<Self> {
        let mut s = Self::zero(d);
        for (q, v) in pairs {
            if q.dim() != d {
                return Err(Error::Param(format!(
                    "cube ({q}) has dimension {} in a sequence of dimension {d}",
                    q.dim()
                )));
            }
            if !v.is_finite() {
                return Err(Error::Param(format!("coefficient on ({q}) is not finite")));
            }
            let cur = s.get(&q);
            s.set(q, cur + v);
        }
        Ok(s)
    }

    /// `c e_Q`.
    pub fn atom(q: DyadicCube, c: f64) -> Self {
        let mut s = Self::zero(q.dim());
        s.set(q, c);
        s
    }

    /// `1_{Gamma,u} = sum_{Q in Gamma} e_Q / u_Q`.
    pub fn normalized_indicator(gamma: &CubeSet, u: &dyn CubeWeights) -> Self {
        let mut s = Self::zero(gamma.dim());
        for q in gamma {
            s.set(q.clone(), 1.0 / u.weight(q));
        }
        s
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, q: &DyadicCube) -> f64 {
        self.entries.get(q).copied().unwrap_or(0.0)
    }

    pub fn set(&mut self, q: DyadicCube, v: f64) {
        assert_eq!(q.dim(), self.d, "cube dimension mismatch");
        if v == 0.0 {
            self.entries.remove(&q);
        } else {
            self.entries.insert(q, v);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&DyadicCube, f64)> + '_ {
        self.entries.iter().map(|(q, &v)| (q, v))
    }

    pub fn cubes(&self) -> impl Iterator<Item = &DyadicCube> + '_ {
        self.entries.keys()
    }

    pub fn support(&self) -> CubeSet {
        CubeSet::new(self.d, self.entries.keys().cloned()).expect("same dimension")
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut out = Self::zero(self.d);
        for (q, v) in self.iter() {
            out.set(q.clone(), c * v);
        }
        out
    }

    pub fn add(&self, other: &CoeffSeq) -> Self {
        assert_eq!(self.d, other.d, "dimension mismatch");
        let mut out = self.clone();
        for (q, v) in other.iter() {
            let cur = out.get(q);
            out.set(q.clone(), cur + v);
        }
        out
    }

    pub fn sub(&self, other: &CoeffSeq) -> Self {
        self.add(&other.scaled(-1.0))
    }

    /// `|s_Q| <= |t_Q|` for every cube.
    pub fn abs_le(&self, other: &CoeffSeq) -> bool {
        self.iter().all(|(q, v)| v.abs() <= other.get(q).abs())
    }

    /// Entries on cubes where `keep` holds.
    pub fn filter(&self, mut keep: impl FnMut(&DyadicCube) -> bool) -> Self {
        Self {
            d: self.d,
            entries: self
                .entries
                .iter()
                .filter(|(q, _)| keep(q))
                .map(|(q, &v)| (q.clone(), v))
                .collect(),
        }
    }

    /// Parses `j k1 [k2 ...] value` per line; `d` fixes how many position
    /// fields precede the value.
    pub fn parse(text: &str, d: usize) -> Result<Self> {
        let mut pairs = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != d + 2 {
                return Err(Error::Parse {
                    line: idx + 1,
                    msg: format!(
                        "expected {} fields (j, {d} positions, value), got {}",
                        d + 2,
                        fields.len()
                    ),
                });
            }
            let q = parse_cube_fields(fields[..d + 1].iter().copied(), idx + 1)?;
            let v: f64 = fields[d + 1].parse().map_err(|_| Error::Parse {
                line: idx + 1,
                msg: format!("value `{}` is not a number", fields[d + 1]),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line: idx + 1,
                    msg: "value is not finite".into(),
                });
            }
            pairs.push((q, v));
        }
        Self::from_pairs(d, pairs)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (q, v) in self.iter() {
            out.push_str(&format!("{q} {v:e}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_drops_zeros() {
        let a = CoeffSeq::atom(DyadicCube::new(0, vec![0]), 2.0);
        let b = a.scaled(-1.0);
        assert!(a.add(&b).is_empty());
        assert!(b.abs_le(&a) && a.abs_le(&b));
        assert_eq!(a.scaled(0.0).len(), 0);
    }

    #[test]
    fn parse_round_trip() {
        let s = CoeffSeq::parse("0 0 0 1.5\n-1 2 3 -0.25\n", 2).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(CoeffSeq::parse(&s.to_text(), 2).unwrap(), s);
        assert!(matches!(
            CoeffSeq::parse("0 0 1\n0 1\n", 1),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(CoeffSeq::parse("", 1).unwrap().is_empty());
    }
}
