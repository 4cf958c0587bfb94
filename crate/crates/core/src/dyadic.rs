//! Dyadic cubes `Q_{j,k} = 2^{-j}([0,1)^d + k)`, cube sets, the measures
//! `nu_alpha(Q) = |Q|^alpha`, and exact integration of functions that are
//! built from finitely many cube indicators.
//!
//! Integration never samples points. The cubes are arranged into a
//! containment forest; on every region "node cube minus its child cubes" a
//! function of the form `sum_Q a_Q chi_Q` (or `max_Q a_Q chi_Q`) is constant,
//! so the integral is a finite sum of constants times region volumes.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `|j*d|` for which `2^{-jd}` is a normal `f64`.
const MAX_LOG2_VOLUME: i64 = 1022;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicCube {
    j: i32,
    k: Vec<i64>,
}

impl DyadicCube {
    pub fn new(j: i32, k: impl Into<Vec<i64>>) -> Self {
        let k = k.into();
        assert!(!k.is_empty(), "dyadic cube needs dimension >= 1");
        Self { j, k }
    }

    /// `[0,1)^d`.
    pub fn unit(d: usize) -> Self {
        Self::new(0, vec![0; d])
    }

    pub fn scale(&self) -> i32 {
        self.j
    }

    pub fn position(&self) -> &[i64] {
        &self.k
    }

    pub fn dim(&self) -> usize {
        self.k.len()
    }

    /// `log2 |Q| = -j d`.
    pub fn log2_volume(&self) -> i64 {
        -(self.j as i64) * self.dim() as i64
    }

    /// `|Q|^x`, computed as `exp2(-j d x)`.
    pub fn volume_pow(&self, x: f64) -> f64 {
        if x == 0.0 {
            return 1.0;
        }
        (self.log2_volume() as f64 * x).exp2()
    }

    /// `|Q| = 2^{-jd}`, exact.
    pub fn volume(&self) -> Result<f64> {
        let e = self.log2_volume();
        if e.abs() > MAX_LOG2_VOLUME {
            return Err(Error::Range(format!(
                "|Q| = 2^{e} is outside the normal f64 exponent range"
            )));
        }
        Ok((e as f64).exp2())
    }

    pub fn side(&self) -> f64 {
        (-(self.j as f64)).exp2()
    }

    /// The unique dyadic cube at scale `j2 <= j` containing this one.
    pub fn ancestor(&self, j2: i32) -> Option<DyadicCube> {
        if j2 > self.j {
            return None;
        }
        let shift = (self.j as i64 - j2 as i64).min(63) as u32;
        Some(Self {
            j: j2,
            k: self.k.iter().map(|&c| c >> shift).collect(),
        })
    }

    pub fn parent(&self) -> DyadicCube {
        self.ancestor(self.j - 1).expect("parent scale is coarser")
    }

    /// `Q ⊇ other`, decided from `(j, k)` alone.
    pub fn contains(&self, other: &DyadicCube) -> bool {
        self.dim() == other.dim()
            && self.j <= other.j
            && other.ancestor(self.j).as_ref() == Some(self)
    }

    pub fn intersects(&self, other: &DyadicCube) -> bool {
        self.contains(other) || other.contains(self)
    }

    pub fn contains_point(&self, x: &[f64]) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        let scale = (self.j as f64).exp2();
        x.iter()
            .zip(&self.k)
            .all(|(&xi, &ki)| (xi * scale).floor() == ki as f64)
    }

    /// Dilation by `2^m`: `Q_{j,k} -> Q_{j-m,k}`.
    pub fn dilate(&self, m: i32) -> DyadicCube {
        Self {
            j: self.j - m,
            k: self.k.clone(),
        }
    }

    /// All `2^{jd}` cubes of scale `j >= 0` inside `[0,1)^d`.
    pub fn subcubes_of_unit(j: i32, d: usize) -> Vec<DyadicCube> {
        assert!(j >= 0);
        let per_axis = 1i64 << j;
        let total = (per_axis as usize).pow(d as u32);
        (0..total)
            .map(|mut idx| {
                let k: Vec<i64> = (0..d)
                    .map(|_| {
                        let c = (idx % per_axis as usize) as i64;
                        idx /= per_axis as usize;
                        c
                    })
                    .collect();
                DyadicCube::new(j, k)
            })
            .collect()
    }
}

impl fmt::Display for DyadicCube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.j)?;
        for c in &self.k {
            write!(f, " {c}")?;
        }
        Ok(())
    }
}

/// `|Q|`, see [`DyadicCube::volume`].
pub fn cube_volume(q: &DyadicCube) -> Result<f64> {
    q.volume()
}

/// A finite set of dyadic cubes of one dimension. Mixed scales and nesting
/// are allowed; duplicates are removed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CubeSet {
    d: usize,
    cubes: Vec<DyadicCube>,
}

impl CubeSet {
    pub fn empty(d: usize) -> Self {
        Self {
            d,
            cubes: Vec::new(),
        }
    }

    pub fn new(d: usize, cubes: impl IntoIterator<Item = DyadicCube>) -> Result<Self> {
        let mut cubes: Vec<DyadicCube> = cubes.into_iter().collect();
        if let Some(bad) = cubes.iter().find(|q| q.dim() != d) {
            return Err(Error::Param(format!(
                "cube ({bad}) has dimension {} in a set of dimension {d}",
                bad.dim()
            )));
        }
        cubes.sort();
        cubes.dedup();
        Ok(Self { d, cubes })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, DyadicCube> {
        self.cubes.iter()
    }

    pub fn cubes(&self) -> &[DyadicCube] {
        &self.cubes
    }

    pub fn contains(&self, q: &DyadicCube) -> bool {
        self.cubes.binary_search(q).is_ok()
    }

    pub fn dilate(&self, m: i32) -> CubeSet {
        Self {
            d: self.d,
            cubes: self.cubes.iter().map(|q| q.dilate(m)).collect(),
        }
    }

    /// Parses one cube per line, `j k1 [k2 ...]`. Blank lines and lines
    /// starting with `#` are skipped. The dimension is fixed by the first cube
    /// unless `d` is given.
    pub fn parse(text: &str, d: Option<usize>) -> Result<Self> {
        let mut dim = d;
        let mut cubes = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let q = parse_cube_fields(line.split_whitespace(), idx + 1)?;
            match dim {
                None => dim = Some(q.dim()),
                Some(d) if d != q.dim() => {
                    return Err(Error::Parse {
                        line: idx + 1,
                        msg: format!("expected {d} position entries, got {}", q.dim()),
                    })
                }
                _ => {}
            }
            cubes.push(q);
        }
        Self::new(dim.unwrap_or(1), cubes)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for q in &self.cubes {
            out.push_str(&q.to_string());
            out.push('\n');
        }
        out
    }
}

impl<'a> IntoIterator for &'a CubeSet {
    type Item = &'a DyadicCube;
    type IntoIter = std::slice::Iter<'a, DyadicCube>;

    fn into_iter(self) -> Self::IntoIter {
        self.cubes.iter()
    }
}

pub(crate) fn parse_cube_fields<'a>(
    mut fields: impl Iterator<Item = &'a str>,
    line: usize,
) -> Result<DyadicCube> {
    let bad = |msg: String| Error::Parse { line, msg };
    let j_str = fields.next().ok_or_else(|| bad("missing scale".into()))?;
    let j: i32 = j_str
        .parse()
        .map_err(|_| bad(format!("scale `{j_str}` is not an integer")))?;
    let mut k = Vec::new();
    for f in fields {
        k.push(
            f.parse::<i64>()
                .map_err(|_| bad(format!("position `{f}` is not an integer")))?,
        );
    }
    if k.is_empty() {
        return Err(bad("missing position".into()));
    }
    Ok(DyadicCube::new(j, k))
}

/// The measure `nu_alpha(Q) = |Q|^alpha`; `alpha = 0` is counting measure.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureSpec {
    pub alpha: f64,
}

impl MeasureSpec {
    pub fn new(alpha: f64) -> Self {
        Self { alpha }
    }

    pub fn counting() -> Self {
        Self { alpha: 0.0 }
    }

    pub fn mass(&self, q: &DyadicCube) -> f64 {
        q.volume_pow(self.alpha)
    }

    /// `sum_Q nu(Q)`, summed from the largest term down.
    pub fn total<'a>(&self, cubes: impl IntoIterator<Item = &'a DyadicCube>) -> f64 {
        let mut masses: Vec<f64> = cubes.into_iter().map(|q| self.mass(q)).collect();
        sum_descending(&mut masses)
    }
}

pub(crate) fn sum_descending(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| b.total_cmp(a));
    values.iter().sum()
}

/// `nu_alpha(Gamma)`.
pub fn nu_measure(gamma: &CubeSet, m: &MeasureSpec) -> f64 {
    m.total(gamma)
}

/// `S^gamma_Gamma(x) = sum_{Q in Gamma} |Q|^gamma chi_Q(x)`.
pub fn cube_sum(gamma: &CubeSet, exponent: f64, x: &[f64]) -> f64 {
    let mut terms: Vec<f64> = gamma
        .iter()
        .filter(|q| q.contains_point(x))
        .map(|q| q.volume_pow(exponent))
        .collect();
    sum_descending(&mut terms)
}

/// `(Q^x, Q_x)`: the biggest and the smallest cube of `Gamma` containing `x`.
pub fn biggest_smallest_cube(
    gamma: &CubeSet,
    x: &[f64],
) -> (Option<DyadicCube>, Option<DyadicCube>) {
    let mut containing = gamma.iter().filter(|q| q.contains_point(x));
    let Some(first) = containing.next() else {
        return (None, None);
    };
    let (mut big, mut small) = (first, first);
    for q in containing {
        if q.scale() < big.scale() {
            big = q;
        }
        if q.scale() > small.scale() {
            small = q;
        }
    }
    (Some(big.clone()), Some(small.clone()))
}

/// How the coefficients of nested cubes combine pointwise.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Accumulate {
    /// `sum_Q a_Q chi_Q(x)`
    Sum,
    /// `max_Q a_Q chi_Q(x)`
    Max,
}

impl Accumulate {
    fn combine(self, a: f64, b: f64) -> f64 {
        match self {
            Accumulate::Sum => a + b,
            Accumulate::Max => a.max(b),
        }
    }
}

/// Cubes of a finite set arranged by direct containment.
///
/// Nodes are stored coarse-to-fine, so a parent always precedes its
/// children.
#[derive(Clone, Debug)]
pub struct ContainmentForest {
    cubes: Vec<DyadicCube>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
}

impl ContainmentForest {
    /// Builds the forest; `cubes` must be distinct and share one dimension.
    pub fn build(mut cubes: Vec<DyadicCube>) -> Self {
        cubes.sort();
        debug_assert!(cubes.windows(2).all(|w| w[0] != w[1]));
        let index: HashMap<&DyadicCube, usize> =
            cubes.iter().enumerate().map(|(i, q)| (q, i)).collect();
        let mut scales: Vec<i32> = cubes.iter().map(|q| q.scale()).collect();
        scales.dedup();

        let mut parent = vec![None; cubes.len()];
        let mut children = vec![Vec::new(); cubes.len()];
        for (i, q) in cubes.iter().enumerate() {
            let coarser = scales.partition_point(|&s| s < q.scale());
            for &s in scales[..coarser].iter().rev() {
                let anc = q.ancestor(s).expect("coarser scale");
                if let Some(&p) = index.get(&anc) {
                    parent[i] = Some(p);
                    children[p].push(i);
                    break;
                }
            }
        }
        Self {
            cubes,
            parent,
            children,
        }
    }

    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    pub fn cube(&self, i: usize) -> &DyadicCube {
        &self.cubes[i]
    }

    pub fn parent(&self, i: usize) -> Option<usize> {
        self.parent[i]
    }

    pub fn children(&self, i: usize) -> &[usize] {
        &self.children[i]
    }

    pub fn roots(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&i| self.parent[i].is_none())
    }

    /// `|Q_node| - sum |Q_child|`; exact while all volumes share a binary grid.
    pub fn region_measure(&self, i: usize) -> f64 {
        let own = self.cubes[i].volume_pow(1.0);
        let kids: f64 = self.children[i]
            .iter()
            .map(|&c| self.cubes[c].volume_pow(1.0))
            .sum();
        own - kids
    }

    /// Accumulates `values` along every ancestor chain: entry `i` is the
    /// value of the pointwise function on the region of node `i`.
    pub fn chain_values(&self, values: &[f64], acc: Accumulate) -> Vec<f64> {
        assert_eq!(values.len(), self.len());
        let mut out = values.to_vec();
        for i in 0..self.len() {
            if let Some(p) = self.parent[i] {
                out[i] = acc.combine(out[p], values[i]);
            }
        }
        out
    }
}

/// `(int [F(x)]^theta dx)^{1/outer_p}` where `F = sum_Q a_Q chi_Q` (or the
/// pointwise max), evaluated exactly on the containment forest.
pub fn integrate_cube_function(
    terms: &[(DyadicCube, f64)],
    acc: Accumulate,
    theta: f64,
    outer_p: f64,
) -> Result<f64> {
    if !(theta > 0.0) || !(outer_p > 0.0) {
        return Err(Error::Contract(format!(
            "exponents must be positive (theta = {theta}, outer_p = {outer_p})"
        )));
    }
    if let Some((q, a)) = terms.iter().find(|(_, a)| !(*a >= 0.0)) {
        return Err(Error::Contract(format!(
            "coefficient {a} on cube ({q}) is not a nonnegative number"
        )));
    }
    let mut merged: HashMap<&DyadicCube, f64> = HashMap::new();
    for (q, a) in terms {
        merged
            .entry(q)
            .and_modify(|v| *v = acc.combine(*v, *a))
            .or_insert(*a);
    }
    let mut pairs: Vec<(DyadicCube, f64)> =
        merged.into_iter().map(|(q, a)| (q.clone(), a)).collect();
    pairs.sort_by(|a, b| a.0.cmp(&b.0));
    let forest = ContainmentForest::build(pairs.iter().map(|(q, _)| q.clone()).collect());
    let values: Vec<f64> = pairs.iter().map(|(_, a)| *a).collect();
    let chain = forest.chain_values(&values, acc);

    let mut pieces: Vec<f64> = (0..forest.len())
        .map(|i| {
            let level = chain[i];
            if level == 0.0 {
                0.0
            } else {
                level.powf(theta) * forest.region_measure(i)
            }
        })
        .collect();
    let integral = sum_descending(&mut pieces);
    Ok(integral.powf(1.0 / outer_p))
}

/// `(int [sum_Q a_Q chi_Q(x)]^theta dx)^{1/outer_p}`, exact.
pub fn integrate_power_of_cube_sum(
    terms: &[(DyadicCube, f64)],
    theta: f64,
    outer_p: f64,
) -> Result<f64> {
    integrate_cube_function(terms, Accumulate::Sum, theta, outer_p)
}
