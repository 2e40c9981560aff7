use serde::{Deserialize, Serialize};

use crate::error::{invalid, LathomError, Result};
use crate::lattice::domain::{Site, MAX_DIM};
use crate::lattice::field::Probe;
use crate::scalar::{int, norm_pow, Scalar};

/// A nonzero lattice direction `ξ ∈ Z^N`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct DirectionOffset(Vec<i64>);

impl DirectionOffset {
    pub fn new(xi: Vec<i64>) -> Result<Self> {
        if xi.is_empty() || xi.len() > MAX_DIM {
            return Err(invalid(format!("direction must have 1..={MAX_DIM} components")));
        }
        if xi.iter().all(|&x| x == 0) {
            return Err(invalid("direction must be nonzero"));
        }
        Ok(DirectionOffset(xi))
    }

    /// The unit vector `e_axis` in dimension `dim`.
    pub fn unit(dim: usize, axis: usize) -> Self {
        let mut v = vec![0; dim];
        v[axis] = 1;
        DirectionOffset(v)
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn l1(&self) -> i64 {
        self.0.iter().map(|x| x.abs()).sum()
    }

    pub fn linf(&self) -> i64 {
        self.0.iter().map(|x| x.abs()).max().unwrap_or(0)
    }

    pub fn l2_sq(&self) -> i64 {
        self.0.iter().map(|x| x * x).sum()
    }

    pub fn l2<T: Scalar>(&self) -> T {
        int::<T>(self.l2_sq()).sqrt()
    }

    pub fn is_unit(&self) -> bool {
        self.l1() == 1
    }

    /// `true` if the first nonzero component is positive.
    pub fn is_positive(&self) -> bool {
        self.0.iter().find(|&&x| x != 0).is_some_and(|&x| x > 0)
    }

    pub fn neg(&self) -> Self {
        DirectionOffset(self.0.iter().map(|x| -x).collect())
    }
}

impl TryFrom<Vec<i64>> for DirectionOffset {
    type Error = LathomError;
    fn try_from(v: Vec<i64>) -> Result<Self> {
        DirectionOffset::new(v)
    }
}

impl From<DirectionOffset> for Vec<i64> {
    fn from(d: DirectionOffset) -> Vec<i64> {
        d.0
    }
}

/// `D^ξ_ε u(x) = (u(x+εξ) − u(x)) / (ε|ξ|)`.
pub fn difference_quotient<T: Scalar>(probe: &dyn Probe<T>, x: &[i64], xi: &DirectionOffset) -> Result<Vec<T>> {
    let n = probe.codim();
    let mut out = vec![T::zero(); n];
    let mut tmp = vec![T::zero(); n];
    quotient_into(probe, x, xi.as_slice(), xi.l2::<T>(), &mut out, &mut tmp)
        .map_err(|_| LathomError::WindowEscapes { site: x[..probe.dim()].to_vec(), xi: xi.as_slice().to_vec() })?;
    Ok(out)
}

/// Hot-path quotient: `out = (u(x+ξ) − u(x)) / (ε·xi_norm)`, using `tmp` as scratch.
#[inline]
pub(crate) fn quotient_into<T: Scalar>(
    probe: &dyn Probe<T>,
    x: &[i64],
    xi: &[i64],
    xi_norm: T,
    out: &mut [T],
    tmp: &mut [T],
) -> Result<()> {
    let dim = probe.dim();
    let mut y: Site = [0; MAX_DIM];
    for a in 0..dim {
        y[a] = x[a] + xi[a];
    }
    probe.read(&y[..dim], out)?;
    probe.read(&x[..dim], tmp)?;
    let s = T::one() / (probe.eps() * xi_norm);
    for (o, &t) in out.iter_mut().zip(tmp.iter()) {
        *o = (*o - t) * s;
    }
    Ok(())
}

/// `|D^ξ_ε u(x)|^p`.
pub(crate) fn quotient_pow<T: Scalar>(
    probe: &dyn Probe<T>,
    x: &[i64],
    xi: &DirectionOffset,
    p: T,
    buf: &mut [T],
    tmp: &mut [T],
) -> Result<T> {
    quotient_into(probe, x, xi.as_slice(), xi.l2::<T>(), buf, tmp)?;
    Ok(norm_pow(buf, p))
}

/// One step `sign · e_axis` of a lattice path.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub axis: usize,
    pub sign: i64,
}

impl Step {
    pub fn offset(&self, dim: usize) -> DirectionOffset {
        let mut v = vec![0; dim];
        v[self.axis] = self.sign;
        DirectionOffset(v)
    }
}

/// Nearest-neighbour path from `j` to `j + ξ`, steps grouped by coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticePath {
    pub origin: Vec<i64>,
    pub xi: DirectionOffset,
    pub steps: Vec<Step>,
    /// `j_1 = j, …, j_{‖ξ‖₁+1} = j + ξ`.
    pub visited: Vec<Vec<i64>>,
}

pub fn build_path(j: &[i64], xi: &DirectionOffset) -> LatticePath {
    let dim = xi.dim();
    let mut steps = Vec::with_capacity(xi.l1() as usize);
    for (axis, &c) in xi.as_slice().iter().enumerate() {
        for _ in 0..c.abs() {
            steps.push(Step { axis, sign: c.signum() });
        }
    }
    let mut visited = Vec::with_capacity(steps.len() + 1);
    let mut cur = j[..dim].to_vec();
    visited.push(cur.clone());
    for s in &steps {
        cur[s.axis] += s.sign;
        visited.push(cur.clone());
    }
    LatticePath { origin: j[..dim].to_vec(), xi: xi.clone(), steps, visited }
}

/// The constant `C(p,N) = N^{p/2}` in `|D^ξ u(j)|^p ≤ C(p,N)/‖ξ‖₁ Σ_h |D^{e_{n(h)}} u(j_h)|^p`.
///
/// Hölder gives `|Σ_h a_h|^p ≤ m^{p−1} Σ_h |a_h|^p` with `m = ‖ξ‖₁`, and
/// `‖ξ‖₁ ≤ √N |ξ|` converts the `1/|ξ|` normalisation.
pub fn path_constant<T: Scalar>(p: T, dim: usize) -> T {
    int::<T>(dim as i64).powf(p / int(2))
}

/// `C/‖ξ‖₁ Σ_h |D^{e_{n(h)}}_ε u(j_h)|^p − |D^ξ_ε u(j)|^p`.
pub fn path_power_inequality_gap<T: Scalar>(
    probe: &dyn Probe<T>,
    j: &[i64],
    xi: &DirectionOffset,
    p: T,
    cfactor: T,
) -> Result<T> {
    let path = build_path(j, xi);
    let n = probe.codim();
    let mut buf = vec![T::zero(); n];
    let mut tmp = vec![T::zero(); n];
    let escape = |_| LathomError::WindowEscapes { site: j[..xi.dim()].to_vec(), xi: xi.as_slice().to_vec() };
    let mut acc = T::zero();
    for (h, s) in path.steps.iter().enumerate() {
        let step = s.offset(xi.dim());
        acc += quotient_pow(probe, &path.visited[h], &step, p, &mut buf, &mut tmp).map_err(escape)?;
    }
    let lhs = quotient_pow(probe, j, xi, p, &mut buf, &mut tmp).map_err(escape)?;
    Ok(cfactor / int(xi.l1()) * acc - lhs)
}
