use crate::error::{invalid, LathomError, Result};
use crate::lattice::{build_path, quotient_into, site_from, DirectionOffset, Probe, Site, MAX_DIM};
use crate::matrix::{det_columns, det_gradient_columns, Mat};
use crate::potentials::profile::DecayProfile;
use crate::potentials::MultibodyPotential;
use crate::scalar::{int, lit, norm_pow, Scalar};

/// Scalar law `g` applied to a determinant.
#[derive(Clone, Debug, PartialEq)]
pub enum GLaw<T> {
    /// `√(z² + η²) − η`.
    SmoothAbs {
        eta: T,
    },
    Abs,
    /// `|z|^q`.
    Power {
        q: T,
    },
}

impl<T: Scalar> GLaw<T> {
    pub fn value(&self, z: T) -> T {
        match self {
            GLaw::SmoothAbs { eta } => (z * z + *eta * *eta).sqrt() - *eta,
            GLaw::Abs => z.abs(),
            GLaw::Power { q } => z.abs().powf(*q),
        }
    }

    pub fn derivative(&self, z: T) -> T {
        match self {
            GLaw::SmoothAbs { eta } => z / (z * z + *eta * *eta).sqrt(),
            GLaw::Abs => {
                if z == T::zero() {
                    T::zero()
                } else {
                    z.signum()
                }
            }
            GLaw::Power { q } => {
                if z == T::zero() {
                    T::zero()
                } else {
                    *q * z.abs().powf(*q - T::one()) * z.signum()
                }
            }
        }
    }

    /// Largest exponent `s` with `g(z) ≤ |z|^s + 1` for all `z`.
    fn growth(&self) -> T {
        match self {
            GLaw::SmoothAbs { .. } | GLaw::Abs => T::one(),
            GLaw::Power { q } => *q,
        }
    }
}

/// `c_r |D^ξ_ε u(i + anchor)|^p`, with `c_r` chosen by the residue class `r` of `i`.
#[derive(Clone, Debug)]
pub struct PairTerm<T> {
    pub anchor: Vec<i64>,
    pub xi: DirectionOffset,
    pub coeffs: Vec<T>,
    pub p: T,
    anchor_site: Site,
    xi_site: Site,
    xi_norm: T,
}

/// `w · g(det(D^{ξ_1}_ε u(i), …, D^{ξ_n}_ε u(i)))` with `g(z) ≤ bound (|z|^{p/n} + 1)`.
#[derive(Clone, Debug)]
pub struct DeterminantTerm<T> {
    pub xis: Vec<DirectionOffset>,
    pub weight: T,
    pub law: GLaw<T>,
    pub bound: T,
    pub p: T,
    xi_sites: Vec<Site>,
    xi_norms: Vec<T>,
}

/// `w [C/‖ξ‖₁ Σ_h |D^{e_{n(h)}}_ε u(i_h)|^p − |D^ξ_ε u(i)|^p] ≥ 0` along the grouped path.
#[derive(Clone, Debug)]
pub struct PathGapTerm<T> {
    pub xi: DirectionOffset,
    pub weight: T,
    pub cpath: T,
    pub p: T,
    xi_site: Site,
    xi_norm: T,
    /// `(i_h − i, axis, sign)` per step.
    steps: Vec<(Site, usize, i64)>,
}

#[derive(Clone, Debug)]
pub enum Term<T> {
    Pair(PairTerm<T>),
    Determinant(DeterminantTerm<T>),
    PathGap(PathGapTerm<T>),
}

impl<T: Scalar> Term<T> {
    pub fn pair(anchor: &[i64], xi: DirectionOffset, coeffs: Vec<T>, p: T) -> Result<Self> {
        if anchor.len() != xi.dim() {
            return Err(invalid("pair anchor and direction differ in dimension"));
        }
        if coeffs.is_empty() {
            return Err(invalid("pair term needs at least one coefficient"));
        }
        let xi_norm = xi.l2::<T>();
        Ok(Term::Pair(PairTerm {
            anchor: anchor.to_vec(),
            anchor_site: site_from(anchor),
            xi_site: site_from(xi.as_slice()),
            xi,
            coeffs,
            p,
            xi_norm,
        }))
    }

    pub fn determinant(xis: Vec<DirectionOffset>, weight: T, law: GLaw<T>, bound: T, p: T) -> Result<Self> {
        let n = xis.len();
        if n == 0 || xis.iter().any(|x| x.dim() != xis[0].dim()) {
            return Err(invalid("determinant term needs directions of one dimension"));
        }
        if law.growth() > p / int(n as i64) {
            return Err(invalid("determinant law grows faster than |z|^{p/n}"));
        }
        if !(weight >= T::zero()) || !(bound >= T::zero()) {
            return Err(invalid("determinant weight and bound must be nonnegative"));
        }
        let xi_sites = xis.iter().map(|x| site_from(x.as_slice())).collect();
        let xi_norms = xis.iter().map(|x| x.l2::<T>()).collect();
        Ok(Term::Determinant(DeterminantTerm { xis, weight, law, bound, p, xi_sites, xi_norms }))
    }

    pub fn path_gap(xi: DirectionOffset, weight: T, cpath: T, p: T) -> Result<Self> {
        if !(weight >= T::zero()) {
            return Err(invalid("path-gap weight must be nonnegative"));
        }
        let path = build_path(&vec![0; xi.dim()], &xi);
        let steps = path.steps.iter().zip(&path.visited).map(|(s, v)| (site_from(v), s.axis, s.sign)).collect();
        Ok(Term::PathGap(PathGapTerm {
            xi_site: site_from(xi.as_slice()),
            xi_norm: xi.l2::<T>(),
            xi,
            weight,
            cpath,
            p,
            steps,
        }))
    }

    pub fn dim(&self) -> usize {
        match self {
            Term::Pair(t) => t.xi.dim(),
            Term::Determinant(t) => t.xis[0].dim(),
            Term::PathGap(t) => t.xi.dim(),
        }
    }

    /// Largest `|o|_∞` over the offsets `o` this term reads.
    pub fn radius(&self) -> i64 {
        let dim = self.dim();
        let linf = |s: &[i64]| s.iter().map(|x| x.abs()).max().unwrap_or(0);
        match self {
            Term::Pair(t) => {
                let end: Vec<i64> = (0..dim).map(|a| t.anchor[a] + t.xi.as_slice()[a]).collect();
                linf(&t.anchor).max(linf(&end))
            }
            Term::Determinant(t) => t.xis.iter().map(|x| x.linf()).max().unwrap_or(0),
            Term::PathGap(t) => t.xi.linf(),
        }
    }

    /// `0` for nearest-neighbour pair terms anchored at the site, the radius otherwise.
    pub fn default_level(&self) -> usize {
        match self {
            Term::Pair(t) if t.anchor.iter().all(|&a| a == 0) && t.xi.is_unit() => 0,
            _ => self.radius() as usize,
        }
    }

    pub fn is_quadratic(&self) -> bool {
        match self {
            Term::Pair(t) => t.p == lit(2.0),
            Term::PathGap(t) => t.p == lit(2.0),
            Term::Determinant(_) => false,
        }
    }

    pub fn exponent(&self) -> T {
        match self {
            Term::Pair(t) => t.p,
            Term::Determinant(t) => t.p,
            Term::PathGap(t) => t.p,
        }
    }

    fn value(&self, i: &[i64], residue: usize, probe: &dyn Probe<T>) -> Result<T> {
        let dim = probe.dim();
        let n = probe.codim();
        let mut buf = [T::zero(); MAX_DIM];
        let mut tmp = [T::zero(); MAX_DIM];
        match self {
            Term::Pair(t) => {
                let a = offset(i, &t.anchor_site, dim);
                quotient_into(probe, &a[..dim], &t.xi_site[..dim], t.xi_norm, &mut buf[..n], &mut tmp[..n])?;
                Ok(t.coeffs[residue % t.coeffs.len()] * norm_pow(&buf[..n], t.p))
            }
            Term::Determinant(t) => {
                let mut cols = [[T::zero(); MAX_DIM]; MAX_DIM];
                for (c, (xs, &xn)) in t.xi_sites.iter().zip(&t.xi_norms).enumerate() {
                    quotient_into(probe, i, &xs[..dim], xn, &mut cols[c][..n], &mut tmp[..n])?;
                }
                let refs: Vec<&[T]> = cols[..t.xis.len()].iter().map(|c| &c[..n]).collect();
                Ok(t.weight * t.law.value(det_columns(&refs)))
            }
            Term::PathGap(t) => {
                let mut acc = T::zero();
                for (o, axis, sign) in &t.steps {
                    let j = offset(i, o, dim);
                    let mut e: Site = [0; MAX_DIM];
                    e[*axis] = *sign;
                    quotient_into(probe, &j[..dim], &e[..dim], T::one(), &mut buf[..n], &mut tmp[..n])?;
                    acc += norm_pow(&buf[..n], t.p);
                }
                quotient_into(probe, i, &t.xi_site[..dim], t.xi_norm, &mut buf[..n], &mut tmp[..n])?;
                let m: T = int(t.steps.len() as i64);
                Ok(t.weight * (t.cpath / m * acc - norm_pow(&buf[..n], t.p)))
            }
        }
    }

    fn gradient(
        &self,
        i: &[i64],
        residue: usize,
        probe: &dyn Probe<T>,
        sink: &mut dyn FnMut(&[i64], &[T]),
    ) -> Result<()> {
        let dim = probe.dim();
        let n = probe.codim();
        let eps = probe.eps();
        match self {
            Term::Pair(t) => {
                let a = offset(i, &t.anchor_site, dim);
                let c = t.coeffs[residue % t.coeffs.len()];
                pair_gradient(probe, &a, &t.xi_site, t.xi_norm, c, t.p, sink)
            }
            Term::Determinant(t) => {
                let mut tmp = [T::zero(); MAX_DIM];
                let mut cols = [[T::zero(); MAX_DIM]; MAX_DIM];
                let k = t.xis.len();
                for (c, (xs, &xn)) in t.xi_sites.iter().zip(&t.xi_norms).enumerate() {
                    quotient_into(probe, i, &xs[..dim], xn, &mut cols[c][..n], &mut tmp[..n])?;
                }
                let refs: Vec<&[T]> = cols[..k].iter().map(|c| &c[..n]).collect();
                let g = t.weight * t.law.derivative(det_columns(&refs));
                if g == T::zero() {
                    return Ok(());
                }
                let cof = det_gradient_columns(&refs);
                let mut base = [T::zero(); MAX_DIM];
                for c in 0..k {
                    let s = g / (eps * t.xi_norms[c]);
                    let mut v = [T::zero(); MAX_DIM];
                    for r in 0..n {
                        v[r] = s * cof[c][r];
                        base[r] -= v[r];
                    }
                    let y = offset(i, &t.xi_sites[c], dim);
                    sink(&y[..dim], &v[..n]);
                }
                sink(&i[..dim], &base[..n]);
                Ok(())
            }
            Term::PathGap(t) => {
                let m: T = int(t.steps.len() as i64);
                let cs = t.weight * t.cpath / m;
                for (o, axis, sign) in &t.steps {
                    let j = offset(i, o, dim);
                    let mut e: Site = [0; MAX_DIM];
                    e[*axis] = *sign;
                    pair_gradient(probe, &j, &e, T::one(), cs, t.p, sink)?;
                }
                let base = site_from(&i[..dim]);
                pair_gradient(probe, &base, &t.xi_site, t.xi_norm, -t.weight, t.p, sink)
            }
        }
    }

    /// Coefficients `C^{j,ξ}` with `term ≤ Σ C^{j,ξ} (|D^ξ z(i+j)|^p + 1)`.
    fn upper_entries(&self, sink: &mut dyn FnMut(&[i64], &[i64], T)) {
        match self {
            Term::Pair(t) => {
                let c = t.coeffs.iter().fold(T::zero(), |acc, c| acc.max(c.abs()));
                sink(&t.anchor, t.xi.as_slice(), c);
            }
            Term::Determinant(t) => {
                let zero = vec![0; t.xis[0].dim()];
                let c = t.weight * t.bound / int(t.xis.len() as i64);
                for xi in &t.xis {
                    sink(&zero, xi.as_slice(), c);
                }
            }
            Term::PathGap(t) => {
                let dim = t.xi.dim();
                let c = t.weight * t.cpath / int(t.steps.len() as i64);
                for (o, axis, sign) in &t.steps {
                    let mut e = vec![0; dim];
                    e[*axis] = *sign;
                    sink(&o[..dim], &e, c);
                }
            }
        }
    }
}

#[inline]
fn offset(i: &[i64], o: &Site, dim: usize) -> Site {
    let mut s: Site = [0; MAX_DIM];
    for a in 0..dim {
        s[a] = i[a] + o[a];
    }
    s
}

/// Gradient of `c |D^ξ_ε u(a)|^p` with respect to `u(a)` and `u(a+ξ)`.
fn pair_gradient<T: Scalar>(
    probe: &dyn Probe<T>,
    a: &Site,
    xi: &Site,
    xi_norm: T,
    c: T,
    p: T,
    sink: &mut dyn FnMut(&[i64], &[T]),
) -> Result<()> {
    let dim = probe.dim();
    let n = probe.codim();
    let mut d = [T::zero(); MAX_DIM];
    let mut tmp = [T::zero(); MAX_DIM];
    quotient_into(probe, &a[..dim], &xi[..dim], xi_norm, &mut d[..n], &mut tmp[..n])?;
    let two: T = lit(2.0);
    let scale = if p == two {
        two * c / (probe.eps() * xi_norm)
    } else {
        let r = norm_pow(&d[..n], two).sqrt();
        if r == T::zero() {
            return Ok(());
        }
        c * p * r.powf(p - two) / (probe.eps() * xi_norm)
    };
    let mut g = [T::zero(); MAX_DIM];
    let mut mg = [T::zero(); MAX_DIM];
    for r in 0..n {
        g[r] = scale * d[r];
        mg[r] = -g[r];
    }
    let b = offset(&a[..dim], xi, dim);
    sink(&b[..dim], &g[..n]);
    sink(&a[..dim], &mg[..n]);
    Ok(())
}

#[derive(Clone, Debug)]
pub struct LeveledTerm<T> {
    pub term: Term<T>,
    pub level: usize,
}

/// A per-site density assembled from pair, determinant and path-gap terms, each
/// tagged with a truncation level.
#[derive(Clone, Debug)]
pub struct TermPotential<T> {
    name: String,
    dim: usize,
    codim: usize,
    p: T,
    period: usize,
    terms: Vec<LeveledTerm<T>>,
    coercivity: Option<T>,
    radius: i64,
}

impl<T: Scalar> TermPotential<T> {
    pub fn new(name: impl Into<String>, dim: usize, codim: usize, p: T, period: usize) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM || codim == 0 || codim > MAX_DIM {
            return Err(invalid(format!("dimensions must be in 1..={MAX_DIM}")));
        }
        if !(p > T::one()) {
            return Err(invalid("growth exponent must exceed 1"));
        }
        if period == 0 {
            return Err(invalid("period must be positive"));
        }
        Ok(TermPotential { name: name.into(), dim, codim, p, period, terms: Vec::new(), coercivity: None, radius: 0 })
    }

    pub fn push(&mut self, term: Term<T>) -> Result<()> {
        let level = term.default_level();
        self.push_at(term, level)
    }

    pub fn push_at(&mut self, term: Term<T>, level: usize) -> Result<()> {
        if term.dim() != self.dim {
            return Err(LathomError::DimensionMismatch {
                what: "term dimension",
                expected: self.dim,
                found: term.dim(),
            });
        }
        let classes = self.period.pow(self.dim as u32);
        match &term {
            Term::Pair(t) if t.coeffs.len() != 1 && t.coeffs.len() != classes => {
                return Err(LathomError::DimensionMismatch {
                    what: "pair coefficients per residue class",
                    expected: classes,
                    found: t.coeffs.len(),
                });
            }
            Term::Determinant(t) if t.xis.len() != self.codim => {
                return Err(LathomError::DimensionMismatch {
                    what: "determinant columns",
                    expected: self.codim,
                    found: t.xis.len(),
                });
            }
            _ => {}
        }
        self.radius = self.radius.max(term.radius());
        self.terms.push(LeveledTerm { term, level });
        Ok(())
    }

    pub fn with_coercivity(mut self, c: T) -> Self {
        self.coercivity = Some(c);
        self
    }

    pub fn terms(&self) -> &[LeveledTerm<T>] {
        &self.terms
    }

    pub fn max_level(&self) -> usize {
        self.terms.iter().map(|t| t.level).max().unwrap_or(0)
    }

    /// `φ^k`: the terms with level `≤ k`.
    pub fn truncated(&self, k: usize) -> Self {
        let mut out = self.clone();
        out.terms.retain(|t| t.level <= k);
        out.radius = out.terms.iter().map(|t| t.term.radius()).max().unwrap_or(0);
        out.name = format!("{}[k={k}]", self.name);
        out
    }

    /// Residue class of `i` modulo the period, enumerated lexicographically.
    #[inline]
    pub fn residue(&self, i: &[i64]) -> usize {
        if self.period == 1 {
            return 0;
        }
        let t = self.period as i64;
        i[..self.dim].iter().fold(0usize, |acc, &x| acc * self.period + x.rem_euclid(t) as usize)
    }

    pub fn evaluate_level(&self, i: &[i64], probe: &dyn Probe<T>, level: usize) -> Result<T> {
        let r = self.residue(i);
        let mut acc = T::zero();
        for t in self.terms.iter().filter(|t| t.level <= level) {
            acc += t.term.value(i, r, probe)?;
        }
        Ok(acc)
    }

    pub fn gradient_level(
        &self,
        i: &[i64],
        probe: &dyn Probe<T>,
        level: usize,
        sink: &mut dyn FnMut(&[i64], &[T]),
    ) -> Result<()> {
        let r = self.residue(i);
        for t in self.terms.iter().filter(|t| t.level <= level) {
            t.term.gradient(i, r, probe, sink)?;
        }
        Ok(())
    }

    fn profile_of(&self, keep: impl Fn(&LeveledTerm<T>) -> bool) -> DecayProfile<T> {
        let mut prof = DecayProfile::new();
        for t in self.terms.iter().filter(|t| keep(t)) {
            t.term.upper_entries(&mut |j, xi, c| prof.add_normalized(j, xi, c));
        }
        prof
    }

    /// `C^{j,ξ}_k`: upper-bound coefficients of the terms beyond level `k`.
    pub fn closeness_profile(&self, k: usize) -> DecayProfile<T> {
        self.profile_of(|t| t.level > k)
    }
}

/// `2^{p−1} (‖ξ‖₁/|ξ|)^p`, the blend factor for one `(j, ξ)` entry.
pub(crate) fn blend_factor<T: Scalar>(xi: &[i64], p: T) -> T {
    let l1: T = int(xi.iter().map(|x| x.abs()).sum());
    let l2: T = int::<T>(xi.iter().map(|x| x * x).sum()).sqrt();
    let two: T = lit(2.0);
    two.powf(p - T::one()) * (l1 / l2).powf(p)
}

impl<T: Scalar> MultibodyPotential<T> for TermPotential<T> {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn codim(&self) -> usize {
        self.codim
    }

    fn exponent(&self) -> T {
        self.p
    }

    fn window_radius(&self) -> i64 {
        self.radius
    }

    fn period(&self) -> Option<usize> {
        Some(self.period)
    }

    fn is_quadratic(&self) -> bool {
        self.terms.iter().all(|t| t.term.is_quadratic())
    }

    fn evaluate(&self, site: &[i64], probe: &dyn Probe<T>) -> Result<T> {
        self.evaluate_level(site, probe, usize::MAX)
    }

    fn gradient(&self, site: &[i64], probe: &dyn Probe<T>, sink: &mut dyn FnMut(&[i64], &[T])) -> Result<()> {
        self.gradient_level(site, probe, usize::MAX, sink)
    }

    fn upper_bound_profile(&self) -> Option<DecayProfile<T>> {
        Some(self.profile_of(|_| true))
    }

    fn locality_profile(&self, eps: T, delta: T) -> Option<DecayProfile<T>> {
        let half: T = lit(0.5);
        Some(self.profile_of(|t| eps * int(t.term.radius()) > delta * half))
    }

    fn nonconvexity_profile(&self) -> Option<(T, DecayProfile<T>)> {
        let ub = self.profile_of(|_| true);
        let p = self.p;
        Some((T::one(), ub.map_entries(|_, xi, c| c * blend_factor(xi, p))))
    }

    fn coercivity_constant(&self) -> Option<T> {
        self.coercivity
    }

    fn cauchy_born(&self, m: &Mat<T>) -> Result<T> {
        crate::potentials::residue_average(self, self.period, m)
    }
}
