use crate::error::{invalid, Result};
use crate::lattice::{check_slope, Extension, LatticeDomain, LatticeField, Site, MAX_DIM};
use crate::matrix::Mat;
use crate::potentials::{energy, gradient, MultibodyPotential};
use crate::scalar::Scalar;

/// Width of the frozen boundary layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Layer {
    Fixed(usize),
    /// `⌊√L⌋`.
    Sqrt,
}

impl Layer {
    pub fn width(self, side: usize) -> usize {
        match self {
            Layer::Fixed(m) => m,
            Layer::Sqrt => (side as f64).sqrt().floor() as usize,
        }
    }
}

/// `inf { Σ_{i ∈ Z^N ∩ Q_L} φ_i(v) : v(i) = Mi whenever (i + [−m, m)^N) ⊄ Q_L }` at `ε = 1`,
/// with `v` extended by `Mi` outside `Q_L`.
pub struct CellProblem<'a, T: Scalar, P: MultibodyPotential<T> + ?Sized> {
    pot: &'a P,
    m: Mat<T>,
    side: usize,
    layer: usize,
    domain: LatticeDomain<T>,
    free: Vec<usize>,
    affine: LatticeField<T>,
    ext: Extension<T>,
}

impl<'a, T: Scalar, P: MultibodyPotential<T> + ?Sized> CellProblem<'a, T, P> {
    pub fn new(pot: &'a P, m: &Mat<T>, side: usize, layer: Layer) -> Result<Self> {
        if side == 0 {
            return Err(invalid("cell side must be positive"));
        }
        if !m.is_finite() {
            return Err(invalid("slope must be finite"));
        }
        let domain = LatticeDomain::cell(pot.dim(), pot.codim(), side)?;
        check_slope(&domain, m)?;
        let width = layer.width(side) as i64;
        let dim = domain.dim();
        let mut free = Vec::new();
        let mut k: Site = [0; MAX_DIM];
        for idx in 0..domain.len() {
            domain.site_into(idx, &mut k);
            if (0..dim).all(|a| k[a] - width >= domain.lo()[a] && k[a] + width <= domain.hi()[a]) {
                free.push(idx);
            }
        }
        let affine = LatticeField::affine(domain.clone(), m)?;
        Ok(CellProblem {
            pot,
            m: m.clone(),
            side,
            layer: width as usize,
            domain,
            free,
            affine,
            ext: Extension::Affine(m.clone()),
        })
    }

    pub fn potential(&self) -> &'a P {
        self.pot
    }

    pub fn slope(&self) -> &Mat<T> {
        &self.m
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn layer(&self) -> usize {
        self.layer
    }

    pub fn domain(&self) -> &LatticeDomain<T> {
        &self.domain
    }

    /// Site indices of the free sites, in enumeration order.
    pub fn free_sites(&self) -> &[usize] {
        &self.free
    }

    pub fn num_free(&self) -> usize {
        self.free.len() * self.domain.codim()
    }

    pub fn affine_field(&self) -> &LatticeField<T> {
        &self.affine
    }

    /// `L^N`.
    pub fn volume(&self) -> T {
        T::from_usize(self.side.pow(self.domain.dim() as u32)).expect("volume fits scalar")
    }

    /// Free coordinates of `field`, relative to the affine field.
    pub fn coords_of(&self, field: &LatticeField<T>) -> Result<Vec<T>> {
        if field.domain() != &self.domain {
            return Err(invalid("field does not live on the cell domain"));
        }
        let n = self.domain.codim();
        let mut x = Vec::with_capacity(self.num_free());
        for &idx in &self.free {
            for c in 0..n {
                x.push(field.value(idx)[c] - self.affine.value(idx)[c]);
            }
        }
        Ok(x)
    }

    /// The admissible field `Mi + x` on free sites.
    pub fn field_from(&self, x: &[T]) -> LatticeField<T> {
        let mut f = self.affine.clone();
        self.add_free(&mut f, x);
        f
    }

    fn add_free(&self, f: &mut LatticeField<T>, x: &[T]) {
        let n = self.domain.codim();
        for (s, &idx) in self.free.iter().enumerate() {
            for (v, &d) in f.value_mut(idx).iter_mut().zip(&x[s * n..(s + 1) * n]) {
                *v += d;
            }
        }
    }

    fn restrict(&self, g: &LatticeField<T>, out: &mut [T]) {
        let n = self.domain.codim();
        for (s, &idx) in self.free.iter().enumerate() {
            out[s * n..(s + 1) * n].copy_from_slice(g.value(idx));
        }
    }

    /// `Σ_{i ∈ Q_L} φ_i(field)`.
    pub fn energy_of(&self, field: &LatticeField<T>) -> Result<T> {
        energy(self.pot, &field.probe(&self.ext), &self.domain)
    }

    pub fn objective(&self, x: &[T]) -> Result<T> {
        self.energy_of(&self.field_from(x))
    }

    /// Objective value and its gradient with respect to the free coordinates.
    pub fn objective_gradient(&self, x: &[T], g: &mut [T]) -> Result<T> {
        let f = self.field_from(x);
        let probe = f.probe(&self.ext);
        let grad = gradient(self.pot, &probe, &self.domain, &self.domain)?;
        self.restrict(&grad, g);
        energy(self.pot, &probe, &self.domain)
    }

    /// Hessian-vector product for homogeneous quadratic densities: the gradient of
    /// the energy of `x` placed on the free sites, zero elsewhere and outside.
    pub fn hessian_apply(&self, x: &[T], out: &mut [T]) -> Result<()> {
        let mut f = LatticeField::zeros(self.domain.clone());
        self.add_free(&mut f, x);
        let ext = Extension::Zero;
        let grad = gradient(self.pot, &f.probe(&ext), &self.domain, &self.domain)?;
        self.restrict(&grad, out);
        Ok(())
    }
}
