use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::lattice::{CutoffFunction, LatticeDomain, LatticeField, Site, MAX_DIM};
use crate::matrix::Mat;

/// Where and how densely the hypothesis checks sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleSchedule {
    pub eps: Vec<f64>,
    pub delta: Vec<f64>,
    /// Samples per `(hypothesis, ε, δ)` cell.
    pub samples: usize,
    /// Scale of the lattice-unit gradients of sampled fields.
    pub amplitude: f64,
    /// `|M| ≤ slope_bound` for the Cauchy-Born samples.
    pub slope_bound: f64,
    pub seed: u64,
}

impl Default for SampleSchedule {
    fn default() -> Self {
        SampleSchedule {
            eps: vec![0.25, 0.125, 0.0625, 0.03125, 0.015625],
            delta: vec![0.5, 0.25],
            samples: 1000,
            amplitude: 4.0,
            slope_bound: 10.0,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldKind {
    /// `z(j) = ε M j`.
    Affine,
    /// Affine plus a random perturbation on a small cube.
    Bump,
    /// Affine plus independent noise at every site.
    Noise,
    /// Affine plus a constant offset on every site at distance `≥ 2` from the centre,
    /// so that long bonds stretch while nearest-neighbour bonds stay moderate.
    ShellContrast,
}

const KINDS: [FieldKind; 4] = [FieldKind::Affine, FieldKind::Bump, FieldKind::Noise, FieldKind::ShellContrast];

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Seed of one sample, derived from the schedule seed and the sample's coordinates.
pub fn sample_seed(base: u64, tag: u64, cell: usize, sample: usize) -> u64 {
    splitmix(splitmix(splitmix(base ^ tag.rotate_left(48)) ^ cell as u64) ^ sample as u64)
}

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// The lattice box `|k − site|_∞ ≤ radius` carrying the sampled fields.
#[derive(Clone, Debug)]
pub(crate) struct Window {
    pub domain: LatticeDomain<f64>,
    pub site: Vec<i64>,
}

impl Window {
    pub fn new(dim: usize, codim: usize, eps: f64, site: Vec<i64>, radius: i64) -> Result<Self> {
        let lo: Vec<i64> = site.iter().map(|x| x - radius).collect();
        let hi: Vec<i64> = site.iter().map(|x| x + radius).collect();
        Ok(Window { domain: LatticeDomain::from_index_bounds(dim, codim, eps, &lo, &hi)?, site })
    }

    pub fn dist(&self, k: &[i64]) -> i64 {
        k.iter().zip(&self.site).map(|(a, b)| (a - b).abs()).max().unwrap_or(0)
    }
}

/// A site in `{0, …, T−1}^N`.
pub(crate) fn sample_site(rng: &mut ChaCha8Rng, dim: usize, period: usize) -> Vec<i64> {
    (0..dim).map(|_| rng.gen_range(0..period.max(1)) as i64).collect()
}

/// A matrix with Frobenius norm `norm` in a uniformly random direction.
pub(crate) fn sample_slope(rng: &mut ChaCha8Rng, rows: usize, cols: usize, norm: f64) -> Mat<f64> {
    let mut data: Vec<f64> = (0..rows * cols).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let f = data.iter().map(|x| x * x).sum::<f64>().sqrt();
    let s = if f > 0.0 { norm / f } else { 0.0 };
    data.iter_mut().for_each(|x| *x *= s);
    Mat::from_row_major(rows, cols, data).expect("shape matches data")
}

/// Slopes for the Cauchy-Born ratio: zero, coordinate stretches and random directions.
pub(crate) fn sample_cb_slope(rng: &mut ChaCha8Rng, rows: usize, cols: usize, bound: f64) -> Mat<f64> {
    match rng.gen_range(0..8) {
        0 => Mat::zeros(rows, cols),
        1..=3 => {
            let mut m = Mat::zeros(rows, cols);
            let (r, c) = (rng.gen_range(0..rows), rng.gen_range(0..cols));
            m.set(r, c, rng.gen_range(-bound..=bound));
            m
        }
        _ => {
            let t = rng.gen_range(0.0..=bound);
            sample_slope(rng, rows, cols, t)
        }
    }
}

pub(crate) fn sample_kind(rng: &mut ChaCha8Rng) -> FieldKind {
    KINDS[rng.gen_range(0..KINDS.len())]
}

/// A field of the given kind on the window, with lattice-unit gradients of order `amp`.
pub(crate) fn sample_field(win: &Window, rng: &mut ChaCha8Rng, amp: f64, kind: FieldKind) -> LatticeField<f64> {
    let d = &win.domain;
    let (dim, n, eps) = (d.dim(), d.codim(), d.eps());
    let m = match kind {
        FieldKind::ShellContrast => sample_slope(rng, n, dim, 1.1f64.sqrt()),
        _ => {
            let t = rng.gen_range(0.0..=amp);
            sample_slope(rng, n, dim, t)
        }
    };
    let mut field = LatticeField::affine(d.clone(), &m).expect("slope shape matches window");
    let mut k: Site = [0; MAX_DIM];
    match kind {
        FieldKind::Affine => {}
        FieldKind::Bump => {
            let center: Vec<i64> = (0..dim).map(|a| rng.gen_range(d.lo()[a]..=d.hi()[a])).collect();
            let r = rng.gen_range(0..=2i64);
            for idx in 0..d.len() {
                d.site_into(idx, &mut k);
                if (0..dim).all(|a| (k[a] - center[a]).abs() <= r) {
                    for v in field.value_mut(idx) {
                        *v += eps * amp * rng.gen_range(-1.0..1.0);
                    }
                }
            }
        }
        FieldKind::Noise => {
            for v in field.values_mut() {
                *v += 0.5 * eps * amp * rng.gen_range(-1.0..1.0);
            }
        }
        FieldKind::ShellContrast => {
            let dir = sample_slope(rng, n, 1, 4.0 * amp);
            for idx in 0..d.len() {
                d.site_into(idx, &mut k);
                if win.dist(&k[..dim]) >= 2 {
                    for (v, s) in field.value_mut(idx).iter_mut().zip(dir.as_slice()) {
                        *v += eps * s;
                    }
                }
            }
        }
    }
    field
}

/// Rounds every value to a multiple of `2^{−bits}`, so that adding a coarser dyadic
/// constant is exact.
pub(crate) fn quantize(field: &mut LatticeField<f64>, bits: i32) {
    let s = 2f64.powi(bits);
    field.values_mut().iter_mut().for_each(|v| *v = (*v * s).round() / s);
}

/// `w = z` on `|k − site|_∞ ≤ keep`, an independent sample elsewhere.
pub(crate) fn agree_near(
    win: &Window,
    z: &LatticeField<f64>,
    other: &LatticeField<f64>,
    keep: i64,
) -> LatticeField<f64> {
    let d = &win.domain;
    let mut w = other.clone();
    let mut k: Site = [0; MAX_DIM];
    for idx in 0..d.len() {
        d.site_into(idx, &mut k);
        if win.dist(&k[..d.dim()]) <= keep {
            w.value_mut(idx).copy_from_slice(z.value(idx));
        }
    }
    w
}

/// Cut-offs: constants, plateaus whose ramp has width `δ/ε` sites, single-site spikes
/// and independent uniform values.
pub(crate) fn sample_cutoff(win: &Window, rng: &mut ChaCha8Rng, delta: f64) -> Result<CutoffFunction<f64>> {
    let d = win.domain.with_codim(1)?;
    let dim = d.dim();
    let random_site =
        |rng: &mut ChaCha8Rng| -> Vec<i64> { (0..dim).map(|a| rng.gen_range(d.lo()[a]..=d.hi()[a])).collect() };
    match rng.gen_range(0..6) {
        0 => CutoffFunction::constant(d, 1.0),
        1 => CutoffFunction::constant(d, 0.0),
        2 | 3 => {
            let center = random_site(rng);
            let inner = rng.gen_range(0..=2i64);
            let width = ((delta / d.eps()).round() as i64).max(1);
            CutoffFunction::plateau(d, &center, inner, inner + width)
        }
        4 => {
            let s = random_site(rng);
            CutoffFunction::spike(d, &s)
        }
        _ => {
            let values = (0..d.len()).map(|_| rng.gen_range(0.0..=1.0)).collect();
            CutoffFunction::from_values(d, values)
        }
    }
}
