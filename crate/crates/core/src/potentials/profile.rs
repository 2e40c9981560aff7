use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::scalar::{int, Scalar};

/// Nonnegative coefficients `C^{j,ξ}` keyed by site offset `j` and direction `ξ`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DecayProfile<T> {
    entries: BTreeMap<(Vec<i64>, Vec<i64>), T>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileEntry {
    pub j: Vec<i64>,
    pub xi: Vec<i64>,
    pub value: f64,
}

impl<T: Scalar> DecayProfile<T> {
    pub fn new() -> Self {
        DecayProfile { entries: BTreeMap::new() }
    }

    /// Adds `c` to the entry `(j, ξ)`.
    pub fn add(&mut self, j: &[i64], xi: &[i64], c: T) {
        *self.entries.entry((j.to_vec(), xi.to_vec())).or_insert(T::zero()) += c;
    }

    /// Adds `c` to `(j, ξ)` after rewriting `(j, ξ)` as `(j+ξ, −ξ)` when `ξ` is not
    /// lexicographically positive; `|D^ξ z(j)| = |D^{−ξ} z(j+ξ)|`.
    pub fn add_normalized(&mut self, j: &[i64], xi: &[i64], c: T) {
        let positive = xi.iter().find(|&&x| x != 0).is_some_and(|&x| x > 0);
        if positive {
            self.add(j, xi, c);
        } else {
            let j2: Vec<i64> = j.iter().zip(xi).map(|(a, b)| a + b).collect();
            let xi2: Vec<i64> = xi.iter().map(|x| -x).collect();
            self.add(&j2, &xi2, c);
        }
    }

    pub fn merge(&mut self, other: &Self) {
        for ((j, xi), &c) in &other.entries {
            self.add(j, xi, c);
        }
    }

    pub fn get(&self, j: &[i64], xi: &[i64]) -> T {
        self.entries.get(&(j.to_vec(), xi.to_vec())).copied().unwrap_or(T::zero())
    }

    pub fn set(&mut self, j: &[i64], xi: &[i64], c: T) {
        self.entries.insert((j.to_vec(), xi.to_vec()), c);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[i64], &[i64], T)> {
        self.entries.iter().map(|((j, xi), &c)| (j.as_slice(), xi.as_slice(), c))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn min_value(&self) -> Option<T> {
        self.entries.values().copied().reduce(|a, b| a.min(b))
    }

    pub fn total_sum(&self) -> T {
        self.entries.values().copied().fold(T::zero(), |a, b| a + b)
    }

    /// `Σ C^{j,ξ}` over entries with `max{ε|ξ|, ε|j|} > δ`, Euclidean norms, `j` in
    /// lattice units.
    pub fn tail_sum(&self, eps: T, delta: T) -> T {
        self.entries
            .iter()
            .filter(|((j, xi), _)| {
                let nj = int::<T>(j.iter().map(|x| x * x).sum::<i64>()).sqrt();
                let nx = int::<T>(xi.iter().map(|x| x * x).sum::<i64>()).sqrt();
                eps * nj.max(nx) > delta
            })
            .fold(T::zero(), |a, (_, &c)| a + c)
    }

    pub fn scaled(&self, s: T) -> Self {
        DecayProfile { entries: self.entries.iter().map(|(k, &c)| (k.clone(), c * s)).collect() }
    }

    pub fn map_entries(&self, f: impl Fn(&[i64], &[i64], T) -> T) -> Self {
        DecayProfile {
            entries: self.entries.iter().map(|((j, xi), &c)| ((j.clone(), xi.clone()), f(j, xi, c))).collect(),
        }
    }

    pub fn to_entries(&self) -> Vec<ProfileEntry> {
        self.iter()
            .map(|(j, xi, c)| ProfileEntry { j: j.to_vec(), xi: xi.to_vec(), value: c.to_f64().unwrap_or(f64::NAN) })
            .collect()
    }

    pub fn from_entries(entries: &[ProfileEntry]) -> Self {
        let mut p = Self::new();
        for e in entries {
            p.add(&e.j, &e.xi, T::from_f64(e.value).unwrap_or(T::nan()));
        }
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tail_sums_decrease_with_threshold() {
        let mut p = DecayProfile::<f64>::new();
        p.add(&[0], &[1], 1.0);
        p.add(&[2], &[1], 0.5);
        p.add(&[0], &[5], 0.25);
        assert_eq!(p.total_sum(), 1.75);
        let mut last = f64::INFINITY;
        for d in [0.0, 0.5, 1.0, 2.0, 4.0, 8.0] {
            let t = p.tail_sum(1.0, d);
            assert!(t <= last);
            last = t;
        }
        assert_eq!(p.tail_sum(1.0, 10.0), 0.0);
        assert_eq!(p.tail_sum(0.1, 0.45), 0.25);
    }

    #[test]
    fn normalization_flips_negative_directions() {
        let mut p = DecayProfile::<f64>::new();
        p.add_normalized(&[3, 0], &[-1, 0], 2.0);
        assert_eq!(p.get(&[2, 0], &[1, 0]), 2.0);
        p.add_normalized(&[0, 0], &[0, -2], 1.0);
        assert_eq!(p.get(&[0, -2], &[0, 2]), 1.0);
    }
}
