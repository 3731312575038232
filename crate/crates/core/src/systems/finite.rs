use super::circle::circle_dist;
use super::{DynamicalSystem, Resolution};
use crate::{Error, Result};

/// A permutation of finitely many points placed on the circle.
///
/// Points are indices; the metric is the circle distance of their positions.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteSystem {
    positions: Vec<f64>,
    perm: Vec<usize>,
    inv: Vec<usize>,
}

impl FiniteSystem {
    pub fn new(positions: Vec<f64>, perm: Vec<usize>) -> Result<Self> {
        if positions.is_empty() || positions.len() != perm.len() {
            return Err(Error::InvalidParameter(
                "positions and permutation must be nonempty and equally long".into(),
            ));
        }
        let mut inv = vec![usize::MAX; perm.len()];
        for (i, &j) in perm.iter().enumerate() {
            if j >= perm.len() || inv[j] != usize::MAX {
                return Err(Error::InvalidParameter("not a permutation".into()));
            }
            inv[j] = i;
        }
        let positions = positions.into_iter().map(super::frac).collect();
        Ok(Self {
            positions,
            perm,
            inv,
        })
    }

    /// A single fixed point.
    pub fn fixed_point() -> Self {
        Self::new(vec![0.0], vec![0]).unwrap()
    }

    /// `k` fixed points equally spaced on the circle.
    pub fn equally_spaced(k: usize) -> Result<Self> {
        Self::new(
            (0..k).map(|j| j as f64 / k as f64).collect(),
            (0..k).collect(),
        )
    }

    /// One periodic orbit of period `p`, rotating `j/p ↦ (j+1)/p`.
    pub fn cycle(p: usize) -> Result<Self> {
        Self::new(
            (0..p).map(|j| j as f64 / p as f64).collect(),
            (0..p).map(|j| (j + 1) % p.max(1)).collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

impl DynamicalSystem for FiniteSystem {
    type Point = usize;

    fn distance(&self, x: &usize, y: &usize) -> f64 {
        circle_dist(self.positions[*x], self.positions[*y])
    }

    fn forward(&self, x: &usize) -> usize {
        self.perm[*x]
    }

    fn inverse(&self, x: &usize) -> Option<usize> {
        Some(self.inv[*x])
    }

    /// All points; the resolution is ignored.
    fn sample(&self, _res: &Resolution) -> Result<Vec<usize>> {
        Ok((0..self.len()).collect())
    }

    fn label(&self) -> String {
        format!("finite:{}", self.len())
    }
}
