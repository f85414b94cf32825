use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tensor grid over `(x, y, t)`, inclusive of both ends of every axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub y_min: f64,
    pub y_max: f64,
    pub ny: usize,
    pub t_min: f64,
    pub t_max: f64,
    pub nt: usize,
}

fn axis_value(lo: f64, hi: f64, n: usize, i: usize) -> f64 {
    if n == 1 {
        lo
    } else if i + 1 == n {
        hi
    } else {
        lo + (hi - lo) * (i as f64 / (n - 1) as f64)
    }
}

impl Grid {
    pub fn validate(&self) -> Result<()> {
        for (name, n) in [("nx", self.nx), ("ny", self.ny), ("nt", self.nt)] {
            if n < 2 {
                return Err(Error::Config(format!("grid count {name} = {n} must be at least 2")));
            }
        }
        let bounds = [
            ("x", self.x_min, self.x_max),
            ("y", self.y_min, self.y_max),
            ("t", self.t_min, self.t_max),
        ];
        for (name, lo, hi) in bounds {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::Config(format!("grid axis {name} needs finite min < max, got [{lo}, {hi}]")));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny * self.nt
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.nx).map(|i| axis_value(self.x_min, self.x_max, self.nx, i)).collect()
    }

    pub fn ys(&self) -> Vec<f64> {
        (0..self.ny).map(|i| axis_value(self.y_min, self.y_max, self.ny, i)).collect()
    }

    pub fn ts(&self) -> Vec<f64> {
        (0..self.nt).map(|i| axis_value(self.t_min, self.t_max, self.nt, i)).collect()
    }

    /// Points in row-major order: `x` slowest, `t` fastest.
    pub fn points(&self) -> Vec<[f64; 3]> {
        let (xs, ys, ts) = (self.xs(), self.ys(), self.ts());
        let mut out = Vec::with_capacity(self.len());
        for &x in &xs {
            for &y in &ys {
                for &t in &ts {
                    out.push([x, y, t]);
                }
            }
        }
        out
    }
}
