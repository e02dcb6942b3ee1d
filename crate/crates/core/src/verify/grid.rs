use std::collections::BTreeMap;

use serde::Serialize;

use crate::dsl::IfElseProgram;
use crate::error::{Error, Result};

pub const DEFAULT_PER_DIM: usize = 10;
pub const MAX_POINTS: usize = 100_000;

/// Uniform sample counts over the boxes of the input variables.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSpec {
    /// `(name, lb, ub, points)` per input, in declaration order.
    pub axes: Vec<(String, f64, f64, usize)>,
}

impl GridSpec {
    /// `n` points along every input.
    pub fn per_dim(p: &IfElseProgram, n: usize) -> Result<GridSpec> {
        let mut axes = Vec::new();
        for name in p.inputs() {
            let v = p.decl(&name).expect("inputs are declared");
            if !v.is_bounded() {
                return Err(Error::UnboundedInput(name));
            }
            axes.push((name, v.lb, v.ub, n.max(1)));
        }
        let g = GridSpec { axes };
        if g.len() > MAX_POINTS {
            return Err(Error::TooLarge(format!("grid of {} points exceeds {MAX_POINTS}", g.len())));
        }
        Ok(g)
    }

    /// Smallest per-dimension count giving at least `total` points.
    pub fn at_least(p: &IfElseProgram, total: usize) -> Result<GridSpec> {
        let d = p.inputs().len().max(1) as u32;
        let mut n: usize = 1;
        while n.pow(d) < total {
            n += 1;
        }
        Self::per_dim(p, n)
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.3).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The `i`-th point, first axis varying slowest. Endpoints are included;
    /// a single sample sits at the midpoint.
    pub fn point(&self, mut i: usize) -> BTreeMap<String, f64> {
        let mut out = BTreeMap::new();
        for (name, lb, ub, n) in self.axes.iter().rev() {
            let k = i % n;
            i /= n;
            let v = if *n == 1 { 0.5 * (lb + ub) } else { lb + (ub - lb) * k as f64 / (*n - 1) as f64 };
            out.insert(name.clone(), v);
        }
        out
    }

    pub fn points(&self) -> impl Iterator<Item = BTreeMap<String, f64>> + '_ {
        (0..self.len()).map(|i| self.point(i))
    }
}
