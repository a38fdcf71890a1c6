//! Right-continuous nondecreasing step functions: the representation of
//! eigenvalue counting functions and of the integrated density of states.

use crate::{Error, Result};

/// A bounded, right-continuous, nondecreasing step function that is zero
/// before its first breakpoint. `values[i]` is the value on
/// `[breaks[i], breaks[i+1])`.
#[derive(Clone, Debug, PartialEq)]
pub struct StepFunction {
    breaks: Vec<f64>,
    values: Vec<f64>,
}

impl StepFunction {
    pub fn empty() -> Self {
        StepFunction { breaks: Vec::new(), values: Vec::new() }
    }

    /// A single jump of `height` at `at`.
    pub fn unit_jump(at: f64, height: f64) -> Self {
        StepFunction { breaks: vec![at], values: vec![height] }
    }

    /// Build from `(position, jump)` pairs. Positions are sorted, duplicates
    /// are combined, zero jumps are dropped.
    pub fn from_jumps(mut jumps: Vec<(f64, f64)>) -> Result<Self> {
        for (x, j) in &jumps {
            if !x.is_finite() || !j.is_finite() || *j < 0.0 {
                return Err(Error::Numerical(format!(
                    "invalid jump ({x}, {j}) in step function"
                )));
            }
        }
        jumps.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut breaks = Vec::with_capacity(jumps.len());
        let mut values = Vec::with_capacity(jumps.len());
        let mut acc = 0.0;
        for (x, j) in jumps {
            if j == 0.0 {
                continue;
            }
            acc += j;
            if breaks.last() == Some(&x) {
                *values.last_mut().unwrap() = acc;
            } else {
                breaks.push(x);
                values.push(acc);
            }
        }
        Ok(StepFunction { breaks, values })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breaks
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Jumps as `(position, height)` pairs.
    pub fn jumps(&self) -> Vec<(f64, f64)> {
        let mut prev = 0.0;
        self.breaks
            .iter()
            .zip(&self.values)
            .map(|(&x, &v)| {
                let j = v - prev;
                prev = v;
                (x, j)
            })
            .collect()
    }

    pub fn final_value(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// `f(x)` (right-continuous evaluation).
    pub fn value_at(&self, x: f64) -> f64 {
        match self.breaks.partition_point(|b| *b <= x) {
            0 => 0.0,
            k => self.values[k - 1],
        }
    }

    /// Left limit `f(x-)`.
    pub fn value_before(&self, x: f64) -> f64 {
        match self.breaks.partition_point(|b| *b < x) {
            0 => 0.0,
            k => self.values[k - 1],
        }
    }

    /// Total jump mass inside `[center - halfwidth, center + halfwidth]`.
    pub fn jump_within(&self, center: f64, halfwidth: f64) -> f64 {
        self.value_at(center + halfwidth) - self.value_before(center - halfwidth)
    }

    /// Multiply all values by a positive factor; breakpoints are unchanged.
    pub fn scale(&self, factor: f64) -> Result<StepFunction> {
        if !(factor > 0.0) || !factor.is_finite() {
            return Err(Error::Config(format!("scale factor must be positive, got {factor}")));
        }
        Ok(StepFunction {
            breaks: self.breaks.clone(),
            values: self.values.iter().map(|v| v * factor).collect(),
        })
    }

    /// Exact supremum of `|f - g|` over the real line, evaluated on the
    /// merged breakpoint grid with both one-sided limits at each breakpoint.
    pub fn sup_distance(&self, other: &StepFunction) -> f64 {
        let (mut i, mut j) = (0usize, 0usize);
        let (mut fv, mut gv) = (0.0f64, 0.0f64);
        let mut best = 0.0f64;
        while i < self.breaks.len() || j < other.breaks.len() {
            let x = match (self.breaks.get(i), other.breaks.get(j)) {
                (Some(&a), Some(&b)) => a.min(b),
                (Some(&a), None) => a,
                (None, Some(&b)) => b,
                (None, None) => unreachable!(),
            };
            // left limit at x
            best = best.max((fv - gv).abs());
            if self.breaks.get(i) == Some(&x) {
                fv = self.values[i];
                i += 1;
            }
            if other.breaks.get(j) == Some(&x) {
                gv = other.values[j];
                j += 1;
            }
            best = best.max((fv - gv).abs());
        }
        best
    }

    /// Sup distance that treats breakpoints within `tol` of each other as
    /// numerical realizations of the same spectral location: the two
    /// functions are compared just before and just after each breakpoint
    /// cluster instead of inside it. With `tol = 0` (or no clusters) this is
    /// the exact sup distance.
    pub fn sup_distance_resolved(&self, other: &StepFunction, tol: f64) -> f64 {
        let mut grid: Vec<f64> = self
            .breaks
            .iter()
            .chain(other.breaks.iter())
            .copied()
            .collect();
        if grid.is_empty() {
            return 0.0;
        }
        grid.sort_by(f64::total_cmp);
        let mut best = 0.0f64;
        let mut i = 0usize;
        while i < grid.len() {
            let mut j = i;
            while j + 1 < grid.len() && grid[j + 1] - grid[j] <= tol {
                j += 1;
            }
            let lo = grid[i];
            let hi = grid[j];
            best = best.max((self.value_before(lo) - other.value_before(lo)).abs());
            best = best.max((self.value_at(hi) - other.value_at(hi)).abs());
            i = j + 1;
        }
        best
    }

    /// Nonnegatively weighted sum of step functions.
    pub fn weighted_sum(parts: &[(f64, &StepFunction)]) -> Result<StepFunction> {
        let mut jumps = Vec::new();
        for (w, f) in parts {
            if !(*w >= 0.0) || !w.is_finite() {
                return Err(Error::Config(format!("weights must be >= 0, got {w}")));
            }
            if *w == 0.0 {
                continue;
            }
            for (x, j) in f.jumps() {
                jumps.push((x, w * j));
            }
        }
        StepFunction::from_jumps(jumps)
    }

    /// Serialize as CSV: a `# final=` header then `breakpoint,value` rows in
    /// increasing breakpoint order, 17 significant digits throughout.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# final={}\n", fmt_f64(self.final_value()));
        for (b, v) in self.breaks.iter().zip(&self.values) {
            out.push_str(&fmt_f64(*b));
            out.push(',');
            out.push_str(&fmt_f64(*v));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<StepFunction> {
        let mut breaks = Vec::new();
        let mut values = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (b, v) = line.split_once(',').ok_or_else(|| {
                Error::Config(format!("step CSV line {}: expected `breakpoint,value`", lineno + 1))
            })?;
            let b: f64 = b.trim().parse().map_err(|e| {
                Error::Config(format!("step CSV line {}: bad breakpoint: {e}", lineno + 1))
            })?;
            let v: f64 = v.trim().parse().map_err(|e| {
                Error::Config(format!("step CSV line {}: bad value: {e}", lineno + 1))
            })?;
            if let Some(last) = breaks.last() {
                if b <= *last {
                    return Err(Error::Config(format!(
                        "step CSV line {}: breakpoints must increase strictly",
                        lineno + 1
                    )));
                }
            }
            if let Some(last) = values.last() {
                if v < *last {
                    return Err(Error::Config(format!(
                        "step CSV line {}: values must be nondecreasing",
                        lineno + 1
                    )));
                }
            }
            breaks.push(b);
            values.push(v);
        }
        Ok(StepFunction { breaks, values })
    }
}

/// 17 significant digits: enough to make the decimal round-trip exact.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}
