//! Per-energy interpolation table for the correction `ξ(|d|, c)`.
//!
//! The rotated-ray part of `ξ` is real and analytic in `(|d|, c)` except at
//! the origin, so it is stored on an adaptive tree of tensor Chebyshev
//! cells. Cells are split until the trailing Chebyshev coefficients fall
//! below the tolerance. The cell at the origin stops at `10⁻¹²` of the
//! kernel length scale and holds `ξ(0, 0)`; `ξ` is Lipschitz there, so the
//! error stays below the tolerance. The guided-mode pole term is added in
//! closed form.

use num_complex::Complex64;

use super::sigma::{correction_pole, correction_ray};
use super::EnergySpec;

const ORDER: usize = 12;
const TAIL: usize = 3;
const MAX_CELLS: usize = 200_000;

#[derive(Debug, Clone)]
enum Cell {
    Leaf { d: (f64, f64), c: (f64, f64), values: Vec<f64> },
    SplitD { at: f64, lo: usize, hi: usize },
    SplitC { at: f64, lo: usize, hi: usize },
    Constant(f64),
    Direct,
}

/// Tabulated `ξ` for one energy on `[0, d_max] × [0, c_max]`.
#[derive(Debug, Clone)]
pub struct CorrectionTable {
    energy: EnergySpec,
    d_max: f64,
    c_max: f64,
    cells: Vec<Cell>,
    nodes: [f64; ORDER],
    bary: [f64; ORDER],
}

fn chebyshev_nodes() -> [f64; ORDER] {
    let mut x = [0.0; ORDER];
    for (j, v) in x.iter_mut().enumerate() {
        *v = (std::f64::consts::PI * j as f64 / (ORDER - 1) as f64).cos();
    }
    x
}

fn bary_weights() -> [f64; ORDER] {
    let mut w = [0.0; ORDER];
    for (j, v) in w.iter_mut().enumerate() {
        let s = if j % 2 == 0 { 1.0 } else { -1.0 };
        *v = if j == 0 || j == ORDER - 1 { 0.5 * s } else { s };
    }
    w
}

/// Chebyshev coefficients of a row-major `ORDER × ORDER` sample block
/// (first index along `d`).
fn coefficients(values: &[f64]) -> Vec<f64> {
    let n = ORDER;
    let m = (n - 1) as f64;
    let t = |k: usize, j: usize| (std::f64::consts::PI * (k * j) as f64 / m).cos();
    let edge = |j: usize| if j == 0 || j == n - 1 { 0.5 } else { 1.0 };
    let transform = |f: &dyn Fn(usize) -> f64, k: usize| -> f64 {
        let s: f64 = (0..n).map(|j| edge(j) * f(j) * t(k, j)).sum();
        let scale = if k == 0 || k == n - 1 { 1.0 / m } else { 2.0 / m };
        s * scale
    };
    // transform along c for each d row, then along d
    let mut rows = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            rows[i * n + k] = transform(&|j| values[i * n + j], k);
        }
    }
    let mut out = vec![0.0; n * n];
    for k in 0..n {
        for l in 0..n {
            out[l * n + k] = transform(&|i| rows[i * n + k], l);
        }
    }
    out
}

impl CorrectionTable {
    /// Builds the table to absolute accuracy `tol` (relative to `max(1, |ξ(0, 0)|)`).
    pub fn new(energy: &EnergySpec, d_max: f64, c_max: f64, tol: f64) -> Self {
        let scale = 1.0 / energy.kappa().max(energy.alpha);
        let d_max = d_max.max(scale) * 1.02;
        let c_max = c_max.max(scale) * 1.02;
        let origin = correction_ray(energy, 0.0, 0.0).abs();
        let tol = tol * origin.max(1.0);
        let min_cell = 1e-12 * scale;
        let mut table = Self {
            energy: *energy,
            d_max,
            c_max,
            cells: vec![Cell::Direct],
            nodes: chebyshev_nodes(),
            bary: bary_weights(),
        };
        let mut stack = vec![(0usize, (0.0, d_max), (0.0, c_max))];
        while let Some((idx, d, c)) = stack.pop() {
            if d.1 - d.0 <= min_cell && c.1 - c.0 <= min_cell {
                table.cells[idx] = Cell::Constant(correction_ray(energy, d.0, c.0));
                continue;
            }
            if table.cells.len() > MAX_CELLS {
                table.cells[idx] = Cell::Direct;
                continue;
            }
            let values = table.sample(d, c);
            let coef = coefficients(&values);
            let n = ORDER;
            let mut tail_d: f64 = 0.0;
            let mut tail_c: f64 = 0.0;
            for l in 0..n {
                for k in 0..n {
                    let a = coef[l * n + k].abs();
                    if l >= n - TAIL {
                        tail_d = tail_d.max(a);
                    }
                    if k >= n - TAIL {
                        tail_c = tail_c.max(a);
                    }
                }
            }
            if tail_d <= tol && tail_c <= tol {
                table.cells[idx] = Cell::Leaf { d, c, values };
                continue;
            }
            let lo = table.cells.len();
            table.cells.push(Cell::Direct);
            table.cells.push(Cell::Direct);
            let split_d = (tail_d >= tail_c && d.1 - d.0 > min_cell) || c.1 - c.0 <= min_cell;
            if split_d {
                let at = 0.5 * (d.0 + d.1);
                table.cells[idx] = Cell::SplitD { at, lo, hi: lo + 1 };
                stack.push((lo, (d.0, at), c));
                stack.push((lo + 1, (at, d.1), c));
            } else {
                let at = 0.5 * (c.0 + c.1);
                table.cells[idx] = Cell::SplitC { at, lo, hi: lo + 1 };
                stack.push((lo, d, (c.0, at)));
                stack.push((lo + 1, d, (at, c.1)));
            }
        }
        table
    }

    fn sample(&self, d: (f64, f64), c: (f64, f64)) -> Vec<f64> {
        let map = |r: (f64, f64), x: f64| 0.5 * (r.0 + r.1) + 0.5 * (r.1 - r.0) * x;
        let mut v = Vec::with_capacity(ORDER * ORDER);
        for &xd in &self.nodes {
            for &xc in &self.nodes {
                v.push(correction_ray(&self.energy, map(d, xd), map(c, xc)));
            }
        }
        v
    }

    pub fn energy(&self) -> &EnergySpec {
        &self.energy
    }

    /// Number of tree cells (diagnostics).
    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    fn basis(&self, u: f64, out: &mut [f64; ORDER]) {
        if let Some(j) = self.nodes.iter().position(|&x| x == u) {
            out.fill(0.0);
            out[j] = 1.0;
            return;
        }
        let mut sum = 0.0;
        for j in 0..ORDER {
            out[j] = self.bary[j] / (u - self.nodes[j]);
            sum += out[j];
        }
        for v in out.iter_mut() {
            *v /= sum;
        }
    }

    fn ray(&self, d: f64, c: f64) -> f64 {
        if d > self.d_max || c > self.c_max {
            return correction_ray(&self.energy, d, c);
        }
        let mut idx = 0;
        loop {
            match &self.cells[idx] {
                Cell::SplitD { at, lo, hi } => idx = if d < *at { *lo } else { *hi },
                Cell::SplitC { at, lo, hi } => idx = if c < *at { *lo } else { *hi },
                Cell::Constant(v) => return *v,
                Cell::Direct => return correction_ray(&self.energy, d, c),
                Cell::Leaf { d: dr, c: cr, values } => {
                    let u = ((2.0 * d - dr.0 - dr.1) / (dr.1 - dr.0)).clamp(-1.0, 1.0);
                    let v = ((2.0 * c - cr.0 - cr.1) / (cr.1 - cr.0)).clamp(-1.0, 1.0);
                    let mut bu = [0.0; ORDER];
                    let mut bv = [0.0; ORDER];
                    self.basis(u, &mut bu);
                    self.basis(v, &mut bv);
                    let mut acc = 0.0;
                    for (i, a) in bu.iter().enumerate() {
                        let row = &values[i * ORDER..(i + 1) * ORDER];
                        acc += a * row.iter().zip(&bv).map(|(f, b)| f * b).sum::<f64>();
                    }
                    return acc;
                }
            }
        }
    }

    /// `ξ(d, c)` with `c = |x2| + |y2|`.
    pub fn eval(&self, d: f64, c: f64) -> Complex64 {
        let d = d.abs();
        self.ray(d, c) + correction_pole(&self.energy, d, c)
    }
}
