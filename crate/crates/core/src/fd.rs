//! Central finite differences for maps ℝⁿ → ℝᵐ.

use crate::error::Result;
use crate::tol::FdConfig;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    First,
    Second,
}

#[derive(Debug, Clone)]
pub struct Derivatives {
    pub value: DVector<f64>,
    pub jacobian: DMatrix<f64>,
    /// ∂²f/∂x_i∂x_j stored at index i·n + j.
    pub second: Option<Vec<DVector<f64>>>,
}

impl Derivatives {
    pub fn second(&self, i: usize, j: usize) -> Option<&DVector<f64>> {
        let n = self.jacobian.ncols();
        self.second.as_ref().map(|s| &s[i * n + j])
    }
}

fn scaled(h: f64, x: &[f64], i: usize) -> f64 {
    h * x[i].abs().max(1.0)
}

fn shifted(x: &[f64], moves: &[(usize, f64)]) -> Vec<f64> {
    let mut y = x.to_vec();
    for &(i, d) in moves {
        y[i] += d;
    }
    y
}

fn central<F>(f: &F, x: &[f64], i: usize, h: f64) -> Result<DVector<f64>>
where
    F: Fn(&[f64]) -> Result<DVector<f64>>,
{
    let fp = f(&shifted(x, &[(i, h)]))?;
    let fm = f(&shifted(x, &[(i, -h)]))?;
    Ok((fp - fm) / (2.0 * h))
}

/// Jacobian by central differences; columns are ∂f/∂x_i.
pub fn jacobian<F>(f: &F, x: &[f64], cfg: &FdConfig) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Result<DVector<f64>>,
{
    let mut cols = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let h = scaled(cfg.step, x, i);
        let col = if cfg.richardson {
            let d1 = central(f, x, i, h)?;
            let d2 = central(f, x, i, 0.5 * h)?;
            (d2 * 4.0 - d1) / 3.0
        } else {
            central(f, x, i, h)?
        };
        cols.push(col);
    }
    Ok(DMatrix::from_columns(&cols))
}

/// Directional derivative Df(x)·a.
pub fn directional<F>(f: &F, x: &[f64], a: &[f64], cfg: &FdConfig) -> Result<DVector<f64>>
where
    F: Fn(&[f64]) -> Result<DVector<f64>>,
{
    let scale = x.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let h = cfg.step * scale;
    let at = |s: f64| -> Vec<f64> { x.iter().zip(a).map(|(xi, ai)| xi + s * ai).collect() };
    let d = |h: f64| -> Result<DVector<f64>> { Ok((f(&at(h))? - f(&at(-h))?) / (2.0 * h)) };
    if cfg.richardson {
        let d1 = d(h)?;
        let d2 = d(0.5 * h)?;
        Ok((d2 * 4.0 - d1) / 3.0)
    } else {
        d(h)
    }
}

/// Second directional derivative ∂²f(a, b) at x.
pub fn second_directional<F>(f: &F, x: &[f64], a: &[f64], b: &[f64], cfg: &FdConfig) -> Result<DVector<f64>>
where
    F: Fn(&[f64]) -> Result<DVector<f64>>,
{
    let scale = x.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let h = cfg.step_second * scale;
    let at = |s: f64, t: f64| -> Vec<f64> {
        x.iter().zip(a.iter().zip(b)).map(|(xi, (ai, bi))| xi + s * ai + t * bi).collect()
    };
    let d = |h: f64| -> Result<DVector<f64>> {
        let pp = f(&at(h, h))?;
        let pm = f(&at(h, -h))?;
        let mp = f(&at(-h, h))?;
        let mm = f(&at(-h, -h))?;
        Ok((pp - pm - mp + mm) / (4.0 * h * h))
    };
    if cfg.richardson {
        let d1 = d(h)?;
        let d2 = d(0.5 * h)?;
        Ok((d2 * 4.0 - d1) / 3.0)
    } else {
        d(h)
    }
}

/// Value, Jacobian and (for `Order::Second`) all second partials.
pub fn jacobian_fd<F>(f: &F, x: &[f64], order: Order, cfg: &FdConfig) -> Result<Derivatives>
where
    F: Fn(&[f64]) -> Result<DVector<f64>>,
{
    let value = f(x)?;
    let jac = jacobian(f, x, cfg)?;
    let second = match order {
        Order::First => None,
        Order::Second => {
            let n = x.len();
            let mut out = alloc::vec![DVector::zeros(value.len()); n * n];
            for i in 0..n {
                for j in i..n {
                    let mut ei = alloc::vec![0.0; n];
                    let mut ej = alloc::vec![0.0; n];
                    ei[i] = 1.0;
                    ej[j] = 1.0;
                    let d = second_directional(f, x, &ei, &ej, cfg)?;
                    out[i * n + j] = d.clone();
                    out[j * n + i] = d;
                }
            }
            Some(out)
        }
    };
    Ok(Derivatives { value, jacobian: jac, second })
}
