//! Rational functions on a grid and their exact Fourier transforms.
//!
//! The transform pairs a grid element x with the character
//! chi(x, y) = xi_N^e(x,y), where e is the standard pairing exponent and N
//! the grid exponent. Forward transform: F(x) = sum_y f(y) conj(chi(x, y)).
//! Inverse: f(x) = (1/|G|) sum_y F(y) chi(x, y).

use num_rational::BigRational;
use num_traits::Zero;
use std::sync::Arc;

use crate::cyclotomic::{CycCtx, CycNum};
use crate::error::{Error, Result};
use crate::groups::Grid;

/// Rational-valued function on a grid, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RatFn {
    grid: Grid,
    values: Vec<BigRational>,
}

impl RatFn {
    pub fn new(grid: Grid, values: Vec<BigRational>) -> Result<RatFn> {
        if values.len() != grid.order() as usize {
            return Err(Error::InvalidParameter(format!(
                "expected {} values, got {}",
                grid.order(),
                values.len()
            )));
        }
        Ok(RatFn { grid, values })
    }

    pub fn zero(grid: Grid) -> RatFn {
        let n = grid.order() as usize;
        RatFn { grid, values: vec![BigRational::zero(); n] }
    }

    pub fn constant(grid: Grid, v: BigRational) -> RatFn {
        let n = grid.order() as usize;
        RatFn { grid, values: vec![v; n] }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[BigRational] {
        &self.values
    }

    pub fn value(&self, x: &[u64]) -> &BigRational {
        &self.values[self.grid.index_of(x)]
    }

    pub fn set(&mut self, x: &[u64], v: BigRational) {
        let i = self.grid.index_of(x);
        self.values[i] = v;
    }

    /// Translate by t: (shifted f)(x) = f(x + t).
    pub fn translate(&self, t: &[u64]) -> RatFn {
        let values = (0..self.grid.order() as usize)
            .map(|i| {
                let x = self.grid.element(i);
                self.values[self.grid.index_of(&self.grid.add(&x, t))].clone()
            })
            .collect();
        RatFn { grid: self.grid.clone(), values }
    }
}

/// Cyclotomic-valued function on a grid (typically a Fourier transform).
#[derive(Debug, Clone)]
pub struct SpecFn {
    grid: Grid,
    ctx: Arc<CycCtx>,
    values: Vec<CycNum>,
}

impl SpecFn {
    pub fn new(grid: Grid, ctx: Arc<CycCtx>, values: Vec<CycNum>) -> Result<SpecFn> {
        if values.len() != grid.order() as usize {
            return Err(Error::InvalidParameter(format!(
                "expected {} values, got {}",
                grid.order(),
                values.len()
            )));
        }
        if ctx.conductor() % grid.exponent() != 0 {
            return Err(Error::ContextMismatch(ctx.conductor(), grid.exponent()));
        }
        Ok(SpecFn { grid, ctx, values })
    }

    pub fn zero(grid: Grid, ctx: Arc<CycCtx>) -> SpecFn {
        let n = grid.order() as usize;
        let z = ctx.zero();
        SpecFn { grid, ctx, values: vec![z; n] }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn ctx(&self) -> &Arc<CycCtx> {
        &self.ctx
    }

    pub fn values(&self) -> &[CycNum] {
        &self.values
    }

    pub fn value(&self, x: &[u64]) -> &CycNum {
        &self.values[self.grid.index_of(x)]
    }

    pub fn set(&mut self, x: &[u64], v: CycNum) {
        let i = self.grid.index_of(x);
        self.values[i] = v;
    }

    /// Support in row-major (lexicographic) element order.
    pub fn support(&self) -> Vec<Vec<u64>> {
        (0..self.grid.order() as usize)
            .filter(|&i| !self.values[i].is_zero())
            .map(|i| self.grid.element(i))
            .collect()
    }

    /// Does F(a x) = sigma_a(F(x)) hold for all x and all units a mod N?
    /// This is exactly the condition for the inverse transform to be
    /// rational-valued.
    pub fn is_rational_spectrum(&self) -> bool {
        let n = self.grid.exponent();
        let units: Vec<u64> = crate::groups::units(n);
        for i in 0..self.grid.order() as usize {
            let x = self.grid.element(i);
            for &a in &units {
                if a == 1 && n > 1 {
                    continue;
                }
                let ax = self.grid.scale(a as i64, &x);
                let lhs = self.value(&ax);
                let rhs = self
                    .ctx
                    .automorphism(&self.values[i], a as i64)
                    .expect("unit automorphism");
                if *lhs != rhs {
                    return false;
                }
            }
        }
        true
    }
}

/// chi(x, y) as an exact root of unity in the given context. The context
/// conductor must be a multiple of the grid exponent.
pub fn character(g: &Grid, ctx: &CycCtx, x: &[u64], y: &[u64]) -> CycNum {
    let e = g.pairing_exponent(x, y);
    let lift = (ctx.conductor() / g.exponent()) * e;
    ctx.root_of_unity(lift as i64)
}

/// Exact discrete Fourier transform of a rational function.
pub fn dft(f: &RatFn, ctx: Arc<CycCtx>) -> SpecFn {
    let g = f.grid();
    let n = g.exponent();
    assert!(
        ctx.conductor() == n,
        "transform context must match the grid exponent"
    );
    let order = g.order() as usize;
    let mut values = Vec::with_capacity(order);
    for i in 0..order {
        let x = g.element(i);
        // Accumulate rational coefficients per character exponent, then
        // combine once; conj(chi) contributes xi^(-e).
        let mut sums = vec![BigRational::zero(); n as usize];
        for j in 0..order {
            let v = &f.values()[j];
            if v.is_zero() {
                continue;
            }
            let y = g.element(j);
            let e = g.pairing_exponent(&x, &y);
            let idx = ((n - e) % n) as usize;
            sums[idx] += v;
        }
        values.push(ctx.combine_residues(&sums));
    }
    SpecFn { grid: g.clone(), ctx, values }
}

/// Exact inverse transform; values may be irrational cyclotomic numbers.
pub fn idft(fhat: &SpecFn) -> Vec<CycNum> {
    let g = fhat.grid();
    let ctx = fhat.ctx();
    let n = g.exponent();
    let lift = ctx.conductor() / n;
    let order = g.order() as usize;
    let inv_order =
        ctx.from_rational(&BigRational::new(1.into(), (g.order() as i64).into()));
    let mut out = Vec::with_capacity(order);
    for i in 0..order {
        let x = g.element(i);
        let mut acc = ctx.zero();
        for j in 0..order {
            let v = &fhat.values()[j];
            if v.is_zero() {
                continue;
            }
            let y = g.element(j);
            let e = g.pairing_exponent(&x, &y) * lift;
            acc = ctx.add(&acc, &ctx.mul(v, &ctx.root_of_unity(e as i64)));
        }
        out.push(ctx.mul(&acc, &inv_order));
    }
    out
}

/// Inverse transform of a spectrum expected to come from rational data.
pub fn idft_rational(fhat: &SpecFn) -> Result<RatFn> {
    let ctx = fhat.ctx();
    let values = idft(fhat)
        .into_iter()
        .map(|v| ctx.to_rational(&v).ok_or(Error::NotRational))
        .collect::<Result<Vec<_>>>()?;
    RatFn::new(fhat.grid().clone(), values)
}
