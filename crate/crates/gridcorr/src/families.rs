//! Example families with provably coincident low-order autocorrelations,
//! and the exact agreement checker that certifies them.
//!
//! Each constructor builds a function (or pair) whose moments agree through
//! a known order even though the members are not translates: the conic
//! family on Z/6, the axis-plus-diagonal pairs on (Z/6)^r and (Z/2pq)^r,
//! and the two spectral lower-bound pairs (a lone spectrum point versus
//! zero, and a shared support distinguished by a d-th root of unity).

use std::sync::Arc;

use itertools::Itertools;
use num_bigint::BigInt;
use num_rational::BigRational;

use crate::cyclotomic::{CycCtx, CycNum};
use crate::error::{Error, Result};
use crate::groups::{factorize, units, Grid};
use crate::spectral::{dft, idft_rational, RatFn, SpecFn};

/// One member of the conic family on Z/6: value row
/// (2a, a-3b, -a-3b, -2a, 3b-a, a+3b). Its spectrum is 6(a +/- sqrt(-3) b)
/// at +/-1 and zero elsewhere, so all moments through order 5 depend only
/// on a^2 + 3b^2.
pub fn family_z6(a: i64, b: i64) -> RatFn {
    let g = Grid::new(&[6]).expect("fixed grid");
    let row = [2 * a, a - 3 * b, -a - 3 * b, -2 * a, 3 * b - a, a + 3 * b];
    let values = row.iter().map(|&v| BigRational::from_integer(BigInt::from(v))).collect();
    RatFn::new(g, values).expect("six values")
}

/// Pair on (Z/6)^r agreeing through order 3r: both spectra are 1 on all
/// +/-e_j, and differ only by sign at the diagonal point (3, ..., 3). A
/// zero-sum sequence over the support needs the diagonal point an even
/// number of times unless it uses at least 3r + 1 entries.
pub fn family_threer(r: usize) -> (RatFn, RatFn) {
    assert!(r >= 1, "family needs at least one dimension");
    let g = Grid::new(&vec![6; r]).expect("valid grid");
    let ctx = Arc::new(CycCtx::new(6));
    let one = ctx.one();
    let mut fhat = SpecFn::zero(g.clone(), ctx.clone());
    let mut ghat = SpecFn::zero(g.clone(), ctx.clone());
    for k in 0..r {
        let e = g.e(k);
        let ne = g.neg(&e);
        fhat.set(&e, one.clone());
        ghat.set(&e, one.clone());
        fhat.set(&ne, one.clone());
        ghat.set(&ne, one.clone());
    }
    let diag = vec![3u64; r];
    fhat.set(&diag, one.clone());
    ghat.set(&diag, ctx.neg(&one));
    let f = idft_rational(&fhat).expect("spectrum closed under unit scaling");
    let g2 = idft_rational(&ghat).expect("spectrum closed under unit scaling");
    (f, g2)
}

fn is_odd_prime(v: u64) -> bool {
    v > 2 && v % 2 == 1 && factorize(v) == vec![(v, 1)]
}

fn orbit_assign(spec: &mut SpecFn, x: &[u64], v: CycNum) {
    let cur = spec.value(x);
    assert!(
        cur.is_zero() || *cur == v,
        "conflicting orbit assignment at {x:?}"
    );
    spec.set(x, v);
}

/// Pair on (Z/2pq)^r agreeing through order 3r + 2 (p, q distinct odd
/// primes): spectra equal to 1 on the unit orbits of p(q+2) along every
/// axis, and 1 versus -1 on the unit orbit of q(p+2) along the diagonal
/// (every unit mod 2pq is odd, so the sign is uniform on the orbit). A
/// zero-sum sequence meeting the diagonal an odd number of times needs at
/// least three entries there and three per axis.
pub fn family_sharp(p: u64, q: u64, r: usize) -> (RatFn, RatFn) {
    assert!(r >= 1, "family needs at least one dimension");
    assert!(is_odd_prime(p) && is_odd_prime(q) && p != q, "p, q must be distinct odd primes");
    let n = 2 * p * q;
    let g = Grid::new(&vec![n; r]).expect("valid grid");
    let ctx = Arc::new(CycCtx::new(n));
    let one = ctx.one();
    let minus_one = ctx.neg(&one);
    let axis_gen = (p * (q + 2)) % n;
    let diag_gen = (q * (p + 2)) % n;
    // p divides every axis orbit point and never a diagonal one, so the
    // orbits cannot meet.
    assert_eq!(axis_gen % p, 0);
    assert_ne!(diag_gen % p, 0);
    let mut fhat = SpecFn::zero(g.clone(), ctx.clone());
    let mut ghat = SpecFn::zero(g.clone(), ctx.clone());
    for a in units(n) {
        let av = ((a as u128 * axis_gen as u128) % n as u128) as u64;
        let dv = ((a as u128 * diag_gen as u128) % n as u128) as u64;
        for k in 0..r {
            let mut x = g.zero();
            x[k] = av;
            orbit_assign(&mut fhat, &x, one.clone());
            orbit_assign(&mut ghat, &x, one.clone());
        }
        let x = vec![dv; r];
        orbit_assign(&mut fhat, &x, one.clone());
        orbit_assign(&mut ghat, &x, minus_one.clone());
    }
    let f = idft_rational(&fhat).expect("spectrum closed under unit scaling");
    let g2 = idft_rational(&ghat).expect("spectrum closed under unit scaling");
    (f, g2)
}

/// Spectral pair showing that order resists bounding by anything smaller
/// than the last dimension: a single spectrum point of value 1 versus the
/// zero function. Every moment of order below that dimension vanishes for
/// both.
pub fn family_delta(g: &Grid) -> (SpecFn, SpecFn) {
    let ctx = Arc::new(CycCtx::new(g.exponent()));
    let mut fhat = SpecFn::zero(g.clone(), ctx.clone());
    let e = g.e(g.coords() - 1);
    fhat.set(&e, ctx.one());
    let ghat = SpecFn::zero(g.clone(), ctx);
    (fhat, ghat)
}

/// Spectral pair agreeing through order (a_1 + ... + a_r) / d: both
/// spectra are 1 on every e_k; at the distinguished point
/// (a_1/d, ..., a_r/d) one takes 1 and the other a primitive d-th root of
/// unity. Requires d > 1 dividing every dimension; when the distinguished
/// point collides with a generator (one dimension equal to d), its value
/// wins.
pub fn family_divisor(g: &Grid, d: u64) -> Result<(SpecFn, SpecFn)> {
    if d <= 1 {
        return Err(Error::InvalidParameter("divisor must exceed 1".into()));
    }
    for &a in g.dims() {
        if a % d != 0 {
            return Err(Error::InvalidParameter(format!(
                "divisor {d} must divide every dimension, got {a}"
            )));
        }
    }
    let n = g.exponent();
    let ctx = Arc::new(CycCtx::new(n));
    let mut fhat = SpecFn::zero(g.clone(), ctx.clone());
    let mut ghat = SpecFn::zero(g.clone(), ctx.clone());
    for k in 0..g.coords() {
        let e = g.e(k);
        fhat.set(&e, ctx.one());
        ghat.set(&e, ctx.one());
    }
    let v: Vec<u64> = g.dims().iter().map(|&a| a / d).collect();
    fhat.set(&v, ctx.one());
    ghat.set(&v, ctx.root_of_unity((n / d) as i64));
    Ok((fhat, ghat))
}

/// Outcome of the exact moment-agreement scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Agreement {
    AgreeThrough(usize),
    FirstDifference(usize),
}

/// Compare the transformed moments of two spectra at every order from 1
/// through max_order. Order 1 compares the values at 0; higher orders
/// enumerate zero-sum multisets over the union of the supports, which is
/// exhaustive because off-support sequences contribute 0 to both sides.
/// The budget counts enumerated multisets; exceeding it is an error, never
/// a verdict.
pub fn agreement_order(
    fhat: &SpecFn,
    ghat: &SpecFn,
    max_order: usize,
    budget: u64,
) -> Result<Agreement> {
    assert_eq!(fhat.grid(), ghat.grid(), "pair must live on one grid");
    assert_eq!(fhat.ctx().conductor(), ghat.ctx().conductor());
    let g = fhat.grid();
    let ctx = fhat.ctx();
    if max_order == 0 {
        return Ok(Agreement::AgreeThrough(0));
    }
    let mut used: u64 = 0;
    let mut spend = || {
        used += 1;
        if used > budget {
            Err(Error::BudgetExceeded(budget))
        } else {
            Ok(())
        }
    };
    spend()?;
    if fhat.value(&g.zero()) != ghat.value(&g.zero()) {
        return Ok(Agreement::FirstDifference(1));
    }
    let mut support = fhat.support();
    for x in ghat.support() {
        if !support.contains(&x) {
            support.push(x);
        }
    }
    support.retain(|x| !g.is_zero(x));
    support.sort();
    for m in 2..=max_order {
        for combo in support.iter().combinations_with_replacement(m) {
            spend()?;
            let mut sum = g.zero();
            for x in &combo {
                sum = g.add(&sum, x);
            }
            if !g.is_zero(&sum) {
                continue;
            }
            let mut fp = ctx.one();
            let mut gp = ctx.one();
            for x in &combo {
                fp = ctx.mul(&fp, fhat.value(x));
                gp = ctx.mul(&gp, ghat.value(x));
            }
            if fp != gp {
                return Ok(Agreement::FirstDifference(m));
            }
        }
    }
    Ok(Agreement::AgreeThrough(max_order))
}

/// Agreement scan starting from rational data: transforms both sides with
/// a shared context first.
pub fn agreement_order_data(
    f: &RatFn,
    g2: &RatFn,
    max_order: usize,
    budget: u64,
) -> Result<Agreement> {
    assert_eq!(f.grid(), g2.grid(), "pair must live on one grid");
    let ctx = Arc::new(CycCtx::new(f.grid().exponent()));
    let fhat = dft(f, ctx.clone());
    let ghat = dft(g2, ctx);
    agreement_order(&fhat, &ghat, max_order, budget)
}
