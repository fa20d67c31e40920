//! Integer lattice reduction and nearest-plane rounding, used to recognize
//! algebraic integers from high-precision complex approximations.
//!
//! The LLL implementation follows the classical all-integer formulation
//! (Gram coefficients lambda over subdeterminants d), with the standard
//! (3/4) Lovasz condition. Nearest-plane runs on a fixed-point
//! Gram-Schmidt profile of the reduced basis; its output is an exact
//! integer lattice vector, so approximation errors can only cost an extra
//! candidate, never an incorrect accept (acceptance is decided exactly by
//! the caller).

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::numeric::FixCtx;

fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// In-place LLL reduction of linearly independent rows.
pub fn lll_reduce(basis: &mut [Vec<BigInt>]) {
    let n = basis.len();
    if n <= 1 {
        return;
    }
    // d[0] = 1, d[i+1] = Gram determinant of the first i+1 vectors.
    let mut d: Vec<BigInt> = vec![BigInt::one(); n + 1];
    // lam[i][j], j < i: integralized Gram-Schmidt coefficients.
    let mut lam: Vec<Vec<BigInt>> = (0..n).map(|i| vec![BigInt::zero(); i]).collect();

    gs_row(basis, &mut d, &mut lam, 0);
    let mut kmax = 0usize;
    let mut k = 1usize;
    while k < n {
        if k > kmax {
            kmax = k;
            gs_row(basis, &mut d, &mut lam, k);
            assert!(!d[k + 1].is_zero(), "basis rows are dependent");
        }
        // Size-reduce against the previous vector, test Lovasz, swap or
        // finish reducing and advance.
        loop {
            red(basis, &d, &mut lam, k, k - 1);
            let lhs = (&d[k + 1] * &d[k - 1] + &lam[k][k - 1] * &lam[k][k - 1]) * 4u32;
            let rhs = (&d[k] * &d[k]) * 3u32;
            if lhs < rhs {
                swap_step(basis, &mut d, &mut lam, k, kmax);
                if k > 1 {
                    k -= 1;
                }
            } else {
                for l in (0..k.saturating_sub(1)).rev() {
                    red(basis, &d, &mut lam, k, l);
                }
                k += 1;
                break;
            }
        }
    }
}

/// Incremental integral Gram-Schmidt data for row k.
fn gs_row(basis: &[Vec<BigInt>], d: &mut [BigInt], lam: &mut [Vec<BigInt>], k: usize) {
    for j in 0..=k {
        let mut u = dot(&basis[k], &basis[j]);
        for i in 0..j {
            u = (&d[i + 1] * &u - &lam[k][i] * &lam[j][i]) / &d[i];
        }
        if j < k {
            lam[k][j] = u;
        } else {
            d[k + 1] = u;
        }
    }
}

/// RED(k, l): size-reduce lam[k][l].
fn red(basis: &mut [Vec<BigInt>], d: &[BigInt], lam: &mut [Vec<BigInt>], k: usize, l: usize) {
    let two_lam: BigInt = &lam[k][l] << 1;
    if two_lam.abs() <= d[l + 1].abs() {
        return;
    }
    // q = nearest integer to lam[k][l] / d[l+1]
    let q = nearest_div(&lam[k][l], &d[l + 1]);
    if q.is_zero() {
        return;
    }
    let row_l = basis[l].clone();
    for (a, b) in basis[k].iter_mut().zip(&row_l) {
        *a -= &q * b;
    }
    let lam_l = lam[l].clone();
    for i in 0..l {
        lam[k][i] -= &q * &lam_l[i];
    }
    lam[k][l] -= &q * &d[l + 1];
}

fn nearest_div(a: &BigInt, b: &BigInt) -> BigInt {
    let (a, b) = if b.is_negative() { (-a, -b) } else { (a.clone(), b.clone()) };
    let (q, r) = a.div_mod_floor(&b);
    if (&r << 1) > b {
        q + 1
    } else {
        q
    }
}

/// SWAPI(k): exchange rows k and k-1, updating the Gram profile.
fn swap_step(
    basis: &mut [Vec<BigInt>],
    d: &mut [BigInt],
    lam: &mut [Vec<BigInt>],
    k: usize,
    kmax: usize,
) {
    basis.swap(k, k - 1);
    for j in 0..k - 1 {
        let tmp = lam[k][j].clone();
        lam[k][j] = lam[k - 1][j].clone();
        lam[k - 1][j] = tmp;
    }
    let lam_kk = lam[k][k - 1].clone();
    let b = (&d[k - 1] * &d[k + 1] + &lam_kk * &lam_kk) / &d[k];
    for i in k + 1..=kmax {
        let t = lam[i][k].clone();
        lam[i][k] = (&d[k + 1] * &lam[i][k - 1] - &lam_kk * &t) / &d[k];
        lam[i][k - 1] = (&b * &t + &lam_kk * &lam[i][k]) / &d[k + 1];
    }
    d[k] = b;
}

/// Fixed-point Gram-Schmidt profile of a (reduced) basis, for repeated
/// nearest-plane queries against integer targets.
pub struct NearestPlane {
    basis: Vec<Vec<BigInt>>,
    /// Orthogonalized vectors as mantissas at the context scale.
    gs: Vec<Vec<BigInt>>,
    /// Squared norms of gs rows (mantissas at the context scale).
    gs_norm: Vec<BigInt>,
    fx: FixCtx,
}

impl NearestPlane {
    pub fn new(basis: Vec<Vec<BigInt>>, fx: FixCtx) -> NearestPlane {
        let k = basis.len();
        let mut gs: Vec<Vec<BigInt>> = Vec::with_capacity(k);
        let mut gs_norm: Vec<BigInt> = Vec::with_capacity(k);
        for i in 0..k {
            // Work at scale: mantissa of b_i is b_i << bits.
            let mut v: Vec<BigInt> = basis[i].iter().map(|c| c << fx.bits).collect();
            for j in 0..i {
                // mu = <b_i, gs_j> / |gs_j|^2, computed at scale.
                let num = fixed_dot(&v, &gs[j], fx.bits);
                let mu = rational_round_scaled(&num, &gs_norm[j], fx.bits);
                for (a, b) in v.iter_mut().zip(&gs[j]) {
                    *a -= shr(&(&mu * b), fx.bits);
                }
            }
            let norm = fixed_dot(&v, &v, fx.bits);
            assert!(norm.is_positive(), "degenerate Gram-Schmidt profile");
            gs.push(v);
            gs_norm.push(norm);
        }
        NearestPlane { basis, gs, gs_norm, fx }
    }

    /// Nearest-plane rounding of an integer target vector. Returns the
    /// lattice vector (exact integers) closest in the Babai sense.
    pub fn nearest(&self, target: &[BigInt]) -> Vec<BigInt> {
        let k = self.basis.len();
        let mut rem: Vec<BigInt> = target.iter().map(|c| c << self.fx.bits).collect();
        let mut coefs = vec![BigInt::zero(); k];
        for i in (0..k).rev() {
            let num = fixed_dot(&rem, &self.gs[i], self.fx.bits);
            let c = nearest_div(&num, &self.gs_norm[i]);
            if !c.is_zero() {
                for (a, b) in rem.iter_mut().zip(&self.basis[i]) {
                    *a -= &c * (b << self.fx.bits);
                }
            }
            coefs[i] = c;
        }
        // Exact lattice vector sum c_i b_i.
        let dim = self.basis[0].len();
        let mut out = vec![BigInt::zero(); dim];
        for (c, row) in coefs.iter().zip(&self.basis) {
            if c.is_zero() {
                continue;
            }
            for (o, b) in out.iter_mut().zip(row) {
                *o += c * b;
            }
        }
        out
    }
}

fn shr(v: &BigInt, k: u32) -> BigInt {
    if v.is_negative() {
        -((-v) >> k)
    } else {
        v >> k
    }
}

fn fixed_dot(a: &[BigInt], b: &[BigInt], bits: u32) -> BigInt {
    shr(&dot(a, b), bits)
}

/// round(num / den) where both are mantissas at the same scale; the result
/// is returned as a mantissa at `bits`.
fn rational_round_scaled(num: &BigInt, den: &BigInt, bits: u32) -> BigInt {
    nearest_div(&(num << bits), den)
}
