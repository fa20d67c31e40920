//! Fixed-point complex arithmetic at arbitrary precision.
//!
//! A value is an integer mantissa m interpreted as m / 2^scale. All
//! operations round to nearest, so each step loses at most half an ulp;
//! callers pick the scale with enough headroom for their error budget.
//! Roots of unity and unit-modulus roots are found by Newton iteration
//! seeded from f64 estimates, which lie well inside the convergence basin
//! for every index this crate uses.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::cyclotomic::{CycCtx, CycNum};

/// Precision context: mantissas are scaled by 2^bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FixCtx {
    pub bits: u32,
}

/// Complex number with both parts at the context scale.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Complex {
    pub re: BigInt,
    pub im: BigInt,
}

/// Round m / 2^k to the nearest integer (ties away from zero).
fn shr_round(m: &BigInt, k: u32) -> BigInt {
    if k == 0 {
        return m.clone();
    }
    let half = BigInt::one() << (k - 1);
    if m.is_negative() {
        -((half - m) >> k)
    } else {
        (m + half) >> k
    }
}

/// Round a / b to the nearest integer (ties toward +infinity).
fn div_round(a: &BigInt, b: &BigInt) -> BigInt {
    debug_assert!(!b.is_zero());
    let (a, b) = if b.is_negative() { (-a, -b) } else { (a.clone(), b.clone()) };
    let (q, r) = a.div_mod_floor(&b);
    if (&r << 1) >= b {
        q + 1
    } else {
        q
    }
}

impl FixCtx {
    pub fn new(bits: u32) -> FixCtx {
        FixCtx { bits }
    }

    pub fn from_rational(&self, v: &BigRational) -> BigInt {
        div_round(&(v.numer() << self.bits), v.denom())
    }

    pub fn from_f64(&self, v: f64) -> BigInt {
        let r = BigRational::from_float(v).expect("finite float");
        self.from_rational(&r)
    }

    /// Approximate f64 value of a mantissa (saturating; diagnostics only).
    pub fn to_f64(&self, m: &BigInt) -> f64 {
        let bits = m.bits() as i64;
        if bits <= 900 {
            return m.to_f64().unwrap_or(0.0) / 2f64.powi(self.bits as i32);
        }
        // Take the top 64 bits and rescale.
        let shift = (bits - 64) as u32;
        let top = (m >> shift).to_f64().unwrap_or(0.0);
        top * 2f64.powi(shift as i32 - self.bits as i32)
    }

    pub fn mul(&self, a: &BigInt, b: &BigInt) -> BigInt {
        shr_round(&(a * b), self.bits)
    }

    pub fn one(&self) -> BigInt {
        BigInt::one() << self.bits
    }

    pub fn cx(&self, re: f64, im: f64) -> Complex {
        Complex { re: self.from_f64(re), im: self.from_f64(im) }
    }

    pub fn cx_zero(&self) -> Complex {
        Complex { re: BigInt::zero(), im: BigInt::zero() }
    }

    pub fn cx_one(&self) -> Complex {
        Complex { re: self.one(), im: BigInt::zero() }
    }

    pub fn cx_add(&self, a: &Complex, b: &Complex) -> Complex {
        Complex { re: &a.re + &b.re, im: &a.im + &b.im }
    }

    pub fn cx_sub(&self, a: &Complex, b: &Complex) -> Complex {
        Complex { re: &a.re - &b.re, im: &a.im - &b.im }
    }

    pub fn cx_mul(&self, a: &Complex, b: &Complex) -> Complex {
        Complex {
            re: shr_round(&(&a.re * &b.re - &a.im * &b.im), self.bits),
            im: shr_round(&(&a.re * &b.im + &a.im * &b.re), self.bits),
        }
    }

    /// Multiply by an unscaled integer.
    pub fn cx_scale_int(&self, a: &Complex, k: &BigInt) -> Complex {
        Complex { re: &a.re * k, im: &a.im * k }
    }

    pub fn cx_div_int(&self, a: &Complex, k: &BigInt) -> Complex {
        Complex { re: div_round(&a.re, k), im: div_round(&a.im, k) }
    }

    pub fn cx_conj(&self, a: &Complex) -> Complex {
        Complex { re: a.re.clone(), im: -&a.im }
    }

    /// Divide by a positive real given as a mantissa at the context scale.
    pub fn cx_div_real(&self, a: &Complex, r: &BigInt) -> Complex {
        Complex {
            re: div_round(&(&a.re << self.bits), r),
            im: div_round(&(&a.im << self.bits), r),
        }
    }

    /// Drop k low bits from both parts (rescaling to a coarser context).
    pub fn cx_shr(a: &Complex, k: u32) -> Complex {
        Complex { re: shr_round(&a.re, k), im: shr_round(&a.im, k) }
    }

    /// |a|^2 as a mantissa at the context scale.
    pub fn cx_norm_sq(&self, a: &Complex) -> BigInt {
        shr_round(&(&a.re * &a.re + &a.im * &a.im), self.bits)
    }

    pub fn cx_div(&self, a: &Complex, b: &Complex) -> Complex {
        let den = &b.re * &b.re + &b.im * &b.im;
        debug_assert!(!den.is_zero());
        let re = (&a.re * &b.re + &a.im * &b.im) << self.bits;
        let im = (&a.im * &b.re - &a.re * &b.im) << self.bits;
        Complex { re: div_round(&re, &den), im: div_round(&im, &den) }
    }

    pub fn cx_pow(&self, a: &Complex, e: u64) -> Complex {
        let mut result = self.cx_one();
        let mut base = a.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = self.cx_mul(&result, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.cx_mul(&base, &base);
            }
        }
        result
    }

    /// e^(2 pi i k / n), refined by Newton iteration on z^n = 1 from an f64
    /// seed. The seed error is ~1e-16 and each step squares it, so a fixed
    /// iteration count derived from the scale suffices.
    pub fn root_of_unity(&self, n: u64, k: i64) -> Complex {
        debug_assert!(n >= 1);
        let km = k.rem_euclid(n as i64) as u64;
        if n <= 2 || km == 0 {
            let re = if n == 2 && km == 1 { -self.one() } else { self.one() };
            return Complex { re, im: BigInt::zero() };
        }
        let theta = 2.0 * std::f64::consts::PI * (km as f64) / (n as f64);
        let seed = self.cx(theta.cos(), theta.sin());
        self.newton_unit_root(&seed, &self.cx_one(), n)
    }

    /// Unit-modulus solution of z^m = u nearest the seed.
    pub fn nth_root_of_unit(&self, u: &Complex, m: u64) -> Complex {
        debug_assert!(m >= 1);
        if m == 1 {
            return u.clone();
        }
        let ur = self.to_f64(&u.re);
        let ui = self.to_f64(&u.im);
        let theta = ui.atan2(ur) / (m as f64);
        let seed = self.cx(theta.cos(), theta.sin());
        self.newton_unit_root(&seed, u, m)
    }

    /// Newton iteration for z^m = u starting from `seed` (|u| ~ 1).
    fn newton_unit_root(&self, seed: &Complex, u: &Complex, m: u64) -> Complex {
        // The f64 seed is accurate to ~2^-50. Convergence is quadratic with
        // a contraction constant around m, so budget each step as slightly
        // less than doubling the correct bits.
        let mut need = 1u32;
        let mut acc = 50i64;
        while acc < self.bits as i64 + 8 {
            acc = 2 * acc - 16;
            need += 1;
        }
        let mi = BigInt::from(m);
        let mut z = seed.clone();
        for _ in 0..need + 2 {
            // z' = z - (z^m - u) / (m z^(m-1))
            let zm1 = self.cx_pow(&z, m - 1);
            let zm = self.cx_mul(&zm1, &z);
            let num = self.cx_sub(&zm, u);
            let den = self.cx_scale_int(&zm1, &mi);
            let delta = self.cx_div(&num, &den);
            z = self.cx_sub(&z, &delta);
        }
        z
    }

    /// Nonnegative square root of a mantissa.
    pub fn sqrt(&self, a: &BigInt) -> BigInt {
        assert!(!a.is_negative(), "sqrt of negative value");
        (a << self.bits).sqrt()
    }

    /// Exact embedding of a cyclotomic number at xi = e^(2 pi i / n), given
    /// the precomputed basis embeddings xi^0..xi^(deg-1). The result error is
    /// bounded by deg * max|coeff| half-ulps plus the basis error, far below
    /// 2^-(bits-margin) for margin = 10 + log2(n * height) in practice; the
    /// precision schedule gives generous headroom above that.
    pub fn embed(&self, ctx: &CycCtx, basis: &[Complex], z: &CycNum) -> Complex {
        debug_assert_eq!(basis.len(), ctx.degree());
        let mut acc = self.cx_zero();
        for (c, b) in z.coords().iter().zip(basis) {
            if c.is_zero() {
                continue;
            }
            acc = self.cx_add(&acc, &self.cx_scale_int(b, c));
        }
        self.cx_div_int(&acc, z.den())
    }

    /// Basis embeddings xi^0 .. xi^(deg-1) for a cyclotomic context.
    pub fn basis_embeddings(&self, ctx: &CycCtx) -> Vec<Complex> {
        let xi = self.root_of_unity(ctx.conductor(), 1);
        let mut out = Vec::with_capacity(ctx.degree());
        let mut cur = self.cx_one();
        for _ in 0..ctx.degree() {
            out.push(cur.clone());
            cur = self.cx_mul(&cur, &xi);
        }
        out
    }
}
