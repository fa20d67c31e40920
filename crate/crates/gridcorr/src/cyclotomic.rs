//! Exact arithmetic in the cyclotomic field Q(xi_n).
//!
//! Numbers are stored in the power basis 1, xi, ..., xi^(phi(n)-1) modulo the
//! n-th cyclotomic polynomial, as integer coordinates over a single positive
//! denominator. Every operation renormalizes (content and denominator made
//! coprime, denominator positive), so structural equality of the stored form
//! is equality in the field.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::HashMap;

use crate::error::{Error, Result};

/// Shared context for a fixed conductor n: the minimal polynomial and the
/// expansion of every xi^j in the power basis.
#[derive(Debug)]
pub struct CycCtx {
    n: u64,
    phi: usize,
    /// Monic minimal polynomial of xi_n, ascending coefficients, length phi+1.
    minpoly: Vec<BigInt>,
    /// pow[j] = coordinates of xi^j, for j in 0..n.
    pow: Vec<Vec<BigInt>>,
}

/// Element of Q(xi_n): integer coordinates over a positive denominator,
/// always in lowest terms.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CycNum {
    coords: Vec<BigInt>,
    den: BigInt,
}

impl CycNum {
    pub fn coords(&self) -> &[BigInt] {
        &self.coords
    }

    pub fn den(&self) -> &BigInt {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.den.is_one()
            && self.coords[0].is_one()
            && self.coords[1..].iter().all(|c| c.is_zero())
    }
}

/// The n-th cyclotomic polynomial, monic with ascending integer coefficients.
pub fn cyclotomic_poly(n: u64) -> Vec<BigInt> {
    let mut memo: HashMap<u64, Vec<BigInt>> = HashMap::new();
    cyc_poly_memo(n, &mut memo)
}

fn cyc_poly_memo(n: u64, memo: &mut HashMap<u64, Vec<BigInt>>) -> Vec<BigInt> {
    if let Some(p) = memo.get(&n) {
        return p.clone();
    }
    // x^n - 1 divided by the cyclotomic polynomials of all proper divisors.
    let mut num = vec![BigInt::zero(); n as usize + 1];
    num[0] = -BigInt::one();
    num[n as usize] = BigInt::one();
    for d in 1..n {
        if n % d == 0 {
            let q = cyc_poly_memo(d, memo);
            num = poly_div_exact(&num, &q);
        }
    }
    memo.insert(n, num.clone());
    num
}

/// Exact division of integer polynomials (divisor monic), ascending coeffs.
fn poly_div_exact(num: &[BigInt], div: &[BigInt]) -> Vec<BigInt> {
    let dn = num.len() - 1;
    let dd = div.len() - 1;
    assert!(div[dd].is_one(), "divisor must be monic");
    assert!(dn >= dd);
    let mut rem = num.to_vec();
    let mut quo = vec![BigInt::zero(); dn - dd + 1];
    for i in (0..=dn - dd).rev() {
        let c = rem[i + dd].clone();
        if c.is_zero() {
            continue;
        }
        quo[i] = c.clone();
        for (k, dc) in div.iter().enumerate() {
            rem[i + k] -= &c * dc;
        }
    }
    assert!(rem.iter().all(|c| c.is_zero()), "division is not exact");
    quo
}

impl CycCtx {
    pub fn new(n: u64) -> CycCtx {
        assert!(n >= 1, "conductor must be positive");
        let minpoly = cyclotomic_poly(n);
        let phi = minpoly.len() - 1;
        let mut pow: Vec<Vec<BigInt>> = Vec::with_capacity(n as usize);
        let mut cur = vec![BigInt::zero(); phi];
        cur[0] = BigInt::one();
        for _ in 0..n {
            pow.push(cur.clone());
            // Multiply by x and reduce by the monic minimal polynomial.
            let mut next = vec![BigInt::zero(); phi + 1];
            for (i, c) in cur.iter().enumerate() {
                next[i + 1] = c.clone();
            }
            let lead = next[phi].clone();
            if !lead.is_zero() {
                for (k, mc) in minpoly.iter().take(phi).enumerate() {
                    next[k] -= &lead * mc;
                }
            }
            next.truncate(phi);
            cur = next;
        }
        CycCtx { n, phi, minpoly, pow }
    }

    pub fn conductor(&self) -> u64 {
        self.n
    }

    /// Power-basis dimension (1 for n = 1, phi(n) otherwise).
    pub fn degree(&self) -> usize {
        self.phi
    }

    pub fn minimal_polynomial(&self) -> &[BigInt] {
        &self.minpoly
    }

    fn make(&self, coords: Vec<BigInt>, den: BigInt) -> CycNum {
        debug_assert_eq!(coords.len(), self.phi);
        normalize(coords, den)
    }

    pub fn zero(&self) -> CycNum {
        CycNum { coords: vec![BigInt::zero(); self.phi], den: BigInt::one() }
    }

    pub fn one(&self) -> CycNum {
        self.from_integer(&BigInt::one())
    }

    pub fn from_integer(&self, v: &BigInt) -> CycNum {
        let mut coords = vec![BigInt::zero(); self.phi];
        coords[0] = v.clone();
        CycNum { coords, den: BigInt::one() }
    }

    pub fn from_rational(&self, v: &BigRational) -> CycNum {
        let mut coords = vec![BigInt::zero(); self.phi];
        coords[0] = v.numer().clone();
        self.make(coords, v.denom().clone())
    }

    /// Element with the given power-basis coordinates over a denominator.
    pub fn from_coords(&self, coords: Vec<BigInt>, den: BigInt) -> CycNum {
        assert_eq!(coords.len(), self.phi, "coordinate length mismatch");
        self.make(coords, den)
    }

    /// xi^t for any integer t (reduced mod n).
    pub fn root_of_unity(&self, t: i64) -> CycNum {
        let t = t.rem_euclid(self.n as i64) as usize;
        CycNum { coords: self.pow[t].clone(), den: BigInt::one() }
    }

    pub fn add(&self, a: &CycNum, b: &CycNum) -> CycNum {
        let coords = a
            .coords
            .iter()
            .zip(&b.coords)
            .map(|(x, y)| x * &b.den + y * &a.den)
            .collect();
        self.make(coords, &a.den * &b.den)
    }

    pub fn sub(&self, a: &CycNum, b: &CycNum) -> CycNum {
        self.add(a, &self.neg(b))
    }

    pub fn neg(&self, a: &CycNum) -> CycNum {
        CycNum { coords: a.coords.iter().map(|c| -c).collect(), den: a.den.clone() }
    }

    pub fn mul(&self, a: &CycNum, b: &CycNum) -> CycNum {
        let phi = self.phi;
        let mut conv = vec![BigInt::zero(); 2 * phi - 1];
        for (i, x) in a.coords.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.coords.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                conv[i + j] += x * y;
            }
        }
        for i in (phi..2 * phi - 1).rev() {
            let c = std::mem::take(&mut conv[i]);
            if c.is_zero() {
                continue;
            }
            for (k, mc) in self.minpoly.iter().take(phi).enumerate() {
                conv[i - phi + k] -= &c * mc;
            }
        }
        conv.truncate(phi);
        self.make(conv, &a.den * &b.den)
    }

    /// Multiplicative inverse via the extended Euclidean algorithm over Q[x].
    pub fn inv(&self, a: &CycNum) -> Result<CycNum> {
        if a.is_zero() {
            return Err(Error::DivisionByZero(self.n));
        }
        // Work with rational polynomials r0 = minpoly, r1 = a.
        let to_rat = |v: &[BigInt], den: &BigInt| -> Vec<BigRational> {
            v.iter().map(|c| BigRational::new(c.clone(), den.clone())).collect()
        };
        let mut r0: Vec<BigRational> =
            self.minpoly.iter().map(|c| BigRational::from_integer(c.clone())).collect();
        let mut r1 = trim(to_rat(&a.coords, &a.den));
        let mut s0: Vec<BigRational> = vec![];
        let mut s1: Vec<BigRational> = vec![BigRational::one()];
        while !r1.is_empty() {
            let (q, r) = poly_divmod(&r0, &r1);
            let s = poly_sub(&s0, &poly_mul(&q, &s1));
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s;
        }
        // r0 is a nonzero constant gcd (minpoly is irreducible).
        assert_eq!(r0.len(), 1, "gcd with the minimal polynomial is constant");
        let c = r0[0].clone();
        let mut coords = vec![BigRational::zero(); self.phi];
        for (i, v) in s0.iter().enumerate() {
            coords[i] = v / &c;
        }
        // Common denominator.
        let den = coords.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
        let ints = coords
            .iter()
            .map(|v| v.numer() * (&den / v.denom()))
            .collect();
        Ok(self.make(ints, den))
    }

    pub fn div(&self, a: &CycNum, b: &CycNum) -> Result<CycNum> {
        Ok(self.mul(a, &self.inv(b)?))
    }

    /// a^e for nonnegative e.
    pub fn pow(&self, a: &CycNum, e: u64) -> CycNum {
        let mut result = self.one();
        let mut base = a.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = self.mul(&result, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base);
            }
        }
        result
    }

    /// a^e for any integer e (negative exponents invert).
    pub fn pow_i64(&self, a: &CycNum, e: i64) -> Result<CycNum> {
        if e >= 0 {
            Ok(self.pow(a, e as u64))
        } else {
            let inv = self.inv(a)?;
            Ok(self.pow(&inv, e.unsigned_abs()))
        }
    }

    /// Galois twist xi -> xi^t for t a unit mod n. By convention exponent 0
    /// maps every value to 1, matching the empty products it stands in for
    /// within the reconstruction formulas.
    pub fn automorphism(&self, a: &CycNum, t: i64) -> Result<CycNum> {
        let tm = t.rem_euclid(self.n as i64) as u64;
        if tm == 0 {
            if self.n == 1 {
                return Ok(a.clone());
            }
            return Ok(self.one());
        }
        if tm.gcd(&self.n) != 1 {
            return Err(Error::NotAUnit(tm, self.n));
        }
        let mut coords = vec![BigInt::zero(); self.phi];
        for (i, c) in a.coords.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let img = &self.pow[(i as u64 * tm % self.n) as usize];
            for (k, pc) in img.iter().enumerate() {
                coords[k] += c * pc;
            }
        }
        Ok(self.make(coords, a.den.clone()))
    }

    /// Complex conjugation xi -> xi^(-1).
    pub fn conj(&self, a: &CycNum) -> CycNum {
        if self.n == 1 {
            return a.clone();
        }
        self.automorphism(a, self.n as i64 - 1).expect("n - 1 is a unit mod n")
    }

    /// If a = xi^t for some t in 0..n, return t (exhaustive comparison).
    pub fn as_root_of_unity(&self, a: &CycNum) -> Option<u64> {
        if !a.den.is_one() {
            return None;
        }
        (0..self.n).find(|&t| a.coords == self.pow[t as usize])
    }

    /// If a is rational, return it.
    pub fn to_rational(&self, a: &CycNum) -> Option<BigRational> {
        if a.coords[1..].iter().all(|c| c.is_zero()) {
            Some(BigRational::new(a.coords[0].clone(), a.den.clone()))
        } else {
            None
        }
    }

    /// Linear combination sum_j sums[j] * xi^j for j in 0..n.
    pub fn combine_residues(&self, sums: &[BigRational]) -> CycNum {
        assert_eq!(sums.len(), self.n as usize);
        let den = sums.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
        let mut coords = vec![BigInt::zero(); self.phi];
        for (j, v) in sums.iter().enumerate() {
            if v.is_zero() {
                continue;
            }
            let num = v.numer() * (&den / v.denom());
            for (k, pc) in self.pow[j].iter().enumerate() {
                coords[k] += &num * pc;
            }
        }
        self.make(coords, den)
    }

    /// Rewrite `a`, known to lie in the subfield Q(xi_m) with m | n, on the
    /// power basis of `sub`. Errors with `NotRational`-style failure if the
    /// value does not lie in the subfield.
    pub fn restrict(&self, a: &CycNum, sub: &CycCtx) -> Result<CycNum> {
        assert!(self.n % sub.n == 0, "not a subfield conductor");
        if sub.n == self.n {
            return Ok(a.clone());
        }
        let step = (self.n / sub.n) as i64;
        // Columns: each basis power xi_m^i written on our power basis.
        let cols: Vec<CycNum> =
            (0..sub.phi as i64).map(|i| self.root_of_unity(step * i)).collect();
        // Solve the rational linear system cols * x = a by elimination.
        let mut m: Vec<Vec<BigRational>> = (0..self.phi)
            .map(|r| {
                let mut row: Vec<BigRational> = cols
                    .iter()
                    .map(|c| BigRational::new(c.coords[r].clone(), c.den.clone()))
                    .collect();
                row.push(BigRational::new(a.coords[r].clone(), a.den.clone()));
                row
            })
            .collect();
        let ncols = sub.phi;
        let mut piv_rows: Vec<usize> = Vec::new();
        let mut used = vec![false; self.phi];
        for c in 0..ncols {
            let Some(pr) = (0..self.phi).find(|&r| !used[r] && !m[r][c].is_zero()) else {
                return Err(Error::Inconsistency("subfield basis is degenerate".into()));
            };
            used[pr] = true;
            piv_rows.push(pr);
            let pv = m[pr][c].clone();
            for r in 0..self.phi {
                if r != pr && !m[r][c].is_zero() {
                    let f = &m[r][c] / &pv;
                    for k in c..=ncols {
                        let v = &m[r][k] - &f * &m[pr][k];
                        m[r][k] = v;
                    }
                }
            }
        }
        // Rows without pivots must have zero right-hand side.
        for r in 0..self.phi {
            if !used[r] && !m[r][ncols].is_zero() {
                return Err(Error::Inconsistency(
                    "value does not lie in the requested subfield".into(),
                ));
            }
        }
        let mut sums = vec![BigRational::zero(); sub.n as usize];
        for (c, &pr) in piv_rows.iter().enumerate() {
            sums[c % sub.n as usize] = &m[pr][ncols] / &m[pr][c];
        }
        // piv_rows[c] solves coordinate c; c < phi(m) <= m so no wraparound.
        Ok(sub.combine_residues(&sums))
    }
}

fn normalize(coords: Vec<BigInt>, den: BigInt) -> CycNum {
    assert!(!den.is_zero(), "zero denominator");
    let mut g = den.abs();
    for c in &coords {
        if !c.is_zero() {
            g = g.gcd(c);
        }
        if g.is_one() {
            break;
        }
    }
    if coords.iter().all(|c| c.is_zero()) {
        return CycNum { coords, den: BigInt::one() };
    }
    let neg = den.is_negative();
    let coords = coords
        .into_iter()
        .map(|c| {
            let v = c / &g;
            if neg { -v } else { v }
        })
        .collect();
    let den = (den / g).abs();
    CycNum { coords, den }
}

fn trim(mut v: Vec<BigRational>) -> Vec<BigRational> {
    while v.last().map(|c| c.is_zero()).unwrap_or(false) {
        v.pop();
    }
    v
}

fn poly_mul(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            let v = &out[i + j] + x * y;
            out[i + j] = v;
        }
    }
    trim(out)
}

fn poly_sub(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let n = a.len().max(b.len());
    let mut out = vec![BigRational::zero(); n];
    for (i, x) in a.iter().enumerate() {
        out[i] = x.clone();
    }
    for (i, y) in b.iter().enumerate() {
        let v = &out[i] - y;
        out[i] = v;
    }
    trim(out)
}

fn poly_divmod(a: &[BigRational], b: &[BigRational]) -> (Vec<BigRational>, Vec<BigRational>) {
    assert!(!b.is_empty());
    let mut rem = a.to_vec();
    let db = b.len() - 1;
    let lead = &b[db];
    if rem.len() <= db {
        return (vec![], trim(rem));
    }
    let mut quo = vec![BigRational::zero(); rem.len() - db];
    for i in (0..quo.len()).rev() {
        if rem.len() <= i + db {
            continue;
        }
        let c = &rem[i + db] / lead;
        if c.is_zero() {
            continue;
        }
        quo[i] = c.clone();
        for (k, bc) in b.iter().enumerate() {
            let v = &rem[i + k] - &c * bc;
            rem[i + k] = v;
        }
    }
    (trim(quo), trim(rem))
}
