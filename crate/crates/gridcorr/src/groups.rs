//! Finite abelian grids Z/a_1 x ... x Z/a_r and their subgroup lattice.
//!
//! Elements are coordinate vectors reduced modulo the dims. Subgroups are
//! represented by the integer lattice of their coordinate lifts, kept in
//! column Hermite normal form so equality of subgroups is equality of the
//! stored basis. Quotients are computed through the Smith normal form of that
//! lattice, which also yields the section used to pull dual characters of a
//! quotient back to the ambient grid.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::linalg::{self, Mat};

/// A finite abelian group presented as a product of cyclic factors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid {
    dims: Vec<u64>,
    order: u64,
    exponent: u64,
    invariant_factors: Vec<u64>,
}

impl Grid {
    pub fn new(dims: &[u64]) -> Result<Grid> {
        if dims.is_empty() {
            return Err(Error::InvalidGroup("dims must be nonempty".into()));
        }
        if dims.iter().any(|&a| a == 0) {
            return Err(Error::InvalidGroup("dims must be positive".into()));
        }
        let mut order: u64 = 1;
        for &a in dims {
            order = order
                .checked_mul(a)
                .ok_or_else(|| Error::InvalidGroup("group order overflows u64".into()))?;
        }
        let exponent = dims.iter().fold(1u64, |acc, &a| acc.lcm(&a));
        // Invariant factors: Smith form of diag(dims), keeping entries > 1.
        let r = dims.len();
        let diag = Mat::from_fn(r, r, |i, j| {
            if i == j { BigInt::from(dims[i]) } else { BigInt::zero() }
        });
        let s = linalg::snf(&diag);
        let invariant_factors = s
            .diag()
            .iter()
            .filter_map(|d| d.to_u64())
            .filter(|&d| d > 1)
            .collect();
        Ok(Grid { dims: dims.to_vec(), order, exponent, invariant_factors })
    }

    pub fn dims(&self) -> &[u64] {
        &self.dims
    }

    /// Number of coordinates (length of `dims`).
    pub fn coords(&self) -> usize {
        self.dims.len()
    }

    /// Minimal number of cyclic factors (invariant factor count).
    pub fn rank(&self) -> usize {
        self.invariant_factors.len()
    }

    pub fn invariant_factors(&self) -> &[u64] {
        &self.invariant_factors
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    pub fn zero(&self) -> Vec<u64> {
        vec![0; self.dims.len()]
    }

    pub fn is_zero(&self, x: &[u64]) -> bool {
        x.iter().all(|&c| c == 0)
    }

    /// Standard generator of the k-th coordinate (0-based).
    pub fn e(&self, k: usize) -> Vec<u64> {
        let mut v = self.zero();
        v[k] = 1 % self.dims[k];
        v
    }

    pub fn contains(&self, x: &[u64]) -> bool {
        x.len() == self.dims.len() && x.iter().zip(&self.dims).all(|(&c, &a)| c < a)
    }

    fn check(&self, x: &[u64]) {
        assert!(self.contains(x), "element {:?} not in grid {:?}", x, self.dims);
    }

    pub fn add(&self, x: &[u64], y: &[u64]) -> Vec<u64> {
        self.check(x);
        self.check(y);
        x.iter().zip(y).zip(&self.dims).map(|((&a, &b), &m)| (a + b) % m).collect()
    }

    pub fn neg(&self, x: &[u64]) -> Vec<u64> {
        self.check(x);
        x.iter().zip(&self.dims).map(|(&a, &m)| (m - a) % m).collect()
    }

    pub fn sub(&self, x: &[u64], y: &[u64]) -> Vec<u64> {
        self.add(x, &self.neg(y))
    }

    /// Integer scaling c * x with c of either sign.
    pub fn scale(&self, c: i64, x: &[u64]) -> Vec<u64> {
        self.check(x);
        x.iter()
            .zip(&self.dims)
            .map(|(&a, &m)| {
                let cm = c.rem_euclid(m as i64) as u64;
                (cm * a) % m
            })
            .collect()
    }

    /// Reduce an arbitrary integer coordinate vector into the grid.
    pub fn reduce(&self, x: &[i64]) -> Vec<u64> {
        assert_eq!(x.len(), self.dims.len());
        x.iter().zip(&self.dims).map(|(&c, &m)| c.rem_euclid(m as i64) as u64).collect()
    }

    /// Row-major index of an element (last coordinate varies fastest).
    pub fn index_of(&self, x: &[u64]) -> usize {
        self.check(x);
        let mut idx = 0usize;
        for (&c, &m) in x.iter().zip(&self.dims) {
            idx = idx * (m as usize) + c as usize;
        }
        idx
    }

    /// Element for a row-major index.
    pub fn element(&self, mut idx: usize) -> Vec<u64> {
        assert!(idx < self.order as usize);
        let mut out = vec![0u64; self.dims.len()];
        for k in (0..self.dims.len()).rev() {
            let m = self.dims[k] as usize;
            out[k] = (idx % m) as u64;
            idx /= m;
        }
        out
    }

    /// All elements in row-major (lexicographic) order.
    pub fn iter(&self) -> impl Iterator<Item = Vec<u64>> + '_ {
        (0..self.order as usize).map(|i| self.element(i))
    }

    /// Exponent of the character pairing of x and y:
    /// sum over k of (N / a_k) x_k y_k, reduced mod N.
    pub fn pairing_exponent(&self, x: &[u64], y: &[u64]) -> u64 {
        self.check(x);
        self.check(y);
        let n = self.exponent as u128;
        let mut acc: u128 = 0;
        for ((&xk, &yk), &ak) in x.iter().zip(y).zip(&self.dims) {
            let w = (n / ak as u128) * (xk as u128 % n) % n * (yk as u128 % n) % n;
            acc = (acc + w) % n;
        }
        acc as u64
    }
}

/// A subgroup of a grid, stored as the column-HNF basis of its coordinate
/// lift (the lattice always contains diag(dims) Z^r, so it has full rank).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subgroup {
    dims: Vec<u64>,
    generators: Vec<Vec<u64>>,
    hnf: Mat,
}

impl Subgroup {
    pub fn generators(&self) -> &[Vec<u64>] {
        &self.generators
    }

    /// Canonical lattice basis (column HNF, includes the dims relations).
    pub fn lattice(&self) -> &Mat {
        &self.hnf
    }

    pub fn order(&self, g: &Grid) -> u64 {
        assert_eq!(g.dims(), &self.dims[..]);
        let mut index = BigInt::one();
        for i in 0..self.hnf.rows() {
            index *= self.hnf.get(i, i);
        }
        let index = index.to_u64().expect("lattice index fits u64");
        g.order() / index
    }

    pub fn is_whole_group(&self, g: &Grid) -> bool {
        self.order(g) == g.order()
    }
}

/// Subgroup generated by a set of elements.
pub fn subgroup_generated(g: &Grid, elems: &[Vec<u64>]) -> Subgroup {
    let r = g.coords();
    let cols = elems.len() + r;
    let mut m = Mat::zero(r, cols);
    for (j, e) in elems.iter().enumerate() {
        g.check(e);
        for i in 0..r {
            m.set(i, j, BigInt::from(e[i]));
        }
    }
    for i in 0..r {
        m.set(i, elems.len() + i, BigInt::from(g.dims()[i]));
    }
    Subgroup { dims: g.dims().to_vec(), generators: elems.to_vec(), hnf: linalg::hnf_cols(&m) }
}

/// Membership test against the canonical lattice basis.
pub fn member(g: &Grid, s: &Subgroup, x: &[u64]) -> bool {
    assert_eq!(g.dims(), &s.dims[..]);
    g.check(x);
    let lift: Vec<BigInt> = x.iter().map(|&c| BigInt::from(c)).collect();
    linalg::hnf_solve(&s.hnf, &lift).is_some()
}

/// Torsion subgroup {x : b x = 0}, generated by (a_k / gcd(a_k, b)) e_k.
pub fn torsion_subgroup(g: &Grid, b: u64) -> Subgroup {
    let gens: Vec<Vec<u64>> = g
        .dims()
        .iter()
        .enumerate()
        .map(|(k, &ak)| {
            let step = ak / ak.gcd(&b);
            let mut v = g.zero();
            v[k] = step % ak;
            v
        })
        .collect();
    subgroup_generated(g, &gens)
}

/// The quotient G / H presented on invariant factors, with the projection
/// and the dual section used to pull quotient characters back to G.
#[derive(Debug, Clone)]
pub struct QuotientMap {
    source: Grid,
    target: Grid,
    /// Rows of the Smith transform U for invariant factors > 1.
    proj_rows: Vec<Vec<BigInt>>,
    proj_mods: Vec<u64>,
    /// Integer section matrix W with W[i][k] = a_k * U[i][k] / d_i.
    dual_rows: Vec<Vec<BigInt>>,
}

impl QuotientMap {
    pub fn source(&self) -> &Grid {
        &self.source
    }

    pub fn target(&self) -> &Grid {
        &self.target
    }

    /// Projection G -> G/H.
    pub fn project(&self, x: &[u64]) -> Vec<u64> {
        self.source.check(x);
        if self.proj_rows.is_empty() {
            // Trivial quotient: the target is the one-point grid [1].
            return self.target.zero();
        }
        self.proj_rows
            .iter()
            .zip(&self.proj_mods)
            .map(|(row, &d)| {
                let mut acc = BigInt::zero();
                for (c, &xk) in row.iter().zip(x) {
                    acc += c * BigInt::from(xk);
                }
                acc.mod_floor(&BigInt::from(d)).to_u64().unwrap()
            })
            .collect()
    }

    /// Dual embedding: the element s of G with
    /// chi_G(s, y) = chi_{G/H}(w, project(y)) for all y.
    pub fn dual_embed(&self, w: &[u64]) -> Vec<u64> {
        self.target.check(w);
        let r = self.source.coords();
        (0..r)
            .map(|k| {
                let mut acc = BigInt::zero();
                for (row, &wi) in self.dual_rows.iter().zip(w) {
                    acc += &row[k] * BigInt::from(wi);
                }
                let ak = BigInt::from(self.source.dims()[k]);
                acc.mod_floor(&ak).to_u64().unwrap()
            })
            .collect()
    }
}

/// Build the quotient map for G / H.
pub fn quotient_by(g: &Grid, h: &Subgroup) -> QuotientMap {
    assert_eq!(g.dims(), &h.dims[..]);
    let s = linalg::snf(&h.hnf);
    let r = g.coords();
    let mut proj_rows = Vec::new();
    let mut proj_mods = Vec::new();
    let mut dual_rows = Vec::new();
    for i in 0..r {
        let d = s.d.get(i, i).to_u64().expect("invariant factor fits u64");
        assert!(d >= 1, "subgroup lattice must have full rank");
        if d == 1 {
            continue;
        }
        let urow: Vec<BigInt> = (0..r).map(|k| s.u.get(i, k).clone()).collect();
        // a_k U[i][k] is divisible by d_i because diag(dims) Z^r lies in the
        // lattice, so U diag(dims) = D (V^-1 C) has integer rows over d_i.
        let wrow: Vec<BigInt> = (0..r)
            .map(|k| {
                let num = BigInt::from(g.dims()[k]) * &urow[k];
                let (q, rem) = num.div_mod_floor(s.d.get(i, i));
                assert!(rem.is_zero(), "dual section is not integral");
                q
            })
            .collect();
        proj_rows.push(urow);
        proj_mods.push(d);
        dual_rows.push(wrow);
    }
    let target = if proj_mods.is_empty() {
        Grid::new(&[1]).unwrap()
    } else {
        Grid::new(&proj_mods).unwrap()
    };
    QuotientMap { source: g.clone(), target, proj_rows, proj_mods, dual_rows }
}

/// Annihilator subgroup {y : pairing_exponent(s, y) = 0 for all s in S}.
pub fn annihilator(g: &Grid, s: &Subgroup) -> Subgroup {
    let n = g.exponent();
    let gens = s.generators();
    // Row per generator: sum_k (N/a_k) s_k y_k = 0 (mod N).
    let m = Mat::from_fn(gens.len(), g.coords(), |i, k| {
        BigInt::from((n / g.dims()[k]) % n) * BigInt::from(gens[i][k])
    });
    let ker = linalg::kernel_mod(&m, &BigInt::from(n));
    // Kernel columns are coordinate lifts; reduce into the grid.
    let elems: Vec<Vec<u64>> = (0..ker.cols())
        .map(|j| {
            (0..g.coords())
                .map(|k| {
                    ker.get(k, j).mod_floor(&BigInt::from(g.dims()[k])).to_u64().unwrap()
                })
                .collect()
        })
        .collect();
    subgroup_generated(g, &elems)
}

/// Greedy generator selection for the p-group quotient G / H.
///
/// Scans `candidates` in order and keeps an element exactly when its image in
/// the Frattini quotient (G/H) / p(G/H) is independent of the images already
/// kept. By Nakayama this is equivalent to growing the generated subgroup of
/// G/H itself, but it never overshoots the minimal generator count.
pub fn quotient_generators(
    g: &Grid,
    candidates: &[Vec<u64>],
    h: &Subgroup,
) -> Result<Vec<Vec<u64>>> {
    let qm = quotient_by(g, h);
    let mods = &qm.proj_mods;
    if mods.is_empty() {
        return Ok(Vec::new());
    }
    let p = smallest_prime_factor(mods[0]);
    for &d in mods {
        let mut v = d;
        while v % p == 0 {
            v /= p;
        }
        if v != 1 {
            return Err(Error::InvalidParameter(format!(
                "quotient is not a p-group: invariant factor {d}"
            )));
        }
    }
    let t = mods.len();
    // Echelon basis of kept Frattini images over F_p.
    let mut echelon: Vec<Vec<u64>> = Vec::new();
    let mut kept: Vec<Vec<u64>> = Vec::new();
    for cand in candidates {
        if kept.len() == t {
            break;
        }
        let mut img: Vec<u64> = qm.project(cand).iter().map(|&c| c % p).collect();
        for row in &echelon {
            let lead = row.iter().position(|&c| c != 0).unwrap();
            if img[lead] != 0 {
                let factor = (img[lead] * linalg::mod_inverse(&BigInt::from(row[lead]), &BigInt::from(p))
                    .unwrap()
                    .to_u64()
                    .unwrap())
                    % p;
                for (a, b) in img.iter_mut().zip(row) {
                    *a = (*a + p * p - factor * b % p) % p;
                }
            }
        }
        if img.iter().any(|&c| c != 0) {
            echelon.push(img);
            echelon.sort_by_key(|row| row.iter().position(|&c| c != 0).unwrap());
            kept.push(cand.clone());
        }
    }
    if kept.len() < t {
        return Err(Error::NotGenerating);
    }
    Ok(kept)
}

/// Coefficients c with sum_j c_j gens_j = x modulo the subgroup `h`,
/// reduced into [0, exponent). Errors if x is not in the span.
pub fn express_in_generators(
    g: &Grid,
    x: &[u64],
    gens: &[Vec<u64>],
    h: &Subgroup,
) -> Result<Vec<u64>> {
    g.check(x);
    let r = g.coords();
    let m = gens.len();
    let lat = &h.hnf;
    let a = Mat::from_fn(r, m + lat.cols(), |i, j| {
        if j < m {
            BigInt::from(gens[j][i])
        } else {
            lat.get(i, j - m).clone()
        }
    });
    let b: Vec<BigInt> = x.iter().map(|&c| BigInt::from(c)).collect();
    let sol = linalg::solve(&a, &b).ok_or(Error::NotInSpan)?;
    let n = BigInt::from(g.exponent());
    Ok(sol[..m].iter().map(|c| c.mod_floor(&n).to_u64().unwrap()).collect())
}

/// Canonical basis of {c in Z^m : sum_j c_j gens_j lies in h}, as the column
/// HNF of the preimage lattice (entries reduced, hence nonnegative).
pub fn kernel_basis(g: &Grid, gens: &[Vec<u64>], h: &Subgroup) -> Vec<Vec<u64>> {
    let n = BigInt::from(g.exponent());
    // Smith form of the subgroup lattice: c is in the kernel iff
    // U B c = 0 mod D, row-wise; scale row i by N/d_i to use one modulus.
    let s = linalg::snf(&h.hnf);
    let m = gens.len();
    let r = g.coords();
    let b = Mat::from_fn(r, m, |i, j| BigInt::from(gens[j][i]));
    let ub = s.u.mul(&b);
    let scaled = Mat::from_fn(r, m, |i, j| {
        let d = s.d.get(i, i);
        (&n / d) * ub.get(i, j)
    });
    let ker = linalg::kernel_mod(&scaled, &n);
    (0..ker.cols())
        .map(|j| (0..m).map(|i| ker.get(i, j).to_u64().expect("HNF entry in range")).collect())
        .collect()
}

/// Iterative extended gcd over a list: returns (g, c) with sum c_i v_i = g.
pub fn bezout(vals: &[u64]) -> (u64, Vec<i64>) {
    assert!(!vals.is_empty());
    let mut g = BigInt::from(vals[0]);
    let mut coefs = vec![BigInt::one()];
    for &v in &vals[1..] {
        let e = g.extended_gcd(&BigInt::from(v));
        for c in &mut coefs {
            *c *= &e.x;
        }
        coefs.push(e.y.clone());
        g = e.gcd;
    }
    (
        g.to_u64().expect("gcd fits u64"),
        coefs.iter().map(|c| c.to_i64().expect("coefficient fits i64")).collect(),
    )
}

/// Units modulo n in increasing order (unit group of Z/n).
pub fn units(n: u64) -> Vec<u64> {
    if n == 1 {
        return vec![0];
    }
    (1..n).filter(|&t| t.gcd(&n) == 1).collect()
}

fn smallest_prime_factor(n: u64) -> u64 {
    debug_assert!(n > 1);
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return d;
        }
        d += 1;
    }
    n
}

/// Prime factorization as (p, multiplicity) pairs, ascending.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            let mut m = 0;
            while n % d == 0 {
                n /= d;
                m += 1;
            }
            out.push((d, m));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}
