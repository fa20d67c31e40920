//! Exact integer matrix algebra: Smith and Hermite normal forms, determinants,
//! and linear solving over Z and Z/n.
//!
//! All routines are deterministic. Pivot selection always takes the entry of
//! minimal absolute value (ties broken by lowest row, then lowest column), so
//! repeated runs on the same input produce identical transforms.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Dense row-major matrix over Z.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl Mat {
    pub fn zero(rows: usize, cols: usize) -> Mat {
        Mat { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Mat {
        let mut m = Mat::zero(n, n);
        for i in 0..n {
            m.set(i, i, BigInt::one());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> BigInt) -> Mat {
        let mut m = Mat::zero(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn from_rows(rows: &[Vec<BigInt>]) -> Mat {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Mat { rows: r, cols: c, data: rows.concat() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    pub fn col(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Mat::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.cols, x.len(), "dimension mismatch");
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j) * &x[j]).sum())
            .collect()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row[a] -= q * row[b]
    fn row_sub(&mut self, a: usize, b: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let v = self.get(a, j) - q * self.get(b, j);
            self.set(a, j, v);
        }
    }

    /// col[a] -= q * col[b]
    fn col_sub(&mut self, a: usize, b: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for i in 0..self.rows {
            let v = self.get(i, a) - q * self.get(i, b);
            self.set(i, a, v);
        }
    }

    fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let v = -self.get(i, j);
            self.set(i, j, v);
        }
    }

    fn negate_col(&mut self, j: usize) {
        for i in 0..self.rows {
            let v = -self.get(i, j);
            self.set(i, j, v);
        }
    }

    /// Determinant by fraction-free Gaussian elimination (Bareiss).
    pub fn det(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "det of non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut a = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a.get(k, k).is_zero() {
                let swap = (k + 1..n).find(|&i| !a.get(i, k).is_zero());
                match swap {
                    Some(i) => {
                        a.swap_rows(k, i);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (a.get(i, j) * a.get(k, k) - a.get(i, k) * a.get(k, j)) / &prev;
                    a.set(i, j, v);
                }
                a.set(i, k, BigInt::zero());
            }
            prev = a.get(k, k).clone();
        }
        sign * a.get(n - 1, n - 1)
    }
}

/// Smith normal form decomposition: `u * a * v = d` with `u`, `v` unimodular
/// and `d` diagonal with d[0] | d[1] | ... (nonnegative diagonal).
#[derive(Debug, Clone)]
pub struct Snf {
    pub u: Mat,
    pub d: Mat,
    pub v: Mat,
}

impl Snf {
    /// Diagonal entries, padded with zeros up to min(rows, cols).
    pub fn diag(&self) -> Vec<BigInt> {
        let k = self.d.rows().min(self.d.cols());
        (0..k).map(|i| self.d.get(i, i).clone()).collect()
    }
}

/// Smallest nonzero entry of `d[t.., t..]` by |value|, ties by (row, col).
fn min_pivot(d: &Mat, t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for i in t..d.rows() {
        for j in t..d.cols() {
            let v = d.get(i, j);
            if v.is_zero() {
                continue;
            }
            match best {
                None => best = Some((i, j)),
                Some((bi, bj)) => {
                    if v.abs() < d.get(bi, bj).abs() {
                        best = Some((i, j));
                    }
                }
            }
        }
    }
    best
}

/// Smith normal form of an arbitrary integer matrix.
pub fn snf(a: &Mat) -> Snf {
    let (m, n) = (a.rows(), a.cols());
    let mut d = a.clone();
    let mut u = Mat::identity(m);
    let mut v = Mat::identity(n);
    let k = m.min(n);
    let mut t = 0;
    while t < k {
        let Some((pi, pj)) = min_pivot(&d, t) else { break };
        d.swap_rows(t, pi);
        u.swap_rows(t, pi);
        d.swap_cols(t, pj);
        v.swap_cols(t, pj);
        // Clear row t and column t; each reduction can revive the other,
        // so loop until both are clear.
        loop {
            let mut dirty = false;
            for i in t + 1..m {
                if !d.get(i, t).is_zero() {
                    let (q, r) = d.get(i, t).div_mod_floor(d.get(t, t));
                    d.row_sub(i, t, &q);
                    u.row_sub(i, t, &q);
                    if !r.is_zero() {
                        // Remainder is smaller than the pivot: promote it.
                        d.swap_rows(t, i);
                        u.swap_rows(t, i);
                        dirty = true;
                    }
                }
            }
            for j in t + 1..n {
                if !d.get(t, j).is_zero() {
                    let (q, r) = d.get(t, j).div_mod_floor(d.get(t, t));
                    d.col_sub(j, t, &q);
                    v.col_sub(j, t, &q);
                    if !r.is_zero() {
                        d.swap_cols(t, j);
                        v.swap_cols(t, j);
                        dirty = true;
                    }
                }
            }
            if !dirty {
                break;
            }
        }
        if d.get(t, t).is_negative() {
            d.negate_row(t);
            u.negate_row(t);
        }
        t += 1;
    }
    // Enforce the divisibility chain d[i] | d[i+1].
    let mut i = 0;
    while i + 1 < k {
        let di = d.get(i, i).clone();
        if di.is_zero() {
            break;
        }
        let bad = (i + 1..k).find(|&j| !(d.get(j, j) % &di).is_zero());
        if let Some(j) = bad {
            // Fold d[j] into column i and re-reduce the block from i.
            let one = BigInt::one();
            d.col_sub(i, j, &-&one);
            v.col_sub(i, j, &-&one);
            let mut t = i;
            while t < k {
                let Some((pi, pj)) = min_pivot(&d, t) else { break };
                d.swap_rows(t, pi);
                u.swap_rows(t, pi);
                d.swap_cols(t, pj);
                v.swap_cols(t, pj);
                loop {
                    let mut dirty = false;
                    for r in t + 1..m {
                        if !d.get(r, t).is_zero() {
                            let (q, rem) = d.get(r, t).div_mod_floor(d.get(t, t));
                            d.row_sub(r, t, &q);
                            u.row_sub(r, t, &q);
                            if !rem.is_zero() {
                                d.swap_rows(t, r);
                                u.swap_rows(t, r);
                                dirty = true;
                            }
                        }
                    }
                    for c in t + 1..n {
                        if !d.get(t, c).is_zero() {
                            let (q, rem) = d.get(t, c).div_mod_floor(d.get(t, t));
                            d.col_sub(c, t, &q);
                            v.col_sub(c, t, &q);
                            if !rem.is_zero() {
                                d.swap_cols(t, c);
                                v.swap_cols(t, c);
                                dirty = true;
                            }
                        }
                    }
                    if !dirty {
                        break;
                    }
                }
                if d.get(t, t).is_negative() {
                    d.negate_row(t);
                    u.negate_row(t);
                }
                t += 1;
            }
        } else {
            i += 1;
        }
    }
    Snf { u, d, v }
}

/// Column-style Hermite normal form: returns `h` with the same column span
/// (as a lattice) as `a`, in canonical lower-echelon shape. Pivot rows are
/// strictly increasing by column, pivots are positive, and every entry to the
/// left of a pivot in its row lies in [0, pivot). Zero columns are dropped.
pub fn hnf_cols(a: &Mat) -> Mat {
    let (m, n) = (a.rows(), a.cols());
    let mut w = a.clone();
    let mut piv_col = 0usize;
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    for row in 0..m {
        if piv_col >= n {
            break;
        }
        // Euclidean elimination across columns piv_col..n on this row.
        loop {
            let mut best: Option<usize> = None;
            for j in piv_col..n {
                if w.get(row, j).is_zero() {
                    continue;
                }
                match best {
                    None => best = Some(j),
                    Some(b) => {
                        if w.get(row, j).abs() < w.get(row, b).abs() {
                            best = Some(j);
                        }
                    }
                }
            }
            let Some(b) = best else { break };
            w.swap_cols(piv_col, b);
            let mut live = false;
            for j in piv_col + 1..n {
                if !w.get(row, j).is_zero() {
                    let q = w.get(row, j).div_floor(w.get(row, piv_col));
                    w.col_sub(j, piv_col, &q);
                    if !w.get(row, j).is_zero() {
                        live = true;
                    }
                }
            }
            if !live {
                break;
            }
        }
        if w.get(row, piv_col).is_zero() {
            continue;
        }
        if w.get(row, piv_col).is_negative() {
            w.negate_col(piv_col);
        }
        pivots.push((row, piv_col));
        piv_col += 1;
    }
    // Reduce entries left of each pivot in its row into [0, pivot).
    for &(row, col) in &pivots {
        for j in 0..col {
            let q = w.get(row, j).div_floor(w.get(row, col));
            w.col_sub(j, col, &q);
        }
    }
    // Keep only pivot columns (the rest are zero).
    let cols: Vec<usize> = pivots.iter().map(|&(_, c)| c).collect();
    Mat::from_fn(m, cols.len(), |i, j| w.get(i, cols[j]).clone())
}

/// Is `x` in the lattice spanned by the columns of the column-HNF matrix `h`?
/// If so, returns the coefficient vector.
pub fn hnf_solve(h: &Mat, x: &[BigInt]) -> Option<Vec<BigInt>> {
    assert_eq!(h.rows(), x.len());
    let mut rem: Vec<BigInt> = x.to_vec();
    let mut coef = vec![BigInt::zero(); h.cols()];
    let mut row = 0usize;
    for j in 0..h.cols() {
        while row < h.rows() && h.get(row, j).is_zero() {
            if !rem[row].is_zero() {
                return None;
            }
            row += 1;
        }
        assert!(row < h.rows(), "HNF column without pivot");
        let (q, r) = rem[row].div_mod_floor(h.get(row, j));
        if !r.is_zero() {
            return None;
        }
        for i in row..h.rows() {
            rem[i] -= &q * h.get(i, j);
        }
        coef[j] = q;
        row += 1;
    }
    if rem.iter().any(|v| !v.is_zero()) {
        return None;
    }
    Some(coef)
}

/// Particular solution of `a x = b` over Z, if any.
pub fn solve(a: &Mat, b: &[BigInt]) -> Option<Vec<BigInt>> {
    assert_eq!(a.rows(), b.len());
    let s = snf(a);
    let ub = s.u.mul_vec(b);
    let k = a.rows().min(a.cols());
    let mut z = vec![BigInt::zero(); a.cols()];
    for i in 0..a.rows() {
        let di = if i < k { s.d.get(i, i).clone() } else { BigInt::zero() };
        if di.is_zero() {
            if !ub[i].is_zero() {
                return None;
            }
        } else {
            let (q, r) = ub[i].div_mod_floor(&di);
            if !r.is_zero() {
                return None;
            }
            z[i] = q;
        }
    }
    Some(s.v.mul_vec(&z))
}

/// Particular solution of `a x = b (mod n)` with entries reduced to [0, n).
/// Deterministic: the construction through the Smith form always picks the
/// smallest nonnegative residue for each pivot variable and zero for free
/// variables.
pub fn solve_mod(a: &Mat, b: &[BigInt], n: &BigInt) -> Option<Vec<BigInt>> {
    assert_eq!(a.rows(), b.len());
    assert!(n.is_positive());
    let s = snf(a);
    let ub = s.u.mul_vec(b);
    let k = a.rows().min(a.cols());
    let mut z = vec![BigInt::zero(); a.cols()];
    for i in 0..a.rows() {
        let di = if i < k { s.d.get(i, i).clone() } else { BigInt::zero() };
        // Solve di * z_i = ub_i (mod n).
        let g = di.gcd(n);
        let rhs = ub[i].mod_floor(n);
        if g.is_zero() {
            // di = 0 and gcd(0, n) = n, unreachable; kept for clarity.
            unreachable!();
        }
        let (q, r) = rhs.div_mod_floor(&g);
        if !r.is_zero() {
            return None;
        }
        if i < k {
            let nn = n / &g;
            if nn.is_one() {
                // Any residue works; pick 0.
                continue;
            }
            let dg = (&di / &g).mod_floor(&nn);
            let inv = mod_inverse(&dg, &nn).expect("di/g is a unit mod n/g");
            z[i] = (q * inv).mod_floor(&nn);
        }
        // Rows past the rank have di = 0, g = n: solvable iff n | ub_i,
        // already checked; no variable to set.
    }
    let x = s.v.mul_vec(&z);
    Some(x.into_iter().map(|v| v.mod_floor(n)).collect())
}

/// Canonical basis (column HNF) of `{x : a x = 0 (mod n)}` viewed as a
/// sublattice of Z^cols (always contains n Z^cols).
pub fn kernel_mod(a: &Mat, n: &BigInt) -> Mat {
    assert!(n.is_positive());
    let s = snf(a);
    let cols = a.cols();
    let k = a.rows().min(cols);
    // x = V z with d_i z_i = 0 (mod n), so z_i runs over (n / gcd(d_i, n)) Z.
    let mut gen = Mat::zero(cols, cols);
    for i in 0..cols {
        let di = if i < k { s.d.get(i, i).clone() } else { BigInt::zero() };
        let step = n / di.gcd(n);
        for r in 0..cols {
            gen.set(r, i, s.v.get(r, i) * &step);
        }
    }
    // Adjoin n Z^cols so the result is the full preimage lattice.
    let mut ext = Mat::zero(cols, 2 * cols);
    for i in 0..cols {
        for j in 0..cols {
            ext.set(i, j, gen.get(i, j).clone());
        }
        ext.set(i, cols + i, n.clone());
    }
    hnf_cols(&ext)
}

/// Inverse of `a` modulo `n`, when gcd(a, n) = 1.
pub fn mod_inverse(a: &BigInt, n: &BigInt) -> Option<BigInt> {
    let a = a.mod_floor(n);
    let e = a.extended_gcd(n);
    if e.gcd.is_one() {
        Some(e.x.mod_floor(n))
    } else {
        None
    }
}
