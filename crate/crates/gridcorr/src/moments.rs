//! Autocorrelations of a grid function, their table form, and the
//! transformed-moment oracle that the reconstruction pipeline queries.
//!
//! The order-n autocorrelation at shifts (x_1, ..., x_(n-1)) is
//! sum_y f(y) f(y + x_1) ... f(y + x_(n-1)). Its transform side: for a
//! zero-sum sequence of frequencies, the transformed moment is the product
//! of Fourier coefficients at the nonzero entries, with the all-zero
//! sequence standing for the order-1 moment F(0). Zero entries carry no
//! information (they would multiply by the constant F(0)), so sequence
//! order counts nonzero entries only.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use crate::cyclotomic::{CycCtx, CycNum};
use crate::error::{Error, Result};
use crate::groups::Grid;
use crate::spectral::{dft, RatFn, SpecFn};

/// Exact order-(shifts.len() + 1) autocorrelation of f.
pub fn autocorr(f: &RatFn, shifts: &[Vec<u64>]) -> BigRational {
    let g = f.grid();
    let mut acc = BigRational::zero();
    for i in 0..g.order() as usize {
        let y = g.element(i);
        let mut term = f.values()[i].clone();
        if term.is_zero() {
            continue;
        }
        for s in shifts {
            let v = f.value(&g.add(&y, s));
            if v.is_zero() {
                term = BigRational::zero();
                break;
            }
            term *= v;
        }
        acc += term;
    }
    acc
}

/// Sparse autocorrelation tables for all orders 1..=max_order.
/// Keys are the concatenated coordinates of the n-1 shift elements;
/// absent keys mean the value is zero.
#[derive(Debug, Clone)]
pub struct MomentTable {
    grid: Grid,
    max_order: usize,
    tables: Vec<HashMap<Vec<u64>, BigRational>>,
}

impl MomentTable {
    pub fn compute(f: &RatFn, max_order: usize) -> MomentTable {
        assert!(max_order >= 1);
        let g = f.grid().clone();
        let order = g.order() as usize;
        let mut tables = Vec::with_capacity(max_order);
        for n in 1..=max_order {
            let shifts_len = n - 1;
            let mut map = HashMap::new();
            let total = order.pow(shifts_len as u32);
            for mut idx in 0..total {
                let mut shifts = Vec::with_capacity(shifts_len);
                for _ in 0..shifts_len {
                    shifts.push(g.element(idx % order));
                    idx /= order;
                }
                shifts.reverse();
                let v = autocorr(f, &shifts);
                if !v.is_zero() {
                    map.insert(flatten(&shifts), v);
                }
            }
            tables.push(map);
        }
        MomentTable { grid: g, max_order, tables }
    }

    /// Build from explicit entries (used by the file reader). Entries with
    /// zero values are dropped; duplicate keys are rejected.
    pub fn from_entries(
        grid: Grid,
        max_order: usize,
        entries: Vec<(Vec<Vec<u64>>, BigRational)>,
    ) -> Result<MomentTable> {
        assert!(max_order >= 1);
        let mut tables: Vec<HashMap<Vec<u64>, BigRational>> =
            (0..max_order).map(|_| HashMap::new()).collect();
        for (shifts, v) in entries {
            let n = shifts.len() + 1;
            if n > max_order {
                return Err(Error::InvalidParameter(format!(
                    "entry of order {n} exceeds max_order {max_order}"
                )));
            }
            for s in &shifts {
                if !grid.contains(s) {
                    return Err(Error::InvalidElement(format!("{s:?}")));
                }
            }
            if v.is_zero() {
                continue;
            }
            let key = flatten(&shifts);
            if tables[n - 1].insert(key, v).is_some() {
                return Err(Error::InvalidParameter("duplicate table entry".into()));
            }
        }
        Ok(MomentTable { grid, max_order, tables })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    /// Value at a shift tuple (zero when absent).
    pub fn get(&self, shifts: &[Vec<u64>]) -> Result<BigRational> {
        let n = shifts.len() + 1;
        if n > self.max_order {
            return Err(Error::MissingTableOrder(n));
        }
        Ok(self.tables[n - 1].get(&flatten(shifts)).cloned().unwrap_or_else(BigRational::zero))
    }

    /// Nonzero entries of the order-n table in lexicographic key order.
    pub fn entries(&self, n: usize) -> Result<Vec<(Vec<Vec<u64>>, BigRational)>> {
        if n < 1 || n > self.max_order {
            return Err(Error::MissingTableOrder(n));
        }
        let mut items: Vec<_> = self.tables[n - 1].iter().collect();
        items.sort_by(|a, b| a.0.cmp(b.0));
        Ok(items
            .into_iter()
            .map(|(k, v)| (unflatten(&self.grid, k, n - 1), v.clone()))
            .collect())
    }
}

fn flatten(shifts: &[Vec<u64>]) -> Vec<u64> {
    shifts.concat()
}

fn unflatten(g: &Grid, key: &[u64], count: usize) -> Vec<Vec<u64>> {
    let r = g.coords();
    assert_eq!(key.len(), r * count);
    (0..count).map(|i| key[i * r..(i + 1) * r].to_vec()).collect()
}

/// A frequency sequence summing to zero on the grid. The empty and all-zero
/// sequences are allowed and stand for the order-1 moment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZeroSumSeq {
    entries: Vec<Vec<u64>>,
    order: usize,
}

impl ZeroSumSeq {
    pub fn new(g: &Grid, entries: Vec<Vec<u64>>) -> Result<ZeroSumSeq> {
        let mut sum = g.zero();
        for e in &entries {
            if !g.contains(e) {
                return Err(Error::InvalidElement(format!("{e:?}")));
            }
            sum = g.add(&sum, e);
        }
        if !g.is_zero(&sum) {
            return Err(Error::NotZeroSum);
        }
        let nonzero = entries.iter().filter(|e| !g.is_zero(e)).count();
        Ok(ZeroSumSeq { entries, order: nonzero.max(1) })
    }

    /// Convenience constructor from signed coordinate vectors.
    pub fn from_signed(g: &Grid, entries: &[Vec<i64>]) -> Result<ZeroSumSeq> {
        ZeroSumSeq::new(g, entries.iter().map(|e| g.reduce(e)).collect())
    }

    pub fn entries(&self) -> &[Vec<u64>] {
        &self.entries
    }

    /// Number of nonzero entries, with a floor of 1 (the all-zero sequence
    /// still consumes an order-1 lookup).
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn nonzero_entries<'a>(&'a self, g: &'a Grid) -> impl Iterator<Item = &'a Vec<u64>> + 'a {
        self.entries.iter().filter(move |e| !g.is_zero(e))
    }
}

/// Transformed moment from a known spectrum: the product of F at the
/// nonzero entries (F(0) itself for an all-zero sequence).
pub fn transformed_moment_spec(fhat: &SpecFn, seq: &ZeroSumSeq) -> CycNum {
    let g = fhat.grid();
    let ctx = fhat.ctx();
    let nonzero: Vec<_> = seq.nonzero_entries(g).collect();
    if nonzero.is_empty() {
        return fhat.value(&g.zero()).clone();
    }
    let mut acc = ctx.one();
    for e in nonzero {
        let v = fhat.value(e);
        if v.is_zero() {
            return ctx.zero();
        }
        acc = ctx.mul(&acc, v);
    }
    acc
}

/// Transformed moment from autocorrelation tables:
/// sum over stored shift tuples x of M_m(f; x) * prod_j conj(chi(x_j, e_j)),
/// where (e_1, ..., e_m) are the nonzero entries of the sequence. Needs the
/// order-m table.
pub fn transformed_moment_table(
    table: &MomentTable,
    ctx: &Arc<CycCtx>,
    seq: &ZeroSumSeq,
) -> Result<CycNum> {
    let g = table.grid();
    let n = g.exponent();
    assert_eq!(ctx.conductor(), n, "context must match the grid exponent");
    let nonzero: Vec<&Vec<u64>> = seq.nonzero_entries(g).collect();
    let m = nonzero.len();
    if m == 0 {
        let v = table.get(&[])?;
        return Ok(ctx.from_rational(&v));
    }
    if m > table.max_order() {
        return Err(Error::MissingTableOrder(m));
    }
    let mut sums = vec![BigRational::zero(); n as usize];
    for (key, v) in &table.tables[m - 1] {
        let shifts = unflatten(g, key, m - 1);
        let mut e: u64 = 0;
        for (x, ent) in shifts.iter().zip(&nonzero) {
            e = (e + g.pairing_exponent(x, ent)) % n;
        }
        // conj(chi) contributes xi^(-e).
        sums[((n - e) % n) as usize] += v;
    }
    Ok(ctx.combine_residues(&sums))
}

/// Per-order query counts and the running maximum order.
#[derive(Debug, Clone, Default)]
pub struct OracleStats {
    pub queries: u64,
    pub max_order: usize,
    pub per_order: BTreeMap<usize, u64>,
}

/// Anything that can answer transformed-moment queries over a fixed grid.
/// The context conductor must equal the grid exponent.
pub trait MomentSource {
    fn grid(&self) -> &Grid;
    fn ctx(&self) -> &Arc<CycCtx>;
    fn query(&self, seq: &ZeroSumSeq) -> Result<CycNum>;
}

enum Source {
    /// Spectrum of the denominator-cleared data, with the clearing factor.
    Hidden { fhat: SpecFn, scale: BigInt },
    /// Tables of the denominator-cleared data, with the clearing factor.
    Table { table: MomentTable, scale: BigInt },
}

/// Serves transformed moments of a fixed data set, tracking the order of
/// every query and enforcing an optional cap.
///
/// Both constructors clear denominators first: the oracle answers for
/// `scale() * f`, and `scale()` tells the consumer what to divide out of a
/// reconstruction. Clearing is needed because root recovery relies on
/// integral spectra. For stored tables the clearing factor is the lcm of
/// the entry denominators, since scaling the data by s multiplies every
/// order-n moment by s^n.
pub struct MomentOracle {
    grid: Grid,
    ctx: Arc<CycCtx>,
    source: Source,
    cap: Option<usize>,
    stats: RefCell<OracleStats>,
}

impl MomentOracle {
    /// Oracle over hidden data: precomputes the exact spectrum of the
    /// denominator-cleared function.
    pub fn hidden(f: &RatFn) -> MomentOracle {
        let g = f.grid().clone();
        let ctx = Arc::new(CycCtx::new(g.exponent()));
        let scale = f
            .values()
            .iter()
            .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
        let scaled = RatFn::new(
            g.clone(),
            f.values().iter().map(|v| v * BigRational::from_integer(scale.clone())).collect(),
        )
        .expect("same grid");
        let fhat = dft(&scaled, ctx.clone());
        MomentOracle {
            grid: g,
            ctx,
            source: Source::Hidden { fhat, scale },
            cap: None,
            stats: RefCell::new(OracleStats::default()),
        }
    }

    /// Oracle over explicit autocorrelation tables. Denominators are
    /// cleared the same way as for hidden data: scaling the data by s
    /// multiplies an order-n moment by s^n, and s is taken as the lcm of
    /// the stored denominators, which the scaled data's moments then
    /// avoid. The answers are for `scale() * f`.
    pub fn from_table(table: MomentTable) -> MomentOracle {
        let g = table.grid().clone();
        let ctx = Arc::new(CycCtx::new(g.exponent()));
        let mut scale = BigInt::one();
        for n in 1..=table.max_order() {
            for (_, v) in table.entries(n).expect("order is within the table") {
                scale = scale.lcm(v.denom());
            }
        }
        let table = if scale.is_one() {
            table
        } else {
            let mut entries = Vec::new();
            let mut power = BigRational::from_integer(BigInt::one());
            let factor = BigRational::from_integer(scale.clone());
            for n in 1..=table.max_order() {
                power *= &factor;
                for (shift, v) in table.entries(n).expect("order is within the table") {
                    entries.push((shift, v * &power));
                }
            }
            MomentTable::from_entries(g.clone(), table.max_order(), entries)
                .expect("rescaling preserves validity")
        };
        MomentOracle {
            grid: g,
            ctx,
            source: Source::Table { table, scale },
            cap: None,
            stats: RefCell::new(OracleStats::default()),
        }
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = Some(cap);
        self
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn ctx(&self) -> &Arc<CycCtx> {
        &self.ctx
    }

    /// Denominator-clearing factor; the oracle answers for this multiple
    /// of the underlying data.
    pub fn scale(&self) -> BigInt {
        match &self.source {
            Source::Hidden { scale, .. } | Source::Table { scale, .. } => scale.clone(),
        }
    }

    /// Highest order answerable, if bounded (table data only).
    pub fn available_order(&self) -> Option<usize> {
        match &self.source {
            Source::Hidden { .. } => None,
            Source::Table { table, .. } => Some(table.max_order()),
        }
    }

    pub fn query(&self, seq: &ZeroSumSeq) -> Result<CycNum> {
        let order = seq.order();
        if let Some(cap) = self.cap {
            if order > cap {
                return Err(Error::OrderExceeded { order, cap });
            }
        }
        let value = match &self.source {
            Source::Hidden { fhat, .. } => transformed_moment_spec(fhat, seq),
            Source::Table { table, .. } => transformed_moment_table(table, &self.ctx, seq)?,
        };
        let mut st = self.stats.borrow_mut();
        st.queries += 1;
        st.max_order = st.max_order.max(order);
        *st.per_order.entry(order).or_insert(0) += 1;
        Ok(value)
    }

    pub fn stats(&self) -> OracleStats {
        self.stats.borrow().clone()
    }
}

impl MomentSource for MomentOracle {
    fn grid(&self) -> &Grid {
        MomentOracle::grid(self)
    }

    fn ctx(&self) -> &Arc<CycCtx> {
        MomentOracle::ctx(self)
    }

    fn query(&self, seq: &ZeroSumSeq) -> Result<CycNum> {
        MomentOracle::query(self, seq)
    }
}

/// Check the inversion identity relating an autocorrelation to a sum of
/// spectrum products over zero-sum frequency tuples:
/// |G|^(n-1) M_n(f; x) = sum over (w_1..w_(n-1)) of
///     F(-sum w_j) prod_j F(w_j) chi(x_j, w_j).
/// Both sides are computed exactly.
pub fn autocorr_inversion_check(f: &RatFn, fhat: &SpecFn, shifts: &[Vec<u64>]) -> bool {
    let g = f.grid();
    let ctx = fhat.ctx();
    let n = shifts.len() + 1;
    let order = g.order() as usize;
    let lift = (ctx.conductor() / g.exponent()) as i64;
    if shifts.is_empty() {
        // No shifts: the identity degenerates to M_1 = F(0).
        let lhs = ctx.from_rational(&autocorr(f, shifts));
        return lhs == *fhat.value(&g.zero());
    }
    // Iterated convolution of g_j(w) = F(w) chi(x_j, w).
    let mut conv: Vec<CycNum> = (0..order)
        .map(|i| {
            let w = g.element(i);
            let e = g.pairing_exponent(&shifts[0], &w) as i64 * lift;
            ctx.mul(fhat.value(&w), &ctx.root_of_unity(e))
        })
        .collect();
    for xj in &shifts[1..] {
        let gj: Vec<CycNum> = (0..order)
            .map(|i| {
                let w = g.element(i);
                let e = g.pairing_exponent(xj, &w) as i64 * lift;
                ctx.mul(fhat.value(&w), &ctx.root_of_unity(e))
            })
            .collect();
        let mut next = vec![ctx.zero(); order];
        for a in 0..order {
            if conv[a].is_zero() {
                continue;
            }
            let ea = g.element(a);
            for (b, gb) in gj.iter().enumerate() {
                if gb.is_zero() {
                    continue;
                }
                let s = g.index_of(&g.add(&ea, &g.element(b)));
                next[s] = ctx.add(&next[s], &ctx.mul(&conv[a], gb));
            }
        }
        conv = next;
    }
    let mut rhs = ctx.zero();
    for (s, c) in conv.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let minus = g.neg(&g.element(s));
        rhs = ctx.add(&rhs, &ctx.mul(c, fhat.value(&minus)));
    }
    let m = autocorr(f, shifts);
    let scale = BigRational::from_integer(BigInt::from(g.order()).pow((n - 1) as u32));
    let lhs = ctx.from_rational(&(m * scale));
    lhs == rhs
}
