//! Reconstruction of gridded data from transformed moments of bounded order.
//!
//! The pipeline: scan the spectrum support with order-2 queries, recover a
//! high power of the spectrum at quotient generators through a doubling
//! ladder of moment ratios, extract the actual values by lattice
//! recognition, twist the per-generator phase ambiguities into consistency
//! via kernel relations, and assemble the full spectrum from unit-indexed
//! queries. Inverting the assembled spectrum yields the data up to a grid
//! translation. Supports that only span a subgroup are handled by recursing
//! on the quotient grid and pulling the result back.

use std::collections::HashMap;
use std::sync::Arc;

use itertools::Itertools;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::cyclotomic::{CycCtx, CycNum};
use crate::error::{Error, Result};
use crate::groups::{
    annihilator, express_in_generators, factorize, kernel_basis, quotient_by,
    quotient_generators, subgroup_generated, torsion_subgroup, units, Grid, QuotientMap,
    Subgroup,
};
use crate::lattice::{lll_reduce, NearestPlane};
use crate::linalg::{self, Mat};
use crate::moments::{MomentOracle, MomentSource, ZeroSumSeq};
use crate::numeric::{Complex, FixCtx};
use crate::spectral::{idft_rational, RatFn, SpecFn};

/// Tuning knobs for value recovery.
#[derive(Debug, Clone)]
pub struct ReconConfig {
    /// Working precisions (bits) tried in order by the numeric stage of
    /// root extraction; each level escalates to the next on detected
    /// cancellation.
    pub precision_schedule: Vec<u32>,
    /// Scale (bits) of the recognition lattice. Kept independent of the
    /// working precision: candidate separation depends on the root index,
    /// not on how large the recovered power is.
    pub lattice_bits: u32,
    /// How many of the best-ranked root candidates get the exact check per
    /// precision level.
    pub max_exact_verifies: usize,
    /// Refuse power-recovery exponents of more bits than this; the ladder
    /// length and the verification cost both grow with the exponent.
    pub max_exponent_bits: u32,
}

impl Default for ReconConfig {
    fn default() -> Self {
        ReconConfig {
            precision_schedule: vec![256, 512, 1024, 2048, 4096],
            lattice_bits: 192,
            max_exact_verifies: 8,
            max_exponent_bits: 24,
        }
    }
}

/// A recovered power of the spectrum at one point.
#[derive(Debug, Clone)]
pub struct PowerDatum {
    pub point: Vec<u64>,
    pub exponent: u64,
    pub power: CycNum,
}

/// Upper bound on the moment order the reconstruction pipeline may query,
/// from grid shape alone: 2r + 2 for odd exponent, 3r + 3 for even, with r
/// the number of invariant factors.
pub fn required_order_cap(g: &Grid) -> usize {
    let r = g.rank();
    if g.exponent() % 2 == 1 {
        2 * r + 2
    } else {
        3 * r + 3
    }
}

/// Write a residue c mod n as a sum of two units (always possible for odd
/// n, and for even c when n is even) or three units (n even, c odd), using
/// the first decomposition in ascending search order. Unused slots are 0;
/// n = 1 yields (0, 0, 0).
pub fn unital_decomposition(n: u64, c: u64) -> (u64, u64, u64) {
    assert!(n > 0);
    if n == 1 {
        return (0, 0, 0);
    }
    let unit = |v: u64| v != 0 && v.gcd(&n) == 1;
    let c = c % n;
    if n % 2 == 1 || c % 2 == 0 {
        for u in 1..n {
            if !unit(u) {
                continue;
            }
            let v = (c + n - u) % n;
            if unit(v) {
                return (u, v, 0);
            }
        }
    } else {
        for u in 1..n {
            if !unit(u) {
                continue;
            }
            for v in u..n {
                if !unit(v) {
                    continue;
                }
                let w = (c + 2 * n - u - v) % n;
                if unit(w) {
                    return (u, v, w);
                }
            }
        }
    }
    unreachable!("every residue mod {n} splits into at most three units")
}

/// Moment-entry expansion of a residue d mod n: nothing for 0, the residue
/// itself when it is a unit, otherwise its unital decomposition.
pub fn unit_entries(n: u64, d: u64) -> Vec<u64> {
    let d = d % n;
    if d == 0 {
        return Vec::new();
    }
    if d.gcd(&n) == 1 {
        return vec![d];
    }
    let (u, v, w) = unital_decomposition(n, d);
    if w == 0 {
        vec![u, v]
    } else {
        vec![u, v, w]
    }
}

fn pow2_mod(k: u64, n: u64) -> u64 {
    let n = n as u128;
    let mut r = 1u128 % n;
    for _ in 0..k {
        r = (r * 2) % n;
    }
    r as u64
}

/// Multiplicative order of 2 modulo odd n (1 for n = 1).
fn mult_order_of_two(n: u64) -> u64 {
    assert!(n % 2 == 1, "2 must be a unit");
    if n == 1 {
        return 1;
    }
    let n = n as u128;
    let mut r = 2u128 % n;
    let mut l = 1u64;
    while r != 1 {
        r = (r * 2) % n;
        l += 1;
    }
    l
}

/// Recover F(x)^M for M = 2^l - 1, l the order of 2 modulo the odd grid
/// exponent, with queries of order at most 3. Each ratio of a third to a
/// second moment equals F(2^k x)^2 / F(2^(k+1) x); squaring the running
/// product before folding in the next ratio telescopes everything except
/// the power at x itself, since 2^l x = x.
pub fn power_odd(src: &dyn MomentSource, x: &[u64], cfg: &ReconConfig) -> Result<PowerDatum> {
    let g = src.grid();
    let ctx = src.ctx();
    let n = g.exponent();
    assert!(n % 2 == 1, "odd-exponent ladder on even exponent");
    let l = mult_order_of_two(n);
    if l >= 64 || l as u32 > cfg.max_exponent_bits {
        return Err(Error::ExponentBudget(l.min(u32::MAX as u64) as u32));
    }
    let m = (1u64 << l) - 1;
    if g.is_zero(x) {
        // The ladder degenerates at the origin; the order-1 moment is the
        // value itself.
        let m1 = src.query(&ZeroSumSeq::new(g, vec![g.zero()])?)?;
        return Ok(PowerDatum { point: x.to_vec(), exponent: m, power: ctx.pow(&m1, m) });
    }
    let mut acc: Option<CycNum> = None;
    for k in 0..l {
        let xk = g.scale(pow2_mod(k, n) as i64, x);
        let xk1 = g.scale(pow2_mod(k + 1, n) as i64, x);
        let third =
            src.query(&ZeroSumSeq::new(g, vec![xk.clone(), xk, g.neg(&xk1)])?)?;
        let second = src.query(&ZeroSumSeq::new(g, vec![xk1.clone(), g.neg(&xk1)])?)?;
        let ratio = ctx.div(&third, &second)?;
        acc = Some(match acc {
            None => ratio,
            Some(p) => ctx.mul(&ctx.mul(&p, &p), &ratio),
        });
    }
    Ok(PowerDatum { point: x.to_vec(), exponent: m, power: acc.expect("l >= 1") })
}

/// Even-exponent analogue: recover F(x)^M for M = 2^m (2^l - 1), where 2^m
/// exactly divides the exponent and l is the order of 2 modulo the odd
/// part. Powers of 2 are even residues, so each 2^k splits into a unital
/// pair (u_k, v_k), and ratios of sixth to fourth moments telescope over
/// F_k = F(u_k x) F(v_k x). The leftover boundary terms cancel between two
/// ladders of different lengths because F_k is periodic in k beyond m, and
/// the base term is F_1 = F(x)^2 since 2 always splits as 1 + 1.
pub fn power_even(src: &dyn MomentSource, x: &[u64], cfg: &ReconConfig) -> Result<PowerDatum> {
    let g = src.grid();
    let ctx = src.ctx();
    let n = g.exponent();
    assert!(n % 2 == 0, "even-exponent ladder on odd exponent");
    let v2 = n.trailing_zeros() as u64;
    let n_odd = n >> v2;
    let l = mult_order_of_two(n_odd);
    let total = v2 + l;
    if total >= 64 || total as u32 > cfg.max_exponent_bits {
        return Err(Error::ExponentBudget(total.min(u32::MAX as u64) as u32));
    }
    let m = (1u64 << v2) * ((1u64 << l) - 1);
    if g.is_zero(x) {
        let m1 = src.query(&ZeroSumSeq::new(g, vec![g.zero()])?)?;
        return Ok(PowerDatum { point: x.to_vec(), exponent: m, power: ctx.pow(&m1, m) });
    }
    let pair = |k: u64| {
        let (u, v, w) = unital_decomposition(n, pow2_mod(k, n));
        debug_assert_eq!(w, 0, "powers of two are even residues");
        (u, v)
    };
    let hi = l + v2 - 1;
    let mut ratios = Vec::with_capacity(hi as usize);
    for k in 1..=hi {
        let (uk, vk) = pair(k);
        let (u1, v1) = pair(k + 1);
        let ukx = g.scale(uk as i64, x);
        let vkx = g.scale(vk as i64, x);
        let u1x = g.scale(u1 as i64, x);
        let v1x = g.scale(v1 as i64, x);
        let sixth = src.query(&ZeroSumSeq::new(
            g,
            vec![ukx.clone(), vkx.clone(), ukx, vkx, g.neg(&u1x), g.neg(&v1x)],
        )?)?;
        let fourth = src.query(&ZeroSumSeq::new(
            g,
            vec![u1x.clone(), v1x.clone(), g.neg(&u1x), g.neg(&v1x)],
        )?)?;
        ratios.push(ctx.div(&sixth, &fourth)?);
    }
    let horner = |upto: u64| {
        let mut acc: Option<CycNum> = None;
        for r in &ratios[..upto as usize] {
            acc = Some(match acc {
                None => r.clone(),
                Some(p) => ctx.mul(&ctx.mul(&p, &p), r),
            });
        }
        acc
    };
    let num = horner(hi).expect("at least one ratio");
    let power = match horner(v2 - 1) {
        None => num,
        Some(den) => ctx.div(&num, &den)?,
    };
    Ok(PowerDatum { point: x.to_vec(), exponent: m, power })
}

/// Parity dispatch between the two power-recovery ladders.
pub fn recover_power(src: &dyn MomentSource, x: &[u64], cfg: &ReconConfig) -> Result<PowerDatum> {
    if src.grid().exponent() % 2 == 1 {
        power_odd(src, x, cfg)
    } else {
        power_even(src, x, cfg)
    }
}

/// Recover beta with beta^exponent = power, given the exact squared modulus
/// of beta. The numeric stage embeds the power, divides off the known
/// modulus, takes a principal root, and walks all exponent-many phase
/// candidates; each candidate is rounded to the nearest element of the
/// cyclotomic integer lattice, the best-ranked few are verified exactly,
/// and the first verified root wins. Any verified root is acceptable: the
/// residual ambiguity is a root of unity of the field, which the alignment
/// stage absorbs into the translation freedom.
pub fn extract_root(
    ctx: &Arc<CycCtx>,
    datum: &PowerDatum,
    norm_sq: &CycNum,
    cfg: &ReconConfig,
) -> Result<CycNum> {
    let m = datum.exponent;
    let gamma = &datum.power;
    if gamma.is_zero() || norm_sq.is_zero() {
        return Err(Error::Inconsistency(
            "root extraction needs a nonvanishing spectrum value".into(),
        ));
    }
    if m == 1 {
        return Ok(gamma.clone());
    }
    let phi = ctx.degree();
    for &bits in &cfg.precision_schedule {
        let fx = FixCtx::new(bits);
        let basis = fx.basis_embeddings(ctx);
        let gam = fx.embed(ctx, &basis, gamma);
        // The squared modulus is totally real but rarely rational, so the
        // root magnitude is recovered from its embedding: rho = |value|,
        // rho_m = rho^m, both at this level's precision.
        let nrm = fx.embed(ctx, &basis, norm_sq).re;
        if !nrm.is_positive() {
            continue;
        }
        let rho = fx.sqrt(&nrm);
        let mut rho_m = fx.one();
        let mut sq = nrm;
        let mut e = m / 2;
        loop {
            if e & 1 == 1 {
                rho_m = fx.mul(&rho_m, &sq);
            }
            e >>= 1;
            if e == 0 {
                break;
            }
            sq = fx.mul(&sq, &sq);
        }
        if m % 2 == 1 {
            rho_m = fx.mul(&rho_m, &rho);
        }
        if rho_m.is_zero() {
            continue;
        }
        let u = fx.cx_div_real(&gam, &rho_m);
        // |u| should be 1 up to rounding; a large miss means the embedding
        // of the power lost too much to cancellation at this precision.
        let dev = (fx.cx_norm_sq(&u) - fx.one()).abs();
        if dev > (fx.one() >> 64u32) {
            continue;
        }
        let w = fx.nth_root_of_unit(&u, m);
        let base = Complex { re: fx.mul(&w.re, &rho), im: fx.mul(&w.im, &rho) };
        let step_full = fx.root_of_unity(m, 1);

        // Candidate recognition runs at a fixed, smaller scale.
        let jbits = cfg.lattice_bits.min(bits);
        let down = bits - jbits;
        let fxj = FixCtx::new(jbits);
        let mut rows: Vec<Vec<BigInt>> = Vec::with_capacity(phi);
        for (i, b) in basis.iter().enumerate() {
            let bj = FixCtx::cx_shr(b, down);
            let mut row = vec![BigInt::zero(); phi + 2];
            row[i] = BigInt::one();
            row[phi] = bj.re;
            row[phi + 1] = bj.im;
            rows.push(row);
        }
        lll_reduce(&mut rows);
        let planes = NearestPlane::new(rows, fxj);

        let mut cur = FixCtx::cx_shr(&base, down);
        let step = FixCtx::cx_shr(&step_full, down);
        let mut candidates: Vec<(BigInt, u64, Vec<BigInt>)> = Vec::new();
        for j in 0..m {
            let mut target = vec![BigInt::zero(); phi + 2];
            target[phi] = cur.re.clone();
            target[phi + 1] = cur.im.clone();
            let v = planes.nearest(&target);
            let residual: BigInt = v
                .iter()
                .zip(&target)
                .map(|(a, b)| {
                    let d = a - b;
                    &d * &d
                })
                .sum();
            candidates.push((residual, j, v[..phi].to_vec()));
            if j + 1 < m {
                cur = fxj.cx_mul(&cur, &step);
            }
        }
        candidates.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
        for (_, _, coords) in candidates.into_iter().take(cfg.max_exact_verifies) {
            let beta = ctx.from_coords(coords, BigInt::one());
            if beta.is_zero() {
                continue;
            }
            if ctx.pow(&beta, m) == *gamma {
                return Ok(beta);
            }
        }
    }
    Err(Error::RootRecoveryFailed)
}

/// Value of one multiplicative kernel relation: the moment whose entries
/// expand cofactor * kernel_vec across the generators, divided by the
/// matching product of conjugated generator values. For correct generator
/// roots the result is a root of unity recording how the per-generator
/// phase errors interact; remodulation solves these into twists.
pub fn kernel_relation_value(
    src: &dyn MomentSource,
    generators: &[Vec<u64>],
    roots: &[CycNum],
    cofactor: u64,
    kernel_vec: &[u64],
) -> Result<CycNum> {
    assert_eq!(generators.len(), kernel_vec.len());
    assert_eq!(generators.len(), roots.len());
    let g = src.grid();
    let ctx = src.ctx();
    let n = g.exponent();
    let mut entries: Vec<Vec<u64>> = Vec::new();
    let mut denom = ctx.one();
    for ((&c, xj), root) in kernel_vec.iter().zip(generators).zip(roots) {
        let d = ((cofactor as u128 * c as u128) % n as u128) as u64;
        for e in unit_entries(n, d) {
            entries.push(g.scale(e as i64, xj));
            denom = ctx.mul(&denom, &ctx.automorphism(root, e as i64)?);
        }
    }
    if entries.is_empty() {
        return Ok(ctx.one());
    }
    let value = src.query(&ZeroSumSeq::new(g, entries)?)?;
    ctx.div(&value, &denom)
}

/// Solve rows * t = targets (mod modulus) for twist exponents, entries
/// reduced into [0, modulus).
pub fn solve_remodulation(modulus: u64, rows: &[Vec<u64>], targets: &[u64]) -> Result<Vec<u64>> {
    assert_eq!(rows.len(), targets.len());
    assert!(!rows.is_empty());
    let cols = rows[0].len();
    let a = Mat::from_fn(rows.len(), cols, |i, j| BigInt::from(rows[i][j]));
    let b: Vec<BigInt> = targets.iter().map(|&t| BigInt::from(t)).collect();
    let sol = linalg::solve_mod(&a, &b, &BigInt::from(modulus)).ok_or_else(|| {
        Error::Inconsistency("kernel relations admit no consistent phase twist".into())
    })?;
    Ok(sol.iter().map(|v| v.to_u64().expect("reduced residue")).collect())
}

/// Phase data for one prime of the exponent: generators of the quotient by
/// the torsion subgroup of the cofactor, with spectrum values twisted into
/// mutual consistency.
#[derive(Debug, Clone)]
pub struct PrimeAlignment {
    pub cofactor: u64,
    pub torsion: Subgroup,
    pub generators: Vec<Vec<u64>>,
    pub alphas: Vec<CycNum>,
}

/// Twist per-generator roots (each correct up to a root of unity) so that
/// every kernel relation of the generating set evaluates to 1. The twisted
/// values then extend to a function of the quotient coordinates that is
/// independent of how a point is expressed in the generators.
pub fn align_prime(
    src: &dyn MomentSource,
    cofactor: u64,
    generators: Vec<Vec<u64>>,
    roots: Vec<CycNum>,
) -> Result<PrimeAlignment> {
    let g = src.grid();
    let ctx = src.ctx();
    let n = g.exponent();
    let torsion = torsion_subgroup(g, cofactor);
    let kernel = kernel_basis(g, &generators, &torsion);
    let mut rows = Vec::new();
    let mut targets = Vec::new();
    for kv in &kernel {
        let drow: Vec<u64> = kv
            .iter()
            .map(|&c| ((cofactor as u128 * c as u128) % n as u128) as u64)
            .collect();
        if drow.iter().all(|&d| d == 0) {
            // The relation queries nothing; it holds vacuously.
            continue;
        }
        let p = kernel_relation_value(src, &generators, &roots, cofactor, kv)?;
        let s = ctx.as_root_of_unity(&p).ok_or_else(|| {
            Error::Inconsistency("kernel relation value is not a root of unity".into())
        })?;
        rows.push(drow);
        targets.push(s);
    }
    let twists = if rows.is_empty() {
        vec![0u64; generators.len()]
    } else {
        solve_remodulation(n, &rows, &targets)?
    };
    let alphas = roots
        .iter()
        .zip(&twists)
        .map(|(b, &t)| ctx.mul(b, &ctx.root_of_unity(t as i64)))
        .collect();
    Ok(PrimeAlignment { cofactor, torsion, generators, alphas })
}

/// How to multiply quotient-extension values and correction queries into
/// the spectrum at a point, recorded as an integer combination of exponent
/// vectors over the units of Z/n.
#[derive(Debug, Clone)]
pub struct AssemblyRecipe {
    pub modulus: u64,
    pub prime_powers: Vec<(u64, u32)>,
    /// n / p^a per prime power, in `prime_powers` order.
    pub cofactors: Vec<u64>,
    /// Exponent applied to the quotient-extension value of each prime;
    /// primes with coefficient 0 need no alignment work at all.
    pub coefficients: Vec<i64>,
    /// Zero-sum unit multisets queried directly at each point, with their
    /// exponents.
    pub corrections: Vec<(Vec<u64>, i64)>,
}

fn zero_sum_unit_multisets(n: u64, unit_list: &[u64], sizes: &[usize]) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    for &size in sizes {
        for combo in unit_list.iter().copied().combinations_with_replacement(size) {
            if combo.iter().sum::<u64>() % n == 0 {
                out.push(combo);
            }
        }
    }
    out
}

/// Solve for a recipe over the group ring of the units of Z/n: the negated
/// cofactor expansions plus zero-sum unit multisets (pairs and triples for
/// odd n, pairs and quadruples for even n, one larger size as fallback)
/// must combine to the exponent vector of the identity unit.
pub fn assembly_recipe(n: u64) -> Result<AssemblyRecipe> {
    assert!(n >= 2);
    let prime_powers = factorize(n);
    let cofactors: Vec<u64> = prime_powers.iter().map(|&(p, a)| n / p.pow(a)).collect();
    let unit_list = units(n);
    let uidx: HashMap<u64, usize> =
        unit_list.iter().enumerate().map(|(i, &u)| (u, i)).collect();
    let dim = unit_list.len();
    let s = cofactors.len();
    let count_col = |entries: &[u64]| {
        let mut col = vec![BigInt::zero(); dim];
        for &e in entries {
            col[uidx[&e]] += 1;
        }
        col
    };
    let tau_cols: Vec<Vec<BigInt>> = cofactors
        .iter()
        .map(|&b| {
            let negated: Vec<u64> = unit_entries(n, b).iter().map(|&e| (n - e) % n).collect();
            count_col(&negated)
        })
        .collect();
    let mut target = vec![BigInt::zero(); dim];
    target[uidx[&1]] = BigInt::one();
    let (primary, fallback): (&[usize], usize) =
        if n % 2 == 1 { (&[2, 3], 4) } else { (&[2, 4], 6) };
    let mut gammas = zero_sum_unit_multisets(n, &unit_list, primary);
    let solve_with = |gammas: &[Vec<u64>]| {
        let gamma_cols: Vec<Vec<BigInt>> = gammas.iter().map(|gm| count_col(gm)).collect();
        let t = Mat::from_fn(dim, s + gammas.len(), |i, j| {
            if j < s {
                tau_cols[j][i].clone()
            } else {
                gamma_cols[j - s][i].clone()
            }
        });
        linalg::solve(&t, &target)
    };
    let mut sol = solve_with(&gammas);
    if sol.is_none() {
        gammas.extend(zero_sum_unit_multisets(n, &unit_list, &[fallback]));
        sol = solve_with(&gammas);
    }
    let sol = sol.ok_or(Error::NoAssemblyRecipe(n))?;
    let mut coefficients = Vec::with_capacity(s);
    for v in &sol[..s] {
        coefficients.push(v.to_i64().ok_or(Error::NoAssemblyRecipe(n))?);
    }
    let mut corrections = Vec::new();
    for (gamma, w) in gammas.into_iter().zip(&sol[s..]) {
        if !w.is_zero() {
            corrections.push((gamma, w.to_i64().ok_or(Error::NoAssemblyRecipe(n))?));
        }
    }
    Ok(AssemblyRecipe { modulus: n, prime_powers, cofactors, coefficients, corrections })
}

/// Evaluate the assembled spectrum on the whole support: per point, one
/// aligned quotient-extension value per active prime and the correction
/// queries multiply out to the spectrum of a translate of the hidden data.
pub fn assemble(
    src: &dyn MomentSource,
    recipe: &AssemblyRecipe,
    alignments: &[Option<PrimeAlignment>],
    support: &[Vec<u64>],
) -> Result<SpecFn> {
    let g = src.grid();
    let ctx = src.ctx();
    let n = g.exponent();
    assert_eq!(recipe.modulus, n);
    assert_eq!(alignments.len(), recipe.cofactors.len());
    let mut ghat = SpecFn::zero(g.clone(), ctx.clone());
    let m1 = src.query(&ZeroSumSeq::new(g, vec![g.zero()])?)?;
    ghat.set(&g.zero(), m1);
    for x in support {
        if g.is_zero(x) {
            continue;
        }
        let mut value = ctx.one();
        for (k, alignment) in alignments.iter().enumerate() {
            let a_k = recipe.coefficients[k];
            if a_k == 0 {
                continue;
            }
            let al = alignment.as_ref().expect("active prime carries an alignment");
            let b = al.cofactor;
            // Entries: -b on x itself, then b * c_j on each generator,
            // everything expanded into units. The sum is b times an element
            // of the torsion subgroup of b, hence zero.
            let mut entries: Vec<Vec<u64>> = Vec::new();
            for e in unit_entries(n, b) {
                entries.push(g.scale(((n - e) % n) as i64, x));
            }
            let coeffs = express_in_generators(g, x, &al.generators, &al.torsion)?;
            let mut denom = ctx.one();
            for ((&c, xj), alpha) in coeffs.iter().zip(&al.generators).zip(&al.alphas) {
                let d = ((b as u128 * c as u128) % n as u128) as u64;
                for e in unit_entries(n, d) {
                    entries.push(g.scale(e as i64, xj));
                    denom = ctx.mul(&denom, &ctx.automorphism(alpha, e as i64)?);
                }
            }
            let q = src.query(&ZeroSumSeq::new(g, entries)?)?;
            let v = ctx.div(&q, &denom)?;
            value = ctx.mul(&value, &ctx.pow_i64(&v, a_k)?);
        }
        for (gamma, w) in &recipe.corrections {
            let entries: Vec<Vec<u64>> =
                gamma.iter().map(|&t| g.scale(t as i64, x)).collect();
            let q = src.query(&ZeroSumSeq::new(g, entries)?)?;
            value = ctx.mul(&value, &ctx.pow_i64(&q, *w)?);
        }
        ghat.set(x, value);
    }
    Ok(ghat)
}

/// Moment source for the quotient grid seen when the support only spans a
/// subgroup: queries embed dual elements back into the big grid, and values
/// are rewritten into the smaller cyclotomic field and divided by the
/// annihilator order once per moment entry.
struct RestrictedSource<'a> {
    inner: &'a dyn MomentSource,
    map: QuotientMap,
    grid: Grid,
    ctx: Arc<CycCtx>,
    divisor: u64,
}

impl<'a> RestrictedSource<'a> {
    fn new(inner: &'a dyn MomentSource, map: QuotientMap, divisor: u64) -> RestrictedSource<'a> {
        let grid = map.target().clone();
        let ctx = Arc::new(CycCtx::new(grid.exponent()));
        RestrictedSource { inner, map, grid, ctx, divisor }
    }
}

impl MomentSource for RestrictedSource<'_> {
    fn grid(&self) -> &Grid {
        &self.grid
    }

    fn ctx(&self) -> &Arc<CycCtx> {
        &self.ctx
    }

    fn query(&self, seq: &ZeroSumSeq) -> Result<CycNum> {
        let entries: Vec<Vec<u64>> =
            seq.entries().iter().map(|w| self.map.dual_embed(w)).collect();
        let lifted = ZeroSumSeq::new(self.map.source(), entries)?;
        let value = self.inner.query(&lifted)?;
        let value = self.inner.ctx().restrict(&value, &self.ctx)?;
        let div = BigInt::from(self.divisor).pow(seq.order() as u32);
        Ok(self
            .ctx
            .mul(&value, &self.ctx.from_rational(&BigRational::new(BigInt::one(), div))))
    }
}

/// Reconstruction over any moment source; the capped oracle wrapper
/// [`reconstruct`] handles integer-data rescaling on top of this.
pub fn reconstruct_source(src: &dyn MomentSource, cfg: &ReconConfig) -> Result<RatFn> {
    let mut trace = ReconTrace::default();
    reconstruct_inner(src, cfg, &mut trace)
}

/// What the pipeline did, for reporting: how often the problem shrank to
/// the subgroup spanned by the support, and which generators and power
/// exponents the innermost full-span run settled on.
#[derive(Debug, Clone, Default)]
pub struct ReconTrace {
    pub restrictions: usize,
    pub support_size: usize,
    /// Each prime block's cofactor with its chosen quotient generators.
    pub blocks: Vec<(u64, Vec<Vec<u64>>)>,
    /// Power exponent used to recover the spectrum at each generator.
    pub exponents: Vec<(Vec<u64>, u64)>,
}

fn reconstruct_inner(
    src: &dyn MomentSource,
    cfg: &ReconConfig,
    trace: &mut ReconTrace,
) -> Result<RatFn> {
    let g = src.grid().clone();
    let ctx = src.ctx().clone();
    let size = g.order() as usize;
    let m1 = src.query(&ZeroSumSeq::new(&g, vec![g.zero()])?)?;
    if g.exponent() == 1 {
        let v = ctx.to_rational(&m1).ok_or(Error::NotRational)?;
        return RatFn::new(g, vec![v]);
    }
    // Support scan: the order-2 moment at (x, -x) is the squared modulus of
    // the spectrum at x, zero exactly off the support.
    let mut support: Vec<Vec<u64>> = Vec::new();
    let mut norms: Vec<Option<CycNum>> = vec![None; size];
    if !m1.is_zero() {
        support.push(g.zero());
    }
    for i in 1..size {
        let x = g.element(i);
        let v = src.query(&ZeroSumSeq::new(&g, vec![x.clone(), g.neg(&x)])?)?;
        if !v.is_zero() {
            norms[i] = Some(v);
            support.push(x);
        }
    }
    trace.support_size = support.len();
    if support.is_empty() {
        return Ok(RatFn::zero(g));
    }
    if support.len() == 1 && g.is_zero(&support[0]) {
        let c = ctx.to_rational(&m1).ok_or(Error::NotRational)?
            / BigRational::from_integer(BigInt::from(g.order()));
        return Ok(RatFn::constant(g, c));
    }
    let span = subgroup_generated(&g, &support);
    if !span.is_whole_group(&g) {
        let ann = annihilator(&g, &span);
        let divisor = ann.order(&g);
        let map = quotient_by(&g, &ann);
        let restricted = RestrictedSource::new(src, map, divisor);
        trace.restrictions += 1;
        let small = reconstruct_inner(&restricted, cfg, trace)?;
        let values = (0..size)
            .map(|i| small.value(&restricted.map.project(&g.element(i))).clone())
            .collect();
        return RatFn::new(g, values);
    }
    // Full-span case: powers at quotient generators per prime, roots,
    // alignment, assembly, inversion.
    let n = g.exponent();
    let recipe = assembly_recipe(n)?;
    trace.blocks.clear();
    trace.exponents.clear();
    let mut root_cache: HashMap<usize, CycNum> = HashMap::new();
    let mut alignments: Vec<Option<PrimeAlignment>> = Vec::new();
    for (k, &b) in recipe.cofactors.iter().enumerate() {
        if recipe.coefficients[k] == 0 {
            alignments.push(None);
            continue;
        }
        let torsion = torsion_subgroup(&g, b);
        let gens = quotient_generators(&g, &support, &torsion)?;
        let mut roots = Vec::with_capacity(gens.len());
        for xg in &gens {
            let idx = g.index_of(xg);
            let root = match root_cache.get(&idx) {
                Some(r) => r.clone(),
                None => {
                    let datum = recover_power(src, xg, cfg)?;
                    trace.exponents.push((xg.clone(), datum.exponent));
                    let norm = norms[idx].as_ref().expect("generators lie in the support");
                    let r = extract_root(&ctx, &datum, norm, cfg)?;
                    root_cache.insert(idx, r.clone());
                    r
                }
            };
            roots.push(root);
        }
        trace.blocks.push((b, gens.clone()));
        alignments.push(Some(align_prime(src, b, gens, roots)?));
    }
    let ghat = assemble(src, &recipe, &alignments, &support)?;
    idft_rational(&ghat)
}

/// Full pipeline from a moment oracle to data: reconstruct the
/// denominator-cleared data from bounded-order queries, then divide the
/// clearing scale back out. The result matches the hidden data up to a
/// grid translation.
pub fn reconstruct(oracle: &MomentOracle, cfg: &ReconConfig) -> Result<RatFn> {
    Ok(reconstruct_traced(oracle, cfg)?.0)
}

/// Like [`reconstruct`], also returning the pipeline trace for reporting.
pub fn reconstruct_traced(
    oracle: &MomentOracle,
    cfg: &ReconConfig,
) -> Result<(RatFn, ReconTrace)> {
    let mut trace = ReconTrace::default();
    let raw = reconstruct_inner(oracle, cfg, &mut trace)?;
    let scale = oracle.scale();
    if scale.is_one() {
        return Ok((raw, trace));
    }
    let factor = BigRational::new(BigInt::one(), scale);
    let g = raw.grid().clone();
    let values = raw.values().iter().map(|v| v * &factor).collect();
    Ok((RatFn::new(g, values)?, trace))
}

/// First translation t (in element order) with candidate(x) =
/// reference(x + t) for all x, if any.
pub fn verify_translation(reference: &RatFn, candidate: &RatFn) -> Option<Vec<u64>> {
    if reference.grid() != candidate.grid() {
        return None;
    }
    let g = reference.grid();
    let size = g.order() as usize;
    (0..size).map(|i| g.element(i)).find(|t| {
        (0..size).all(|j| {
            let x = g.element(j);
            candidate.value(&x) == reference.value(&g.add(&x, t))
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unital_decomposition_frozen_cases() {
        assert_eq!(unital_decomposition(1, 0), (0, 0, 0));
        assert_eq!(unital_decomposition(7, 4), (1, 3, 0));
        assert_eq!(unital_decomposition(6, 3), (1, 1, 1));
        assert_eq!(unital_decomposition(6, 4), (5, 5, 0));
        assert_eq!(unital_decomposition(8, 0), (1, 7, 0));
        assert_eq!(unital_decomposition(2, 0), (1, 1, 0));
    }

    #[test]
    fn unital_decomposition_sweep() {
        for n in 2..=40u64 {
            for c in 0..n {
                let (u, v, w) = unital_decomposition(n, c);
                let unit = |t: u64| t != 0 && t.gcd(&n) == 1;
                assert!(unit(u) && unit(v), "n = {n}, c = {c}");
                if w == 0 {
                    assert_eq!((u + v) % n, c, "n = {n}");
                } else {
                    assert!(n % 2 == 0 && c % 2 == 1, "triple only for odd residues");
                    assert!(unit(w));
                    assert_eq!((u + v + w) % n, c, "n = {n}");
                }
            }
        }
    }

    #[test]
    fn two_always_splits_as_one_plus_one() {
        // The even-exponent ladder telescopes to a power at the original
        // point only because its base decomposition of 2 is 1 + 1.
        for n in (2..=60u64).step_by(2) {
            assert_eq!(unital_decomposition(n, 2 % n), (1, 1, 0));
        }
    }

    #[test]
    fn unit_entries_cases() {
        assert!(unit_entries(6, 0).is_empty());
        assert_eq!(unit_entries(6, 5), vec![5]);
        assert_eq!(unit_entries(6, 3), vec![1, 1, 1]);
        assert_eq!(unit_entries(15, 5), vec![1, 4]);
        for n in 2..=30u64 {
            for d in 0..n {
                let entries = unit_entries(n, d);
                assert_eq!(entries.iter().sum::<u64>() % n, d);
                assert!(entries.iter().all(|e| e.gcd(&n) == 1 && *e != 0));
                assert!(entries.len() <= 3);
            }
        }
    }

    #[test]
    fn order_of_two_values() {
        assert_eq!(mult_order_of_two(1), 1);
        assert_eq!(mult_order_of_two(7), 3);
        assert_eq!(mult_order_of_two(9), 6);
        assert_eq!(mult_order_of_two(13), 12);
        assert_eq!(mult_order_of_two(15), 4);
    }

    #[test]
    fn recipe_solves_exponent_identity() {
        for n in 2..=30u64 {
            let recipe = assembly_recipe(n).unwrap();
            let mut counts: HashMap<u64, i64> = HashMap::new();
            for (k, &b) in recipe.cofactors.iter().enumerate() {
                for e in unit_entries(n, b) {
                    *counts.entry((n - e) % n).or_insert(0) += recipe.coefficients[k];
                }
            }
            for (gamma, w) in &recipe.corrections {
                for &t in gamma {
                    *counts.entry(t).or_insert(0) += *w;
                }
            }
            for u in units(n) {
                let want = i64::from(u == 1);
                assert_eq!(counts.get(&u).copied().unwrap_or(0), want, "n = {n}, unit {u}");
            }
        }
    }

    #[test]
    fn recipe_corrections_stay_small() {
        for n in 2..=30u64 {
            let recipe = assembly_recipe(n).unwrap();
            let cap = if n % 2 == 1 { 4 } else { 6 };
            for (gamma, _) in &recipe.corrections {
                assert!(gamma.len() <= cap, "n = {n}: correction of size {}", gamma.len());
                assert_eq!(gamma.iter().sum::<u64>() % n, 0);
            }
        }
    }

    #[test]
    fn remodulation_small_cases() {
        assert_eq!(solve_remodulation(6, &[vec![2]], &[2]).unwrap(), vec![1]);
        assert!(solve_remodulation(6, &[vec![2]], &[3]).is_err());
        assert_eq!(
            solve_remodulation(4, &[vec![2, 0], vec![0, 2]], &[2, 0]).unwrap(),
            vec![1, 0]
        );
    }

    #[test]
    fn order_cap_by_parity() {
        let odd = Grid::new(&[3, 9]).unwrap();
        assert_eq!(required_order_cap(&odd), 6);
        let even = Grid::new(&[6, 6]).unwrap();
        assert_eq!(required_order_cap(&even), 9);
    }
}
