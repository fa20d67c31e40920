//! The release gate: ten end-to-end checks covering golden
//! reconstructions, family agreement claims, query budgets, and oracle
//! equivalences. Each prints one PASS/FAIL scoreboard line (visible under
//! `--nocapture`); a FAIL also fails the test.

use std::panic::{catch_unwind, resume_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::Instant;

use gridcorr::cyclotomic::CycCtx;
use gridcorr::families::{
    agreement_order, agreement_order_data, family_delta, family_divisor, family_sharp,
    family_threer, family_z6, Agreement,
};
use gridcorr::groups::Grid;
use gridcorr::moments::{MomentOracle, MomentTable};
use gridcorr::recon::{
    power_even, power_odd, reconstruct, required_order_cap, verify_translation, ReconConfig,
};
use gridcorr::spectral::{character, dft, RatFn};
use itertools::Itertools;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn check(name: &str, body: impl FnOnce() -> String) {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(detail) => println!("PASS {name}: {detail}"),
        Err(cause) => {
            println!("FAIL {name}");
            resume_unwind(cause);
        }
    }
}

fn ratio(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

fn ratfn(dims: &[u64], values: &[i64]) -> RatFn {
    let g = Grid::new(dims).expect("valid dims");
    RatFn::new(g, values.iter().map(|&v| ratio(v)).collect()).expect("value count")
}

/// The grids every randomized check draws from: odd and even exponents,
/// one and two coordinates, prime and composite dimensions.
const DIMS_POOL: [&[u64]; 10] =
    [&[5], &[7], &[9], &[15], &[3, 9], &[6], &[12], &[2, 4], &[6, 6], &[30]];

fn random_integer_fn(g: &Grid, rng: &mut ChaCha8Rng, bound: i64) -> RatFn {
    let values = (0..g.order()).map(|_| ratio(rng.gen_range(-bound..=bound))).collect();
    RatFn::new(g.clone(), values).expect("value count")
}

#[test]
fn criterion_01_seven_point_tables_rebuild_the_indicator() {
    check("criterion 1", || {
        let started = Instant::now();
        let g = Grid::new(&[7]).unwrap();
        // The published first-, second-, and third-order tables of the
        // seven-point indicator: total mass 3; pair table 3 at the origin
        // and 1 elsewhere; triple table supported on the axes, the
        // diagonal (where an indicator's triples reduce to its pairs), and
        // the unordered shift pairs {1,5}, {2,3}, {4,6}.
        let mut entries = vec![(vec![], ratio(3))];
        for x in 0..7u64 {
            entries.push((vec![vec![x]], ratio(if x == 0 { 3 } else { 1 })));
        }
        for x in 0..7u64 {
            for y in 0..7u64 {
                let v = if x == 0 && y == 0 {
                    3
                } else if x == 0 || y == 0 || x == y {
                    1
                } else if matches!((x.min(y), x.max(y)), (1, 5) | (2, 3) | (4, 6)) {
                    1
                } else {
                    0
                };
                if v != 0 {
                    entries.push((vec![vec![x], vec![y]], ratio(v)));
                }
            }
        }
        let table = MomentTable::from_entries(g, 3, entries).unwrap();
        let oracle = MomentOracle::from_table(table);
        let rec = reconstruct(&oracle, &ReconConfig::default()).unwrap();
        let expected = ratfn(&[7], &[0, 0, 0, 1, 0, 1, 1]);
        assert!(verify_translation(&expected, &rec).is_some(), "not a cyclic shift");
        let stats = oracle.stats();
        assert!(stats.max_order <= 3, "queried order {}", stats.max_order);
        let ms = started.elapsed().as_millis();
        assert!(ms < 1_000, "took {ms} ms");
        format!("shift of the 7-point indicator, max query order {}, {ms} ms", stats.max_order)
    });
}

#[rustfmt::skip]
const CRAB: [[i64; 13]; 13] = [
    [0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 1, 1, 1, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 1, 1, 1, 1, 1, 0, 0, 0, 0],
    [0, 0, 0, 1, 0, 0, 1, 0, 0, 1, 0, 0, 0],
    [0, 0, 1, 1, 0, 2, 1, 0, 2, 1, 1, 0, 0],
    [0, 1, 0, 1, 1, 1, 1, 1, 1, 1, 0, 1, 0],
    [0, 0, 0, 1, 0, 0, 0, 0, 0, 1, 0, 0, 0],
    [0, 0, 0, 0, 1, 1, 0, 1, 1, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
];

#[test]
fn criterion_02_crab_image_reconstructs_from_hidden_oracle() {
    check("criterion 2", || {
        let started = Instant::now();
        let flat: Vec<i64> = CRAB.iter().flatten().copied().collect();
        let f = ratfn(&[13, 13], &flat);
        let oracle = MomentOracle::hidden(&f);
        let rec = reconstruct(&oracle, &ReconConfig::default()).unwrap();
        assert!(verify_translation(&f, &rec).is_some(), "not a 2-D cyclic shift");
        let stats = oracle.stats();
        assert!(stats.max_order <= 6, "queried order {}", stats.max_order);
        let ms = started.elapsed().as_millis();
        assert!(ms < 60_000, "took {ms} ms");
        format!(
            "13x13 crab recovered up to shift, max query order {}, {} queries, {ms} ms",
            stats.max_order, stats.queries
        )
    });
}

#[test]
fn criterion_03_conic_pair_agrees_through_five_only() {
    check("criterion 3", || {
        let started = Instant::now();
        let f = family_z6(7, 0);
        let g2 = family_z6(1, 4);
        let verdict = agreement_order_data(&f, &g2, 6, 10_000_000).unwrap();
        assert_eq!(verdict, Agreement::FirstDifference(6));
        assert!(verify_translation(&f, &g2).is_none(), "pair must not be translates");
        let ms = started.elapsed().as_millis();
        assert!(ms < 5_000, "took {ms} ms");
        format!("equal moments through order 5, split at 6, not translates, {ms} ms")
    });
}

#[test]
fn criterion_04_sharp_pair_on_thirty_splits_at_six() {
    check("criterion 4", || {
        let started = Instant::now();
        let (f, g2) = family_sharp(3, 5, 1);
        let verdict = agreement_order_data(&f, &g2, 6, 10_000_000).unwrap();
        assert_eq!(verdict, Agreement::FirstDifference(6));
        assert!(verify_translation(&f, &g2).is_none(), "pair must not be translates");
        let ms = started.elapsed().as_millis();
        assert!(ms < 120_000, "took {ms} ms");
        format!("equal moments through order 5, split at 6, not translates, {ms} ms")
    });
}

#[test]
fn criterion_05_axis_diagonal_pairs_agree_through_three_r() {
    check("criterion 5", || {
        let started = Instant::now();
        for (r, split) in [(1usize, 4usize), (2, 7)] {
            let (f, g2) = family_threer(r);
            let verdict = agreement_order_data(&f, &g2, split, 10_000_000).unwrap();
            assert_eq!(verdict, Agreement::FirstDifference(split), "r = {r}");
            assert!(verify_translation(&f, &g2).is_none(), "r = {r}: pair must not be translates");
        }
        let ms = started.elapsed().as_millis();
        assert!(ms < 120_000, "took {ms} ms");
        format!("r = 1 splits at order 4, r = 2 at order 7, neither pair translates, {ms} ms")
    });
}

#[test]
fn criterion_06_random_round_trips_stay_within_the_query_cap() {
    check("criterion 6", || {
        let started = Instant::now();
        let cfg = ReconConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(0xC6);
        let mut cases = 0u32;
        let mut worst_ms = 0u128;
        for dims in DIMS_POOL {
            let g = Grid::new(dims).unwrap();
            let cap = required_order_cap(&g);
            for _ in 0..20 {
                let f = random_integer_fn(&g, &mut rng, 3);
                let one = Instant::now();
                let oracle = MomentOracle::hidden(&f);
                let rec = reconstruct(&oracle, &cfg).unwrap();
                assert!(
                    verify_translation(&f, &rec).is_some(),
                    "case {cases} on {dims:?} is not a translate"
                );
                let stats = oracle.stats();
                assert!(
                    stats.max_order <= cap,
                    "case {cases} on {dims:?} queried order {} over cap {cap}",
                    stats.max_order
                );
                worst_ms = worst_ms.max(one.elapsed().as_millis());
                cases += 1;
            }
        }
        assert!(cases >= 200);
        let ms = started.elapsed().as_millis();
        assert!(ms < 600_000, "took {ms} ms");
        format!("{cases} round trips within cap, worst case {worst_ms} ms, total {ms} ms")
    });
}

#[test]
fn criterion_07_power_ladders_match_direct_exponentiation() {
    check("criterion 7", || {
        let started = Instant::now();
        let cfg = ReconConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(0xC7);
        let mut points = 0u32;
        for dims in DIMS_POOL {
            let g = Grid::new(dims).unwrap();
            for _ in 0..2 {
                let f = random_integer_fn(&g, &mut rng, 3);
                let oracle = MomentOracle::hidden(&f);
                let ctx = oracle.ctx().clone();
                let fhat = dft(&f, ctx.clone());
                for x in fhat.support() {
                    let datum = if g.exponent() % 2 == 1 {
                        power_odd(&oracle, &x, &cfg).unwrap()
                    } else {
                        power_even(&oracle, &x, &cfg).unwrap()
                    };
                    let direct = ctx.pow(fhat.value(&x), datum.exponent);
                    assert_eq!(datum.power, direct, "point {x:?} on {dims:?}");
                    points += 1;
                }
            }
        }
        let ms = started.elapsed().as_millis();
        format!("{points} support points across 10 grid shapes, {ms} ms")
    });
}

#[test]
fn criterion_08_rational_spectra_pass_the_symmetry_check() {
    check("criterion 8", || {
        let started = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(0xC8);
        for i in 0..100 {
            let g = Grid::new(DIMS_POOL[i % DIMS_POOL.len()]).unwrap();
            let values = (0..g.order())
                .map(|_| {
                    BigRational::new(
                        BigInt::from(rng.gen_range(-9i64..=9)),
                        BigInt::from(rng.gen_range(1i64..=4)),
                    )
                })
                .collect();
            let f = RatFn::new(g.clone(), values).unwrap();
            let ctx = Arc::new(CycCtx::new(g.exponent()));
            assert!(dft(&f, ctx).is_rational_spectrum(), "trial {i} on {:?}", g.dims());
        }
        // A lone spectrum point breaks the symmetry: its unit multiples
        // carry zero instead of the automorphism images.
        let (witness, _) = family_delta(&Grid::new(&[5]).unwrap());
        assert!(!witness.is_rational_spectrum(), "witness must fail the check");
        let ms = started.elapsed().as_millis();
        format!("100 rational spectra pass, the one-point witness fails, {ms} ms")
    });
}

/// Order-n autocorrelation straight from the definition.
fn brute_moment(f: &RatFn, shifts: &[Vec<u64>]) -> BigRational {
    let g = f.grid();
    let mut total = BigRational::zero();
    for i in 0..g.order() as usize {
        let y = g.element(i);
        let mut term = f.value(&y).clone();
        for s in shifts {
            term *= f.value(&g.add(&y, s));
        }
        total += term;
    }
    total
}

/// The same table entry assembled from the spectrum: sum the product of
/// transform values over all character tuples (the last index is forced by
/// the zero-sum constraint), modulated back to the shifts, divided by
/// |G|^(n-1).
fn product_moment(f: &RatFn, shifts: &[Vec<u64>]) -> BigRational {
    let g = f.grid().clone();
    let ctx = Arc::new(CycCtx::new(g.exponent()));
    let fhat = dft(f, ctx.clone());
    let count = g.order() as usize;
    let mut acc = ctx.zero();
    for idx in (0..shifts.len()).map(|_| 0..count).multi_cartesian_product() {
        let xs: Vec<Vec<u64>> = idx.into_iter().map(|i| g.element(i)).collect();
        let mut total = g.zero();
        let mut term = ctx.one();
        for (x, s) in xs.iter().zip(shifts) {
            total = g.add(&total, x);
            term = ctx.mul(&term, fhat.value(x));
            term = ctx.mul(&term, &character(&g, &ctx, x, s));
        }
        term = ctx.mul(&term, fhat.value(&g.neg(&total)));
        acc = ctx.add(&acc, &term);
    }
    let rational = ctx.to_rational(&acc).expect("table entries are rational");
    let norm = BigInt::from(g.order()).pow(shifts.len() as u32);
    rational / BigRational::from_integer(norm)
}

#[test]
fn criterion_09_tables_equal_spectrum_products() {
    check("criterion 9", || {
        let started = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(0xC9);
        // Everything from the pool fits the |G| <= 36 bound.
        for dims in DIMS_POOL {
            assert!(Grid::new(dims).unwrap().order() <= 36);
        }
        for trial in 0..100 {
            let g = Grid::new(DIMS_POOL[trial % DIMS_POOL.len()]).unwrap();
            // The full-spectrum sum is |G|^(n-1) terms; keep the heaviest
            // grids to the orders that stay exact in reasonable time.
            let max_n = if g.order() > 16 { 3 } else { 4 };
            let n = rng.gen_range(2..=max_n);
            let f = random_integer_fn(&g, &mut rng, 3);
            let shifts: Vec<Vec<u64>> = (0..n - 1)
                .map(|_| g.element(rng.gen_range(0..g.order() as usize)))
                .collect();
            assert_eq!(
                brute_moment(&f, &shifts),
                product_moment(&f, &shifts),
                "trial {trial}: order {n} on {:?} at {shifts:?}",
                g.dims()
            );
        }
        let ms = started.elapsed().as_millis();
        format!("100 random table entries equal their spectrum products, {ms} ms")
    });
}

#[test]
fn criterion_10_low_order_moments_vanish_for_the_bound_witnesses() {
    check("criterion 10", || {
        let started = Instant::now();
        let g5 = Grid::new(&[5]).unwrap();
        let (fhat, zero) = family_delta(&g5);
        assert_eq!(zero.support().len(), 0);
        let verdict = agreement_order(&fhat, &zero, 4, 1_000_000).unwrap();
        assert_eq!(verdict, Agreement::AgreeThrough(4), "one-point spectrum on 5 points");

        let g66 = Grid::new(&[6, 6]).unwrap();
        let (fhat, ghat) = family_divisor(&g66, 3).unwrap();
        let verdict = agreement_order(&fhat, &ghat, 4, 10_000_000).unwrap();
        assert_eq!(verdict, Agreement::AgreeThrough(4), "split pair on the 6x6 grid");
        let ms = started.elapsed().as_millis();
        format!("one-point moments vanish through 4, split pair agrees through 4, {ms} ms")
    });
}
