//! Transform checks: the frozen spectrum of the Z/7 indicator, exact
//! inversion both ways, character bilinearity, and the translation law.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gridcorr::cyclotomic::CycCtx;
use gridcorr::spectral::{character, dft, idft, idft_rational, RatFn, SpecFn};
use gridcorr::Grid;

fn random_ratfn(dims: &[u64], seed: u64) -> RatFn {
    let g = Grid::new(dims).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..g.order())
        .map(|_| {
            BigRational::new(BigInt::from(rng.gen_range(-9i64..=9)), BigInt::from(rng.gen_range(1i64..=4)))
        })
        .collect();
    RatFn::new(g, values).unwrap()
}

#[test]
fn indicator_spectrum_on_z7_is_frozen_value() {
    // Indicator of {3, 5, 6}: spectrum at 1 is xi^(-3) + xi^(-5) + xi^(-6)
    // = xi^4 + xi^2 + xi.
    let g = Grid::new(&[7]).unwrap();
    let values = [0i64, 0, 0, 1, 0, 1, 1]
        .iter()
        .map(|&v| BigRational::from_integer(BigInt::from(v)))
        .collect();
    let f = RatFn::new(g, values).unwrap();
    let ctx = Arc::new(CycCtx::new(7));
    let fhat = dft(&f, ctx.clone());
    let expected = ctx.add(
        &ctx.add(&ctx.root_of_unity(1), &ctx.root_of_unity(2)),
        &ctx.root_of_unity(4),
    );
    assert_eq!(*fhat.value(&[1]), expected);
    assert_eq!(*fhat.value(&[0]), ctx.from_integer(&BigInt::from(3)));
    // Galois equivariance pins every other value to the one at 1.
    for t in 2..7i64 {
        assert_eq!(*fhat.value(&[t as u64]), ctx.automorphism(&expected, t).unwrap());
    }
}

#[test]
fn transform_inverts_exactly() {
    for (dims, seed) in [(&[6u64][..], 1u64), (&[5][..], 2), (&[2, 4][..], 3), (&[3, 9][..], 4)] {
        let f = random_ratfn(dims, seed);
        let ctx = Arc::new(CycCtx::new(f.grid().exponent()));
        let fhat = dft(&f, ctx.clone());
        let back = idft_rational(&fhat).unwrap();
        assert_eq!(back.values(), f.values());
        // The raw inverse returns the same values as exact cyclotomics.
        let raw = idft(&fhat);
        for (v, w) in raw.iter().zip(f.values()) {
            assert_eq!(ctx.to_rational(v).unwrap(), *w);
        }
    }
}

#[test]
fn character_is_biadditive() {
    let g = Grid::new(&[2, 6]).unwrap();
    let ctx = CycCtx::new(6);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..40 {
        let x = g.element(rng.gen_range(0..g.order()) as usize);
        let y = g.element(rng.gen_range(0..g.order()) as usize);
        let z = g.element(rng.gen_range(0..g.order()) as usize);
        let lhs = character(&g, &ctx, &g.add(&x, &y), &z);
        let rhs = ctx.mul(&character(&g, &ctx, &x, &z), &character(&g, &ctx, &y, &z));
        assert_eq!(lhs, rhs);
        let lhs2 = character(&g, &ctx, &x, &g.add(&y, &z));
        let rhs2 = ctx.mul(&character(&g, &ctx, &x, &y), &character(&g, &ctx, &x, &z));
        assert_eq!(lhs2, rhs2);
    }
}

#[test]
fn translation_becomes_modulation() {
    let f = random_ratfn(&[3, 4], 6);
    let g = f.grid().clone();
    let ctx = Arc::new(CycCtx::new(g.exponent()));
    let t = vec![2u64, 3];
    let shifted = f.translate(&t);
    // translate(t) maps x to f(x + t), so the spectrum picks up chi(x, t).
    let fhat = dft(&f, ctx.clone());
    let shat = dft(&shifted, ctx.clone());
    for i in 0..g.order() as usize {
        let x = g.element(i);
        let expected = ctx.mul(fhat.value(&x), &character(&g, &ctx, &x, &t));
        assert_eq!(*shat.value(&x), expected);
    }
}

#[test]
fn rational_spectrum_detection() {
    let g = Grid::new(&[6]).unwrap();
    let ctx = Arc::new(CycCtx::new(6));
    let mut fhat = SpecFn::zero(g.clone(), ctx.clone());
    // Rationality of the data means Galois equivariance of the spectrum:
    // the whole unit orbit {2, 4} must carry matching values.
    fhat.set(&[2], ctx.from_integer(&BigInt::from(4)));
    assert!(!fhat.is_rational_spectrum());
    fhat.set(&[4], ctx.from_integer(&BigInt::from(4)));
    assert!(fhat.is_rational_spectrum());
    // A sixth root of unity at the 2-torsion point breaks equivariance:
    // scaling by the unit 5 fixes the point but conjugates the value.
    fhat.set(&[3], ctx.root_of_unity(1));
    assert!(!fhat.is_rational_spectrum());
    assert_eq!(fhat.support(), vec![vec![2], vec![3], vec![4]]);
}

#[test]
fn spectrum_support_drives_idft_rationality() {
    // A spectrum that is not Galois-equivariant cannot come from rational
    // data: idft_rational must refuse it.
    let g = Grid::new(&[5]).unwrap();
    let ctx = Arc::new(CycCtx::new(5));
    let mut fhat = SpecFn::zero(g, ctx.clone());
    fhat.set(&[1], ctx.one());
    assert!(idft_rational(&fhat).is_err());
}
