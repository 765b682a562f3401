//! Property tests over randomly drawn elements and maps.

use proptest::prelude::*;

use padic_dynamics::ring::{standard_ring, RingSpec, Valuation};
use padic_dynamics::series::ConvergentSeries;

fn ring_choices() -> Vec<RingSpec> {
    vec![
        standard_ring(2, 1, 1, 14).unwrap(),
        standard_ring(3, 1, 1, 14).unwrap(),
        standard_ring(2, 2, 1, 14).unwrap(),
        standard_ring(2, 1, 2, 14).unwrap(),
    ]
}

fn element_from_seed(ring: &RingSpec, seed: u64, digits: u32) -> padic_dynamics::Element {
    let q = ring.fq().card();
    let mut s = seed;
    let ds: Vec<_> = (0..digits)
        .map(|_| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ring.fq().unrank((s >> 33) % q)
        })
        .collect();
    ring.from_digits(&ds)
}

proptest! {
    #[test]
    fn add_mul_commute_and_distribute(ring_idx in 0usize..4, sa in any::<u64>(), sb in any::<u64>(), sc in any::<u64>()) {
        let rings = ring_choices();
        let ring = &rings[ring_idx];
        let a = element_from_seed(ring, sa, 12);
        let b = element_from_seed(ring, sb, 12);
        let c = element_from_seed(ring, sc, 12);
        let ab = ring.mul(&a, &b).unwrap();
        let ba = ring.mul(&b, &a).unwrap();
        prop_assert!(ring.eq_repr(&ab, &ba));
        let lhs = ring.mul(&a, &ring.add(&b, &c).unwrap()).unwrap();
        let rhs = ring.add(&ring.mul(&a, &b).unwrap(), &ring.mul(&a, &c).unwrap()).unwrap();
        prop_assert!(ring.eq_repr(&lhs, &rhs));
    }

    #[test]
    fn ultrametric_inequality(ring_idx in 0usize..4, sa in any::<u64>(), sb in any::<u64>(), ka in 0u32..3, kb in 0u32..3) {
        let rings = ring_choices();
        let ring = &rings[ring_idx];
        let mut a = element_from_seed(ring, sa, 10);
        let mut b = element_from_seed(ring, sb, 10);
        for _ in 0..ka { a = ring.mul_by_pi(&a).unwrap(); }
        for _ in 0..kb { b = ring.mul_by_pi(&b).unwrap(); }
        if let (Valuation::Finite(x), Valuation::Finite(y)) = (ring.val(&a), ring.val(&b)) {
            let sum = ring.add(&a, &b).unwrap();
            prop_assert!(ring.val(&sum).ge(x.min(y)));
            if x != y {
                prop_assert_eq!(ring.val(&sum), Valuation::Finite(x.min(y)));
            }
        }
    }

    #[test]
    fn digits_roundtrip(ring_idx in 0usize..4, s in any::<u64>()) {
        let rings = ring_choices();
        let ring = &rings[ring_idx];
        let a = element_from_seed(ring, s, 12);
        let ds = ring.digits(&a, 12).unwrap();
        let back = ring.from_digits(&ds);
        prop_assert!(ring.eq_mod(&a, &back, 12).unwrap());
    }

    #[test]
    fn unit_inverse_multiplies_to_one(ring_idx in 0usize..4, s in any::<u64>()) {
        let rings = ring_choices();
        let ring = &rings[ring_idx];
        let a = element_from_seed(ring, s, 12);
        if matches!(ring.val(&a), Valuation::Finite(0)) {
            let inv = ring.invert(&a).unwrap();
            let prod = ring.mul(&a, &inv).unwrap();
            prop_assert!(ring.eq_mod(&prod, &ring.one(), 12).unwrap());
        }
    }

    #[test]
    fn composition_agrees_pointwise(ring_idx in 0usize..4, c0 in -4i128..5, c1 in -4i128..5, c2 in -4i128..5, d0 in -4i128..5, d1 in -4i128..5, sx in any::<u64>()) {
        let rings = ring_choices();
        let ring = &rings[ring_idx];
        let phi = ConvergentSeries::poly_ints(ring, &[c0, c1, c2]);
        let psi = ConvergentSeries::poly_ints(ring, &[d0, d1]);
        let comp = phi.compose(ring, &psi).unwrap();
        let x = element_from_seed(ring, sx, 10);
        let direct = phi.eval(ring, &psi.eval(ring, &x).unwrap()).unwrap();
        let via = comp.eval(ring, &x).unwrap();
        prop_assert!(ring.eq_mod(&direct, &via, 12).unwrap());
    }
}
