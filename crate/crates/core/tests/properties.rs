use proptest::prelude::*;

use tuv_core::bundled::{self, TheoremId};
use tuv_core::repenum::{count, count_table, represented_bitmap};
use tuv_core::transfer::{bad_set, find_similitudes, good_set, DEFAULT_POOL_CAP};
use tuv_core::universality::{liouville_sieve, phi_psi_crosscheck, sun_sieve, Triple};
use tuv_core::{IntVector3, Similitude};

#[test]
fn sweep_agrees_with_per_value_counts() {
    for (name, f) in bundled::all_forms() {
        let bits = represented_bitmap(&f, 2000).unwrap();
        for m in 0..=2000 {
            assert_eq!(bits.get(m), count(&f, m).unwrap() > 0, "{name}, m = {m}");
        }
    }
}

#[test]
fn counts_agree_across_bases_of_one_form() {
    let a = count_table(&bundled::f_235(), 2000).unwrap();
    let b = count_table(&bundled::mf_235(), 2000).unwrap();
    assert_eq!(a, b);
}

#[test]
fn sieves_are_stable_in_the_bound() {
    let sun = sun_sieve(10, 1000);
    assert_eq!(sun.len(), 17);
    assert_eq!(sun, sun_sieve(10, 100_000));
    let liouville = liouville_sieve(6, 1000);
    assert_eq!(liouville.len(), 7);
    assert_eq!(liouville, liouville_sieve(6, 100_000));
}

#[test]
fn crosscheck_holds_for_sun_triples() {
    for t in sun_sieve(10, 10_000) {
        let r = phi_psi_crosscheck(&t, 1000).unwrap();
        assert!(r.holds(), "{t}: {:?}", r.counterexample);
    }
    assert!(phi_psi_crosscheck(&Triple::new(1, 1, 3).unwrap(), 100).unwrap().holds());
}

#[test]
fn good_vectors_have_checkable_witnesses() {
    for id in [TheoremId::T226, TheoremId::T235, TheoremId::T237] {
        let c = id.certificate().unwrap();
        let pool = find_similitudes(&c.f, &c.g, c.d, DEFAULT_POOL_CAP).unwrap();
        let good = good_set(&c.f, &c.g, c.d, c.a, &pool);
        for (v, i) in &good.witnesses {
            let image = pool[*i].matrix.act(&v.as_int()).unwrap();
            assert!(image.0.iter().all(|x| x % c.d == 0));
        }
        let bad = bad_set(&c.f, &c.g, c.d, c.a, &pool);
        assert!(bad.vectors.is_disjoint(&good.vectors));
    }
}

/// Every `(name, T)` of a certificate, as auto-similitudes of `g`.
fn certificate_similitudes() -> Vec<(TheoremId, Similitude)> {
    let mut out = Vec::new();
    for id in [TheoremId::T226, TheoremId::T235, TheoremId::T237] {
        let c = id.certificate().unwrap();
        for t in c.matrices.values() {
            let s = Similitude::auto(*t, c.g, c.d).unwrap();
            out.push((id, s.scaled_inverse().unwrap()));
            out.push((id, s));
        }
    }
    out
}

#[test]
fn inverses_and_eigenvectors() {
    for (_, s) in certificate_similitudes() {
        let inv = s.scaled_inverse().unwrap();
        let d2 = s.scale * s.scale;
        assert_eq!(s.matrix.checked_mul(&inv.matrix).unwrap(), tuv_core::Mat3::scalar(d2));
        assert_eq!(s.matrix.det().abs(), (s.scale as i128).pow(3));
        if let Ok((z, lambda)) = s.eigen_pair() {
            assert!(z.is_primitive());
            assert_eq!(s.matrix.act(&z).unwrap().0, z.0.map(|x| x * lambda));
        }
    }
}

proptest! {
    #[test]
    fn transfer_preserves_values(idx in 0usize..24, w in prop::array::uniform3(-30i64..30), r in prop::array::uniform3(0i64..40)) {
        let sims = certificate_similitudes();
        let (id, s) = &sims[idx % sims.len()];
        let c = id.certificate().unwrap();
        // steer v into the kernel of T mod d by scaling a random vector
        let v = IntVector3([0, 1, 2].map(|i| w[i] * c.d + r[i]));
        let tv = s.matrix.act(&v).unwrap();
        if tv.0.iter().all(|x| x % s.scale == 0) {
            let image = IntVector3(tv.0.map(|x| x / s.scale));
            prop_assert_eq!(c.g.evaluate(&image).unwrap(), c.g.evaluate(&v).unwrap());
        }
        let dv = IntVector3(v.0.map(|x| x * s.scale));
        let image = IntVector3(s.matrix.act(&dv).unwrap().0.map(|x| x / s.scale));
        prop_assert_eq!(c.g.evaluate(&image).unwrap(), s.scale * s.scale * c.g.evaluate(&v).unwrap());
    }

    #[test]
    fn evaluation_is_even(idx in 0usize..11, v in prop::array::uniform3(-1000i64..1000)) {
        let forms = bundled::all_forms();
        let (_, f) = forms[idx];
        let v = IntVector3(v);
        prop_assert_eq!(f.evaluate(&v).unwrap(), f.evaluate(&v.neg()).unwrap());
        prop_assert!(f.evaluate(&v).unwrap() > 0 || v.is_zero());
    }
}
