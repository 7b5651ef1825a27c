mod common;

use common::{matrix, raise, rel_of};
use proptest::prelude::*;
use quantimetric::vrel::{adjunction_holds, direct_image, reindex};
use quantimetric::{Carrier, FiniteMap, Quantale, QuantaleValue, VRel};

fn map(domain: usize, codomain: usize) -> impl Strategy<Value = FiniteMap> {
    prop::collection::vec(0..codomain, domain).prop_map(move |t| FiniteMap::new(t, codomain).unwrap())
}

fn all_bool_rels(k: usize) -> Vec<VRel<usize>> {
    let carrier = Carrier::indexed(k);
    (0u32..1 << (k * k))
        .map(|m| {
            VRel::from_fn(Quantale::bool2(), &carrier, |x, y| QuantaleValue::Bool(m & (1 << (x * k + y)) != 0))
                .unwrap()
        })
        .collect()
}

fn all_maps(domain: usize, codomain: usize) -> Vec<FiniteMap> {
    (0..codomain.pow(domain as u32))
        .map(|mut code| {
            let table = (0..domain)
                .map(|_| {
                    let v = code % codomain;
                    code /= codomain;
                    v
                })
                .collect();
            FiniteMap::new(table, codomain).unwrap()
        })
        .collect()
}

#[test]
fn bool2_adjunction_exhaustive() {
    for (dom, cod) in [(1, 1), (1, 3), (2, 2), (2, 3), (3, 1), (3, 2)] {
        let ps = all_bool_rels(dom);
        let qs = all_bool_rels(cod);
        for f in all_maps(dom, cod) {
            for p in &ps {
                let image = direct_image(&f, p).unwrap();
                for q in &qs {
                    assert!(adjunction_holds(&f, p, q).unwrap());
                    // Independent restatement on the carriers.
                    let lhs = image.leq_on(q, &Carrier::indexed(cod)).unwrap();
                    let rhs = p.leq_on(&reindex(&f, q).unwrap(), &Carrier::indexed(dom)).unwrap();
                    assert_eq!(lhs, rhs, "f={:?}", f.table());
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn reindex_is_functorial(
        (f, g, m) in (1usize..=4, 1usize..=4, 1usize..=4)
            .prop_flat_map(|(a, b, c)| (map(a, b), map(b, c), matrix(c)))
    ) {
        let r = rel_of(&m);
        let gf = f.then(&g).unwrap();
        let lhs = reindex(&gf, &r).unwrap();
        let rhs = reindex(&f, &reindex(&g, &r).unwrap()).unwrap();
        prop_assert!(lhs.approx_eq_on(&rhs, &Carrier::indexed(f.domain())).unwrap());
    }

    #[test]
    fn unit_interval_adjunction(
        (f, mp, mq) in (1usize..=4, 1usize..=4)
            .prop_flat_map(|(a, b)| (map(a, b), matrix(a), matrix(b)))
    ) {
        prop_assert!(adjunction_holds(&f, &rel_of(&mp), &rel_of(&mq)).unwrap());
    }

    #[test]
    fn reindex_and_image_are_monotone(
        (f, m, bump, n, bump2) in (1usize..=4, 1usize..=4)
            .prop_flat_map(|(a, b)| (map(a, b), matrix(b), matrix(b), matrix(a), matrix(a)))
    ) {
        let (r, s) = (rel_of(&m), rel_of(&raise(&m, &bump)));
        let dom = Carrier::indexed(f.domain());
        let cod = Carrier::indexed(f.codomain());
        prop_assert!(reindex(&f, &r).unwrap().leq_on(&reindex(&f, &s).unwrap(), &dom).unwrap());
        let (p, p2) = (rel_of(&n), rel_of(&raise(&n, &bump2)));
        prop_assert!(direct_image(&f, &p).unwrap().leq_on(&direct_image(&f, &p2).unwrap(), &cod).unwrap());
    }

    #[test]
    fn composition_laws(
        (k, a, b, c, bump) in (1usize..=4)
            .prop_flat_map(|k| (Just(k), matrix(k), matrix(k), matrix(k), matrix(k)))
    ) {
        let carrier = Carrier::indexed(k);
        let (r, s, t) = (rel_of(&a), rel_of(&b), rel_of(&c));
        let left = r.compose(&s, &carrier).unwrap().compose(&t, &carrier).unwrap();
        let right = r.compose(&s.compose(&t, &carrier).unwrap(), &carrier).unwrap();
        prop_assert!(left.approx_eq_on(&right, &carrier).unwrap());

        let id = VRel::diagonal(Quantale::unit_interval());
        prop_assert!(id.compose(&r, &carrier).unwrap().approx_eq_on(&r, &carrier).unwrap());
        prop_assert!(r.compose(&id, &carrier).unwrap().approx_eq_on(&r, &carrier).unwrap());

        let r2 = rel_of(&raise(&a, &bump));
        prop_assert!(r.compose(&s, &carrier).unwrap().leq_on(&r2.compose(&s, &carrier).unwrap(), &carrier).unwrap());
        prop_assert!(s.compose(&r, &carrier).unwrap().leq_on(&s.compose(&r2, &carrier).unwrap(), &carrier).unwrap());
    }

    #[test]
    fn json_round_trip(m in (1usize..=4).prop_flat_map(matrix)) {
        let r = rel_of(&m);
        let back = VRel::from_json(Quantale::unit_interval(), &r.to_json()).unwrap();
        prop_assert!(back.approx_eq_on(&r, &Carrier::indexed(m.len())).unwrap());
    }
}
