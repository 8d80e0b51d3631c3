use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use steiner_core::geometry::SpaceDescriptor;
use steiner_core::oracle::{
    compare_with_star, enumerate_topologies, minimize_topology_exact, OracleOptions, DECISION_MARGIN, STRICT_MARGIN,
};
use steiner_core::verifier::{verify_node_star, StarInstance};
use steiner_core::zspace::{extremal_family, face_point, vertex, ExtremalVariant};
use steiner_core::{q, Rational};

fn random_ray(rng: &mut ChaCha8Rng, space: &SpaceDescriptor) -> Vec<Rational> {
    loop {
        let mut v: Vec<i64> = (0..space.dim()).map(|_| rng.gen_range(-3..=3)).collect();
        if let SpaceDescriptor::ZNorm(_) = space {
            v.push(-v.iter().sum::<i64>());
        }
        if v.iter().any(|&x| x != 0) {
            return v.into_iter().map(|x| Rational::new(x, 2)).collect();
        }
    }
}

#[test]
fn verdicts_match_oracle_in_small_spaces() {
    let spaces = [SpaceDescriptor::ZNorm(2), SpaceDescriptor::ZNorm(3), SpaceDescriptor::L1(2), SpaceDescriptor::Linf(2)];
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let opts = OracleOptions::default();
    for sp in &spaces {
        for _ in 0..15 {
            let k = rng.gen_range(2..=4);
            let rays: Vec<Vec<Rational>> = (0..k).map(|_| random_ray(&mut rng, sp)).collect();
            let inst = StarInstance::from_rays(sp.clone(), rays.clone()).unwrap();
            let v = verify_node_star(&inst).unwrap();
            let c = compare_with_star(sp, &inst.center, &rays, &opts).unwrap();
            if v.is_smt {
                assert!(c.smt_length >= c.star_length * (1.0 - DECISION_MARGIN), "{sp}: oracle beats {rays:?}");
            } else {
                assert!(c.smt_length < c.star_length - STRICT_MARGIN, "{sp}: oracle misses shortening of {rays:?}");
            }
        }
    }
}

#[test]
fn facet_triple_shortens_to_five_halves() {
    let sp = SpaceDescriptor::ZNorm(3);
    let pts: Vec<Vec<Rational>> = [0b0001u64, 0b0101, 0b1101].iter().map(|&s| vertex(s, 4).unwrap().coords().to_vec()).collect();
    let origin = vec![Rational::zero(); 4];
    let c = compare_with_star(&sp, &origin, &pts, &OracleOptions::default()).unwrap();
    assert!((c.star_length - 3.0).abs() < 1e-12);
    assert!(c.smt_length <= 2.5 + DECISION_MARGIN);
    let mut terminals = vec![origin];
    terminals.extend(pts);
    let exact = enumerate_topologies(4)
        .unwrap()
        .iter()
        .map(|t| minimize_topology_exact(t, &terminals, &sp).unwrap())
        .min()
        .unwrap();
    assert_eq!(exact, q(5, 2));
}

#[test]
fn pairs_of_extremal_rays_stay_stars() {
    let sp = SpaceDescriptor::ZNorm(3);
    let rays: Vec<Vec<Rational>> =
        extremal_family(3, ExtremalVariant::Low).unwrap().iter().map(|x| face_point(x).coords().to_vec()).collect();
    let origin = vec![Rational::zero(); 4];
    let opts = OracleOptions::default();
    for i in 0..rays.len() {
        for j in i + 1..rays.len() {
            let c = compare_with_star(&sp, &origin, &[rays[i].clone(), rays[j].clone()], &opts).unwrap();
            assert!((c.smt_length - c.star_length).abs() <= DECISION_MARGIN * c.star_length, "pair {i},{j}");
        }
    }
}
