use steiner_core::extremal::{
    check_conditions, extensions_keeping_criterion, sperner_search, two_level_search, SetFamily,
};
use steiner_core::rational::binomial;
use steiner_core::zspace::{extremal_family, max_degree, star_criterion, ExtremalVariant};

#[test]
fn exhaustive_maxima_match_binomials() {
    for m in 2..=5usize {
        let s = sperner_search(m).unwrap();
        assert_eq!(s.size as u128, binomial(m as u64, m as u64 / 2), "antichain m={m}");
        let t = two_level_search(m).unwrap();
        // P[2] without its extremes holds only the two singletons.
        let expect = if m == 2 { 2 } else { binomial(m as u64 + 1, (m as u64 + 1) / 2) };
        assert_eq!(t.size as u128, expect, "3-chain-free m={m}");
        let c = check_conditions(&SetFamily::new(t.family, m).unwrap());
        assert!(c.distinct && c.no3chain);
    }
}

#[test]
fn extremal_families_attain_degree_bound() {
    for n in 3..=6 {
        for v in [ExtremalVariant::Low, ExtremalVariant::High] {
            let fam = extremal_family(n, v).unwrap();
            assert_eq!(fam.len() as u128, max_degree(n).unwrap());
            assert!(star_criterion(&fam).unwrap().is_smt());
        }
    }
}

#[test]
fn extremal_family_local_maximality_n5() {
    for v in [ExtremalVariant::Low, ExtremalVariant::High] {
        assert!(extensions_keeping_criterion(5, v).unwrap().is_empty());
    }
}
