//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use steiner_core::extremal::{extensions_keeping_criterion, sperner_search, two_level_search};
use steiner_core::geometry::SpaceDescriptor;
use steiner_core::l1l2::{lambda_grid, node_degree_bound, steiner_star_check, BoundVerdict, Surd};
use steiner_core::oracle::{compare_with_star, seed_from_env, OracleOptions, DECISION_MARGIN};
use steiner_core::parens::{count_rooted, count_unrooted, for_each_rooted, for_each_unrooted, labels};
use steiner_core::verifier::{
    moore_check, verify_node_star, verify_node_star_with, verify_steiner_star_with, Route, StarInstance,
    VerifyOptions,
};
use steiner_core::zspace::{
    antichain_equilateral, extremal_family, face_point, max_degree, star_criterion, vertex, ExtremalVariant,
};
use steiner_core::{q, Rational};

type Check = std::result::Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl Into<String>) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn binom(n: u128, k: u128) -> u128 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn degree_values() -> Check {
    let expected = [(3, 10), (4, 20), (5, 35), (6, 70)];
    for (n, want) in expected {
        let got = max_degree(n).map_err(e)?;
        ensure(got == want, format!("max_degree({n}) = {got}, want {want}"))?;
        let fam = extremal_family(n, ExtremalVariant::Low).map_err(e)?;
        ensure(fam.len() as u128 == want, format!("extremal_family({n}) has {} sets", fam.len()))?;
        ensure(star_criterion(&fam).map_err(e)?.is_smt(), format!("criterion rejects extremal_family({n})"))?;
        if n <= 5 {
            for v in [ExtremalVariant::Low, ExtremalVariant::High] {
                let extra = extensions_keeping_criterion(n, v).map_err(e)?;
                ensure(extra.is_empty(), format!("n={n} {v:?}: {} additions keep the criterion", extra.len()))?;
            }
        }
    }
    Ok("10/20/35/70; no single addition survives for n <= 5".into())
}

fn facet_triple_shortening() -> Check {
    let sp = SpaceDescriptor::ZNorm(3);
    let origin = vec![Rational::zero(); 4];
    let verts: Vec<Vec<Rational>> = (1u64..15).map(|s| vertex(s, 4).unwrap().coords().to_vec()).collect();
    let opts = OracleOptions::default();
    for d in sp.dual_vertices().map_err(e)? {
        let on: Vec<&Vec<Rational>> = verts
            .iter()
            .filter(|v| d.iter().zip(v.iter()).map(|(a, b)| a * b).sum::<Rational>() == Rational::one())
            .collect();
        for a in 0..on.len() {
            for b in a + 1..on.len() {
                for c in b + 1..on.len() {
                    let pts = vec![on[a].clone(), on[b].clone(), on[c].clone()];
                    let cmp = compare_with_star(&sp, &origin, &pts, &opts).map_err(e)?;
                    if cmp.smt_length <= 2.5 + DECISION_MARGIN && (cmp.star_length - 3.0).abs() < 1e-12 {
                        return Ok(format!(
                            "oracle {:.9} vs star {} for {:?}",
                            cmp.smt_length,
                            cmp.star_length,
                            pts.iter().map(|p| p.iter().map(Rational::to_string).collect::<Vec<_>>()).collect::<Vec<_>>()
                        ));
                    }
                }
            }
        }
    }
    Err("no facet triple shortened to 5/2".into())
}

fn extremal_configuration() -> Check {
    let fam = extremal_family(3, ExtremalVariant::Low).map_err(e)?;
    let rays: Vec<Vec<Rational>> = fam.iter().map(|x| face_point(x).coords().to_vec()).collect();
    let inst = StarInstance::from_rays(SpaceDescriptor::ZNorm(3), rays.clone()).map_err(e)?;
    let crit = VerifyOptions { route: Route::Criterion, ..VerifyOptions::default() };
    let lp = VerifyOptions { route: Route::Lp, ..VerifyOptions::default() };
    ensure(verify_node_star_with(&inst, &crit).map_err(e)?.is_smt, "criterion rejects the extremal star")?;
    ensure(verify_node_star_with(&inst, &lp).map_err(e)?.is_smt, "LP rejects the extremal star")?;
    let mut small = 0;
    for mask in 1u32..(1 << rays.len()) {
        let sub: Vec<Vec<Rational>> = (0..rays.len()).filter(|i| mask >> i & 1 == 1).map(|i| rays[i].clone()).collect();
        let si = StarInstance::from_rays(SpaceDescriptor::ZNorm(3), sub).map_err(e)?;
        ensure(verify_node_star_with(&si, &crit).map_err(e)?.is_smt, format!("subset {mask:#b} rejected"))?;
        if mask.count_ones() <= 4 {
            ensure(verify_node_star_with(&si, &lp).map_err(e)?.is_smt, format!("LP rejects subset {mask:#b}"))?;
            small += 1;
        }
    }
    Ok(format!("both routes accept; all 1023 sub-stars accepted, {small} of size <= 4 by LP"))
}

fn antichain_bound() -> Check {
    for n in 3..=5 {
        let pts: Vec<Vec<Rational>> = antichain_equilateral(n).map_err(e)?.iter().map(|p| p.coords().to_vec()).collect();
        let want = binom(n as u128 + 1, (n as u128 + 1) / 2);
        ensure(pts.len() as u128 == want, format!("n={n}: {} points, want {want}", pts.len()))?;
        ensure(moore_check(&SpaceDescriptor::ZNorm(n), &pts).map_err(e)?, format!("n={n}: distances not all 2"))?;
        if n == 3 {
            let inst = StarInstance::from_rays(SpaceDescriptor::ZNorm(3), pts).map_err(e)?;
            let lp = VerifyOptions { route: Route::Lp, ..VerifyOptions::default() };
            ensure(verify_steiner_star_with(&inst, &lp).map_err(e)?.is_smt, "LP rejects the n=3 Steiner star")?;
        }
    }
    Ok("6/10/20 equilateral points; n=3 Steiner star accepted by LP".into())
}

fn paren_counts() -> Check {
    let expected = [1u128, 1, 3, 15, 105, 945, 10395];
    for (i, &want) in expected.iter().enumerate() {
        let k = i + 1;
        let mut n = 0u128;
        for_each_rooted(&labels(k), &mut |_| {
            n += 1;
            true
        })
        .map_err(e)?;
        ensure(n == want && count_rooted(k).map_err(e)? == want, format!("k={k}: enumerated {n}, want {want}"))?;
        if k >= 2 {
            let mut u = 0u128;
            for_each_unrooted(&labels(k), &mut |_| {
                u += 1;
                true
            })
            .map_err(e)?;
            ensure(u == expected[k - 2], format!("k={k}: {u} unrooted, want {}", expected[k - 2]))?;
            ensure(count_unrooted(k).map_err(e)? == u, format!("count_unrooted({k})"))?;
        }
    }
    // Ordered binary trees times leaf labelings, over the 2^(k-1) child swaps.
    for k in 1..=10u128 {
        let catalan = binom(2 * (k - 1), k - 1) / k;
        let fact: u128 = (1..=k).product();
        let rooted = count_rooted(k as usize).map_err(e)?;
        ensure(rooted << (k - 1) == catalan * fact, format!("Catalan identity fails at k={k}"))?;
    }
    Ok("1,1,3,15,105,945,10395 enumerated; Catalan identity for k <= 10".into())
}

fn l1l2_thresholds() -> Check {
    let sharp: Surd = "2+sqrt(2)".parse().map_err(e)?;
    ensure(steiner_star_check(2, &sharp).map_err(e)?, "false at 2+sqrt(2)")?;
    let above: Surd = "201/100+sqrt(2)".parse().map_err(e)?;
    ensure(!steiner_star_check(2, &above).map_err(e)?, "true at 2+sqrt(2)+1/100")?;
    let mut grid_points = 0;
    for n in [2, 3, 4, 6] {
        for lam in lambda_grid(n, &q(1, 4)).map_err(e)? {
            ensure(steiner_star_check(n, &lam).map_err(e)?, format!("n={n}: false at {lam}"))?;
            grid_points += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed_from_env(0x1112));
    for n in 1..=4usize {
        for t in 0..1000 {
            let lam = Rational::new(rng.gen_range(1..=100), 100);
            let pts: Vec<Vec<Rational>> = (0..2 * n + 1)
                .map(|_| loop {
                    let p: Vec<i64> = (0..n).map(|_| rng.gen_range(-5..=5)).collect();
                    if p.iter().any(|&x| x != 0) {
                        break p.into_iter().map(|x| Rational::new(x, rng.gen_range(1..=3))).collect();
                    }
                })
                .collect();
            let v = node_degree_bound(&pts, n, &lam).map_err(e)?;
            ensure(matches!(v, BoundVerdict::NotSmt { .. }), format!("n={n} trial {t}: not rejected"))?;
        }
    }
    Ok(format!("sharp at 2+sqrt(2); {grid_points} grid points true; 4000 random stars rejected"))
}

fn classical_spaces() -> Check {
    let opts = VerifyOptions::default();
    for n in 1..=3usize {
        let corners: Vec<Vec<Rational>> = (0..1u32 << n)
            .map(|m| (0..n).map(|i| Rational::from_integer(if m >> i & 1 == 1 { 1 } else { -1 })).collect())
            .collect();
        check_classical(SpaceDescriptor::Linf(n), corners, &opts)?;
    }
    for n in 1..=4usize {
        let cross: Vec<Vec<Rational>> = (0..2 * n)
            .map(|j| {
                (0..n)
                    .map(|i| Rational::from_integer(if i == j / 2 { 1 - 2 * (j % 2) as i64 } else { 0 }))
                    .collect()
            })
            .collect();
        check_classical(SpaceDescriptor::L1(n), cross, &opts)?;
    }
    Ok("linf corners n <= 3 and l1 cross n <= 4 are Steiner stars and equilateral".into())
}

fn check_classical(space: SpaceDescriptor, rays: Vec<Vec<Rational>>, opts: &VerifyOptions) -> std::result::Result<(), String> {
    let name = space.to_string();
    let len = rays.len();
    ensure(moore_check(&space, &rays).map_err(e)?, format!("{name}: distances not all 2"))?;
    let inst = StarInstance::from_rays(space, rays).map_err(e)?;
    ensure(verify_steiner_star_with(&inst, opts).map_err(e)?.is_smt, format!("{name}: {len}-ray star rejected"))
}

fn oracle_agreement() -> Check {
    let sp = SpaceDescriptor::ZNorm(3);
    let mut rng = ChaCha8Rng::seed_from_u64(seed_from_env(0x0c0de));
    let opts = OracleOptions::default();
    let (mut smt, mut gap) = (0, f64::INFINITY);
    let trials = 500;
    for t in 0..trials {
        let k = rng.gen_range(2..=4);
        let rays: Vec<Vec<Rational>> = (0..k)
            .map(|_| loop {
                let mut v: Vec<i64> = (0..3).map(|_| rng.gen_range(-3..=3)).collect();
                v.push(-v.iter().sum::<i64>());
                if v.iter().any(|&x| x != 0) {
                    break v.into_iter().map(|x| Rational::new(x, 2)).collect();
                }
            })
            .collect();
        let inst = StarInstance::from_rays(sp.clone(), rays.clone()).map_err(e)?;
        let v = verify_node_star(&inst).map_err(e)?;
        let c = compare_with_star(&sp, &inst.center, &rays, &opts).map_err(e)?;
        if v.is_smt != c.star_is_smt {
            return Err(format!(
                "trial {t}: verifier {} but star {} vs oracle {}",
                v.is_smt, c.star_length, c.smt_length
            ));
        }
        if v.is_smt {
            smt += 1;
        } else {
            gap = gap.min((c.star_length - c.smt_length) / c.star_length);
        }
    }
    Ok(format!("{trials} instances, {smt} SMT, 0 disagreements, smallest relative gap {gap:.3}"))
}

fn sperner_values() -> Check {
    for m in 1..=5usize {
        let got = sperner_search(m).map_err(e)?.size as u128;
        let want = binom(m as u128, m as u128 / 2);
        ensure(got == want, format!("antichain m={m}: {got}, want {want}"))?;
    }
    for m in 2..=5usize {
        let got = two_level_search(m).map_err(e)?.size as u128;
        // With ∅ and [m] excluded, P[2] has only two usable sets.
        let want = if m == 2 { 2 } else { binom(m as u128 + 1, (m as u128 + 1) / 2) };
        ensure(got == want, format!("two-level m={m}: {got}, want {want}"))?;
    }
    Ok("antichains 1,2,3,6,10; 3-chain-free 2,4,10,20".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("degree values", degree_values),
        ("facet triple shortening", facet_triple_shortening),
        ("extremal configuration", extremal_configuration),
        ("antichain lower bound", antichain_bound),
        ("parenthesization counts", paren_counts),
        ("l1+l2 thresholds", l1l2_thresholds),
        ("classical spaces", classical_spaces),
        ("oracle agreement", oracle_agreement),
        ("family maxima", sperner_values),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let r = f();
        let secs = t.elapsed().as_secs_f64();
        match r {
            Ok(msg) => println!("PASS {} {name} ({secs:.1}s): {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {} {name} ({secs:.1}s): {msg}", i + 1)
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
