//! Cross-checks the search engine against a reference that filters all
//! m! bijections through the defining equation, on tables small enough
//! for that to finish.

use itertools::Itertools;
use magma_oracle::{
    count_automorphisms, is_automorphism, is_isomorphism, magma_automorphisms, magma_isomorphic,
    refined_colors, CayleyTable,
};
use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn brute_automorphisms(t: &CayleyTable) -> Vec<Vec<u16>> {
    let m = t.size();
    (0..m as u16)
        .permutations(m)
        .filter(|p| is_automorphism(t, p))
        .collect()
}

fn brute_isomorphic(t1: &CayleyTable, t2: &CayleyTable) -> bool {
    if t1.size() != t2.size() {
        return false;
    }
    let m = t1.size();
    (0..m as u16).permutations(m).any(|p| is_isomorphism(t1, t2, &p))
}

fn random_table(rng: &mut impl Rng, m: usize) -> CayleyTable {
    CayleyTable::from_fn(m, |_, _| rng.gen_range(0..m)).unwrap()
}

#[test]
fn engine_agrees_with_brute_force_on_random_magmas() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for m in [1usize, 2, 3, 4, 5, 6] {
        for _ in 0..6 {
            let t = random_table(&mut rng, m);
            let expected = brute_automorphisms(&t);
            let got = magma_automorphisms(&t, None);
            assert_eq!(got, expected, "automorphism stream diverged on\n{}", t.to_csv());
            assert_eq!(
                count_automorphisms(&t),
                BigUint::from(expected.len()),
                "count diverged on\n{}",
                t.to_csv()
            );
        }
    }
}

#[test]
fn engine_agrees_with_brute_force_on_isomorphism() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xfeed);
    for m in [2usize, 3, 4, 5] {
        for _ in 0..8 {
            let t1 = random_table(&mut rng, m);
            let t2 = random_table(&mut rng, m);
            let expected = brute_isomorphic(&t1, &t2);
            match magma_isomorphic(&t1, &t2) {
                Some(p) => {
                    assert!(expected, "engine found a map brute force says cannot exist");
                    assert!(is_isomorphism(&t1, &t2, &p));
                }
                None => assert!(!expected, "engine missed a map brute force found"),
            }
        }
    }
}

#[test]
fn every_emitted_map_satisfies_the_equation_post_hoc() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xab5e);
    for m in [3usize, 5, 6] {
        let t = random_table(&mut rng, m);
        for p in magma_automorphisms(&t, None) {
            assert!(is_automorphism(&t, &p));
        }
    }
    let structured = [
        CayleyTable::from_fn(6, |i, j| (i + j) % 6).unwrap(),
        CayleyTable::from_fn(6, |_, _| 0).unwrap(),
        CayleyTable::from_fn(5, |i, _| i).unwrap(),
    ];
    for t in &structured {
        for p in magma_automorphisms(t, None) {
            assert!(is_automorphism(t, &p));
        }
    }
}

#[test]
fn refinement_never_splits_an_orbit_pair_that_an_automorphism_joins() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xc01a);
    for m in [4usize, 5, 6] {
        for _ in 0..4 {
            let t = random_table(&mut rng, m);
            let colors = refined_colors(&t);
            for p in magma_automorphisms(&t, None) {
                for (i, &v) in p.iter().enumerate() {
                    assert_eq!(
                        colors[i],
                        colors[usize::from(v)],
                        "an automorphism crossed refined blocks on\n{}",
                        t.to_csv()
                    );
                }
            }
        }
    }
}

#[test]
fn symmetric_group_table_has_full_conjugation_plus_outer_count() {
    // S3 as a multiplication table: |Aut(S3)| = |Inn(S3)| = 6.
    let perms: Vec<[u8; 3]> = (0u8..3).permutations(3).map(|p| [p[0], p[1], p[2]]).collect();
    let compose = |p: &[u8; 3], q: &[u8; 3]| [q[p[0] as usize], q[p[1] as usize], q[p[2] as usize]];
    let t = CayleyTable::from_fn(6, |i, j| {
        let r = compose(&perms[i], &perms[j]);
        perms.iter().position(|p| *p == r).unwrap()
    })
    .unwrap();
    assert_eq!(count_automorphisms(&t), BigUint::from(6u32));
    assert_eq!(brute_automorphisms(&t).len(), 6);
}
