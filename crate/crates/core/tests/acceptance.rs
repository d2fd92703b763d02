//! The release gate. Each test covers one numbered criterion, prints a
//! single PASS/FAIL line (visible under `--nocapture`), and enforces
//! its runtime budget. Every comparison in this suite is exact; nothing
//! here is approximate.

use std::collections::BTreeSet;
use std::ops::ControlFlow;
use std::panic::AssertUnwindSafe;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use magma_oracle::{count_automorphisms, magma_automorphisms, magma_isomorphic};
use sandwich_core::aut::{aut_order, AutEngine, Automorphism};
use sandwich_core::cayley::{cayley, cayley_with};
use sandwich_core::element::{enumerate_all, random_element, universe_size, PartialInjection};
use sandwich_core::sandwich::{product_with, SandwichContext};

fn gate(name: &str, budget: Duration, run: impl FnOnce()) {
    let started = Instant::now();
    let outcome = std::panic::catch_unwind(AssertUnwindSafe(run));
    let elapsed = started.elapsed();
    match outcome {
        Ok(()) if elapsed <= budget => {
            println!("criterion {name}: PASS ({elapsed:.2?}, budget {budget:.0?})");
        }
        Ok(()) => {
            println!("criterion {name}: FAIL (exceeded budget: {elapsed:.2?} > {budget:.0?})");
            panic!("criterion {name} exceeded its runtime budget");
        }
        Err(cause) => {
            println!("criterion {name}: FAIL ({elapsed:.2?})");
            std::panic::resume_unwind(cause);
        }
    }
}

fn ctx(n: usize, k: usize) -> SandwichContext {
    SandwichContext::with_rank(n, k).unwrap()
}

#[test]
fn criterion_1_automorphism_counts_agree_three_ways() {
    gate("1", Duration::from_secs(60), || {
        let expected: [(usize, usize, u64); 6] = [
            (1, 1, 1),
            (2, 1, 1),
            (2, 2, 2),
            (3, 1, 1_474_560),
            (3, 2, 2),
            (3, 3, 6),
        ];
        for (n, k, count) in expected {
            let c = ctx(n, k);
            let oracle = count_automorphisms(&cayley(&c).unwrap());
            let formula = aut_order(&c).unwrap();
            let engine = AutEngine::new(&c).unwrap();
            let enumerated = engine.for_each_aut(|_| ControlFlow::Continue(())).unwrap();
            assert_eq!(oracle, BigUint::from(count), "oracle count at n={n} k={k}");
            assert_eq!(formula.order, oracle, "formula vs oracle at n={n} k={k}");
            assert!(!formula.degenerate);
            assert_eq!(BigUint::from(enumerated), oracle, "enumeration at n={n} k={k}");
        }
    });
}

#[test]
fn criterion_2_zero_block_case_is_degenerate() {
    gate("2", Duration::from_secs(5), || {
        let c = ctx(2, 0);
        let oracle = count_automorphisms(&cayley(&c).unwrap());
        assert_eq!(oracle, BigUint::from(720u32));

        // (|universe| - 1)!: any bijection fixing the empty element.
        let m = universe_size(2);
        assert_eq!(m, 7);
        let null_count: BigUint = (1..m).map(BigUint::from).product();
        assert_eq!(oracle, null_count);

        let reported = aut_order(&c).unwrap();
        assert_eq!(reported.order, oracle);
        assert!(reported.degenerate, "the k = 0 case must be flagged");

        // The k >= 1 formula would give 0!·(2!)²·6! = 2880; the
        // mismatch is the theorem's implicit k >= 1 hypothesis.
        let class_sizes: Vec<usize> =
            c.classes().unwrap().iter().map(|cl| cl.members.len()).collect();
        assert_eq!(class_sizes, [1, 6]);
        let naive: BigUint = BigUint::from(2880u32);
        assert_ne!(reported.order, naive);
    });
}

#[test]
fn criterion_3_rank_decides_isomorphism_and_normalization_is_one() {
    gate("3", Duration::from_secs(60), || {
        for n in 1..=3usize {
            // One middle element per rank: the identity on {1..r}.
            let reps: Vec<PartialInjection> = (0..=n)
                .map(|r| PartialInjection::identity_on(n, &(1..=r).collect()))
                .collect();
            let tables: Vec<_> = reps.iter().map(|s| cayley_with(n, s).unwrap()).collect();
            for (i, a) in reps.iter().enumerate() {
                for (j, b) in reps.iter().enumerate() {
                    let found = magma_isomorphic(&tables[i], &tables[j]).is_some();
                    assert_eq!(
                        found,
                        a.rank() == b.rank(),
                        "n={n}: isomorphism search on ranks {i} and {j}"
                    );
                }
            }
        }

        let universe = enumerate_all(3).unwrap();
        for a in &universe {
            let norm = sandwich_core::sandwich::normalize(a);
            let e = PartialInjection::identity_on(3, &(1..=a.rank()).collect());
            assert_eq!(norm.q.compose(&e).unwrap().compose(&norm.p).unwrap(), *a);
            for x in &universe {
                for y in &universe {
                    let mapped = norm.map(&product_with(a, x, y).unwrap()).unwrap();
                    let direct =
                        product_with(&e, &norm.map(x).unwrap(), &norm.map(y).unwrap()).unwrap();
                    assert_eq!(mapped, direct, "a={a} x={x} y={y}");
                }
            }
        }
    });
}

#[test]
fn criterion_4_factorization_round_trips_exactly() {
    gate("4", Duration::from_secs(120), || {
        // Every oracle-emitted automorphism splits and recomposes.
        for (n, k, expected) in [(2, 1, 1usize), (3, 2, 2), (3, 3, 6)] {
            let c = ctx(n, k);
            let engine = AutEngine::new(&c).unwrap();
            let emitted = magma_automorphisms(&cayley(&c).unwrap(), None);
            assert_eq!(emitted.len(), expected);
            for images in emitted {
                let sigma =
                    engine.verified(Automorphism::from_images(images).unwrap()).unwrap();
                let f = engine.factorize(&sigma).unwrap();
                let back =
                    engine.tau(&f.triple).compose(&engine.pi(&f.class_perm).unwrap()).unwrap();
                assert_eq!(back, sigma);
            }
        }

        // Structured samples at (3,1): every triple crossed with seeded
        // random class shuffles.
        let c = ctx(3, 1);
        let engine = AutEngine::new(&c).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0x0f61);
        let triples = engine.all_triples();
        let mut samples = 0usize;
        for t in &triples {
            let tau = engine.tau(t);
            for _ in 0..250 {
                let perms: Vec<Vec<u32>> = engine
                    .classes()
                    .iter()
                    .map(|cl| {
                        let mut p: Vec<u32> = (0..cl.members.len() as u32).collect();
                        p.shuffle(&mut rng);
                        p
                    })
                    .collect();
                let cp = engine.class_perm(perms).unwrap();
                let sigma = tau.compose(&engine.pi(&cp).unwrap()).unwrap();
                let f = engine.factorize(&sigma).unwrap();
                assert_eq!(f.triple, *t);
                assert_eq!(f.class_perm, cp);
                let back =
                    engine.tau(&f.triple).compose(&engine.pi(&f.class_perm).unwrap()).unwrap();
                assert_eq!(back, sigma);
                samples += 1;
            }
        }
        assert!(samples >= 1000, "only {samples} structured samples");
    });
}

#[test]
fn criterion_5_lemma_suite_exhaustive() {
    gate("5", Duration::from_secs(60), || {
        for n in 1..=3usize {
            let universe = enumerate_all(n).unwrap();
            for k in 0..=n {
                let c = ctx(n, k);
                let empty = PartialInjection::empty(n);

                for x in &universe {
                    // Idempotent characterization vs the definition.
                    let definitional = c.product(x, x).unwrap() == *x;
                    assert_eq!(c.is_idempotent(x), definitional, "n={n} k={k} x={x}");

                    // Annihilator characterizations vs the definitions.
                    let left = universe.iter().all(|y| c.product(x, y).unwrap() == empty);
                    let right = universe.iter().all(|y| c.product(y, x).unwrap() == empty);
                    assert_eq!(c.in_ann_l(x), left, "n={n} k={k} x={x}");
                    assert_eq!(c.in_ann_r(x), right, "n={n} k={k} x={x}");
                    assert_eq!(c.in_ann(x), left && right);

                    // Decomposability is the rank bound, witnessed.
                    assert_eq!(c.is_decomposable(x), x.rank() <= k);
                    if x.rank() <= k {
                        let (b, cc) = c.decompose(x).unwrap();
                        assert_eq!(c.product(&b, &cc).unwrap(), *x);
                    } else {
                        assert!(c.decompose(x).is_err());
                    }
                }

                // Natural order vs domain inclusion, all idempotent pairs.
                let idempotents = c.idempotents();
                assert_eq!(idempotents.len(), 1 << k);
                for f in &idempotents {
                    for h in &idempotents {
                        let definitional = c.product(f, h).unwrap() == *f
                            && c.product(h, f).unwrap() == *f;
                        assert_eq!(c.natural_leq(f, h).unwrap(), definitional);
                        assert_eq!(definitional, f.dom().is_subset(&h.dom()));
                    }
                }

                assert!(c.congruence_violations().unwrap().is_empty(), "n={n} k={k}");
            }
        }

        // Rank preservation and the three equivariance identities for
        // every generated block automorphism.
        for n in 1..=3usize {
            for k in 1..=n {
                let engine = AutEngine::new(&ctx(n, k)).unwrap();
                let c = engine.ctx();
                for t in engine.all_triples() {
                    let tau = engine.tau(&t);
                    for (i, a) in engine.elements().iter().enumerate() {
                        let image = &engine.elements()[tau.apply(i)];
                        assert_eq!(image.rank(), a.rank());
                        let pa = c.profile(a);
                        let pb = c.profile(image);
                        let mapped =
                            |s: &BTreeSet<usize>, f: &sandwich_core::perm::BlockPerm| {
                                s.iter().map(|&x| f.apply(x)).collect::<BTreeSet<usize>>()
                            };
                        assert_eq!(*pb.m1(), mapped(pa.m1(), &t.g));
                        assert_eq!(*pb.m2(), mapped(pa.m2(), &t.g));
                        assert_eq!(*pb.m3(), mapped(pa.m3(), &t.h1));
                        for &x in pa.m1() {
                            assert_eq!(image.apply(t.g.apply(x)), a.apply(x).map(|y| t.g.apply(y)));
                        }
                        for &x in pa.m2() {
                            assert_eq!(
                                image.apply(t.g.apply(x)),
                                a.apply(x).map(|y| t.h2.apply(y))
                            );
                        }
                        for &x in pa.m3() {
                            assert_eq!(
                                image.apply(t.h1.apply(x)),
                                a.apply(x).map(|y| t.g.apply(y))
                            );
                        }
                    }
                }
            }
        }
    });
}

#[test]
fn criterion_6_composition_algebra_and_universe_counts() {
    gate("6", Duration::from_secs(10), || {
        let universe = enumerate_all(2).unwrap();
        for x in &universe {
            for y in &universe {
                for z in &universe {
                    let left = x.compose(y).unwrap().compose(z).unwrap();
                    let right = x.compose(&y.compose(z).unwrap()).unwrap();
                    assert_eq!(left, right);
                }
            }
        }

        for n in [3usize, 4] {
            let mut rng = ChaCha8Rng::seed_from_u64(0xa550c);
            for _ in 0..100_000 {
                let x = random_element(n, &mut rng);
                let y = random_element(n, &mut rng);
                let z = random_element(n, &mut rng);
                let left = x.compose(&y).unwrap().compose(&z).unwrap();
                let right = x.compose(&y.compose(&z).unwrap()).unwrap();
                assert_eq!(left, right);
            }
        }

        assert_eq!(
            (1..=4).map(universe_size).collect::<Vec<_>>(),
            [2, 7, 34, 209]
        );
        for n in 1..=4usize {
            assert_eq!(enumerate_all(n).unwrap().len() as u64, universe_size(n));
        }
    });
}
