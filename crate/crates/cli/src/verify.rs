//! The invariant suite behind `verify`. Each check passes, is skipped
//! with a reason when the context is too large for it, or reports the
//! first counterexample found. Exhaustive where the universe allows,
//! seeded sampling otherwise.

use std::ops::ControlFlow;

use num_bigint::BigUint;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use magma_oracle::count_automorphisms;
use sandwich_core::aut::{aut_order, AutEngine};
use sandwich_core::cayley::cayley;
use sandwich_core::element::{enumerate_all, universe_size, PartialInjection};
use sandwich_core::sandwich::{normalize, SandwichContext};
use sandwich_core::Result;

#[derive(Serialize)]
pub struct Report {
    pub checks: Vec<Check>,
    pub ok: bool,
}

#[derive(Serialize)]
pub struct Check {
    pub name: &'static str,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Serialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Skipped,
    Violation,
}

fn ok(name: &'static str) -> Check {
    Check { name, status: Status::Ok, detail: None }
}

fn skipped(name: &'static str, why: impl Into<String>) -> Check {
    Check { name, status: Status::Skipped, detail: Some(why.into()) }
}

fn outcome(name: &'static str, bad: Option<String>) -> Check {
    match bad {
        None => ok(name),
        Some(detail) => Check { name, status: Status::Violation, detail: Some(detail) },
    }
}

const SAMPLE: usize = 10_000;
const EXHAUSTIVE_M: usize = 250;

pub fn run(ctx: &SandwichContext, seed: u64, cap: usize) -> Result<Report> {
    let n = ctx.n();
    let k = ctx.k();
    let universe = enumerate_all(n)?;
    let m = universe.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks: Vec<Check> = Vec::new();

    checks.push(outcome(
        "universe-count",
        (m as u64 != universe_size(n))
            .then(|| format!("enumerated {m}, expected {}", universe_size(n))),
    ));

    // Associativity of plain composition and of the sandwich product:
    // exhaustive triples up to the three-element universe, sampled
    // beyond that.
    for (name, sandwiched) in
        [("compose-associativity", false), ("product-associativity", true)]
    {
        let probe = |x: &PartialInjection,
                     y: &PartialInjection,
                     z: &PartialInjection|
         -> Result<Option<String>> {
            let (left, right) = if sandwiched {
                (
                    ctx.product(&ctx.product(x, y)?, z)?,
                    ctx.product(x, &ctx.product(y, z)?)?,
                )
            } else {
                (x.compose(y)?.compose(z)?, x.compose(&y.compose(z)?)?)
            };
            Ok((left != right).then(|| format!("x={x} y={y} z={z}")))
        };
        let mut bad = None;
        if m <= 34 {
            'all: for x in &universe {
                for y in &universe {
                    for z in &universe {
                        if let Some(d) = probe(x, y, z)? {
                            bad = Some(d);
                            break 'all;
                        }
                    }
                }
            }
        } else {
            for _ in 0..SAMPLE {
                let x = &universe[rng.gen_range(0..m)];
                let y = &universe[rng.gen_range(0..m)];
                let z = &universe[rng.gen_range(0..m)];
                if let Some(d) = probe(x, y, z)? {
                    bad = Some(d);
                    break;
                }
            }
        }
        checks.push(outcome(name, bad));
    }

    {
        let mut bad = None;
        for x in &universe {
            let definitional = ctx.product(x, x)? == *x;
            if ctx.is_idempotent(x) != definitional {
                bad = Some(format!("x={x}"));
                break;
            }
        }
        checks.push(outcome("idempotent-characterization", bad));
    }

    {
        let empty = PartialInjection::empty(n);
        let xs: Vec<&PartialInjection> = if m <= EXHAUSTIVE_M {
            universe.iter().collect()
        } else {
            (0..200).map(|_| &universe[rng.gen_range(0..m)]).collect()
        };
        let mut bad = None;
        for x in xs {
            let mut left = true;
            let mut right = true;
            for y in &universe {
                left = left && ctx.product(x, y)? == empty;
                right = right && ctx.product(y, x)? == empty;
                if !left && !right {
                    break;
                }
            }
            if ctx.in_ann_l(x) != left
                || ctx.in_ann_r(x) != right
                || ctx.in_ann(x) != (left && right)
            {
                bad = Some(format!("x={x}"));
                break;
            }
        }
        checks.push(outcome("annihilator-characterization", bad));
    }

    {
        let idempotents = ctx.idempotents();
        let mut bad = (idempotents.len() != 1 << k)
            .then(|| format!("{} idempotents, expected {}", idempotents.len(), 1 << k));
        if bad.is_none() {
            'all: for f in &idempotents {
                for h in &idempotents {
                    let definitional =
                        ctx.product(f, h)? == *f && ctx.product(h, f)? == *f;
                    if ctx.natural_leq(f, h)? != definitional
                        || definitional != f.dom().is_subset(&h.dom())
                    {
                        bad = Some(format!("f={f} h={h}"));
                        break 'all;
                    }
                }
            }
        }
        checks.push(outcome("natural-order", bad));
    }

    {
        let mut bad = None;
        for x in &universe {
            if ctx.is_decomposable(x) != (x.rank() <= k) {
                bad = Some(format!("x={x}: decomposability is not the rank bound"));
                break;
            }
            if x.rank() <= k {
                let (b, c) = ctx.decompose(x)?;
                if ctx.product(&b, &c)? != *x {
                    bad = Some(format!("x={x}: witness does not multiply back"));
                    break;
                }
            } else if ctx.decompose(x).is_ok() {
                bad = Some(format!("x={x}: indecomposable element got a witness"));
                break;
            }
        }
        checks.push(outcome("decomposability-witnesses", bad));
    }

    if m <= 1600 {
        let violations = ctx.congruence_violations()?;
        checks.push(outcome(
            "congruence-constancy",
            violations
                .first()
                .map(|(ra, a, rb, b)| format!("({ra})*({rb}) differs from ({a})*({b})")),
        ));
    } else {
        checks.push(skipped(
            "congruence-constancy",
            format!("universe size {m} too large for the all-pairs check"),
        ));
    }

    {
        let s = ctx.sandwich();
        let norm = normalize(s);
        let e = PartialInjection::identity_on(n, &(1..=s.rank()).collect());
        let mut bad = (norm.q.compose(&e)?.compose(&norm.p)? != *s)
            .then(|| "q.e.p does not rebuild the sandwich".to_string());
        let probe = |x: &PartialInjection, y: &PartialInjection| -> Result<Option<String>> {
            let product = x.compose(s)?.compose(y)?;
            let mapped = norm.map(&product)?;
            let direct = norm.map(x)?.compose(&e)?.compose(&norm.map(y)?)?;
            Ok((mapped != direct).then(|| format!("x={x} y={y}")))
        };
        if bad.is_none() {
            if m <= EXHAUSTIVE_M {
                'all: for x in &universe {
                    for y in &universe {
                        if let Some(d) = probe(x, y)? {
                            bad = Some(d);
                            break 'all;
                        }
                    }
                }
            } else {
                for _ in 0..SAMPLE {
                    let x = &universe[rng.gen_range(0..m)];
                    let y = &universe[rng.gen_range(0..m)];
                    if let Some(d) = probe(x, y)? {
                        bad = Some(d);
                        break;
                    }
                }
            }
        }
        checks.push(outcome("normalization-homomorphism", bad));
    }

    if k == 0 {
        checks.push(skipped("block-automorphisms", "needs k >= 1"));
    } else {
        let triples: usize = (1..=k).product::<usize>()
            * (1..=n - k).product::<usize>().pow(2);
        if triples.saturating_mul(m * m) > 20_000_000 {
            checks.push(skipped(
                "block-automorphisms",
                format!("{triples} triples over {m} elements is too large"),
            ));
        } else {
            let engine = AutEngine::new(ctx)?;
            let mut bad = None;
            'triples: for t in engine.all_triples() {
                let images = engine.tau_images(&t);
                let label = || {
                    format!(
                        "g={} h1={} h2={}",
                        t.g.one_line(),
                        t.h1.one_line(),
                        t.h2.one_line()
                    )
                };
                if !engine.is_automorphism(&images) {
                    bad = Some(format!("{}: conjugation is not an automorphism", label()));
                    break;
                }
                for (i, a) in engine.elements().iter().enumerate() {
                    let image = &engine.elements()[usize::from(images[i])];
                    if image.rank() != a.rank() {
                        bad = Some(format!("{}: rank changed on {a}", label()));
                        break 'triples;
                    }
                    let pa = ctx.profile(a);
                    let pb = ctx.profile(image);
                    let moved = |s: &sandwich_core::PointSet,
                                 f: &sandwich_core::perm::BlockPerm| {
                        s.iter().map(|&x| f.apply(x)).collect::<sandwich_core::PointSet>()
                    };
                    let sets_hold = *pb.m1() == moved(pa.m1(), &t.g)
                        && *pb.m2() == moved(pa.m2(), &t.g)
                        && *pb.m3() == moved(pa.m3(), &t.h1);
                    let values_hold = pa
                        .m1()
                        .iter()
                        .all(|&x| image.apply(t.g.apply(x)) == a.apply(x).map(|y| t.g.apply(y)))
                        && pa.m2().iter().all(|&x| {
                            image.apply(t.g.apply(x)) == a.apply(x).map(|y| t.h2.apply(y))
                        })
                        && pa.m3().iter().all(|&x| {
                            image.apply(t.h1.apply(x)) == a.apply(x).map(|y| t.g.apply(y))
                        });
                    if !sets_hold || !values_hold {
                        bad = Some(format!("{}: equivariance fails on {a}", label()));
                        break 'triples;
                    }
                }
            }
            checks.push(outcome("block-automorphisms", bad));
        }
    }

    if m > cap {
        checks.push(skipped(
            "count-agreement",
            format!("universe size {m} exceeds the table cap {cap}"),
        ));
    } else {
        let counted = count_automorphisms(&cayley(ctx)?);
        let expected = aut_order(ctx)?;
        checks.push(outcome(
            "count-agreement",
            (counted != expected.order)
                .then(|| format!("oracle {counted}, formula {}", expected.order)),
        ));
    }

    if k == 0 {
        checks.push(skipped("enumeration-agreement", "needs k >= 1"));
    } else {
        let expected = aut_order(ctx)?.order;
        if expected > BigUint::from(10_000u32) {
            checks.push(skipped(
                "enumeration-agreement",
                format!("order {expected} too large to stream"),
            ));
        } else {
            let engine = AutEngine::new(ctx)?;
            let counted = engine.for_each_aut(|_| ControlFlow::Continue(()))?;
            checks.push(outcome(
                "enumeration-agreement",
                (BigUint::from(counted) != expected)
                    .then(|| format!("streamed {counted}, formula {expected}")),
            ));
        }
    }

    let ok = checks.iter().all(|c| c.status != Status::Violation);
    Ok(Report { checks, ok })
}
