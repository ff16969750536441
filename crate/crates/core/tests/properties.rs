//! Invariants checked on random instances. Each case draws a seed and
//! builds its instance with a seeded generator.

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qpolis::bits::bits;
use qpolis::copres::{disjoint_union, lift, product};
use qpolis::finite::enumerate::random_space;
use qpolis::game::{
    play, referee, strat_finite, winner_convergent, winner_strong, RandomI, Round, StrategyII, Verdict,
};
use qpolis::points::{
    baire_to_spower, check_relations, named_real, observed, prefix_sequence, rational_stream, ConstantStream,
    MetricStream, PointStream, NAMED_REALS,
};
use qpolis::posite::{coidl_space, filt_space, generic_prime_filter, pfilt_space, random_posite, upset_space, Posite};
use qpolis::powerspace::powerspace;
use qpolis::rational::parse_q;
use qpolis::verify::{run_suite, SuiteParams};
use qpolis::{BasicOpen, Copresentation, FiniteMap, FiniteSpace, Index, OpenCode, Relation};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn is_subset(a: u64, b: u64) -> bool {
    a & !b == 0
}

// ---- finite spaces -------------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn opens_form_a_topology(seed: u64, n in 0usize..=7) {
        let x = random_space(&mut rng(seed), n);
        let opens: BTreeSet<u64> = x.opens().iter().copied().collect();
        prop_assert!(opens.contains(&0));
        prop_assert!(opens.contains(&x.full()));
        for &a in &opens {
            for &b in &opens {
                prop_assert!(opens.contains(&(a | b)));
                prop_assert!(opens.contains(&(a & b)));
            }
        }
        // T0: distinct points have distinct neighbourhood filters
        for p in 0..n {
            for q in 0..p {
                prop_assert!(x.up(p) != x.up(q));
            }
        }
    }

    #[test]
    fn non_t0_subbases_are_rejected(n in 2usize..=6, sub in proptest::collection::vec(any::<u64>(), 0..5), p in 0usize..6, q in 0usize..6) {
        let (p, q) = (p % n, q % n);
        prop_assume!(p != q);
        // make p and q indistinguishable
        let glue = |s: u64| if s >> p & 1 == 1 || s >> q & 1 == 1 { s | 1 << p | 1 << q } else { s };
        let sub: Vec<u64> = sub.iter().map(|&s| glue(s & ((1 << n) - 1))).collect();
        prop_assert!(FiniteSpace::from_subbasis(n, &sub).is_err());
    }

    #[test]
    fn map_continuity_and_openness_match_brute_force(seed: u64, n in 1usize..=5, m in 1usize..=5) {
        let mut r = rng(seed);
        let x = random_space(&mut r, n);
        let y = random_space(&mut r, m);
        let graph: Vec<usize> = (0..n).map(|_| rand::Rng::gen_range(&mut r, 0..m)).collect();
        let preimage = |s: u64| (0..n).filter(|&p| s >> graph[p] & 1 == 1).fold(0u64, |a, p| a | 1 << p);
        let image = |s: u64| bits(s).fold(0u64, |a, p| a | 1 << graph[p]);
        let continuous = y.opens().iter().all(|&v| x.is_open(preimage(v)));
        let f = FiniteMap::new(x.clone(), y.clone(), graph.clone()).unwrap();
        prop_assert_eq!(f.is_continuous(), continuous);
        let open = x.opens().iter().all(|&u| y.is_open(image(u)));
        prop_assert_eq!(f.is_open_map(), open);
    }
}

// ---- copresentations -----------------------------------------------------

/// Relations as pairs of generator lists.
type Rels = Vec<(Vec<u64>, Vec<u64>)>;

/// A finite copresentation on `n` natural indices. Each generator is a mask
/// of indices read as a basic open.
fn copres_from_masks(n: usize, rels: &Rels) -> Copresentation {
    let code = |gens: &[u64]| {
        OpenCode::finite(
            gens.iter()
                .map(|&g| bits(g & ((1 << n) - 1)).map(|i| Index::Nat(i as u32)).collect::<BasicOpen>())
                .collect(),
        )
    };
    let relations = rels.iter().map(|(a, c)| Relation::new(code(a), code(c))).collect();
    Copresentation::finite((0..n as u32).map(Index::Nat).collect(), relations, "random").unwrap()
}

/// Every `z ⊆ n` satisfying all relations, by exhaustion.
fn brute_denotation(n: usize, rels: &Rels) -> Vec<u64> {
    let mask = (1u64 << n) - 1;
    let holds = |gens: &[u64], z: u64| gens.iter().any(|&g| is_subset(g & mask, z));
    (0..1u64 << n).filter(|&z| rels.iter().all(|(a, c)| !holds(a, z) || holds(c, z))).collect()
}

fn random_relations() -> impl Strategy<Value = (usize, Rels)> {
    (1usize..=4).prop_flat_map(|n| {
        let gens = proptest::collection::vec(0u64..1 << n, 0..3);
        (Just(n), proptest::collection::vec((gens.clone(), gens), 0..4))
    })
}

fn space_of(c: &Copresentation) -> FiniteSpace {
    c.denotation_space().unwrap().space
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn denotation_matches_exhaustion((n, rels) in random_relations()) {
        let c = copres_from_masks(n, &rels);
        prop_assert_eq!(c.denotation().unwrap(), brute_denotation(n, &rels));
    }

    #[test]
    fn constant_streams_are_points_exactly_when_clean((n, rels) in random_relations(), z: u64) {
        let c = copres_from_masks(n, &rels);
        let z = z & ((1 << n) - 1);
        let p = ConstantStream(bits(z).map(|i| Index::Nat(i as u32)).collect());
        let rep = check_relations(&p, &c, 2);
        let member = c.denotation().unwrap().contains(&z);
        prop_assert_eq!(member, rep.violated == 0 && rep.pending == 0);
    }

    #[test]
    fn constructions_have_the_expected_denotations(a in random_relations(), b in random_relations()) {
        let ca = copres_from_masks(a.0, &a.1);
        let cb = copres_from_masks(b.0, &b.1);
        let size = |c: &Copresentation| c.denotation().unwrap().len();
        let (na, nb) = (size(&ca), size(&cb));
        let (xa, xb) = (space_of(&ca), space_of(&cb));
        // open-set enumeration is exponential, so compare topologies on small results only
        let small = |n: usize| n <= 10;

        let p = product(&[ca.clone(), cb.clone()]).unwrap();
        p.validate().unwrap();
        prop_assert_eq!(size(&p), na * nb);
        if small(na * nb) && na * nb > 0 {
            prop_assert!(space_of(&p).is_homeomorphic(&FiniteSpace::product(&[&xa, &xb]).unwrap().0));
        }

        let u = disjoint_union(&[ca.clone(), cb.clone()]).unwrap();
        u.validate().unwrap();
        prop_assert_eq!(size(&u), na + nb);
        if small(na + nb) {
            prop_assert!(space_of(&u).is_homeomorphic(&FiniteSpace::sum(&[&xa, &xb]).unwrap().0));
        }

        let l = lift(&ca).unwrap();
        l.validate().unwrap();
        prop_assert_eq!(size(&l), na + 1);
        prop_assert!(space_of(&l).is_homeomorphic(&xa.lift()));
    }
}

// ---- point streams -------------------------------------------------------

fn monotone(p: &dyn PointStream, d: u64, e: u64) -> bool {
    let (lo, hi) = (d.min(e), d.max(e));
    observed(p, lo).is_subset(&observed(p, hi))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn named_reals_observe_monotonically(k in 0usize..NAMED_REALS.len(), d in 1u64..30, e in 1u64..30) {
        let p = named_real(NAMED_REALS[k]).unwrap();
        prop_assert!(monotone(&p, d, e));
    }

    #[test]
    fn rational_streams_observe_monotonically(a in -50i64..50, b in 1i64..20, d in 1u64..30, e in 1u64..30) {
        let p = rational_stream(&parse_q(&format!("{a}/{b}")).unwrap());
        prop_assert!(monotone(&p, d, e));
    }

    #[test]
    fn metric_streams_observe_monotonically(a in 0i64..=64, d in 1u64..24, e in 1u64..24) {
        let p = MetricStream::dyadic(Some(6), parse_q(&format!("{a}/64")).unwrap());
        prop_assert!(monotone(&p, d, e));
    }

    #[test]
    fn baire_images_grow_with_the_prefix(
        prefix in proptest::collection::vec(0u64..3, 0..12),
        ext in proptest::collection::vec(0u64..3, 0..12),
        d in 1u64..40,
        e in 1u64..40,
    ) {
        let short = baire_to_spower("short", prefix_sequence(prefix.clone()));
        let long = baire_to_spower("long", prefix_sequence(prefix.iter().chain(&ext).copied().collect()));
        prop_assert!(monotone(&short, d, e));
        prop_assert!(observed(&short, d).is_subset(&observed(&long, d)));
    }
}

// ---- posites -------------------------------------------------------------

fn brute(p: &Posite, keep: impl Fn(u64) -> bool) -> Vec<u64> {
    (0..=p.full()).filter(|&a| keep(a)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn random_posites_satisfy_the_axioms(seed: u64) {
        let p = random_posite(&mut rng(seed), 6, 8);
        prop_assert!(p.check_axioms().passed());
    }

    #[test]
    fn posite_spaces_match_brute_force(seed: u64) {
        let p = random_posite(&mut rng(seed), 6, 8);
        let upsets = brute(&p, |a| p.is_up(a));
        let filters = brute(&p, |a| p.is_filter(a));
        let coideals = brute(&p, |a| p.is_coideal(a));
        let primes: Vec<u64> = filters.iter().copied().filter(|a| coideals.contains(a)).collect();
        prop_assert_eq!(upset_space(&p).unwrap().denotation().unwrap(), upsets);
        prop_assert_eq!(filt_space(&p).unwrap().denotation().unwrap(), filters);
        prop_assert_eq!(coidl_space(&p).unwrap().denotation().unwrap(), coideals);
        prop_assert_eq!(pfilt_space(&p).unwrap().denotation().unwrap(), primes.clone());
        prop_assert_eq!(p.prime_filters_brute().unwrap(), primes);
    }

    #[test]
    fn generic_filters_are_prime_and_fair(seed: u64, a: u64, pick: usize, budget in 1u64..40) {
        let p = random_posite(&mut rng(seed), 6, 8);
        let coideal = p.coideal_interior(a & p.full());
        prop_assume!(coideal != 0);
        let members: Vec<usize> = bits(coideal).collect();
        let w = members[pick % members.len()];
        let g = generic_prime_filter(&p, &|u| coideal >> u & 1 == 1, w, budget).unwrap();
        prop_assert!(g.filter >> w & 1 == 1);
        prop_assert!(is_subset(g.filter, coideal));
        prop_assert!(p.is_filter(g.filter));
        prop_assert!(p.prime_filters_brute().unwrap().contains(&g.filter));
        for pair in g.pivots.windows(2) {
            prop_assert!(p.leq(pair[1], pair[0]));
        }
        let expected: Vec<(u64, usize)> = (1..=budget)
            .flat_map(|t| (0..p.covers().len()).filter(move |k| t % (*k as u64 + 1) == 0).map(move |k| (t, k)))
            .collect();
        prop_assert_eq!(g.visits, expected);
    }
}

// ---- powerspaces ---------------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coideals_correspond_to_closed_sets(seed: u64, n in 0usize..=6) {
        let x = random_space(&mut rng(seed), n);
        let h = powerspace(&x).unwrap();
        let r = h.verify().unwrap();
        prop_assert!(r.passed());
        // every open has exactly one closed complement
        prop_assert_eq!(r.coideals, x.opens().len());
        let closed: BTreeSet<u64> = h.closed_sets().unwrap().into_iter().collect();
        let brute: BTreeSet<u64> = x.opens().iter().map(|&o| x.full() & !o).collect();
        prop_assert_eq!(closed, brute);
    }
}

// ---- games ---------------------------------------------------------------

/// II answering the whole space, which is illegal unless I played it.
struct Greedy(u64);

impl StrategyII for Greedy {
    fn name(&self) -> String {
        "greedy".into()
    }

    fn respond(&mut self, _: &[Round], _: u64, _: usize) -> qpolis::Result<u64> {
        Ok(self.0)
    }
}

fn legal(x: &FiniteSpace, rounds: &[Round]) -> bool {
    let mut prev = x.full();
    for r in rounds {
        let ok = x.is_open(r.u)
            && x.is_open(r.v)
            && r.u >> r.x & 1 == 1
            && r.v >> r.x & 1 == 1
            && is_subset(r.u, prev)
            && is_subset(r.v, r.u);
        if !ok {
            return false;
        }
        prev = r.v;
    }
    true
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn the_finite_strategy_wins_legally(seed: u64, n in 1usize..=8) {
        let x = random_space(&mut rng(seed), n);
        let mut si = RandomI::seeded(&x, seed);
        let mut sii = strat_finite(&x);
        let h = play(&x, &mut si, &mut sii, 3 * n + 4).unwrap();
        prop_assert!(h.offense.is_none());
        prop_assert!(referee(&x, &h).is_none());
        prop_assert!(legal(&x, &h.rounds));
        prop_assert_eq!(winner_convergent(&x, &h), Verdict::IiWins);
        prop_assert_eq!(winner_strong(&x, &h), Verdict::IiWins);
    }

    #[test]
    fn the_referee_flags_illegal_answers(seed: u64, n in 1usize..=8) {
        let x = random_space(&mut rng(seed), n);
        let mut si = RandomI::seeded(&x, seed);
        let mut sii = Greedy(x.full());
        let h = play(&x, &mut si, &mut sii, 3 * n + 4).unwrap();
        prop_assert!(legal(&x, &h.rounds));
        let flagged = referee(&x, &h);
        prop_assert_eq!(flagged.is_some(), h.offense.is_some());
        if let Some(o) = flagged {
            prop_assert_eq!(o.player, 2);
            prop_assert_eq!(winner_convergent(&x, &h), Verdict::IWins);
        }
        if winner_convergent(&x, &h) == Verdict::IiWins {
            prop_assert_eq!(winner_strong(&x, &h), Verdict::IiWins);
        }
    }
}

// ---- suites --------------------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn suites_are_deterministic(seed: u64, k in 0usize..5) {
        let name = ["oracle", "posite", "powerspace", "baire", "game"][k];
        let params = SuiteParams { seed, max_size: Some(3), instances: Some(4), fuel: Some(12), rounds: Some(8) };
        let a = run_suite(name, &params).unwrap().to_json();
        let b = run_suite(name, &params).unwrap().to_json();
        prop_assert_eq!(a, b);
    }
}
