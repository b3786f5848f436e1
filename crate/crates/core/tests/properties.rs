mod common;

use common::{displayed_ok, displayed_yy, displayed_zz};
use proptest::prelude::*;
use udp6_core::evolution::{evolve, step_back_y_parity, step_back_z_parity, step_z_parity, EvolutionConfig};
use udp6_core::riccati::{residual_riccati2, riccati_evolve, RiccatiConfig};
use udp6_core::table::verify_table;
use udp6_core::tropical::{exchange_identity_check, rat, solve_one_unknown, Bound, ExtAmp, LinTerm};
use udp6_core::udp6::{residual_yy, residual_yy_signed, residual_zz, residual_zz_signed};
use udp6_core::{Params, ParityPair, Rat, Sign, StatePair};

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 128,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn sign() -> impl Strategy<Value = Sign> {
    prop_oneof![Just(Sign::Plus), Just(Sign::Minus)]
}

fn pair(span: i64) -> impl Strategy<Value = ParityPair> {
    (sign(), -span..=span).prop_map(|(s, a)| ParityPair::new(s, rat(a)))
}

fn params(span: i64) -> impl Strategy<Value = Params> {
    (
        1..=span,
        prop::array::uniform4(-span..=span),
        prop::array::uniform3(-span..=span),
    )
        .prop_map(|(q, a, b)| {
            let b2 = q + a[0] + a[1] + b[1] + b[2] - b[0] - a[2] - a[3];
            Params::from_ints(q, a, [b[0], b2, b[1], b[2]])
        })
}

fn riccati_params(span: i64) -> impl Strategy<Value = Params> {
    (
        1..=span,
        prop::array::uniform4(-span..=span),
        prop::array::uniform2(-span..=span),
    )
        .prop_map(|(q, a, b)| {
            let b1 = q + a[0] + b[0] - a[2];
            let b2 = a[1] + b[1] - a[3];
            Params::from_ints(q, a, [b1, b2, b[0], b[1]])
        })
}

fn ext(v: Option<i64>) -> ExtAmp {
    v.map_or(ExtAmp::NegInf, ExtAmp::int)
}

fn term() -> impl Strategy<Value = LinTerm> {
    (0u32..=2, prop::option::weighted(0.9, -10i64..=10)).prop_map(|(s, c)| LinTerm::new(s, ext(c)))
}

fn side() -> impl Strategy<Value = Vec<LinTerm>> {
    prop::collection::vec(term(), 1..=4).prop_filter("needs a live term", |v| v.iter().any(|t| !t.is_inert()))
}

fn eval(side: &[LinTerm], x: &Rat) -> ExtAmp {
    side.iter().map(|t| t.eval(x)).max().unwrap()
}

fn on_half_grid(b: &Bound) -> bool {
    b.finite().is_none_or(|r| (r * rat(2)).is_integer())
}

proptest! {
    #![proptest_config(config())]

    /// Breakpoints of slopes 0..2 with intercepts in [-10, 10] are halves in
    /// [-20, 20]; agreement on the quarter grid and far out decides equality.
    #[test]
    fn solver_matches_grid(lhs in side(), rhs in side()) {
        let set = solve_one_unknown(&lhs, &rhs).unwrap();
        for iv in set.intervals() {
            prop_assert!(on_half_grid(&iv.lo) && on_half_grid(&iv.hi));
        }
        let grid = (-88..=88).map(|k| Rat::new(k.into(), 4.into()));
        for x in grid.chain([rat(-1000), rat(1000)]) {
            prop_assert_eq!(set.contains(&x), eval(&lhs, &x) == eval(&rhs, &x), "x={}", x);
        }
    }

    #[test]
    fn exchange_lemma(
        x12 in prop::array::uniform2(prop::option::weighted(0.9, -5i64..=5)),
        w12 in prop::array::uniform2(prop::option::weighted(0.9, -5i64..=5)),
        below in prop::array::uniform2(0i64..=3),
        swap in prop::array::uniform2(any::<bool>()),
    ) {
        let complete = |pair: [Option<i64>; 2], drop: i64, swap: bool| {
            let top = pair[0].max(pair[1]);
            let other = top.map(|t| t - drop);
            let [x1, x2] = pair.map(ext);
            let (x3, x4) = if swap { (ext(other), ext(top)) } else { (ext(top), ext(other)) };
            [x1, x2, x3, x4]
        };
        let x = complete(x12, below[0], swap[0]);
        let w = complete(w12, below[1], swap[1]);
        prop_assert!(exchange_identity_check(&x, &w));
    }

    #[test]
    fn reduced_and_displayed_agree(p in params(20), m in -5i64..=5, y in pair(40), z in pair(40), zn in pair(40)) {
        let reduced = residual_zz(&p, m, &y, &z, &zn).unwrap();
        prop_assert_eq!(reduced, residual_zz_signed(&p, m, &y, &z, &zn).unwrap());
        prop_assert_eq!(reduced, displayed_zz(&p, m, &y, &z, &zn));
        let reduced = residual_yy(&p, m, &y, &z, &zn).unwrap();
        prop_assert_eq!(reduced, residual_yy_signed(&p, m, &y, &z, &zn).unwrap());
        prop_assert_eq!(reduced, displayed_yy(&p, m, &y, &z, &zn));
    }

    #[test]
    fn steps_solve_displayed_equations(p in params(20), m in -5i64..=5, y in pair(40), z in pair(40)) {
        for zn in step_z_parity(&p, m, &y, &z).unwrap() {
            prop_assert!(displayed_zz(&p, m, &y, &z, &zn));
        }
    }

    #[test]
    fn evolution_is_reversible(p in params(15), y in pair(30), z in pair(30), m0 in -3i64..=3) {
        let tree = evolve(&p, &StatePair::new(m0, y, z), &EvolutionConfig::window(-6, 6).with_max_branches(16)).unwrap();
        prop_assert!(!tree.branches.is_empty());
        for t in &tree.branches {
            prop_assert!(verify_table(&p, t).unwrap().is_empty());
            prop_assert!(displayed_ok(&p, t));
            for w in t.rows().windows(2) {
                let (a, b) = (&w[0], &w[1]);
                prop_assert!(step_back_y_parity(&p, b.m, &b.y, &b.z).unwrap().contains(&a.y));
                prop_assert!(step_back_z_parity(&p, b.m, &a.y, &b.z).unwrap().contains(&a.z));
            }
        }
    }

    #[test]
    fn all_minus_is_deterministic(p in params(15), y in -30i64..=30, z in -30i64..=30) {
        let init = StatePair::new(0, ParityPair::ints(-1, y), ParityPair::ints(-1, z));
        let tree = evolve(&p, &init, &EvolutionConfig::window(-8, 8)).unwrap();
        prop_assert_eq!(tree.branches.len(), 1);
        prop_assert!(tree.branches[0].rows().iter().all(|r| r.y.sign == Sign::Minus && r.z.sign == Sign::Minus));
    }

    #[test]
    fn no_solution_sector(p in params(20), m in -5i64..=5, y in -40i64..=40, z in pair(40), zn in -40i64..=40) {
        let zn = ParityPair::new(-z.sign, rat(zn));
        let y = ParityPair::ints(-1, y);
        prop_assert!(!residual_zz(&p, m, &y, &z, &zn).unwrap());
        prop_assert!(!displayed_zz(&p, m, &y, &z, &zn));
    }

    #[test]
    fn riccati_no_solution_sector(p in riccati_params(20), m in -5i64..=5, y in -40i64..=40, zn in -40i64..=40) {
        prop_assert!(!residual_riccati2(&p, m, &ParityPair::ints(-1, y), &ParityPair::ints(-1, zn)).unwrap());
    }

    #[test]
    fn riccati_tables_solve_painleve(p in riccati_params(15), y0 in pair(30), m0 in -3i64..=3) {
        if let Ok(run) = riccati_evolve(&p, m0, &y0, &RiccatiConfig::window(-5, 5).with_max_tables(8)) {
            for t in &run.tables {
                prop_assert!(verify_table(&p, t).unwrap().is_empty());
                prop_assert!(displayed_ok(&p, t));
            }
        }
    }

    #[test]
    fn gauge_and_scale_equivariance(
        p in params(12),
        y in pair(25),
        z in pair(25),
        zn in pair(25),
        c in -50i64..=50,
        num in 1i64..=7,
        den in 1i64..=5,
    ) {
        let (c, lambda) = (rat(c), Rat::new(num.into(), den.into()));
        let ps = p.shifted(&c);
        let pl = p.scaled(&lambda);
        let base = residual_zz(&p, 1, &y, &z, &zn).unwrap();
        prop_assert_eq!(base, residual_zz(&ps, 1, &y.shifted(&c), &z.shifted(&c), &zn.shifted(&c)).unwrap());
        prop_assert_eq!(base, residual_zz(&pl, 1, &y.scaled(&lambda), &z.scaled(&lambda), &zn.scaled(&lambda)).unwrap());
        let base = residual_yy(&p, 1, &y, &zn, &z).unwrap();
        prop_assert_eq!(base, residual_yy(&ps, 1, &y.shifted(&c), &zn.shifted(&c), &z.shifted(&c)).unwrap());
        prop_assert_eq!(base, residual_yy(&pl, 1, &y.scaled(&lambda), &zn.scaled(&lambda), &z.scaled(&lambda)).unwrap());

        let init = StatePair::new(0, y, z);
        let cfg = EvolutionConfig::window(-4, 4).with_max_branches(8);
        let t = evolve(&p, &init, &cfg).unwrap();
        let ts = evolve(&ps, &StatePair::new(0, init.y.shifted(&c), init.z.shifted(&c)), &cfg).unwrap();
        let tl = evolve(&pl, &StatePair::new(0, init.y.scaled(&lambda), init.z.scaled(&lambda)), &cfg).unwrap();
        let shifted: Vec<_> = t.branches.iter().map(|b| b.shifted(&c)).collect();
        let scaled: Vec<_> = t.branches.iter().map(|b| b.scaled(&lambda)).collect();
        prop_assert_eq!(shifted, ts.branches);
        prop_assert_eq!(scaled, tl.branches);
    }
}
