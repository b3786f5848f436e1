use proptest::prelude::*;
use udp6_core::families::{compute_h, instantiate_family, FamilyId, FamilySpec};
use udp6_core::riccati::{theorem_check, verify_riccati_table};
use udp6_core::table::verify_table;
use udp6_core::tropical::rat;
use udp6_core::{Params, ParityPair, SolutionTable, StatePair};

fn p41() -> Params {
    Params::from_ints(100, [25, 46, 67, 23], [59, 65, 1, 42])
}

fn solves(p: &Params, t: &SolutionTable) -> bool {
    verify_riccati_table(p, t).unwrap().is_empty() && verify_table(p, t).unwrap().is_empty()
}

/// Valid constants in `cs`, asserting every valid instance solves both systems.
fn valid_cs(spec: impl Fn(i64) -> FamilySpec, cs: impl Iterator<Item = i64>, lo: i64, hi: i64) -> Vec<i64> {
    let p = p41();
    let mut out = Vec::new();
    for c in cs {
        let inst = instantiate_family(&spec(c), &p, lo, hi).unwrap();
        if inst.valid {
            assert!(solves(&p, &inst.table), "c={c}");
            out.push(c);
        }
    }
    out
}

fn contiguous(v: &[i64], first: i64, last: i64) -> bool {
    v.first() == Some(&first) && v.last() == Some(&last) && v.len() as i64 == last - first + 1
}

#[test]
fn sol0_range() {
    let v = valid_cs(|c| FamilySpec::new(FamilyId::Sol0).with_c(rat(c)), 25..=52, -6, 6);
    assert!(contiguous(&v, 31, 46), "{v:?}");
}

#[test]
fn soln2_range() {
    for m0 in [-1, -2, -3] {
        let (a, b) = (-85 * m0 + 23, -85 * m0 + 67);
        let v = valid_cs(
            |c| FamilySpec::new(FamilyId::SolN2).with_c(rat(c)).with_m0(m0),
            (a - 4)..=(b + 4),
            -6,
            6,
        );
        assert!(contiguous(&v, a, b), "m0={m0}: {v:?}");
    }
}

#[test]
fn soln2_example_table() {
    let inst = instantiate_family(
        &FamilySpec::new(FamilyId::SolN2).with_c(rat(193)).with_m0(-2),
        &p41(),
        -4,
        3,
    )
    .unwrap();
    assert!(inst.valid);
    let want = [
        (-4, (-1, -147), (1, -213)),
        (-3, (-1, -62), (1, -128)),
        (-2, (-1, 23), (1, -43)),
        (-1, (1, 67), (1, 42)),
        (0, (1, 67), (1, 42)),
        (1, (-1, 84), (1, 42)),
        (2, (-1, 122), (1, 104)),
        (3, (-1, 160), (1, 166)),
    ];
    for (m, y, z) in want {
        let row = inst.table.get(m).unwrap();
        assert_eq!(row.y, ParityPair::ints(y.0, y.1), "y at {m}");
        assert_eq!(row.z, ParityPair::ints(z.0, z.1), "z at {m}");
    }
}

#[test]
fn solp_range() {
    for m0 in [1, 2, 3] {
        let (a, b) = (21 + 38 * m0, 59 + 38 * m0);
        let v = valid_cs(
            |c| FamilySpec::new(FamilyId::SolP).with_c(rat(c)).with_m0(m0),
            (a - 4)..=(b + 4),
            -6,
            6,
        );
        // The lower end is also capped by h(m0−1)+B1 = 38m0+21.
        assert!(contiguous(&v, a.max(38 * m0 + 21), b), "m0={m0}: {v:?}");
    }
}

#[test]
fn local_families_solve_where_valid() {
    for id in [FamilyId::R1, FamilyId::R2] {
        let v = valid_cs(|c| FamilySpec::new(id).with_c(rat(c)), -40..=120, 1, 5);
        assert!(!v.is_empty(), "{id}");
    }
    for id in [FamilyId::R3, FamilyId::R4] {
        let v = valid_cs(|c| FamilySpec::new(id).with_c(rat(c)), 0..=200, -5, -1);
        assert!(!v.is_empty(), "{id}");
    }
}

#[test]
fn pconst_solves() {
    let p = p41();
    let inst = instantiate_family(&FamilySpec::new(FamilyId::PConst), &p, 2, 8).unwrap();
    assert!(inst.valid);
    assert!(solves(&p, &inst.table));
    let early = instantiate_family(&FamilySpec::new(FamilyId::PConst), &p, 1, 8).unwrap();
    assert!(!early.valid);
}

fn table_of(lo: i64, hi: i64, f: impl Fn(i64) -> ((i64, i64), (i64, i64))) -> SolutionTable {
    SolutionTable::new(
        (lo..=hi)
            .map(|m| {
                let (y, z) = f(m);
                StatePair::new(m, ParityPair::ints(y.0, y.1), ParityPair::ints(z.0, z.1))
            })
            .collect(),
    )
    .unwrap()
}

#[test]
fn extra_solution_plateau() {
    let p = p41();
    for m0 in [-1, -2, -3] {
        for c in (-85 * m0 - 18)..=(-85 * m0 + 23) {
            let t = table_of(-7, 6, |m| {
                let y = if m <= m0 {
                    (-1, 85 * m + c)
                } else if m <= 0 {
                    (1, 67)
                } else {
                    (-1, 38 * m + 46)
                };
                let z = if m <= m0 + 1 {
                    (1, 85 * m - 66 + c)
                } else if m <= 1 {
                    (1, 42)
                } else {
                    (1, 62 * m - 20)
                };
                (y, z)
            });
            assert!(solves(&p, &t), "m0={m0} c'={c}");
        }
    }
}

#[test]
fn extra_solution_steep_middle() {
    let p = p41();
    for m0 in [-1, -2, -3] {
        for c in (15 * m0 + 31)..=(15 * m0 + 46) {
            let t = table_of(-7, 6, |m| {
                if m <= m0 {
                    ((-1, 85 * m + c), (1, 85 * m - 66 + c))
                } else if m <= 0 {
                    ((-1, 100 * m + 31), (1, 100 * m - 35))
                } else {
                    ((-1, 38 * m + 31), (1, 62 * m - 5))
                }
            });
            assert!(solves(&p, &t), "m0={m0} c'={c}");
        }
    }
}

fn riccati_params() -> impl Strategy<Value = Params> {
    (
        1i64..60,
        prop::array::uniform4(-30i64..30),
        prop::array::uniform4(-30i64..30),
    )
        .prop_map(|(q, a, mut b)| {
            b[0] = q + a[0] + b[2] - a[2];
            b[1] = a[1] + b[3] - a[3];
            Params::from_ints(q, a, b)
        })
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(256) })]

    #[test]
    fn valid_instances_solve(
        p in riccati_params(),
        fam in 0usize..4,
        c in -80i64..80,
        lo in -6i64..6,
        len in 1i64..6,
    ) {
        let id = [FamilyId::R1, FamilyId::R2, FamilyId::R3, FamilyId::R4][fam];
        let inst = instantiate_family(&FamilySpec::new(id).with_c(rat(c)), &p, lo, lo + len).unwrap();
        if inst.valid {
            prop_assert!(verify_riccati_table(&p, &inst.table).unwrap().is_empty());
            prop_assert!(verify_table(&p, &inst.table).unwrap().is_empty());
        }
        prop_assert!(theorem_check(&p, &inst.table).unwrap());
    }

    #[test]
    fn h_is_gauge_invariant(p in riccati_params(), c in -50i64..50) {
        prop_assert_eq!(compute_h(&p.shifted(&rat(c))), compute_h(&p));
    }
}
