#![allow(dead_code)]

use rand::Rng;
use udp6_core::tropical::rat;
use udp6_core::{Params, ParityPair, Rat, Sign, SolutionTable, StatePair};

/// `None` is −∞.
type T = Option<Rat>;

fn s(sign: Sign) -> T {
    match sign {
        Sign::Plus => Some(rat(0)),
        Sign::Minus => None,
    }
}

fn add(xs: &[&T]) -> T {
    let mut acc = rat(0);
    for x in xs {
        acc += (*x).as_ref()?;
    }
    Some(acc)
}

fn tmax(xs: &[T]) -> T {
    xs.iter().flatten().max().cloned()
}

fn f(v: &Rat) -> T {
    Some(v.clone())
}

/// The first equation exactly as displayed (unsigned parameters).
pub fn displayed_zz(p: &Params, m: i64, y: &ParityPair, z: &ParityPair, zn: &ParityPair) -> bool {
    let [a1, a2, a3, a4] = &p.a;
    let [_, _, b3, b4] = &p.b;
    let mq = f(&(rat(m) * &p.q));
    let two = rat(2);
    let yv = f(&y.amp);
    let zz = f(&(&z.amp + &zn.amp));
    let b34 = f(&(b3 + b4));
    let max12 = f(a1.max(a2));
    let max34 = f(a3.max(a4));
    let u = tmax(&[f(&(&two * &y.amp)), f(&(a3 + a4))]);
    let v = tmax(&[add(&[&mq, &mq, &f(a1), &f(a2)]), f(&(&two * &y.amp))]);
    let szz = z.sign * zn.sign;
    let lhs = tmax(&[
        add(&[&max12, &mq, &yv, &b34, &s(y.sign)]),
        add(&[&u, &zz, &s(szz)]),
        add(&[&max34, &yv, &zz, &s(-(y.sign * szz))]),
    ]);
    let rhs = tmax(&[
        add(&[&v, &b34]),
        add(&[&max12, &mq, &yv, &b34, &s(-y.sign)]),
        add(&[&u, &zz, &s(-szz)]),
        add(&[&max34, &yv, &zz, &s(y.sign * szz)]),
    ]);
    lhs == rhs
}

/// The second equation exactly as displayed (unsigned parameters).
pub fn displayed_yy(p: &Params, m: i64, y: &ParityPair, yn: &ParityPair, zn: &ParityPair) -> bool {
    let [_, _, a3, a4] = &p.a;
    let [b1, b2, b3, b4] = &p.b;
    let mq = f(&(rat(m) * &p.q));
    let two = rat(2);
    let zv = f(&zn.amp);
    let yy = f(&(&y.amp + &yn.amp));
    let a34 = f(&(a3 + a4));
    let max12 = f(b1.max(b2));
    let max34 = f(b3.max(b4));
    let u = tmax(&[f(&(&two * &zn.amp)), f(&(b3 + b4))]);
    let v = tmax(&[add(&[&mq, &mq, &f(b1), &f(b2)]), f(&(&two * &zn.amp))]);
    let syy = y.sign * yn.sign;
    let lhs = tmax(&[
        add(&[&max12, &mq, &zv, &a34, &s(zn.sign)]),
        add(&[&u, &yy, &s(syy)]),
        add(&[&max34, &yy, &zv, &s(-(syy * zn.sign))]),
    ]);
    let rhs = tmax(&[
        add(&[&v, &a34]),
        add(&[&max12, &mq, &zv, &a34, &s(-zn.sign)]),
        add(&[&u, &yy, &s(-syy)]),
        add(&[&max34, &yy, &zv, &s(syy * zn.sign)]),
    ]);
    lhs == rhs
}

/// Both displayed equations at every consecutive pair of rows.
pub fn displayed_ok(p: &Params, t: &SolutionTable) -> bool {
    t.rows().windows(2).all(|w| {
        displayed_zz(p, w[0].m, &w[0].y, &w[0].z, &w[1].z) && displayed_yy(p, w[0].m, &w[0].y, &w[1].y, &w[1].z)
    })
}

pub fn ex1_params() -> Params {
    Params::from_ints(100, [32, 33, 37, 22], [53, 65, 8, 4])
}

pub fn p41() -> Params {
    Params::from_ints(100, [25, 46, 67, 23], [59, 65, 1, 42])
}

/// Closed forms of the first worked solution (`Y_0 = 43`, `Z_0 = 40`).
pub fn ex1_closed_form(m: i64) -> (i64, i64) {
    let y = match m {
        _ if m <= -1 => 95 * m + 111,
        0 => 43,
        _ => 11 * m + 111,
    };
    let z = if m <= 0 { 95 * m + 40 } else { 89 * m - 117 };
    (y, z)
}

/// Closed forms of the second worked solution (`Y_0 = 43`, `Z_0 = 50`).
pub fn ex2_closed_form(m: i64) -> (i64, i64) {
    let y = match m {
        _ if m <= -8 => 85 * m - 81,
        -7 => -669,
        -6..=-1 => 115 * m + 131,
        0 => 43,
        1..=11 => -9 * m + 131,
        _ => 9 * m - 72,
    };
    let z = match m {
        _ if m <= -7 => 85 * m - 147,
        -6..=0 => 115 * m + 50,
        1..=11 => 109 * m - 147,
        12 => 1156,
        _ => 91 * m + 65,
    };
    (y, z)
}

pub fn all_minus_table(lo: i64, hi: i64, f: impl Fn(i64) -> (i64, i64)) -> SolutionTable {
    SolutionTable::new(
        (lo..=hi)
            .map(|m| {
                let (y, z) = f(m);
                StatePair::new(m, ParityPair::ints(-1, y), ParityPair::ints(-1, z))
            })
            .collect(),
    )
    .unwrap()
}

pub fn random_sign<R: Rng>(rng: &mut R) -> Sign {
    if rng.gen_bool(0.5) {
        Sign::Plus
    } else {
        Sign::Minus
    }
}

pub fn random_pair<R: Rng>(rng: &mut R, span: i64) -> ParityPair {
    ParityPair::new(random_sign(rng), rat(rng.gen_range(-span..=span)))
}
