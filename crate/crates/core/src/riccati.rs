//! Ultradiscrete Riccati-type equation with parity variables.
//!
//! Residuals go through the fixed-parity case reductions. Stepping builds
//! the parity-filtered equation term by term and hands it to the
//! one-unknown solver, so a step can return a whole interval of amplitudes.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{Params, ParityPair, StatePair};
use crate::table::{verify_table, Failure, SolutionTable};
use crate::tropical::{
    max_of, parity_indicator, rat, solve_one_unknown_total, Bound, ExtAmp, Interval, LinTerm, Rat, Sign, SolutionSet,
};
use crate::udp6::Sides;

/// `B1+A3 = Q+A1+B3` and `B2+A4 = A2+B4`.
pub fn check_riccati_conditions(p: &Params) -> bool {
    riccati_condition_report(p).is_none()
}

fn riccati_condition_report(p: &Params) -> Option<String> {
    let [a1, a2, a3, a4] = &p.a;
    let [b1, b2, b3, b4] = &p.b;
    let mut bad = Vec::new();
    if b1 + a3 != &p.q + a1 + b3 {
        bad.push("B1+A3 = Q+A1+B3");
    }
    if b2 + a4 != a2 + b4 {
        bad.push("B2+A4 = A2+B4");
    }
    if bad.is_empty() {
        None
    } else {
        Some(bad.join(", "))
    }
}

fn require_riccati(p: &Params) -> Result<()> {
    match riccati_condition_report(p) {
        None => Ok(()),
        Some(s) => Err(Error::RiccatiConditions(s)),
    }
}

fn mq(p: &Params, m: i64) -> Rat {
    Rat::from_integer(m.into()) * &p.q
}

fn sides(lhs: Rat, rhs: Rat) -> Sides {
    Sides {
        lhs: lhs.into(),
        rhs: rhs.into(),
    }
}

/// Sides of the first Riccati equation at `m` (links `y_m` and `z_{m+1}`).
pub fn sides_riccati2(p: &Params, m: i64, y: &ParityPair, z_next: &ParityPair) -> Result<Sides> {
    require_riccati(p)?;
    let [_, a2, _, a4] = &p.a;
    let [_, _, _, b4] = &p.b;
    let c = mq(p, m) + a2;
    let (yv, zv) = (&y.amp, &z_next.amp);
    Ok(match (z_next.sign, y.sign) {
        (Sign::Plus, Sign::Plus) => sides(max_of(&[&(&c + b4), &(yv + zv)]), max_of(&[&(zv + a4), &(yv + b4)])),
        (Sign::Plus, Sign::Minus) => sides(max_of(&[&c, yv]) + b4, zv + max_of(&[yv, a4])),
        (Sign::Minus, Sign::Plus) => sides(max_of(&[&(&c + b4), &(zv + a4)]), yv + max_of(&[zv, b4])),
        (Sign::Minus, Sign::Minus) => Sides {
            lhs: ExtAmp::NegInf,
            rhs: max_of(&[&(&c + b4), &(yv + zv), &(zv + a4), &(yv + b4)]).into(),
        },
    })
}

/// Sides of the second Riccati equation at `m` (links `y_{m+1}` and
/// `z_{m+1}`).
pub fn sides_riccati1(p: &Params, m: i64, y_next: &ParityPair, z_next: &ParityPair) -> Result<Sides> {
    require_riccati(p)?;
    let [_, _, a3, _] = &p.a;
    let [b1, _, b3, _] = &p.b;
    let mqb1 = mq(p, m) + b1;
    let (yv, zv) = (&y_next.amp, &z_next.amp);
    Ok(match (z_next.sign, y_next.sign) {
        (Sign::Plus, Sign::Plus) => sides(max_of(&[&(&mqb1 + a3), &(yv + zv)]), max_of(&[&(zv + a3), &(yv + b3)])),
        (Sign::Plus, Sign::Minus) => sides(max_of(&[&(&mqb1 + a3), &(yv + b3)]), zv + max_of(&[yv, a3])),
        (Sign::Minus, Sign::Plus) => sides(max_of(&[&mqb1, zv]) + a3, yv + max_of(&[zv, b3])),
        (Sign::Minus, Sign::Minus) => Sides {
            lhs: ExtAmp::NegInf,
            rhs: max_of(&[&(&mqb1 + a3), &(yv + zv), &(zv + a3), &(yv + b3)]).into(),
        },
    })
}

pub fn residual_riccati2(p: &Params, m: i64, y: &ParityPair, z_next: &ParityPair) -> Result<bool> {
    Ok(sides_riccati2(p, m, y, z_next)?.holds())
}

pub fn residual_riccati1(p: &Params, m: i64, y_next: &ParityPair, z_next: &ParityPair) -> Result<bool> {
    Ok(sides_riccati1(p, m, y_next, z_next)?.holds())
}

/// `c + cy·Y + cz·Z + S(parity)`.
struct Term {
    c: Rat,
    cy: u32,
    cz: u32,
    parity: Sign,
}

impl Term {
    fn new(c: Rat, cy: u32, cz: u32, parity: Sign) -> Self {
        Term { c, cy, cz, parity }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Unknown {
    Y,
    Z,
}

fn to_lin(t: &Term, unknown: Unknown, known: &Rat) -> LinTerm {
    let (slope, other) = match unknown {
        Unknown::Y => (t.cy, t.cz),
        Unknown::Z => (t.cz, t.cy),
    };
    let base = ExtAmp::Fin(&t.c + Rat::from_integer(other.into()) * known);
    LinTerm::new(slope, &base + &parity_indicator(t.parity))
}

fn solve(lhs: &[Term], rhs: &[Term], unknown: Unknown, known: &Rat) -> SolutionSet {
    let l: Vec<LinTerm> = lhs.iter().map(|t| to_lin(t, unknown, known)).collect();
    let r: Vec<LinTerm> = rhs.iter().map(|t| to_lin(t, unknown, known)).collect();
    solve_one_unknown_total(&l, &r).expect("both sides are non-empty")
}

/// Parity-filtered terms of the first Riccati equation at `m`.
fn riccati2_terms(p: &Params, m: i64, sy: Sign, sz: Sign) -> (Vec<Term>, Vec<Term>) {
    let [_, a2, _, a4] = &p.a;
    let [_, _, _, b4] = &p.b;
    let z = Rat::from_integer(0.into());
    let lhs = vec![
        Term::new(mq(p, m) + a2 + b4, 0, 0, Sign::Plus),
        Term::new(a4.clone(), 0, 1, -sz),
        Term::new(b4.clone(), 1, 0, -sy),
        Term::new(z.clone(), 1, 1, sy * sz),
    ];
    let rhs = vec![
        Term::new(a4.clone(), 0, 1, sz),
        Term::new(b4.clone(), 1, 0, sy),
        Term::new(z, 1, 1, -(sy * sz)),
    ];
    (lhs, rhs)
}

/// Parity-filtered terms of the second Riccati equation at `m`.
fn riccati1_terms(p: &Params, m: i64, sy: Sign, sz: Sign) -> (Vec<Term>, Vec<Term>) {
    let [_, _, a3, _] = &p.a;
    let [b1, _, b3, _] = &p.b;
    let z = Rat::from_integer(0.into());
    let lhs = vec![
        Term::new(mq(p, m) + a3 + b1, 0, 0, Sign::Plus),
        Term::new(b3.clone(), 1, 0, -sy),
        Term::new(a3.clone(), 0, 1, -sz),
        Term::new(z.clone(), 1, 1, sy * sz),
    ];
    let rhs = vec![
        Term::new(a3.clone(), 0, 1, sz),
        Term::new(b3.clone(), 1, 0, sy),
        Term::new(z, 1, 1, -(sy * sz)),
    ];
    (lhs, rhs)
}

/// Solution sets for the next variable, one entry per admissible sign.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RiccatiStepResult {
    pub entries: Vec<(Sign, SolutionSet)>,
}

impl RiccatiStepResult {
    fn collect(per_sign: impl Fn(Sign) -> SolutionSet) -> Self {
        let entries = [Sign::Plus, Sign::Minus]
            .into_iter()
            .map(|s| (s, per_sign(s)))
            .filter(|(_, set)| !set.is_empty())
            .collect();
        RiccatiStepResult { entries }
    }

    pub fn get(&self, sign: Sign) -> Option<&SolutionSet> {
        self.entries.iter().find(|(s, _)| *s == sign).map(|(_, set)| set)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Entry {
            sign: i8,
            intervals: Vec<[String; 2]>,
        }
        let v: Vec<Entry> = self
            .entries
            .iter()
            .map(|(s, set)| Entry {
                sign: s.as_i8(),
                intervals: set
                    .intervals()
                    .iter()
                    .map(|iv| [iv.lo.to_string(), iv.hi.to_string()])
                    .collect(),
            })
            .collect();
        serde_json::to_value(v).expect("serializable")
    }
}

/// `z_{m+1}` given `y_m`.
pub fn riccati_step_z(p: &Params, m: i64, y: &ParityPair) -> Result<RiccatiStepResult> {
    require_riccati(p)?;
    Ok(RiccatiStepResult::collect(|sz| {
        let (l, r) = riccati2_terms(p, m, y.sign, sz);
        solve(&l, &r, Unknown::Z, &y.amp)
    }))
}

/// `y_{m+1}` given `z_{m+1}`.
pub fn riccati_step_y(p: &Params, m: i64, z_next: &ParityPair) -> Result<RiccatiStepResult> {
    require_riccati(p)?;
    Ok(RiccatiStepResult::collect(|sy| {
        let (l, r) = riccati1_terms(p, m, sy, z_next.sign);
        solve(&l, &r, Unknown::Y, &z_next.amp)
    }))
}

/// `z_m` given `y_m`, from the second equation at `m − 1`.
pub fn riccati_seed_z(p: &Params, m: i64, y: &ParityPair) -> Result<RiccatiStepResult> {
    require_riccati(p)?;
    Ok(RiccatiStepResult::collect(|sz| {
        let (l, r) = riccati1_terms(p, m - 1, y.sign, sz);
        solve(&l, &r, Unknown::Z, &y.amp)
    }))
}

/// `y_{m−1}` given `z_m`, from the first equation at `m − 1`.
pub fn riccati_step_back_y(p: &Params, m: i64, z: &ParityPair) -> Result<RiccatiStepResult> {
    require_riccati(p)?;
    Ok(RiccatiStepResult::collect(|sy| {
        let (l, r) = riccati2_terms(p, m - 1, sy, z.sign);
        solve(&l, &r, Unknown::Y, &z.amp)
    }))
}

/// How concrete amplitudes are drawn from an interval-valued step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Sampling {
    /// Finite endpoints; one witness for the whole line.
    #[default]
    Endpoints,
    Midpoint,
    AllBreakpoints,
}

impl std::str::FromStr for Sampling {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "endpoints" => Ok(Sampling::Endpoints),
            "midpoint" => Ok(Sampling::Midpoint),
            "all-breakpoints" => Ok(Sampling::AllBreakpoints),
            _ => Err(Error::Config(format!("unknown sampling rule {s:?}"))),
        }
    }
}

fn interval_samples(iv: &Interval, rule: Sampling) -> Vec<Rat> {
    let one = rat(1);
    let ends = || -> Vec<Rat> {
        match (&iv.lo, &iv.hi) {
            (Bound::At(a), Bound::At(b)) if a == b => vec![a.clone()],
            (Bound::At(a), Bound::At(b)) => vec![a.clone(), b.clone()],
            (Bound::At(a), _) => vec![a.clone()],
            (_, Bound::At(b)) => vec![b.clone()],
            _ => vec![rat(0)],
        }
    };
    let mid = || -> Rat {
        match (&iv.lo, &iv.hi) {
            (Bound::At(a), Bound::At(b)) => (a + b) / rat(2),
            (Bound::At(a), _) => a + &one,
            (_, Bound::At(b)) => b - &one,
            _ => rat(0),
        }
    };
    match rule {
        Sampling::Endpoints => ends(),
        Sampling::Midpoint => vec![mid()],
        Sampling::AllBreakpoints => {
            let mut v = ends();
            v.push(mid());
            v.sort();
            v.dedup();
            v
        }
    }
}

/// Concrete parity pairs drawn from a step result.
pub fn sample_step(step: &RiccatiStepResult, rule: Sampling) -> Vec<ParityPair> {
    let mut out = Vec::new();
    for (s, set) in &step.entries {
        for iv in set.intervals() {
            for v in interval_samples(iv, rule) {
                out.push(ParityPair::new(*s, v));
            }
        }
    }
    out.dedup();
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RiccatiConfig {
    pub m_min: i64,
    pub m_max: i64,
    pub sampling: Sampling,
    pub max_tables: usize,
}

impl RiccatiConfig {
    pub fn window(m_min: i64, m_max: i64) -> Self {
        RiccatiConfig {
            m_min,
            m_max,
            sampling: Sampling::default(),
            max_tables: 16,
        }
    }

    pub fn with_sampling(mut self, s: Sampling) -> Self {
        self.sampling = s;
        self
    }

    pub fn with_max_tables(mut self, n: usize) -> Self {
        self.max_tables = n;
        self
    }
}

#[derive(Clone, Debug)]
pub struct RiccatiRun {
    pub tables: Vec<SolutionTable>,
    pub truncated: bool,
    /// Indices at which some partial path had no finite continuation.
    pub dead_ends: Vec<i64>,
}

/// Builds tables over `[m_min, m_max]` from `y_{m0}`, sampling interval-valued
/// steps per `cfg.sampling`. Every table satisfies both Riccati equations at
/// every index it covers, including the link between `y_{m_min}` and
/// `z_{m_min}`.
pub fn riccati_evolve(p: &Params, m0: i64, y0: &ParityPair, cfg: &RiccatiConfig) -> Result<RiccatiRun> {
    require_riccati(p)?;
    if !(cfg.m_min <= m0 && m0 <= cfg.m_max) {
        return Err(Error::Window(format!(
            "need m_min <= m0 <= m_max, got {} <= {} <= {}",
            cfg.m_min, m0, cfg.m_max
        )));
    }
    if cfg.max_tables == 0 {
        return Err(Error::Config("max_tables must be at least 1".into()));
    }
    let cap = cfg.max_tables;
    let mut truncated = false;
    let mut dead_ends = Vec::new();
    let trim = |v: &mut Vec<Vec<StatePair>>, truncated: &mut bool| {
        if v.len() > cap {
            v.truncate(cap);
            *truncated = true;
        }
    };

    let seeds = sample_step(&riccati_seed_z(p, m0, y0)?, cfg.sampling);
    if seeds.is_empty() {
        return Err(Error::NoContinuation(m0));
    }
    let mut roots: Vec<Vec<StatePair>> = seeds
        .into_iter()
        .map(|z| vec![StatePair::new(m0, y0.clone(), z)])
        .collect();
    trim(&mut roots, &mut truncated);

    let mut tables = Vec::new();
    for root in roots {
        let mut forward = vec![root.clone()];
        for m in m0..cfg.m_max {
            let mut next = Vec::new();
            for path in &forward {
                let cur = path.last().expect("non-empty");
                let mut extended = false;
                for zn in sample_step(&riccati_step_z(p, m, &cur.y)?, cfg.sampling) {
                    for yn in sample_step(&riccati_step_y(p, m, &zn)?, cfg.sampling) {
                        let mut np = path.clone();
                        np.push(StatePair::new(m + 1, yn, zn.clone()));
                        next.push(np);
                        extended = true;
                    }
                }
                if !extended {
                    dead_ends.push(m + 1);
                }
            }
            trim(&mut next, &mut truncated);
            forward = next;
        }

        let mut backward = vec![root];
        for m in ((cfg.m_min + 1)..=m0).rev() {
            let mut next = Vec::new();
            for path in &backward {
                let cur = path.last().expect("non-empty");
                let mut extended = false;
                for yp in sample_step(&riccati_step_back_y(p, m, &cur.z)?, cfg.sampling) {
                    for zp in sample_step(&riccati_seed_z(p, m - 1, &yp)?, cfg.sampling) {
                        let mut np = path.clone();
                        np.push(StatePair::new(m - 1, yp.clone(), zp));
                        next.push(np);
                        extended = true;
                    }
                }
                if !extended {
                    dead_ends.push(m - 1);
                }
            }
            trim(&mut next, &mut truncated);
            backward = next;
        }

        for b in &backward {
            for f in &forward {
                if tables.len() == cap {
                    truncated = true;
                    break;
                }
                let rows: Vec<StatePair> = b.iter().skip(1).rev().chain(f.iter()).cloned().collect();
                tables.push(SolutionTable::new(rows)?);
            }
        }
    }
    dead_ends.sort_unstable();
    dead_ends.dedup();
    if tables.is_empty() {
        return Err(Error::NoContinuation(dead_ends.first().copied().unwrap_or(m0)));
    }
    Ok(RiccatiRun {
        tables,
        truncated,
        dead_ends,
    })
}

/// Riccati equations violated anywhere in the table. The second equation is
/// also checked at `m_min − 1`, which links `y_{m_min}` with `z_{m_min}`.
pub fn verify_riccati_table(p: &Params, t: &SolutionTable) -> Result<Vec<Failure>> {
    let mut out = Vec::new();
    for s in t.rows() {
        if !residual_riccati1(p, s.m - 1, &s.y, &s.z)? {
            out.push(Failure {
                m: s.m - 1,
                equation: "riccati1",
            });
        }
    }
    for w in t.rows().windows(2) {
        if !residual_riccati2(p, w[0].m, &w[0].y, &w[1].z)? {
            out.push(Failure {
                m: w[0].m,
                equation: "riccati2",
            });
        }
    }
    out.sort_by_key(|f| f.m);
    Ok(out)
}

/// The Riccati-to-Painlevé implication on one table: returns `false` only
/// when the table solves the Riccati system but not the Painlevé system.
pub fn theorem_check(p: &Params, t: &SolutionTable) -> Result<bool> {
    if !verify_riccati_table(p, t)?.is_empty() {
        return Ok(true);
    }
    Ok(verify_table(p, t)?.is_empty())
}
