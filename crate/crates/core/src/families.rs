//! Closed-form solution families and asymptotic linearity detection.
//!
//! The Riccati families are piecewise-linear in `m` with a free constant
//! (`c` or `c'`) and a list of linear inequalities that make every max in
//! the Riccati equations resolve the intended way. The linear ansatz
//! families solve the all-minus Painlevé system for large `|m|`.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{Params, ParityPair, StatePair};
use crate::riccati::check_riccati_conditions;
use crate::table::SolutionTable;
use crate::tropical::{fmt_rat, max_of, rat, Rat, Sign};

/// `h = A3+B1−A2−B4`, `h' = A3−A4−B3+B4`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivedConstants {
    pub h: Rat,
    pub h_prime: Rat,
}

pub fn compute_h(p: &Params) -> DerivedConstants {
    let [_, a2, a3, a4] = &p.a;
    let [b1, _, b3, b4] = &p.b;
    DerivedConstants {
        h: a3 + b1 - a2 - b4,
        h_prime: a3 - a4 - b3 + b4,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FamilyId {
    /// `(−1, hm+c)`, `z_{m+1} = (+1, (Q−h)m+A2+B4−c)`.
    R1,
    /// `(+1, hm+A2+B4−c)`, `z_{m+1} = (−1, (Q−h)m+c)`.
    R2,
    /// `(−1, h'm+c')`, `z_{m+1} = (+1, h'm+c'+B4−A4)`.
    R3,
    /// `(+1, h'm+c'−B4+A4)`, `z_{m+1} = (−1, h'm+c')`.
    R4,
    /// Parameter-free `(−1, A2+B4−B1)`, `z_{m+1} = (+1, mQ+B1)`.
    PConst,
    /// Global solution patched at `m = 0`.
    Sol0,
    /// Global solution with a `(+1, A3)` plateau on `m0 < m <= 0`.
    SolN2,
    /// Global solution with a constant stretch on `0 <= m < m0`.
    SolP,
    /// All-minus `Y = (Q−α)m+β`, `Z = αm+γ`.
    LinAnsatz,
    /// All-minus `Y = α'm+β'`, `Z = α'm+γ'`.
    LinAnsatzPrime,
}

impl FamilyId {
    pub const ALL: [FamilyId; 10] = [
        FamilyId::R1,
        FamilyId::R2,
        FamilyId::R3,
        FamilyId::R4,
        FamilyId::PConst,
        FamilyId::Sol0,
        FamilyId::SolN2,
        FamilyId::SolP,
        FamilyId::LinAnsatz,
        FamilyId::LinAnsatzPrime,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FamilyId::R1 => "r1",
            FamilyId::R2 => "r2",
            FamilyId::R3 => "r3",
            FamilyId::R4 => "r4",
            FamilyId::PConst => "pconst",
            FamilyId::Sol0 => "sol0",
            FamilyId::SolN2 => "soln2",
            FamilyId::SolP => "solp",
            FamilyId::LinAnsatz => "lin",
            FamilyId::LinAnsatzPrime => "linprime",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            FamilyId::R1 => "Riccati: y=(-1,hm+c), z_{m+1}=(+1,(Q-h)m+A2+B4-c); needs --c",
            FamilyId::R2 => "Riccati: y=(+1,hm+A2+B4-c), z_{m+1}=(-1,(Q-h)m+c); needs --c",
            FamilyId::R3 => "Riccati: y=(-1,h'm+c'), z_{m+1}=(+1,h'm+c'+B4-A4); needs --c",
            FamilyId::R4 => "Riccati: y=(+1,h'm+c'-B4+A4), z_{m+1}=(-1,h'm+c'); needs --c",
            FamilyId::PConst => "Riccati: y=(-1,A2+B4-B1), z_{m+1}=(+1,mQ+B1)",
            FamilyId::Sol0 => "Riccati, global: patched at m=0; needs --c",
            FamilyId::SolN2 => "Riccati, global: plateau (+1,A3) on m0<m<=0; needs --c (c') and --m0 < 0",
            FamilyId::SolP => "Riccati, global: constant stretch on 0<=m<m0; needs --c and --m0 > 0",
            FamilyId::LinAnsatz => "no parity: Y=(Q-a)m+b, Z=am+g; needs --alpha --beta --gamma",
            FamilyId::LinAnsatzPrime => "no parity: Y=a'm+b', Z=a'm+g'; needs --alpha --beta --gamma",
        }
    }

    fn is_riccati(self) -> bool {
        !matches!(self, FamilyId::LinAnsatz | FamilyId::LinAnsatzPrime)
    }
}

impl fmt::Display for FamilyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FamilyId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace(['-', '_'], "");
        FamilyId::ALL
            .into_iter()
            .find(|id| id.name() == key)
            .ok_or_else(|| Error::UnknownFamily(s.to_string()))
    }
}

/// Linear ansatz coefficients. For the unprimed form `Y_m = (Q−α)m+β`,
/// `Z_m = αm+γ`; for the primed form `Y_m = αm+β`, `Z_m = αm+γ`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LinearAnsatz {
    #[serde(serialize_with = "ser_rat")]
    pub alpha: Rat,
    #[serde(serialize_with = "ser_rat")]
    pub beta: Rat,
    #[serde(serialize_with = "ser_rat")]
    pub gamma: Rat,
}

fn ser_rat<S: serde::Serializer>(r: &Rat, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&fmt_rat(r))
}

impl LinearAnsatz {
    pub fn new(alpha: Rat, beta: Rat, gamma: Rat) -> Self {
        LinearAnsatz { alpha, beta, gamma }
    }

    pub fn ints(alpha: i64, beta: i64, gamma: i64) -> Self {
        Self::new(rat(alpha), rat(beta), rat(gamma))
    }

    /// `δ = Q − α`, the `Y` slope of the unprimed form.
    pub fn delta(&self, p: &Params) -> Rat {
        &p.q - &self.alpha
    }

    /// Left minus right side of the ansatz identity:
    /// `2(β+γ)+α − (B3+B4+A1+A2)` unprimed,
    /// `α+2(γ−β) − (B3+B4−A3−A4)` primed.
    pub fn identity_defect(&self, p: &Params, primed: bool) -> Rat {
        let [a1, a2, a3, a4] = &p.a;
        let [_, _, b3, b4] = &p.b;
        let two = rat(2);
        if primed {
            &self.alpha + &two * (&self.gamma - &self.beta) - (b3 + b4 - a3 - a4)
        } else {
            &two * (&self.beta + &self.gamma) + &self.alpha - (b3 + b4 + a1 + a2)
        }
    }
}

/// The four index-dependent inequalities (plus `0 <= α <= Q`) at `m`.
/// The identity must hold; otherwise this is an error.
pub fn check_linear_ansatz(p: &Params, ans: &LinearAnsatz, m: i64, primed: bool) -> Result<bool> {
    let defect = ans.identity_defect(p, primed);
    if defect != rat(0) {
        return Err(Error::AnsatzIdentity(format!(
            "{} form off by {}",
            if primed { "primed" } else { "unprimed" },
            fmt_rat(&defect)
        )));
    }
    Ok(ansatz_conditions(p, ans, m, primed).iter().all(|c| c.holds))
}

fn ansatz_conditions(p: &Params, ans: &LinearAnsatz, m: i64, primed: bool) -> Vec<Condition> {
    let [a1, a2, a3, a4] = &p.a;
    let [b1, b2, b3, b4] = &p.b;
    let (al, be, ga) = (&ans.alpha, &ans.beta, &ans.gamma);
    let mr = rat(m);
    let q_al = &p.q - al;
    let mut v = vec![Condition::new("0 <= alpha <= Q", &rat(0) <= al && al <= &p.q)];
    let at = |s: &str| format!("{s} at m={m}");
    if primed {
        v.push(Condition::new(
            at("alpha(m+1)+gamma <= min(B3,B4)"),
            al * (&mr + rat(1)) + ga <= *b3.min(b4),
        ));
        v.push(Condition::new(
            at("alpha m+beta <= min(A3,A4)"),
            al * &mr + be <= *a3.min(a4),
        ));
        v.push(Condition::new(
            at("(Q-alpha)m+max(B1,B2) <= alpha+gamma"),
            &q_al * &mr + max_of(&[b1, b2]) <= al + ga,
        ));
        v.push(Condition::new(
            at("(Q-alpha)m+max(A1,A2) <= beta"),
            &q_al * &mr + max_of(&[a1, a2]) <= *be,
        ));
    } else {
        v.push(Condition::new(
            at("alpha(m+1)+gamma >= max(B3,B4)"),
            al * (&mr + rat(1)) + ga >= max_of(&[b3, b4]),
        ));
        v.push(Condition::new(
            at("alpha m+min(A1,A2) >= beta"),
            al * &mr + a1.min(a2) >= *be,
        ));
        v.push(Condition::new(
            at("(Q-alpha)m+beta >= max(A3,A4)"),
            &q_al * &mr + be >= max_of(&[a3, a4]),
        ));
        v.push(Condition::new(
            at("(Q-alpha)m+min(B1,B2) >= alpha+gamma"),
            &q_al * &mr + b1.min(b2) >= al + ga,
        ));
    }
    v
}

/// One inequality of a family's validity list.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Condition {
    pub expr: String,
    pub holds: bool,
}

impl Condition {
    fn new(expr: impl Into<String>, holds: bool) -> Self {
        Condition {
            expr: expr.into(),
            holds,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilySpec {
    pub id: FamilyId,
    /// `c` or `c'`, depending on the family.
    pub c: Option<Rat>,
    pub m0: Option<i64>,
    pub ansatz: Option<LinearAnsatz>,
}

impl FamilySpec {
    pub fn new(id: FamilyId) -> Self {
        FamilySpec {
            id,
            c: None,
            m0: None,
            ansatz: None,
        }
    }

    pub fn with_c(mut self, c: Rat) -> Self {
        self.c = Some(c);
        self
    }

    pub fn with_m0(mut self, m0: i64) -> Self {
        self.m0 = Some(m0);
        self
    }

    pub fn with_ansatz(mut self, a: LinearAnsatz) -> Self {
        self.ansatz = Some(a);
        self
    }
}

#[derive(Clone, Debug)]
pub struct FamilyInstance {
    pub table: SolutionTable,
    pub valid: bool,
    pub conditions: Vec<Condition>,
}

impl FamilyInstance {
    pub fn violated(&self) -> impl Iterator<Item = &Condition> {
        self.conditions.iter().filter(|c| !c.holds)
    }

    pub fn report_json(&self, spec: &FamilySpec, p: &Params) -> serde_json::Value {
        let mut fam = serde_json::json!({ "id": spec.id.name() });
        if let Some(c) = &spec.c {
            fam["c"] = fmt_rat(c).into();
        }
        if let Some(m0) = spec.m0 {
            fam["m0"] = m0.into();
        }
        if let Some(a) = &spec.ansatz {
            fam["ansatz"] = serde_json::to_value(a).expect("serializable");
        }
        serde_json::json!({
            "family": fam,
            "params": serde_json::to_value(p).expect("serializable"),
            "valid": self.valid,
            "conditions": self.conditions,
        })
    }
}

/// `slope·m + intercept` with parity, on an inclusive index range.
struct Piece {
    from: Option<i64>,
    to: Option<i64>,
    sign: Sign,
    slope: Rat,
    intercept: Rat,
}

impl Piece {
    fn new(from: Option<i64>, to: Option<i64>, sign: Sign, slope: Rat, intercept: Rat) -> Self {
        Piece {
            from,
            to,
            sign,
            slope,
            intercept,
        }
    }

    fn covers(&self, m: i64) -> bool {
        self.from.is_none_or(|f| f <= m) && self.to.is_none_or(|t| m <= t)
    }

    fn at(&self, m: i64) -> ParityPair {
        ParityPair::new(self.sign, &self.slope * rat(m) + &self.intercept)
    }
}

/// Value of a piecewise definition at `m`; pieces that overlap must agree.
fn eval_pieces(pieces: &[Piece], m: i64, what: &str) -> Result<ParityPair> {
    let mut found: Option<ParityPair> = None;
    for pc in pieces.iter().filter(|pc| pc.covers(m)) {
        let v = pc.at(m);
        match &found {
            Some(prev) if *prev != v => {
                return Err(Error::FamilyArgs {
                    family: what.into(),
                    reason: format!("overlapping pieces disagree at m={m}: {prev} vs {v}"),
                })
            }
            Some(_) => {}
            None => found = Some(v),
        }
    }
    found.ok_or_else(|| Error::FamilyArgs {
        family: what.into(),
        reason: format!("no piece covers m={m}"),
    })
}

fn window_rows(
    lo: i64,
    hi: i64,
    what: &str,
    y: impl Fn(i64) -> Result<ParityPair>,
    z: impl Fn(i64) -> Result<ParityPair>,
) -> Result<SolutionTable> {
    if lo > hi {
        return Err(Error::Window(format!("{lo} > {hi}")));
    }
    let rows = (lo..=hi)
        .map(|m| Ok(StatePair::new(m, y(m)?, z(m)?)))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| match e {
            Error::FamilyArgs { .. } => e,
            other => Error::FamilyArgs {
                family: what.into(),
                reason: other.to_string(),
            },
        })?;
    SolutionTable::new(rows)
}

fn need_c(spec: &FamilySpec) -> Result<Rat> {
    spec.c.clone().ok_or_else(|| Error::FamilyArgs {
        family: spec.id.name().into(),
        reason: "missing constant c".into(),
    })
}

fn need_m0(spec: &FamilySpec, positive: bool) -> Result<i64> {
    let m0 = spec.m0.ok_or_else(|| Error::FamilyArgs {
        family: spec.id.name().into(),
        reason: "missing m0".into(),
    })?;
    if (positive && m0 <= 0) || (!positive && m0 >= 0) {
        return Err(Error::FamilyArgs {
            family: spec.id.name().into(),
            reason: format!("m0 must be {}, got {m0}", if positive { "> 0" } else { "< 0" }),
        });
    }
    Ok(m0)
}

/// Builds the family's table on `[lo, hi]` and evaluates its validity
/// conditions over that window.
pub fn instantiate_family(spec: &FamilySpec, p: &Params, lo: i64, hi: i64) -> Result<FamilyInstance> {
    if spec.id.is_riccati() && !check_riccati_conditions(p) {
        return Err(Error::RiccatiConditions(format!(
            "family {} needs B1+A3 = Q+A1+B3 and B2+A4 = A2+B4",
            spec.id
        )));
    }
    let name = spec.id.name();
    let DerivedConstants { h, h_prime: hp } = compute_h(p);
    let q = &p.q;
    let [a1, a2, a3, a4] = &p.a;
    let [b1, b2, b3, b4] = &p.b;
    let (plus, minus) = (Sign::Plus, Sign::Minus);
    let zero = rat(0);
    let mut conds: Vec<Condition> = Vec::new();

    // Families given as y_m and z_{m+1} formulas; row m takes z from m−1.
    // Riccati2 links (y_m, z_{m+1}) for m in [lo, hi−1]; Riccati1 links
    // (y_{m+1}, z_{m+1}) for m in [lo−1, hi−1].
    let local = |y: Piece,
                 zn: Piece,
                 r2: &dyn Fn(i64) -> Vec<(String, bool)>,
                 r1: &dyn Fn(i64) -> Vec<(String, bool)>,
                 conds: &mut Vec<Condition>|
     -> Result<SolutionTable> {
        for m in lo..hi {
            for (e, ok) in r2(m) {
                conds.push(Condition::new(format!("riccati2: {e} at m={m}"), ok));
            }
        }
        for m in (lo - 1)..hi {
            for (e, ok) in r1(m) {
                conds.push(Condition::new(format!("riccati1: {e} at m={m}"), ok));
            }
        }
        window_rows(lo, hi, name, |m| Ok(y.at(m)), |m| Ok(zn.at(m - 1)))
    };

    let table = match spec.id {
        FamilyId::R1 => {
            let c = need_c(spec)?;
            let qh = q - &h;
            local(
                Piece::new(None, None, minus, h.clone(), c.clone()),
                Piece::new(None, None, plus, qh.clone(), a2 + b4 - &c),
                &|m| {
                    let m = rat(m);
                    vec![
                        ("hm >= A4-c".into(), &h * &m >= a4 - &c),
                        ("(Q-h)m >= c-A2".into(), &qh * &m >= &c - a2),
                    ]
                },
                &|m| {
                    let m1 = rat(m + 1);
                    vec![
                        ("h(m+1) >= A3-c".into(), &h * &m1 >= a3 - &c),
                        ("(Q-h)(m+1) >= c-A1".into(), &qh * &m1 >= &c - a1),
                    ]
                },
                &mut conds,
            )?
        }
        FamilyId::R2 => {
            let c = need_c(spec)?;
            let qh = q - &h;
            local(
                Piece::new(None, None, plus, h.clone(), a2 + b4 - &c),
                Piece::new(None, None, minus, qh.clone(), c.clone()),
                &|m| {
                    let m = rat(m);
                    vec![
                        ("(Q-h)m >= B4-c".into(), &qh * &m >= b4 - &c),
                        ("hm >= c-B2".into(), &h * &m >= &c - b2),
                    ]
                },
                &|m| {
                    let m = rat(m);
                    vec![
                        ("(Q-h)m >= B3-c".into(), &qh * &m >= b3 - &c),
                        ("hm >= c-B1".into(), &h * &m >= &c - b1),
                    ]
                },
                &mut conds,
            )?
        }
        FamilyId::R3 => {
            let c = need_c(spec)?;
            let qh = q - &hp;
            local(
                Piece::new(None, None, minus, hp.clone(), c.clone()),
                Piece::new(None, None, plus, hp.clone(), &c + b4 - a4),
                &|m| {
                    let m = rat(m);
                    vec![
                        ("h'm <= A4-c'".into(), &hp * &m <= a4 - &c),
                        ("(Q-h')m <= c'-A2".into(), &qh * &m <= &c - a2),
                    ]
                },
                &|m| {
                    let m1 = rat(m + 1);
                    vec![
                        ("h'(m+1) <= A3-c'".into(), &hp * &m1 <= a3 - &c),
                        ("(Q-h')(m+1) <= c'-A1".into(), &qh * &m1 <= &c - a1),
                    ]
                },
                &mut conds,
            )?
        }
        FamilyId::R4 => {
            let c = need_c(spec)?;
            let qh = q - &hp;
            local(
                Piece::new(None, None, plus, hp.clone(), &c - b4 + a4),
                Piece::new(None, None, minus, hp.clone(), c.clone()),
                &|m| {
                    let m = rat(m);
                    vec![
                        ("h'm <= B4-c'".into(), &hp * &m <= b4 - &c),
                        ("(Q-h')m <= c'-B2".into(), &qh * &m <= &c - b2),
                    ]
                },
                &|m| {
                    let m = rat(m);
                    vec![
                        ("h'm <= B3-c'".into(), &hp * &m <= b3 - &c),
                        ("(Q-h')m <= c'-B1".into(), &qh * &m <= &c - b1),
                    ]
                },
                &mut conds,
            )?
        }
        FamilyId::PConst => {
            conds.push(Condition::new("A2+B4 <= A3+B1", a2 + b4 <= a3 + b1));
            conds.push(Condition::new("B1 <= B2", b1 <= b2));
            let bound = max_of(&[&(a2 + b4 - a1 - b1), &(b4 - b1)]);
            for m in (lo - 1)..hi {
                conds.push(Condition::new(
                    format!("mQ >= max(A2+B4-A1-B1, B4-B1) at m={m}"),
                    q * rat(m) >= bound,
                ));
            }
            let y = Piece::new(None, None, minus, zero.clone(), a2 + b4 - b1);
            let zn = Piece::new(None, None, plus, q.clone(), b1.clone());
            window_rows(lo, hi, name, |m| Ok(y.at(m)), |m| Ok(zn.at(m - 1)))?
        }
        FamilyId::Sol0 => {
            let c = need_c(spec)?;
            let lower = max_of(&[a1, a4, &(a2 + b4 - b1), &(a1 - b1 + b2)]);
            let upper = max_of(&[a2]).min(a3.clone()).min(a3 - b3 + b4).min(a2 + b4 - b3);
            conds.push(Condition::new("c >= max(A1, A4, A2+B4-B1, A1-B1+B2)", c >= lower));
            conds.push(Condition::new("c <= min(A2, A3, A3-B3+B4, A2+B4-B3)", c <= upper));
            let ys = [
                Piece::new(None, Some(0), minus, hp.clone(), c.clone()),
                Piece::new(Some(1), None, minus, h.clone(), c.clone()),
            ];
            let zs = [
                Piece::new(None, Some(0), plus, hp.clone(), b3 - a3 + &c),
                Piece::new(Some(1), None, plus, q - &h, a1 + b3 - &c),
            ];
            window_rows(
                lo,
                hi,
                name,
                |m| eval_pieces(&ys, m, name),
                |m| eval_pieces(&zs, m, name),
            )?
        }
        FamilyId::SolN2 => {
            let c = need_c(spec)?;
            let m0 = need_m0(spec, false)?;
            let m0r = rat(m0);
            push_h_ranges(&mut conds, q, &h, &hp);
            conds.push(Condition::new(
                "B3 <= B4 <= B1 <= B4+Q",
                b3 <= b4 && b4 <= b1 && b1 <= &(b4 + q),
            ));
            conds.push(Condition::new("A3+B1 >= A4+B4", a3 + b1 >= a4 + b4));
            conds.push(Condition::new("max(A2,A4) <= A3", max_of(&[a2, a4]) <= *a3));
            let lead = &hp * &m0r + &c;
            conds.push(Condition::new(
                "A4 <= h'm0+c' <= min(A3, A4+h')",
                a4 <= &lead && lead <= *a3.min(&(a4 + &hp)),
            ));
            conds.push(Condition::new(
                "(Q-h')m0+max(A1,A2) <= c'",
                (q - &hp) * &m0r + max_of(&[a1, a2]) <= c,
            ));
            let ys = [
                Piece::new(None, Some(m0), minus, hp.clone(), c.clone()),
                Piece::new(Some(m0 + 1), Some(0), plus, zero.clone(), a3.clone()),
                Piece::new(Some(1), None, minus, h.clone(), a2.clone()),
            ];
            let zs = [
                Piece::new(None, Some(m0), plus, hp.clone(), b3 - a3 + &c),
                Piece::new(Some(m0 + 1), Some(1), plus, zero.clone(), b4.clone()),
                Piece::new(Some(2), None, plus, q - &h, b4 - (q - &h)),
            ];
            window_rows(
                lo,
                hi,
                name,
                |m| eval_pieces(&ys, m, name),
                |m| eval_pieces(&zs, m, name),
            )?
        }
        FamilyId::SolP => {
            let c = need_c(spec)?;
            let m0 = need_m0(spec, true)?;
            let m0r = rat(m0);
            let qh = q - &h;
            push_h_ranges(&mut conds, q, &h, &hp);
            conds.push(Condition::new("B4 <= B1 <= B2", b4 <= b1 && b1 <= b2));
            conds.push(Condition::new(
                "A1+B1 <= A2+B4 <= A1+B1+Q",
                a1 + b1 <= a2 + b4 && a2 + b4 <= a1 + b1 + q,
            ));
            conds.push(Condition::new("A2 <= min(A1,A3)+Q", *a2 <= a1.min(a3) + q));
            conds.push(Condition::new("A1 >= A4", a1 >= a4));
            conds.push(Condition::new("A2+B3 <= B4+A3+Q", a2 + b3 <= b4 + a3 + q));
            conds.push(Condition::new(
                "h(m0-1)+B1 <= c <= hm0+min(B1,B2)",
                &h * (&m0r - rat(1)) + b1 <= c && c <= &h * &m0r + b1.min(b2),
            ));
            conds.push(Condition::new(
                "(Q-h)m0+c >= max(B3+(Q-h), B4)",
                &qh * &m0r + &c >= max_of(&[&(b3 + &qh), b4]),
            ));
            let ys = [
                Piece::new(None, Some(-1), plus, hp.clone(), a1 - b1 + b2),
                Piece::new(Some(0), Some(m0 - 1), minus, zero.clone(), a2 + b4 - b1),
                Piece::new(Some(m0), None, plus, h.clone(), a2 + b4 - &c),
            ];
            let zs = [
                Piece::new(None, Some(-1), minus, hp.clone(), b2 - q),
                Piece::new(Some(0), Some(0), plus, zero.clone(), a2 + b4 - a1 - q),
                Piece::new(Some(1), Some(m0), plus, q.clone(), b1 - q),
                Piece::new(Some(m0 + 1), None, minus, qh.clone(), &c - &qh),
            ];
            window_rows(
                lo,
                hi,
                name,
                |m| eval_pieces(&ys, m, name),
                |m| eval_pieces(&zs, m, name),
            )?
        }
        FamilyId::LinAnsatz | FamilyId::LinAnsatzPrime => {
            let primed = spec.id == FamilyId::LinAnsatzPrime;
            let ans = spec.ansatz.clone().ok_or_else(|| Error::FamilyArgs {
                family: name.into(),
                reason: "missing alpha/beta/gamma".into(),
            })?;
            let defect = ans.identity_defect(p, primed);
            conds.push(Condition::new(
                if primed {
                    "alpha+2(gamma-beta) = B3+B4-A3-A4"
                } else {
                    "2(beta+gamma)+alpha = B3+B4+A1+A2"
                },
                defect == zero,
            ));
            conds.push(Condition::new(
                "constraint B1+B2+A3+A4 = Q+A1+A2+B3+B4",
                crate::udp6::check_constraint(p),
            ));
            for m in lo..hi {
                conds.extend(ansatz_conditions(p, &ans, m, primed).into_iter().skip(1));
            }
            conds.insert(
                0,
                Condition::new("0 <= alpha <= Q", zero <= ans.alpha && ans.alpha <= *q),
            );
            let y_slope = if primed { ans.alpha.clone() } else { q - &ans.alpha };
            let y = Piece::new(None, None, minus, y_slope, ans.beta.clone());
            let z = Piece::new(None, None, minus, ans.alpha.clone(), ans.gamma.clone());
            window_rows(lo, hi, name, |m| Ok(y.at(m)), |m| Ok(z.at(m)))?
        }
    };
    let valid = conds.iter().all(|c| c.holds);
    Ok(FamilyInstance {
        table,
        valid,
        conditions: conds,
    })
}

fn push_h_ranges(conds: &mut Vec<Condition>, q: &Rat, h: &Rat, hp: &Rat) {
    let zero = rat(0);
    conds.push(Condition::new("0 <= h <= Q", &zero <= h && h <= q));
    conds.push(Condition::new("0 <= h' <= Q", &zero <= hp && hp <= q));
}

/// One detected affine end of a table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AffineFit {
    /// First (forward) or last (backward) index of the affine stretch.
    pub m0: i64,
    pub ansatz: LinearAnsatz,
    pub identity_holds: bool,
    /// Ansatz inequalities at every step fully inside the stretch.
    pub inequalities_hold: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LinearityReport {
    pub forward: Option<AffineFit>,
    pub backward: Option<AffineFit>,
    pub notes: Vec<String>,
}

impl LinearityReport {
    /// Both ends affine with the ansatz identity and inequalities satisfied.
    pub fn consistent(&self) -> bool {
        let ok = |f: &Option<AffineFit>| f.as_ref().is_some_and(|f| f.identity_holds && f.inequalities_hold);
        ok(&self.forward) && ok(&self.backward)
    }
}

fn affine_at(slope: &Rat, intercept: &Rat, m: i64) -> Rat {
    slope * rat(m) + intercept
}

/// Looks for exact affine behaviour of both amplitudes over the last and
/// first `w` steps of an all-minus table, extends each stretch as far as it
/// goes, and checks it against the linear ansatz. Not finding one is
/// reported, not an error.
pub fn detect_asymptotic_linearity(p: &Params, t: &SolutionTable, w: usize) -> Result<LinearityReport> {
    let need = 2 * w + 2;
    if w < 2 || t.len() < need {
        return Err(Error::TableTooShort {
            need: need.max(6),
            have: t.len(),
        });
    }
    let mut notes = Vec::new();
    if t.rows()
        .iter()
        .any(|s| s.y.sign == Sign::Plus || s.z.sign == Sign::Plus)
    {
        notes.push("table has +1 parities; ansatz applies to the all-minus sector".into());
    }
    let rows = t.rows();
    let ys: Vec<&Rat> = rows.iter().map(|s| &s.y.amp).collect();
    let zs: Vec<&Rat> = rows.iter().map(|s| &s.z.amp).collect();
    let n = rows.len();
    let (lo, hi) = (t.m_min(), t.m_max());

    // Affine fit through two end points, extended while it matches.
    let stretch = |from_end: bool| -> Option<(Rat, Rat, Rat, Rat, i64)> {
        let (i0, i1) = if from_end { (n - 1, n - 2) } else { (0, 1) };
        let dy = if from_end { ys[i0] - ys[i1] } else { ys[i1] - ys[i0] };
        let dz = if from_end { zs[i0] - zs[i1] } else { zs[i1] - zs[i0] };
        let m_ref = rows[i0].m;
        let by = ys[i0] - &dy * rat(m_ref);
        let bz = zs[i0] - &dz * rat(m_ref);
        let on = |i: usize| {
            let m = rows[i].m;
            &affine_at(&dy, &by, m) == ys[i] && &affine_at(&dz, &bz, m) == zs[i]
        };
        let idx: Vec<usize> = if from_end {
            (0..n).rev().collect()
        } else {
            (0..n).collect()
        };
        if !idx[..=w].iter().all(|&i| on(i)) {
            return None;
        }
        let last = idx.iter().take_while(|&&i| on(i)).last().copied()?;
        Some((dy, by, dz, bz, rows[last].m))
    };

    let forward = match stretch(true) {
        None => {
            notes.push(format!("no affine tail over the last {w} steps"));
            None
        }
        Some((dy, by, dz, bz, m0)) => {
            if dy + &dz != p.q {
                notes.push("forward slopes do not sum to Q".into());
                None
            } else {
                let ans = LinearAnsatz::new(dz, by, bz);
                let identity_holds = ans.identity_defect(p, false) == rat(0);
                let inequalities_hold = (m0..hi).all(|m| ansatz_conditions(p, &ans, m, false).iter().all(|c| c.holds));
                Some(AffineFit {
                    m0,
                    ansatz: ans,
                    identity_holds,
                    inequalities_hold,
                })
            }
        }
    };
    let backward = match stretch(false) {
        None => {
            notes.push(format!("no affine head over the first {w} steps"));
            None
        }
        Some((dy, by, dz, bz, m0)) => {
            if dy != dz {
                notes.push("backward slopes of Y and Z differ".into());
                None
            } else {
                let ans = LinearAnsatz::new(dy, by, bz);
                let identity_holds = ans.identity_defect(p, true) == rat(0);
                let inequalities_hold = (lo..m0).all(|m| ansatz_conditions(p, &ans, m, true).iter().all(|c| c.holds));
                Some(AffineFit {
                    m0,
                    ansatz: ans,
                    identity_holds,
                    inequalities_hold,
                })
            }
        }
    };
    Ok(LinearityReport {
        forward,
        backward,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p41() -> Params {
        Params::from_ints(100, [25, 46, 67, 23], [59, 65, 1, 42])
    }

    fn ex1() -> Params {
        Params::from_ints(100, [32, 33, 37, 22], [53, 65, 8, 4])
    }

    #[test]
    fn h_values() {
        let d = compute_h(&p41());
        assert_eq!((d.h, d.h_prime), (rat(38), rat(85)));
        let flat = compute_h(&Params::from_ints(3, [5; 4], [5; 4]));
        assert_eq!((flat.h, flat.h_prime), (rat(0), rat(0)));
        assert_eq!(compute_h(&p41().shifted(&rat(9))), compute_h(&p41()));
    }

    #[test]
    fn family_ids_parse() {
        for id in FamilyId::ALL {
            assert_eq!(id.name().parse::<FamilyId>().unwrap(), id);
        }
        assert_eq!("Sol0".parse::<FamilyId>().unwrap(), FamilyId::Sol0);
        assert!("sol9".parse::<FamilyId>().is_err());
    }

    #[test]
    fn sol0_window() {
        let p = p41();
        for (c, want) in [(30, false), (31, true), (46, true), (47, false)] {
            let inst = instantiate_family(&FamilySpec::new(FamilyId::Sol0).with_c(rat(c)), &p, -5, 5).unwrap();
            assert_eq!(inst.valid, want, "c={c}");
        }
        let inst = instantiate_family(&FamilySpec::new(FamilyId::Sol0).with_c(rat(47)), &p, -5, 5).unwrap();
        let bad: Vec<_> = inst.violated().collect();
        assert_eq!(bad.len(), 1);
        assert!(bad[0].expr.starts_with("c <= min"));
    }

    #[test]
    fn m0_sign_checked() {
        let p = p41();
        let e = instantiate_family(&FamilySpec::new(FamilyId::SolN2).with_c(rat(0)).with_m0(1), &p, -3, 3);
        assert!(matches!(e, Err(Error::FamilyArgs { .. })));
        let e = instantiate_family(&FamilySpec::new(FamilyId::SolP).with_c(rat(0)).with_m0(-1), &p, -3, 3);
        assert!(matches!(e, Err(Error::FamilyArgs { .. })));
        let e = instantiate_family(&FamilySpec::new(FamilyId::Sol0), &p, -3, 3);
        assert!(matches!(e, Err(Error::FamilyArgs { .. })));
    }

    #[test]
    fn riccati_family_needs_conditions() {
        let e = instantiate_family(&FamilySpec::new(FamilyId::Sol0).with_c(rat(31)), &ex1(), -3, 3);
        assert!(matches!(e, Err(Error::RiccatiConditions(_))));
    }

    #[test]
    fn ansatz_identities_ex1() {
        let p = ex1();
        let fwd = LinearAnsatz::ints(89, 111, -117);
        assert!(check_linear_ansatz(&p, &fwd, 1, false).unwrap());
        assert!(check_linear_ansatz(&p, &fwd, 20, false).unwrap());
        assert!(!check_linear_ansatz(&p, &fwd, 0, false).unwrap());
        let back = LinearAnsatz::ints(95, 111, 40);
        assert!(check_linear_ansatz(&p, &back, -2, true).unwrap());
        assert!(check_linear_ansatz(&p, &back, -30, true).unwrap());
        assert!(matches!(
            check_linear_ansatz(&p, &LinearAnsatz::ints(89, 111, -116), 1, false),
            Err(Error::AnsatzIdentity(_))
        ));
    }

    #[test]
    fn alpha_out_of_range() {
        let p = ex1();
        // 2(beta+gamma)+alpha = 77 with alpha = 101 > Q.
        let a = LinearAnsatz::ints(101, 0, -12);
        assert!(!check_linear_ansatz(&p, &a, 5, false).unwrap());
        let a = LinearAnsatz::ints(-1, 39, 0);
        assert!(!check_linear_ansatz(&p, &a, 5, false).unwrap());
    }

    #[test]
    fn detect_on_synthetic_affine() {
        let p = ex1();
        let inst = instantiate_family(
            &FamilySpec::new(FamilyId::LinAnsatz).with_ansatz(LinearAnsatz::ints(89, 111, -117)),
            &p,
            3,
            12,
        )
        .unwrap();
        let rep = detect_asymptotic_linearity(&p, &inst.table, 3).unwrap();
        let f = rep.forward.unwrap();
        assert_eq!(f.m0, 3);
        assert_eq!(f.ansatz, LinearAnsatz::ints(89, 111, -117));
        assert!(detect_asymptotic_linearity(&p, &inst.table, 5).is_err());
    }
}
