//! Signed log-domain evolution of the q-difference Painlevé VI system and
//! its Riccati reduction, used as an independent check on the max-plus
//! system through the limit `ε → +0`.
//!
//! Every quantity is `±e^{X/ε}` with `X/ε` far outside `f64` range, so
//! values are stored as a sign and a natural-log magnitude in arbitrary
//! precision.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;

use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use num::Signed;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::Params;
use crate::riccati::check_riccati_conditions;
use crate::table::SolutionTable;
use crate::tropical::{fmt_rat, Rat, Sign};

const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("astro-float constants"));
}

fn with_cc<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

/// Exact rational to a binary float at precision `p`.
pub fn rat_to_bf(r: &Rat, p: usize) -> BigFloat {
    with_cc(|cc| {
        let n = BigFloat::parse(&r.numer().to_string(), Radix::Dec, p, RM, cc);
        let d = BigFloat::parse(&r.denom().to_string(), Radix::Dec, p, RM, cc);
        n.div(&d, p, RM)
    })
}

/// Nearest `f64`; reporting only.
pub fn bf_to_f64(x: &BigFloat) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    with_cc(|cc| x.format(Radix::Dec, RM, cc))
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(f64::NAN)
}

fn cmp_bf(a: &BigFloat, b: &BigFloat) -> Ordering {
    match a.cmp(b) {
        Some(c) if c < 0 => Ordering::Less,
        Some(0) => Ordering::Equal,
        _ => Ordering::Greater,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LsSign {
    Pos,
    Neg,
    Zero,
}

impl LsSign {
    fn mul(self, o: LsSign) -> LsSign {
        match (self, o) {
            (LsSign::Zero, _) | (_, LsSign::Zero) => LsSign::Zero,
            (a, b) if a == b => LsSign::Pos,
            _ => LsSign::Neg,
        }
    }

    fn flip(self) -> LsSign {
        match self {
            LsSign::Pos => LsSign::Neg,
            LsSign::Neg => LsSign::Pos,
            LsSign::Zero => LsSign::Zero,
        }
    }
}

impl From<Sign> for LsSign {
    fn from(s: Sign) -> Self {
        match s {
            Sign::Plus => LsSign::Pos,
            Sign::Minus => LsSign::Neg,
        }
    }
}

/// `sign · e^{logmag}`.
#[derive(Clone, Debug)]
pub struct LogSigned {
    sign: LsSign,
    logmag: BigFloat,
    precision: usize,
    warn: bool,
}

impl LogSigned {
    pub fn zero(precision: usize) -> Self {
        LogSigned {
            sign: LsSign::Zero,
            logmag: BigFloat::from_i64(0, precision),
            precision,
            warn: false,
        }
    }

    pub fn from_log(sign: Sign, logmag: BigFloat, precision: usize) -> Self {
        LogSigned {
            sign: sign.into(),
            logmag,
            precision,
            warn: false,
        }
    }

    /// `sign · e^{amp/ε}`.
    pub fn from_amp(sign: Sign, amp: &Rat, eps: &Rat, precision: usize) -> Self {
        Self::from_log(sign, rat_to_bf(&(amp / eps), precision), precision)
    }

    /// Plain real number; `ln|v|` is taken at `precision`.
    pub fn from_f64(v: f64, precision: usize) -> Self {
        if v == 0.0 {
            return Self::zero(precision);
        }
        let sign = if v > 0.0 { Sign::Plus } else { Sign::Minus };
        let lm = with_cc(|cc| BigFloat::from_f64(v.abs(), precision).ln(precision, RM, cc));
        Self::from_log(sign, lm, precision)
    }

    pub fn sign(&self) -> LsSign {
        self.sign
    }

    pub fn is_zero(&self) -> bool {
        self.sign == LsSign::Zero
    }

    /// `None` for zero.
    pub fn logmag(&self) -> Option<&BigFloat> {
        (!self.is_zero()).then_some(&self.logmag)
    }

    pub fn precision(&self) -> usize {
        self.precision
    }

    pub fn cancellation_warning(&self) -> bool {
        self.warn
    }

    /// `ε·ln|v|`, the amplitude this value represents.
    pub fn amplitude(&self, eps: &Rat) -> Option<BigFloat> {
        self.logmag()
            .map(|l| l.mul(&rat_to_bf(eps, self.precision), self.precision, RM))
    }

    pub fn neg(&self) -> Self {
        LogSigned {
            sign: self.sign.flip(),
            ..self.clone()
        }
    }

    /// Same value carried at a different working precision.
    pub fn with_precision(&self, p: usize) -> Self {
        let mut out = self.clone();
        out.precision = p;
        out.logmag.set_precision(p, RM).expect("valid precision");
        out
    }
}

impl fmt::Display for LogSigned {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            LsSign::Zero => f.write_str("0"),
            LsSign::Pos => write!(f, "+e^{}", bf_to_f64(&self.logmag)),
            LsSign::Neg => write!(f, "-e^{}", bf_to_f64(&self.logmag)),
        }
    }
}

/// `x + y`. Opposite signs whose log-magnitudes differ by less than
/// `2^(−p/2)·max(1, |log|)` raise the cancellation warning.
pub fn ls_add(x: &LogSigned, y: &LogSigned) -> LogSigned {
    let p = x.precision.max(y.precision);
    let warn = x.warn || y.warn;
    if x.is_zero() {
        return LogSigned {
            warn,
            ..y.with_precision(p)
        };
    }
    if y.is_zero() {
        return LogSigned {
            warn,
            ..x.with_precision(p)
        };
    }
    let (hi, lo) = if cmp_bf(&x.logmag, &y.logmag) == Ordering::Less {
        (y, x)
    } else {
        (x, y)
    };
    let d = lo.logmag.sub(&hi.logmag, p, RM);
    if hi.sign == lo.sign {
        let lm = with_cc(|cc| {
            let e = d.exp(p, RM, cc);
            let one = BigFloat::from_i64(1, p);
            hi.logmag.add(&one.add(&e, p, RM).ln(p, RM, cc), p, RM)
        });
        return LogSigned {
            sign: hi.sign,
            logmag: lm,
            precision: p,
            warn,
        };
    }
    if d.is_zero() {
        return LogSigned {
            warn: true,
            ..LogSigned::zero(p)
        };
    }
    let scale = hi.logmag.abs().max(&BigFloat::from_i64(1, p));
    let tau = with_cc(|cc| {
        BigFloat::from_i64(2, p)
            .ln(p, RM, cc)
            .mul(&BigFloat::from_i64(-(p as i64) / 2, p), p, RM)
            .exp(p, RM, cc)
    });
    let close = cmp_bf(&d.abs(), &tau.mul(&scale, p, RM)) == Ordering::Less;
    let lm = with_cc(|cc| {
        let e = d.exp(p, RM, cc);
        let one = BigFloat::from_i64(1, p);
        hi.logmag.add(&one.sub(&e, p, RM).ln(p, RM, cc), p, RM)
    });
    LogSigned {
        sign: hi.sign,
        logmag: lm,
        precision: p,
        warn: warn || close,
    }
}

pub fn ls_sub(x: &LogSigned, y: &LogSigned) -> LogSigned {
    ls_add(x, &y.neg())
}

pub fn ls_mul(x: &LogSigned, y: &LogSigned) -> LogSigned {
    let p = x.precision.max(y.precision);
    let sign = x.sign.mul(y.sign);
    if sign == LsSign::Zero {
        return LogSigned {
            warn: x.warn || y.warn,
            ..LogSigned::zero(p)
        };
    }
    LogSigned {
        sign,
        logmag: x.logmag.add(&y.logmag, p, RM),
        precision: p,
        warn: x.warn || y.warn,
    }
}

pub fn ls_div(x: &LogSigned, y: &LogSigned) -> Result<LogSigned> {
    if y.is_zero() {
        return Err(Error::DivByZero);
    }
    let p = x.precision.max(y.precision);
    if x.is_zero() {
        return Ok(LogSigned {
            warn: x.warn || y.warn,
            ..LogSigned::zero(p)
        });
    }
    Ok(LogSigned {
        sign: x.sign.mul(y.sign),
        logmag: x.logmag.sub(&y.logmag, p, RM),
        precision: p,
        warn: x.warn || y.warn,
    })
}

fn product(xs: &[&LogSigned]) -> LogSigned {
    let mut acc = xs[0].clone();
    for x in &xs[1..] {
        acc = ls_mul(&acc, x);
    }
    acc
}

/// Default working precision for amplitudes up to `max_amp` at `ε`:
/// `max(256, 64 + 8·⌈max_amp/ε⌉)` bits.
pub fn default_precision(max_amp: &Rat, eps: &Rat) -> usize {
    let r = (max_amp.abs() / eps).ceil().to_integer();
    let bits = r
        .to_string()
        .parse::<usize>()
        .unwrap_or(usize::MAX / 16)
        .saturating_mul(8)
        .saturating_add(64);
    bits.max(256)
}

/// The q-side images `q = e^{Q/ε}`, `a_i = ±e^{A_i/ε}`, `b_i = ±e^{B_i/ε}`.
#[derive(Clone, Debug)]
pub struct QParams {
    pub eps: Rat,
    pub precision: usize,
    pub q: LogSigned,
    pub a: [LogSigned; 4],
    pub b: [LogSigned; 4],
    big_q: Rat,
}

impl QParams {
    pub fn new(p: &Params, eps: &Rat, precision: usize) -> Result<Self> {
        if *eps <= Rat::from_integer(0.into()) {
            return Err(Error::Config(format!("eps must be positive, got {}", fmt_rat(eps))));
        }
        let img = |s: Sign, v: &Rat| LogSigned::from_amp(s, v, eps, precision);
        Ok(QParams {
            eps: eps.clone(),
            precision,
            q: img(Sign::Plus, &p.q),
            a: std::array::from_fn(|i| img(p.sa[i], &p.a[i])),
            b: std::array::from_fn(|i| img(p.sb[i], &p.b[i])),
            big_q: p.q.clone(),
        })
    }

    /// `t = q^m`.
    pub fn t(&self, m: i64) -> LogSigned {
        LogSigned::from_amp(
            Sign::Plus,
            &(&self.big_q * Rat::from_integer(m.into())),
            &self.eps,
            self.precision,
        )
    }

    /// Log-domain image of `b1b2a3a4 = q·a1a2b3b4`: the two sides.
    pub fn constraint_sides(&self) -> (LogSigned, LogSigned) {
        let [a1, a2, a3, a4] = &self.a;
        let [b1, b2, b3, b4] = &self.b;
        (product(&[b1, b2, a3, a4]), product(&[&self.q, a1, a2, b3, b4]))
    }
}

fn nonzero(v: LogSigned, m: i64, what: &str) -> Result<LogSigned> {
    if v.is_zero() {
        Err(Error::Pole { m, what: what.into() })
    } else {
        Ok(v)
    }
}

/// One step `(y(t), z(t)) ↦ (y(qt), z(qt))` at `t = q^m`.
pub fn qp6_step(qp: &QParams, m: i64, y: &LogSigned, z: &LogSigned) -> Result<(LogSigned, LogSigned)> {
    let t = qp.t(m);
    let [a1, a2, a3, a4] = &qp.a;
    let [b1, b2, b3, b4] = &qp.b;
    let num = product(&[b3, b4, &ls_sub(y, &ls_mul(&t, a1)), &ls_sub(y, &ls_mul(&t, a2))]);
    let den = product(&[
        &nonzero(z.clone(), m, "z")?,
        &nonzero(ls_sub(y, a3), m, "y - a3")?,
        &nonzero(ls_sub(y, a4), m, "y - a4")?,
    ]);
    let z_next = ls_div(&num, &den)?;
    let num = product(&[
        a3,
        a4,
        &ls_sub(&z_next, &ls_mul(&t, b1)),
        &ls_sub(&z_next, &ls_mul(&t, b2)),
    ]);
    let den = product(&[
        &nonzero(y.clone(), m, "y")?,
        &nonzero(ls_sub(&z_next, b3), m, "z(qt) - b3")?,
        &nonzero(ls_sub(&z_next, b4), m, "z(qt) - b4")?,
    ]);
    let y_next = ls_div(&num, &den)?;
    Ok((y_next, z_next))
}

fn riccati_signs_hold(p: &Params) -> bool {
    p.sb[0] * p.sa[2] == p.sa[0] * p.sb[2] && p.sb[1] * p.sa[3] == p.sa[1] * p.sb[3]
}

/// One Riccati step at `t = q^m`: `y(t) ↦ (z(qt), y(qt))`.
pub fn qriccati_step(p: &Params, qp: &QParams, m: i64, y: &LogSigned) -> Result<(LogSigned, LogSigned)> {
    if !check_riccati_conditions(p) || !riccati_signs_hold(p) {
        return Err(Error::RiccatiConditions("need b1a3 = q·a1b3 and b2a4 = a2b4".into()));
    }
    let t = qp.t(m);
    let [_, a2, a3, a4] = &qp.a;
    let [b1, _, b3, b4] = &qp.b;
    let z_next = ls_mul(
        b4,
        &ls_div(&ls_sub(y, &ls_mul(&t, a2)), &nonzero(ls_sub(y, a4), m, "y - a4")?)?,
    );
    let y_next = ls_mul(
        a3,
        &ls_div(
            &ls_sub(&z_next, &ls_mul(&t, b1)),
            &nonzero(ls_sub(&z_next, b3), m, "z(qt) - b3")?,
        )?,
    );
    Ok((z_next, y_next))
}

/// Agreement of two sides of a multiplicative relation.
#[derive(Clone, Debug)]
pub struct QResidual {
    pub sign_match: bool,
    /// `|ln|lhs| − ln|rhs||`, i.e. the relative error.
    pub log_gap: BigFloat,
}

impl QResidual {
    fn of(l: &LogSigned, r: &LogSigned) -> Self {
        let p = l.precision.max(r.precision);
        let log_gap = match (l.logmag(), r.logmag()) {
            (Some(a), Some(b)) => a.sub(b, p, RM).abs(),
            (None, None) => BigFloat::from_i64(0, p),
            _ => BigFloat::from_i64(1, p),
        };
        QResidual {
            sign_match: l.sign == r.sign,
            log_gap,
        }
    }

    /// Holds with relative error below `2^(−bits)`.
    pub fn within_bits(&self, bits: usize) -> bool {
        let p = self.log_gap.precision().unwrap_or(64).max(64);
        let tol = with_cc(|cc| {
            BigFloat::from_i64(2, p)
                .ln(p, RM, cc)
                .mul(&BigFloat::from_i64(-(bits as i64), p), p, RM)
                .exp(p, RM, cc)
        });
        self.sign_match && cmp_bf(&self.log_gap, &tol) != Ordering::Greater
    }
}

/// Both q-P VI relations at `t = q^m` for `(y(t), z(t), y(qt), z(qt))`.
pub fn qp6_residual(
    qp: &QParams,
    m: i64,
    y: &LogSigned,
    z: &LogSigned,
    y_next: &LogSigned,
    z_next: &LogSigned,
) -> Result<(QResidual, QResidual)> {
    let t = qp.t(m);
    let [a1, a2, a3, a4] = &qp.a;
    let [b1, b2, b3, b4] = &qp.b;
    let first = (
        product(&[z, z_next, &ls_sub(y, a3), &ls_sub(y, a4)]),
        product(&[b3, b4, &ls_sub(y, &ls_mul(&t, a1)), &ls_sub(y, &ls_mul(&t, a2))]),
    );
    let second = (
        product(&[y, y_next, &ls_sub(z_next, b3), &ls_sub(z_next, b4)]),
        product(&[
            a3,
            a4,
            &ls_sub(z_next, &ls_mul(&t, b1)),
            &ls_sub(z_next, &ls_mul(&t, b2)),
        ]),
    );
    Ok((QResidual::of(&first.0, &first.1), QResidual::of(&second.0, &second.1)))
}

/// Strictly decreasing positive ε values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EpsSchedule {
    eps: Vec<Rat>,
    precision: Option<usize>,
}

impl EpsSchedule {
    pub fn new(eps: Vec<Rat>) -> Result<Self> {
        if eps.is_empty() {
            return Err(Error::Config("empty eps schedule".into()));
        }
        if eps.iter().any(|e| *e <= Rat::from_integer(0.into())) {
            return Err(Error::Config("eps values must be positive".into()));
        }
        if eps.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Config("eps schedule must be strictly decreasing".into()));
        }
        Ok(EpsSchedule { eps, precision: None })
    }

    /// Comma-separated rationals, e.g. `1,0.5,0.2,0.1`.
    pub fn parse(s: &str) -> Result<Self> {
        Self::new(
            s.split(',')
                .map(|t| crate::tropical::parse_rat(t.trim()))
                .collect::<Result<_>>()?,
        )
    }

    /// Fixed precision for every ε instead of the default policy.
    pub fn with_precision(mut self, bits: usize) -> Self {
        self.precision = Some(bits);
        self
    }

    pub fn values(&self) -> &[Rat] {
        &self.eps
    }

    fn precision_for(&self, max_amp: &Rat, eps: &Rat) -> usize {
        self.precision.unwrap_or_else(|| default_precision(max_amp, eps))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitRow {
    pub m: i64,
    pub eps: String,
    pub err_y: f64,
    pub err_z: f64,
    pub sign_ok_y: bool,
    pub sign_ok_z: bool,
    pub cancellation_flag: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Abort {
    pub eps: String,
    pub m: i64,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitReport {
    pub rows: Vec<LimitRow>,
    pub aborts: Vec<Abort>,
    /// Indices whose error fails to strictly decrease along the schedule.
    pub non_decreasing: Vec<i64>,
    /// Indices whose error extrapolates to a non-zero value at `ε = 0`.
    pub plateau: Vec<i64>,
}

impl LimitReport {
    pub fn any_cancellation(&self) -> bool {
        self.rows.iter().any(|r| r.cancellation_flag)
    }

    /// Signs at the smallest ε all agree.
    pub fn final_signs_ok(&self) -> bool {
        let Some(last) = self.rows.last().map(|r| r.eps.clone()) else {
            return false;
        };
        self.rows
            .iter()
            .filter(|r| r.eps == last)
            .all(|r| r.sign_ok_y && r.sign_ok_z)
    }

    pub fn converged(&self) -> bool {
        self.aborts.is_empty()
            && self.non_decreasing.is_empty()
            && self.plateau.is_empty()
            && self.final_signs_ok()
            && !self.any_cancellation()
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut wr = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        for r in &self.rows {
            wr.serialize(r)?;
        }
        let bytes = wr.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv is utf-8"))
    }
}

fn amp_error(v: &LogSigned, want: &Rat, eps: &Rat) -> f64 {
    match v.amplitude(eps) {
        Some(a) => bf_to_f64(&a.sub(&rat_to_bf(want, v.precision), v.precision, RM).abs()),
        None => f64::INFINITY,
    }
}

/// Starts the q-system from the table row at `m_lo`, evolves forward to
/// `m_hi` for every ε in the schedule, and compares `ε·ln|·|` and signs
/// with the table.
pub fn ud_limit_compare(
    p: &Params,
    table: &SolutionTable,
    schedule: &EpsSchedule,
    m_lo: i64,
    m_hi: i64,
) -> Result<LimitReport> {
    if m_lo >= m_hi {
        return Err(Error::Window(format!("{m_lo}:{m_hi} has no steps")));
    }
    let rows: Vec<_> = (m_lo..=m_hi)
        .map(|m| {
            table
                .get(m)
                .cloned()
                .ok_or_else(|| Error::Window(format!("table has no row m={m}")))
        })
        .collect::<Result<_>>()?;
    let mut max_amp = p.q.abs() * Rat::from_integer(m_lo.abs().max(m_hi.abs()).into());
    for v in
        p.a.iter()
            .chain(p.b.iter())
            .chain(rows.iter().flat_map(|s| [&s.y.amp, &s.z.amp]))
    {
        max_amp = max_amp.max(v.abs());
    }

    let mut report = LimitReport {
        rows: Vec::new(),
        aborts: Vec::new(),
        non_decreasing: Vec::new(),
        plateau: Vec::new(),
    };
    // errs[k][i]: max(err_Y, err_Z) at eps k, step i+1.
    let mut errs: Vec<Vec<Option<f64>>> = Vec::new();
    for eps in schedule.values() {
        let prec = schedule.precision_for(&max_amp, eps);
        let qp = QParams::new(p, eps, prec)?;
        let head = &rows[0];
        let mut y = LogSigned::from_amp(head.y.sign, &head.y.amp, eps, prec);
        let mut z = LogSigned::from_amp(head.z.sign, &head.z.amp, eps, prec);
        let mut per = vec![None; rows.len() - 1];
        for (i, want) in rows[1..].iter().enumerate() {
            let m = m_lo + i as i64;
            match qp6_step(&qp, m, &y, &z) {
                Ok((yn, zn)) => {
                    y = yn;
                    z = zn;
                }
                Err(e) => {
                    report.aborts.push(Abort {
                        eps: fmt_rat(eps),
                        m,
                        reason: e.to_string(),
                    });
                    break;
                }
            }
            let row = LimitRow {
                m: want.m,
                eps: fmt_rat(eps),
                err_y: amp_error(&y, &want.y.amp, eps),
                err_z: amp_error(&z, &want.z.amp, eps),
                sign_ok_y: y.sign() == want.y.sign.into(),
                sign_ok_z: z.sign() == want.z.sign.into(),
                cancellation_flag: y.cancellation_warning() || z.cancellation_warning(),
            };
            per[i] = Some(row.err_y.max(row.err_z));
            report.rows.push(row);
        }
        errs.push(per);
    }

    let eps_f: Vec<f64> = schedule.values().iter().map(|e| bf_to_f64(&rat_to_bf(e, 64))).collect();
    for i in 0..rows.len() - 1 {
        let m = rows[i + 1].m;
        let series: Option<Vec<f64>> = errs.iter().map(|v| v[i]).collect();
        let Some(series) = series else {
            continue;
        };
        if series.windows(2).any(|w| w[1] >= w[0]) && series.iter().any(|&e| e > 0.0) {
            report.non_decreasing.push(m);
        }
        if let [.., e1, e2] = series[..] {
            let n = eps_f.len();
            let (x1, x2) = (eps_f[n - 2], eps_f[n - 1]);
            let c0 = (e2 * x1 - e1 * x2) / (x1 - x2);
            if c0 > 0.5 * e2 && e2 > PLATEAU_FLOOR {
                report.plateau.push(m);
            }
        }
    }
    Ok(report)
}

/// Errors below this are treated as converged by the plateau test.
pub const PLATEAU_FLOOR: f64 = 1e-6;
