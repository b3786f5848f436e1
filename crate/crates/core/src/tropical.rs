//! Exact signed max-plus primitives.
//!
//! Amplitudes are exact rationals extended by a bottom element (−∞). Signs
//! carry the parity of a variable; [`parity_indicator`] maps a sign to the
//! additive weight a term picks up in a max (0 or −∞).

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num::{BigInt, BigRational, One, Zero};

use crate::error::{Error, Result};

/// Exact rational used for every amplitude.
pub type Rat = BigRational;

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"7"`, `"-3/4"` or a plain decimal such as `"0.25"`.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Rat::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = int.starts_with('-');
        let int_part: BigInt = match int.trim_start_matches(['-', '+']) {
            "" => BigInt::zero(),
            digits => digits.parse().map_err(|_| bad())?,
        };
        let frac_part: BigInt = frac.parse().map_err(|_| bad())?;
        let scale = num::pow(BigInt::from(10), frac.len());
        let mag = Rat::new(int_part * &scale + frac_part, scale);
        return Ok(if neg { -mag } else { mag });
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Rat::from_integer(n))
}

/// Canonical text form: integers as-is, otherwise `p/q`.
pub fn fmt_rat(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// An amplitude or the bottom element −∞.
///
/// The derived ordering puts `NegInf` below every finite value.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtAmp {
    NegInf,
    Fin(Rat),
}

impl ExtAmp {
    pub fn zero() -> Self {
        ExtAmp::Fin(Rat::zero())
    }

    pub fn int(n: i64) -> Self {
        ExtAmp::Fin(rat(n))
    }

    pub fn is_bottom(&self) -> bool {
        matches!(self, ExtAmp::NegInf)
    }

    pub fn finite(&self) -> Option<&Rat> {
        match self {
            ExtAmp::Fin(r) => Some(r),
            ExtAmp::NegInf => None,
        }
    }

    pub fn max(self, other: Self) -> Self {
        std::cmp::max(self, other)
    }
}

impl From<Rat> for ExtAmp {
    fn from(r: Rat) -> Self {
        ExtAmp::Fin(r)
    }
}

impl From<&Rat> for ExtAmp {
    fn from(r: &Rat) -> Self {
        ExtAmp::Fin(r.clone())
    }
}

impl fmt::Display for ExtAmp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtAmp::NegInf => f.write_str("-inf"),
            ExtAmp::Fin(r) => f.write_str(&fmt_rat(r)),
        }
    }
}

impl Add for &ExtAmp {
    type Output = ExtAmp;
    fn add(self, rhs: &ExtAmp) -> ExtAmp {
        match (self, rhs) {
            (ExtAmp::Fin(a), ExtAmp::Fin(b)) => ExtAmp::Fin(a + b),
            _ => ExtAmp::NegInf,
        }
    }
}

impl Add for ExtAmp {
    type Output = ExtAmp;
    fn add(self, rhs: ExtAmp) -> ExtAmp {
        &self + &rhs
    }
}

impl Add<&Rat> for &ExtAmp {
    type Output = ExtAmp;
    fn add(self, rhs: &Rat) -> ExtAmp {
        match self {
            ExtAmp::Fin(a) => ExtAmp::Fin(a + rhs),
            ExtAmp::NegInf => ExtAmp::NegInf,
        }
    }
}

/// A parity variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn from_i64(v: i64) -> Result<Self> {
        match v {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            _ => Err(Error::Parse(format!("sign must be +1 or -1, got {v}"))),
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn is_plus(self) -> bool {
        self == Sign::Plus
    }
}

impl Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        if self == rhs {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

impl Neg for Sign {
    type Output = Sign;
    fn neg(self) -> Sign {
        self * Sign::Minus
    }
}

// +1 sorts first.
impl Ord for Sign {
    fn cmp(&self, other: &Self) -> Ordering {
        other.as_i8().cmp(&self.as_i8())
    }
}

impl PartialOrd for Sign {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "1",
            Sign::Minus => "-1",
        })
    }
}

/// `S(ζ)`: 0 for +1, −∞ for −1.
pub fn parity_indicator(sign: Sign) -> ExtAmp {
    match sign {
        Sign::Plus => ExtAmp::zero(),
        Sign::Minus => ExtAmp::NegInf,
    }
}

/// Exact maximum of a non-empty list.
pub fn tmax(terms: &[ExtAmp]) -> Result<ExtAmp> {
    terms.iter().max().cloned().ok_or(Error::EmptyMax)
}

/// Maximum over finite values; panics on an empty slice, so only call it on
/// literal argument lists.
pub(crate) fn max_of(terms: &[&Rat]) -> Rat {
    terms.iter().copied().max().expect("max_of on empty slice").clone()
}

/// Checks the exchange lemma on one octuple: if `max(X1,X2)=max(X3,X4)` and
/// `max(W1,W2)=max(W3,W4)` then
/// `max(X1+W1, X3+W3, X2+W4, X4+W2) = max(X2+W2, X4+W4, X1+W3, X3+W1)`.
///
/// Returns `true` iff both premises and the conclusion hold.
pub fn exchange_identity_check(x: &[ExtAmp; 4], w: &[ExtAmp; 4]) -> bool {
    let premise_x = std::cmp::max(&x[0], &x[1]) == std::cmp::max(&x[2], &x[3]);
    let premise_w = std::cmp::max(&w[0], &w[1]) == std::cmp::max(&w[2], &w[3]);
    if !(premise_x && premise_w) {
        return false;
    }
    let lhs = [&x[0] + &w[0], &x[2] + &w[2], &x[1] + &w[3], &x[3] + &w[1]];
    let rhs = [&x[1] + &w[1], &x[3] + &w[3], &x[0] + &w[2], &x[2] + &w[0]];
    lhs.iter().max() == rhs.iter().max()
}

/// One argument `slope·x + intercept` of a max in a one-unknown equation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinTerm {
    pub slope: u32,
    pub intercept: ExtAmp,
}

impl LinTerm {
    pub fn new(slope: u32, intercept: impl Into<ExtAmp>) -> Self {
        LinTerm {
            slope,
            intercept: intercept.into(),
        }
    }

    pub fn constant(intercept: impl Into<ExtAmp>) -> Self {
        Self::new(0, intercept)
    }

    pub fn is_inert(&self) -> bool {
        self.intercept.is_bottom()
    }

    pub fn eval(&self, x: &Rat) -> ExtAmp {
        &self.intercept + &(Rat::from_integer(BigInt::from(self.slope)) * x)
    }
}

fn eval_max(terms: &[LinTerm], x: &Rat) -> ExtAmp {
    terms.iter().map(|t| t.eval(x)).max().unwrap_or(ExtAmp::NegInf)
}

/// Interval endpoint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Bound {
    NegInf,
    At(Rat),
    PosInf,
}

impl Bound {
    fn key(&self) -> (i8, Option<&Rat>) {
        match self {
            Bound::NegInf => (-1, None),
            Bound::At(r) => (0, Some(r)),
            Bound::PosInf => (1, None),
        }
    }

    pub fn finite(&self) -> Option<&Rat> {
        match self {
            Bound::At(r) => Some(r),
            _ => None,
        }
    }
}

impl Ord for Bound {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, ra) = self.key();
        let (b, rb) = other.key();
        a.cmp(&b).then_with(|| ra.cmp(&rb))
    }
}

impl PartialOrd for Bound {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::NegInf => f.write_str("-inf"),
            Bound::PosInf => f.write_str("+inf"),
            Bound::At(r) => f.write_str(&fmt_rat(r)),
        }
    }
}

/// Closed interval `[lo, hi]`; infinite ends are open in the usual sense.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    pub lo: Bound,
    pub hi: Bound,
}

impl Interval {
    pub fn point(r: Rat) -> Self {
        Interval {
            lo: Bound::At(r.clone()),
            hi: Bound::At(r),
        }
    }

    pub fn contains(&self, x: &Rat) -> bool {
        let b = Bound::At(x.clone());
        self.lo <= b && b <= self.hi
    }

    pub fn is_point(&self) -> bool {
        matches!((&self.lo, &self.hi), (Bound::At(a), Bound::At(b)) if a == b)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_point() {
            write!(f, "{{{}}}", self.lo)
        } else {
            let open = if self.lo == Bound::NegInf { '(' } else { '[' };
            let close = if self.hi == Bound::PosInf { ')' } else { ']' };
            write!(f, "{open}{}, {}{close}", self.lo, self.hi)
        }
    }
}

/// Canonical union of disjoint, non-touching closed intervals in increasing
/// order.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SolutionSet {
    intervals: Vec<Interval>,
}

impl SolutionSet {
    pub fn empty() -> Self {
        SolutionSet::default()
    }

    pub fn everything() -> Self {
        SolutionSet {
            intervals: vec![Interval {
                lo: Bound::NegInf,
                hi: Bound::PosInf,
            }],
        }
    }

    /// Builds the canonical form from arbitrary (possibly overlapping)
    /// intervals. Empty intervals (`lo > hi`) are dropped.
    pub fn from_intervals(mut v: Vec<Interval>) -> Self {
        v.retain(|iv| iv.lo <= iv.hi);
        v.sort_by(|a, b| a.lo.cmp(&b.lo).then_with(|| a.hi.cmp(&b.hi)));
        let mut out: Vec<Interval> = Vec::with_capacity(v.len());
        for iv in v {
            match out.last_mut() {
                Some(last) if iv.lo <= last.hi => {
                    if iv.hi > last.hi {
                        last.hi = iv.hi;
                    }
                }
                _ => out.push(iv),
            }
        }
        SolutionSet { intervals: out }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn contains(&self, x: &Rat) -> bool {
        self.intervals.iter().any(|iv| iv.contains(x))
    }

    /// The single point of a singleton set.
    pub fn as_point(&self) -> Option<&Rat> {
        match self.intervals.as_slice() {
            [iv] if iv.is_point() => iv.lo.finite(),
            _ => None,
        }
    }
}

impl fmt::Display for SolutionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.intervals.is_empty() {
            return f.write_str("{}");
        }
        for (i, iv) in self.intervals.iter().enumerate() {
            if i > 0 {
                f.write_str(" u ")?;
            }
            write!(f, "{iv}")?;
        }
        Ok(())
    }
}

/// Solves `max(lhs) = max(rhs)` for the real unknown `x`.
///
/// Both sides are convex piecewise-linear in `x`. Every point where either
/// side bends or where the two sides cross is an intersection of two of the
/// lines involved, so the candidates are all pairwise intersections. Between
/// consecutive candidates both sides are affine and have no crossing, so one
/// interior sample decides the whole open gap.
pub fn solve_one_unknown(lhs: &[LinTerm], rhs: &[LinTerm]) -> Result<SolutionSet> {
    if lhs.is_empty() || rhs.is_empty() {
        return Err(Error::EmptyMax);
    }
    if lhs.iter().all(LinTerm::is_inert) || rhs.iter().all(LinTerm::is_inert) {
        return Err(Error::DegenerateEquation);
    }
    let lines: Vec<(Rat, &Rat)> = lhs
        .iter()
        .chain(rhs)
        .filter_map(|t| {
            t.intercept
                .finite()
                .map(|c| (Rat::from_integer(BigInt::from(t.slope)), c))
        })
        .collect();

    let mut points: Vec<Rat> = Vec::new();
    for (i, (s1, c1)) in lines.iter().enumerate() {
        for (s2, c2) in &lines[i + 1..] {
            if s1 != s2 {
                points.push((*c2 - *c1) / (s1 - s2));
            }
        }
    }
    points.sort();
    points.dedup();

    let holds = |x: &Rat| eval_max(lhs, x) == eval_max(rhs, x);
    let two = rat(2);
    let mut pieces = Vec::new();

    if points.is_empty() {
        return Ok(if holds(&Rat::zero()) {
            SolutionSet::everything()
        } else {
            SolutionSet::empty()
        });
    }

    let first = &points[0];
    if holds(&(first - Rat::one())) {
        pieces.push(Interval {
            lo: Bound::NegInf,
            hi: Bound::At(first.clone()),
        });
    }
    for (i, p) in points.iter().enumerate() {
        if holds(p) {
            pieces.push(Interval::point(p.clone()));
        }
        match points.get(i + 1) {
            Some(next) => {
                let mid = (p + next) / &two;
                if holds(&mid) {
                    pieces.push(Interval {
                        lo: Bound::At(p.clone()),
                        hi: Bound::At(next.clone()),
                    });
                }
            }
            None => {
                if holds(&(p + Rat::one())) {
                    pieces.push(Interval {
                        lo: Bound::At(p.clone()),
                        hi: Bound::PosInf,
                    });
                }
            }
        }
    }
    // An open gap whose sample holds makes both endpoints hold by continuity,
    // so the closed pieces above are exact.
    Ok(SolutionSet::from_intervals(pieces))
}

/// Like [`solve_one_unknown`], but an equation with an all-inert side is
/// solved as `−∞ = max(other side)`, which has no real solution when the other
/// side carries any live term.
pub fn solve_one_unknown_total(lhs: &[LinTerm], rhs: &[LinTerm]) -> Result<SolutionSet> {
    match solve_one_unknown(lhs, rhs) {
        Err(Error::DegenerateEquation) => {
            let live = |side: &[LinTerm]| side.iter().any(|t| !t.is_inert());
            if live(lhs) || live(rhs) {
                Ok(SolutionSet::empty())
            } else {
                Ok(SolutionSet::everything())
            }
        }
        other => other,
    }
}

impl Sub<&Rat> for &ExtAmp {
    type Output = ExtAmp;
    fn sub(self, rhs: &Rat) -> ExtAmp {
        match self {
            ExtAmp::Fin(a) => ExtAmp::Fin(a - rhs),
            ExtAmp::NegInf => ExtAmp::NegInf,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fin(n: i64) -> ExtAmp {
        ExtAmp::int(n)
    }

    #[test]
    fn parity_indicator_values() {
        assert_eq!(parity_indicator(Sign::Plus), fin(0));
        assert_eq!(parity_indicator(Sign::Minus), ExtAmp::NegInf);
    }

    #[test]
    fn parity_product_rule() {
        for a in [Sign::Plus, Sign::Minus] {
            for b in [Sign::Plus, Sign::Minus] {
                let lhs = parity_indicator(a * b);
                let rhs = std::cmp::max(
                    parity_indicator(a) + parity_indicator(b),
                    parity_indicator(-a) + parity_indicator(-b),
                );
                assert_eq!(lhs, rhs);
                // s(y)+s(-y)=1 and s(y)s(-y)=0
                assert_eq!(std::cmp::max(parity_indicator(a), parity_indicator(-a)), fin(0));
                assert_eq!(parity_indicator(a) + parity_indicator(-a), ExtAmp::NegInf);
            }
        }
    }

    #[test]
    fn tmax_cases() {
        assert_eq!(tmax(&[fin(3), fin(5), ExtAmp::NegInf]).unwrap(), fin(5));
        assert_eq!(tmax(&[ExtAmp::NegInf, ExtAmp::NegInf]).unwrap(), ExtAmp::NegInf);
        assert!(matches!(tmax(&[]), Err(Error::EmptyMax)));
    }

    #[test]
    fn bottom_absorbs() {
        assert_eq!(ExtAmp::NegInf + fin(4), ExtAmp::NegInf);
        assert_eq!(ExtAmp::NegInf.max(fin(-9)), fin(-9));
    }

    #[test]
    fn exchange_examples() {
        let x = [fin(5), fin(2), fin(5), fin(1)];
        let w = [fin(0), fin(7), fin(7), fin(3)];
        assert!(exchange_identity_check(&x, &w));
        let z = [fin(0), fin(0), fin(0), fin(0)];
        assert!(exchange_identity_check(&z, &z));
        // premise fails
        let x = [fin(5), fin(2), fin(4), fin(1)];
        assert!(!exchange_identity_check(&x, &w));
    }

    #[test]
    fn solve_identical_sides() {
        let side = [LinTerm::new(1, rat(0)), LinTerm::constant(rat(0))];
        assert_eq!(solve_one_unknown(&side, &side).unwrap(), SolutionSet::everything());
    }

    #[test]
    fn solve_point_and_ray() {
        // max(5, x) = max(x+2, 3)
        let s = solve_one_unknown(
            &[LinTerm::constant(rat(5)), LinTerm::new(1, rat(0))],
            &[LinTerm::new(1, rat(2)), LinTerm::constant(rat(3))],
        )
        .unwrap();
        assert_eq!(s.as_point(), Some(&rat(3)));

        // max(0, x) = max(x, -1)
        let s = solve_one_unknown(
            &[LinTerm::constant(rat(0)), LinTerm::new(1, rat(0))],
            &[LinTerm::new(1, rat(0)), LinTerm::constant(rat(-1))],
        )
        .unwrap();
        assert_eq!(
            s.intervals(),
            &[Interval {
                lo: Bound::At(rat(0)),
                hi: Bound::PosInf
            }]
        );
    }

    #[test]
    fn solve_rejects_inert_side() {
        let r = solve_one_unknown(&[LinTerm::new(1, ExtAmp::NegInf)], &[LinTerm::constant(rat(1))]);
        assert!(matches!(r, Err(Error::DegenerateEquation)));
        let r = solve_one_unknown_total(&[LinTerm::new(1, ExtAmp::NegInf)], &[LinTerm::constant(rat(1))]).unwrap();
        assert!(r.is_empty());
    }

    #[test]
    fn canonical_merges_touching() {
        let s = SolutionSet::from_intervals(vec![
            Interval {
                lo: Bound::At(rat(2)),
                hi: Bound::At(rat(4)),
            },
            Interval::point(rat(4)),
            Interval {
                lo: Bound::At(rat(0)),
                hi: Bound::At(rat(2)),
            },
        ]);
        assert_eq!(s.intervals().len(), 1);
        assert_eq!(s.to_string(), "[0, 4]");
    }

    #[test]
    fn parse_rationals() {
        assert_eq!(parse_rat("7").unwrap(), rat(7));
        assert_eq!(parse_rat("-3/6").unwrap(), ratio(-1, 2));
        assert_eq!(parse_rat("0.25").unwrap(), ratio(1, 4));
        assert_eq!(parse_rat("-1.5").unwrap(), ratio(-3, 2));
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("x").is_err());
        assert_eq!(fmt_rat(&ratio(6, -4)), "-3/2");
    }
}
