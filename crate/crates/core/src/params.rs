//! System parameters and state values, plus their JSON form.
//!
//! Params files are flat JSON objects with keys `q`, `a1`..`a4`, `b1`..`b4`
//! and optional parameter signs `sa1`..`sa4`, `sb1`..`sb4` (±1). Rationals
//! are written as JSON integers or `"p/q"` strings.

use std::fmt;

use rand::Rng;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::tropical::{fmt_rat, parse_rat, Rat, Sign};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Params {
    pub q: Rat,
    pub a: [Rat; 4],
    pub b: [Rat; 4],
    pub sa: [Sign; 4],
    pub sb: [Sign; 4],
}

impl Params {
    pub fn new(q: Rat, a: [Rat; 4], b: [Rat; 4]) -> Self {
        Params {
            q,
            a,
            b,
            sa: [Sign::Plus; 4],
            sb: [Sign::Plus; 4],
        }
    }

    /// Integer convenience constructor.
    pub fn from_ints(q: i64, a: [i64; 4], b: [i64; 4]) -> Self {
        let r = |v: i64| Rat::from_integer(v.into());
        Params::new(r(q), a.map(r), b.map(r))
    }

    pub fn with_signs(mut self, sa: [Sign; 4], sb: [Sign; 4]) -> Self {
        self.sa = sa;
        self.sb = sb;
        self
    }

    pub fn has_signs(&self) -> bool {
        self.sa.iter().chain(&self.sb).any(|s| *s == Sign::Minus)
    }

    /// `(B1+B2+A3+A4, Q+A1+A2+B3+B4)`.
    pub fn constraint_sides(&self) -> (Rat, Rat) {
        let [a1, a2, a3, a4] = &self.a;
        let [b1, b2, b3, b4] = &self.b;
        (b1 + b2 + a3 + a4, &self.q + a1 + a2 + b3 + b4)
    }

    pub fn sign_constraint_holds(&self) -> bool {
        let prod = |s: &[Sign; 4]| s.iter().fold(Sign::Plus, |acc, x| acc * *x);
        prod(&self.sa) == prod(&self.sb)
    }

    /// Adds `c` to every amplitude parameter; `Q` is unchanged.
    pub fn shifted(&self, c: &Rat) -> Self {
        Params {
            q: self.q.clone(),
            a: self.a.clone().map(|v| v + c),
            b: self.b.clone().map(|v| v + c),
            ..self.clone()
        }
    }

    /// Multiplies `Q` and every amplitude parameter by `lambda`.
    pub fn scaled(&self, lambda: &Rat) -> Self {
        Params {
            q: &self.q * lambda,
            a: self.a.clone().map(|v| v * lambda),
            b: self.b.clone().map(|v| v * lambda),
            ..self.clone()
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("params serialize")
    }

    /// Random integer parameters with `1 <= Q <= span` and the rest in
    /// `[−span, span]`, with `B2` solved from the constraint.
    pub fn random_integer<R: Rng + ?Sized>(rng: &mut R, span: i64) -> Self {
        let q = rng.gen_range(1..=span);
        let mut v = || rng.gen_range(-span..=span);
        let a = [v(), v(), v(), v()];
        let mut b = [v(), 0, v(), v()];
        b[1] = q + a[0] + a[1] + b[2] + b[3] - b[0] - a[2] - a[3];
        Params::from_ints(q, a, b)
    }

    /// Like [`random_integer`](Self::random_integer) but with `B1` and `B2`
    /// solved from the Riccati conditions, which imply the constraint.
    pub fn random_riccati<R: Rng + ?Sized>(rng: &mut R, span: i64) -> Self {
        let q = rng.gen_range(1..=span);
        let mut v = || rng.gen_range(-span..=span);
        let a = [v(), v(), v(), v()];
        let mut b = [0, 0, v(), v()];
        b[0] = q + a[0] + b[2] - a[2];
        b[1] = a[1] + b[3] - a[3];
        Params::from_ints(q, a, b)
    }
}

fn rat_to_json(r: &Rat) -> Value {
    if r.is_integer() {
        if let Ok(v) = i64::try_from(r.numer()) {
            return Value::from(v);
        }
    }
    Value::from(fmt_rat(r))
}

fn rat_from_json(v: &Value) -> Result<Rat> {
    match v {
        Value::Number(n) => match n.as_i64() {
            Some(i) => Ok(Rat::from_integer(i.into())),
            None => parse_rat(&n.to_string()),
        },
        Value::String(s) => parse_rat(s),
        other => Err(Error::Parse(format!("expected rational, got {other}"))),
    }
}

const AMP_KEYS: [&str; 9] = ["q", "a1", "a2", "a3", "a4", "b1", "b2", "b3", "b4"];
const SIGN_KEYS: [&str; 8] = ["sa1", "sa2", "sa3", "sa4", "sb1", "sb2", "sb3", "sb4"];

impl Serialize for Params {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = Map::new();
        map.insert("q".into(), rat_to_json(&self.q));
        for i in 0..4 {
            map.insert(format!("a{}", i + 1), rat_to_json(&self.a[i]));
        }
        for i in 0..4 {
            map.insert(format!("b{}", i + 1), rat_to_json(&self.b[i]));
        }
        if self.has_signs() {
            for i in 0..4 {
                map.insert(format!("sa{}", i + 1), self.sa[i].as_i8().into());
            }
            for i in 0..4 {
                map.insert(format!("sb{}", i + 1), self.sb[i].as_i8().into());
            }
        }
        Value::Object(map).serialize(ser)
    }
}

impl<'de> Deserialize<'de> for Params {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let map = Map::<String, Value>::deserialize(de)?;
        for k in map.keys() {
            if !AMP_KEYS.contains(&k.as_str()) && !SIGN_KEYS.contains(&k.as_str()) {
                return Err(D::Error::custom(format!("unknown key {k:?}")));
            }
        }
        let amp = |k: &str| -> std::result::Result<Rat, D::Error> {
            let v = map
                .get(k)
                .ok_or_else(|| D::Error::custom(format!("missing key {k:?}")))?;
            rat_from_json(v).map_err(|e| D::Error::custom(format!("{k}: {e}")))
        };
        let sign = |k: &str| -> std::result::Result<Sign, D::Error> {
            match map.get(k) {
                None => Ok(Sign::Plus),
                Some(v) => v
                    .as_i64()
                    .ok_or_else(|| D::Error::custom(format!("{k}: sign must be an integer")))
                    .and_then(|i| Sign::from_i64(i).map_err(|e| D::Error::custom(e.to_string()))),
            }
        };
        Ok(Params {
            q: amp("q")?,
            a: [amp("a1")?, amp("a2")?, amp("a3")?, amp("a4")?],
            b: [amp("b1")?, amp("b2")?, amp("b3")?, amp("b4")?],
            sa: [sign("sa1")?, sign("sa2")?, sign("sa3")?, sign("sa4")?],
            sb: [sign("sb1")?, sign("sb2")?, sign("sb3")?, sign("sb4")?],
        })
    }
}

/// One dynamical variable: parity and finite amplitude.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ParityPair {
    pub sign: Sign,
    pub amp: Rat,
}

impl ParityPair {
    pub fn new(sign: Sign, amp: Rat) -> Self {
        ParityPair { sign, amp }
    }

    pub fn minus(amp: Rat) -> Self {
        Self::new(Sign::Minus, amp)
    }

    pub fn plus(amp: Rat) -> Self {
        Self::new(Sign::Plus, amp)
    }

    pub fn ints(sign: i64, amp: i64) -> Self {
        Self::new(
            Sign::from_i64(sign).expect("sign must be +1 or -1"),
            Rat::from_integer(amp.into()),
        )
    }

    /// Parses `"-1:43"` or `"+1:7/2"`.
    pub fn parse(s: &str) -> Result<Self> {
        let (sg, amp) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("expected SIGN:AMP, got {s:?}")))?;
        let sg: i64 = sg
            .trim()
            .trim_start_matches('+')
            .parse()
            .map_err(|_| Error::Parse(format!("bad sign in {s:?}")))?;
        Ok(ParityPair::new(Sign::from_i64(sg)?, parse_rat(amp)?))
    }

    pub fn shifted(&self, c: &Rat) -> Self {
        ParityPair::new(self.sign, &self.amp + c)
    }

    pub fn scaled(&self, lambda: &Rat) -> Self {
        ParityPair::new(self.sign, &self.amp * lambda)
    }
}

impl fmt::Display for ParityPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.sign, fmt_rat(&self.amp))
    }
}

/// Values of both variables at one index.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StatePair {
    pub m: i64,
    pub y: ParityPair,
    pub z: ParityPair,
}

impl StatePair {
    pub fn new(m: i64, y: ParityPair, z: ParityPair) -> Self {
        StatePair { m, y, z }
    }
}
