//! Solution tables: `m ↦ (y_m, z_m)` over a contiguous window, with CSV and
//! JSON I/O and residual verification.

use std::io::{Read, Write};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{Params, ParityPair, StatePair};
use crate::tropical::{fmt_rat, parse_rat, Rat, Sign};
use crate::udp6::{residual_yy, residual_zz};

pub const CSV_HEADER: [&str; 5] = ["m", "sy", "Y", "sz", "Z"];

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SolutionTable {
    rows: Vec<StatePair>,
}

impl SolutionTable {
    /// Rows must be non-empty with consecutive increasing indices.
    pub fn new(rows: Vec<StatePair>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Window("empty table".into()));
        }
        for w in rows.windows(2) {
            if w[1].m != w[0].m + 1 {
                return Err(Error::Window(format!(
                    "indices not contiguous: {} then {}",
                    w[0].m, w[1].m
                )));
            }
        }
        Ok(SolutionTable { rows })
    }

    pub fn rows(&self) -> &[StatePair] {
        &self.rows
    }

    pub fn m_min(&self) -> i64 {
        self.rows[0].m
    }

    pub fn m_max(&self) -> i64 {
        self.rows[self.rows.len() - 1].m
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn get(&self, m: i64) -> Option<&StatePair> {
        let i = m.checked_sub(self.m_min())?;
        usize::try_from(i).ok().and_then(|i| self.rows.get(i))
    }

    pub fn y(&self, m: i64) -> Option<&ParityPair> {
        self.get(m).map(|s| &s.y)
    }

    pub fn z(&self, m: i64) -> Option<&ParityPair> {
        self.get(m).map(|s| &s.z)
    }

    pub fn map_amps(&self, f: impl Fn(&Rat) -> Rat) -> Self {
        SolutionTable {
            rows: self
                .rows
                .iter()
                .map(|s| {
                    StatePair::new(
                        s.m,
                        ParityPair::new(s.y.sign, f(&s.y.amp)),
                        ParityPair::new(s.z.sign, f(&s.z.amp)),
                    )
                })
                .collect(),
        }
    }

    pub fn shifted(&self, c: &Rat) -> Self {
        self.map_amps(|a| a + c)
    }

    pub fn scaled(&self, lambda: &Rat) -> Self {
        self.map_amps(|a| a * lambda)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(w);
        wr.write_record(CSV_HEADER)?;
        for s in &self.rows {
            wr.write_record([
                s.m.to_string(),
                s.y.sign.to_string(),
                fmt_rat(&s.y.amp),
                s.z.sign.to_string(),
                fmt_rat(&s.z.amp),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("write to Vec");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    /// Reads the CSV written by [`write_csv`](Self::write_csv). Lines
    /// starting with `#` are ignored.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(r);
        let header = rd.headers()?.clone();
        if header.iter().collect::<Vec<_>>() != CSV_HEADER {
            return Err(Error::Parse(format!(
                "expected header {}, got {}",
                CSV_HEADER.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut rows = Vec::new();
        for rec in rd.records() {
            let rec = rec?;
            let field = |i: usize| rec.get(i).unwrap_or("");
            let m: i64 = field(0)
                .parse()
                .map_err(|_| Error::Parse(format!("bad index {:?}", field(0))))?;
            let sign = |i: usize| -> Result<Sign> {
                let v: i64 = field(i)
                    .trim_start_matches('+')
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad sign {:?}", field(i))))?;
                Sign::from_i64(v)
            };
            rows.push(StatePair::new(
                m,
                ParityPair::new(sign(1)?, parse_rat(field(2))?),
                ParityPair::new(sign(3)?, parse_rat(field(4))?),
            ));
        }
        if rows.is_empty() {
            return Err(Error::Parse("table has no rows".into()));
        }
        Self::new(rows)
    }

    pub fn to_json_value(&self, branch: Option<usize>) -> serde_json::Value {
        #[derive(Serialize)]
        struct Row {
            m: i64,
            sy: i8,
            #[serde(rename = "Y")]
            y: String,
            sz: i8,
            #[serde(rename = "Z")]
            z: String,
        }
        let rows: Vec<Row> = self
            .rows
            .iter()
            .map(|s| Row {
                m: s.m,
                sy: s.y.sign.as_i8(),
                y: fmt_rat(&s.y.amp),
                sz: s.z.sign.as_i8(),
                z: fmt_rat(&s.z.amp),
            })
            .collect();
        match branch {
            Some(b) => serde_json::json!({ "branch": b, "rows": rows }),
            None => serde_json::json!({ "rows": rows }),
        }
    }
}

/// One failed equation in a table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Failure {
    pub m: i64,
    pub equation: &'static str,
}

/// Checks both equations at every index `m` with `m, m+1` in the table.
pub fn verify_table(p: &Params, t: &SolutionTable) -> Result<Vec<Failure>> {
    let mut out = Vec::new();
    for w in t.rows().windows(2) {
        let (cur, next) = (&w[0], &w[1]);
        if !residual_zz(p, cur.m, &cur.y, &cur.z, &next.z)? {
            out.push(Failure {
                m: cur.m,
                equation: "zz",
            });
        }
        if !residual_yy(p, cur.m, &cur.y, &next.y, &next.z)? {
            out.push(Failure {
                m: cur.m,
                equation: "yy",
            });
        }
    }
    Ok(out)
}
