//! Initial-value evolution with branch enumeration.
//!
//! In the all-minus parity sector every step is an explicit formula. When
//! `y_m = +1` (resp. `z_{m+1} = +1`) the next value follows from comparing
//! `U = max(2X, L3+L4)` with `U' = max(L3, L4) + X` and
//! `V = max(H1+H2, 2X)` with `V' = max(H1, H2) + X`. Away from ties exactly
//! one of four formulas applies; at a tie all four are tried and the ones
//! satisfying the equation are kept, which is where uniqueness breaks down.
//!
//! Both equations are symmetric in the pair being advanced, so stepping
//! backwards from `m` is the forward formula read at `m − 1`.

use crate::error::{Error, Result};
use crate::params::{Params, ParityPair, StatePair};
use crate::table::SolutionTable;
use crate::tropical::{max_of, Rat, Sign};
use crate::udp6::{require_constraint, residual_yy, residual_zz};

fn mq(p: &Params, m: i64) -> Rat {
    Rat::from_integer(m.into()) * &p.q
}

/// `Z_{m+1}` in the all-minus sector.
pub fn step_z_noparity(p: &Params, m: i64, y: &Rat, z: &Rat) -> Rat {
    let mq = mq(p, m);
    let [a1, a2, a3, a4] = &p.a;
    let [_, _, b3, b4] = &p.b;
    b3 + b4 + max_of(&[&(&mq + a1), y]) + max_of(&[&(&mq + a2), y]) - z - max_of(&[a3, y]) - max_of(&[a4, y])
}

/// `Y_{m+1}` in the all-minus sector.
pub fn step_y_noparity(p: &Params, m: i64, y: &Rat, z_next: &Rat) -> Rat {
    let mq = mq(p, m);
    let [_, _, a3, a4] = &p.a;
    let [b1, b2, b3, b4] = &p.b;
    a3 + a4 + max_of(&[&(&mq + b1), z_next]) + max_of(&[&(&mq + b2), z_next])
        - y
        - max_of(&[b3, z_next])
        - max_of(&[b4, z_next])
}

/// `Y_{m−1}` from `(Y_m, Z_m)`.
pub fn step_back_y_noparity(p: &Params, m: i64, y: &Rat, z: &Rat) -> Rat {
    step_y_noparity(p, m - 1, y, z)
}

/// `Z_{m−1}` from `(Y_{m−1}, Z_m)`.
pub fn step_back_z_noparity(p: &Params, m: i64, y_prev: &Rat, z: &Rat) -> Rat {
    step_z_noparity(p, m - 1, y_prev, z)
}

/// Candidate formulas for the partner of `w` given the split variable `x`.
fn candidate_values(px: Sign, x: &Rat, w: &ParityPair, lo: [&Rat; 2], hi: [&Rat; 2], k: &Rat) -> Vec<ParityPair> {
    if px == Sign::Minus {
        let v = k + max_of(&[hi[0], x]) + max_of(&[hi[1], x]) - &w.amp - max_of(&[lo[0], x]) - max_of(&[lo[1], x]);
        return vec![ParityPair::new(w.sign, v)];
    }
    let two_x = x + x;
    let u = max_of(&[&two_x, &(lo[0] + lo[1])]);
    let u_p = max_of(&[lo[0], lo[1]]) + x;
    let v = max_of(&[&(hi[0] + hi[1]), &two_x]);
    let v_p = max_of(&[hi[0], hi[1]]) + x;
    let base = k - &w.amp;
    let all = [
        (u >= u_p && v >= v_p, w.sign, &v - &u),
        (u < u_p && v < v_p, w.sign, &v_p - &u_p),
        (u >= u_p && v < v_p, -w.sign, &v_p - &u),
        (u < u_p && v >= v_p, -w.sign, &v - &u_p),
    ];
    let tie = u == u_p || v == v_p;
    all.into_iter()
        .filter(|(applies, _, _)| tie || *applies)
        .map(|(_, s, d)| ParityPair::new(s, d + &base))
        .collect()
}

fn finish(mut c: Vec<ParityPair>, keep: impl Fn(&ParityPair) -> Result<bool>, m: i64) -> Result<Vec<ParityPair>> {
    let mut out = Vec::with_capacity(c.len());
    for cand in c.drain(..) {
        if keep(&cand)? {
            out.push(cand);
        }
    }
    out.sort_by(|a, b| a.sign.cmp(&b.sign).then_with(|| a.amp.cmp(&b.amp)));
    out.dedup();
    if out.is_empty() {
        return Err(Error::NoContinuation(m));
    }
    Ok(out)
}

/// Candidates for `z_{m+1}` given `y_m`, `z_m`; each satisfies the first
/// equation at `m`. Sorted with +1 first, then by amplitude.
pub fn step_z_parity(p: &Params, m: i64, y: &ParityPair, z: &ParityPair) -> Result<Vec<ParityPair>> {
    require_constraint(p)?;
    let mq = mq(p, m);
    let [a1, a2, a3, a4] = &p.a;
    let [_, _, b3, b4] = &p.b;
    let c = candidate_values(y.sign, &y.amp, z, [a3, a4], [&(&mq + a1), &(&mq + a2)], &(b3 + b4));
    finish(c, |zn| residual_zz(p, m, y, z, zn), m)
}

/// Candidates for `y_{m+1}` given `y_m`, `z_{m+1}`; each satisfies the second
/// equation at `m`.
pub fn step_y_parity(p: &Params, m: i64, y: &ParityPair, z_next: &ParityPair) -> Result<Vec<ParityPair>> {
    require_constraint(p)?;
    let mq = mq(p, m);
    let [_, _, a3, a4] = &p.a;
    let [b1, b2, b3, b4] = &p.b;
    let c = candidate_values(
        z_next.sign,
        &z_next.amp,
        y,
        [b3, b4],
        [&(&mq + b1), &(&mq + b2)],
        &(a3 + a4),
    );
    finish(c, |yn| residual_yy(p, m, y, yn, z_next), m)
}

/// Candidates for `y_{m−1}` given `y_m`, `z_m`.
pub fn step_back_y_parity(p: &Params, m: i64, y: &ParityPair, z: &ParityPair) -> Result<Vec<ParityPair>> {
    let c = step_y_parity(p, m - 1, y, z)?;
    // The second equation at m−1 is symmetric in (y_{m−1}, y_m); re-check in
    // the forward orientation.
    finish(c, |yp| residual_yy(p, m - 1, yp, y, z), m - 1)
}

/// Candidates for `z_{m−1}` given `y_{m−1}`, `z_m`.
pub fn step_back_z_parity(p: &Params, m: i64, y_prev: &ParityPair, z: &ParityPair) -> Result<Vec<ParityPair>> {
    let c = step_z_parity(p, m - 1, y_prev, z)?;
    finish(c, |zp| residual_zz(p, m - 1, y_prev, zp, z), m - 1)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvolutionConfig {
    pub m_min: i64,
    pub m_max: i64,
    pub max_branches: usize,
}

impl EvolutionConfig {
    pub const DEFAULT_MAX_BRANCHES: usize = 64;

    pub fn window(m_min: i64, m_max: i64) -> Self {
        EvolutionConfig {
            m_min,
            m_max,
            max_branches: Self::DEFAULT_MAX_BRANCHES,
        }
    }

    pub fn with_max_branches(mut self, n: usize) -> Self {
        self.max_branches = n;
        self
    }
}

/// All solutions of the initial-value problem over the window, as complete
/// tables. `truncated` is set when the branch cap cut enumeration short.
#[derive(Clone, Debug)]
pub struct BranchTree {
    pub root: StatePair,
    pub branches: Vec<SolutionTable>,
    pub truncated: bool,
}

fn cap<T>(v: &mut Vec<T>, n: usize, flag: &mut bool) {
    if v.len() > n {
        v.truncate(n);
        *flag = true;
    }
}

pub fn evolve(p: &Params, initial: &StatePair, cfg: &EvolutionConfig) -> Result<BranchTree> {
    require_constraint(p)?;
    if cfg.max_branches == 0 {
        return Err(Error::Config("max_branches must be at least 1".into()));
    }
    if !(cfg.m_min <= initial.m && initial.m <= cfg.m_max) {
        return Err(Error::Window(format!(
            "need m_min <= m0 <= m_max, got {} <= {} <= {}",
            cfg.m_min, initial.m, cfg.m_max
        )));
    }
    let mut truncated = false;

    let mut forward: Vec<Vec<StatePair>> = vec![vec![initial.clone()]];
    for m in initial.m..cfg.m_max {
        let mut next = Vec::new();
        for path in &forward {
            let cur = path.last().expect("non-empty path");
            for zn in step_z_parity(p, m, &cur.y, &cur.z)? {
                for yn in step_y_parity(p, m, &cur.y, &zn)? {
                    let mut np = path.clone();
                    np.push(StatePair::new(m + 1, yn, zn.clone()));
                    next.push(np);
                }
            }
        }
        cap(&mut next, cfg.max_branches, &mut truncated);
        forward = next;
    }

    let mut backward: Vec<Vec<StatePair>> = vec![vec![initial.clone()]];
    for m in ((cfg.m_min + 1)..=initial.m).rev() {
        let mut next = Vec::new();
        for path in &backward {
            let cur = path.last().expect("non-empty path");
            for yp in step_back_y_parity(p, m, &cur.y, &cur.z)? {
                for zp in step_back_z_parity(p, m, &yp, &cur.z)? {
                    let mut np = path.clone();
                    np.push(StatePair::new(m - 1, yp.clone(), zp));
                    next.push(np);
                }
            }
        }
        cap(&mut next, cfg.max_branches, &mut truncated);
        backward = next;
    }

    let mut branches = Vec::new();
    'outer: for b in &backward {
        for f in &forward {
            if branches.len() == cfg.max_branches {
                truncated = true;
                break 'outer;
            }
            let rows: Vec<StatePair> = b.iter().skip(1).rev().chain(f.iter()).cloned().collect();
            branches.push(SolutionTable::new(rows)?);
        }
    }
    Ok(BranchTree {
        root: initial.clone(),
        branches,
        truncated,
    })
}
