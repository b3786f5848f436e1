//! Exact residuals of the ultradiscrete Painlevé VI system with parity
//! variables.
//!
//! Two independent evaluations exist for each of the two equations: the
//! fixed-parity case reductions ([`residual_zz`], [`residual_yy`]) and the
//! eight-line form that also carries parameter signs ([`residual_zz_signed`],
//! [`residual_yy_signed`]). With all parameter signs +1 they must agree.

use crate::error::{Error, Result};
use crate::params::{Params, ParityPair};
use crate::tropical::{max_of, ExtAmp, Rat, Sign};

/// Both sides of one max-plus equation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sides {
    pub lhs: ExtAmp,
    pub rhs: ExtAmp,
}

impl Sides {
    pub fn holds(&self) -> bool {
        self.lhs == self.rhs
    }

    /// `lhs − rhs` when both sides are finite.
    pub fn gap(&self) -> Option<Rat> {
        match (&self.lhs, &self.rhs) {
            (ExtAmp::Fin(a), ExtAmp::Fin(b)) => Some(a - b),
            _ => None,
        }
    }
}

/// Amplitude constraint, plus the sign constraint when parameter signs are
/// present.
pub fn check_constraint(p: &Params) -> bool {
    let (l, r) = p.constraint_sides();
    l == r && p.sign_constraint_holds()
}

pub(crate) fn require_constraint(p: &Params) -> Result<()> {
    let (l, r) = p.constraint_sides();
    if l != r {
        return Err(Error::Constraint {
            lhs: l.to_string(),
            rhs: r.to_string(),
        });
    }
    if !p.sign_constraint_holds() {
        return Err(Error::SignConstraint);
    }
    Ok(())
}

fn mq(p: &Params, m: i64) -> Rat {
    Rat::from_integer(m.into()) * &p.q
}

/// Shared shape of both equations once the parities are fixed.
///
/// `x` is the variable the parity split is taken on (`Y_m` or `Z_{m+1}`),
/// `px` its parity, `s` the parity product of the summed pair, `sum` the sum
/// of that pair, `lo` the pole parameters, `hi` the time-dependent zeros and
/// `k` the constant factor.
fn reduced_sides(px: Sign, s: Sign, x: &Rat, sum: &Rat, lo: [&Rat; 2], hi: [&Rat; 2], k: &Rat) -> Sides {
    let two_x = x * Rat::from_integer(2.into());
    let u = max_of(&[&two_x, &(lo[0] + lo[1])]);
    let u_p = max_of(&[lo[0], lo[1]]) + x;
    let v = max_of(&[&(hi[0] + hi[1]), &two_x]);
    let v_p = max_of(&[hi[0], hi[1]]) + x;
    let (lhs, rhs) = match (px, s) {
        (Sign::Plus, Sign::Plus) => (max_of(&[&(&u + sum), &(&v_p + k)]), max_of(&[&(&v + k), &(&u_p + sum)])),
        (Sign::Plus, Sign::Minus) => (max_of(&[&(&u_p + sum), &(&v_p + k)]), max_of(&[&(&v + k), &(&u + sum)])),
        (Sign::Minus, Sign::Plus) => (
            sum + max_of(&[lo[0], x]) + max_of(&[lo[1], x]),
            k + max_of(&[hi[0], x]) + max_of(&[hi[1], x]),
        ),
        (Sign::Minus, Sign::Minus) => {
            let rhs = max_of(&[&(&u + sum), &(&v_p + k), &(&v + k), &(&u_p + sum)]);
            return Sides {
                lhs: ExtAmp::NegInf,
                rhs: rhs.into(),
            };
        }
    };
    Sides {
        lhs: lhs.into(),
        rhs: rhs.into(),
    }
}

/// Sides of the first equation (relating `z_m`, `z_{m+1}` through `y_m`).
pub fn sides_zz(p: &Params, m: i64, y: &ParityPair, z: &ParityPair, z_next: &ParityPair) -> Result<Sides> {
    require_constraint(p)?;
    let mq = mq(p, m);
    let [a1, a2, a3, a4] = &p.a;
    let [_, _, b3, b4] = &p.b;
    Ok(reduced_sides(
        y.sign,
        z.sign * z_next.sign,
        &y.amp,
        &(&z.amp + &z_next.amp),
        [a3, a4],
        [&(&mq + a1), &(&mq + a2)],
        &(b3 + b4),
    ))
}

/// Sides of the second equation (relating `y_m`, `y_{m+1}` through `z_{m+1}`).
pub fn sides_yy(p: &Params, m: i64, y: &ParityPair, y_next: &ParityPair, z_next: &ParityPair) -> Result<Sides> {
    require_constraint(p)?;
    let mq = mq(p, m);
    let [_, _, a3, a4] = &p.a;
    let [b1, b2, b3, b4] = &p.b;
    Ok(reduced_sides(
        z_next.sign,
        y.sign * y_next.sign,
        &z_next.amp,
        &(&y.amp + &y_next.amp),
        [b3, b4],
        [&(&mq + b1), &(&mq + b2)],
        &(a3 + a4),
    ))
}

pub fn residual_zz(p: &Params, m: i64, y: &ParityPair, z: &ParityPair, z_next: &ParityPair) -> Result<bool> {
    Ok(sides_zz(p, m, y, z, z_next)?.holds())
}

pub fn residual_yy(p: &Params, m: i64, y: &ParityPair, y_next: &ParityPair, z_next: &ParityPair) -> Result<bool> {
    Ok(sides_yy(p, m, y, y_next, z_next)?.holds())
}

/// Each line contributes `value` to the left side when its parity is +1 and
/// to the right side otherwise.
fn split_lines(lines: Vec<(Rat, Sign)>) -> Sides {
    let mut lhs = ExtAmp::NegInf;
    let mut rhs = ExtAmp::NegInf;
    for (v, s) in lines {
        let side = if s == Sign::Plus { &mut lhs } else { &mut rhs };
        if ExtAmp::Fin(v.clone()) > *side {
            *side = ExtAmp::Fin(v);
        }
    }
    Sides { lhs, rhs }
}

/// Eight-line form of the first equation with parameter signs.
pub fn sides_zz_signed(p: &Params, m: i64, y: &ParityPair, z: &ParityPair, z_next: &ParityPair) -> Result<Sides> {
    require_constraint(p)?;
    let mq = mq(p, m);
    let two_mq = &mq + &mq;
    let [a1, a2, a3, a4] = &p.a;
    let [_, _, b3, b4] = &p.b;
    let [sa1, sa2, sa3, sa4] = p.sa;
    let [_, _, sb3, sb4] = p.sb;
    let yv = &y.amp;
    let zz = &z.amp + &z_next.amp;
    let b34 = b3 + b4;
    let sy = y.sign;
    let s = z.sign * z_next.sign;
    Ok(split_lines(vec![
        (&two_mq + a1 + a2 + &b34, -(sa1 * sa2 * sb3 * sb4)),
        (yv + yv + &b34, -(sb3 * sb4)),
        (yv + &mq + a1 + &b34, sa1 * sb3 * sb4 * sy),
        (yv + &mq + a2 + &b34, sa2 * sb3 * sb4 * sy),
        (yv + yv + &zz, s),
        (&zz + a3 + a4, sa3 * sa4 * s),
        (yv + &zz + a3, -(sa3 * sy * s)),
        (yv + &zz + a4, -(sa4 * sy * s)),
    ]))
}

/// Eight-line form of the second equation with parameter signs.
pub fn sides_yy_signed(p: &Params, m: i64, y: &ParityPair, y_next: &ParityPair, z_next: &ParityPair) -> Result<Sides> {
    require_constraint(p)?;
    let mq = mq(p, m);
    let two_mq = &mq + &mq;
    let [_, _, a3, a4] = &p.a;
    let [b1, b2, b3, b4] = &p.b;
    let [_, _, sa3, sa4] = p.sa;
    let [sb1, sb2, sb3, sb4] = p.sb;
    let zv = &z_next.amp;
    let yy = &y.amp + &y_next.amp;
    let a34 = a3 + a4;
    let sz = z_next.sign;
    let s = y.sign * y_next.sign;
    Ok(split_lines(vec![
        (&two_mq + &a34 + b1 + b2, -(sa3 * sa4 * sb1 * sb2)),
        (zv + zv + &a34, -(sa3 * sa4)),
        (zv + &mq + &a34 + b1, sa3 * sa4 * sb1 * sz),
        (zv + &mq + &a34 + b2, sa3 * sa4 * sb2 * sz),
        (zv + zv + &yy, s),
        (&yy + b3 + b4, sb3 * sb4 * s),
        (&yy + zv + b3, -(sb3 * s * sz)),
        (&yy + zv + b4, -(sb4 * s * sz)),
    ]))
}

pub fn residual_zz_signed(p: &Params, m: i64, y: &ParityPair, z: &ParityPair, z_next: &ParityPair) -> Result<bool> {
    Ok(sides_zz_signed(p, m, y, z, z_next)?.holds())
}

pub fn residual_yy_signed(
    p: &Params,
    m: i64,
    y: &ParityPair,
    y_next: &ParityPair,
    z_next: &ParityPair,
) -> Result<bool> {
    Ok(sides_yy_signed(p, m, y, y_next, z_next)?.holds())
}
