//! Zone decomposition of the (x,t)-plane and the interaction timeline.
//!
//! The two initial discontinuities at `x1`, `x2` each break into a shock and a
//! rarefaction fan. Their fronts interact at six labelled points
//! (`T_int`, `T_3`, `T_6`, `T_9`, `T_10`, `T_fin`); between events the solution
//! is a fixed left-to-right sequence of zones separated by boundary curves.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hodograph::{riemann_green, ImplicitSolution};
use crate::invariants::{validate_params, Family, InvariantPair, MixtureParams};
use crate::isochrone;
use crate::numerics::roots::brent;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ZoneId {
    Z1,
    Z2,
    Z3,
    Z4,
    Z5,
    Z6,
    Z7,
    Z8,
    Z9,
    Z10,
    Z11,
}

impl ZoneId {
    pub const ALL: [ZoneId; 11] = [
        ZoneId::Z1,
        ZoneId::Z2,
        ZoneId::Z3,
        ZoneId::Z4,
        ZoneId::Z5,
        ZoneId::Z6,
        ZoneId::Z7,
        ZoneId::Z8,
        ZoneId::Z9,
        ZoneId::Z10,
        ZoneId::Z11,
    ];
}

impl fmt::Display for ZoneId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// How the invariants are given inside a zone.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ZoneContent {
    Constant(InvariantPair),
    /// `R1` fixed, `R2 = sqrt((x - x1) / (q1 t))`.
    FanTwo {
        r1: f64,
    },
    /// `R2` fixed, `R1 = sqrt((x - x2) / (q2 t))`.
    FanOne {
        r2: f64,
    },
    /// Both invariants vary; obtained by integrating along the isochrone.
    Interaction,
    /// `R2 = mu2`, `R1` transported along 1-characteristics from the `Z5` edge.
    SimpleOne,
    /// `R1 = mu1`, `R2` transported along 2-characteristics from the `Z5` edge.
    SimpleTwo,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CurveKind {
    Shock(Family),
    Weak(Family),
}

/// The boundary curves of the zone picture.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CurveId {
    /// 1-shock from `x1`, `x_s^1`.
    ShockOne,
    /// 2-shock from `x2`, `x_s^2`.
    ShockTwo,
    /// Left front of the 2-fan, `x_l^2`.
    FanTwoLeft,
    /// Right front of the 2-fan, `x_r^2`.
    FanTwoRight,
    /// Left front of the 1-fan, `x_l^1`.
    FanOneLeft,
    /// Right front of the 1-fan, `x_r^1`.
    FanOneRight,
    /// `phi` on `[T_int, T_3]`.
    Phi,
    /// `theta` on `[T_int, T_6]`.
    Theta,
    /// `phi` on `[T_3, T_fin]`, parametric.
    PhiLate,
    /// `theta` on `[T_6, T_fin]`, parametric.
    ThetaLate,
    /// `x_w^1`
    WeakOne,
    /// `x_w^2`
    WeakTwo,
    /// `Phi`, the 1-shock after `T_9`.
    ShockPhi,
    /// `Theta`, the 2-shock after `T_10`.
    ShockTheta,
    /// `x_f^1`
    FinalOne,
    /// `x_f^2`
    FinalTwo,
}

impl CurveId {
    pub const ALL: [CurveId; 16] = [
        CurveId::ShockOne,
        CurveId::ShockTwo,
        CurveId::FanTwoLeft,
        CurveId::FanTwoRight,
        CurveId::FanOneLeft,
        CurveId::FanOneRight,
        CurveId::Phi,
        CurveId::Theta,
        CurveId::PhiLate,
        CurveId::ThetaLate,
        CurveId::WeakOne,
        CurveId::WeakTwo,
        CurveId::ShockPhi,
        CurveId::ShockTheta,
        CurveId::FinalOne,
        CurveId::FinalTwo,
    ];

    pub fn kind(self) -> CurveKind {
        use CurveId::*;
        use Family::*;
        match self {
            ShockOne | ShockPhi => CurveKind::Shock(One),
            ShockTwo | ShockTheta => CurveKind::Shock(Two),
            FanOneLeft | FanOneRight | Phi | ThetaLate | WeakOne | FinalOne => CurveKind::Weak(One),
            FanTwoLeft | FanTwoRight | Theta | PhiLate | WeakTwo | FinalTwo => CurveKind::Weak(Two),
        }
    }

    pub fn name(self) -> &'static str {
        use CurveId::*;
        match self {
            ShockOne => "x_s1",
            ShockTwo => "x_s2",
            FanTwoLeft => "x_l2",
            FanTwoRight => "x_r2",
            FanOneLeft => "x_l1",
            FanOneRight => "x_r1",
            Phi => "phi",
            Theta => "theta",
            PhiLate => "phi_late",
            ThetaLate => "theta_late",
            WeakOne => "x_w1",
            WeakTwo => "x_w2",
            ShockPhi => "Phi",
            ShockTheta => "Theta",
            FinalOne => "x_f1",
            FinalTwo => "x_f2",
        }
    }
}

impl fmt::Display for CurveId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EventLabel {
    TInt,
    T3,
    T6,
    T9,
    T10,
    TFin,
}

impl EventLabel {
    pub const ALL: [EventLabel; 6] = [
        EventLabel::TInt,
        EventLabel::T3,
        EventLabel::T6,
        EventLabel::T9,
        EventLabel::T10,
        EventLabel::TFin,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EventLabel::TInt => "T_int",
            EventLabel::T3 => "T_3",
            EventLabel::T6 => "T_6",
            EventLabel::T9 => "T_9",
            EventLabel::T10 => "T_10",
            EventLabel::TFin => "T_fin",
        }
    }
}

impl fmt::Display for EventLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Times and positions of the six interaction points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventTimes {
    pub t_int: f64,
    pub x_int: f64,
    pub t3: f64,
    pub x3: f64,
    pub t6: f64,
    pub x6: f64,
    pub t9: f64,
    pub x9: f64,
    pub t10: f64,
    pub x10: f64,
    pub t_fin: f64,
    pub x_fin: f64,
}

impl EventTimes {
    pub fn get(&self, label: EventLabel) -> (f64, f64) {
        match label {
            EventLabel::TInt => (self.t_int, self.x_int),
            EventLabel::T3 => (self.t3, self.x3),
            EventLabel::T6 => (self.t6, self.x6),
            EventLabel::T9 => (self.t9, self.x9),
            EventLabel::T10 => (self.t10, self.x10),
            EventLabel::TFin => (self.t_fin, self.x_fin),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub label: EventLabel,
    pub time: f64,
    pub position: f64,
    pub participants: (CurveId, CurveId),
    pub created: Vec<ZoneId>,
    pub destroyed: Vec<ZoneId>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZoneLifetime {
    pub zone: ZoneId,
    pub born: Option<EventLabel>,
    pub died: Option<EventLabel>,
    pub t_birth: f64,
    pub t_death: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timeline {
    pub events: Vec<Event>,
    pub lifetimes: Vec<ZoneLifetime>,
    /// Orderings that differ from the reference scenario without invalidating
    /// the construction, e.g. `T_9 > T_fin`.
    pub notes: Vec<String>,
}

/// One zone at a fixed time: `None` boundaries are at infinity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZoneSpan {
    pub zone: ZoneId,
    pub left: Option<CurveId>,
    pub right: Option<CurveId>,
    pub x_left: f64,
    pub x_right: f64,
}

impl ZoneSpan {
    pub fn width(&self) -> f64 {
        self.x_right - self.x_left
    }
}

/// A validated problem instance together with its implicit solution and
/// event times.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Wavefield {
    params: MixtureParams,
    implicit: ImplicitSolution,
    times: EventTimes,
}

impl Wavefield {
    pub fn new(params: MixtureParams) -> Result<Self> {
        let params = validate_params(params)?;
        let implicit = ImplicitSolution::new(&params);
        let times = closed_form_times(&params, &implicit)?;
        Ok(Self {
            params,
            implicit,
            times,
        })
    }

    pub fn reference() -> Self {
        Self::new(MixtureParams::reference()).expect("reference parameters are valid")
    }

    pub fn params(&self) -> &MixtureParams {
        &self.params
    }

    pub fn implicit(&self) -> &ImplicitSolution {
        &self.implicit
    }

    pub fn times(&self) -> &EventTimes {
        &self.times
    }

    pub fn zone_content(&self, zone: ZoneId) -> ZoneContent {
        let p = &self.params;
        let c = |r1, r2| ZoneContent::Constant(InvariantPair::new(r1, r2));
        match zone {
            ZoneId::Z1 | ZoneId::Z8 | ZoneId::Z11 => c(p.mu1, p.mu2),
            ZoneId::Z2 => c(p.q1, p.mu2),
            ZoneId::Z3 => ZoneContent::FanTwo { r1: p.q1 },
            ZoneId::Z4 => c(p.q1, p.q2),
            ZoneId::Z5 => ZoneContent::Interaction,
            ZoneId::Z6 => ZoneContent::FanOne { r2: p.q2 },
            ZoneId::Z7 => c(p.mu1, p.q2),
            ZoneId::Z9 => ZoneContent::SimpleOne,
            ZoneId::Z10 => ZoneContent::SimpleTwo,
        }
    }

    /// `R2` of the 2-fan centred at `x1`.
    pub fn fan_two(&self, x: f64, t: f64) -> f64 {
        ((x - self.params.x1) / (self.params.q1 * t))
            .max(0.0)
            .sqrt()
    }

    /// `R1` of the 1-fan centred at `x2`.
    pub fn fan_one(&self, x: f64, t: f64) -> f64 {
        ((x - self.params.x2) / (self.params.q2 * t))
            .max(0.0)
            .sqrt()
    }

    /// Validity interval of a curve; the upper end may be infinite.
    pub fn curve_interval(&self, id: CurveId) -> (f64, f64) {
        let e = &self.times;
        let inf = f64::INFINITY;
        use CurveId::*;
        match id {
            ShockOne => (0.0, e.t9),
            ShockTwo => (0.0, e.t10),
            FanTwoLeft => (0.0, e.t3),
            FanTwoRight => (0.0, e.t_int),
            FanOneLeft => (0.0, e.t_int),
            FanOneRight => (0.0, e.t6),
            Phi => (e.t_int, e.t3),
            Theta => (e.t_int, e.t6),
            PhiLate => (e.t3, e.t_fin),
            ThetaLate => (e.t6, e.t_fin),
            WeakOne => (e.t3, e.t9),
            WeakTwo => (e.t6, e.t10),
            ShockPhi => (e.t9, inf),
            ShockTheta => (e.t10, inf),
            FinalOne | FinalTwo => (e.t_fin, inf),
        }
    }

    /// Position of a boundary curve at time `t`, checked against its
    /// validity interval.
    pub fn curve_x(&self, id: CurveId, t: f64) -> Result<f64> {
        let (lo, hi) = self.curve_interval(id);
        let slack = 1e-12 * t.abs().max(1.0);
        if !(t >= lo - slack && t <= hi + slack) {
            return Err(Error::DomainError {
                what: id.name(),
                value: t,
                lo,
                hi,
            });
        }
        self.curve_formula(id, t.clamp(lo, hi))
    }

    /// Curve formulas without the validity check. Straight lines and the
    /// closed-form `phi`, `theta` extend naturally; the parametric curves
    /// extend through the cubic root past the rectangle.
    fn curve_formula(&self, id: CurveId, t: f64) -> Result<f64> {
        let p = &self.params;
        let e = &self.times;
        use CurveId::*;
        Ok(match id {
            ShockOne => p.x1 + p.q1 * p.mu1 * p.mu2 * t,
            ShockTwo => p.x2 + p.mu1 * p.mu2 * p.q2 * t,
            FanTwoLeft => p.x1 + p.q1 * p.mu2 * p.mu2 * t,
            FanTwoRight => p.x1 + p.q1 * p.q2 * p.q2 * t,
            FanOneLeft => p.x2 + p.q1 * p.q1 * p.q2 * t,
            FanOneRight => p.x2 + p.mu1 * p.mu1 * p.q2 * t,
            Phi => self.weak_pre(p.x1, p.q1, t)?,
            Theta => self.weak_pre(p.x2, p.q2, t)?,
            PhiLate => {
                let rho = isochrone::rho_star_within(&self.implicit, Family::One, t, p.q1, p.mu2)?;
                self.implicit.x(InvariantPair::new(rho, p.mu2))?
            }
            ThetaLate => {
                let rho = isochrone::rho_star_within(&self.implicit, Family::Two, t, p.mu1, p.q2)?;
                self.implicit.x(InvariantPair::new(p.mu1, rho))?
            }
            WeakOne => e.x3 + p.q1 * p.q1 * p.mu2 * (t - e.t3),
            WeakTwo => e.x6 + p.mu1 * p.q2 * p.q2 * (t - e.t6),
            ShockPhi => isochrone::shock_state(self, Family::One, t)?.position,
            ShockTheta => isochrone::shock_state(self, Family::Two, t)?.position,
            FinalOne => e.x_fin + p.mu1 * p.mu1 * p.mu2 * (t - e.t_fin),
            FinalTwo => e.x_fin + p.mu1 * p.mu2 * p.mu2 * (t - e.t_fin),
        })
    }

    /// Weak front emanating from `(X_int, T_int)` into a fan centred at `xc`
    /// with plateau value `q`.
    fn weak_pre(&self, xc: f64, q: f64, t: f64) -> Result<f64> {
        let e = &self.times;
        if t < e.t_int {
            return Err(Error::DomainError {
                what: "weak front before T_int",
                value: t,
                lo: e.t_int,
                hi: f64::INFINITY,
            });
        }
        if t == e.t_int {
            return Ok(e.x_int);
        }
        let root = q.powf(1.5) * (t.sqrt() - e.t_int.sqrt()) + (e.x_int - xc).abs().sqrt();
        Ok(xc + root * root)
    }

    /// States on the left and right of a curve at time `t`. Across weak
    /// curves the two coincide.
    pub fn curve_states(&self, id: CurveId, t: f64) -> Result<(InvariantPair, InvariantPair)> {
        let p = &self.params;
        let pair = InvariantPair::new;
        let x = self.curve_x(id, t)?;
        use CurveId::*;
        let same = |r: InvariantPair| Ok((r, r));
        match id {
            ShockOne => Ok((pair(p.mu1, p.mu2), pair(p.q1, p.mu2))),
            ShockTwo => Ok((pair(p.mu1, p.q2), pair(p.mu1, p.mu2))),
            FanTwoLeft | FanTwoRight | Phi => same(pair(p.q1, self.fan_two(x, t))),
            FanOneLeft | FanOneRight | Theta => same(pair(self.fan_one(x, t), p.q2)),
            PhiLate => same(pair(
                isochrone::rho_star(&self.implicit, Family::One, t)?,
                p.mu2,
            )),
            ThetaLate => same(pair(
                p.mu1,
                isochrone::rho_star(&self.implicit, Family::Two, t)?,
            )),
            WeakOne => same(pair(p.q1, p.mu2)),
            WeakTwo => same(pair(p.mu1, p.q2)),
            ShockPhi => {
                let s = isochrone::shock_state(self, Family::One, t)?;
                Ok((pair(p.mu1, p.mu2), pair(s.rho, p.mu2)))
            }
            ShockTheta => {
                let s = isochrone::shock_state(self, Family::Two, t)?;
                Ok((pair(p.mu1, s.rho), pair(p.mu1, p.mu2)))
            }
            FinalOne | FinalTwo => same(pair(p.mu1, p.mu2)),
        }
    }

    /// Left-to-right zone sequence at time `t > 0`.
    pub fn layout(&self, t: f64) -> Result<Vec<ZoneSpan>> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::InvalidInput(format!(
                "layout requires t > 0, got {t}"
            )));
        }
        let e = self.times;
        use CurveId::*;
        use ZoneId::*;
        let mut seq: Vec<(ZoneId, Option<CurveId>, Option<CurveId>)> = Vec::with_capacity(8);

        let left_shock = if t <= e.t9 { ShockOne } else { ShockPhi };
        seq.push((Z1, None, Some(left_shock)));
        let left_inner = if t < e.t3 { FanTwoLeft } else { WeakOne };
        if t <= e.t9 {
            seq.push((Z2, Some(ShockOne), Some(left_inner)));
        }
        let mid_left = if t < e.t_fin {
            if t < e.t3 {
                Phi
            } else {
                PhiLate
            }
        } else {
            FinalOne
        };
        let mid_right = if t < e.t_fin {
            if t < e.t6 {
                Theta
            } else {
                ThetaLate
            }
        } else {
            FinalTwo
        };
        if t < e.t_int {
            seq.push((Z3, Some(FanTwoLeft), Some(FanTwoRight)));
            seq.push((Z4, Some(FanTwoRight), Some(FanOneLeft)));
            seq.push((Z6, Some(FanOneLeft), Some(FanOneRight)));
        } else {
            if t < e.t3 {
                seq.push((Z3, Some(FanTwoLeft), Some(Phi)));
            } else {
                let l = if t <= e.t9 { WeakOne } else { ShockPhi };
                seq.push((Z9, Some(l), Some(mid_left)));
            }
            if t < e.t_fin {
                seq.push((Z5, Some(mid_left), Some(mid_right)));
            } else {
                seq.push((Z11, Some(FinalOne), Some(FinalTwo)));
            }
            if t < e.t6 {
                seq.push((Z6, Some(Theta), Some(FanOneRight)));
            } else {
                let r = if t <= e.t10 { WeakTwo } else { ShockTheta };
                seq.push((Z10, Some(mid_right), Some(r)));
            }
        }
        let right_inner = if t < e.t6 { FanOneRight } else { WeakTwo };
        if t <= e.t10 {
            seq.push((Z7, Some(right_inner), Some(ShockTwo)));
        }
        let right_shock = if t <= e.t10 { ShockTwo } else { ShockTheta };
        seq.push((Z8, Some(right_shock), None));

        let pos = |c: Option<CurveId>, inf: f64| match c {
            None => Ok(inf),
            Some(c) => self.curve_x(c, t),
        };
        let spans = seq
            .into_iter()
            .map(|(zone, l, r)| {
                Ok(ZoneSpan {
                    zone,
                    left: l,
                    right: r,
                    x_left: pos(l, f64::NEG_INFINITY)?,
                    x_right: pos(r, f64::INFINITY)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(spans)
    }

    /// The zone containing `x` at time `t`; on a boundary the right zone wins.
    pub fn zone_at(&self, x: f64, t: f64) -> Result<ZoneSpan> {
        let spans = self.layout(t)?;
        spans
            .iter()
            .rev()
            .find(|s| x >= s.x_left)
            .or(spans.first())
            .copied()
            .ok_or(Error::PhaseGap { lo: x, hi: x })
    }

    /// Invariants of `zone` at `(x, t)`.
    pub fn zone_state(&self, zone: ZoneId, x: f64, t: f64) -> Result<InvariantPair> {
        let p = &self.params;
        Ok(match self.zone_content(zone) {
            ZoneContent::Constant(r) => r,
            ZoneContent::FanTwo { r1 } => InvariantPair::new(r1, self.fan_two(x, t)),
            ZoneContent::FanOne { r2 } => InvariantPair::new(self.fan_one(x, t), r2),
            ZoneContent::Interaction => isochrone::z5_states(self, t, &[x])?[0],
            ZoneContent::SimpleOne => {
                let (_, rho) = isochrone::tau_root(self, Family::One, x, t)?;
                InvariantPair::new(rho, p.mu2)
            }
            ZoneContent::SimpleTwo => {
                let (_, rho) = isochrone::tau_root(self, Family::Two, x, t)?;
                InvariantPair::new(p.mu1, rho)
            }
        })
    }

    /// Solution at a single point.
    pub fn state_at(&self, x: f64, t: f64) -> Result<(ZoneId, InvariantPair)> {
        let span = self.zone_at(x, t)?;
        Ok((span.zone, self.zone_state(span.zone, x, t)?))
    }

    /// Event times by bracketing and root-finding on curve differences,
    /// independent of the closed forms except for the starting brackets.
    pub fn numeric_event_times(&self) -> Result<EventTimes> {
        use CurveId::*;
        let find = |a: CurveId, b: CurveId, start: f64| -> Result<(f64, f64)> {
            let f = |t: f64| match (self.curve_formula(a, t), self.curve_formula(b, t)) {
                (Ok(xa), Ok(xb)) => xa - xb,
                _ => f64::NAN,
            };
            let (lo, hi) = expand_bracket(&f, start)?;
            let t = brent(f, lo, hi, 1e-16)?;
            Ok((t, self.curve_formula(a, t)?))
        };
        let (t_int, x_int) = find(FanTwoRight, FanOneLeft, 0.0)?;
        // phi and theta start at the closed-form interaction time
        let t_start = t_int.max(self.times.t_int);
        let (t3, x3) = find(FanTwoLeft, Phi, t_start)?;
        let (t6, x6) = find(Theta, FanOneRight, t_start)?;
        let (t9, x9) = find(WeakOne, ShockOne, t3)?;
        let (t10, x10) = find(WeakTwo, ShockTwo, t6)?;
        let (t_fin, x_fin) = find(PhiLate, ThetaLate, t3.max(t6))?;
        Ok(EventTimes {
            t_int,
            x_int,
            t3,
            x3,
            t6,
            x6,
            t9,
            x9,
            t10,
            x10,
            t_fin,
            x_fin,
        })
    }

    /// Events sorted by time plus the zone lifetime table.
    pub fn build_timeline(&self) -> Result<Timeline> {
        let e = self.times;
        let required = [
            (e.t_int < e.t3, "T_int < T_3"),
            (e.t_int < e.t6, "T_int < T_6"),
            (e.t3 < e.t9, "T_3 < T_9"),
            (e.t6 < e.t10, "T_6 < T_10"),
            (e.t3 < e.t_fin, "T_3 < T_fin"),
            (e.t6 < e.t_fin, "T_6 < T_fin"),
        ];
        if let Some((_, what)) = required.iter().find(|(ok, _)| !ok) {
            return Err(Error::UnexpectedOrdering(format!(
                "{what} violated (T_int={}, T_3={}, T_6={}, T_9={}, T_10={}, T_fin={})",
                e.t_int, e.t3, e.t6, e.t9, e.t10, e.t_fin
            )));
        }
        let mut notes = Vec::new();
        if e.t9 >= e.t_fin {
            notes.push(format!(
                "T_9 = {} >= T_fin = {}: left shock meets x_w1 after full separation",
                e.t9, e.t_fin
            ));
        }
        if e.t10 >= e.t_fin {
            notes.push(format!(
                "T_10 = {} >= T_fin = {}: right shock meets x_w2 after full separation",
                e.t10, e.t_fin
            ));
        }
        use CurveId::*;
        use ZoneId::*;
        let ev = |label, participants, created: &[ZoneId], destroyed: &[ZoneId]| {
            let (time, position) = e.get(label);
            Event {
                label,
                time,
                position,
                participants,
                created: created.to_vec(),
                destroyed: destroyed.to_vec(),
            }
        };
        let mut events = vec![
            ev(EventLabel::TInt, (FanTwoRight, FanOneLeft), &[Z5], &[Z4]),
            ev(EventLabel::T3, (FanTwoLeft, Phi), &[Z9], &[Z3]),
            ev(EventLabel::T6, (Theta, FanOneRight), &[Z10], &[Z6]),
            ev(EventLabel::T9, (WeakOne, ShockOne), &[], &[Z2]),
            ev(EventLabel::T10, (WeakTwo, ShockTwo), &[], &[Z7]),
            ev(EventLabel::TFin, (PhiLate, ThetaLate), &[Z11], &[Z5]),
        ];
        events.sort_by(|a, b| a.time.total_cmp(&b.time).then(a.label.cmp(&b.label)));

        let lifetimes = ZoneId::ALL
            .iter()
            .map(|&zone| {
                let born = events.iter().find(|ev| ev.created.contains(&zone));
                let died = events.iter().find(|ev| ev.destroyed.contains(&zone));
                ZoneLifetime {
                    zone,
                    born: born.map(|ev| ev.label),
                    died: died.map(|ev| ev.label),
                    t_birth: born.map_or(0.0, |ev| ev.time),
                    t_death: died.map(|ev| ev.time),
                }
            })
            .collect();
        Ok(Timeline {
            events,
            lifetimes,
            notes,
        })
    }
}

fn closed_form_times(p: &MixtureParams, h: &ImplicitSolution) -> Result<EventTimes> {
    let MixtureParams {
        mu1,
        mu2,
        q1,
        q2,
        x1,
        x2,
    } = *p;
    let t_int = (x2 - x1) / (q1 * q2 * (q2 - q1));
    let x_int = (x1 * q1 - x2 * q2) / (q1 - q2);
    let t3 = t_int * (q2 - q1).powi(2) / (q1 - mu2).powi(2);
    let t6 = t_int * (q2 - q1).powi(2) / (q2 - mu1).powi(2);
    let t9 = t3 * (mu2 - q1) / (mu1 - q1);
    let t10 = t6 * (mu1 - q2) / (mu2 - q2);
    let t_fin = t_int * riemann_green(q1, q2, mu1, mu2)?;
    Ok(EventTimes {
        t_int,
        x_int,
        t3,
        x3: x1 + q1 * mu2 * mu2 * t3,
        t6,
        x6: x2 + mu1 * mu1 * q2 * t6,
        t9,
        x9: x1 + q1 * mu1 * mu2 * t9,
        t10,
        x10: x2 + q2 * mu1 * mu2 * t10,
        t_fin,
        x_fin: h.x(InvariantPair::new(mu1, mu2))?,
    })
}

/// Grow `[start, hi]` geometrically until `f` changes sign.
fn expand_bracket(f: &impl Fn(f64) -> f64, start: f64) -> Result<(f64, f64)> {
    let f0 = f(start);
    if !f0.is_finite() {
        return Err(Error::NoRootInInterval {
            lo: start,
            hi: start,
        });
    }
    let mut step = start.abs().max(1e-3) * 0.25;
    let mut lo = start;
    for _ in 0..200 {
        let hi = lo + step;
        let fh = f(hi);
        if fh.is_finite() && fh.signum() != f0.signum() {
            return Ok((lo, hi));
        }
        if fh.is_finite() {
            lo = hi;
        }
        step *= 1.5;
    }
    Err(Error::NoRootInInterval {
        lo: start,
        hi: lo + step,
    })
}
