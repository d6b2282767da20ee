//! Level lines `t(a, b) = t*` in the plane of characteristic foot points, for
//! arbitrary piecewise-constant data in Riemann invariants.
//!
//! Each data component is carried by a curve with arc parameter `sigma`:
//! on a regular piece `x` advances with `sigma` at fixed invariant, across a
//! jump `x` is frozen and the invariant moves linearly. The A-curve carries
//! `R2_0`, the B-curve `R1_0`. A point `(a, b)` stands for the state where the
//! 2-characteristic from `a` meets the 1-characteristic from `b`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::invariants::{InvariantPair, MixtureParams};
use crate::numerics::ode::{Integrator, OdeOptions};
use crate::numerics::roots::brent;
use crate::par::Execution;
use crate::profile::{Profile, Sample, Tag};

/// Relative tolerance on `|t(a, b) - t*|` along a march.
pub const DRIFT_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
enum SegKind {
    Regular { piece: usize, x0: f64, r: f64 },
    Jump { x: f64, from: f64, to: f64 },
}

/// A piece of a sigma-curve, `sigma` in `[s0, s1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub s0: f64,
    pub s1: f64,
    kind: SegKind,
}

impl Segment {
    pub fn is_jump(&self) -> bool {
        matches!(self.kind, SegKind::Jump { .. })
    }
}

#[derive(Clone, Copy, Debug)]
struct Point {
    x: f64,
    r: f64,
    dx: f64,
    dr: f64,
    piece: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SigmaCurve {
    segs: Vec<Segment>,
}

impl SigmaCurve {
    fn build(breaks: &[f64], values: &[f64], domain: (f64, f64)) -> Self {
        let mut segs = Vec::with_capacity(2 * values.len());
        let (mut s, mut x) = (domain.0, domain.0);
        for (i, &v) in values.iter().enumerate() {
            let x_end = breaks.get(i).copied().unwrap_or(domain.1);
            let len = x_end - x;
            segs.push(Segment {
                s0: s,
                s1: s + len,
                kind: SegKind::Regular {
                    piece: i,
                    x0: x,
                    r: v,
                },
            });
            s += len;
            x = x_end;
            if let Some(&to) = values.get(i + 1) {
                if to != v {
                    let len = (to - v).abs();
                    segs.push(Segment {
                        s0: s,
                        s1: s + len,
                        kind: SegKind::Jump { x, from: v, to },
                    });
                    s += len;
                }
            }
        }
        Self { segs }
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segs
    }

    pub fn range(&self) -> (f64, f64) {
        (self.segs[0].s0, self.segs[self.segs.len() - 1].s1)
    }

    /// Segment holding `sigma`; a shared endpoint belongs to the left one.
    pub fn locate(&self, sigma: f64) -> usize {
        self.segs
            .partition_point(|s| s.s1 < sigma)
            .min(self.segs.len() - 1)
    }

    /// Position and invariant on segment `i`, extended linearly past its ends.
    fn eval(&self, i: usize, sigma: f64) -> Point {
        let seg = &self.segs[i];
        match seg.kind {
            SegKind::Regular { piece, x0, r } => Point {
                x: x0 + (sigma - seg.s0),
                r,
                dx: 1.0,
                dr: 0.0,
                piece: Some(piece),
            },
            SegKind::Jump { x, from, to } => {
                let dr = (to - from).signum();
                Point {
                    x,
                    r: from + dr * (sigma - seg.s0),
                    dx: 0.0,
                    dr,
                    piece: None,
                }
            }
        }
    }

    pub fn x_at(&self, sigma: f64) -> f64 {
        self.eval(self.locate(sigma), sigma).x
    }

    pub fn r_at(&self, sigma: f64) -> f64 {
        self.eval(self.locate(sigma), sigma).r
    }

    /// `sigma` of position `x`; at a jump, the start (left limit) or the end
    /// (right limit) of the jump segment.
    pub fn sigma_at(&self, x: f64, right_limit: bool) -> Result<f64> {
        let (lo, hi) = (self.segs[0].s0, self.x_at(self.range().1));
        if !(lo..=hi).contains(&x) {
            return Err(Error::DomainError {
                what: "x",
                value: x,
                lo,
                hi,
            });
        }
        let found = self.segs.iter().find_map(|seg| match seg.kind {
            SegKind::Regular { x0, .. } => {
                let x1 = x0 + (seg.s1 - seg.s0);
                let inside = if right_limit {
                    x0 <= x && x < x1
                } else {
                    x0 < x && x <= x1
                };
                inside.then(|| seg.s0 + (x - x0))
            }
            SegKind::Jump { .. } => None,
        });
        Ok(found.unwrap_or(if right_limit {
            self.range().1
        } else {
            self.range().0
        }))
    }
}

/// Piecewise-constant `(R1_0, R2_0)` on a bounded domain. Piece `i` covers
/// `[breaks[i-1], breaks[i]]`, with the domain ends closing the outer pieces.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseInitialData {
    mobilities: (f64, f64),
    breaks: Vec<f64>,
    r1: Vec<f64>,
    r2: Vec<f64>,
    domain: (f64, f64),
    fg: Vec<(f64, f64)>,
    a_curve: SigmaCurve,
    b_curve: SigmaCurve,
}

impl PiecewiseInitialData {
    pub fn new(
        mobilities: (f64, f64),
        breaks: Vec<f64>,
        r1: Vec<f64>,
        r2: Vec<f64>,
        domain: (f64, f64),
    ) -> Result<Self> {
        let n = breaks.len() + 1;
        if r1.len() != n || r2.len() != n {
            return Err(Error::InvalidInput(format!(
                "{} breakpoints need {n} values per invariant, got {} and {}",
                breaks.len(),
                r1.len(),
                r2.len()
            )));
        }
        let all_finite = breaks
            .iter()
            .chain(&r1)
            .chain(&r2)
            .chain([&domain.0, &domain.1, &mobilities.0, &mobilities.1])
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::InvalidInput("non-finite input".into()));
        }
        let mut edges = Vec::with_capacity(n + 1);
        edges.push(domain.0);
        edges.extend_from_slice(&breaks);
        edges.push(domain.1);
        if edges.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput(
                "breakpoints must increase strictly inside the domain".into(),
            ));
        }
        let mut fg = Vec::with_capacity(n);
        for (&a, &b) in r1.iter().zip(&r2) {
            if a * b == 0.0 {
                return Err(Error::DivisionByZero("piecewise data"));
            }
            if a == b {
                return Err(Error::CoincidentInvariants { r1: a, r2: b });
            }
            fg.push(((a + b) / (a * b), 1.0 / (a * b)));
        }
        let a_curve = SigmaCurve::build(&breaks, &r2, domain);
        let b_curve = SigmaCurve::build(&breaks, &r1, domain);
        Ok(Self {
            mobilities,
            breaks,
            r1,
            r2,
            domain,
            fg,
            a_curve,
            b_curve,
        })
    }

    /// The plateau problem: background outside `[x1, x2]`, plateau inside.
    pub fn two_point(p: &MixtureParams, domain: (f64, f64)) -> Result<Self> {
        Self::new(
            (p.mu1, p.mu2),
            vec![p.x1, p.x2],
            vec![p.mu1, p.q1, p.mu1],
            vec![p.mu2, p.q2, p.mu2],
            domain,
        )
    }

    pub fn constant(mobilities: (f64, f64), r: InvariantPair, domain: (f64, f64)) -> Result<Self> {
        Self::new(mobilities, vec![], vec![r.r1], vec![r.r2], domain)
    }

    pub fn mobilities(&self) -> (f64, f64) {
        self.mobilities
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn pieces(&self) -> impl Iterator<Item = InvariantPair> + '_ {
        self.r1
            .iter()
            .zip(&self.r2)
            .map(|(&a, &b)| InvariantPair::new(a, b))
    }

    pub fn a_curve(&self) -> &SigmaCurve {
        &self.a_curve
    }

    pub fn b_curve(&self) -> &SigmaCurve {
        &self.b_curve
    }

    fn piece_bounds(&self, i: usize) -> (f64, f64) {
        let lo = if i == 0 {
            self.domain.0
        } else {
            self.breaks[i - 1]
        };
        let hi = self.breaks.get(i).copied().unwrap_or(self.domain.1);
        (lo, hi)
    }

    /// `F = int f dx`, `G = int g dx` from `xa` to `xb`, with
    /// `f = (R1+R2)/(R1 R2)` and `g = 1/(R1 R2)` of the data.
    pub fn integrals(&self, xa: f64, xb: f64) -> (f64, f64) {
        let (lo, hi, sign) = if xa <= xb {
            (xa, xb, 1.0)
        } else {
            (xb, xa, -1.0)
        };
        let (mut big_f, mut big_g) = (0.0, 0.0);
        for (i, &(f, g)) in self.fg.iter().enumerate() {
            let (pl, ph) = self.piece_bounds(i);
            let w = (hi.min(ph) - lo.max(pl)).max(0.0);
            big_f += w * f;
            big_g += w * g;
        }
        (sign * big_f, sign * big_g)
    }

    fn local(
        &self,
        ia: usize,
        sa: f64,
        ib: usize,
        sb: f64,
        big_f: f64,
        big_g: f64,
    ) -> Result<Local> {
        let pa = self.a_curve.eval(ia, sa);
        let pb = self.b_curve.eval(ib, sb);
        let (r1, r2) = (pb.r, pa.r);
        let d = r1 - r2;
        if d == 0.0 {
            return Err(Error::CoincidentInvariants { r1, r2 });
        }
        let (fa, ga) = pa.piece.map_or((0.0, 0.0), |i| self.fg[i]);
        let (fb, gb) = pb.piece.map_or((0.0, 0.0), |i| self.fg[i]);
        let s = r1 + r2;
        let p = r1 * r2;
        let num = 2.0 * (pb.x - pa.x) - s * big_f + 2.0 * p * big_g;
        let nb = 2.0 * pb.dx - pb.dr * big_f - s * fb * pb.dx
            + 2.0 * pb.dr * r2 * big_g
            + 2.0 * p * gb * pb.dx;
        let na = -2.0 * pa.dx - pa.dr * big_f + s * fa * pa.dx + 2.0 * r1 * pa.dr * big_g
            - 2.0 * p * ga * pa.dx;
        let d3 = d * d * d;
        let d4 = d3 * d;
        Ok(Local {
            t: num / d3,
            ta: na / d3 + 3.0 * num * pa.dr / d4,
            tb: nb / d3 - 3.0 * num * pb.dr / d4,
            r: InvariantPair::new(r1, r2),
            fa: fa * pa.dx,
            ga: ga * pa.dx,
            fb: fb * pb.dx,
            gb: gb * pb.dx,
        })
    }

    /// `t` at the foot-point pair `(a, b)`; requires `x_A(a) <= x_B(b)`.
    pub fn t_ab(&self, a: f64, b: f64) -> Result<f64> {
        let (ia, ib) = (self.a_curve.locate(a), self.b_curve.locate(b));
        let xa = self.a_curve.eval(ia, a).x;
        let xb = self.b_curve.eval(ib, b).x;
        if xa > xb {
            return Err(Error::DomainError {
                what: "x_A(a) - x_B(b)",
                value: xa - xb,
                lo: f64::NEG_INFINITY,
                hi: 0.0,
            });
        }
        let (big_f, big_g) = self.integrals(xa, xb);
        Ok(self.local(ia, a, ib, b, big_f, big_g)?.t)
    }

    /// Difference between a state's carried integrals and their closed form.
    pub fn integrity(&self, s: &AbPlaneState) -> (f64, f64) {
        let (f, g) = self.integrals(self.a_curve.x_at(s.a), self.b_curve.x_at(s.b));
        (s.f - f, s.g - g)
    }
}

#[derive(Clone, Copy, Debug)]
struct Local {
    t: f64,
    ta: f64,
    tb: f64,
    r: InvariantPair,
    fa: f64,
    ga: f64,
    fb: f64,
    gb: f64,
}

impl Local {
    fn jacobian(&self) -> f64 {
        (self.r.lambda2() - self.r.lambda1()) * self.ta * self.tb
    }
}

/// A point of the `(a, b)`-plane together with the carried integrals, its
/// physical position and time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbPlaneState {
    pub a: f64,
    pub b: f64,
    pub f: f64,
    pub g: f64,
    pub x: f64,
    pub t: f64,
    pub r1: f64,
    pub r2: f64,
}

/// Physical position of `(a, b)`: integrate along `b` from the right limit of
/// `x_A(a)` on the B-curve, where the point sits on the initial line.
pub fn seed_point(data: &PiecewiseInitialData, a: f64, b: f64) -> Result<AbPlaneState> {
    let ac = &data.a_curve;
    let bc = &data.b_curve;
    let ia = ac.locate(a);
    let xa = ac.eval(ia, a).x;
    let b0 = bc.sigma_at(xa, true)?;
    let (_, b_hi) = bc.range();
    if !(b0 - 1e-12 * b0.abs().max(1.0)..=b_hi).contains(&b) {
        return Err(Error::DomainError {
            what: "b",
            value: b,
            lo: b0,
            hi: b_hi,
        });
    }
    let mut y = [xa, 0.0, 0.0];
    let segs = bc.segments();
    for ib in bc.locate(b0)..=bc.locate(b) {
        let (lo, hi) = (segs[ib].s0.max(b0), segs[ib].s1.min(b));
        if hi <= lo {
            continue;
        }
        let rhs = |sb: f64, y: &[f64; 3]| match data.local(ia, a, ib, sb, y[1], y[2]) {
            Ok(l) => [l.r.lambda2() * l.tb, l.fb, l.gb],
            Err(_) => [f64::NAN; 3],
        };
        let mut it = Integrator::new(lo, y, OdeOptions::default());
        it.advance_to(&rhs, hi)?;
        y = it.y;
    }
    let l = data.local(ia, a, bc.locate(b), b, y[1], y[2])?;
    Ok(AbPlaneState {
        a,
        b,
        f: y[1],
        g: y[2],
        x: y[0],
        t: l.t,
        r1: l.r.r1,
        r2: l.r.r2,
    })
}

/// Seeds on the level `t*` along the ray `origin + s * dir`, `s` in
/// `[0, s_max]`: the first crossing of `t*` is located by Brent, after the
/// samples before it are checked to be monotone.
pub fn seed_on_ray(
    data: &PiecewiseInitialData,
    origin: (f64, f64),
    dir: (f64, f64),
    t_star: f64,
    s_max: f64,
) -> Result<AbPlaneState> {
    const N: usize = 256;
    let at = |s: f64| (origin.0 + s * dir.0, origin.1 + s * dir.1);
    let level = |s: f64| {
        let (a, b) = at(s);
        data.t_ab(a, b).map_or(f64::NAN, |t| t - t_star)
    };
    let mut prev: Option<(f64, f64)> = None;
    let mut trend = 0.0;
    for i in 0..=N {
        let s = s_max * i as f64 / N as f64;
        let v = level(s);
        if !v.is_finite() {
            continue;
        }
        if let Some((sp, vp)) = prev {
            if vp == 0.0 || vp.signum() != v.signum() {
                let s_star = brent(level, sp, s, 1e-14 * s_max.abs().max(1.0))?;
                let (a, b) = at(s_star);
                return seed_point(data, a, b);
            }
            let step = (v - vp).signum();
            if v != vp && trend != 0.0 && step != trend {
                let (a, b) = at(s);
                return Err(Error::NonMonotoneParametrization {
                    at: data.a_curve.x_at(a).max(data.b_curve.x_at(b)),
                });
            }
            if v != vp {
                trend = step;
            }
        }
        prev = Some((s, v));
    }
    Err(Error::NoRootInInterval { lo: 0.0, hi: s_max })
}

/// Why a march direction ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stop {
    /// Reached an edge of the requested `x` window.
    Window,
    /// A foot point left its data curve.
    DomainEdge,
    /// Arc-length budget exhausted.
    Budget,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Curve {
    A,
    B,
}

/// The level line passed from one data segment into the next, i.e. crossed a
/// characteristic from a breakpoint or a fan edge.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub x: f64,
    pub curve: Curve,
    pub sigma: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct MarchOptions {
    pub window: (f64, f64),
    /// Largest step in arc length of the `(a, b)`-plane.
    pub h_max: f64,
    /// Arc-length budget per direction.
    pub max_len: f64,
    pub ode: OdeOptions,
}

impl MarchOptions {
    pub fn new(data: &PiecewiseInitialData, window: (f64, f64)) -> Self {
        let (a0, a1) = data.a_curve.range();
        let (b0, b1) = data.b_curve.range();
        Self {
            window,
            h_max: 0.02,
            max_len: (a1 - a0) + (b1 - b0),
            ode: OdeOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct March {
    pub t_star: f64,
    /// Ordered by increasing `x`.
    pub states: Vec<AbPlaneState>,
    /// Ordered by increasing `x`.
    pub crossings: Vec<Crossing>,
    pub max_drift: f64,
    /// Termination at the low-`x` and the high-`x` end.
    pub stops: [Stop; 2],
}

impl March {
    pub fn profile(&self, data: &PiecewiseInitialData) -> Result<Profile> {
        let mut samples: Vec<Sample> = Vec::with_capacity(self.states.len());
        for s in &self.states {
            if samples.last().is_some_and(|p| p.x >= s.x) {
                continue;
            }
            samples.push(Sample::with_mobilities(
                data.mobilities,
                s.x,
                InvariantPair::new(s.r1, s.r2),
                Tag::March,
            )?);
        }
        Ok(Profile::new(self.t_star, samples))
    }

    pub fn crossing_positions(&self) -> Vec<f64> {
        self.crossings.iter().map(|c| c.x).collect()
    }
}

struct Leg {
    states: Vec<AbPlaneState>,
    crossings: Vec<Crossing>,
    max_drift: f64,
    stop: Stop,
}

enum Hit {
    Seg(Curve, f64),
    Window,
}

fn rhs(data: &PiecewiseInitialData, ia: usize, ib: usize, y: &[f64; 5]) -> [f64; 5] {
    let Ok(l) = data.local(ia, y[0], ib, y[1], y[2], y[3]) else {
        return [f64::NAN; 5];
    };
    let n = l.ta.hypot(l.tb);
    let (da, db) = (-l.tb / n, l.ta / n);
    [
        da,
        db,
        l.fb * db - l.fa * da,
        l.gb * db - l.ga * da,
        l.jacobian() / n,
    ]
}

fn march_leg(
    data: &PiecewiseInitialData,
    seed: &AbPlaneState,
    dir: f64,
    opts: &MarchOptions,
    j_sign: f64,
) -> Result<Leg> {
    let t_star = seed.t;
    let segs_a = data.a_curve.segments();
    let segs_b = data.b_curve.segments();
    let (mut ia, mut ib) = (data.a_curve.locate(seed.a), data.b_curve.locate(seed.b));
    let mut it = Integrator::new(
        0.0,
        [seed.a, seed.b, seed.f, seed.g, seed.x],
        OdeOptions {
            h_max: opts.h_max,
            ..opts.ode
        },
    );
    let limit = dir * opts.max_len;
    let mut leg = Leg {
        states: Vec::new(),
        crossings: Vec::new(),
        max_drift: 0.0,
        stop: Stop::Budget,
    };
    let mut stalls = 0;
    loop {
        if it.t == limit {
            return Ok(leg);
        }
        let f = |_: f64, y: &[f64; 5]| rhs(data, ia, ib, y);
        let (mu0, y0) = (it.t, it.y);
        it.step_toward(&f, limit)?;
        let y1 = it.y;
        let h = it.t - mu0;

        let (sa, sb) = (&segs_a[ia], &segs_b[ib]);
        let mut hits: Vec<(usize, f64, Hit)> = Vec::new();
        for (c, seg, curve) in [(0, sa, Curve::A), (1, sb, Curve::B)] {
            if y1[c] > seg.s1 {
                hits.push((c, seg.s1, Hit::Seg(curve, 1.0)));
            } else if y1[c] < seg.s0 {
                hits.push((c, seg.s0, Hit::Seg(curve, -1.0)));
            }
        }
        if y1[4] < opts.window.0 {
            hits.push((4, opts.window.0, Hit::Window));
        } else if y1[4] > opts.window.1 {
            hits.push((4, opts.window.1, Hit::Window));
        }

        let mut event = None;
        if !hits.is_empty() {
            it.reset(mu0, y0);
            let mut best: Option<(f64, usize, f64, Hit)> = None;
            for (c, target, hit) in hits {
                let g = |hh: f64| it.trial(&f, hh).0[c] - target;
                let hs = brent(g, 0.0, h, 1e-15 * h.abs())?;
                if best.as_ref().is_none_or(|b| hs.abs() < b.0.abs()) {
                    best = Some((hs, c, target, hit));
                }
            }
            let (hs, c, target, hit) = best.expect("at least one hit");
            let mut y = if hs == 0.0 { y0 } else { it.trial(&f, hs).0 };
            y[c] = target;
            it.reset(mu0 + hs, y);
            stalls = if hs == 0.0 { stalls + 1 } else { 0 };
            if stalls > 4 {
                return Err(Error::FoldDetected { at: y[4] });
            }
            event = Some(hit);
        }

        let y = it.y;
        let l = data.local(ia, y[0], ib, y[1], y[2], y[3])?;
        let drift = (l.t - t_star).abs();
        leg.max_drift = leg.max_drift.max(drift);
        if drift > DRIFT_TOL * t_star.abs() {
            return Err(Error::LevelDrift { drift, t_star });
        }
        if l.jacobian() * j_sign < 0.0 {
            return Err(Error::FoldDetected { at: y[4] });
        }
        leg.states.push(AbPlaneState {
            a: y[0],
            b: y[1],
            f: y[2],
            g: y[3],
            x: y[4],
            t: l.t,
            r1: l.r.r1,
            r2: l.r.r2,
        });

        match event {
            None => {}
            Some(Hit::Window) => {
                leg.stop = Stop::Window;
                return Ok(leg);
            }
            Some(Hit::Seg(curve, step)) => {
                let (idx, len, sigma) = match curve {
                    Curve::A => (&mut ia, segs_a.len(), y[0]),
                    Curve::B => (&mut ib, segs_b.len(), y[1]),
                };
                let next = *idx as isize + step as isize;
                if next < 0 || next as usize >= len {
                    leg.stop = Stop::DomainEdge;
                    return Ok(leg);
                }
                *idx = next as usize;
                leg.crossings.push(Crossing {
                    x: y[4],
                    curve,
                    sigma,
                });
            }
        }
    }
}

/// Traces the level line through `seed` in both directions until each end
/// leaves the window, the data curves, or the arc-length budget.
///
/// Fails with [`Error::LevelDrift`] if `t` departs from the seed level by
/// more than [`DRIFT_TOL`] relative, and with [`Error::FoldDetected`] when
/// the map from `(a, b)` to `x` reverses orientation, which happens where
/// characteristics of one family cross (a shock).
pub fn march_isochrone(
    data: &PiecewiseInitialData,
    seed: &AbPlaneState,
    opts: &MarchOptions,
) -> Result<March> {
    if !(seed.t > 0.0) {
        return Err(Error::DomainError {
            what: "seed t",
            value: seed.t,
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    let (ia, ib) = (data.a_curve.locate(seed.a), data.b_curve.locate(seed.b));
    let j = data
        .local(ia, seed.a, ib, seed.b, seed.f, seed.g)?
        .jacobian();
    if j == 0.0 || !j.is_finite() {
        return Err(Error::FoldDetected { at: seed.x });
    }
    let fwd = march_leg(data, seed, 1.0, opts, j.signum())?;
    let bwd = march_leg(data, seed, -1.0, opts, j.signum())?;

    let mut states: Vec<AbPlaneState> = bwd.states.into_iter().rev().collect();
    states.push(*seed);
    states.extend(fwd.states);
    let mut crossings: Vec<Crossing> = bwd.crossings.into_iter().chain(fwd.crossings).collect();
    crossings.sort_by(|p, q| p.x.total_cmp(&q.x));
    let mut stops = [bwd.stop, fwd.stop];
    if states.first().map(|s| s.x) > states.last().map(|s| s.x) {
        states.reverse();
        stops.reverse();
    }
    Ok(March {
        t_star: seed.t,
        states,
        crossings,
        max_drift: bwd.max_drift.max(fwd.max_drift),
        stops,
    })
}

/// `t(a, b)` sampled on a rectangular grid; `NaN` where `x_A(a) > x_B(b)` or
/// the formula is undefined.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelMap {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    /// Row-major, `t[i * b.len() + j]` at `(a[i], b[j])`.
    pub t: Vec<f64>,
}

impl LevelMap {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * self.b.len() + j]
    }

    /// Whether row `i` is monotone in `b` over its defined entries.
    pub fn monotone_in_b(&self, i: usize) -> bool {
        let row: Vec<f64> = (0..self.b.len())
            .map(|j| self.at(i, j))
            .filter(|v| v.is_finite())
            .collect();
        row.windows(2).all(|w| w[1] >= w[0]) || row.windows(2).all(|w| w[1] <= w[0])
    }
}

pub fn level_map(
    data: &PiecewiseInitialData,
    a_range: (f64, f64),
    b_range: (f64, f64),
    n: (usize, usize),
    exec: Execution,
) -> LevelMap {
    let a = crate::profile::linspace(a_range.0, a_range.1, n.0);
    let b = crate::profile::linspace(b_range.0, b_range.1, n.1);
    let nb = b.len();
    let t = exec.map_range(a.len() * nb, |k| {
        data.t_ab(a[k / nb], b[k % nb]).unwrap_or(f64::NAN)
    });
    LevelMap { a, b, t }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavefield::{CurveId, Wavefield};

    const DOMAIN: (f64, f64) = (-5.0, 5.0);

    fn reference() -> (MixtureParams, PiecewiseInitialData) {
        let p = MixtureParams::reference();
        let d = PiecewiseInitialData::two_point(&p, DOMAIN).unwrap();
        (p, d)
    }

    #[test]
    fn curve_layout() {
        let (_, d) = reference();
        let a = d.a_curve();
        assert_eq!(a.segments().len(), 5);
        assert!(a.segments()[1].is_jump() && a.segments()[3].is_jump());
        assert_eq!(a.range(), (-5.0, 9.0));
        assert_eq!(d.b_curve().range(), (-5.0, 11.0));
        assert_eq!(a.sigma_at(-1.0, false).unwrap(), -1.0);
        assert_eq!(a.sigma_at(-1.0, true).unwrap(), 1.0);
        assert_eq!(a.sigma_at(0.0, true).unwrap(), 2.0);
        assert_eq!(a.r_at(0.0), 9.0);
        assert_eq!(a.x_at(0.0), -1.0);
        assert!(a.sigma_at(7.0, true).is_err());
    }

    #[test]
    fn diagonal_is_initial_line() {
        let (_, d) = reference();
        for &x in &[-3.0, -0.5, 0.5, 3.0] {
            let a = d.a_curve().sigma_at(x, true).unwrap();
            let b = d.b_curve().sigma_at(x, true).unwrap();
            assert!(d.t_ab(a, b).unwrap().abs() < 1e-15);
        }
    }

    #[test]
    fn interaction_corner() {
        let (_, d) = reference();
        let a = d.a_curve().sigma_at(-1.0, true).unwrap();
        let b = d.b_curve().sigma_at(1.0, false).unwrap();
        assert!((d.t_ab(a, b).unwrap() - 0.0125).abs() < 1e-15);
        let s = seed_point(&d, a, b).unwrap();
        assert!((s.x - 1.5).abs() < 1e-12);
        assert!((s.t - 0.0125).abs() < 1e-15);
    }

    #[test]
    fn jump_cell_matches_closed_form() {
        let (p, d) = reference();
        let h = crate::hodograph::ImplicitSolution::new(&p);
        // A1 covers r2 in [mu2, q2] at x1, B3 covers r1 in [q1, mu1] at x2
        for &(r1, r2) in &[(2.0, 10.0), (3.0, 9.0), (4.5, 8.2), (5.0, 8.0)] {
            let a = -1.0 + (r2 - p.mu2);
            let b = 4.0 + (r1 - p.q1);
            let r = InvariantPair::new(r1, r2);
            let want = h.t(r).unwrap();
            assert!((d.t_ab(a, b).unwrap() - want).abs() < 1e-14 * want.max(1.0));
            let s = seed_point(&d, a, b).unwrap();
            assert!((s.x - h.x(r).unwrap()).abs() < 1e-9, "{r1} {r2}");
        }
    }

    #[test]
    fn constant_data_is_linear() {
        let r = InvariantPair::new(3.0, 7.0);
        let d = PiecewiseInitialData::constant((5.0, 8.0), r, (0.0, 4.0)).unwrap();
        let k = 1.0 / (r.r1 * r.r2 * (r.r2 - r.r1));
        assert!((d.t_ab(0.5, 2.5).unwrap() - 2.0 * k).abs() < 1e-15);
        let s = seed_on_ray(&d, (1.0, 1.0), (0.0, 1.0), 0.01, 3.0).unwrap();
        assert!((s.b - 1.0 - 0.01 / k).abs() < 1e-12);
        // x = x_a + lambda2 * t along the line, so its left end sits at 1.47
        let m = march_isochrone(&d, &s, &MarchOptions::new(&d, (2.0, 4.0))).unwrap();
        assert_eq!(m.stops, [Stop::Window, Stop::Window]);
        assert!(m.crossings.is_empty());
        assert!(m.states.iter().all(|q| q.r1 == 3.0 && q.r2 == 7.0));
        assert!(m.max_drift <= 1e-8 * 0.01);
        let xs = m.profile(&d).unwrap().x_range().unwrap();
        assert_eq!(xs, (2.0, 4.0));
    }

    fn check_against_exact(t_star: f64, left: CurveId, fronts: [CurveId; 4]) {
        let (p, d) = reference();
        let wf = Wavefield::new(p).unwrap();
        let x_lo = wf.curve_x(left, t_star).unwrap();
        let x_hi = wf.curve_x(CurveId::FanOneRight, t_star).unwrap();
        let s1 = wf.curve_x(CurveId::ShockOne, t_star).unwrap();
        let s2 = wf.curve_x(CurveId::ShockTwo, t_star).unwrap();
        let window = (x_lo - 0.1 * (x_lo - s1), x_hi + 0.1 * (s2 - x_hi));
        let seed = seed_on_ray(&d, (0.0, 2.0), (0.0, 1.0), t_star, 9.0).unwrap();
        assert!((seed.t - t_star).abs() < 1e-12 * t_star);
        let m = march_isochrone(&d, &seed, &MarchOptions::new(&d, window)).unwrap();
        assert_eq!(m.stops, [Stop::Window, Stop::Window]);
        assert!(m.max_drift <= 1e-8 * t_star);
        for s in &m.states {
            let (_, exact) = wf.state_at(s.x, t_star).unwrap();
            let err = (exact.r1 - s.r1).abs().max((exact.r2 - s.r2).abs());
            assert!(err < 1e-5, "x = {}: {err}", s.x);
            let (df, dg) = d.integrity(s);
            assert!(df.abs() < 1e-9 && dg.abs() < 1e-9);
        }
        let xs = m.crossing_positions();
        assert_eq!(xs.len(), 4);
        for (x, id) in xs.iter().zip(fronts) {
            let want = wf.curve_x(id, t_star).unwrap();
            assert!((x - want).abs() < 1e-5, "{id:?}: {x} vs {want}");
        }
    }

    #[test]
    fn matches_exact_before_weak_interaction() {
        use CurveId::*;
        check_against_exact(0.018, FanTwoLeft, [FanTwoLeft, Phi, Theta, FanOneRight]);
    }

    #[test]
    fn matches_exact_after_left_weak_interaction() {
        use CurveId::*;
        check_against_exact(0.028, WeakOne, [WeakOne, PhiLate, Theta, FanOneRight]);
    }

    #[test]
    fn shock_is_a_fold() {
        let p = MixtureParams::reference();
        let d = PiecewiseInitialData::two_point(&p, (-20.0, 20.0)).unwrap();
        let seed = seed_on_ray(&d, (0.0, 2.0), (0.0, 1.0), 0.018, 9.0).unwrap();
        let e = march_isochrone(&d, &seed, &MarchOptions::new(&d, d.domain())).unwrap_err();
        assert!(matches!(e, Error::FoldDetected { .. }), "{e:?}");
    }

    #[test]
    fn three_plateau_rarefactions() {
        let d = PiecewiseInitialData::new(
            (5.0, 8.0),
            vec![-1.0, 0.0, 1.0],
            vec![2.0, 3.0, 4.0, 5.0],
            vec![8.0, 9.0, 9.5, 10.0],
            (-4.0, 4.0),
        )
        .unwrap();
        let seed = seed_on_ray(&d, (0.0, 0.0), (0.0, 1.0), 0.01, 8.0).unwrap();
        let m = march_isochrone(&d, &seed, &MarchOptions::new(&d, (-100.0, 100.0))).unwrap();
        assert_eq!(m.stops, [Stop::DomainEdge, Stop::DomainEdge]);
        assert!(m.max_drift <= 1e-8 * 0.01);
        let prof = m.profile(&d).unwrap();
        prof.check_order().unwrap();
        // invariants are non-decreasing in x through pure rarefactions
        for w in prof.samples.windows(2) {
            assert!(w[1].r.r1 >= w[0].r.r1 - 1e-12 && w[1].r.r2 >= w[0].r.r2 - 1e-12);
        }
        for s in &m.states {
            let (df, dg) = d.integrity(s);
            assert!(df.abs() < 1e-9 && dg.abs() < 1e-9);
        }
    }

    #[test]
    fn level_map_grid() {
        let (_, d) = reference();
        let map = level_map(&d, (-1.0, 1.0), (2.0, 7.0), (5, 11), Execution::Sequential);
        assert_eq!(map.t.len(), 55);
        assert!((0..5).all(|i| map.monotone_in_b(i)));
        let par = level_map(&d, (-1.0, 1.0), (2.0, 7.0), (5, 11), Execution::Parallel);
        assert_eq!(map, par);
        let below = level_map(&d, (6.0, 6.0), (-5.0, -4.0), (1, 2), Execution::Sequential);
        assert!(below.t.iter().all(|v| v.is_nan()));
    }

    #[test]
    fn rejects_bad_data() {
        let e = PiecewiseInitialData::new((5.0, 8.0), vec![0.0], vec![1.0], vec![2.0, 3.0], DOMAIN);
        assert!(matches!(e, Err(Error::InvalidInput(_))));
        let e = PiecewiseInitialData::new(
            (5.0, 8.0),
            vec![6.0],
            vec![1.0, 2.0],
            vec![2.0, 3.0],
            DOMAIN,
        );
        assert!(matches!(e, Err(Error::InvalidInput(_))));
        let e = PiecewiseInitialData::new((5.0, 8.0), vec![], vec![0.0], vec![2.0], DOMAIN);
        assert!(matches!(e, Err(Error::DivisionByZero(_))));
    }
}
