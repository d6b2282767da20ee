//! Explicit profiles on a level line `t = t*` of the implicit solution.
//!
//! Inside `Z5` both invariants vary and follow the isochrone ODE
//! `dR1/dx = 1 / ((λ2 - λ1) t_{R1})`, `dR2/dx = 1 / ((λ1 - λ2) t_{R2})`.
//! In `Z9` (`Z10`) only one invariant varies; it is transported along straight
//! characteristics from the `Z5` edge, which gives a one-parameter
//! representation in `ρ`. After `T_9` (`T_10`) the outer edge of that zone is a
//! shock whose state behind it obeys an implicit ODE.

use crate::error::{Error, Result};
use crate::hodograph::ImplicitSolution;
use crate::invariants::{Family, InvariantPair, MixtureParams};
use crate::numerics::roots::{brent, real_cubic_roots};
use crate::numerics::{integrate_dense, Integrator, OdeOptions};
use crate::profile::{linspace, Profile, Sample, Tag};
use crate::wavefield::{CurveId, Wavefield, ZoneContent, ZoneId};

/// Allowed deviation of the integrated `Z5` exit state from its target.
pub const ENDPOINT_TOL: f64 = 1e-6;
/// Drift of the shock constraint that triggers re-projection.
pub const SHOCK_DRIFT_TOL: f64 = 1e-9;

fn slack(t: f64) -> f64 {
    1e-12 * t.abs().max(1.0)
}

fn pair_on(side: Family, p: &MixtureParams, rho: f64) -> InvariantPair {
    match side {
        Family::One => InvariantPair::new(rho, p.mu2),
        Family::Two => InvariantPair::new(p.mu1, rho),
    }
}

/// `ρ*` with `t(ρ*, μ2) = t*` in `[q1, μ1]` (side one) or `t(μ1, ρ*) = t*`
/// in `[μ2, q2]` (side two).
pub fn rho_star(h: &ImplicitSolution, side: Family, t_star: f64) -> Result<f64> {
    let p = h.params();
    match side {
        Family::One => rho_star_within(h, side, t_star, p.q1, p.mu1),
        Family::Two => rho_star_within(h, side, t_star, p.mu2, p.q2),
    }
}

/// Root of the level-line cubic restricted to `[lo, hi]`.
pub fn rho_star_within(
    h: &ImplicitSolution,
    side: Family,
    t_star: f64,
    lo: f64,
    hi: f64,
) -> Result<f64> {
    let p = h.params();
    let c = p.width() / (p.q1 * p.q2);
    let s = p.q1 + p.q2;
    // y = ρ - μ2 (side one) or y = μ1 - ρ (side two):
    // t* y^3 + alpha y + k = 0
    let (base, alpha, sign) = match side {
        Family::One => (p.mu2, -c * (2.0 * p.mu2 - s), 1.0),
        Family::Two => (p.mu1, -c * (s - 2.0 * p.mu1), -1.0),
    };
    let k = -2.0 * c * (base - p.q1) * (base - p.q2);
    let tol = 1e-9 * (hi - lo).abs().max(1e-12);
    let candidates = real_cubic_roots(t_star, 0.0, alpha, k);
    let y = candidates
        .into_iter()
        .map(|y| {
            let g = t_star * y * y * y + alpha * y + k;
            let dg = 3.0 * t_star * y * y + alpha;
            if dg != 0.0 {
                y - g / dg
            } else {
                y
            }
        })
        .find(|&y| {
            let rho = base + sign * y;
            rho >= lo - tol && rho <= hi + tol
        })
        .ok_or(Error::NoRootInInterval { lo, hi })?;
    Ok((base + sign * y).clamp(lo, hi))
}

/// First point of `Z5` on the isochrone (its left edge).
pub fn z5_entry(wf: &Wavefield, t_star: f64) -> Result<(f64, InvariantPair)> {
    let p = wf.params();
    let e = wf.times();
    if t_star <= e.t3 {
        let r2 = p.q1 + (p.q2 - p.q1) * (e.t_int / t_star).sqrt();
        Ok((
            wf.curve_x(CurveId::Phi, t_star)?,
            InvariantPair::new(p.q1, r2),
        ))
    } else {
        let r = InvariantPair::new(rho_star(wf.implicit(), Family::One, t_star)?, p.mu2);
        Ok((wf.implicit().x(r)?, r))
    }
}

/// Last point of `Z5` on the isochrone (its right edge).
pub fn z5_exit(wf: &Wavefield, t_star: f64) -> Result<(f64, InvariantPair)> {
    let p = wf.params();
    let e = wf.times();
    if t_star <= e.t6 {
        let r1 = p.q2 - (p.q2 - p.q1) * (e.t_int / t_star).sqrt();
        Ok((
            wf.curve_x(CurveId::Theta, t_star)?,
            InvariantPair::new(r1, p.q2),
        ))
    } else {
        let r = InvariantPair::new(p.mu1, rho_star(wf.implicit(), Family::Two, t_star)?);
        Ok((wf.implicit().x(r)?, r))
    }
}

fn check_z5_time(wf: &Wavefield, t_star: f64) -> Result<()> {
    let e = wf.times();
    if t_star < e.t_int - slack(e.t_int) || t_star > e.t_fin + slack(e.t_fin) {
        return Err(Error::DomainError {
            what: "Z5 isochrone",
            value: t_star,
            lo: e.t_int,
            hi: e.t_fin,
        });
    }
    Ok(())
}

fn z5_rhs(h: &ImplicitSolution) -> impl Fn(f64, &[f64; 2]) -> [f64; 2] + '_ {
    move |_, y| {
        let r = InvariantPair::new(y[0], y[1]);
        match h.t_partials(r) {
            Ok((t1, t2)) => {
                let gap = r.lambda2() - r.lambda1();
                [1.0 / (gap * t1), -1.0 / (gap * t2)]
            }
            Err(_) => [f64::NAN, f64::NAN],
        }
    }
}

/// Invariants of `Z5` at the positions `xs` (any order) on `t = t*`.
pub fn z5_states(wf: &Wavefield, t_star: f64, xs: &[f64]) -> Result<Vec<InvariantPair>> {
    check_z5_time(wf, t_star)?;
    let (x0, r0) = z5_entry(wf, t_star)?;
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let sorted: Vec<f64> = order.iter().map(|&i| xs[i]).collect();
    let ys = integrate_dense(
        z5_rhs(wf.implicit()),
        x0,
        [r0.r1, r0.r2],
        &sorted,
        OdeOptions::default(),
    )?;
    let mut out = vec![r0; xs.len()];
    for (k, &i) in order.iter().enumerate() {
        out[i] = InvariantPair::new(ys[k][0], ys[k][1]);
    }
    Ok(out)
}

/// `Z5` on the isochrone, `n` samples uniform in `x` from its left to its
/// right edge. Valid for `T_int <= t* <= T_fin`.
pub fn z5_profile(wf: &Wavefield, t_star: f64, n: usize) -> Result<Vec<Sample>> {
    check_z5_time(wf, t_star)?;
    let p = wf.params();
    let tag = Tag::Zone(ZoneId::Z5);
    let (x0, r0) = z5_entry(wf, t_star)?;
    let (x1, r1) = z5_exit(wf, t_star)?;
    if x1 - x0 <= 1e-12 * x0.abs().max(1.0) {
        return Ok(vec![Sample::new(p, x0, r0, tag)?]);
    }
    let xs = linspace(x0, x1, n.max(2));
    let states = z5_states(wf, t_star, &xs)?;
    let end = states[states.len() - 1];
    let miss = (end.r2 - r1.r2).abs().max((end.r1 - r1.r1).abs());
    if miss > ENDPOINT_TOL {
        return Err(Error::EndpointMismatch {
            expected: r1.r2,
            reached: end.r2,
        });
    }
    for (i, w) in states.windows(2).enumerate() {
        if w[1].r1 < w[0].r1 - 1e-12 || w[1].r2 < w[0].r2 - 1e-12 {
            return Err(Error::IntegrationFailure(format!(
                "invariants not monotone along the Z5 isochrone near x = {}",
                xs[i + 1]
            )));
        }
    }
    xs.iter()
        .zip(states)
        .map(|(&x, r)| Sample::new(p, x, r, tag))
        .collect()
}

/// `x̄(ρ)` of the simple-wave zone on `side` at time `t*`: the foot
/// `x(ρ)` on the `Z5` edge plus transport at the characteristic speed.
pub fn simple_wave_x(h: &ImplicitSolution, side: Family, rho: f64, t_star: f64) -> Result<f64> {
    let r = pair_on(side, h.params(), rho);
    let speed = r.lambda(side);
    Ok(h.x(r)? + speed * (t_star - h.t(r)?))
}

/// `ρ` range of `Z9` (side one) or `Z10` (side two) at `t*`, ordered by
/// increasing `x`.
pub fn simple_wave_range(wf: &Wavefield, side: Family, t_star: f64) -> Result<(f64, f64)> {
    let p = wf.params();
    let e = wf.times();
    let h = wf.implicit();
    match side {
        Family::One => {
            if t_star < e.t3 - slack(e.t3) {
                return Err(Error::DomainError {
                    what: "Z9 isochrone",
                    value: t_star,
                    lo: e.t3,
                    hi: f64::INFINITY,
                });
            }
            let lo = if t_star <= e.t9 {
                p.q1
            } else {
                shock_state(wf, side, t_star)?.rho
            };
            let hi = if t_star < e.t_fin {
                rho_star(h, side, t_star.max(e.t3))?
            } else {
                p.mu1
            };
            Ok((lo, hi))
        }
        Family::Two => {
            if t_star < e.t6 - slack(e.t6) {
                return Err(Error::DomainError {
                    what: "Z10 isochrone",
                    value: t_star,
                    lo: e.t6,
                    hi: f64::INFINITY,
                });
            }
            let lo = if t_star < e.t_fin {
                rho_star(h, side, t_star.max(e.t6))?
            } else {
                p.mu2
            };
            let hi = if t_star <= e.t10 {
                p.q2
            } else {
                shock_state(wf, side, t_star)?.rho
            };
            Ok((lo, hi))
        }
    }
}

/// Parametric profile of `Z9` / `Z10` over `ρ ∈ [lo, hi]`, uniform in `ρ`.
fn simple_wave_samples(
    wf: &Wavefield,
    side: Family,
    t_star: f64,
    lo: f64,
    hi: f64,
    n: usize,
) -> Result<Vec<Sample>> {
    let p = wf.params();
    let h = wf.implicit();
    let tag = Tag::Zone(match side {
        Family::One => ZoneId::Z9,
        Family::Two => ZoneId::Z10,
    });
    let rhos = if hi - lo <= 1e-12 * hi.abs().max(1.0) {
        vec![lo]
    } else {
        linspace(lo, hi, n.max(2))
    };
    let mut out = Vec::with_capacity(rhos.len());
    for rho in rhos {
        let x = simple_wave_x(h, side, rho, t_star)?;
        if let Some(prev) = out.last().map(|s: &Sample| s.x) {
            if x <= prev {
                return Err(Error::NonMonotoneParametrization { at: rho });
            }
        }
        out.push(Sample::new(p, x, pair_on(side, p, rho), tag)?);
    }
    Ok(out)
}

/// `Z9` on the isochrone `t = t*`, `t* >= T_3`.
pub fn z9_profile(wf: &Wavefield, t_star: f64, n: usize) -> Result<Vec<Sample>> {
    let (lo, hi) = simple_wave_range(wf, Family::One, t_star)?;
    simple_wave_samples(wf, Family::One, t_star, lo, hi, n)
}

/// `Z10` on the isochrone `t = t*`, `t* >= T_6`.
pub fn z10_profile(wf: &Wavefield, t_star: f64, n: usize) -> Result<Vec<Sample>> {
    let (lo, hi) = simple_wave_range(wf, Family::Two, t_star)?;
    simple_wave_samples(wf, Family::Two, t_star, lo, hi, n)
}

/// Solves `x = x̄(ρ)` at time `t` inside the simple-wave zone on `side`;
/// returns `(τ, ρ)` where `τ = t(ρ)` is the time the characteristic left the
/// `Z5` edge.
pub fn tau_root(wf: &Wavefield, side: Family, x: f64, t: f64) -> Result<(f64, f64)> {
    let h = wf.implicit();
    let (lo, hi) = simple_wave_range(wf, side, t)?;
    let f = |rho: f64| simple_wave_x(h, side, rho, t).map_or(f64::NAN, |v| v - x);
    let (flo, fhi) = (f(lo), f(hi));
    let tol = 1e-12 * x.abs().max(1.0);
    let rho = if flo.abs() <= tol {
        lo
    } else if fhi.abs() <= tol {
        hi
    } else {
        brent(f, lo, hi, 1e-15)?
    };
    Ok((h.t(pair_on(side, h.params(), rho))?, rho))
}

/// State of the shock bounding `Z9` (side one, `Φ`) or `Z10` (side two, `Θ`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShockBoundaryState {
    pub beta: f64,
    /// Invariant on the simple-wave side of the shock.
    pub rho: f64,
    pub position: f64,
}

struct ShockSide<'a> {
    h: &'a ImplicitSolution,
    side: Family,
    /// Fixed invariant of the simple wave.
    fixed: f64,
    /// Limit value of `ρ` (the invariant on the far side of the shock).
    target: f64,
    range: (f64, f64),
    start: ShockBoundaryState,
    /// `μ1 μ2`
    speed_factor: f64,
}

impl<'a> ShockSide<'a> {
    fn new(wf: &'a Wavefield, side: Family) -> Self {
        let p = wf.params();
        let e = wf.times();
        let (fixed, target, range, start) = match side {
            Family::One => (
                p.mu2,
                p.mu1,
                (p.q1, p.mu1),
                ShockBoundaryState {
                    beta: e.t9,
                    rho: p.q1,
                    position: e.x9,
                },
            ),
            Family::Two => (
                p.mu1,
                p.mu2,
                (p.mu2, p.q2),
                ShockBoundaryState {
                    beta: e.t10,
                    rho: p.q2,
                    position: e.x10,
                },
            ),
        };
        Self {
            h: wf.implicit(),
            side,
            fixed,
            target,
            range,
            start,
            speed_factor: p.mu1 * p.mu2,
        }
    }

    fn pair(&self, rho: f64) -> InvariantPair {
        pair_on(self.side, self.h.params(), rho)
    }

    /// `(τ, dτ/dρ)` along the `Z5` edge.
    fn tau(&self, rho: f64) -> Result<(f64, f64)> {
        let r = self.pair(rho);
        let (t1, t2) = self.h.t_partials(r)?;
        let d = match self.side {
            Family::One => t1,
            Family::Two => t2,
        };
        Ok((self.h.t(r)?, d))
    }

    fn rhs(&self, beta: f64, y: &[f64; 2]) -> [f64; 2] {
        let rho = y[0];
        match self.tau(rho) {
            Ok((tau, dtau)) => {
                let den = dtau * (self.fixed - rho) + 2.0 * (beta - tau);
                [(self.target - rho) / den, self.speed_factor * rho]
            }
            Err(_) => [f64::NAN, f64::NAN],
        }
    }

    /// Constraint residual `x̄(ρ, β) - Φ` and its `ρ`-derivative.
    fn constraint(&self, beta: f64, rho: f64, pos: f64) -> Result<(f64, f64)> {
        let r = self.pair(rho);
        let (tau, dtau) = self.tau(rho)?;
        let speed = r.lambda(self.side);
        // x_{R1} = λ2 t_{R1} on side one, x_{R2} = λ1 t_{R2} on side two
        let dx = match self.side {
            Family::One => r.lambda2() * dtau,
            Family::Two => r.lambda1() * dtau,
        };
        let dspeed = 2.0 * rho * self.fixed;
        let g = self.h.x(r)? + speed * (beta - tau) - pos;
        let dg = dx + dspeed * (beta - tau) - speed * dtau;
        Ok((g, dg))
    }

    fn track(&self, targets: &[f64]) -> Result<Vec<ShockBoundaryState>> {
        let s0 = self.start;
        let f = |b: f64, y: &[f64; 2]| self.rhs(b, y);
        let mut it = Integrator::new(s0.beta, [s0.rho, s0.position], OdeOptions::default());
        let (lo, hi) = self.range;
        let mut out = Vec::with_capacity(targets.len());
        for &beta in targets {
            if beta < s0.beta - slack(s0.beta) || !beta.is_finite() {
                return Err(Error::DomainError {
                    what: "shock boundary",
                    value: beta,
                    lo: s0.beta,
                    hi: f64::INFINITY,
                });
            }
            let beta = beta.max(s0.beta);
            while it.t < beta {
                it.step_toward(&f, beta)?;
                let [rho, pos] = it.y;
                if !(rho >= lo - 1e-12 && rho <= hi + 1e-12) {
                    return Err(Error::DomainExit {
                        value: rho,
                        beta: it.t,
                        lo,
                        hi,
                    });
                }
                let (g, dg) = self.constraint(it.t, rho, pos)?;
                if g.abs() > SHOCK_DRIFT_TOL * pos.abs().max(1.0) {
                    let t = it.t;
                    it.reset(t, [rho - g / dg, pos]);
                }
            }
            out.push(ShockBoundaryState {
                beta,
                rho: it.y[0],
                position: it.y[1],
            });
        }
        Ok(out)
    }
}

/// Trajectory of the shock on `side` on `n + 1` equally spaced times from
/// its birth (`T_9` or `T_10`) to `t_end`.
pub fn shock_boundary(
    wf: &Wavefield,
    side: Family,
    t_end: f64,
    n: usize,
) -> Result<Vec<ShockBoundaryState>> {
    let s = ShockSide::new(wf, side);
    s.track(&linspace(s.start.beta, t_end, n.max(1) + 1))
}

/// Shock state at a single time `beta`.
pub fn shock_state(wf: &Wavefield, side: Family, beta: f64) -> Result<ShockBoundaryState> {
    Ok(ShockSide::new(wf, side).track(&[beta])?[0])
}

/// Constraint residual of a shock state; zero on the exact trajectory.
pub fn shock_constraint_residual(
    wf: &Wavefield,
    side: Family,
    s: &ShockBoundaryState,
) -> Result<f64> {
    Ok(ShockSide::new(wf, side)
        .constraint(s.beta, s.rho, s.position)?
        .0)
}

/// Complete profile at `t*` over an automatic window that contains every
/// finite zone boundary plus a margin.
pub fn profile_at(wf: &Wavefield, t_star: f64, n: usize) -> Result<Profile> {
    let spans = wf.layout(t_star)?;
    let lo = spans[0].x_right;
    let hi = spans[spans.len() - 1].x_left;
    let pad = 0.05 * (hi - lo).max(wf.params().width());
    profile_in(wf, t_star, n, (lo - pad, hi + pad))
}

/// Complete profile at `t*` restricted to `window`.
pub fn profile_in(wf: &Wavefield, t_star: f64, n: usize, window: (f64, f64)) -> Result<Profile> {
    if !(t_star > 0.0) {
        return Err(Error::InvalidInput(format!(
            "t* must be positive, got {t_star}"
        )));
    }
    let (wlo, whi) = window;
    if !(wlo < whi) {
        return Err(Error::InvalidInput(format!("empty window [{wlo}, {whi}]")));
    }
    let p = wf.params();
    let spans: Vec<_> = wf
        .layout(t_star)?
        .into_iter()
        .filter(|s| s.x_right >= wlo && s.x_left <= whi)
        .collect();
    let clipped: Vec<(f64, f64)> = spans
        .iter()
        .map(|s| (s.x_left.max(wlo), s.x_right.min(whi)))
        .collect();
    let degenerate = |(a, b): (f64, f64)| b - a <= 1e-12 * a.abs().max(1.0);
    let is_const = |z| matches!(wf.zone_content(z), ZoneContent::Constant(_));
    let varying_width: f64 = spans
        .iter()
        .zip(&clipped)
        .filter(|(s, &c)| !is_const(s.zone) && !degenerate(c))
        .map(|(_, &(a, b))| b - a)
        .sum();
    let budget = n.saturating_sub(2 * spans.len()).max(2 * spans.len()) as f64;

    let mut samples: Vec<Sample> = Vec::with_capacity(n + 2 * spans.len());
    for (span, &(a, b)) in spans.iter().zip(&clipped) {
        let tag = Tag::Zone(span.zone);
        let zone_n = if varying_width > 0.0 {
            ((budget * (b - a) / varying_width).round() as usize).max(2)
        } else {
            2
        };
        let part = if degenerate((a, b)) {
            let r = match span.zone {
                ZoneId::Z5 => z5_entry(wf, t_star)?.1,
                z => wf.zone_state(z, a, t_star)?,
            };
            vec![Sample::new(p, a, r, tag)?]
        } else {
            let full = a == span.x_left && b == span.x_right;
            match wf.zone_content(span.zone) {
                ZoneContent::Constant(r) => {
                    vec![Sample::new(p, a, r, tag)?, Sample::new(p, b, r, tag)?]
                }
                ZoneContent::FanTwo { .. } | ZoneContent::FanOne { .. } => linspace(a, b, zone_n)
                    .into_iter()
                    .map(|x| Sample::new(p, x, wf.zone_state(span.zone, x, t_star)?, tag))
                    .collect::<Result<_>>()?,
                ZoneContent::Interaction if full => z5_profile(wf, t_star, zone_n)?,
                ZoneContent::Interaction => {
                    let xs = linspace(a, b, zone_n);
                    let rs = z5_states(wf, t_star, &xs)?;
                    xs.into_iter()
                        .zip(rs)
                        .map(|(x, r)| Sample::new(p, x, r, tag))
                        .collect::<Result<_>>()?
                }
                ZoneContent::SimpleOne | ZoneContent::SimpleTwo => {
                    let side = if span.zone == ZoneId::Z9 {
                        Family::One
                    } else {
                        Family::Two
                    };
                    let (mut lo, mut hi) = simple_wave_range(wf, side, t_star)?;
                    if !full {
                        if a > span.x_left {
                            lo = tau_root(wf, side, a, t_star)?.1;
                        }
                        if b < span.x_right {
                            hi = tau_root(wf, side, b, t_star)?.1;
                        }
                    }
                    simple_wave_samples(wf, side, t_star, lo, hi, zone_n)?
                }
            }
        };
        let mut part = part;
        let tol = 1e-8 * a.abs().max(b.abs()).max(1.0);
        let n_part = part.len();
        for (i, target) in [(0, a), (n_part - 1, b)] {
            let s = &mut part[i];
            if (s.x - target).abs() > tol {
                return Err(Error::PhaseGap {
                    lo: s.x.min(target),
                    hi: s.x.max(target),
                });
            }
            s.x = target;
        }
        if let (Some(prev), Some(first)) = (samples.last(), part.first()) {
            if (first.x - prev.x).abs() > tol {
                return Err(Error::PhaseGap {
                    lo: prev.x,
                    hi: first.x,
                });
            }
        }
        samples.extend(part);
    }
    if samples.is_empty() {
        return Err(Error::PhaseGap { lo: wlo, hi: whi });
    }
    let profile = Profile::new(t_star, samples);
    profile.check_order()?;
    Ok(profile)
}
