//! Implicit solution of the rarefaction–rarefaction interaction in the
//! hodograph plane.
//!
//! Exchanging dependent and independent variables turns the quasilinear system
//! into the linear pair `x_{R2} = λ1 t_{R2}`, `x_{R1} = λ2 t_{R1}`, whose
//! compatibility condition is
//!
//! ```text
//! t_{R1 R2} + 2 (t_{R1} - t_{R2}) / (R2 - R1) = 0.
//! ```
//!
//! That equation has a closed-form Riemann–Green function, so the Goursat
//! problem with data on the two characteristics `R1 = q1`, `R2 = q2` is
//! solved exactly by [`ImplicitSolution::t`] and [`ImplicitSolution::x`].

use crate::error::{Error, Result};
use crate::invariants::{InvariantPair, MixtureParams};
use crate::numerics::quadrature;

/// Absolute tolerance for the boundary-data quadratures.
pub const QUADRATURE_TOL: f64 = 1e-10;

fn guard(r1: f64, r2: f64) -> Result<f64> {
    let d = r1 - r2;
    if d.abs() < 1e-9 * 1f64.max(r1.abs()).max(r2.abs()) || !d.is_finite() {
        return Err(Error::CoincidentInvariants { r1, r2 });
    }
    Ok(d)
}

/// Riemann–Green function `V(r1, r2 | R1, R2)`; equals 1 when the two points
/// coincide.
pub fn riemann_green(r1: f64, r2: f64, big_r1: f64, big_r2: f64) -> Result<f64> {
    let d = guard(big_r1, big_r2)?;
    Ok(
        ((big_r1 + big_r2) * (r1 + r2) - 2.0 * (big_r1 * big_r2 + r1 * r2)) * (r1 - r2)
            / (d * d * d),
    )
}

/// Closed-form `t(R1, R2)` and `x(R1, R2)` for a mixture instance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ImplicitSolution {
    params: MixtureParams,
    /// `(x2 - x1) / (q1 q2)`
    scale: f64,
    t_int: f64,
}

impl ImplicitSolution {
    pub fn new(params: &MixtureParams) -> Self {
        let scale = params.width() / (params.q1 * params.q2);
        Self {
            params: *params,
            scale,
            t_int: scale / (params.q2 - params.q1),
        }
    }

    pub fn params(&self) -> &MixtureParams {
        &self.params
    }

    /// Time at which the two rarefaction fronts first meet.
    pub fn t_int(&self) -> f64 {
        self.t_int
    }

    fn numerator(&self, r: InvariantPair) -> f64 {
        let (q1, q2) = (self.params.q1, self.params.q2);
        2.0 * r.r1 * r.r2 + 2.0 * q1 * q2 - (q1 + q2) * (r.r1 + r.r2)
    }

    /// `t(R1, R2) = T_int V(q1, q2 | R1, R2)`.
    pub fn t(&self, r: InvariantPair) -> Result<f64> {
        let d = guard(r.r1, r.r2)?;
        Ok(self.scale * self.numerator(r) / (d * d * d))
    }

    pub fn x(&self, r: InvariantPair) -> Result<f64> {
        let d = guard(r.r1, r.r2)?;
        let d3 = d * d * d;
        let MixtureParams { q1, q2, x1, x2, .. } = self.params;
        let (a, b) = (r.r1, r.r2);
        let p = a * b;
        let first = (x2 - x1) * p * p * (a + b - 2.0 * (q1 + q2)) / (q1 * q2 * d3);
        let second = (x1 * a * a * a - x2 * b * b * b + 3.0 * p * (b * x2 - a * x1)) / d3;
        Ok(first + second)
    }

    /// `(∂t/∂R1, ∂t/∂R2)`.
    pub fn t_partials(&self, r: InvariantPair) -> Result<(f64, f64)> {
        let d = guard(r.r1, r.r2)?;
        let s = self.params.q1 + self.params.q2;
        let n = self.numerator(r);
        let d4 = d * d * d * d;
        let dr1 = self.scale * ((2.0 * r.r2 - s) * d - 3.0 * n) / d4;
        let dr2 = self.scale * ((2.0 * r.r1 - s) * d + 3.0 * n) / d4;
        Ok((dr1, dr2))
    }

    /// `(∂x/∂R1, ∂x/∂R2)` through the hodograph relations.
    pub fn x_partials(&self, r: InvariantPair) -> Result<(f64, f64)> {
        let (t1, t2) = self.t_partials(r)?;
        Ok((r.lambda2() * t1, r.lambda1() * t2))
    }

    /// Characteristic data of the Goursat problem: `t` on `R1 = q1` and on
    /// `R2 = q2`, cornered at `(q1, q2, T_int)`.
    pub fn boundary_data(&self) -> CharacteristicBoundaryData {
        let MixtureParams { q1, q2, .. } = self.params;
        let t_int = self.t_int;
        CharacteristicBoundaryData::new(
            InvariantPair::new(q1, q2),
            t_int,
            move |r1| t_int * (q1 - q2).powi(2) / (r1 - q2).powi(2),
            move |r2| t_int * (q2 - q1).powi(2) / (r2 - q1).powi(2),
        )
        .expect("closed-form boundary data agree at the corner")
    }
}

type Edge = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// Values of `t` on two intersecting characteristics `R2 = R2_0` and
/// `R1 = R1_0` that meet at `corner` with time `t0`.
pub struct CharacteristicBoundaryData {
    corner: InvariantPair,
    t0: f64,
    /// `R1 ↦ t(R1, R2_0)`
    along_r1: Edge,
    /// `R2 ↦ t(R1_0, R2)`
    along_r2: Edge,
}

impl CharacteristicBoundaryData {
    pub fn new(
        corner: InvariantPair,
        t0: f64,
        along_r1: impl Fn(f64) -> f64 + Send + Sync + 'static,
        along_r2: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let tol = 1e-12 * t0.abs().max(1.0);
        let (a, b) = (along_r1(corner.r1), along_r2(corner.r2));
        if (a - t0).abs() > tol || (b - t0).abs() > tol {
            return Err(Error::InvalidInput(format!(
                "boundary data disagree at the corner: {a} and {b} vs t0 = {t0}"
            )));
        }
        Ok(Self {
            corner,
            t0,
            along_r1: Box::new(along_r1),
            along_r2: Box::new(along_r2),
        })
    }

    /// Both characteristics carry the same constant time.
    pub fn constant(corner: InvariantPair, t0: f64) -> Self {
        Self::new(corner, t0, move |_| t0, move |_| t0).expect("constant data agree")
    }

    pub fn corner(&self) -> InvariantPair {
        self.corner
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }
}

/// Riemann's formula for the Goursat problem: evaluates `t(R)` from the
/// characteristic data, with the two edge integrals done by adaptive
/// quadrature.
pub fn goursat_solution(data: &CharacteristicBoundaryData, r: InvariantPair) -> Result<f64> {
    let (a0, b0) = (data.corner.r1, data.corner.r2);
    let d = guard(r.r1, r.r2)?;
    let (d2, d3) = (d * d, d * d * d);
    let h1 = quadrature::integrate(&data.along_r1, a0, r.r1, QUADRATURE_TOL)?;
    let h2 = quadrature::integrate(&data.along_r2, b0, r.r2, QUADRATURE_TOL)?;
    let v = riemann_green(a0, b0, r.r1, r.r2)?;
    Ok(-v * data.t0 + 2.0 * (r.r1 - a0) * (r.r2 - a0) / d3 * h2
        - 2.0 * (r.r1 - b0) * (r.r2 - b0) / d3 * h1
        + (r.r1 - b0).powi(2) / d2 * (data.along_r1)(r.r1)
        + (r.r2 - a0).powi(2) / d2 * (data.along_r2)(r.r2))
}
