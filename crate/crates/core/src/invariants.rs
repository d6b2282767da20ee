//! State representations of the two-component mixture and the algebra
//! between them: concentrations `(u1, u2)`, Riemann invariants `(R1, R2)`,
//! characteristic speeds, and the jump conditions across a shock.
//!
//! Speeds are `λ1 = R1² R2` and `λ2 = R1 R2²`. They are the conservative-form
//! speeds scaled by `mu1 * mu2`; every time in this crate is measured in that
//! scaled clock.

use serde::{Deserialize, Serialize};

use crate::error::{Constraint, Error, Result};

/// A problem instance: mobilities, the invariant values on the initial
/// plateau `(x1, x2)`, and the plateau endpoints.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixtureParams {
    pub mu1: f64,
    pub mu2: f64,
    pub q1: f64,
    pub q2: f64,
    pub x1: f64,
    pub x2: f64,
}

impl MixtureParams {
    pub fn new(mu1: f64, mu2: f64, q1: f64, q2: f64, x1: f64, x2: f64) -> Result<Self> {
        validate_params(Self {
            mu1,
            mu2,
            q1,
            q2,
            x1,
            x2,
        })
    }

    /// The reference instance `q1 = 2, mu1 = 5, mu2 = 8, q2 = 10` on `(-1, 1)`.
    pub fn reference() -> Self {
        Self {
            mu1: 5.0,
            mu2: 8.0,
            q1: 2.0,
            q2: 10.0,
            x1: -1.0,
            x2: 1.0,
        }
    }

    /// Invariants of the initial plateau `(q1, q2)`.
    pub fn plateau(&self) -> InvariantPair {
        InvariantPair::new(self.q1, self.q2)
    }

    /// Invariants of the surrounding pure electrolyte `(mu1, mu2)`.
    pub fn background(&self) -> InvariantPair {
        InvariantPair::new(self.mu1, self.mu2)
    }

    pub fn width(&self) -> f64 {
        self.x2 - self.x1
    }
}

pub fn validate_params(p: MixtureParams) -> Result<MixtureParams> {
    let all = [p.mu1, p.mu2, p.q1, p.q2, p.x1, p.x2];
    if all.iter().any(|v| !v.is_finite()) {
        return Err(Error::OrderingViolation(Constraint::Finite));
    }
    let checks = [
        (0.0 < p.q1, Constraint::Q1Positive),
        (p.q1 < p.mu1, Constraint::Q1BelowMu1),
        (p.mu1 < p.mu2, Constraint::Mu1BelowMu2),
        (p.mu2 < p.q2, Constraint::Mu2BelowQ2),
        (p.x1 < p.x2, Constraint::X1BelowX2),
    ];
    match checks.iter().find(|(ok, _)| !ok) {
        Some((_, which)) => Err(Error::OrderingViolation(*which)),
        None => Ok(p),
    }
}

/// Wave family index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    One,
    Two,
}

impl Family {
    pub fn index(self) -> usize {
        match self {
            Family::One => 1,
            Family::Two => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantPair {
    pub r1: f64,
    pub r2: f64,
}

impl InvariantPair {
    pub const fn new(r1: f64, r2: f64) -> Self {
        Self { r1, r2 }
    }

    pub fn lambda1(&self) -> f64 {
        self.r1 * self.r1 * self.r2
    }

    pub fn lambda2(&self) -> f64 {
        self.r1 * self.r2 * self.r2
    }

    pub fn lambda(&self, k: Family) -> f64 {
        match k {
            Family::One => self.lambda1(),
            Family::Two => self.lambda2(),
        }
    }

    pub fn max_abs(&self, other: &Self) -> f64 {
        (self.r1 - other.r1).abs().max((self.r2 - other.r2).abs())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationPair {
    pub u1: f64,
    pub u2: f64,
}

impl ConcentrationPair {
    pub const fn new(u1: f64, u2: f64) -> Self {
        Self { u1, u2 }
    }

    pub fn total(&self) -> f64 {
        self.u1 + self.u2
    }

    /// Electric field intensity `E = 1 / (1 + s)`.
    pub fn field(&self) -> f64 {
        1.0 / (1.0 + self.total())
    }

    pub fn get(&self, k: Family) -> f64 {
        match k {
            Family::One => self.u1,
            Family::Two => self.u2,
        }
    }
}

/// Characteristic speed of family `k`.
pub fn lambda_k(k: Family, r: InvariantPair) -> f64 {
    r.lambda(k)
}

pub fn invariants_to_concentrations(
    p: &MixtureParams,
    r: InvariantPair,
) -> Result<ConcentrationPair> {
    concentrations_for(p.mu1, p.mu2, r)
}

/// Same map with the mobilities given directly.
pub fn concentrations_for(m1: f64, m2: f64, r: InvariantPair) -> Result<ConcentrationPair> {
    let prod = r.r1 * r.r2;
    if prod == 0.0 {
        return Err(Error::DivisionByZero("invariants_to_concentrations"));
    }
    let u1 = m2 * (r.r1 - m1) * (r.r2 - m1) / (prod * (m1 - m2));
    let u2 = m1 * (r.r1 - m2) * (r.r2 - m2) / (prod * (m2 - m1));
    Ok(ConcentrationPair { u1, u2 })
}

/// Inverse map: the two roots of
/// `(1 + s) R² - (mu1 + mu2 + u1 mu2 + u2 mu1) R + mu1 mu2`, smaller root first.
pub fn concentrations_to_invariants(
    p: &MixtureParams,
    u: ConcentrationPair,
) -> Result<InvariantPair> {
    let (m1, m2) = (p.mu1, p.mu2);
    let a = 1.0 + u.u1 + u.u2;
    if a.abs() <= f64::EPSILON {
        return Err(Error::DegenerateLeadingCoefficient(a));
    }
    let b = m1 + m2 + u.u1 * m2 + u.u2 * m1;
    let c = m1 * m2;
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return Err(Error::ComplexRoots(disc));
    }
    // cancellation-free pair: q = (b + sign(b) sqrt(disc)) / 2
    let q = 0.5 * (b + disc.sqrt().copysign(b));
    let (ra, rb) = (q / a, c / q);
    Ok(if ra <= rb {
        InvariantPair::new(ra, rb)
    } else {
        InvariantPair::new(rb, ra)
    })
}

/// Rankine–Hugoniot residuals of a discontinuity moving at speed `d`, one per
/// conservation law; both vanish for an exact shock. Jumps are right minus left.
pub fn rh_residual(
    p: &MixtureParams,
    d: f64,
    left: InvariantPair,
    right: InvariantPair,
) -> Result<[f64; 2]> {
    if left.r1 * left.r2 == 0.0 || right.r1 * right.r2 == 0.0 {
        return Err(Error::DivisionByZero("rh_residual"));
    }
    let one = |mu: f64| {
        let flux = |r: &InvariantPair| (mu - r.r1) * (mu - r.r2);
        let dens = |r: &InvariantPair| flux(r) / (mu * r.r1 * r.r2);
        d * (dens(&right) - dens(&left)) - (flux(&right) - flux(&left))
    };
    Ok([one(p.mu1), one(p.mu2)])
}

/// Lax admissibility of a `k`-shock: `λk(left) > d > λk(right)`.
pub fn lax_admissible(k: Family, d: f64, left: InvariantPair, right: InvariantPair) -> bool {
    left.lambda(k) > d && d > right.lambda(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p() -> MixtureParams {
        MixtureParams::reference()
    }

    #[test]
    fn reference_params_are_valid() {
        assert_eq!(validate_params(p()).unwrap(), p());
    }

    #[test]
    fn equality_breaks_ordering() {
        let bad = MixtureParams { q1: 5.0, ..p() };
        assert_eq!(
            validate_params(bad),
            Err(Error::OrderingViolation(Constraint::Q1BelowMu1))
        );
        let swapped = MixtureParams {
            x1: 1.0,
            x2: -1.0,
            ..p()
        };
        assert_eq!(
            validate_params(swapped),
            Err(Error::OrderingViolation(Constraint::X1BelowX2))
        );
        let neg = MixtureParams { q1: -1.0, ..p() };
        assert_eq!(
            validate_params(neg),
            Err(Error::OrderingViolation(Constraint::Q1Positive))
        );
        let nan = MixtureParams {
            q2: f64::NAN,
            ..p()
        };
        assert!(validate_params(nan).is_err());
    }

    #[test]
    fn eigenvalues() {
        let r = InvariantPair::new(2.0, 10.0);
        assert_eq!(lambda_k(Family::One, r), 40.0);
        assert_eq!(lambda_k(Family::Two, r), 200.0);
        assert_eq!(InvariantPair::new(5.0, 8.0).lambda1(), 200.0);
    }

    #[test]
    fn concentrations_of_reference_states() {
        let u = invariants_to_concentrations(&p(), InvariantPair::new(5.0, 8.0)).unwrap();
        assert_eq!((u.u1, u.u2), (0.0, 0.0));
        // hand substitution: u1 = 8(-3)(5)/(20(-3)) = 2, u2 = 5(-6)(2)/(20*3) = -1
        let u = invariants_to_concentrations(&p(), InvariantPair::new(2.0, 10.0)).unwrap();
        assert!((u.u1 - 2.0).abs() < 1e-15 && (u.u2 + 1.0).abs() < 1e-15);
        let u = invariants_to_concentrations(&p(), InvariantPair::new(2.0, 8.0)).unwrap();
        assert!((u.u1 - 1.5).abs() < 1e-15 && u.u2.abs() < 1e-15);
        assert!(invariants_to_concentrations(&p(), InvariantPair::new(0.0, 8.0)).is_err());
    }

    #[test]
    fn invariants_of_reference_states() {
        let r = concentrations_to_invariants(&p(), ConcentrationPair::new(0.0, 0.0)).unwrap();
        assert!((r.r1 - 5.0).abs() < 1e-14 && (r.r2 - 8.0).abs() < 1e-14);
        let r = concentrations_to_invariants(&p(), ConcentrationPair::new(2.0, -1.0)).unwrap();
        assert!((r.r1 - 2.0).abs() < 1e-14 && (r.r2 - 10.0).abs() < 1e-14);
        let r = concentrations_to_invariants(&p(), ConcentrationPair::new(1.5, 0.0)).unwrap();
        assert!((r.r1 - 2.0).abs() < 1e-14 && (r.r2 - 8.0).abs() < 1e-14);
    }

    #[test]
    fn inverse_map_errors() {
        assert!(matches!(
            concentrations_to_invariants(&p(), ConcentrationPair::new(-0.5, -0.5)),
            Err(Error::DegenerateLeadingCoefficient(_))
        ));
        // a = 2, b = 16.5, 4ac = 320 > b^2
        assert!(matches!(
            concentrations_to_invariants(&p(), ConcentrationPair::new(-0.5, 1.5)),
            Err(Error::ComplexRoots(_))
        ));
    }

    #[test]
    fn rh_residual_of_initial_shocks() {
        let res = rh_residual(
            &p(),
            80.0,
            InvariantPair::new(5.0, 8.0),
            InvariantPair::new(2.0, 8.0),
        )
        .unwrap();
        assert!(res[0].abs() < 1e-12 && res[1].abs() < 1e-12);
        let res = rh_residual(
            &p(),
            400.0,
            InvariantPair::new(5.0, 10.0),
            InvariantPair::new(5.0, 8.0),
        )
        .unwrap();
        assert!(res[0].abs() < 1e-12 && res[1].abs() < 1e-12);
        let s = InvariantPair::new(3.0, 9.0);
        assert_eq!(rh_residual(&p(), 123.0, s, s).unwrap(), [0.0, 0.0]);
        // a wrong speed leaves a residual
        let res = rh_residual(
            &p(),
            81.0,
            InvariantPair::new(5.0, 8.0),
            InvariantPair::new(2.0, 8.0),
        )
        .unwrap();
        assert!(res[0].abs() > 1e-3);
    }

    #[test]
    fn lax_conditions_on_initial_shocks() {
        assert!(lax_admissible(
            Family::One,
            80.0,
            InvariantPair::new(5.0, 8.0),
            InvariantPair::new(2.0, 8.0)
        ));
        assert!(lax_admissible(
            Family::Two,
            400.0,
            InvariantPair::new(5.0, 10.0),
            InvariantPair::new(5.0, 8.0)
        ));
        // the reversed jump would be an expansion shock
        assert!(!lax_admissible(
            Family::One,
            80.0,
            InvariantPair::new(2.0, 8.0),
            InvariantPair::new(5.0, 8.0)
        ));
    }

    #[test]
    fn grid_properties_on_reachable_rectangle() {
        let p = p();
        let n = 60;
        let h = 1e-6;
        for i in 0..=n {
            for j in 0..=n {
                let r1 = p.q1 + (p.mu1 - p.q1) * i as f64 / n as f64;
                let r2 = p.mu2 + (p.q2 - p.mu2) * j as f64 / n as f64;
                let r = InvariantPair::new(r1, r2);
                assert!(r.lambda1() < r.lambda2());
                let u = invariants_to_concentrations(&p, r).unwrap();
                assert!(u.total() > -1.0);
                let d1 = (InvariantPair::new(r1 + h, r2).lambda1()
                    - InvariantPair::new(r1 - h, r2).lambda1())
                    / (2.0 * h);
                let d2 = (InvariantPair::new(r1, r2 + h).lambda2()
                    - InvariantPair::new(r1, r2 - h).lambda2())
                    / (2.0 * h);
                assert!(d1 > 0.0 && d2 > 0.0);
            }
        }
    }

    proptest! {
        #[test]
        fn round_trip(t1 in 0.0f64..=1.0, t2 in 0.0f64..=1.0) {
            let p = p();
            let r = InvariantPair::new(p.q1 + t1 * (p.mu1 - p.q1), p.mu2 + t2 * (p.q2 - p.mu2));
            let u = invariants_to_concentrations(&p, r).unwrap();
            let back = concentrations_to_invariants(&p, u).unwrap();
            prop_assert!((back.r1 - r.r1).abs() <= 1e-12 * r.r1);
            prop_assert!((back.r2 - r.r2).abs() <= 1e-12 * r.r2);
        }
    }
}
