//! First-order finite-volume solver for the conservative form, used as an
//! independent check of the exact solution.
//!
//! The flux is `F_k(u) = mu1 mu2 mu_k u_k / (1 + s)`, so the wave speeds are
//! `R1^2 R2` and `R1 R2^2`, on the same clock as [`crate::wavefield`].
//! Interface fluxes use the wave-speed bounds from `lambda1` and `lambda2`,
//! either as HLL (default) or as local Lax-Friedrichs (Rusanov); boundaries
//! copy the edge cell.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::invariants::{concentrations_to_invariants, ConcentrationPair, MixtureParams};
use crate::par::Execution;
use crate::profile::{Profile, Sample, Tag};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub x_min: f64,
    pub x_max: f64,
    pub n_cells: usize,
    pub cfl: f64,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n_cells: usize, cfl: f64) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite() && x_min < x_max) {
            return Err(Error::InvalidInput(format!(
                "bad grid range [{x_min}, {x_max}]"
            )));
        }
        if n_cells == 0 {
            return Err(Error::InvalidInput("grid needs at least one cell".into()));
        }
        if !(cfl > 0.0 && cfl < 1.0) {
            return Err(Error::DomainError {
                what: "cfl",
                value: cfl,
                lo: 0.0,
                hi: 1.0,
            });
        }
        Ok(Self {
            x_min,
            x_max,
            n_cells,
            cfl,
        })
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.n_cells as f64
    }

    pub fn center(&self, i: usize) -> f64 {
        self.x_min + (i as f64 + 0.5) * self.dx()
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.n_cells).map(|i| self.center(i)).collect()
    }
}

/// Interface flux of the scheme. Both are first order and monotone.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NumericalFlux {
    /// Bounds `min lambda1` and `max lambda2` of the two neighbours. With all
    /// speeds positive this is the upwind flux.
    #[default]
    Hll,
    /// Single bound `max lambda2`.
    Rusanov,
}

impl NumericalFlux {
    fn eval(self, l: &[f64; 4], r: &[f64; 4], du: [f64; 2]) -> [f64; 2] {
        match self {
            NumericalFlux::Rusanov => {
                let a = l[3].abs().max(r[3].abs()).max(l[2].abs()).max(r[2].abs());
                [
                    0.5 * (l[0] + r[0]) - 0.5 * a * du[0],
                    0.5 * (l[1] + r[1]) - 0.5 * a * du[1],
                ]
            }
            NumericalFlux::Hll => {
                let s_l = l[2].min(r[2]);
                let s_r = l[3].max(r[3]);
                if s_l >= 0.0 {
                    [l[0], l[1]]
                } else if s_r <= 0.0 {
                    [r[0], r[1]]
                } else {
                    let w = 1.0 / (s_r - s_l);
                    [
                        w * (s_r * l[0] - s_l * r[0] + s_l * s_r * du[0]),
                        w * (s_r * l[1] - s_l * r[1] + s_l * s_r * du[1]),
                    ]
                }
            }
        }
    }
}

/// Cell averages at time `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct FvField {
    pub grid: Grid1D,
    pub t: f64,
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
    pub steps: usize,
}

impl FvField {
    /// `sum u_k dx` per component.
    pub fn masses(&self) -> [f64; 2] {
        let dx = self.grid.dx();
        [
            self.u1.iter().sum::<f64>() * dx,
            self.u2.iter().sum::<f64>() * dx,
        ]
    }

    pub fn to_profile(&self, p: &MixtureParams) -> Result<Profile> {
        let samples = (0..self.grid.n_cells)
            .map(|i| {
                let u = ConcentrationPair::new(self.u1[i], self.u2[i]);
                let r = concentrations_to_invariants(p, u)?;
                Sample::new(p, self.grid.center(i), r, Tag::Fv)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Profile::new(self.t, samples))
    }

    fn component(&self, k: usize) -> &[f64] {
        if k == 0 {
            &self.u1
        } else {
            &self.u2
        }
    }

    /// Interface position of the steepest jump `|du1| + |du2|` whose
    /// interface lies in `range`.
    pub fn steepest_front(&self, range: (f64, f64)) -> Option<f64> {
        let (dx, x0) = (self.grid.dx(), self.grid.x_min);
        (1..self.grid.n_cells)
            .map(|i| (x0 + i as f64 * dx, i))
            .filter(|(x, _)| (range.0..=range.1).contains(x))
            .map(|(x, i)| {
                let jump =
                    (self.u1[i] - self.u1[i - 1]).abs() + (self.u2[i] - self.u2[i - 1]).abs();
                (x, jump)
            })
            .max_by(|p, q| p.1.total_cmp(&q.1))
            .map(|(x, _)| x)
    }

    /// Largest `|du_k/dx|` between neighbouring cells with both centres in
    /// `range`; `k` is 0 or 1.
    pub fn max_gradient(&self, k: usize, range: (f64, f64)) -> f64 {
        let u = self.component(k);
        let dx = self.grid.dx();
        (1..self.grid.n_cells)
            .filter(|&i| range.0 <= self.grid.center(i - 1) && self.grid.center(i) <= range.1)
            .map(|i| (u[i] - u[i - 1]).abs() / dx)
            .fold(0.0, f64::max)
    }
}

/// Exact cell averages of the plateau data.
pub fn initial_field(p: &MixtureParams, grid: Grid1D) -> Result<FvField> {
    let plateau = crate::invariants::invariants_to_concentrations(p, p.plateau())?;
    let dx = grid.dx();
    let (u1, u2) = (0..grid.n_cells)
        .map(|i| {
            let lo = grid.x_min + i as f64 * dx;
            let w = ((lo + dx).min(p.x2) - lo.max(p.x1)).max(0.0) / dx;
            (w * plateau.u1, w * plateau.u2)
        })
        .unzip();
    Ok(FvField {
        grid,
        t: 0.0,
        u1,
        u2,
        steps: 0,
    })
}

/// Flux pair and the two wave speeds of one cell.
fn cell_flux(p: &MixtureParams, i: usize, u1: f64, u2: f64) -> Result<[f64; 4]> {
    let one_plus_s = 1.0 + u1 + u2;
    if !(one_plus_s > 0.0) {
        return Err(Error::NonPhysicalState {
            cell: i,
            one_plus_s,
        });
    }
    let r = concentrations_to_invariants(p, ConcentrationPair::new(u1, u2))?;
    let m = p.mu1 * p.mu2 / one_plus_s;
    Ok([m * p.mu1 * u1, m * p.mu2 * u2, r.lambda1(), r.lambda2()])
}

/// Advances `field` to `t_end`.
pub fn fv_advance(
    p: &MixtureParams,
    mut field: FvField,
    t_end: f64,
    flux_kind: NumericalFlux,
    exec: Execution,
) -> Result<FvField> {
    let grid = field.grid;
    let n = grid.n_cells;
    let dx = grid.dx();
    let mut cells = vec![[0.0; 4]; n];
    let mut flux = vec![[0.0; 2]; n + 1];
    while field.t < t_end {
        let (u1, u2) = (&field.u1, &field.u2);
        let computed = exec.map_range(n, |i| cell_flux(p, i, u1[i], u2[i]));
        for (dst, c) in cells.iter_mut().zip(computed) {
            *dst = c?;
        }
        let a_max = cells
            .iter()
            .fold(0.0_f64, |m, c| m.max(c[2].abs()).max(c[3].abs()));
        let limit = grid.cfl * dx / a_max;
        let dt = limit.min(t_end - field.t);
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::CflViolation { dt, limit });
        }
        let cells_ref = &cells;
        exec.fill(&mut flux, |j| {
            let l = j.saturating_sub(1);
            let r = j.min(n - 1);
            flux_kind.eval(&cells_ref[l], &cells_ref[r], [u1[r] - u1[l], u2[r] - u2[l]])
        });
        let k = dt / dx;
        let flux_ref = &flux;
        let next1 = exec.map_range(n, |i| u1[i] - k * (flux_ref[i + 1][0] - flux_ref[i][0]));
        let next2 = exec.map_range(n, |i| u2[i] - k * (flux_ref[i + 1][1] - flux_ref[i][1]));
        field.u1 = next1;
        field.u2 = next2;
        field.t = if dt == t_end - field.t {
            t_end
        } else {
            field.t + dt
        };
        field.steps += 1;
    }
    Ok(field)
}

/// Cell averages of the plateau problem at `t_end`, default flux.
pub fn fv_run(p: &MixtureParams, grid: Grid1D, t_end: f64, exec: Execution) -> Result<FvField> {
    fv_run_with(p, grid, t_end, NumericalFlux::default(), exec)
}

pub fn fv_run_with(
    p: &MixtureParams,
    grid: Grid1D,
    t_end: f64,
    flux: NumericalFlux,
    exec: Execution,
) -> Result<FvField> {
    let p = crate::invariants::validate_params(*p)?;
    fv_advance(&p, initial_field(&p, grid)?, t_end, flux, exec)
}

/// `sum |u_k - u_k^exact(x_i)| dx` over cells whose centres the profile
/// covers.
pub fn l1_error(field: &FvField, exact: &Profile) -> Result<[f64; 2]> {
    let (lo, hi) = exact.x_range().ok_or(Error::DomainMismatch)?;
    let dx = field.grid.dx();
    let mut err = [0.0, 0.0];
    let mut used = 0;
    for i in 0..field.grid.n_cells {
        let x = field.grid.center(i);
        if x < lo || x > hi {
            continue;
        }
        let (_, u) = exact.sample_at(x).ok_or(Error::DomainMismatch)?;
        err[0] += (field.u1[i] - u.u1).abs() * dx;
        err[1] += (field.u2[i] - u.u2).abs() * dx;
        used += 1;
    }
    if used == 0 {
        return Err(Error::DomainMismatch);
    }
    Ok(err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariants::{Family, InvariantPair};
    use crate::isochrone::profile_in;
    use crate::wavefield::{CurveId, Wavefield};

    fn grid(n: usize) -> Grid1D {
        Grid1D::new(-2.0, 6.0, n, 0.45).unwrap()
    }

    #[test]
    fn constant_state_is_steady() {
        let p = MixtureParams::reference();
        let g = grid(200);
        let f = FvField {
            grid: g,
            t: 0.0,
            u1: vec![0.7; 200],
            u2: vec![-0.2; 200],
            steps: 0,
        };
        let out = fv_advance(&p, f, 0.005, NumericalFlux::Rusanov, Execution::Sequential).unwrap();
        assert!(out.steps > 1);
        assert!(out.u1.iter().all(|v| (v - 0.7).abs() < 1e-14));
        assert!(out.u2.iter().all(|v| (v + 0.2).abs() < 1e-14));
        let f = FvField {
            t: 0.0,
            steps: 0,
            ..out
        };
        let out = fv_advance(&p, f, 0.005, NumericalFlux::Hll, Execution::Sequential).unwrap();
        assert!(out.u1.iter().all(|v| (v - 0.7).abs() < 1e-14));
    }

    #[test]
    fn initial_projection() {
        let p = MixtureParams::reference();
        let g = Grid1D::new(-2.0, 2.0, 3, 0.45).unwrap();
        let f = initial_field(&p, g).unwrap();
        // the outer cells overlap the plateau by a quarter
        assert!((f.u1[0] - 0.5).abs() < 1e-15 && (f.u2[2] + 0.25).abs() < 1e-15);
        assert_eq!(f.u1[1], 2.0);
        let m = f.masses();
        assert!((m[0] - 4.0).abs() < 1e-14 && (m[1] + 2.0).abs() < 1e-14);
    }

    #[test]
    fn conserves_mass() {
        let p = MixtureParams::reference();
        let f = fv_run(&p, grid(800), 0.01, Execution::Sequential).unwrap();
        let m = f.masses();
        assert!((m[0] - 4.0).abs() < 1e-12 * 4.0);
        assert!((m[1] + 2.0).abs() < 1e-12 * 2.0);
    }

    #[test]
    fn sequential_equals_parallel() {
        let p = MixtureParams::reference();
        let a = fv_run(&p, grid(300), 0.004, Execution::Sequential).unwrap();
        let b = fv_run(&p, grid(300), 0.004, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn l1_of_identical_and_shifted() {
        let p = MixtureParams::reference();
        let g = Grid1D::new(0.0, 1.0, 100, 0.45).unwrap();
        let a = InvariantPair::new(p.q1, p.q2);
        let b = p.background();
        let dx = g.dx();
        let step = |shift: f64| {
            let s = g
                .centers()
                .into_iter()
                .map(|x| Sample::new(&p, x, if x < 0.5 + shift { a } else { b }, Tag::Fv).unwrap())
                .collect();
            Profile::new(0.0, s)
        };
        let exact = step(0.0);
        let field = FvField {
            grid: g,
            t: 0.0,
            u1: exact.samples.iter().map(|s| s.u.u1).collect(),
            u2: exact.samples.iter().map(|s| s.u.u2).collect(),
            steps: 0,
        };
        assert_eq!(l1_error(&field, &exact).unwrap(), [0.0, 0.0]);
        let e = l1_error(&field, &step(dx)).unwrap();
        assert!((e[0] - 2.0 * dx).abs() < 1e-12 && (e[1] - dx).abs() < 1e-12);
        let far = Profile::new(0.0, vec![Sample::new(&p, 5.0, a, Tag::Fv).unwrap()]);
        assert!(matches!(l1_error(&field, &far), Err(Error::DomainMismatch)));
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid1D::new(1.0, 0.0, 10, 0.45).is_err());
        assert!(Grid1D::new(0.0, 1.0, 0, 0.45).is_err());
        assert!(Grid1D::new(0.0, 1.0, 10, 1.5).is_err());
    }

    #[test]
    fn non_physical_state_is_reported() {
        let p = MixtureParams::reference();
        let g = grid(10);
        let mut f = initial_field(&p, g).unwrap();
        f.u1[3] = -2.0;
        let e = fv_advance(&p, f, 0.001, NumericalFlux::Hll, Execution::Sequential).unwrap_err();
        assert!(matches!(e, Error::NonPhysicalState { cell: 3, .. }));
    }

    #[test]
    fn weak_fronts_are_smoothed() {
        let p = MixtureParams::reference();
        let wf = Wavefield::new(p).unwrap();
        let t = 0.01;
        let f = fv_run(&p, grid(2000), t, Execution::Parallel).unwrap();
        let dx = f.grid.dx();
        for (front, inside) in [(CurveId::FanTwoLeft, 1.0), (CurveId::FanOneRight, -1.0)] {
            let xf = wf.curve_x(front, t).unwrap();
            let h = 1e-7;
            let (_, ra) = wf.state_at(xf + inside * h, t).unwrap();
            let (_, rb) = wf.state_at(xf + inside * 2.0 * h, t).unwrap();
            let ua = crate::invariants::invariants_to_concentrations(&p, ra).unwrap();
            let ub = crate::invariants::invariants_to_concentrations(&p, rb).unwrap();
            let window = (xf - 5.0 * dx, xf + 5.0 * dx);
            for (k, fam) in [Family::One, Family::Two].into_iter().enumerate() {
                let slope = (ub.get(fam) - ua.get(fam)).abs() / h;
                let numeric = f.max_gradient(k, window);
                assert!(
                    numeric < slope,
                    "{front:?} u{}: {numeric} vs {slope}",
                    k + 1
                );
            }
        }
    }

    #[test]
    fn converges_to_exact() {
        let p = MixtureParams::reference();
        let wf = Wavefield::new(p).unwrap();
        let t = 0.01;
        let exact = profile_in(&wf, t, 40_000, (-2.0, 6.0)).unwrap();
        let errs: Vec<[f64; 2]> = [1000, 2000, 4000]
            .iter()
            .map(|&n| {
                l1_error(
                    &fv_run(&p, grid(n), t, Execution::Parallel).unwrap(),
                    &exact,
                )
                .unwrap()
            })
            .collect();
        for k in 0..2 {
            assert!(errs[2][k] < 0.05, "{errs:?}");
            assert!(
                errs[0][k] > errs[1][k] && errs[1][k] > errs[2][k],
                "{errs:?}"
            );
            assert!(errs[0][k] >= 1.5 * errs[2][k], "{errs:?}");
        }
    }

    #[test]
    fn rusanov_converges() {
        let p = MixtureParams::reference();
        let wf = Wavefield::new(p).unwrap();
        let exact = profile_in(&wf, 0.005, 20_000, (-2.0, 6.0)).unwrap();
        let run = |n| {
            let f = fv_run_with(
                &p,
                grid(n),
                0.005,
                NumericalFlux::Rusanov,
                Execution::Parallel,
            )
            .unwrap();
            l1_error(&f, &exact).unwrap()
        };
        let (coarse, fine) = (run(400), run(800));
        assert!(fine[0] < coarse[0] && fine[1] < coarse[1]);
    }

    #[test]
    fn shocks_within_three_cells() {
        let p = MixtureParams::reference();
        let wf = Wavefield::new(p).unwrap();
        let t = 0.01;
        let f = fv_run(&p, grid(4000), t, Execution::Parallel).unwrap();
        let dx = f.grid.dx();
        for id in [CurveId::ShockOne, CurveId::ShockTwo] {
            let xs = wf.curve_x(id, t).unwrap();
            let found = f.steepest_front((xs - 0.1, xs + 0.1)).unwrap();
            assert!((found - xs).abs() <= 3.0 * dx, "{id:?}: {found} vs {xs}");
        }
    }
}
