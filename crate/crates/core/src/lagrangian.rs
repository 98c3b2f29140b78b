//! Characteristic flow map and transport diagnostics.
//!
//! Particles seeded at positions `x` follow `dq/dt = u(t, q)` with
//! `q(0, x) = x`. Along each particle the integral of `u_x` is accumulated,
//! giving the flow Jacobian `q_x = exp(integral u_x dtau)`, which stays
//! positive while the solution is smooth (the flow is a diffeomorphism).
//! For the modified Euler-Poisson system the density is transported as
//! `rho(t, q(t, x)) = rho_0(x) / q_x(t, x)`, so an Eulerian solve and this
//! Lagrangian representation can be cross-checked against each other, and
//! non-negativity of `rho_0` must persist.
//!
//! Particles are integrated with RK4 over each snapshot interval of the
//! trajectory. The velocity field between snapshots is reconstructed by
//! cubic Hermite interpolation in time from the stored states and their
//! recorded right-hand sides, and evaluated off the grid by trigonometric
//! interpolation, so the particle accuracy matches the fourth order of the
//! Eulerian integrator. On the circle, positions live on the universal
//! cover (unwrapped reals) so that particle ordering is meaningful;
//! `wrapped_positions` reports them modulo the domain length.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::spectral::FourierInterpolant;
use crate::stepper::Trajectory;

/// Margin (in domain units) near the truncated-line boundary treated as
/// outside the trustworthy core.
const LINE_CORE_MARGIN: f64 = 2.0;

/// Particle positions and flow Jacobians recorded at the trajectory's
/// snapshot times.
#[derive(Debug, Clone)]
pub struct FlowMap {
    times: Vec<f64>,
    seeds: Vec<f64>,
    /// `positions[i][j]`: unwrapped position of seed `j` at time `i`.
    positions: Vec<Vec<f64>>,
    /// `jacobian[i][j] = exp(integral of u_x along the particle)`.
    jacobian: Vec<Vec<f64>>,
    /// First time each seed entered the boundary margin of a truncated
    /// line, as `(seed index, time)`.
    boundary_exits: Vec<(usize, f64)>,
    origin: f64,
    length: f64,
}

impl FlowMap {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn seeds(&self) -> &[f64] {
        &self.seeds
    }

    pub fn positions(&self) -> &[Vec<f64>] {
        &self.positions
    }

    pub fn jacobian(&self) -> &[Vec<f64>] {
        &self.jacobian
    }

    pub fn boundary_exits(&self) -> &[(usize, f64)] {
        &self.boundary_exits
    }

    /// Positions at time index `i`, wrapped into the fundamental domain.
    pub fn wrapped_positions(&self, i: usize) -> Vec<f64> {
        self.positions[i]
            .iter()
            .map(|&q| self.origin + (q - self.origin).rem_euclid(self.length))
            .collect()
    }
}

/// Integrate the particle ODE through a recorded trajectory. Field 0 of
/// the state is taken as the velocity. The trajectory must carry at least
/// two snapshots at a cadence fine enough for Hermite reconstruction.
pub fn flow_map(traj: &Trajectory, seeds: &[f64]) -> Result<FlowMap> {
    if traj.snapshots.len() < 2 {
        return Err(Error::Experiment(
            "flow map needs a trajectory with at least two snapshots".into(),
        ));
    }
    if traj.derivatives.len() != traj.snapshots.len() {
        return Err(Error::RunMismatch(
            "trajectory lacks recorded right-hand sides".into(),
        ));
    }
    let grid = traj.snapshots[0].grid().clone();
    let (origin, length) = (grid.origin(), grid.length());
    let is_line = !grid.is_circle();
    for (j, &s) in seeds.iter().enumerate() {
        if !s.is_finite() {
            return Err(Error::NonFinite { index: j, value: s });
        }
        if is_line && (s < origin || s >= origin + length) {
            return Err(Error::Experiment(format!(
                "seed {s} outside the truncated-line domain [{origin}, {})",
                origin + length
            )));
        }
    }

    let m = seeds.len();
    let mut q: Vec<f64> = seeds.to_vec();
    let mut exponent = vec![0.0f64; m];
    let mut positions = vec![q.clone()];
    let mut jacobian = vec![vec![1.0; m]];
    let mut boundary_exits: Vec<(usize, f64)> = Vec::new();
    let mut exited = vec![false; m];

    let mut interp_left = FourierInterpolant::new(traj.snapshots[0].field(0));
    for i in 0..traj.snapshots.len() - 1 {
        let t0 = traj.snapshots[i].t();
        let t1 = traj.snapshots[i + 1].t();
        let h = t1 - t0;
        let u0 = traj.snapshots[i].field(0);
        let u1 = traj.snapshots[i + 1].field(0);
        let du0 = traj.derivatives[i].field(0);
        let du1 = traj.derivatives[i + 1].field(0);

        // Hermite midpoint field: (u0 + u1)/2 + h (du0 - du1)/8.
        let mid_values: Vec<f64> = u0
            .values()
            .iter()
            .zip(u1.values())
            .zip(du0.values())
            .zip(du1.values())
            .map(|(((a, b), c), d)| 0.5 * (a + b) + h / 8.0 * (c - d))
            .collect();
        let mid = Field::from_values_unchecked(grid.clone(), mid_values);
        let interp_mid = FourierInterpolant::new(&mid);
        let interp_right = FourierInterpolant::new(u1);

        for j in 0..m {
            let y = q[j];
            let (v1, s1) = interp_left.eval_with_deriv(y);
            let (v2, s2) = interp_mid.eval_with_deriv(y + 0.5 * h * v1);
            let (v3, s3) = interp_mid.eval_with_deriv(y + 0.5 * h * v2);
            let (v4, s4) = interp_right.eval_with_deriv(y + h * v3);
            let y_next = y + h / 6.0 * (v1 + 2.0 * v2 + 2.0 * v3 + v4);
            if !y_next.is_finite() {
                return Err(Error::NonFinite {
                    index: j,
                    value: y_next,
                });
            }
            q[j] = y_next;
            exponent[j] += h / 6.0 * (s1 + 2.0 * s2 + 2.0 * s3 + s4);
            if is_line && !exited[j] {
                let wrapped = origin + (y_next - origin).rem_euclid(length);
                if wrapped.abs() > length / 2.0 - LINE_CORE_MARGIN {
                    exited[j] = true;
                    boundary_exits.push((j, t1));
                }
            }
        }
        positions.push(q.clone());
        jacobian.push(exponent.iter().map(|e| e.exp()).collect());
        interp_left = interp_right;
    }

    Ok(FlowMap {
        times: traj.times(),
        seeds: seeds.to_vec(),
        positions,
        jacobian,
        boundary_exits,
        origin,
        length,
    })
}

/// Transported density along the characteristics:
/// `rho(t, q(t, x)) = rho_0(x) / jacobian(t, x)`, one row per recorded
/// time. `rho_0` is evaluated at the seeds by trigonometric interpolation.
pub fn rho_along_characteristics(
    rho0: &Field,
    fm: &FlowMap,
    traj: &Trajectory,
) -> Result<Vec<Vec<f64>>> {
    if fm.times != traj.times() {
        return Err(Error::RunMismatch(
            "flow map times do not match the trajectory".into(),
        ));
    }
    if rho0.grid().as_ref() != traj.snapshots[0].grid().as_ref() {
        return Err(Error::RunMismatch(
            "initial density grid differs from the trajectory grid".into(),
        ));
    }
    let interp = FourierInterpolant::new(rho0);
    let seed_rho: Vec<f64> = fm.seeds.iter().map(|&x| interp.eval(x)).collect();
    Ok(fm
        .jacobian
        .iter()
        .map(|row| {
            row.iter()
                .zip(&seed_rho)
                .map(|(jac, r0)| r0 / jac)
                .collect()
        })
        .collect())
}

/// Max-norm gap between the Eulerian density evaluated at the particle
/// positions and the characteristics representation, per recorded time.
/// Grows as wave breaking is approached; reported, never asserted here.
pub fn transport_deviation(traj: &Trajectory, fm: &FlowMap) -> Result<Vec<f64>> {
    if traj.snapshots[0].arity() < 2 {
        return Err(Error::ArityMismatch {
            model: "transport deviation",
            expected: 2,
            got: traj.snapshots[0].arity(),
        });
    }
    let rho0 = traj.snapshots[0].field(1);
    let along = rho_along_characteristics(rho0, fm, traj)?;
    let mut out = Vec::with_capacity(traj.snapshots.len());
    for (i, snap) in traj.snapshots.iter().enumerate() {
        let interp = FourierInterpolant::new(snap.field(1));
        let gap = fm.positions[i]
            .iter()
            .zip(&along[i])
            .map(|(&qx, &rc)| (interp.eval(qx) - rc).abs())
            .fold(0.0, f64::max);
        out.push(gap);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SignVerdict {
    /// `min rho >= -tolerance` at every recorded time.
    Holds,
    Violated { time: f64, min_value: f64 },
    /// The initial density already dips negative; the check does not apply.
    PreconditionNotMet,
}

#[derive(Debug, Clone)]
pub struct SignPersistenceReport {
    pub min_initial: f64,
    pub max_initial: f64,
    pub global_min: f64,
    pub tolerance: f64,
    pub verdict: SignVerdict,
}

/// Check that a non-negative initial density stays non-negative along the
/// recorded trajectory, up to `1e-8 * max(rho_0)` of discretization slack.
pub fn sign_persistence_check(traj: &Trajectory) -> Result<SignPersistenceReport> {
    if traj.snapshots.is_empty() || traj.snapshots[0].arity() < 2 {
        return Err(Error::ArityMismatch {
            model: "sign persistence",
            expected: 2,
            got: traj.snapshots.first().map(|s| s.arity()).unwrap_or(0),
        });
    }
    let rho0 = traj.snapshots[0].field(1);
    let min_initial = rho0.values().iter().cloned().fold(f64::INFINITY, f64::min);
    let max_initial = rho0.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let tolerance = 1e-8 * max_initial.max(0.0);

    let mut global_min = f64::INFINITY;
    let mut verdict = SignVerdict::Holds;
    if min_initial < 0.0 {
        verdict = SignVerdict::PreconditionNotMet;
    }
    for snap in &traj.snapshots {
        let m = snap
            .field(1)
            .values()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if m < global_min {
            global_min = m;
            if verdict == SignVerdict::Holds && m < -tolerance {
                verdict = SignVerdict::Violated {
                    time: snap.t(),
                    min_value: m,
                };
            }
        }
    }

    Ok(SignPersistenceReport {
        min_initial,
        max_initial,
        global_min,
        tolerance,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Grid, GridKind};
    use crate::model::{ModelSpec, State};
    use crate::stepper::{integrate, StepControl};
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn mep_run(
        grid: &Arc<Grid>,
        u0: impl Fn(f64) -> f64,
        rho0: impl Fn(f64) -> f64,
        t_end: f64,
        dt: f64,
        record_every: usize,
    ) -> Trajectory {
        let u = Field::from_fn(grid.clone(), u0).unwrap();
        let rho = Field::from_fn(grid.clone(), rho0).unwrap();
        let s0 = State::pair(u, rho, 0.0).unwrap();
        let ctl = StepControl::fixed(dt, t_end).with_record_every(record_every);
        integrate(&ModelSpec::ModifiedEulerPoisson, s0, &ctl, |_| Ok(())).unwrap()
    }

    /// Hand-built trajectory with a frozen velocity field; the coupled
    /// models cannot hold u at zero next to a nonzero density, but the
    /// flow map accepts any recorded run.
    fn frozen_velocity_trajectory(
        grid: &Arc<Grid>,
        rho0: impl Fn(f64) -> f64,
        times: &[f64],
    ) -> Trajectory {
        let u = Field::zeros(grid.clone());
        let rho = Field::from_fn(grid.clone(), rho0).unwrap();
        let snapshots: Vec<State> = times
            .iter()
            .map(|&t| State::pair(u.clone(), rho.clone(), t).unwrap())
            .collect();
        let derivatives: Vec<State> = times
            .iter()
            .map(|&t| {
                State::pair(Field::zeros(grid.clone()), Field::zeros(grid.clone()), t).unwrap()
            })
            .collect();
        Trajectory {
            snapshots,
            derivatives,
            diagnostics: crate::invariants::DiagnosticSeries::empty(),
            outcome: crate::stepper::Outcome::Completed,
            steps_taken: times.len() - 1,
        }
    }

    #[test]
    fn zero_velocity_freezes_particles() {
        let g = Grid::new(GridKind::PeriodicCircle, 64, 1.0).unwrap();
        let traj =
            frozen_velocity_trajectory(&g, |x| (2.0 * PI * x).cos() + 1.5, &[0.0, 0.05, 0.1, 0.2]);
        let seeds: Vec<f64> = g.nodes().to_vec();
        let fm = flow_map(&traj, &seeds).unwrap();
        assert_eq!(fm.positions()[0], seeds);
        for (row, jrow) in fm.positions().iter().zip(fm.jacobian()) {
            for (q, s) in row.iter().zip(&seeds) {
                assert!((q - s).abs() < 1e-14);
            }
            assert!(jrow.iter().all(|&j| (j - 1.0).abs() < 1e-14));
        }
    }

    #[test]
    fn constant_velocity_translates_particles() {
        let c = 0.3;
        let g = Grid::new(GridKind::PeriodicCircle, 64, 1.0).unwrap();
        let traj = mep_run(&g, |_| c, |_| 0.0, 1.0, 0.01, 5);
        let seeds = vec![0.1, 0.5, 0.9];
        let fm = flow_map(&traj, &seeds).unwrap();
        for (i, &t) in fm.times().iter().enumerate() {
            for (j, &s) in seeds.iter().enumerate() {
                assert!(
                    (fm.positions()[i][j] - (s + c * t)).abs() < 1e-10,
                    "particle drifted from uniform translation"
                );
                assert!((fm.jacobian()[i][j] - 1.0).abs() < 1e-10);
            }
        }
        // wrapped reporting folds the cover back into [0, 1)
        let last = fm.wrapped_positions(fm.times().len() - 1);
        assert!(last.iter().all(|&q| (0.0..1.0).contains(&q)));
    }

    #[test]
    fn smooth_run_keeps_particle_order_and_positive_jacobian() {
        let g = Grid::new(GridKind::TruncatedLine, 256, 20.0).unwrap();
        let traj = mep_run(
            &g,
            |x| 0.2 * (-x * x / 4.0).exp(),
            |x| (-x * x).exp(),
            0.5,
            2e-3,
            25,
        );
        let seeds: Vec<f64> = g
            .nodes()
            .iter()
            .cloned()
            .filter(|x| x.abs() < 10.0)
            .collect();
        let fm = flow_map(&traj, &seeds).unwrap();
        for (row, jrow) in fm.positions().iter().zip(fm.jacobian()) {
            assert!(row.windows(2).all(|w| w[0] < w[1]), "ordering lost");
            assert!(jrow.iter().all(|&j| j > 0.0));
        }
        assert!(fm.boundary_exits().is_empty());
    }

    #[test]
    fn accumulated_jacobian_matches_finite_differences() {
        let g = Grid::new(GridKind::TruncatedLine, 256, 20.0).unwrap();
        let traj = mep_run(
            &g,
            |x| 0.2 * (-x * x / 4.0).exp(),
            |x| (-x * x).exp(),
            0.5,
            2e-3,
            25,
        );
        let seeds: Vec<f64> = g
            .nodes()
            .iter()
            .cloned()
            .filter(|x| x.abs() < 8.0)
            .collect();
        let dx = g.spacing();
        let fm = flow_map(&traj, &seeds).unwrap();
        let last = fm.positions().last().unwrap();
        let jac = fm.jacobian().last().unwrap();
        let mut max_err: f64 = 0.0;
        for j in 1..seeds.len() - 1 {
            let fd = (last[j + 1] - last[j - 1]) / (2.0 * dx);
            max_err = max_err.max((fd - jac[j]).abs());
        }
        assert!(max_err < 5e-3, "finite-difference gap {max_err}");
    }

    #[test]
    fn density_transport_trivial_cases() {
        let g = Grid::new(GridKind::PeriodicCircle, 64, 1.0).unwrap();

        // zero initial density transports to zero
        let traj = mep_run(&g, |x| 0.1 * (2.0 * PI * x).sin(), |_| 0.0, 0.2, 5e-3, 8);
        let seeds: Vec<f64> = g.nodes().to_vec();
        let fm = flow_map(&traj, &seeds).unwrap();
        let rho0 = traj.snapshots[0].field(1).clone();
        let along = rho_along_characteristics(&rho0, &fm, &traj).unwrap();
        assert!(along.iter().flatten().all(|&v| v.abs() < 1e-13));

        // zero velocity leaves the density values in place
        let traj = frozen_velocity_trajectory(
            &g,
            |x| 1.0 + 0.3 * (2.0 * PI * x).cos(),
            &[0.0, 0.1, 0.2],
        );
        let fm = flow_map(&traj, &seeds).unwrap();
        let rho0 = traj.snapshots[0].field(1).clone();
        let along = rho_along_characteristics(&rho0, &fm, &traj).unwrap();
        for row in &along {
            for (v, r0) in row.iter().zip(rho0.values()) {
                assert!((v - r0).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn eulerian_and_characteristic_densities_agree() {
        let g = Grid::new(GridKind::TruncatedLine, 256, 20.0).unwrap();
        let traj = mep_run(
            &g,
            |x| 0.2 * (-x * x / 4.0).exp(),
            |x| (-x * x).exp(),
            0.5,
            1e-3,
            50,
        );
        let seeds: Vec<f64> = g
            .nodes()
            .iter()
            .cloned()
            .filter(|x| x.abs() < 10.0)
            .collect();
        let fm = flow_map(&traj, &seeds).unwrap();
        let dev = transport_deviation(&traj, &fm).unwrap();
        assert!(dev[0] < 1e-12);
        let worst = dev.iter().cloned().fold(0.0, f64::max);
        assert!(worst <= 1e-6, "transport deviation {worst}");
    }

    #[test]
    fn mismatched_runs_are_rejected() {
        let g = Grid::new(GridKind::PeriodicCircle, 64, 1.0).unwrap();
        let t1 = mep_run(&g, |_| 0.0, |_| 1.0, 0.2, 0.01, 5);
        let t2 = mep_run(&g, |_| 0.0, |_| 1.0, 0.3, 0.01, 5);
        let fm = flow_map(&t1, g.nodes()).unwrap();
        let rho0 = t1.snapshots[0].field(1).clone();
        assert!(rho_along_characteristics(&rho0, &fm, &t2).is_err());
    }

    #[test]
    fn boundary_margin_is_flagged_on_the_line() {
        let g = Grid::new(GridKind::TruncatedLine, 128, 10.0).unwrap();
        // constant drift pushes the rightmost seed into the 2-unit margin
        let traj = mep_run(&g, |_| 0.5, |_| 0.0, 1.0, 0.01, 10);
        let fm = flow_map(&traj, &[0.0, 7.9]).unwrap();
        assert_eq!(fm.boundary_exits().len(), 1);
        assert_eq!(fm.boundary_exits()[0].0, 1);
    }

    #[test]
    fn sign_persistence_reports() {
        let g = Grid::new(GridKind::TruncatedLine, 256, 20.0).unwrap();

        let traj = mep_run(&g, |x| 0.2 * (-x * x / 4.0).exp(), |_| 0.0, 0.2, 2e-3, 20);
        let rep = sign_persistence_check(&traj).unwrap();
        assert_eq!(rep.verdict, SignVerdict::Holds);
        assert_eq!(rep.global_min, 0.0);

        let traj = mep_run(
            &g,
            |x| 0.2 * (-x * x / 4.0).exp(),
            |x| (-x * x).exp(),
            0.3,
            2e-3,
            20,
        );
        let rep = sign_persistence_check(&traj).unwrap();
        assert_eq!(rep.verdict, SignVerdict::Holds);
        assert!(rep.global_min >= -rep.tolerance);

        let traj = mep_run(
            &g,
            |x| 0.1 * (-x * x).exp(),
            |x| (-x * x).exp() - 0.2 * (-(x - 3.0) * (x - 3.0)).exp(),
            0.1,
            2e-3,
            20,
        );
        let rep = sign_persistence_check(&traj).unwrap();
        assert_eq!(rep.verdict, SignVerdict::PreconditionNotMet);
        assert!(rep.min_initial < 0.0);
    }
}
