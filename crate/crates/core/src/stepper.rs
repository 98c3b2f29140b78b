//! Classical RK4 time integration with snapshot recording and explicit
//! blow-up reporting. Wave breaking is expected behavior for several of the
//! models, so a run that loses finiteness ends with a partial trajectory
//! and a `BlowUp` outcome instead of an error or a silent NaN.

use crate::error::{Error, Result};
use crate::model::{ModelSpec, State};

/// Any non-finite value, or a max-norm beyond this, counts as blow-up.
pub const BLOWUP_THRESHOLD: f64 = 1e8;

/// Step-size selection: either a fixed `dt` or a CFL-style adaptive step
/// `dt = cfl_safety * dx / max(1, max|u|)` recomputed every step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSize {
    Fixed(f64),
    CflAdaptive(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub step: StepSize,
    pub t_end: f64,
    /// Record a snapshot (and invoke the observer) every this many steps.
    pub record_every: usize,
    pub max_steps: usize,
}

impl StepControl {
    pub fn fixed(dt: f64, t_end: f64) -> Self {
        StepControl {
            step: StepSize::Fixed(dt),
            t_end,
            record_every: 1,
            max_steps: 10_000_000,
        }
    }

    pub fn adaptive(cfl_safety: f64, t_end: f64) -> Self {
        StepControl {
            step: StepSize::CflAdaptive(cfl_safety),
            t_end,
            record_every: 1,
            max_steps: 10_000_000,
        }
    }

    pub fn with_record_every(mut self, k: usize) -> Self {
        self.record_every = k;
        self
    }

    pub fn with_max_steps(mut self, k: usize) -> Self {
        self.max_steps = k;
        self
    }

    pub fn validate(&self) -> Result<()> {
        match self.step {
            StepSize::Fixed(dt) if !(dt.is_finite() && dt > 0.0) => {
                return Err(Error::InvalidStepControl(format!("dt must be > 0, got {dt}")));
            }
            StepSize::CflAdaptive(c) if !(c.is_finite() && c > 0.0 && c <= 1.0) => {
                return Err(Error::InvalidStepControl(format!(
                    "cfl_safety must be in (0, 1], got {c}"
                )));
            }
            _ => {}
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(Error::InvalidStepControl(format!(
                "t_end must be > 0, got {}",
                self.t_end
            )));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidStepControl("record_every must be >= 1".into()));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidStepControl("max_steps must be >= 1".into()));
        }
        Ok(())
    }
}

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outcome {
    Completed,
    /// The step budget ran out before `t_end`.
    MaxStepsExceeded,
    /// A stage went non-finite or beyond the magnitude threshold.
    BlowUp { time: f64, max_norm: f64 },
}

impl Outcome {
    pub fn is_blow_up(&self) -> bool {
        matches!(self, Outcome::BlowUp { .. })
    }
}

/// Recorded run: snapshots, the right-hand side at each snapshot (needed
/// for Hermite interpolation in time by the characteristics machinery),
/// diagnostics attached by the caller, and the termination outcome.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub snapshots: Vec<State>,
    pub derivatives: Vec<State>,
    pub diagnostics: crate::invariants::DiagnosticSeries,
    pub outcome: Outcome,
    pub steps_taken: usize,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(State::t).collect()
    }

    pub fn final_state(&self) -> &State {
        self.snapshots.last().expect("trajectory has at least the initial state")
    }
}

fn check_stage(s: &State) -> Result<()> {
    let m = s.max_abs();
    if !m.is_finite() || m > BLOWUP_THRESHOLD {
        return Err(Error::BlowUp {
            time: s.t(),
            max_norm: m,
        });
    }
    Ok(())
}

fn rk4_from_k1<R>(rhs: &R, s: &State, k1: &State, dt: f64) -> Result<State>
where
    R: Fn(&State) -> Result<State>,
{
    let half = 0.5 * dt;
    let s2 = s.axpy(half, k1, s.t() + half);
    check_stage(&s2)?;
    let k2 = rhs(&s2)?;
    let s3 = s.axpy(half, &k2, s.t() + half);
    check_stage(&s3)?;
    let k3 = rhs(&s3)?;
    let s4 = s.axpy(dt, &k3, s.t() + dt);
    check_stage(&s4)?;
    let k4 = rhs(&s4)?;

    let sixth = dt / 6.0;
    let fields = s
        .fields()
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let vals = f
                .values()
                .iter()
                .zip(k1.field(i).values())
                .zip(k2.field(i).values())
                .zip(k3.field(i).values())
                .zip(k4.field(i).values())
                .map(|((((y, a), b), c), d)| y + sixth * (a + 2.0 * b + 2.0 * c + d))
                .collect();
            crate::field::Field::from_values_unchecked(f.grid().clone(), vals)
        })
        .collect();
    let next = State::derivative(fields, s.t() + dt);
    check_stage(&next)?;
    Ok(next)
}

/// One classical 4-stage Runge-Kutta step. A non-finite (or beyond
/// threshold) intermediate stage aborts with `Error::BlowUp` carrying the
/// stage time and max-norm.
pub fn rk4_step<R>(rhs: &R, s: &State, dt: f64) -> Result<State>
where
    R: Fn(&State) -> Result<State>,
{
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidStepControl(format!("dt must be > 0, got {dt}")));
    }
    check_stage(s)?;
    let k1 = rhs(s)?;
    rk4_from_k1(rhs, s, &k1, dt)
}

/// Integrate an arbitrary right-hand side. The observer runs on every
/// recorded snapshot (including the initial state) and must not mutate it.
/// Blow-up is not an error: the trajectory returned so far carries the
/// `BlowUp` outcome. Step-size or observer failures are errors.
pub fn integrate_with<R, O>(rhs: R, s0: State, ctl: &StepControl, mut observe: O) -> Result<Trajectory>
where
    R: Fn(&State) -> Result<State>,
    O: FnMut(&State) -> Result<()>,
{
    ctl.validate()?;
    check_stage(&s0)?;

    let dx = s0.grid().spacing();
    let mut traj = Trajectory {
        snapshots: Vec::new(),
        derivatives: Vec::new(),
        diagnostics: crate::invariants::DiagnosticSeries::empty(),
        outcome: Outcome::Completed,
        steps_taken: 0,
    };

    let mut s = s0;
    let mut k1 = rhs(&s)?;
    observe(&s)?;
    traj.snapshots.push(s.clone());
    traj.derivatives.push(k1.clone());

    let time_floor = 1e-12 * ctl.t_end.max(1.0);
    let mut steps = 0usize;
    loop {
        let remaining = ctl.t_end - s.t();
        if remaining <= time_floor {
            break;
        }
        if steps >= ctl.max_steps {
            traj.outcome = Outcome::MaxStepsExceeded;
            break;
        }
        let dt = match ctl.step {
            StepSize::Fixed(dt) => dt,
            StepSize::CflAdaptive(c) => c * dx / s.max_abs().max(1.0),
        };
        let dt = dt.min(remaining);

        match rk4_from_k1(&rhs, &s, &k1, dt) {
            Ok(next) => {
                s = next;
                steps += 1;
            }
            Err(Error::BlowUp { time, max_norm }) => {
                traj.outcome = Outcome::BlowUp { time, max_norm };
                break;
            }
            Err(e) => return Err(e),
        }

        k1 = rhs(&s)?;
        let done = ctl.t_end - s.t() <= time_floor;
        if steps % ctl.record_every == 0 || done {
            observe(&s)?;
            traj.snapshots.push(s.clone());
            traj.derivatives.push(k1.clone());
        }
    }

    // Make sure the last computed state is recorded even when the loop
    // exits off-cadence (max_steps or blow-up on an unrecorded step).
    if traj
        .snapshots
        .last()
        .map(|last| last.t() < s.t())
        .unwrap_or(false)
        && s.is_finite()
    {
        observe(&s)?;
        traj.snapshots.push(s.clone());
        traj.derivatives.push(k1);
    }

    traj.steps_taken = steps;
    Ok(traj)
}

/// Integrate a model from `s0`. Checks the state arity and (model, grid)
/// compatibility up front, then defers to `integrate_with`.
pub fn integrate<O>(model: &ModelSpec, s0: State, ctl: &StepControl, observe: O) -> Result<Trajectory>
where
    O: FnMut(&State) -> Result<()>,
{
    if s0.arity() != model.arity() {
        return Err(Error::ArityMismatch {
            model: model.name(),
            expected: model.arity(),
            got: s0.arity(),
        });
    }
    model.validate(s0.grid())?;
    integrate_with(|s| model.rhs(s), s0, ctl, observe)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;
    use crate::grid::{Grid, GridKind};
    use crate::model::ModelSpec;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn circle(n: usize) -> Arc<Grid> {
        Grid::new(GridKind::PeriodicCircle, n, 1.0).unwrap()
    }

    fn zero_rhs(s: &State) -> Result<State> {
        let fields = s.fields().iter().map(|f| f.scale(0.0)).collect();
        Ok(State::derivative(fields, s.t()))
    }

    #[test]
    fn zero_rhs_only_advances_time() {
        let g = circle(16);
        let s = State::scalar(Field::constant(g, 1.5).unwrap(), 0.0);
        let next = rk4_step(&zero_rhs, &s, 0.25).unwrap();
        assert_eq!(next.t(), 0.25);
        assert!(next.field(0).values().iter().all(|&v| v == 1.5));
    }

    #[test]
    fn linear_problem_reproduces_rk4_taylor_polynomial() {
        // du/dt = lambda u: one step must produce the degree-4 Taylor
        // polynomial of exp(lambda dt).
        let lambda = -0.7;
        let dt = 0.3;
        let g = circle(8);
        let rhs = move |s: &State| -> Result<State> {
            Ok(State::derivative(vec![s.field(0).scale(lambda)], s.t()))
        };
        let s = State::scalar(Field::constant(g, 1.0).unwrap(), 0.0);
        let next = rk4_step(&rhs, &s, dt).unwrap();
        let z: f64 = lambda * dt;
        let taylor = 1.0 + z + z * z / 2.0 + z * z * z / 6.0 + z * z * z * z / 24.0;
        for &v in next.field(0).values() {
            assert!((v - taylor).abs() < 1e-15);
        }
    }

    #[test]
    fn camassa_holm_halving_dt_divides_error_by_sixteen() {
        // Self-convergence against a dt/8 reference.
        let g = circle(128);
        let u0 = Field::from_fn(g, |x| 0.1 * (2.0 * PI * x).sin()).unwrap();
        let model = ModelSpec::camassa_holm();
        let t_end = 0.5;
        let run = |dt: f64| -> State {
            let ctl = StepControl::fixed(dt, t_end).with_record_every(usize::MAX);
            let traj = integrate(&model, State::scalar(u0.clone(), 0.0), &ctl, |_| Ok(())).unwrap();
            traj.final_state().clone()
        };
        let coarse = run(0.01);
        let medium = run(0.005);
        let reference = run(0.01 / 8.0);
        let err = |s: &State| -> f64 {
            s.field(0)
                .values()
                .iter()
                .zip(reference.field(0).values())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        };
        let ratio = err(&coarse) / err(&medium);
        assert!(
            (ratio - 16.0).abs() <= 16.0 * 0.2,
            "error ratio {ratio} not within 20% of 16"
        );
    }

    #[test]
    fn integrate_records_initial_state_and_cadence() {
        let g = circle(16);
        let s0 = State::scalar(Field::constant(g, 1.0).unwrap(), 0.0);
        let ctl = StepControl::fixed(0.1, 1.0).with_record_every(2);
        let mut seen = 0usize;
        let traj = integrate_with(zero_rhs, s0, &ctl, |_| {
            seen += 1;
            Ok(())
        })
        .unwrap();
        assert_eq!(traj.outcome, Outcome::Completed);
        // snapshots at t = 0.0, 0.2, 0.4, 0.6, 0.8, 1.0
        assert_eq!(traj.snapshots.len(), 6);
        assert_eq!(seen, traj.snapshots.len());
        let times = traj.times();
        assert_eq!(times[0], 0.0);
        assert!(times.windows(2).all(|w| w[0] < w[1]));
        assert!((times.last().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_state_stays_exactly_zero() {
        let g = circle(32);
        let model = ModelSpec::camassa_holm();
        let s0 = State::scalar(Field::zeros(g), 0.0);
        let ctl = StepControl::fixed(0.01, 0.1);
        let traj = integrate(&model, s0, &ctl, |_| Ok(())).unwrap();
        for snap in &traj.snapshots {
            assert!(snap.field(0).values().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn restarting_matches_direct_integration() {
        // Invariance under time translation: integrate to t1, restart, and
        // compare with a direct run to t2.
        let g = circle(64);
        let u0 = Field::from_fn(g, |x| 0.1 * (2.0 * PI * x).sin()).unwrap();
        let model = ModelSpec::camassa_holm();
        let dt = 1e-3;

        let direct = integrate(
            &model,
            State::scalar(u0.clone(), 0.0),
            &StepControl::fixed(dt, 0.2).with_record_every(usize::MAX),
            |_| Ok(()),
        )
        .unwrap();

        let first = integrate(
            &model,
            State::scalar(u0, 0.0),
            &StepControl::fixed(dt, 0.1).with_record_every(usize::MAX),
            |_| Ok(()),
        )
        .unwrap();
        let mid = first.final_state().clone();
        let second = integrate(
            &model,
            State::new(mid.fields().to_vec(), 0.0).unwrap(),
            &StepControl::fixed(dt, 0.1).with_record_every(usize::MAX),
            |_| Ok(()),
        )
        .unwrap();

        let a = direct.final_state();
        let b = second.final_state();
        for (x, y) in a.field(0).values().iter().zip(b.field(0).values()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn fixed_step_runs_are_bitwise_deterministic() {
        let g = circle(64);
        let u0 = Field::from_fn(g, |x| 0.2 * (2.0 * PI * x).sin()).unwrap();
        let model = ModelSpec::camassa_holm();
        let ctl = StepControl::fixed(1e-3, 0.05);
        let run = || {
            integrate(&model, State::scalar(u0.clone(), 0.0), &ctl, |_| Ok(()))
                .unwrap()
                .final_state()
                .clone()
        };
        let a = run();
        let b = run();
        assert_eq!(a.field(0).values(), b.field(0).values());
    }

    #[test]
    fn steep_fornberg_whitham_data_blows_up_with_flag() {
        // Steep negative slope: wave breaking in finite time, surfaced as
        // a BlowUp outcome instead of an error. The slope catastrophe sits
        // near t = 1 / ((3/2) max|u0'|), about 0.011 here.
        let g = circle(512);
        let u0 = Field::from_fn(g, |x| 5.0 * (2.0 * PI * x).sin()).unwrap();
        let ctl = StepControl::fixed(5e-4, 1.0).with_record_every(10);
        let traj = integrate(
            &ModelSpec::FornbergWhitham,
            State::scalar(u0, 0.0),
            &ctl,
            |_| Ok(()),
        )
        .unwrap();
        match traj.outcome {
            Outcome::BlowUp { time, .. } => assert!(time > 0.0 && time < 0.1),
            other => panic!("expected blow-up, got {other:?}"),
        }
        assert!(!traj.snapshots.is_empty());
        assert!(traj.snapshots.iter().all(|s| s.is_finite()));
    }

    #[test]
    fn adaptive_mode_tracks_cfl() {
        let g = circle(64);
        let u0 = Field::from_fn(g, |x| 0.1 * (2.0 * PI * x).sin()).unwrap();
        let ctl = StepControl::adaptive(0.5, 0.1);
        let traj = integrate(&ModelSpec::camassa_holm(), State::scalar(u0, 0.0), &ctl, |_| Ok(()))
            .unwrap();
        assert_eq!(traj.outcome, Outcome::Completed);
        assert!((traj.final_state().t() - 0.1).abs() < 1e-10);
    }

    #[test]
    fn invalid_controls_are_rejected() {
        assert!(StepControl::fixed(0.0, 1.0).validate().is_err());
        assert!(StepControl::fixed(1e-3, -1.0).validate().is_err());
        assert!(StepControl::adaptive(1.5, 1.0).validate().is_err());
        assert!(StepControl::adaptive(0.5, 1.0).with_record_every(0).validate().is_err());
        assert!(StepControl::fixed(1e-3, 1.0).with_max_steps(0).validate().is_err());
    }

    #[test]
    fn max_steps_is_reported() {
        let g = circle(16);
        let s0 = State::scalar(Field::constant(g, 1.0).unwrap(), 0.0);
        let ctl = StepControl::fixed(1e-3, 1.0).with_max_steps(10);
        let traj = integrate_with(zero_rhs, s0, &ctl, |_| Ok(())).unwrap();
        assert_eq!(traj.outcome, Outcome::MaxStepsExceeded);
        assert_eq!(traj.steps_taken, 10);
    }
}
