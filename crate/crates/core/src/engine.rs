//! Fixed-step closed-loop integration.
//!
//! Every step the seeker is sampled, the phase machine advanced, the
//! phase's control law evaluated and the resulting command held constant
//! across one classic RK4 step. Ground impact is located inside the last
//! step by bisection on the step fraction.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::atmosphere::StandardAtmosphere;
use crate::dynamics::{
    derivatives, DynamicsOptions, Evaluation, GuidanceCommand, State, StateDerivative,
    VehicleParams,
};
use crate::error::{invalid, Result, SimError};
use crate::guidance::{
    seeker_measure, wrap_angle, Autopilot, EntryConditions, FlightMode, GuidanceConfig,
    GuidancePhase, Target,
};

/// Altitude tolerance of the refined impact point, m.
pub const IMPACT_TOLERANCE: f64 = 1e-3;
const MAX_BISECTIONS: usize = 60;

/// Everything needed for one deterministic run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub entry: EntryConditions,
    pub vehicle: VehicleParams,
    pub guidance: GuidanceConfig,
    pub target: Target,
    pub mode: FlightMode,
    /// Integration step, s.
    pub dt: f64,
    /// Simulated-time limit, s.
    pub max_time: f64,
    pub curvature_term: bool,
    /// Multiplier on the standard-atmosphere density.
    pub density_scale: f64,
    /// Seeds the seeker noise stream.
    pub seed: u64,
    /// Keep every Nth step in the trajectory (the last point is always kept).
    pub output_every: usize,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            entry: EntryConditions::default(),
            vehicle: VehicleParams::default(),
            guidance: GuidanceConfig::default(),
            target: Target {
                x: 900_000.0,
                z: 0.0,
            },
            mode: FlightMode::Planar,
            dt: 0.01,
            max_time: 600.0,
            curvature_term: false,
            density_scale: 1.0,
            seed: 0,
            output_every: 1,
        }
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.entry.validate()?;
        self.vehicle.validate()?;
        self.guidance.validate()?;
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(invalid("dt", format!("must be positive, got {}", self.dt)));
        }
        if !(self.max_time > self.dt && self.max_time.is_finite()) {
            return Err(invalid(
                "max_time",
                format!("must exceed dt, got {}", self.max_time),
            ));
        }
        if !(self.density_scale > 0.0 && self.density_scale.is_finite()) {
            return Err(invalid("density_scale", "must be positive"));
        }
        if !(self.target.x.is_finite() && self.target.z.is_finite()) {
            return Err(invalid("target", "coordinates must be finite"));
        }
        if self.output_every == 0 {
            return Err(invalid("output_every", "must be at least 1"));
        }
        Ok(())
    }

    pub fn dynamics_options(&self) -> DynamicsOptions {
        DynamicsOptions {
            curvature_term: self.curvature_term,
        }
    }

    pub fn atmosphere(&self) -> StandardAtmosphere {
        StandardAtmosphere {
            density_scale: self.density_scale,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Impact,
    Timeout,
    Aborted,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Impact => "impact",
            Outcome::Timeout => "timeout",
            Outcome::Aborted => "aborted",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ImpactPoint {
    pub x: f64,
    pub z: f64,
}

/// First time each phase was active, `None` if it never was.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PhaseEntryTimes {
    pub gravitational_descent: Option<f64>,
    pub pull_up: Option<f64>,
    pub cruise: Option<f64>,
    pub terminal: Option<f64>,
    pub impact: Option<f64>,
}

impl PhaseEntryTimes {
    pub fn get(&self, phase: GuidancePhase) -> Option<f64> {
        match phase {
            GuidancePhase::GravitationalDescent => self.gravitational_descent,
            GuidancePhase::PullUp => self.pull_up,
            GuidancePhase::Cruise => self.cruise,
            GuidancePhase::Terminal => self.terminal,
            GuidancePhase::Impact => self.impact,
        }
    }

    fn mark(&mut self, phase: GuidancePhase, t: f64) {
        let slot = match phase {
            GuidancePhase::GravitationalDescent => &mut self.gravitational_descent,
            GuidancePhase::PullUp => &mut self.pull_up,
            GuidancePhase::Cruise => &mut self.cruise,
            GuidancePhase::Terminal => &mut self.terminal,
            GuidancePhase::Impact => &mut self.impact,
        };
        slot.get_or_insert(t);
    }
}

/// Summary of a finished run.
///
/// For runs that did not reach the ground, `impact_point`, `downrange` and
/// `miss_distance` describe the last integrated state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TerminalReport {
    pub outcome: Outcome,
    pub miss_distance: f64,
    pub impact_time: f64,
    pub impact_point: ImpactPoint,
    pub downrange: f64,
    pub impact_speed: f64,
    pub phase_entry_times: PhaseEntryTimes,
    pub peak_applied_load: f64,
    pub peak_dynamic_pressure: f64,
    pub saturation_fraction: f64,
}

/// One emitted trajectory point. `u_cmd` and `u_applied` are the vertical
/// channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    pub state: State,
    pub phase: GuidancePhase,
    pub u_cmd: f64,
    pub u_applied: f64,
    pub mach: f64,
    pub dynamic_pressure: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub trajectory: Vec<TrajectorySample>,
    pub report: TerminalReport,
}

/// Classic four-stage Runge-Kutta step.
pub fn rk4_step<F>(state: &State, dt: f64, mut f: F) -> Result<State>
where
    F: FnMut(&State) -> Result<StateDerivative>,
{
    if !(dt > 0.0) {
        return Err(invalid("dt", format!("must be positive, got {dt}")));
    }
    let k1 = f(state)?;
    let k2 = f(&state.advanced(&k1, 0.5 * dt))?;
    let k3 = f(&state.advanced(&k2, 0.5 * dt))?;
    let k4 = f(&state.advanced(&k3, dt))?;
    let blended = StateDerivative::rk4_blend(&k1, &k2, &k3, &k4);
    if !blended.is_finite() {
        return Err(SimError::NonFinite);
    }
    Ok(state.advanced(&blended, dt))
}

/// Locates the ground crossing inside the step from `before` to `after` by
/// bisecting the fraction of the step re-integrated from `before`.
pub fn refine_impact<F>(before: &State, after: &State, mut f: F) -> Result<State>
where
    F: FnMut(&State) -> Result<StateDerivative>,
{
    if !(before.y > 0.0 && after.y <= 0.0) {
        return Err(SimError::BadImpactBracket {
            before: before.y,
            after: after.y,
        });
    }
    if after.y == 0.0 {
        return Ok(*after);
    }
    let dt = after.t - before.t;
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut best = *after;
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        let s = rk4_step(before, mid * dt, &mut f)?;
        if s.y.abs() < IMPACT_TOLERANCE {
            return Ok(s);
        }
        if s.y > 0.0 {
            lo = mid;
        } else {
            hi = mid;
            best = s;
        }
    }
    Ok(best)
}

/// Keeps the flight-path angle inside [-pi/2, pi/2] by flipping heading
/// when the vehicle pitches through the vertical.
fn normalize(mut s: State) -> State {
    if s.theta > FRAC_PI_2 {
        s.theta = PI - s.theta;
        s.psi = wrap_angle(s.psi + PI);
    } else if s.theta < -FRAC_PI_2 {
        s.theta = -PI - s.theta;
        s.psi = wrap_angle(s.psi + PI);
    } else if s.psi != 0.0 {
        s.psi = wrap_angle(s.psi);
    }
    s
}

struct Tally {
    steps: usize,
    saturated_steps: usize,
    peak_load: f64,
    peak_q: f64,
}

impl Tally {
    fn add(&mut self, e: &Evaluation) {
        self.steps += 1;
        if e.saturated {
            self.saturated_steps += 1;
        }
        self.peak_load = self.peak_load.max(e.applied.magnitude());
        self.peak_q = self.peak_q.max(e.dynamic_pressure);
    }
}

/// Runs one scenario to impact, timeout or abort.
pub fn run(scenario: &Scenario) -> Result<RunOutput> {
    scenario.validate()?;
    let dt = scenario.dt;
    let every = scenario.output_every;
    let max_steps = (scenario.max_time / dt - 1e-9).ceil() as usize;
    let atm = scenario.atmosphere();
    let opts = scenario.dynamics_options();
    let vehicle = scenario.vehicle;
    let target = scenario.target;

    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let mut pilot = Autopilot::new(scenario.guidance, scenario.mode);
    let mut state = scenario.entry.initial_state();
    let mut trajectory = Vec::with_capacity(max_steps / every + 2);
    let mut entries = PhaseEntryTimes::default();
    let mut tally = Tally {
        steps: 0,
        saturated_steps: 0,
        peak_load: 0.0,
        peak_q: 0.0,
    };

    let sample =
        |s: State, phase: GuidancePhase, cmd: GuidanceCommand, e: &Evaluation| TrajectorySample {
            state: s,
            phase,
            u_cmd: cmd.u_vertical,
            u_applied: e.applied.u_vertical,
            mach: e.mach,
            dynamic_pressure: e.dynamic_pressure,
        };

    let mut step = 0usize;
    let (outcome, last) = loop {
        let measurement = seeker_measure(&state, &target, &scenario.guidance, &mut rng);
        let command = pilot.update(&state, &measurement);
        let phase = pilot.phase();
        entries.mark(phase, state.t);

        let eval = match derivatives(&state, command, &vehicle, &atm, opts) {
            Ok(e) => e,
            Err(_) => break (Outcome::Aborted, state),
        };
        let point = sample(state, phase, command, &eval);
        if step >= max_steps {
            trajectory.push(point);
            break (Outcome::Timeout, state);
        }
        if step % every == 0 {
            trajectory.push(point);
        }
        tally.add(&eval);

        let f = |s: &State| derivatives(s, command, &vehicle, &atm, opts).map(|e| e.rates);
        let next = match rk4_step(&state, dt, f) {
            Ok(n) if n.is_finite() => n,
            _ => break (Outcome::Aborted, state),
        };
        step += 1;

        if next.y <= 0.0 {
            let mut hit = match refine_impact(&state, &next, f) {
                Ok(h) => h,
                Err(_) => break (Outcome::Aborted, state),
            };
            hit.y = hit.y.max(0.0);
            pilot.set_phase(GuidancePhase::Impact);
            entries.mark(GuidancePhase::Impact, hit.t);
            let last_point = match derivatives(&hit, command, &vehicle, &atm, opts) {
                Ok(e) => sample(hit, GuidancePhase::Impact, command, &e),
                Err(_) => TrajectorySample {
                    state: hit,
                    phase: GuidancePhase::Impact,
                    ..point
                },
            };
            if trajectory.last().map(|p| p.state.t) != Some(hit.t) {
                trajectory.push(last_point);
            }
            break (Outcome::Impact, hit);
        }

        state = normalize(next);
        // t from the step counter so timestamps stay on the dt grid
        state.t = step as f64 * dt;
    };

    if outcome != Outcome::Impact && trajectory.last().map(|p| p.state.t) != Some(last.t) {
        if let Ok(e) = derivatives(&last, GuidanceCommand::ZERO, &vehicle, &atm, opts) {
            trajectory.push(sample(last, pilot.phase(), GuidanceCommand::ZERO, &e));
        }
    }

    let report = TerminalReport {
        outcome,
        miss_distance: (last.x - target.x).hypot(last.z - target.z),
        impact_time: last.t,
        impact_point: ImpactPoint {
            x: last.x,
            z: last.z,
        },
        downrange: last.x.hypot(last.z),
        impact_speed: last.speed,
        phase_entry_times: entries,
        peak_applied_load: tally.peak_load,
        peak_dynamic_pressure: tally.peak_q,
        saturation_fraction: if tally.steps == 0 {
            0.0
        } else {
            tally.saturated_steps as f64 / tally.steps as f64
        },
    };
    Ok(RunOutput { trajectory, report })
}
