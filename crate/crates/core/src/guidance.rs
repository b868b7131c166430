//! Four-phase autopilot and the infrared seeker model.
//!
//! Each phase has its own law for the commanded load factor `U`:
//!
//! | phase                | law                      |
//! |----------------------|--------------------------|
//! | gravitational descent| `U = cos θ`              |
//! | pull-up              | `U = V²/(g R) + cos θ`   |
//! | cruise               | `U = k (H - y) + cos θ`  |
//! | terminal             | `U = k φ`                |
//!
//! where `φ` is the seeker's line-of-sight angle off the velocity vector.

use std::f64::consts::PI;
use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::dynamics::{gravity, GuidanceCommand, State};
use crate::error::{invalid, Result, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GuidancePhase {
    GravitationalDescent,
    PullUp,
    Cruise,
    Terminal,
    Impact,
}

impl GuidancePhase {
    pub const ALL: [GuidancePhase; 5] = [
        GuidancePhase::GravitationalDescent,
        GuidancePhase::PullUp,
        GuidancePhase::Cruise,
        GuidancePhase::Terminal,
        GuidancePhase::Impact,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            GuidancePhase::GravitationalDescent => "gravitational_descent",
            GuidancePhase::PullUp => "pull_up",
            GuidancePhase::Cruise => "cruise",
            GuidancePhase::Terminal => "terminal",
            GuidancePhase::Impact => "impact",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for GuidancePhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Planar flight keeps the vehicle in the x-y plane; three-dimensional
/// flight adds a lateral channel in the terminal phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlightMode {
    #[default]
    Planar,
    ThreeD,
}

/// Tunables of the autopilot and seeker. Lengths in meters, angles in
/// radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GuidanceConfig {
    /// Altitude at which the pull-up starts.
    pub pullup_altitude: f64,
    /// Radius of the pull-up arc.
    pub turn_radius: f64,
    /// Altitude held during cruise.
    pub cruise_altitude: f64,
    /// Altitude-hold gain, 1/m.
    pub k_alt: f64,
    /// Terminal gain, load factor per radian of look angle.
    pub k_terminal: f64,
    pub seeker_acquisition_range: f64,
    pub seeker_fov_half_angle: f64,
    /// One-sigma white noise on each seeker angle channel.
    pub seeker_noise_sigma: f64,
    /// How long the last seeker fix keeps steering after the target
    /// leaves the field of view, s.
    pub measurement_hold: f64,
}

impl Default for GuidanceConfig {
    fn default() -> Self {
        Self {
            pullup_altitude: 85_000.0,
            turn_radius: 45_000.0,
            cruise_altitude: 35_000.0,
            k_alt: 5e-4,
            k_terminal: 3000.0,
            seeker_acquisition_range: 130_000.0,
            seeker_fov_half_angle: 35f64.to_radians(),
            seeker_noise_sigma: 1e-3,
            measurement_hold: 0.5,
        }
    }
}

impl GuidanceConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("pullup_altitude", self.pullup_altitude),
            ("turn_radius", self.turn_radius),
            ("cruise_altitude", self.cruise_altitude),
            ("k_alt", self.k_alt),
            ("k_terminal", self.k_terminal),
            ("seeker_acquisition_range", self.seeker_acquisition_range),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(name, format!("must be positive, got {v}")));
            }
        }
        let fov = self.seeker_fov_half_angle;
        if !(fov > 0.0 && fov < PI / 2.0) {
            return Err(invalid(
                "seeker_fov_half_angle",
                format!("must lie in (0, pi/2), got {fov}"),
            ));
        }
        if !(self.seeker_noise_sigma >= 0.0 && self.seeker_noise_sigma.is_finite()) {
            return Err(invalid("seeker_noise_sigma", "must be non-negative"));
        }
        if !(self.measurement_hold >= 0.0 && self.measurement_hold.is_finite()) {
            return Err(invalid("measurement_hold", "must be non-negative"));
        }
        Ok(())
    }
}

/// State at the entry interface. `entry_gamma` is measured below the
/// horizon, so a descending entry has a positive value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntryConditions {
    pub entry_altitude: f64,
    pub entry_speed: f64,
    pub entry_gamma: f64,
    pub entry_heading: f64,
}

impl Default for EntryConditions {
    fn default() -> Self {
        Self {
            entry_altitude: 100_000.0,
            entry_speed: 7600.0,
            entry_gamma: 3.5f64.to_radians(),
            entry_heading: 0.0,
        }
    }
}

impl EntryConditions {
    pub fn validate(&self) -> Result<()> {
        let g = self.entry_gamma;
        if !(g > 0.0 && g < 15f64.to_radians()) {
            return Err(invalid(
                "entry_gamma",
                format!("must lie in (0, 15) degrees, got {}", g.to_degrees()),
            ));
        }
        if !(self.entry_speed > 0.0 && self.entry_speed.is_finite()) {
            return Err(invalid("entry_speed", "must be positive"));
        }
        if !(self.entry_altitude > 0.0 && self.entry_altitude.is_finite()) {
            return Err(invalid("entry_altitude", "must be positive"));
        }
        if !self.entry_heading.is_finite() {
            return Err(invalid("entry_heading", "must be finite"));
        }
        Ok(())
    }

    pub fn initial_state(&self) -> State {
        State {
            t: 0.0,
            x: 0.0,
            y: self.entry_altitude,
            z: 0.0,
            speed: self.entry_speed,
            theta: -self.entry_gamma,
            psi: wrap_angle(self.entry_heading),
        }
    }
}

/// Ground target. Its altitude is always zero.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Target {
    pub x: f64,
    pub z: f64,
}

/// Angles from the velocity vector to the line of sight. Elevation is
/// negative when the target is below the velocity vector; azimuth is
/// positive toward +z.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LosAngles {
    pub elevation: f64,
    pub azimuth: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeekerMeasurement {
    pub slant_range: f64,
    /// Present only when the target is acquired.
    pub angles: Option<LosAngles>,
}

impl SeekerMeasurement {
    pub fn acquired(&self) -> bool {
        self.angles.is_some()
    }
}

/// Wraps an angle into (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    let mut w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    }
    w
}

/// Noise-free line-of-sight geometry: slant range, look angles and the
/// total angle between velocity and line of sight.
pub fn line_of_sight(state: &State, target: &Target) -> (f64, LosAngles, f64) {
    let r = [target.x - state.x, -state.y, target.z - state.z];
    let slant = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
    let horizontal = r[0].hypot(r[2]);
    let los_elevation = r[1].atan2(horizontal);
    let los_azimuth = r[2].atan2(r[0]);
    let angles = LosAngles {
        elevation: los_elevation - state.theta,
        azimuth: wrap_angle(los_azimuth - state.psi),
    };
    let total = if slant > 0.0 {
        let v = state.velocity_direction();
        let cos = (v[0] * r[0] + v[1] * r[1] + v[2] * r[2]) / slant;
        cos.clamp(-1.0, 1.0).acos()
    } else {
        0.0
    };
    (slant, angles, total)
}

/// One seeker look. Gating uses the true geometry; Gaussian noise is added
/// to each reported angle when the target is acquired.
pub fn seeker_measure<R: Rng + ?Sized>(
    state: &State,
    target: &Target,
    config: &GuidanceConfig,
    rng: &mut R,
) -> SeekerMeasurement {
    let (slant_range, mut angles, total) = line_of_sight(state, target);
    let acquired =
        slant_range <= config.seeker_acquisition_range && total <= config.seeker_fov_half_angle;
    if !acquired {
        return SeekerMeasurement {
            slant_range,
            angles: None,
        };
    }
    if config.seeker_noise_sigma > 0.0 {
        let noise = Normal::new(0.0, config.seeker_noise_sigma).expect("sigma validated");
        angles.elevation += noise.sample(rng);
        angles.azimuth += noise.sample(rng);
    }
    angles.elevation = wrap_angle(angles.elevation);
    angles.azimuth = wrap_angle(angles.azimuth);
    SeekerMeasurement {
        slant_range,
        angles: Some(angles),
    }
}

/// Gravitational descent: `U = cos θ`.
pub fn control_phase1(state: &State) -> GuidanceCommand {
    GuidanceCommand::vertical(state.theta.cos())
}

/// Pull-up on an arc of radius `turn_radius`: `U = V²/(g R) + cos θ`.
pub fn control_phase2(state: &State, turn_radius: f64) -> GuidanceCommand {
    let v = state.speed;
    GuidanceCommand::vertical(v * v / (gravity(state.y) * turn_radius) + state.theta.cos())
}

/// Altitude hold: `U = k (H - y) + cos θ`.
pub fn control_phase3(state: &State, k_alt: f64, cruise_altitude: f64) -> GuidanceCommand {
    GuidanceCommand::vertical(k_alt * (cruise_altitude - state.y) + state.theta.cos())
}

/// Terminal seeker guidance: `U = k φ` on each channel.
pub fn control_phase4(
    measurement: &SeekerMeasurement,
    k_terminal: f64,
    mode: FlightMode,
) -> Result<GuidanceCommand> {
    let angles = measurement.angles.ok_or(SimError::NotAcquired)?;
    Ok(terminal_command(&angles, k_terminal, mode))
}

fn terminal_command(angles: &LosAngles, k_terminal: f64, mode: FlightMode) -> GuidanceCommand {
    GuidanceCommand {
        u_vertical: k_terminal * angles.elevation,
        u_lateral: match mode {
            FlightMode::Planar => 0.0,
            FlightMode::ThreeD => k_terminal * angles.azimuth,
        },
    }
}

/// Phase state machine. At most one forward transition per call; a
/// threshold reached exactly counts as crossed.
pub fn next_phase(
    phase: GuidancePhase,
    state: &State,
    measurement: &SeekerMeasurement,
    config: &GuidanceConfig,
) -> GuidancePhase {
    use GuidancePhase::*;
    match phase {
        GravitationalDescent if state.y <= config.pullup_altitude => PullUp,
        PullUp if state.theta >= 0.0 || state.y <= config.cruise_altitude => Cruise,
        Cruise if measurement.acquired() => Terminal,
        Terminal if state.y <= 0.0 => Impact,
        p => p,
    }
}

/// Stateful wrapper that runs the phase machine and picks the control law.
///
/// Once terminal, the last seeker fix keeps steering for
/// `measurement_hold` seconds after the target drops out of the field of
/// view; after that the vehicle flies `U = cos θ` until it reacquires.
#[derive(Debug, Clone)]
pub struct Autopilot {
    pub config: GuidanceConfig,
    pub mode: FlightMode,
    phase: GuidancePhase,
    last_fix: Option<(f64, LosAngles)>,
}

impl Autopilot {
    pub fn new(config: GuidanceConfig, mode: FlightMode) -> Self {
        Self {
            config,
            mode,
            phase: GuidancePhase::GravitationalDescent,
            last_fix: None,
        }
    }

    pub fn phase(&self) -> GuidancePhase {
        self.phase
    }

    pub fn set_phase(&mut self, phase: GuidancePhase) {
        debug_assert!(phase >= self.phase);
        self.phase = phase;
    }

    /// Advances the phase machine with this step's measurement and returns
    /// the command to hold over the next integration step.
    pub fn update(&mut self, state: &State, measurement: &SeekerMeasurement) -> GuidanceCommand {
        self.phase = next_phase(self.phase, state, measurement, &self.config);
        if let Some(angles) = measurement.angles {
            self.last_fix = Some((state.t, angles));
        }
        let c = &self.config;
        match self.phase {
            GuidancePhase::GravitationalDescent => control_phase1(state),
            GuidancePhase::PullUp => control_phase2(state, c.turn_radius),
            GuidancePhase::Cruise => control_phase3(state, c.k_alt, c.cruise_altitude),
            GuidancePhase::Terminal => match self.last_fix {
                Some((t_fix, angles)) if state.t - t_fix <= c.measurement_hold + 1e-9 => {
                    terminal_command(&angles, c.k_terminal, self.mode)
                }
                _ => control_phase1(state),
            },
            GuidancePhase::Impact => GuidanceCommand::ZERO,
        }
    }
}
