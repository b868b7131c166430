//! Point-mass equations of motion.
//!
//! The vertical channel uses the load-factor form
//!
//! ```text
//! dθ/dt = (g/V)(n_v - cos θ) + (V/(Re + y)) cos θ
//! ```
//!
//! in which `n_v = cos θ` flies a straight line, `n_v = V²/(gR) + cos θ` turns
//! on a circle of radius `R`, and `n_v = cos θ` at `θ = 0` holds altitude.
//! The last term is the Earth-curvature correction and can be switched off.

use serde::{Deserialize, Serialize};

use crate::atmosphere::Atmosphere;
use crate::error::{invalid, Result, SimError};

/// Standard gravity at the surface, m/s^2.
pub const G0: f64 = 9.80665;
/// Mean Earth radius for gravity and curvature, m.
pub const EARTH_RADIUS: f64 = 6_371_000.0;

/// Kinematic state of the vehicle.
///
/// `x` is downrange, `y` altitude and `z` crossrange. `theta` is the
/// flight-path angle above the local horizontal and `psi` the heading
/// measured from the downrange axis toward +z.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct State {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub speed: f64,
    pub theta: f64,
    pub psi: f64,
}

/// Time derivative of [`State`]. `t` is always 1.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StateDerivative {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub speed: f64,
    pub theta: f64,
    pub psi: f64,
}

impl State {
    /// `self + h * rates`, component-wise.
    pub fn advanced(&self, rates: &StateDerivative, h: f64) -> State {
        State {
            t: self.t + h * rates.t,
            x: self.x + h * rates.x,
            y: self.y + h * rates.y,
            z: self.z + h * rates.z,
            speed: self.speed + h * rates.speed,
            theta: self.theta + h * rates.theta,
            psi: self.psi + h * rates.psi,
        }
    }

    pub fn is_finite(&self) -> bool {
        [
            self.t, self.x, self.y, self.z, self.speed, self.theta, self.psi,
        ]
        .iter()
        .all(|v| v.is_finite())
    }

    /// Unit vector along the velocity, in (x, y, z).
    pub fn velocity_direction(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.psi.sin_cos();
        [ct * cp, st, ct * sp]
    }
}

impl StateDerivative {
    pub fn is_finite(&self) -> bool {
        [
            self.t, self.x, self.y, self.z, self.speed, self.theta, self.psi,
        ]
        .iter()
        .all(|v| v.is_finite())
    }

    /// Weighted sum `(k1 + 2 k2 + 2 k3 + k4) / 6`.
    pub(crate) fn rk4_blend(k1: &Self, k2: &Self, k3: &Self, k4: &Self) -> Self {
        let f = |a: f64, b: f64, c: f64, d: f64| (a + 2.0 * b + 2.0 * c + d) / 6.0;
        StateDerivative {
            t: f(k1.t, k2.t, k3.t, k4.t),
            x: f(k1.x, k2.x, k3.x, k4.x),
            y: f(k1.y, k2.y, k3.y, k4.y),
            z: f(k1.z, k2.z, k3.z, k4.z),
            speed: f(k1.speed, k2.speed, k3.speed, k4.speed),
            theta: f(k1.theta, k2.theta, k3.theta, k4.theta),
            psi: f(k1.psi, k2.psi, k3.psi, k4.psi),
        }
    }
}

/// Aerodynamic and mass properties of the vehicle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleParams {
    /// kg
    pub mass: f64,
    /// Reference (wing) area, m^2.
    pub ref_area: f64,
    /// Ratio of lift to lift-induced drag.
    pub lift_to_drag: f64,
    /// Zero-lift drag coefficient.
    pub cx0: f64,
    /// Largest lift coefficient the airframe can trim to.
    pub cy_max: f64,
}

impl Default for VehicleParams {
    fn default() -> Self {
        Self {
            mass: 1500.0,
            ref_area: 2.0,
            lift_to_drag: 2.0,
            cx0: 0.15,
            cy_max: 0.33,
        }
    }
}

impl VehicleParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("mass", self.mass),
            ("ref_area", self.ref_area),
            ("lift_to_drag", self.lift_to_drag),
            ("cy_max", self.cy_max),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(name, format!("must be positive, got {v}")));
            }
        }
        if !(self.cx0 >= 0.0 && self.cx0.is_finite()) {
            return Err(invalid(
                "cx0",
                format!("must be non-negative, got {}", self.cx0),
            ));
        }
        Ok(())
    }
}

/// Commanded load factors in units of local gravity.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GuidanceCommand {
    pub u_vertical: f64,
    pub u_lateral: f64,
}

impl GuidanceCommand {
    pub const ZERO: GuidanceCommand = GuidanceCommand {
        u_vertical: 0.0,
        u_lateral: 0.0,
    };

    pub fn vertical(u: f64) -> Self {
        Self {
            u_vertical: u,
            u_lateral: 0.0,
        }
    }

    pub fn magnitude(&self) -> f64 {
        self.u_vertical.hypot(self.u_lateral)
    }
}

/// Inverse-square gravity at altitude `y` above the mean sphere.
pub fn gravity(altitude: f64) -> f64 {
    let r = EARTH_RADIUS / (EARTH_RADIUS + altitude);
    G0 * r * r
}

/// Limits a command to the lift the airframe can produce at this dynamic
/// pressure. Returns the applied command and whether it was cut back.
///
/// Both channels are scaled together so the commanded direction is kept.
pub fn achieved_load(
    command: GuidanceCommand,
    dynamic_pressure: f64,
    vehicle: &VehicleParams,
    gravity: f64,
) -> (GuidanceCommand, bool) {
    let demand = command.magnitude();
    if demand == 0.0 {
        return (GuidanceCommand::ZERO, false);
    }
    if dynamic_pressure <= 0.0 {
        return (GuidanceCommand::ZERO, true);
    }
    let cy_required = demand * vehicle.mass * gravity / (dynamic_pressure * vehicle.ref_area);
    if cy_required > vehicle.cy_max {
        let scale = vehicle.cy_max / cy_required;
        let applied = GuidanceCommand {
            u_vertical: command.u_vertical * scale,
            u_lateral: command.u_lateral * scale,
        };
        (applied, true)
    } else {
        (command, false)
    }
}

/// Switches for the force model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DynamicsOptions {
    /// Include the `(V/(Re + y)) cos θ` flight-path-angle term.
    pub curvature_term: bool,
}

/// Derivative together with the force-model quantities it was built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub rates: StateDerivative,
    pub applied: GuidanceCommand,
    pub saturated: bool,
    pub dynamic_pressure: f64,
    pub drag: f64,
    pub mach: f64,
}

/// The curvature contribution to `dθ/dt`.
pub fn curvature_rate(state: &State) -> f64 {
    state.speed / (EARTH_RADIUS + state.y) * state.theta.cos()
}

/// Equations of motion for a commanded load factor.
///
/// Altitudes below zero (which RK4 stages can visit on the impact step)
/// use sea-level air.
pub fn derivatives<A: Atmosphere + ?Sized>(
    state: &State,
    command: GuidanceCommand,
    vehicle: &VehicleParams,
    atmosphere: &A,
    options: DynamicsOptions,
) -> Result<Evaluation> {
    let v = state.speed;
    if !(v > 0.0) {
        return Err(SimError::NonPositiveSpeed(v));
    }
    let g = gravity(state.y);
    let air = atmosphere.sample(state.y.max(0.0))?;
    let q = 0.5 * air.density * v * v;
    let (applied, saturated) = achieved_load(command, q, vehicle, g);

    let weight = vehicle.mass * g;
    let lift_v = applied.u_vertical * weight;
    let lift_l = applied.u_lateral * weight;
    let drag =
        q * vehicle.ref_area * vehicle.cx0 + (lift_v.abs() + lift_l.abs()) / vehicle.lift_to_drag;

    let (st, ct) = state.theta.sin_cos();
    let (sp, cp) = state.psi.sin_cos();
    let mut theta_rate = g / v * (applied.u_vertical - ct);
    if options.curvature_term {
        theta_rate += curvature_rate(state);
    }
    let psi_rate = if applied.u_lateral == 0.0 {
        0.0
    } else {
        g / v * applied.u_lateral / ct.max(1e-6)
    };

    let rates = StateDerivative {
        t: 1.0,
        x: v * ct * cp,
        y: v * st,
        z: v * ct * sp,
        speed: -drag / vehicle.mass - g * st,
        theta: theta_rate,
        psi: psi_rate,
    };
    if !rates.is_finite() {
        return Err(SimError::NonFinite);
    }
    Ok(Evaluation {
        rates,
        applied,
        saturated,
        dynamic_pressure: q,
        drag,
        mach: v / air.speed_of_sound,
    })
}
