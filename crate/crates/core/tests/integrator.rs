use entrysim::atmosphere::StandardAtmosphere;
use entrysim::dynamics::{
    derivatives, gravity, DynamicsOptions, StateDerivative, EARTH_RADIUS, G0,
};
use entrysim::engine::rk4_step;
use entrysim::{GuidanceCommand, State, VehicleParams};

const G: f64 = 9.80665;

/// Drag-free arc under constant gravity in (V, theta) form.
fn ballistic(s: &State) -> entrysim::Result<StateDerivative> {
    let (st, ct) = s.theta.sin_cos();
    Ok(StateDerivative {
        t: 1.0,
        x: s.speed * ct,
        y: s.speed * st,
        z: 0.0,
        speed: -G * st,
        theta: -G * ct / s.speed,
        psi: 0.0,
    })
}

fn start() -> State {
    State {
        y: 10_000.0,
        speed: 200.0,
        theta: 1.0,
        ..Default::default()
    }
}

fn position_error(dt: f64, duration: f64) -> f64 {
    let s0 = start();
    let steps = (duration / dt).round() as usize;
    let mut s = s0;
    for _ in 0..steps {
        s = rk4_step(&s, dt, ballistic).unwrap();
    }
    let t = steps as f64 * dt;
    let x = s0.speed * s0.theta.cos() * t;
    let y = s0.y + s0.speed * s0.theta.sin() * t - 0.5 * G * t * t;
    ((s.x - x).powi(2) + (s.y - y).powi(2)).sqrt()
}

#[test]
fn fourth_order_convergence() {
    let coarse = position_error(0.4, 40.0);
    let fine = position_error(0.2, 40.0);
    let ratio = coarse / fine;
    assert!(ratio >= 15.0, "error ratio {ratio} ({coarse} -> {fine})");
    assert!(ratio < 17.0, "error ratio {ratio}");
}

#[test]
fn vacuum_drop_from_rest() {
    let s0 = State {
        y: 1000.0,
        speed: 1e-9,
        theta: -std::f64::consts::FRAC_PI_2,
        ..Default::default()
    };
    let f = |s: &State| {
        Ok(StateDerivative {
            t: 1.0,
            y: s.speed * s.theta.sin(),
            speed: G,
            ..Default::default()
        })
    };
    let mut s = s0;
    for _ in 0..100 {
        s = rk4_step(&s, 0.01, f).unwrap();
    }
    assert!((s.y - s0.y + 4.903325).abs() < 1e-6, "dy = {}", s.y - s0.y);
    assert!((s.t - 1.0).abs() < 1e-12);
}

#[test]
fn fixed_point_only_advances_time() {
    let s0 = State {
        x: 3.0,
        y: 7.0,
        speed: 5.0,
        ..Default::default()
    };
    let f = |_: &State| {
        Ok(StateDerivative {
            t: 1.0,
            ..Default::default()
        })
    };
    let s = rk4_step(&s0, 0.25, f).unwrap();
    assert_eq!(State { t: 0.25, ..s0 }, s);
}

#[test]
fn vacuum_coast_conserves_energy() {
    let vacuum = StandardAtmosphere { density_scale: 0.0 };
    let vehicle = VehicleParams::default();
    let opts = DynamicsOptions {
        curvature_term: false,
    };
    let mu = G0 * EARTH_RADIUS * EARTH_RADIUS;
    let energy = |s: &State| 0.5 * s.speed * s.speed - mu / (EARTH_RADIUS + s.y);

    let mut s = State {
        y: 100_000.0,
        speed: 7600.0,
        theta: 0.3,
        ..Default::default()
    };
    let e0 = energy(&s);
    let f =
        |s: &State| derivatives(s, GuidanceCommand::ZERO, &vehicle, &vacuum, opts).map(|e| e.rates);
    for _ in 0..30_000 {
        s = rk4_step(&s, 0.01, f).unwrap();
    }
    assert!((s.t - 300.0).abs() < 1e-9);
    assert!(s.y > 0.0);
    let drift = ((energy(&s) - e0) / e0).abs();
    assert!(drift < 1e-6, "relative energy drift {drift:e}");
    assert!(gravity(s.y) < G0);
}
