//! Static standard atmosphere.
//!
//! 0-86 km follows the seven-layer US Standard Atmosphere 1976 profile on
//! geopotential altitude. Between 86 and 150 km density decays
//! exponentially with a fixed scale height at the 86 km temperature. Above
//! 150 km the model returns vacuum.

use serde::Serialize;

use crate::error::{Result, SimError};

/// Specific gas constant of dry air, J/(kg K).
pub const R_AIR: f64 = 287.053;
/// Ratio of specific heats for air.
pub const GAMMA_AIR: f64 = 1.4;
/// Standard gravity used by the layer hydrostatics, m/s^2.
pub const G0: f64 = 9.80665;
/// Earth radius used for the geopotential conversion, m.
pub const EARTH_RADIUS_GEOPOTENTIAL: f64 = 6_356_766.0;

/// Geometric altitude at the top of the layered model, m.
pub const LAYERED_TOP: f64 = 86_000.0;
/// Density scale height of the exponential continuation, m.
pub const SCALE_HEIGHT: f64 = 7_200.0;
/// Geometric altitude above which the model is vacuum, m.
pub const VACUUM_CEILING: f64 = 150_000.0;

/// One layer of the 1976 profile: base geopotential altitude (m), base
/// temperature (K), lapse rate (K/m) and base pressure (Pa).
#[derive(Debug, Clone, Copy)]
struct Layer {
    base: f64,
    temperature: f64,
    lapse: f64,
    pressure: f64,
}

const LAYERS: [Layer; 7] = [
    Layer {
        base: 0.0,
        temperature: 288.15,
        lapse: -0.0065,
        pressure: 101_325.0,
    },
    Layer {
        base: 11_000.0,
        temperature: 216.65,
        lapse: 0.0,
        pressure: 22_632.06,
    },
    Layer {
        base: 20_000.0,
        temperature: 216.65,
        lapse: 0.001,
        pressure: 5_474.889,
    },
    Layer {
        base: 32_000.0,
        temperature: 228.65,
        lapse: 0.0028,
        pressure: 868.0187,
    },
    Layer {
        base: 47_000.0,
        temperature: 270.65,
        lapse: 0.0,
        pressure: 110.9063,
    },
    Layer {
        base: 51_000.0,
        temperature: 270.65,
        lapse: -0.0028,
        pressure: 66.938_87,
    },
    Layer {
        base: 71_000.0,
        temperature: 214.65,
        lapse: -0.002,
        pressure: 3.956_420,
    },
];

/// Thermodynamic state of the air at one altitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AtmosphereSample {
    /// Geometric altitude, m.
    pub altitude_geometric: f64,
    /// K
    pub temperature: f64,
    /// Pa
    pub pressure: f64,
    /// kg/m^3
    pub density: f64,
    /// m/s
    pub speed_of_sound: f64,
}

/// Converts geometric altitude to geopotential altitude.
pub fn geopotential_altitude(geometric: f64) -> Result<f64> {
    if geometric < 0.0 || geometric.is_nan() {
        return Err(SimError::NegativeAltitude(geometric));
    }
    Ok(EARTH_RADIUS_GEOPOTENTIAL * geometric / (EARTH_RADIUS_GEOPOTENTIAL + geometric))
}

/// Inverse of [`geopotential_altitude`], valid for `0 <= h < Re`.
pub fn geometric_altitude(geopotential: f64) -> Result<f64> {
    if geopotential < 0.0 || geopotential.is_nan() {
        return Err(SimError::NegativeAltitude(geopotential));
    }
    Ok(EARTH_RADIUS_GEOPOTENTIAL * geopotential / (EARTH_RADIUS_GEOPOTENTIAL - geopotential))
}

/// Speed of sound of an ideal diatomic gas, `sqrt(gamma R T)`.
pub fn speed_of_sound(temperature: f64) -> Result<f64> {
    if temperature <= 0.0 || temperature.is_nan() {
        return Err(SimError::NonPositiveTemperature(temperature));
    }
    Ok((GAMMA_AIR * R_AIR * temperature).sqrt())
}

fn layered(geopotential: f64) -> (f64, f64) {
    let layer = LAYERS
        .iter()
        .rev()
        .find(|l| geopotential >= l.base)
        .unwrap_or(&LAYERS[0]);
    let dh = geopotential - layer.base;
    if layer.lapse == 0.0 {
        let p = layer.pressure * (-G0 * dh / (R_AIR * layer.temperature)).exp();
        (layer.temperature, p)
    } else {
        let t = layer.temperature + layer.lapse * dh;
        let p = layer.pressure * (t / layer.temperature).powf(-G0 / (layer.lapse * R_AIR));
        (t, p)
    }
}

/// Samples the standard atmosphere at a geometric altitude in meters.
pub fn sample(altitude_geometric: f64) -> Result<AtmosphereSample> {
    let h = altitude_geometric;
    if h < 0.0 || h.is_nan() {
        return Err(SimError::NegativeAltitude(h));
    }
    let (temperature, pressure, density) = if h <= LAYERED_TOP {
        let (t, p) = layered(geopotential_altitude(h)?);
        (t, p, p / (R_AIR * t))
    } else {
        let (t_top, p_top) = layered(geopotential_altitude(LAYERED_TOP)?);
        if h > VACUUM_CEILING {
            (t_top, 0.0, 0.0)
        } else {
            let rho = p_top / (R_AIR * t_top) * (-(h - LAYERED_TOP) / SCALE_HEIGHT).exp();
            (t_top, rho * R_AIR * t_top, rho)
        }
    };
    Ok(AtmosphereSample {
        altitude_geometric: h,
        temperature,
        pressure,
        density,
        speed_of_sound: speed_of_sound(temperature)?,
    })
}

/// Anything that can report air properties at an altitude.
///
/// The dynamics only talk to the air through this trait so that dispersed
/// runs can scale density without touching the reference model.
pub trait Atmosphere {
    fn sample(&self, altitude_geometric: f64) -> Result<AtmosphereSample>;
}

/// The standard model, optionally with density (and therefore pressure)
/// scaled by a constant factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StandardAtmosphere {
    pub density_scale: f64,
}

impl Default for StandardAtmosphere {
    fn default() -> Self {
        Self { density_scale: 1.0 }
    }
}

impl Atmosphere for StandardAtmosphere {
    fn sample(&self, altitude_geometric: f64) -> Result<AtmosphereSample> {
        let mut s = sample(altitude_geometric)?;
        s.density *= self.density_scale;
        s.pressure *= self.density_scale;
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sea_level() {
        let s = sample(0.0).unwrap();
        assert_relative_eq!(s.temperature, 288.15, max_relative = 1e-3);
        assert_relative_eq!(s.density, 1.225, max_relative = 1e-3);
        assert_relative_eq!(s.pressure, 101_325.0, max_relative = 1e-9);
    }

    #[test]
    fn tropopause() {
        let h = geometric_altitude(11_000.0).unwrap();
        let s = sample(h).unwrap();
        assert_relative_eq!(s.temperature, 216.65, max_relative = 1e-3);
        assert_relative_eq!(s.speed_of_sound, 295.07, max_relative = 1e-3);
    }

    #[test]
    fn vacuum_above_ceiling() {
        let s = sample(160_000.0).unwrap();
        assert_eq!(s.density, 0.0);
        assert_eq!(s.pressure, 0.0);
        let top = sample(150_000.0).unwrap();
        assert_eq!(s.temperature, top.temperature);
        assert_eq!(s.speed_of_sound, top.speed_of_sound);
    }

    #[test]
    fn negative_altitude_rejected() {
        assert_eq!(sample(-1.0), Err(SimError::NegativeAltitude(-1.0)));
        assert!(geopotential_altitude(-5.0).is_err());
    }

    #[test]
    fn sound_speed_closed_form() {
        assert!((speed_of_sound(288.15).unwrap() - 340.29).abs() < 0.01);
        assert!((speed_of_sound(216.65).unwrap() - 295.07).abs() < 0.01);
        let a = speed_of_sound(288.15).unwrap();
        assert_relative_eq!(
            speed_of_sound(4.0 * 288.15).unwrap(),
            2.0 * a,
            max_relative = 1e-15
        );
        assert!(speed_of_sound(0.0).is_err());
        assert!(speed_of_sound(-10.0).is_err());
    }

    #[test]
    fn geopotential_conversion() {
        assert_eq!(geopotential_altitude(0.0).unwrap(), 0.0);
        assert!((geopotential_altitude(86_000.0).unwrap() - 84_852.0).abs() < 1.0);
        let back = geometric_altitude(geopotential_altitude(42_000.0).unwrap()).unwrap();
        assert_relative_eq!(back, 42_000.0, max_relative = 1e-12);
    }

    #[test]
    fn continuous_across_86_km() {
        let below = sample(LAYERED_TOP).unwrap();
        let above = sample(LAYERED_TOP + 1e-6).unwrap();
        assert_relative_eq!(below.density, above.density, max_relative = 1e-6);
        assert_relative_eq!(below.temperature, above.temperature, max_relative = 1e-12);
    }

    #[test]
    fn scaled_density() {
        let atm = StandardAtmosphere { density_scale: 1.1 };
        let s = atm.sample(30_000.0).unwrap();
        let r = sample(30_000.0).unwrap();
        assert_relative_eq!(s.density, 1.1 * r.density, max_relative = 1e-14);
        assert_eq!(s.temperature, r.temperature);
    }
}
