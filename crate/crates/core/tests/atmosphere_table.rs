use entrysim::atmosphere::{
    geometric_altitude, geopotential_altitude, sample, LAYERED_TOP, VACUUM_CEILING,
};
use proptest::prelude::*;

/// Layer bases of the 1976 standard: geopotential altitude (m),
/// temperature (K), pressure (Pa), density (kg/m^3).
const TABLE: [(f64, f64, f64, f64); 7] = [
    (0.0, 288.15, 101_325.0, 1.2250),
    (11_000.0, 216.65, 22_632.0, 0.36392),
    (20_000.0, 216.65, 5_474.9, 0.088035),
    (32_000.0, 228.65, 868.02, 0.013225),
    (47_000.0, 270.65, 110.91, 0.0014275),
    (51_000.0, 270.65, 66.939, 0.00086160),
    (71_000.0, 214.65, 3.9564, 0.000064211),
];

#[test]
fn layer_bases_match_published_values() {
    for (h, t, p, rho) in TABLE {
        let s = sample(geometric_altitude(h).unwrap()).unwrap();
        assert!(
            (s.temperature - t).abs() <= 0.05,
            "T at {h}: {}",
            s.temperature
        );
        assert!(
            ((s.density - rho) / rho).abs() <= 0.005,
            "rho at {h}: {}",
            s.density
        );
        assert!(
            ((s.pressure - p) / p).abs() <= 0.005,
            "p at {h}: {}",
            s.pressure
        );
    }
}

#[test]
fn mid_layer_values() {
    // 5 km and 25 km geometric from the published tables
    let s = sample(5_000.0).unwrap();
    assert!((s.temperature - 255.676).abs() < 0.05);
    assert!(((s.density - 0.73643) / 0.73643).abs() < 0.005);
    let s = sample(25_000.0).unwrap();
    assert!((s.temperature - 221.552).abs() < 0.05);
    assert!(((s.density - 0.040084) / 0.040084).abs() < 0.005);
}

#[test]
fn dense_scan_monotone() {
    let mut prev = sample(0.0).unwrap();
    for i in 1..=1500 {
        let s = sample(i as f64 * 100.0).unwrap();
        assert!(s.density <= prev.density, "density rises at {} m", i * 100);
        assert!(s.pressure <= prev.pressure);
        assert!(s.temperature > 150.0 && s.temperature < 300.0);
        prev = s;
    }
}

proptest! {
    #[test]
    fn continuous_everywhere(h in 0.0..VACUUM_CEILING - 1.0) {
        let a = sample(h).unwrap();
        let b = sample(h + 0.01).unwrap();
        prop_assert!((a.temperature - b.temperature).abs() < 1e-3);
        prop_assert!((a.density - b.density).abs() <= 1e-5 * a.density + 1e-15);
    }

    #[test]
    fn ideal_gas_holds(h in 0.0..LAYERED_TOP) {
        let s = sample(h).unwrap();
        let rho = s.pressure / (287.053 * s.temperature);
        prop_assert!(((s.density - rho) / rho).abs() < 1e-12);
    }

    #[test]
    fn geopotential_round_trip(h in 0.0..200_000.0f64) {
        let back = geometric_altitude(geopotential_altitude(h).unwrap()).unwrap();
        prop_assert!((back - h).abs() < 1e-6);
        prop_assert!(geopotential_altitude(h).unwrap() <= h);
    }
}
