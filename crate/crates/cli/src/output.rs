//! CSV and JSON writers. Every number goes through a finiteness check so
//! nothing non-numeric ever reaches a file.

use std::io::Write;

use entrysim::engine::TrajectorySample;
use entrysim::montecarlo::RunRecord;
use entrysim::{AtmosphereSample, EnsembleStats, TerminalReport};

use crate::CliError;

pub const TRAJECTORY_COLUMNS: [&str; 12] = [
    "t_s",
    "x_m",
    "y_m",
    "z_m",
    "v_m_s",
    "theta_rad",
    "psi_rad",
    "phase",
    "u_cmd",
    "u_applied",
    "mach",
    "q_pa",
];

pub const RUNS_COLUMNS: [&str; 12] = [
    "run_index",
    "seed",
    "mass_kg",
    "entry_gamma_deg",
    "entry_altitude_m",
    "density_scale",
    "target_x_m",
    "target_z_m",
    "miss_m",
    "impact_time_s",
    "downrange_m",
    "outcome",
];

pub const ATMOSPHERE_COLUMNS: [&str; 5] = [
    "altitude_m",
    "temperature_k",
    "pressure_pa",
    "density_kg_m3",
    "speed_of_sound_m_s",
];

fn num(name: &str, v: f64) -> Result<String, CliError> {
    if v.is_finite() {
        Ok(v.to_string())
    } else {
        Err(CliError::Runtime(format!("non-finite {name}: {v}")))
    }
}

fn check(fields: &[(&str, f64)]) -> Result<(), CliError> {
    fields.iter().try_for_each(|&(n, v)| num(n, v).map(|_| ()))
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Runtime(format!("writing csv: {e}"))
}

pub fn write_trajectory<W: Write>(w: W, samples: &[TrajectorySample]) -> Result<(), CliError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(TRAJECTORY_COLUMNS).map_err(csv_err)?;
    for p in samples {
        let s = &p.state;
        let row = [
            num("t", s.t)?,
            num("x", s.x)?,
            num("y", s.y)?,
            num("z", s.z)?,
            num("speed", s.speed)?,
            num("theta", s.theta)?,
            num("psi", s.psi)?,
            p.phase.as_str().to_string(),
            num("u_cmd", p.u_cmd)?,
            num("u_applied", p.u_applied)?,
            num("mach", p.mach)?,
            num("dynamic_pressure", p.dynamic_pressure)?,
        ];
        out.write_record(&row).map_err(csv_err)?;
    }
    out.flush().map_err(|e| CliError::Runtime(e.to_string()))
}

pub fn report_json(r: &TerminalReport) -> Result<String, CliError> {
    check(&[
        ("miss_distance", r.miss_distance),
        ("impact_time", r.impact_time),
        ("impact_point.x", r.impact_point.x),
        ("impact_point.z", r.impact_point.z),
        ("downrange", r.downrange),
        ("impact_speed", r.impact_speed),
        ("peak_applied_load", r.peak_applied_load),
        ("peak_dynamic_pressure", r.peak_dynamic_pressure),
        ("saturation_fraction", r.saturation_fraction),
    ])?;
    for phase in entrysim::GuidancePhase::ALL {
        if let Some(t) = r.phase_entry_times.get(phase) {
            num(phase.as_str(), t)?;
        }
    }
    to_json(r)
}

pub fn stats_json(s: &EnsembleStats) -> Result<String, CliError> {
    check(&[
        ("miss_mean", s.miss_mean),
        ("miss_std", s.miss_std),
        ("miss_min", s.miss_min),
        ("miss_max", s.miss_max),
        ("cep", s.cep),
        ("quantiles.p50", s.quantiles.p50),
        ("quantiles.p90", s.quantiles.p90),
        ("quantiles.p95", s.quantiles.p95),
        ("impact_time_mean", s.impact_time_mean),
        ("impact_time_std", s.impact_time_std),
        ("downrange_mean", s.downrange_mean),
        ("downrange_std", s.downrange_std),
    ])?;
    to_json(s)
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| CliError::Runtime(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn write_runs<W: Write>(w: W, runs: &[RunRecord]) -> Result<(), CliError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(RUNS_COLUMNS).map_err(csv_err)?;
    for r in runs {
        let s = &r.scenario;
        let row = [
            r.run_index.to_string(),
            s.seed.to_string(),
            num("mass", s.vehicle.mass)?,
            num("entry_gamma", s.entry.entry_gamma.to_degrees())?,
            num("entry_altitude", s.entry.entry_altitude)?,
            num("density_scale", s.density_scale)?,
            num("target.x", s.target.x)?,
            num("target.z", s.target.z)?,
            num("miss_distance", r.report.miss_distance)?,
            num("impact_time", r.report.impact_time)?,
            num("downrange", r.report.downrange)?,
            r.report.outcome.as_str().to_string(),
        ];
        out.write_record(&row).map_err(csv_err)?;
    }
    out.flush().map_err(|e| CliError::Runtime(e.to_string()))
}

pub fn write_atmosphere<W: Write>(w: W, rows: &[AtmosphereSample]) -> Result<(), CliError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(ATMOSPHERE_COLUMNS).map_err(csv_err)?;
    for a in rows {
        let row = [
            num("altitude", a.altitude_geometric)?,
            num("temperature", a.temperature)?,
            num("pressure", a.pressure)?,
            num("density", a.density)?,
            num("speed_of_sound", a.speed_of_sound)?,
        ];
        out.write_record(&row).map_err(csv_err)?;
    }
    out.flush().map_err(|e| CliError::Runtime(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use entrysim::engine::{ImpactPoint, Outcome, PhaseEntryTimes};

    fn report() -> TerminalReport {
        TerminalReport {
            outcome: Outcome::Impact,
            miss_distance: 1.5,
            impact_time: 100.0,
            impact_point: ImpactPoint { x: 1.0, z: 0.0 },
            downrange: 1.0,
            impact_speed: 300.0,
            phase_entry_times: PhaseEntryTimes::default(),
            peak_applied_load: 2.0,
            peak_dynamic_pressure: 1e5,
            saturation_fraction: 0.5,
        }
    }

    #[test]
    fn non_finite_report_refused() {
        assert!(report_json(&report()).is_ok());
        let bad = TerminalReport {
            miss_distance: f64::NAN,
            ..report()
        };
        assert!(matches!(report_json(&bad), Err(CliError::Runtime(_))));
        let bad = TerminalReport {
            downrange: f64::INFINITY,
            ..report()
        };
        assert!(report_json(&bad).is_err());
    }

    #[test]
    fn report_keys_in_order() {
        let text = report_json(&report()).unwrap();
        let keys: Vec<&str> = text
            .lines()
            .filter(|l| l.starts_with("  \""))
            .map(|l| l.trim().split('"').nth(1).unwrap())
            .collect();
        assert_eq!(
            keys,
            [
                "outcome",
                "miss_distance",
                "impact_time",
                "impact_point",
                "downrange",
                "impact_speed",
                "phase_entry_times",
                "peak_applied_load",
                "peak_dynamic_pressure",
                "saturation_fraction"
            ]
        );
        assert!(text.contains("\"outcome\": \"impact\""));
    }
}
