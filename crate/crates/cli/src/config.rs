//! Configuration file model.
//!
//! The file is TOML. Top-level keys are the scalar scenario settings;
//! `[entry]`, `[vehicle]`, `[guidance]`, `[target]` and `[dispersion]` hold
//! the rest. Every key is optional. Angles are degrees here and radians
//! everywhere else.

use entrysim::montecarlo::UniformRange;
use entrysim::{
    DispersionSpec, EntryConditions, FlightMode, GuidanceConfig, Scenario, SimError, Target,
    VehicleParams,
};
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EntrySection {
    pub entry_altitude: f64,
    pub entry_speed: f64,
    pub entry_gamma: f64,
    pub entry_heading: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VehicleSection {
    pub mass: f64,
    pub ref_area: f64,
    pub lift_to_drag: f64,
    pub cx0: f64,
    pub cy_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GuidanceSection {
    pub pullup_altitude: f64,
    pub turn_radius: f64,
    pub cruise_altitude: f64,
    pub k_alt: f64,
    pub k_terminal: f64,
    pub seeker_acquisition_range: f64,
    pub seeker_fov_half_angle: f64,
    pub seeker_noise_sigma: f64,
    pub measurement_hold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TargetSection {
    pub x: f64,
    pub z: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DispersionSection {
    pub n_runs: usize,
    pub base_seed: u64,
    pub mass_range: [f64; 2],
    pub entry_gamma_range: [f64; 2],
    pub entry_altitude_range: [f64; 2],
    pub density_multiplier_sigma: f64,
    pub seeker_noise_sigma: f64,
    pub target_offset_sigma: f64,
}

/// A whole configuration document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub dt: f64,
    pub max_time: f64,
    pub mode: FlightMode,
    pub curvature_term: bool,
    pub density_scale: f64,
    pub seed: u64,
    pub output_every: usize,
    pub entry: EntrySection,
    pub vehicle: VehicleSection,
    pub guidance: GuidanceSection,
    pub target: TargetSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dispersion: Option<DispersionSection>,
}

impl Default for EntrySection {
    fn default() -> Self {
        Self::from(&EntryConditions::default())
    }
}

impl Default for VehicleSection {
    fn default() -> Self {
        Self::from(&VehicleParams::default())
    }
}

impl Default for GuidanceSection {
    fn default() -> Self {
        Self::from(&GuidanceConfig::default())
    }
}

impl Default for TargetSection {
    fn default() -> Self {
        let t = Scenario::default().target;
        Self { x: t.x, z: t.z }
    }
}

impl Default for DispersionSection {
    fn default() -> Self {
        Self::from(&DispersionSpec::default())
    }
}

impl Default for ConfigFile {
    fn default() -> Self {
        Self::from_scenario(&Scenario::default(), None)
    }
}

impl From<&EntryConditions> for EntrySection {
    fn from(e: &EntryConditions) -> Self {
        Self {
            entry_altitude: e.entry_altitude,
            entry_speed: e.entry_speed,
            entry_gamma: e.entry_gamma.to_degrees(),
            entry_heading: e.entry_heading.to_degrees(),
        }
    }
}

impl From<&VehicleParams> for VehicleSection {
    fn from(v: &VehicleParams) -> Self {
        Self {
            mass: v.mass,
            ref_area: v.ref_area,
            lift_to_drag: v.lift_to_drag,
            cx0: v.cx0,
            cy_max: v.cy_max,
        }
    }
}

impl From<&GuidanceConfig> for GuidanceSection {
    fn from(g: &GuidanceConfig) -> Self {
        Self {
            pullup_altitude: g.pullup_altitude,
            turn_radius: g.turn_radius,
            cruise_altitude: g.cruise_altitude,
            k_alt: g.k_alt,
            k_terminal: g.k_terminal,
            seeker_acquisition_range: g.seeker_acquisition_range,
            seeker_fov_half_angle: g.seeker_fov_half_angle.to_degrees(),
            seeker_noise_sigma: g.seeker_noise_sigma.to_degrees(),
            measurement_hold: g.measurement_hold,
        }
    }
}

impl From<&DispersionSpec> for DispersionSection {
    fn from(d: &DispersionSpec) -> Self {
        let pair = |r: UniformRange| [r.low, r.high];
        Self {
            n_runs: d.n_runs,
            base_seed: d.base_seed,
            mass_range: pair(d.mass_range),
            entry_gamma_range: pair(d.entry_gamma_range),
            entry_altitude_range: pair(d.entry_altitude_range),
            density_multiplier_sigma: d.density_multiplier_sigma,
            seeker_noise_sigma: d.seeker_noise_sigma.to_degrees(),
            target_offset_sigma: d.target_offset_sigma,
        }
    }
}

impl DispersionSection {
    pub fn spec(&self) -> DispersionSpec {
        let range = |p: [f64; 2]| UniformRange::new(p[0], p[1]);
        DispersionSpec {
            n_runs: self.n_runs,
            base_seed: self.base_seed,
            mass_range: range(self.mass_range),
            entry_gamma_range: range(self.entry_gamma_range),
            entry_altitude_range: range(self.entry_altitude_range),
            density_multiplier_sigma: self.density_multiplier_sigma,
            seeker_noise_sigma: self.seeker_noise_sigma.to_radians(),
            target_offset_sigma: self.target_offset_sigma,
        }
    }
}

impl ConfigFile {
    pub fn from_scenario(s: &Scenario, dispersion: Option<&DispersionSpec>) -> Self {
        Self {
            dt: s.dt,
            max_time: s.max_time,
            mode: s.mode,
            curvature_term: s.curvature_term,
            density_scale: s.density_scale,
            seed: s.seed,
            output_every: s.output_every,
            entry: EntrySection::from(&s.entry),
            vehicle: VehicleSection::from(&s.vehicle),
            guidance: GuidanceSection::from(&s.guidance),
            target: TargetSection {
                x: s.target.x,
                z: s.target.z,
            },
            dispersion: dispersion.map(DispersionSection::from),
        }
    }

    /// Defaults with every section present, as printed by `schema`.
    pub fn full_default() -> Self {
        Self {
            dispersion: Some(DispersionSection::default()),
            ..Self::default()
        }
    }

    pub fn scenario(&self) -> Scenario {
        let e = &self.entry;
        let g = &self.guidance;
        let v = &self.vehicle;
        Scenario {
            entry: EntryConditions {
                entry_altitude: e.entry_altitude,
                entry_speed: e.entry_speed,
                entry_gamma: e.entry_gamma.to_radians(),
                entry_heading: e.entry_heading.to_radians(),
            },
            vehicle: VehicleParams {
                mass: v.mass,
                ref_area: v.ref_area,
                lift_to_drag: v.lift_to_drag,
                cx0: v.cx0,
                cy_max: v.cy_max,
            },
            guidance: GuidanceConfig {
                pullup_altitude: g.pullup_altitude,
                turn_radius: g.turn_radius,
                cruise_altitude: g.cruise_altitude,
                k_alt: g.k_alt,
                k_terminal: g.k_terminal,
                seeker_acquisition_range: g.seeker_acquisition_range,
                seeker_fov_half_angle: g.seeker_fov_half_angle.to_radians(),
                seeker_noise_sigma: g.seeker_noise_sigma.to_radians(),
                measurement_hold: g.measurement_hold,
            },
            target: Target {
                x: self.target.x,
                z: self.target.z,
            },
            mode: self.mode,
            dt: self.dt,
            max_time: self.max_time,
            curvature_term: self.curvature_term,
            density_scale: self.density_scale,
            seed: self.seed,
            output_every: self.output_every,
        }
    }

    /// Scenario checked against its invariants.
    pub fn validated_scenario(&self) -> Result<Scenario, CliError> {
        let s = self.scenario();
        s.validate().map_err(|e| config_error(e, None))?;
        Ok(s)
    }

    /// Dispersion spec checked against its invariants. The section is
    /// mandatory here.
    pub fn validated_dispersion(&self) -> Result<DispersionSpec, CliError> {
        let d = self
            .dispersion
            .ok_or_else(|| CliError::Config("missing [dispersion] section".into()))?;
        let spec = d.spec();
        spec.validate()
            .map_err(|e| config_error(e, Some("dispersion")))?;
        Ok(spec)
    }
}

fn config_error(e: SimError, section: Option<&str>) -> CliError {
    match e {
        SimError::InvalidParameter { field, reason } => {
            let key = match section {
                Some(s) => format!("{s}.{field}"),
                None => qualified(field),
            };
            CliError::Config(format!("invalid `{key}`: {reason}"))
        }
        other => CliError::Config(other.to_string()),
    }
}

/// Dotted name of a scenario key, e.g. `vehicle.mass` for `mass`.
fn qualified(key: &str) -> String {
    let schema = schema_table();
    if schema.get(key).is_some_and(|v| !v.is_table()) {
        return key.to_string();
    }
    for section in ["entry", "vehicle", "guidance", "target"] {
        if schema
            .get(section)
            .and_then(Value::as_table)
            .is_some_and(|t| t.contains_key(key))
        {
            return format!("{section}.{key}");
        }
    }
    key.to_string()
}

/// Default document with every section, as a TOML table.
pub fn schema_table() -> Table {
    Table::try_from(ConfigFile::full_default()).expect("default config serializes")
}

/// Resolves an override key to `(section, key)`. Bare keys may name a
/// top-level setting or a key that exists in exactly one section.
fn resolve_key(schema: &Table, key: &str) -> Result<(Option<String>, String), CliError> {
    let unknown = || CliError::Config(format!("unknown configuration key `{key}`"));
    if let Some((section, field)) = key.split_once('.') {
        let t = schema
            .get(section)
            .and_then(Value::as_table)
            .ok_or_else(unknown)?;
        if field.contains('.') || !t.contains_key(field) {
            return Err(unknown());
        }
        return Ok((Some(section.to_string()), field.to_string()));
    }
    if schema.get(key).is_some_and(|v| !v.is_table()) {
        return Ok((None, key.to_string()));
    }
    let owners: Vec<&String> = schema
        .iter()
        .filter(|(_, v)| v.as_table().is_some_and(|t| t.contains_key(key)))
        .map(|(s, _)| s)
        .collect();
    match owners.as_slice() {
        [one] => Ok((Some((*one).clone()), key.to_string())),
        [] => Err(unknown()),
        many => {
            let options: Vec<String> = many.iter().map(|s| format!("{s}.{key}")).collect();
            Err(CliError::Config(format!(
                "ambiguous key `{key}`, use one of: {}",
                options.join(", ")
            )))
        }
    }
}

fn parse_value(raw: &str) -> Value {
    toml::from_str::<Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

/// Applies one `key=value` override to a parsed document.
pub fn apply_override(doc: &mut Table, assignment: &str) -> Result<(), CliError> {
    let (key, raw) = assignment.split_once('=').ok_or_else(|| {
        CliError::Config(format!(
            "override `{assignment}` is not of the form key=value"
        ))
    })?;
    let (section, field) = resolve_key(&schema_table(), key.trim())?;
    let value = parse_value(raw.trim());
    let target = match section {
        None => doc,
        Some(s) => {
            let slot = doc
                .entry(s.clone())
                .or_insert_with(|| Value::Table(Table::new()));
            slot.as_table_mut()
                .ok_or_else(|| CliError::Config(format!("`{s}` must be a table")))?
        }
    };
    target.insert(field, value);
    Ok(())
}

/// Parses a document, applies overrides in order and deserializes the
/// result. Errors name the offending key.
pub fn load(text: &str, overrides: &[String]) -> Result<ConfigFile, CliError> {
    let mut doc: Table =
        toml::from_str(text).map_err(|e| CliError::Config(format!("malformed config: {e}")))?;
    for o in overrides {
        apply_override(&mut doc, o)?;
    }
    serde_path_to_error::deserialize(doc).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." {
            CliError::Config(inner.to_string())
        } else {
            CliError::Config(format!("invalid `{path}`: {inner}"))
        }
    })
}

/// Units and one-line descriptions, in schema order.
pub const FIELDS: &[(&str, &str, &str, &str)] = &[
    ("", "dt", "s", "integration step"),
    ("", "max_time", "s", "simulated-time limit"),
    ("", "mode", "-", "\"planar\" or \"three_d\""),
    (
        "",
        "curvature_term",
        "-",
        "include the Earth-curvature term in the flight-path-angle rate",
    ),
    (
        "",
        "density_scale",
        "-",
        "multiplier on standard-atmosphere density",
    ),
    ("", "seed", "-", "seeker noise seed for single runs"),
    (
        "",
        "output_every",
        "-",
        "keep every Nth step in trajectory.csv",
    ),
    ("entry", "entry_altitude", "m", "initial altitude"),
    ("entry", "entry_speed", "m/s", "initial speed"),
    (
        "entry",
        "entry_gamma",
        "deg",
        "initial flight-path angle below the horizon",
    ),
    ("entry", "entry_heading", "deg", "initial heading"),
    ("vehicle", "mass", "kg", "vehicle mass"),
    ("vehicle", "ref_area", "m^2", "reference (wing) area"),
    (
        "vehicle",
        "lift_to_drag",
        "-",
        "lift-to-drag ratio of the induced-drag term",
    ),
    ("vehicle", "cx0", "-", "zero-lift drag coefficient"),
    ("vehicle", "cy_max", "-", "maximum lift coefficient"),
    (
        "guidance",
        "pullup_altitude",
        "m",
        "altitude that starts the pull-up",
    ),
    ("guidance", "turn_radius", "m", "pull-up turn radius"),
    (
        "guidance",
        "cruise_altitude",
        "m",
        "altitude held in cruise",
    ),
    ("guidance", "k_alt", "1/m", "altitude-hold gain"),
    ("guidance", "k_terminal", "-", "terminal line-of-sight gain"),
    (
        "guidance",
        "seeker_acquisition_range",
        "m",
        "seeker range gate",
    ),
    (
        "guidance",
        "seeker_fov_half_angle",
        "deg",
        "seeker field-of-view half-angle",
    ),
    (
        "guidance",
        "seeker_noise_sigma",
        "deg",
        "seeker angle noise, 1 sigma per channel",
    ),
    (
        "guidance",
        "measurement_hold",
        "s",
        "how long a lost fix is held in terminal",
    ),
    ("target", "x", "m", "target downrange position"),
    ("target", "z", "m", "target crossrange position"),
    ("dispersion", "n_runs", "-", "ensemble size"),
    ("dispersion", "base_seed", "-", "ensemble seed"),
    ("dispersion", "mass_range", "kg", "uniform [low, high]"),
    (
        "dispersion",
        "entry_gamma_range",
        "deg",
        "uniform [low, high]",
    ),
    (
        "dispersion",
        "entry_altitude_range",
        "m",
        "uniform [low, high]",
    ),
    (
        "dispersion",
        "density_multiplier_sigma",
        "-",
        "log-space sigma of the density multiplier",
    ),
    (
        "dispersion",
        "seeker_noise_sigma",
        "deg",
        "seeker angle noise used by every run",
    ),
    (
        "dispersion",
        "target_offset_sigma",
        "m",
        "per-axis target position error",
    ),
];

/// Annotated default document. Parses back to [`ConfigFile::full_default`].
pub fn schema_text() -> String {
    let schema = schema_table();
    let mut out = String::from(
        "# entrysim configuration. Every key is optional; the values below are the defaults.\n",
    );
    let mut current = "";
    for &(section, key, unit, doc) in FIELDS {
        let value = if section.is_empty() {
            schema.get(key)
        } else {
            schema
                .get(section)
                .and_then(Value::as_table)
                .and_then(|t| t.get(key))
        };
        let value = value.expect("every documented key has a default");
        if section != current {
            out.push_str(&format!("\n[{section}]\n"));
            current = section;
        }
        out.push_str(&format!("{key} = {value}  # [{unit}] {doc}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_default() {
        assert_eq!(load("", &[]).unwrap(), ConfigFile::default());
    }

    #[test]
    fn default_round_trips_to_scenario() {
        let s = ConfigFile::default().scenario();
        let d = Scenario::default();
        assert_eq!(s.vehicle, d.vehicle);
        assert_eq!(s.target, d.target);
        assert_eq!(s.entry.entry_altitude, d.entry.entry_altitude);
        assert!((s.entry.entry_gamma - d.entry.entry_gamma).abs() < 1e-15);
        assert!((s.guidance.seeker_noise_sigma - d.guidance.seeker_noise_sigma).abs() < 1e-18);
    }

    #[test]
    fn schema_parses_back() {
        let text = schema_text();
        assert_eq!(load(&text, &[]).unwrap(), ConfigFile::full_default());
    }

    #[test]
    fn fields_cover_schema() {
        let schema = schema_table();
        let mut n = 0;
        for (k, v) in &schema {
            match v.as_table() {
                Some(t) => {
                    for key in t.keys() {
                        assert!(
                            FIELDS.iter().any(|f| f.0 == k && f.1 == key),
                            "{k}.{key} undocumented"
                        );
                        n += 1;
                    }
                }
                None => {
                    assert!(
                        FIELDS.iter().any(|f| f.0.is_empty() && f.1 == k),
                        "{k} undocumented"
                    );
                    n += 1;
                }
            }
        }
        assert_eq!(n, FIELDS.len());
    }

    #[test]
    fn unknown_key_rejected() {
        let err = load("bogus = 1\n", &[]).unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
        let err = load("[vehicle]\nwingspan = 3.0\n", &[]).unwrap_err();
        assert!(err.to_string().contains("wingspan"), "{err}");
    }

    #[test]
    fn wrong_type_names_key() {
        let err = load("[guidance]\nk_alt = \"high\"\n", &[]).unwrap_err();
        assert!(err.to_string().contains("guidance.k_alt"), "{err}");
    }

    #[test]
    fn overrides() {
        let c = load(
            "",
            &[
                "max_time=1".into(),
                "vehicle.mass=1400".into(),
                "mode=three_d".into(),
            ],
        )
        .unwrap();
        assert_eq!(c.max_time, 1.0);
        assert_eq!(c.vehicle.mass, 1400.0);
        assert_eq!(c.mode, FlightMode::ThreeD);
        let c = load(
            "",
            &[
                "cy_max=0.5".into(),
                "dispersion.mass_range=[1500, 1500]".into(),
            ],
        )
        .unwrap();
        assert_eq!(c.vehicle.cy_max, 0.5);
        assert_eq!(c.dispersion.unwrap().mass_range, [1500.0, 1500.0]);
    }

    #[test]
    fn override_errors() {
        assert!(load("", &["nonsense".into()]).is_err());
        assert!(load("", &["warp=9".into()])
            .unwrap_err()
            .to_string()
            .contains("warp"));
        let err = load("", &["seeker_noise_sigma=0".into()])
            .unwrap_err()
            .to_string();
        assert!(
            err.contains("guidance.seeker_noise_sigma")
                && err.contains("dispersion.seeker_noise_sigma"),
            "{err}"
        );
    }

    #[test]
    fn validation_names_key() {
        let err = load("dt = -1.0\n", &[])
            .unwrap()
            .validated_scenario()
            .unwrap_err();
        assert!(err.to_string().contains("`dt`"), "{err}");
        let err = load("[vehicle]\ncy_max = 0\n", &[])
            .unwrap()
            .validated_scenario()
            .unwrap_err();
        assert!(err.to_string().contains("vehicle.cy_max"), "{err}");
        let err = load("[dispersion]\nn_runs = 0\n", &[])
            .unwrap()
            .validated_dispersion()
            .unwrap_err();
        assert!(err.to_string().contains("dispersion.n_runs"), "{err}");
        assert!(ConfigFile::default().validated_dispersion().is_err());
    }
}
