//! JSON experiment configuration: strict parsing, scenario defaults and the
//! fully resolved specification that is echoed next to every output.
//!
//! Every section and every field is optional. Lengths are in wavelengths.
//!
//! ```json
//! {
//!   "scenario": "fig2",
//!   "round_trips": 60,
//!   "round_trip_loss": 0.18,
//!   "gain": { "peak": 0.2, "pump_waist": 483 },
//!   "excitation": { "waist": 40 }
//! }
//! ```

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use pt_cavity::optics::{CavityConfig, Excitation, GainProfile, Geometry, GridSpec};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    /// Reference below-threshold run with a waist-mismatched pulse.
    #[default]
    Fig2,
    /// Centered pump (no tilt) and a displaced pulse.
    HermitianControl,
    /// Pulse waist equal to the oscillator mode waist.
    MatchedWaist,
    /// Fundamental eigenmode, threshold and mode diagnostics.
    Modes,
    /// Canonical covariance equations for the injected packet.
    Canonical,
    /// Pulsed runs across one configuration parameter.
    Sweep,
}

impl Scenario {
    pub const ALL: [Scenario; 6] = [
        Scenario::Fig2,
        Scenario::HermitianControl,
        Scenario::MatchedWaist,
        Scenario::Modes,
        Scenario::Canonical,
        Scenario::Sweep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Fig2 => "fig2",
            Scenario::HermitianControl => "hermitian-control",
            Scenario::MatchedWaist => "matched-waist",
            Scenario::Modes => "modes",
            Scenario::Canonical => "canonical",
            Scenario::Sweep => "sweep",
        }
    }

    /// Whether the scenario fits harmonics to a pulsed run.
    pub fn is_spectral(self) -> bool {
        matches!(self, Scenario::Fig2 | Scenario::HermitianControl | Scenario::MatchedWaist | Scenario::Sweep)
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scenario::ALL.into_iter().find(|sc| sc.name() == s).ok_or_else(|| format!("unknown scenario `{s}`"))
    }
}

/// Parameters a sweep can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    /// Pump offset `s`.
    #[default]
    Offset,
    PumpWaist,
    Peak,
    ExcitationWaist,
    Detuning,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::Offset => "offset",
            SweepParameter::PumpWaist => "pump_waist",
            SweepParameter::Peak => "peak",
            SweepParameter::ExcitationWaist => "excitation_waist",
            SweepParameter::Detuning => "detuning",
        }
    }

    pub fn apply(self, config: &mut CavityConfig, value: f64) {
        match self {
            SweepParameter::Offset => config.gain.offset = value,
            SweepParameter::PumpWaist => config.gain.pump_waist = value,
            SweepParameter::Peak => config.gain.peak = value,
            SweepParameter::ExcitationWaist => config.excitation.waist = value,
            SweepParameter::Detuning => config.detuning = value,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryOverrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainOverrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub peak: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pump_waist: Option<f64>,
    /// Defaults to half the pump waist, or zero for the Hermitian control.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub offset: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExcitationOverrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub waist: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pulse_center: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pulse_duration: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridOverrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepOverrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parameter: Option<SweepParameter>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub end: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
}

/// The configuration file as written, before defaults are applied.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<Scenario>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub round_trips: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snapshots: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub geometry: Option<GeometryOverrides>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub round_trip_loss: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mirror_transmittance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gain: Option<GainOverrides>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detuning: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub excitation: Option<ExcitationOverrides>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridOverrides>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepOverrides>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub start: f64,
    pub end: f64,
    pub count: usize,
}

impl SweepSpec {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.end - self.start) / (self.count - 1) as f64;
        (0..self.count).map(|i| self.start + i as f64 * step).collect()
    }
}

/// Fully resolved experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub scenario: Scenario,
    pub round_trips: u64,
    pub snapshots: Vec<u64>,
    pub cavity: CavityConfig,
    pub sweep: Option<SweepSpec>,
}

pub const DEFAULT_ROUND_TRIPS: u64 = 60;

/// Transverse offset of the pulse in the Hermitian control.
pub const HERMITIAN_CONTROL_OFFSET: f64 = 10.0;

impl ExperimentSpec {
    /// Applies scenario defaults and then the file's overrides.
    pub fn resolve(file: ConfigFile) -> Result<Self, CliError> {
        let scenario = file.scenario.unwrap_or_default();
        let base = CavityConfig::fig2();

        let g = file.geometry.unwrap_or_default();
        let f = g.f.unwrap_or(base.geometry.f);
        let geometry = Geometry {
            f,
            f1: g.f1.unwrap_or(f),
            length: g.length.unwrap_or(base.geometry.length / base.geometry.f * f),
        };

        let gn = file.gain.unwrap_or_default();
        let pump_waist = gn.pump_waist.unwrap_or(base.gain.pump_waist);
        let default_offset = if scenario == Scenario::HermitianControl { 0.0 } else { pump_waist / 2.0 };
        let gain = GainProfile {
            peak: gn.peak.unwrap_or(base.gain.peak),
            pump_waist,
            offset: gn.offset.unwrap_or(default_offset),
        };

        let grid_o = file.grid.unwrap_or_default();
        let grid = GridSpec {
            points: grid_o.points.unwrap_or(base.grid.points),
            width: grid_o.width.unwrap_or(base.grid.width),
        };

        let e = file.excitation.unwrap_or_default();
        let default_center = if scenario == Scenario::HermitianControl { HERMITIAN_CONTROL_OFFSET } else { 0.0 };
        let mut cavity = CavityConfig {
            geometry,
            round_trip_loss: file.round_trip_loss.unwrap_or(base.round_trip_loss),
            mirror_transmittance: file.mirror_transmittance.unwrap_or(base.mirror_transmittance),
            gain,
            detuning: file.detuning.unwrap_or(base.detuning),
            excitation: Excitation {
                waist: e.waist.unwrap_or(base.excitation.waist),
                center: e.center.unwrap_or(default_center),
                pulse_center: e.pulse_center.unwrap_or(base.excitation.pulse_center),
                pulse_duration: e.pulse_duration.unwrap_or(base.excitation.pulse_duration),
                amplitude: e.amplitude.unwrap_or(base.excitation.amplitude),
            },
            grid,
        };
        cavity.validate().map_err(|err| CliError::Config(err.to_string()))?;
        if scenario == Scenario::MatchedWaist && e.waist.is_none() {
            let params = cavity.oscillator_params().map_err(|err| CliError::Config(err.to_string()))?;
            cavity.excitation.waist = params.mode_waist();
        }

        let sweep = match (scenario, file.sweep) {
            (Scenario::Sweep, s) => {
                let s = s.unwrap_or_default();
                Some(SweepSpec {
                    parameter: s.parameter.unwrap_or_default(),
                    start: s.start.unwrap_or(0.0),
                    end: s.end.unwrap_or(cavity.gain.pump_waist),
                    count: s.count.unwrap_or(11),
                })
            }
            (_, Some(_)) => {
                return Err(CliError::Config(format!("key `sweep` is only valid for scenario `sweep`, not `{scenario}`")))
            }
            (_, None) => None,
        };

        let spec = ExperimentSpec {
            scenario,
            round_trips: file.round_trips.unwrap_or(DEFAULT_ROUND_TRIPS),
            snapshots: file.snapshots.unwrap_or_default(),
            cavity,
            sweep,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// The spec as a configuration file with every key set; resolving it
    /// again reproduces `self` exactly.
    pub fn to_config_file(&self) -> ConfigFile {
        let c = &self.cavity;
        let e = &c.excitation;
        ConfigFile {
            scenario: Some(self.scenario),
            round_trips: Some(self.round_trips),
            snapshots: Some(self.snapshots.clone()),
            geometry: Some(GeometryOverrides {
                f: Some(c.geometry.f),
                f1: Some(c.geometry.f1),
                length: Some(c.geometry.length),
            }),
            round_trip_loss: Some(c.round_trip_loss),
            mirror_transmittance: Some(c.mirror_transmittance),
            gain: Some(GainOverrides {
                peak: Some(c.gain.peak),
                pump_waist: Some(c.gain.pump_waist),
                offset: Some(c.gain.offset),
            }),
            detuning: Some(c.detuning),
            excitation: Some(ExcitationOverrides {
                waist: Some(e.waist),
                center: Some(e.center),
                pulse_center: Some(e.pulse_center),
                pulse_duration: Some(e.pulse_duration),
                amplitude: Some(e.amplitude),
            }),
            grid: Some(GridOverrides { points: Some(c.grid.points), width: Some(c.grid.width) }),
            sweep: self.sweep.map(|s| SweepOverrides {
                parameter: Some(s.parameter),
                start: Some(s.start),
                end: Some(s.end),
                count: Some(s.count),
            }),
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.cavity.validate().map_err(|err| CliError::Config(err.to_string()))?;
        if self.round_trips == 0 {
            return Err(CliError::Config("key `round_trips`: must be positive".into()));
        }
        if self.scenario.is_spectral() {
            let params = self.cavity.oscillator_params().map_err(|err| CliError::Config(err.to_string()))?;
            let needed = self.cavity.post_excitation_start() as f64 + 3.0 * params.period();
            if (self.round_trips as f64) < needed {
                return Err(CliError::Config(format!(
                    "key `round_trips`: {} is too short; scenario `{}` needs at least {} to cover three periods after the pulse",
                    self.round_trips,
                    self.scenario,
                    needed.ceil()
                )));
            }
        }
        if let Some(s) = &self.sweep {
            if s.count == 0 {
                return Err(CliError::Config("key `sweep.count`: must be positive".into()));
            }
            if !(s.start.is_finite() && s.end.is_finite()) {
                return Err(CliError::Config("keys `sweep.start` and `sweep.end` must be finite".into()));
            }
        }
        Ok(())
    }
}

/// Parses a configuration document. Errors carry the line and column and,
/// for unknown keys, the offending key.
pub fn parse_config(text: &str) -> Result<ExperimentSpec, CliError> {
    let file: ConfigFile = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    ExperimentSpec::resolve(file)
}

pub fn load_config(path: &Path) -> Result<ExperimentSpec, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| match e {
        CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}
