//! TOML scenario files.
//!
//! The file format keeps powers in dBm, the noise density in dBm/MHz and
//! shadowing in dB. [`load_config`] converts them to linear units exactly
//! once and records each conversion. Every field is optional and defaults to
//! the reference scenario; unknown keys are rejected.
//!
//! ```toml
//! [geometry]
//! gs_height = 100.0
//! cell_center = [600.0, 0.0]
//! cell_radius = 50.0
//! uav_position = [600.0, 0.0, 30.0]
//! # uav_orientation = { theta = 0.0, phi = 1.6 }   # default: point at the GS
//!
//! [rf]
//! carrier_mhz = 2000.0
//! total_bandwidth_hz = 5e6      # W_sub = total / (λπr₀²); or set subchannel_hz
//! tx_power_dbm = 20.0
//! multipath_power_dbm = 22.0
//! shadow_mu_db = 0.0
//! shadow_sigma2_db = 3.0
//! los_b = 0.136
//! los_c = 60.69
//! antennas = 2
//! noise_density_dbm_per_mhz = -114.0
//!
//! [fso]
//! responsivity = 0.5
//! aperture_radius = 0.1
//! beam_waist = 0.25e-3
//! wavelength = 1550e-9
//! p_bar = 1e-4
//! noise_variance = 1e-14
//! noise_mode = "direct"         # or "density_times_bandwidth"
//! kappa_db_per_m = 16.8e-3
//! cn2_ground = 1.7e-14
//! bandwidth = 1e9
//!
//! [stability]
//! sigma_p = 0.01
//! sigma_o = 0.3e-3
//!
//! [traffic]
//! density = 0.008
//!
//! [numerics]
//! gcq_h = 10
//! gcq_m = 10
//! series_rel_tol = 1e-12
//! series_max_terms = 500
//! low_snr_terms = 5
//! quad_tol = 1e-9
//! allow_regime_override = false
//!
//! [sim]
//! n_slots = 100000
//! master_seed = 1
//! enable_gg = false
//! shadowing = "lognormal"       # or "nakagami"
//! user_drop = "per_slot"        # or "fixed"
//! reproducible = true
//!
//! [placement]                   # used by `optimize` and position sweeps
//! axis = "x_offset"             # "altitude", "x_offset" or "custom2d"
//! min = 0.0
//! max = 40.0
//! steps = 41
//! objective = "ba"              # "ba", "nonba", "rf" or "fso"
//!
//! [parameter_sweep]             # used by parameter sweeps
//! parameter = "density"         # "density", "kappa" or "gamma_bar"
//! min = 0.002
//! max = 0.04
//! steps = 20
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fso_link::{FsoLinkParams, NoiseVarianceMode};
use crate::geometry::{NetworkGeometry, Orientation, UavStability};
use crate::montecarlo::SimConfig;
use crate::placement::{Axis, Objective, Parameter, Range1d};
use crate::relay_rates::FsoRateOptions;
use crate::rf_link::{GcqGrid, RfLinkParams};
use crate::scenario::{dbm_per_mhz_to_watts_per_hz, dbm_to_watts, Numerics, Scenario, Subchannel};
use crate::specfun::SeriesControl;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometrySection {
    pub gs_height: f64,
    pub cell_center: [f64; 2],
    pub cell_radius: f64,
    pub uav_position: [f64; 3],
    pub uav_orientation: Option<Orientation>,
}

impl Default for GeometrySection {
    fn default() -> Self {
        GeometrySection {
            gs_height: 100.0,
            cell_center: [600.0, 0.0],
            cell_radius: 50.0,
            uav_position: [600.0, 0.0, 30.0],
            uav_orientation: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RfSection {
    pub carrier_mhz: f64,
    /// Total bandwidth shared by the mean user count.
    pub total_bandwidth_hz: Option<f64>,
    /// Fixed per-user bandwidth; overrides `total_bandwidth_hz`.
    pub subchannel_hz: Option<f64>,
    pub tx_power_dbm: f64,
    pub multipath_power_dbm: f64,
    pub shadow_mu_db: f64,
    pub shadow_sigma2_db: f64,
    pub los_b: f64,
    pub los_c: f64,
    pub antennas: u32,
    pub noise_density_dbm_per_mhz: f64,
}

impl Default for RfSection {
    fn default() -> Self {
        RfSection {
            carrier_mhz: 2000.0,
            total_bandwidth_hz: Some(5e6),
            subchannel_hz: None,
            tx_power_dbm: 20.0,
            multipath_power_dbm: 22.0,
            shadow_mu_db: 0.0,
            shadow_sigma2_db: 3.0,
            los_b: 0.136,
            los_c: 60.69,
            antennas: 2,
            noise_density_dbm_per_mhz: -114.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FsoSection {
    pub responsivity: f64,
    pub aperture_radius: f64,
    pub beam_waist: f64,
    pub wavelength: f64,
    pub p_bar: f64,
    /// ρ²: A² in `direct` mode, A²/Hz in `density_times_bandwidth` mode.
    pub noise_variance: f64,
    pub noise_mode: NoiseVarianceMode,
    pub kappa_db_per_m: f64,
    pub cn2_ground: f64,
    pub bandwidth: f64,
}

impl Default for FsoSection {
    fn default() -> Self {
        FsoSection {
            responsivity: 0.5,
            aperture_radius: 0.1,
            beam_waist: 0.25e-3,
            wavelength: 1550e-9,
            p_bar: 1e-4,
            noise_variance: 1e-14,
            noise_mode: NoiseVarianceMode::Direct,
            kappa_db_per_m: 16.8e-3,
            cn2_ground: 1.7e-14,
            bandwidth: 1e9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StabilitySection {
    pub sigma_p: f64,
    pub sigma_o: f64,
}

impl Default for StabilitySection {
    fn default() -> Self {
        StabilitySection {
            sigma_p: 0.01,
            sigma_o: 0.3e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrafficSection {
    pub density: f64,
}

impl Default for TrafficSection {
    fn default() -> Self {
        TrafficSection { density: 0.008 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NumericsSection {
    pub gcq_h: u32,
    pub gcq_m: u32,
    pub series_rel_tol: f64,
    pub series_max_terms: usize,
    pub low_snr_terms: usize,
    pub quad_tol: f64,
    pub allow_regime_override: bool,
}

impl Default for NumericsSection {
    fn default() -> Self {
        let n = Numerics::default();
        NumericsSection {
            gcq_h: n.gcq.h,
            gcq_m: n.gcq.m,
            series_rel_tol: n.series.rel_tol,
            series_max_terms: n.series.max_terms,
            low_snr_terms: n.fso.low_snr_terms,
            quad_tol: n.fso.quad_tol,
            allow_regime_override: n.fso.allow_regime_override,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlacementSection {
    pub axis: Axis,
    pub min: f64,
    pub max: f64,
    pub steps: usize,
    /// Altitudes for `custom2d`.
    #[serde(default)]
    pub altitude: Option<Range1d>,
    #[serde(default = "default_objective")]
    pub objective: Objective,
}

fn default_objective() -> Objective {
    Objective::Ba
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParameterSweepSection {
    pub parameter: Parameter,
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

/// A complete scenario file.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub geometry: GeometrySection,
    pub rf: RfSection,
    pub fso: FsoSection,
    pub stability: StabilitySection,
    pub traffic: TrafficSection,
    pub numerics: NumericsSection,
    pub sim: SimConfig,
    pub placement: Option<PlacementSection>,
    pub parameter_sweep: Option<ParameterSweepSection>,
}

/// One unit conversion applied at load time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Conversion {
    pub field: &'static str,
    pub input: f64,
    pub input_unit: &'static str,
    pub linear: f64,
    pub linear_unit: &'static str,
}

/// A validated configuration with all values in linear units.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoadedConfig {
    pub file: ScenarioConfig,
    pub scenario: Scenario,
    pub sim: SimConfig,
    pub conversions: Vec<Conversion>,
}

impl ScenarioConfig {
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Converts units, builds the scenario and validates every section.
    pub fn resolve(&self) -> Result<LoadedConfig> {
        let g = &self.geometry;
        let geometry = match g.uav_orientation {
            Some(o) => {
                NetworkGeometry::new(g.gs_height, g.cell_center, g.cell_radius, g.uav_position, o)?
            }
            None => {
                // Validate plain fields first so their errors name the field.
                NetworkGeometry {
                    gs_height: g.gs_height,
                    cell_center: g.cell_center,
                    cell_radius: g.cell_radius,
                    uav_position: g.uav_position,
                    uav_orientation: Orientation {
                        theta: 0.0,
                        phi: std::f64::consts::FRAC_PI_2,
                    },
                }
                .validate()?;
                NetworkGeometry::pointed(g.gs_height, g.cell_center, g.cell_radius, g.uav_position)?
            }
        };

        let rf = &self.rf;
        let conversions = vec![
            Conversion {
                field: "rf.tx_power_dbm",
                input: rf.tx_power_dbm,
                input_unit: "dBm",
                linear: dbm_to_watts(rf.tx_power_dbm),
                linear_unit: "W",
            },
            Conversion {
                field: "rf.multipath_power_dbm",
                input: rf.multipath_power_dbm,
                input_unit: "dBm",
                linear: dbm_to_watts(rf.multipath_power_dbm),
                linear_unit: "W",
            },
            Conversion {
                field: "rf.noise_density_dbm_per_mhz",
                input: rf.noise_density_dbm_per_mhz,
                input_unit: "dBm/MHz",
                linear: dbm_per_mhz_to_watts_per_hz(rf.noise_density_dbm_per_mhz),
                linear_unit: "W/Hz",
            },
        ];
        for c in &conversions {
            log::info!(
                "{} = {} {} -> {:e} {}",
                c.field,
                c.input,
                c.input_unit,
                c.linear,
                c.linear_unit
            );
        }

        let subchannel = match (rf.subchannel_hz, rf.total_bandwidth_hz) {
            (Some(hz), _) => Subchannel::Fixed { hz },
            (None, Some(total_hz)) => Subchannel::ShareOfTotal { total_hz },
            (None, None) => {
                return Err(Error::invalid(
                    "rf.total_bandwidth_hz",
                    "set either total_bandwidth_hz or subchannel_hz",
                ))
            }
        };
        let n = &self.numerics;
        let mut scenario = Scenario {
            geometry,
            rf: RfLinkParams {
                carrier_mhz: rf.carrier_mhz,
                w_sub: 0.0,
                tx_power: conversions[0].linear,
                eta2: conversions[1].linear,
                shadow_mu_db: rf.shadow_mu_db,
                shadow_sigma2_db: rf.shadow_sigma2_db,
                los_b: rf.los_b,
                los_c: rf.los_c,
                antennas: rf.antennas,
                noise_density: conversions[2].linear,
            },
            subchannel,
            fso: FsoLinkParams {
                responsivity: self.fso.responsivity,
                aperture_radius: self.fso.aperture_radius,
                beam_waist: self.fso.beam_waist,
                wavelength: self.fso.wavelength,
                p_bar: self.fso.p_bar,
                rho2: self.fso.noise_variance,
                noise_mode: self.fso.noise_mode,
                kappa_db_per_m: self.fso.kappa_db_per_m,
                cn2_ground: self.fso.cn2_ground,
                bandwidth: self.fso.bandwidth,
            },
            stability: UavStability {
                sigma_p: self.stability.sigma_p,
                sigma_o: self.stability.sigma_o,
            },
            density: self.traffic.density,
            numerics: Numerics {
                gcq: GcqGrid {
                    h: n.gcq_h,
                    m: n.gcq_m,
                },
                series: SeriesControl {
                    rel_tol: n.series_rel_tol,
                    max_terms: n.series_max_terms,
                },
                fso: FsoRateOptions {
                    low_snr_terms: n.low_snr_terms,
                    quad_tol: n.quad_tol,
                    allow_regime_override: n.allow_regime_override,
                },
            },
        };
        scenario.sync_subchannel();
        scenario.validate()?;
        self.sim.validate()?;
        if let Some(p) = &self.placement {
            Range1d::new(p.min, p.max, p.steps).validate("placement")?;
            if p.axis == Axis::Custom2d {
                p.altitude
                    .ok_or_else(|| Error::invalid("placement.altitude", "required for custom2d"))?
                    .validate("placement.altitude")?;
            }
        }
        if let Some(p) = &self.parameter_sweep {
            Range1d::new(p.min, p.max, p.steps).validate("parameter_sweep")?;
        }
        Ok(LoadedConfig {
            file: *self,
            scenario,
            sim: self.sim,
            conversions,
        })
    }
}

/// Parses TOML text into a validated configuration.
pub fn parse_config(text: &str) -> Result<LoadedConfig> {
    let file: ScenarioConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    file.resolve()
}

/// Reads and validates a TOML scenario file.
pub fn load_config(path: &Path) -> Result<LoadedConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_reference_scenario() {
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg.scenario, Scenario::default());
        assert_eq!(cfg.sim, SimConfig::default());
        assert_eq!(cfg.conversions.len(), 3);
    }

    #[test]
    fn negative_radius_names_field() {
        let err = parse_config("[geometry]\ncell_radius = -1.0\n").unwrap_err();
        match err {
            Error::InvalidParameter { field, .. } => assert_eq!(field, "cell_radius"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn single_override() {
        let cfg = parse_config("[fso]\nkappa_db_per_m = 18e-3\n").unwrap();
        let mut expected = Scenario::default();
        expected.fso.kappa_db_per_m = 18e-3;
        assert_eq!(cfg.scenario, expected);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(matches!(
            parse_config("[rf]\nfrequency = 1.0\n"),
            Err(Error::Config(_))
        ));
        assert!(matches!(parse_config("bogus = 1\n"), Err(Error::Config(_))));
    }

    #[test]
    fn parse_error_reports_line() {
        let msg = parse_config("[rf]\ncarrier_mhz = \"x\"\n")
            .unwrap_err()
            .to_string();
        assert!(msg.contains("line 2"), "{msg}");
    }

    #[test]
    fn round_trip() {
        let mut cfg = ScenarioConfig::default();
        cfg.fso.kappa_db_per_m = 0.0171;
        cfg.placement = Some(PlacementSection {
            axis: Axis::Altitude,
            min: 10.0,
            max: 150.0,
            steps: 29,
            altitude: None,
            objective: Objective::Nonba,
        });
        let text = cfg.to_toml().unwrap();
        let back: ScenarioConfig = toml::from_str(&text).unwrap();
        assert_eq!(back, cfg);
    }
}
