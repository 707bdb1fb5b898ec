// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod fso_link;
pub mod geometry;
pub mod montecarlo;
pub mod placement;
pub mod quad;
pub mod relay_rates;
pub mod rf_link;
pub mod scenario;
pub mod specfun;
pub mod validation;

pub use config::{load_config, parse_config, LoadedConfig, ScenarioConfig};
pub use error::{Error, Result};
pub use fso_link::{FsoChannel, FsoLinkParams, NoiseVarianceMode, SnrRegime};
pub use geometry::{HoytParams, NetworkGeometry, Orientation, UavStability};
pub use montecarlo::{estimate_rates, RateReport, ShadowingMode, SimConfig, Simulator, UserDrop};
pub use placement::{Axis, Evaluator, Objective, PlacementGrid, Range1d};
pub use relay_rates::{Bottleneck, EndToEndReport, FsoMethod, FsoRateOptions};
pub use rf_link::{GcqGrid, NakagamiFit, RfLinkParams};
pub use scenario::{Numerics, Scenario, Subchannel};
pub use validation::{run_all, Check, CriterionReport, ValidationOptions};
