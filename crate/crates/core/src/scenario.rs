//! A complete evaluation scenario and its default parameter set.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fso_link::{FsoChannel, FsoLinkParams, NoiseVarianceMode};
use crate::geometry::{NetworkGeometry, UavStability};
use crate::relay_rates::{end_to_end, EndToEndReport, FsoRateOptions};
use crate::rf_link::{rf_ergodic_sum_rate, GcqGrid, RfLinkParams};
use crate::specfun::SeriesControl;

/// dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0) * 1e-3
}

/// dBm/MHz to W/Hz.
pub fn dbm_per_mhz_to_watts_per_hz(v: f64) -> f64 {
    dbm_to_watts(v) / 1e6
}

/// How the per-user RF bandwidth is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum Subchannel {
    /// W_sub = W / K̄ with K̄ = λπr₀², recomputed whenever λ or r₀ changes.
    ShareOfTotal { total_hz: f64 },
    /// A fixed W_sub.
    Fixed { hz: f64 },
}

/// Numerical controls shared by the analytic evaluators.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Numerics {
    pub gcq: GcqGrid,
    pub series: SeriesControl,
    pub fso: FsoRateOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub geometry: NetworkGeometry,
    pub rf: RfLinkParams,
    pub subchannel: Subchannel,
    pub fso: FsoLinkParams,
    pub stability: UavStability,
    /// User density λ (users/m²).
    pub density: f64,
    pub numerics: Numerics,
}

impl Default for Scenario {
    /// The reference urban scenario: UAV at (600, 0, 30) m over the cell
    /// centre, GS photodetector at 100 m, λ = 0.008 users/m².
    fn default() -> Self {
        let geometry = NetworkGeometry::pointed(100.0, [600.0, 0.0], 50.0, [600.0, 0.0, 30.0])
            .expect("default geometry is valid");
        let rf = RfLinkParams {
            carrier_mhz: 2000.0,
            w_sub: 0.0,
            tx_power: dbm_to_watts(20.0),
            eta2: dbm_to_watts(22.0),
            shadow_mu_db: 0.0,
            shadow_sigma2_db: 3.0,
            los_b: 0.136,
            los_c: 60.69,
            antennas: 2,
            noise_density: dbm_per_mhz_to_watts_per_hz(-114.0),
        };
        let fso = FsoLinkParams {
            responsivity: 0.5,
            aperture_radius: 0.1,
            beam_waist: 0.25e-3,
            wavelength: 1550e-9,
            p_bar: 1e-4,
            rho2: 1e-14,
            noise_mode: NoiseVarianceMode::Direct,
            kappa_db_per_m: 16.8e-3,
            cn2_ground: 1.7e-14,
            bandwidth: 1e9,
        };
        let mut s = Scenario {
            geometry,
            rf,
            subchannel: Subchannel::ShareOfTotal { total_hz: 5e6 },
            fso,
            stability: UavStability {
                sigma_p: 0.01,
                sigma_o: 0.3e-3,
            },
            density: 0.008,
            numerics: Numerics::default(),
        };
        s.sync_subchannel();
        s
    }
}

impl Scenario {
    /// Mean number of users K̄ = λπr₀².
    pub fn mean_users(&self) -> f64 {
        self.density * PI * self.geometry.cell_radius.powi(2)
    }

    /// Recomputes `rf.w_sub` from the subchannel policy.
    pub fn sync_subchannel(&mut self) {
        self.rf.w_sub = match self.subchannel {
            Subchannel::ShareOfTotal { total_hz } => total_hz / self.mean_users(),
            Subchannel::Fixed { hz } => hz,
        };
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        self.rf.validate()?;
        self.fso.validate()?;
        self.stability.validate()?;
        self.numerics.gcq.validate()?;
        self.numerics.series.validate()?;
        if !(self.density > 0.0 && self.density.is_finite()) {
            return Err(Error::invalid("density", "must be positive"));
        }
        match self.subchannel {
            Subchannel::ShareOfTotal { total_hz: v } | Subchannel::Fixed { hz: v } => {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::invalid("subchannel", "bandwidth must be positive"));
                }
            }
        }
        if self.numerics.fso.low_snr_terms == 0 {
            return Err(Error::invalid("low_snr_terms", "must be at least 1"));
        }
        if !(self.numerics.fso.quad_tol > 0.0 && self.numerics.fso.quad_tol < 1e-3) {
            return Err(Error::invalid("quad_tol", "must lie in (0, 1e-3)"));
        }
        Ok(())
    }

    /// Same scenario with the UAV moved and re-pointed at the GS.
    pub fn with_uav_position(&self, pos: [f64; 3]) -> Result<Self> {
        let mut s = *self;
        s.geometry = self.geometry.with_uav_position(pos)?;
        Ok(s)
    }

    /// Same scenario at a different user density.
    pub fn with_density(&self, density: f64) -> Result<Self> {
        let mut s = *self;
        s.density = density;
        s.sync_subchannel();
        s.validate()?;
        Ok(s)
    }

    pub fn fso_channel(&self) -> Result<FsoChannel> {
        FsoChannel::new(&self.fso, &self.geometry, &self.stability)
    }

    /// Scales p̄ so that the FSO link has the requested γ̄.
    pub fn with_gamma_bar(&self, gamma_bar: f64) -> Result<Self> {
        let ch = self.fso_channel()?;
        let mut s = *self;
        s.fso.p_bar *= gamma_bar / ch.snr.gamma_bar;
        Ok(s)
    }

    /// RF ergodic sum rate by Gauss-Chebyshev quadrature (bit/s).
    pub fn rf_sum_rate(&self) -> Result<f64> {
        rf_ergodic_sum_rate(
            &self.geometry,
            &self.rf,
            self.density,
            &self.numerics.gcq,
            &self.numerics.series,
        )
    }

    /// Analytic RF, FSO, BA and non-BA rates.
    pub fn evaluate(&self) -> Result<EndToEndReport> {
        let ch = self.fso_channel()?;
        end_to_end(self.rf_sum_rate()?, &ch, &self.numerics.fso)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_conversions() {
        assert!((dbm_to_watts(20.0) - 0.1).abs() < 1e-15);
        assert!((dbm_to_watts(22.0) - 0.158_489_319).abs() < 1e-9);
        assert!((dbm_per_mhz_to_watts_per_hz(-114.0) - 3.981_071_7e-21).abs() < 1e-27);
    }

    #[test]
    fn default_subchannel_share() {
        let s = Scenario::default();
        assert!((s.mean_users() - 62.831_853).abs() < 1e-5);
        assert!((s.rf.w_sub - 5e6 / s.mean_users()).abs() < 1e-9);
        s.validate().unwrap();
    }
}
