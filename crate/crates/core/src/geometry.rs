//! Network coordinates, UAV pointing, and the misalignment covariance.
//!
//! The GS sits at (0, 0, z_GS). The UAV beam is described by φ, the angle
//! between the beam and the vertical axis, and θ, the azimuth of the beam's
//! horizontal projection. Pointing at the GS from the +x half-plane gives
//! θ = atan(y_d / x_d) and cos φ = (z_GS - z_d) / L.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fso_link::FsoLinkParams;

/// Tolerance on |sin φ cos θ| below which an orientation is rejected.
const DEGENERATE_PROJECTION: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Orientation {
    /// θ_d in radians, within (-π/2, π/2).
    pub theta: f64,
    /// φ_d in radians, within (0, π).
    pub phi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkGeometry {
    /// z_GS, height of the ground-station photodetector (m).
    pub gs_height: f64,
    /// (x₀, y₀), centre of the user cell (m).
    pub cell_center: [f64; 2],
    /// r₀, radius of the user cell (m).
    pub cell_radius: f64,
    /// (x_d, y_d, z_d), UAV position (m).
    pub uav_position: [f64; 3],
    pub uav_orientation: Orientation,
}

impl NetworkGeometry {
    pub fn new(
        gs_height: f64,
        cell_center: [f64; 2],
        cell_radius: f64,
        uav_position: [f64; 3],
        uav_orientation: Orientation,
    ) -> Result<Self> {
        let g = NetworkGeometry {
            gs_height,
            cell_center,
            cell_radius,
            uav_position,
            uav_orientation,
        };
        g.validate()?;
        Ok(g)
    }

    /// Geometry with the beam pointed at the GS photodetector.
    pub fn pointed(
        gs_height: f64,
        cell_center: [f64; 2],
        cell_radius: f64,
        uav_position: [f64; 3],
    ) -> Result<Self> {
        let o = pointing_orientation(uav_position, gs_height)?;
        Self::new(gs_height, cell_center, cell_radius, uav_position, o)
    }

    /// Same network with the UAV moved and re-pointed at the GS.
    pub fn with_uav_position(&self, uav_position: [f64; 3]) -> Result<Self> {
        Self::pointed(
            self.gs_height,
            self.cell_center,
            self.cell_radius,
            uav_position,
        )
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64, name: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(
                    name,
                    format!("must be positive and finite, got {v}"),
                ))
            }
        };
        positive(self.gs_height, "gs_height")?;
        positive(self.cell_radius, "cell_radius")?;
        positive(self.uav_position[2], "uav_z")?;
        if !(self.cell_center.iter().all(|v| v.is_finite())
            && self.uav_position.iter().all(|v| v.is_finite()))
        {
            return Err(Error::invalid("uav_position", "coordinates must be finite"));
        }
        check_orientation(self.uav_orientation)
    }

    pub fn uav_x(&self) -> f64 {
        self.uav_position[0]
    }
    pub fn uav_y(&self) -> f64 {
        self.uav_position[1]
    }
    pub fn uav_z(&self) -> f64 {
        self.uav_position[2]
    }
}

fn check_orientation(o: Orientation) -> Result<()> {
    use std::f64::consts::{FRAC_PI_2, PI};
    if !(o.phi > 0.0 && o.phi < PI) {
        return Err(Error::DegenerateOrientation(format!(
            "phi = {} rad is outside (0, pi)",
            o.phi
        )));
    }
    if !(o.theta > -FRAC_PI_2 && o.theta < FRAC_PI_2) {
        return Err(Error::DegenerateOrientation(format!(
            "theta = {} rad is outside (-pi/2, pi/2)",
            o.theta
        )));
    }
    if (o.phi.sin() * o.theta.cos()).abs() < DEGENERATE_PROJECTION {
        return Err(Error::DegenerateOrientation(
            "beam is parallel to the photodetector plane".into(),
        ));
    }
    Ok(())
}

/// Orientation that points the beam from `uav_position` at (0, 0, gs_height).
///
/// Requires x_d > 0 so that θ stays inside (-π/2, π/2).
pub fn pointing_orientation(uav_position: [f64; 3], gs_height: f64) -> Result<Orientation> {
    let [x, y, z] = uav_position;
    if !(x > 0.0) {
        return Err(Error::DegenerateOrientation(format!(
            "pointing needs x_d > 0, got x_d = {x}"
        )));
    }
    let l = (x * x + y * y + (z - gs_height).powi(2)).sqrt();
    let o = Orientation {
        theta: (y / x).atan(),
        phi: ((gs_height - z) / l).clamp(-1.0, 1.0).acos(),
    };
    check_orientation(o)?;
    Ok(o)
}

/// Polar position of a user relative to the cell centre.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuPosition {
    /// r_k in [0, r₀] (m).
    pub r: f64,
    /// φ_k in [0, 2π] (rad).
    pub varphi: f64,
}

impl MuPosition {
    pub fn cartesian(&self, geom: &NetworkGeometry) -> [f64; 2] {
        [
            geom.cell_center[0] + self.r * self.varphi.cos(),
            geom.cell_center[1] + self.r * self.varphi.sin(),
        ]
    }
}

/// UAV-to-GS distance L.
pub fn uav_gs_distance(geom: &NetworkGeometry) -> f64 {
    let [x, y, z] = geom.uav_position;
    (x * x + y * y + (z - geom.gs_height).powi(2)).sqrt()
}

/// Horizontal distance r_DM and 3D distance between the UAV and a user.
pub fn mu_uav_distance(geom: &NetworkGeometry, mu: &MuPosition) -> (f64, f64) {
    let [xk, yk] = mu.cartesian(geom);
    let r_dm = (geom.uav_x() - xk).hypot(geom.uav_y() - yk);
    (r_dm, r_dm.hypot(geom.uav_z()))
}

/// Elevation angle ψ in degrees for a UAV at height `z` and horizontal
/// distance `r_dm`; exactly 90 when r_dm = 0.
pub fn elevation_deg(z: f64, r_dm: f64) -> f64 {
    if r_dm == 0.0 {
        90.0
    } else {
        (z / r_dm).atan().to_degrees()
    }
}

/// Elevation angle of the UAV seen from a user, in degrees.
pub fn elevation_angle(geom: &NetworkGeometry, mu: &MuPosition) -> f64 {
    let (r_dm, _) = mu_uav_distance(geom, mu);
    elevation_deg(geom.uav_z(), r_dm)
}

/// Gaussian-beam width at distance `l`: w₀ √(1 + (λ L / (π w₀²))²).
pub fn beam_width(fso: &FsoLinkParams, l: f64) -> f64 {
    let w0 = fso.beam_waist;
    let ratio = fso.wavelength * l / (std::f64::consts::PI * w0 * w0);
    w0 * ratio.hypot(1.0)
}

/// Standard deviations of the UAV position (per axis) and orientation
/// (per angle) fluctuations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UavStability {
    /// σ_p (m)
    pub sigma_p: f64,
    /// σ_o (rad)
    pub sigma_o: f64,
}

impl UavStability {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_p >= 0.0 && self.sigma_p.is_finite()) {
            return Err(Error::invalid("sigma_p", "must be non-negative"));
        }
        if !(self.sigma_o >= 0.0 && self.sigma_o.is_finite()) {
            return Err(Error::invalid("sigma_o", "must be non-negative"));
        }
        Ok(())
    }
}

/// Misalignment statistics: the covariance Σ of the beam-centre displacement
/// on the photodetector plane and the Hoyt parameters derived from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HoytParams {
    /// √(λ_min / λ_max); 1 for a circularly symmetric or zero covariance.
    pub m: f64,
    /// Ω = λ₁ + λ₂ (m²)
    pub omega: f64,
    /// Larger eigenvalue of Σ (m²).
    pub lambda1: f64,
    /// Smaller eigenvalue of Σ (m²).
    pub lambda2: f64,
    /// Σ itself, row-major.
    pub sigma: [[f64; 2]; 2],
}

impl HoytParams {
    /// Hoyt parameters of an axis-aligned covariance diag(λ_a, λ_b).
    pub fn from_eigenvalues(lambda_a: f64, lambda_b: f64) -> Result<Self> {
        Self::from_covariance([[lambda_a, 0.0], [0.0, lambda_b]])
    }

    /// Hoyt parameters of a symmetric 2×2 covariance matrix.
    pub fn from_covariance(sigma: [[f64; 2]; 2]) -> Result<Self> {
        let [[s11, s12], [_, s22]] = sigma;
        if !(s11 >= 0.0 && s22 >= 0.0 && s11.is_finite() && s22.is_finite() && s12.is_finite()) {
            return Err(Error::invalid(
                "covariance",
                "diagonal must be non-negative and finite",
            ));
        }
        let mean = 0.5 * (s11 + s22);
        let radius = (0.5 * (s11 - s22)).hypot(s12);
        let l1 = mean + radius;
        let det = s11 * s22 - s12 * s12;
        // Smaller root via the determinant avoids cancellation in mean - radius.
        let l2 = if l1 > 0.0 { (det / l1).max(0.0) } else { 0.0 };
        if det < -1e-12 * l1 * l1 {
            return Err(Error::invalid(
                "covariance",
                "matrix is not positive semi-definite",
            ));
        }
        let omega = l1 + l2;
        let m = if l1 > 0.0 { (l2 / l1).sqrt() } else { 1.0 };
        Ok(HoytParams {
            m,
            omega,
            lambda1: l1,
            lambda2: l2,
            sigma,
        })
    }

    /// True when the UAV is perfectly stable (no misalignment).
    pub fn is_deterministic(&self) -> bool {
        self.omega == 0.0
    }
}

/// Covariance Σ of the beam-centre displacement and its Hoyt parameters.
pub fn fluctuation_covariance(geom: &NetworkGeometry, stab: &UavStability) -> Result<HoytParams> {
    stab.validate()?;
    check_orientation(geom.uav_orientation)?;
    let Orientation { theta, phi } = geom.uav_orientation;
    let x = geom.uav_x();
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let tan_t = st / ct;
    let cot_p = cp / sp;

    let c1 = -tan_t;
    let c2 = -x / (ct * ct);
    let c3 = x / (sp * sp * ct);
    let c4 = -x * cot_p * tan_t / ct;
    let c5 = -cot_p / ct;

    let vp = stab.sigma_p * stab.sigma_p;
    let vo = stab.sigma_o * stab.sigma_o;
    let s11 = vp + c1 * c1 * vp + c2 * c2 * vo;
    let s12 = c1 * c5 * vp + c2 * c4 * vo;
    let s22 = vp + c5 * c5 * vp + c4 * c4 * vo + c3 * c3 * vo;
    HoytParams::from_covariance([[s11, s12], [s12, s22]])
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn hover() -> NetworkGeometry {
        NetworkGeometry::new(
            100.0,
            [600.0, 0.0],
            50.0,
            [600.0, 0.0, 100.0],
            Orientation {
                theta: 0.0,
                phi: FRAC_PI_2,
            },
        )
        .unwrap()
    }

    #[test]
    fn orthogonal_hover_is_circular() {
        let stab = UavStability {
            sigma_p: 0.01,
            sigma_o: 0.3e-3,
        };
        let h = fluctuation_covariance(&hover(), &stab).unwrap();
        assert!((h.m - 1.0).abs() < 1e-12);
        let expected = 2.0 * (1e-4 + 600.0f64.powi(2) * 0.09e-6);
        assert!((h.omega - expected).abs() < 1e-15);
        assert!((h.omega - 0.065).abs() < 1e-3);
    }

    #[test]
    fn zero_fluctuation_is_deterministic() {
        let stab = UavStability {
            sigma_p: 0.0,
            sigma_o: 0.0,
        };
        let h = fluctuation_covariance(&hover(), &stab).unwrap();
        assert!(h.is_deterministic());
        assert_eq!(h.m, 1.0);
    }

    #[test]
    fn distance_example() {
        let g = NetworkGeometry::pointed(100.0, [600.0, 0.0], 50.0, [600.0, 0.0, 30.0]).unwrap();
        assert!((uav_gs_distance(&g) - 604.069_532_9).abs() < 1e-6);
    }

    #[test]
    fn elevation_examples() {
        assert_eq!(elevation_deg(30.0, 0.0), 90.0);
        assert!((elevation_deg(30.0, 30.0) - 45.0).abs() < 1e-12);
        assert!((elevation_deg(30.0, 50.0) - 30.963_756_5).abs() < 1e-6);
    }

    #[test]
    fn pointing_requires_positive_x() {
        assert!(matches!(
            pointing_orientation([-1.0, 0.0, 30.0], 100.0),
            Err(Error::DegenerateOrientation(_))
        ));
        assert!(matches!(
            pointing_orientation([0.0, 0.0, 30.0], 100.0),
            Err(Error::DegenerateOrientation(_))
        ));
    }

    #[test]
    fn rejects_nonpositive_radius() {
        let r = NetworkGeometry::pointed(100.0, [600.0, 0.0], -1.0, [600.0, 0.0, 30.0]);
        match r {
            Err(Error::InvalidParameter { field, .. }) => assert_eq!(field, "cell_radius"),
            other => panic!("{other:?}"),
        }
    }
}
