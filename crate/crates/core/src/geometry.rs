//! Field configurations on the flat unit torus and the round sphere, flux
//! quantization, and Liouville-measure quadrature.
//!
//! The torus field is `b(x, y) = 2 pi m (1 + eps f(x, y))` on `[0, 1)^2` with a
//! zero-mean profile `f`. All profile integrals used by the lattice gauge
//! construction are available in closed form.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model_spectrum::{FieldSample, DEFAULT_FREQUENCY_FLOOR};

const TWO_PI: f64 = 2.0 * PI;

/// Zero-mean modulation profiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// `f = 0`
    Constant,
    /// `f = cos 2 pi x`
    CosX,
    /// `f = cos 2 pi x cos 2 pi y`
    CosXCosY,
}

impl Profile {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "constant" => Ok(Self::Constant),
            "cos_x" => Ok(Self::CosX),
            "cos_x_cos_y" => Ok(Self::CosXCosY),
            other => Err(Error::Config(format!(
                "unknown profile '{other}' (expected constant | cos_x | cos_x_cos_y)"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Constant => "constant",
            Self::CosX => "cos_x",
            Self::CosXCosY => "cos_x_cos_y",
        }
    }

    pub fn value(self, x: f64, y: f64) -> f64 {
        match self {
            Self::Constant => 0.0,
            Self::CosX => (TWO_PI * x).cos(),
            Self::CosXCosY => (TWO_PI * x).cos() * (TWO_PI * y).cos(),
        }
    }

    pub fn sup_norm(self) -> f64 {
        match self {
            Self::Constant => 0.0,
            _ => 1.0,
        }
    }

    /// `int_0^x f(s, y) ds`
    fn x_primitive(self, x: f64, y: f64) -> f64 {
        match self {
            Self::Constant => 0.0,
            Self::CosX => (TWO_PI * x).sin() / TWO_PI,
            Self::CosXCosY => (TWO_PI * x).sin() / TWO_PI * (TWO_PI * y).cos(),
        }
    }

    /// `int_{y0}^{y1} int_0^x f(s, t) ds dt`
    fn xy_primitive(self, x: f64, y0: f64, y1: f64) -> f64 {
        match self {
            Self::Constant => 0.0,
            Self::CosX => (TWO_PI * x).sin() / TWO_PI * (y1 - y0),
            Self::CosXCosY => {
                (TWO_PI * x).sin() / TWO_PI * ((TWO_PI * y1).sin() - (TWO_PI * y0).sin()) / TWO_PI
            }
        }
    }
}

/// Scalar potential presets for the torus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Potential {
    Zero,
    /// `V = -tau = -b`, the renormalized Bochner Laplacian.
    Renormalized,
    /// Values on the nodes `(i / r, j / r)` of an `r x r` periodic grid
    /// (row-major, `i` along x), bilinearly interpolated.
    Custom { resolution: usize, values: Vec<f64> },
}

impl Potential {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Zero => "zero",
            Self::Renormalized => "renormalized",
            Self::Custom { .. } => "custom",
        }
    }
}

/// Magnetic torus configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusConfig {
    flux_m: u32,
    epsilon: f64,
    profile: Profile,
    potential: Potential,
}

/// Periodic sample grid resolution used for invariants checked at construction.
pub const DEFAULT_SAMPLE_RESOLUTION: usize = 64;

impl TorusConfig {
    pub fn new(flux_m: u32, epsilon: f64, profile: Profile, potential: Potential) -> Result<Self> {
        if flux_m == 0 {
            return Err(Error::NonPositiveFlux { m: 0 });
        }
        if !(0.0..1.0).contains(&epsilon) {
            return Err(Error::InvalidInput(format!("modulation eps = {epsilon} must lie in [0, 1)")));
        }
        if let Potential::Custom { resolution, values } = &potential {
            if *resolution == 0 || values.len() != resolution * resolution {
                return Err(Error::InvalidInput(format!(
                    "custom potential needs {r}x{r} values, got {}",
                    values.len(),
                    r = resolution
                )));
            }
        }
        let cfg = Self {
            flux_m,
            epsilon,
            profile,
            potential,
        };
        let grid = cfg.field_values(DEFAULT_SAMPLE_RESOLUTION);
        let m = quantization_check(&grid, DEFAULT_SAMPLE_RESOLUTION)?;
        debug_assert_eq!(m, flux_m);
        let b_min = grid.iter().copied().fold(f64::INFINITY, f64::min);
        if !(b_min >= DEFAULT_FREQUENCY_FLOOR) {
            return Err(Error::DegenerateField {
                smallest: b_min,
                floor: DEFAULT_FREQUENCY_FLOOR,
            });
        }
        Ok(cfg)
    }

    /// Constant field `2 pi m` with zero potential.
    pub fn constant(flux_m: u32) -> Self {
        Self::new(flux_m, 0.0, Profile::Constant, Potential::Zero).expect("constant field is valid")
    }

    pub fn flux_m(&self) -> u32 {
        self.flux_m
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn profile(&self) -> Profile {
        self.profile
    }

    pub fn potential_preset(&self) -> &Potential {
        &self.potential
    }

    pub fn with_potential(&self, potential: Potential) -> Result<Self> {
        Self::new(self.flux_m, self.epsilon, self.profile, potential)
    }

    fn strength(&self) -> f64 {
        TWO_PI * self.flux_m as f64
    }

    /// `b(x, y)`
    pub fn field(&self, x: f64, y: f64) -> f64 {
        self.strength() * (1.0 + self.epsilon * self.profile.value(x, y))
    }

    /// Potential `V(x, y)`.
    pub fn potential(&self, x: f64, y: f64) -> f64 {
        match &self.potential {
            Potential::Zero => 0.0,
            Potential::Renormalized => -self.field(x, y),
            Potential::Custom { resolution, values } => bilinear_periodic(*resolution, values, x, y),
        }
    }

    /// Landau gauge `A = (0, A_y)` with `A_y(x, y) = int_0^x b(s, y) ds`.
    pub fn landau_gauge_y(&self, x: f64, y: f64) -> f64 {
        self.strength() * (x + self.epsilon * self.profile.x_primitive(x, y))
    }

    /// `int_{y0}^{y1} A_y(x, t) dt`, the line integral of the Landau gauge along a
    /// vertical segment.
    pub fn vertical_line_integral(&self, x: f64, y0: f64, y1: f64) -> f64 {
        self.strength() * (x * (y1 - y0) + self.epsilon * self.profile.xy_primitive(x, y0, y1))
    }

    /// Flux `int int b` over the rectangle `[x0, x1] x [y0, y1]`.
    pub fn rectangle_flux(&self, x0: f64, x1: f64, y0: f64, y1: f64) -> f64 {
        self.vertical_line_integral(x1, y0, y1) - self.vertical_line_integral(x0, y0, y1)
    }

    /// `int_0^y int_0^1 b(s, t) ds dt`; enters the seam links of the Landau gauge.
    pub fn seam_primitive(&self, y: f64) -> f64 {
        self.rectangle_flux(0.0, 1.0, 0.0, y)
    }

    /// `b` on the cell-centred `res x res` grid; entry `i * res + j` is
    /// `b((i + 1/2) / res, (j + 1/2) / res)`.
    pub fn field_values(&self, res: usize) -> Vec<f64> {
        cell_centres(res)
            .map(|(x, y)| self.field(x, y))
            .collect()
    }

    /// Field samples (one per grid cell) with Liouville weights `b / res^2`.
    pub fn field_grid(&self, res: usize) -> Result<SampledField> {
        let cell = 1.0 / (res * res) as f64;
        let points = cell_centres(res)
            .map(|(x, y)| {
                let b = self.field(x, y);
                Ok(FieldPoint {
                    coords: [x, y],
                    sample: FieldSample::surface(b, self.potential(x, y))?,
                    weight: b * cell,
                })
            })
            .collect::<Result<_>>()?;
        Ok(SampledField { points })
    }
}

fn cell_centres(res: usize) -> impl Iterator<Item = (f64, f64)> {
    let h = 1.0 / res as f64;
    (0..res).flat_map(move |i| (0..res).map(move |j| ((i as f64 + 0.5) * h, (j as f64 + 0.5) * h)))
}

fn bilinear_periodic(res: usize, values: &[f64], x: f64, y: f64) -> f64 {
    let fx = (x * res as f64).rem_euclid(res as f64);
    let fy = (y * res as f64).rem_euclid(res as f64);
    let (i0, j0) = (fx.floor() as usize % res, fy.floor() as usize % res);
    let (i1, j1) = ((i0 + 1) % res, (j0 + 1) % res);
    let (tx, ty) = (fx - fx.floor(), fy - fy.floor());
    let v = |i: usize, j: usize| values[i * res + j];
    (1.0 - tx) * ((1.0 - ty) * v(i0, j0) + ty * v(i0, j1)) + tx * ((1.0 - ty) * v(i1, j0) + ty * v(i1, j1))
}

/// Round sphere of squared radius `R^2` with `B = 1/2 sin(theta) dtheta ^ dphi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereConfig {
    r_squared: f64,
}

impl SphereConfig {
    pub fn new(r_squared: f64) -> Result<Self> {
        if !(r_squared > 0.0 && r_squared.is_finite()) {
            return Err(Error::InvalidInput(format!("R^2 = {r_squared} must be positive")));
        }
        Ok(Self { r_squared })
    }

    /// Kaehler normalization `R^2 = 1 / (4 pi)`.
    pub fn kaehler() -> Self {
        Self {
            r_squared: 1.0 / (4.0 * PI),
        }
    }

    pub fn r_squared(&self) -> f64 {
        self.r_squared
    }

    /// `a_1 = 1 / (2 R^2)`, constant over the sphere.
    pub fn frequency(&self) -> f64 {
        0.5 / self.r_squared
    }

    /// Samples on a `res x res` grid, midpoint in `u = cos(theta)` and in `phi`;
    /// `Omega_B = 1/2 du dphi` so the weights are exact for constants.
    pub fn field_grid(&self, res: usize) -> Result<SampledField> {
        let du = 2.0 / res as f64;
        let dphi = TWO_PI / res as f64;
        let a = self.frequency();
        let points = (0..res)
            .flat_map(|i| (0..res).map(move |j| (i, j)))
            .map(|(i, j)| {
                let u = -1.0 + (i as f64 + 0.5) * du;
                let phi = (j as f64 + 0.5) * dphi;
                Ok(FieldPoint {
                    coords: [u.acos(), phi],
                    sample: FieldSample::surface(a, 0.0)?,
                    weight: 0.5 * du * dphi,
                })
            })
            .collect::<Result<_>>()?;
        Ok(SampledField { points })
    }
}

/// A quadrature node: manifold coordinates, the frozen field there, and the
/// Liouville mass `Omega_B` of its cell.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldPoint {
    pub coords: [f64; 2],
    pub sample: FieldSample,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    pub points: Vec<FieldPoint>,
}

impl SampledField {
    pub fn samples(&self) -> Vec<FieldSample> {
        self.points.iter().map(|p| p.sample.clone()).collect()
    }
}

/// Flux quantum number `m` from `b` on a uniform periodic `res x res` grid of
/// the unit torus (trapezoid rule).
pub fn quantization_check(b_values: &[f64], res: usize) -> Result<u32> {
    if b_values.len() != res * res || res == 0 {
        return Err(Error::InvalidInput("field grid size mismatch".into()));
    }
    let flux = b_values.iter().sum::<f64>() / (res * res) as f64;
    let nearest = (flux / TWO_PI).round() as i64;
    if (flux - TWO_PI * nearest as f64).abs() > 1e-8 {
        return Err(Error::NotQuantized { flux, nearest });
    }
    if nearest <= 0 {
        return Err(Error::NonPositiveFlux { m: nearest });
    }
    Ok(nearest as u32)
}

/// `int_{predicate} Omega_B` by indicator quadrature over the sample points.
pub fn liouville_measure(field: &SampledField, predicate: impl Fn(&FieldPoint) -> bool) -> f64 {
    field
        .points
        .iter()
        .filter(|p| predicate(p))
        .map(|p| p.weight)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_of(res: usize, b: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        cell_centres(res).map(|(x, y)| b(x, y)).collect()
    }

    #[test]
    fn quantization_examples() {
        assert_eq!(quantization_check(&grid_of(32, |_, _| TWO_PI), 32).unwrap(), 1);
        let modulated = grid_of(32, |x, _| TWO_PI * (1.0 + 0.3 * (TWO_PI * x).cos()));
        assert_eq!(quantization_check(&modulated, 32).unwrap(), 1);
        assert!(matches!(
            quantization_check(&grid_of(32, |_, _| 3.0), 32),
            Err(Error::NotQuantized { .. })
        ));
        assert!(matches!(
            quantization_check(&grid_of(8, |_, _| -TWO_PI), 8),
            Err(Error::NonPositiveFlux { m: -1 })
        ));
    }

    #[test]
    fn liouville_totals() {
        let cfg = TorusConfig::constant(1);
        let f = cfg.field_grid(16).unwrap();
        assert!((liouville_measure(&f, |_| true) - TWO_PI).abs() < 1e-12);
        let sphere = SphereConfig::kaehler().field_grid(24).unwrap();
        assert!((liouville_measure(&sphere, |_| true) - TWO_PI).abs() < 1e-12);
    }

    #[test]
    fn liouville_half_torus_with_modulation() {
        let cfg = TorusConfig::new(1, 0.1, Profile::CosX, Potential::Zero).unwrap();
        let f = cfg.field_grid(64).unwrap();
        // int_0^{1/2} 2 pi (1 + 0.1 cos 2 pi x) dx = pi
        let half = liouville_measure(&f, |p| p.coords[0] < 0.5);
        assert!((half - PI).abs() < 1e-8, "{half}");
        // where cos 2 pi x > 0 the integral is 2 pi (1/2 + 0.1 / pi); the
        // indicator has jumps inside cells, so only O(h^2) accuracy
        let positive = liouville_measure(&f, |p| (TWO_PI * p.coords[0]).cos() > 0.0);
        assert!((positive - TWO_PI * (0.5 + 0.1 / PI)).abs() < 1e-3, "{positive}");
    }

    #[test]
    fn closed_form_fluxes_match_quadrature() {
        let cfg = TorusConfig::new(2, 0.4, Profile::CosXCosY, Potential::Zero).unwrap();
        let (x0, x1, y0, y1) = (0.13, 0.41, 0.22, 0.57);
        let gl = gauss_legendre_2d(|x, y| cfg.field(x, y), x0, x1, y0, y1);
        assert!((cfg.rectangle_flux(x0, x1, y0, y1) - gl).abs() < 1e-12);
        assert!((cfg.seam_primitive(1.0) - 2.0 * TWO_PI).abs() < 1e-12);
        assert!((cfg.landau_gauge_y(1.0, 0.3) - 2.0 * TWO_PI).abs() < 1e-12);
    }

    fn gauss_legendre_2d(f: impl Fn(f64, f64) -> f64, x0: f64, x1: f64, y0: f64, y1: f64) -> f64 {
        // 5-point rule, tensor product; exact enough for trig polynomials at this size
        let nodes = [
            (0.0, 128.0 / 225.0),
            (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
            (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
            (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
            (0.906_179_845_938_664, 0.236_926_885_056_189_1),
        ];
        let panels = 8;
        let (hx, hy) = ((x1 - x0) / panels as f64, (y1 - y0) / panels as f64);
        let mut total = 0.0;
        for pi in 0..panels {
            for pj in 0..panels {
                let cx = x0 + (pi as f64 + 0.5) * hx;
                let cy = y0 + (pj as f64 + 0.5) * hy;
                for &(u, wu) in &nodes {
                    for &(v, wv) in &nodes {
                        total += wu * wv * f(cx + 0.5 * hx * u, cy + 0.5 * hy * v);
                    }
                }
            }
        }
        total * 0.25 * hx * hy
    }

    #[test]
    fn renormalized_potential_cancels_ground_level() {
        let cfg = TorusConfig::new(1, 0.1, Profile::CosX, Potential::Renormalized).unwrap();
        for p in cfg.field_grid(16).unwrap().points {
            assert!(p.sample.ground_level().abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(TorusConfig::new(0, 0.0, Profile::Constant, Potential::Zero).is_err());
        assert!(TorusConfig::new(1, 1.0, Profile::CosX, Potential::Zero).is_err());
        assert!(TorusConfig::new(
            1,
            0.0,
            Profile::Constant,
            Potential::Custom {
                resolution: 3,
                values: vec![0.0; 4]
            }
        )
        .is_err());
        assert!(SphereConfig::new(-1.0).is_err());
    }

    #[test]
    fn custom_potential_interpolates_nodes() {
        let values: Vec<f64> = (0..16).map(|v| v as f64).collect();
        let cfg = TorusConfig::new(
            1,
            0.0,
            Profile::Constant,
            Potential::Custom {
                resolution: 4,
                values: values.clone(),
            },
        )
        .unwrap();
        assert_eq!(cfg.potential(0.25, 0.5), values[4 + 2]);
        let mid = cfg.potential(0.125, 0.0);
        assert!((mid - 0.5 * (values[0] + values[4])).abs() < 1e-12);
    }
}
