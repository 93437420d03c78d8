//! Geographic model: weighted regions with Gaussian scatter around a center.

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand_distr::Normal;

use crate::error::{Result, SimError};

pub const EARTH_RADIUS_KM: f64 = 6371.0;
const KM_PER_DEGREE: f64 = 111.195;

#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub name: String,
    pub weight: f64,
    pub lat: f64,
    pub lon: f64,
    /// Standard deviation of the scatter around the center, in km.
    pub dispersion_km: f64,
}

impl Region {
    pub fn new(name: &str, weight: f64, lat: f64, lon: f64, dispersion_km: f64) -> Self {
        Region {
            name: name.to_string(),
            weight,
            lat,
            lon,
            dispersion_km,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeoModel {
    pub regions: Vec<Region>,
}

impl Default for GeoModel {
    /// Membership shares: Brazil 53%, United States 18%, Iran 8%, with the
    /// remaining 21% spread over South Asia, Eastern Europe, South-East Asia
    /// and Western Europe.
    fn default() -> Self {
        GeoModel {
            regions: vec![
                Region::new("brazil", 0.53, -14.2, -51.9, 800.0),
                Region::new("united_states", 0.18, 39.8, -98.6, 1200.0),
                Region::new("iran", 0.08, 32.4, 53.7, 500.0),
                Region::new("south_asia", 0.06, 20.6, 78.9, 900.0),
                Region::new("eastern_europe", 0.05, 50.5, 24.0, 600.0),
                Region::new("south_east_asia", 0.05, 8.0, 106.0, 900.0),
                Region::new("western_europe", 0.05, 48.0, 5.0, 600.0),
            ],
        }
    }
}

impl GeoModel {
    pub fn validate(&self) -> Result<()> {
        if self.regions.is_empty() {
            return Err(SimError::param("geo model has no regions"));
        }
        let mut total = 0.0;
        for r in &self.regions {
            if !(0.0..=1.0).contains(&r.weight) {
                return Err(SimError::param(format!("region {} weight out of [0,1]", r.name)));
            }
            if !(r.dispersion_km > 0.0) {
                return Err(SimError::param(format!("region {} dispersion must be > 0", r.name)));
            }
            if !(-90.0..=90.0).contains(&r.lat) || !(-180.0..=180.0).contains(&r.lon) {
                return Err(SimError::param(format!("region {} center out of range", r.name)));
            }
            total += r.weight;
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(SimError::param(format!("region weights sum to {total}, expected 1")));
        }
        Ok(())
    }

    /// Draws `(region, lat, lon)` for one user.
    pub(crate) fn sample<R: Rng>(&self, picker: &WeightedIndex<f64>, rng: &mut R) -> (usize, f64, f64) {
        let region = picker.sample(rng);
        let r = &self.regions[region];
        let scatter = Normal::new(0.0, r.dispersion_km).expect("dispersion validated");
        let north_km: f64 = scatter.sample(rng);
        let east_km: f64 = scatter.sample(rng);
        let lat = (r.lat + north_km / KM_PER_DEGREE).clamp(-90.0, 90.0);
        let cos_lat = lat.to_radians().cos().max(0.05);
        let lon = wrap_lon(r.lon + east_km / (KM_PER_DEGREE * cos_lat));
        (region, lat, lon)
    }

    pub(crate) fn picker(&self) -> WeightedIndex<f64> {
        WeightedIndex::new(self.regions.iter().map(|r| r.weight)).expect("weights validated")
    }
}

fn wrap_lon(lon: f64) -> f64 {
    let mut l = (lon + 180.0).rem_euclid(360.0) - 180.0;
    if l < -180.0 {
        l = -180.0;
    }
    l
}

/// Great-circle distance in km.
pub fn haversine_km(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let dp = p2 - p1;
    let dl = (lon2 - lon1).to_radians();
    let a = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * a.sqrt().min(1.0).asin()
}

/// Unit vector on the sphere; chord length between two of these maps
/// monotonically to great-circle distance.
pub(crate) fn unit_vector(lat: f64, lon: f64) -> [f64; 3] {
    let (p, l) = (lat.to_radians(), lon.to_radians());
    [p.cos() * l.cos(), p.cos() * l.sin(), p.sin()]
}

pub(crate) fn great_circle_from_units(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    let chord = (dx * dx + dy * dy + dz * dz).sqrt();
    2.0 * EARTH_RADIUS_KM * (chord / 2.0).min(1.0).asin()
}
