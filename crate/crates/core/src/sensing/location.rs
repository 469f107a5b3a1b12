use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::SensingError;

/// A position snapped to the 0.1° grid (about 11.1 km of latitude).
///
/// Stored as integer tenths of a degree so that grid membership is exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridLocation {
    lat_tenths: i32,
    lon_tenths: i32,
}

impl GridLocation {
    pub fn lat(self) -> f64 {
        f64::from(self.lat_tenths) / 10.0
    }

    pub fn lon(self) -> f64 {
        f64::from(self.lon_tenths) / 10.0
    }
}

/// Rounds half away from zero to one decimal degree. Longitude −180.0 is
/// normalized to 180.0.
pub fn coarsen_location(lat: f64, lon: f64) -> Result<GridLocation, SensingError> {
    if !(-90.0..=90.0).contains(&lat) || !(-180.0..=180.0).contains(&lon) {
        return Err(SensingError::Range { lat, lon });
    }
    let lat_tenths = (lat * 10.0).round() as i32;
    let mut lon_tenths = (lon * 10.0).round() as i32;
    if lon_tenths == -1800 {
        lon_tenths = 1800;
    }
    Ok(GridLocation { lat_tenths, lon_tenths })
}

#[derive(Serialize, Deserialize)]
struct Wire {
    lat: f64,
    lon: f64,
}

impl Serialize for GridLocation {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        Wire { lat: self.lat(), lon: self.lon() }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for GridLocation {
    /// Accepts any in-range position and snaps it to the grid, so raw
    /// coordinates can never be stored through this type.
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let w = Wire::deserialize(deserializer)?;
        coarsen_location(w.lat, w.lon).map_err(serde::de::Error::custom)
    }
}
