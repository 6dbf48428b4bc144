use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Integer position of a router on the NoC grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Coord {
    pub x: u32,
    pub y: u32,
    pub z: u32,
}

impl Coord {
    pub const fn new(x: u32, y: u32, z: u32) -> Self {
        Coord { x, y, z }
    }
}

/// `|dx| + |dy| + |dz|`.
pub fn manhattan_distance(a: Coord, b: Coord) -> u32 {
    a.x.abs_diff(b.x) + a.y.abs_diff(b.y) + a.z.abs_diff(b.z)
}

/// Router grid dimensions and the physical length of one grid unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dims: [u32; 3],
    #[serde(default = "default_hop_pitch")]
    pub hop_pitch_mm: f64,
}

fn default_hop_pitch() -> f64 {
    1.0
}

impl GridSpec {
    pub fn new(x: u32, y: u32, z: u32, hop_pitch_mm: f64) -> Result<Self> {
        let g = GridSpec {
            dims: [x, y, z],
            hop_pitch_mm,
        };
        g.check()?;
        Ok(g)
    }

    pub fn check(&self) -> Result<()> {
        if self.dims.contains(&0) {
            return Err(Error::InvalidParam(format!(
                "grid dimensions must be >= 1, got {:?}",
                self.dims
            )));
        }
        if self.num_routers() < 2 {
            return Err(Error::InvalidParam(
                "grid must contain at least 2 routers".into(),
            ));
        }
        if !(self.hop_pitch_mm > 0.0 && self.hop_pitch_mm.is_finite()) {
            return Err(Error::InvalidParam(format!(
                "hop_pitch_mm must be positive, got {}",
                self.hop_pitch_mm
            )));
        }
        Ok(())
    }

    pub fn num_routers(&self) -> usize {
        self.dims.iter().map(|&d| d as usize).product()
    }

    /// Router index of a coordinate, x fastest.
    pub fn index(&self, c: Coord) -> usize {
        let [dx, dy, _] = self.dims;
        (c.z as usize * dy as usize + c.y as usize) * dx as usize + c.x as usize
    }

    pub fn coord(&self, index: usize) -> Coord {
        let [dx, dy, _] = self.dims;
        let (dx, dy) = (dx as usize, dy as usize);
        Coord::new(
            (index % dx) as u32,
            ((index / dx) % dy) as u32,
            (index / (dx * dy)) as u32,
        )
    }

    /// All coordinates in router-index order.
    pub fn coords(&self) -> Vec<Coord> {
        (0..self.num_routers()).map(|i| self.coord(i)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn distance_examples() {
        assert_eq!(manhattan_distance(Coord::new(0, 0, 0), Coord::new(0, 0, 0)), 0);
        assert_eq!(manhattan_distance(Coord::new(0, 0, 0), Coord::new(2, 1, 1)), 4);
        assert_eq!(manhattan_distance(Coord::new(3, 0, 1), Coord::new(0, 2, 0)), 6);
    }

    #[test]
    fn grid_rejects_single_router() {
        assert!(GridSpec::new(1, 1, 1, 1.0).is_err());
        assert!(GridSpec::new(0, 4, 1, 1.0).is_err());
        assert!(GridSpec::new(2, 1, 1, 0.0).is_err());
        assert!(GridSpec::new(2, 1, 1, 1.0).is_ok());
    }

    #[test]
    fn index_roundtrip() {
        let g = GridSpec::new(4, 3, 2, 1.0).unwrap();
        for i in 0..g.num_routers() {
            assert_eq!(g.index(g.coord(i)), i);
        }
    }

    fn coord() -> impl Strategy<Value = Coord> {
        (0u32..50, 0u32..50, 0u32..50).prop_map(|(x, y, z)| Coord::new(x, y, z))
    }

    proptest! {
        #[test]
        fn distance_is_a_metric(a in coord(), b in coord(), c in coord()) {
            prop_assert_eq!(manhattan_distance(a, b), manhattan_distance(b, a));
            prop_assert_eq!(manhattan_distance(a, a), 0);
            prop_assert_eq!(manhattan_distance(a, b) == 0, a == b);
            prop_assert!(manhattan_distance(a, c) <= manhattan_distance(a, b) + manhattan_distance(b, c));
        }
    }
}
