//! Node placement and link distances for the BS → UAV → ground-node links.

use thiserror::Error;

use crate::scalar::{lit, Scalar};

/// Distances shorter than this (meters) are treated as colocated nodes.
pub const COLOCATION_THRESHOLD_M: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("UAV is colocated with {node} (distance {distance:e} m)")]
    Colocated { node: &'static str, distance: f64 },
    #[error("pair {pair} is out of range ({available} configured)")]
    PairOutOfRange { pair: usize, available: usize },
    #[error("invalid layout: {0}")]
    InvalidLayout(String),
}

/// Cartesian position in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Position3D<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Scalar> Position3D<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn translated(&self, dx: T, dy: T, dz: T) -> Self {
        Self::new(self.x + dx, self.y + dy, self.z + dz)
    }
}

impl<T: Scalar> From<[T; 3]> for Position3D<T> {
    fn from(v: [T; 3]) -> Self {
        Self::new(v[0], v[1], v[2])
    }
}

impl<T: Scalar> From<Position3D<T>> for [T; 3] {
    fn from(p: Position3D<T>) -> Self {
        [p.x, p.y, p.z]
    }
}

/// Euclidean distance.
pub fn distance<T: Scalar>(a: &Position3D<T>, b: &Position3D<T>) -> T {
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    let dz = a.z - b.z;
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// Distance from the UAV to a ground node. Only the node's horizontal
/// coordinates enter; the vertical separation is the UAV altitude.
pub fn air_to_ground_distance<T: Scalar>(uav: &Position3D<T>, node: &Position3D<T>) -> T {
    let dx = node.x - uav.x;
    let dy = node.y - uav.y;
    (dx * dx + dy * dy + uav.z * uav.z).sqrt()
}

/// (user index, eavesdropper index) within one region.
pub type RegionPair = (usize, usize);

/// Deployment of the base station, users and eavesdroppers on both sides of
/// the surface.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeLayout<T> {
    pub bs: Position3D<T>,
    pub reflect_users: Vec<Position3D<T>>,
    pub transmit_users: Vec<Position3D<T>>,
    pub reflect_eves: Vec<Position3D<T>>,
    pub transmit_eves: Vec<Position3D<T>>,
    /// Entry `i` of both lists forms NOMA pair `i`.
    pub reflect_pairs: Vec<RegionPair>,
    pub transmit_pairs: Vec<RegionPair>,
}

impl<T: Scalar> NodeLayout<T> {
    pub fn validate(&self) -> Result<(), GeometryError> {
        let bad = |msg: String| Err(GeometryError::InvalidLayout(msg));
        if self.reflect_users.is_empty() || self.transmit_users.is_empty() {
            return bad("each region needs at least one user".into());
        }
        if self.reflect_eves.is_empty() || self.transmit_eves.is_empty() {
            return bad("each region needs at least one eavesdropper".into());
        }
        if self.reflect_pairs.is_empty() {
            return bad("at least one pair is required".into());
        }
        if self.reflect_pairs.len() != self.transmit_pairs.len() {
            return bad(format!(
                "reflect_pairs ({}) and transmit_pairs ({}) differ in length",
                self.reflect_pairs.len(),
                self.transmit_pairs.len()
            ));
        }
        let all = std::iter::once(&self.bs)
            .chain(&self.reflect_users)
            .chain(&self.transmit_users)
            .chain(&self.reflect_eves)
            .chain(&self.transmit_eves);
        for p in all {
            if !p.is_finite() {
                return bad("non-finite coordinate".into());
            }
        }
        let ground = self
            .reflect_users
            .iter()
            .chain(&self.transmit_users)
            .chain(&self.reflect_eves)
            .chain(&self.transmit_eves);
        for p in ground {
            if p.z < T::zero() {
                return bad("ground nodes need z >= 0".into());
            }
        }
        let check = |pairs: &[RegionPair], users: usize, eves: usize, region: &str| {
            for &(u, e) in pairs {
                if u >= users || e >= eves {
                    return Err(GeometryError::InvalidLayout(format!(
                        "{region} pair ({u}, {e}) out of range"
                    )));
                }
            }
            Ok(())
        };
        check(
            &self.reflect_pairs,
            self.reflect_users.len(),
            self.reflect_eves.len(),
            "reflect",
        )?;
        check(
            &self.transmit_pairs,
            self.transmit_users.len(),
            self.transmit_eves.len(),
            "transmit",
        )?;
        // a node cannot sit on both sides of the surface
        for r in self.reflect_users.iter().chain(&self.reflect_eves) {
            for t in self.transmit_users.iter().chain(&self.transmit_eves) {
                if r == t {
                    return bad("a node appears in both regions".into());
                }
            }
        }
        Ok(())
    }

    pub fn pair_count(&self) -> usize {
        self.reflect_pairs.len()
    }
}

/// Per-pair link distances in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkDistances<T> {
    pub d_bv: T,
    pub d_vu_r: T,
    pub d_vu_t: T,
    pub d_ve_r: T,
    pub d_ve_t: T,
}

impl<T: Scalar> LinkDistances<T> {
    /// Same distance on every link.
    pub fn uniform(d: T) -> Self {
        Self {
            d_bv: d,
            d_vu_r: d,
            d_vu_t: d,
            d_ve_r: d,
            d_ve_t: d,
        }
    }
}

/// Distances for NOMA pair `pair` with the UAV at `uav`.
pub fn link_distances<T: Scalar>(
    layout: &NodeLayout<T>,
    uav: &Position3D<T>,
    pair: usize,
) -> Result<LinkDistances<T>, GeometryError> {
    let available = layout.pair_count();
    if pair >= available || pair >= layout.transmit_pairs.len() {
        return Err(GeometryError::PairOutOfRange { pair, available });
    }
    let (ur, er) = layout.reflect_pairs[pair];
    let (ut, et) = layout.transmit_pairs[pair];
    let threshold = lit::<T>(COLOCATION_THRESHOLD_M);
    let guard = |d: T, node: &'static str| {
        if d < threshold || !d.is_finite() {
            Err(GeometryError::Colocated {
                node,
                distance: d.to_f64().unwrap_or(f64::NAN),
            })
        } else {
            Ok(d)
        }
    };
    Ok(LinkDistances {
        d_bv: guard(distance(&layout.bs, uav), "base station")?,
        d_vu_r: guard(
            air_to_ground_distance(uav, &layout.reflect_users[ur]),
            "reflect user",
        )?,
        d_vu_t: guard(
            air_to_ground_distance(uav, &layout.transmit_users[ut]),
            "transmit user",
        )?,
        d_ve_r: guard(
            air_to_ground_distance(uav, &layout.reflect_eves[er]),
            "reflect eavesdropper",
        )?,
        d_ve_t: guard(
            air_to_ground_distance(uav, &layout.transmit_eves[et]),
            "transmit eavesdropper",
        )?,
    })
}
