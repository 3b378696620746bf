//! Polysquare / polycube regions, their conversion into boundary-free
//! translation manifolds, and the derived splitting-edge sets.

mod description;
mod manifold;
mod polygon;

pub use description::{
    DescribedFace, FacePairingDesc, GatedFaceDesc, ManifoldDescription, PolygonDesc,
    RedPolygonDesc,
};
pub use manifold::{
    FaceCensus, FaceClass, FaceData, FaceLink, GateSide, LocalSegment, Manifold,
    OnSplittingEdge, Passage, RedPane, SplittingEdge, SplittingEdgeKind, Transported,
};
pub use polygon::{PointSite, Polygon};

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Lattice position of one atomic square/cube. 2D surfaces keep `k == 0`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct CellId(pub i64, pub i64, pub i64);

impl CellId {
    pub fn coords(&self) -> [i64; 3] {
        [self.0, self.1, self.2]
    }

    pub fn shifted(&self, axis: Axis, delta: i64) -> CellId {
        let mut c = self.coords();
        c[axis.index()] += delta;
        CellId(c[0], c[1], c[2])
    }
}

impl fmt::Display for CellId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.0, self.1, self.2)
    }
}

/// Coordinate axis of a face normal or an edge direction.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    pub fn from_index(i: usize) -> Axis {
        Self::ALL[i]
    }

    /// The two tangential axes of a face with this normal, in local (u, v)
    /// order: X -> (y, z), Y -> (x, z), Z -> (x, y).
    pub fn tangentials(self) -> [Axis; 2] {
        match self {
            Axis::X => [Axis::Y, Axis::Z],
            Axis::Y => [Axis::X, Axis::Z],
            Axis::Z => [Axis::X, Axis::Y],
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axis::X => write!(f, "X"),
            Axis::Y => write!(f, "Y"),
            Axis::Z => write!(f, "Z"),
        }
    }
}

/// Which side of the cell the face sits on along its axis.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub enum Side {
    Minus,
    Plus,
}

impl Side {
    pub fn sign(self) -> i64 {
        match self {
            Side::Minus => -1,
            Side::Plus => 1,
        }
    }

    pub fn opposite(self) -> Side {
        match self {
            Side::Minus => Side::Plus,
            Side::Plus => Side::Minus,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Minus => write!(f, "-"),
            Side::Plus => write!(f, "+"),
        }
    }
}

/// One unit face of one cell: `(cell, axis, side)`. The two sides of a
/// geometric square shared by adjacent cells are distinct `FaceRef`s.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct FaceRef {
    pub cell: CellId,
    pub axis: Axis,
    pub side: Side,
}

impl FaceRef {
    pub fn new(cell: CellId, axis: Axis, side: Side) -> Self {
        FaceRef { cell, axis, side }
    }

    /// Ambient coordinate of the face plane along its axis.
    pub fn plane(&self) -> i64 {
        let base = self.cell.coords()[self.axis.index()];
        match self.side {
            Side::Minus => base,
            Side::Plus => base + 1,
        }
    }

    /// Lattice cell on the other side of this face (which may not exist in
    /// the manifold).
    pub fn neighbour_cell(&self) -> CellId {
        self.cell.shifted(self.axis, self.side.sign())
    }

    /// The same geometric square seen from the neighbouring cell.
    pub fn twin(&self) -> FaceRef {
        FaceRef::new(self.neighbour_cell(), self.axis, self.side.opposite())
    }
}

impl fmt::Display for FaceRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}{}", self.cell, self.side, self.axis)
    }
}

/// Validation failures raised by [`ManifoldDescription::build`].
#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("region is not face-connected: {0}")]
    DisconnectedRegion(String),
    #[error("cell {0} listed more than once")]
    OverlappingCells(CellId),
    #[error("boundary face {0} is neither paired nor fully covered by red panes")]
    UnpairedBoundaryFace(FaceRef),
    #[error("red pane on {face} does not match its target on {target}: {reason}")]
    IncongruentRedPairing {
        face: FaceRef,
        target: FaceRef,
        reason: String,
    },
    #[error("green/red polygons on {0} do not tile the face: {1}")]
    PolygonTilingGap(FaceRef, String),
    #[error("face {0} is gated but its twin {1} carries a different partition")]
    AsymmetricGatedFace(FaceRef, FaceRef),
    #[error("red pane on {face} targets {target}, which does not pair back")]
    NonInvolutiveRedPairing { face: FaceRef, target: FaceRef },
    #[error("invalid description: {0}")]
    BadDescription(String),
}
