//! Named example manifolds used throughout the test suites and shipped as
//! JSON files under `fixtures/`.
//!
//! Layouts marked "inspired-by" reconstruct a published picture from prose;
//! the docstring of each constructor states the exact geometry shipped.

use crate::geometry::{
    DescribedFace, GatedFaceDesc, Manifold, ManifoldDescription, PolygonDesc, RedPolygonDesc,
};

fn face(cell: [i64; 3], axis: &str, side: &str) -> DescribedFace {
    DescribedFace {
        cell: cell.to_vec(),
        axis: axis.into(),
        side: side.into(),
    }
}

fn rect(u0: &str, v0: &str, u1: &str, v1: &str) -> PolygonDesc {
    vec![
        [u0.into(), v0.into()],
        [u1.into(), v0.into()],
        [u1.into(), v1.into()],
        [u0.into(), v1.into()],
    ]
}

fn whole_face() -> PolygonDesc {
    rect("0", "0", "1", "1")
}

fn red(polygon: PolygonDesc, target: DescribedFace) -> RedPolygonDesc {
    RedPolygonDesc {
        target_polygon: polygon.clone(),
        polygon,
        target_face: target,
    }
}

/// The unit 3-torus: one cube, all three opposite-face pairs identified.
pub fn torus_3d() -> ManifoldDescription {
    ManifoldDescription {
        name: "torus3".into(),
        dim: 3,
        cells: vec![vec![0, 0, 0]],
        wraparound: true,
        pairings: vec![],
        gated_faces: vec![],
    }
}

/// The unit 2-torus: one square with both edge pairs identified. Its single
/// lattice vertex is the marked singular point.
pub fn torus_2d() -> ManifoldDescription {
    ManifoldDescription {
        name: "torus2".into(),
        dim: 2,
        cells: vec![vec![0, 0]],
        wraparound: true,
        pairings: vec![],
        gated_faces: vec![],
    }
}

/// Two cubes side by side along x, fully wrapped: the smallest connected
/// manifold with more than one atomic cube.
pub fn two_cube_3d() -> ManifoldDescription {
    ManifoldDescription {
        name: "two_cube".into(),
        dim: 3,
        cells: vec![vec![0, 0, 0], vec![1, 0, 0]],
        wraparound: true,
        pairings: vec![],
        gated_faces: vec![],
    }
}

/// Two cubes stacked along z, fully wrapped; no barriers, so the flow is
/// integrable and colourings can never split.
pub fn stack2_3d() -> ManifoldDescription {
    ManifoldDescription {
        name: "stack2".into(),
        dim: 3,
        cells: vec![vec![0, 0, 0], vec![0, 0, 1]],
        wraparound: true,
        pairings: vec![],
        gated_faces: vec![],
    }
}

/// Inspired-by reconstruction of the four-square surface crossed with a
/// circle factor.
///
/// Exact layout shipped: the base surface is the 2x2 polysquare in the
/// (x, z)-plane (cells `(i, 0, k)`, `i, k \in {0, 1}`); the y axis is the
/// circle factor, wrapped per cube. Both vertical edge classes of the bottom
/// row become whole barriers in the base, i.e. every bottom-row X-face
/// (`z \in [0,1]`) is fully red and seals its own cube horizontally: hitting
/// `x = 1` from inside the bottom-left cube re-enters that cube at `x = 0`,
/// and likewise for the bottom-right cube. The top row is fully open, so the
/// manifold stays connected through the z direction. Splitting happens at
/// the barrier top edges: the y-direction cube edges at `(x, z) = (1, 1)`
/// and `(0/2, 1)`.
pub fn figure2_3d() -> ManifoldDescription {
    let mut gated = Vec::new();
    // Bottom row cubes (i, 0, 0), i = 0, 1. Seal each in x with whole-face
    // red panes on both of its X-faces.
    for i in 0..2i64 {
        let plus = face([i, 0, 0], "X", "+");
        let minus = face([i, 0, 0], "X", "-");
        gated.push(GatedFaceDesc {
            face: plus.clone(),
            green: vec![],
            red: vec![red(whole_face(), minus.clone())],
        });
        gated.push(GatedFaceDesc {
            face: minus,
            green: vec![],
            red: vec![red(whole_face(), plus)],
        });
    }
    ManifoldDescription {
        name: "figure2".into(),
        dim: 3,
        cells: vec![vec![0, 0, 0], vec![1, 0, 0], vec![0, 0, 1], vec![1, 0, 1]],
        wraparound: true,
        pairings: vec![],
        gated_faces: gated,
    }
}

/// The 2-dimensional base of [`figure2_3d`]: the 2x2 polysquare surface in
/// the (x, y)-plane whose bottom-row vertical edges are whole barriers, each
/// bottom square sealed horizontally. Barrier endpoints are lattice vertices,
/// the surface's singular points.
pub fn figure2_surface_2d() -> ManifoldDescription {
    let mut gated = Vec::new();
    for i in 0..2i64 {
        let plus = face([i, 0, 0], "X", "+");
        let minus = face([i, 0, 0], "X", "-");
        gated.push(GatedFaceDesc {
            face: plus.clone(),
            green: vec![],
            red: vec![red(whole_face(), minus.clone())],
        });
        gated.push(GatedFaceDesc {
            face: minus,
            green: vec![],
            red: vec![red(whole_face(), plus)],
        });
    }
    ManifoldDescription {
        name: "figure2_surface".into(),
        dim: 2,
        cells: vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![1, 1]],
        wraparound: true,
        pairings: vec![],
        gated_faces: gated,
    }
}

/// Four cubes in a row with partial-height barriers of alternating heights,
/// cross-paired around the row.
///
/// Every X-face carries a 2-colouring: the wall at plane `x = k`
/// (`k = 1..4`, `x = 4` wrapping to `x = 0`) is red on `z in [0, h]` with
/// heights `h = (1/4, 1/2, 1/4, 1/2)` and green above. A pane hit while
/// moving in `+x` at plane `x = k` re-emerges two columns back (the unique
/// lattice-translation matching of panes with equal heights that does not
/// erase the walls). The gate boundary lines `z = 1/4` and `z = 1/2` are
/// genuine face splitting edges, so this fixture exercises harmonization and
/// the face-edge direction machinery.
pub fn gates4_3d() -> ManifoldDescription {
    let heights = ["1/4", "1/2", "1/4", "1/2"];
    let mut gated = Vec::new();
    for i in 0..4i64 {
        let h = heights[i as usize];
        // Left side of the wall at plane x = i+1: red targets the minus face
        // at plane x = i-1 (two columns back).
        let a_face = face([i, 0, 0], "X", "+");
        let a_target = face([(i + 3) % 4, 0, 0], "X", "-");
        gated.push(GatedFaceDesc {
            face: a_face,
            green: vec![rect("0", h, "1", "1")],
            red: vec![red(rect("0", "0", "1", h), a_target)],
        });
        // Right side of the wall at plane x = i: its height is the previous
        // column's, and its red pane points back at the matching left side.
        let h_prev = heights[((i + 3) % 4) as usize];
        let b_face = face([i, 0, 0], "X", "-");
        let b_target = face([(i + 1) % 4, 0, 0], "X", "+");
        gated.push(GatedFaceDesc {
            face: b_face,
            green: vec![rect("0", h_prev, "1", "1")],
            red: vec![red(rect("0", "0", "1", h_prev), b_target)],
        });
    }
    ManifoldDescription {
        name: "gates4".into(),
        dim: 3,
        cells: (0..4).map(|i| vec![i, 0, 0]).collect(),
        wraparound: true,
        pairings: vec![],
        gated_faces: gated,
    }
}

/// Six cubes: a U-pentomino in the z = 0 plane plus one cube on top of the
/// middle of the U. The missing cell `(1,1,0)` is a re-entrant notch;
/// wraparound pairings skip across it, so lattice lines with gaps still close
/// up torus-style run by run.
pub fn six_cube_3d() -> ManifoldDescription {
    ManifoldDescription {
        name: "six_cube".into(),
        dim: 3,
        cells: vec![
            vec![0, 0, 0],
            vec![1, 0, 0],
            vec![2, 0, 0],
            vec![0, 1, 0],
            vec![2, 1, 0],
            vec![1, 0, 1],
        ],
        wraparound: true,
        pairings: vec![],
        gated_faces: vec![],
    }
}

/// All shipped fixtures by name.
pub fn all() -> Vec<ManifoldDescription> {
    vec![
        torus_3d(),
        torus_2d(),
        two_cube_3d(),
        stack2_3d(),
        figure2_3d(),
        figure2_surface_2d(),
        gates4_3d(),
        six_cube_3d(),
    ]
}

/// Build a fixture by its `name` field.
pub fn by_name(name: &str) -> Option<ManifoldDescription> {
    all().into_iter().find(|d| d.name == name)
}

/// Convenience: build the validated manifold, panicking on failure (fixtures
/// are validated in tests).
pub fn build(desc: &ManifoldDescription) -> Manifold {
    desc.build()
        .unwrap_or_else(|e| panic!("fixture {} failed to build: {e}", desc.name))
}
