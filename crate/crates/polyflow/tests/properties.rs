//! Property tests for the geometric invariants: transport involution,
//! flow/projection commutation, reversibility, event-count bounds, and the
//! soundness of the direction classifiers.

use polyflow::directions::{kronecker_test_exact, saddle_connections};
use polyflow::fixtures;
use polyflow::geometry::{FaceClass, FaceRef, Manifold, Side};
use polyflow::num::{rat, rat_int, Rat, Scalar};
use polyflow::tracer::{
    event_bound, project_mod1, reverse, trace, Direction, ManifoldPoint,
};
use proptest::prelude::*;

fn fixture_strategy() -> impl Strategy<Value = Manifold> {
    prop_oneof![
        Just(fixtures::build(&fixtures::torus_3d())),
        Just(fixtures::build(&fixtures::two_cube_3d())),
        Just(fixtures::build(&fixtures::figure2_3d())),
        Just(fixtures::build(&fixtures::gates4_3d())),
        Just(fixtures::build(&fixtures::six_cube_3d())),
    ]
}

/// Strictly interior rational coordinate in (0, 1), denominator 97.
fn rat_coord() -> impl Strategy<Value = Rat> {
    (1i64..97).prop_map(|n| rat(n, 97))
}

fn rat_alpha() -> impl Strategy<Value = Rat> {
    ((1i64..60), (61i64..97)).prop_map(|(n, d)| rat(n, d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Round-trip identity of the transport map on sampled face points, in
    /// both numeric modes.
    #[test]
    fn transport_involution(
        m in fixture_strategy(),
        u in rat_coord(),
        v in rat_coord(),
        face_pick in 0usize..64,
    ) {
        let faces: Vec<FaceRef> = m.faces().map(|(f, _)| *f).collect();
        let face = faces[face_pick % faces.len()];

        // Exact mode.
        if let Ok(t) = m.transport(face, [u.clone(), v.clone()]) {
            let back = m
                .transport(t.enter_face, t.uv.clone())
                .expect("transported point is transportable back");
            prop_assert_eq!(back.enter_face, face);
            prop_assert_eq!(back.uv, [u.clone(), v.clone()]);
        }

        // Float mode agrees within 1e-12 (transports move coordinates
        // exactly, so this is really a classification check).
        let uf = [u.as_f64(), v.as_f64()];
        if let Ok(t) = m.transport(face, uf) {
            if let Ok(back) = m.transport(t.enter_face, t.uv) {
                prop_assert_eq!(back.enter_face, face);
                prop_assert!((back.uv[0] - uf[0]).abs() < 1e-12);
                prop_assert!((back.uv[1] - uf[1]).abs() < 1e-12);
            }
        }
    }

    /// The modulo-1 projection of a trace is the straight torus line.
    #[test]
    fn projection_commutes_with_flow_exactly(
        m in fixture_strategy(),
        x in rat_coord(), y in rat_coord(), z in rat_coord(),
        a1 in rat_alpha(), a2 in rat_alpha(),
        cell_pick in 0usize..8,
    ) {
        let cell = m.cells()[cell_pick % m.cell_count()];
        let start = ManifoldPoint::new(cell, [x.clone(), y.clone(), z.clone()]);
        let dir = Direction::dim3(a1.clone(), a2.clone());
        let t_max = rat_int(3);
        let tr = trace(&m, &start, &dir, &t_max).unwrap();
        for k in [1i64, 2, 5, 7] {
            let t = rat(k, 3);
            if t > tr.t_end() {
                break;
            }
            let Some(p) = tr.position_at(&t) else { break };
            let proj = project_mod1(&p);
            for a in 0..3 {
                let straight = start.local[a].clone() + t.clone() * dir.components()[a].clone();
                let straight = straight.clone() - straight.floor();
                prop_assert_eq!(&proj[a], &straight);
            }
        }
    }

    /// Event counts stay within the crossing-rate bound.
    #[test]
    fn event_count_bound_holds(
        m in fixture_strategy(),
        x in rat_coord(), y in rat_coord(), z in rat_coord(),
        a1 in 0.05f64..3.0, a2 in 0.05f64..3.0,
        t_max in 0.5f64..20.0,
    ) {
        let start = ManifoldPoint::new(
            m.cells()[0],
            [x.as_f64(), y.as_f64(), z.as_f64()],
        );
        let dir = Direction::dim3(a1, a2);
        let tr = trace(&m, &start, &dir, &t_max).unwrap();
        prop_assert!(tr.events.len() <= event_bound(&dir, &t_max));
        // Segments tile [0, t_end] contiguously.
        let mut t = 0.0;
        for seg in &tr.segments {
            prop_assert!((seg.t0 - t).abs() < 1e-12);
            prop_assert!(seg.t1 >= seg.t0);
            t = seg.t1;
        }
    }

    /// Float reverse round-trips to the start within 1e-9.
    #[test]
    fn reverse_round_trip(
        m in fixture_strategy(),
        x in rat_coord(), y in rat_coord(), z in rat_coord(),
        t_max in 1.0f64..12.0,
    ) {
        let start = ManifoldPoint::new(
            m.cells()[0],
            [x.as_f64(), y.as_f64(), z.as_f64()],
        );
        let dir = Direction::dim3(2f64.sqrt(), 3f64.sqrt());
        let tr = trace(&m, &start, &dir, &t_max).unwrap();
        prop_assume!(!tr.hit_singularity());
        let back = reverse(&m, &tr).unwrap();
        prop_assume!(!back.hit_singularity());
        let home = back.end_point();
        prop_assert_eq!(home.cell, start.cell);
        for a in 0..3 {
            prop_assert!((home.local[a] - start.local[a]).abs() < 1e-9);
        }
    }

    /// Any returned Kronecker witness satisfies its relation exactly.
    #[test]
    fn kronecker_witnesses_are_sound(
        a in -20i64..20, b in 1i64..20, c in -20i64..20,
        p in 1i64..40, q in 41i64..60,
    ) {
        prop_assume!(a != 0 || c != 0);
        let alpha1 = rat(p, q);
        // alpha2 chosen so that (a, b, c) is a relation.
        let alpha2 = -(rat_int(a) * alpha1.clone() + rat_int(c)) / rat_int(b);
        let verdict = kronecker_test_exact(&alpha1, &alpha2, 999);
        let (wa, wb, wc) = verdict.relation().expect("planted relation detected");
        let sum = rat_int(wa) * alpha1 + rat_int(wb) * alpha2 + rat_int(wc);
        prop_assert!(sum == Rat::from_integer(0.into()));
    }

    /// Saddle-connection sets grow monotonically with the length bound.
    #[test]
    fn saddle_sets_are_monotone(l1 in 1.0f64..2.2, l2 in 2.2f64..3.2) {
        for desc in [fixtures::torus_2d(), fixtures::figure2_surface_2d()] {
            let m = fixtures::build(&desc);
            let small = saddle_connections(&m, l1).unwrap();
            let large = saddle_connections(&m, l2).unwrap();
            for c in &small {
                prop_assert!(large.contains(c));
            }
        }
    }
}

#[test]
fn face_census_partitions_all_faces() {
    for desc in fixtures::all() {
        let m = fixtures::build(&desc);
        let census = m.census();
        assert_eq!(census.classes.len(), 2 * m.dim * m.cell_count());
        for (f, class) in &census.classes {
            let data = m.face(*f);
            match class {
                FaceClass::Gated => assert!(data.gate.is_some()),
                _ => assert!(data.gate.is_none()),
            }
        }
    }
}

#[test]
fn wraparound_pairings_join_opposite_sides() {
    for desc in fixtures::all() {
        let m = fixtures::build(&desc);
        for (f, data) in m.faces() {
            if let polyflow::geometry::FaceLink::Paired(p) = &data.link {
                assert_eq!(f.axis, p.axis);
                assert_eq!(f.side, p.side.opposite());
                // Pairing is an involution at the face level.
                let back = m.face(*p);
                match &back.link {
                    polyflow::geometry::FaceLink::Paired(q) => assert_eq!(q, f),
                    other => panic!("partner of {p} is {other:?}"),
                }
            }
        }
    }
}

#[test]
fn boundary_faces_all_accounted_for() {
    // Every face is shared, paired, or sealed; none dangles.
    for desc in fixtures::all() {
        let m = fixtures::build(&desc);
        for (f, data) in m.faces() {
            match &data.link {
                polyflow::geometry::FaceLink::Shared(n) => {
                    assert!(m.contains_cell(*n), "{f} shared with missing cell");
                }
                polyflow::geometry::FaceLink::Paired(p) => {
                    assert_eq!(*f, m.face(*p).link_partner().unwrap());
                }
                polyflow::geometry::FaceLink::Sealed => {
                    assert!(data.gate.is_some());
                }
            }
        }
    }
}

trait LinkPartner {
    fn link_partner(&self) -> Option<FaceRef>;
}

impl LinkPartner for polyflow::geometry::FaceData {
    fn link_partner(&self) -> Option<FaceRef> {
        match &self.link {
            polyflow::geometry::FaceLink::Paired(p) => Some(*p),
            _ => None,
        }
    }
}

#[test]
fn validation_errors_fire() {
    use polyflow::geometry::{GeometryError, ManifoldDescription};

    // Disconnected region: two cells sharing no face.
    let desc = ManifoldDescription {
        name: "disconnected".into(),
        dim: 3,
        cells: vec![vec![0, 0, 0], vec![2, 0, 0]],
        wraparound: true,
        pairings: vec![],
        gated_faces: vec![],
    };
    assert!(matches!(
        desc.build(),
        Err(GeometryError::DisconnectedRegion(_))
    ));

    // Duplicate cell.
    let desc = ManifoldDescription {
        name: "dup".into(),
        dim: 3,
        cells: vec![vec![0, 0, 0], vec![0, 0, 0]],
        wraparound: true,
        pairings: vec![],
        gated_faces: vec![],
    };
    assert!(matches!(desc.build(), Err(GeometryError::OverlappingCells(_))));

    // Unpaired boundary face (wraparound disabled).
    let desc = ManifoldDescription {
        name: "unpaired".into(),
        dim: 3,
        cells: vec![vec![0, 0, 0]],
        wraparound: false,
        pairings: vec![],
        gated_faces: vec![],
    };
    assert!(matches!(
        desc.build(),
        Err(GeometryError::UnpairedBoundaryFace(_))
    ));
}

#[test]
fn json_round_trip_preserves_fixtures() {
    use polyflow::geometry::ManifoldDescription;
    for desc in fixtures::all() {
        let text = desc.to_json();
        let parsed = ManifoldDescription::from_json(&text).unwrap();
        let a = fixtures::build(&desc);
        let b = parsed.build().unwrap();
        assert_eq!(a.cells(), b.cells());
        assert_eq!(a.splitting_edges(), b.splitting_edges());
        assert_eq!(a.census().classes, b.census().classes);
    }
}
