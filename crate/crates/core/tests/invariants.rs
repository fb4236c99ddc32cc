use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use podrom::experiments::report::emit_full_csv;
use podrom::experiments::{Cell, TableReport};
use podrom::fem1d::{build_mesh, FeSpace, SpaceTag};
use podrom::pod::{compute_pod, total_error_identity_sweep};
use podrom::projections::{sobolev_check, Projector, ProjectorKind};
use podrom::rom::{assemble_rom, cn_solve};
use podrom::snapshots::{check_integer_rate, ManufacturedSolution, SnapshotSet};

fn space() -> impl Strategy<Value = SpaceTag> {
    prop_oneof![Just(SpaceTag::L2), Just(SpaceTag::H10)]
}

fn kind() -> impl Strategy<Value = ProjectorKind> {
    prop_oneof![
        Just(ProjectorKind::PodOrthogonal),
        Just(ProjectorKind::Ritz),
        Just(ProjectorKind::L2)
    ]
}

/// `(n_elems, columns)` with entries in [-1, 1].
fn snapshot_data() -> impl Strategy<Value = (usize, DMatrix<f64>)> {
    (4usize..24, 2usize..8).prop_flat_map(|(ne, m)| {
        proptest::collection::vec(-1.0f64..1.0, (ne - 1) * m).prop_map(move |v| (ne, DMatrix::from_vec(ne - 1, m, v)))
    })
}

fn rel(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn gram_forms_match_dense(ne in 2usize..40, seed in proptest::collection::vec(-1.0f64..1.0, 80)) {
        let fe = FeSpace::new(build_mesh(ne).unwrap());
        let n = ne - 1;
        let a = DMatrix::from_fn(n, 2, |i, j| seed[(i + 40 * j) % 80]);
        let b = DMatrix::from_fn(n, 3, |i, j| seed[(3 * i + 7 * j + 1) % 80]);
        for s in [SpaceTag::L2, SpaceTag::H10] {
            let g = fe.gram(s);
            let dense = a.transpose() * g.to_dense() * &b;
            let factored = g.inner_cols(&a, &b);
            prop_assert!((&dense - &factored).amax() <= 1e-10 * dense.amax().max(1.0));
            let uv = g.bilinear(a.column(0).as_slice(), b.column(0).as_slice());
            prop_assert!((uv - dense[(0, 0)]).abs() <= 1e-10 * dense.amax().max(1.0));
            let uu = g.bilinear(a.column(0).as_slice(), a.column(0).as_slice());
            prop_assert!(uu >= 0.0);
        }
    }

    #[test]
    fn pod_basis_invariants((ne, u) in snapshot_data(), dq in any::<bool>(), s in space()) {
        let mesh = build_mesh(ne).unwrap();
        let fe = FeSpace::new(mesh);
        let snaps = SnapshotSet::from_matrix(mesh, u, 0.1, dq).unwrap();
        let basis = compute_pod(&snaps, s).unwrap();
        let r = basis.rank();
        let gram = fe.gram(s).inner_cols(basis.modes(), basis.modes());
        prop_assert!((gram - DMatrix::identity(r, r)).amax() < 1e-9);

        let lam = basis.eigenvalues();
        prop_assert!(lam.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(lam.iter().all(|&l| l > 0.0));
        let cols = snaps.collection();
        let energy: f64 = snaps.weight() * cols.column_iter().map(|c| fe.norm_sq(c.as_slice(), s)).sum::<f64>();
        prop_assert!(rel(lam.iter().sum(), energy, 1e-300) < 1e-9);

        for j in 0..r {
            let m = basis.modes().column(j);
            let big = m.iter().cloned().fold(0.0f64, |a, x| if x.abs() > a.abs() { x } else { a });
            prop_assert!(big > 0.0);
        }
    }

    #[test]
    fn total_error_identity_holds((ne, u) in snapshot_data(), dq in any::<bool>(), s in space(), w in space(), k in kind()) {
        let mesh = build_mesh(ne).unwrap();
        let snaps = SnapshotSet::from_matrix(mesh, u, 0.05, dq).unwrap();
        let basis = compute_pod(&snaps, s).unwrap();
        let fe = FeSpace::new(mesh);
        let energy: f64 = snaps.collection().column_iter().map(|c| fe.norm_sq(c.as_slice(), w)).sum();
        for (lhs, rhs) in total_error_identity_sweep(&snaps, &basis, w, k).unwrap() {
            prop_assert!(rel(lhs, rhs, 1e-12 * energy) < 1e-8, "lhs {} rhs {}", lhs, rhs);
        }
    }

    #[test]
    fn projections_are_idempotent_and_orthogonal((ne, u) in snapshot_data(), s in space(), k in kind()) {
        let mesh = build_mesh(ne).unwrap();
        let snaps = SnapshotSet::from_matrix(mesh, u, 0.05, false).unwrap();
        let basis = compute_pod(&snaps, s).unwrap();
        let fe = FeSpace::new(mesh);
        let cols = snaps.collection();
        let scale = cols.amax().max(1e-300);
        for r in 1..=basis.rank() {
            let p = Projector::new(&basis, r, k).unwrap();
            let pu = p.apply_cols(&cols);
            prop_assert!((p.apply_cols(&pu) - &pu).amax() <= 1e-9 * scale);
            let orth_space = match k {
                ProjectorKind::PodOrthogonal => s,
                ProjectorKind::Ritz => SpaceTag::H10,
                ProjectorKind::L2 => SpaceTag::L2,
            };
            let modes = basis.leading_modes(r).into_owned();
            let g = fe.gram(orth_space);
            let resid_inner = g.inner_cols(&modes, &(&cols - &pu));
            let norm = g.inner_cols(&cols, &cols).diagonal().amax().sqrt()
                * g.inner_cols(&modes, &modes).diagonal().amax().sqrt();
            prop_assert!(resid_inner.amax() <= 1e-9 * norm.max(1e-300));
        }
    }

    #[test]
    fn discrete_sobolev_inequality(ne in 2usize..24, n in 1usize..16, dt in 0.01f64..0.5, s in space(),
                                   vals in proptest::collection::vec(-10.0f64..10.0, 23 * 17)) {
        let fe = FeSpace::new(build_mesh(ne).unwrap());
        let z = DMatrix::from_fn(ne - 1, n + 1, |i, j| vals[i + 23 * j]);
        prop_assert!(sobolev_check(&fe, &z, dt, s).unwrap().holds);
    }

    #[test]
    fn crank_nicolson_is_stable_unforced((ne, u) in snapshot_data(), dt in 1e-3f64..10.0, s in space(),
                                         a in proptest::collection::vec(-1.0f64..1.0, 8)) {
        let mesh = build_mesh(ne).unwrap();
        let snaps = SnapshotSet::from_matrix(mesh, u, 0.05, false).unwrap();
        let basis = compute_pod(&snaps, s).unwrap();
        let r = basis.rank();
        let sol = ManufacturedSolution::custom("zero", 1.0, |_, _| 0.0, |_, _| 0.0);
        let model = assemble_rom(&basis, r, 1.0, &sol, &mesh).unwrap();
        let a0 = DVector::from_fn(r, |i, _| a[i % a.len()]);
        let traj = cn_solve(&model, &a0, dt, 10).unwrap();
        let m = model.reduced_mass();
        let energy: Vec<f64> = traj.coeffs().row_iter().map(|c| { let c = c.transpose(); c.dot(&(m * &c)) }).collect();
        prop_assert!(energy.windows(2).all(|e| e[1] <= e[0] * (1.0 + 1e-12) + 1e-300));
    }

    #[test]
    fn grid_rule_matches_integrality(k in 1u32..300, p in 1u32..8, q in 1u32..64) {
        let dt = p as f64 / q as f64;
        let ok = (k * p) % q == 0;
        prop_assert_eq!(check_integer_rate(k, dt).is_ok(), ok);
    }

    #[test]
    fn full_precision_sidecar_round_trips(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        let mut t = TableReport::new("t", &["x"], "");
        t.push(vec![Cell::from(x)]).unwrap();
        let mut out = Vec::new();
        emit_full_csv(&t, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let back: f64 = text.lines().nth(1).unwrap().parse().unwrap();
        prop_assert_eq!(back.to_bits(), x.to_bits());
    }
}
