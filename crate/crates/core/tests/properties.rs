use std::f64::consts::FRAC_PI_2;
use std::sync::OnceLock;

use abc_orbits::diagnostics::flame_speed_lower_bound;
use abc_orbits::flow::*;
use abc_orbits::integrator::{integrate_until_exit, ExitFace, ExitOptions, IntegratorConfig};
use abc_orbits::shooting::*;
use proptest::prelude::*;

fn six() -> &'static Vec<PeriodicOrbit> {
    static SIX: OnceLock<Vec<PeriodicOrbit>> = OnceLock::new();
    SIX.get_or_init(|| {
        let cfg = ShootingConfig::default();
        let r = find_critical_a(&cfg).unwrap();
        conjugate_orbits(&assemble_periodic_orbit(&r, &cfg).unwrap()).unwrap()
    })
}

fn point() -> impl Strategy<Value = Point3<f64>> {
    (-20.0..20.0f64, -20.0..20.0f64, -20.0..20.0f64).prop_map(|(x, y, z)| Point3::new(x, y, z))
}

proptest! {
    #[test]
    fn builtin_maps_are_equivariant(p in point()) {
        for kind in SymmetryKind::BUILTIN {
            let d = symmetry_equivariance_defect(kind, &FlowParams::default(), &p).unwrap();
            prop_assert!(d <= 1e-12, "{:?} {}", kind, d);
        }
    }

    #[test]
    fn velocity_is_lattice_periodic(p in point(), k in prop::array::uniform3(-4i32..=4)) {
        let params = FlowParams::default();
        let d = velocity(&params, &p) - velocity(&params, &p.lattice_shifted(k));
        prop_assert!(d.max_abs() <= 1e-13);
    }

    #[test]
    fn symmetry_maps_solutions_to_solutions(p in point(), kind_ix in 0usize..5) {
        // u(m(p)) = M u(p) with M = ±(linear part), read off at the velocity level
        let kind = SymmetryKind::BUILTIN[kind_ix];
        let m = kind.velocity_matrix::<f64>();
        let l = kind.linear_part::<f64>();
        for i in 0..3 {
            for j in 0..3 {
                let want = if kind.time_reversing() { -l[i][j] } else { l[i][j] };
                prop_assert_eq!(m[i][j], want);
            }
        }
        let lhs = velocity(&FlowParams::default(), &apply_symmetry(kind, &p));
        let rhs = mat_vec(&m, &velocity(&FlowParams::default(), &p));
        prop_assert!((lhs - rhs).norm() <= 1e-12);
    }

    #[test]
    fn exits_are_consistent(a in 0.0..FRAC_PI_2) {
        let region = PrismRegion::default();
        let opts = ExitOptions::default();
        let (traj, rep) = integrate_until_exit(
            &FlowParams::default(),
            Point3::new(-FRAC_PI_2, 0.0, a),
            &region,
            &IntegratorConfig::default(),
            &opts,
        ).unwrap();
        prop_assert!(matches!(rep.face, ExitFace::Fx | ExitFace::FZTop | ExitFace::CornerXZTop));
        prop_assert!(rep.outward_speed >= 0.0);
        let face = region.face(rep.crossed_face);
        prop_assert!(face.value(&rep.p_exit).abs() <= 1e-11);
        let before = traj.eval(rep.t_exit - 10.0 * opts.time_width).unwrap();
        prop_assert!(face.value(&before) > 0.0);
        prop_assert!(traj.samples().windows(2).all(|w| w[0].0 < w[1].0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn flame_bound_has_the_signed_permutation_symmetry(
        v in prop::array::uniform3(-1.0..1.0f64),
        perm in 0usize..6,
        signs in prop::array::uniform3(any::<bool>()),
    ) {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        prop_assume!(n > 1e-3);
        let p = Point3::new(v[0] / n, v[1] / n, v[2] / n);
        let orders = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let o = orders[perm];
        let s = |b: bool| if b { -1.0 } else { 1.0 };
        let q = Point3::new(s(signs[0]) * p[o[0]], s(signs[1]) * p[o[1]], s(signs[2]) * p[o[2]]);
        let orbits = six();
        let bp = flame_speed_lower_bound(orbits, p).unwrap();
        let bq = flame_speed_lower_bound(orbits, q).unwrap();
        prop_assert_eq!(bp, bq);
        let floor = std::f64::consts::TAU / orbits[0].period / 3f64.sqrt();
        prop_assert!(bp >= floor - 1e-9 && bp > 0.0);
    }
}
