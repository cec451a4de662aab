use pogorelov_core::curvature::gauss_curvature;
use pogorelov_core::embedding::{build_mesh, integrate_profile, mean_curvature_scan};
use pogorelov_core::lemma_lab::affine::{affine_segment_detect, DiscMap};
use pogorelov_core::make_pogorelov_profile;

#[test]
fn extrinsic_product_matches_intrinsic_curvature() {
    for a in [1.0, 0.25] {
        let p = make_pogorelov_profile(a).unwrap();
        let curve = integrate_profile(&p, 0.74 * a, 1e-13).unwrap();
        let mesh = build_mesh(&curve, 16).unwrap();
        let report = mean_curvature_scan(&mesh);
        let scale = (0..200)
            .map(|i| gauss_curvature(&p, 0.74 * a * i as f64 / 200.0).unwrap().abs())
            .fold(0.0, f64::max);
        for row in report.rows.iter().filter(|r| !r.one_sided && r.rho > 0.0) {
            let k = gauss_curvature(&p, row.rho).unwrap();
            let product = row.k_meridian * row.k_circle;
            assert!(
                (product - k).abs() <= 1e-9 * scale,
                "a={a} rho={} {product} {k}",
                row.rho
            );
        }
    }
}

#[test]
fn obj_round_trips_vertex_coordinates() {
    let p = make_pogorelov_profile(1.0).unwrap();
    let curve = integrate_profile(&p, 0.74, 1e-12).unwrap();
    let mesh = build_mesh(&curve, 8).unwrap();
    let parsed: Vec<[f64; 3]> = mesh
        .to_obj()
        .lines()
        .filter_map(|l| l.strip_prefix("v "))
        .map(|l| {
            let v: Vec<f64> = l.split(' ').map(|t| t.parse().unwrap()).collect();
            [v[0], v[1], v[2]]
        })
        .collect();
    assert_eq!(parsed, mesh.vertices);
}

#[test]
fn flat_region_chords_are_affine_and_window_chords_are_not() {
    let p = make_pogorelov_profile(1.0).unwrap();
    let curve = integrate_profile(&p, 0.74, 1e-12).unwrap();
    let surface = |[u, v]: [f64; 2]| {
        let rho = u.hypot(v);
        if rho == 0.0 {
            return [0.0; 3];
        }
        let r = p.eval(rho, 0).unwrap();
        let z = if rho <= 0.5 { 0.0 } else { curve_z(&curve, rho) };
        [r * u / rho, r * v / rho, z]
    };
    let flat = affine_segment_detect(&DiscMap::new(0.45, surface), 24, 12, 1e-9);
    assert_eq!(flat.len(), 24 * 23 / 2);
    // a disc reaching into the curved window loses the chords that cross it
    let curved = affine_segment_detect(&DiscMap::new(0.7, surface), 24, 12, 1e-9);
    assert!(curved.len() < 24 * 23 / 2);
}

fn curve_z(curve: &pogorelov_core::embedding::ProfileCurve, rho: f64) -> f64 {
    // linear interpolation between samples is enough to break affinity
    let s = &curve.samples;
    let i = s.partition_point(|x| x.rho < rho).clamp(1, s.len() - 1);
    let (a, b) = (&s[i - 1], &s[i]);
    a.z + (b.z - a.z) * (rho - a.rho) / (b.rho - a.rho)
}
