use std::sync::Arc;

use hardy_sobolev::corpus::{unit_grid, CorpusFn};
use hardy_sobolev::extension::{build_extension_plan_with, extend, ExtensionPlan, PlanOptions};
use hardy_sobolev::field::{read_binary, read_csv, write_binary, write_csv, MetricCloud};
use hardy_sobolev::geometry::DomainShape;
use hardy_sobolev::hajlasz::{build_constraints, canonical_gradient, CanonicalMode, ConstraintMode};
use hardy_sobolev::lp::{solve_min_gradient_p1, MinimalGradientLP};

#[test]
fn sampled_field_to_certified_lp_and_back_through_files() {
    let f = CorpusFn::Kink.sample(&unit_grid(1, 24).unwrap()).unwrap();

    let mut buf = Vec::new();
    write_binary(&f, &mut buf).unwrap();
    let g = read_binary(buf.as_slice()).unwrap();
    assert_eq!(g.values(), f.values());
    let mut text = Vec::new();
    write_csv(&f, &mut text).unwrap();
    assert_eq!(read_csv(text.as_slice()).unwrap().values(), f.values());

    let cs = build_constraints(&g, &ConstraintMode::Global).unwrap();
    let lp = cs.to_lp(g.cloud().measures()).unwrap();
    let direct = solve_min_gradient_p1(&lp, 1e-10).unwrap();
    let reread = MinimalGradientLP::from_triples(&lp.to_triples()).unwrap();
    let again = solve_min_gradient_p1(&reread, 1e-10).unwrap();
    assert!(direct.optimal && direct.relative_gap <= 1e-10);
    assert!((again.value() - direct.value()).abs() <= 1e-12 * direct.value());

    // the canonical gradient (grid only; files come back irregular) is
    // feasible, so it can only cost more
    let canon = canonical_gradient(&f, CanonicalMode::Global).unwrap();
    assert!(canon.feasible);
    let cost: f64 = canon.g.values().iter().zip(f.cloud().measures()).map(|(v, m)| v * m).sum();
    assert!(cost >= direct.value());
}

#[test]
fn stored_plan_extends_identically() {
    let dom = DomainShape::from_json(&DomainShape::regular_polygon([0.5, 0.5], 0.5, 6, 2.0).unwrap().to_json())
        .unwrap();
    let h = 1.0 / 16.0;
    let plan = build_extension_plan_with(&dom, &PlanOptions { floor: h / 2.0, radius_factor: 3.0, ..PlanOptions::new(0.125) })
        .unwrap();
    let stored = ExtensionPlan::from_json(&plan.to_json()).unwrap();

    // samples on the closed hexagon only (vertices are rounded), extension
    // on a surrounding grid
    let grid = MetricCloud::grid_over(&[0.0, 0.0], &[1.0, 1.0], h).unwrap();
    let inside: Vec<usize> = (0..grid.len()).filter(|&i| dom.distance_to_domain(grid.point(i)).unwrap() <= 1e-12).collect();
    let source = Arc::new(grid.restrict(&inside));
    let f = CorpusFn::RandomSmoothA.sample(&source).unwrap();
    let around = MetricCloud::grid_over(&[-0.125, -0.125], &[1.125, 1.125], h).unwrap();
    let keep: Vec<usize> = (0..around.len()).filter(|&i| plan.resolves(around.point(i)).unwrap()).collect();
    assert!(keep.len() < around.len());
    let target = Arc::new(around.restrict(&keep));
    let a = extend(&f, &plan, &target).unwrap();
    let b = extend(&f, &stored, &target).unwrap();
    assert_eq!(a.values(), b.values());
    assert!(a.values().iter().all(|v| v.is_finite()));
}
