use lattice_flow::cutflow::{brute_force_min_cycle, cut_separates, cutset_to_cycle, verify_flow};
use lattice_flow::experiments::derive_seed;
use lattice_flow::lattice::{sites_in_scaled_polygon, Site};
use lattice_flow::{mincut_infinity, truncated_maxflow, CapacityField, ConvexPolygon, DistributionSpec, Rational, SiteSet};

fn law(k: u64) -> DistributionSpec {
    ["bern:0.6", "exp:1", "unif:0:2", "bern:0.8"][(k % 4) as usize].parse().unwrap()
}

#[test]
fn maxflow_matches_cycle_oracle_on_small_sources() {
    let sources = [
        SiteSet::singleton(Site::ORIGIN),
        SiteSet::new([Site::new(0, 0), Site::new(1, 0)]).unwrap(),
        SiteSet::block(1),
    ];
    for k in 0..60u64 {
        let field = CapacityField::new(law(k), derive_seed(99, &[k]));
        let a = &sources[(k % 3) as usize];
        let r = 3 + (k % 2) as i64;
        let flow = truncated_maxflow(&field, a, r).unwrap();
        assert_eq!(flow.value, brute_force_min_cycle(&field, a, r).unwrap(), "instance {k}");
        assert!(verify_flow(&field, &flow.flow, a).is_ok());
        assert!(cut_separates(&flow.mincut, r));
        assert_eq!(flow.mincut.capacity(&field), flow.value);
    }
}

#[test]
fn infinite_cut_dominates_every_box_and_maps_to_a_cycle() {
    let a = sites_in_scaled_polygon(&ConvexPolygon::square(Rational::from_integer(1)).unwrap(), 3).unwrap();
    for k in 0..10u64 {
        let field = CapacityField::new(law(k), derive_seed(5, &[k]));
        let inf = mincut_infinity(&field, &a).unwrap();
        assert!(inf.stabilized);
        for n in [8, 10, 14] {
            assert!(truncated_maxflow(&field, &a, n).unwrap().value >= inf.value);
        }
        if inf.value > 0 {
            let cycle = cutset_to_cycle(&inf.mincut).unwrap();
            assert_eq!(cycle.weight(&field), inf.value);
            assert!(a.iter().all(|s| cycle.encloses(*s)));
        }
    }
}
