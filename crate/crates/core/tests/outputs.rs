use lattice_flow::experiments::{convergence_csv, disjoint_csv, run_convergence, run_disjoint, run_tail, tail_csv, RunConfig};
use lattice_flow::fpp::MuTable;
use lattice_flow::schema::{check_csv, CsvKind};
use lattice_flow::{ConvexPolygon, Rational};

fn small(dist: &str) -> RunConfig {
    let mut cfg = RunConfig::new(
        dist.parse().unwrap(),
        ConvexPolygon::square(Rational::from_integer(1)).unwrap(),
        vec![2, 4],
        3,
        8,
    );
    cfg.mu_n = 8;
    cfg.mu_reps = 3;
    cfg
}

#[test]
fn writers_round_trip_through_the_checker() {
    let run = run_convergence(&small("exp:1")).unwrap();
    assert_eq!(check_csv(&convergence_csv(&run.records, false)), Ok((CsvKind::Convergence, 6)));
    assert_eq!(check_csv(&convergence_csv(&run.records, true)), Ok((CsvKind::Convergence, 6)));
    assert_eq!(check_csv(&run.table.to_csv()), Ok((CsvKind::Mu, run.table.len())));
    let tail = run_tail(&small("exp:1")).unwrap();
    assert_eq!(check_csv(&tail_csv(&tail.rows)), Ok((CsvKind::Tail, 2)));
    let d = run_disjoint(&small("exp:1")).unwrap();
    assert_eq!(check_csv(&disjoint_csv(&d.records, false)), Ok((CsvKind::Disjoint, 6)));
    assert_eq!(check_csv(&MuTable::new().to_csv()), Ok((CsvKind::Mu, 0)));
}

#[test]
fn records_are_in_canonical_order() {
    let run = run_convergence(&small("unif:0:2")).unwrap();
    let keys: Vec<(u32, u32)> = run.records.iter().map(|r| (r.n, r.replicate)).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
}

#[test]
fn timing_column_is_blank_by_default() {
    let run = run_convergence(&small("exp:1")).unwrap();
    let csv = convergence_csv(&run.records, false);
    assert!(csv.lines().skip(1).all(|l| l.ends_with(',')));
}
