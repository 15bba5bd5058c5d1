use measure_expansive::battery::{case_ids, consistency_matrix, explain, run_battery, Outcome};
use measure_expansive::expansiveness::Verdict;

#[test]
fn cheap_cases_pass_and_are_deterministic() {
    let ids: Vec<String> = ["thA", "atomic", "volume-expanding"].iter().map(|s| s.to_string()).collect();
    let a = run_battery(Some(&ids), 3).unwrap();
    assert_eq!(a.cases.len(), 3);
    for c in &a.cases {
        assert_eq!(c.outcome, Outcome::Pass, "{}: {:?}", c.id, c.checks);
    }
    assert!(a.passed);
    let b = run_battery(Some(&ids), 3).unwrap();
    assert_eq!(a.to_json(), b.to_json());
    // report order follows the catalogue, not the filter
    let order: Vec<&str> = a.cases.iter().map(|c| c.id.as_str()).collect();
    let catalogue: Vec<&str> = case_ids().into_iter().filter(|id| ids.iter().any(|x| x == id)).collect();
    assert_eq!(order, catalogue);
    let md = a.to_markdown();
    for id in &ids {
        assert!(md.contains(&format!("## {id}: pass")));
    }
}

#[test]
fn every_case_has_an_explanation() {
    assert_eq!(case_ids().len(), 15);
    assert!(explain("thD").unwrap().contains("compact interval"));
    assert!(explain("circle1").unwrap().contains("Denjoy"));
    assert!(explain("nosuch").is_err());
}

#[test]
fn consistency_matrix_agrees() {
    let m = consistency_matrix(1).unwrap();
    let row = |name: &str| m.rows.iter().find(|r| r.system == name).unwrap();
    let d = row("doubling");
    assert!(d.agree, "{:?}", d.flags);
    assert_eq!(d.decay, Verdict::EvidenceExpansive);
    let i = row("identity");
    assert!(i.agree, "{:?}", i.flags);
    assert_eq!(i.decay, Verdict::EvidenceNotExpansive);
    let r = row("rotation");
    assert_eq!(r.decay, r.diagonal);
    assert_eq!(r.generator, Verdict::EvidenceNotExpansive);
}
