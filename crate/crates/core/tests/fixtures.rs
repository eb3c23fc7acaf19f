//! The shipped fixture environments must stay loadable and well-formed.

use syncrun::env::load_partition;

fn fixture(name: &str) -> String {
    let path = format!("{}/../../fixtures/{}", env!("CARGO_MANIFEST_DIR"), name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("reading {path}: {e}"))
}

#[test]
fn case_study_environment_loads() {
    let env = load_partition(&fixture("case_study_env.json")).unwrap();
    let p = &env.partition;
    assert_eq!(p.cell_count(), 40);
    assert_eq!(p.props().len(), 6);
    assert_eq!(env.starts.len(), 3);

    // robot 1 is placed by position and must land in c7
    let c7 = p.cell_id("c7").unwrap();
    assert_eq!(env.starts[0].cell, c7);
    let c4 = p.cell_id("c4").unwrap();
    let c28 = p.cell_id("c28").unwrap();
    assert_eq!(env.starts[1].cell, c4);
    assert_eq!(env.starts[2].cell, c28);

    // each region is a singleton on the intended cell
    for (prop, cell) in [
        ("pi1", "c31"),
        ("pi2", "c6"),
        ("pi3", "c5"),
        ("pi4", "c12"),
        ("pi5", "c20"),
        ("pi6", "c38"),
    ] {
        let pid = p.props().id(prop).unwrap();
        let cid = p.cell_id(cell).unwrap();
        assert_eq!(p.region_of(cid), Some(pid), "{cell} in {prop}");
    }
}

#[test]
fn case_study_run_cells_are_adjacent_or_equal() {
    let env = load_partition(&fixture("case_study_env.json")).unwrap();
    let p = &env.partition;
    let run: serde_json::Value = serde_json::from_str(&fixture("case_study_run.json")).unwrap();
    let tuples: Vec<Vec<String>> = run["prefix"]
        .as_array()
        .unwrap()
        .iter()
        .chain(run["suffix"].as_array().unwrap())
        .map(|t| {
            t.as_array()
                .unwrap()
                .iter()
                .map(|c| c.as_str().unwrap().to_string())
                .collect()
        })
        .collect();
    assert_eq!(tuples.len(), 15);

    let step_ok = |a: &str, b: &str| {
        let (ia, ib) = (p.cell_id(a).unwrap(), p.cell_id(b).unwrap());
        ia == ib || p.are_adjacent(ia, ib)
    };
    for w in tuples.windows(2) {
        for r in 0..3 {
            assert!(step_ok(&w[0][r], &w[1][r]), "{} -> {}", w[0][r], w[1][r]);
        }
    }
    // suffix wraps back onto its first tuple
    let last = tuples.last().unwrap();
    let first_suffix = &tuples[7];
    for r in 0..3 {
        assert!(step_ok(&last[r], &first_suffix[r]));
    }
}

#[test]
fn corridor_environment_loads() {
    let env = load_partition(&fixture("corridor_env.json")).unwrap();
    let p = &env.partition;
    assert_eq!(p.cell_count(), 13);
    assert_eq!(env.starts.len(), 2);

    // ladder adjacency: a3 touches a2, a4, b3
    let a3 = p.cell_id("a3").unwrap();
    let mut got: Vec<_> = p.neighbors(a3).iter().map(|c| p.cell_name(*c)).collect();
    got.sort();
    assert_eq!(got, vec!["a2", "a4", "b3"]);

    // the pocket cell touches only a6
    let p3 = p.cell_id("p3").unwrap();
    let names: Vec<_> = p.neighbors(p3).iter().map(|c| p.cell_name(*c)).collect();
    assert_eq!(names, vec!["a6"]);
}
