mod common;

use gips_core::encode::{apply_selection, generate};
use gips_core::gipsl::compile;
use gips_core::model::{load_graph, serialize_graph, Value};
use gips_core::pattern::find_matches;
use gips_core::solve::{export_lp, import_lp, solve, Limits, Status};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;

#[test]
fn two_server_match_generate_solve_apply() {
    let mm = mdvne();
    let g = load_graph(TWO_SERVER_MODEL, mm.clone()).unwrap();
    let spec = compile(TWO_SERVER_SPEC, &mm).unwrap();
    let enc = generate(&spec, &g).unwrap();
    let sol = solve(&enc.problem, Limits::default()).unwrap();
    assert_eq!(sol.status, Status::Optimal);
    let next = apply_selection(&spec, &g, &enc.table, &sol.assignment).unwrap();
    let hosts: Vec<_> = next.out_edges("v11").filter(|(_, e)| e.ty == "host").map(|(_, e)| e.tgt.clone()).collect();
    assert_eq!(hosts, vec!["s12".to_string()]);
    assert_eq!(next.attr("v11", "mapped"), Some(&Value::Bool(true)));
    assert_eq!(next.attr("s12", "resBw"), Some(&Value::Int(700)));

    // nothing left to map afterwards
    let again = generate(&spec, &next).unwrap();
    assert!(again.problem.variables.is_empty());
    assert!(find_matches(&next, &spec.rules[0].lhs).is_empty());
}

#[test]
fn model_document_round_trips() {
    let mm = mdvne();
    let g = load_graph(TWO_SERVER_MODEL, mm.clone()).unwrap();
    let text = serialize_graph(&g);
    assert_eq!(load_graph(&text, mm).unwrap(), g);
}

#[test]
fn exported_lp_solves_the_same() {
    let mm = mdvne();
    let g = load_graph(TWO_SERVER_MODEL, mm.clone()).unwrap();
    let enc = generate(&compile(TWO_SERVER_SPEC, &mm).unwrap(), &g).unwrap();
    let back = import_lp(&export_lp(&enc.problem, &enc.table).unwrap()).unwrap();
    let a = solve(&enc.problem, Limits::default()).unwrap();
    let b = solve(&back, Limits::default()).unwrap();
    assert_eq!(a.assignment, b.assignment);
    assert_eq!(a.objective_value, b.objective_value);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn solver_points_are_feasible_and_match_enumeration(seed in any::<u64>(), n in 1usize..=10, m in 0usize..=12) {
        let p = random_problem(&mut ChaCha8Rng::seed_from_u64(seed), n, m);
        let sol = solve(&p, Limits::default()).unwrap();
        match optimal_set(&p) {
            None => prop_assert_eq!(sol.status, Status::Infeasible),
            Some((v, set)) => {
                prop_assert_eq!(sol.status, Status::Optimal);
                prop_assert!((sol.objective_value.unwrap() - v).abs() <= 1e-9);
                prop_assert!(set.contains(&sol.assignment));
            }
        }
    }

    #[test]
    fn lp_text_round_trips(seed in any::<u64>(), n in 1usize..=15, m in 0usize..=20) {
        let p = random_problem(&mut ChaCha8Rng::seed_from_u64(seed), n, m);
        let text = export_lp(&p, &Default::default()).unwrap();
        prop_assert_eq!(import_lp(&text).unwrap(), p);
    }
}

#[test]
fn grammar_reference_example_compiles() {
    let doc = include_str!("../../../docs/grammar.md");
    let example = doc.split("## Example").nth(1).unwrap().split("```").nth(1).unwrap();
    let spec = compile(example, &mdvne()).unwrap();
    assert_eq!(spec.constraints.len(), 2);
    let weighted = example.replace(
        "global objective : min { srvObj }",
        "objective linkObj -> class::SubstrateLink { self.resBw }\nglobal objective : min { 2 * srvObj - linkObj / 4 + 3 }",
    );
    let spec = compile(&weighted, &mdvne()).unwrap();
    assert_eq!(spec.global.constant, 3.0);
}
