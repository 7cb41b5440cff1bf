use std::collections::BTreeMap;
use std::sync::Arc;

use proptest::prelude::*;

use super::cnf::{to_cnf, Formula, Lit};
use super::*;
use crate::gipsl::{compile, TypedSpec};
use crate::model::{load_graph, load_metamodel, Graph, Metamodel, Node, Value};

const SCHEMA: &str = include_str!("../../specs/mdvne.schema.json");
const TWO_SERVER: &str = include_str!("../../fixtures/two_server.json");
const TWO_SERVER_SPEC: &str = include_str!("../../fixtures/two_server.gipsl");

const SERVERS: &str = "
rule server2server {
    node vsrv : VirtualServer;
    node ssrv : SubstrateServer;
    condition ssrv.resCpu >= vsrv.cpu;
    create edge host(vsrv -> ssrv);
    set ssrv.resCpu = ssrv.resCpu - vsrv.cpu;
}
mapping srv2srv with server2server;
constraint -> class::SubstrateServer {
    mappings.srv2srv->filter(m | m.nodes().ssrv == self)->sum(m | m.nodes().vsrv.cpu) <= self.resCpu
}
objective srvObj -> mapping::srv2srv {
    self.nodes().ssrv.resCpu / self.nodes().ssrv.cpu
}
global objective : min { srvObj }
";

fn mm() -> Arc<Metamodel> {
    Arc::new(load_metamodel(SCHEMA).unwrap())
}

fn spec(src: &str) -> TypedSpec {
    compile(src, &mm()).unwrap()
}

fn pos(var: usize) -> Lit {
    Lit { var, positive: true }
}

fn neg(var: usize) -> Lit {
    Lit { var, positive: false }
}

fn valuations(n: usize) -> impl Iterator<Item = Vec<bool>> {
    (0u32..1 << n).map(move |bits| (0..n).map(|i| bits >> i & 1 == 1).collect())
}

fn ints(n: usize) -> impl Iterator<Item = Vec<f64>> {
    valuations(n).map(|v| v.into_iter().map(|b| if b { 1.0 } else { 0.0 }).collect())
}

/// Exhaustive feasibility over every variable beyond the first `fixed`.
fn feasible_extending(p: &IlpProblem, fixed: &[f64]) -> bool {
    let free = p.variables.len() - fixed.len();
    assert!(free <= 16, "too many auxiliaries for exhaustive check");
    ints(free).any(|rest| {
        let mut x = fixed.to_vec();
        x.extend(rest);
        p.rows.iter().all(|r| r.satisfied(&x, 1e-9))
    })
}

fn binaries(n: usize) -> IlpProblem {
    let mut p = IlpProblem::default();
    for i in 0..n {
        p.add_var(format!("x{i}"), VarKind::Binary, 0.0, 1.0);
    }
    p
}

fn lin(pairs: &[(usize, f64)], c: f64) -> LinearTerm {
    let mut t = LinearTerm::constant(c);
    for &(v, a) in pairs {
        t.add_term(v, a);
    }
    t
}

#[test]
fn conjunction_of_relations_gives_unit_clauses() {
    let f = Formula::And(vec![Formula::Atom(0), Formula::Atom(1)]);
    let cnf = to_cnf(&f, 2);
    assert_eq!(cnf.clauses, vec![vec![pos(0)], vec![pos(1)]]);
}

#[test]
fn true_has_no_clauses() {
    assert!(to_cnf(&Formula::Const(true), 0).clauses.is_empty());
    assert_eq!(to_cnf(&Formula::Const(false), 0).clauses, vec![Vec::<Lit>::new()]);
}

#[test]
fn negated_disjunction_truth_table() {
    // !(p | q) & r
    let f = Formula::And(vec![Formula::negate(Formula::Or(vec![Formula::Atom(0), Formula::Atom(1)])), Formula::Atom(2)]);
    let cnf = to_cnf(&f, 3);
    assert_eq!(cnf.clauses, vec![vec![neg(0)], vec![neg(1)], vec![pos(2)]]);
    let mut agree = 0;
    for v in valuations(3) {
        assert_eq!(cnf.eval(&v), f.eval(&v), "{v:?}");
        agree += 1;
    }
    assert_eq!(agree, 8);
}

#[test]
fn oversized_disjunction_uses_definitions() {
    // (a0 & a1) | (a2 & a3) | ... over 18 atoms distributes to 2^9 clauses
    let f = Formula::Or((0..9).map(|i| Formula::And(vec![Formula::Atom(2 * i), Formula::Atom(2 * i + 1)])).collect());
    let cnf = to_cnf(&f, 18);
    assert!(cnf.num_aux > 0);
    assert!(cnf.clauses.len() < 64);
    // spot-check equisatisfiability on structured valuations
    for k in 0..9 {
        let mut v = vec![false; 18];
        assert!(!cnf.satisfiable_with(&v));
        v[2 * k] = true;
        assert!(!cnf.satisfiable_with(&v));
        v[2 * k + 1] = true;
        assert!(cnf.satisfiable_with(&v));
    }
}

#[test]
fn two_relations_become_direct_rows() {
    let mut p = binaries(2);
    // x0 <= 1 & 3 x1 >= 2
    let atoms = vec![
        Atom::new(&lin(&[(0, 1.0)], 0.0), Cmp::Le, &LinearTerm::constant(1.0)),
        Atom::new(&lin(&[(1, 3.0)], 0.0), Cmp::Ge, &LinearTerm::constant(2.0)),
    ];
    encode_formula(&Formula::And(vec![Formula::Atom(0), Formula::Atom(1)]), &atoms, &mut p).unwrap();
    assert_eq!(p.variables.len(), 2);
    assert_eq!(p.rows.len(), 2);
    assert_eq!(p.rows[0].coeffs, BTreeMap::from([(0, 1.0)]));
    assert_eq!((p.rows[0].relation, p.rows[0].rhs), (Relation::Le, 1.0));
    assert_eq!((p.rows[1].relation, p.rows[1].rhs), (Relation::Ge, 2.0));
}

#[test]
fn empty_clause_set_adds_nothing() {
    let mut p = binaries(1);
    encode_formula(&Formula::Const(true), &[], &mut p).unwrap();
    assert!(p.rows.is_empty());
}

#[test]
fn disjunction_of_forced_variables() {
    let mut p = binaries(2);
    let one = LinearTerm::constant(1.0);
    let atoms = vec![Atom::new(&LinearTerm::var(0), Cmp::Eq, &one), Atom::new(&LinearTerm::var(1), Cmp::Eq, &one)];
    encode_formula(&Formula::Or(vec![Formula::Atom(0), Formula::Atom(1)]), &atoms, &mut p).unwrap();
    let feasible: Vec<Vec<f64>> = ints(2).filter(|x| feasible_extending(&p, x)).collect();
    assert_eq!(feasible, vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]);
}

#[test]
fn not_equal_uses_indicators() {
    // x0 + x1 != 1
    let mut p = binaries(2);
    let atoms = vec![Atom::new(&lin(&[(0, 1.0), (1, 1.0)], 0.0), Cmp::Eq, &LinearTerm::constant(1.0))];
    encode_formula(&Formula::negate(Formula::Atom(0)), &atoms, &mut p).unwrap();
    for x in ints(2) {
        assert_eq!(feasible_extending(&p, &x), x[0] + x[1] != 1.0, "{x:?}");
    }
}

#[test]
fn strict_comparison_on_integers_shifts_by_one() {
    let a = Atom::new(&lin(&[(0, 2.0)], 0.0), Cmp::Lt, &LinearTerm::constant(3.0));
    assert_eq!(a.term, lin(&[(0, 2.0)], -2.0));
    assert_eq!(a.rel, Relation::Le);
    let b = Atom::new(&lin(&[(0, 0.5)], 0.0), Cmp::Gt, &LinearTerm::constant(0.0));
    assert_eq!(b.rel, Relation::Ge);
    assert_eq!(b.term.constant, -linearize::REAL_EPS);
}

#[test]
fn unboundable_big_m_is_an_error() {
    let mut p = IlpProblem::default();
    p.add_var("s", VarKind::Slack, 0.0, f64::INFINITY);
    p.add_var("x", VarKind::Binary, 0.0, 1.0);
    let one = LinearTerm::constant(1.0);
    let atoms = vec![Atom::new(&LinearTerm::var(0), Cmp::Le, &one), Atom::new(&LinearTerm::var(1), Cmp::Le, &one)];
    let f = Formula::And(vec![Formula::Atom(0), Formula::Atom(1)]);
    assert!(encode_formula(&f, &atoms, &mut p).is_ok());
    let g = Formula::Or(vec![Formula::Atom(0), Formula::Atom(1)]);
    assert!(matches!(encode_formula(&g, &atoms, &mut p), Err(EncodeError::BigM(_))));
}

#[test]
fn two_server_generates_expected_rows() {
    let g = load_graph(TWO_SERVER, mm()).unwrap();
    let e = generate(&spec(TWO_SERVER_SPEC), &g).unwrap();
    let p = &e.problem;
    assert_eq!(p.variables.len(), 2);
    assert!(p.variables.iter().all(|v| v.kind == VarKind::Binary));
    assert_eq!(p.variables[0].name, "m_l2l_0");
    assert_eq!(e.table.entry(0).unwrap().1.node("s1"), Some("s11"));
    assert_eq!(e.table.entry(1).unwrap().1.node("s1"), Some("s12"));
    let rows: Vec<(BTreeMap<usize, f64>, Relation, f64)> =
        p.rows.iter().map(|r| (r.coeffs.clone(), r.relation, r.rhs)).collect();
    assert_eq!(
        rows,
        vec![
            (BTreeMap::from([(0, 100.0)]), Relation::Le, 1000.0),
            (BTreeMap::from([(1, 100.0)]), Relation::Le, 800.0),
            (BTreeMap::from([(0, 1.0), (1, 1.0)]), Relation::Eq, 1.0),
        ]
    );
    assert_eq!(p.objective.sense, Sense::Min);
    assert_eq!(p.objective.terms, BTreeMap::from([(0, 1.0), (1, 0.8)]));
    assert!(e.warnings.is_empty());
}

#[test]
fn two_server_dump() {
    let g = load_graph(TWO_SERVER, mm()).unwrap();
    let e = generate(&spec(TWO_SERVER_SPEC), &g).unwrap();
    let expected = "\
minimize m_l2l_0 + 0.8 m_l2l_1
r0: 100 m_l2l_0 <= 1000
r1: 100 m_l2l_1 <= 800
r2: m_l2l_0 + m_l2l_1 = 1
var m_l2l_0 binary [0, 1]
var m_l2l_1 binary [0, 1]
";
    assert_eq!(e.problem.dump(), expected);
}

#[test]
fn empty_graph_gives_empty_problem() {
    let e = generate(&spec(TWO_SERVER_SPEC), &Graph::new(mm())).unwrap();
    assert!(e.problem.variables.is_empty());
    assert!(e.problem.rows.is_empty());
    assert_eq!(e.problem.objective.constant, 0.0);
    assert!(e.problem.objective.terms.is_empty());
    assert!(e.table.is_empty());
}

fn vserver(cpu: i64) -> Node {
    let mut attrs: BTreeMap<String, Value> =
        [("cpu", cpu), ("mem", 1), ("sto", 1)].iter().map(|(k, v)| (k.to_string(), Value::Int(*v))).collect();
    attrs.insert("mapped".into(), Value::Bool(false));
    Node { ty: "VirtualServer".into(), attrs }
}

fn sserver(cpu: i64, res: i64) -> Node {
    let attrs = [("cpu", cpu), ("resCpu", res), ("mem", 1), ("resMem", 1), ("sto", 1), ("resSto", 1)]
        .iter()
        .map(|(k, v)| (k.to_string(), Value::Int(*v)))
        .collect();
    Node { ty: "SubstrateServer".into(), attrs }
}

#[test]
fn mapping_table_is_a_bijection() {
    let src = format!("{SERVERS}\nrule vs {{ node v : VirtualServer; }}\nmapping other with vs;");
    let s = spec(&src);
    let mut g = Graph::new(mm());
    for i in 0..4 {
        g.add_node(format!("v{i}"), vserver(1)).unwrap();
    }
    g.add_node("s0", sserver(32, 32)).unwrap();
    // v3 is too large for s0
    g.add_node("v3x", vserver(64)).unwrap();
    let matches = find_mapping_matches(&s, &g);
    assert_eq!(matches.iter().map(Vec::len).collect::<Vec<_>>(), vec![4, 5]);
    let (p, table) = instantiate_mappings(&s, &matches);
    assert_eq!(p.variables.len(), 9);
    assert_eq!(table.len(), 9);
    for (i, name, m) in table.iter() {
        assert_eq!(table.var(name, m), Some(i));
        assert_eq!(p.variables[i].name, format!("m_{name}_{}", matches[s.mapping_index(name).unwrap()].iter().position(|x| x == m).unwrap()));
    }
}

#[test]
fn context_expansion_counts() {
    let s = spec(SERVERS);
    let mut g = Graph::new(mm());
    assert!(expand_contexts(&s, &g, &[vec![]], &s.constraints[0].context).is_empty());
    g.add_node("s0", sserver(32, 32)).unwrap();
    for i in 0..5 {
        g.add_node(format!("v{i}"), vserver(1)).unwrap();
    }
    let matches = find_mapping_matches(&s, &g);
    let b = expand_contexts(&s, &g, &matches, &s.objectives[0].context);
    assert_eq!(b.len(), 5);
    assert!(b.iter().enumerate().all(|(k, b)| matches!(b, Binding::Match { var: Some(v), .. } if *v == k)));
}

#[test]
fn capacity_row_from_two_matches() {
    let s = spec(SERVERS);
    let mut g = Graph::new(mm());
    g.add_node("s", sserver(32, 16)).unwrap();
    g.add_node("va", vserver(4)).unwrap();
    g.add_node("vb", vserver(7)).unwrap();
    let e = generate(&s, &g).unwrap();
    assert_eq!(e.problem.rows.len(), 1);
    let r = &e.problem.rows[0];
    assert_eq!(r.coeffs, BTreeMap::from([(0, 4.0), (1, 7.0)]));
    assert_eq!((r.relation, r.rhs), (Relation::Le, 16.0));
    // ratio objective: 16 / 32 on each match
    assert_eq!(e.problem.objective.terms, BTreeMap::from([(0, 0.5), (1, 0.5)]));
}

#[test]
fn filter_removing_everything_yields_zero() {
    let s = spec(SERVERS);
    let mut g = Graph::new(mm());
    g.add_node("s", sserver(32, 16)).unwrap();
    g.add_node("va", vserver(4)).unwrap();
    let matches = find_mapping_matches(&s, &g);
    let crate::gipsl::TExpr::Binary(_, lhs, _) = &s.constraints[0].body else { panic!() };
    let crate::gipsl::TExpr::Sum(set) = &**lhs else { panic!() };
    let mut scope = crate::gipsl::eval::Scope::new(&g);
    scope.self_node = Some("nothing-here");
    let t = lower_sets(set, &scope, &matches, 0).unwrap();
    assert!(t.coeffs.is_empty());
    assert_eq!(t.constant, 0.0);
}

#[test]
fn ratio_objective_coefficient() {
    let s = spec(SERVERS);
    let mut g = Graph::new(mm());
    g.add_node("s", sserver(32, 16)).unwrap();
    g.add_node("v", vserver(1)).unwrap();
    let matches = find_mapping_matches(&s, &g);
    let (_, table) = instantiate_mappings(&s, &matches);
    let o = build_objective(&s, &g, &matches, &table).unwrap();
    assert_eq!(o.sense, Sense::Min);
    assert_eq!(o.terms, BTreeMap::from([(0, 0.5)]));
}

#[test]
fn no_objective_instances_is_constant_zero() {
    let s = spec(SERVERS);
    let g = Graph::new(mm());
    let o = build_objective(&s, &g, &[vec![]], &MappingTable::default()).unwrap();
    assert!(o.terms.is_empty());
    assert_eq!(o.constant, 0.0);
}

const ENDPOINTS: &str = "
rule server2server {
    node vsrv : VirtualServer;
    node ssrv : SubstrateServer;
    create edge host(vsrv -> ssrv);
}
rule link2link {
    node vl : VirtualLink;
    node vs : VirtualServer;
    node vt : VirtualServer;
    node sl : SubstrateLink;
    node a : SubstrateServer;
    node b : SubstrateServer;
    edge vsrc(vl -> vs);
    edge vtgt(vl -> vt);
    edge ssrc(sl -> a);
    edge stgt(sl -> b);
    create edge host(vl -> sl);
}
mapping srv2srv with server2server;
mapping l2l with link2link;
constraint -> mapping::l2l {
    mappings.srv2srv->filter(m | m.nodes().vsrv == self.nodes().vs & m.nodes().ssrv == self.nodes().a)->sum(m | 1)
        + mappings.srv2srv->filter(m | m.nodes().vsrv == self.nodes().vt & m.nodes().ssrv == self.nodes().b)->sum(m | 1)
        >= 2 * self.value()
}
global objective : min { 0 }
";

#[test]
fn endpoint_rows() {
    let g = load_graph(TWO_SERVER, mm()).unwrap();
    let e = generate(&spec(ENDPOINTS), &g).unwrap();
    // servers: (vsrv1,ssrv1)=0 (vsrv1,ssrv2)=1 (vsrv2,ssrv1)=2 (vsrv2,ssrv2)=3; links 4 and 5
    assert_eq!(e.table.len(), 6);
    assert_eq!(e.problem.rows.len(), 2);
    for (k, r) in e.problem.rows.iter().enumerate() {
        assert_eq!(r.coeffs, BTreeMap::from([(0, 1.0), (3, 1.0), (4 + k, -2.0)]));
        assert_eq!((r.relation, r.rhs), (Relation::Ge, 0.0));
    }
}

#[test]
fn generation_is_deterministic() {
    let g = load_graph(TWO_SERVER, mm()).unwrap();
    let s = spec(ENDPOINTS);
    let a = generate(&s, &g).unwrap();
    let b = generate(&s, &g.clone()).unwrap();
    assert_eq!(a.problem, b.problem);
    assert_eq!(a.table, b.table);
}

#[test]
fn canonical_form_flips_rows_and_sense() {
    let mut p = binaries(2);
    p.add_row(BTreeMap::from([(0, 1.0), (1, 2.0)]), Relation::Ge, 1.0);
    p.add_row(BTreeMap::from([(0, 1.0)]), Relation::Eq, 1.0);
    p.objective = Objective { sense: Sense::Max, terms: BTreeMap::from([(1, 3.0)]), constant: 2.0 };
    let c = p.to_canonical();
    assert!(c.negated);
    assert_eq!(c.c, vec![0.0, -3.0]);
    assert_eq!(c.constant, -2.0);
    assert_eq!(c.a.len(), 3);
    assert_eq!(c.a[0], BTreeMap::from([(0, -1.0), (1, -2.0)]));
    assert_eq!(c.b, vec![-1.0, 1.0, -1.0]);
    // same feasible set
    for x in ints(2) {
        let canon = c.a.iter().zip(&c.b).all(|(row, b)| row.iter().map(|(&v, &a)| a * x[v]).sum::<f64>() <= *b);
        assert_eq!(canon, p.is_feasible(&x, 0.0));
    }
}

#[test]
fn eval_errors_name_the_constraint_and_element() {
    let src = SERVERS.replace("<= self.resCpu", "<= self.resCpu / (self.cpu - 32)");
    let mut g = Graph::new(mm());
    g.add_node("s9", sserver(32, 16)).unwrap();
    g.add_node("v", vserver(1)).unwrap();
    let err = generate(&spec(&src), &g).unwrap_err().to_string();
    assert!(err.contains("division by zero"), "{err}");
    assert!(err.contains("s9"), "{err}");
}

#[test]
fn constant_false_instance_warns() {
    let src = SERVERS.replace("<= self.resCpu", "<= self.resCpu - 100");
    let mut g = Graph::new(mm());
    g.add_node("s", sserver(32, 16)).unwrap();
    let e = generate(&spec(&src), &g).unwrap();
    assert_eq!(e.warnings.len(), 1);
    assert_eq!(e.problem.rows.len(), 1);
    assert!(e.problem.rows[0].coeffs.is_empty());
}

fn arb_formula(atoms: usize) -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![(0..atoms).prop_map(Formula::Atom), any::<bool>().prop_map(Formula::Const)];
    leaf.prop_recursive(4, 24, 4, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::negate),
            prop::collection::vec(inner.clone(), 1..4).prop_map(Formula::And),
            prop::collection::vec(inner, 1..4).prop_map(Formula::Or),
        ]
    })
}

proptest! {
    #[test]
    fn cnf_preserves_truth_tables(f in arb_formula(5)) {
        let cnf = to_cnf(&f, 5);
        for v in valuations(5) {
            prop_assert_eq!(cnf.satisfiable_with(&v), f.eval(&v));
        }
    }

    #[test]
    fn small_bodies_linearize_soundly(
        f in arb_formula(3),
        coeffs in prop::collection::vec((prop::collection::vec(-3i32..=3, 3), -3i32..=3, 0usize..5), 3),
    ) {
        let cmps = [Cmp::Lt, Cmp::Le, Cmp::Eq, Cmp::Ge, Cmp::Gt];
        let atoms: Vec<Atom> = coeffs
            .iter()
            .map(|(a, c, k)| {
                let t = lin(&a.iter().enumerate().map(|(v, &x)| (v, x as f64)).collect::<Vec<_>>(), 0.0);
                Atom::new(&t, cmps[*k], &LinearTerm::constant(*c as f64))
            })
            .collect();
        let mut p = binaries(3);
        encode_formula(&f, &atoms, &mut p).unwrap();
        prop_assume!(p.variables.len() <= 3 + 12);
        for x in ints(3) {
            let truth: Vec<bool> = atoms.iter().map(|a| a.holds(&x)).collect();
            prop_assert_eq!(feasible_extending(&p, &x), f.eval(&truth));
        }
    }
}
