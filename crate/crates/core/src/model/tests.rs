use std::collections::BTreeMap;
use std::sync::Arc;

use proptest::prelude::*;

use super::*;

const SCHEMA: &str = include_str!("../../specs/mdvne.schema.json");
const SMALL_DC: &str = include_str!("../../fixtures/small_dc.json");

fn mdvne() -> Arc<Metamodel> {
    Arc::new(load_metamodel(SCHEMA).unwrap())
}

fn attrs(pairs: &[(&str, Value)]) -> BTreeMap<String, Value> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

#[test]
fn mdvne_schema_loads() {
    let mm = mdvne();
    let names: Vec<_> = mm.node_types().iter().map(|t| t.name.as_str()).collect();
    for expected in ["SubstrateServer", "VirtualServer", "SubstrateLink", "VirtualLink", "SubstrateSwitch", "VirtualSwitch"] {
        assert!(names.contains(&expected), "{expected}");
    }
    assert!(mm.edge_type("host").is_some());
    for attr in ["cpu", "resCpu", "mem", "resMem", "sto", "resSto"] {
        assert_eq!(mm.attribute("SubstrateServer", attr).unwrap().kind, AttrKind::Int);
    }
    assert!(mm.attribute("SubstrateLink", "resBw").is_some());
    assert!(mm.attribute("VirtualLink", "bw").is_some());
    // inherited
    assert_eq!(mm.attribute("VirtualServer", "mapped").unwrap().kind, AttrKind::Bool);
    assert!(mm.is_subtype("SubstrateServer", "SubstrateElement"));
    assert!(!mm.is_subtype("SubstrateElement", "SubstrateServer"));
}

#[test]
fn empty_schema_is_valid() {
    let mm = load_metamodel("{}").unwrap();
    assert!(mm.is_empty());
    let mm = load_metamodel(r#"{"nodetypes": [], "edgetypes": []}"#).unwrap();
    assert!(mm.is_empty());
}

#[test]
fn schema_errors() {
    let undeclared = r#"{"nodetypes": [{"name": "A"}], "edgetypes": [{"name": "e", "source": "A", "target": "B"}]}"#;
    assert_eq!(load_metamodel(undeclared), Err(ModelError::UnknownType("B".into())));

    let dup = r#"{"nodetypes": [{"name": "A"}, {"name": "A"}]}"#;
    assert_eq!(load_metamodel(dup), Err(ModelError::DuplicateType("A".into())));

    let cyclic = r#"{"nodetypes": [{"name": "A", "supertype": "B"}, {"name": "B", "supertype": "A"}]}"#;
    assert!(matches!(load_metamodel(cyclic), Err(ModelError::CyclicSupertype(_))));

    let shadowed = r#"{"nodetypes": [
        {"name": "A", "attributes": [{"name": "x", "kind": "int"}]},
        {"name": "B", "supertype": "A", "attributes": [{"name": "x", "kind": "real"}]}]}"#;
    assert!(matches!(load_metamodel(shadowed), Err(ModelError::DuplicateAttribute { .. })));

    match load_metamodel("{\n  \"nodetypes\": [\n    {\"name\": }\n  ]\n}") {
        Err(ModelError::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("expected parse error, got {other:?}"),
    }
}

#[test]
fn small_dc_instance_attributes_readable() {
    let g = load_graph(SMALL_DC, mdvne()).unwrap();
    assert_eq!(g.attr("s12", "bw"), Some(&Value::Int(1000)));
    assert_eq!(g.attr("s12", "resBw"), Some(&Value::Int(900)));
    assert_eq!(g.attr("v12", "bw"), Some(&Value::Int(100)));
    assert!(g.has_edge("host", "v12", "s12"));
    assert!(g.has_edge("host", "vsrv1", "ssrv1"));
    assert!(g.has_edge("host", "vsrv2", "ssrv1"));
    g.validate().unwrap();
}

#[test]
fn empty_instance() {
    let g = load_graph(r#"{"nodes": []}"#, mdvne()).unwrap();
    assert_eq!(g.node_count(), 0);
    assert_eq!(g.edge_count(), 0);
}

#[test]
fn instance_errors_name_offending_id() {
    let missing = r#"{"nodes": [{"id": "v", "type": "VirtualSwitch", "attrs": {"mapped": false}}],
        "edges": [{"id": "h", "type": "host", "src": "v", "tgt": "ghost"}]}"#;
    match load_graph(missing, mdvne()) {
        Err(ModelError::Nonconforming { id, .. }) => assert_eq!(id, "h"),
        other => panic!("{other:?}"),
    }
    let wrong_kind = r#"{"nodes": [{"id": "v", "type": "VirtualSwitch", "attrs": {"mapped": 3}}]}"#;
    match load_graph(wrong_kind, mdvne()) {
        Err(ModelError::Nonconforming { id, .. }) => assert_eq!(id, "v"),
        other => panic!("{other:?}"),
    }
    let missing_attr = r#"{"nodes": [{"id": "v", "type": "VirtualLink", "attrs": {"mapped": false}}]}"#;
    assert!(matches!(load_graph(missing_attr, mdvne()), Err(ModelError::Nonconforming { .. })));
    // endpoint type: host must leave a virtual element
    let bad_endpoint = r#"{"nodes": [
        {"id": "a", "type": "SubstrateSwitch", "attrs": {}},
        {"id": "b", "type": "SubstrateSwitch", "attrs": {}}],
        "edges": [{"id": "h", "type": "host", "src": "a", "tgt": "b"}]}"#;
    assert!(matches!(load_graph(bad_endpoint, mdvne()), Err(ModelError::Nonconforming { .. })));
}

#[test]
fn delta_reproduces_small_dc_link_state() {
    let mm = mdvne();
    let mut g = Graph::new(mm);
    g.add_node("s12", Node { ty: "SubstrateLink".into(), attrs: attrs(&[("bw", Value::Int(1000)), ("resBw", Value::Int(1000))]) })
        .unwrap();
    g.add_node("v12", Node { ty: "VirtualLink".into(), attrs: attrs(&[("bw", Value::Int(100)), ("mapped", Value::Bool(false))]) })
        .unwrap();
    let delta = GraphDelta {
        created_edges: vec![CreatedEdge { id: "h".into(), ty: "host".into(), src: "v12".into(), tgt: "s12".into() }],
        attr_updates: vec![AttrUpdate { node: "s12".into(), attr: "resBw".into(), value: Value::Int(900) }],
        ..Default::default()
    };
    let after = g.apply_delta(&delta).unwrap();
    assert_eq!(after.attr("s12", "resBw"), Some(&Value::Int(900)));
    assert!(after.has_edge("host", "v12", "s12"));
    after.validate().unwrap();
    // original untouched
    assert_eq!(g.attr("s12", "resBw"), Some(&Value::Int(1000)));
}

#[test]
fn empty_delta_is_identity() {
    let g = load_graph(SMALL_DC, mdvne()).unwrap();
    assert_eq!(g.apply_delta(&GraphDelta::default()).unwrap(), g);
}

#[test]
fn deleting_node_removes_incident_edges() {
    let g = load_graph(SMALL_DC, mdvne()).unwrap();
    // oracle: enumerate incident edges directly from the edge list
    let incident: Vec<String> = g
        .edges()
        .filter(|(_, e)| e.src == "ssrv1" || e.tgt == "ssrv1")
        .map(|(id, _)| id.to_string())
        .collect();
    assert_eq!(incident.len(), 3);
    let delta = GraphDelta { deleted_nodes: vec!["ssrv1".into()], ..Default::default() };
    let after = g.apply_delta(&delta).unwrap();
    assert!(after.node("ssrv1").is_none());
    for e in &incident {
        assert!(after.edge(e).is_none(), "{e} survived");
    }
    assert_eq!(after.edge_count(), g.edge_count() - 3);
    assert_eq!(after.node_count(), g.node_count() - 1);
    after.validate().unwrap();
}

#[test]
fn nonconforming_delta_rejected() {
    let g = load_graph(SMALL_DC, mdvne()).unwrap();
    let bad = GraphDelta {
        attr_updates: vec![AttrUpdate { node: "s12".into(), attr: "resBw".into(), value: Value::Bool(true) }],
        ..Default::default()
    };
    assert!(g.apply_delta(&bad).is_err());
    let bad_edge = GraphDelta {
        created_edges: vec![CreatedEdge { id: "x".into(), ty: "host".into(), src: "ssrv1".into(), tgt: "s12".into() }],
        ..Default::default()
    };
    assert!(g.apply_delta(&bad_edge).is_err());
}

#[test]
fn serializer_key_order() {
    let g = load_graph(SMALL_DC, mdvne()).unwrap();
    let text = serialize_model(&g);
    let pos = |k: &str| text.find(&format!("\"{k}\"")).unwrap();
    assert!(pos("nodetypes") < pos("edgetypes"));
    assert!(pos("edgetypes") < pos("nodes"));
    assert!(pos("nodes") < pos("edges"));
    let node_start = text.find("\"id\": \"s12\"").unwrap();
    let rest = &text[node_start..];
    assert!(rest.find("\"type\"").unwrap() < rest.find("\"attrs\"").unwrap());
    let edge_start = text.find("\"id\": \"host_v12\"").unwrap();
    let rest = &text[edge_start..];
    let (t, s, d) = (rest.find("\"type\"").unwrap(), rest.find("\"src\"").unwrap(), rest.find("\"tgt\"").unwrap());
    assert!(t < s && s < d);
}

#[derive(Debug, Clone)]
enum Op {
    AddServer(u8, i64),
    AddLink(u8, u8, u8),
    Host(u8, u8),
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        (0u8..6, 0i64..100).prop_map(|(i, c)| Op::AddServer(i, c)),
        (0u8..6, 0u8..6, 0u8..6).prop_map(|(l, a, b)| Op::AddLink(l, a, b)),
        (0u8..6, 0u8..6).prop_map(|(v, s)| Op::Host(v, s)),
    ]
}

fn build(ops: &[Op]) -> Graph {
    let mut g = Graph::new(mdvne());
    for op in ops {
        // failures are fine: only successful operations shape the graph
        let _ = match *op {
            Op::AddServer(i, c) => g.add_node(
                format!("s{i}"),
                Node {
                    ty: "SubstrateServer".into(),
                    attrs: attrs(&[
                        ("cpu", Value::Int(c)),
                        ("resCpu", Value::Int(c)),
                        ("mem", Value::Int(1)),
                        ("resMem", Value::Int(1)),
                        ("sto", Value::Int(1)),
                        ("resSto", Value::Int(1)),
                    ]),
                },
            ),
            Op::AddLink(l, a, b) => g
                .add_node(format!("l{l}"), Node { ty: "SubstrateLink".into(), attrs: attrs(&[("bw", Value::Int(10)), ("resBw", Value::Int(10))]) })
                .and_then(|_| g.add_edge(format!("l{l}src"), Edge { ty: "ssrc".into(), src: format!("l{l}"), tgt: format!("s{a}") }))
                .and_then(|_| g.add_edge(format!("l{l}tgt"), Edge { ty: "stgt".into(), src: format!("l{l}"), tgt: format!("s{b}") })),
            Op::Host(v, s) => g
                .add_node(format!("v{v}"), Node { ty: "VirtualSwitch".into(), attrs: attrs(&[("mapped", Value::Bool(true))]) })
                .and_then(|_| g.add_edge(format!("h{v}"), Edge { ty: "host".into(), src: format!("v{v}"), tgt: format!("s{s}") })),
        };
    }
    g
}

proptest! {
    #[test]
    fn serialize_round_trip(ops in prop::collection::vec(op(), 0..30)) {
        let g = build(&ops);
        g.validate().unwrap();
        let text = serialize_model(&g);
        let back = load_model(&text).unwrap();
        prop_assert_eq!(&back, &g);
        prop_assert_eq!(serialize_model(&back), text);
    }

    #[test]
    fn deletion_preserves_conformance(ops in prop::collection::vec(op(), 0..30), victim in 0u8..6) {
        let g = build(&ops);
        let id = format!("s{victim}");
        prop_assume!(g.node(&id).is_some());
        let delta = GraphDelta { deleted_nodes: vec![id.clone()], ..Default::default() };
        let a = g.apply_delta(&delta).unwrap();
        let b = g.apply_delta(&delta).unwrap();
        a.validate().unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.edges().all(|(_, e)| e.src != id && e.tgt != id));
    }
}
