//! Two-tier substrate networks and star-shaped virtual network requests.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::VneError;
use crate::model::{Edge, Graph, Metamodel, Node, Value};

/// Inclusive integer range `[lo, hi]`.
pub type Range = (i64, i64);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub racks: u32,
    pub servers_per_rack: u32,
    pub core_switches: u32,
    pub server_cpu: i64,
    pub server_mem: i64,
    pub server_sto: i64,
    pub core_link_bw: i64,
    pub server_link_bw: i64,
    pub vnr_count: u32,
    pub vnr_servers: Range,
    pub vnr_cpu: Range,
    pub vnr_mem: Range,
    pub vnr_sto: Range,
    pub vnr_bw: Range,
    #[serde(default)]
    pub seed: u64,
}

impl ScenarioConfig {
    /// Eight racks of ten servers under two core switches.
    pub fn full_scale() -> Self {
        ScenarioConfig {
            racks: 8,
            servers_per_rack: 10,
            core_switches: 2,
            server_cpu: 32,
            server_mem: 512,
            server_sto: 1024,
            core_link_bw: 10_000,
            server_link_bw: 1_000,
            vnr_count: 40,
            vnr_servers: (2, 10),
            vnr_cpu: (1, 32),
            vnr_mem: (1, 511),
            vnr_sto: (50, 300),
            vnr_bw: (100, 1000),
            seed: 0,
        }
    }

    /// Two racks of four servers and ten small requests.
    pub fn desk() -> Self {
        ScenarioConfig {
            racks: 2,
            servers_per_rack: 4,
            vnr_count: 10,
            vnr_servers: (2, 4),
            vnr_cpu: (1, 8),
            vnr_mem: (1, 64),
            vnr_sto: (10, 100),
            vnr_bw: (10, 100),
            seed: 1,
            ..Self::full_scale()
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, VneError> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| VneError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), VneError> {
        let bad = |m: String| Err(VneError::Config(m));
        for (name, v) in [("racks", self.racks), ("servers_per_rack", self.servers_per_rack), ("core_switches", self.core_switches)] {
            if v < 1 {
                return bad(format!("{name} must be at least 1"));
            }
        }
        for (name, v) in [
            ("server_cpu", self.server_cpu),
            ("server_mem", self.server_mem),
            ("server_sto", self.server_sto),
            ("core_link_bw", self.core_link_bw),
            ("server_link_bw", self.server_link_bw),
        ] {
            if v < 1 {
                return bad(format!("{name} must be positive"));
            }
        }
        let ranges = [
            ("vnr_servers", self.vnr_servers, i64::MAX),
            ("vnr_cpu", self.vnr_cpu, self.server_cpu),
            ("vnr_mem", self.vnr_mem, self.server_mem),
            ("vnr_sto", self.vnr_sto, self.server_sto),
            ("vnr_bw", self.vnr_bw, self.server_link_bw.min(self.core_link_bw)),
        ];
        for (name, (lo, hi), cap) in ranges {
            if lo < 1 || lo > hi {
                return bad(format!("{name} = [{lo}, {hi}] is empty or not positive"));
            }
            if hi > cap {
                return bad(format!("{name} upper end {hi} exceeds the capacity {cap}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub substrate: Graph,
    pub vnrs: Vec<Graph>,
}

fn node(ty: &str, attrs: &[(&str, Value)]) -> Node {
    Node { ty: ty.into(), attrs: attrs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect::<BTreeMap<_, _>>() }
}

fn edge(g: &mut Graph, ty: &str, src: &str, tgt: &str) {
    g.add_edge(format!("{src}.{ty}"), Edge { ty: ty.into(), src: src.into(), tgt: tgt.into() })
        .expect("scenario edges are well typed");
}

fn link(g: &mut Graph, id: &str, bw: i64, src: &str, tgt: &str) {
    g.add_node(id, node("SubstrateLink", &[("bw", Value::Int(bw)), ("resBw", Value::Int(bw))])).expect("fresh id");
    edge(g, "ssrc", id, src);
    edge(g, "stgt", id, tgt);
}

fn path(g: &mut Graph, id: &str, src: &str, tgt: &str, hops: [&str; 2]) {
    g.add_node(id, node("SubstratePath", &[])).expect("fresh id");
    edge(g, "psrc", id, src);
    edge(g, "ptgt", id, tgt);
    edge(g, "hop1", id, hops[0]);
    edge(g, "hop2", id, hops[1]);
}

fn server_id(r: u32, s: u32) -> String {
    format!("srv{r}_{s}")
}

/// Builds the substrate and `vnr_count` requests. Equal configs give equal
/// scenarios.
pub fn generate_scenario(cfg: &ScenarioConfig, mm: Arc<Metamodel>) -> Result<Scenario, VneError> {
    cfg.validate()?;
    let mut g = Graph::new(mm.clone());
    for c in 0..cfg.core_switches {
        g.add_node(format!("core{c}"), node("SubstrateSwitch", &[])).expect("fresh id");
    }
    for r in 0..cfg.racks {
        let rack = format!("rack{r}");
        g.add_node(rack.clone(), node("SubstrateSwitch", &[])).expect("fresh id");
        for c in 0..cfg.core_switches {
            link(&mut g, &format!("l_rack{r}_core{c}"), cfg.core_link_bw, &rack, &format!("core{c}"));
        }
        for s in 0..cfg.servers_per_rack {
            let id = server_id(r, s);
            let res = |cap: i64| Value::Int(cap);
            g.add_node(
                id.clone(),
                node(
                    "SubstrateServer",
                    &[
                        ("cpu", res(cfg.server_cpu)),
                        ("resCpu", res(cfg.server_cpu)),
                        ("mem", res(cfg.server_mem)),
                        ("resMem", res(cfg.server_mem)),
                        ("sto", res(cfg.server_sto)),
                        ("resSto", res(cfg.server_sto)),
                    ],
                ),
            )
            .expect("fresh id");
            link(&mut g, &format!("l_{id}"), cfg.server_link_bw, &id, &rack);
        }
    }
    // two-hop paths: server to core switch, and server to server in a rack
    for r in 0..cfg.racks {
        for s in 0..cfg.servers_per_rack {
            let id = server_id(r, s);
            for c in 0..cfg.core_switches {
                let up = format!("l_rack{r}_core{c}");
                path(&mut g, &format!("p_{id}_core{c}"), &id, &format!("core{c}"), [&format!("l_{id}"), &up]);
            }
            for t in 0..cfg.servers_per_rack {
                if t != s {
                    let other = server_id(r, t);
                    path(&mut g, &format!("p_{id}_{other}"), &id, &other, [&format!("l_{id}"), &format!("l_{other}")]);
                }
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut pick = |(lo, hi): Range| rng.gen_range(lo..=hi);
    let mut vnrs = Vec::with_capacity(cfg.vnr_count as usize);
    for k in 0..cfg.vnr_count {
        let mut v = Graph::new(mm.clone());
        let sw = format!("vnr{k}.sw");
        v.add_node(sw.clone(), node("VirtualSwitch", &[("mapped", Value::Bool(false))])).expect("fresh id");
        let n = pick(cfg.vnr_servers);
        for i in 0..n {
            let srv = format!("vnr{k}.srv{i}");
            let attrs = [
                ("mapped", Value::Bool(false)),
                ("cpu", Value::Int(pick(cfg.vnr_cpu))),
                ("mem", Value::Int(pick(cfg.vnr_mem))),
                ("sto", Value::Int(pick(cfg.vnr_sto))),
            ];
            v.add_node(srv.clone(), node("VirtualServer", &attrs)).expect("fresh id");
            let l = format!("vnr{k}.l{i}");
            let attrs = [("mapped", Value::Bool(false)), ("bw", Value::Int(pick(cfg.vnr_bw)))];
            v.add_node(l.clone(), node("VirtualLink", &attrs)).expect("fresh id");
            edge(&mut v, "vsrc", &l, &srv);
            edge(&mut v, "vtgt", &l, &sw);
        }
        vnrs.push(v);
    }
    Ok(Scenario { substrate: g, vnrs })
}
