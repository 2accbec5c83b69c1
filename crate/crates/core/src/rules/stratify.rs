use std::collections::BTreeMap;

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use super::ast::{Literal, Rule};
use super::RuleError;

/// Groups rules into strata: one per strongly connected component of the
/// predicate dependency graph, dependencies first. Fails when a component
/// contains a negative edge.
pub(crate) fn stratify(rules: &[Rule]) -> Result<Vec<Vec<usize>>, RuleError> {
    let mut graph: DiGraph<&str, bool> = DiGraph::new();
    let mut nodes: BTreeMap<&str, NodeIndex> = BTreeMap::new();

    let mut predicates: Vec<&str> = rules
        .iter()
        .flat_map(|r| {
            std::iter::once(r.head.predicate.as_str()).chain(r.body.iter().filter_map(|l| match l {
                Literal::Positive(a) | Literal::Negative(a) => Some(a.predicate.as_str()),
                Literal::Builtin { .. } => None,
            }))
        })
        .collect();
    predicates.sort_unstable();
    predicates.dedup();
    for p in predicates {
        nodes.insert(p, graph.add_node(p));
    }

    for rule in rules {
        let head = nodes[rule.head.predicate.as_str()];
        for lit in &rule.body {
            match lit {
                Literal::Positive(a) => {
                    graph.add_edge(nodes[a.predicate.as_str()], head, false);
                }
                Literal::Negative(a) => {
                    graph.add_edge(nodes[a.predicate.as_str()], head, true);
                }
                Literal::Builtin { .. } => {}
            }
        }
    }

    // tarjan_scc yields components in reverse topological order.
    let mut components = tarjan_scc(&graph);
    components.reverse();

    let mut component_of = vec![0usize; graph.node_count()];
    for (ci, comp) in components.iter().enumerate() {
        for n in comp {
            component_of[n.index()] = ci;
        }
    }
    for edge in graph.edge_indices() {
        let negative = graph[edge];
        let (from, to) = graph.edge_endpoints(edge).expect("edge exists");
        if negative && component_of[from.index()] == component_of[to.index()] {
            let mut cycle: Vec<String> = components[component_of[from.index()]]
                .iter()
                .map(|n| graph[*n].to_string())
                .collect();
            cycle.sort();
            return Err(RuleError::Stratification { cycle });
        }
    }

    let mut strata = vec![Vec::new(); components.len()];
    for (ri, rule) in rules.iter().enumerate() {
        let node = nodes[rule.head.predicate.as_str()];
        strata[component_of[node.index()]].push(ri);
    }
    strata.retain(|s| !s.is_empty());
    Ok(strata)
}
