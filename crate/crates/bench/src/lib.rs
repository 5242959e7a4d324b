//! Workloads shared by the criterion benchmarks.

use lecq_core::synth::{random_instance_with, Instance, SynthConfig};
use lecq_core::{fixtures, DistributedGraph, QueryGraph};

/// A generated instance with up to `vertices` vertices over four fragments.
pub fn scaled_instance(seed: u64, vertices: usize) -> Instance {
    let cfg = SynthConfig {
        max_vertices: vertices,
        min_fragments: 4,
        max_fragments: 4,
        ..SynthConfig::default()
    };
    random_instance_with(seed, &cfg)
}

pub fn running_example() -> (DistributedGraph, QueryGraph) {
    (fixtures::running_distributed(), fixtures::running_query())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaled_instances_grow() {
        let small = scaled_instance(3, 12);
        let large = scaled_instance(3, 400);
        assert!(large.graph.vertex_count() >= small.graph.vertex_count());
        assert_eq!(large.assignment.fragment_count(), 4);
    }
}
