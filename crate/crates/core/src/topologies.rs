//! Small hand-built networks used by tests, docs and the CLI smoke runs.

use crate::model::{EntangledLink, NetworkBuilder, NodeId, QuantumNetwork};

fn link(s: u32, t: u32) -> EntangledLink {
    EntangledLink::new(NodeId(s), NodeId(t))
}

/// A → B → C with throughputs 2 and 3.
pub fn line() -> QuantumNetwork {
    NetworkBuilder::new()
        .node(0, "A", 0.0)
        .node(1, "B", 0.0)
        .node(2, "C", 0.0)
        .link(link(0, 1).throughput(2.0))
        .link(link(1, 2).throughput(3.0))
        .build()
        .expect("static topology")
}

/// Two A → D routes with incomparable objectives: via B the links are fast
/// but low fidelity (two slots each), via C they are slow at full fidelity.
pub fn diamond() -> QuantumNetwork {
    NetworkBuilder::new()
        .node(0, "A", 0.1)
        .node(1, "B", 0.1)
        .node(2, "C", 0.1)
        .node(3, "D", 0.1)
        .link(link(0, 1).throughput(4.0).fidelity(0.5))
        .link(link(1, 3).level(2).throughput(4.0).fidelity(0.5))
        .link(link(0, 2).level(2).throughput(2.0).fidelity(1.0))
        .link(link(2, 3).throughput(2.0).fidelity(1.0))
        .build()
        .expect("static topology")
}

/// Six repeaters R1..R6 and one switcher S with two modes. In both modes R1
/// transmits to R2; mode 1 adds the R1/R3/R4/R5/R6 mesh, mode 2 adds R2 → R6.
pub fn switcher_example() -> QuantumNetwork {
    NetworkBuilder::new()
        .node(0, "R1", 0.2)
        .node(1, "R2", 0.3)
        .node(2, "R3", 0.1)
        .node(3, "R4", 0.4)
        .node(4, "R5", 0.2)
        .node(5, "R6", 0.1)
        .node(6, "S", 0.5)
        .switcher(6)
        .link(
            link(0, 1)
                .level(1)
                .fidelity(0.95)
                .throughput(6.0)
                .utility(1.0),
        )
        .link(
            link(0, 2)
                .level(2)
                .fidelity(0.9)
                .throughput(5.0)
                .utility(1.2),
        )
        .link(
            link(0, 3)
                .level(3)
                .fidelity(0.7)
                .throughput(3.0)
                .utility(0.8),
        )
        .link(
            link(2, 3)
                .level(1)
                .fidelity(0.98)
                .throughput(8.0)
                .utility(1.0),
        )
        .link(
            link(2, 4)
                .level(2)
                .fidelity(0.85)
                .throughput(4.0)
                .utility(0.9),
        )
        .link(
            link(3, 4)
                .level(1)
                .fidelity(0.97)
                .throughput(7.0)
                .utility(1.1),
        )
        .link(
            link(3, 5)
                .level(2)
                .fidelity(0.8)
                .throughput(4.5)
                .utility(1.0),
        )
        .link(
            link(4, 5)
                .level(1)
                .fidelity(0.99)
                .throughput(9.0)
                .utility(1.0),
        )
        .link(
            link(1, 5)
                .level(3)
                .fidelity(0.6)
                .throughput(2.5)
                .utility(1.3),
        )
        .mode(
            1,
            &[
                (0, 1),
                (0, 2),
                (0, 3),
                (2, 3),
                (2, 4),
                (3, 4),
                (3, 5),
                (4, 5),
            ],
        )
        .mode(2, &[(0, 1), (1, 5)])
        .build()
        .expect("static topology")
}
