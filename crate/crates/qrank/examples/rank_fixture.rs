//! Ranks a small fixture graph both ways and prints the comparison.

use qrank::classical;
use qrank::graph::{GoogleMatrix, WebGraph};
use qrank::quantum::{build_liouvillian, quantum_pagerank, HamiltonianSource};
use qrank::spectral::steady_state_by_kernel;

fn main() -> qrank::Result<()> {
    let graph = WebGraph::parse_edge_list("0 1\n1 2\n2 0\n3 0\n")?;
    let g = GoogleMatrix::from_graph(&graph, 0.85)?;

    let classical_rank = classical::stationary(&g)?;

    let l = build_liouvillian(&HamiltonianSource::SymmetrizedGoogle, &g, 0.5)?;
    let quantum_rank = quantum_pagerank(&steady_state_by_kernel(&l)?)?;

    for entry in quantum_rank.ranking() {
        println!(
            "node {}: quantum {:.6} classical {:.6}",
            entry.node,
            entry.score,
            classical_rank.values()[entry.node],
        );
    }
    Ok(())
}
