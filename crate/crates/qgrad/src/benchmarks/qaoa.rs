//! MaxCut ansatz: alternating cost and mixer layers on a graph.
//!
//! The cost generator is the Ising sum `sum_(u,v) Z_u Z_v` over the edges
//! and doubles as the observable, so minimizing `f(theta)` maximizes the
//! cut.  The mixer generator is `sum_i X_i`.  Each layer contributes two
//! parameters (cost angle, then mixer angle).

use crate::circuit::{Circuit, GateOp, Observable, Pqc, PqcGate};
use crate::error::{Error, Result};
use crate::pauli::{PauliLetter, PauliSum, PauliWord};

/// An undirected graph as an edge list over nodes `0..nodes`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    nodes: usize,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    /// An edge list over `0..nodes`.  Self-loops are rejected; node
    /// indices must be in range.
    pub fn new(nodes: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        for &(u, v) in &edges {
            if u == v {
                return Err(Error::GraphFormat {
                    line: 0,
                    content: format!("self-loop at node {u}"),
                });
            }
            for q in [u, v] {
                if q >= nodes {
                    return Err(Error::QubitOutOfRange {
                        qubit: q,
                        qubits: nodes,
                    });
                }
            }
        }
        Ok(Self { nodes, edges })
    }

    /// The triangle graph `K_3`.
    pub fn triangle() -> Self {
        Self {
            nodes: 3,
            edges: vec![(0, 1), (1, 2), (2, 0)],
        }
    }

    /// A ring on `nodes` nodes.
    pub fn ring(nodes: usize) -> Result<Self> {
        if nodes < 3 {
            return Err(Error::GraphFormat {
                line: 0,
                content: format!("a ring needs at least 3 nodes, got {nodes}"),
            });
        }
        let edges = (0..nodes).map(|i| (i, (i + 1) % nodes)).collect();
        Self::new(nodes, edges)
    }

    /// An open chain `0-1-...-(nodes-1)`.
    pub fn line(nodes: usize) -> Result<Self> {
        if nodes < 2 {
            return Err(Error::GraphFormat {
                line: 0,
                content: format!("a line needs at least 2 nodes, got {nodes}"),
            });
        }
        let edges = (0..nodes - 1).map(|i| (i, i + 1)).collect();
        Self::new(nodes, edges)
    }

    pub fn node_count(&self) -> usize {
        self.nodes
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// The size of the cut induced by an assignment bitmask (bit `i` is
    /// node `i`'s side).
    pub fn cut_size(&self, assignment: u64) -> usize {
        self.edges
            .iter()
            .filter(|&&(u, v)| (assignment >> u & 1) != (assignment >> v & 1))
            .count()
    }

    /// Maximum cut size, by enumeration (small graphs only).
    pub fn max_cut(&self) -> usize {
        (0..1u64 << self.nodes)
            .map(|a| self.cut_size(a))
            .max()
            .unwrap_or(0)
    }
}

/// Parse a whitespace-separated edge list: one `u v` pair per line, `#`
/// comments and blank lines skipped.  The node count is one past the
/// largest index seen.
pub fn parse_graph(text: &str) -> Result<Graph> {
    let mut edges = Vec::new();
    let mut max_node = 0usize;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        let mut fields = content.split_whitespace();
        let parse = |field: Option<&str>| -> Result<usize> {
            field
                .and_then(|f| f.parse().ok())
                .ok_or_else(|| Error::GraphFormat {
                    line,
                    content: content.to_string(),
                })
        };
        let u = parse(fields.next())?;
        let v = parse(fields.next())?;
        if fields.next().is_some() || u == v {
            return Err(Error::GraphFormat {
                line,
                content: content.to_string(),
            });
        }
        max_node = max_node.max(u).max(v);
        edges.push((u, v));
    }
    if edges.is_empty() {
        return Err(Error::GraphFormat {
            line: 0,
            content: "no edges".to_string(),
        });
    }
    Graph::new(max_node + 1, edges)
}

/// Read an edge-list file (see [`parse_graph`]).
pub fn read_graph(path: impl AsRef<std::path::Path>) -> Result<Graph> {
    parse_graph(&std::fs::read_to_string(path)?)
}

/// `sum_(u,v) Z_u Z_v` over the graph's edges.
pub fn cut_generator(graph: &Graph) -> Result<PauliSum> {
    let n = graph.node_count();
    let terms = graph
        .edges()
        .iter()
        .map(|&(u, v)| {
            let word = PauliWord::single(n, u, PauliLetter::Z)?.with_letter(v, PauliLetter::Z)?;
            Ok((1.0, word))
        })
        .collect::<Result<Vec<_>>>()?;
    PauliSum::from_terms(n, terms)
}

/// `sum_i X_i` over all nodes.
pub fn mixer_generator(n: usize) -> Result<PauliSum> {
    PauliSum::from_terms(
        n,
        (0..n)
            .map(|q| Ok((1.0, PauliWord::single(n, q, PauliLetter::X)?)))
            .collect::<Result<Vec<_>>>()?,
    )
}

/// The `layers`-layer MaxCut PQC: uniform-superposition prep, then
/// per layer a cost gate and a mixer gate; observable = cost generator.
pub fn maxcut_pqc(graph: &Graph, layers: usize) -> Result<Pqc> {
    if layers == 0 {
        return Err(Error::NonPositiveCount { name: "layers" });
    }
    let n = graph.node_count();
    let cost = cut_generator(graph)?;
    let mixer = mixer_generator(n)?;
    let prep_ops = (0..n)
        .map(|q| {
            Ok(GateOp::GeneratorRotation {
                generator: crate::gradient::hadamard_generator(n, q)?,
                angle: std::f64::consts::PI,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut gates = Vec::with_capacity(2 * layers);
    for l in 1..=layers {
        gates.push(PqcGate::new(format!("gamma_{l}"), cost.clone()));
        gates.push(PqcGate::new(format!("beta_{l}"), mixer.clone()));
    }
    Pqc::new(n, gates, Observable::Paulis(cost.clone()))?
        .with_input_prep(Circuit::new(n, prep_ops)?)
}
