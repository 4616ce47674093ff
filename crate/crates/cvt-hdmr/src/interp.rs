//! One-dimensional interpolation nodes and Lagrange basis evaluation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A strictly increasing set of interpolation nodes for one input dimension.
/// The anchor coordinate is always one of the nodes, and the first and last
/// nodes are the ends of the governing interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeSet {
    nodes: Vec<f64>,
    anchor_index: usize,
    /// Barycentric weights 1 / prod_{q != k} (x_k - x_q); derived, not serialized.
    #[serde(skip)]
    bary_weights: Vec<f64>,
}

impl NodeSet {
    pub fn new(nodes: Vec<f64>, anchor_index: usize) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidParameter("node set needs at least 2 nodes".into()));
        }
        if nodes.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParameter("nodes must be strictly increasing".into()));
        }
        if anchor_index >= nodes.len() {
            return Err(Error::InvalidParameter("anchor index out of range".into()));
        }
        let bary_weights = barycentric_weights(&nodes);
        Ok(NodeSet { nodes, anchor_index, bary_weights })
    }

    /// Restores derived data after deserialization.
    pub(crate) fn rebuild_weights(&mut self) {
        self.bary_weights = barycentric_weights(&self.nodes);
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn anchor_index(&self) -> usize {
        self.anchor_index
    }

    pub fn anchor_value(&self) -> f64 {
        self.nodes[self.anchor_index]
    }

    /// True when `x` lies outside [first node, last node].
    pub fn extrapolates(&self, x: f64) -> bool {
        x < self.nodes[0] || x > self.nodes[self.nodes.len() - 1]
    }

    /// Lagrange cardinal basis at `x`: weight k is `prod_{q != k} (x - x_q) /
    /// (x_k - x_q)`, evaluated in barycentric form for stability. When `x`
    /// coincides with a node the basis is exactly one-hot. Points outside the
    /// node interval are valid (extrapolation; see [`NodeSet::extrapolates`]).
    pub fn basis(&self, x: f64) -> Vec<f64> {
        let n = self.nodes.len();
        for (k, &xk) in self.nodes.iter().enumerate() {
            if x == xk {
                let mut w = vec![0.0; n];
                w[k] = 1.0;
                return w;
            }
        }
        // Second barycentric form: l_k(x) = (w_k / (x - x_k)) / sum_q (w_q / (x - x_q))
        let terms: Vec<f64> = self
            .nodes
            .iter()
            .zip(&self.bary_weights)
            .map(|(&xk, &wk)| wk / (x - xk))
            .collect();
        let denom: f64 = terms.iter().sum();
        terms.into_iter().map(|t| t / denom).collect()
    }
}

fn barycentric_weights(nodes: &[f64]) -> Vec<f64> {
    nodes
        .iter()
        .enumerate()
        .map(|(k, &xk)| {
            let prod: f64 = nodes
                .iter()
                .enumerate()
                .filter(|&(q, _)| q != k)
                .map(|(_, &xq)| xk - xq)
                .product();
            1.0 / prod
        })
        .collect()
}

/// Builds the node set for one dimension: start from {a, anchor, b} and
/// repeatedly insert the midpoint of the widest gap (leftmost gap on ties)
/// until `k` nodes exist. An anchor equal to an endpoint just starts from
/// {a, b}.
pub fn select_nodes(a: f64, b: f64, anchor: f64, k: usize) -> Result<NodeSet> {
    if !(a < b) {
        return Err(Error::InvalidParameter(format!("need a < b, got [{a}, {b}]")));
    }
    if !(a..=b).contains(&anchor) {
        return Err(Error::InvalidParameter(format!(
            "anchor {anchor} outside [{a}, {b}]"
        )));
    }
    if k < 3 {
        return Err(Error::InvalidParameter(format!(
            "node count must be at least 3 to hold {{a, anchor, b}}, got {k}"
        )));
    }
    let mut nodes = if anchor == a || anchor == b {
        vec![a, b]
    } else {
        vec![a, anchor, b]
    };
    while nodes.len() < k {
        let mut widest = 0;
        let mut width = nodes[1] - nodes[0];
        for i in 1..nodes.len() - 1 {
            let w = nodes[i + 1] - nodes[i];
            if w > width {
                width = w;
                widest = i;
            }
        }
        let mid = 0.5 * (nodes[widest] + nodes[widest + 1]);
        nodes.insert(widest + 1, mid);
    }
    let anchor_index = nodes
        .iter()
        .position(|&v| v == anchor)
        .expect("anchor is a member by construction");
    NodeSet::new(nodes, anchor_index)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    /// Direct product-form basis, the independent route the barycentric
    /// implementation is checked against.
    fn product_basis(nodes: &[f64], x: f64) -> Vec<f64> {
        nodes
            .iter()
            .enumerate()
            .map(|(k, &xk)| {
                nodes
                    .iter()
                    .enumerate()
                    .filter(|&(q, _)| q != k)
                    .map(|(_, &xq)| (x - xq) / (xk - xq))
                    .product()
            })
            .collect()
    }

    #[test]
    fn select_nodes_initial_set() {
        let ns = select_nodes(0.0, 1.0, 0.5, 3).unwrap();
        assert_eq!(ns.nodes(), &[0.0, 0.5, 1.0]);
        assert_eq!(ns.anchor_index(), 1);
    }

    #[test]
    fn select_nodes_midpoint_rule_hand_execution() {
        // widest-gap midpoints with the leftmost tie rule, worked by hand
        let ns = select_nodes(0.0, 1.0, 0.4, 7).unwrap();
        assert_eq!(ns.nodes(), &[0.0, 0.2, 0.4, 0.55, 0.7, 0.85, 1.0]);

        let sym = select_nodes(0.0, 1.0, 0.5, 5).unwrap();
        assert_eq!(sym.nodes(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn select_nodes_anchor_on_endpoint() {
        let ns = select_nodes(0.0, 1.0, 0.0, 5).unwrap();
        assert_eq!(ns.nodes(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(ns.anchor_index(), 0);
    }

    #[test]
    fn select_nodes_rejects_bad_input() {
        assert!(select_nodes(0.0, 1.0, 0.5, 2).is_err());
        assert!(select_nodes(0.0, 1.0, 1.5, 5).is_err());
        assert!(select_nodes(1.0, 1.0, 1.0, 3).is_err());
    }

    #[test]
    fn basis_linear_pair() {
        let ns = NodeSet::new(vec![0.0, 1.0], 0).unwrap();
        let w = ns.basis(0.25);
        assert!((w[0] - 0.75).abs() < 1e-15);
        assert!((w[1] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn basis_three_nodes_matches_direct_evaluation() {
        let ns = NodeSet::new(vec![0.0, 0.5, 1.0], 1).unwrap();
        let w = ns.basis(0.25);
        assert!((w[0] - 0.375).abs() < 1e-14);
        assert!((w[1] - 0.75).abs() < 1e-14);
        assert!((w[2] - (-0.125)).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn basis_is_one_hot_on_nodes() {
        let ns = select_nodes(0.0, 1.0, 0.4, 7).unwrap();
        for (k, &xk) in ns.nodes().iter().enumerate() {
            let w = ns.basis(xk);
            for (q, &wq) in w.iter().enumerate() {
                assert_eq!(wq, if q == k { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn barycentric_agrees_with_product_form() {
        let mut rng = SplitMix64::new(4);
        for k in 2..=9 {
            let ns = select_nodes(-1.0, 2.0, 0.3, k.max(3)).unwrap();
            for _ in 0..20 {
                let x = -1.5 + 4.0 * rng.next_f64();
                let bary = ns.basis(x);
                let prod = product_basis(ns.nodes(), x);
                for (a, b) in bary.iter().zip(&prod) {
                    assert!((a - b).abs() <= 1e-10 * b.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn partition_of_unity_up_to_k_12() {
        let mut rng = SplitMix64::new(8);
        for k in 3..=12 {
            let ns = select_nodes(0.0, 1.0, 0.37, k).unwrap();
            for _ in 0..50 {
                let x = -0.2 + 1.4 * rng.next_f64();
                let s: f64 = ns.basis(x).iter().sum();
                assert!((s - 1.0).abs() < 1e-10, "k={k}, x={x}: sum={s}");
            }
        }
    }

    #[test]
    fn polynomials_up_to_degree_k_minus_1_are_reproduced() {
        let mut rng = SplitMix64::new(15);
        for k in 3..=12 {
            let ns = select_nodes(0.0, 1.0, 0.61, k).unwrap();
            let coeffs: Vec<f64> = (0..k).map(|_| 2.0 * rng.next_f64() - 1.0).collect();
            let poly = |x: f64| coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c);
            let values: Vec<f64> = ns.nodes().iter().map(|&x| poly(x)).collect();
            let scale = values.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
            for _ in 0..50 {
                let x = rng.next_f64();
                let w = ns.basis(x);
                let interp: f64 = w.iter().zip(&values).map(|(a, b)| a * b).sum();
                assert!(
                    (interp - poly(x)).abs() <= 1e-9 * scale,
                    "k={k}, x={x}: {interp} vs {}",
                    poly(x)
                );
            }
        }
    }

    #[test]
    fn duplicate_nodes_are_rejected() {
        assert!(NodeSet::new(vec![0.0, 0.5, 0.5, 1.0], 0).is_err());
        assert!(NodeSet::new(vec![0.0], 0).is_err());
    }
}
