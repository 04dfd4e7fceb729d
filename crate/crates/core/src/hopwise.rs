//! Link weights, link-state storage and the hopwise update kernel shared by
//! the random, ideal-controlled and controlled hopwise algorithms.
//!
//! Every link `{i, j}` carries a weight `c` and a state value. The value is
//! mirrored at both endpoints (`x_lo` is the copy held by the lower-indexed
//! endpoint, `x_hi` by the higher one). A node's estimate is the
//! `c`-weighted mean of its incident link values and its potential drop
//! `dv_i = sum_j c_ij (x_ij - xhat_i)^2` is the exact decrease of the
//! Lyapunov value `V = sum_links c (x - x*)^2` if node `i` broadcast now.

use crate::error::AlgorithmError;
use crate::graph::{Graph, LinkId, NodeId};
use crate::numeric::{compensated_mean, compensated_sum};

/// Largest link count accepted by [`update_matrix`].
pub const MAX_MATRIX_LINKS: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct Weights {
    c: Vec<f64>,
    b: Vec<f64>,
    alpha: f64,
    beta: f64,
}

impl Weights {
    /// `c_ij = 1/|N_i| + 1/|N_j|`, so every node spreads a unit of weight
    /// evenly over its links and the weights sum to `n`.
    pub fn compute(g: &Graph) -> Self {
        let inv_deg: Vec<f64> = (0..g.n()).map(|i| 1.0 / g.degree(i) as f64).collect();
        let c: Vec<f64> = g
            .links()
            .iter()
            .map(|&(u, v)| inv_deg[u] + inv_deg[v])
            .collect();
        // b_i = (1 + sum_j 1/|N_j|) / 2, with the sum taken per distinct
        // neighbor degree so regular graphs come out exact
        let b: Vec<f64> = (0..g.n())
            .map(|i| {
                let mut degs: Vec<usize> = g.neighbors(i).iter().map(|&(j, _)| g.degree(j)).collect();
                degs.sort_unstable();
                let mut sum = 0.0;
                for run in degs.chunk_by(|a, b| a == b) {
                    sum += run.len() as f64 / run[0] as f64;
                }
                0.5 * (1.0 + sum)
            })
            .collect();
        let alpha = g
            .links()
            .iter()
            .map(|&(u, v)| {
                let (du, dv) = (g.degree(u) as f64, g.degree(v) as f64);
                (b[u] + b[v]) * du * dv / (du + dv)
            })
            .fold(f64::NEG_INFINITY, f64::max);
        let beta = (0..g.n())
            .map(|i| b[i] * (b[i] + g.neighbors(i).iter().map(|&(j, _)| b[j]).sum::<f64>()))
            .sum();
        Weights { c, b, alpha, beta }
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    /// Half of each node's incident weight sum.
    pub fn b(&self) -> &[f64] {
        &self.b
    }

    /// `max over links of (b_i + b_j) / c_ij`.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `sum_i sum_{j in N_i + i} b_i b_j`.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Sum of incident weights at node `i` (equals `2 b_i`).
    fn incident_weight(&self, g: &Graph, i: NodeId) -> f64 {
        g.neighbors(i).iter().map(|&(_, e)| self.c[e]).sum()
    }
}

/// What a single hopwise broadcast did.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateReceipt {
    pub initiator: NodeId,
    pub transmitted_value: f64,
    /// Potential drop of the initiator before the update; `V` fell by this.
    pub v_drop: f64,
    pub transmissions: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HopwiseState {
    y: Vec<f64>,
    x_lo: Vec<f64>,
    x_hi: Vec<f64>,
    x_hat: Vec<f64>,
    delta_v: Vec<f64>,
    // instrumentation only; no algorithm step reads it
    x_star: f64,
}

impl HopwiseState {
    /// Each node spreads its observation evenly over its links:
    /// `x_ij(0) = (y_i/|N_i| + y_j/|N_j|) / c_ij`.
    pub fn init(g: &Graph, w: &Weights, y: &[f64]) -> Result<Self, AlgorithmError> {
        if y.len() != g.n() {
            return Err(AlgorithmError::ObservationLength {
                expected: g.n(),
                got: y.len(),
            });
        }
        let x0: Vec<f64> = g
            .links()
            .iter()
            .enumerate()
            .map(|(e, &(u, v))| {
                (y[u] / g.degree(u) as f64 + y[v] / g.degree(v) as f64) / w.c[e]
            })
            .collect();
        let mut state = HopwiseState {
            y: y.to_vec(),
            x_lo: x0.clone(),
            x_hi: x0,
            x_hat: vec![0.0; g.n()],
            delta_v: vec![0.0; g.n()],
            x_star: compensated_mean(y),
        };
        for i in 0..g.n() {
            state.refresh_node(g, w, i);
        }
        Ok(state)
    }

    /// The copy of link `e` held by endpoint `i`.
    fn copy(&self, g: &Graph, i: NodeId, e: LinkId) -> f64 {
        if g.link(e).0 == i {
            self.x_lo[e]
        } else {
            self.x_hi[e]
        }
    }

    fn refresh_node(&mut self, g: &Graph, w: &Weights, i: NodeId) {
        self.x_hat[i] = self.estimate(g, w, i);
        self.delta_v[i] = self.potential_drop(g, w, i, self.x_hat[i]);
    }

    /// Recomputes node `i`'s estimate from its local copies.
    pub fn estimate(&self, g: &Graph, w: &Weights, i: NodeId) -> f64 {
        let nbrs = g.neighbors(i);
        let first = self.copy(g, i, nbrs[0].1);
        // agreeing copies must give a zero drop, which rounding in the
        // weighted mean would not guarantee
        if nbrs.iter().all(|&(_, e)| self.copy(g, i, e) == first) {
            return first;
        }
        let num: f64 = g
            .neighbors(i)
            .iter()
            .map(|&(_, e)| w.c[e] * self.copy(g, i, e))
            .sum();
        num / w.incident_weight(g, i)
    }

    fn potential_drop(&self, g: &Graph, w: &Weights, i: NodeId, x_hat: f64) -> f64 {
        g.neighbors(i)
            .iter()
            .map(|&(_, e)| {
                let d = self.copy(g, i, e) - x_hat;
                w.c[e] * d * d
            })
            .sum()
    }

    /// Recomputes node `i`'s potential drop from its local copies.
    pub fn delta_v(&self, g: &Graph, w: &Weights, i: NodeId) -> f64 {
        self.potential_drop(g, w, i, self.estimate(g, w, i))
    }

    /// Cached estimates, one per node.
    pub fn estimates(&self) -> &[f64] {
        &self.x_hat
    }

    /// Cached potential drops, one per node.
    pub fn potential_drops(&self) -> &[f64] {
        &self.delta_v
    }

    pub fn cached_estimate(&self, i: NodeId) -> f64 {
        self.x_hat[i]
    }

    pub fn cached_delta_v(&self, i: NodeId) -> f64 {
        self.delta_v[i]
    }

    /// Link values as seen by the lower-indexed endpoint.
    pub fn link_values(&self) -> &[f64] {
        &self.x_lo
    }

    pub fn link_copies(&self, e: LinkId) -> (f64, f64) {
        (self.x_lo[e], self.x_hi[e])
    }

    pub fn observations(&self) -> &[f64] {
        &self.y
    }

    /// The true average. Reserved for diagnostics and convergence checks.
    pub fn oracle_average(&self) -> f64 {
        self.x_star
    }

    #[cfg(test)]
    pub(crate) fn poison_oracle(&mut self) {
        self.x_star = f64::NAN;
    }

    /// `V = sum_links c (x - x*)^2`.
    pub fn lyapunov(&self, w: &Weights) -> f64 {
        let xs = self.x_star;
        compensated_sum(self.x_lo.iter().zip(&w.c).map(|(&x, &c)| {
            let d = x - xs;
            c * d * d
        }))
    }

    /// Right-hand side of `V = 1/2 sum_i dv_i + sum_i b_i (xhat_i - x*)^2`,
    /// evaluated from the cached estimates and drops.
    pub fn lyapunov_decomposition(&self, w: &Weights) -> f64 {
        let xs = self.x_star;
        let drops = 0.5 * compensated_sum(self.delta_v.iter().copied());
        let spread = compensated_sum(self.x_hat.iter().zip(&w.b).map(|(&xh, &b)| {
            let d = xh - xs;
            b * d * d
        }));
        drops + spread
    }

    /// `sum_links c x`; invariant under every hopwise update.
    pub fn conserved_sum(&self, w: &Weights) -> f64 {
        compensated_sum(self.x_lo.iter().zip(&w.c).map(|(&x, &c)| c * x))
    }

    /// Both endpoint copies of every link are bit-identical.
    pub fn copies_coherent(&self) -> bool {
        self.x_lo
            .iter()
            .zip(&self.x_hi)
            .all(|(a, b)| a.to_bits() == b.to_bits())
    }

    /// Largest relative gap between the cached estimates/drops and their
    /// from-scratch recomputation. The drop gap is measured against the
    /// scale of the node's squared link deviations.
    pub fn cache_deviation(&self, g: &Graph, w: &Weights) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..g.n() {
            let xh = self.estimate(g, w, i);
            let scale = xh.abs().max(self.x_hat[i].abs()).max(f64::MIN_POSITIVE);
            worst = worst.max((xh - self.x_hat[i]).abs() / scale);

            let dv = self.potential_drop(g, w, i, xh);
            let spread: f64 = g
                .neighbors(i)
                .iter()
                .map(|&(_, e)| {
                    let x = self.copy(g, i, e);
                    w.c[e] * x * x
                })
                .sum();
            let scale = dv.max(self.delta_v[i]).max(spread * f64::EPSILON).max(f64::MIN_POSITIVE);
            worst = worst.max((dv - self.delta_v[i]).abs() / scale);
        }
        worst
    }

    /// Node `i` replaces every incident link value with its estimate and
    /// broadcasts that value once; each neighbor stores it and refreshes its
    /// own estimate and drop. Nothing outside `N_i + i` changes.
    pub fn hopwise_update(&mut self, g: &Graph, w: &Weights, i: NodeId) -> UpdateReceipt {
        let value = self.x_hat[i];
        let v_drop = self.delta_v[i];
        for &(_, e) in g.neighbors(i) {
            self.x_lo[e] = value;
            self.x_hi[e] = value;
        }
        self.delta_v[i] = 0.0;
        for &(j, _) in g.neighbors(i) {
            self.refresh_node(g, w, j);
        }
        UpdateReceipt {
            initiator: i,
            transmitted_value: value,
            v_drop,
            transmissions: 1,
        }
    }
}

/// Dense `L x L` matrix `A_i` with `x(k) = A_i x(k-1)` when node `i`
/// initiates. Rows of links incident to `i` hold the normalized incident
/// weights; all other rows are identity rows.
pub fn update_matrix(g: &Graph, w: &Weights, i: NodeId) -> Result<Vec<Vec<f64>>, AlgorithmError> {
    let l = g.num_links();
    if l > MAX_MATRIX_LINKS {
        return Err(AlgorithmError::MatrixTooLarge(l, MAX_MATRIX_LINKS));
    }
    let total = w.incident_weight(g, i);
    let mut mixing = vec![0.0; l];
    for &(_, e) in g.neighbors(i) {
        mixing[e] = w.c[e] / total;
    }
    let mut a = vec![vec![0.0; l]; l];
    for (e, row) in a.iter_mut().enumerate() {
        row[e] = 1.0;
    }
    for &(_, e) in g.neighbors(i) {
        a[e].clone_from(&mixing);
    }
    Ok(a)
}
