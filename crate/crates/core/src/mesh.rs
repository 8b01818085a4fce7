//! Nonuniform one-dimensional meshes on `[0, 1]`.
//!
//! Every constructor validates the node set once; downstream stencils
//! assume strictly positive spacings without rechecking.

use serde::{Deserialize, Serialize};

use crate::error::NumericsError;

/// Minimum node count. The one-sided boundary derivative needs three
/// nodes on each side.
pub const MIN_NODES: usize = 4;

/// Smallest logistic steepness accepted by [`Mesh::logistic`].
///
/// The logistic map compresses all interior nodes towards `x = 1/2` as
/// the steepness goes to zero; below this floor the first interior
/// spacing falls under [`LOGISTIC_MIN_SPACING`] for small meshes and the
/// mesh stops being useful long before monotonicity is lost in floating
/// point.
pub const LOGISTIC_GAMMA_FLOOR: f64 = 1e-3;

/// Spacings below this are treated as collided nodes.
pub const LOGISTIC_MIN_SPACING: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    nodes: Vec<f64>,
    spacings: Vec<f64>,
    midpoints: Vec<f64>,
}

/// Serializable description of a mesh, as found in run configurations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeshSpec {
    Uniform {
        n: usize,
    },
    Piecewise {
        breakpoints: Vec<f64>,
        counts: Vec<usize>,
    },
    Logistic {
        gamma: f64,
        n: usize,
    },
}

impl MeshSpec {
    pub fn build(&self) -> Result<Mesh, NumericsError> {
        match self {
            MeshSpec::Uniform { n } => Mesh::uniform(*n),
            MeshSpec::Piecewise {
                breakpoints,
                counts,
            } => Mesh::piecewise_uniform(breakpoints, counts),
            MeshSpec::Logistic { gamma, n } => Mesh::logistic(*gamma, *n),
        }
    }
}

impl Mesh {
    /// Validates and wraps an explicit node list.
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self, NumericsError> {
        let n = nodes.len();
        if n < MIN_NODES {
            return Err(NumericsError::InvalidArgument(format!(
                "mesh needs at least {MIN_NODES} nodes, got {n}"
            )));
        }
        if nodes[0] != 0.0 || nodes[n - 1] != 1.0 {
            return Err(NumericsError::InvalidArgument(
                "mesh must start at 0 and end at 1".into(),
            ));
        }
        let spacings: Vec<f64> = nodes.windows(2).map(|w| w[1] - w[0]).collect();
        if let Some(i) = spacings.iter().position(|&h| !(h > 0.0) || !h.is_finite()) {
            return Err(NumericsError::InvalidArgument(format!(
                "mesh nodes not strictly increasing at index {i}"
            )));
        }
        let midpoints = nodes.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        Ok(Mesh {
            nodes,
            spacings,
            midpoints,
        })
    }

    pub fn uniform(n: usize) -> Result<Self, NumericsError> {
        if n < MIN_NODES {
            return Err(NumericsError::InvalidArgument(format!(
                "mesh needs at least {MIN_NODES} nodes, got {n}"
            )));
        }
        let cells = (n - 1) as f64;
        let nodes = (0..n).map(|i| i as f64 / cells).collect();
        Self::from_nodes(nodes)
    }

    /// Uniform subdivision of each region `[b_k, b_{k+1}]`, where the
    /// region boundaries are `0`, the given breakpoints, and `1`.
    ///
    /// `counts[k]` is the number of cells in region `k`, so
    /// `counts.len() == breakpoints.len() + 1`.
    pub fn piecewise_uniform(breakpoints: &[f64], counts: &[usize]) -> Result<Self, NumericsError> {
        if counts.len() != breakpoints.len() + 1 {
            return Err(NumericsError::InvalidArgument(format!(
                "{} breakpoints need {} cell counts, got {}",
                breakpoints.len(),
                breakpoints.len() + 1,
                counts.len()
            )));
        }
        if counts.contains(&0) {
            return Err(NumericsError::InvalidArgument(
                "cell counts must be positive".into(),
            ));
        }
        let mut edges = Vec::with_capacity(breakpoints.len() + 2);
        edges.push(0.0);
        edges.extend_from_slice(breakpoints);
        edges.push(1.0);
        if edges.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(NumericsError::InvalidArgument(
                "breakpoints must be strictly increasing inside (0, 1)".into(),
            ));
        }

        let total: usize = counts.iter().sum();
        let mut nodes = Vec::with_capacity(total + 1);
        for (k, &cells) in counts.iter().enumerate() {
            let (a, b) = (edges[k], edges[k + 1]);
            // Shared endpoints belong to the region on their right.
            for j in 0..cells {
                nodes.push(a + (b - a) * (j as f64 / cells as f64));
            }
        }
        nodes.push(1.0);
        Self::from_nodes(nodes)
    }

    /// Logistic clustering towards both ends:
    /// `x_i = 1 / (1 + exp(-gamma (s_i - 1/2)))` at interior nodes with
    /// `s_i = (i - 1)/(N - 1)`, and `x_1 = 0`, `x_N = 1` pinned.
    ///
    /// The interior nodes are not rescaled, so the first and last cells
    /// are wider than their neighbours for moderate `gamma`.
    pub fn logistic(gamma: f64, n: usize) -> Result<Self, NumericsError> {
        if !(gamma >= LOGISTIC_GAMMA_FLOOR) || !gamma.is_finite() {
            return Err(NumericsError::InvalidArgument(format!(
                "logistic steepness must be at least {LOGISTIC_GAMMA_FLOOR}, got {gamma}"
            )));
        }
        if n < MIN_NODES {
            return Err(NumericsError::InvalidArgument(format!(
                "mesh needs at least {MIN_NODES} nodes, got {n}"
            )));
        }
        let ds = 1.0 / (n - 1) as f64;
        let mut nodes = Vec::with_capacity(n);
        nodes.push(0.0);
        for i in 1..n - 1 {
            let s = i as f64 * ds;
            nodes.push(1.0 / (1.0 + (-gamma * (s - 0.5)).exp()));
        }
        nodes.push(1.0);
        if nodes
            .windows(2)
            .any(|w| !(w[1] - w[0] > LOGISTIC_MIN_SPACING))
        {
            return Err(NumericsError::InvalidArgument(format!(
                "logistic steepness {gamma} collides nodes for N = {n}"
            )));
        }
        Self::from_nodes(nodes)
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

    /// `dx_i = x_{i+1} - x_i`, length `N - 1`.
    pub fn spacings(&self) -> &[f64] {
        &self.spacings
    }

    /// `x_{i+1/2}`, length `N - 1`.
    pub fn midpoints(&self) -> &[f64] {
        &self.midpoints
    }

    pub fn dx(&self, i: usize) -> f64 {
        self.spacings[i]
    }

    /// Width of the control volume around node `i`: half cells at the
    /// two ends, `x_{i+1/2} - x_{i-1/2}` inside.
    pub fn control_width(&self, i: usize) -> f64 {
        let n = self.len();
        if i == 0 {
            0.5 * self.spacings[0]
        } else if i == n - 1 {
            0.5 * self.spacings[n - 2]
        } else {
            self.midpoints[i] - self.midpoints[i - 1]
        }
    }

    /// Control-volume weights; they sum to one.
    pub fn control_widths(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.control_width(i)).collect()
    }

    /// `sum_i w_i u_i` with the control-volume weights.
    pub fn integrate(&self, u: &[f64]) -> f64 {
        assert_eq!(u.len(), self.len());
        u.iter()
            .enumerate()
            .map(|(i, v)| self.control_width(i) * v)
            .sum()
    }

    pub fn is_uniform(&self, tol: f64) -> bool {
        let h = self.spacings[0];
        self.spacings.iter().all(|d| (d - h).abs() <= tol * h)
    }

    pub fn min_spacing(&self) -> f64 {
        self.spacings.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn assert_invariants(m: &Mesh) {
        let x = m.nodes();
        assert_eq!(x[0], 0.0);
        assert_eq!(*x.last().unwrap(), 1.0);
        assert!(m.len() >= MIN_NODES);
        assert!(m.spacings().iter().all(|&h| h > 0.0));
        let total: f64 = m.spacings().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        let weights: f64 = m.control_widths().iter().sum();
        assert!((weights - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_five_nodes() {
        let m = Mesh::uniform(5).unwrap();
        assert_eq!(m.nodes(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn uniform_spacing_is_constant() {
        let m = Mesh::uniform(21).unwrap();
        for &h in m.spacings() {
            assert!((h - 0.05).abs() < 1e-15);
        }
    }

    #[test]
    fn too_few_nodes_rejected() {
        assert!(matches!(
            Mesh::uniform(3),
            Err(NumericsError::InvalidArgument(_))
        ));
    }

    #[test]
    fn piecewise_three_regions() {
        let m = Mesh::piecewise_uniform(&[0.1, 0.9], &[60, 60, 60]).unwrap();
        assert_eq!(m.len(), 181);
        assert_invariants(&m);
        assert!((m.dx(0) - 1.0 / 600.0).abs() < 1e-14);
        assert!((m.dx(59) - 1.0 / 600.0).abs() < 1e-14);
        assert!((m.dx(60) - 1.0 / 75.0).abs() < 1e-14);
        assert!((m.dx(119) - 1.0 / 75.0).abs() < 1e-14);
        assert!((m.dx(120) - 1.0 / 600.0).abs() < 1e-14);
        assert!((m.nodes()[60] - 0.1).abs() < 1e-15);
        assert!((m.nodes()[120] - 0.9).abs() < 1e-15);
    }

    #[test]
    fn piecewise_single_region_matches_uniform() {
        for n in [4usize, 7, 21, 91] {
            let a = Mesh::piecewise_uniform(&[], &[n - 1]).unwrap();
            let b = Mesh::uniform(n).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn piecewise_two_halves() {
        let m = Mesh::piecewise_uniform(&[0.5], &[2, 2]).unwrap();
        assert_eq!(m.nodes(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn piecewise_rejects_bad_breakpoints() {
        assert!(Mesh::piecewise_uniform(&[0.6, 0.4], &[2, 2, 2]).is_err());
        assert!(Mesh::piecewise_uniform(&[0.0, 0.4], &[2, 2, 2]).is_err());
        assert!(Mesh::piecewise_uniform(&[0.4, 1.0], &[2, 2, 2]).is_err());
        assert!(Mesh::piecewise_uniform(&[0.5], &[2]).is_err());
        assert!(Mesh::piecewise_uniform(&[0.5], &[2, 0]).is_err());
    }

    #[test]
    fn logistic_is_symmetric_about_half() {
        let m = Mesh::logistic(8.0, 5).unwrap();
        assert_eq!(m.nodes()[2], 0.5);
        assert!((m.nodes()[1] + m.nodes()[3] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn logistic_clusters_towards_ends() {
        let m = Mesh::logistic(10.0, 41).unwrap();
        assert_invariants(&m);
        // The first cell is pinned to x = 0, so compare the first
        // logistic-generated cell with the central one.
        assert!(m.dx(1) < m.dx(19));
        assert!(m.dx(38) < m.dx(20));
    }

    #[test]
    fn logistic_floor() {
        // Evaluate the map directly: as gamma shrinks the interior nodes
        // pile up at 1/2 and the interior spacings vanish.
        let n = 41;
        let spread = |gamma: f64| {
            let s1 = 1.0 / (n - 1) as f64;
            let x1 = 1.0 / (1.0 + (-gamma * (s1 - 0.5)).exp());
            let x2 = 1.0 / (1.0 + (-gamma * (2.0 * s1 - 0.5)).exp());
            x2 - x1
        };
        assert!(spread(1e-16) < LOGISTIC_MIN_SPACING);
        assert!(Mesh::logistic(1e-16, n).is_err());
        assert!(Mesh::logistic(0.0, n).is_err());
        assert!(Mesh::logistic(-1.0, n).is_err());
        assert!(Mesh::logistic(LOGISTIC_GAMMA_FLOOR / 2.0, n).is_err());
        assert!(Mesh::logistic(LOGISTIC_GAMMA_FLOOR, n).is_ok());
    }

    #[test]
    fn logistic_collision_for_huge_gamma() {
        // exp overflow saturates the end nodes at 0 and 1.
        assert!(Mesh::logistic(5000.0, 41).is_err());
    }

    proptest! {
        #[test]
        fn constructors_satisfy_invariants(
            n in 4usize..300,
            gamma in 0.01f64..40.0,
            raw in proptest::collection::vec(0.01f64..1.0, 0..5),
            counts in proptest::collection::vec(3usize..40, 6),
        ) {
            assert_invariants(&Mesh::uniform(n).unwrap());
            if let Ok(m) = Mesh::logistic(gamma, n) {
                assert_invariants(&m);
            }
            let mut bps: Vec<f64> = raw.clone();
            bps.sort_by(|a, b| a.partial_cmp(b).unwrap());
            bps.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
            bps.retain(|&b| b < 0.99);
            let c = &counts[..bps.len() + 1];
            let m = Mesh::piecewise_uniform(&bps, c).unwrap();
            assert_invariants(&m);
        }
    }
}
