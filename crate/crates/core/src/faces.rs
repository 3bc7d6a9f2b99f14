//! Faces (bicolored alternating cycles), the degree ω, boundary graphs of
//! partial pairings and the three-color Euler count.

use serde::Serialize;

use crate::dsu::Dsu;
use crate::error::{Error, Result};
use crate::graph::{ColoredGraph, Matching, UNMATCHED};

/// Number of components of `A ∪ B`; a pair present in both is a 2-cycle.
pub fn count_bicolored_cycles(a: &Matching, b: &Matching) -> Result<usize> {
    if a.ground_size() != b.ground_size() {
        return Err(Error::GroundMismatch {
            left: a.ground_size(),
            right: b.ground_size(),
        });
    }
    if !a.is_perfect() || !b.is_perfect() {
        return Err(Error::InvalidMatching("face counting needs perfect matchings".into()));
    }
    Ok(cycles_between(a.partners(), b.partners()))
}

pub(crate) fn cycles_between(a: &[usize], b: &[usize]) -> usize {
    let mut seen = vec![false; a.len()];
    let mut cycles = 0;
    for start in 0..a.len() {
        if seen[start] {
            continue;
        }
        cycles += 1;
        let mut x = start;
        loop {
            seen[x] = true;
            let y = a[x];
            seen[y] = true;
            x = b[y];
            if x == start {
                break;
            }
        }
    }
    cycles
}

/// Face counts of the pairing `M⁰` against every color of a graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FaceCount {
    pub per_color: Vec<usize>,
    pub total: usize,
    /// Degree relative to the scaling bound; `None` when both the graph
    /// and `G(M⁰, 𝐌)` are disconnected.
    pub omega: Option<i64>,
    /// Whether the `(D+1)`-colored graph `G(M⁰, 𝐌)` is connected.
    pub g_connected: bool,
}

pub fn total_faces(m0: &Matching, g: &ColoredGraph) -> Result<FaceCount> {
    if m0.ground_size() != g.vertex_count() {
        return Err(Error::GroundMismatch {
            left: m0.ground_size(),
            right: g.vertex_count(),
        });
    }
    if !m0.is_perfect() {
        return Err(Error::InvalidMatching("M⁰ must be a perfect matching".into()));
    }
    let per_color: Vec<usize> = g
        .matchings()
        .iter()
        .map(|m| cycles_between(m0.partners(), m.partners()))
        .collect();
    let total: usize = per_color.iter().sum();

    let mut dsu = Dsu::new(g.vertex_count());
    for m in g.matchings().iter().chain(std::iter::once(m0)) {
        for (u, v) in m.pairs() {
            dsu.union(u, v);
        }
    }
    let g_connected = dsu.labels().1 <= 1;
    let q = g.component_count() as i64;
    let d = g.colors() as i64;
    let n = g.half_order() as i64;
    let f = total as i64;
    let omega = if q <= 1 {
        Some(1 + (d - 1) * n - f)
    } else if g_connected {
        Some(d - (d - 1) * q + (d - 1) * n - f)
    } else {
        None
    };
    Ok(FaceCount {
        per_color,
        total,
        omega,
        g_connected,
    })
}

/// The alternating-path structure of a graph relative to a growing
/// partial pairing `M̄⁰`.
///
/// For every color the free vertices are paired by the endpoints of the
/// alternating paths ("boundary edges"). Absorbing a pair `{u, v}` into
/// `M̄⁰` closes a cycle in color `c` when `u` and `v` are the two ends of
/// the same boundary edge, and otherwise splices the two boundary edges
/// through `u` and `v` into one. Partner arrays are flat, so absorbing is
/// `O(D)` and cloning a state is one allocation per field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryState {
    colors: usize,
    vertices: usize,
    boundary: Vec<usize>,
    closed: Vec<usize>,
    absorbed: Vec<usize>,
    free_count: usize,
}

impl BoundaryState {
    pub fn new(g: &ColoredGraph) -> Self {
        let vertices = g.vertex_count();
        let boundary = g
            .matchings()
            .iter()
            .flat_map(|m| m.partners().iter().copied())
            .collect();
        Self {
            colors: g.colors(),
            vertices,
            boundary,
            closed: vec![0; g.colors()],
            absorbed: vec![UNMATCHED; vertices],
            free_count: vertices,
        }
    }

    pub fn colors(&self) -> usize {
        self.colors
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn is_free(&self, v: usize) -> bool {
        v < self.vertices && self.absorbed[v] == UNMATCHED
    }

    pub fn free_count(&self) -> usize {
        self.free_count
    }

    pub fn free_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.vertices).filter(|&v| self.absorbed[v] == UNMATCHED)
    }

    /// Smallest free vertex, if any.
    pub fn first_free(&self) -> Option<usize> {
        self.absorbed.iter().position(|&p| p == UNMATCHED)
    }

    /// Far end of the boundary edge of `color` at the free vertex `v`.
    pub fn boundary_partner(&self, color: usize, v: usize) -> Option<usize> {
        if color < self.colors && self.is_free(v) {
            Some(self.boundary[color * self.vertices + v])
        } else {
            None
        }
    }

    pub(crate) fn boundary_row(&self, color: usize) -> &[usize] {
        &self.boundary[color * self.vertices..(color + 1) * self.vertices]
    }

    pub fn closed_per_color(&self) -> &[usize] {
        &self.closed
    }

    pub fn total_closed(&self) -> usize {
        self.closed.iter().sum()
    }

    pub fn absorbed(&self) -> Matching {
        Matching::from_partner_unchecked(self.absorbed.clone())
    }

    /// Adds `{u, v}` to `M̄⁰`; returns which colors closed a cycle.
    pub fn absorb(&mut self, u: usize, v: usize) -> Result<Vec<bool>> {
        if u == v {
            return Err(Error::InvalidMatching(format!("loop at vertex {u}")));
        }
        for x in [u, v] {
            if !self.is_free(x) {
                return Err(Error::NotFree(x));
            }
        }
        let mask = self.absorb_unchecked(u, v);
        Ok((0..self.colors).map(|c| mask >> c & 1 == 1).collect())
    }

    /// Functional form of [`BoundaryState::absorb`].
    pub fn with_pair(&self, u: usize, v: usize) -> Result<(Self, Vec<bool>)> {
        let mut next = self.clone();
        let closed = next.absorb(u, v)?;
        Ok((next, closed))
    }

    /// Bit `c` of the result is set when color `c` closed. Needs `u != v`,
    /// both free, and at most 128 colors.
    pub(crate) fn absorb_unchecked(&mut self, u: usize, v: usize) -> u128 {
        let mut mask = 0u128;
        let stride = self.vertices;
        for c in 0..self.colors {
            let row = c * stride;
            let pu = self.boundary[row + u];
            if pu == v {
                self.closed[c] += 1;
                mask |= 1 << c;
            } else {
                let pv = self.boundary[row + v];
                self.boundary[row + pu] = pv;
                self.boundary[row + pv] = pu;
            }
        }
        self.absorbed[u] = v;
        self.absorbed[v] = u;
        self.free_count -= 2;
        mask
    }

    /// Undoes the most recent `absorb_unchecked(u, v)` that returned `mask`.
    pub(crate) fn retract(&mut self, u: usize, v: usize, mask: u128) {
        let stride = self.vertices;
        for c in 0..self.colors {
            let row = c * stride;
            if mask >> c & 1 == 1 {
                self.closed[c] -= 1;
            } else {
                let pu = self.boundary[row + u];
                let pv = self.boundary[row + v];
                self.boundary[row + pu] = u;
                self.boundary[row + pv] = v;
            }
        }
        self.absorbed[u] = UNMATCHED;
        self.absorbed[v] = UNMATCHED;
        self.free_count += 2;
    }

    /// The boundary graph on the free vertices, relabelled densely in
    /// increasing order.
    pub fn to_graph(&self) -> BoundaryGraph {
        let vertex_map: Vec<usize> = self.free_vertices().collect();
        let mut local = vec![UNMATCHED; self.vertices];
        for (i, &v) in vertex_map.iter().enumerate() {
            local[v] = i;
        }
        let matchings = (0..self.colors)
            .map(|c| {
                let row = self.boundary_row(c);
                Matching::from_partner_unchecked(vertex_map.iter().map(|&v| local[row[v]]).collect())
            })
            .collect();
        BoundaryGraph {
            graph: ColoredGraph::new(matchings).expect("boundary edges pair the free vertices"),
            vertex_map,
        }
    }
}

/// Boundary graph with its vertices relabelled; `vertex_map[local] = original`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundaryGraph {
    pub graph: ColoredGraph,
    pub vertex_map: Vec<usize>,
}

/// Folds [`BoundaryState::absorb`] over the pairs of `partial`.
pub fn boundary_graph(g: &ColoredGraph, partial: &Matching) -> Result<BoundaryGraph> {
    if partial.ground_size() != g.vertex_count() {
        return Err(Error::GroundMismatch {
            left: partial.ground_size(),
            right: g.vertex_count(),
        });
    }
    let mut state = BoundaryState::new(g);
    for (u, v) in partial.pairs() {
        state.absorb(u, v)?;
    }
    Ok(state.to_graph())
}

/// Face counts of a three-colored graph seen as a ribbon graph whose faces
/// are the bicolored cycles.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EulerReport {
    /// Faces of the color pairs (1,2), (1,3), (2,3).
    pub pair_faces: [usize; 3],
    pub total_faces: usize,
    /// `V - E + F = total_faces - n`.
    pub chi: i64,
    pub components: usize,
    /// `total_faces == n + 2q`.
    pub is_planar: bool,
}

pub fn euler_d3(g: &ColoredGraph) -> Result<EulerReport> {
    if g.colors() != 3 {
        return Err(Error::Unsupported(format!(
            "Euler count is defined for 3 colors (got {})",
            g.colors()
        )));
    }
    let m = g.matchings();
    let f = |i: usize, j: usize| cycles_between(m[i].partners(), m[j].partners());
    let pair_faces = [f(0, 1), f(0, 2), f(1, 2)];
    let total_faces: usize = pair_faces.iter().sum();
    let n = g.half_order();
    let components = g.component_count();
    Ok(EulerReport {
        pair_faces,
        total_faces,
        chi: total_faces as i64 - n as i64,
        components,
        is_planar: total_faces == n + 2 * components,
    })
}
