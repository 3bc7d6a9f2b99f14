//! Edge D-colored graphs: D perfect matchings on a common vertex set
//! `0..2n`, together with their construction, random generation and
//! structural analysis (connectivity, melonic recognition).
//!
//! Colors are indexed from 0 in the Rust API; the JSON and text formats
//! list them in order, so color `c` here is the `(c+1)`-th matching there.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dsu::Dsu;
use crate::error::{Error, Result};
use crate::rng::seeded_rng;

/// Marker stored in a partner array for an unmatched vertex.
pub const UNMATCHED: usize = usize::MAX;

/// A set of disjoint vertex pairs on a ground set `0..ground_size`.
///
/// Stored as a partner array, so two matchings are equal exactly when they
/// contain the same pairs.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Matching {
    partner: Vec<usize>,
}

impl Matching {
    pub fn empty(ground_size: usize) -> Self {
        Self {
            partner: vec![UNMATCHED; ground_size],
        }
    }

    /// Builds a (possibly partial) matching, rejecting out-of-range
    /// vertices, loops and overlapping pairs.
    pub fn from_pairs<I>(ground_size: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut m = Self::empty(ground_size);
        for (u, v) in pairs {
            m.insert(u, v)?;
        }
        Ok(m)
    }

    /// Like [`Matching::from_pairs`] but additionally requires every vertex
    /// to be covered.
    pub fn perfect_from_pairs<I>(ground_size: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let m = Self::from_pairs(ground_size, pairs)?;
        if !m.is_perfect() {
            return Err(Error::InvalidMatching(format!(
                "{} pairs do not cover {} vertices",
                m.len(),
                ground_size
            )));
        }
        Ok(m)
    }

    /// `{{0,1},{2,3},…}` on `2n` vertices.
    pub fn canonical(n: usize) -> Self {
        let partner = (0..2 * n).map(|v| v ^ 1).collect();
        Self { partner }
    }

    /// Pairs every vertex `i < 2n` of a doubled graph with its copy `i + 2n`.
    pub fn copy_pairing(n: usize) -> Self {
        let two_n = 2 * n;
        let partner = (0..2 * two_n)
            .map(|v| if v < two_n { v + two_n } else { v - two_n })
            .collect();
        Self { partner }
    }

    pub(crate) fn from_partner_unchecked(partner: Vec<usize>) -> Self {
        Self { partner }
    }

    pub fn insert(&mut self, u: usize, v: usize) -> Result<()> {
        let g = self.partner.len();
        if u >= g || v >= g {
            return Err(Error::InvalidMatching(format!(
                "pair {{{u},{v}}} outside ground set of {g} vertices"
            )));
        }
        if u == v {
            return Err(Error::InvalidMatching(format!("loop at vertex {u}")));
        }
        if self.partner[u] != UNMATCHED || self.partner[v] != UNMATCHED {
            return Err(Error::InvalidMatching(format!(
                "pair {{{u},{v}}} overlaps an existing pair"
            )));
        }
        self.partner[u] = v;
        self.partner[v] = u;
        Ok(())
    }

    pub fn ground_size(&self) -> usize {
        self.partner.len()
    }

    /// Number of pairs.
    pub fn len(&self) -> usize {
        self.partner.iter().filter(|&&p| p != UNMATCHED).count() / 2
    }

    pub fn is_empty(&self) -> bool {
        self.partner.iter().all(|&p| p == UNMATCHED)
    }

    pub fn is_perfect(&self) -> bool {
        self.partner.iter().all(|&p| p != UNMATCHED)
    }

    pub fn partner(&self, v: usize) -> Option<usize> {
        match self.partner.get(v) {
            Some(&p) if p != UNMATCHED => Some(p),
            _ => None,
        }
    }

    /// Raw partner array; unmatched vertices hold [`UNMATCHED`].
    pub fn partners(&self) -> &[usize] {
        &self.partner
    }

    pub fn contains(&self, u: usize, v: usize) -> bool {
        self.partner(u) == Some(v)
    }

    /// Pairs `(u, v)` with `u < v`, sorted by `u`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.partner
            .iter()
            .enumerate()
            .filter(|&(u, &p)| p != UNMATCHED && u < p)
            .map(|(u, &p)| (u, p))
    }

    pub fn pair_list(&self) -> Vec<(usize, usize)> {
        self.pairs().collect()
    }
}

impl Ord for Matching {
    /// Ground size first, then lexicographic order of the sorted pair lists.
    fn cmp(&self, other: &Self) -> Ordering {
        self.ground_size()
            .cmp(&other.ground_size())
            .then_with(|| self.pairs().cmp(other.pairs()))
    }
}

impl PartialOrd for Matching {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Matching {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.pairs().map(|(u, v)| format!("{u}-{v}")).collect();
        f.write_str(&parts.join(","))
    }
}

/// D perfect matchings on the vertex set `0..2n`. Matchings may share
/// pairs; equality is equality of the ordered list of colors.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ColoredGraph {
    matchings: Vec<Matching>,
}

/// A connected component extracted as a standalone graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    pub graph: ColoredGraph,
    /// `vertex_map[local] = original`.
    pub vertex_map: Vec<usize>,
}

impl ColoredGraph {
    pub fn new(matchings: Vec<Matching>) -> Result<Self> {
        if matchings.is_empty() {
            return Err(Error::InvalidParameter("a graph needs at least one color".into()));
        }
        let ground = matchings[0].ground_size();
        if ground % 2 != 0 {
            return Err(Error::InvalidParameter(format!("odd number of vertices ({ground})")));
        }
        for (c, m) in matchings.iter().enumerate() {
            if m.ground_size() != ground {
                return Err(Error::NotPerfect {
                    color: c + 1,
                    reason: format!("ground set has {} vertices, expected {ground}", m.ground_size()),
                });
            }
            if !m.is_perfect() {
                return Err(Error::NotPerfect {
                    color: c + 1,
                    reason: format!("only {} of {} pairs present", m.len(), ground / 2),
                });
            }
        }
        Ok(Self { matchings })
    }

    /// One pair list per color.
    pub fn from_pairs(vertices: usize, colors: &[Vec<(usize, usize)>]) -> Result<Self> {
        let mut matchings = Vec::with_capacity(colors.len());
        for (c, pairs) in colors.iter().enumerate() {
            let m = Matching::from_pairs(vertices, pairs.iter().copied()).map_err(|e| Error::NotPerfect {
                color: c + 1,
                reason: e.to_string(),
            })?;
            matchings.push(m);
        }
        Self::new(matchings)
    }

    /// The unique graph on two vertices with all colors joining them.
    pub fn new_dipole(colors: usize) -> Result<Self> {
        if colors < 1 {
            return Err(Error::InvalidParameter("D must be at least 1".into()));
        }
        Ok(Self {
            matchings: vec![Matching::canonical(1); colors],
        })
    }

    pub fn colors(&self) -> usize {
        self.matchings.len()
    }

    pub fn half_order(&self) -> usize {
        self.vertex_count() / 2
    }

    pub fn vertex_count(&self) -> usize {
        self.matchings[0].ground_size()
    }

    pub fn matching(&self, color: usize) -> &Matching {
        &self.matchings[color]
    }

    pub fn matchings(&self) -> &[Matching] {
        &self.matchings
    }

    /// Number of colors joining `u` and `v`.
    pub fn multiplicity(&self, u: usize, v: usize) -> usize {
        self.matchings.iter().filter(|m| m.contains(u, v)).count()
    }

    /// Inserts two fresh vertices `u = 2n`, `v = 2n + 1` on the edge
    /// `{a, b}` of `color`: the edge becomes `{a, u}` and `{v, b}`, and `u`,
    /// `v` are joined by every other color.
    pub fn melon_insert(&self, color: usize, edge: (usize, usize)) -> Result<Self> {
        let d = self.colors();
        let (a, b) = edge;
        if color >= d || !self.matchings[color].contains(a, b) {
            return Err(Error::InvalidEdge {
                color: color + 1,
                u: a,
                v: b,
            });
        }
        let old = self.vertex_count();
        let (u, v) = (old, old + 1);
        let matchings = self
            .matchings
            .iter()
            .enumerate()
            .map(|(c, m)| {
                let mut p = m.partner.clone();
                p.extend([UNMATCHED, UNMATCHED]);
                if c == color {
                    p[a] = u;
                    p[u] = a;
                    p[b] = v;
                    p[v] = b;
                } else {
                    p[u] = v;
                    p[v] = u;
                }
                Matching { partner: p }
            })
            .collect();
        Ok(Self { matchings })
    }

    /// Graph with both vertex sets, `other` shifted by `2n` of `self`.
    pub fn disjoint_union(&self, other: &Self) -> Result<Self> {
        if self.colors() != other.colors() {
            return Err(Error::InvalidParameter(format!(
                "cannot unite graphs with {} and {} colors",
                self.colors(),
                other.colors()
            )));
        }
        let shift = self.vertex_count();
        let matchings = self
            .matchings
            .iter()
            .zip(&other.matchings)
            .map(|(a, b)| {
                let mut p = a.partner.clone();
                p.extend(b.partner.iter().map(|&x| x + shift));
                Matching { partner: p }
            })
            .collect();
        Ok(Self { matchings })
    }

    /// Left fold of [`ColoredGraph::disjoint_union`] over a non-empty list.
    pub fn disjoint_union_all(graphs: &[Self]) -> Result<Self> {
        let (first, rest) = graphs
            .split_first()
            .ok_or_else(|| Error::InvalidParameter("empty graph list".into()))?;
        rest.iter().try_fold(first.clone(), |acc, g| acc.disjoint_union(g))
    }

    /// Renames vertex `v` to `perm[v]`.
    pub fn permute_vertices(&self, perm: &[usize]) -> Result<Self> {
        let n = self.vertex_count();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::InvalidParameter("not a permutation of the vertex set".into()));
        }
        let matchings = self
            .matchings
            .iter()
            .map(|m| {
                let mut p = vec![UNMATCHED; n];
                for v in 0..n {
                    p[perm[v]] = perm[m.partner[v]];
                }
                Matching { partner: p }
            })
            .collect();
        Ok(Self { matchings })
    }

    /// Component label per vertex (numbered by smallest vertex) and the
    /// number of components.
    pub fn component_labels(&self) -> (Vec<usize>, usize) {
        let mut dsu = Dsu::new(self.vertex_count());
        for m in &self.matchings {
            for (u, v) in m.pairs() {
                dsu.union(u, v);
            }
        }
        dsu.labels()
    }

    pub fn component_count(&self) -> usize {
        self.component_labels().1
    }

    pub fn is_connected(&self) -> bool {
        self.component_count() == 1
    }

    /// Components in order of their smallest vertex, each relabelled
    /// densely in increasing order of original labels.
    pub fn connected_components(&self) -> Vec<Component> {
        let (labels, k) = self.component_labels();
        let mut maps: Vec<Vec<usize>> = vec![Vec::new(); k];
        let mut local = vec![0; self.vertex_count()];
        for (v, &l) in labels.iter().enumerate() {
            local[v] = maps[l].len();
            maps[l].push(v);
        }
        maps.into_iter()
            .map(|vertex_map| {
                let matchings = self
                    .matchings
                    .iter()
                    .map(|m| Matching {
                        partner: vertex_map.iter().map(|&v| local[m.partner[v]]).collect(),
                    })
                    .collect();
                Component {
                    graph: ColoredGraph { matchings },
                    vertex_map,
                }
            })
            .collect()
    }

    /// Number of vertex pairs joined by exactly `multiplicity` colors.
    pub fn count_dipoles(&self, multiplicity: usize) -> usize {
        let n = self.vertex_count();
        let mut count = 0;
        for u in 0..n {
            let mut seen: Vec<usize> = Vec::with_capacity(self.colors());
            for m in &self.matchings {
                let w = m.partner[u];
                if w > u && !seen.contains(&w) {
                    seen.push(w);
                    if self.multiplicity(u, w) == multiplicity {
                        count += 1;
                    }
                }
            }
        }
        count
    }

    /// Recognises melonic graphs by contracting `(D-1)`-dipoles until only
    /// `D`-dipoles remain.
    pub fn is_melonic(&self) -> Result<MelonicReport> {
        let d = self.colors();
        if d < 2 {
            return Err(Error::Unsupported("melonic recognition needs at least 2 colors".into()));
        }
        let n = self.vertex_count();
        let mut partner: Vec<Vec<usize>> = self.matchings.iter().map(|m| m.partner.clone()).collect();
        let mut alive = vec![true; n];
        let mut remaining = n;
        let mut trace = Vec::with_capacity(n / 2);
        let mut stack: Vec<usize> = (0..n).rev().collect();

        while let Some(u) = stack.pop() {
            if !alive[u] {
                continue;
            }
            let mut candidates = [partner[0][u], partner[1][u]];
            if candidates[0] == candidates[1] {
                candidates[1] = UNMATCHED;
            }
            for w in candidates.into_iter().filter(|&w| w != UNMATCHED) {
                let missing: Vec<usize> = (0..d).filter(|&c| partner[c][u] != w).collect();
                match missing.len() {
                    0 => {
                        alive[u] = false;
                        alive[w] = false;
                        remaining -= 2;
                        trace.push(ReductionStep {
                            pair: (u.min(w), u.max(w)),
                            kind: StepKind::Dipole,
                        });
                        break;
                    }
                    1 => {
                        let c = missing[0];
                        let (a, b) = (partner[c][u], partner[c][w]);
                        partner[c][a] = b;
                        partner[c][b] = a;
                        alive[u] = false;
                        alive[w] = false;
                        remaining -= 2;
                        trace.push(ReductionStep {
                            pair: (u.min(w), u.max(w)),
                            kind: StepKind::Contract { color: c },
                        });
                        stack.push(b);
                        stack.push(a);
                        break;
                    }
                    _ => {}
                }
            }
        }

        let is_melonic = remaining == 0;
        let canonical_pairing = if is_melonic {
            let mut p = vec![UNMATCHED; n];
            for step in &trace {
                let (u, w) = step.pair;
                p[u] = w;
                p[w] = u;
            }
            Some(Matching { partner: p })
        } else {
            None
        };
        Ok(MelonicReport {
            is_melonic,
            reduction_trace: trace,
            canonical_pairing,
        })
    }
}

/// One step of the melonic reduction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionStep {
    pub pair: (usize, usize),
    pub kind: StepKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    /// A `(D-1)`-dipole removed; the two edges of `color` were spliced.
    Contract { color: usize },
    /// A pair joined by all colors, removed as a whole component.
    Dipole,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MelonicReport {
    pub is_melonic: bool,
    /// Pairs in the order they were removed (contractions and dipoles).
    pub reduction_trace: Vec<ReductionStep>,
    /// Perfect matching pairing the vertices of every removed step;
    /// present exactly when the graph is melonic.
    pub canonical_pairing: Option<Matching>,
}

/// Number of perfect matchings on `2n` points, `(2n)! / (2^n n!)`.
pub fn count_matchings(n: u64) -> BigUint {
    (1..=n).fold(BigUint::from(1u32), |acc, k| acc * (2 * k - 1))
}

pub fn sample_perfect_matching<R: Rng + ?Sized>(two_n: usize, rng: &mut R) -> Result<Matching> {
    if two_n < 2 || two_n % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "perfect matchings need an even, positive vertex count (got {two_n})"
        )));
    }
    let mut order: Vec<usize> = (0..two_n).collect();
    order.shuffle(rng);
    let mut partner = vec![UNMATCHED; two_n];
    for pair in order.chunks_exact(2) {
        partner[pair[0]] = pair[1];
        partner[pair[1]] = pair[0];
    }
    Ok(Matching { partner })
}

/// Uniform perfect matching on `two_n` vertices, reproducible from `seed`.
pub fn random_perfect_matching(two_n: usize, seed: u64) -> Result<Matching> {
    sample_perfect_matching(two_n, &mut seeded_rng(seed))
}

pub fn sample_colored_graph<R: Rng + ?Sized>(colors: usize, n: usize, rng: &mut R) -> Result<ColoredGraph> {
    if colors < 1 || n < 1 {
        return Err(Error::InvalidParameter(format!(
            "need D >= 1 and n >= 1 (got D={colors}, n={n})"
        )));
    }
    let matchings = (0..colors)
        .map(|_| sample_perfect_matching(2 * n, rng))
        .collect::<Result<Vec<_>>>()?;
    Ok(ColoredGraph { matchings })
}

/// D independent uniform perfect matchings on `2n` labelled vertices.
pub fn random_colored_graph(colors: usize, n: usize, seed: u64) -> Result<ColoredGraph> {
    sample_colored_graph(colors, n, &mut seeded_rng(seed))
}

/// Connected melonic graph grown from the dipole by `insertions` random
/// insertions (uniform color, uniform edge of that color).
pub fn sample_melonic<R: Rng + ?Sized>(colors: usize, insertions: usize, rng: &mut R) -> Result<ColoredGraph> {
    let mut g = ColoredGraph::new_dipole(colors)?;
    for _ in 0..insertions {
        let c = rng.random_range(0..colors);
        let u = rng.random_range(0..g.vertex_count());
        let v = g.matching(c).partners()[u];
        g = g.melon_insert(c, (u, v))?;
    }
    Ok(g)
}

pub fn random_melonic(colors: usize, insertions: usize, seed: u64) -> Result<ColoredGraph> {
    sample_melonic(colors, insertions, &mut seeded_rng(seed))
}

/// Uniform graph conditioned on being connected (rejection sampling).
pub fn sample_connected_graph<R: Rng + ?Sized>(colors: usize, n: usize, rng: &mut R) -> Result<ColoredGraph> {
    if colors == 1 && n > 1 {
        return Err(Error::InvalidParameter(
            "a single color is connected only on two vertices".into(),
        ));
    }
    loop {
        let g = sample_colored_graph(colors, n, rng)?;
        if g.is_connected() {
            return Ok(g);
        }
    }
}

/// Named small instances used throughout the tests and docs.
pub mod named {
    use super::ColoredGraph;

    /// Four-vertex melon with three colors: one insertion on color 2 of the dipole.
    pub fn quartic_melon() -> ColoredGraph {
        ColoredGraph::from_pairs(4, &[vec![(0, 1), (2, 3)], vec![(0, 2), (1, 3)], vec![(0, 1), (2, 3)]])
            .expect("valid graph")
    }

    /// Two-colored 4-cycle, the invariant `Tr[(T T^t)^2]`.
    pub fn square() -> ColoredGraph {
        ColoredGraph::from_pairs(4, &[vec![(0, 1), (2, 3)], vec![(1, 2), (3, 0)]]).expect("valid graph")
    }

    /// Six vertices, three colors, no pair joined by two colors.
    pub fn hexagon_k33() -> ColoredGraph {
        ColoredGraph::from_pairs(
            6,
            &[
                vec![(0, 1), (2, 3), (4, 5)],
                vec![(1, 2), (3, 4), (5, 0)],
                vec![(0, 2), (1, 4), (3, 5)],
            ],
        )
        .expect("valid graph")
    }
}
