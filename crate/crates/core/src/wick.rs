//! Gaussian expectations and cumulants of trace invariants as Laurent
//! polynomials in N, the Gaussian scaling `max F(M⁰, 𝐌)` by
//! branch-and-bound, and the factorization / subadditivity verdicts.
//!
//! Both the exhaustive enumeration and the search walk partial pairings in
//! a canonical order: the smallest free vertex is paired with each larger
//! free vertex in increasing order. Every perfect matching is visited once,
//! and the visiting order is the lexicographic order of sorted pair lists.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};

use num_bigint::BigInt;
use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dsu::{Dsu, RollbackDsu};
use crate::error::{Error, Result};
use crate::faces::{cycles_between, total_faces, BoundaryState};
use crate::graph::{count_matchings, ColoredGraph, Matching, UNMATCHED};
use crate::poly::{Exponent, LaurentPoly};

/// Admissible upper bound used to prune the scaling search.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PruneBound {
    /// `closed + D · remaining_pairs`.
    Simple,
    /// `closed + q_∂ + (D−1) · remaining_pairs`, minus `D (k−1)` when the
    /// final graph must connect `k` current components; `q_∂` counts the
    /// components of the boundary graph.
    #[default]
    Degree,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchConfig {
    /// Largest vertex count accepted by the exhaustive enumeration.
    pub max_histogram_vertices: usize,
    /// Largest vertex count accepted by the scaling search.
    pub max_scaling_vertices: usize,
    /// Abort the scaling search after this many nodes; the result is then
    /// a lower bound.
    pub node_limit: Option<u64>,
    pub bound: PruneBound,
    pub parallel: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            max_histogram_vertices: 20,
            max_scaling_vertices: 20,
            node_limit: None,
            bound: PruneBound::Degree,
            parallel: true,
        }
    }
}

impl SearchConfig {
    pub fn sequential() -> Self {
        Self {
            parallel: false,
            ..Self::default()
        }
    }

    pub fn with_vertex_cap(mut self, cap: usize) -> Self {
        self.max_histogram_vertices = cap;
        self.max_scaling_vertices = cap;
        self
    }
}

/// Number of Wick pairings attaining each face count.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FaceHistogram {
    pub n: usize,
    #[serde(rename = "D")]
    pub colors: usize,
    pub connected_only: bool,
    pub counts: BTreeMap<usize, u64>,
}

impl FaceHistogram {
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn max_faces(&self) -> Option<usize> {
        self.counts.keys().next_back().copied()
    }
}

/// `⟨Tr⟩ = N^{−νn} Σ_F count(F) N^F`, stored with exact exponents `F − νn`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExpectationPoly {
    #[serde(serialize_with = "ser_ratio")]
    pub nu: Exponent,
    pub n: usize,
    #[serde(rename = "terms")]
    pub poly: LaurentPoly,
}

fn ser_ratio<S: serde::Serializer>(r: &Exponent, s: S) -> std::result::Result<S::Ok, S::Error> {
    (*r.numer(), *r.denom()).serialize(s)
}

impl ExpectationPoly {
    pub fn from_histogram(hist: &FaceHistogram, nu: Exponent) -> Self {
        let shift = nu * Exponent::from_integer(hist.n as i64);
        let mut poly = LaurentPoly::default();
        for (&f, &count) in &hist.counts {
            poly.add_term(Exponent::from_integer(f as i64) - shift, BigInt::from(count));
        }
        Self { nu, n: hist.n, poly }
    }

    pub fn leading_exponent(&self) -> Option<Exponent> {
        self.poly.leading_exponent()
    }

    pub fn eval(&self, big_n: f64) -> f64 {
        self.poly.eval(big_n)
    }
}

/// The conventional covariance scaling `ν = D − 1`.
pub fn default_nu(colors: usize) -> Exponent {
    Exponent::from_integer(colors as i64 - 1)
}

/// Parses `"2"`, `"-1"` or `"3/2"`.
pub fn parse_nu(s: &str) -> Result<Exponent> {
    let bad = || Error::Parse(format!("invalid rational '{s}'"));
    match s.split_once('/') {
        Some((a, b)) => {
            let num: i64 = a.trim().parse().map_err(|_| bad())?;
            let den: i64 = b.trim().parse().map_err(|_| bad())?;
            if den == 0 {
                return Err(bad());
            }
            Ok(Ratio::new(num, den))
        }
        None => Ok(Exponent::from_integer(s.trim().parse().map_err(|_| bad())?)),
    }
}

/// Exact maximum of `F(M⁰, 𝐌)` with the number of maximizers.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ScalingReport {
    #[serde(rename = "F_max")]
    pub f_max: usize,
    pub num_optimal: u64,
    /// Lexicographically least optimal pairing.
    #[serde(serialize_with = "ser_matching")]
    pub witness: Matching,
    pub omega_min: Option<i64>,
    pub connected_only: bool,
    /// False when the node limit stopped the search; `f_max` is then only
    /// a lower bound and `num_optimal` is meaningless.
    pub exact: bool,
}

pub(crate) fn ser_matching<S: serde::Serializer>(m: &Matching, s: S) -> std::result::Result<S::Ok, S::Error> {
    m.pair_list().serialize(s)
}

/// Mutable walk state: boundary structure, pairs chosen so far, and the
/// merging of the graph's components by those pairs.
#[derive(Clone)]
struct Walker {
    colors: usize,
    state: BoundaryState,
    comp_of: Vec<usize>,
    components: RollbackDsu,
    connected_only: bool,
    pairs: Vec<(usize, usize)>,
    uf: Vec<usize>,
    stamp: Vec<u32>,
    generation: u32,
}

impl Walker {
    fn new(g: &ColoredGraph, connected_only: bool) -> Self {
        let (comp_of, q) = g.component_labels();
        Self {
            colors: g.colors(),
            state: BoundaryState::new(g),
            comp_of,
            components: RollbackDsu::new(q),
            connected_only,
            pairs: Vec::with_capacity(g.half_order()),
            uf: (0..g.vertex_count()).collect(),
            stamp: vec![0; q.max(1)],
            generation: 0,
        }
    }

    fn push(&mut self, u: usize, v: usize) -> u128 {
        let mask = self.state.absorb_unchecked(u, v);
        self.components.union(self.comp_of[u], self.comp_of[v]);
        self.pairs.push((u, v));
        mask
    }

    fn pop(&mut self, mask: u128) {
        let (u, v) = self.pairs.pop().expect("pop after push");
        self.components.rollback();
        self.state.retract(u, v, mask);
    }

    fn leaf_ok(&self) -> bool {
        !self.connected_only || self.components.sets() <= 1
    }

    fn witness(&self, vertices: usize) -> Matching {
        let mut p = vec![UNMATCHED; vertices];
        for &(u, v) in &self.pairs {
            p[u] = v;
            p[v] = u;
        }
        Matching::from_partner_unchecked(p)
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.uf[x] != x {
            self.uf[x] = self.uf[self.uf[x]];
            x = self.uf[x];
        }
        x
    }

    /// Upper bound on the final face count below this node, or `None` when
    /// no completion can satisfy the connectivity requirement.
    fn degree_bound(&mut self) -> Option<i64> {
        let closed = self.state.total_closed() as i64;
        let free = self.state.free_count();
        let r = (free / 2) as i64;
        let d = self.colors as i64;
        let vertices = self.state.vertex_count();

        let mut boundary_components = free as i64;
        for v in 0..vertices {
            if self.state.is_free(v) {
                self.uf[v] = v;
            }
        }
        for c in 0..self.colors {
            for v in 0..vertices {
                if !self.state.is_free(v) {
                    continue;
                }
                let p = self.state.boundary_row(c)[v];
                if v < p {
                    let (a, b) = (self.find(v), self.find(p));
                    if a != b {
                        self.uf[a.max(b)] = a.min(b);
                        boundary_components -= 1;
                    }
                }
            }
        }

        let mut bound = closed + boundary_components + (d - 1) * r;
        if self.connected_only {
            let k_total = self.components.sets();
            if k_total > 1 {
                self.generation = self.generation.wrapping_add(1);
                if self.generation == 0 {
                    self.stamp.iter_mut().for_each(|s| *s = 0);
                    self.generation = 1;
                }
                let mut k_free = 0;
                for v in 0..vertices {
                    if self.state.is_free(v) {
                        let root = self.components.find(self.comp_of[v]);
                        if self.stamp[root] != self.generation {
                            self.stamp[root] = self.generation;
                            k_free += 1;
                        }
                    }
                }
                if k_free < k_total {
                    return None;
                }
                bound -= d * (k_total as i64 - 1);
            }
        }
        Some(bound)
    }
}

/// Partial pairings of the first `depth` levels, in canonical order.
fn prefixes(g: &ColoredGraph, depth: usize) -> Vec<Vec<(usize, usize)>> {
    fn rec(free: &mut Vec<bool>, depth: usize, cur: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        let Some(v) = free.iter().position(|&f| f) else {
            out.push(cur.clone());
            return;
        };
        if depth == 0 {
            out.push(cur.clone());
            return;
        }
        free[v] = false;
        for w in v + 1..free.len() {
            if free[w] {
                free[w] = false;
                cur.push((v, w));
                rec(free, depth - 1, cur, out);
                cur.pop();
                free[w] = true;
            }
        }
        free[v] = true;
    }
    let mut out = Vec::new();
    rec(&mut vec![true; g.vertex_count()], depth, &mut Vec::new(), &mut out);
    out
}

/// Smallest depth giving at least `target` prefixes.
fn split_depth(n: usize, target: usize) -> usize {
    let mut count = 1usize;
    for k in 0..n {
        if count >= target {
            return k;
        }
        count = count.saturating_mul(2 * (n - k) - 1);
    }
    n
}

fn walker_at(g: &ColoredGraph, connected_only: bool, prefix: &[(usize, usize)]) -> (Walker, Vec<u128>) {
    let mut w = Walker::new(g, connected_only);
    let masks = prefix.iter().map(|&(u, v)| w.push(u, v)).collect();
    (w, masks)
}

fn histogram_rec(w: &mut Walker, counts: &mut [u64]) {
    let Some(v) = w.state.first_free() else {
        if w.leaf_ok() {
            counts[w.state.total_closed()] += 1;
        }
        return;
    };
    for u in v + 1..w.state.vertex_count() {
        if w.state.is_free(u) {
            let mask = w.push(v, u);
            histogram_rec(w, counts);
            w.pop(mask);
        }
    }
}

/// Exhaustive face histogram over all perfect matchings `M⁰`; with
/// `connected_only`, only pairings making `G(M⁰, 𝐌)` connected count.
pub fn enumerate_histogram(g: &ColoredGraph, connected_only: bool, config: &SearchConfig) -> Result<FaceHistogram> {
    let n = g.half_order();
    if g.vertex_count() > config.max_histogram_vertices {
        return Err(Error::BudgetExceeded {
            what: format!(
                "exhaustive enumeration over |M_{n}| = {} pairings",
                count_matchings(n as u64)
            ),
            limit: format!("{} vertices", config.max_histogram_vertices),
        });
    }
    let slots = g.colors() * n + 1;
    let raw: Vec<u64> = if config.parallel && n >= 4 {
        prefixes(g, split_depth(n, 256))
            .par_iter()
            .map(|prefix| {
                let (mut w, _) = walker_at(g, connected_only, prefix);
                let mut counts = vec![0u64; slots];
                histogram_rec(&mut w, &mut counts);
                counts
            })
            .reduce(
                || vec![0u64; slots],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                },
            )
    } else {
        let mut counts = vec![0u64; slots];
        histogram_rec(&mut Walker::new(g, connected_only), &mut counts);
        counts
    };
    let counts = raw.into_iter().enumerate().filter(|&(_, c)| c > 0).collect();
    Ok(FaceHistogram {
        n,
        colors: g.colors(),
        connected_only,
        counts,
    })
}

/// `⟨Tr_𝐌(T)⟩` as a polynomial in N.
pub fn expectation_poly(g: &ColoredGraph, nu: Exponent, config: &SearchConfig) -> Result<ExpectationPoly> {
    Ok(ExpectationPoly::from_histogram(
        &enumerate_histogram(g, false, config)?,
        nu,
    ))
}

/// `⟨Tr_𝐌(T)⟩_con`: the sum restricted to pairings with `G(M⁰, 𝐌)` connected.
pub fn cumulant_poly(g: &ColoredGraph, nu: Exponent, config: &SearchConfig) -> Result<ExpectationPoly> {
    Ok(ExpectationPoly::from_histogram(
        &enumerate_histogram(g, true, config)?,
        nu,
    ))
}

/// Best (face count, multiplicity, lexicographically least witness).
#[derive(Clone, Debug, PartialEq, Eq)]
struct Best {
    faces: usize,
    count: u64,
    witness: Option<Matching>,
}

impl Best {
    fn none() -> Self {
        Self {
            faces: 0,
            count: 0,
            witness: None,
        }
    }

    fn merge(self, other: Self) -> Self {
        if other.count == 0 {
            return self;
        }
        if self.count == 0 {
            return other;
        }
        match self.faces.cmp(&other.faces) {
            std::cmp::Ordering::Greater => self,
            std::cmp::Ordering::Less => other,
            std::cmp::Ordering::Equal => Self {
                faces: self.faces,
                count: self.count + other.count,
                witness: match (self.witness, other.witness) {
                    (Some(a), Some(b)) => Some(a.min(b)),
                    (a, b) => a.or(b),
                },
            },
        }
    }
}

struct Shared {
    best: AtomicUsize,
    nodes: AtomicU64,
    limit: Option<u64>,
    aborted: AtomicBool,
}

fn scaling_rec(w: &mut Walker, bound: PruneBound, shared: &Shared, local: &mut Best, vertices: usize) {
    if let Some(limit) = shared.limit {
        if shared.nodes.fetch_add(1, Ordering::Relaxed) >= limit {
            shared.aborted.store(true, Ordering::Relaxed);
        }
        if shared.aborted.load(Ordering::Relaxed) {
            return;
        }
    }
    let Some(v) = w.state.first_free() else {
        if w.leaf_ok() {
            let f = w.state.total_closed();
            if f > local.faces || local.count == 0 {
                if f >= shared.best.load(Ordering::Relaxed) {
                    *local = Best {
                        faces: f,
                        count: 1,
                        witness: Some(w.witness(vertices)),
                    };
                    shared.best.fetch_max(f, Ordering::Relaxed);
                }
            } else if f == local.faces {
                local.count += 1;
            }
        }
        return;
    };

    let best = shared.best.load(Ordering::Relaxed) as i64;
    let closed = w.state.total_closed() as i64;
    let r = (w.state.free_count() / 2) as i64;
    if closed + w.colors as i64 * r < best {
        return;
    }
    if bound == PruneBound::Degree {
        match w.degree_bound() {
            Some(b) if b >= best => {}
            _ => return,
        }
    }

    for u in v + 1..vertices {
        if w.state.is_free(u) {
            let mask = w.push(v, u);
            scaling_rec(w, bound, shared, local, vertices);
            w.pop(mask);
        }
    }
}

fn faces_of(m: &[usize], g: &ColoredGraph) -> usize {
    g.matchings().iter().map(|c| cycles_between(m, c.partners())).sum()
}

fn pairing_components(m: &[usize], g: &ColoredGraph) -> usize {
    let mut dsu = Dsu::new(m.len());
    for (u, &v) in m.iter().enumerate() {
        dsu.union(u, v);
    }
    for c in g.matchings() {
        for (u, v) in c.pairs() {
            dsu.union(u, v);
        }
    }
    dsu.labels().1
}

/// Candidate pairings improved by pair swaps: first until `G(M⁰, 𝐌)` is
/// connected (when required), then greedily while the face count grows.
/// Only used to seed the search bound.
fn incumbent(g: &ColoredGraph, connected_only: bool, hints: &[Matching]) -> Option<(usize, Matching)> {
    let vertices = g.vertex_count();
    let mut best: Option<(usize, Vec<usize>)> = None;
    let candidates = g
        .matchings()
        .iter()
        .chain(hints.iter().filter(|h| h.ground_size() == vertices && h.is_perfect()));
    for cand in candidates {
        let mut m = cand.partners().to_vec();
        if connected_only {
            let mut comps = pairing_components(&m, g);
            while comps > 1 {
                let (labels, _) = {
                    let mut dsu = Dsu::new(vertices);
                    for (u, &v) in m.iter().enumerate() {
                        dsu.union(u, v);
                    }
                    for c in g.matchings() {
                        for (u, v) in c.pairs() {
                            dsu.union(u, v);
                        }
                    }
                    dsu.labels()
                };
                let mut choice: Option<(usize, Vec<usize>)> = None;
                let pairs: Vec<(usize, usize)> = (0..vertices).filter(|&u| u < m[u]).map(|u| (u, m[u])).collect();
                for (i, &(a, b)) in pairs.iter().enumerate() {
                    for &(c, d) in &pairs[i + 1..] {
                        if labels[a] == labels[c] {
                            continue;
                        }
                        for (x, y) in [(c, d), (d, c)] {
                            let mut t = m.clone();
                            t[a] = x;
                            t[x] = a;
                            t[b] = y;
                            t[y] = b;
                            let f = faces_of(&t, g);
                            if choice.as_ref().is_none_or(|(bf, _)| f > *bf) {
                                choice = Some((f, t));
                            }
                        }
                    }
                }
                let (_, t) = choice?;
                m = t;
                comps = pairing_components(&m, g);
            }
        }
        let mut f = faces_of(&m, g);
        let mut improved = true;
        let mut sweeps = 0;
        while improved && sweeps < 64 {
            improved = false;
            sweeps += 1;
            let pairs: Vec<(usize, usize)> = (0..vertices).filter(|&u| u < m[u]).map(|u| (u, m[u])).collect();
            'outer: for (i, &(a, b)) in pairs.iter().enumerate() {
                for &(c, d) in &pairs[i + 1..] {
                    for (x, y) in [(c, d), (d, c)] {
                        let mut t = m.clone();
                        t[a] = x;
                        t[x] = a;
                        t[b] = y;
                        t[y] = b;
                        let tf = faces_of(&t, g);
                        if tf > f && (!connected_only || pairing_components(&t, g) == 1) {
                            m = t;
                            f = tf;
                            improved = true;
                            break 'outer;
                        }
                    }
                }
            }
        }
        if best.as_ref().is_none_or(|(bf, _)| f > *bf) {
            best = Some((f, m));
        }
    }
    best.map(|(f, m)| (f, Matching::from_partner_unchecked(m)))
}

/// Exact Gaussian scaling by depth-first branch-and-bound over partial
/// pairings.
pub fn max_scaling(g: &ColoredGraph, connected_only: bool, config: &SearchConfig) -> Result<ScalingReport> {
    max_scaling_with_hints(g, connected_only, config, &[])
}

/// [`max_scaling`] with extra pairings to seed the incumbent; hints only
/// speed up the search, they never change the result.
pub fn max_scaling_with_hints(
    g: &ColoredGraph,
    connected_only: bool,
    config: &SearchConfig,
    hints: &[Matching],
) -> Result<ScalingReport> {
    let vertices = g.vertex_count();
    if vertices > config.max_scaling_vertices {
        return Err(Error::BudgetExceeded {
            what: format!("scaling search on {vertices} vertices"),
            limit: format!("{} vertices", config.max_scaling_vertices),
        });
    }
    let seed = incumbent(g, connected_only, hints);
    let shared = Shared {
        best: AtomicUsize::new(seed.as_ref().map_or(0, |s| s.0)),
        nodes: AtomicU64::new(0),
        limit: config.node_limit,
        aborted: AtomicBool::new(false),
    };
    let n = g.half_order();
    let best = if config.parallel && n >= 5 {
        prefixes(g, split_depth(n, 512))
            .par_iter()
            .map(|prefix| {
                let (mut w, _) = walker_at(g, connected_only, prefix);
                let mut local = Best::none();
                scaling_rec(&mut w, config.bound, &shared, &mut local, vertices);
                local
            })
            .reduce(Best::none, Best::merge)
    } else {
        let mut local = Best::none();
        scaling_rec(
            &mut Walker::new(g, connected_only),
            config.bound,
            &shared,
            &mut local,
            vertices,
        );
        local
    };

    let exact = !shared.aborted.load(Ordering::Relaxed);
    let (f_max, num_optimal, witness) = match (best.witness, seed) {
        (Some(w), Some((sf, sm))) if !exact && sf > best.faces => (sf, 0, (sm, w).0),
        (Some(w), _) => (best.faces, best.count, w),
        (None, Some((sf, sm))) => (sf, 0, sm),
        (None, None) => {
            if vertices == 0 {
                (0, 1, Matching::empty(0))
            } else {
                return Err(Error::BudgetExceeded {
                    what: "scaling search found no pairing before the node limit".into(),
                    limit: format!("{:?} nodes", config.node_limit),
                });
            }
        }
    };
    let omega_min = if vertices == 0 {
        None
    } else {
        total_faces(&witness, g)?.omega
    };
    Ok(ScalingReport {
        f_max,
        num_optimal,
        witness,
        omega_min,
        connected_only,
        exact,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LemmaReport {
    pub holds: bool,
    #[serde(rename = "F_max")]
    pub f_max: usize,
    /// `D n / 2` as `(numerator, denominator)`.
    #[serde(serialize_with = "ser_ratio")]
    pub bound: Exponent,
    pub exact: bool,
}

/// Whether `max F > D n / 2` for a connected graph.
pub fn lemma_condition(g: &ColoredGraph, config: &SearchConfig) -> Result<LemmaReport> {
    if !g.is_connected() {
        return Err(Error::Disconnected(
            "the scaling condition is stated for connected graphs".into(),
        ));
    }
    let s = max_scaling(g, false, config)?;
    let dn = (g.colors() * g.half_order()) as i64;
    Ok(LemmaReport {
        holds: 2 * s.f_max as i64 > dn,
        f_max: s.f_max,
        bound: Ratio::new(dn, 2),
        exact: s.exact,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SubadditivityReport {
    /// Connected-restricted scaling of the disjoint union.
    pub lhs: usize,
    /// Sum of the individual scalings.
    pub rhs: usize,
    pub per_graph: Vec<usize>,
    pub strict_subadditive: bool,
    /// `D n` reached by the copy pairing, when the list is `(G, G)`.
    pub self_pairing_bound: Option<usize>,
    pub exact: bool,
}

fn union_of_witnesses(parts: &[Matching]) -> Matching {
    let mut p = Vec::new();
    for m in parts {
        let shift = p.len();
        p.extend(m.partners().iter().map(|&x| x + shift));
    }
    Matching::from_partner_unchecked(p)
}

pub fn subadditivity_check(graphs: &[ColoredGraph], config: &SearchConfig) -> Result<SubadditivityReport> {
    if graphs.is_empty() {
        return Err(Error::InvalidParameter("empty graph list".into()));
    }
    if let Some(i) = graphs.iter().position(|g| !g.is_connected()) {
        return Err(Error::Disconnected(format!("graph {} of the list", i + 1)));
    }
    let singles = graphs
        .iter()
        .map(|g| max_scaling(g, false, config))
        .collect::<Result<Vec<_>>>()?;
    let union = ColoredGraph::disjoint_union_all(graphs)?;
    let mut hints = vec![union_of_witnesses(
        &singles.iter().map(|s| s.witness.clone()).collect::<Vec<_>>(),
    )];
    let self_pairing_bound = if graphs.len() == 2 && graphs[0] == graphs[1] {
        hints.push(Matching::copy_pairing(graphs[0].half_order()));
        Some(graphs[0].colors() * graphs[0].half_order())
    } else {
        None
    };
    let joint = max_scaling_with_hints(&union, true, config, &hints)?;
    let per_graph: Vec<usize> = singles.iter().map(|s| s.f_max).collect();
    let rhs = per_graph.iter().sum();
    Ok(SubadditivityReport {
        lhs: joint.f_max,
        rhs,
        per_graph,
        strict_subadditive: joint.f_max < rhs,
        self_pairing_bound,
        exact: joint.exact && singles.iter().all(|s| s.exact),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FactorizationReport {
    /// Leading exponent of `⟨Tr Tr⟩_con`, i.e. `F_con(G⊔G) − 2νn`.
    #[serde(serialize_with = "ser_ratio")]
    pub cumulant_leading_exponent: Exponent,
    /// Leading exponent of `⟨Tr⟩`, i.e. `F_max(G) − νn`.
    #[serde(serialize_with = "ser_ratio")]
    pub expectation_leading_exponent: Exponent,
    pub factorizes: bool,
    #[serde(rename = "F_max")]
    pub f_max: usize,
    #[serde(rename = "F_con_double")]
    pub f_con_double: usize,
    pub exact: bool,
}

/// Compares the scaling of `⟨Tr_𝐌 Tr_𝐌⟩_con` with that of `⟨Tr_𝐌⟩²`.
///
/// The leading exponents come from the two maximal face counts, which is
/// the same as reading them off `cumulant_poly(G⊔G)` and
/// `expectation_poly(G)` without enumerating every pairing.
pub fn factorization_verdict(g: &ColoredGraph, nu: Exponent, config: &SearchConfig) -> Result<FactorizationReport> {
    if !g.is_connected() {
        return Err(Error::Disconnected(
            "factorization is tested on a connected graph".into(),
        ));
    }
    let single = max_scaling(g, false, config)?;
    let double = g.disjoint_union(g)?;
    let hints = [
        Matching::copy_pairing(g.half_order()),
        union_of_witnesses(&[single.witness.clone(), single.witness.clone()]),
    ];
    let joint = max_scaling_with_hints(&double, true, config, &hints)?;
    let n = Exponent::from_integer(g.half_order() as i64);
    let cumulant = Exponent::from_integer(joint.f_max as i64) - nu * n * 2;
    let expectation = Exponent::from_integer(single.f_max as i64) - nu * n;
    Ok(FactorizationReport {
        cumulant_leading_exponent: cumulant,
        expectation_leading_exponent: expectation,
        factorizes: cumulant < expectation * 2,
        f_max: single.f_max,
        f_con_double: joint.f_max,
        exact: single.exact && joint.exact,
    })
}
