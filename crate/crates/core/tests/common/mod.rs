//! Independent reference implementations used by the integration tests.
//! Everything here is deliberately naive and shares no code with the
//! library beyond the graph container.
#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap, VecDeque};

use gtensor::graph::ColoredGraph;
use gtensor::numeric::TensorData;

/// Every perfect matching on `v` vertices as a partner array.
pub fn all_matchings(v: usize) -> Vec<Vec<usize>> {
    fn rec(p: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        match p.iter().position(|&x| x == usize::MAX) {
            None => out.push(p.clone()),
            Some(a) => {
                for b in a + 1..p.len() {
                    if p[b] == usize::MAX {
                        p[a] = b;
                        p[b] = a;
                        rec(p, out);
                        p[b] = usize::MAX;
                    }
                }
                p[a] = usize::MAX;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut vec![usize::MAX; v], &mut out);
    out
}

pub fn partners(g: &ColoredGraph) -> Vec<Vec<usize>> {
    g.matchings().iter().map(|m| m.partners().to_vec()).collect()
}

/// Components of the union of two matchings, by breadth-first search.
pub fn cycles(a: &[usize], b: &[usize]) -> usize {
    let v = a.len();
    let mut seen = vec![false; v];
    let mut count = 0;
    for s in 0..v {
        if seen[s] {
            continue;
        }
        count += 1;
        let mut queue = VecDeque::from([s]);
        seen[s] = true;
        while let Some(x) = queue.pop_front() {
            for y in [a[x], b[x]] {
                if !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
    }
    count
}

pub fn faces(m0: &[usize], g: &ColoredGraph) -> usize {
    partners(g).iter().map(|c| cycles(m0, c)).sum()
}

/// Connectivity of the graph whose edges are `m0` and every color.
pub fn connected_with(m0: &[usize], g: &ColoredGraph) -> bool {
    let v = m0.len();
    if v == 0 {
        return true;
    }
    let ps = partners(g);
    let mut seen = vec![false; v];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    let mut reached = 1;
    while let Some(x) = queue.pop_front() {
        for y in std::iter::once(m0[x]).chain(ps.iter().map(|p| p[x])) {
            if !seen[y] {
                seen[y] = true;
                reached += 1;
                queue.push_back(y);
            }
        }
    }
    reached == v
}

pub fn components(g: &ColoredGraph) -> usize {
    let v = g.vertex_count();
    let ps = partners(g);
    let mut seen = vec![false; v];
    let mut count = 0;
    for s in 0..v {
        if seen[s] {
            continue;
        }
        count += 1;
        let mut stack = vec![s];
        seen[s] = true;
        while let Some(x) = stack.pop() {
            for p in &ps {
                if !seen[p[x]] {
                    seen[p[x]] = true;
                    stack.push(p[x]);
                }
            }
        }
    }
    count
}

pub fn histogram(g: &ColoredGraph, connected_only: bool) -> BTreeMap<usize, u64> {
    let mut h = BTreeMap::new();
    for m in all_matchings(g.vertex_count()) {
        if connected_only && !connected_with(&m, g) {
            continue;
        }
        *h.entry(faces(&m, g)).or_default() += 1;
    }
    h
}

/// Degree from the face count, with the component count of the graph.
pub fn omega(m0: &[usize], g: &ColoredGraph) -> Option<i64> {
    let d = g.colors() as i64;
    let n = g.half_order() as i64;
    let f = faces(m0, g) as i64;
    let q = components(g) as i64;
    if q == 1 {
        Some(1 + (d - 1) * n - f)
    } else if connected_with(m0, g) {
        Some(d - (d - 1) * q + (d - 1) * n - f)
    } else {
        None
    }
}

/// Tries every contraction order of `(D−1)`-dipoles and full dipoles.
/// Returns (some order empties the graph, every maximal order empties it).
pub fn melonic_all_orders(g: &ColoredGraph) -> (bool, bool) {
    fn key(ps: &[Vec<usize>], alive: &[bool]) -> Vec<usize> {
        let mut k: Vec<usize> = alive.iter().map(|&a| a as usize).collect();
        for p in ps {
            k.extend(p.iter().zip(alive).map(|(&x, &a)| if a { x } else { usize::MAX }));
        }
        k
    }
    fn rec(
        ps: &mut Vec<Vec<usize>>,
        alive: &mut Vec<bool>,
        memo: &mut HashMap<Vec<usize>, (bool, bool)>,
    ) -> (bool, bool) {
        if alive.iter().all(|a| !a) {
            return (true, true);
        }
        let k = key(ps, alive);
        if let Some(&r) = memo.get(&k) {
            return r;
        }
        let d = ps.len();
        let v = alive.len();
        let mut moves = Vec::new();
        for u in 0..v {
            if !alive[u] {
                continue;
            }
            for w in u + 1..v {
                if !alive[w] {
                    continue;
                }
                let mult = ps.iter().filter(|p| p[u] == w).count();
                if mult >= d - 1 {
                    moves.push((u, w));
                }
            }
        }
        let (mut any, mut all) = (false, !moves.is_empty());
        for (u, w) in moves {
            let saved = ps.clone();
            let missing: Vec<usize> = (0..d).filter(|&c| ps[c][u] != w).collect();
            if let [c] = missing[..] {
                let (a, b) = (ps[c][u], ps[c][w]);
                ps[c][a] = b;
                ps[c][b] = a;
            }
            alive[u] = false;
            alive[w] = false;
            let (x, y) = rec(ps, alive, memo);
            any |= x;
            all &= y;
            alive[u] = true;
            alive[w] = true;
            *ps = saved;
        }
        memo.insert(k, (any, all));
        (any, all)
    }
    let mut ps = partners(g);
    let mut alive = vec![true; g.vertex_count()];
    rec(&mut ps, &mut alive, &mut HashMap::new())
}

/// Removes the pair `(u, w)` joined by all colors except `color`, splicing
/// the two `color` edges, and relabels the rest densely in order.
pub fn contract_pair(g: &ColoredGraph, u: usize, w: usize) -> ColoredGraph {
    let d = g.colors();
    let mut ps = partners(g);
    for c in 0..d {
        if ps[c][u] != w {
            let (a, b) = (ps[c][u], ps[c][w]);
            ps[c][a] = b;
            ps[c][b] = a;
        }
    }
    let keep: Vec<usize> = (0..g.vertex_count()).filter(|&x| x != u && x != w).collect();
    let mut new_id = vec![usize::MAX; g.vertex_count()];
    for (i, &x) in keep.iter().enumerate() {
        new_id[x] = i;
    }
    let pairs: Vec<Vec<(usize, usize)>> = ps
        .iter()
        .map(|p| {
            keep.iter()
                .filter(|&&x| x < p[x])
                .map(|&x| (new_id[x], new_id[p[x]]))
                .collect()
        })
        .collect();
    ColoredGraph::from_pairs(keep.len(), &pairs).unwrap()
}

pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r
}

pub fn catalan(n: u64) -> u128 {
    binomial(2 * n, n) / (n as u128 + 1)
}

/// `Σ_{all slot indices} Π_v T[slots of v] Π_{edges} δ`, summing over one
/// index per vertex slot and keeping only tuples where both ends of every
/// edge agree.
pub fn brute_trace(g: &ColoredGraph, t: &TensorData) -> f64 {
    let d = g.colors();
    let v = g.vertex_count();
    let n = t.dim;
    let ps = partners(g);
    let slots = v * d;
    let total = n.pow(slots as u32);
    let mut sum = 0.0;
    let mut idx = vec![0usize; slots];
    for code in 0..total {
        let mut x = code;
        for s in idx.iter_mut() {
            *s = x % n;
            x /= n;
        }
        let ok = (0..v).all(|u| (0..d).all(|c| idx[u * d + c] == idx[ps[c][u] * d + c]));
        if !ok {
            continue;
        }
        let mut prod = 1.0;
        for u in 0..v {
            prod *= t.get(&idx[u * d..(u + 1) * d]);
        }
        sum += prod;
    }
    sum
}

/// Sorted pair lists after relabelling by `perm` and reordering colors by
/// `cperm`; used to pick class representatives.
fn relabelled(ps: &[Vec<usize>], perm: &[usize], cperm: &[usize]) -> Vec<Vec<(usize, usize)>> {
    cperm
        .iter()
        .map(|&c| {
            let p = &ps[c];
            let mut pairs: Vec<(usize, usize)> = (0..p.len())
                .filter(|&x| x < p[x])
                .map(|x| {
                    let (a, b) = (perm[x], perm[p[x]]);
                    (a.min(b), a.max(b))
                })
                .collect();
            pairs.sort();
            pairs
        })
        .collect()
}

pub fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn rec(cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; k], &mut out);
    out
}

/// One representative per class of graphs with `colors` colors on `v`
/// vertices, up to relabelling vertices and permuting colors. Every graph
/// is equivalent to one whose first color is `{{0,1},{2,3},…}`, so only
/// those are enumerated.
pub fn graph_classes(colors: usize, v: usize) -> Vec<ColoredGraph> {
    let ms = all_matchings(v);
    let canonical: Vec<usize> = (0..v).map(|x| x ^ 1).collect();
    let vperms = permutations(v);
    let cperms = permutations(colors);
    let mut seen = std::collections::BTreeSet::new();
    let mut reps = Vec::new();
    let mut choice = vec![0usize; colors - 1];
    loop {
        let mut ps = vec![canonical.clone()];
        ps.extend(choice.iter().map(|&i| ms[i].clone()));
        let form = vperms
            .iter()
            .flat_map(|p| cperms.iter().map(move |c| (p, c)))
            .map(|(p, c)| relabelled(&ps, p, c))
            .min()
            .unwrap();
        if seen.insert(form) {
            let pairs: Vec<Vec<(usize, usize)>> =
                relabelled(&ps, &(0..v).collect::<Vec<_>>(), &(0..colors).collect::<Vec<_>>());
            reps.push(ColoredGraph::from_pairs(v, &pairs).unwrap());
        }
        let mut i = 0;
        loop {
            if i == choice.len() {
                return reps;
            }
            choice[i] += 1;
            if choice[i] < ms.len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}
