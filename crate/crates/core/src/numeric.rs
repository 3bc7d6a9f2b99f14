//! Dense Gaussian tensors and direct evaluation of trace invariants by
//! pairwise contraction, plus Monte Carlo moment and cumulant estimates.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::ColoredGraph;
use crate::partitions::{cumulants_from_moments, SubsetMap};
use crate::poly::Exponent;
use crate::rng::{seeded_rng, stream_rng};

/// Largest dense intermediate (in entries) a contraction may create.
pub const MAX_INTERMEDIATE: usize = 1 << 22;

const BATCH: u64 = 4096;

/// A real tensor with `D` slots of dimension `N`, stored row-major: the
/// entry `(a¹,…,a^D)` sits at `Σ a^c N^{D−1−c}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorData {
    pub dim: usize,
    pub order: usize,
    pub entries: Vec<f64>,
}

impl TensorData {
    pub fn new(dim: usize, order: usize, entries: Vec<f64>) -> Result<Self> {
        if dim == 0 || order == 0 {
            return Err(Error::InvalidParameter("tensor needs N >= 1 and D >= 1".into()));
        }
        let len = checked_pow(dim, order)?;
        if entries.len() != len {
            return Err(Error::InvalidParameter(format!(
                "expected {len} entries for N = {dim}, D = {order}, got {}",
                entries.len()
            )));
        }
        Ok(Self { dim, order, entries })
    }

    pub fn index(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &a| acc * self.dim + a)
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.entries[self.index(idx)]
    }

    /// Applies `O` to slot `slot`: `T'_{…a…} = Σ_b O_{ab} T_{…b…}`.
    pub fn apply_matrix(&self, slot: usize, o: &[f64]) -> Self {
        let n = self.dim;
        let inner = n.pow((self.order - 1 - slot) as u32);
        let outer = self.entries.len() / (inner * n);
        let mut out = vec![0.0; self.entries.len()];
        for x in 0..outer {
            for a in 0..n {
                let dst = &mut out[(x * n + a) * inner..(x * n + a + 1) * inner];
                for b in 0..n {
                    let w = o[a * n + b];
                    let src = &self.entries[(x * n + b) * inner..(x * n + b + 1) * inner];
                    dst.iter_mut().zip(src).for_each(|(d, s)| *d += w * s);
                }
            }
        }
        Self {
            dim: n,
            order: self.order,
            entries: out,
        }
    }
}

fn checked_pow(base: usize, exp: usize) -> Result<usize> {
    base.checked_pow(exp as u32).ok_or_else(|| Error::BudgetExceeded {
        what: format!("{base}^{exp} tensor entries"),
        limit: "usize".into(),
    })
}

/// `N^{−ν/2}`.
pub fn entry_std(dim: usize, nu: Exponent) -> f64 {
    (dim as f64).powf(-(*nu.numer() as f64) / (*nu.denom() as f64) / 2.0)
}

pub fn sample_gaussian_tensor_with<R: Rng + ?Sized>(
    dim: usize,
    order: usize,
    nu: Exponent,
    rng: &mut R,
) -> Result<TensorData> {
    let len = checked_pow(dim, order)?;
    let sigma = entry_std(dim, nu);
    let entries = (0..len).map(|_| sigma * rng.sample::<f64, _>(StandardNormal)).collect();
    TensorData::new(dim, order, entries)
}

/// I.i.d. centered normal entries with variance `N^{−ν}`.
pub fn sample_gaussian_tensor(dim: usize, order: usize, nu: Exponent, seed: u64) -> Result<TensorData> {
    sample_gaussian_tensor_with(dim, order, nu, &mut seeded_rng(seed))
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Step {
    a: usize,
    b: usize,
    /// Axis order putting `a`'s free legs first, then the shared ones.
    perm_a: Vec<usize>,
    /// Axis order putting the shared legs first (matching `perm_a`), then
    /// `b`'s free legs.
    perm_b: Vec<usize>,
    free_a: usize,
    shared: usize,
    free_b: usize,
}

/// Contraction order for a graph, independent of the tensor entries.
///
/// Vertices start as copies of `T` with legs in color order; each step
/// merges the two operands sharing an edge whose result has the fewest
/// legs. Operands left without shared edges are scalars and multiply.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContractionPlan {
    order: usize,
    vertices: usize,
    steps: Vec<Step>,
    /// Operands holding the final scalar factors.
    scalars: Vec<usize>,
    max_rank: usize,
}

impl ContractionPlan {
    pub fn new(g: &ColoredGraph) -> Self {
        let d = g.colors();
        let v = g.vertex_count();
        // Edge id for color c and pair (u, w): leg label shared by both ends.
        let mut legs: Vec<Option<Vec<usize>>> = (0..v)
            .map(|u| {
                Some(
                    (0..d)
                        .map(|c| {
                            let w = g.matching(c).partners()[u];
                            c * v + u.min(w)
                        })
                        .collect(),
                )
            })
            .collect();
        let mut steps = Vec::new();
        let mut max_rank = d;
        loop {
            let live: Vec<usize> = (0..legs.len()).filter(|&i| legs[i].is_some()).collect();
            let mut choice: Option<(usize, usize, usize)> = None;
            for (x, &i) in live.iter().enumerate() {
                let li = legs[i].as_ref().unwrap();
                for &j in &live[x + 1..] {
                    let lj = legs[j].as_ref().unwrap();
                    let shared = li.iter().filter(|e| lj.contains(e)).count();
                    if shared == 0 {
                        continue;
                    }
                    let rank = li.len() + lj.len() - 2 * shared;
                    if choice.is_none_or(|(r, _, _)| rank < r) {
                        choice = Some((rank, i, j));
                    }
                }
            }
            let Some((rank, i, j)) = choice else { break };
            let li = legs[i].take().unwrap();
            let lj = legs[j].take().unwrap();
            let mut perm_a: Vec<usize> = (0..li.len()).filter(|&k| !lj.contains(&li[k])).collect();
            let shared_edges: Vec<usize> = li.iter().copied().filter(|e| lj.contains(e)).collect();
            perm_a.extend(shared_edges.iter().map(|e| li.iter().position(|x| x == e).unwrap()));
            let mut perm_b: Vec<usize> = shared_edges
                .iter()
                .map(|e| lj.iter().position(|x| x == e).unwrap())
                .collect();
            perm_b.extend((0..lj.len()).filter(|&k| !li.contains(&lj[k])));
            let free_a = li.len() - shared_edges.len();
            let free_b = lj.len() - shared_edges.len();
            let mut merged: Vec<usize> = perm_a[..free_a].iter().map(|&k| li[k]).collect();
            merged.extend(perm_b[shared_edges.len()..].iter().map(|&k| lj[k]));
            steps.push(Step {
                a: i,
                b: j,
                perm_a,
                perm_b,
                free_a,
                shared: shared_edges.len(),
                free_b,
            });
            max_rank = max_rank.max(rank);
            legs.push(Some(merged));
        }
        let scalars = (0..legs.len()).filter(|&i| legs[i].is_some()).collect();
        Self {
            order: d,
            vertices: v,
            steps,
            scalars,
            max_rank,
        }
    }

    /// Largest number of open legs of any intermediate.
    pub fn max_rank(&self) -> usize {
        self.max_rank
    }

    pub fn check_budget(&self, dim: usize) -> Result<()> {
        let size = checked_pow(dim, self.max_rank)?;
        if size > MAX_INTERMEDIATE {
            return Err(Error::BudgetExceeded {
                what: format!("contraction intermediate of {size} entries"),
                limit: format!("{MAX_INTERMEDIATE} entries"),
            });
        }
        Ok(())
    }

    pub fn evaluate(&self, t: &TensorData) -> Result<f64> {
        if t.order != self.order {
            return Err(Error::InvalidParameter(format!(
                "tensor order {} does not match {} colors",
                t.order, self.order
            )));
        }
        if self.vertices == 0 {
            return Ok(1.0);
        }
        let n = t.dim;
        let mut ops: Vec<Option<std::borrow::Cow<'_, [f64]>>> = (0..self.vertices)
            .map(|_| Some(std::borrow::Cow::Borrowed(t.entries.as_slice())))
            .collect();
        for s in &self.steps {
            let a = ops[s.a].take().expect("operand live");
            let b = ops[s.b].take().expect("operand live");
            let pa = permute(&a, n, &s.perm_a);
            let pb = permute(&b, n, &s.perm_b);
            let rows = n.pow(s.free_a as u32);
            let inner = n.pow(s.shared as u32);
            let cols = n.pow(s.free_b as u32);
            let mut out = vec![0.0; rows * cols];
            for r in 0..rows {
                let dst = &mut out[r * cols..(r + 1) * cols];
                for k in 0..inner {
                    let x = pa[r * inner + k];
                    let src = &pb[k * cols..(k + 1) * cols];
                    dst.iter_mut().zip(src).for_each(|(d, y)| *d += x * y);
                }
            }
            ops.push(Some(std::borrow::Cow::Owned(out)));
        }
        Ok(self
            .scalars
            .iter()
            .map(|&i| ops[i].as_ref().expect("scalar live")[0])
            .product())
    }
}

/// Reorders axes so that new axis `i` is old axis `perm[i]`.
fn permute<'a>(data: &'a [f64], n: usize, perm: &[usize]) -> std::borrow::Cow<'a, [f64]> {
    if perm.iter().enumerate().all(|(i, &p)| i == p) {
        return std::borrow::Cow::Borrowed(data);
    }
    let r = perm.len();
    let mut stride = vec![1usize; r];
    for k in (0..r.saturating_sub(1)).rev() {
        stride[k] = stride[k + 1] * n;
    }
    let new_stride: Vec<usize> = perm.iter().map(|&p| stride[p]).collect();
    let mut out = Vec::with_capacity(data.len());
    let mut idx = vec![0usize; r];
    let mut src = 0usize;
    for _ in 0..data.len() {
        out.push(data[src]);
        for k in (0..r).rev() {
            idx[k] += 1;
            src += new_stride[k];
            if idx[k] < n {
                break;
            }
            src -= new_stride[k] * n;
            idx[k] = 0;
        }
    }
    std::borrow::Cow::Owned(out)
}

/// `Tr_𝐌(T)`: every vertex is a copy of `T` and every colored edge
/// contracts the two slots of its color.
pub fn evaluate_trace_invariant(g: &ColoredGraph, t: &TensorData) -> Result<f64> {
    let plan = ContractionPlan::new(g);
    plan.check_budget(t.dim)?;
    plan.evaluate(t)
}

/// `N × N` orthogonal matrix from Gram–Schmidt on a Gaussian matrix.
pub fn random_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let mut q: Vec<f64> = (0..n * n).map(|_| rng.sample(StandardNormal)).collect();
        let mut ok = true;
        for i in 0..n {
            for j in 0..i {
                let dot: f64 = (0..n).map(|k| q[i * n + k] * q[j * n + k]).sum();
                for k in 0..n {
                    q[i * n + k] -= dot * q[j * n + k];
                }
            }
            let norm = (0..n).map(|k| q[i * n + k].powi(2)).sum::<f64>().sqrt();
            if norm < 1e-8 {
                ok = false;
                break;
            }
            for k in 0..n {
                q[i * n + k] /= norm;
            }
        }
        if ok {
            return q;
        }
    }
}

pub fn identity_matrix(n: usize) -> Vec<f64> {
    (0..n * n).map(|i| if i / n == i % n { 1.0 } else { 0.0 }).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvarianceReport {
    pub deviation: f64,
    pub trace_before: f64,
    pub trace_after: f64,
    pub seed: u64,
    pub retries: u32,
}

/// Relative change of the invariant when slot `c` is rotated by `matrices[c]`.
pub fn invariance_deviation(g: &ColoredGraph, t: &TensorData, matrices: &[Vec<f64>]) -> Result<(f64, f64, f64)> {
    if matrices.len() != t.order {
        return Err(Error::InvalidParameter(format!(
            "{} matrices for a tensor of order {}",
            matrices.len(),
            t.order
        )));
    }
    let plan = ContractionPlan::new(g);
    plan.check_budget(t.dim)?;
    let before = plan.evaluate(t)?;
    let mut rotated = t.clone();
    for (c, o) in matrices.iter().enumerate() {
        rotated = rotated.apply_matrix(c, o);
    }
    let after = plan.evaluate(&rotated)?;
    Ok(((after - before).abs() / before.abs(), before, after))
}

pub fn orthogonal_invariance_check(g: &ColoredGraph, dim: usize, seed: u64) -> Result<InvarianceReport> {
    let d = g.colors();
    let mut retries = 0;
    loop {
        let mut rng = stream_rng(seed, retries as u64);
        let t = sample_gaussian_tensor_with(dim, d, Exponent::from_integer(0), &mut rng)?;
        let mats: Vec<Vec<f64>> = (0..d).map(|_| random_orthogonal(dim, &mut rng)).collect();
        let (deviation, before, after) = invariance_deviation(g, &t, &mats)?;
        if before.abs() >= 1e-30 || retries >= 16 {
            return Ok(InvarianceReport {
                deviation,
                trace_before: before,
                trace_after: after,
                seed,
                retries,
            });
        }
        retries += 1;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentEstimate {
    pub mean: f64,
    pub standard_error: f64,
    pub sample_count: u64,
    #[serde(serialize_with = "ser_exponent")]
    pub nu: Exponent,
    #[serde(rename = "N")]
    pub dim: usize,
    pub seed: u64,
}

fn ser_exponent<S: serde::Serializer>(r: &Exponent, s: S) -> std::result::Result<S::Ok, S::Error> {
    (*r.numer(), *r.denom()).serialize(s)
}

/// Running mean and sum of squared deviations, merged pairwise.
#[derive(Clone, Copy, Debug, Default)]
struct Welford {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, o: Self) -> Self {
        if self.count == 0 {
            return o;
        }
        if o.count == 0 {
            return self;
        }
        let count = self.count + o.count;
        let delta = o.mean - self.mean;
        Self {
            count,
            mean: self.mean + delta * o.count as f64 / count as f64,
            m2: self.m2 + o.m2 + delta * delta * (self.count as f64 * o.count as f64) / count as f64,
        }
    }

    fn stderr(&self) -> f64 {
        if self.count < 2 {
            return f64::NAN;
        }
        (self.m2 / (self.count - 1) as f64 / self.count as f64).sqrt()
    }
}

fn common_order(graphs: &[&ColoredGraph]) -> Result<usize> {
    let d = graphs
        .first()
        .ok_or_else(|| Error::InvalidParameter("empty graph list".into()))?
        .colors();
    if graphs.iter().any(|g| g.colors() != d) {
        return Err(Error::InvalidParameter(
            "all graphs must have the same number of colors".into(),
        ));
    }
    Ok(d)
}

/// Per-sample traces of every distinct graph in `graphs`, batched with one
/// random stream per batch. `f` reduces each sample's traces to the batch
/// accumulator.
fn run_batches<A, F>(
    graphs: &[&ColoredGraph],
    dim: usize,
    nu: Exponent,
    samples: u64,
    seed: u64,
    init: A,
    f: F,
) -> Result<Vec<A>>
where
    A: Clone + Send + Sync,
    F: Fn(&mut A, &[f64]) + Sync,
{
    let d = common_order(graphs)?;
    if samples == 0 {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    let plans: Vec<ContractionPlan> = graphs.iter().map(|g| ContractionPlan::new(g)).collect();
    for p in &plans {
        p.check_budget(dim)?;
    }
    checked_pow(dim, d)?;
    let batches = samples.div_ceil(BATCH);
    (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream_rng(seed, b);
            let mut acc = init.clone();
            let mut traces = vec![0.0; plans.len()];
            for _ in 0..BATCH.min(samples - b * BATCH) {
                let t = sample_gaussian_tensor_with(dim, d, nu, &mut rng)?;
                for (x, p) in traces.iter_mut().zip(&plans) {
                    *x = p.evaluate(&t)?;
                }
                f(&mut acc, &traces);
            }
            Ok(acc)
        })
        .collect()
}

/// Sample mean of `Π_ρ Tr_{G_ρ}(T)` over i.i.d. Gaussian tensors.
pub fn mc_moment(graphs: &[ColoredGraph], dim: usize, nu: Exponent, samples: u64, seed: u64) -> Result<MomentEstimate> {
    let refs: Vec<&ColoredGraph> = graphs.iter().collect();
    let parts = run_batches(&refs, dim, nu, samples, seed, Welford::default(), |w, tr| {
        w.push(tr.iter().product())
    })?;
    let w = parts.into_iter().fold(Welford::default(), Welford::merge);
    Ok(MomentEstimate {
        mean: w.mean,
        standard_error: w.stderr(),
        sample_count: w.count,
        nu,
        dim,
        seed,
    })
}

/// Estimates for several products at once from the same tensors.
pub fn mc_moments_shared(
    products: &[Vec<ColoredGraph>],
    dim: usize,
    nu: Exponent,
    samples: u64,
    seed: u64,
) -> Result<Vec<MomentEstimate>> {
    let mut flat: Vec<&ColoredGraph> = Vec::new();
    let mut spans = Vec::new();
    for p in products {
        spans.push(flat.len()..flat.len() + p.len());
        flat.extend(p.iter());
    }
    let init = vec![Welford::default(); products.len()];
    let parts = run_batches(&flat, dim, nu, samples, seed, init, |acc, tr| {
        for (w, s) in acc.iter_mut().zip(&spans) {
            w.push(tr[s.clone()].iter().product());
        }
    })?;
    let merged = parts
        .into_iter()
        .fold(vec![Welford::default(); products.len()], |a, b| {
            a.into_iter().zip(b).map(|(x, y)| x.merge(y)).collect()
        });
    Ok(merged
        .into_iter()
        .map(|w| MomentEstimate {
            mean: w.mean,
            standard_error: w.stderr(),
            sample_count: w.count,
            nu,
            dim,
            seed,
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CumulantEstimate {
    pub cumulant: f64,
    /// Spread of per-batch estimates divided by the square root of the
    /// number of batches.
    pub standard_error: f64,
    pub moments: Vec<MomentEstimate>,
    pub sample_count: u64,
    pub batches: u64,
}

/// Joint cumulant of `Tr_{G_1}, …, Tr_{G_q}` from Monte Carlo moments of
/// every sub-product, all computed from the same tensors.
pub fn mc_cumulant(
    graphs: &[ColoredGraph],
    dim: usize,
    nu: Exponent,
    samples: u64,
    seed: u64,
) -> Result<CumulantEstimate> {
    let q = graphs.len();
    if q == 0 || q > 8 {
        return Err(Error::InvalidParameter(format!("need 1 to 8 graphs, got {q}")));
    }
    let refs: Vec<&ColoredGraph> = graphs.iter().collect();
    let subsets = 1usize << q;
    let init = vec![Welford::default(); subsets];
    let parts = run_batches(&refs, dim, nu, samples, seed, init, |acc, tr| {
        for (s, w) in acc.iter_mut().enumerate().skip(1) {
            let p: f64 = (0..q).filter(|i| s >> i & 1 == 1).map(|i| tr[i]).product();
            w.push(p);
        }
    })?;
    let full = (subsets - 1) as u32;
    let cumulant_of = |ws: &[Welford]| -> Result<f64> {
        let moments = SubsetMap::from_fn(q, |s| ws[s as usize].mean)?;
        let c = cumulants_from_moments(&moments)?;
        c.full().copied().ok_or(Error::MissingSubset(full))
    };
    let batch_estimates = parts.iter().map(|p| cumulant_of(p)).collect::<Result<Vec<f64>>>()?;
    let merged = parts.into_iter().fold(vec![Welford::default(); subsets], |a, b| {
        a.into_iter().zip(b).map(|(x, y)| x.merge(y)).collect()
    });
    let cumulant = cumulant_of(&merged)?;
    let mut spread = Welford::default();
    for x in &batch_estimates {
        spread.push(*x);
    }
    let moments = merged[1..]
        .iter()
        .map(|w| MomentEstimate {
            mean: w.mean,
            standard_error: w.stderr(),
            sample_count: w.count,
            nu,
            dim,
            seed,
        })
        .collect();
    Ok(CumulantEstimate {
        cumulant,
        standard_error: spread.stderr(),
        moments,
        sample_count: merged[full as usize].count,
        batches: batch_estimates.len() as u64,
    })
}
