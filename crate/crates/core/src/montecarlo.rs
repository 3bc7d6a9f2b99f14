//! Cycle statistics of a uniformly random perfect matching against a
//! fixed one, the moment and tail bounds built on them, the thresholds of
//! the large-n existence argument, and a randomized search for graphs
//! whose Gaussian scaling is small.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::faces::cycles_between;
use crate::graph::{sample_colored_graph, sample_perfect_matching, ColoredGraph, Matching};
use crate::rng::stream_rng;
use crate::wick::{max_scaling, ScalingReport, SearchConfig};

/// Largest `n` for which exact mode enumerates all `(2n−1)!!` matchings.
pub const MAX_EXACT_N: usize = 8;

const BATCH: u64 = 1 << 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CycleMode {
    Exact,
    Sample { count: u64, seed: u64 },
}

/// Histogram of `F(M⁰, M)` for uniform `M` and the fixed
/// `M⁰ = {{0,1},{2,3},…}`, together with the length of the cycle through
/// the pair `{0,1}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CycleDistribution {
    pub n: usize,
    pub mode: &'static str,
    pub samples: u64,
    pub seed: Option<u64>,
    /// `F ↦ count`.
    pub face_histogram: BTreeMap<usize, u64>,
    /// Entry `k − 1` counts outcomes where `{0,1}` lies on a cycle with
    /// `2k` vertices.
    pub cycle_length_counts: Vec<u64>,
}

impl CycleDistribution {
    pub fn total(&self) -> u64 {
        self.samples
    }

    /// Observed frequency of a `2k`-cycle through `{0,1}`.
    pub fn p_hat(&self, k: usize) -> f64 {
        if k == 0 || k > self.n {
            return 0.0;
        }
        self.cycle_length_counts[k - 1] as f64 / self.samples as f64
    }

    /// Exact probability; only meaningful in exact mode.
    pub fn p_exact(&self, k: usize) -> BigRational {
        if k == 0 || k > self.n {
            return BigRational::zero();
        }
        ratio(self.cycle_length_counts[k - 1], self.samples)
    }

    /// Binomial standard error of [`CycleDistribution::p_hat`].
    pub fn p_stderr(&self, k: usize) -> f64 {
        let p = self.p_hat(k);
        (p * (1.0 - p) / self.samples as f64).sqrt()
    }

    /// `P[F ≥ t]` as a ratio of counts.
    pub fn tail(&self, t: usize) -> BigRational {
        let hits: u64 = self.face_histogram.range(t..).map(|(_, c)| c).sum();
        ratio(hits, self.samples)
    }

    /// `E[m^F]` as a ratio of counts.
    pub fn moment(&self, m: u64) -> BigRational {
        let mut acc = BigInt::zero();
        for (&f, &c) in &self.face_histogram {
            acc += BigInt::from(m).pow(f as u32) * BigInt::from(c);
        }
        BigRational::new(acc, BigInt::from(self.samples))
    }
}

fn ratio(a: u64, b: u64) -> BigRational {
    BigRational::new(BigInt::from(a), BigInt::from(b))
}

/// Closed form for the probability that `{0,1}` lies on a cycle of length
/// `2k`: `Π_{i<k} (2n−2i)/(2n−2i+1) · 1/(2n−2k+1)`.
pub fn cycle_length_probability(n: usize, k: usize) -> BigRational {
    if k == 0 || k > n {
        return BigRational::zero();
    }
    let mut p = BigRational::one();
    for i in 1..k {
        p *= ratio((2 * n - 2 * i) as u64, (2 * n - 2 * i + 1) as u64);
    }
    p * ratio(1, (2 * n - 2 * k + 1) as u64)
}

/// Faces of `M` against the canonical pairing and the half-length of the
/// cycle containing vertex 0.
fn observe(m: &[usize], canonical: &[usize]) -> (usize, usize) {
    let mut len = 0;
    let mut v = 0;
    loop {
        let w = m[v];
        len += 1;
        v = canonical[w];
        if v == 0 {
            break;
        }
    }
    (cycles_between(m, canonical), len)
}

fn empty_distribution(n: usize, mode: &'static str, seed: Option<u64>) -> CycleDistribution {
    CycleDistribution {
        n,
        mode,
        samples: 0,
        seed,
        face_histogram: BTreeMap::new(),
        cycle_length_counts: vec![0; n],
    }
}

fn absorb(d: &mut CycleDistribution, other: CycleDistribution) {
    d.samples += other.samples;
    for (f, c) in other.face_histogram {
        *d.face_histogram.entry(f).or_default() += c;
    }
    for (a, b) in d.cycle_length_counts.iter_mut().zip(other.cycle_length_counts) {
        *a += b;
    }
}

pub fn cycle_distribution(n: usize, mode: CycleMode) -> Result<CycleDistribution> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let canonical = Matching::canonical(n);
    let canonical = canonical.partners();
    match mode {
        CycleMode::Exact => {
            if n > MAX_EXACT_N {
                return Err(Error::BudgetExceeded {
                    what: format!("exact cycle distribution at n = {n}"),
                    limit: format!("n <= {MAX_EXACT_N}"),
                });
            }
            let mut d = empty_distribution(n, "exact", None);
            let mut m = vec![usize::MAX; 2 * n];
            enumerate_rec(&mut m, canonical, &mut d);
            Ok(d)
        }
        CycleMode::Sample { count, seed } => {
            let batches = count.div_ceil(BATCH);
            let parts: Vec<CycleDistribution> = (0..batches)
                .into_par_iter()
                .map(|b| {
                    let mut rng = stream_rng(seed, b);
                    let size = BATCH.min(count - b * BATCH);
                    let mut d = empty_distribution(n, "sample", Some(seed));
                    for _ in 0..size {
                        let m = sample_perfect_matching(2 * n, &mut rng).expect("even ground set");
                        record(&mut d, m.partners(), canonical);
                    }
                    d
                })
                .collect();
            let mut d = empty_distribution(n, "sample", Some(seed));
            for p in parts {
                absorb(&mut d, p);
            }
            Ok(d)
        }
    }
}

fn record(d: &mut CycleDistribution, m: &[usize], canonical: &[usize]) {
    let (f, k) = observe(m, canonical);
    d.samples += 1;
    *d.face_histogram.entry(f).or_default() += 1;
    d.cycle_length_counts[k - 1] += 1;
}

fn enumerate_rec(m: &mut [usize], canonical: &[usize], d: &mut CycleDistribution) {
    let Some(v) = m.iter().position(|&p| p == usize::MAX) else {
        record(d, m, canonical);
        return;
    };
    for w in v + 1..m.len() {
        if m[w] == usize::MAX {
            m[v] = w;
            m[w] = v;
            enumerate_rec(m, canonical, d);
            m[w] = usize::MAX;
        }
    }
    m[v] = usize::MAX;
}

/// How `E[m^F]` was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentMethod {
    /// Enumeration of all matchings.
    Enumeration,
    /// Conditioning on the cycle through `{0,1}`:
    /// `E_n = Σ_k p_k · m · E_{n−k}`, `E_0 = 1`.
    Recursion,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpectationBoundReport {
    pub n: usize,
    pub m: u64,
    pub method: MomentMethod,
    /// `E[m^F]` as an exact fraction.
    pub expectation: String,
    pub expectation_f64: f64,
    /// `C(m+n−1, m−1)`.
    pub bound: String,
    pub holds: bool,
    /// `C(3n−1, n)`, the bound at `m = 2n`.
    pub central_binomial: String,
    pub central_le_seven_pow: bool,
    /// `C(3n−1, n) ≤ 27^n / 4^n`.
    pub central_le_27_over_4_pow: bool,
}

/// `E[m^F]` for all `n' ≤ n` by the exact recursion.
pub fn moment_recursion(n: usize, m: u64) -> Vec<BigRational> {
    let mut e = vec![BigRational::one()];
    let mf = BigRational::from_integer(BigInt::from(m));
    for size in 1..=n {
        let mut acc = BigRational::zero();
        for k in 1..=size {
            acc += cycle_length_probability(size, k) * &mf * &e[size - k];
        }
        e.push(acc);
    }
    e
}

pub fn verify_expectation_bound(n: usize, m: u64) -> Result<ExpectationBoundReport> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    if m < 2 * n as u64 {
        return Err(Error::InvalidParameter(format!(
            "the bound needs m >= 2n, got m = {m} < {}",
            2 * n
        )));
    }
    let (method, expectation) = if n <= MAX_EXACT_N {
        (
            MomentMethod::Enumeration,
            cycle_distribution(n, CycleMode::Exact)?.moment(m),
        )
    } else {
        (MomentMethod::Recursion, moment_recursion(n, m).pop().expect("nonempty"))
    };
    let bound = binomial(BigUint::from(m + n as u64 - 1), BigUint::from(m - 1));
    let central = binomial(BigUint::from(3 * n as u64 - 1), BigUint::from(n as u64));
    let seven = BigUint::from(7u32).pow(n as u32);
    let scaled_central = &central * BigUint::from(4u32).pow(n as u32);
    let pow_27 = BigUint::from(27u32).pow(n as u32);
    let bound_q = BigRational::from_integer(BigInt::from(bound.clone()));
    Ok(ExpectationBoundReport {
        n,
        m,
        method,
        expectation: expectation.to_string(),
        expectation_f64: expectation.to_f64().unwrap_or(f64::NAN),
        bound: bound.to_string(),
        holds: expectation <= bound_q,
        central_binomial: central.to_string(),
        central_le_seven_pow: central <= seven,
        central_le_27_over_4_pow: scaled_central <= pow_27,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailRow {
    pub t: usize,
    pub probability: String,
    /// `C(3n−1, n) / (2n)^t`.
    pub binomial_bound: String,
    /// `7^n / (2n)^t`.
    pub seven_bound: String,
    pub holds: bool,
}

/// Exact Markov tail check `P[F ≥ t] ≤ C(3n−1,n)/(2n)^t ≤ 7^n/(2n)^t`
/// for every `t` from 0 to `n + 1`.
pub fn markov_tail_check(n: usize) -> Result<Vec<TailRow>> {
    let d = cycle_distribution(n, CycleMode::Exact)?;
    let central = BigInt::from(binomial(BigUint::from(3 * n as u64 - 1), BigUint::from(n as u64)));
    let seven = BigInt::from(7u32).pow(n as u32);
    let rows = (0..=n + 1)
        .map(|t| {
            let p = d.tail(t);
            let denom = BigInt::from(2 * n as u64).pow(t as u32);
            let b = BigRational::new(central.clone(), denom.clone());
            let s = BigRational::new(seven.clone(), denom);
            TailRow {
                t,
                probability: p.to_string(),
                binomial_bound: b.to_string(),
                seven_bound: s.to_string(),
                holds: p <= b && b <= s,
            }
        })
        .collect();
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThresholdReport {
    #[serde(rename = "D")]
    pub colors: usize,
    pub epsilon: f64,
    /// Least `n` with `n > ln(√(2e)/ε) / ln(e/2)`.
    pub n_epsilon: u64,
    /// Least `n ≥ 2` with `(D−2)n/2 > (D ln 7 − ln 2) n / ln n + D`;
    /// `None` when no such `n` exists.
    pub n_gap: Option<u64>,
    /// `D ln 7 − ln 2`.
    pub gap_constant: f64,
    /// `1 − √(2e) (2/e)^n` at `n_epsilon`.
    pub fraction_bound: f64,
    /// `A(n)` at `n_gap`.
    pub a_at_gap: Option<f64>,
}

pub fn gap_constant(colors: usize) -> f64 {
    colors as f64 * 7f64.ln() - 2f64.ln()
}

/// `A(n) = n + (D ln 7 − ln 2) n / ln n + D`.
pub fn scaling_threshold(colors: usize, n: u64) -> f64 {
    let nf = n as f64;
    nf + gap_constant(colors) * nf / nf.ln() + colors as f64
}

/// `1 − √(2e) (2/e)^n`.
pub fn fraction_bound(n: u64) -> f64 {
    1.0 - (2.0 * std::f64::consts::E).sqrt() * (2.0 / std::f64::consts::E).powf(n as f64)
}

fn gap_holds(colors: usize, n: u64) -> bool {
    let nf = n as f64;
    (colors as f64 - 2.0) * nf / 2.0 > gap_constant(colors) * nf / nf.ln() + colors as f64
}

pub fn threshold_report(colors: usize, epsilon: f64) -> Result<ThresholdReport> {
    if colors < 2 {
        return Err(Error::InvalidParameter(format!("D must be at least 2, got {colors}")));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    let x = ((2.0 * std::f64::consts::E).sqrt() / epsilon).ln() / (std::f64::consts::E / 2.0).ln();
    let n_epsilon = x.floor() as u64 + 1;

    // Dividing by n, the gap reads (D−2)/2 − c/ln n − D/n > 0, whose left
    // side increases with n; for D = 2 it is always negative.
    let n_gap = if colors == 2 {
        None
    } else {
        let mut hi = 2u64;
        while !gap_holds(colors, hi) {
            hi *= 2;
        }
        let mut lo = hi / 2;
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if gap_holds(colors, mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Some(if gap_holds(colors, lo) { lo } else { hi })
    };
    Ok(ThresholdReport {
        colors,
        epsilon,
        n_epsilon,
        n_gap,
        gap_constant: gap_constant(colors),
        fraction_bound: fraction_bound(n_epsilon),
        a_at_gap: n_gap.map(|n| scaling_threshold(colors, n)),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComponentVerdict {
    pub vertex_map: Vec<usize>,
    pub n: usize,
    #[serde(rename = "F_max")]
    pub f_max: usize,
    /// `2 F_max > D n` on this component.
    pub lemma_holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Candidate {
    pub trial: u64,
    pub graph: ColoredGraph,
    pub report: ScalingReport,
    pub components: Vec<ComponentVerdict>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchReport {
    #[serde(rename = "D")]
    pub colors: usize,
    pub n: usize,
    pub trials: u64,
    pub seed: u64,
    /// `F_max ↦ number of exactly solved trials`.
    pub distribution: BTreeMap<usize, u64>,
    /// The same restricted to connected samples.
    pub connected_distribution: BTreeMap<usize, u64>,
    /// Trials exceeding `q + (D−1) n` for `q` components; always empty
    /// unless something is broken.
    pub envelope_violations: Vec<u64>,
    /// Trials with `F_max < D n / 2`.
    pub lemma_violators: Vec<Candidate>,
    /// Trials with `F_max < A(n)`.
    pub below_threshold: Vec<u64>,
    pub threshold: f64,
    /// Trials whose search hit the node limit; never counted above.
    pub inexact: Vec<u64>,
}

impl SearchReport {
    pub fn distribution_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["F_max", "count"]).expect("in-memory write");
        for (f, c) in &self.distribution {
            w.write_record([f.to_string(), c.to_string()]).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("ascii")
    }
}

/// Samples `trials` random graphs and solves each exactly. Each trial
/// draws from its own stream `(seed, trial)`.
pub fn counterexample_search(
    colors: usize,
    n: usize,
    trials: u64,
    seed: u64,
    config: &SearchConfig,
) -> Result<SearchReport> {
    if colors < 1 || n < 1 {
        return Err(Error::InvalidParameter("need D >= 1 and n >= 1".into()));
    }
    if 2 * n > config.max_scaling_vertices {
        return Err(Error::BudgetExceeded {
            what: format!("scaling search on {} vertices", 2 * n),
            limit: format!("{} vertices", config.max_scaling_vertices),
        });
    }
    let inner = SearchConfig {
        parallel: false,
        ..config.clone()
    };
    let outcomes: Vec<Result<(u64, ColoredGraph, ScalingReport, Vec<ComponentVerdict>)>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream_rng(seed, t);
            let g = sample_colored_graph(colors, n, &mut rng)?;
            let report = max_scaling(&g, false, &inner)?;
            let comps = g
                .connected_components()
                .into_iter()
                .map(|c| {
                    let r = max_scaling(&c.graph, false, &inner)?;
                    let cn = c.graph.half_order();
                    Ok(ComponentVerdict {
                        vertex_map: c.vertex_map,
                        n: cn,
                        f_max: r.f_max,
                        lemma_holds: r.exact && 2 * r.f_max > colors * cn,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((t, g, report, comps))
        })
        .collect();

    let threshold = scaling_threshold(colors, n as u64);
    let mut out = SearchReport {
        colors,
        n,
        trials,
        seed,
        distribution: BTreeMap::new(),
        connected_distribution: BTreeMap::new(),
        envelope_violations: Vec::new(),
        lemma_violators: Vec::new(),
        below_threshold: Vec::new(),
        threshold,
        inexact: Vec::new(),
    };
    for o in outcomes {
        let (t, g, report, components) = o?;
        if !report.exact {
            out.inexact.push(t);
            continue;
        }
        *out.distribution.entry(report.f_max).or_default() += 1;
        if components.len() == 1 {
            *out.connected_distribution.entry(report.f_max).or_default() += 1;
        }
        if report.f_max > components.len() + (colors - 1) * n {
            out.envelope_violations.push(t);
        }
        if (report.f_max as f64) < threshold {
            out.below_threshold.push(t);
        }
        if 2 * report.f_max < colors * n {
            out.lemma_violators.push(Candidate {
                trial: t,
                graph: g,
                report,
                components,
            });
        }
    }
    Ok(out)
}
