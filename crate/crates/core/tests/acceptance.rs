//! Acceptance suite. Runs without the libtest harness so that one
//! PASS/FAIL line per criterion is always printed; exits non-zero if any
//! criterion fails.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use gtensor::faces::{euler_d3, total_faces};
use gtensor::graph::{named, random_colored_graph, random_melonic, sample_connected_graph, ColoredGraph, Matching};
use gtensor::montecarlo::{
    cycle_distribution, cycle_length_probability, threshold_report, verify_expectation_bound, CycleMode,
};
use gtensor::numeric::{mc_moment, orthogonal_invariance_check};
use gtensor::partitions::{cumulants_from_moments, SubsetMap};
use gtensor::poly::{Exponent, LaurentPoly};
use gtensor::rng::seeded_rng;
use gtensor::wick::{
    cumulant_poly, default_nu, enumerate_histogram, expectation_poly, max_scaling, subadditivity_check, PruneBound,
    SearchConfig,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

fn pairs_of(p: &[usize]) -> Matching {
    Matching::perfect_from_pairs(p.len(), (0..p.len()).filter(|&x| x < p[x]).map(|x| (x, p[x]))).unwrap()
}

fn melonic_saturation() {
    let mut sizes = BTreeSet::new();
    for i in 0..50u64 {
        let k = (i % 6) as usize;
        let g = random_melonic(3, k, 1000 + i).unwrap();
        let n = g.half_order();
        sizes.insert(n);
        assert!(g.is_connected() && 2 * n <= 12);
        let top = 1 + 2 * n;
        let h = common::histogram(&g, false);
        for &f in h.keys() {
            assert!(top as i64 - f as i64 >= 0, "omega < 0 on {g:?}");
        }
        assert_eq!(h.get(&top), Some(&1), "{g:?}");
        let r = max_scaling(&g, false, &SearchConfig::default()).unwrap();
        assert_eq!((r.f_max, r.num_optimal, r.omega_min), (top, 1, Some(0)));
        let canonical = g.is_melonic().unwrap().canonical_pairing.unwrap();
        assert_eq!(total_faces(&canonical, &g).unwrap().total, top);
        assert_eq!(canonical, r.witness);
    }
    assert_eq!(sizes.len(), 6);
}

fn catalan_counts() {
    for n in 1..=6usize {
        let v = 2 * n;
        let first = Matching::canonical(n);
        let mut graphs = 0u128;
        for m in common::all_matchings(v) {
            let g = ColoredGraph::new(vec![first.clone(), pairs_of(&m)]).unwrap();
            if !g.is_connected() {
                continue;
            }
            graphs += 1;
            let h = enumerate_histogram(&g, false, &SearchConfig::default()).unwrap();
            let zero_degree = h.counts.get(&(n + 1)).copied().unwrap_or(0) as u128;
            assert_eq!(zero_degree, common::catalan(n as u64), "n = {n}");
        }
        assert_eq!(graphs, (1..n as u128).product::<u128>() << (n - 1));
    }
    assert_eq!(common::catalan(6), 132);
}

fn mobius_consistency() {
    let cfg = SearchConfig::default();
    let dipole = ColoredGraph::new_dipole(3).unwrap();
    let mut rng = seeded_rng(31);
    let lists: Vec<Vec<ColoredGraph>> = vec![
        vec![dipole.clone(), dipole.clone()],
        vec![dipole.clone(), dipole.clone(), dipole.clone(), dipole.clone()],
        vec![named::quartic_melon(), dipole.clone(), dipole.clone()],
        (0..4)
            .map(|i| sample_connected_graph(2, 1 + i % 2, &mut rng).unwrap())
            .collect(),
        (0..3)
            .map(|i| sample_connected_graph(3, 1 + i % 2, &mut rng).unwrap())
            .collect(),
        vec![
            sample_connected_graph(4, 2, &mut rng).unwrap(),
            sample_connected_graph(4, 1, &mut rng).unwrap(),
        ],
    ];
    for graphs in lists {
        let q = graphs.len();
        let nu = default_nu(graphs[0].colors());
        let sub = |s: u32| {
            let parts: Vec<ColoredGraph> = (0..q).filter(|i| s >> i & 1 == 1).map(|i| graphs[i].clone()).collect();
            ColoredGraph::disjoint_union_all(&parts).unwrap()
        };
        let moments: SubsetMap<LaurentPoly> =
            SubsetMap::try_from_fn(q, |s| Ok(expectation_poly(&sub(s), nu, &cfg)?.poly)).unwrap();
        let cumulants = cumulants_from_moments(&moments).unwrap();
        for s in 1..(1u32 << q) {
            assert_eq!(
                cumulants.get(s).unwrap(),
                &cumulant_poly(&sub(s), nu, &cfg).unwrap().poly
            );
        }
    }
}

fn melonic_subadditivity() {
    let cfg = SearchConfig::default();
    for i in 0..20u64 {
        let q = 2 + (i % 2) as usize;
        let graphs: Vec<ColoredGraph> = (0..q)
            .map(|j| random_melonic(3, ((i as usize) + j) % 3, 50 * i + j as u64).unwrap())
            .collect();
        let r = subadditivity_check(&graphs, &cfg).unwrap();
        let total_n: usize = graphs.iter().map(|g| g.half_order()).sum();
        let expected = 3 + 2 * total_n - 2 * q;
        assert!(r.exact);
        assert_eq!(r.lhs, expected);
        assert!(r.strict_subadditive && r.lhs < r.rhs);
    }
}

fn self_pairing() {
    let mut rng = seeded_rng(404);
    for i in 0..100usize {
        let d = 3 + i % 2;
        let n = 1 + i % 7;
        let g = sample_connected_graph(d, n, &mut rng).unwrap();
        let f = total_faces(&Matching::copy_pairing(n), &g.disjoint_union(&g).unwrap()).unwrap();
        assert_eq!(f.total, d * n);
    }
}

fn random_matching_cycle_statistics() {
    for n in 1..=7usize {
        let d = cycle_distribution(n, CycleMode::Exact).unwrap();
        let mut sum = BigRational::zero();
        let mut prev = BigRational::zero();
        for k in 1..=n {
            let p = cycle_length_probability(n, k);
            assert_eq!(d.p_exact(k), p);
            assert!(p > prev, "p_k not increasing at n = {n}, k = {k}");
            prev = p.clone();
            sum += p;
        }
        assert_eq!(sum, BigRational::one());
        for m in [2 * n as u64, 2 * n as u64 + 3] {
            assert!(verify_expectation_bound(n, m).unwrap().holds, "n = {n}, m = {m}");
        }
        let seven = BigInt::from(7).pow(n as u32);
        for t in 0..=n + 2 {
            let bound = BigRational::new(seven.clone(), BigInt::from(2 * n).pow(t as u32));
            assert!(d.tail(t) <= bound, "n = {n}, t = {t}");
        }
    }
    let n = 30;
    let s = cycle_distribution(
        n,
        CycleMode::Sample {
            count: 1_000_000,
            seed: 12,
        },
    )
    .unwrap();
    for k in 1..=n {
        let p: f64 = num_traits::ToPrimitive::to_f64(&cycle_length_probability(n, k)).unwrap();
        let sigma = (p * (1.0 - p) / s.samples as f64).sqrt();
        assert!((s.p_hat(k) - p).abs() < 5.0 * sigma, "k = {k}: {} vs {p}", s.p_hat(k));
    }
    let mean: f64 = s.face_histogram.iter().map(|(&f, &c)| f as f64 * c as f64).sum::<f64>() / s.samples as f64;
    // E[F] = Σ_{j=1}^{n} 1/(2j−1).
    let exact: f64 = (1..=n).map(|j| 1.0 / (2 * j - 1) as f64).sum();
    let var: f64 = s
        .face_histogram
        .iter()
        .map(|(&f, &c)| (f as f64 - mean).powi(2) * c as f64)
        .sum::<f64>()
        / s.samples as f64;
    assert!((mean - exact).abs() < 5.0 * (var / s.samples as f64).sqrt());
}

fn wick_monte_carlo() {
    let nu = Exponent::from_integer(2);
    let cfg = SearchConfig::default();
    let cases = [
        (ColoredGraph::new_dipole(3).unwrap(), [(2i64, 1i64), (3, 1)]),
        (named::quartic_melon(), [(7, 2), (13, 3)]),
    ];
    for (g, values) in cases {
        let p = expectation_poly(&g, nu, &cfg).unwrap();
        for (dim, (num, den)) in [2usize, 3].into_iter().zip(values) {
            let exact = p.eval(dim as f64);
            assert!(
                (exact - num as f64 / den as f64).abs() < 1e-12,
                "{exact} vs {num}/{den}"
            );
            let e = mc_moment(&[g.clone()], dim, nu, 1_000_000, 100 + dim as u64).unwrap();
            assert!(
                (e.mean - exact).abs() < 5.0 * e.standard_error,
                "N = {dim}: {} ± {} vs {exact}",
                e.mean,
                e.standard_error
            );
        }
    }
}

fn orthogonal_invariance() {
    for i in 0..20u64 {
        let d = 2 + (i % 3) as usize;
        let n = 1 + (i % 4) as usize;
        let g = random_colored_graph(d, n, 7000 + i).unwrap();
        let r = orthogonal_invariance_check(&g, 3, i).unwrap();
        assert!(r.deviation < 1e-9, "{r:?}");
    }
}

/// Every labelled graph reachable from the dipole by melon insertions,
/// up to `max_n`.
fn all_melonic(max_n: usize) -> Vec<ColoredGraph> {
    let mut layer = vec![ColoredGraph::new_dipole(3).unwrap()];
    let mut out = layer.clone();
    for _ in 1..max_n {
        let mut next = BTreeSet::new();
        for g in &layer {
            for c in 0..3 {
                for e in g.matching(c).pair_list() {
                    let h = g.melon_insert(c, e).unwrap();
                    next.insert(common::partners(&h));
                }
            }
        }
        layer = next
            .into_iter()
            .map(|ps| {
                let pairs: Vec<Vec<(usize, usize)>> = ps
                    .iter()
                    .map(|p| (0..p.len()).filter(|&x| x < p[x]).map(|x| (x, p[x])).collect())
                    .collect();
                ColoredGraph::from_pairs(ps[0].len(), &pairs).unwrap()
            })
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

fn euler_planarity() {
    let melonic = all_melonic(6);
    let mut planar: Vec<ColoredGraph> = Vec::new();
    for g in &melonic {
        let r = euler_d3(g).unwrap();
        assert!(
            r.is_planar && r.total_faces == g.half_order() + 2 * r.components,
            "{g:?}"
        );
    }
    let mut rng = seeded_rng(9);
    for i in 0..60usize {
        planar.push(melonic[(i * 7919) % melonic.len()].clone());
        let g = sample_connected_graph(3, 1 + i % 6, &mut rng).unwrap();
        if euler_d3(&g).unwrap().is_planar {
            planar.push(g);
        }
    }
    let k33 = euler_d3(&named::hexagon_k33()).unwrap();
    assert!(!k33.is_planar);
    for g in &planar {
        let n = g.half_order();
        let q = g.component_count();
        let r = max_scaling(g, false, &SearchConfig::default()).unwrap();
        assert!(r.exact);
        assert!(2 * r.f_max > 3 * n + 2 * q, "{g:?}: F_max {}", r.f_max);
    }
    println!(
        "  ({} melonic labelled graphs, {} planar instances scaled)",
        melonic.len(),
        planar.len()
    );
}

fn differential() {
    let mut rng = seeded_rng(77);
    use rand::Rng;
    for i in 0..500u64 {
        let d = 1 + (i % 4) as usize;
        let n = rng.random_range(1..=6usize);
        let g = random_colored_graph(d, n, i).unwrap();
        let connected_only = i % 3 == 0;
        let naive = common::histogram(&g, connected_only);
        let bound = if i % 2 == 0 {
            PruneBound::Degree
        } else {
            PruneBound::Simple
        };
        let seq_cfg = SearchConfig {
            bound,
            ..SearchConfig::sequential()
        };
        let par_cfg = SearchConfig {
            bound,
            ..SearchConfig::default()
        };
        let seq = max_scaling(&g, connected_only, &seq_cfg).unwrap();
        let par = max_scaling(&g, connected_only, &par_cfg).unwrap();
        let (&f, &count) = naive.iter().next_back().unwrap();
        assert_eq!((seq.f_max, seq.num_optimal), (f, count), "{g:?}");
        assert_eq!(common::faces(seq.witness.partners(), &g), f);
        assert_eq!(
            serde_json::to_string(&seq).unwrap(),
            serde_json::to_string(&par).unwrap()
        );
    }
}

fn thresholds() {
    let r = threshold_report(3, 0.01).unwrap();
    assert_eq!(r.n_epsilon, 18);
    let gap = r.n_gap.unwrap() as f64;
    let order = 7f64.powi(6);
    assert!(gap >= order / 10.0 && gap <= order * 10.0, "n_gap {gap}");
    assert_eq!(threshold_report(2, 0.01).unwrap().n_gap, None);
}

fn main() {
    let criteria: [(&str, fn()); 11] = [
        ("1 melonic saturation and zero degree", melonic_saturation),
        ("2 Catalan count of zero-degree pairings", catalan_counts),
        ("3 moment-cumulant inversion", mobius_consistency),
        ("4 melonic strict subadditivity", melonic_subadditivity),
        ("5 copy pairing faces", self_pairing),
        ("6 random matching cycle statistics", random_matching_cycle_statistics),
        ("7 Wick expectation vs Monte Carlo", wick_monte_carlo),
        ("8 orthogonal invariance", orthogonal_invariance),
        ("9 Euler characteristic and planarity", euler_planarity),
        ("10 branch and bound vs exhaustive", differential),
        ("11 size thresholds", thresholds),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let start = Instant::now();
        let ok = catch_unwind(AssertUnwindSafe(f)).is_ok();
        let secs = start.elapsed().as_secs_f64();
        println!("{} criterion {name} ({secs:.1}s)", if ok { "PASS" } else { "FAIL" });
        if !ok {
            failed += 1;
        }
    }
    println!("{} of 11 criteria passed", 11 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
