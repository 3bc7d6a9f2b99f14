mod common;

use gtensor::faces::{boundary_graph, count_bicolored_cycles, euler_d3, total_faces, BoundaryState};
use gtensor::graph::{random_colored_graph, random_melonic, random_perfect_matching, ColoredGraph, Matching};
use gtensor::rng::seeded_rng;
use proptest::prelude::*;
use rand::seq::SliceRandom;

fn from_partners(p: &[usize]) -> Matching {
    Matching::perfect_from_pairs(p.len(), (0..p.len()).filter(|&x| x < p[x]).map(|x| (x, p[x]))).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn cycle_count_matches_search(n in 1usize..10, s1 in any::<u64>(), s2 in any::<u64>()) {
        let a = random_perfect_matching(2 * n, s1).unwrap();
        let b = random_perfect_matching(2 * n, s2).unwrap();
        prop_assert_eq!(count_bicolored_cycles(&a, &b).unwrap(), common::cycles(a.partners(), b.partners()));
    }

    #[test]
    fn face_count_fields_are_consistent(d in 1usize..5, n in 1usize..8, s in any::<u64>()) {
        let g = random_colored_graph(d, n, s).unwrap();
        let m0 = random_perfect_matching(2 * n, s ^ 0x5a5a).unwrap();
        let f = total_faces(&m0, &g).unwrap();
        prop_assert_eq!(f.total, f.per_color.iter().sum::<usize>());
        prop_assert_eq!(f.total, common::faces(m0.partners(), &g));
        prop_assert_eq!(f.g_connected, common::connected_with(m0.partners(), &g));
        prop_assert_eq!(f.omega, common::omega(m0.partners(), &g));
        if let Some(w) = f.omega {
            prop_assert!(w >= 0);
        }
    }

    #[test]
    fn absorbing_in_any_order_counts_faces(d in 1usize..5, n in 1usize..8, s in any::<u64>()) {
        let g = random_colored_graph(d, n, s).unwrap();
        let m0 = random_perfect_matching(2 * n, s.wrapping_add(1)).unwrap();
        let mut pairs = m0.pair_list();
        pairs.shuffle(&mut seeded_rng(s));
        let mut state = BoundaryState::new(&g);
        for c in 0..d {
            for v in 0..2 * n {
                prop_assert_eq!(state.boundary_partner(c, v), Some(g.matching(c).partners()[v]));
            }
        }
        let mut absorbed = 0;
        for (u, v) in pairs {
            let (u, v) = if s % 2 == 0 { (u, v) } else { (v, u) };
            state.absorb(u, v).unwrap();
            absorbed += 1;
            prop_assert_eq!(state.free_count(), 2 * n - 2 * absorbed);
            prop_assert!(!state.is_free(u) && !state.is_free(v));
        }
        prop_assert_eq!(state.total_closed(), common::faces(m0.partners(), &g));
        prop_assert_eq!(state.absorbed(), m0);
    }

    #[test]
    fn boundary_graph_predicts_remaining_faces(d in 1usize..5, n in 2usize..7, k in 0usize..6, s in any::<u64>()) {
        // Faces of a completion = faces closed by the partial pairing plus
        // faces of the rest against the boundary graph.
        let g = random_colored_graph(d, n, s).unwrap();
        let m0 = random_perfect_matching(2 * n, s.wrapping_mul(3)).unwrap();
        let pairs = m0.pair_list();
        let k = k.min(n);
        let partial = Matching::from_pairs(2 * n, pairs[..k].iter().copied()).unwrap();
        let mut state = BoundaryState::new(&g);
        for &(u, v) in &pairs[..k] {
            state.absorb(u, v).unwrap();
        }
        let b = boundary_graph(&g, &partial).unwrap();
        prop_assert_eq!(b.graph.vertex_count(), 2 * n - 2 * k);
        let mut local = vec![usize::MAX; 2 * n];
        for (i, &v) in b.vertex_map.iter().enumerate() {
            local[v] = i;
        }
        let rest: Vec<usize> = b.vertex_map.iter().map(|&v| local[m0.partners()[v]]).collect();
        let rest_faces = if rest.is_empty() { 0 } else { common::faces(&rest, &b.graph) };
        prop_assert_eq!(state.total_closed() + rest_faces, common::faces(m0.partners(), &g));
    }
}

/// Degree is non-negative for every graph and every pairing, over all
/// labelled graphs in the smallest sizes and random graphs above.
#[test]
fn omega_is_never_negative() {
    let check = |g: &ColoredGraph, ms: &[Vec<usize>]| {
        for m in ms {
            if let Some(w) = total_faces(&from_partners(m), g).unwrap().omega {
                assert!(w >= 0, "{g:?} {m:?}");
            }
        }
    };
    for v in [2usize, 4, 6] {
        let ms = common::all_matchings(v);
        for d in 1..=3 {
            let mut idx = vec![0usize; d];
            'all: loop {
                let pairs: Vec<Vec<(usize, usize)>> = idx
                    .iter()
                    .map(|&i| (0..v).filter(|&x| x < ms[i][x]).map(|x| (x, ms[i][x])).collect())
                    .collect();
                check(&ColoredGraph::from_pairs(v, &pairs).unwrap(), &ms);
                let mut i = 0;
                loop {
                    if i == d {
                        break 'all;
                    }
                    idx[i] += 1;
                    if idx[i] < ms.len() {
                        break;
                    }
                    idx[i] = 0;
                    i += 1;
                }
            }
        }
    }
    let ms8 = common::all_matchings(8);
    for i in 0..ms8.len() {
        for j in 0..ms8.len() {
            let g = ColoredGraph::new(vec![from_partners(&ms8[i]), from_partners(&ms8[j])]).unwrap();
            check(&g, &ms8);
        }
    }
    let ms10 = common::all_matchings(10);
    for seed in 0..40 {
        for d in [3usize, 4] {
            check(&random_colored_graph(d, 4, seed).unwrap(), &ms8);
            check(&random_colored_graph(d, 5, seed).unwrap(), &ms10);
        }
    }
}

#[test]
fn melonic_graphs_are_planar() {
    for k in 0..=5 {
        for seed in 0..30 {
            let g = random_melonic(3, k, seed).unwrap();
            let r = euler_d3(&g).unwrap();
            assert!(r.is_planar, "{g:?}");
            assert_eq!(r.total_faces, g.half_order() + 2 * r.components);
        }
    }
}
