use std::collections::BTreeSet;

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sst_core::fixtures::{self, ids, random_connected};
use sst_core::topology::{
    adjacency_matrix, ccc, centrality, coarsen, coarsen_to_fixed_point, degrees, hop_distance,
    hop_distances, is_irreducible, scc, undirected_neighbours, AdjacencyMatrix,
};
use sst_core::{aid, AgentId};

fn matrix_from_bits(n: usize, bits: u32) -> AdjacencyMatrix {
    let rows: Vec<Vec<i64>> = (0..n)
        .map(|r| (0..n).map(|c| ((bits >> (r * n + c)) & 1) as i64).collect())
        .collect();
    let refs: Vec<&[i64]> = rows.iter().map(Vec::as_slice).collect();
    let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    AdjacencyMatrix::from_rows(names.iter().map(|s| aid(s)).collect(), &refs)
}

/// Transitive closure by Floyd-Warshall: `reach[i][j]` iff a path of at
/// least one edge leads from i to j.
fn closure(m: &AdjacencyMatrix) -> Vec<Vec<bool>> {
    let n = m.len();
    let mut r: Vec<Vec<bool>> = (0..n)
        .map(|i| (0..n).map(|j| m.positive(i, j)).collect())
        .collect();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                r[i][j] = r[i][j] || (r[i][k] && r[k][j]);
            }
        }
    }
    r
}

fn oracle_blocks(m: &AdjacencyMatrix) -> BTreeSet<BTreeSet<AgentId>> {
    let r = closure(m);
    (0..m.len())
        .map(|i| {
            (0..m.len())
                .filter(|&j| i == j || (r[i][j] && r[j][i]))
                .map(|j| m.order[j].clone())
                .collect()
        })
        .collect()
}

fn oracle_irreducible(m: &AdjacencyMatrix) -> bool {
    !m.is_empty() && closure(m).iter().all(|row| row.iter().all(|&b| b))
}

#[test]
fn scc_and_irreducibility_match_reachability_on_all_small_digraphs() {
    for n in 1..=3usize {
        for bits in 0..(1u32 << (n * n)) {
            let m = matrix_from_bits(n, bits);
            let got: BTreeSet<_> = scc(&m).blocks.into_iter().collect();
            assert_eq!(got, oracle_blocks(&m), "n={n} bits={bits:b}");
            assert_eq!(
                is_irreducible(&m),
                oracle_irreducible(&m),
                "n={n} bits={bits:b}"
            );
        }
    }
}

#[test]
fn g4_degrees_sum_to_edge_count() {
    let m = adjacency_matrix(&fixtures::g4());
    let d = degrees(&m);
    let edges: i64 = m.entries.iter().flatten().map(|v| *v.numer()).sum();
    assert_eq!(d.k_out.iter().sum::<i64>(), edges);
    assert_eq!(d.k_in.iter().sum::<i64>(), edges);
}

/// Dense oracle: the Perron root is the spectral radius; its eigenvector
/// spans the null space of `M - rI`, read off the smallest singular value.
/// Works on `M + I`, which has the same eigenvectors but no eigenvalues of
/// equal modulus to stall the Schur iteration.
fn dense_perron(m: &AdjacencyMatrix) -> Vec<f64> {
    let n = m.len();
    let a = DMatrix::from_fn(n, n, |r, c| m.to_f64()[r][c]) + DMatrix::identity(n, n);
    let radius = a
        .clone()
        .try_schur(1e-14, 10_000)
        .expect("schur converges")
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0f64, f64::max);
    let shifted = &a - DMatrix::identity(n, n) * radius;
    let svd = shifted.svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let k = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.partial_cmp(y.1).expect("finite"))
        .map(|(i, _)| i)
        .expect("nonempty");
    let mut v: Vec<f64> = v_t.row(k).iter().copied().collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let sign = if v.iter().sum::<f64>() < 0.0 {
        -1.0
    } else {
        1.0
    };
    v.iter_mut().for_each(|x| *x *= sign / norm);
    v
}

#[test]
fn centrality_matches_dense_eigensolve_on_strongly_connected_three_node_graphs() {
    let mut checked = 0;
    for bits in 0..(1u32 << 9) {
        let m = matrix_from_bits(3, bits);
        if !is_irreducible(&m) {
            continue;
        }
        let got = centrality(&m, 1e-13, 100_000).expect("irreducible converges");
        let want = dense_perron(&m);
        for (g, w) in got.iter().zip(&want) {
            assert!(
                (g - w).abs() < 1e-6,
                "bits={bits:b} got={got:?} want={want:?}"
            );
        }
        checked += 1;
    }
    assert!(checked > 0);
}

#[test]
fn hop_distance_is_symmetric_on_bindings_and_satisfies_triangle_inequality() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..40 {
        let n = 2 + (rand::Rng::random_range(&mut rng, 0..9));
        let w = random_connected(&mut rng, n, 3);
        let all = w.agent_ids();
        for a in &all {
            let da = hop_distances(&w, a);
            for b in &all {
                assert_eq!(
                    hop_distance(&w, a, b).unwrap(),
                    hop_distance(&w, b, a).unwrap()
                );
                let db = hop_distances(&w, b);
                for c in &all {
                    assert!(da[c] <= da[b] + db[c]);
                }
            }
        }
    }
}

#[test]
fn ccc_blocks_are_maximal_cliques() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..40 {
        let w = random_connected(&mut rng, 7, 8);
        let nb = undirected_neighbours(&w);
        let cliques = ccc(&w);
        for c in &cliques {
            for a in c {
                for b in c {
                    assert!(a == b || nb[a].contains(b));
                }
            }
            let extendable = w
                .agents()
                .any(|x| !c.contains(x) && c.iter().all(|m| nb[m].contains(x)));
            assert!(!extendable, "{c:?} is not maximal");
        }
        for a in w.agents() {
            assert!(cliques.iter().any(|c| c.contains(a)));
        }
    }
}

#[test]
fn coarsening_keeps_connected_worlds_connected_and_shrinks_them() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..60 {
        let w = random_connected(&mut rng, 9, 10);
        let c = coarsen(&w, 4);
        assert!(c.agent_count() <= w.agent_count());
        let first = c.agent_ids()[0].clone();
        assert_eq!(hop_distances(&c, &first).len(), c.agent_count());
        let (fixed, _) = coarsen_to_fixed_point(&w, 4, 50);
        assert_eq!(coarsen(&fixed, 4), fixed);
    }
}

#[test]
fn coarsening_maps_every_agent_into_exactly_one_image() {
    let w = fixtures::bridged_triangles();
    let c = coarsen(&w, 3);
    let covered: Vec<String> = c
        .agents()
        .flat_map(|a| {
            a.as_str()
                .split('+')
                .map(str::to_string)
                .collect::<Vec<_>>()
        })
        .collect();
    let mut sorted = covered.clone();
    sorted.sort();
    sorted.dedup();
    assert_eq!(sorted.len(), covered.len());
    assert_eq!(
        sorted,
        ids(&["a1", "a2", "a3", "b1", "b2", "b3"])
            .iter()
            .map(|a| a.to_string())
            .collect::<Vec<_>>()
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn degree_sums_agree(n in 1usize..=5, bits in any::<u32>()) {
        let mask = if n * n >= 32 { u32::MAX } else { (1u32 << (n * n)) - 1 };
        let m = matrix_from_bits(n, bits & mask);
        let d = degrees(&m);
        prop_assert_eq!(d.k_out.iter().sum::<i64>(), d.k_in.iter().sum::<i64>());
    }

    #[test]
    fn scc_is_a_partition_matching_the_oracle(n in 1usize..=5, bits in any::<u32>()) {
        let mask = if n * n >= 32 { u32::MAX } else { (1u32 << (n * n)) - 1 };
        let m = matrix_from_bits(n, bits & mask);
        let p = scc(&m);
        let members: usize = p.blocks.iter().map(BTreeSet::len).sum();
        prop_assert_eq!(members, n);
        let flat: BTreeSet<_> = p.blocks.iter().flatten().cloned().collect();
        prop_assert_eq!(flat.len(), n);
        prop_assert_eq!(p.blocks.iter().cloned().collect::<BTreeSet<_>>(), oracle_blocks(&m));
        prop_assert_eq!(is_irreducible(&m), oracle_irreducible(&m));
    }
}
