use std::collections::BTreeSet;

use num_rational::Rational64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sst_core::coordinates::{coordinates, decompose, spanning_basis, verify_basis, MatroidBasis};
use sst_core::fixtures::{self, random_connected};
use sst_core::sstg::{parse_bases, parse_sstg};
use sst_core::topology::{adjacency_matrix, AdjacencyMatrix};
use sst_core::{aid, World};

fn load(name: &str) -> String {
    std::fs::read_to_string(format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR")))
        .expect("fixture file")
}

fn dimgraph0() -> World {
    parse_sstg(&load("dimgraph0.sstg")).expect("fixture parses")
}

fn basis(name: &str, w: &World) -> MatroidBasis {
    parse_bases(&load(name), w).expect("basis parses").remove(0)
}

/// Matrix over v1..v5 from entries given in halves.
fn halves(rows: [[i64; 5]; 5]) -> Vec<Vec<Rational64>> {
    rows.iter()
        .map(|r| r.iter().map(|&x| Rational64::new(x, 2)).collect())
        .collect()
}

fn sum(parts: &[Vec<Vec<Rational64>>]) -> Vec<Vec<Rational64>> {
    let mut out = vec![vec![Rational64::from_integer(0); 5]; 5];
    for p in parts {
        for r in 0..5 {
            for c in 0..5 {
                out[r][c] += p[r][c];
            }
        }
    }
    out
}

fn printed_example1() -> Vec<Vec<Vec<Rational64>>> {
    vec![
        halves([[2, 0, 0, 0, 0], [0; 5], [0; 5], [0; 5], [0; 5]]),
        halves([
            [0, 1, 0, 0, 0],
            [1, 0, 1, 0, 0],
            [0, 1, 0, 2, 0],
            [0, 0, 2, 0, 0],
            [0; 5],
        ]),
        halves([
            [0, 1, 0, 0, 0],
            [1, 0, 1, 0, 0],
            [0, 1, 0, 0, 0],
            [0, 0, 0, 0, 2],
            [0, 0, 0, 2, 0],
        ]),
    ]
}

/// Moves the printed 4-5 entries to 3-5, the edge the graph actually has.
fn relabel_45_to_35(mut m: Vec<Vec<Rational64>>) -> Vec<Vec<Rational64>> {
    let zero = Rational64::from_integer(0);
    if m[3][4] != zero {
        m[2][4] = m[3][4];
        m[4][2] = m[4][3];
        m[3][4] = zero;
        m[4][3] = zero;
    }
    m
}

#[test]
fn printed_appendix_parts_do_not_sum_to_the_printed_matrix() {
    let a = adjacency_matrix(&dimgraph0()).entries;
    assert_ne!(sum(&printed_example1()), a);
    let corrected: Vec<_> = printed_example1()
        .into_iter()
        .map(relabel_45_to_35)
        .collect();
    assert_eq!(sum(&corrected), a);
}

#[test]
fn example1_parts_match_the_printed_parts_after_the_edge_relabel() {
    let w = dimgraph0();
    let d = decompose(&adjacency_matrix(&w), &basis("example1.basis", &w)).unwrap();
    let want: Vec<_> = printed_example1()
        .into_iter()
        .map(relabel_45_to_35)
        .collect();
    let got: Vec<_> = d.parts.iter().map(|p| p.entries.clone()).collect();
    assert_eq!(got, want);
    assert_eq!(d.sum().unwrap().entries, adjacency_matrix(&w).entries);
}

#[test]
fn example3_parts_match_the_printed_parts_after_the_edge_relabel() {
    let w = dimgraph0();
    let d = decompose(&adjacency_matrix(&w), &basis("example3.basis", &w)).unwrap();
    let printed = vec![
        halves([[2, 0, 0, 0, 0], [0; 5], [0; 5], [0; 5], [0; 5]]),
        halves([[0, 2, 0, 0, 0], [2, 0, 0, 0, 0], [0; 5], [0; 5], [0; 5]]),
        halves([
            [0; 5],
            [0, 0, 2, 0, 0],
            [0, 2, 0, 2, 0],
            [0, 0, 2, 0, 2],
            [0, 0, 0, 2, 0],
        ]),
    ];
    let mut want = printed.clone();
    // Printed I3 runs 2-3-4-5; the graph branches 3-4, 3-5.
    want[2][3][4] = Rational64::from_integer(0);
    want[2][4][3] = Rational64::from_integer(0);
    want[2][2][4] = Rational64::from_integer(1);
    want[2][4][2] = Rational64::from_integer(1);
    let got: Vec<_> = d.parts.iter().map(|p| p.entries.clone()).collect();
    assert_eq!(got, want);
}

#[test]
fn appendix_tuples_from_fixture_files() {
    let w = dimgraph0();
    let t = |b: &str| coordinates(&w, &basis(b, &w)).unwrap().tuples;
    let ex1 = t("example1.basis");
    let want1 = [[1, 1, 1], [0, 1, 1], [0, 2, 2], [0, 3, 0], [0, 0, 3]];
    for (i, row) in want1.iter().enumerate() {
        assert_eq!(ex1[&aid(&format!("v{}", i + 1))], row.to_vec());
    }
    let ex3 = t("example3.basis");
    let want3 = [[1, 0, 0], [0, 1, 1], [0, 0, 2], [0, 0, 3], [0, 0, 4]];
    for (i, row) in want3.iter().enumerate() {
        assert_eq!(ex3[&aid(&format!("v{}", i + 1))], row.to_vec());
    }
    let doc = sst_core::sstg::parse_document(&load("line.sstg")).unwrap();
    let line = coordinates(&doc.world, &doc.bases[0]).unwrap().tuples;
    let want_line = [[1, 0, 0], [1, 1, 0], [0, 1, 1], [0, 0, 1]];
    for (i, row) in want_line.iter().enumerate() {
        assert_eq!(line[&aid(&format!("v{}", i + 1))], row.to_vec());
    }
}

#[test]
fn adding_the_cycle_edge_leaves_coordinates_unchanged() {
    let plain = dimgraph0();
    let cyc = parse_sstg(&load("dimgraph0_cycle.sstg")).unwrap();
    assert_eq!(cyc, fixtures::dimgraph0_with_cycle());
    for b in ["example1.basis", "example2.basis", "example3.basis"] {
        let a = coordinates(&plain, &basis(b, &plain)).unwrap();
        let c = coordinates(&cyc, &basis(b, &cyc)).unwrap();
        assert_eq!(a, c, "{b}");
    }
}

fn check_reconstruction(w: &World, rank_pick: usize) -> Result<(), TestCaseError> {
    let origin = w.agent_ids()[0].clone();
    let fitting: Vec<MatroidBasis> = (1..w.agent_count())
        .filter_map(|r| spanning_basis(w, &origin, r).ok())
        .collect();
    prop_assert!(!fitting.is_empty(), "no rank covers the world");
    let b = fitting[rank_pick % fitting.len()].clone();
    prop_assert!(verify_basis(w, &b).unwrap());
    let m = adjacency_matrix(w);
    let d = decompose(&m, &b).expect("spanning basis covers every edge");
    prop_assert_eq!(d.sum().unwrap(), m);
    let chart = coordinates(w, &b).expect("valid basis");
    for (a, set) in b.sets.iter().enumerate() {
        let on: BTreeSet<_> = set
            .iter()
            .flat_map(|e| [e.0.clone(), e.1.clone()])
            .collect();
        for (agent, tuple) in &chart.tuples {
            if !on.contains(agent) {
                prop_assert_eq!(tuple[a], 0);
            }
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn parts_sum_to_the_adjacency_matrix(seed in any::<u64>(), rank_pick in 0usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(2..=12);
        let chords = rng.random_range(0..=n / 2);
        let w = random_connected(&mut rng, n, chords);
        check_reconstruction(&w, rank_pick)?;
    }
}

#[test]
fn example2_parts_are_disjoint_unit_weights() {
    let w = dimgraph0();
    let d = decompose(&adjacency_matrix(&w), &basis("example2.basis", &w)).unwrap();
    for p in &d.parts {
        assert!(p.entries.iter().flatten().all(|v| v.is_integer()));
    }
    assert_eq!(d.sum().unwrap(), adjacency_matrix(&w));
    let empty = AdjacencyMatrix::zeros(w.agent_ids());
    assert!(d.parts.iter().all(|p| *p != empty));
}
