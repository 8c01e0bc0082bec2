use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sst_core::dot::export_dot;
use sst_core::fixtures::{self, random_world};
use sst_core::generate::{generate, GeneratorSpec};
use sst_core::sstg::{
    parse_document, parse_sstg, serialize, serialize_document, SstgDocument, SstgError,
};
use sst_core::topology::{adjacency_matrix, degrees};

fn load(name: &str) -> String {
    std::fs::read_to_string(format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR")))
        .expect("fixture file")
}

#[test]
fn fixture_files_match_the_built_in_worlds() {
    assert_eq!(parse_sstg(&load("g4.sstg")).unwrap(), fixtures::g4());
    assert_eq!(
        parse_sstg(&load("dimgraph0.sstg")).unwrap(),
        fixtures::dimgraph0()
    );
    assert_eq!(
        parse_sstg(&load("bridged_triangles.sstg")).unwrap(),
        fixtures::bridged_triangles()
    );
    let (w, b) = fixtures::bent_line();
    assert_eq!(
        parse_document(&load("line.sstg")).unwrap(),
        SstgDocument {
            world: w,
            bases: vec![b]
        }
    );
}

#[test]
fn g4_exports_six_edges() {
    let dot = export_dot(&fixtures::g4());
    assert_eq!(dot.matches(" -> ").count(), 6);
    assert_eq!(
        dot,
        export_dot(&parse_sstg(&serialize(&fixtures::g4())).unwrap())
    );
}

#[test]
fn document_round_trip_keeps_bases() {
    let (world, basis) = fixtures::bent_line();
    let doc = SstgDocument {
        world,
        bases: vec![basis],
    };
    assert_eq!(parse_document(&serialize_document(&doc)).unwrap(), doc);
}

#[test]
fn syntax_errors_carry_positions() {
    let err = parse_sstg("sstg 1\nagent A\nagent B\npromise A ~x B\n").unwrap_err();
    assert!(
        matches!(
            err,
            SstgError::Syntax {
                line: 4,
                column: 11,
                ..
            }
        ),
        "{err:?}"
    );
    let err = parse_sstg("sstg 1\nagent A\nadjacency A B\n").unwrap_err();
    assert!(
        matches!(err, SstgError::UnknownAgent { line: 3, .. }),
        "{err:?}"
    );
}

#[test]
fn lattice3d_degrees_follow_position() {
    let w = generate(&GeneratorSpec::Lattice3d(3, 3, 3)).unwrap();
    let m = adjacency_matrix(&w);
    let d = degrees(&m);
    let centre = m.index_of(&sst_core::aid("p1_1_1")).unwrap();
    assert_eq!(d.k_out[centre], 6);
    assert!(d.k_out.iter().all(|&k| (3..=6).contains(&k)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn parse_inverts_serialize(seed in any::<u64>()) {
        let w = random_world(&mut ChaCha8Rng::seed_from_u64(seed));
        let text = serialize(&w);
        prop_assert_eq!(parse_sstg(&text).unwrap(), w);
        prop_assert_eq!(serialize(&parse_sstg(&text).unwrap()), text);
    }
}
