use std::collections::HashSet;

use lathide::analysis::cell_uniform_hosts;
use lathide::embed::{decode, decode_by_coset_search, embed, mdqim_embed, qim_embed};
use lathide::{CodeSpec, EmbedKind, Lattice, Method, NestedCode};
use rand::{Rng, SeedableRng};

fn codes() -> Vec<NestedCode> {
    ["Z:2", "Z:4", "A2:2", "A2:3", "D4:2", "E8:2", "Z2:2"]
        .iter()
        .map(|s| s.parse::<CodeSpec>().unwrap().build().unwrap())
        .collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[test]
fn representatives_partition_the_fine_lattice() {
    for code in codes() {
        let m = code.payload();
        let distinct: HashSet<usize> = code
            .labels()
            .iter()
            .map(|z| code.index_of_fine(z))
            .collect();
        assert_eq!(distinct.len(), m);
        assert_eq!(code.index_of_fine(&vec![0; code.dim()]), 0);
        // Shifting by a coarse point keeps the coset.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for label in code.labels() {
            let c: Vec<i64> = (0..code.dim()).map(|_| rng.random_range(-4..4)).collect();
            let shifted: Vec<i64> = code
                .coarse_to_fine(&c)
                .iter()
                .zip(label)
                .map(|(a, b)| a + b)
                .collect();
            assert_eq!(code.index_of_fine(&shifted), code.index_of_fine(label));
        }
    }
}

#[test]
fn coarse_points_lie_on_the_fine_lattice() {
    for code in codes() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let c: Vec<i64> = (0..code.dim()).map(|_| rng.random_range(-6..6)).collect();
            let p = code.coarse().point(&c);
            let z = code.fine().locate(&p.coords).expect("coarse ⊂ fine");
            assert_eq!(z, code.coarse_to_fine(&c));
        }
    }
}

#[test]
fn embedding_round_trips_and_dominates() {
    for code in codes() {
        let r = code.fine().packing_radius();
        let eps = 1e-6 * code.fine().min_distance();
        let hosts = cell_uniform_hosts(&code, 32, 1_000, 5);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for s in &hosts {
            let i = rng.random_range(0..code.payload());
            let q = qim_embed(&code, s, i).unwrap();
            let m = mdqim_embed(&code, s, i, eps).unwrap();
            assert_eq!(decode(&code, &q.embedded).unwrap().index, i);
            assert_eq!(decode(&code, &m.embedded).unwrap().index, i);
            assert_eq!(q.target, m.target);
            assert!(m.distortion <= q.distortion + code.fine().tolerance());

            let p = &m.difference;
            let expected = (norm(p) - (r - eps)).max(0.0);
            match m.kind {
                EmbedKind::MdqimTypeI => assert_eq!(m.distortion, 0.0),
                EmbedKind::MdqimTypeII => {
                    assert!((m.distortion - expected).abs() <= code.fine().tolerance());
                    // Movement is along p.
                    let moved: Vec<f64> = m.embedded.iter().zip(s).map(|(a, b)| a - b).collect();
                    let cos = moved.iter().zip(p).map(|(a, b)| a * b).sum::<f64>()
                        / (norm(&moved) * norm(p));
                    assert!((cos - 1.0).abs() < 1e-9);
                    // Lands strictly inside the fine cell of the target.
                    let left: Vec<f64> = m
                        .embedded
                        .iter()
                        .zip(&m.target.coords)
                        .map(|(a, b)| a - b)
                        .collect();
                    assert!((norm(&left) - (r - eps)).abs() < 1e-9);
                }
                EmbedKind::Qim => unreachable!(),
            }
        }
    }
}

#[test]
fn fast_decode_matches_coset_search() {
    for code in codes().into_iter().filter(|c| c.payload() <= 16) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for _ in 0..500 {
            let y: Vec<f64> = (0..code.dim())
                .map(|_| rng.random_range(-15.0..15.0))
                .collect();
            assert_eq!(
                decode(&code, &y).unwrap().index,
                decode_by_coset_search(&code, &y).unwrap()
            );
        }
    }
}

#[test]
fn bounded_noise_survives() {
    let code = NestedCode::build_self_similar(&Lattice::a2(), 2).unwrap();
    let hosts = cell_uniform_hosts(&code, 32, 2_000, 6);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    for s in &hosts {
        let i = rng.random_range(0..4);
        let out = embed(&code, s, i, Method::Qim, 0.0).unwrap();
        // Any perturbation shorter than the packing radius is harmless.
        let angle: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let len = 0.49 * code.fine().packing_radius();
        let y = [
            out.embedded[0] + len * angle.cos(),
            out.embedded[1] + len * angle.sin(),
        ];
        assert_eq!(decode(&code, &y).unwrap().index, i);
    }
}
