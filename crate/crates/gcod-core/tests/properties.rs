//! Property tests for the structural invariants: format round-trips,
//! permutation conjugation, oracle consistency, pruning attainment, and the
//! split/equivariance identities the architecture rests on.

use gcod_core::gcn::{gcn_forward, spmm_reference, DenseMatrix, ForwardOrder, WeightSet};
use gcod_core::graph::synth_power_law;
use gcod_core::partition::split_workloads;
use gcod_core::sim::denser_partial_spmm;
use gcod_core::sparse::{SparseFormat, SparseMatrix};
use gcod_core::sparsify::{prune_to_ratio, restructure_pipeline, SparsifyConfig};
use proptest::prelude::*;

fn arb_sparse(max_dim: usize, max_nnz: usize) -> impl Strategy<Value = SparseMatrix> {
    (2usize..max_dim, 0usize..max_nnz).prop_flat_map(|(dim, nnz)| {
        proptest::collection::vec(
            ((0..dim), (0..dim), -10.0f64..10.0),
            nnz.min(dim * dim),
        )
        .prop_map(move |mut triples| {
            triples.sort_by_key(|a| (a.0, a.1));
            triples.dedup_by_key(|t| (t.0, t.1));
            SparseMatrix::from_triples(dim, dim, triples).unwrap()
        })
    })
}

fn arb_permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just(()).prop_perturb(move |_, mut rng| {
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = (rng.next_u64() as usize) % (i + 1);
            perm.swap(i, j);
        }
        perm
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn format_round_trip_is_identity(m in arb_sparse(40, 120)) {
        let back = m
            .to_format(SparseFormat::Csr)
            .to_format(SparseFormat::Csc)
            .to_format(SparseFormat::Coo);
        prop_assert_eq!(m.triples(), back.triples());
        prop_assert_eq!(back.format(), SparseFormat::Coo);
    }

    #[test]
    fn permutation_preserves_nnz_and_degree_multiset(m in arb_sparse(30, 90)) {
        let n = m.rows();
        let perm: Vec<usize> = (0..n).map(|i| (i + n / 2) % n).collect();
        let p = m.permuted(&perm).unwrap();
        prop_assert_eq!(m.nnz(), p.nnz());
        let mut before = m.row_nnz_counts();
        let mut after = p.row_nnz_counts();
        before.sort_unstable();
        after.sort_unstable();
        prop_assert_eq!(before, after);
    }

    #[test]
    fn spmm_matches_materialized_product(
        m in arb_sparse(200, 600),
        seed in 0u64..1000,
    ) {
        let d = DenseMatrix::random(m.cols(), 5, seed);
        let mut dense = DenseMatrix::zeros(m.rows(), m.cols());
        m.for_each_entry(|r, c, v| dense.set(r, c, v));
        let expected = dense.matmul(&d).unwrap();
        let got = spmm_reference(&m, &d).unwrap();
        prop_assert!(got.max_rel_diff(&expected) < 1e-12);
    }

    #[test]
    fn random_permutation_round_trips(m in arb_sparse(24, 60), perm in arb_permutation(24)) {
        let n = m.rows();
        let perm: Vec<usize> = {
            // Restrict the sampled permutation of 0..24 to this matrix size.
            let mut p: Vec<usize> = perm.into_iter().filter(|&v| v < n).collect();
            p.truncate(n);
            p
        };
        prop_assume!(perm.len() == n);
        let mut inverse = vec![0usize; n];
        for (i, &p) in perm.iter().enumerate() {
            inverse[p] = i;
        }
        let back = m.permuted(&perm).unwrap().permuted(&inverse).unwrap();
        prop_assert_eq!(m.triples(), back.triples());
    }
}

#[test]
fn forward_is_permutation_equivariant_seeded() {
    for seed in 0..20u64 {
        let n = 8 + (seed as usize % 17);
        let g = synth_power_law(n, 2, seed).unwrap();
        let a = g.normalize_adjacency(true).unwrap();
        let x = DenseMatrix::random(n, 6, seed + 100);
        let w = WeightSet::seeded(&[6, 8, 3], seed + 200).unwrap();
        let z = gcn_forward(&a, &x, &w, ForwardOrder::CombinationFirst).unwrap();

        // Deterministic shuffle.
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = ((seed as usize).wrapping_mul(31).wrapping_add(i * 17)) % (i + 1);
            perm.swap(i, j);
        }
        let pa = a.permuted(&perm).unwrap();
        let mut px = DenseMatrix::zeros(n, x.cols);
        let mut pz_expected = DenseMatrix::zeros(n, z.cols);
        for (r, &p) in perm.iter().enumerate() {
            px.row_mut(p).copy_from_slice(x.row(r));
            pz_expected.row_mut(p).copy_from_slice(z.row(r));
        }
        let pz = gcn_forward(&pa, &px, &w, ForwardOrder::CombinationFirst).unwrap();
        assert!(
            pz.max_rel_diff(&pz_expected) < 1e-9,
            "seed {seed}: equivariance violated"
        );
    }
}

#[test]
fn polarization_is_not_permutation_invariant() {
    let m = SparseMatrix::from_triples(4, 4, vec![(0, 1, 1.0), (1, 0, 1.0)]).unwrap();
    let before = m.polarization_metric().unwrap();
    let p = m.permuted(&[0, 3, 1, 2]).unwrap();
    let after = p.polarization_metric().unwrap();
    assert_eq!(before, 1.0);
    assert_eq!(after, 3.0);
}

#[test]
fn prune_target_attainment_over_ratios() {
    let g = synth_power_law(300, 3, 5).unwrap();
    let outcome = restructure_pipeline(&g, 2, 4, 2, &SparsifyConfig::default()).unwrap();
    for i in 0..20 {
        let p = i as f64 * 0.045;
        let cfg = SparsifyConfig {
            target_prune_ratio: p,
            ..SparsifyConfig::default()
        };
        let pruned = prune_to_ratio(&outcome.a_perm, &outcome.plan, &cfg).unwrap();
        let before = outcome.a_perm.nnz() as f64;
        assert!(
            pruned.nnz() as f64 / before <= 1.0 - p + 1.0 / before,
            "p={p}"
        );
        assert!(pruned.is_symmetric());
    }
}

#[test]
fn split_additivity_partial_sums_match_whole() {
    for seed in [3u64, 9, 27] {
        let n = 200;
        let g = synth_power_law(n, 3, seed).unwrap();
        let outcome = restructure_pipeline(&g, 2, 4, 2, &SparsifyConfig::default()).unwrap();
        let a = outcome.a_perm.clone();
        let split = split_workloads(&a, &outcome.plan).unwrap();
        assert_eq!(split.denser_nnz + split.sparser_nnz, a.nnz());

        let d = DenseMatrix::random(n, 7, seed + 1);
        let whole = spmm_reference(&a, &d).unwrap();
        let denser = denser_partial_spmm(&split, &outcome.plan, &d);
        let sparser = spmm_reference(&split.sparser_remainder, &d).unwrap();
        let mut sum = denser;
        for (o, v) in sum.data.iter_mut().zip(&sparser.data) {
            *o += v;
        }
        assert!(sum.max_rel_diff(&whole) < 1e-9, "seed {seed}");
    }
}
