use serde::{Deserialize, Serialize};

use super::Verdict;
use crate::bits::BitString;
use crate::error::{QkdError, Result};
use crate::quantum::Basis;
use crate::rng::RandomStream;

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SiftedPartition {
    pub rect_indices: Vec<usize>,
    pub diag_indices: Vec<usize>,
    pub discarded_indices: Vec<usize>,
}

impl SiftedPartition {
    pub fn sifted_len(&self) -> usize {
        self.rect_indices.len() + self.diag_indices.len()
    }

    pub fn total_len(&self) -> usize {
        self.sifted_len() + self.discarded_indices.len()
    }

    /// Sifted positions (both subsets) in ascending order.
    pub fn sifted_indices(&self) -> Vec<usize> {
        let mut all = Vec::with_capacity(self.sifted_len());
        all.extend_from_slice(&self.rect_indices);
        all.extend_from_slice(&self.diag_indices);
        all.sort_unstable();
        all
    }
}

pub fn sift(alice_bases: &[Basis], bob_bases: &[Basis]) -> Result<SiftedPartition> {
    if alice_bases.len() != bob_bases.len() {
        return Err(QkdError::LengthMismatch {
            expected: alice_bases.len(),
            actual: bob_bases.len(),
        });
    }
    let mut partition = SiftedPartition::default();
    for (i, (a, b)) in alice_bases.iter().zip(bob_bases).enumerate() {
        match (a, b) {
            (Basis::Rectilinear, Basis::Rectilinear) => partition.rect_indices.push(i),
            (Basis::Diagonal, Basis::Diagonal) => partition.diag_indices.push(i),
            _ => partition.discarded_indices.push(i),
        }
    }
    Ok(partition)
}

/// Outcome of the public comparison of test samples.
///
/// `e_bar_hat` is the single pooled rate of the naive analysis. It weights
/// each basis by the size of its sifted subset, which is the rate a uniform
/// sample of all sifted data would estimate; when `m1 : m2` matches the
/// subset sizes it equals `(r1 + r2) / (m1 + m2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorEstimate {
    pub e1_hat: f64,
    pub e2_hat: f64,
    pub e_bar_hat: f64,
    pub r1: usize,
    pub m1: usize,
    pub r2: usize,
    pub m2: usize,
    /// Revealed positions, ascending; these are excluded from the raw key.
    pub sample_indices: Vec<usize>,
}

/// Draws `m1` rectilinear and `m2` diagonal test positions uniformly without
/// replacement and counts mismatches between Alice's bits and Bob's outcomes.
pub fn estimate_errors(
    alice_bits: &BitString,
    bob_outcomes: &BitString,
    sifted: &SiftedPartition,
    m1: usize,
    m2: usize,
    rng: &mut RandomStream,
) -> Result<ErrorEstimate> {
    if alice_bits.len() != bob_outcomes.len() {
        return Err(QkdError::LengthMismatch {
            expected: alice_bits.len(),
            actual: bob_outcomes.len(),
        });
    }
    if m1 < 1 || m2 < 1 {
        return Err(QkdError::InvalidConfig(
            "test sample sizes must be at least 1".into(),
        ));
    }
    for (basis, pool, m) in [
        (Basis::Rectilinear, &sifted.rect_indices, m1),
        (Basis::Diagonal, &sifted.diag_indices, m2),
    ] {
        if pool.len() < m {
            return Err(QkdError::InsufficientSample {
                basis,
                available: pool.len(),
                required: m,
            });
        }
    }
    let mut rect_rng = rng.split("rectilinear");
    let mut diag_rng = rng.split("diagonal");
    let rect_sample = rect_rng.sample_without_replacement(&sifted.rect_indices, m1);
    let diag_sample = diag_rng.sample_without_replacement(&sifted.diag_indices, m2);
    let mismatches = |sample: &[usize]| {
        sample
            .iter()
            .filter(|&&i| alice_bits.get(i) != bob_outcomes.get(i))
            .count()
    };
    let (r1, r2) = (mismatches(&rect_sample), mismatches(&diag_sample));
    let e1_hat = r1 as f64 / m1 as f64;
    let e2_hat = r2 as f64 / m2 as f64;
    let (w1, w2) = (
        sifted.rect_indices.len() as f64,
        sifted.diag_indices.len() as f64,
    );
    let e_bar_hat = (w1 * e1_hat + w2 * e2_hat) / (w1 + w2);

    let mut sample_indices = rect_sample;
    sample_indices.extend(diag_sample);
    sample_indices.sort_unstable();
    Ok(ErrorEstimate {
        e1_hat,
        e2_hat,
        e_bar_hat,
        r1,
        m1,
        r2,
        m2,
        sample_indices,
    })
}

/// Accept iff both per-basis rates are strictly below `e_max`.
pub fn verdict_refined(estimate: &ErrorEstimate, e_max: f64) -> Verdict {
    Verdict::from_accept(estimate.e1_hat < e_max && estimate.e2_hat < e_max)
}

/// Accept iff the pooled rate is strictly below `e_max`.
pub fn verdict_naive(estimate: &ErrorEstimate, e_max: f64) -> Verdict {
    Verdict::from_accept(estimate.e_bar_hat < e_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn est(e1: f64, e2: f64, e_bar: f64) -> ErrorEstimate {
        ErrorEstimate {
            e1_hat: e1,
            e2_hat: e2,
            e_bar_hat: e_bar,
            r1: 0,
            m1: 1,
            r2: 0,
            m2: 1,
            sample_indices: vec![],
        }
    }

    #[test]
    fn refined_verdict_examples() {
        assert_eq!(
            verdict_refined(&est(0.01, 0.01, 0.01), 0.03),
            Verdict::Accept
        );
        assert_eq!(
            verdict_refined(&est(0.0, 0.045, 0.0225), 0.03),
            Verdict::Abort
        );
        assert_eq!(
            verdict_refined(&est(0.029, 0.029, 0.029), 0.03),
            Verdict::Accept
        );
        assert_eq!(verdict_refined(&est(0.03, 0.0, 0.0), 0.03), Verdict::Abort);
    }

    #[test]
    fn naive_verdict_examples() {
        assert_eq!(
            verdict_naive(&est(0.0, 0.045, 0.0225), 0.03),
            Verdict::Accept
        );
        assert_eq!(verdict_naive(&est(0.1, 0.0, 0.05), 0.03), Verdict::Abort);
        assert_eq!(verdict_naive(&est(0.0, 0.0, 0.0), 1e-9), Verdict::Accept);
    }

    #[test]
    fn sift_agreement() {
        let all = vec![Basis::Rectilinear; 5];
        let p = sift(&all, &all).unwrap();
        assert_eq!(p.rect_indices, vec![0, 1, 2, 3, 4]);
        assert!(p.diag_indices.is_empty() && p.discarded_indices.is_empty());
        assert!(sift(&all, &all[..4]).is_err());
    }

    #[test]
    fn zero_mismatches() {
        let bits: BitString = (0..20).map(|i| i % 3 == 0).collect();
        let bases: Vec<Basis> = (0..20)
            .map(|i| {
                if i % 2 == 0 {
                    Basis::Rectilinear
                } else {
                    Basis::Diagonal
                }
            })
            .collect();
        let p = sift(&bases, &bases).unwrap();
        let mut rng = RandomStream::new(1);
        let e = estimate_errors(&bits, &bits, &p, 5, 5, &mut rng).unwrap();
        assert_eq!((e.e1_hat, e.e2_hat, e.e_bar_hat), (0.0, 0.0, 0.0));
        assert_eq!(e.sample_indices.len(), 10);
        match estimate_errors(&bits, &bits, &p, 11, 5, &mut rng) {
            Err(QkdError::InsufficientSample {
                basis: Basis::Rectilinear,
                available: 10,
                required: 11,
            }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    fn basis_strategy(n: usize) -> impl Strategy<Value = Vec<Basis>> {
        proptest::collection::vec(
            prop_oneof![Just(Basis::Rectilinear), Just(Basis::Diagonal)],
            n,
        )
    }

    proptest! {
        #[test]
        fn partition_invariants((a, b) in (1usize..300).prop_flat_map(|n| (basis_strategy(n), basis_strategy(n)))) {
            let p = sift(&a, &b).unwrap();
            prop_assert_eq!(p.total_len(), a.len());
            let mut all: Vec<usize> = p.rect_indices.iter().chain(&p.diag_indices).chain(&p.discarded_indices).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..a.len()).collect::<Vec<_>>());
            prop_assert!(p.rect_indices.iter().all(|&i| a[i] == Basis::Rectilinear && b[i] == Basis::Rectilinear));
            prop_assert!(p.diag_indices.iter().all(|&i| a[i] == Basis::Diagonal && b[i] == Basis::Diagonal));
            prop_assert!(p.discarded_indices.iter().all(|&i| a[i] != b[i]));
        }

        #[test]
        fn refined_accept_bounds_pooled(seed in any::<u64>(), m in 1usize..40, rate in 0.0f64..0.2, e_max in 0.0f64..0.5) {
            let n = 400;
            let mut rng = RandomStream::new(seed);
            let bases: Vec<Basis> = (0..n).map(|_| Basis::draw(0.5, &mut rng)).collect();
            let alice: BitString = (0..n).map(|_| rng.bit()).collect();
            let bob: BitString = alice.iter().map(|b| b ^ rng.bernoulli(rate)).collect();
            let p = sift(&bases, &bases).unwrap();
            prop_assume!(p.rect_indices.len() >= m && p.diag_indices.len() >= m);
            let e = estimate_errors(&alice, &bob, &p, m, m, &mut rng).unwrap();
            prop_assert!(e.e_bar_hat >= e.e1_hat.min(e.e2_hat) - 1e-12);
            prop_assert!(e.e_bar_hat <= e.e1_hat.max(e.e2_hat) + 1e-12);
            if verdict_refined(&e, e_max).is_accept() {
                prop_assert!(e.e_bar_hat < e_max);
            }
            let sifted: std::collections::HashSet<_> = p.sifted_indices().into_iter().collect();
            prop_assert!(e.sample_indices.iter().all(|i| sifted.contains(i)));
        }
    }
}
