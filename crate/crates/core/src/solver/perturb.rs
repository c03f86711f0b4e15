use rand::Rng;

use crate::imbalance::ProblemKind;
use crate::partition::Partition;

/// Reassigns `ceil(strength * n)` distinct random vertices to random other
/// clusters. CC may open fresh clusters and closes emptied ones; the
/// relaxed problem skips any move that would empty its source cluster.
pub fn perturb<R: Rng + ?Sized>(partition: &Partition, strength: f64, problem: ProblemKind, rng: &mut R) -> Partition {
    let n = partition.len();
    let count = ((strength * n as f64).ceil() as usize).clamp(1, n);
    let (mut labels, k) = partition.clone().into_parts();
    let mut sizes = vec![0usize; k];
    for &l in &labels {
        sizes[l] += 1;
    }

    for v in rand::seq::index::sample(rng, n, count).into_iter() {
        let from = labels[v];
        let k = sizes.len();
        match problem {
            ProblemKind::Srcc { .. } => {
                if k < 2 || sizes[from] == 1 {
                    continue;
                }
                let mut to = rng.gen_range(0..k - 1);
                if to >= from {
                    to += 1;
                }
                labels[v] = to;
                sizes[from] -= 1;
                sizes[to] += 1;
            }
            ProblemKind::Cc => {
                // other existing clusters, plus a fresh one unless v is alone
                let fresh = usize::from(sizes[from] > 1);
                let options = k - 1 + fresh;
                if options == 0 {
                    continue;
                }
                let pick = rng.gen_range(0..options);
                let to = if pick == k - 1 {
                    sizes.push(0);
                    k
                } else if pick >= from {
                    pick + 1
                } else {
                    pick
                };
                labels[v] = to;
                sizes[from] -= 1;
                sizes[to] += 1;
                if sizes[from] == 0 {
                    let last = sizes.len() - 1;
                    for l in labels.iter_mut() {
                        if *l == last {
                            *l = from;
                        }
                    }
                    sizes.swap_remove(from);
                }
            }
        }
    }
    let k = sizes.len();
    Partition::new(labels, k).expect("perturbation keeps clusters non-empty")
}
