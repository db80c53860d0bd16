//! Partitioning Around Medoids with Euclidean distance.
//!
//! Each run starts either from the greedy BUILD initialization or from a
//! random medoid set, then applies best-improvement SWAP steps until no swap
//! lowers the total distance. The cheapest run wins; ties go to the
//! lexicographically smaller medoid set, so results do not depend on the
//! order runs finish in.

use rand::seq::index::sample;
use rand::Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    /// Indices of the medoid points, ascending.
    pub medoids: Vec<usize>,
    /// For each point, the position in `medoids` of its nearest medoid.
    pub assignment: Vec<usize>,
    /// Sum of distances from every point to its medoid.
    pub cost: f64,
    /// Fewer distinct points than clusters were available.
    pub degenerate: bool,
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

struct Dist {
    n: usize,
    d: Vec<f64>,
}

impl Dist {
    fn new(points: &[Vec<f64>]) -> Dist {
        let n = points.len();
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let v = euclidean(&points[i], &points[j]);
                d[i * n + j] = v;
                d[j * n + i] = v;
            }
        }
        Dist { n, d }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }

    fn cost(&self, medoids: &[usize]) -> f64 {
        (0..self.n).map(|i| medoids.iter().map(|&m| self.at(i, m)).fold(f64::INFINITY, f64::min)).sum()
    }
}

fn build(dist: &Dist, k: usize) -> Vec<usize> {
    let n = dist.n;
    let first = (0..n)
        .min_by(|&a, &b| {
            let ca: f64 = (0..n).map(|j| dist.at(a, j)).sum();
            let cb: f64 = (0..n).map(|j| dist.at(b, j)).sum();
            ca.total_cmp(&cb).then(a.cmp(&b))
        })
        .expect("non-empty");
    let mut medoids = vec![first];
    let mut nearest: Vec<f64> = (0..n).map(|j| dist.at(first, j)).collect();
    while medoids.len() < k {
        let mut best = (f64::NEG_INFINITY, usize::MAX);
        for c in (0..n).filter(|c| !medoids.contains(c)) {
            let gain: f64 = (0..n).map(|j| (nearest[j] - dist.at(c, j)).max(0.0)).sum();
            if gain > best.0 {
                best = (gain, c);
            }
        }
        medoids.push(best.1);
        for j in 0..n {
            nearest[j] = nearest[j].min(dist.at(best.1, j));
        }
    }
    medoids
}

fn swap(dist: &Dist, mut medoids: Vec<usize>) -> (Vec<usize>, f64) {
    let mut cost = dist.cost(&medoids);
    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for slot in 0..medoids.len() {
            for cand in 0..dist.n {
                if medoids.contains(&cand) {
                    continue;
                }
                let old = medoids[slot];
                medoids[slot] = cand;
                let c = dist.cost(&medoids);
                medoids[slot] = old;
                if c < cost - 1e-12 && best.map_or(true, |(bc, _, _)| c < bc) {
                    best = Some((c, slot, cand));
                }
            }
        }
        match best {
            Some((c, slot, cand)) => {
                medoids[slot] = cand;
                cost = c;
            }
            None => return (medoids, cost),
        }
    }
}

/// Clusters `points` into `k` groups, keeping the best of the BUILD start
/// and `restarts` random starts.
pub fn pam<R: Rng + ?Sized>(points: &[Vec<f64>], k: usize, restarts: usize, rng: &mut R) -> Clustering {
    let n = points.len();
    let mut distinct: Vec<&Vec<f64>> = Vec::new();
    for p in points {
        if !distinct.iter().any(|q| *q == p) {
            distinct.push(p);
        }
    }
    let degenerate = distinct.len() < k;
    if degenerate {
        log::warn!("k-medoids: {} distinct points for {k} clusters", distinct.len());
    }
    let k = k.min(n);
    if k == 0 {
        return Clustering { medoids: vec![], assignment: vec![], cost: 0.0, degenerate };
    }
    let dist = Dist::new(points);
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut consider = |mut m: Vec<usize>, c: f64| {
        m.sort_unstable();
        let better = match &best {
            None => true,
            Some((bc, bm)) => c < bc - 1e-12 || ((c - bc).abs() <= 1e-12 && m < *bm),
        };
        if better {
            best = Some((c, m));
        }
    };
    let (m, c) = swap(&dist, build(&dist, k));
    consider(m, c);
    for _ in 0..restarts {
        let start = sample(rng, n, k).into_vec();
        let (m, c) = swap(&dist, start);
        consider(m, c);
    }
    let (cost, medoids) = best.expect("at least one run");
    let assignment = (0..n)
        .map(|i| {
            (0..medoids.len())
                .min_by(|&a, &b| dist.at(i, medoids[a]).total_cmp(&dist.at(i, medoids[b])).then(a.cmp(&b)))
                .expect("k > 0")
        })
        .collect();
    Clustering { medoids, assignment, cost, degenerate }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn separated_blobs_get_one_medoid_each() {
        let mut pts = Vec::new();
        for (cx, cy) in [(0.0, 0.0), (10.0, 0.0), (0.0, 10.0)] {
            for i in 0..5 {
                pts.push(vec![cx + 0.1 * i as f64, cy + 0.05 * i as f64]);
            }
        }
        let c = pam(&pts, 3, 10, &mut ChaCha8Rng::seed_from_u64(1));
        // the middle point of each blob
        assert_eq!(c.medoids, vec![2, 7, 12]);
        assert!(!c.degenerate);
        for i in 0..15 {
            assert_eq!(c.assignment[i], i / 5);
        }
    }

    #[test]
    fn matches_exhaustive_search_on_small_sets() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let pts: Vec<Vec<f64>> = (0..9).map(|_| vec![rng.gen::<f64>(), rng.gen::<f64>()]).collect();
            let dist = Dist::new(&pts);
            let mut best = f64::INFINITY;
            for a in 0..9 {
                for b in a + 1..9 {
                    for c in b + 1..9 {
                        best = best.min(dist.cost(&[a, b, c]));
                    }
                }
            }
            let got = pam(&pts, 3, 50, &mut rng);
            assert!((got.cost - best).abs() < 1e-9, "{} vs {best}", got.cost);
        }
    }

    #[test]
    fn degenerate_input_is_flagged() {
        let pts = vec![vec![1.0, 1.0]; 6];
        let c = pam(&pts, 3, 5, &mut ChaCha8Rng::seed_from_u64(2));
        assert!(c.degenerate);
        assert_eq!(c.medoids.len(), 3);
        assert_eq!(c.cost, 0.0);
    }
}
