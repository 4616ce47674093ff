//! Centroidal Voronoi tessellation of a sample set by Lloyd iteration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use crate::space::{Point, SampleSet};

/// A Voronoi partition of a sample set: cluster assignments, generators
/// (centroids once converged), member counts, and tessellation energies.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VoronoiPartition {
    /// Per-sample cluster index, 0-based.
    pub assignments: Vec<usize>,
    pub centroids: Vec<Point>,
    pub counts: Vec<usize>,
    /// Sum of squared distances from each cluster's members to its centroid.
    pub energies: Vec<f64>,
    pub total_energy: f64,
    /// False when Lloyd hit the iteration cap before the displacement
    /// tolerance; the best partition found is still returned.
    pub converged: bool,
    pub iterations: usize,
    /// Total energy after each centroid update, for monotonicity checks.
    pub energy_history: Vec<f64>,
}

impl VoronoiPartition {
    pub fn cluster_count(&self) -> usize {
        self.centroids.len()
    }

    /// Index of the centroid nearest to `x` (lowest index on ties).
    pub fn nearest_centroid(&self, x: &Point) -> usize {
        nearest(x, &self.centroids)
    }

    /// CSV of `point_index,cluster` rows.
    pub fn assignments_csv(&self) -> String {
        let mut out = String::from("point_index,cluster\n");
        for (i, c) in self.assignments.iter().enumerate() {
            out.push_str(&format!("{i},{c}\n"));
        }
        out
    }

    /// CSV of `cluster,x1..xp,count,energy` rows.
    pub fn centroids_csv(&self) -> String {
        let p = self.centroids[0].dim();
        let cols: Vec<String> = (1..=p).map(|i| format!("x{i}")).collect();
        let mut out = format!("cluster,{},count,energy\n", cols.join(","));
        for (l, c) in self.centroids.iter().enumerate() {
            let coords: Vec<String> = c.coords().iter().map(|v| format!("{v}")).collect();
            out.push_str(&format!(
                "{l},{},{},{}\n",
                coords.join(","),
                self.counts[l],
                self.energies[l]
            ));
        }
        out
    }
}

fn nearest(x: &Point, generators: &[Point]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (l, g) in generators.iter().enumerate() {
        let d = x.squared_distance(g);
        if d < best_d {
            best_d = d;
            best = l;
        }
    }
    best
}

/// Maps each sample to its nearest generator in Euclidean distance.
/// Equidistant samples go to the lowest generator index, so the partition is
/// deterministic (for continuous densities ties have measure zero anyway).
pub fn assign(xs: &SampleSet, generators: &[Point]) -> Result<Vec<usize>> {
    if generators.is_empty() {
        return Err(Error::InvalidParameter("need at least one generator".into()));
    }
    for g in generators {
        if g.dim() != xs.dim() {
            return Err(Error::DimensionMismatch { expected: xs.dim(), got: g.dim() });
        }
    }
    Ok(xs.points().iter().map(|p| nearest(p, generators)).collect())
}

/// Componentwise means of each cluster. Signals an empty cluster so the
/// caller can repair it.
pub fn centroids(xs: &SampleSet, assignments: &[usize], clusters: usize) -> Result<Vec<Point>> {
    let p = xs.dim();
    let mut sums = vec![vec![0.0; p]; clusters];
    let mut counts = vec![0usize; clusters];
    for (pt, &l) in xs.points().iter().zip(assignments) {
        counts[l] += 1;
        for (s, &c) in sums[l].iter_mut().zip(pt.coords()) {
            *s += c;
        }
    }
    for (l, &n) in counts.iter().enumerate() {
        if n == 0 {
            return Err(Error::EmptyCluster(l));
        }
    }
    sums.into_iter()
        .zip(counts)
        .map(|(s, n)| Point::new(s.into_iter().map(|v| v / n as f64).collect()))
        .collect()
}

/// Per-cluster and total tessellation energy of an assignment.
pub fn energy(xs: &SampleSet, assignments: &[usize], generators: &[Point]) -> (Vec<f64>, f64) {
    let mut per = vec![0.0; generators.len()];
    for (pt, &l) in xs.points().iter().zip(assignments) {
        per[l] += pt.squared_distance(&generators[l]);
    }
    let total = per.iter().sum();
    (per, total)
}

/// Greedy farthest-point seeding from a seeded random start.
///
/// The start is a random point of the bounding box (a function of the seed
/// and the box only), each generator is the sample farthest from those
/// already chosen, and distance ties fall back to coordinate order. The
/// chosen set therefore does not depend on the order samples are stored in.
fn seed_generators(xs: &SampleSet, clusters: usize, seed: u64) -> Vec<Point> {
    let mut rng = SplitMix64::stream(seed, u64::MAX);
    let bx = xs.bounding_box();
    let start: Vec<f64> = bx.iter().map(|(a, b)| a + (b - a) * rng.next_f64()).collect();

    let lex_less = |a: &Point, b: &Point| {
        for (x, y) in a.coords().iter().zip(b.coords()) {
            if x < y {
                return true;
            }
            if x > y {
                return false;
            }
        }
        false
    };

    let mut min_dist: Vec<f64> = xs
        .points()
        .iter()
        .map(|p| {
            p.coords()
                .iter()
                .zip(&start)
                .map(|(a, b)| (a - b) * (a - b))
                .sum()
        })
        .collect();

    let mut chosen: Vec<Point> = Vec::with_capacity(clusters);
    for _ in 0..clusters {
        let mut best = 0;
        for i in 1..xs.len() {
            if min_dist[i] > min_dist[best]
                || (min_dist[i] == min_dist[best] && lex_less(xs.point(i), xs.point(best)))
            {
                best = i;
            }
        }
        let g = xs.point(best).clone();
        for (i, p) in xs.points().iter().enumerate() {
            let d = p.squared_distance(&g);
            if d < min_dist[i] {
                min_dist[i] = d;
            }
        }
        chosen.push(g);
    }
    chosen
}

/// Options for [`lloyd`]. Defaults: displacement tolerance 1e-9, 500
/// iterations.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LloydOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for LloydOptions {
    fn default() -> Self {
        LloydOptions { tol: 1e-9, max_iter: 500 }
    }
}

/// Lloyd's method: alternate nearest-generator assignment and centroid
/// update until the largest centroid displacement falls below `tol`.
///
/// Empty clusters are repaired by re-seeding them on the sample currently
/// farthest from its own centroid. The returned partition has assignments
/// consistent with its centroids (a final assignment pass is made after
/// convergence), and the energy history is non-increasing.
pub fn lloyd(xs: &SampleSet, clusters: usize, seed: u64, opts: LloydOptions) -> Result<VoronoiPartition> {
    if clusters == 0 || clusters > xs.len() {
        return Err(Error::InvalidParameter(format!(
            "cluster count must be in 1..={}, got {clusters}",
            xs.len()
        )));
    }
    let mut gens = seed_generators(xs, clusters, seed);
    let mut history: Vec<f64> = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    for _ in 0..opts.max_iter {
        iterations += 1;
        let mut asg = assign(xs, &gens)?;

        // Repair: move the worst-represented sample into each empty cluster.
        loop {
            let mut counts = vec![0usize; clusters];
            for &l in &asg {
                counts[l] += 1;
            }
            let Some(empty) = counts.iter().position(|&n| n == 0) else { break };
            let mut worst = usize::MAX;
            let mut worst_d = -1.0;
            for (i, p) in xs.points().iter().enumerate() {
                if counts[asg[i]] <= 1 {
                    continue;
                }
                let d = p.squared_distance(&gens[asg[i]]);
                if d > worst_d {
                    worst_d = d;
                    worst = i;
                }
            }
            gens[empty] = xs.point(worst).clone();
            asg[worst] = empty;
        }

        let new_gens = centroids(xs, &asg, clusters)?;
        let disp = gens
            .iter()
            .zip(&new_gens)
            .map(|(a, b)| a.squared_distance(b).sqrt())
            .fold(0.0_f64, f64::max);
        let (_, total) = energy(xs, &asg, &new_gens);
        if let Some(&prev) = history.last() {
            debug_assert!(total <= prev + 1e-9 * prev.abs().max(1.0), "energy rose: {prev} -> {total}");
        }
        history.push(total);
        gens = new_gens;
        if disp <= opts.tol {
            converged = true;
            break;
        }
    }

    let assignments = assign(xs, &gens)?;
    let mut counts = vec![0usize; clusters];
    for &l in &assignments {
        counts[l] += 1;
    }
    let (energies, total_energy) = energy(xs, &assignments, &gens);
    Ok(VoronoiPartition {
        assignments,
        centroids: gens,
        counts,
        energies,
        total_energy,
        converged,
        iterations,
        energy_history: history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::ProductDensity;

    fn set_1d(vals: &[f64]) -> SampleSet {
        SampleSet::from_points(
            vals.iter().map(|&v| Point::new(vec![v]).unwrap()).collect(),
            0,
            ProductDensity::unit_box(1),
        )
        .unwrap()
    }

    #[test]
    fn assign_nearest_and_tie_rule() {
        let xs = set_1d(&[0.1, 0.9]);
        let gens = vec![Point::new(vec![0.0]).unwrap(), Point::new(vec![1.0]).unwrap()];
        assert_eq!(assign(&xs, &gens).unwrap(), vec![0, 1]);

        let mid = set_1d(&[0.5]);
        assert_eq!(assign(&mid, &gens).unwrap(), vec![0]);
    }

    #[test]
    fn assign_matches_brute_force_oracle() {
        let xs = ProductDensity::unit_box(2).sample(100, 17).unwrap();
        let gens: Vec<Point> = xs.points()[..3].to_vec();
        let got = assign(&xs, &gens).unwrap();
        for (i, p) in xs.points().iter().enumerate() {
            // exhaustive comparison, lowest index wins ties
            let mut best = 0;
            for l in 1..gens.len() {
                if p.squared_distance(&gens[l]) < p.squared_distance(&gens[best]) {
                    best = l;
                }
            }
            assert_eq!(got[i], best, "sample {i}");
        }
    }

    #[test]
    fn centroid_examples() {
        let xs = SampleSet::from_points(
            vec![
                Point::new(vec![0.0, 0.0]).unwrap(),
                Point::new(vec![1.0, 1.0]).unwrap(),
                Point::new(vec![0.3, 0.7]).unwrap(),
            ],
            0,
            ProductDensity::unit_box(2),
        )
        .unwrap();
        let cs = centroids(&xs, &[0, 0, 1], 2).unwrap();
        assert_eq!(cs[0].coords(), &[0.5, 0.5]);
        assert_eq!(cs[1].coords(), &[0.3, 0.7]);
    }

    #[test]
    fn centroid_matches_summation_oracle() {
        let xs = ProductDensity::unit_box(3).sample(50, 23).unwrap();
        let asg = vec![0usize; 50];
        let cs = centroids(&xs, &asg, 1).unwrap();
        for i in 0..3 {
            let mean = xs.points().iter().map(|p| p[i]).sum::<f64>() / 50.0;
            assert!((cs[0][i] - mean).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_cluster_is_signaled() {
        let xs = set_1d(&[0.1, 0.9]);
        assert!(matches!(centroids(&xs, &[0, 0], 2), Err(Error::EmptyCluster(1))));
    }

    #[test]
    fn energy_examples() {
        let xs = set_1d(&[0.0, 1.0]);
        let c = vec![Point::new(vec![0.5]).unwrap()];
        let (per, total) = energy(&xs, &[0, 0], &c);
        assert_eq!(total, 0.5);
        assert_eq!(per, vec![0.5]);

        // every point its own generator: zero energy
        let gens: Vec<Point> = xs.points().to_vec();
        let (_, z) = energy(&xs, &[0, 1], &gens);
        assert_eq!(z, 0.0);
    }

    #[test]
    fn single_cluster_energy_matches_uniform_variance() {
        // E[||x - mean||^2] = p/12 per sample on the unit box
        let xs = ProductDensity::unit_box(6).sample(20_000, 42).unwrap();
        let part = lloyd(&xs, 1, 1, LloydOptions::default()).unwrap();
        let expect = 20_000.0 * 6.0 / 12.0;
        assert!(
            (part.total_energy - expect).abs() < 0.01 * expect,
            "E_total = {}",
            part.total_energy
        );
    }

    #[test]
    fn single_cluster_converges_to_global_mean_in_one_update() {
        let xs = ProductDensity::unit_box(2).sample(200, 5).unwrap();
        let part = lloyd(&xs, 1, 9, LloydOptions::default()).unwrap();
        assert!(part.converged);
        for i in 0..2 {
            let mean = xs.points().iter().map(|p| p[i]).sum::<f64>() / 200.0;
            assert!((part.centroids[0][i] - mean).abs() < 1e-12);
        }
    }

    #[test]
    fn two_cluster_1d_matches_partition_enumeration_oracle() {
        // Enumerating the contiguous 2-partitions of {0, .1, .9, 1}:
        //   {0}|{.1,.9,1} -> E = 0.48667, {0,.1}|{.9,1} -> E = 0.01,
        //   {0,.1,.9}|{1} -> E = 0.48667; the minimum is the middle split.
        let xs = set_1d(&[0.0, 0.1, 0.9, 1.0]);
        for seed in 0..4 {
            let part = lloyd(&xs, 2, seed, LloydOptions::default()).unwrap();
            let mut cs: Vec<f64> = part.centroids.iter().map(|c| c[0]).collect();
            cs.sort_by(f64::total_cmp);
            assert!((cs[0] - 0.05).abs() < 1e-12 && (cs[1] - 0.95).abs() < 1e-12, "seed {seed}");
            assert!((part.total_energy - 0.01).abs() < 1e-12);
        }
    }

    #[test]
    fn energy_decreases_with_cluster_count() {
        // k-means on 20000 uniform 6-cube samples; the optimal objective for
        // L=1 is N*p/12 = 10000 and each added cluster buys a further drop
        let xs = ProductDensity::unit_box(6).sample(20_000, 2024).unwrap();
        let expected = [9984.5, 8722.4, 7974.5, 7355.3];
        let mut prev = f64::INFINITY;
        for (l, want) in (1..=4).zip(expected) {
            let part = lloyd(&xs, l, 7, LloydOptions::default()).unwrap();
            assert!(part.total_energy < prev, "L={l}: {} !< {prev}", part.total_energy);
            assert!(
                (part.total_energy - want).abs() < 0.03 * want,
                "L={l}: {} vs {want}",
                part.total_energy
            );
            prev = part.total_energy;
        }
    }

    #[test]
    fn lloyd_energy_history_is_monotone_and_fixed_point_holds() {
        let xs = ProductDensity::unit_box(3).sample(1000, 3).unwrap();
        let part = lloyd(&xs, 5, 21, LloydOptions::default()).unwrap();
        for w in part.energy_history.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
        // re-running one assignment + centroid step must not move centroids
        let asg = assign(&xs, &part.centroids).unwrap();
        let again = centroids(&xs, &asg, 5).unwrap();
        for (a, b) in part.centroids.iter().zip(&again) {
            assert!(a.squared_distance(b).sqrt() <= 1e-9);
        }
    }

    #[test]
    fn permuting_samples_leaves_the_tessellation_unchanged() {
        let xs = ProductDensity::unit_box(2).sample(300, 31).unwrap();
        let mut pts = xs.points().to_vec();
        pts.reverse();
        let rev = SampleSet::from_points(pts, 0, xs.density().clone()).unwrap();
        let a = lloyd(&xs, 4, 11, LloydOptions::default()).unwrap();
        let b = lloyd(&rev, 4, 11, LloydOptions::default()).unwrap();
        assert!((a.total_energy - b.total_energy).abs() < 1e-9);
        for (ca, cb) in a.centroids.iter().zip(&b.centroids) {
            assert!(ca.squared_distance(cb).sqrt() < 1e-9);
        }
    }

    #[test]
    fn cluster_count_bounds_are_enforced() {
        let xs = set_1d(&[0.1, 0.9]);
        assert!(lloyd(&xs, 3, 0, LloydOptions::default()).is_err());
        assert!(lloyd(&xs, 0, 0, LloydOptions::default()).is_err());
    }
}
