//! Collections of arc-disjoint paths and the greedy ways of combining them.

use crate::error::{Error, Result};
use crate::graph::{are_arc_disjoint, ArcPath, Digraph};
use crate::ratio::Frac;

/// Paths with their lengths, sorted by length descending and then by arc sequence.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PathProfile {
    pub paths: Vec<ArcPath>,
    pub lengths: Vec<i64>,
}

impl PathProfile {
    /// Builds a profile, measuring lengths in `g`.
    pub fn new(g: &Digraph, paths: Vec<ArcPath>) -> Result<Self> {
        let lengths = paths.iter().map(|p| g.path_length(p)).collect::<Result<Vec<_>>>()?;
        Ok(Self::from_parts(paths, lengths))
    }

    pub fn from_parts(paths: Vec<ArcPath>, lengths: Vec<i64>) -> Self {
        let mut pairs: Vec<(i64, ArcPath)> = lengths.into_iter().zip(paths).collect();
        pairs.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
        let (lengths, paths) = pairs.into_iter().unzip();
        PathProfile { paths, lengths }
    }

    pub fn k(&self) -> usize {
        self.paths.len()
    }

    pub fn max_length(&self) -> i64 {
        self.lengths.first().copied().unwrap_or(0)
    }

    pub fn total(&self) -> i64 {
        self.lengths.iter().sum()
    }

    /// Lengths of the same paths measured in another graph on the same arcs.
    pub fn remeasure(&self, g: &Digraph) -> Result<PathProfile> {
        PathProfile::new(g, self.paths.clone())
    }

    /// Checks `k` simple, arc-disjoint source-sink paths whose stored lengths match `g`.
    pub fn validate(&self, g: &Digraph, k: usize) -> Result<()> {
        if self.k() != k {
            return Err(Error::Validation(format!("profile has {} paths, expected {k}", self.k())));
        }
        for (p, &l) in self.paths.iter().zip(&self.lengths) {
            if g.check_st_path(p)? != l {
                return Err(Error::Validation("stored path length is stale".into()));
            }
        }
        if !are_arc_disjoint(&self.paths) {
            return Err(Error::Validation("profile paths share an arc".into()));
        }
        Ok(())
    }

    /// Concatenation of all arc ids in profile order; the final tie-breaker between profiles.
    pub fn arc_sequence(&self) -> Vec<usize> {
        self.paths.iter().flatten().copied().collect()
    }
}

/// Pairs the i-th longest path of `q` with the i-th shortest path of `r`.
pub fn greedy_series(q: &PathProfile, r: &PathProfile) -> Result<PathProfile> {
    if q.k() != r.k() {
        return Err(Error::InvalidParameter("series composition needs equal path counts".into()));
    }
    let k = q.k();
    let mut paths = Vec::with_capacity(k);
    let mut lengths = Vec::with_capacity(k);
    for i in 0..k {
        let mut p = q.paths[i].clone();
        p.extend_from_slice(&r.paths[k - 1 - i]);
        paths.push(p);
        lengths.push(q.lengths[i].checked_add(r.lengths[k - 1 - i]).ok_or(Error::Overflow("series length"))?);
    }
    Ok(PathProfile::from_parts(paths, lengths))
}

/// Union of both profiles.
pub fn greedy_parallel(q: &PathProfile, r: &PathProfile) -> PathProfile {
    let mut paths = q.paths.clone();
    paths.extend(r.paths.iter().cloned());
    let mut lengths = q.lengths.clone();
    lengths.extend_from_slice(&r.lengths);
    PathProfile::from_parts(paths, lengths)
}

/// `max_i (mean of the i longest) − (i+1)-th longest` over `1 ≤ i < k`; zero for `k ≤ 1`.
/// `lengths` must be sorted descending.
pub fn balance_score(lengths: &[i64]) -> Frac {
    let mut best = Frac::int(0);
    let mut prefix: i128 = 0;
    for i in 1..lengths.len() {
        prefix += lengths[i - 1] as i128;
        let term = Frac::new(prefix - (i as i128) * lengths[i] as i128, i as i128);
        if term > best {
            best = term;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prof(lengths: &[i64]) -> PathProfile {
        let paths = (0..lengths.len()).map(|i| vec![i]).collect();
        PathProfile::from_parts(paths, lengths.to_vec())
    }

    #[test]
    fn greedy_series_pairs_long_with_short() {
        let p = greedy_series(&prof(&[5, 3, 1]), &prof(&[4, 2, 2])).unwrap();
        assert_eq!(p.lengths, vec![7, 5, 5]);
        let p = greedy_series(&prof(&[0]), &prof(&[9])).unwrap();
        assert_eq!(p.lengths, vec![9]);
        assert!(greedy_series(&prof(&[1, 2]), &prof(&[1])).is_err());
    }

    #[test]
    fn greedy_parallel_merges() {
        assert_eq!(greedy_parallel(&prof(&[5, 1]), &prof(&[3])).lengths, vec![5, 3, 1]);
    }

    #[test]
    fn balance_scores() {
        assert_eq!(balance_score(&[7]), Frac::int(0));
        assert_eq!(balance_score(&[]), Frac::int(0));
        assert_eq!(balance_score(&[4, 4, 4]), Frac::int(0));
        // i=1: 6-2=4, i=2: 4-2=2
        assert_eq!(balance_score(&[6, 2, 2]), Frac::int(4));
        // i=1: 0, i=2: 3-0=3
        assert_eq!(balance_score(&[3, 3, 0]), Frac::int(3));
        // i=1: 1 beats i=2: (5+4)/2 - 4 = 1/2
        assert_eq!(balance_score(&[5, 4, 4]), Frac::int(1));
        assert_eq!(balance_score(&[4, 3, 1]), Frac::new(5, 2));
    }

    #[test]
    fn profile_sorting_breaks_ties_by_arcs() {
        let p = PathProfile::from_parts(vec![vec![3], vec![1], vec![2]], vec![1, 1, 2]);
        assert_eq!(p.paths, vec![vec![2], vec![1], vec![3]]);
    }
}
