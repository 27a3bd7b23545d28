//! Exact maxmin optimum by bottleneck search over the Boolean hypercube.
//!
//! Every vertex gets its satisfied-clause count. The optimum is the largest `s` such that
//! start and end lie in one component of the vertices scoring at least `s`; a descending
//! sweep with union-find finds it, and a max-bottleneck priority search cross-checks it.

use std::collections::VecDeque;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::formula::{Assignment, Instance, ReconfSequence};
use crate::rational::Rational;

pub const DEFAULT_N_CAP: usize = 24;
/// Vertex indices are `u32`.
const HARD_N_LIMIT: usize = 32;

/// Satisfied-clause counts for all `2^n` assignments; vertex `i` is `Assignment::from_index(i)`.
pub struct HypercubeSearch {
    n: usize,
    m: usize,
    scores: Vec<u32>,
    start: u32,
    end: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactResult {
    pub opt: Rational,
    /// `opt · m`.
    pub opt_count: u32,
    pub witness: ReconfSequence,
}

impl HypercubeSearch {
    pub fn build(instance: &Instance, n_cap: usize) -> Result<Self> {
        let n = instance.num_vars();
        let limit = n_cap.min(HARD_N_LIMIT);
        if n > limit {
            return Err(Error::CapExceeded {
                what: "variables for exact search",
                limit: limit as u128,
                actual: n as u128,
            });
        }
        Ok(HypercubeSearch {
            n,
            m: instance.num_clauses(),
            scores: score_all(instance),
            start: instance.start.to_index() as u32,
            end: instance.end.to_index() as u32,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn score(&self, a: &Assignment) -> u32 {
        self.scores[a.to_index() as usize]
    }

    pub fn scores(&self) -> &[u32] {
        &self.scores
    }

    fn neighbors(&self, v: u32) -> impl Iterator<Item = u32> + '_ {
        (0..self.n).map(move |i| v ^ (1 << i))
    }

    /// Largest `s` with start and end connected among vertices scoring ≥ `s`.
    pub fn opt_count(&self) -> u32 {
        let size = self.scores.len();
        // Counting sort by descending score.
        let mut bucket_start = vec![0usize; self.m + 2];
        for &s in &self.scores {
            bucket_start[self.m - s as usize + 1] += 1;
        }
        for i in 1..bucket_start.len() {
            bucket_start[i] += bucket_start[i - 1];
        }
        let mut order = vec![0u32; size];
        let mut fill = bucket_start.clone();
        for (v, &s) in self.scores.iter().enumerate() {
            let b = self.m - s as usize;
            order[fill[b]] = v as u32;
            fill[b] += 1;
        }

        let mut uf = UnionFind::new(size);
        let mut active = vec![false; size];
        for level in 0..=self.m {
            for &v in &order[bucket_start[level]..bucket_start[level + 1]] {
                active[v as usize] = true;
                for w in self.neighbors(v) {
                    if active[w as usize] {
                        uf.union(v, w);
                    }
                }
            }
            if active[self.start as usize]
                && active[self.end as usize]
                && uf.find(self.start) == uf.find(self.end)
            {
                return (self.m - level) as u32;
            }
        }
        unreachable!("the full hypercube is connected")
    }

    /// Max-bottleneck priority search from start; returns the best bottleneck score at end.
    pub fn widest_path(&self) -> u32 {
        // best[v] = bottleneck + 1, 0 = unseen.
        let mut best = vec![0u32; self.scores.len()];
        let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); self.m + 1];
        best[self.start as usize] = self.scores[self.start as usize] + 1;
        buckets[self.scores[self.start as usize] as usize].push(self.start);
        for level in (0..=self.m).rev() {
            while let Some(v) = buckets[level].pop() {
                if best[v as usize] != level as u32 + 1 {
                    continue;
                }
                if v == self.end {
                    return level as u32;
                }
                for w in self.neighbors(v) {
                    let cand = (level as u32).min(self.scores[w as usize]);
                    if cand + 1 > best[w as usize] {
                        best[w as usize] = cand + 1;
                        buckets[cand as usize].push(w);
                    }
                }
            }
        }
        unreachable!("end is reachable in the hypercube")
    }

    /// Shortest path from start to end through vertices scoring ≥ `threshold`.
    pub fn path_at(&self, threshold: u32) -> Option<ReconfSequence> {
        let ok = |v: u32| self.scores[v as usize] >= threshold;
        if !ok(self.start) || !ok(self.end) {
            return None;
        }
        let mut parent = vec![u32::MAX; self.scores.len()];
        parent[self.start as usize] = self.start;
        let mut queue = VecDeque::from([self.start]);
        while let Some(v) = queue.pop_front() {
            if v == self.end {
                break;
            }
            for w in self.neighbors(v) {
                if parent[w as usize] == u32::MAX && ok(w) {
                    parent[w as usize] = v;
                    queue.push_back(w);
                }
            }
        }
        if parent[self.end as usize] == u32::MAX {
            return None;
        }
        let mut path = vec![self.end];
        let mut v = self.end;
        while v != self.start {
            v = parent[v as usize];
            path.push(v);
        }
        path.reverse();
        let steps = path
            .into_iter()
            .map(|i| Assignment::from_index(i as u64, self.n))
            .collect();
        Some(ReconfSequence::new(steps).expect("BFS path is adjacent"))
    }

    pub fn reachable(&self, threshold: u32) -> bool {
        self.path_at(threshold).is_some()
    }

    pub fn solve(&self) -> ExactResult {
        let opt_count = self.opt_count();
        let witness = self.path_at(opt_count).expect("opt threshold is reachable");
        ExactResult {
            opt: Rational::new(opt_count.into(), self.m.into()),
            opt_count,
            witness,
        }
    }
}

fn score_all(instance: &Instance) -> Vec<u32> {
    let n = instance.num_vars();
    let clauses = instance.formula.clauses();
    // occ[v] = (clause, negated) for each occurrence of variable v+1.
    let mut occ: Vec<Vec<(u32, bool)>> = vec![Vec::new(); n];
    for (j, c) in clauses.iter().enumerate() {
        for l in c.literals() {
            occ[l.var() - 1].push((j as u32, l.is_negated()));
        }
    }
    let top_bits = n.saturating_sub(10).min(8);
    let low_bits = n - top_bits;
    let mut scores = vec![0u32; 1usize << n];
    scores
        .par_chunks_mut(1usize << low_bits)
        .enumerate()
        .for_each(|(chunk, out)| {
            let base = (chunk as u64) << low_bits;
            let mut a = Assignment::from_index(base, n);
            let mut counts: Vec<u32> = clauses.iter().map(|c| c.true_count(&a) as u32).collect();
            let mut sat = counts.iter().filter(|&&c| c > 0).count() as u32;
            let mut idx = 0usize;
            out[0] = sat;
            for i in 1usize..1 << low_bits {
                let bit = i.trailing_zeros() as usize;
                idx ^= 1 << bit;
                let var = bit + 1;
                a.flip(var);
                let now = a.get(var);
                for &(j, neg) in &occ[bit] {
                    let c = &mut counts[j as usize];
                    if now != neg {
                        *c += 1;
                        if *c == 1 {
                            sat += 1;
                        }
                    } else {
                        *c -= 1;
                        if *c == 0 {
                            sat -= 1;
                        }
                    }
                }
                out[idx] = sat;
            }
        });
    scores
}

struct UnionFind {
    parent: Vec<u32>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new(size: usize) -> Self {
        UnionFind {
            parent: (0..size as u32).collect(),
            rank: vec![0; size],
        }
    }

    fn find(&mut self, mut v: u32) -> u32 {
        while self.parent[v as usize] != v {
            let p = self.parent[v as usize];
            self.parent[v as usize] = self.parent[p as usize];
            v = p;
        }
        v
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        let (ra, rb) = if self.rank[ra as usize] < self.rank[rb as usize] {
            (rb, ra)
        } else {
            (ra, rb)
        };
        self.parent[rb as usize] = ra;
        if self.rank[ra as usize] == self.rank[rb as usize] {
            self.rank[ra as usize] += 1;
        }
    }
}

/// Exact optimum and an optimal witness sequence.
pub fn opt_exact(instance: &Instance, n_cap: usize) -> Result<ExactResult> {
    Ok(HypercubeSearch::build(instance, n_cap)?.solve())
}

/// Smallest satisfied-clause count whose fraction is at least `theta`.
fn threshold_count(theta: &Rational, m: usize) -> Option<u32> {
    let need: BigInt = (theta * Rational::from_integer(m.into()))
        .ceil()
        .to_integer();
    if need.is_negative() {
        return Some(0);
    }
    need.to_u32()
}

/// Whether start and end are connected through assignments of value ≥ `theta`.
pub fn reachable_at_threshold(instance: &Instance, theta: &Rational, n_cap: usize) -> Result<bool> {
    let search = HypercubeSearch::build(instance, n_cap)?;
    Ok(match threshold_count(theta, instance.num_clauses()) {
        Some(t) if t as usize <= instance.num_clauses() => search.reachable(t),
        _ => false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse_instance, seq_value, value};
    use crate::rational::{int, ratio};

    const EXAMPLE: &str = "p eksr 4 6 3\n-1 -2 3 0\n-1 2 -3 0\n1 -2 -3 0\n-1 2 -4 0\n\
        -2 3 -4 0\n1 -3 -4 0\ns 0000\nt 1111\n";

    #[test]
    fn example_optimum() {
        let inst = parse_instance(EXAMPLE).unwrap();
        let r = opt_exact(&inst, DEFAULT_N_CAP).unwrap();
        assert_eq!(r.opt, ratio(5, 6));
        assert_eq!(seq_value(&inst.formula, &r.witness).unwrap(), ratio(5, 6));
        assert_eq!(r.witness.first(), &inst.start);
        assert_eq!(r.witness.last(), &inst.end);
        let s = HypercubeSearch::build(&inst, 24).unwrap();
        assert_eq!(s.widest_path(), 5);
    }

    #[test]
    fn example_thresholds() {
        let inst = parse_instance(EXAMPLE).unwrap();
        assert!(!reachable_at_threshold(&inst, &int(1), 24).unwrap());
        assert!(reachable_at_threshold(&inst, &ratio(5, 6), 24).unwrap());
        assert!(reachable_at_threshold(&inst, &int(0), 24).unwrap());
        assert!(reachable_at_threshold(&inst, &ratio(-1, 2), 24).unwrap());
        assert!(!reachable_at_threshold(&inst, &int(2), 24).unwrap());
    }

    #[test]
    fn scores_match_value() {
        let inst = parse_instance(EXAMPLE).unwrap();
        let s = HypercubeSearch::build(&inst, 24).unwrap();
        for i in 0..16u64 {
            let a = Assignment::from_index(i, 4);
            assert_eq!(
                Rational::new(s.score(&a).into(), 6.into()),
                value(&inst.formula, &a).unwrap()
            );
        }
    }

    #[test]
    fn identical_endpoints() {
        let inst = parse_instance("p eksr 3 1 3\n1 2 3 0\ns 111\nt 111\n").unwrap();
        let r = opt_exact(&inst, 24).unwrap();
        assert_eq!(r.opt, int(1));
        assert_eq!(r.witness.len(), 1);
    }

    #[test]
    fn cap() {
        let inst = parse_instance(EXAMPLE).unwrap();
        assert!(matches!(
            opt_exact(&inst, 3),
            Err(Error::CapExceeded { .. })
        ));
    }
}
