//! Transmission topologies and the N-period circle schedule.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The four transmission-graph archetypes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TopologyKind {
    CompleteGraph,
    Circle,
    HalfCircle,
    Tree,
}

impl fmt::Display for TopologyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TopologyKind::CompleteGraph => "complete",
            TopologyKind::Circle => "circle",
            TopologyKind::HalfCircle => "half-circle",
            TopologyKind::Tree => "tree",
        })
    }
}

impl FromStr for TopologyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "complete" | "complete-graph" | "cgt" => Ok(TopologyKind::CompleteGraph),
            "circle" | "ct" => Ok(TopologyKind::Circle),
            "half-circle" | "halfcircle" => Ok(TopologyKind::HalfCircle),
            "tree" | "tt" => Ok(TopologyKind::Tree),
            _ => Err(Error::config(format!("unknown topology '{s}'"))),
        }
    }
}

/// A transmission graph over `n` participants numbered 0..n-1, with
/// transmission in increasing index direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topology {
    pub kind: TopologyKind,
    pub n: usize,
}

impl Topology {
    pub fn new(kind: TopologyKind, n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::structural(format!(
                "topology requires at least 3 participants, got {n}"
            )));
        }
        Ok(Topology { kind, n })
    }

    /// Forward and backward arc lengths for the half-circle variant: each
    /// participant emits two sequences covering ceil((n-1)/2) successors and
    /// floor((n-1)/2) predecessors respectively.
    pub fn half_arcs(&self) -> (usize, usize) {
        let fwd = self.n / 2; // ceil((n-1)/2)
        let back = (self.n - 1) / 2; // floor((n-1)/2)
        (fwd, back)
    }
}

/// The N-period timetable of a circle run: in period k the traveling half of
/// P_i's sequence sits with P_{i+k mod N}, and it is home again at period N.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CircleSchedule {
    pub n: usize,
}

impl CircleSchedule {
    pub fn new(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::structural(format!(
                "circle schedule requires at least 3 participants, got {n}"
            )));
        }
        Ok(CircleSchedule { n })
    }

    /// Who holds the traveling half of `sequence_owner`'s sequence in period
    /// `k` (1 <= k <= N).
    pub fn holder(&self, sequence_owner: usize, period: usize) -> Result<usize> {
        if sequence_owner >= self.n {
            return Err(Error::structural(format!(
                "owner {sequence_owner} out of range for n={}",
                self.n
            )));
        }
        if period < 1 || period > self.n {
            return Err(Error::structural(format!(
                "period {period} out of range [1, {}]",
                self.n
            )));
        }
        Ok((sequence_owner + period) % self.n)
    }
}

/// Circular gap lengths between adjacent positions, in sorted-position order.
/// The entry for position p is the hop count to the next position clockwise;
/// the gaps always sum to N.
pub fn circular_gaps(n: usize, positions: &BTreeSet<usize>) -> Result<Vec<usize>> {
    if positions.is_empty() {
        return Err(Error::structural("empty position set"));
    }
    if let Some(&p) = positions.iter().find(|&&p| p >= n) {
        return Err(Error::structural(format!(
            "position {p} out of range for n={n}"
        )));
    }
    let sorted: Vec<usize> = positions.iter().copied().collect();
    let gaps = sorted
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let next = sorted[(i + 1) % sorted.len()];
            (next + n - p - 1) % n + 1
        })
        .collect();
    Ok(gaps)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(xs: &[usize]) -> BTreeSet<usize> {
        xs.iter().copied().collect()
    }

    #[test]
    fn first_hop_goes_to_the_successor() {
        let s = CircleSchedule::new(5).unwrap();
        assert_eq!(s.holder(2, 1).unwrap(), 3);
    }

    #[test]
    fn full_circle_returns_home() {
        let s = CircleSchedule::new(5).unwrap();
        assert_eq!(s.holder(2, 5).unwrap(), 2);
    }

    #[test]
    fn period_out_of_range() {
        let s = CircleSchedule::new(5).unwrap();
        assert!(s.holder(2, 0).is_err());
        assert!(s.holder(2, 6).is_err());
    }

    // Brute-force hand-off oracle: simulate the hop-by-hop transmission and
    // compare against the modular formula for every (owner, period) at N=4.
    #[test]
    fn holder_matches_hand_off_simulation() {
        let n = 4;
        let s = CircleSchedule::new(n).unwrap();
        for owner in 0..n {
            let mut at = owner;
            for period in 1..=n {
                at = (at + 1) % n; // one hop per period
                assert_eq!(s.holder(owner, period).unwrap(), at);
            }
        }
    }

    // Per fixed period, holding is a bijection over sequences.
    #[test]
    fn holder_is_a_bijection_per_period() {
        let n = 7;
        let s = CircleSchedule::new(n).unwrap();
        for period in 1..=n {
            let holders: BTreeSet<usize> =
                (0..n).map(|o| s.holder(o, period).unwrap()).collect();
            assert_eq!(holders.len(), n);
        }
    }

    #[test]
    fn gaps_symmetric_split() {
        assert_eq!(circular_gaps(6, &set(&[0, 3])).unwrap(), vec![3, 3]);
    }

    #[test]
    fn gaps_three_equal_colluders() {
        assert_eq!(circular_gaps(9, &set(&[0, 3, 6])).unwrap(), vec![3, 3, 3]);
    }

    #[test]
    fn gaps_counted_by_hops() {
        assert_eq!(circular_gaps(7, &set(&[1, 5])).unwrap(), vec![4, 3]);
    }

    #[test]
    fn gaps_sum_to_n() {
        for n in 3..10 {
            for a in 0..n {
                for b in 0..n {
                    if a == b {
                        continue;
                    }
                    let gaps = circular_gaps(n, &set(&[a, b])).unwrap();
                    assert_eq!(gaps.iter().sum::<usize>(), n);
                }
            }
        }
    }

    #[test]
    fn gaps_reject_out_of_range() {
        assert!(circular_gaps(5, &set(&[0, 7])).is_err());
        assert!(circular_gaps(5, &BTreeSet::new()).is_err());
    }

    #[test]
    fn single_position_gap_is_n() {
        assert_eq!(circular_gaps(5, &set(&[2])).unwrap(), vec![5]);
    }

    #[test]
    fn half_arcs_cover_everyone_else() {
        for n in 3..12 {
            let t = Topology::new(TopologyKind::HalfCircle, n).unwrap();
            let (f, b) = t.half_arcs();
            assert_eq!(f + b, n - 1);
            assert!(f == b || f == b + 1);
        }
    }
}
