use serde::{Deserialize, Serialize};

use super::Instance;

/// `multiplicity` interchangeable rooms of capacity `capacity`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiRoom {
    pub multiplicity: u32,
    pub capacity: u32,
    /// Original room indices, ascending.
    pub members: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum MultiRoomPolicy {
    /// All rooms become one multi-room.
    Single,
    /// Two multi-rooms split at the (lower) median capacity; rooms with
    /// capacity at most the median go to the small one.
    #[default]
    MedianSplit,
    /// Every room is its own multi-room.
    Identity,
}

impl std::str::FromStr for MultiRoomPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "single" => Ok(MultiRoomPolicy::Single),
            "median" | "median-split" => Ok(MultiRoomPolicy::MedianSplit),
            "identity" => Ok(MultiRoomPolicy::Identity),
            other => Err(format!("unknown multi-room policy `{other}`")),
        }
    }
}

fn group(inst: &Instance, members: Vec<usize>) -> MultiRoom {
    MultiRoom {
        multiplicity: members.len() as u32,
        capacity: members
            .iter()
            .map(|&r| inst.rooms[r].capacity)
            .max()
            .unwrap_or(0),
        members,
    }
}

/// Partitions the rooms into multi-rooms. Empty groups are omitted.
pub fn build_multirooms(inst: &Instance, policy: MultiRoomPolicy) -> Vec<MultiRoom> {
    let all: Vec<usize> = (0..inst.rooms.len()).collect();
    if all.is_empty() {
        return Vec::new();
    }
    match policy {
        MultiRoomPolicy::Single => vec![group(inst, all)],
        MultiRoomPolicy::Identity => all.into_iter().map(|r| group(inst, vec![r])).collect(),
        MultiRoomPolicy::MedianSplit => {
            let mut caps: Vec<u32> = inst.rooms.iter().map(|r| r.capacity).collect();
            caps.sort_unstable();
            let median = caps[(caps.len() - 1) / 2];
            let (small, large): (Vec<usize>, Vec<usize>) = all
                .into_iter()
                .partition(|&r| inst.rooms[r].capacity <= median);
            [small, large]
                .into_iter()
                .filter(|g| !g.is_empty())
                .map(|g| group(inst, g))
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{Course, Room, WeightVector};

    fn with_rooms(caps: &[u32]) -> Instance {
        Instance::new(
            "r",
            vec![Course {
                id: "c".into(),
                teacher: "t".into(),
                events: 1,
                min_days: 1,
                students: 1,
            }],
            caps.iter()
                .enumerate()
                .map(|(i, &c)| Room {
                    id: format!("r{i}"),
                    capacity: c,
                })
                .collect(),
            vec![],
            1,
            1,
            Default::default(),
            WeightVector::default(),
        )
        .unwrap()
    }

    #[test]
    fn median_split_of_four() {
        let inst = with_rooms(&[10, 20, 30, 40]);
        let m = build_multirooms(&inst, MultiRoomPolicy::MedianSplit);
        assert_eq!(
            m,
            vec![
                MultiRoom {
                    multiplicity: 2,
                    capacity: 20,
                    members: vec![0, 1]
                },
                MultiRoom {
                    multiplicity: 2,
                    capacity: 40,
                    members: vec![2, 3]
                },
            ]
        );
    }

    #[test]
    fn median_split_unsorted_odd() {
        let inst = with_rooms(&[50, 10, 30]);
        let m = build_multirooms(&inst, MultiRoomPolicy::MedianSplit);
        assert_eq!(m[0].members, vec![1, 2]);
        assert_eq!(m[0].capacity, 30);
        assert_eq!(m[1].members, vec![0]);
    }

    #[test]
    fn equal_capacities_collapse_to_one_group() {
        let inst = with_rooms(&[20, 20, 20]);
        let m = build_multirooms(&inst, MultiRoomPolicy::MedianSplit);
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].multiplicity, 3);
    }

    #[test]
    fn single_and_identity() {
        let inst = with_rooms(&[10, 60, 30]);
        let s = build_multirooms(&inst, MultiRoomPolicy::Single);
        assert_eq!(s.len(), 1);
        assert_eq!((s[0].multiplicity, s[0].capacity), (3, 60));
        let id = build_multirooms(&inst, MultiRoomPolicy::Identity);
        assert_eq!(id.len(), 3);
        assert!(id.iter().all(|m| m.multiplicity == 1));
        assert_eq!(id[1].capacity, 60);
    }
}
