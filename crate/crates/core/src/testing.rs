//! Fixtures and seeded generators for tests, benchmarks and the
//! acceptance suite.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::formulations::PeriodAssignment;
use crate::instance::{Course, Curriculum, Instance, Room, WeightVector};

/// A four-course instance in `.ctt` format, five days of four periods.
pub const TOY_CTT: &str = "Name: Toy
Courses: 4
Rooms: 3
Days: 5
Periods_per_day: 4
Curricula: 2
Constraints: 8

COURSES:
SceCosC Ocra 3 3 30
ArcTec Indaco 3 2 42
TecCos Rosa 5 4 40
Geotec Scarlatti 5 4 18

ROOMS:
A\t32
B\t50
C\t40

CURRICULA:
Cur1 3 SceCosC ArcTec TecCos
Cur2 2 TecCos Geotec

UNAVAILABILITY_CONSTRAINTS:
TecCos 2 0
TecCos 2 1
TecCos 3 2
TecCos 3 3
ArcTec 4 0
ArcTec 4 1
ArcTec 4 2
ArcTec 4 3

END.
";

/// Three courses over two days of four periods: Math101 and Algo101 share
/// one curriculum, Juggling and Algo101 another.
pub fn figure_two(rooms: usize) -> Instance {
    let course = |id: &str, t: &str, e| Course {
        id: id.into(),
        teacher: t.into(),
        events: e,
        min_days: 1,
        students: 20,
    };
    Instance::new(
        "fig2",
        vec![
            course("Juggling", "t1", 1),
            course("Math101", "t2", 4),
            course("Algo101", "t3", 3),
        ],
        (0..rooms)
            .map(|r| Room {
                id: format!("r{r}"),
                capacity: 30,
            })
            .collect(),
        vec![
            Curriculum {
                id: "u1".into(),
                courses: vec![1, 2],
            },
            Curriculum {
                id: "u2".into(),
                courses: vec![0, 2],
            },
        ],
        2,
        4,
        BTreeSet::new(),
        WeightVector::default(),
    )
    .expect("fixture is valid")
}

/// Size limits of generated instances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shape {
    pub max_courses: usize,
    pub max_rooms: usize,
    pub max_days: u32,
    pub max_periods_per_day: u32,
    pub max_events: u32,
    pub max_teachers: usize,
    pub max_curricula: usize,
    /// Chance that a `(course, period)` pair is forbidden.
    pub unavailability: f64,
}

impl Shape {
    /// At most three courses, two rooms and two days of four periods.
    pub const TINY: Shape = Shape {
        max_courses: 3,
        max_rooms: 2,
        max_days: 2,
        max_periods_per_day: 4,
        max_events: 3,
        max_teachers: 3,
        max_curricula: 2,
        unavailability: 0.15,
    };

    /// Large enough that the surface has many solutions.
    pub const SMALL: Shape = Shape {
        max_courses: 8,
        max_rooms: 3,
        max_days: 5,
        max_periods_per_day: 4,
        max_events: 4,
        max_teachers: 6,
        max_curricula: 4,
        unavailability: 0.1,
    };
}

/// A random valid instance drawn from `shape`; the same seed always gives
/// the same instance.
pub fn random_instance(seed: u64, shape: &Shape) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        if let Some(inst) = try_instance(&mut rng, shape, seed) {
            return inst;
        }
    }
}

fn try_instance(rng: &mut ChaCha8Rng, shape: &Shape, seed: u64) -> Option<Instance> {
    let nc = rng.gen_range(1..=shape.max_courses);
    let nr = rng.gen_range(1..=shape.max_rooms);
    let days = rng.gen_range(shape.max_days.div_ceil(2)..=shape.max_days);
    let ppd = rng.gen_range(shape.max_periods_per_day.div_ceil(2)..=shape.max_periods_per_day);
    let periods = (days * ppd) as usize;
    let nt = rng.gen_range(1..=shape.max_teachers.min(nc));
    let courses: Vec<Course> = (0..nc)
        .map(|c| Course {
            id: format!("c{c}"),
            teacher: format!("t{}", rng.gen_range(0..nt)),
            events: rng.gen_range(1..=shape.max_events.min(periods as u32)),
            min_days: rng.gen_range(1..=days),
            students: rng.gen_range(5..=60),
        })
        .collect();
    let rooms = (0..nr)
        .map(|r| Room {
            id: format!("r{r}"),
            capacity: rng.gen_range(10..=60),
        })
        .collect();
    let mut curricula = Vec::new();
    for u in 0..rng.gen_range(0..=shape.max_curricula) {
        let mut members: Vec<usize> = (0..nc).filter(|_| rng.gen_bool(0.5)).collect();
        if members.is_empty() {
            members.push(rng.gen_range(0..nc));
        }
        curricula.push(Curriculum {
            id: format!("q{u}"),
            courses: members,
        });
    }
    let mut unavailability = BTreeSet::new();
    for c in 0..nc {
        for p in 0..periods {
            if rng.gen_bool(shape.unavailability) {
                unavailability.insert((c, p));
            }
        }
    }
    Instance::new(
        format!("random-{seed}"),
        courses,
        rooms,
        curricula,
        days,
        ppd,
        unavailability,
        WeightVector::default(),
    )
    .ok()
}

/// A random period assignment satisfying the surface constraints, found
/// by randomised greedy construction with restarts. `None` if every
/// attempt failed.
pub fn sample_surface_assignment(
    inst: &Instance,
    rng: &mut impl Rng,
    attempts: usize,
) -> Option<PeriodAssignment> {
    let graph = inst.build_conflict_graph();
    let mut events: Vec<usize> = inst
        .courses
        .iter()
        .enumerate()
        .flat_map(|(c, course)| std::iter::repeat_n(c, course.events as usize))
        .collect();
    for _ in 0..attempts {
        events.shuffle(rng);
        let mut times = vec![Vec::new(); inst.courses.len()];
        let mut load = vec![0usize; inst.num_periods()];
        let mut ok = true;
        for &c in &events {
            let open: Vec<usize> = (0..inst.num_periods())
                .filter(|&p| {
                    inst.is_available(c, p)
                        && load[p] < inst.rooms.len()
                        && !times[c].contains(&p)
                        && graph.neighbors(c).iter().all(|&o| !times[o].contains(&p))
                })
                .collect();
            match open.choose(rng) {
                Some(&p) => {
                    times[c].push(p);
                    load[p] += 1;
                }
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            return Some(PeriodAssignment::new(inst, times));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_is_seeded() {
        assert_eq!(
            random_instance(7, &Shape::TINY),
            random_instance(7, &Shape::TINY)
        );
        for seed in 0..50 {
            let inst = random_instance(seed, &Shape::TINY);
            assert!(inst.courses.len() <= 3 && inst.rooms.len() <= 2 && inst.num_periods() <= 8);
        }
    }

    #[test]
    fn sampled_assignments_validate() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut found = 0;
        for seed in 0..20 {
            let inst = random_instance(seed, &Shape::SMALL);
            if let Some(a) = sample_surface_assignment(&inst, &mut rng, 50) {
                a.validate(&inst).unwrap();
                found += 1;
            }
        }
        assert!(found > 10, "{found}");
    }
}
