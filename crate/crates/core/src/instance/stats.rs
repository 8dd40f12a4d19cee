use std::fmt;

use serde::{Deserialize, Serialize};

use super::Instance;

/// Size and tightness figures of an instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceStats {
    pub name: String,
    pub rooms: usize,
    pub periods: usize,
    pub courses: usize,
    pub events: u32,
    /// Share of period-room slots used, in `[0, 1]`.
    pub frequency: f64,
    /// Share of period-seat slots used.
    pub utilisation: f64,
    pub curricula: usize,
    pub conflict_edges: usize,
    pub conflict_density: f64,
}

pub fn instance_stats(inst: &Instance) -> InstanceStats {
    let periods = inst.num_periods();
    let events = inst.total_events();
    let slots = (periods * inst.rooms.len()) as f64;
    let seats = periods as f64 * inst.rooms.iter().map(|r| r.capacity as f64).sum::<f64>();
    let demand: f64 = inst
        .courses
        .iter()
        .map(|c| c.events as f64 * c.students as f64)
        .sum();
    let graph = inst.build_conflict_graph();
    InstanceStats {
        name: inst.name.clone(),
        rooms: inst.rooms.len(),
        periods,
        courses: inst.courses.len(),
        events,
        frequency: if slots > 0.0 {
            events as f64 / slots
        } else {
            0.0
        },
        utilisation: if seats > 0.0 { demand / seats } else { 0.0 },
        curricula: inst.curricula.len(),
        conflict_edges: graph.num_edges(),
        conflict_density: graph.density(),
    }
}

/// Formats a fraction as a percentage with two decimals, e.g. `88.89 %`.
pub fn percent(fraction: f64) -> String {
    format!("{:.2} %", fraction * 100.0)
}

impl fmt::Display for InstanceStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "instance     {}", self.name)?;
        writeln!(f, "rooms        {}", self.rooms)?;
        writeln!(f, "periods      {}", self.periods)?;
        writeln!(f, "courses      {}", self.courses)?;
        writeln!(f, "events       {}", self.events)?;
        writeln!(f, "frequency    {}", percent(self.frequency))?;
        writeln!(f, "utilisation  {}", percent(self.utilisation))?;
        writeln!(f, "curricula    {}", self.curricula)?;
        writeln!(f, "cg-edges     {}", self.conflict_edges)?;
        write!(f, "cg-density   {}", percent(self.conflict_density))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::parse_ctt;

    #[test]
    fn toy_figures() {
        let inst = parse_ctt(crate::instance::parse::tests_support::TOY).unwrap();
        let s = instance_stats(&inst);
        assert_eq!(s.events, 16);
        // 16 events over 20 periods x 3 rooms
        assert_eq!(percent(s.frequency), "26.67 %");
        // (3*30 + 3*42 + 5*40 + 5*18) / (20 * 122)
        assert!((s.utilisation - 506.0 / 2440.0).abs() < 1e-12);
        assert_eq!(s.conflict_edges, 4);
    }

    #[test]
    fn empty_instance_has_zero_frequency() {
        let inst = Instance::new(
            "empty",
            vec![],
            vec![],
            vec![],
            1,
            1,
            Default::default(),
            Default::default(),
        )
        .unwrap();
        let s = instance_stats(&inst);
        assert_eq!(s.frequency, 0.0);
        assert_eq!(s.conflict_density, 0.0);
    }
}
