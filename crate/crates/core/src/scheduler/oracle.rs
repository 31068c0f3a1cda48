//! Brute-force reference planner.
//!
//! Enumerates every sequence of distinct spindle positions (up to the number
//! of position classes the demand touches) and every assignment of demanded
//! shafts to visited positions that can reach them. Travel, phase time and
//! makespan are computed here from the raw configuration, not through the
//! planner's helpers.

use super::{check_reachable, MotorRun, MotionDemand, Phase, PlanError, PlanOrigin, Schedule};
use crate::hand_model::HandConfig;

/// Largest number of distinct position classes the oracle will enumerate.
pub const ORACLE_MAX_CLASSES: usize = 4;

pub fn oracle_optimal(demand: &MotionDemand, config: &HandConfig) -> Result<Schedule, PlanError> {
    oracle_optimal_from(demand, config, &PlanOrigin::default())
}

/// (makespan, positions, (motor, shaft) groups per position)
type Best = (f64, Vec<usize>, Vec<Vec<(usize, usize)>>);

struct Search<'a> {
    config: &'a HandConfig,
    demand: &'a MotionDemand,
    active: Vec<usize>,
    k: f64,
    start: usize,
    best: Option<Best>,
}

impl Search<'_> {
    fn motor_reaching(&self, shaft: usize, position: usize) -> Option<usize> {
        let map = &self.config.shaft_map;
        map.motor_offsets
            .iter()
            .position(|&off| (off + position) % map.num_shafts == shaft)
    }

    fn travel_deg(&self, from: usize, to: usize) -> f64 {
        let n = self.config.shaft_map.num_positions;
        let d = from.abs_diff(to);
        let steps = d.min(n - d);
        steps as f64 * (360.0 / n as f64)
    }

    /// Makespan of visiting `positions` with `groups[i]` = (motor, shaft) pairs run there.
    fn cost(&self, positions: &[usize], groups: &[Vec<(usize, usize)>]) -> f64 {
        let t = &self.config.timing;
        let mut total = 0.0;
        let mut at = self.start;
        for (&p, group) in positions.iter().zip(groups) {
            let mut slowest = 0.0f64;
            for &(_, shaft) in group {
                slowest = slowest.max((self.demand.0[shaft] * self.k).abs() / t.motor_speed);
            }
            total += self.travel_deg(at, p) / t.spindle_speed + t.settle_time + slowest;
            at = p;
        }
        total
    }

    fn consider(&mut self, positions: &[usize]) {
        // every assignment of each active shaft to one visited position reaching it
        let options: Vec<Vec<usize>> = self
            .active
            .iter()
            .map(|&s| (0..positions.len()).filter(|&i| self.motor_reaching(s, positions[i]).is_some()).collect())
            .collect();
        if options.iter().any(|o| o.is_empty()) {
            return;
        }
        let mut pick = vec![0usize; options.len()];
        loop {
            let mut groups: Vec<Vec<(usize, usize)>> = vec![Vec::new(); positions.len()];
            for (i, &shaft) in self.active.iter().enumerate() {
                let slot = options[i][pick[i]];
                let motor = self.motor_reaching(shaft, positions[slot]).unwrap();
                groups[slot].push((motor, shaft));
            }
            if groups.iter().all(|g| !g.is_empty()) {
                let c = self.cost(positions, &groups);
                let replace = match &self.best {
                    None => true,
                    Some((bc, bp, _)) => c < *bc || (c == *bc && positions < bp.as_slice()),
                };
                if replace {
                    self.best = Some((c, positions.to_vec(), groups));
                }
            }

            let mut i = pick.len();
            loop {
                if i == 0 {
                    return;
                }
                i -= 1;
                pick[i] += 1;
                if pick[i] < options[i].len() {
                    break;
                }
                pick[i] = 0;
            }
        }
    }

    fn extend(&mut self, prefix: &mut Vec<usize>, useful: &[usize], max_len: usize) {
        if !prefix.is_empty() {
            self.consider(prefix);
        }
        if prefix.len() == max_len {
            return;
        }
        for &p in useful {
            if !prefix.contains(&p) {
                prefix.push(p);
                self.extend(prefix, useful, max_len);
                prefix.pop();
            }
        }
    }
}

pub fn oracle_optimal_from(
    demand: &MotionDemand,
    config: &HandConfig,
    origin: &PlanOrigin,
) -> Result<Schedule, PlanError> {
    check_reachable(demand, config, origin)?;
    let map = &config.shaft_map;
    let active: Vec<usize> = (0..map.num_shafts).filter(|&s| demand.0[s] != 0.0).collect();
    let start = origin.spindle_position;
    if active.is_empty() {
        return Ok(Schedule { phases: Vec::new(), makespan_s: 0.0, start_position: start });
    }

    let mut search = Search {
        config,
        demand,
        active,
        k: (f64::from(config.gears.z2) * f64::from(config.gears.z4))
            / (f64::from(config.gears.z1) * f64::from(config.gears.z3)),
        start,
        best: None,
    };

    let useful: Vec<usize> = (0..map.num_positions)
        .filter(|&p| search.active.iter().any(|&s| search.motor_reaching(s, p).is_some()))
        .collect();
    let mut touched: Vec<Vec<usize>> = Vec::new();
    for &p in &useful {
        let mut set: Vec<usize> = map.motor_offsets.iter().map(|off| (off + p) % map.num_shafts).collect();
        set.sort_unstable();
        if !touched.contains(&set) {
            touched.push(set);
        }
    }
    if touched.len() > ORACLE_MAX_CLASSES {
        return Err(PlanError::TooLarge { needed: touched.len(), max: ORACLE_MAX_CLASSES });
    }
    for &s in &search.active {
        if !useful.iter().any(|&p| search.motor_reaching(s, p).is_some()) {
            return Err(PlanError::NoPosition(s));
        }
    }

    search.extend(&mut Vec::new(), &useful, touched.len());
    let (makespan_s, positions, groups) = search.best.take().expect("a covering sequence exists");

    let mut at = start;
    let phases = positions
        .iter()
        .zip(groups)
        .map(|(&position, mut group)| {
            group.sort_unstable();
            let runs: Vec<MotorRun> = group
                .into_iter()
                .map(|(motor, shaft)| MotorRun { motor, shaft, motor_deg: demand.0[shaft] * search.k })
                .collect();
            let slowest = runs
                .iter()
                .map(|r| r.motor_deg.abs() / config.timing.motor_speed)
                .fold(0.0f64, f64::max);
            let duration_s =
                search.travel_deg(at, position) / config.timing.spindle_speed + config.timing.settle_time + slowest;
            at = position;
            Phase { position, runs, duration_s }
        })
        .collect();
    Ok(Schedule { phases, makespan_s, start_position: start })
}
