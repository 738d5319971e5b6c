//! Exhaustive grid search over leg geometry, minimizing the sum of squared
//! shoulder torques from a vertical foot force applied at every point of a
//! required range of motion.

use crate::leg::{self, DesignObjectiveForce, LegGeometry, RomSpec};
use nalgebra::Vector2;
use rayon::prelude::*;
use thiserror::Error;

/// One axis of the search grid: inclusive [min, max] with positive step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisSpec {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl AxisSpec {
    pub fn new(min: f64, max: f64, step: f64) -> Self {
        Self { min, max, step }
    }

    pub fn values(&self) -> Vec<f64> {
        let n = ((self.max - self.min) / self.step + 1e-9).floor() as usize + 1;
        (0..n).map(|i| self.min + i as f64 * self.step).collect()
    }
}

/// Search space over the two link lengths plus, optionally, the fore-aft
/// position of the actuation axes relative to the nominal shoulder point.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamGrid {
    pub upper_len: AxisSpec,
    pub lower_len: AxisSpec,
    pub pivot_offset: Option<AxisSpec>,
}

impl Default for ParamGrid {
    fn default() -> Self {
        Self {
            upper_len: AxisSpec::new(0.30, 0.45, 0.005),
            lower_len: AxisSpec::new(0.25, 0.40, 0.005),
            // Coaxial drive: both axes aligned at the shoulder point.
            pivot_offset: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignObjective {
    /// Foot positions that must be reachable, in the nominal shoulder frame.
    pub rom: RomSpec,
    /// Magnitude of the vertical load held at each RoM point [N].
    pub vertical_force: f64,
    /// Cost added for every RoM point a candidate cannot reach [N^2 m^2].
    pub infeasibility_penalty: f64,
    /// Candidates below this feasible fraction are excluded from the argmin.
    pub feasibility_floor: f64,
}

impl Default for DesignObjective {
    fn default() -> Self {
        Self {
            rom: RomSpec::new((-0.20, 0.20), (-0.70, -0.45), 0.025),
            // Worst-case two-leg support of robot plus maximum payload:
            // (85 kg + 70 kg) * g / 2.
            vertical_force: (85.0 + 70.0) * 9.81 / 2.0,
            infeasibility_penalty: 1e6,
            feasibility_floor: 1.0,
        }
    }
}

/// One point of the search grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignCandidate {
    pub upper_len: f64,
    pub lower_len: f64,
    pub pivot_offset: f64,
}

impl DesignCandidate {
    /// Candidate geometry under the default limit policy.
    pub fn geometry(&self) -> LegGeometry {
        let mut geom = LegGeometry::with_lengths(self.upper_len, self.lower_len);
        geom.shoulder_offset = Vector2::new(self.pivot_offset, 0.0);
        geom
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateCost {
    pub candidate: DesignCandidate,
    pub cost: f64,
    pub feasible_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignResult {
    pub best: DesignCandidate,
    pub best_geometry: LegGeometry,
    pub best_cost: f64,
    pub best_feasible_fraction: f64,
    /// Every evaluated candidate, in grid enumeration order
    /// (upper, then lower, then pivot offset).
    pub cost_table: Vec<CandidateCost>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DesignError {
    #[error("search grid is empty")]
    EmptyGrid,
    #[error("objective RoM grid is empty")]
    EmptyRom,
    #[error(
        "no candidate reaches the feasibility floor {floor:.2}; best fraction was {best_fraction:.3}"
    )]
    NoFeasibleCandidate { floor: f64, best_fraction: f64 },
}

/// Sum of squared holding torques over the RoM for a chain rooted at the
/// origin; see [`torque_cost_offset`] for displaced actuation axes.
pub fn torque_cost(geom: &LegGeometry, objective: &DesignObjective) -> (f64, f64) {
    torque_cost_offset(geom, 0.0, objective)
}

/// Like [`torque_cost`], with the chain origin displaced `pivot_offset`
/// meters forward of the frame the RoM is expressed in.
pub fn torque_cost_offset(
    geom: &LegGeometry,
    pivot_offset: f64,
    objective: &DesignObjective,
) -> (f64, f64) {
    let points = objective.rom.grid_points();
    let force = DesignObjectiveForce::vertical(-objective.vertical_force);
    let mut cost = 0.0;
    let mut feasible = 0usize;
    for p in &points {
        let target = Vector2::new(p.x - pivot_offset, p.y);
        match leg::inverse_kinematics(geom, target) {
            Ok(joints) => {
                let (t1, t2) = leg::static_torques(geom, &joints, &force)
                    .expect("IK solution is always within limits");
                cost += t1 * t1 + t2 * t2;
                feasible += 1;
            }
            Err(_) => cost += objective.infeasibility_penalty,
        }
    }
    (cost, feasible as f64 / points.len() as f64)
}

/// Exhaustively evaluate every grid candidate and return the feasible
/// candidate with minimal cost. Ties break to the lexicographically smallest
/// (upper, lower, pivot) tuple; the parallel evaluation cannot affect the
/// outcome because the reduction scans the table in enumeration order.
pub fn grid_search(grid: &ParamGrid, objective: &DesignObjective) -> Result<DesignResult, DesignError> {
    objective.rom.validate().map_err(|_| DesignError::EmptyRom)?;
    if objective.rom.grid_points().is_empty() {
        return Err(DesignError::EmptyRom);
    }

    let uppers = grid.upper_len.values();
    let lowers = grid.lower_len.values();
    let pivots = grid
        .pivot_offset
        .as_ref()
        .map(|axis| axis.values())
        .unwrap_or_else(|| vec![0.0]);
    let mut candidates = Vec::with_capacity(uppers.len() * lowers.len() * pivots.len());
    for &u in &uppers {
        for &l in &lowers {
            for &d in &pivots {
                candidates.push(DesignCandidate {
                    upper_len: u,
                    lower_len: l,
                    pivot_offset: d,
                });
            }
        }
    }
    if candidates.is_empty() {
        return Err(DesignError::EmptyGrid);
    }

    let cost_table: Vec<CandidateCost> = candidates
        .par_iter()
        .map(|cand| {
            let geom = cand.geometry();
            let (cost, feasible_fraction) = torque_cost_offset(&geom, cand.pivot_offset, objective);
            CandidateCost {
                candidate: *cand,
                cost,
                feasible_fraction,
            }
        })
        .collect();

    let mut best: Option<&CandidateCost> = None;
    let mut best_fraction_seen: f64 = 0.0;
    for entry in &cost_table {
        best_fraction_seen = best_fraction_seen.max(entry.feasible_fraction);
        if entry.feasible_fraction + 1e-12 < objective.feasibility_floor {
            continue;
        }
        if best.map_or(true, |b| entry.cost < b.cost) {
            best = Some(entry);
        }
    }
    let best = best.ok_or(DesignError::NoFeasibleCandidate {
        floor: objective.feasibility_floor,
        best_fraction: best_fraction_seen,
    })?;

    Ok(DesignResult {
        best: best.candidate,
        best_geometry: best.candidate.geometry(),
        best_cost: best.cost,
        best_feasible_fraction: best.feasible_fraction,
        cost_table,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::leg::JointState;
    use approx::assert_relative_eq;

    fn single_point_objective(p: (f64, f64)) -> DesignObjective {
        DesignObjective {
            rom: RomSpec::new((p.0, p.0), (p.1, p.1), 0.01),
            ..DesignObjective::default()
        }
    }

    #[test]
    fn near_extension_point_costs_almost_nothing() {
        // Pointing the leg straight down along the load leaves only the
        // residual torque from the boundary margin.
        let geom = LegGeometry::with_lengths(0.35, 0.35);
        let deep = single_point_objective((0.0, -(0.698 - 1e-4)));
        let shallow = single_point_objective((0.0, -0.45));
        let (cost_deep, frac_deep) = torque_cost(&geom, &deep);
        let (cost_shallow, frac_shallow) = torque_cost(&geom, &shallow);
        assert_eq!(frac_deep, 1.0);
        assert_eq!(frac_shallow, 1.0);
        assert!(cost_deep < 0.02 * cost_shallow, "{cost_deep} vs {cost_shallow}");
    }

    #[test]
    fn cost_scales_quadratically_with_force() {
        let geom = LegGeometry::default();
        let objective = DesignObjective::default();
        let doubled = DesignObjective {
            vertical_force: 2.0 * objective.vertical_force,
            ..objective.clone()
        };
        let (c1, f1) = torque_cost(&geom, &objective);
        let (c2, f2) = torque_cost(&geom, &doubled);
        assert_eq!(f1, 1.0);
        assert_eq!(f2, 1.0);
        assert_relative_eq!(c2, 4.0 * c1, max_relative = 1e-12);
    }

    #[test]
    fn three_point_rom_matches_per_point_torques() {
        let geom = LegGeometry::default();
        let objective = DesignObjective {
            rom: RomSpec::new((-0.1, 0.1), (-0.6, -0.6), 0.1),
            ..DesignObjective::default()
        };
        let force = DesignObjectiveForce::vertical(-objective.vertical_force);
        let mut expect = 0.0;
        for x in [-0.1, 0.0, 0.1] {
            let joints = leg::inverse_kinematics(&geom, Vector2::new(x, -0.6)).unwrap();
            let (t1, t2) = leg::static_torques(&geom, &joints, &force).unwrap();
            expect += t1 * t1 + t2 * t2;
        }
        let (cost, fraction) = torque_cost(&geom, &objective);
        assert_eq!(fraction, 1.0);
        assert_relative_eq!(cost, expect, max_relative = 1e-12);
    }

    #[test]
    fn default_geometry_covers_default_rom() {
        let (_, fraction) = torque_cost(&LegGeometry::default(), &DesignObjective::default());
        assert_eq!(fraction, 1.0);
    }

    #[test]
    fn single_candidate_grid_returns_it() {
        let grid = ParamGrid {
            upper_len: AxisSpec::new(0.40, 0.40, 0.01),
            lower_len: AxisSpec::new(0.35, 0.35, 0.01),
            pivot_offset: None,
        };
        let result = grid_search(&grid, &DesignObjective::default()).unwrap();
        assert_eq!(result.cost_table.len(), 1);
        assert_eq!(result.best.upper_len, 0.40);
        assert_eq!(result.best.lower_len, 0.35);
    }

    fn small_grid() -> ParamGrid {
        ParamGrid {
            upper_len: AxisSpec::new(0.36, 0.44, 0.02),
            lower_len: AxisSpec::new(0.31, 0.39, 0.02),
            pivot_offset: None,
        }
    }

    #[test]
    fn result_matches_exhaustive_rescan() {
        let objective = DesignObjective::default();
        let result = grid_search(&small_grid(), &objective).unwrap();
        assert_eq!(result.cost_table.len(), 25);
        let rescan = result
            .cost_table
            .iter()
            .filter(|e| e.feasible_fraction >= objective.feasibility_floor)
            .min_by(|a, b| a.cost.partial_cmp(&b.cost).unwrap())
            .unwrap();
        assert_eq!(rescan.cost.to_bits(), result.best_cost.to_bits());
        assert_eq!(rescan.candidate, result.best);
        for entry in &result.cost_table {
            if entry.feasible_fraction >= objective.feasibility_floor {
                assert!(result.best_cost <= entry.cost);
            }
        }
    }

    #[test]
    fn shrinking_rom_never_increases_best_cost() {
        let wide = DesignObjective::default();
        let narrow = DesignObjective {
            rom: RomSpec::new((-0.20, 0.125), (-0.70, -0.50), 0.025),
            ..wide.clone()
        };
        let best_wide = grid_search(&small_grid(), &wide).unwrap().best_cost;
        let best_narrow = grid_search(&small_grid(), &narrow).unwrap().best_cost;
        assert!(best_narrow <= best_wide);
    }

    #[test]
    fn impossible_rom_reports_no_feasible_design() {
        let objective = DesignObjective {
            rom: RomSpec::new((-0.1, 0.1), (-2.0, -1.9), 0.05),
            ..DesignObjective::default()
        };
        let err = grid_search(&small_grid(), &objective).unwrap_err();
        assert!(matches!(err, DesignError::NoFeasibleCandidate { .. }));
    }

    #[test]
    fn parallel_evaluation_is_order_stable() {
        let objective = DesignObjective::default();
        let run = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| grid_search(&small_grid(), &objective).unwrap())
        };
        let serial = run(1);
        let parallel = run(4);
        assert_eq!(serial.best, parallel.best);
        assert_eq!(serial.best_cost.to_bits(), parallel.best_cost.to_bits());
        assert_eq!(serial.cost_table.len(), parallel.cost_table.len());
        for (a, b) in serial.cost_table.iter().zip(&parallel.cost_table) {
            assert_eq!(a.cost.to_bits(), b.cost.to_bits());
        }
    }

    #[test]
    fn winner_has_lower_torque_inside_ellipse_than_over_rom() {
        // The low-torque region sits deep in the RoM where the links are
        // close to vertical; an ellipse there must beat the RoM average.
        let objective = DesignObjective::default();
        let result = grid_search(&small_grid(), &objective).unwrap();
        let geom = &result.best_geometry;
        let force = DesignObjectiveForce::vertical(-objective.vertical_force);
        let ellipse = |p: &Vector2<f64>| {
            let dx = (p.x - 0.0) / 0.10;
            let dz = (p.y - -0.62) / 0.08;
            dx * dx + dz * dz <= 1.0
        };
        let mut inside = (0.0, 0usize);
        let mut all = (0.0, 0usize);
        for p in objective.rom.grid_points() {
            if let Ok(joints) = leg::inverse_kinematics(geom, p) {
                let (t1, t2) = leg::static_torques(geom, &joints, &force).unwrap();
                let sq = t1 * t1 + t2 * t2;
                all = (all.0 + sq, all.1 + 1);
                if ellipse(&p) {
                    inside = (inside.0 + sq, inside.1 + 1);
                }
            }
        }
        assert!(inside.1 > 0, "ellipse must contain RoM grid points");
        let mean_inside = inside.0 / inside.1 as f64;
        let mean_all = all.0 / all.1 as f64;
        assert!(mean_inside < mean_all, "{mean_inside} !< {mean_all}");
    }

    #[test]
    fn full_extension_tie_has_zero_cost_contribution() {
        // A one-point RoM exactly on the outer boundary hits the singular
        // tie: force is carried along the links, torque-free.
        let geom = LegGeometry::with_lengths(0.35, 0.35);
        let objective = single_point_objective((0.0, -0.70));
        let (cost, fraction) = torque_cost(&geom, &objective);
        assert_eq!(fraction, 1.0);
        assert!(cost.abs() < 1e-18, "cost {cost}");
    }

    #[test]
    fn joint_state_has_zero_rates_by_default() {
        let j = JointState::new(-1.0, -2.0);
        assert_eq!((j.dq1, j.dq2), (0.0, 0.0));
    }
}
