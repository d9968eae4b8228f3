//! Gate schedules for chain and grid cluster-state generation.
//!
//! A schedule is a sequence of steps. Each step powers a set of sites (the
//! gate voltage is applied there), runs for one conditional-phase window,
//! and fires instantaneous pi pulses partway through. Powered neighbors
//! accumulate the conditional phase; a pulse on exactly one member of a pair
//! inverts the remaining accumulation and refocuses that pair to zero.
//!
//! The chain pattern covers all nearest-neighbor edges in `pair_spacing`
//! steps: step k gates the pairs (m, m+1) with m = k mod spacing. Within a
//! step the gate blocks alternate between pulsed and unpulsed, which echoes
//! away every inter-block coupling except those joining blocks of equal
//! parity (separation >= 5 at the default spacing).
//!
//! The grid pattern runs the chain pattern along selected rows, then
//! selected columns: rows 0 mod 4 first, rows 2 mod 4 second, then the same
//! for columns. Consecutive selected lines flip which block parity is
//! pulsed, so couplings between sites four lines apart always straddle one
//! pulsed and one unpulsed site and cancel. Rows and columns outside both
//! residue classes are never gated; sites with neither their row nor their
//! column selected are reported in `uncovered_sites`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::config::Topology;
use crate::{Error, Result};

fn err(msg: impl Into<String>) -> Error {
    Error::schedule(msg)
}

/// Instantaneous pi pulses (exact X flips) fired `at_ns` after step start.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseEvent {
    pub at_ns: f64,
    pub sites: Vec<usize>,
}

/// One powered window of the schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleStep {
    pub duration_ns: f64,
    /// Sites with gate voltage applied during this step, sorted.
    pub powered: Vec<usize>,
    /// Pulse events in time order.
    pub pulses: Vec<PulseEvent>,
    /// Sites reset to |+> at the start of this step (first use only).
    pub init: Vec<usize>,
    /// Nearest-neighbor pairs this step is meant to gate, each (low, high).
    pub target_pairs: Vec<(usize, usize)>,
}

/// A full generation schedule over a chain or grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub topology: Topology,
    /// Spacing between simultaneously gated pairs along a line.
    pub pair_spacing: usize,
    /// Gate voltage applied to powered sites, recorded for reports.
    pub drive_ve_uv: f64,
    pub steps: Vec<ScheduleStep>,
    /// Sites no step ever powers; empty for chains.
    pub uncovered_sites: Vec<usize>,
}

/// Knobs shared by the schedule builders.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleParams {
    /// Conditional-phase window 1/(8 g) in ns; every step runs this long.
    pub t_cp_ns: f64,
    /// Spacing between simultaneously gated pairs; 3 keeps the closest
    /// surviving same-parity coupling five sites out.
    pub pair_spacing: usize,
    /// Gate voltage for powered sites, recorded on the schedule.
    pub drive_ve_uv: f64,
}

impl ScheduleParams {
    pub fn new(t_cp_ns: f64) -> Self {
        ScheduleParams {
            t_cp_ns,
            pair_spacing: 3,
            drive_ve_uv: 0.0,
        }
    }

    pub fn with_drive(mut self, ve_uv: f64) -> Self {
        self.drive_ve_uv = ve_uv;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.t_cp_ns > 0.0) || !self.t_cp_ns.is_finite() {
            return Err(err(format!(
                "step duration must be positive and finite, got {} ns",
                self.t_cp_ns
            )));
        }
        if self.pair_spacing < 2 {
            return Err(err(format!(
                "pair spacing must be at least 2, got {}",
                self.pair_spacing
            )));
        }
        if !self.drive_ve_uv.is_finite() {
            return Err(err("drive voltage must be finite"));
        }
        Ok(())
    }
}

/// A line of sites to run the chain pattern on: `start + k*stride` for
/// `k < len`. `parity` selects which gate blocks get pulsed.
struct Line {
    start: usize,
    stride: usize,
    len: usize,
    parity: usize,
}

impl Line {
    fn site(&self, pos: usize) -> usize {
        self.start + pos * self.stride
    }
}

/// Appends the `spacing` steps of the chain pattern over `lines` to `steps`.
///
/// Step k gates pairs at positions (m, m+1), m = k mod spacing, on every
/// line simultaneously. Within a line the gate blocks are numbered in
/// order; blocks whose index matches the line's parity (mod 2) are pulsed
/// on both members at mid-step.
fn extend_with_line_phase(
    steps: &mut Vec<ScheduleStep>,
    touched: &mut Vec<bool>,
    lines: &[Line],
    params: &ScheduleParams,
) {
    let spacing = params.pair_spacing;
    for k in 0..spacing {
        let mut powered = Vec::new();
        let mut pulsed = Vec::new();
        let mut target_pairs = Vec::new();
        for line in lines {
            if line.len < 2 {
                continue;
            }
            let mut block = 0usize;
            let mut m = k;
            while m + 1 < line.len {
                let (a, b) = (line.site(m), line.site(m + 1));
                powered.extend([a, b]);
                target_pairs.push((a.min(b), a.max(b)));
                if block % 2 == line.parity % 2 {
                    pulsed.extend([a, b]);
                }
                block += 1;
                m += spacing;
            }
        }
        powered.sort_unstable();
        pulsed.sort_unstable();
        target_pairs.sort_unstable();
        let init: Vec<usize> = powered
            .iter()
            .copied()
            .filter(|&s| !touched[s])
            .collect();
        for &s in &init {
            touched[s] = true;
        }
        let pulses = if pulsed.is_empty() {
            Vec::new()
        } else {
            vec![PulseEvent {
                at_ns: params.t_cp_ns / 2.0,
                sites: pulsed,
            }]
        };
        steps.push(ScheduleStep {
            duration_ns: params.t_cp_ns,
            powered,
            pulses,
            init,
            target_pairs,
        });
    }
}

/// Builds the chain schedule: `pair_spacing` steps covering every
/// nearest-neighbor edge of an `n`-site chain exactly once.
///
/// Odd-indexed gate blocks are pulsed, so within a step the surviving
/// couplings join equal-parity blocks; at the default spacing the closest
/// such pair sits five sites apart.
pub fn build_1d_schedule(n: usize, params: &ScheduleParams) -> Result<Schedule> {
    params.validate()?;
    if n < 2 {
        return Err(err(format!("chain schedule needs at least 2 sites, got {n}")));
    }
    let mut steps = Vec::new();
    let mut touched = vec![false; n];
    let lines = [Line {
        start: 0,
        stride: 1,
        len: n,
        parity: 1,
    }];
    extend_with_line_phase(&mut steps, &mut touched, &lines, params);
    Ok(Schedule {
        topology: Topology::Chain { n },
        pair_spacing: params.pair_spacing,
        drive_ve_uv: params.drive_ve_uv,
        steps,
        uncovered_sites: Vec::new(),
    })
}

/// Builds the grid schedule: four line groups (rows 0 mod 4, rows 2 mod 4,
/// columns 0 mod 4, columns 2 mod 4), each running the chain pattern, for
/// `4 * pair_spacing` steps total.
///
/// The first-group row count is floor(n/4) and the second-group count
/// floor((n+1)/4); consecutive lines within a group alternate pulsed-block
/// parity so that couplings between sites four lines apart are refocused.
/// The target graph is the union of the gated pairs. Sites whose row and
/// column are both unselected are never powered and are listed in
/// `uncovered_sites`.
pub fn build_2d_schedule(n: usize, params: &ScheduleParams) -> Result<Schedule> {
    params.validate()?;
    if n < 4 {
        return Err(err(format!("grid schedule needs at least 4x4 sites, got {n}x{n}")));
    }
    let group_a: Vec<usize> = (0..n / 4).map(|m| 4 * m).collect();
    let group_b: Vec<usize> = (0..(n + 1) / 4).map(|p| 4 * p + 2).collect();

    let mut steps = Vec::new();
    let mut touched = vec![false; n * n];
    for (vertical, group) in [
        (false, &group_a),
        (false, &group_b),
        (true, &group_a),
        (true, &group_b),
    ] {
        let lines: Vec<Line> = group
            .iter()
            .enumerate()
            .map(|(i, &fixed)| Line {
                // Rows gate along columns and vice versa; row-major sites.
                start: if vertical { fixed } else { fixed * n },
                stride: if vertical { n } else { 1 },
                len: n,
                parity: i % 2,
            })
            .collect();
        extend_with_line_phase(&mut steps, &mut touched, &lines, params);
    }

    let covered: BTreeSet<usize> = group_a.iter().chain(group_b.iter()).copied().collect();
    let uncovered_sites = (0..n * n)
        .filter(|s| !covered.contains(&(s / n)) && !covered.contains(&(s % n)))
        .collect();
    Ok(Schedule {
        topology: Topology::Grid { n },
        pair_spacing: params.pair_spacing,
        drive_ve_uv: params.drive_ve_uv,
        steps,
        uncovered_sites,
    })
}

/// The three-site refocusing demonstration: all sites powered for one
/// window, pulses on sites 0 and 1 at mid-step. The (0,1) gate completes
/// while the pulses cancel the (1,2) and (0,2) couplings exactly.
pub fn echo_demo_schedule(t_cp_ns: f64) -> Result<Schedule> {
    let params = ScheduleParams::new(t_cp_ns);
    params.validate()?;
    Ok(Schedule {
        topology: Topology::Chain { n: 3 },
        pair_spacing: params.pair_spacing,
        drive_ve_uv: params.drive_ve_uv,
        steps: vec![ScheduleStep {
            duration_ns: t_cp_ns,
            powered: vec![0, 1, 2],
            pulses: vec![PulseEvent {
                at_ns: t_cp_ns / 2.0,
                sites: vec![0, 1],
            }],
            init: vec![0, 1, 2],
            target_pairs: vec![(0, 1)],
        }],
        uncovered_sites: Vec::new(),
    })
}

impl Schedule {
    pub fn site_count(&self) -> usize {
        self.topology.site_count()
    }

    /// Union of the per-step gated pairs, sorted.
    pub fn target_edges(&self) -> Vec<(usize, usize)> {
        let set: BTreeSet<(usize, usize)> = self
            .steps
            .iter()
            .flat_map(|s| s.target_pairs.iter().copied())
            .collect();
        set.into_iter().collect()
    }

    /// Gated pairs per step.
    pub fn per_step_gate_counts(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.target_pairs.len()).collect()
    }

    /// Checks the structural invariants.
    ///
    /// Powered and pulse site lists must be sorted, unique, and in range;
    /// pulse times must lie inside the step; target pairs must be powered
    /// nearest neighbors and partition across steps (no pair gated twice);
    /// initializations must cover every powered site exactly once before or
    /// at its first powered step; uncovered sites must never be powered.
    pub fn validate(&self) -> Result<()> {
        let n = self.site_count();
        if self.steps.is_empty() {
            return Err(err("schedule has no steps"));
        }
        let mut seen_pairs = BTreeSet::new();
        let mut inited = vec![false; n];
        let mut powered_ever = vec![false; n];
        for (si, step) in self.steps.iter().enumerate() {
            if !(step.duration_ns > 0.0) || !step.duration_ns.is_finite() {
                return Err(err(format!(
                    "step {si}: duration {} ns must be positive and finite",
                    step.duration_ns
                )));
            }
            for list in [&step.powered, &step.init] {
                if list.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(err(format!("step {si}: site list not sorted unique")));
                }
                if list.iter().any(|&s| s >= n) {
                    return Err(err(format!("step {si}: site index out of range")));
                }
            }
            let powered: BTreeSet<usize> = step.powered.iter().copied().collect();
            let mut last_at = 0.0_f64;
            for pulse in &step.pulses {
                if !(pulse.at_ns >= 0.0) || pulse.at_ns > step.duration_ns {
                    return Err(err(format!(
                        "step {si}: pulse at {} ns outside [0, {}]",
                        pulse.at_ns, step.duration_ns
                    )));
                }
                if pulse.at_ns < last_at {
                    return Err(err(format!("step {si}: pulses out of time order")));
                }
                last_at = pulse.at_ns;
                if pulse.sites.windows(2).any(|w| w[0] >= w[1])
                    || pulse.sites.iter().any(|&s| s >= n)
                {
                    return Err(err(format!("step {si}: bad pulse site list")));
                }
            }
            for &(a, b) in &step.target_pairs {
                if a >= b || b >= n {
                    return Err(err(format!("step {si}: malformed pair ({a}, {b})")));
                }
                if self.topology.distance(a, b) != 1 {
                    return Err(err(format!(
                        "step {si}: pair ({a}, {b}) is not nearest-neighbor"
                    )));
                }
                if !powered.contains(&a) || !powered.contains(&b) {
                    return Err(err(format!(
                        "step {si}: pair ({a}, {b}) has an unpowered member"
                    )));
                }
                if !seen_pairs.insert((a, b)) {
                    return Err(err(format!(
                        "pair ({a}, {b}) gated twice across the schedule"
                    )));
                }
            }
            for &s in &step.init {
                if inited[s] {
                    return Err(err(format!("site {s} initialized twice")));
                }
                if powered_ever[s] {
                    return Err(err(format!(
                        "site {s} initialized after it was already powered"
                    )));
                }
                inited[s] = true;
            }
            for &s in &step.powered {
                if !inited[s] {
                    return Err(err(format!(
                        "step {si}: site {s} powered before initialization"
                    )));
                }
                powered_ever[s] = true;
            }
        }
        for &s in &self.uncovered_sites {
            if s >= n || powered_ever[s] {
                return Err(err(format!("uncovered site {s} is powered or out of range")));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schedule serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let schedule: Schedule = serde_json::from_str(text)
            .map_err(|e| Error::Schedule(format!("schedule parse: {e}")))?;
        schedule.validate()?;
        Ok(schedule)
    }
}
