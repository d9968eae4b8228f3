//! Gate error budgets.
//!
//! The conditional-phase gate between neighbors runs for t_cp = 1/(8 g).
//! Three error channels are budgeted: dephasing from gate-voltage noise over
//! that window, conditional-phase error from pulse-timing jitter, and
//! correlated phases picked up by qubit pairs whose interaction is not
//! refocused by the echo pattern.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::ising::{pair_coupling, PairCouplingOptions};
use crate::spectrum::QubitSolver;
use crate::{Error, FluxQubitSpec, Result};

/// Default acceptance threshold on the local (single-pair) error.
pub const LOCAL_ERROR_THRESHOLD: f64 = 1e-3;
/// Default acceptance threshold on the correlated (unrefocused-pair) error.
pub const CORRELATED_ERROR_THRESHOLD: f64 = 1e-4;

/// Noise amplitudes seen by the device.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseParams {
    /// RMS gate-voltage noise in uV.
    pub delta_v_uv: f64,
    /// RMS pulse-timing jitter in ns.
    pub delta_t_ns: f64,
}

impl Default for NoiseParams {
    fn default() -> Self {
        NoiseParams {
            delta_v_uv: 0.21,
            delta_t_ns: 0.05,
        }
    }
}

impl NoiseParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta_v_uv >= 0.0) || !self.delta_v_uv.is_finite() {
            return Err(Error::invariant(
                "noise.delta_v_uv",
                format!("must be finite and non-negative, got {}", self.delta_v_uv),
            ));
        }
        if !(self.delta_t_ns >= 0.0) || !self.delta_t_ns.is_finite() {
            return Err(Error::invariant(
                "noise.delta_t_ns",
                format!("must be finite and non-negative, got {}", self.delta_t_ns),
            ));
        }
        Ok(())
    }
}

/// Dephasing budget of one gate window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DephasingBudget {
    /// Gate time 1/(8 g) in ns.
    pub t_cp_ns: f64,
    /// Dephasing time 1/(2 pi |dE01/dVe| dV) in ns; `None` when the
    /// sensitivity or the noise vanishes and the window is unbounded.
    pub t2_ns: Option<f64>,
    /// t_cp / T2; zero when T2 is unbounded.
    pub eps_d: f64,
    /// Set when t_cp exceeds a tenth of T2 and the linear-in-time estimate
    /// stops being trustworthy.
    pub linearity_warning: bool,
}

/// Dephasing error of one gate: the fraction of a T2 window spent gating.
///
/// `slope` is dE01/dVe in GHz/uV at the operating point, `delta_v_uv` the RMS
/// voltage noise. Requires a positive coupling.
pub fn dephasing_error(g_ghz: f64, slope_ghz_per_uv: f64, delta_v_uv: f64) -> Result<DephasingBudget> {
    if !(g_ghz > 0.0) || !g_ghz.is_finite() {
        return Err(Error::domain(format!(
            "dephasing budget needs a positive coupling, got g = {g_ghz} GHz"
        )));
    }
    if !(delta_v_uv >= 0.0) {
        return Err(Error::domain(format!(
            "negative voltage noise {delta_v_uv} uV"
        )));
    }
    let t_cp_ns = 1.0 / (8.0 * g_ghz);
    let rate = 2.0 * PI * (slope_ghz_per_uv * delta_v_uv).abs();
    if rate == 0.0 {
        return Ok(DephasingBudget {
            t_cp_ns,
            t2_ns: None,
            eps_d: 0.0,
            linearity_warning: false,
        });
    }
    let t2_ns = 1.0 / rate;
    let eps_d = t_cp_ns / t2_ns;
    Ok(DephasingBudget {
        t_cp_ns,
        t2_ns: Some(t2_ns),
        eps_d,
        linearity_warning: t_cp_ns > 0.1 * t2_ns,
    })
}

/// Conditional-phase error from a timing slip of `delta_t_ns` on a gate with
/// coupling `g_ghz`: (3/8)(1 - cos(8 pi g dt)).
///
/// The error is even in the slip, so the sign of `delta_t_ns` does not
/// matter; the magnitude is what is budgeted. Small slips behave as
/// 12 pi^2 g^2 dt^2.
pub fn timing_error(g_ghz: f64, delta_t_ns: f64) -> Result<f64> {
    if !(g_ghz >= 0.0) || !g_ghz.is_finite() {
        return Err(Error::domain(format!(
            "timing budget needs a non-negative coupling, got g = {g_ghz} GHz"
        )));
    }
    if !delta_t_ns.is_finite() {
        return Err(Error::domain(format!("non-finite timing slip {delta_t_ns} ns")));
    }
    let theta = 8.0 * PI * g_ghz * delta_t_ns;
    Ok(0.375 * (1.0 - theta.cos()))
}

/// Total correlated phase error from unrefocused pairs at separation >= `p`.
///
/// Each pair at separation n accumulates a stray conditional phase of order
/// pi R^(n-1) during one gate window, contributing (pi/4) R^(n-1) infidelity;
/// `multiplicity(n)` counts how many such pairs the schedule leaves
/// unrefocused per gated pair. The sum runs over n = p ..= n_sites/2.
/// Requires 0 < r < 1 and p >= 2.
pub fn correlated_error(
    r: f64,
    p: usize,
    n_sites: usize,
    multiplicity: impl Fn(usize) -> f64,
) -> Result<f64> {
    check_ratio(r)?;
    if p < 2 {
        return Err(Error::domain(format!(
            "correlated error starts at separation p >= 2, got {p}"
        )));
    }
    let mut sum = 0.0;
    for n in p..=n_sites / 2 {
        let m = multiplicity(n);
        if !(m >= 0.0) || !m.is_finite() {
            return Err(Error::domain(format!(
                "multiplicity({n}) = {m} must be finite and non-negative"
            )));
        }
        sum += 0.25 * PI * r.powi(n as i32 - 1) * m;
    }
    Ok(sum)
}

/// Infinite tail version of the correlated sum with unit multiplicity:
/// sum over n >= p of (pi/4) R^(n-1) = (pi/4) R^(p-1) / (1 - R).
pub fn correlated_error_tail(r: f64, p: usize) -> Result<f64> {
    check_ratio(r)?;
    if p < 2 {
        return Err(Error::domain(format!(
            "correlated error starts at separation p >= 2, got {p}"
        )));
    }
    Ok(0.25 * PI * r.powi(p as i32 - 1) / (1.0 - r))
}

/// Leading correlated error left by the chain echo pattern: one pair at
/// separation 4 and two at separation 5 per step, (pi/4)(R^4 + 2 R^5).
pub fn echo_residual_chain(r: f64) -> Result<f64> {
    check_ratio(r)?;
    Ok(0.25 * PI * (r.powi(4) + 2.0 * r.powi(5)))
}

/// Leading correlated error left by the grid echo pattern: one pair at
/// separation 4 and four at separation 5, (pi/4)(R^4 + 4 R^5).
pub fn echo_residual_grid(r: f64) -> Result<f64> {
    check_ratio(r)?;
    Ok(0.25 * PI * (r.powi(4) + 4.0 * r.powi(5)))
}

fn check_ratio(r: f64) -> Result<()> {
    if !r.is_finite() || !(r > 0.0 && r < 1.0) {
        return Err(Error::DivergentSum { ratio: r });
    }
    Ok(())
}

/// One gate's error budget with every channel spelled out.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorBreakdown {
    pub t_cp_ns: f64,
    pub t2_ns: Option<f64>,
    pub eps_d: f64,
    pub eps_tim: f64,
    /// Local error, exactly eps_d + eps_tim.
    pub eps_loc: f64,
    /// Correlated error when a schedule context fixes it.
    pub eps_non: Option<f64>,
    /// Cleared when any entry escapes [0, 1] and the perturbative budget has
    /// left its regime.
    pub in_regime: bool,
}

impl ErrorBreakdown {
    pub fn assemble(dephasing: &DephasingBudget, eps_tim: f64, eps_non: Option<f64>) -> Self {
        let eps_loc = dephasing.eps_d + eps_tim;
        let entries = [
            dephasing.eps_d,
            eps_tim,
            eps_loc,
            eps_non.unwrap_or(0.0),
        ];
        let in_regime = entries.iter().all(|e| (0.0..=1.0).contains(e));
        ErrorBreakdown {
            t_cp_ns: dephasing.t_cp_ns,
            t2_ns: dephasing.t2_ns,
            eps_d: dephasing.eps_d,
            eps_tim,
            eps_loc,
            eps_non,
            in_regime,
        }
    }
}

/// One evaluated point of the local-error-vs-voltage curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalErrorPoint {
    pub ve_uv: f64,
    /// Pair coupling at this drive voltage.
    pub g_ghz: f64,
    /// Dressed qubit splitting at this drive voltage.
    pub e01_ghz: f64,
    /// dE01/dVe by Richardson-extrapolated central difference.
    pub slope_ghz_per_uv: f64,
    pub t_cp_ns: f64,
    pub t2_ns: Option<f64>,
    pub eps_d: f64,
    pub eps_tim: f64,
    pub eps_loc: f64,
}

/// A grid entry: either an evaluated point or a marked gap.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum CurveEntry {
    Point(LocalErrorPoint),
    Failed { ve_uv: f64, message: String },
}

/// Local error versus drive voltage at fixed coupler capacitance, with its
/// minimum located and judged against a threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalErrorCurve {
    pub cc_ff: f64,
    pub noise: NoiseParams,
    pub threshold: f64,
    pub entries: Vec<CurveEntry>,
    /// Point with the smallest eps_loc among the evaluated entries.
    pub minimum: Option<LocalErrorPoint>,
    /// Whether that point sits strictly inside the evaluated grid.
    pub minimum_interior: bool,
    /// Whether the minimum clears the threshold.
    pub below_threshold: bool,
    /// min eps_loc / threshold, the factor documented when the curve floor
    /// does not reach the threshold.
    pub threshold_factor: Option<f64>,
}

/// Evaluates the local error budget over a voltage grid for one pair.
///
/// Each grid point dresses the pair at that drive voltage, takes g and the
/// dressed E01, estimates dE01/dVe by central differences at +-1 uV (with a
/// half-step Richardson pass), and assembles eps_d + eps_tim under `noise`.
/// Points must lie in (0, V(ng=1/2)]: beyond the island degeneracy the
/// coupling turns over and the budget's monotone reading breaks down. A
/// point that fails to solve is kept in the table as a marked gap.
pub fn local_error_curve(
    solver: &QubitSolver,
    base: &FluxQubitSpec,
    cc_ff: f64,
    ve_grid_uv: &[f64],
    noise: &NoiseParams,
    threshold: f64,
) -> Result<LocalErrorCurve> {
    noise.validate()?;
    if ve_grid_uv.is_empty() {
        return Err(Error::domain("local error curve needs a non-empty voltage grid"));
    }
    if !(threshold > 0.0) || !threshold.is_finite() {
        return Err(Error::domain(format!(
            "local error threshold must be positive and finite, got {threshold}"
        )));
    }
    let v_half = base.voltage_for_offset_charge(0.5)?;
    for &v in ve_grid_uv {
        if !v.is_finite() || !(v > 0.0) || v > v_half + 1e-9 {
            return Err(Error::domain(format!(
                "grid voltage {v} uV outside the operating window (0, {v_half:.3}]"
            )));
        }
    }

    let opts = PairCouplingOptions::default();
    let eval = |ve: f64| -> Result<(f64, f64)> {
        let spec = base.with_voltage(ve);
        let pc = pair_coupling(solver, &spec, &spec, cc_ff, &opts)?;
        Ok((pc.g_ghz, pc.dressed_e01_ghz[0]))
    };

    let mut entries = Vec::with_capacity(ve_grid_uv.len());
    let mut minimum: Option<(usize, LocalErrorPoint)> = None;
    let mut ok_span: Option<(usize, usize)> = None;
    for (idx, &ve) in ve_grid_uv.iter().enumerate() {
        let point = (|| -> Result<LocalErrorPoint> {
            let (g, e01) = eval(ve)?;
            let h = 1.0_f64.min(ve / 2.0);
            let d_full = (eval(ve + h)?.1 - eval(ve - h)?.1) / (2.0 * h);
            let d_half = (eval(ve + h / 2.0)?.1 - eval(ve - h / 2.0)?.1) / h;
            let slope = (4.0 * d_half - d_full) / 3.0;
            let deph = dephasing_error(g.abs(), slope, noise.delta_v_uv)?;
            let eps_tim = timing_error(g.abs(), noise.delta_t_ns)?;
            Ok(LocalErrorPoint {
                ve_uv: ve,
                g_ghz: g,
                e01_ghz: e01,
                slope_ghz_per_uv: slope,
                t_cp_ns: deph.t_cp_ns,
                t2_ns: deph.t2_ns,
                eps_d: deph.eps_d,
                eps_tim,
                eps_loc: deph.eps_d + eps_tim,
            })
        })();
        match point {
            Ok(p) => {
                ok_span = Some(match ok_span {
                    None => (idx, idx),
                    Some((first, _)) => (first, idx),
                });
                if minimum.as_ref().map_or(true, |(_, m)| p.eps_loc < m.eps_loc) {
                    minimum = Some((idx, p));
                }
                entries.push(CurveEntry::Point(p));
            }
            Err(e) => entries.push(CurveEntry::Failed {
                ve_uv: ve,
                message: e.to_string(),
            }),
        }
    }

    let minimum_interior = match (&minimum, ok_span) {
        (Some((idx, _)), Some((first, last))) => *idx > first && *idx < last,
        _ => false,
    };
    let min_point = minimum.map(|(_, p)| p);
    let below_threshold = min_point.map_or(false, |p| p.eps_loc < threshold);
    Ok(LocalErrorCurve {
        cc_ff,
        noise: *noise,
        threshold,
        entries,
        minimum: min_point,
        minimum_interior,
        below_threshold,
        threshold_factor: min_point.map(|p| p.eps_loc / threshold),
    })
}
