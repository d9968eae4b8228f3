//! Device configuration documents.
//!
//! A config names a topology (chain or square grid), a base qubit spec that
//! every site starts from, optional per-site patches, a coupler capacitance
//! with optional per-edge patches, and noise amplitudes. Parsing is strict:
//! unknown fields and invariant violations are reported with the offending
//! field named.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::budget::NoiseParams;
use crate::spec::FluxQubitSpec;
use crate::{Error, Result};

/// Array layout. Sites are numbered 0..count; the grid is row-major.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Topology {
    /// `n` qubits in a line, nearest-neighbor couplers.
    Chain { n: usize },
    /// `n` x `n` qubits, nearest-neighbor couplers along rows and columns.
    Grid { n: usize },
}

impl Topology {
    pub fn site_count(&self) -> usize {
        match *self {
            Topology::Chain { n } => n,
            Topology::Grid { n } => n * n,
        }
    }

    /// Nearest-neighbor coupler edges, each ordered (low, high).
    pub fn edges(&self) -> Vec<(usize, usize)> {
        match *self {
            Topology::Chain { n } => (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect(),
            Topology::Grid { n } => {
                let mut out = Vec::new();
                for r in 0..n {
                    for c in 0..n {
                        let i = r * n + c;
                        if c + 1 < n {
                            out.push((i, i + 1));
                        }
                        if r + 1 < n {
                            out.push((i, i + n));
                        }
                    }
                }
                out
            }
        }
    }

    /// Site distance: index separation on a chain, Manhattan distance on a
    /// grid.
    pub fn distance(&self, a: usize, b: usize) -> usize {
        match *self {
            Topology::Chain { .. } => a.abs_diff(b),
            Topology::Grid { n } => {
                let (ra, ca) = (a / n, a % n);
                let (rb, cb) = (b / n, b % n);
                ra.abs_diff(rb) + ca.abs_diff(cb)
            }
        }
    }
}

/// Partial per-site override of the base qubit spec.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SitePatch {
    pub site: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ej1_ghz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cg_ff: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ve_uv: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub island_load_ff: Option<f64>,
}

impl SitePatch {
    fn apply(&self, base: &FluxQubitSpec) -> FluxQubitSpec {
        FluxQubitSpec {
            ej1_ghz: self.ej1_ghz.unwrap_or(base.ej1_ghz),
            alpha: self.alpha.unwrap_or(base.alpha),
            r: self.r.unwrap_or(base.r),
            cg_ff: self.cg_ff.unwrap_or(base.cg_ff),
            f: self.f.unwrap_or(base.f),
            ve_uv: self.ve_uv.unwrap_or(base.ve_uv),
            island_load_ff: self.island_load_ff.unwrap_or(base.island_load_ff),
        }
    }
}

/// Per-edge coupler capacitance override.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgePatch {
    pub a: usize,
    pub b: usize,
    pub cc_ff: f64,
}

/// Complete description of a device and its noise environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceConfig {
    pub topology: Topology,
    /// Base spec applied to every site.
    #[serde(default)]
    pub qubit: FluxQubitSpec,
    #[serde(default)]
    pub qubit_overrides: Vec<SitePatch>,
    /// Coupler capacitance on every topology edge.
    pub cc_ff: f64,
    #[serde(default)]
    pub coupler_overrides: Vec<EdgePatch>,
    #[serde(default)]
    pub noise: NoiseParams,
}

impl DeviceConfig {
    pub fn site_count(&self) -> usize {
        self.topology.site_count()
    }

    /// Spec of one site with any patch applied; the result is re-validated.
    pub fn spec_for_site(&self, site: usize) -> Result<FluxQubitSpec> {
        let mut spec = self.qubit.clone();
        for patch in &self.qubit_overrides {
            if patch.site == site {
                spec = patch.apply(&spec);
            }
        }
        spec.validated()
    }

    /// Coupler capacitance of one topology edge with any patch applied.
    pub fn cc_for_edge(&self, a: usize, b: usize) -> f64 {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let mut cc = self.cc_ff;
        for patch in &self.coupler_overrides {
            let (pa, pb) = if patch.a <= patch.b {
                (patch.a, patch.b)
            } else {
                (patch.b, patch.a)
            };
            if (pa, pb) == (lo, hi) {
                cc = patch.cc_ff;
            }
        }
        cc
    }

    /// Checks every declared invariant, naming the field that fails.
    pub fn validate(&self) -> Result<()> {
        let n = self.site_count();
        if n == 0 {
            return Err(Error::invariant("topology.n", "device needs at least one site"));
        }
        if !(self.cc_ff >= 0.0) || !self.cc_ff.is_finite() {
            return Err(Error::invariant(
                "cc_ff",
                format!("must be finite and non-negative, got {}", self.cc_ff),
            ));
        }
        self.qubit.clone().validated().map_err(|e| match e {
            Error::ConfigInvariant { field, message } => Error::ConfigInvariant {
                field: format!("qubit.{field}"),
                message,
            },
            other => other,
        })?;
        let mut seen_sites = BTreeSet::new();
        for (i, patch) in self.qubit_overrides.iter().enumerate() {
            if patch.site >= n {
                return Err(Error::invariant(
                    format!("qubit_overrides[{i}].site"),
                    format!("site {} outside 0..{n}", patch.site),
                ));
            }
            if !seen_sites.insert(patch.site) {
                return Err(Error::invariant(
                    format!("qubit_overrides[{i}].site"),
                    format!("site {} patched twice", patch.site),
                ));
            }
            self.spec_for_site(patch.site).map_err(|e| match e {
                Error::ConfigInvariant { field, message } => Error::ConfigInvariant {
                    field: format!("qubit_overrides[{i}].{field}"),
                    message,
                },
                other => other,
            })?;
        }
        let edges: BTreeSet<(usize, usize)> = self.topology.edges().into_iter().collect();
        let mut seen_edges = BTreeSet::new();
        for (i, patch) in self.coupler_overrides.iter().enumerate() {
            let (lo, hi) = if patch.a <= patch.b {
                (patch.a, patch.b)
            } else {
                (patch.b, patch.a)
            };
            if !edges.contains(&(lo, hi)) {
                return Err(Error::invariant(
                    format!("coupler_overrides[{i}]"),
                    format!("({}, {}) is not a topology edge", patch.a, patch.b),
                ));
            }
            if !seen_edges.insert((lo, hi)) {
                return Err(Error::invariant(
                    format!("coupler_overrides[{i}]"),
                    format!("edge ({lo}, {hi}) patched twice"),
                ));
            }
            if !(patch.cc_ff >= 0.0) || !patch.cc_ff.is_finite() {
                return Err(Error::invariant(
                    format!("coupler_overrides[{i}].cc_ff"),
                    format!("must be finite and non-negative, got {}", patch.cc_ff),
                ));
            }
        }
        self.noise.validate()?;
        Ok(())
    }
}

/// Parses and validates a JSON config document.
///
/// Parse failures carry the line and column; validation failures carry the
/// field path.
pub fn parse_device_config(json: &str) -> Result<DeviceConfig> {
    let cfg: DeviceConfig = serde_json::from_str(json).map_err(|e| Error::ConfigParse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    cfg.validate()?;
    Ok(cfg)
}
