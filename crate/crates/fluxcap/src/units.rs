//! Physical constants and unit conversions.
//!
//! All energies in this crate are frequencies in GHz (that is, E/h), time is
//! in ns, capacitance in fF, voltage in uV, and external flux is a
//! dimensionless fraction of the flux quantum. Under these conventions the
//! phase accumulated by an energy `E` over a time `t` is `2*pi*E*t` radians,
//! and GHz * ns products are dimensionless.

use std::f64::consts::TAU;

/// Elementary charge in coulombs (exact by definition).
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;

/// Planck constant in joule seconds (exact by definition).
pub const PLANCK_CONSTANT: f64 = 6.626_070_15e-34;

/// Record of the unit conventions, for embedding in reports and manifests.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct UnitConventions {
    pub energy: &'static str,
    pub time: &'static str,
    pub capacitance: &'static str,
    pub voltage: &'static str,
    pub flux: &'static str,
}

impl Default for UnitConventions {
    fn default() -> Self {
        UnitConventions {
            energy: "GHz",
            time: "ns",
            capacitance: "fF",
            voltage: "uV",
            flux: "Phi0",
        }
    }
}

/// Charging energy e^2/(2C) in GHz for a capacitance in fF.
///
/// Returns an error for non-positive capacitance; the scale e^2/(2h) works
/// out to about 19.37 GHz*fF, so 7.75 fF sits near 2.5 GHz.
pub fn charging_energy(c_ff: f64) -> crate::Result<f64> {
    if !(c_ff > 0.0) || !c_ff.is_finite() {
        return Err(crate::Error::domain(format!(
            "charging energy needs a positive finite capacitance, got {c_ff} fF"
        )));
    }
    Ok(charging_energy_scale() / c_ff)
}

/// Capacitance in fF that produces a given charging energy in GHz.
pub fn capacitance_for_charging_energy(ec_ghz: f64) -> crate::Result<f64> {
    if !(ec_ghz > 0.0) || !ec_ghz.is_finite() {
        return Err(crate::Error::domain(format!(
            "capacitance needs a positive finite charging energy, got {ec_ghz} GHz"
        )));
    }
    Ok(charging_energy_scale() / ec_ghz)
}

/// e^2/(2h) expressed in GHz*fF. Dividing by a capacitance in fF gives the
/// charging energy in GHz.
pub fn charging_energy_scale() -> f64 {
    // e^2/(2h) has units C^2/J/s = F*Hz; multiply by 1e-9 (Hz -> GHz) and
    // 1e15 (F -> 1/fF when dividing) to land on GHz*fF.
    ELEMENTARY_CHARGE * ELEMENTARY_CHARGE / (2.0 * PLANCK_CONSTANT) * 1e-9 * 1e15
}

/// Offset charge n_g = C*V/(2e) in Cooper-pair units for a gate capacitance
/// in fF and a voltage in uV.
pub fn offset_charge(c_ff: f64, v_uv: f64) -> f64 {
    c_ff * 1e-15 * v_uv * 1e-6 / (2.0 * ELEMENTARY_CHARGE)
}

/// Gate voltage in uV that places a given offset charge on an island with
/// gate capacitance `c_ff`. Inverse of [`offset_charge`] in the voltage
/// argument.
pub fn voltage_for_offset_charge(c_ff: f64, n_g: f64) -> crate::Result<f64> {
    if !(c_ff > 0.0) || !c_ff.is_finite() {
        return Err(crate::Error::domain(format!(
            "offset-charge inversion needs a positive finite gate capacitance, got {c_ff} fF"
        )));
    }
    Ok(n_g * 2.0 * ELEMENTARY_CHARGE / (c_ff * 1e-15) * 1e6)
}

/// Phase in radians accumulated by an energy in GHz over a time in ns.
pub fn phase(e_ghz: f64, t_ns: f64) -> f64 {
    TAU * e_ghz * t_ns
}

/// GHz to joules.
pub fn ghz_to_joules(e_ghz: f64) -> f64 {
    e_ghz * 1e9 * PLANCK_CONSTANT
}

/// Joules to GHz.
pub fn joules_to_ghz(e_j: f64) -> f64 {
    e_j / (1e9 * PLANCK_CONSTANT)
}
