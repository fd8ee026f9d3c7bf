//! Conversions between the mixed lab units used in the inputs (hartree, cm⁻¹,
//! eV, fs, Debye, V·m⁻¹, kelvin) and the internal atomic-unit system
//! (ħ = e = mₑ = a₀ = 1, energies in hartree, time in ħ/hartree).
//!
//! All factors are CODATA-2018 values; compositions of them are exact in the
//! sense that round trips reproduce inputs to machine precision.

use crate::error::{Error, Result};

/// cm⁻¹ per hartree.
pub const HARTREE_CM1: f64 = 219_474.631_363_2;
/// eV per hartree.
pub const HARTREE_EV: f64 = 27.211_386_245_988;
/// fs per atomic time unit (ħ/hartree).
pub const AU_TIME_FS: f64 = 2.418_884_326_585_7e-2;
/// V·m⁻¹ per atomic field unit (hartree/(e·a₀)).
pub const AU_FIELD_V_PER_M: f64 = 5.142_206_747_63e11;
/// Atomic dipole units (e·a₀) per debye.
pub const DEBYE_AU: f64 = 0.393_430_269_521_79;
/// Boltzmann constant in hartree per kelvin.
pub const KB_HARTREE_PER_K: f64 = 3.166_811_563_455_6e-6;

/// fs → atomic time units.
pub fn fs_to_au(t_fs: f64) -> f64 {
    t_fs / AU_TIME_FS
}

/// Atomic time units → fs.
pub fn au_to_fs(t_au: f64) -> f64 {
    t_au * AU_TIME_FS
}

/// cm⁻¹ → hartree.
pub fn cm1_to_hartree(w: f64) -> f64 {
    w / HARTREE_CM1
}

/// hartree → cm⁻¹.
pub fn hartree_to_cm1(e: f64) -> f64 {
    e * HARTREE_CM1
}

/// V·m⁻¹ → atomic field units.
pub fn v_per_m_to_au(e: f64) -> f64 {
    e / AU_FIELD_V_PER_M
}

/// Debye → atomic dipole units.
pub fn debye_to_au(d: f64) -> f64 {
    d * DEBYE_AU
}

/// Inverse temperature β = 1/(k_B T) in 1/hartree for T in kelvin.
pub fn beta_from_kelvin(t_kelvin: f64) -> f64 {
    1.0 / (KB_HARTREE_PER_K * t_kelvin)
}

/// Physical dimension of a [`Unit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Energy,
    Time,
    Field,
    Dipole,
}

/// Units accepted at the interfaces; `Internal*` are the atomic-unit
/// representations every computation runs in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unit {
    Hartree,
    Wavenumber,
    ElectronVolt,
    Femtosecond,
    Picosecond,
    InternalTime,
    VoltPerMeter,
    InternalField,
    Debye,
    InternalDipole,
}

impl Unit {
    pub fn dimension(self) -> Dimension {
        use Unit::*;
        match self {
            Hartree | Wavenumber | ElectronVolt => Dimension::Energy,
            Femtosecond | Picosecond | InternalTime => Dimension::Time,
            VoltPerMeter | InternalField => Dimension::Field,
            Debye | InternalDipole => Dimension::Dipole,
        }
    }

    pub fn name(self) -> &'static str {
        use Unit::*;
        match self {
            Hartree => "hartree",
            Wavenumber => "cm-1",
            ElectronVolt => "eV",
            Femtosecond => "fs",
            Picosecond => "ps",
            InternalTime => "atomic time",
            VoltPerMeter => "V/m",
            InternalField => "atomic field",
            Debye => "debye",
            InternalDipole => "atomic dipole",
        }
    }

    /// Multiplicative factor taking one of this unit into the internal unit
    /// of the same dimension.
    fn to_internal(self) -> f64 {
        use Unit::*;
        match self {
            Hartree => 1.0,
            Wavenumber => 1.0 / HARTREE_CM1,
            ElectronVolt => 1.0 / HARTREE_EV,
            Femtosecond => 1.0 / AU_TIME_FS,
            Picosecond => 1000.0 / AU_TIME_FS,
            InternalTime => 1.0,
            VoltPerMeter => 1.0 / AU_FIELD_V_PER_M,
            InternalField => 1.0,
            Debye => DEBYE_AU,
            InternalDipole => 1.0,
        }
    }
}

/// Convert `value` between two units of the same dimension.
pub fn convert(value: f64, from: Unit, to: Unit) -> Result<f64> {
    if from.dimension() != to.dimension() {
        return Err(Error::UnitMismatch { from: from.name(), to: to.name() });
    }
    Ok(value * from.to_internal() / to.to_internal())
}

/// The conversion factors bundled for callers that need to introspect them
/// (file writers annotate columns with these).
#[derive(Debug, Clone, Copy)]
pub struct UnitSystem {
    pub hartree_per_internal_energy: f64,
    pub cm1_per_internal_energy: f64,
    pub fs_per_internal_time: f64,
    pub debye_per_internal_dipole: f64,
    pub v_per_m_per_internal_field: f64,
}

impl UnitSystem {
    /// The atomic-unit system used internally everywhere.
    pub fn atomic() -> Self {
        UnitSystem {
            hartree_per_internal_energy: 1.0,
            cm1_per_internal_energy: HARTREE_CM1,
            fs_per_internal_time: AU_TIME_FS,
            debye_per_internal_dipole: 1.0 / DEBYE_AU,
            v_per_m_per_internal_field: AU_FIELD_V_PER_M,
        }
    }
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self::atomic()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn hartree_to_wavenumber_matches_codata() {
        // 0.01 hartree = 2194.7463 cm-1 to the displayed digits
        let w = convert(0.01, Unit::Hartree, Unit::Wavenumber).unwrap();
        assert_relative_eq!(w, 2194.7463, max_relative = 1e-6);
    }

    #[test]
    fn identity_conversion() {
        assert_eq!(convert(1.0, Unit::Hartree, Unit::Hartree).unwrap(), 1.0);
    }

    #[test]
    fn femtosecond_round_trip() {
        let t = convert(500.0, Unit::Femtosecond, Unit::InternalTime).unwrap();
        let back = convert(t, Unit::InternalTime, Unit::Femtosecond).unwrap();
        assert_relative_eq!(back, 500.0, max_relative = 1e-12);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        assert!(convert(1.0, Unit::Hartree, Unit::Femtosecond).is_err());
        assert!(convert(1.0, Unit::Debye, Unit::VoltPerMeter).is_err());
    }

    #[test]
    fn ev_composition_consistent() {
        // eV -> hartree -> cm-1 equals the direct eV -> cm-1 factor
        let via = convert(convert(1.0, Unit::ElectronVolt, Unit::Hartree).unwrap(), Unit::Hartree, Unit::Wavenumber)
            .unwrap();
        assert_relative_eq!(via, HARTREE_CM1 / HARTREE_EV, max_relative = 1e-14);
    }

    proptest::proptest! {
        #[test]
        fn round_trips_are_exact_to_1e12(v in 1e-6f64..1e6) {
            use Unit::*;
            for (a, b) in [
                (Hartree, Wavenumber),
                (Hartree, ElectronVolt),
                (Femtosecond, InternalTime),
                (Picosecond, Femtosecond),
                (VoltPerMeter, InternalField),
                (Debye, InternalDipole),
            ] {
                let there = convert(v, a, b).unwrap();
                let back = convert(there, b, a).unwrap();
                proptest::prop_assert!((back - v).abs() <= 1e-12 * v.abs());
            }
        }
    }
}
