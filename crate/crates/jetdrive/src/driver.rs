//! Bit-accurate model of the digital driver data path.
//!
//! Serial firing data arrives on DATA and is clocked into a shift register
//! by BIT SHFT edges. A rising ENABLE edge copies the register into the
//! latch bank, whose outputs gate the selection lines while the next word
//! shifts in behind them. CLEAR zeroes both banks. The latched logic
//! levels pass through a level shifter into the heater drive window, with
//! an optional 8-bit DAC for gray-scale amplitude control.
//!
//! Conventions the rest of the crate relies on:
//!
//! * DATA enters at the head (index 0) and moves toward higher indices,
//!   so registering a word for S lines 1..=k means shifting the bit for
//!   the highest S line first.
//! * ENABLE is a level; the latch transfers on its rising edge only.
//! * CLEAR wins over every other input on the same tick.
//! * When a shift and a latch land on one tick, the shift happens first.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::topology::Coord;

/// Electrical operating points of the driver and heater array.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ElectricalParams {
    /// Logic input level at or above which a signal reads as high, volts.
    pub logic_high_threshold: f64,
    /// Lower edge of the heater drive window, volts.
    pub drive_low: f64,
    /// Upper edge of the heater drive window, volts.
    pub drive_high: f64,
    /// Drive voltage used when no DAC code is supplied, volts.
    pub nominal_drive: f64,
    /// Pass-gate breakdown voltage; reaching it is a hard fault, volts.
    pub breakdown: f64,
    /// Gate voltage above which the pass gate conducts, volts.
    pub gate_threshold: f64,
    /// Heater resistance, ohms.
    pub heater_resistance: f64,
}

impl Default for ElectricalParams {
    fn default() -> Self {
        ElectricalParams {
            logic_high_threshold: 3.5,
            drive_low: 7.5,
            drive_high: 8.5,
            nominal_drive: 8.0,
            breakdown: 9.0,
            gate_threshold: 1.0,
            heater_resistance: 40.0,
        }
    }
}

impl ElectricalParams {
    /// Checks the structural invariants. The nominal drive is deliberately
    /// not checked here: an out-of-window nominal is reported by
    /// [`level_shift`] when it would actually drive a heater, so that a
    /// breakdown-level setting surfaces as the electrical fault it is.
    pub fn validate(&self) -> Result<()> {
        if !(self.heater_resistance > 0.0) {
            return Err(Error::Config(format!(
                "heater_resistance must be positive, got {}",
                self.heater_resistance
            )));
        }
        if !(self.drive_low <= self.drive_high) {
            return Err(Error::Config(format!(
                "drive window [{}, {}] is inverted",
                self.drive_low, self.drive_high
            )));
        }
        if !(self.drive_high < self.breakdown) {
            return Err(Error::Config(format!(
                "drive window must lie strictly below the {} V breakdown, got upper edge {}",
                self.breakdown, self.drive_high
            )));
        }
        if !(self.gate_threshold > 0.0 && self.gate_threshold < self.logic_high_threshold) {
            return Err(Error::Config(format!(
                "gate threshold {} V must sit in (0, {}) V",
                self.gate_threshold, self.logic_high_threshold
            )));
        }
        Ok(())
    }

    /// Linear 8-bit DAC law over the drive window: code 0 maps to the
    /// lower edge, 255 to the upper edge.
    pub fn dac_voltage(&self, code: u8) -> f64 {
        self.drive_low + (code as f64 / 255.0) * (self.drive_high - self.drive_low)
    }
}

/// Translates a latched logic level into a heater drive voltage.
///
/// Below the logic-high threshold the output stage stays off (0 V). A DAC
/// code selects an amplitude inside the drive window; otherwise the
/// configured nominal is used, which must itself be inside the window.
/// A nominal at or past breakdown is reported as the electrical fault
/// rather than a plain configuration error.
pub fn level_shift(logic_v: f64, params: &ElectricalParams, dac_code: Option<u8>) -> Result<f64> {
    if logic_v < params.logic_high_threshold {
        return Ok(0.0);
    }
    match dac_code {
        Some(code) => Ok(params.dac_voltage(code)),
        None => {
            let v = params.nominal_drive;
            if v >= params.breakdown {
                Err(Error::Breakdown {
                    drive: v,
                    breakdown: params.breakdown,
                })
            } else if v < params.drive_low || v > params.drive_high {
                Err(Error::NominalOutsideWindow {
                    nominal: v,
                    lo: params.drive_low,
                    hi: params.drive_high,
                })
            } else {
                Ok(v)
            }
        }
    }
}

/// Whether a cell fires given its selection lines. 3D needs all of P, A,
/// and the latched S; 2D needs P and A; 1D is direct drive on P.
pub fn fire_condition(dims: usize, p_active: bool, a_active: bool, s_latched: bool) -> bool {
    match dims {
        1 => p_active,
        2 => p_active && a_active,
        _ => p_active && a_active && s_latched,
    }
}

/// Static electrical health of one drive point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ElectricalCheck {
    pub conducts: bool,
    pub in_window: bool,
    pub breakdown_violation: bool,
}

/// Evaluates gate conduction, window compliance (0 V counts as off, not a
/// violation), and breakdown for one drive/gate voltage pair.
pub fn electrical_check(drive_v: f64, gate_v: f64, params: &ElectricalParams) -> ElectricalCheck {
    ElectricalCheck {
        conducts: gate_v > params.gate_threshold,
        in_window: drive_v == 0.0
            || (drive_v >= params.drive_low && drive_v <= params.drive_high),
        breakdown_violation: drive_v >= params.breakdown,
    }
}

/// One heater with its position and resistance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HeaterCell {
    pub coord: Coord,
    pub resistance: f64,
    pub fired_this_frame: bool,
}

impl HeaterCell {
    pub fn new(coord: Coord, resistance: f64) -> Result<HeaterCell> {
        if !(resistance > 0.0) {
            return Err(Error::Config(format!(
                "heater resistance must be positive, got {resistance}"
            )));
        }
        Ok(HeaterCell {
            coord,
            resistance,
            fired_this_frame: false,
        })
    }
}

/// Ohm's law current through the heater; zero drive gives zero current.
pub fn heater_current(drive_v: f64, cell: &HeaterCell) -> f64 {
    drive_v / cell.resistance
}

/// All input lines of the driver for one tick.
#[derive(Clone, Debug, PartialEq)]
pub struct DriverInputs {
    /// Serial DATA line.
    pub data: bool,
    /// BIT SHFT edge flag; the register shifts once when set.
    pub bit_shift_clock: bool,
    /// ENABLE level; latches on its rising edge.
    pub enable: bool,
    /// State clearing pulse; wins over everything else on its tick.
    pub clear: bool,
    /// Logic supply rail, volts.
    pub logic_supply: f64,
    /// Heater supply rail, volts.
    pub heater_supply: f64,
    /// Active power-line indices, 1-based.
    pub p_select: BTreeSet<usize>,
    /// Active address-line indices, 1-based.
    pub a_select: BTreeSet<usize>,
}

impl Default for DriverInputs {
    fn default() -> Self {
        DriverInputs {
            data: false,
            bit_shift_clock: false,
            enable: false,
            clear: false,
            logic_supply: 5.0,
            heater_supply: 8.0,
            p_select: BTreeSet::new(),
            a_select: BTreeSet::new(),
        }
    }
}

impl DriverInputs {
    pub fn validate(&self) -> Result<()> {
        if !(self.logic_supply > 0.0 && self.logic_supply <= 6.0) {
            return Err(Error::Config(format!(
                "logic supply {} V outside (0, 6] V",
                self.logic_supply
            )));
        }
        Ok(())
    }
}

/// Registered state of the driver.
///
/// `gray_codes` is the frame's DAC word bank; it rides along with the
/// state but is not part of the serial path, so CLEAR leaves it alone.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DriverState {
    shift_register: Vec<bool>,
    latch_bank: Vec<bool>,
    gray_codes: Option<Vec<u8>>,
    tick: u64,
    enable_level: bool,
}

impl DriverState {
    /// A cleared driver whose shift register and latch bank hold `length`
    /// bits (the number of S lines in 3D, or the data word width).
    pub fn new(length: usize) -> DriverState {
        DriverState {
            shift_register: vec![false; length],
            latch_bank: vec![false; length],
            gray_codes: None,
            tick: 0,
            enable_level: false,
        }
    }

    pub fn with_gray_codes(mut self, codes: Vec<u8>) -> DriverState {
        self.gray_codes = Some(codes);
        self
    }

    pub fn shift_register(&self) -> &[bool] {
        &self.shift_register
    }

    pub fn latch_bank(&self) -> &[bool] {
        &self.latch_bank
    }

    pub fn gray_codes(&self) -> Option<&[u8]> {
        self.gray_codes.as_deref()
    }

    pub fn tick_count(&self) -> u64 {
        self.tick
    }

    /// Advances the driver by one tick. The tick counter increments on
    /// every call, whether or not any line is active.
    pub fn tick(mut self, inputs: &DriverInputs) -> DriverState {
        self.tick += 1;
        if inputs.clear {
            self.shift_register.fill(false);
            self.latch_bank.fill(false);
            self.enable_level = false;
            return self;
        }
        if inputs.bit_shift_clock && !self.shift_register.is_empty() {
            for i in (1..self.shift_register.len()).rev() {
                self.shift_register[i] = self.shift_register[i - 1];
            }
            self.shift_register[0] = inputs.data;
        }
        if inputs.enable && !self.enable_level {
            self.latch_bank.copy_from_slice(&self.shift_register);
        }
        self.enable_level = inputs.enable;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn shift(state: DriverState, data: bool) -> DriverState {
        state.tick(&DriverInputs {
            data,
            bit_shift_clock: true,
            ..DriverInputs::default()
        })
    }

    fn latch(state: DriverState) -> DriverState {
        // Drop ENABLE first so the next assertion is a clean rising edge.
        let state = state.tick(&DriverInputs::default());
        state.tick(&DriverInputs {
            enable: true,
            ..DriverInputs::default()
        })
    }

    #[test]
    fn shift_direction_head_first() {
        let mut state = DriverState::new(5);
        for bit in [true, false, true, true, false] {
            state = shift(state, bit);
        }
        assert_eq!(state.shift_register(), [false, true, true, false, true]);
    }

    #[test]
    fn register_contents_equal_last_k_bits_for_all_lengths_up_to_16() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for len in 1..=16usize {
            for k in 0..=len {
                for _ in 0..32 {
                    let bits: Vec<bool> = (0..k).map(|_| rng.gen()).collect();
                    let mut state = DriverState::new(len);
                    for &b in &bits {
                        state = shift(state, b);
                    }
                    let mut expected = vec![false; len];
                    for (i, &b) in bits.iter().rev().enumerate() {
                        expected[i] = b;
                    }
                    assert_eq!(state.shift_register(), expected, "len={len} k={k}");
                }
            }
        }
    }

    #[test]
    fn latch_copies_and_register_is_unchanged() {
        let mut state = DriverState::new(4);
        for bit in [true, true, false, true] {
            state = shift(state, bit);
        }
        let register_before = state.shift_register().to_vec();
        state = latch(state);
        assert_eq!(state.latch_bank(), register_before.as_slice());
        assert_eq!(state.shift_register(), register_before.as_slice());
    }

    #[test]
    fn latch_is_edge_triggered_and_isolated_from_shifts() {
        let mut state = DriverState::new(3);
        state = shift(state, true);
        state = latch(state);
        assert_eq!(state.latch_bank(), [true, false, false]);

        // Shifting with ENABLE held high must not re-latch.
        state = state.tick(&DriverInputs {
            data: true,
            bit_shift_clock: true,
            enable: true,
            ..DriverInputs::default()
        });
        assert_eq!(state.shift_register(), [true, true, false]);
        assert_eq!(state.latch_bank(), [true, false, false]);
    }

    #[test]
    fn clear_dominates_any_history() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let len = rng.gen_range(1..=8);
            let mut state = DriverState::new(len);
            for _ in 0..rng.gen_range(0..40) {
                state = state.tick(&DriverInputs {
                    data: rng.gen(),
                    bit_shift_clock: rng.gen(),
                    enable: rng.gen(),
                    ..DriverInputs::default()
                });
            }
            // Clear alongside every other line asserted: clear wins.
            state = state.tick(&DriverInputs {
                data: true,
                bit_shift_clock: true,
                enable: true,
                clear: true,
                ..DriverInputs::default()
            });
            assert!(state.shift_register().iter().all(|&b| !b));
            assert!(state.latch_bank().iter().all(|&b| !b));
        }
    }

    #[test]
    fn tick_counter_increments_every_call() {
        let mut state = DriverState::new(2);
        assert_eq!(state.tick_count(), 0);
        state = state.tick(&DriverInputs::default());
        state = state.tick(&DriverInputs {
            clear: true,
            ..DriverInputs::default()
        });
        assert_eq!(state.tick_count(), 2);
    }

    #[test]
    fn gray_codes_survive_ticks_and_clear() {
        let state = DriverState::new(2).with_gray_codes(vec![10, 200]);
        let state = state.tick(&DriverInputs {
            clear: true,
            ..DriverInputs::default()
        });
        assert_eq!(state.gray_codes(), Some([10u8, 200].as_slice()));
    }

    #[test]
    fn level_shift_nominal_and_off() {
        let p = ElectricalParams::default();
        assert_eq!(level_shift(3.5, &p, None).unwrap(), 8.0);
        assert_eq!(level_shift(5.0, &p, None).unwrap(), 8.0);
        assert_eq!(level_shift(0.0, &p, None).unwrap(), 0.0);
        assert_eq!(level_shift(3.49, &p, None).unwrap(), 0.0);
    }

    #[test]
    fn dac_endpoints_are_exact() {
        let p = ElectricalParams::default();
        assert_eq!(level_shift(5.0, &p, Some(255)).unwrap(), 8.5);
        assert_eq!(level_shift(5.0, &p, Some(0)).unwrap(), 7.5);
        let mid = level_shift(5.0, &p, Some(128)).unwrap();
        assert!(mid > 8.0 && mid < 8.01, "mid-scale {mid}");
    }

    #[test]
    fn level_shift_output_is_off_or_inside_the_window() {
        let p = ElectricalParams::default();
        for code in 0..=255u8 {
            for logic_v in [0.0, 1.0, 3.4, 3.5, 5.0] {
                let v = level_shift(logic_v, &p, Some(code)).unwrap();
                assert!(v == 0.0 || (p.drive_low..=p.drive_high).contains(&v));
            }
        }
        let v = level_shift(5.0, &p, None).unwrap();
        assert!((p.drive_low..=p.drive_high).contains(&v));
    }

    #[test]
    fn bad_nominal_is_classified_by_severity() {
        let low = ElectricalParams {
            nominal_drive: 7.0,
            ..ElectricalParams::default()
        };
        assert!(matches!(
            level_shift(5.0, &low, None),
            Err(Error::NominalOutsideWindow { nominal, .. }) if nominal == 7.0
        ));

        let hot = ElectricalParams {
            nominal_drive: 9.2,
            ..ElectricalParams::default()
        };
        assert!(matches!(
            level_shift(5.0, &hot, None),
            Err(Error::Breakdown { drive, .. }) if drive == 9.2
        ));
        // Off stays off even with a bad nominal configured.
        assert_eq!(level_shift(0.0, &hot, None).unwrap(), 0.0);
    }

    #[test]
    fn fire_condition_per_dimension() {
        assert!(fire_condition(3, true, true, true));
        assert!(!fire_condition(3, true, true, false));
        assert!(!fire_condition(3, false, true, true));
        assert!(!fire_condition(3, true, false, true));
        assert!(fire_condition(2, true, true, false));
        assert!(!fire_condition(2, true, false, true));
        assert!(fire_condition(1, true, false, false));
        assert!(!fire_condition(1, false, true, true));
    }

    #[test]
    fn fire_condition_is_monotone_in_every_selection() {
        for dims in 1..=3 {
            for mask in 0..8u8 {
                let p = mask & 1 != 0;
                let a = mask & 2 != 0;
                let s = mask & 4 != 0;
                let base = fire_condition(dims, p, a, s);
                for raised in [
                    fire_condition(dims, true, a, s),
                    fire_condition(dims, p, true, s),
                    fire_condition(dims, p, a, true),
                ] {
                    assert!(!base || raised, "dims={dims} mask={mask}");
                }
            }
        }
    }

    #[test]
    fn electrical_check_cases() {
        let p = ElectricalParams::default();
        let ok = electrical_check(8.0, 5.0, &p);
        assert!(ok.conducts && ok.in_window && !ok.breakdown_violation);

        let hot = electrical_check(9.2, 5.0, &p);
        assert!(hot.breakdown_violation);

        let cold_gate = electrical_check(8.0, 0.5, &p);
        assert!(!cold_gate.conducts);

        let off = electrical_check(0.0, 5.0, &p);
        assert!(off.in_window && !off.breakdown_violation);

        let sag = electrical_check(6.9, 5.0, &p);
        assert!(!sag.in_window && !sag.breakdown_violation);
    }

    #[test]
    fn heater_current_is_ohms_law() {
        let cell = HeaterCell::new(Coord::d1(1), 40.0).unwrap();
        assert_eq!(heater_current(8.0, &cell), 0.2);
        assert_eq!(heater_current(0.0, &cell), 0.0);
        let cell = HeaterCell::new(Coord::d1(1), 30.0).unwrap();
        assert_eq!(heater_current(7.5, &cell), 0.25);
        assert!(HeaterCell::new(Coord::d1(1), 0.0).is_err());
    }

    #[test]
    fn param_validation_rejects_broken_windows() {
        assert!(ElectricalParams::default().validate().is_ok());
        let broken = |p: ElectricalParams| p.validate().is_err();
        assert!(broken(ElectricalParams { drive_high: 9.5, ..Default::default() }));
        assert!(broken(ElectricalParams { gate_threshold: 4.0, ..Default::default() }));
        assert!(broken(ElectricalParams { heater_resistance: 0.0, ..Default::default() }));
        assert!(broken(ElectricalParams { drive_low: 8.6, ..Default::default() }));
        // An out-of-window nominal alone is not a structural error.
        let p = ElectricalParams { nominal_drive: 9.2, ..Default::default() };
        assert!(p.validate().is_ok());
    }

    #[test]
    fn driver_inputs_validation() {
        assert!(DriverInputs::default().validate().is_ok());
        let mut inputs = DriverInputs { logic_supply: 0.0, ..Default::default() };
        assert!(inputs.validate().is_err());
        inputs.logic_supply = 6.5;
        assert!(inputs.validate().is_err());
    }
}
