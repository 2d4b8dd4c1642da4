//! Tick-level frame execution.
//!
//! The engine drives the [`crate::driver`] state machine through whole
//! frames: clear, serial registration of each S word, latch on the ENABLE
//! edge, firing pulse, settle. It keeps its own picosecond clock and its
//! own sweep loops, sharing only the topology mapping with the analytic
//! scheduler, which makes it an independent route to the same firing
//! times. Every frame ends with a cross-check of tick-level results
//! against [`crate::scheduler::build_schedule`]; a disagreement is an
//! internal-consistency error, in production runs as much as in tests.
//!
//! With tracing enabled, the engine records the control lines (CLEAR,
//! ENABLE, BIT_SHFT, DATA), the scan lines (P, A, S), per-nozzle drive
//! voltages (HEAT) and peak temperatures (TEMP). TEMP holds the peak of
//! the nozzle's most recent pulse; cooling between pulses is not modeled.

use crate::driver::{
    electrical_check, fire_condition, level_shift, DriverInputs, DriverState, ElectricalParams,
};
use crate::error::{Error, Result};
use crate::firing::{droplet_ejected, FiringRecord, Pulse, ThermalParams};
use crate::scheduler::{build_schedule, TimingParams};
use crate::time::Picos;
use crate::topology::Topology;
use crate::trace::{SignalTrace, Value, WireId};

/// Logic supply rail driving the selection gates, volts.
const LOGIC_SUPPLY: f64 = 5.0;

/// Trace handles for every declared signal.
struct Wires {
    clear: WireId,
    enable: WireId,
    bit_shift: WireId,
    data: WireId,
    p: Vec<WireId>,
    a: Vec<WireId>,
    s: Vec<WireId>,
    heat: Vec<WireId>,
    temp: Vec<WireId>,
}

struct Tracer {
    trace: SignalTrace,
    wires: Wires,
}

fn init_trace(t: &Topology, ambient: f64) -> Tracer {
    let mut trace = SignalTrace::new();
    let clear = trace.add_bit("CLEAR");
    let enable = trace.add_bit("ENABLE");
    let bit_shift = trace.add_bit("BIT_SHFT");
    let data = trace.add_bit("DATA");
    let p = (1..=t.p_lines()).map(|i| trace.add_bit(format!("P{i}"))).collect();
    let a = if t.dims() >= 2 {
        (1..=t.a_lines()).map(|i| trace.add_bit(format!("A{i}"))).collect()
    } else {
        Vec::new()
    };
    let s = if t.dims() == 3 {
        (1..=t.s_lines()).map(|i| trace.add_bit(format!("S{i}"))).collect()
    } else {
        Vec::new()
    };
    let heat = (1..=t.nozzle_count())
        .map(|n| trace.add_real(format!("HEAT{n}"), 0.0))
        .collect();
    let temp = (1..=t.nozzle_count())
        .map(|n| trace.add_real(format!("TEMP{n}"), ambient))
        .collect();
    Tracer {
        trace,
        wires: Wires {
            clear,
            enable,
            bit_shift,
            data,
            p,
            a,
            s,
            heat,
            temp,
        },
    }
}

/// Summary of one executed frame.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FrameStats {
    pub frame: usize,
    pub fired: usize,
    pub ejected: usize,
    pub start: Picos,
    pub end: Picos,
}

/// Multi-frame tick-level simulator.
pub struct Simulator {
    topology: Topology,
    timing: TimingParams,
    electrical: ElectricalParams,
    thermal: ThermalParams,
    now: Picos,
    frames: usize,
    records: Vec<FiringRecord>,
    tracer: Option<Tracer>,
}

impl Simulator {
    pub fn new(
        topology: Topology,
        timing: TimingParams,
        electrical: ElectricalParams,
        thermal: ThermalParams,
    ) -> Result<Simulator> {
        timing.validate()?;
        electrical.validate()?;
        thermal.validate()?;
        Ok(Simulator {
            topology,
            timing,
            electrical,
            thermal,
            now: Picos::ZERO,
            frames: 0,
            records: Vec::new(),
            tracer: None,
        })
    }

    /// Enables signal tracing for all subsequent frames.
    pub fn with_trace(mut self) -> Simulator {
        self.tracer = Some(init_trace(&self.topology, self.thermal.ambient_temp));
        self
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn records(&self) -> &[FiringRecord] {
        &self.records
    }

    pub fn elapsed(&self) -> Picos {
        self.now
    }

    pub fn frames_run(&self) -> usize {
        self.frames
    }

    pub fn trace(&self) -> Option<&SignalTrace> {
        self.tracer.as_ref().map(|t| &t.trace)
    }

    /// Runs one frame of firing data (one bit per nozzle, plus optional
    /// per-nozzle DAC codes), then verifies the tick-level firing times
    /// against the analytic schedule.
    pub fn run_frame(&mut self, data: &[bool], gray: Option<&[u8]>) -> Result<FrameStats> {
        if data.len() != self.topology.nozzle_count() {
            return Err(Error::DataLength {
                got: data.len(),
                expected: self.topology.nozzle_count(),
            });
        }
        if let Some(codes) = gray {
            if codes.len() != data.len() {
                return Err(Error::DataLength {
                    got: codes.len(),
                    expected: data.len(),
                });
            }
        }
        let start = self.now;
        let (end, frame_records, pending) = {
            let mut run = FrameRun {
                t: &self.topology,
                timing: self.timing,
                electrical: self.electrical,
                thermal: self.thermal,
                wires: self.tracer.as_ref().map(|tr| &tr.wires),
                state: DriverState::new(self.topology.s_lines()),
                pending: Vec::new(),
                records: Vec::new(),
                now: start,
                active_p: None,
                active_a: None,
            };
            run.execute(data, gray)?;
            (run.now, run.records, run.pending)
        };
        if let Some(tracer) = self.tracer.as_mut() {
            let mut pending = pending;
            pending.sort_by_key(|e| e.0);
            for (tick, wire, value) in pending {
                tracer.trace.record(tick, wire, value)?;
            }
        }
        let stats = FrameStats {
            frame: self.frames,
            fired: frame_records.len(),
            ejected: frame_records.iter().filter(|r| r.ejected).count(),
            start,
            end,
        };
        self.records.extend(frame_records);
        self.now = end;
        self.frames += 1;
        Ok(stats)
    }

    /// Tears the simulator down into its firing log and trace.
    pub fn finish(self) -> (Vec<FiringRecord>, Option<SignalTrace>) {
        (self.records, self.tracer.map(|t| t.trace))
    }
}

/// One sweep position: the chunk of S lines firing for a (P, A) column.
struct SlotPlan {
    p: usize,
    a: usize,
    chunk: Vec<usize>,
}

struct FrameRun<'a> {
    t: &'a Topology,
    timing: TimingParams,
    electrical: ElectricalParams,
    thermal: ThermalParams,
    wires: Option<&'a Wires>,
    state: DriverState,
    pending: Vec<(u64, WireId, Value)>,
    records: Vec<FiringRecord>,
    now: Picos,
    active_p: Option<usize>,
    active_a: Option<usize>,
}

impl FrameRun<'_> {
    fn emit(&mut self, at: Picos, wire: Option<WireId>, value: Value) {
        if self.wires.is_some() {
            if let Some(w) = wire {
                self.pending.push((at.0, w, value));
            }
        }
    }

    fn step(&mut self, inputs: &DriverInputs) {
        let state = std::mem::replace(&mut self.state, DriverState::new(0));
        self.state = state.tick(inputs);
    }

    /// Half a bit clock, floored, at least one tick: the fall time offset
    /// for rendered clock pulses.
    fn half_clock(&self) -> Picos {
        Picos(std::cmp::max(1, self.timing.bit_clock().0 / 2))
    }

    fn execute(&mut self, data: &[bool], gray: Option<&[u8]>) -> Result<()> {
        let frame_start = self.now;
        let dims = self.t.dims();
        let pulse = self.timing.pulse();
        let settle = self.timing.settle();
        let full_reg = self.timing.registration_for(self.t);
        let pipelined = self.timing.pipelined_registration && dims == 3;

        // Clear the data path before the sweep.
        self.step(&DriverInputs {
            clear: true,
            ..DriverInputs::default()
        });
        let w_clear = self.wires.map(|w| w.clear);
        self.emit(frame_start, w_clear, Value::Bit(true));
        let clear_fall = frame_start + self.half_clock();
        self.emit(clear_fall, w_clear, Value::Bit(false));

        // The engine's own sweep enumeration: P-major, A fastest, with an
        // S column split into chunks under the parallel-fire cap.
        let cap = self.timing.max_parallel_fires.unwrap_or(usize::MAX);
        let mut plans = Vec::new();
        for p in 1..=self.t.p_lines() {
            for a in 1..=self.t.a_lines() {
                let selected: Vec<usize> = (1..=self.t.s_lines())
                    .filter(|&s| {
                        let cell = self.t.cell_index(p, a, s);
                        cell <= data.len() && data[cell - 1]
                    })
                    .collect();
                if selected.is_empty() {
                    plans.push(SlotPlan {
                        p,
                        a,
                        chunk: Vec::new(),
                    });
                } else {
                    for chunk in selected.chunks(cap) {
                        plans.push(SlotPlan {
                            p,
                            a,
                            chunk: chunk.to_vec(),
                        });
                    }
                }
            }
        }

        for i in 0..plans.len() {
            let slot_start = self.now;
            let (p, a) = (plans[i].p, plans[i].a);
            self.select_lines(slot_start, p, a, dims);

            let pulse_start = if dims == 3 && (!pipelined || i == 0) {
                let word = self.chunk_word(&plans[i]);
                self.register_word(&word, slot_start, false);
                slot_start + full_reg
            } else {
                slot_start
            };
            let pulse_end = pulse_start + pulse;

            if dims == 3 {
                // Rising ENABLE edge: the registered word moves to the latch.
                self.step(&DriverInputs {
                    enable: true,
                    p_select: [p].into(),
                    a_select: [a].into(),
                    ..DriverInputs::default()
                });
                let latch = self.state.latch_bank().to_vec();
                for (k, &level) in latch.iter().enumerate() {
                    let wire = self.wires.map(|w| w.s[k]);
                    self.emit(pulse_start, wire, Value::Bit(level));
                }
                self.emit(pulse_start, self.wires.map(|w| w.enable), Value::Bit(true));
                for s in 1..=self.t.s_lines() {
                    if fire_condition(3, true, true, latch[s - 1]) {
                        let cell = self.t.cell_index(p, a, s);
                        self.fire(cell, i, pulse_start, pulse_end, gray)?;
                    }
                }
                if pipelined && i + 1 < plans.len() {
                    // Next word shifts in behind the latch while the
                    // current pulse runs.
                    let word = self.chunk_word(&plans[i + 1]);
                    self.register_word(&word, pulse_start, true);
                }
                self.emit(pulse_end, self.wires.map(|w| w.enable), Value::Bit(false));
                self.step(&DriverInputs::default());
            } else {
                let firing = !plans[i].chunk.is_empty();
                self.emit(slot_start, self.wires.map(|w| w.data), Value::Bit(firing));
                self.emit(pulse_start, self.wires.map(|w| w.enable), Value::Bit(true));
                if firing && fire_condition(dims, true, true, true) {
                    let cell = self.t.cell_index(p, a, 1);
                    self.fire(cell, i, pulse_start, pulse_end, gray)?;
                }
                self.emit(pulse_end, self.wires.map(|w| w.enable), Value::Bit(false));
            }

            self.now = pulse_end + settle;
        }

        let frame_end = self.now;
        self.deselect_lines(frame_end, dims);
        self.check_against_schedule(data, frame_start, frame_end)
    }

    fn chunk_word(&self, plan: &SlotPlan) -> Vec<bool> {
        let mut word = vec![false; self.t.s_lines()];
        for &s in &plan.chunk {
            word[s - 1] = true;
        }
        word
    }

    /// Serially registers `word`, highest S line first, so the head-first
    /// shift register ends up aligned with S indices.
    fn register_word(&mut self, word: &[bool], at: Picos, enable_held: bool) {
        let bc = self.timing.bit_clock();
        let half = self.half_clock();
        for (k, s) in (1..=word.len()).rev().enumerate() {
            let bit = word[s - 1];
            self.step(&DriverInputs {
                data: bit,
                bit_shift_clock: true,
                enable: enable_held,
                ..DriverInputs::default()
            });
            if !bc.is_zero() {
                let tick = at + bc * k as u64;
                self.emit(tick, self.wires.map(|w| w.data), Value::Bit(bit));
                self.emit(tick, self.wires.map(|w| w.bit_shift), Value::Bit(true));
                self.emit(tick + half, self.wires.map(|w| w.bit_shift), Value::Bit(false));
            }
        }
    }

    fn select_lines(&mut self, at: Picos, p: usize, a: usize, dims: usize) {
        if self.active_p != Some(p) {
            if let Some(prev) = self.active_p {
                self.emit(at, self.wires.map(|w| w.p[prev - 1]), Value::Bit(false));
            }
            self.emit(at, self.wires.map(|w| w.p[p - 1]), Value::Bit(true));
            self.active_p = Some(p);
        }
        if dims >= 2 && self.active_a != Some(a) {
            if let Some(prev) = self.active_a {
                self.emit(at, self.wires.map(|w| w.a[prev - 1]), Value::Bit(false));
            }
            self.emit(at, self.wires.map(|w| w.a[a - 1]), Value::Bit(true));
            self.active_a = Some(a);
        }
    }

    fn deselect_lines(&mut self, at: Picos, dims: usize) {
        if let Some(p) = self.active_p.take() {
            self.emit(at, self.wires.map(|w| w.p[p - 1]), Value::Bit(false));
        }
        if dims >= 2 {
            if let Some(a) = self.active_a.take() {
                self.emit(at, self.wires.map(|w| w.a[a - 1]), Value::Bit(false));
            }
        }
    }

    fn fire(
        &mut self,
        nozzle: usize,
        slot: usize,
        pulse_start: Picos,
        pulse_end: Picos,
        gray: Option<&[u8]>,
    ) -> Result<()> {
        if nozzle > self.t.nozzle_count() {
            return Err(Error::Consistency(format!(
                "padding cell {nozzle} reached the firing stage"
            )));
        }
        let code = gray.map(|g| g[nozzle - 1]);
        let drive = level_shift(LOGIC_SUPPLY, &self.electrical, code)?;
        let check = electrical_check(drive, LOGIC_SUPPLY, &self.electrical);
        if check.breakdown_violation {
            return Err(Error::Breakdown {
                drive,
                breakdown: self.electrical.breakdown,
            });
        }
        // A non-conducting gate leaves the heater unpowered but the slot
        // still happened; the record carries the dead pulse.
        let applied = if check.conducts { drive } else { 0.0 };
        let record = droplet_ejected(
            &Pulse {
                nozzle,
                slot,
                start_time: pulse_start,
                end_time: pulse_end,
                drive_voltage: applied,
                resistance: self.electrical.heater_resistance,
                width: self.timing.pulse_width,
            },
            &self.thermal,
        );
        let heat = self.wires.map(|w| w.heat[nozzle - 1]);
        self.emit(pulse_start, heat, Value::Real(applied));
        self.emit(pulse_end, heat, Value::Real(0.0));
        let temp = self.wires.map(|w| w.temp[nozzle - 1]);
        self.emit(pulse_end, temp, Value::Real(record.peak_temp));
        self.records.push(record);
        Ok(())
    }

    /// The production oracle: tick-level times must equal the analytic
    /// schedule exactly, nozzle for nozzle.
    fn check_against_schedule(
        &self,
        data: &[bool],
        frame_start: Picos,
        frame_end: Picos,
    ) -> Result<()> {
        let schedule = build_schedule(self.t, data, &self.timing)?;
        if frame_end - frame_start != schedule.frame_time() {
            return Err(Error::Consistency(format!(
                "tick-level frame took {}, schedule predicts {}",
                frame_end - frame_start,
                schedule.frame_time()
            )));
        }
        let mut expected = Vec::with_capacity(self.t.nozzle_count());
        for n in 1..=self.t.nozzle_count() {
            expected.push(schedule.time_to_fire(n)?);
        }
        for rec in &self.records {
            let relative = rec.fire_time - frame_start;
            match expected[rec.nozzle - 1].take() {
                Some(t) if t == relative => {}
                Some(t) => {
                    return Err(Error::Consistency(format!(
                        "nozzle {}: tick-level fire at {}, schedule says {}",
                        rec.nozzle, relative, t
                    )));
                }
                None => {
                    return Err(Error::Consistency(format!(
                        "nozzle {} fired outside the schedule",
                        rec.nozzle
                    )));
                }
            }
        }
        if let Some(n) = expected.iter().position(Option::is_some) {
            return Err(Error::Consistency(format!(
                "nozzle {} was scheduled but never fired at tick level",
                n + 1
            )));
        }
        Ok(())
    }
}
