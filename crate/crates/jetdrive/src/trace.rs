//! Change-only signal traces and their export formats.
//!
//! A [`SignalTrace`] owns a set of named signals (1-bit wires and real
//! variables) and a time-ordered list of value changes in integer
//! picosecond ticks. Recording is change-only: re-recording the current
//! value is a no-op, so consecutive events on one signal always differ.
//! Within one tick, events sit in signal-declaration order regardless of
//! the order they were recorded in, which makes dumps deterministic.
//!
//! Export formats are a Value Change Dump (`emit_vcd`) for waveform
//! viewers and JSON (`emit_report`) for machine-readable reports. Both
//! are byte-deterministic for a given input.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};

/// Seconds per trace tick: traces run on the picosecond time base.
pub const TIMESCALE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SignalKind {
    Bit,
    Real,
}

/// A recorded signal level.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Value {
    Bit(bool),
    Real(f64),
}

impl Value {
    fn kind(self) -> SignalKind {
        match self {
            Value::Bit(_) => SignalKind::Bit,
            Value::Real(_) => SignalKind::Real,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Signal {
    pub name: String,
    pub kind: SignalKind,
    pub initial: Value,
}

/// Handle to one declared signal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct WireId(usize);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Event {
    pub tick: u64,
    pub signal: WireId,
    pub value: Value,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct SignalTrace {
    signals: Vec<Signal>,
    events: Vec<Event>,
    last_value: Vec<Value>,
    last_tick: u64,
}

impl SignalTrace {
    pub fn new() -> SignalTrace {
        SignalTrace::default()
    }

    /// Declares a 1-bit wire, initially low.
    pub fn add_bit(&mut self, name: impl Into<String>) -> WireId {
        self.add_signal(name.into(), SignalKind::Bit, Value::Bit(false))
    }

    /// Declares a real-valued variable with the given initial level.
    pub fn add_real(&mut self, name: impl Into<String>, initial: f64) -> WireId {
        self.add_signal(name.into(), SignalKind::Real, Value::Real(initial))
    }

    fn add_signal(&mut self, name: String, kind: SignalKind, initial: Value) -> WireId {
        self.signals.push(Signal {
            name,
            kind,
            initial,
        });
        self.last_value.push(initial);
        WireId(self.signals.len() - 1)
    }

    pub fn signals(&self) -> &[Signal] {
        &self.signals
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn signal_name(&self, id: WireId) -> &str {
        &self.signals[id.0].name
    }

    /// Records `value` on `signal` at `tick`. Ticks must be nondecreasing
    /// across calls; recording the current value again is a no-op.
    pub fn record(&mut self, tick: u64, signal: WireId, value: Value) -> Result<()> {
        if tick < self.last_tick {
            return Err(Error::TraceOrder {
                tick,
                last: self.last_tick,
            });
        }
        let sig = &self.signals[signal.0];
        if sig.kind != value.kind() {
            return Err(Error::Consistency(format!(
                "value of the wrong kind recorded on signal {}",
                sig.name
            )));
        }
        self.last_tick = tick;
        if self.last_value[signal.0] == value {
            return Ok(());
        }
        self.last_value[signal.0] = value;
        // Keep same-tick events in declaration order.
        let back = self
            .events
            .iter()
            .rev()
            .take_while(|e| e.tick == tick && e.signal.0 > signal.0)
            .count();
        let at = self.events.len() - back;
        self.events.insert(
            at,
            Event {
                tick,
                signal,
                value,
            },
        );
        Ok(())
    }

    /// Writes the trace as a Value Change Dump. Output is byte-identical
    /// for equal traces: no dates, versions, or environment leak in.
    pub fn emit_vcd<W: Write>(&self, mut sink: W) -> Result<()> {
        writeln!(sink, "$timescale 1 ps $end")?;
        writeln!(sink, "$scope module jetdrive $end")?;
        for (i, sig) in self.signals.iter().enumerate() {
            match sig.kind {
                SignalKind::Bit => {
                    writeln!(sink, "$var wire 1 {} {} $end", id_code(i), sig.name)?
                }
                SignalKind::Real => {
                    writeln!(sink, "$var real 64 {} {} $end", id_code(i), sig.name)?
                }
            }
        }
        writeln!(sink, "$upscope $end")?;
        writeln!(sink, "$enddefinitions $end")?;
        writeln!(sink, "$dumpvars")?;
        for (i, sig) in self.signals.iter().enumerate() {
            write_value(&mut sink, sig.initial, i)?;
        }
        writeln!(sink, "$end")?;
        let mut open_tick = None;
        for event in &self.events {
            if open_tick != Some(event.tick) {
                writeln!(sink, "#{}", event.tick)?;
                open_tick = Some(event.tick);
            }
            write_value(&mut sink, event.value, event.signal.0)?;
        }
        Ok(())
    }
}

fn write_value<W: Write>(sink: &mut W, value: Value, index: usize) -> Result<()> {
    match value {
        Value::Bit(false) => writeln!(sink, "0{}", id_code(index))?,
        Value::Bit(true) => writeln!(sink, "1{}", id_code(index))?,
        Value::Real(v) => writeln!(sink, "r{} {}", v, id_code(index))?,
    }
    Ok(())
}

/// VCD identifier codes: base-94 strings over the printable range '!'..'~'.
fn id_code(mut index: usize) -> String {
    let mut code = String::new();
    loop {
        code.push((b'!' + (index % 94) as u8) as char);
        index /= 94;
        if index == 0 {
            return code;
        }
        index -= 1;
    }
}

/// Serializes any report as pretty JSON with a trailing newline. Key
/// order follows the struct definition, so output is stable.
pub fn emit_report<T: Serialize, W: Write>(report: &T, mut sink: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut sink, report)
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    writeln!(sink)?;
    Ok(())
}
