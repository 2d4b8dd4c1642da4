//! Analytic scan schedules and scheme comparisons.
//!
//! A frame is one sweep over every (P, A) pair, P-major with A fastest.
//! Each sweep position is a scan slot:
//!
//! ```text
//! slot = registration + pulse_width + settle_time
//! ```
//!
//! Registration is the serial loading of the S word and costs `S_max` bit
//! clocks in 3D; 1D and 2D decode their lines directly and pay none. With
//! `pipelined_registration`, the next word shifts in behind the latch
//! while the current pulse runs, so only the first slot of a frame pays.
//!
//! A 3D slot fires every latch-selected S nozzle of its column at once;
//! 1D and 2D slots fire at most one nozzle. Slots exist whether or not
//! they fire: the sweep cost is data-independent. The optional
//! `max_parallel_fires` cap splits a heavily loaded S column across
//! consecutive slots to bound peak supply current.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::time::Picos;
use crate::topology::{pad_count, FactorizationStrategy, Topology};

/// Timing model parameters, in seconds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimingParams {
    /// Period of the serial bit clock driving registration.
    pub bit_clock_period: f64,
    /// Width of the firing pulse.
    pub pulse_width: f64,
    /// Dead time after each pulse.
    pub settle_time: f64,
    /// Overlap registration with the previous pulse; only the first slot
    /// of a frame then pays registration time.
    pub pipelined_registration: bool,
    /// Upper bound on nozzles fired simultaneously in one slot.
    pub max_parallel_fires: Option<usize>,
}

impl Default for TimingParams {
    fn default() -> Self {
        TimingParams {
            bit_clock_period: 1e-7,
            pulse_width: 3e-6,
            settle_time: 0.0,
            pipelined_registration: false,
            max_parallel_fires: None,
        }
    }
}

impl TimingParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.pulse_width > 0.0) {
            return Err(Error::Config(format!(
                "pulse_width must be positive, got {}",
                self.pulse_width
            )));
        }
        if self.bit_clock_period < 0.0 || self.settle_time < 0.0 {
            return Err(Error::Config(
                "bit_clock_period and settle_time must be nonnegative".into(),
            ));
        }
        if self.max_parallel_fires == Some(0) {
            return Err(Error::Config(
                "max_parallel_fires must be at least 1 when set".into(),
            ));
        }
        Ok(())
    }

    pub fn bit_clock(&self) -> Picos {
        Picos::from_secs(self.bit_clock_period)
    }

    pub fn pulse(&self) -> Picos {
        Picos::from_secs(self.pulse_width)
    }

    pub fn settle(&self) -> Picos {
        Picos::from_secs(self.settle_time)
    }

    /// Serial registration cost of one slot under `t`, before pipelining.
    pub fn registration_for(&self, t: &Topology) -> Picos {
        if t.dims() == 3 {
            self.bit_clock() * t.s_lines() as u64
        } else {
            Picos::ZERO
        }
    }
}

/// One firing window of the sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanSlot {
    pub slot_index: usize,
    /// Driven power line, 1-based.
    pub p_line: usize,
    /// Driven address line, 1-based; 1 for 1D.
    pub a_line: usize,
    /// Latched S selections for this slot (3D only).
    pub s_vector: Option<Vec<bool>>,
    /// Nozzles firing in this slot, ascending.
    pub fired_nozzles: Vec<usize>,
    pub start_time: Picos,
    /// Registration time actually paid by this slot.
    pub registration: Picos,
    pub duration: Picos,
}

/// A full frame: every slot of the sweep, in order, with timing.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanSchedule {
    topology: Topology,
    timing: TimingParams,
    slots: Vec<ScanSlot>,
    frame_time: Picos,
    #[serde(skip)]
    fire_slot: Vec<Option<usize>>,
    #[serde(skip)]
    pulse: Picos,
}

impl ScanSchedule {
    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn timing(&self) -> &TimingParams {
        &self.timing
    }

    pub fn slots(&self) -> &[ScanSlot] {
        &self.slots
    }

    pub fn frame_time(&self) -> Picos {
        self.frame_time
    }

    /// Absolute end time of the firing pulse for `nozzle`, or `None` when
    /// its data bit is 0.
    pub fn time_to_fire(&self, nozzle: usize) -> Result<Option<Picos>> {
        if nozzle == 0 || nozzle > self.topology.nozzle_count() {
            return Err(Error::NozzleRange {
                index: nozzle,
                limit: self.topology.nozzle_count(),
            });
        }
        Ok(self.fire_slot[nozzle - 1].map(|i| {
            let slot = &self.slots[i];
            slot.start_time + slot.registration + self.pulse
        }))
    }

    /// Per-nozzle repetition rate when frames repeat back to back, hertz.
    pub fn max_firing_frequency(&self) -> f64 {
        1.0 / self.frame_time.as_secs()
    }
}

/// Builds the frame schedule for `data` (one firing bit per nozzle).
pub fn build_schedule(
    t: &Topology,
    data: &[bool],
    timing: &TimingParams,
) -> Result<ScanSchedule> {
    timing.validate()?;
    if data.len() != t.nozzle_count() {
        return Err(Error::DataLength {
            got: data.len(),
            expected: t.nozzle_count(),
        });
    }
    let pulse = timing.pulse();
    let settle = timing.settle();
    let full_registration = timing.registration_for(t);
    let max_fires = timing.max_parallel_fires.unwrap_or(usize::MAX);

    let mut slots = Vec::with_capacity(t.p_lines() * t.a_lines());
    let mut fire_slot = vec![None; t.nozzle_count()];
    let mut cursor = Picos::ZERO;
    for p in 1..=t.p_lines() {
        for a in 1..=t.a_lines() {
            // S lines of this column whose nozzles carry a 1 bit; padding
            // cells read as 0 and therefore never fire.
            let selected: Vec<usize> = (1..=t.s_lines())
                .filter(|&s| {
                    let cell = t.cell_index(p, a, s);
                    cell <= data.len() && data[cell - 1]
                })
                .collect();
            let chunks: Vec<&[usize]> = if selected.is_empty() {
                vec![&[]]
            } else {
                selected.chunks(max_fires).collect()
            };
            for chunk in chunks {
                let registration = if timing.pipelined_registration && !slots.is_empty() {
                    Picos::ZERO
                } else {
                    full_registration
                };
                let s_vector = (t.dims() == 3).then(|| {
                    let mut v = vec![false; t.s_lines()];
                    for &s in chunk {
                        v[s - 1] = true;
                    }
                    v
                });
                let fired_nozzles: Vec<usize> =
                    chunk.iter().map(|&s| t.cell_index(p, a, s)).collect();
                for &n in &fired_nozzles {
                    fire_slot[n - 1] = Some(slots.len());
                }
                let duration = registration + pulse + settle;
                slots.push(ScanSlot {
                    slot_index: slots.len(),
                    p_line: p,
                    a_line: a,
                    s_vector,
                    fired_nozzles,
                    start_time: cursor,
                    registration,
                    duration,
                });
                cursor += duration;
            }
        }
    }
    Ok(ScanSchedule {
        topology: t.clone(),
        timing: *timing,
        slots,
        frame_time: cursor,
        fire_slot,
        pulse,
    })
}

/// Line counts seen at the pads (everything except the common line).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ScanLines {
    pub p: usize,
    pub a: Option<usize>,
    pub s: Option<usize>,
    pub total: usize,
}

pub fn scan_line_count(t: &Topology) -> ScanLines {
    let p = t.p_lines();
    let a = (t.dims() >= 2).then(|| t.a_lines());
    let s = (t.dims() == 3).then(|| t.s_lines());
    ScanLines {
        p,
        a,
        s,
        total: p + a.unwrap_or(0) + s.unwrap_or(0),
    }
}

/// Figures quoted for the reference driver design, carried in reports so
/// the model's numbers can be read against them.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ReferenceClaims {
    /// Quoted last-nozzle wait reduction moving from 2D to 3D.
    pub last_fire_reduction: f64,
    /// Quoted frame-rate speedup moving from 2D to 3D.
    pub frame_speedup: f64,
}

impl Default for ReferenceClaims {
    fn default() -> Self {
        ReferenceClaims {
            last_fire_reduction: 0.70,
            frame_speedup: 3.0,
        }
    }
}

/// Side-by-side timing of a 2D and a 3D topology for the same nozzles.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SchemeComparison {
    pub nozzles: usize,
    pub axes_2d: Vec<usize>,
    pub axes_3d: Vec<usize>,
    pub pads_2d: usize,
    pub pads_3d: usize,
    pub slots_2d: usize,
    pub slots_3d: usize,
    pub frame_time_2d: Picos,
    pub frame_time_3d: Picos,
    /// End of the last nozzle's pulse under each scheme, all-ones data.
    pub last_fire_2d: Picos,
    pub last_fire_3d: Picos,
    /// frame_time_2d / frame_time_3d.
    pub frame_speedup: f64,
    /// 1 - last_fire_3d / last_fire_2d ("reduced by").
    pub last_fire_reduction: f64,
    /// last_fire_3d / last_fire_2d ("reduced to").
    pub last_fire_remaining_fraction: f64,
    pub max_frequency_2d: f64,
    pub max_frequency_3d: f64,
    pub reference_reported: ReferenceClaims,
}

/// Compares a 2D and a 3D factorization for `nozzles` under one timing
/// model, with every nozzle firing.
pub fn compare_schemes(
    nozzles: usize,
    axes_2d: &[usize],
    axes_3d: &[usize],
    timing: &TimingParams,
) -> Result<SchemeComparison> {
    let t2 = Topology::new(2, axes_2d.to_vec(), nozzles)?;
    let t3 = Topology::new(3, axes_3d.to_vec(), nozzles)?;
    let data = vec![true; nozzles];
    let s2 = build_schedule(&t2, &data, timing)?;
    let s3 = build_schedule(&t3, &data, timing)?;
    let last_fire_2d = s2.time_to_fire(nozzles)?.expect("all-ones data fires");
    let last_fire_3d = s3.time_to_fire(nozzles)?.expect("all-ones data fires");
    let remaining = last_fire_3d.as_secs() / last_fire_2d.as_secs();
    Ok(SchemeComparison {
        nozzles,
        axes_2d: axes_2d.to_vec(),
        axes_3d: axes_3d.to_vec(),
        pads_2d: pad_count(2, nozzles, &FactorizationStrategy::Explicit(axes_2d.to_vec()))?.pads,
        pads_3d: pad_count(3, nozzles, &FactorizationStrategy::Explicit(axes_3d.to_vec()))?.pads,
        slots_2d: s2.slots().len(),
        slots_3d: s3.slots().len(),
        frame_time_2d: s2.frame_time(),
        frame_time_3d: s3.frame_time(),
        last_fire_2d,
        last_fire_3d,
        frame_speedup: s2.frame_time().as_secs() / s3.frame_time().as_secs(),
        last_fire_reduction: 1.0 - remaining,
        last_fire_remaining_fraction: remaining,
        max_frequency_2d: s2.max_firing_frequency(),
        max_frequency_3d: s3.max_firing_frequency(),
        reference_reported: ReferenceClaims::default(),
    })
}
