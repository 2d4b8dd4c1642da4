//! Integer picosecond time base.
//!
//! Schedules and the tick-level engine are compared for exact equality, so
//! every timestamp and duration inside the simulator is a `u64` count of
//! picoseconds. Floating-point seconds exist only at the edges: timing
//! parameters are entered in seconds and reports derive seconds for display.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Sub};

use serde::{Deserialize, Serialize};

pub const PICOS_PER_SECOND: f64 = 1e12;

/// A point in time or a duration, in integer picoseconds.
#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct Picos(pub u64);

impl Picos {
    pub const ZERO: Picos = Picos(0);

    /// Converts seconds to picoseconds, rounding to the nearest integer.
    pub fn from_secs(seconds: f64) -> Picos {
        debug_assert!(seconds >= 0.0 && seconds.is_finite());
        Picos((seconds * PICOS_PER_SECOND).round() as u64)
    }

    pub fn as_secs(self) -> f64 {
        self.0 as f64 / PICOS_PER_SECOND
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// Engineering-style rendering for human output, e.g. `87.5 us`.
    pub fn display_si(self) -> String {
        let ps = self.0;
        if ps == 0 {
            return "0 s".to_string();
        }
        let (scale, unit) = if ps.is_multiple_of(1_000_000_000_000) {
            (1e12, "s")
        } else if ps >= 1_000_000_000_000 {
            return format!("{} s", ps as f64 / 1e12);
        } else if ps >= 1_000_000_000 {
            (1e9, "ms")
        } else if ps >= 1_000_000 {
            (1e6, "us")
        } else if ps >= 1_000 {
            (1e3, "ns")
        } else {
            (1.0, "ps")
        };
        format!("{} {}", ps as f64 / scale, unit)
    }
}

impl Add for Picos {
    type Output = Picos;
    fn add(self, rhs: Picos) -> Picos {
        Picos(self.0 + rhs.0)
    }
}

impl AddAssign for Picos {
    fn add_assign(&mut self, rhs: Picos) {
        self.0 += rhs.0;
    }
}

impl Sub for Picos {
    type Output = Picos;
    fn sub(self, rhs: Picos) -> Picos {
        Picos(self.0 - rhs.0)
    }
}

impl Mul<u64> for Picos {
    type Output = Picos;
    fn mul(self, rhs: u64) -> Picos {
        Picos(self.0 * rhs)
    }
}

impl Sum for Picos {
    fn sum<I: Iterator<Item = Picos>>(iter: I) -> Picos {
        iter.fold(Picos::ZERO, Add::add)
    }
}

impl fmt::Display for Picos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ps", self.0)
    }
}
