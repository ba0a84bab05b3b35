//! Walk strings: the computational basis of the spin-1 chain.
//!
//! Each site carries one of three states, read as a step of a lattice walk:
//! `0` (flat), `u` (up) and `d` (down). A string of length `n` is packed
//! into a base-3 integer with site 1 as the most significant digit and the
//! digit order `0 < u < d`, so numeric order of codes of equal length is the
//! lexicographic order of the step sequences.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Longest string that fits the packed base-3 code (`3^40 < 2^64`).
pub const MAX_PACKED_LEN: usize = 40;

/// Longest length for which classes are produced by scanning all `3^n` strings.
pub const ENUMERATION_CAP: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Step {
    Flat = 0,
    Up = 1,
    Down = 2,
}

impl Step {
    #[inline]
    pub fn from_digit(d: u8) -> Step {
        match d {
            0 => Step::Flat,
            1 => Step::Up,
            2 => Step::Down,
            _ => panic!("invalid base-3 digit {d}"),
        }
    }

    #[inline]
    pub fn digit(self) -> u8 {
        self as u8
    }

    #[inline]
    pub fn delta(self) -> i64 {
        match self {
            Step::Flat => 0,
            Step::Up => 1,
            Step::Down => -1,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Step::Flat => '0',
            Step::Up => 'u',
            Step::Down => 'd',
        }
    }

    pub fn from_char(c: char) -> Option<Step> {
        match c {
            '0' => Some(Step::Flat),
            'u' => Some(Step::Up),
            'd' => Some(Step::Down),
            _ => None,
        }
    }
}

/// `3^e` for `e <= 40`.
#[inline]
pub fn pow3(e: usize) -> u64 {
    debug_assert!(e <= MAX_PACKED_LEN);
    3u64.pow(e as u32)
}

/// Digit of `code` at 0-based site `i` (site 0 is leftmost).
#[inline]
pub fn digit_at(code: u64, len: usize, i: usize) -> u8 {
    ((code / pow3(len - 1 - i)) % 3) as u8
}

/// Unbalanced counts and doubled area of a packed string, in one pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WalkStats {
    pub imbalance: Imbalance,
    pub area2: u64,
}

/// Classify and measure a packed string without materializing it.
#[inline]
pub fn stats_of_code(code: u64, len: usize) -> WalkStats {
    let mut h: i64 = 0;
    let mut min: i64 = 0;
    // sum over steps of (h_{j-1} + h_j) on the raw profile
    let mut trap: i64 = 0;
    let mut place = if len == 0 { 0 } else { pow3(len - 1) };
    let mut rest = code;
    for _ in 0..len {
        let d = rest / place;
        rest %= place;
        place /= 3;
        let next = h + Step::from_digit(d as u8).delta();
        trap += h + next;
        h = next;
        if h < min {
            min = h;
        }
    }
    let area2 = trap - 2 * (len as i64) * min;
    WalkStats {
        imbalance: Imbalance {
            p: (-min) as usize,
            q: (h - min) as usize,
        },
        area2: area2 as u64,
    }
}

/// A string of steps, stored as a packed base-3 code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WalkString {
    len: u8,
    code: u64,
}

impl WalkString {
    pub fn from_steps(steps: &[Step]) -> Result<Self> {
        if steps.is_empty() || steps.len() > MAX_PACKED_LEN {
            return Err(Error::Resource {
                what: "walk length",
                value: steps.len(),
                limit: MAX_PACKED_LEN,
            });
        }
        let code = steps
            .iter()
            .fold(0u64, |acc, s| acc * 3 + u64::from(s.digit()));
        Ok(WalkString {
            len: steps.len() as u8,
            code,
        })
    }

    pub fn from_code(code: u64, len: usize) -> Result<Self> {
        if len == 0 || len > MAX_PACKED_LEN {
            return Err(Error::Resource {
                what: "walk length",
                value: len,
                limit: MAX_PACKED_LEN,
            });
        }
        if len < MAX_PACKED_LEN && code >= pow3(len) {
            return Err(Error::Domain(format!(
                "code {code} out of range for length {len}"
            )));
        }
        Ok(WalkString {
            len: len as u8,
            code,
        })
    }

    /// The representative `d^p 0^(n-p-q) u^q` of class `(p, q)`.
    pub fn representative(n: usize, p: usize, q: usize) -> Result<Self> {
        if p + q > n {
            return Err(Error::InvalidClass { n, p, q });
        }
        let steps: Vec<Step> = std::iter::repeat_n(Step::Down, p)
            .chain(std::iter::repeat_n(Step::Flat, n - p - q))
            .chain(std::iter::repeat_n(Step::Up, q))
            .collect();
        Self::from_steps(&steps)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len as usize
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn code(&self) -> u64 {
        self.code
    }

    #[inline]
    pub fn step(&self, i: usize) -> Step {
        Step::from_digit(digit_at(self.code, self.len(), i))
    }

    pub fn steps(&self) -> Vec<Step> {
        (0..self.len()).map(|i| self.step(i)).collect()
    }

    /// Raw height profile starting from height 0.
    pub fn heights(&self) -> HeightProfile {
        let mut heights = Vec::with_capacity(self.len() + 1);
        heights.push(0);
        let mut h = 0;
        for s in self.steps() {
            h += s.delta();
            heights.push(h);
        }
        HeightProfile { heights }
    }

    pub fn classify(&self) -> Imbalance {
        stats_of_code(self.code, self.len()).imbalance
    }

    pub fn area2(&self) -> AreaTwice {
        AreaTwice(stats_of_code(self.code, self.len()).area2)
    }

    /// All strings one local move away, with the signed change of area.
    ///
    /// Moves: `0u <-> u0`, `d0 <-> 0d`, `00 <-> ud`; the right-hand side of
    /// each pair has one more unit of area.
    pub fn local_move_neighbors(&self) -> Vec<(WalkString, i8)> {
        use Step::*;
        let n = self.len();
        let steps = self.steps();
        let mut out = Vec::new();
        for i in 0..n.saturating_sub(1) {
            let replaced = match (steps[i], steps[i + 1]) {
                (Flat, Up) => Some((Up, Flat, 1)),
                (Up, Flat) => Some((Flat, Up, -1)),
                (Down, Flat) => Some((Flat, Down, 1)),
                (Flat, Down) => Some((Down, Flat, -1)),
                (Flat, Flat) => Some((Up, Down, 1)),
                (Up, Down) => Some((Flat, Flat, -1)),
                _ => None,
            };
            if let Some((a, b, delta)) = replaced {
                let mut next = steps.clone();
                next[i] = a;
                next[i + 1] = b;
                out.push((
                    WalkString::from_steps(&next).expect("same length"),
                    delta,
                ));
            }
        }
        out
    }
}

impl fmt::Display for WalkString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in self.steps() {
            write!(f, "{}", s.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for WalkString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let steps = s
            .chars()
            .map(|c| {
                Step::from_char(c)
                    .ok_or_else(|| Error::Parse(format!("invalid step character {c:?} in {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        WalkString::from_steps(&steps)
    }
}

impl Serialize for WalkString {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for WalkString {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeightProfile {
    pub heights: Vec<i64>,
}

impl HeightProfile {
    /// Profile shifted so that its minimum is zero.
    pub fn minimized(&self) -> HeightProfile {
        let min = self.heights.iter().copied().min().unwrap_or(0);
        HeightProfile {
            heights: self.heights.iter().map(|h| h - min).collect(),
        }
    }
}

/// Number of unbalanced down steps `p` and unbalanced up steps `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Imbalance {
    pub p: usize,
    pub q: usize,
}

impl Imbalance {
    pub fn new(p: usize, q: usize) -> Self {
        Imbalance { p, q }
    }
}

impl fmt::Display for Imbalance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.p, self.q)
    }
}

/// Twice the area under the minimized walk, `sum_j (m_{j-1} + m_j)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AreaTwice(pub u64);

impl AreaTwice {
    pub fn area(self) -> f64 {
        self.0 as f64 / 2.0
    }
}

/// All `(p, q)` with `p + q <= n`, ordered by `p` then `q`.
pub fn all_classes(n: usize) -> impl Iterator<Item = Imbalance> {
    (0..=n).flat_map(move |p| (0..=n - p).map(move |q| Imbalance { p, q }))
}

/// Strings of length `n` in class `(p, q)`, in increasing code order.
///
/// Produced by scanning all `3^n` strings, so `n` is capped at [`ENUMERATION_CAP`].
pub fn enumerate_class(n: usize, p: usize, q: usize) -> Result<impl Iterator<Item = WalkString>> {
    check_enumerable(n)?;
    if p + q > n {
        return Err(Error::InvalidClass { n, p, q });
    }
    let target = Imbalance { p, q };
    Ok((0..pow3(n))
        .filter(move |&c| stats_of_code(c, n).imbalance == target)
        .map(move |c| WalkString {
            len: n as u8,
            code: c,
        }))
}

pub(crate) fn check_enumerable(n: usize) -> Result<()> {
    if n == 0 || n > ENUMERATION_CAP {
        return Err(Error::Resource {
            what: "enumeration length",
            value: n,
            limit: ENUMERATION_CAP,
        });
    }
    Ok(())
}
