//! Sampled solutions on a fixed time level and their CSV form.

use std::fmt;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::invariants::{concentrations_for, ConcentrationPair, InvariantPair, MixtureParams};
use crate::wavefield::ZoneId;

pub const CSV_HEADER: &str = "x,R1,R2,u1,u2,zone";

/// Origin of a sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Tag {
    Zone(ZoneId),
    /// Finite-volume cell average.
    Fv,
    /// Level-line march of the general Cauchy method.
    March,
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tag::Zone(z) => write!(f, "{z}"),
            Tag::Fv => f.write_str("fv"),
            Tag::March => f.write_str("march"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample {
    pub x: f64,
    pub r: InvariantPair,
    pub u: ConcentrationPair,
    pub tag: Tag,
}

impl Sample {
    pub fn new(p: &MixtureParams, x: f64, r: InvariantPair, tag: Tag) -> Result<Self> {
        Ok(Self {
            x,
            r,
            u: concentrations_for(p.mu1, p.mu2, r)?,
            tag,
        })
    }

    pub fn with_mobilities(mu: (f64, f64), x: f64, r: InvariantPair, tag: Tag) -> Result<Self> {
        Ok(Self {
            x,
            r,
            u: concentrations_for(mu.0, mu.1, r)?,
            tag,
        })
    }
}

/// Samples along `t = t_star`, ordered by `x`. Within one tag run `x` is
/// strictly increasing; a shock appears as two samples with equal `x`.
#[derive(Clone, Debug, PartialEq)]
pub struct Profile {
    pub t_star: f64,
    pub samples: Vec<Sample>,
}

impl Profile {
    pub fn new(t_star: f64, samples: Vec<Sample>) -> Self {
        Self { t_star, samples }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn x_range(&self) -> Option<(f64, f64)> {
        Some((self.samples.first()?.x, self.samples.last()?.x))
    }

    /// Trapezoid integrals of `u1` and `u2` over the sampled range.
    pub fn masses(&self) -> [f64; 2] {
        self.samples.windows(2).fold([0.0, 0.0], |acc, w| {
            let dx = w[1].x - w[0].x;
            [
                acc[0] + 0.5 * dx * (w[0].u.u1 + w[1].u.u1),
                acc[1] + 0.5 * dx * (w[0].u.u2 + w[1].u.u2),
            ]
        })
    }

    /// Linear interpolation at `x`. On a zero-width panel (a jump) the right
    /// state is returned.
    pub fn sample_at(&self, x: f64) -> Option<(InvariantPair, ConcentrationPair)> {
        let s = &self.samples;
        let (first, last) = (s.first()?, s.last()?);
        if x < first.x || x > last.x {
            return None;
        }
        let i = s.partition_point(|p| p.x <= x);
        if i == 0 {
            return Some((first.r, first.u));
        }
        if i == s.len() {
            return Some((last.r, last.u));
        }
        let (a, b) = (&s[i - 1], &s[i]);
        let w = (x - a.x) / (b.x - a.x);
        let lerp = |p: f64, q: f64| p + w * (q - p);
        Some((
            InvariantPair::new(lerp(a.r.r1, b.r.r1), lerp(a.r.r2, b.r.r2)),
            ConcentrationPair::new(lerp(a.u.u1, b.u.u1), lerp(a.u.u2, b.u.u2)),
        ))
    }

    /// Positions where the tag changes, i.e. zone boundaries.
    pub fn boundaries(&self) -> Vec<f64> {
        self.samples
            .windows(2)
            .filter(|w| w[0].tag != w[1].tag)
            .map(|w| 0.5 * (w[0].x + w[1].x))
            .collect()
    }

    /// Checks the ordering contract.
    pub fn check_order(&self) -> Result<()> {
        for w in self.samples.windows(2) {
            let ok = if w[0].tag == w[1].tag {
                w[1].x > w[0].x
            } else {
                w[1].x >= w[0].x
            };
            if !ok {
                return Err(Error::NonMonotoneParametrization { at: w[1].x });
            }
        }
        Ok(())
    }

    /// Shortest round-trip decimal per value; negative zero is written as `0`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        for s in &self.samples {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                s.x + 0.0,
                s.r.r1 + 0.0,
                s.r.r2 + 0.0,
                s.u.u1 + 0.0,
                s.u.u2 + 0.0,
                s.tag
            )?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv is ascii")
    }
}

/// `n` equally spaced points on `[a, b]`, endpoints included.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n)
            .map(|i| {
                if i + 1 == n {
                    b
                } else {
                    a + (b - a) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(p: &MixtureParams) -> Profile {
        let r = InvariantPair::new(p.q1, p.q2);
        let samples = linspace(p.x1, p.x2, 11)
            .into_iter()
            .map(|x| Sample::new(p, x, r, Tag::Zone(ZoneId::Z4)).unwrap())
            .collect();
        Profile::new(0.0, samples)
    }

    #[test]
    fn masses_of_plateau() {
        let p = MixtureParams::reference();
        let m = flat(&p).masses();
        assert!((m[0] - 4.0).abs() < 1e-13);
        assert!((m[1] + 2.0).abs() < 1e-13);
    }

    #[test]
    fn csv_header_and_rows() {
        let p = MixtureParams::reference();
        let csv = flat(&p).to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        assert_eq!(lines.next(), Some("-1,2,10,2,-1,Z4"));
        assert_eq!(csv.lines().count(), 12);
    }

    #[test]
    fn interpolation_and_jumps() {
        let p = MixtureParams::reference();
        let a = InvariantPair::new(p.mu1, p.mu2);
        let b = InvariantPair::new(p.q1, p.mu2);
        let s = vec![
            Sample::new(&p, 0.0, a, Tag::Zone(ZoneId::Z1)).unwrap(),
            Sample::new(&p, 1.0, a, Tag::Zone(ZoneId::Z1)).unwrap(),
            Sample::new(&p, 1.0, b, Tag::Zone(ZoneId::Z2)).unwrap(),
            Sample::new(&p, 2.0, b, Tag::Zone(ZoneId::Z2)).unwrap(),
        ];
        let prof = Profile::new(0.1, s);
        prof.check_order().unwrap();
        assert_eq!(prof.sample_at(0.5).unwrap().0, a);
        assert_eq!(prof.sample_at(1.0).unwrap().0, b);
        assert!(prof.sample_at(2.5).is_none());
        assert_eq!(prof.boundaries(), vec![1.0]);
    }

    #[test]
    fn linspace_endpoints() {
        let v = linspace(0.1, 0.7, 7);
        assert_eq!(v[0], 0.1);
        assert_eq!(v[6], 0.7);
        assert_eq!(linspace(1.0, 2.0, 1), vec![1.0]);
    }
}
