//! Inequality of a score population: Gini coefficient and Lorenz curve.

use std::cmp::Ordering;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum BiasError {
    #[error("score population is empty")]
    Empty,
    #[error("all scores are zero; inequality is undefined")]
    ZeroMass,
    #[error("score {index} is negative or not finite ({value})")]
    InvalidScore { index: usize, value: f64 },
    #[error("lorenz resolution must be at least 2, got {0}")]
    BadResolution(usize),
}

/// Neumaier-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

fn validated_sorted(scores: &[f64]) -> Result<Vec<f64>, BiasError> {
    if scores.is_empty() {
        return Err(BiasError::Empty);
    }
    if let Some((index, &value)) = scores.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
        return Err(BiasError::InvalidScore { index, value });
    }
    let mut sorted = scores.to_vec();
    // Stable ascending sort; equal scores keep ordinal order.
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    Ok(sorted)
}

/// `G = sum_i (2i - N - 1) x_(i) / (N sum_j x_j)` over scores sorted
/// ascending, with 1-based `i`.
pub fn gini(scores: &[f64]) -> Result<f64, BiasError> {
    let sorted = validated_sorted(scores)?;
    let n = sorted.len() as f64;
    let mut num = CompensatedSum::default();
    let mut total = CompensatedSum::default();
    for (i, &x) in sorted.iter().enumerate() {
        let rank = (i + 1) as f64;
        num.add((2.0 * rank - n - 1.0) * x);
        total.add(x);
    }
    let total = total.value();
    if total == 0.0 {
        return Err(BiasError::ZeroMass);
    }
    Ok(num.value() / (n * total))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LorenzPoint {
    pub population_fraction: f64,
    pub cumulative_share: f64,
}

/// Cumulative share of total score held by the lowest fraction of documents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LorenzSeries {
    pub points: Vec<LorenzPoint>,
}

impl LorenzSeries {
    /// Trapezoid-rule area under the curve.
    pub fn area(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| {
                (w[1].population_fraction - w[0].population_fraction)
                    * (w[0].cumulative_share + w[1].cumulative_share)
                    / 2.0
            })
            .sum()
    }

    /// `1 - 2 * area`, the Gini estimate implied by the sampled curve.
    pub fn implied_gini(&self) -> f64 {
        1.0 - 2.0 * self.area()
    }

    pub fn write_csv(&self, out: impl Write) -> io::Result<()> {
        let mut w = io::BufWriter::new(out);
        writeln!(w, "population_fraction,cumulative_share")?;
        for p in &self.points {
            writeln!(w, "{},{}", p.population_fraction, p.cumulative_share)?;
        }
        w.flush()
    }
}

/// Samples the Lorenz curve at `resolution` evenly spaced population
/// fractions `1/resolution, ..., 1`, preceded by `(0, 0)`. Between document
/// boundaries the curve is linearly interpolated.
pub fn lorenz(scores: &[f64], resolution: usize) -> Result<LorenzSeries, BiasError> {
    if resolution < 2 {
        return Err(BiasError::BadResolution(resolution));
    }
    let sorted = validated_sorted(scores)?;
    let n = sorted.len();
    let mut cumulative = Vec::with_capacity(n + 1);
    let mut acc = CompensatedSum::default();
    cumulative.push(0.0);
    for &x in &sorted {
        acc.add(x);
        cumulative.push(acc.value());
    }
    let total = cumulative[n];
    if total == 0.0 {
        return Err(BiasError::ZeroMass);
    }
    let mut points = Vec::with_capacity(resolution + 1);
    points.push(LorenzPoint {
        population_fraction: 0.0,
        cumulative_share: 0.0,
    });
    for step in 1..=resolution {
        let fraction = step as f64 / resolution as f64;
        let share = if step == resolution {
            1.0
        } else {
            let pos = fraction * n as f64;
            let lo = pos.floor() as usize;
            let frac = pos - lo as f64;
            let lower = cumulative[lo];
            let value = if frac > 0.0 && lo < n {
                lower + frac * (cumulative[lo + 1] - lower)
            } else {
                lower
            };
            (value / total).clamp(0.0, 1.0)
        };
        points.push(LorenzPoint {
            population_fraction: fraction,
            cumulative_share: share,
        });
    }
    Ok(LorenzSeries { points })
}
