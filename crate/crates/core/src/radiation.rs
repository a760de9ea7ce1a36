//! Radiation fields on the edges `{ν = 0}` (forward) and `{μ = 0}`
//! (backward), vanishing thresholds, and support-theorem reports.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::goursat::{ModeSolution, MIN_CELLS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldSample {
    /// Edge coordinate: `μ` on the forward edge, `ν` on the backward one.
    pub coord: f64,
    pub s: f64,
    pub value: f64,
}

/// `∂_s` of the rescaled solution at `x = 0`, sampled at the edge nodes
/// clear of the pinned corner.
#[derive(Debug, Clone, PartialEq)]
pub struct RadiationField {
    pub direction: Direction,
    pub mode_k: usize,
    pub h: f64,
    pub t_max: f64,
    pub samples: Vec<FieldSample>,
}

impl RadiationField {
    pub fn max_abs(&self) -> f64 {
        self.samples.iter().map(|p| p.value.abs()).fold(0.0, f64::max)
    }
}

/// Forward: `μ²∂_μ w(μ, 0)` at `s = −1/μ`. Backward: `−ν²∂_ν w(0, ν)` at
/// `s = 1/ν`. Both are the real derivative `∂_s`. Central differences inside,
/// a second-order one-sided stencil at `T`.
pub fn extract_field(sol: &ModeSolution, direction: Direction, mode_k: usize) -> Result<RadiationField> {
    let grid = sol.grid;
    let n = grid.cells();
    if n < MIN_CELLS {
        return Err(Error::InvalidGrid(format!("N = {n} is too coarse for edge stencils")));
    }
    let h = grid.h();
    let edge: Vec<f64> = match direction {
        Direction::Forward => (0..=n).map(|i| sol.at(i, 0)).collect(),
        Direction::Backward => (0..=n).map(|j| sol.at(0, j)).collect(),
    };
    let samples = (1..=n)
        .filter(|&i| !grid.pinned(i, 0))
        .map(|i| {
            let d = if i < n {
                (edge[i + 1] - edge[i - 1]) / (2.0 * h)
            } else {
                (3.0 * edge[n] - 4.0 * edge[n - 1] + edge[n - 2]) / (2.0 * h)
            };
            let c = grid.node(i);
            match direction {
                Direction::Forward => FieldSample { coord: c, s: -1.0 / c, value: c * c * d },
                Direction::Backward => FieldSample { coord: c, s: 1.0 / c, value: -c * c * d },
            }
        })
        .collect();
    Ok(RadiationField { direction, mode_k, h, t_max: grid.t_max(), samples })
}

/// Rows `s,mu,mode_k,value`; the `mu` column carries the edge coordinate.
pub fn write_fields_csv<W: Write>(fields: &[RadiationField], out: &mut W) -> std::io::Result<()> {
    writeln!(out, "s,mu,mode_k,value")?;
    for f in fields {
        for p in &f.samples {
            writeln!(out, "{:.16e},{:.16e},{},{:.16e}", p.s, p.coord, f.mode_k, p.value)?;
        }
    }
    Ok(())
}

/// Samples in a row that must exceed the tolerance to mark the onset.
const ONSET_RUN: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub mu_star: f64,
    /// Uncertainty of `mu_star`, one grid step.
    pub h: f64,
    pub vanishes_identically: bool,
}

/// Edge coordinate where the field switches on: the first sample that opens
/// a run of three samples above `tol·max|field|`. A field that never exceeds
/// the tolerance in such a run but is not zero falls back to its first
/// sample above tolerance.
pub fn support_threshold(field: &RadiationField, tol: f64) -> Threshold {
    let peak = field.max_abs();
    if peak == 0.0 {
        return Threshold { mu_star: field.t_max, h: field.h, vanishes_identically: true };
    }
    let above: Vec<bool> = field.samples.iter().map(|p| p.value.abs() > tol * peak).collect();
    let start = above
        .windows(ONSET_RUN)
        .position(|w| w.iter().all(|&b| b))
        .or_else(|| above.iter().position(|&b| b))
        .unwrap_or(0);
    Threshold { mu_star: field.samples[start].coord, h: field.h, vanishes_identically: false }
}

/// Earliest onset over several modes; the combined field vanishes only if
/// every mode does.
pub fn combine_thresholds(parts: &[Threshold]) -> Option<Threshold> {
    let live: Vec<&Threshold> = parts.iter().filter(|t| !t.vanishes_identically).collect();
    if live.is_empty() {
        return parts.first().copied();
    }
    live.into_iter().copied().min_by(|a, b| a.mu_star.total_cmp(&b.mu_star))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    TriviallyConsistent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportVerdict {
    /// `inf{x : f ≠ 0}` from the data specification; `None` for zero data.
    pub x1: Option<f64>,
    pub mu_star: f64,
    pub h: f64,
    /// Finite speed: `μ* ≥ x₁ − h`.
    pub forward_ok: bool,
    /// Support theorem: `μ* ≤ x₁ + c·h`.
    pub converse_ok: bool,
    pub verdict: Verdict,
}

pub fn judge_support(x1: Option<f64>, threshold: &Threshold, c_report: f64) -> SupportVerdict {
    let h = threshold.h;
    match x1 {
        None => SupportVerdict {
            x1,
            mu_star: threshold.mu_star,
            h,
            forward_ok: true,
            converse_ok: true,
            verdict: if threshold.vanishes_identically { Verdict::TriviallyConsistent } else { Verdict::Fail },
        },
        Some(x1) => {
            let forward_ok = threshold.mu_star >= x1 - h * (1.0 + 1e-9);
            let converse_ok = !threshold.vanishes_identically && threshold.mu_star <= x1 + c_report * h * (1.0 + 1e-9);
            SupportVerdict {
                x1: Some(x1),
                mu_star: threshold.mu_star,
                h,
                forward_ok,
                converse_ok,
                verdict: if forward_ok && converse_ok { Verdict::Pass } else { Verdict::Fail },
            }
        }
    }
}

/// `max |backward(ν) − forward(μ = ν)|` relative to the forward peak. For
/// data odd in time the two edges carry the same `∂_s` profile.
pub fn odd_symmetry_defect(forward: &RadiationField, backward: &RadiationField) -> f64 {
    let peak = forward.max_abs().max(backward.max_abs());
    if peak == 0.0 {
        return 0.0;
    }
    forward
        .samples
        .iter()
        .zip(&backward.samples)
        .map(|(f, b)| (f.value - b.value).abs())
        .fold(0.0, f64::max)
        / peak
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeVanishing {
    /// `max |w(μ, 0)|` for `μ < μ* − h`, relative to the edge maximum.
    pub value: f64,
    /// Same for `|∂_ν w(μ, 0)|`.
    pub normal_derivative: f64,
    pub pass: bool,
}

/// Before the field switches on, the solution and its normal derivative
/// must vanish on the forward edge.
pub fn edge_vanishing(sol: &ModeSolution, threshold: &Threshold, tol: f64) -> EdgeVanishing {
    let grid = sol.grid;
    let n = grid.cells();
    let h = grid.h();
    let normal = |i: usize| (-3.0 * sol.at(i, 0) + 4.0 * sol.at(i, 1) - sol.at(i, 2)) / (2.0 * h);
    let vmax = (0..=n).map(|i| sol.at(i, 0).abs()).fold(0.0, f64::max);
    let dmax = (0..=n).map(|i| normal(i).abs()).fold(0.0, f64::max);
    let mut value: f64 = 0.0;
    let mut normal_derivative: f64 = 0.0;
    for i in 0..=n {
        if grid.node(i) >= threshold.mu_star - h {
            break;
        }
        value = value.max(sol.at(i, 0).abs());
        normal_derivative = normal_derivative.max(normal(i).abs());
    }
    let rel = |v: f64, m: f64| if m == 0.0 { 0.0 } else { v / m };
    let (value, normal_derivative) = (rel(value, vmax), rel(normal_derivative, dmax));
    EdgeVanishing { value, normal_derivative, pass: value <= tol && normal_derivative <= tol }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(values: &[f64], h: f64) -> RadiationField {
        RadiationField {
            direction: Direction::Forward,
            mode_k: 1,
            h,
            t_max: h * values.len() as f64,
            samples: values
                .iter()
                .enumerate()
                .map(|(i, &v)| {
                    let c = h * (i + 1) as f64;
                    FieldSample { coord: c, s: -1.0 / c, value: v }
                })
                .collect(),
        }
    }

    #[test]
    fn zero_field_flags_vanishing() {
        let t = support_threshold(&field(&[0.0; 20], 0.05), 1e-8);
        assert!(t.vanishes_identically);
        assert_eq!(t.mu_star, 1.0);
        let v = judge_support(None, &t, 2.0);
        assert_eq!(v.verdict, Verdict::TriviallyConsistent);
    }

    #[test]
    fn ramp_threshold() {
        let h = 0.01;
        let vals: Vec<f64> = (1..=100).map(|i| (h * i as f64 - 0.3).max(0.0)).collect();
        let t = support_threshold(&field(&vals, h), 1e-8);
        assert!((t.mu_star - 0.3).abs() <= h + 1e-12);
        assert_eq!(judge_support(Some(0.3), &t, 2.0).verdict, Verdict::Pass);
        assert_eq!(judge_support(Some(0.5), &t, 2.0).verdict, Verdict::Fail);
    }

    #[test]
    fn isolated_spike_is_not_an_onset() {
        let mut vals = vec![0.0; 50];
        vals[5] = 1.0;
        for v in vals.iter_mut().skip(30) {
            *v = 1.0;
        }
        let t = support_threshold(&field(&vals, 0.02), 1e-8);
        assert!((t.mu_star - 0.62).abs() < 1e-12);
    }
}
