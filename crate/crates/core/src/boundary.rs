//! Spectra of the boundary Laplacian and projection of boundary-dependent
//! data onto its eigenfunctions.
//!
//! Modes are indexed by distinct eigenvalue, `k = 1` being `λ = 0`; each of
//! the `multiplicity` eigenfunctions sharing an eigenvalue is a *branch*.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;

/// Relative gap under which two eigenvalues are treated as equal.
const EIGEN_GROUPING: f64 = 1e-9;

/// Highest spherical-harmonic degree offered for synthesis.
pub const MAX_SPHERE_DEGREE: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub k: usize,
    pub lambda: f64,
    pub multiplicity: usize,
}

/// One eigenfunction sampled on the boundary grid.
#[derive(Debug, Clone)]
pub struct BasisFunction {
    pub lambda: f64,
    pub label: String,
    pub values: Vec<f64>,
}

/// Boundary quadrature grid with its orthonormal eigenbasis.
#[derive(Debug, Clone)]
pub struct Synthesis {
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub basis: Vec<BasisFunction>,
}

/// Radial profile of one eigenfunction branch.
#[derive(Debug, Clone)]
pub struct ProjectedMode {
    pub k: usize,
    pub lambda: f64,
    pub branch: usize,
    pub label: String,
    pub values: Vec<f64>,
}

pub trait BoundaryModel: Send + Sync + fmt::Debug {
    fn kind(&self) -> &'static str;

    /// Eigenvalues `≤ lambda_max`, repeated by multiplicity, ascending.
    fn eigenvalues(&self, lambda_max: f64) -> Vec<f64>;

    /// Boundary grid and eigenbasis up to `lambda_max`, ordered like
    /// [`BoundaryModel::eigenvalues`].
    fn synthesis(&self, lambda_max: f64) -> Result<Synthesis>;
}

/// Distinct eigenvalues up to `lambda_max` with multiplicities.
pub fn enumerate_modes(model: &dyn BoundaryModel, lambda_max: f64) -> Vec<Mode> {
    group_modes(&model.eigenvalues(lambda_max.max(0.0)))
}

fn group_modes(sorted: &[f64]) -> Vec<Mode> {
    let mut modes: Vec<Mode> = Vec::new();
    for &lambda in sorted {
        match modes.last_mut() {
            Some(m) if same_eigenvalue(m.lambda, lambda) => m.multiplicity += 1,
            _ => modes.push(Mode { k: modes.len() + 1, lambda, multiplicity: 1 }),
        }
    }
    modes
}

fn same_eigenvalue(a: f64, b: f64) -> bool {
    (a - b).abs() <= EIGEN_GROUPING * a.abs().max(b.abs()).max(1.0)
}

/// `⟨f(x_i, ·), φ_j⟩` for every radial node `i` and basis branch `j`.
///
/// `samples[i][p]` is the value at radial node `i` and boundary point `p`.
pub fn project_data(model: &dyn BoundaryModel, samples: &[Vec<f64>], lambda_max: f64) -> Result<Vec<ProjectedMode>> {
    let syn = model.synthesis(lambda_max)?;
    let npts = syn.weights.len();
    if let Some((i, row)) = samples.iter().enumerate().find(|(_, r)| r.len() != npts) {
        return Err(Error::InvalidBoundary(format!(
            "radial node {i} has {} boundary samples, the {} grid has {npts}",
            row.len(),
            model.kind()
        )));
    }
    let modes = group_modes(&syn.basis.iter().map(|b| b.lambda).collect::<Vec<_>>());
    let mut out = Vec::with_capacity(syn.basis.len());
    let mut idx = 0;
    for m in &modes {
        for branch in 0..m.multiplicity {
            let b = &syn.basis[idx];
            idx += 1;
            let values = samples
                .iter()
                .map(|row| row.iter().zip(&b.values).zip(&syn.weights).map(|((f, e), w)| f * e * w).sum())
                .collect();
            out.push(ProjectedMode { k: m.k, lambda: m.lambda, branch, label: b.label.clone(), values });
        }
    }
    Ok(out)
}

/// Boundary-grid `L²` norm squared of one radial slice.
pub fn grid_norm_sq(syn: &Synthesis, slice: &[f64]) -> f64 {
    slice.iter().zip(&syn.weights).map(|(f, w)| w * f * f).sum()
}

/// Flat torus `∏ ℝ/L_jℤ` with the real tensor Fourier basis.
#[derive(Debug, Clone)]
pub struct FlatTorus {
    sides: Vec<f64>,
    points: Vec<usize>,
}

impl FlatTorus {
    pub fn new(sides: Vec<f64>, points: Vec<usize>) -> Result<Self> {
        if sides.is_empty() {
            return Err(Error::InvalidBoundary("flat torus needs at least one side length".into()));
        }
        if sides.iter().any(|&l| !(l.is_finite() && l > 0.0)) {
            return Err(Error::InvalidBoundary("torus side lengths must be positive".into()));
        }
        if points.len() != sides.len() {
            return Err(Error::InvalidBoundary(format!(
                "torus has {} sides but {} grid sizes",
                sides.len(),
                points.len()
            )));
        }
        if points.iter().any(|&p| p < 2) {
            return Err(Error::InvalidBoundary("torus grid needs at least 2 points per side".into()));
        }
        Ok(FlatTorus { sides, points })
    }

    /// 1D factors: (frequency m, trig kind) with eigenvalue `(2πm/L)²`.
    fn factors(&self, dim: usize, lambda_max: f64) -> Vec<(usize, Trig, f64)> {
        let l = self.sides[dim];
        let mut out = vec![(0, Trig::Const, 0.0)];
        let mut m = 1;
        loop {
            let lam = (2.0 * PI * m as f64 / l).powi(2);
            if lam > lambda_max * (1.0 + EIGEN_GROUPING) {
                break;
            }
            out.push((m, Trig::Cos, lam));
            out.push((m, Trig::Sin, lam));
            m += 1;
        }
        out
    }

    fn tensor(&self, lambda_max: f64) -> Vec<(Vec<(usize, Trig)>, f64)> {
        let mut acc: Vec<(Vec<(usize, Trig)>, f64)> = vec![(Vec::new(), 0.0)];
        for dim in 0..self.sides.len() {
            let f = self.factors(dim, lambda_max);
            let mut next = Vec::new();
            for (idx, lam) in &acc {
                for &(m, trig, l1) in &f {
                    let total = lam + l1;
                    if total <= lambda_max * (1.0 + EIGEN_GROUPING) {
                        let mut i = idx.clone();
                        i.push((m, trig));
                        next.push((i, total));
                    }
                }
            }
            acc = next;
        }
        acc.sort_by(|a, b| a.1.total_cmp(&b.1));
        acc
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Trig {
    Const,
    Cos,
    Sin,
}

impl BoundaryModel for FlatTorus {
    fn kind(&self) -> &'static str {
        "flat-torus"
    }

    fn eigenvalues(&self, lambda_max: f64) -> Vec<f64> {
        self.tensor(lambda_max).into_iter().map(|(_, l)| l).collect()
    }

    fn synthesis(&self, lambda_max: f64) -> Result<Synthesis> {
        let modes = self.tensor(lambda_max);
        for (dim, &p) in self.points.iter().enumerate() {
            let top = modes.iter().flat_map(|(i, _)| i.get(dim).map(|x| x.0)).max().unwrap_or(0);
            if 2 * top >= p {
                return Err(Error::InvalidBoundary(format!(
                    "torus grid with {p} points along side {dim} cannot resolve frequency {top}"
                )));
            }
        }
        let mut points = vec![Vec::new()];
        for (dim, &p) in self.points.iter().enumerate() {
            let l = self.sides[dim];
            points = points
                .into_iter()
                .flat_map(|prefix: Vec<f64>| {
                    (0..p).map(move |j| {
                        let mut q = prefix.clone();
                        q.push(l * j as f64 / p as f64);
                        q
                    })
                })
                .collect();
        }
        let cell: f64 = self.sides.iter().zip(&self.points).map(|(l, &p)| l / p as f64).product();
        let weights = vec![cell; points.len()];
        let basis = modes
            .into_iter()
            .map(|(index, lambda)| {
                let label = index
                    .iter()
                    .map(|(m, t)| match t {
                        Trig::Const => "1".to_string(),
                        Trig::Cos => format!("cos{m}"),
                        Trig::Sin => format!("sin{m}"),
                    })
                    .collect::<Vec<_>>()
                    .join("*");
                let values = points
                    .iter()
                    .map(|y| {
                        index
                            .iter()
                            .enumerate()
                            .map(|(dim, &(m, t))| {
                                let l = self.sides[dim];
                                let arg = 2.0 * PI * m as f64 * y[dim] / l;
                                match t {
                                    Trig::Const => 1.0 / l.sqrt(),
                                    Trig::Cos => (2.0 / l).sqrt() * arg.cos(),
                                    Trig::Sin => (2.0 / l).sqrt() * arg.sin(),
                                }
                            })
                            .product()
                    })
                    .collect();
                BasisFunction { lambda, label, values }
            })
            .collect();
        Ok(Synthesis { points, weights, basis })
    }
}

/// Unit round sphere `S²` with real spherical harmonics.
#[derive(Debug, Clone)]
pub struct RoundSphere {
    n_theta: usize,
    n_phi: usize,
}

impl RoundSphere {
    pub fn new(n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_theta < 1 || n_phi < 1 {
            return Err(Error::InvalidBoundary("sphere grid needs positive point counts".into()));
        }
        Ok(RoundSphere { n_theta, n_phi })
    }

    fn max_degree(lambda_max: f64) -> usize {
        let mut l = 0;
        while ((l + 1) * (l + 2)) as f64 <= lambda_max * (1.0 + EIGEN_GROUPING) {
            l += 1;
        }
        l
    }
}

/// Associated Legendre functions normalised to unit `L²(-1, 1)` norm,
/// `out[l][m]` for `0 ≤ m ≤ l ≤ lmax`.
fn normalized_legendre(lmax: usize, x: f64) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = (0..=lmax).map(|l| vec![0.0; l + 1]).collect();
    let s = (1.0 - x * x).max(0.0).sqrt();
    let mut pmm = std::f64::consts::FRAC_1_SQRT_2;
    for m in 0..=lmax {
        if m > 0 {
            let mf = m as f64;
            pmm *= -((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * s;
        }
        out[m][m] = pmm;
        if m < lmax {
            out[m + 1][m] = (2.0 * m as f64 + 3.0).sqrt() * x * pmm;
        }
        for l in (m + 2)..=lmax {
            let (lf, mf) = (l as f64, m as f64);
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0).powi(2) - mf * mf) / (4.0 * (lf - 1.0).powi(2) - 1.0)).sqrt();
            out[l][m] = a * (x * out[l - 1][m] - b * out[l - 2][m]);
        }
    }
    out
}

impl BoundaryModel for RoundSphere {
    fn kind(&self) -> &'static str {
        "round-sphere-2"
    }

    fn eigenvalues(&self, lambda_max: f64) -> Vec<f64> {
        let lmax = Self::max_degree(lambda_max);
        (0..=lmax).flat_map(|l| std::iter::repeat_n((l * (l + 1)) as f64, 2 * l + 1)).collect()
    }

    fn synthesis(&self, lambda_max: f64) -> Result<Synthesis> {
        let lmax = Self::max_degree(lambda_max);
        if lmax > MAX_SPHERE_DEGREE {
            return Err(Error::InvalidBoundary(format!(
                "sphere synthesis is limited to degree {MAX_SPHERE_DEGREE}, lambda_max asks for {lmax}"
            )));
        }
        if self.n_theta <= lmax || self.n_phi <= 2 * lmax {
            return Err(Error::InvalidBoundary(format!(
                "sphere grid {}x{} cannot resolve degree {lmax}",
                self.n_theta, self.n_phi
            )));
        }
        let gl = GaussLegendre::new(self.n_theta);
        let dphi = 2.0 * PI / self.n_phi as f64;
        let mut points = Vec::new();
        let mut weights = Vec::new();
        let mut legendre = Vec::new();
        for (&x, &wx) in gl.nodes().iter().zip(gl.weights()) {
            let table = normalized_legendre(lmax, x);
            for j in 0..self.n_phi {
                points.push(vec![x.acos(), dphi * j as f64]);
                weights.push(wx * dphi);
                legendre.push(table.clone());
            }
        }
        let mut basis = Vec::new();
        for l in 0..=lmax {
            let lambda = (l * (l + 1)) as f64;
            for signed in -(l as i64)..=(l as i64) {
                let m = signed.unsigned_abs() as usize;
                let values = points
                    .iter()
                    .zip(&legendre)
                    .map(|(p, tab)| {
                        let q = tab[l][m];
                        match signed.cmp(&0) {
                            std::cmp::Ordering::Equal => q / (2.0 * PI).sqrt(),
                            std::cmp::Ordering::Greater => q * (m as f64 * p[1]).cos() / PI.sqrt(),
                            std::cmp::Ordering::Less => q * (m as f64 * p[1]).sin() / PI.sqrt(),
                        }
                    })
                    .collect();
                basis.push(BasisFunction { lambda, label: format!("Y{l},{signed}"), values });
            }
        }
        Ok(Synthesis { points, weights, basis })
    }
}

/// A boundary known only through its spectrum.
#[derive(Debug, Clone)]
pub struct EigenvalueList {
    sorted: Vec<f64>,
}

impl EigenvalueList {
    pub fn new(mut eigenvalues: Vec<f64>) -> Result<Self> {
        if eigenvalues.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
            return Err(Error::InvalidBoundary("eigenvalues must be finite and nonnegative".into()));
        }
        eigenvalues.sort_by(f64::total_cmp);
        if eigenvalues.first() != Some(&0.0) {
            return Err(Error::InvalidBoundary("eigenvalue list must contain 0 (the constants)".into()));
        }
        if eigenvalues.get(1) == Some(&0.0) {
            return Err(Error::InvalidBoundary("0 must be a simple eigenvalue of a connected boundary".into()));
        }
        Ok(EigenvalueList { sorted: eigenvalues })
    }
}

impl BoundaryModel for EigenvalueList {
    fn kind(&self) -> &'static str {
        "eigenvalue-list"
    }

    fn eigenvalues(&self, lambda_max: f64) -> Vec<f64> {
        self.sorted.iter().copied().filter(|&l| l <= lambda_max * (1.0 + EIGEN_GROUPING)).collect()
    }

    fn synthesis(&self, _lambda_max: f64) -> Result<Synthesis> {
        Err(Error::InvalidBoundary(
            "an eigenvalue list carries no eigenfunctions; data must be given per mode".into(),
        ))
    }
}

/// Boundary section of an experiment configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundarySpec {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub side_lengths: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eigenvalues: Option<Vec<f64>>,
    #[serde(default)]
    pub lambda_max: f64,
}

type Builder = fn(&BoundarySpec) -> Result<Box<dyn BoundaryModel>>;

/// Boundary models selectable by `kind`.
pub struct BoundaryRegistry {
    builders: BTreeMap<&'static str, Builder>,
}

impl BoundaryRegistry {
    pub fn empty() -> Self {
        BoundaryRegistry { builders: BTreeMap::new() }
    }

    pub fn register(&mut self, kind: &'static str, builder: Builder) {
        self.builders.insert(kind, builder);
    }

    pub fn kinds(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.builders.keys().copied()
    }

    pub fn build(&self, spec: &BoundarySpec) -> Result<Box<dyn BoundaryModel>> {
        if !(spec.lambda_max.is_finite() && spec.lambda_max >= 0.0) {
            return Err(Error::InvalidBoundary(format!("lambda_max = {} must be nonnegative", spec.lambda_max)));
        }
        let builder = self.builders.get(spec.kind.as_str()).ok_or_else(|| {
            Error::InvalidBoundary(format!(
                "unknown boundary kind {:?}; known kinds: {}",
                spec.kind,
                self.kinds().collect::<Vec<_>>().join(", ")
            ))
        })?;
        builder(spec)
    }
}

impl Default for BoundaryRegistry {
    fn default() -> Self {
        let mut r = BoundaryRegistry::empty();
        r.register("flat-torus", |s| {
            let sides = s
                .side_lengths
                .clone()
                .ok_or_else(|| Error::InvalidBoundary("flat-torus needs side_lengths".into()))?;
            let points = s.points.clone().unwrap_or_else(|| vec![64; sides.len()]);
            Ok(Box::new(FlatTorus::new(sides, points)?))
        });
        r.register("round-sphere-2", |s| {
            let (nt, np) = match s.points.as_deref() {
                None => (33, 66),
                Some([nt, np]) => (*nt, *np),
                Some(_) => return Err(Error::InvalidBoundary("round-sphere-2 points must be [n_theta, n_phi]".into())),
            };
            Ok(Box::new(RoundSphere::new(nt, np)?))
        });
        r.register("eigenvalue-list", |s| {
            let list = s
                .eigenvalues
                .clone()
                .ok_or_else(|| Error::InvalidBoundary("eigenvalue-list needs eigenvalues".into()))?;
            Ok(Box::new(EigenvalueList::new(list)?))
        });
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lambdas(modes: &[Mode]) -> Vec<(usize, f64, usize)> {
        modes.iter().map(|m| (m.k, m.lambda, m.multiplicity)).collect()
    }

    #[test]
    fn sphere_modes_up_to_six() {
        let s = RoundSphere::new(8, 16).unwrap();
        assert_eq!(lambdas(&enumerate_modes(&s, 6.0)), vec![(1, 0.0, 1), (2, 2.0, 3), (3, 6.0, 5)]);
    }

    #[test]
    fn circle_modes_up_to_four() {
        let t = FlatTorus::new(vec![2.0 * PI], vec![64]).unwrap();
        let m = enumerate_modes(&t, 4.0);
        assert_eq!(m.iter().map(|m| m.multiplicity).collect::<Vec<_>>(), vec![1, 2, 2]);
        for (got, want) in m.iter().zip([0.0, 1.0, 4.0]) {
            assert!((got.lambda - want).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_cutoff_keeps_constants() {
        let models: Vec<Box<dyn BoundaryModel>> = vec![
            Box::new(FlatTorus::new(vec![1.0, 2.0], vec![8, 8]).unwrap()),
            Box::new(RoundSphere::new(4, 8).unwrap()),
            Box::new(EigenvalueList::new(vec![3.0, 0.0, 1.0]).unwrap()),
        ];
        for m in &models {
            assert_eq!(lambdas(&enumerate_modes(m.as_ref(), 0.0)), vec![(1, 0.0, 1)]);
        }
    }

    fn assert_orthonormal(syn: &Synthesis) {
        for (i, a) in syn.basis.iter().enumerate() {
            for (j, b) in syn.basis.iter().enumerate() {
                let ip: f64 = a.values.iter().zip(&b.values).zip(&syn.weights).map(|((x, y), w)| x * y * w).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((ip - want).abs() < 1e-12, "{} vs {}: {ip}", a.label, b.label);
            }
        }
    }

    #[test]
    fn bases_are_orthonormal() {
        assert_orthonormal(&FlatTorus::new(vec![2.0 * PI, 3.0], vec![12, 10]).unwrap().synthesis(9.0).unwrap());
        assert_orthonormal(&RoundSphere::new(12, 24).unwrap().synthesis(90.0).unwrap());
    }

    #[test]
    fn eigenvalue_list_cannot_project() {
        let l = EigenvalueList::new(vec![0.0, 2.0]).unwrap();
        assert!(project_data(&l, &[vec![1.0]], 2.0).is_err());
        assert!(EigenvalueList::new(vec![1.0]).is_err());
    }

    #[test]
    fn registry_rejects_unknown_kind() {
        let spec = BoundarySpec {
            kind: "klein-bottle".into(),
            side_lengths: None,
            points: None,
            eigenvalues: None,
            lambda_max: 1.0,
        };
        let e = BoundaryRegistry::default().build(&spec).unwrap_err();
        assert!(e.to_string().contains("flat-torus"));
    }
}
