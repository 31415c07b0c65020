//! Random sensing matrices for compressed beam training.
//!
//! Each measurement column is the Kronecker product of two sub-array ULA
//! factors. Steering every sub-array into a window around a rough direction
//! estimate concentrates the captured energy in a declared cosine-angle
//! range; one sub-array per element recovers the omnidirectional
//! (fully random) limit.

use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::PI;

use crate::geometry::{kron, wrap_add, wrap_sub, AoaPair, UpaGeometry};
use crate::{Error, Result};

/// Parameters of a sensing matrix draw.
///
/// `n_subarrays` and `half_width` apply to both array axes; the sub-array
/// count must divide both axis lengths.
#[derive(Clone, Copy, Debug)]
pub struct SensingSpec {
    pub n_measurements: usize,
    pub n_subarrays: usize,
    pub half_width: f64,
    pub center: AoaPair,
    pub uav_geom: UpaGeometry,
}

impl SensingSpec {
    pub fn new(
        n_measurements: usize,
        n_subarrays: usize,
        half_width: f64,
        center: AoaPair,
        uav_geom: UpaGeometry,
    ) -> Result<Self> {
        if n_measurements == 0 {
            return Err(Error::Config("n_measurements must be at least 1".into()));
        }
        if n_subarrays == 0 {
            return Err(Error::Config("n_subarrays must be at least 1".into()));
        }
        if uav_geom.n_x % n_subarrays != 0 || uav_geom.n_second % n_subarrays != 0 {
            return Err(Error::Config(format!(
                "n_subarrays {} must divide both array axes {}x{}",
                n_subarrays, uav_geom.n_x, uav_geom.n_second
            )));
        }
        if !(half_width >= 0.0) {
            return Err(Error::Config(format!(
                "half_width {half_width} must be nonnegative"
            )));
        }
        Ok(Self {
            n_measurements,
            n_subarrays,
            half_width,
            center,
            uav_geom,
        })
    }

    /// Omnidirectional limit: one element per sub-array, no steering window.
    pub fn fully_random(n_measurements: usize, uav_geom: UpaGeometry) -> Result<Self> {
        Self::new(
            n_measurements,
            uav_geom.n_x,
            0.0,
            AoaPair::new(0.0, 0.0),
            uav_geom,
        )
    }

    pub fn is_fully_random(&self) -> bool {
        self.n_subarrays == self.uav_geom.n_x && self.n_subarrays == self.uav_geom.n_second
    }
}

/// Cosine-angle interval on the 2-periodic circle, stored as center and
/// half-width. Membership is wrapped; a half-width of 1 covers everything.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RangeInterval {
    pub center: f64,
    pub half_width: f64,
}

impl RangeInterval {
    pub fn new(center: f64, half_width: f64) -> Self {
        Self { center, half_width }
    }

    pub fn lo(&self) -> f64 {
        self.center - self.half_width
    }

    pub fn hi(&self) -> f64 {
        self.center + self.half_width
    }

    pub fn width(&self) -> f64 {
        2.0 * self.half_width
    }

    pub fn contains(&self, x: f64) -> bool {
        wrap_sub(x, self.center).abs() < self.half_width
    }

    pub fn is_full(&self) -> bool {
        self.half_width >= 1.0
    }
}

/// Sensing matrix in factored form: column n is
/// `x_factors[n] ⊗ y_factors[n]`, each factor a random sub-array ULA vector.
#[derive(Clone, Debug)]
pub struct SensingMatrix {
    pub x_factors: Vec<Vec<Complex64>>,
    pub y_factors: Vec<Vec<Complex64>>,
    pub range_x: RangeInterval,
    pub range_y: RangeInterval,
    pub spec: SensingSpec,
}

impl SensingMatrix {
    pub fn n_measurements(&self) -> usize {
        self.x_factors.len()
    }

    pub fn n_antennas(&self) -> usize {
        self.spec.uav_geom.n_total()
    }

    pub fn column(&self, n: usize) -> Vec<Complex64> {
        kron(&self.x_factors[n], &self.y_factors[n])
    }

    pub fn columns(&self) -> Vec<Vec<Complex64>> {
        (0..self.n_measurements()).map(|n| self.column(n)).collect()
    }
}

/// Uniform draw on [lo, up); one RNG consumption regardless of the bounds,
/// so empty windows (lo == up) keep the stream layout stable.
fn uniform_in(lo: f64, up: f64, rng: &mut impl Rng) -> f64 {
    lo + (up - lo) * rng.gen::<f64>()
}

/// One random sub-array ULA vector of length `n_axis`: the array is split
/// into `n_subarrays` contiguous blocks; block k gets one collective phase
/// φ_k ~ U(−1,1) (half-turns) and one steering center ζ_k ~ U(ζ_low, ζ_upp).
/// Unit norm by construction.
pub fn random_subarray_ula(
    rng: &mut impl Rng,
    n_axis: usize,
    n_subarrays: usize,
    zeta_low: f64,
    zeta_upp: f64,
) -> Result<Vec<Complex64>> {
    if n_subarrays == 0 || n_axis % n_subarrays != 0 {
        return Err(Error::Config(format!(
            "n_subarrays {n_subarrays} must divide the axis length {n_axis}"
        )));
    }
    if zeta_low > zeta_upp {
        return Err(Error::Config(format!(
            "steering window is inverted: ({zeta_low}, {zeta_upp})"
        )));
    }
    let sub = n_axis / n_subarrays;
    let scale = 1.0 / (n_axis as f64).sqrt();
    let mut out = Vec::with_capacity(n_axis);
    for _ in 0..n_subarrays {
        let phi = uniform_in(-1.0, 1.0, rng);
        let zeta = wrap_add(uniform_in(zeta_low, zeta_upp, rng), 0.0);
        let block_phase = Complex64::from_polar(scale, PI * phi);
        for m in 0..sub {
            out.push(block_phase * Complex64::from_polar(1.0, PI * m as f64 * zeta));
        }
    }
    Ok(out)
}

fn declared_half(spec: &SensingSpec, n_axis: usize) -> f64 {
    (spec.half_width + spec.n_subarrays as f64 / n_axis as f64).min(1.0)
}

/// Draws a sensing matrix: all x-axis factors first, then all y-axis
/// factors, each factor window centered on the corresponding component of
/// `spec.center`. Declared range per axis is center ∓ (w + N_a/N_axis),
/// capped at the full circle.
pub fn sensing_matrix(spec: &SensingSpec, rng: &mut impl Rng) -> Result<SensingMatrix> {
    let geom = spec.uav_geom;
    let (cx, cy) = (spec.center.psi(), spec.center.omega());
    let w = spec.half_width;
    let mut x_factors = Vec::with_capacity(spec.n_measurements);
    for _ in 0..spec.n_measurements {
        x_factors.push(random_subarray_ula(
            rng,
            geom.n_x,
            spec.n_subarrays,
            cx - w,
            cx + w,
        )?);
    }
    let mut y_factors = Vec::with_capacity(spec.n_measurements);
    for _ in 0..spec.n_measurements {
        y_factors.push(random_subarray_ula(
            rng,
            geom.n_second,
            spec.n_subarrays,
            cy - w,
            cy + w,
        )?);
    }
    let range_x = if spec.is_fully_random() {
        RangeInterval::new(0.0, 1.0)
    } else {
        RangeInterval::new(cx, declared_half(spec, geom.n_x))
    };
    let range_y = if spec.is_fully_random() {
        RangeInterval::new(0.0, 1.0)
    } else {
        RangeInterval::new(cy, declared_half(spec, geom.n_second))
    };
    Ok(SensingMatrix {
        x_factors,
        y_factors,
        range_x,
        range_y,
        spec: *spec,
    })
}

/// Captured beam-space energy over a uniform grid of the full angle square,
/// normalized so the maximum cell is exactly 1.
#[derive(Clone, Debug)]
pub struct BeamspaceMap {
    pub psi_grid: Vec<f64>,
    pub omega_grid: Vec<f64>,
    /// values[i][j] is the normalized energy at (psi_grid[i], omega_grid[j]).
    pub values: Vec<Vec<f64>>,
}

/// |fᴴ v(g)|² for every factor at every grid angle; shape grid × factors.
fn factor_gains(factors: &[Vec<Complex64>], grid: &[f64]) -> Vec<Vec<f64>> {
    grid.iter()
        .map(|&g| {
            factors
                .iter()
                .map(|f| {
                    let dot: Complex64 = f
                        .iter()
                        .enumerate()
                        .map(|(m, &c)| c.conj() * Complex64::from_polar(1.0, PI * m as f64 * g))
                        .sum();
                    dot.norm_sqr()
                })
                .collect()
        })
        .collect()
}

fn axis_energy(factors: &[Vec<Complex64>], grid: &[f64]) -> Vec<f64> {
    factor_gains(factors, grid)
        .into_iter()
        .map(|per_factor| per_factor.into_iter().sum())
        .collect()
}

fn cell_centers(count: usize) -> Vec<f64> {
    let step = 2.0 / count as f64;
    (0..count).map(|k| -1.0 + (k as f64 + 0.5) * step).collect()
}

/// Energy map ‖Mᴴb(Ψ,Ω)‖² on a `grid_per_axis`² grid of cell centers over
/// [−1,1)², normalized to peak 1. Computed via the per-axis factorization.
pub fn beamspace_map(matrix: &SensingMatrix, grid_per_axis: usize) -> Result<BeamspaceMap> {
    if grid_per_axis < 2 {
        return Err(Error::Config("beam-space grid needs at least 2 points per axis".into()));
    }
    let psi_grid = cell_centers(grid_per_axis);
    let omega_grid = cell_centers(grid_per_axis);

    let n = matrix.n_measurements();
    let ex = factor_gains(&matrix.x_factors, &psi_grid);
    let ey = factor_gains(&matrix.y_factors, &omega_grid);

    let mut values = vec![vec![0.0; grid_per_axis]; grid_per_axis];
    let mut max = 0.0f64;
    for i in 0..grid_per_axis {
        for j in 0..grid_per_axis {
            let mut acc = 0.0;
            for k in 0..n {
                acc += ex[i][k] * ey[j][k];
            }
            values[i][j] = acc;
            max = max.max(acc);
        }
    }
    if max > 0.0 {
        for row in &mut values {
            for v in row.iter_mut() {
                *v /= max;
            }
        }
    }
    Ok(BeamspaceMap {
        psi_grid,
        omega_grid,
        values,
    })
}

/// Fraction of beam-space energy the matrix captures inside the given
/// per-axis intervals: grids each axis at 4× beamwidth oversampling,
/// marginalizes the captured energy per axis, and returns the smaller of
/// the two in-range fractions.
pub fn range_energy_fraction(
    matrix: &SensingMatrix,
    range_x: &RangeInterval,
    range_y: &RangeInterval,
) -> f64 {
    let axis_fraction = |factors: &[Vec<Complex64>], n_axis: usize, range: &RangeInterval| {
        let grid = cell_centers(4 * n_axis);
        let energy = axis_energy(factors, &grid);
        let total: f64 = energy.iter().sum();
        if total <= 0.0 {
            return 0.0;
        }
        let inside: f64 = grid
            .iter()
            .zip(&energy)
            .filter(|(g, _)| range.contains(**g))
            .map(|(_, e)| e)
            .sum();
        inside / total
    };
    let geom = matrix.spec.uav_geom;
    let fx = axis_fraction(&matrix.x_factors, geom.n_x, range_x);
    let fy = axis_fraction(&matrix.y_factors, geom.n_second, range_y);
    fx.min(fy)
}
