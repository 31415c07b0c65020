//! Maximum-likelihood two-dimensional AoA estimation from compressed beam
//! training measurements.
//!
//! The objective g(Ψ,Ω) = |bᴴMy|²/(bᴴMMᴴb) is maximized in two stages: a
//! coarse grid search over the sensing matrix's declared range (factored
//! per-axis evaluation), then wrapped-gradient ascent refinement from the
//! best grid maxima (dense evaluation). The two evaluation paths are
//! independent and cross-checked in tests.
//!
//! g is invariant to any global phase of b, so the centered prefactor of the
//! UAV response cancels; all internal computations use the uncentered form.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::geometry::{wrap_add, wrap_sub, AoaPair};
use crate::sensing::{RangeInterval, SensingMatrix};
use crate::{Error, Result};

/// Tuning of the two-stage search. `step_scale` is the gradient-step size
/// before the ‖y‖₂⁻² power normalization applied at update time (named
/// distinctly from the carrier wavelength).
#[derive(Clone, Copy, Debug)]
pub struct EstimatorConfig {
    pub grid_psi: usize,
    pub grid_omega: usize,
    pub n_candidates: usize,
    pub step_scale: f64,
    pub stop_eps: f64,
    pub max_iterations: usize,
    pub domain_x: RangeInterval,
    pub domain_y: RangeInterval,
}

impl EstimatorConfig {
    pub fn new(
        grid_psi: usize,
        grid_omega: usize,
        n_candidates: usize,
        step_scale: f64,
        stop_eps: f64,
        max_iterations: usize,
        domain_x: RangeInterval,
        domain_y: RangeInterval,
    ) -> Result<Self> {
        if grid_psi < 2 || grid_omega < 2 {
            return Err(Error::Config("coarse grid needs at least 2 points per axis".into()));
        }
        if n_candidates == 0 {
            return Err(Error::Config("n_candidates must be at least 1".into()));
        }
        if !(step_scale > 0.0) {
            return Err(Error::Config(format!("step_scale {step_scale} must be positive")));
        }
        if !(stop_eps > 0.0) {
            return Err(Error::Config(format!("stop_eps {stop_eps} must be positive")));
        }
        Ok(Self {
            grid_psi,
            grid_omega,
            n_candidates,
            step_scale,
            stop_eps,
            max_iterations,
            domain_x,
            domain_y,
        })
    }

    /// Defaults tied to a sensing matrix: search domain = declared range,
    /// grid at 2× beamwidth oversampling (at least 2 points), 3 candidates,
    /// step 1/(π²·N_{U,x}·N_{U,y}), stop threshold 1e−12, 150 iterations.
    /// The iteration cap only binds on slow ridge ascents; converged or
    /// stalled runs exit early through the step-size break.
    pub fn for_matrix(matrix: &SensingMatrix) -> Self {
        let geom = matrix.spec.uav_geom;
        let grid = |range: &RangeInterval, n_axis: usize| -> usize {
            ((2.0 * range.width() * n_axis as f64).ceil() as usize).max(2)
        };
        Self {
            grid_psi: grid(&matrix.range_x, geom.n_x),
            grid_omega: grid(&matrix.range_y, geom.n_second),
            n_candidates: 3,
            step_scale: 1.0 / (PI * PI * (geom.n_x * geom.n_second) as f64),
            stop_eps: 1e-12,
            max_iterations: 150,
            domain_x: matrix.range_x,
            domain_y: matrix.range_y,
        }
    }
}

/// One coarse-grid candidate.
#[derive(Clone, Copy, Debug)]
pub struct Candidate {
    pub aoa: AoaPair,
    pub objective: f64,
}

/// Coarse-search result with its operation count (complex multiply
/// accumulations in the factored evaluation).
#[derive(Clone, Debug)]
pub struct CoarseOutcome {
    pub candidates: Vec<Candidate>,
    pub cells: usize,
    pub complex_mults: u64,
}

/// Fine-search result; `iterations` counts executed update steps.
#[derive(Clone, Copy, Debug)]
pub struct FineOutcome {
    pub aoa: AoaPair,
    pub objective: f64,
    pub iterations: usize,
    pub complex_mults: u64,
}

/// Per-candidate refinement diagnostics.
#[derive(Clone, Copy, Debug)]
pub struct CandidateReport {
    pub start: Candidate,
    pub refined: AoaPair,
    pub objective: f64,
    pub iterations: usize,
}

/// Final estimate: the refined candidate with the largest objective
/// (first in coarse order on ties).
#[derive(Clone, Debug)]
pub struct AoaEstimate {
    pub aoa: AoaPair,
    pub objective: f64,
    pub iterations: usize,
    pub candidates: Vec<CandidateReport>,
    pub coarse_mults: u64,
    pub fine_mults: u64,
}

fn steering_row(angle: f64, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|k| Complex64::from_polar(1.0, PI * k as f64 * angle))
        .collect()
}

fn grid_centers(lo: f64, width: f64, z: usize) -> Vec<f64> {
    (0..z)
        .map(|i| lo + (i as f64 + 0.5) * width / z as f64)
        .collect()
}

struct DenseEval {
    g: f64,
    grad: (f64, f64),
}

/// Dense evaluation of g (and optionally its gradient) at one angle pair.
/// Cost is N·N_{U,x}·N_{U,y} multiply-accumulates per requested quantity,
/// which is the advertised per-iteration complexity of the fine search.
fn dense_eval(
    matrix: &SensingMatrix,
    y: &[Complex64],
    psi: f64,
    omega: f64,
    with_grad: bool,
    mults: &mut u64,
) -> DenseEval {
    let geom = matrix.spec.uav_geom;
    let (nx, ny) = (geom.n_x, geom.n_second);
    let n = matrix.n_measurements();
    let vx = steering_row(psi, nx);
    let vy = steering_row(omega, ny);

    let zero = Complex64::new(0.0, 0.0);
    let mut u = vec![zero; n];
    let mut du_psi = vec![zero; n];
    let mut du_omega = vec![zero; n];
    for m in 0..n {
        let xf = &matrix.x_factors[m];
        let yf = &matrix.y_factors[m];
        let (mut acc, mut acc_p, mut acc_o) = (zero, zero, zero);
        for (kx, &vxe) in vx.iter().enumerate() {
            let xv = xf[kx].conj() * vxe;
            let mut row = zero;
            let mut row_o = zero;
            for (ky, &vye) in vy.iter().enumerate() {
                let t = yf[ky].conj() * vye;
                row += t;
                if with_grad {
                    row_o += t * Complex64::new(0.0, PI * ky as f64);
                }
            }
            acc += xv * row;
            if with_grad {
                acc_p += xv * row * Complex64::new(0.0, PI * kx as f64);
                acc_o += xv * row_o;
            }
        }
        u[m] = acc;
        du_psi[m] = acc_p;
        du_omega[m] = acc_o;
    }
    *mults += (n * nx * ny) as u64 * if with_grad { 3 } else { 1 };

    let nu2: f64 = u.iter().map(|c| c.norm_sqr()).sum();
    if nu2.sqrt() < 1e-6 * (n as f64).sqrt() {
        return DenseEval {
            g: 0.0,
            grad: (0.0, 0.0),
        };
    }
    let s: Complex64 = u.iter().zip(y).map(|(a, b)| a.conj() * b).sum();
    let g = s.norm_sqr() / nu2;
    if !with_grad {
        return DenseEval { g, grad: (0.0, 0.0) };
    }
    let partial = |du: &[Complex64]| {
        let du_y: Complex64 = du.iter().zip(y).map(|(a, b)| a.conj() * b).sum();
        let u_du: Complex64 = u.iter().zip(du).map(|(a, b)| a.conj() * b).sum();
        2.0 * (s.conj() * du_y).re / nu2 - s.norm_sqr() * 2.0 * u_du.re / (nu2 * nu2)
    };
    DenseEval {
        g,
        grad: (partial(&du_psi), partial(&du_omega)),
    }
}

/// Normalized matched-filter energy g(Ψ,Ω) = |bᴴMy|²/(bᴴMMᴴb). Directions
/// the matrix cannot see (denominator under the floor 1e−6·√N) report 0.
pub fn objective(aoa: &AoaPair, matrix: &SensingMatrix, y: &[Complex64]) -> f64 {
    let mut mults = 0;
    dense_eval(matrix, y, aoa.psi(), aoa.omega(), false, &mut mults).g
}

/// Gradient (∂g/∂Ψ, ∂g/∂Ω) of the objective; zero under the denominator
/// floor and for y = 0.
pub fn objective_gradient(aoa: &AoaPair, matrix: &SensingMatrix, y: &[Complex64]) -> (f64, f64) {
    let mut mults = 0;
    dense_eval(matrix, y, aoa.psi(), aoa.omega(), true, &mut mults).grad
}

/// Evaluates g on the coarse grid over the configured search domain via the
/// per-axis factorization and returns the `n_candidates` discrete local
/// maxima (8-neighborhood, non-strict) with the largest values, padded with
/// the largest remaining cells when the grid has fewer maxima. Candidates
/// are sorted by descending objective; ties keep row-major scan order.
pub fn coarse_search(matrix: &SensingMatrix, y: &[Complex64], cfg: &EstimatorConfig) -> CoarseOutcome {
    let geom = matrix.spec.uav_geom;
    let n = matrix.n_measurements();
    let zx = cfg.grid_psi;
    let zy = cfg.grid_omega;
    let gx = grid_centers(cfg.domain_x.lo(), cfg.domain_x.width(), zx);
    let gy = grid_centers(cfg.domain_y.lo(), cfg.domain_y.width(), zy);
    let mut mults = 0u64;

    // per-axis factor responses: a[m][i] = x_factor[m]ᴴ v(gx[i])
    let axis_dots = |factors: &[Vec<Complex64>], grid: &[f64], n_axis: usize| {
        factors
            .iter()
            .map(|f| {
                grid.iter()
                    .map(|&g| {
                        let v = steering_row(g, n_axis);
                        f.iter().zip(&v).map(|(c, vv)| c.conj() * vv).sum::<Complex64>()
                    })
                    .collect::<Vec<_>>()
            })
            .collect::<Vec<_>>()
    };
    let a = axis_dots(&matrix.x_factors, &gx, geom.n_x);
    let b = axis_dots(&matrix.y_factors, &gy, geom.n_second);
    mults += (n * geom.n_x * zx + n * geom.n_second * zy) as u64;

    let floor = 1e-12 * n as f64;
    let mut grid = vec![vec![0.0f64; zy]; zx];
    for i in 0..zx {
        for j in 0..zy {
            let mut den = 0.0;
            let mut s = Complex64::new(0.0, 0.0);
            for m in 0..n {
                let prod = a[m][i] * b[m][j];
                den += prod.norm_sqr();
                s += prod.conj() * y[m];
            }
            grid[i][j] = if den > floor { s.norm_sqr() / den } else { 0.0 };
        }
    }
    mults += (zx * zy * 2 * n) as u64;

    let mut maxima: Vec<(usize, usize, f64)> = Vec::new();
    let mut rest: Vec<(usize, usize, f64)> = Vec::new();
    for i in 0..zx {
        for j in 0..zy {
            let v = grid[i][j];
            let mut is_max = true;
            'nb: for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let (ni, nj) = (i as i64 + di, j as i64 + dj);
                    if ni < 0 || nj < 0 || ni >= zx as i64 || nj >= zy as i64 {
                        continue;
                    }
                    if v < grid[ni as usize][nj as usize] {
                        is_max = false;
                        break 'nb;
                    }
                }
            }
            if is_max {
                maxima.push((i, j, v));
            } else {
                rest.push((i, j, v));
            }
        }
    }
    maxima.sort_by(|p, q| q.2.partial_cmp(&p.2).unwrap());
    let mut chosen: Vec<(usize, usize, f64)> = maxima.into_iter().take(cfg.n_candidates).collect();
    if chosen.len() < cfg.n_candidates {
        rest.sort_by(|p, q| q.2.partial_cmp(&p.2).unwrap());
        chosen.extend(rest.into_iter().take(cfg.n_candidates - chosen.len()));
    }

    CoarseOutcome {
        candidates: chosen
            .into_iter()
            .map(|(i, j, v)| Candidate {
                aoa: AoaPair::new(gx[i], gy[j]),
                objective: v,
            })
            .collect(),
        cells: zx * zy,
        complex_mults: mults,
    }
}

/// Wrapped-gradient ascent from one candidate. The update is
/// aoa ← aoa ⊕ (step_scale/‖y‖²)·∇g per axis; iteration stops when the
/// wrapped step length squared, rescaled to the base step size, falls to
/// `stop_eps` (so a throttled step does not read as convergence) or the
/// iteration budget runs out. If g decreases on 5 consecutive steps the
/// step size halves; if it underflows 1e−9 the best iterate so far is
/// returned. The result never has a smaller objective than the starting
/// point.
pub fn fine_search(
    start: &AoaPair,
    matrix: &SensingMatrix,
    y: &[Complex64],
    cfg: &EstimatorConfig,
) -> FineOutcome {
    let ny2: f64 = y.iter().map(|c| c.norm_sqr()).sum();
    let power_scale = ny2.max(1e-300);
    let mut mults = 0u64;

    let (mut psi, mut omega) = (start.psi(), start.omega());
    let first = dense_eval(matrix, y, psi, omega, true, &mut mults);
    let (mut g, mut grad) = (first.g, first.grad);
    let (mut best_g, mut best_pt) = (g, (psi, omega));
    let mut step_scale = cfg.step_scale;
    let mut decreases = 0u32;
    let mut iterations = 0usize;

    for _ in 0..cfg.max_iterations {
        let eff = step_scale / power_scale;
        let next_psi = wrap_add(psi, eff * grad.0);
        let next_omega = wrap_add(omega, eff * grad.1);
        let step2 = (wrap_sub(next_psi, psi).powi(2) + wrap_sub(next_omega, omega).powi(2))
            * (cfg.step_scale / step_scale).powi(2);
        psi = next_psi;
        omega = next_omega;
        let ev = dense_eval(matrix, y, psi, omega, true, &mut mults);
        iterations += 1;
        if ev.g > best_g {
            best_g = ev.g;
            best_pt = (psi, omega);
        }
        if ev.g < g {
            decreases += 1;
        } else {
            decreases = 0;
        }
        if decreases >= 5 {
            step_scale /= 2.0;
            decreases = 0;
            if step_scale < 1e-9 {
                break;
            }
        }
        g = ev.g;
        grad = ev.grad;
        if step2 <= cfg.stop_eps {
            break;
        }
    }

    FineOutcome {
        aoa: AoaPair::new(best_pt.0, best_pt.1),
        objective: best_g,
        iterations,
        complex_mults: mults,
    }
}

/// Full two-stage estimate: coarse grid candidates, gradient refinement of
/// each, and selection of the refined point with the largest objective
/// (first in coarse order on ties).
pub fn estimate_aoa(matrix: &SensingMatrix, y: &[Complex64], cfg: &EstimatorConfig) -> AoaEstimate {
    let coarse = coarse_search(matrix, y, cfg);
    let mut reports = Vec::with_capacity(coarse.candidates.len());
    let mut fine_mults = 0u64;
    let mut total_iterations = 0usize;
    let mut best: Option<(AoaPair, f64)> = None;
    for cand in &coarse.candidates {
        let fine = fine_search(&cand.aoa, matrix, y, cfg);
        fine_mults += fine.complex_mults;
        total_iterations += fine.iterations;
        reports.push(CandidateReport {
            start: *cand,
            refined: fine.aoa,
            objective: fine.objective,
            iterations: fine.iterations,
        });
        if best.map_or(true, |(_, bg)| fine.objective > bg) {
            best = Some((fine.aoa, fine.objective));
        }
    }
    let (aoa, objective) = best.expect("coarse search returns at least one candidate");
    let ny2: f64 = y.iter().map(|c| c.norm_sqr()).sum();
    debug_assert!(objective <= ny2 + 1e-9, "objective {objective} exceeds signal energy {ny2}");
    AoaEstimate {
        aoa,
        objective,
        iterations: total_iterations,
        candidates: reports,
        coarse_mults: coarse.complex_mults,
        fine_mults,
    }
}

/// Exhaustive argmax of g over a `grid_per_axis`² cell-center grid of the
/// full angle square. Row-major scan; the first of several equal maxima
/// wins. Oracle for small instances only.
pub fn brute_force_oracle(matrix: &SensingMatrix, y: &[Complex64], grid_per_axis: usize) -> AoaPair {
    let centers = grid_centers(-1.0, 2.0, grid_per_axis);
    let mut best_val = -1.0;
    let mut best = (centers[0], centers[0]);
    let mut mults = 0u64;
    for &psi in &centers {
        for &omega in &centers {
            let g = dense_eval(matrix, y, psi, omega, false, &mut mults).g;
            if g > best_val {
                best_val = g;
                best = (psi, omega);
            }
        }
    }
    AoaPair::new(best.0, best.1)
}
