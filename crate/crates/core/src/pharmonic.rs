//! Discrete p-capacity between two vertex sets, the dual unit flow, and the
//! scaling constants of an IGS.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::check::CheckReport;
use crate::error::{Error, Result};
use crate::graph::MultiGraph;
use crate::replacement::LevelTower;

pub const DEFAULT_P_GRID: [f64; 6] = [1.25, 1.5, 2.0, 3.0, 4.0, 8.0];

/// Gradients below this are treated as exact zeros in classifiers.
pub const ZERO_GRADIENT: f64 = 1e-9;

/// Below this a gradient is numerical noise around an exact zero; the
/// (p−1)-power flux of such an edge is taken to be 0. Without the snap a
/// 1e-18 remainder would contribute 1e-18^(p−1) ≈ 3e-5 to the flux at p = 1.25.
const FLUX_SNAP: f64 = 1e-13;

const DENSE_LIMIT: usize = 2500;

#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub residual_tol: f64,
    pub energy_tol: f64,
    pub max_steps: usize,
    pub eps_schedule: Vec<f64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            residual_tol: 1e-10,
            energy_tol: 1e-12,
            max_steps: 500,
            eps_schedule: (1..=8).map(|k| 10f64.powi(-k)).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PotentialSolution {
    pub p: f64,
    pub potential: Vec<f64>,
    /// |∇U(e)|, raw.
    pub gradient: Vec<f64>,
    /// J(e), positive when flowing from the first endpoint to the second.
    pub flow: Vec<f64>,
    pub capacity: f64,
    /// Max interior p-harmonicity defect, relative to the capacity.
    pub residual: f64,
    pub iterations: usize,
}

impl PotentialSolution {
    /// Unsigned gradients with sub-threshold values set to zero.
    pub fn classified_gradient(&self) -> Vec<f64> {
        self.gradient
            .iter()
            .map(|&g| if g < ZERO_GRADIENT { 0.0 } else { g })
            .collect()
    }

    /// E_p(U)^{1/p} · E_q(J)^{1/q}, which is 1 for the optimal pair.
    pub fn duality_product(&self) -> f64 {
        let q = self.p / (self.p - 1.0);
        let eq: f64 = self.flow.iter().map(|j| j.abs().powf(q)).sum();
        self.capacity.powf(1.0 / self.p) * eq.powf(1.0 / q)
    }

    /// Σ_{edges at v} J(v, ·), flow counted positive when leaving v.
    pub fn divergence(&self, g: &MultiGraph) -> Vec<f64> {
        let mut div = vec![0.0; g.vertex_count()];
        for (e, &(a, b)) in g.edges().iter().enumerate() {
            div[a] += self.flow[e];
            div[b] -= self.flow[e];
        }
        div
    }

    /// Worst violation of |J(e)| = Cap⁻¹|∇U(e)|^{p−1}.
    pub fn pointwise_duality_defect(&self) -> f64 {
        self.flow
            .iter()
            .zip(&self.gradient)
            .map(|(j, &g)| (j.abs() - snapped_flux(g, self.p) / self.capacity).abs())
            .fold(0.0, f64::max)
    }
}

fn snapped_flux(g: f64, p: f64) -> f64 {
    let a = g.abs();
    if a < FLUX_SNAP {
        0.0
    } else {
        a.powf(p - 1.0)
    }
}

fn check_exponent(p: f64) -> Result<()> {
    if p.is_finite() && p > 1.0 {
        Ok(())
    } else {
        Err(Error::ExponentOutOfRange(p))
    }
}

pub fn solve_capacity(g: &MultiGraph, source: &[usize], sink: &[usize], p: f64) -> Result<PotentialSolution> {
    solve_capacity_with(g, source, sink, p, &SolverOptions::default())
}

/// Minimises Σ_e (|∇U(e)|² + ε²)^{p/2} by damped Newton, driving ε down the
/// schedule with warm starts, then reads off gradient, flow and capacity at
/// the true exponent.
pub fn solve_capacity_with(
    g: &MultiGraph,
    source: &[usize],
    sink: &[usize],
    p: f64,
    opts: &SolverOptions,
) -> Result<PotentialSolution> {
    check_exponent(p)?;
    let n = g.vertex_count();
    if source.is_empty() || sink.is_empty() {
        return Err(Error::InvalidArgument("source and sink must be nonempty".into()));
    }
    let mut role = vec![0u8; n]; // 0 interior, 1 source, 2 sink
    for &v in source {
        if v >= n {
            return Err(Error::UnknownVertex(v.to_string()));
        }
        role[v] = 1;
    }
    for &v in sink {
        if v >= n {
            return Err(Error::UnknownVertex(v.to_string()));
        }
        if role[v] == 1 {
            return Err(Error::InvalidArgument("source and sink overlap".into()));
        }
        role[v] = 2;
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }

    let to_sink = g.bfs_distances(sink);
    let span = source.iter().filter_map(|&s| to_sink[s]).min().unwrap_or(1).max(1) as f64;
    let mut u: Vec<f64> = (0..n)
        .map(|v| match role[v] {
            1 => 1.0,
            2 => 0.0,
            _ => (to_sink[v].unwrap() as f64 / span).clamp(0.0, 1.0),
        })
        .collect();

    let interior: Vec<usize> = (0..n).filter(|&v| role[v] == 0).collect();
    let mut slot = vec![usize::MAX; n];
    for (i, &v) in interior.iter().enumerate() {
        slot[v] = i;
    }

    let mut iterations = 0;
    if !interior.is_empty() {
        let stages = opts.eps_schedule.len();
        for (si, &eps) in opts.eps_schedule.iter().enumerate() {
            let last = si + 1 == stages;
            iterations += newton_stage(g, &mut u, &interior, &slot, p, eps, last, opts);
        }
        // The smoothing bias on an edge is about ε²/|∇U|² relative, so deep
        // levels with tiny gradients need ε below the fixed schedule.
        let mut eps = opts.eps_schedule.last().copied().unwrap_or(1e-8);
        while true_residual(g, &u, &interior, p) > opts.residual_tol && eps > MIN_EPS {
            eps /= 10.0;
            iterations += newton_stage(g, &mut u, &interior, &slot, p, eps, true, opts);
        }
    }

    let edges = g.edges();
    let signed: Vec<f64> = edges.iter().map(|&(a, b)| u[a] - u[b]).collect();
    let gradient: Vec<f64> = signed.iter().map(|d| d.abs()).collect();
    let capacity: f64 = gradient.iter().map(|d| d.powf(p)).sum();
    if !(capacity > 0.0) {
        return Err(Error::Internal("zero capacity".into()));
    }
    let flow: Vec<f64> = signed
        .iter()
        .map(|&d| d.signum() * snapped_flux(d, p) / capacity)
        .collect();

    let mut div = vec![0.0; n];
    for (e, &(a, b)) in edges.iter().enumerate() {
        div[a] += flow[e];
        div[b] -= flow[e];
    }
    let residual = interior.iter().map(|&v| div[v].abs()).fold(0.0, f64::max);
    if !(residual <= opts.residual_tol) {
        return Err(Error::NotConverged {
            p,
            residual,
            iterations,
        });
    }
    Ok(PotentialSolution {
        p,
        potential: u,
        gradient,
        flow,
        capacity,
        residual,
        iterations,
    })
}

const MIN_EPS: f64 = 1e-16;

fn true_residual(g: &MultiGraph, u: &[f64], interior: &[usize], p: f64) -> f64 {
    let mut div = vec![0.0; u.len()];
    let mut cap = 0.0;
    for &(a, b) in g.edges() {
        let d = u[a] - u[b];
        let f = d.signum() * snapped_flux(d, p);
        cap += d.abs().powf(p);
        div[a] += f;
        div[b] -= f;
    }
    interior.iter().map(|&v| div[v].abs()).fold(0.0, f64::max) / cap
}

struct Smoothed {
    value: f64,
    grad: Vec<f64>,
    /// per-edge second derivative φ''(∇U(e))
    curvature: Vec<f64>,
}

fn phi(d: f64, p: f64, eps2: f64) -> f64 {
    (d * d + eps2).powf(p / 2.0)
}

fn evaluate(g: &MultiGraph, u: &[f64], slot: &[usize], m: usize, p: f64, eps2: f64) -> Smoothed {
    let mut value = 0.0;
    let mut grad = vec![0.0; m];
    let mut curvature = Vec::with_capacity(g.edge_count());
    for &(a, b) in g.edges() {
        let d = u[a] - u[b];
        let s = d * d + eps2;
        let base = s.powf(p / 2.0 - 2.0);
        value += base * s * s;
        let d1 = p * d * base * s;
        curvature.push(p * base * ((p - 1.0) * d * d + eps2));
        if slot[a] != usize::MAX {
            grad[slot[a]] += d1;
        }
        if slot[b] != usize::MAX {
            grad[slot[b]] -= d1;
        }
    }
    Smoothed {
        value,
        grad,
        curvature,
    }
}

fn energy_only(g: &MultiGraph, u: &[f64], p: f64, eps2: f64) -> f64 {
    g.edges().iter().map(|&(a, b)| phi(u[a] - u[b], p, eps2)).sum()
}

#[allow(clippy::too_many_arguments)]
fn newton_stage(
    g: &MultiGraph,
    u: &mut [f64],
    interior: &[usize],
    slot: &[usize],
    p: f64,
    eps: f64,
    last: bool,
    opts: &SolverOptions,
) -> usize {
    let m = interior.len();
    let eps2 = eps * eps;
    let mut prev_value = f64::INFINITY;
    let mut stalls = 0;
    for step in 0..opts.max_steps {
        let s = evaluate(g, u, slot, m, p, eps2);
        let scale = p * s.value.max(f64::MIN_POSITIVE);
        let res = s.grad.iter().map(|x| x.abs()).fold(0.0, f64::max) / scale;
        // early stages only need to land in the basin of the next one
        if !last && res < 1e-8 {
            return step;
        }
        let Some(dir) = newton_direction(g, slot, m, &s) else {
            return step;
        };
        // For p > 2 the energy is flat along exactly-zero gradients, so a small
        // residual alone does not pin the potential; also require a tiny step.
        let reach = dir.iter().map(|x| x.abs()).fold(0.0, f64::max);
        if last && res < opts.residual_tol && reach < 1e-14 {
            return step;
        }
        let slope: f64 = s.grad.iter().zip(&dir).map(|(a, b)| a * b).sum();
        if slope >= 0.0 {
            return step;
        }
        let mut t = 1.0;
        let mut trial = u.to_vec();
        let mut accepted = None;
        for _ in 0..60 {
            for (i, &v) in interior.iter().enumerate() {
                trial[v] = u[v] + t * dir[i];
            }
            let f = energy_only(g, &trial, p, eps2);
            if f <= s.value + 1e-4 * t * slope + 8.0 * f64::EPSILON * s.value {
                accepted = Some(f);
                break;
            }
            t *= 0.5;
        }
        let Some(f) = accepted else {
            return step;
        };
        u.copy_from_slice(&trial);
        // roundoff floor: energy no longer moves although the step is not tiny
        let settled = (prev_value - f).abs() <= opts.energy_tol * f && (s.value - f).abs() <= opts.energy_tol * f;
        stalls = if settled && res < opts.residual_tol { stalls + 1 } else { 0 };
        if stalls >= 3 && reach < 1e-9 {
            return step + 1;
        }
        prev_value = s.value;
    }
    opts.max_steps
}

fn newton_direction(g: &MultiGraph, slot: &[usize], m: usize, s: &Smoothed) -> Option<Vec<f64>> {
    let rhs: Vec<f64> = s.grad.iter().map(|x| -x).collect();
    if m <= DENSE_LIMIT {
        let mut h = DMatrix::<f64>::zeros(m, m);
        for (e, &(a, b)) in g.edges().iter().enumerate() {
            let w = s.curvature[e];
            let (ia, ib) = (slot[a], slot[b]);
            if ia != usize::MAX {
                h[(ia, ia)] += w;
            }
            if ib != usize::MAX {
                h[(ib, ib)] += w;
            }
            if ia != usize::MAX && ib != usize::MAX {
                h[(ia, ib)] -= w;
                h[(ib, ia)] -= w;
            }
        }
        let chol = h.cholesky()?;
        let x = chol.solve(&DVector::from_vec(rhs));
        Some(x.iter().copied().collect())
    } else {
        conjugate_gradient(g, slot, m, &s.curvature, &rhs)
    }
}

/// Jacobi-preconditioned CG on the weighted Dirichlet Laplacian.
fn conjugate_gradient(g: &MultiGraph, slot: &[usize], m: usize, w: &[f64], b: &[f64]) -> Option<Vec<f64>> {
    let apply = |x: &[f64], out: &mut [f64]| {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (e, &(a, c)) in g.edges().iter().enumerate() {
            let (ia, ic) = (slot[a], slot[c]);
            let xa = if ia != usize::MAX { x[ia] } else { 0.0 };
            let xc = if ic != usize::MAX { x[ic] } else { 0.0 };
            if ia != usize::MAX {
                out[ia] += w[e] * (xa - xc);
            }
            if ic != usize::MAX {
                out[ic] += w[e] * (xc - xa);
            }
        }
    };
    let mut diag = vec![0.0; m];
    for (e, &(a, c)) in g.edges().iter().enumerate() {
        for v in [a, c] {
            if slot[v] != usize::MAX {
                diag[slot[v]] += w[e];
            }
        }
    }
    let mut x = vec![0.0; m];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(r, d)| r / d).collect();
    let mut d = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let bnorm = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut ad = vec![0.0; m];
    for _ in 0..20 * m + 100 {
        if r.iter().map(|x| x * x).sum::<f64>().sqrt() <= 1e-15 * bnorm {
            break;
        }
        apply(&d, &mut ad);
        let dad: f64 = d.iter().zip(&ad).map(|(a, b)| a * b).sum();
        if !(dad > 0.0) {
            return None;
        }
        let alpha = rz / dad;
        for i in 0..m {
            x[i] += alpha * d[i];
            r[i] -= alpha * ad[i];
        }
        for i in 0..m {
            z[i] = r[i] / diag[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..m {
            d[i] = z[i] + beta * d[i];
        }
    }
    Some(x)
}

// ---------------------------------------------------------------------------
// IGS-level quantities

/// Everything derived from the level-1 problem at one exponent.
#[derive(Debug, Clone, Serialize)]
pub struct Profile {
    pub p: f64,
    /// Solution on G₁ with source I₊ and sink I₋; edges oriented e⁺→e⁻.
    pub solution: PotentialSolution,
    pub m_p: f64,
    /// J₊(φ₊(a), ·) per gluing symbol.
    pub entry_flow: Vec<f64>,
    /// J₊(φ₋(a), ·) per gluing symbol (negative: flow enters the sink).
    pub exit_flow: Vec<f64>,
}

impl Profile {
    pub fn new(tower: &LevelTower, p: f64) -> Result<Self> {
        Self::with_options(tower, p, &SolverOptions::default())
    }

    pub fn with_options(tower: &LevelTower, p: f64, opts: &SolverOptions) -> Result<Self> {
        let igs = tower.igs();
        let l1 = tower.level(1)?;
        let solution = solve_capacity_with(&l1.graph, igs.i_plus(), igs.i_minus(), p, opts)?;
        let leaving = |v: usize| -> f64 {
            l1.graph
                .incident(v)
                .iter()
                .map(|&e| if l1.plus(e) == v { solution.flow[e] } else { -solution.flow[e] })
                .sum()
        };
        let entry_flow = igs.i_plus().iter().map(|&v| leaving(v)).collect();
        let exit_flow = igs.i_minus().iter().map(|&v| leaving(v)).collect();
        Ok(Profile {
            p,
            m_p: solution.capacity,
            solution,
            entry_flow,
            exit_flow,
        })
    }

    /// |J₊(φ₊(a)) + J₊(φ₋(a))| per symbol.
    pub fn uniformity_residuals(&self) -> Vec<f64> {
        self.entry_flow
            .iter()
            .zip(&self.exit_flow)
            .map(|(a, b)| (a + b).abs())
            .collect()
    }

    /// The probability density 𝒥_p on I, if the flow is conductively uniform.
    pub fn density(&self, tol: f64) -> Result<Vec<f64>> {
        let worst = self.uniformity_residuals().into_iter().fold(0.0, f64::max);
        if worst > tol {
            return Err(Error::DensityUnavailable(format!(
                "not conductively uniform at p = {} (residual {worst:e})",
                self.p
            )));
        }
        Ok(self.entry_flow.clone())
    }

    pub fn gradient(&self) -> &[f64] {
        &self.solution.gradient
    }

    /// U_{p,+,1} on V₁.
    pub fn potential(&self) -> &[f64] {
        &self.solution.potential
    }
}

pub fn profiles(tower: &LevelTower, grid: &[f64]) -> Result<Vec<Profile>> {
    grid.par_iter().map(|&p| Profile::new(tower, p)).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstantsReport {
    pub p: f64,
    pub l_star: usize,
    pub edge_count: usize,
    pub q: f64,
    pub m_p: f64,
    pub d_wp: f64,
    pub c_p: f64,
    pub delta_p: f64,
    /// |∇U_p| ≡ 1/L_* within tolerance.
    pub dwp_equals_p: bool,
}

pub fn constants_from(tower: &LevelTower, profile: &Profile, tol: f64) -> Result<ConstantsReport> {
    let igs = tower.igs();
    let l = igs.l_star()?;
    let lf = l as f64;
    let e = igs.edge_count() as f64;
    let c_p = profile.gradient().iter().copied().fold(0.0, f64::max);
    Ok(ConstantsReport {
        p: profile.p,
        l_star: l,
        edge_count: igs.edge_count(),
        q: e.ln() / lf.ln(),
        m_p: profile.m_p,
        d_wp: (e / profile.m_p).ln() / lf.ln(),
        c_p,
        delta_p: -c_p.ln() / lf.ln(),
        dwp_equals_p: profile.gradient().iter().all(|g| (g - 1.0 / lf).abs() < tol),
    })
}

pub fn constants(tower: &LevelTower, p: f64) -> Result<ConstantsReport> {
    constants_from(tower, &Profile::new(tower, p)?, 1e-7)
}

#[derive(Debug, Clone, Serialize)]
pub struct UniformityReport {
    pub checks: CheckReport,
    /// (p, 𝒥_p) for each exponent that passed.
    pub densities: Vec<(f64, Vec<f64>)>,
    pub max_residual: f64,
}

pub fn check_conductive_uniform(tower: &LevelTower, grid: &[f64], tol: f64) -> Result<UniformityReport> {
    let profs = profiles(tower, grid)?;
    Ok(uniformity_from(&profs, tol))
}

pub fn uniformity_from(profs: &[Profile], tol: f64) -> UniformityReport {
    let mut checks = CheckReport::new();
    let mut densities = Vec::new();
    let mut max_residual: f64 = 0.0;
    for prof in profs {
        let res = prof.uniformity_residuals();
        let worst = res
            .iter()
            .enumerate()
            .fold((0, 0.0), |acc, (a, &r)| if r > acc.1 { (a, r) } else { acc });
        max_residual = max_residual.max(worst.1);
        let ok = worst.1 <= tol;
        checks.push(
            format!("conductive-uniformity[p={}]", prof.p),
            ok,
            if ok {
                format!("max residual {:.3e}; density {:?}", worst.1, prof.entry_flow)
            } else {
                format!("symbol a={} residual {:.3e}", worst.0, worst.1)
            },
        );
        if ok {
            densities.push((prof.p, prof.entry_flow.clone()));
        }
    }
    UniformityReport {
        checks,
        densities,
        max_residual,
    }
}

/// Capacity between I₊⁽ⁿ⁾ and I₋⁽ⁿ⁾ solved directly on G_n.
pub fn capacity_level_n(tower: &mut LevelTower, n: usize, p: f64) -> Result<f64> {
    Ok(solve_level_n(tower, n, p)?.capacity)
}

pub fn solve_level_n(tower: &mut LevelTower, n: usize, p: f64) -> Result<PotentialSolution> {
    tower.ensure(n)?;
    solve_built_level(tower, n, p, &SolverOptions::default())
}

/// Like [`solve_level_n`] on an already built level.
pub fn solve_built_level(tower: &LevelTower, n: usize, p: f64, opts: &SolverOptions) -> Result<PotentialSolution> {
    check_exponent(p)?;
    let src = tower.i_plus(n)?;
    let snk = tower.i_minus(n)?;
    solve_capacity_with(&tower.level(n)?.graph, &src, &snk, p, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::igs::{diamond, lopsided, path2, theta};

    fn path_graph() -> MultiGraph {
        MultiGraph::unlabeled(3, vec![(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn path_capacity_closed_form() {
        for p in [1.25, 1.5, 2.0, 3.0, 8.0] {
            let s = solve_capacity(&path_graph(), &[0], &[2], p).unwrap();
            assert!((s.potential[1] - 0.5).abs() < 1e-12);
            assert!((s.capacity - 2f64.powf(1.0 - p)).abs() < 1e-12);
            assert!((s.duality_product() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn exponent_range() {
        for p in [1.0, 0.5, f64::INFINITY, f64::NAN] {
            assert!(matches!(
                solve_capacity(&path_graph(), &[0], &[2], p),
                Err(Error::ExponentOutOfRange(_))
            ));
        }
    }

    #[test]
    fn diamond_resistance_network() {
        // series–parallel: bridge (1) + two unit branches in parallel twice (1/2 + 1/2) + bridge (1)
        let t = LevelTower::new(diamond()).unwrap();
        let prof = Profile::new(&t, 2.0).unwrap();
        let want = [1.0, 2.0 / 3.0, 0.5, 0.5, 1.0 / 3.0, 0.0];
        for (u, w) in prof.potential().iter().zip(want) {
            assert!((u - w).abs() < 1e-10);
        }
        assert!((prof.m_p - 1.0 / 3.0).abs() < 1e-12);
        let flows: Vec<f64> = prof.solution.flow.clone();
        for (j, w) in flows.iter().zip([1.0, 0.5, 0.5, 0.5, 0.5, 1.0]) {
            assert!((j - w).abs() < 1e-10, "{flows:?}");
        }
    }

    #[test]
    fn swapping_source_and_sink_complements_potential() {
        let t = LevelTower::new(diamond()).unwrap();
        let g = &t.level(1).unwrap().graph;
        for p in [1.5, 3.0] {
            let a = solve_capacity(g, &[0], &[5], p).unwrap();
            let b = solve_capacity(g, &[5], &[0], p).unwrap();
            for v in 0..6 {
                assert!((a.potential[v] + b.potential[v] - 1.0).abs() < 1e-10);
            }
            for e in 0..6 {
                assert!((a.gradient[e] - b.gradient[e]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn constants_on_presets() {
        let c = constants(&LevelTower::new(path2()).unwrap(), 2.0).unwrap();
        assert!((c.m_p - 0.5).abs() < 1e-12 && (c.d_wp - 2.0).abs() < 1e-10 && c.dwp_equals_p);
        let c = constants(&LevelTower::new(diamond()).unwrap(), 2.0).unwrap();
        assert!((c.d_wp - 18f64.ln() / 4f64.ln()).abs() < 1e-9);
        assert!(!c.dwp_equals_p);
        assert!((c.c_p - 1.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn uniformity_detects_lopsided_flow() {
        let t = LevelTower::new(theta(2, 2).unwrap()).unwrap();
        let r = check_conductive_uniform(&t, &[2.0, 3.0], 1e-7).unwrap();
        assert!(r.checks.passed());
        for (_, d) in &r.densities {
            assert!((d[0] - 0.5).abs() < 1e-9 && (d[1] - 0.5).abs() < 1e-9);
        }
        let t = LevelTower::new(lopsided()).unwrap();
        let r = check_conductive_uniform(&t, &[2.0], 1e-7).unwrap();
        assert!(!r.checks.passed());
        // p = 2 by hand: entry flows 4/6 and 2/6, exit flows 3/6 each
        let prof = Profile::new(&t, 2.0).unwrap();
        assert!((prof.entry_flow[0] - 4.0 / 6.0).abs() < 1e-10);
        assert!((prof.exit_flow[0] + 0.5).abs() < 1e-10);
        assert!(prof.density(1e-7).is_err());
    }

    #[test]
    fn level_zero_capacity_is_one() {
        let mut t = LevelTower::new(diamond()).unwrap();
        assert!((capacity_level_n(&mut t, 0, 3.0).unwrap() - 1.0).abs() < 1e-12);
        let mut t = LevelTower::new(path2()).unwrap();
        assert!((capacity_level_n(&mut t, 3, 2.0).unwrap() - 0.125).abs() < 1e-12);
    }
}
