//! Functions at finite levels: averaging along fibres, discretised
//! interpolants, normalised energies and the identities relating them.

use rayon::prelude::*;
use serde::Serialize;

use crate::check::CheckReport;
use crate::error::{Error, Result};
use crate::graph::MultiGraph;
use crate::pharmonic::{Profile, ZERO_GRADIENT};
use crate::replacement::LevelTower;
use crate::rng::{derive_seed, rng, uniform_values};

/// Interpolant 𝒰_{p,m}[g] of vertex values g on V_m.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellFunction {
    pub base_level: usize,
    pub values: Vec<f64>,
    pub exponent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteFunction {
    pub level: usize,
    pub values: Vec<f64>,
}

/// Σ_e |∇f(e)|^p over the edges of `g`.
pub fn energy(g: &MultiGraph, values: &[f64], p: f64) -> f64 {
    g.edges()
        .iter()
        .map(|&(a, b)| (values[a] - values[b]).abs().powf(p))
        .sum()
}

/// Per-(IGS, p) data needed to read functions across levels.
#[derive(Debug, Clone)]
pub struct EnergyContext<'a> {
    tower: &'a LevelTower,
    pub profile: Profile,
    /// 𝒥_p on the gluing set.
    pub density: Vec<f64>,
    /// U_{p,+,k} on V_k for every built k.
    potentials: Vec<Vec<f64>>,
    /// μ-mean of 𝒰_{p,+} over the whole limit space.
    pub profile_mean: f64,
}

impl<'a> EnergyContext<'a> {
    /// Needs conductive uniformity (within `tol`) for the averaging density.
    pub fn new(tower: &'a LevelTower, profile: Profile, tol: f64) -> Result<Self> {
        let density = profile.density(tol)?;
        let u1 = profile.potential().to_vec();
        let mut potentials = vec![vec![1.0, 0.0]];
        for k in 1..=tower.built() {
            let prev = &potentials[k - 1];
            let lower = tower.level(k - 1)?;
            let lvl = tower.level(k)?;
            // on the cell of edge e: U_k = U_{k−1}(e⁻) + ∇U_{k−1}(e)·U₁
            let next: Vec<f64> = lvl
                .reps
                .iter()
                .map(|&(v, e)| {
                    let (hi, lo) = (prev[lower.plus(e)], prev[lower.minus(e)]);
                    lo + (hi - lo) * u1[v]
                })
                .collect();
            potentials.push(next);
        }
        let profile_mean = mean_of_profile(tower, &u1);
        Ok(EnergyContext {
            tower,
            profile,
            density,
            potentials,
            profile_mean,
        })
    }

    pub fn tower(&self) -> &LevelTower {
        self.tower
    }

    pub fn p(&self) -> f64 {
        self.profile.p
    }

    pub fn m_p(&self) -> f64 {
        self.profile.m_p
    }

    /// U_{p,+,k}, obtained from the level-1 solution through the
    /// self-similar expression.
    pub fn potential(&self, k: usize) -> Result<&[f64]> {
        self.potentials
            .get(k)
            .map(Vec::as_slice)
            .ok_or(Error::LevelNotBuilt(k))
    }

    fn graph(&self, n: usize) -> Result<&MultiGraph> {
        Ok(&self.tower.level(n)?.graph)
    }

    pub fn constant(&self, level: usize, c: f64) -> Result<CellFunction> {
        Ok(CellFunction {
            base_level: level,
            values: vec![c; self.tower.level(level)?.vertex_count()],
            exponent: self.p(),
        })
    }

    pub fn cell_function(&self, level: usize, values: Vec<f64>) -> Result<CellFunction> {
        let want = self.tower.level(level)?.vertex_count();
        if values.len() != want {
            return Err(Error::InvalidArgument(format!(
                "{} values for {want} vertices of level {level}",
                values.len()
            )));
        }
        Ok(CellFunction {
            base_level: level,
            values,
            exponent: self.p(),
        })
    }

    /// The level-0 interpolant whose read-outs are U_{p,+,n}.
    pub fn optimal_potential(&self) -> CellFunction {
        CellFunction {
            base_level: 0,
            values: vec![1.0, 0.0],
            exponent: self.p(),
        }
    }

    pub fn random_cell_function(&self, level: usize, seed: u64) -> Result<CellFunction> {
        let len = self.tower.level(level)?.vertex_count();
        self.cell_function(level, uniform_values(&mut rng(seed), len))
    }

    pub fn random_discrete(&self, level: usize, seed: u64) -> Result<DiscreteFunction> {
        let len = self.tower.level(level)?.vertex_count();
        Ok(DiscreteFunction {
            level,
            values: uniform_values(&mut rng(seed), len),
        })
    }

    fn check_profile(&self, f: &CellFunction) -> Result<()> {
        if (f.exponent - self.p()).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "function interpolated with p = {} read in a p = {} context",
                f.exponent,
                self.p()
            )));
        }
        Ok(())
    }

    /// V_n[𝒰_{p,m}[g]]: on each cell e·v, g(e⁻) + ∇g(e)·U_{p,+,n−m}(v).
    pub fn discretize(&self, f: &CellFunction, n: usize) -> Result<DiscreteFunction> {
        self.check_profile(f)?;
        let m = f.base_level;
        if n < m {
            return Err(Error::InvalidArgument(format!("discretize level {n} below base {m}")));
        }
        let k = n - m;
        let base = self.tower.level(m)?;
        let top = self.tower.level(n)?;
        let u = self.potential(k)?;
        let mut out = vec![f64::NAN; top.vertex_count()];
        for e in 0..base.edge_count() {
            let (hi, lo) = (f.values[base.plus(e)], f.values[base.minus(e)]);
            for (x, &y) in self.tower.sigma(m, e, k)?.iter().enumerate() {
                let val = lo + (hi - lo) * u[x];
                if out[y].is_nan() {
                    out[y] = val;
                } else if (out[y] - val).abs() > 1e-10 {
                    return Err(Error::Internal(format!(
                        "interpolant disagrees on shared vertex {} of level {n}: {} vs {val}",
                        top.graph.label(y),
                        out[y]
                    )));
                }
            }
        }
        Ok(DiscreteFunction { level: n, values: out })
    }

    /// V_{n,m}[f](v) = Σ_{a ∈ I^{n−m}} ∏𝒥(a_i) f(Φ_{v}(a)).
    pub fn average_down(&self, f: &DiscreteFunction, m: usize) -> Result<DiscreteFunction> {
        let n = f.level;
        if m > n {
            return Err(Error::InvalidArgument(format!("average_down from {n} to {m}")));
        }
        let words = self.tower.gluing_words(n - m);
        let weights: Vec<f64> = words
            .iter()
            .map(|w| w.iter().map(|&a| self.density[a]).product())
            .collect();
        let count = self.tower.level(m)?.vertex_count();
        let mut values = Vec::with_capacity(count);
        for v in 0..count {
            let mut acc = 0.0;
            for (w, wt) in words.iter().zip(&weights) {
                acc += wt * f.values[self.tower.gluing_map(m, v, w)?];
            }
            values.push(acc);
        }
        Ok(DiscreteFunction { level: m, values })
    }

    /// V_n[f] for any n: discretisation above the base level, fibre averages
    /// of the base values below it.
    pub fn read_out(&self, f: &CellFunction, n: usize) -> Result<DiscreteFunction> {
        if n >= f.base_level {
            self.discretize(f, n)
        } else {
            let base = DiscreteFunction {
                level: f.base_level,
                values: f.values.clone(),
            };
            self.average_down(&base, n)
        }
    }

    pub fn energy(&self, f: &DiscreteFunction) -> Result<f64> {
        Ok(energy(self.graph(f.level)?, &f.values, self.p()))
    }

    /// M_p^{−n}·E_p(f) for f on V_n.
    pub fn normalized_energy(&self, f: &DiscreteFunction) -> Result<f64> {
        Ok(self.energy(f)? * self.m_p().powi(-(f.level as i32)))
    }

    /// Ψ_{p,n}[f] = 𝒰_{p,n}[V_n[f]].
    pub fn mollify(&self, f: &CellFunction, n: usize) -> Result<CellFunction> {
        let v = self.read_out(f, n)?;
        Ok(CellFunction {
            base_level: n,
            values: v.values,
            exponent: f.exponent,
        })
    }

    pub fn check_strong_monotonicity(&self, f: &DiscreteFunction, m: usize) -> Result<CheckReport> {
        let n = f.level;
        let avg = self.average_down(f, m)?;
        let lhs = self.energy(&avg)?;
        let rhs = self.m_p().powi(-((n - m) as i32)) * self.energy(f)?;
        let mut r = CheckReport::new();
        r.push(
            format!("strong-monotonicity[n={n},m={m}]"),
            lhs <= rhs * (1.0 + 1e-9) + 1e-300,
            format!("E(V f) = {lhs:.6e} <= {rhs:.6e}, slack {:.3e}", rhs - lhs),
        );
        Ok(r)
    }

    /// Normalised energy of an interpolant is the same at every level ≥ base.
    pub fn check_interpolant_energy(&self, f: &CellFunction, n_max: usize) -> Result<CheckReport> {
        let m = f.base_level;
        let reference = self.normalized_energy(&self.discretize(f, m)?)?;
        let mut worst: f64 = 0.0;
        for n in m..=n_max {
            let e = self.normalized_energy(&self.discretize(f, n)?)?;
            worst = worst.max((e - reference).abs() / reference.max(1e-300));
        }
        let mut r = CheckReport::new();
        r.push(
            format!("interpolant-energy[m={m},n<={n_max}]"),
            worst <= 1e-8 || reference == 0.0,
            format!("normalized energy {reference:.12e}, max relative deviation {worst:.3e}"),
        );
        Ok(r)
    }

    pub fn check_tower_rule(&self, f: &CellFunction, n: usize, l: usize, m: usize) -> Result<CheckReport> {
        if !(n >= l && l >= m) {
            return Err(Error::InvalidArgument(format!("need n >= l >= m, got {n},{l},{m}")));
        }
        let vn = self.read_out(f, n)?;
        let direct = self.average_down(&vn, m)?;
        let expected = self.read_out(f, m)?;
        let composed = self.average_down(&self.average_down(&vn, l)?, m)?;
        let dev = |a: &DiscreteFunction, b: &DiscreteFunction| {
            a.values
                .iter()
                .zip(&b.values)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max)
        };
        let d1 = dev(&direct, &expected);
        let d2 = dev(&direct, &composed);
        let mut r = CheckReport::new();
        r.push(
            format!("tower-read-out[n={n},m={m}]"),
            d1 <= 1e-12,
            format!("max |V_(n,m) V_n f - V_m f| = {d1:.3e}"),
        );
        r.push(
            format!("tower-composition[n={n},l={l},m={m}]"),
            d2 <= 1e-12,
            format!("max |V_(n,m) - V_(l,m) V_(n,l)| = {d2:.3e}"),
        );
        Ok(r)
    }

    pub fn weak_derivative_level(&self, f: &CellFunction, n: usize) -> Result<WeakDerivative> {
        self.check_profile(f)?;
        let g1 = self.profile.gradient();
        let letters = self.tower.letters();
        let top = self.tower.level(n)?;
        let v = self.read_out(f, n)?;
        let u = self.potential(n)?;
        let scale = self.m_p().powi(-(n as i32));
        let mut derivative = Vec::with_capacity(top.edge_count());
        let mut gamma = Vec::with_capacity(top.edge_count());
        for e in 0..top.edge_count() {
            let word = crate::replacement::word_of(e, n, letters);
            if word.iter().any(|&l| g1[l] < ZERO_GRADIENT) {
                return Err(Error::DegenerateGradient(e));
            }
            let (a, b) = (top.plus(e), top.minus(e));
            // ∇h(e) = h(e⁻) − h(e⁺); U₋ = 1 − U₊
            let du_minus = u[a] - u[b];
            derivative.push((v.values[b] - v.values[a]) / du_minus);
            gamma.push(scale * du_minus.abs().powf(self.p()));
        }
        Ok(WeakDerivative {
            level: n,
            p: self.p(),
            derivative,
            gamma,
        })
    }

    /// Kusuoka–Zhou energy from exact cell means of the interpolant.
    pub fn kz_energy(&self, f: &CellFunction, n: usize) -> Result<f64> {
        self.check_profile(f)?;
        let lvl = self.tower.level(n)?;
        let means: Vec<f64> = if n >= f.base_level {
            let h = self.discretize(f, n)?;
            (0..lvl.edge_count())
                .map(|e| {
                    let (hi, lo) = (h.values[lvl.plus(e)], h.values[lvl.minus(e)]);
                    lo + (hi - lo) * self.profile_mean
                })
                .collect()
        } else {
            let fine = self.kz_means_at_base(f)?;
            let block = self.tower.letters().pow((f.base_level - n) as u32);
            fine.chunks(block)
                .map(|c| c.iter().sum::<f64>() / block as f64)
                .collect()
        };
        let mut pairs = Vec::new();
        for v in 0..lvl.vertex_count() {
            let inc = lvl.graph.incident(v);
            for i in 0..inc.len() {
                for j in i + 1..inc.len() {
                    pairs.push((inc[i].min(inc[j]), inc[i].max(inc[j])));
                }
            }
        }
        pairs.sort_unstable();
        pairs.dedup();
        let p = self.p();
        let sum: f64 = pairs
            .iter()
            .map(|&(a, b)| 2.0 * (means[a] - means[b]).abs().powf(p))
            .sum();
        Ok(self.m_p().powi(-(n as i32)) * sum)
    }

    fn kz_means_at_base(&self, f: &CellFunction) -> Result<Vec<f64>> {
        let lvl = self.tower.level(f.base_level)?;
        Ok((0..lvl.edge_count())
            .map(|e| {
                let (hi, lo) = (f.values[lvl.plus(e)], f.values[lvl.minus(e)]);
                lo + (hi - lo) * self.profile_mean
            })
            .collect())
    }

    /// Midpoint quadrature of the mean of 𝒰_{p,+} at depth `d`, with the
    /// error bar c_p^d / 2.
    pub fn profile_mean_quadrature(&self, d: usize) -> Result<(f64, f64)> {
        let lvl = self.tower.level(d)?;
        let u = self.potential(d)?;
        let total: f64 = (0..lvl.edge_count())
            .map(|e| 0.5 * (u[lvl.plus(e)] + u[lvl.minus(e)]))
            .sum();
        let c_p = self.profile.gradient().iter().copied().fold(0.0, f64::max);
        Ok((total / lvl.edge_count() as f64, 0.5 * c_p.powi(d as i32)))
    }

    /// Largest ratio of the mean p-deviation from the averaged boundary value
    /// to M_p^{−n}E_p(f) over random samples.
    pub fn check_poincare(&self, n: usize, samples: usize, seed: u64) -> Result<PoincareReport> {
        const SHARD: usize = 16;
        let shards = samples.div_ceil(SHARD);
        let results: Vec<Result<Vec<Option<f64>>>> = (0..shards)
            .into_par_iter()
            .map(|s| {
                let mut r = rng(derive_seed(seed, s as u64));
                let count = SHARD.min(samples - s * SHARD);
                let len = self.tower.level(n)?.vertex_count();
                (0..count)
                    .map(|_| {
                        let f = DiscreteFunction {
                            level: n,
                            values: uniform_values(&mut r, len),
                        };
                        self.poincare_ratio(&f)
                    })
                    .collect()
            })
            .collect();
        let mut max_ratio: f64 = 0.0;
        let mut skipped = 0;
        for shard in results {
            for r in shard? {
                match r {
                    Some(x) => max_ratio = max_ratio.max(x),
                    None => skipped += 1,
                }
            }
        }
        Ok(PoincareReport {
            level: n,
            p: self.p(),
            samples,
            skipped,
            max_ratio,
            seed,
        })
    }

    /// None when f has zero energy.
    pub fn poincare_ratio(&self, f: &DiscreteFunction) -> Result<Option<f64>> {
        let n = f.level;
        let denom = self.normalized_energy(f)?;
        if denom <= 0.0 {
            return Ok(None);
        }
        let avg = self.average_down(f, 0)?;
        let edges = self.tower.level(n)?.edge_count() as f64;
        let p = self.p();
        let dev = |c: f64| f.values.iter().map(|x| (x - c).abs().powf(p)).sum::<f64>() / edges;
        Ok(Some(dev(avg.values[0]).max(dev(avg.values[1])) / denom))
    }
}

fn mean_of_profile(tower: &LevelTower, u1: &[f64]) -> f64 {
    // m = (1/|E|) Σ_e [U(e⁻) + ∇U(e)·m]  ⇒  m = Σ U(e⁻) / (|E| − Σ (U(e⁺) − U(e⁻)))
    let igs = tower.igs();
    let mut low = 0.0;
    let mut drop = 0.0;
    for e in 0..igs.edge_count() {
        low += u1[igs.minus(e)];
        drop += u1[igs.plus(e)] - u1[igs.minus(e)];
    }
    low / (igs.edge_count() as f64 - drop)
}

#[derive(Debug, Clone, Serialize)]
pub struct WeakDerivative {
    pub level: usize,
    pub p: f64,
    pub derivative: Vec<f64>,
    /// M_p^{−n}|∇U_{p,n}(e)|^p
    pub gamma: Vec<f64>,
}

impl WeakDerivative {
    pub fn energy(&self) -> f64 {
        self.derivative
            .iter()
            .zip(&self.gamma)
            .map(|(d, g)| d.abs().powf(self.p) * g)
            .sum()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PoincareReport {
    pub level: usize,
    pub p: f64,
    pub samples: usize,
    pub skipped: usize,
    pub max_ratio: f64,
    pub seed: u64,
}

/// Raw energies of f and of its clamp to [lo, hi].
pub fn check_contraction(g: &MultiGraph, f: &DiscreteFunction, p: f64, lo: f64, hi: f64) -> Result<CheckReport> {
    if !(lo <= hi) {
        return Err(Error::InvalidArgument(format!("empty clamp interval [{lo}, {hi}]")));
    }
    let clamped: Vec<f64> = f.values.iter().map(|x| x.clamp(lo, hi)).collect();
    let before = energy(g, &f.values, p);
    let after = energy(g, &clamped, p);
    let mut r = CheckReport::new();
    r.push(
        format!("contraction[{lo},{hi}]"),
        after <= before,
        format!("E(clamped) = {after:.6e} <= E(f) = {before:.6e}"),
    );
    Ok(r)
}
