//! Energy measures of the optimal potential as Bernoulli weights on E₁, and
//! the singularity classifiers built on them.

use rand::distributions::{Distribution, WeightedIndex};
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::pharmonic::{Profile, ZERO_GRADIENT};
use crate::replacement::LevelTower;
use crate::rng::{derive_seed, rng};

/// Absolute tolerance for weight equality and flow invariance.
pub const DEFAULT_TOL: f64 = 1e-7;
pub const DEFAULT_ALPHA: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BernoulliWeights {
    pub p: f64,
    pub weight: Vec<f64>,
}

impl BernoulliWeights {
    /// M_p⁻¹|∇U_p(e)|^p, which equals |∇U_p(e)|·|𝒥_p(e)|.
    pub fn from_profile(profile: &Profile) -> Self {
        let raw: Vec<f64> = profile
            .gradient()
            .iter()
            .map(|g| g.powf(profile.p) / profile.m_p)
            .collect();
        let total: f64 = raw.iter().sum();
        BernoulliWeights {
            p: profile.p,
            weight: raw.into_iter().map(|w| w / total).collect(),
        }
    }

    pub fn uniform(edges: usize) -> Self {
        BernoulliWeights {
            p: f64::NAN,
            weight: vec![1.0 / edges as f64; edges],
        }
    }

    /// Measure of the cell of an address word.
    pub fn word_measure(&self, word: &[usize]) -> f64 {
        word.iter().map(|&e| self.weight[e]).product()
    }

    pub fn max_discrepancy(&self, other: &Self) -> f64 {
        self.weight
            .iter()
            .zip(&other.weight)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

pub fn energy_measure_weights(tower: &LevelTower, p: f64) -> Result<BernoulliWeights> {
    Ok(BernoulliWeights::from_profile(&Profile::new(tower, p)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceVerdict {
    AbsolutelyContinuous,
    Singular,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReferenceClassification {
    pub p: f64,
    pub verdict: ReferenceVerdict,
    /// max_e | |∇U_p(e)| − 1/L_* |
    pub gradient_deviation: f64,
    pub path_family: bool,
}

/// Γ_p⟨𝒰_p⟩ against the self-similar measure μ. The analytic test
/// (|∇U_p| ≡ 1/L_*) must agree with the existence of a covering geodesic
/// path family.
pub fn classify_vs_reference(tower: &LevelTower, profile: &Profile, tol: f64) -> Result<ReferenceClassification> {
    let l = tower.igs().l_star()? as f64;
    let deviation = profile
        .gradient()
        .iter()
        .map(|g| (g - 1.0 / l).abs())
        .fold(0.0, f64::max);
    let analytic = deviation <= tol;
    let path_family = tower.igs().check_cup3().is_some();
    if analytic != path_family {
        return Err(Error::CrossCheck(format!(
            "p = {}: gradient test says {analytic} (deviation {deviation:e}) but path family says {path_family}",
            profile.p
        )));
    }
    Ok(ReferenceClassification {
        p: profile.p,
        verdict: if analytic {
            ReferenceVerdict::AbsolutelyContinuous
        } else {
            ReferenceVerdict::Singular
        },
        gradient_deviation: deviation,
        path_family,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CrossClassification {
    pub p1: f64,
    pub p2: f64,
    pub singular: bool,
    pub max_discrepancy: f64,
    pub discrepancy: Vec<f64>,
    /// max |U_{p₁,+} − U_{p₂,+}| on V₁; reported only.
    pub potential_difference: f64,
}

pub fn classify_cross_p(a: &Profile, b: &Profile, tol: f64) -> CrossClassification {
    let (wa, wb) = (BernoulliWeights::from_profile(a), BernoulliWeights::from_profile(b));
    let discrepancy: Vec<f64> = wa.weight.iter().zip(&wb.weight).map(|(x, y)| x - y).collect();
    let max_discrepancy = discrepancy.iter().map(|d| d.abs()).fold(0.0, f64::max);
    let potential_difference = a
        .potential()
        .iter()
        .zip(b.potential())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    CrossClassification {
        p1: a.p,
        p2: b.p,
        singular: max_discrepancy > tol,
        max_discrepancy,
        discrepancy,
        potential_difference,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SobolevVerdict {
    Singular,
    NotSingular,
    Undecided,
}

#[derive(Debug, Clone, Serialize)]
pub struct SobolevClassification {
    pub p1: f64,
    pub p2: f64,
    pub verdict: SobolevVerdict,
    pub gradients_nondegenerate: bool,
    pub flow_p_invariant: bool,
    /// max over the grid and E₁ of |J_p(e) − J_{p_ref}(e)|
    pub flow_deviation: f64,
    pub note: String,
}

/// Nondegenerate gradients for every p of the grid and a p-independent unit
/// flow reduce Sobolev singularity to singularity of the energy measures.
/// Both hypotheses are checked on the grid only.
pub fn classify_sobolev(grid_profiles: &[Profile], p1: f64, p2: f64, tol: f64) -> Result<SobolevClassification> {
    let find = |p: f64| {
        grid_profiles
            .iter()
            .find(|q| (q.p - p).abs() < 1e-12)
            .ok_or_else(|| Error::InvalidArgument(format!("p = {p} not in the solved grid")))
    };
    let (a, b) = (find(p1)?, find(p2)?);
    let gradients_nondegenerate = grid_profiles
        .iter()
        .all(|q| q.gradient().iter().all(|&g| g >= ZERO_GRADIENT));
    let reference = &grid_profiles[0].solution.flow;
    let flow_deviation = grid_profiles
        .iter()
        .flat_map(|q| q.solution.flow.iter().zip(reference).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max);
    let flow_p_invariant = flow_deviation <= tol;
    let sampled = format!(
        "hypotheses checked on the sampled grid {:?} only",
        grid_profiles.iter().map(|q| q.p).collect::<Vec<_>>()
    );
    let (verdict, note) = if !gradients_nondegenerate {
        (SobolevVerdict::Undecided, format!("some gradient vanishes; {sampled}"))
    } else if !flow_p_invariant {
        (
            SobolevVerdict::Undecided,
            format!("unit flow depends on p, and energy measures can be singular without the Sobolev spaces being so; {sampled}"),
        )
    } else if classify_cross_p(a, b, tol).singular {
        (SobolevVerdict::Singular, sampled)
    } else {
        (SobolevVerdict::NotSingular, sampled)
    };
    Ok(SobolevClassification {
        p1,
        p2,
        verdict,
        gradients_nondegenerate,
        flow_p_invariant,
        flow_deviation,
        note,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "case", rename_all = "kebab-case")]
pub enum DoublingReport {
    /// Cells of the same level differ in measure by at most this factor.
    Doubling { p: f64, constant: f64 },
    /// Zero-gradient edges carry no energy; the measure concentrates on a
    /// σ-porous set.
    SigmaPorous { p: f64, zero_edges: Vec<usize> },
}

pub fn doubling_report(weights: &BernoulliWeights, tol: f64) -> DoublingReport {
    let zero_edges: Vec<usize> = (0..weights.weight.len())
        .filter(|&e| weights.weight[e] <= tol)
        .collect();
    if !zero_edges.is_empty() {
        return DoublingReport::SigmaPorous {
            p: weights.p,
            zero_edges,
        };
    }
    let max = weights.weight.iter().copied().fold(0.0, f64::max);
    let min = weights.weight.iter().copied().fold(f64::INFINITY, f64::min);
    DoublingReport::Doubling {
        p: weights.p,
        constant: max / min,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SllnVerdict {
    EmpiricallySingular,
    NotSeparated,
    SupportMismatch,
}

#[derive(Debug, Clone, Serialize)]
pub struct SllnReport {
    pub n_words: usize,
    pub word_len: usize,
    pub seed: u64,
    pub frequencies: Vec<f64>,
    pub frequency_deviation: Vec<f64>,
    /// Per-word log-likelihood-ratio statistics.
    pub statistics: Vec<f64>,
    pub mean: f64,
    /// Standard error of the mean.
    pub std_error: f64,
    pub kl_divergence: f64,
    pub z_score: f64,
    pub critical_z: f64,
    pub verdict: SllnVerdict,
}

const SLLN_SHARD: usize = 64;

/// Samples i.i.d. words from `w1` and tests whether the per-letter
/// log-likelihood ratio against `w2` is positive.
pub fn slln_experiment(
    w1: &BernoulliWeights,
    w2: &BernoulliWeights,
    n_words: usize,
    word_len: usize,
    seed: u64,
    alpha: f64,
    tol: f64,
) -> Result<SllnReport> {
    if n_words < 2 || word_len == 0 {
        return Err(Error::InvalidArgument("need at least 2 words of positive length".into()));
    }
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(Error::InvalidArgument(format!("significance {alpha} outside (0, 0.5)")));
    }
    let k = w1.weight.len();
    // letters whose weights agree within tol contribute nothing
    let log_ratio: Vec<f64> = (0..k)
        .map(|e| {
            let (a, b) = (w1.weight[e], w2.weight[e]);
            if (a - b).abs() <= tol || a == 0.0 {
                0.0
            } else if b == 0.0 {
                f64::INFINITY
            } else {
                (a / b).ln()
            }
        })
        .collect();
    let kl: f64 = (0..k).map(|e| w1.weight[e] * log_ratio[e]).filter(|x| !x.is_nan()).sum();
    let critical_z = -Normal::new(0.0, 1.0)
        .map_err(|e| Error::Internal(e.to_string()))?
        .inverse_cdf(alpha);
    let dist = WeightedIndex::new(&w1.weight).map_err(|e| Error::InvalidWeights(e.to_string()))?;

    let shards = n_words.div_ceil(SLLN_SHARD);
    let parts: Vec<(Vec<f64>, Vec<u64>)> = (0..shards)
        .into_par_iter()
        .map(|s| {
            let mut r = rng(derive_seed(seed, s as u64));
            let count = SLLN_SHARD.min(n_words - s * SLLN_SHARD);
            let mut counts = vec![0u64; k];
            let stats = (0..count)
                .map(|_| {
                    let mut acc = 0.0;
                    for _ in 0..word_len {
                        let e = dist.sample(&mut r);
                        counts[e] += 1;
                        acc += log_ratio[e];
                    }
                    acc / word_len as f64
                })
                .collect();
            (stats, counts)
        })
        .collect();
    let mut statistics = Vec::with_capacity(n_words);
    let mut counts = vec![0u64; k];
    for (s, c) in parts {
        statistics.extend(s);
        for (t, x) in counts.iter_mut().zip(c) {
            *t += x;
        }
    }
    let letters = (n_words * word_len) as f64;
    let frequencies: Vec<f64> = counts.iter().map(|&c| c as f64 / letters).collect();
    let frequency_deviation = frequencies.iter().zip(&w1.weight).map(|(f, w)| f - w).collect();

    let nf = n_words as f64;
    let mean = statistics.iter().sum::<f64>() / nf;
    if !mean.is_finite() {
        return Ok(SllnReport {
            n_words,
            word_len,
            seed,
            frequencies,
            frequency_deviation,
            statistics,
            mean,
            std_error: f64::NAN,
            kl_divergence: kl,
            z_score: f64::INFINITY,
            critical_z,
            verdict: SllnVerdict::SupportMismatch,
        });
    }
    let var = statistics.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    let std_error = (var / nf).sqrt();
    let z_score = if std_error > 0.0 { mean / std_error } else { 0.0 };
    Ok(SllnReport {
        n_words,
        word_len,
        seed,
        frequencies,
        frequency_deviation,
        statistics,
        mean,
        std_error,
        kl_divergence: kl,
        z_score,
        critical_z,
        verdict: if z_score > critical_z {
            SllnVerdict::EmpiricallySingular
        } else {
            SllnVerdict::NotSeparated
        },
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PerExponent {
    pub p: f64,
    pub weights: Vec<f64>,
    pub dwp_equals_p: bool,
    pub gradient_nondegenerate: bool,
    pub vs_reference: ReferenceVerdict,
    pub doubling: DoublingReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct SingularityReport {
    pub grid: Vec<f64>,
    pub per_p: Vec<PerExponent>,
    pub flow_p_invariant: bool,
    pub flow_deviation: f64,
    pub cross_p: Vec<CrossClassification>,
    pub sobolev: Vec<SobolevClassification>,
    pub note: String,
}

/// Every classifier for the `selected` exponents and their pairs. The
/// Sobolev hypotheses are checked over all of `grid_profiles`.
pub fn singularity_report(
    tower: &LevelTower,
    grid_profiles: &[Profile],
    selected: &[f64],
    tol: f64,
) -> Result<SingularityReport> {
    if grid_profiles.is_empty() || selected.is_empty() {
        return Err(Error::InvalidArgument("empty exponent grid".into()));
    }
    let find = |p: f64| {
        grid_profiles
            .iter()
            .find(|q| (q.p - p).abs() < 1e-12)
            .ok_or_else(|| Error::InvalidArgument(format!("p = {p} not in the solved grid")))
    };
    let chosen: Vec<&Profile> = selected.iter().map(|&p| find(p)).collect::<Result<_>>()?;
    let mut per_p = Vec::new();
    for prof in &chosen {
        let w = BernoulliWeights::from_profile(prof);
        let r = classify_vs_reference(tower, prof, tol)?;
        per_p.push(PerExponent {
            p: prof.p,
            dwp_equals_p: r.verdict == ReferenceVerdict::AbsolutelyContinuous,
            gradient_nondegenerate: prof.gradient().iter().all(|&g| g >= ZERO_GRADIENT),
            vs_reference: r.verdict,
            doubling: doubling_report(&w, tol),
            weights: w.weight,
        });
    }
    let mut cross_p = Vec::new();
    let mut sobolev = Vec::new();
    for i in 0..chosen.len() {
        for j in i + 1..chosen.len() {
            let (a, b) = (chosen[i], chosen[j]);
            cross_p.push(classify_cross_p(a, b, tol));
            sobolev.push(classify_sobolev(grid_profiles, a.p, b.p, tol)?);
        }
    }
    let reference = &grid_profiles[0].solution.flow;
    let flow_deviation = grid_profiles
        .iter()
        .flat_map(|q| q.solution.flow.iter().zip(reference).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max);
    Ok(SingularityReport {
        grid: grid_profiles.iter().map(|q| q.p).collect(),
        per_p,
        flow_p_invariant: flow_deviation <= tol,
        flow_deviation,
        cross_p,
        sobolev,
        note: "conditions quantified over all p are evidenced on this grid only".into(),
    })
}
