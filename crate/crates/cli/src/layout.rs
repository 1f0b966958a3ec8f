//! Deterministic drawings of G_n. Each vertex of G_n is the image of a
//! generator vertex in some cell; its position is the template position
//! carried onto the parent edge by the similarity sending (0,0) to e⁺ and
//! (1,0) to e⁻.

use std::fmt::Write;

use igs_core::igs::Igs;
use igs_core::replacement::LevelTower;

use crate::CliResult;

type Pt = (f64, f64);

fn cmul(a: Pt, b: Pt) -> Pt {
    (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
}

fn cdiv(a: Pt, b: Pt) -> Pt {
    let d = b.0 * b.0 + b.1 * b.1;
    ((a.0 * b.0 + a.1 * b.1) / d, (a.1 * b.0 - a.0 * b.1) / d)
}

fn mean(pts: impl Iterator<Item = Pt>) -> Pt {
    let (mut x, mut y, mut k) = (0.0, 0.0, 0.0);
    for p in pts {
        x += p.0;
        y += p.1;
        k += 1.0;
    }
    (x / k, y / k)
}

/// Generator coordinates with the centre of I₊ at 0 and of I₋ at 1.
pub fn template(igs: &Igs) -> Vec<Pt> {
    let raw = match igs.layout() {
        Some(l) => l.to_vec(),
        None => force_layout(igs),
    };
    let a = mean(igs.i_plus().iter().map(|&v| raw[v]));
    let b = mean(igs.i_minus().iter().map(|&v| raw[v]));
    let span = (b.0 - a.0, b.1 - a.1);
    raw.iter().map(|&c| cdiv((c.0 - a.0, c.1 - a.1), span)).collect()
}

/// Spring embedding of G₁ with I₊ pinned on x = 0 and I₋ on x = 1.
fn force_layout(igs: &Igs) -> Vec<Pt> {
    let g = igs.generator();
    let n = g.vertex_count();
    let from = g.bfs_distances(igs.i_plus());
    let to = g.bfs_distances(igs.i_minus());
    let mut pos: Vec<Pt> = (0..n)
        .map(|v| {
            let (a, b) = (from[v].unwrap_or(0) as f64, to[v].unwrap_or(0) as f64);
            let x = if a + b > 0.0 { a / (a + b) } else { 0.5 };
            // golden-ratio spread keeps the start deterministic and generic
            let y = ((v as f64 * 0.618_033_988_75).fract() - 0.5) * 0.6;
            (x, y)
        })
        .collect();
    let pinned: Vec<bool> = (0..n)
        .map(|v| igs.i_plus().contains(&v) || igs.i_minus().contains(&v))
        .collect();
    let k = 1.0 / (n as f64).sqrt();
    let mut temp = 0.1;
    for _ in 0..300 {
        let mut disp = vec![(0.0, 0.0); n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let d = (pos[i].0 - pos[j].0, pos[i].1 - pos[j].1);
                    let r = (d.0 * d.0 + d.1 * d.1).sqrt().max(1e-6);
                    let f = k * k / r;
                    disp[i].0 += d.0 / r * f;
                    disp[i].1 += d.1 / r * f;
                }
            }
        }
        for &(a, b) in g.edges() {
            let d = (pos[a].0 - pos[b].0, pos[a].1 - pos[b].1);
            let r = (d.0 * d.0 + d.1 * d.1).sqrt().max(1e-6);
            let f = r * r / k;
            disp[a].0 -= d.0 / r * f;
            disp[a].1 -= d.1 / r * f;
            disp[b].0 += d.0 / r * f;
            disp[b].1 += d.1 / r * f;
        }
        for v in 0..n {
            let len = (disp[v].0 * disp[v].0 + disp[v].1 * disp[v].1).sqrt().max(1e-12);
            let step = len.min(temp);
            if pinned[v] {
                pos[v].1 += disp[v].1 / len * step;
            } else {
                pos[v].0 += disp[v].0 / len * step;
                pos[v].1 += disp[v].1 / len * step;
            }
        }
        temp *= 0.98;
    }
    pos
}

pub fn positions(tower: &LevelTower, n: usize) -> CliResult<Vec<Pt>> {
    let t = template(tower.igs());
    let mut pos = vec![(0.0, 0.0), (1.0, 0.0)];
    for k in 1..=n {
        let lower = tower.level(k - 1)?;
        let lvl = tower.level(k)?;
        pos = lvl
            .reps
            .iter()
            .map(|&(v, e)| {
                let a = pos[lower.plus(e)];
                let b = pos[lower.minus(e)];
                let z = cmul((b.0 - a.0, b.1 - a.1), t[v]);
                (a.0 + z.0, a.1 + z.1)
            })
            .collect();
    }
    Ok(pos)
}

pub fn svg(tower: &LevelTower, n: usize) -> CliResult<String> {
    let pos = positions(tower, n)?;
    let lvl = tower.level(n)?;
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &pos {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let width = 800.0;
    let margin = 20.0;
    let scale = (width - 2.0 * margin) / (x1 - x0).max(1e-9);
    let height = ((y1 - y0) * scale + 2.0 * margin).max(2.0 * margin);
    let map = |(x, y): Pt| (margin + (x - x0) * scale, margin + (y1 - y) * scale);
    let radius = (4.0 / (1.0 + (lvl.vertex_count() as f64).log10())).max(0.8);

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" viewBox=\"0 0 {width:.0} {height:.0}\">"
    );
    let _ = writeln!(out, "<title>{} level {n}</title>", tower.igs().name);
    let _ = writeln!(out, "<g stroke=\"#333\" stroke-width=\"1\">");
    for &(a, b) in lvl.graph.edges() {
        let (p, q) = (map(pos[a]), map(pos[b]));
        let _ = writeln!(out, "<line x1=\"{:.3}\" y1=\"{:.3}\" x2=\"{:.3}\" y2=\"{:.3}\"/>", p.0, p.1, q.0, q.1);
    }
    let _ = writeln!(out, "</g>\n<g fill=\"#c33\">");
    for &pt in &pos {
        let p = map(pt);
        let _ = writeln!(out, "<circle cx=\"{:.3}\" cy=\"{:.3}\" r=\"{radius:.2}\"/>", p.0, p.1);
    }
    let _ = writeln!(out, "</g>\n</svg>");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use igs_core::igs::{diamond, path2, theta};

    #[test]
    fn path_positions_are_dyadic() {
        let mut t = LevelTower::new(path2()).unwrap();
        t.ensure(3).unwrap();
        let mut xs: Vec<f64> = positions(&t, 3).unwrap().iter().map(|p| p.0).collect();
        xs.sort_by(f64::total_cmp);
        for (i, x) in xs.iter().enumerate() {
            assert!((x - i as f64 / 8.0).abs() < 1e-9);
        }
    }

    #[test]
    fn template_pins_gluing_sets() {
        for igs in [diamond(), theta(2, 2).unwrap()] {
            let t = template(&igs);
            let a = mean(igs.i_plus().iter().map(|&v| t[v]));
            let b = mean(igs.i_minus().iter().map(|&v| t[v]));
            assert!(a.0.abs() < 1e-12 && a.1.abs() < 1e-12);
            assert!((b.0 - 1.0).abs() < 1e-12 && b.1.abs() < 1e-12);
        }
    }
}
