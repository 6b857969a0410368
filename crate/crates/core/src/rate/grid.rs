//! Mesh search over private-coin protocols and the achieved envelope.

use super::curve::{Envelope, RateCurve};
use crate::error::{Error, Result};
use crate::prob::{JointDist, OutcomeSpace};
use crate::protocol::{info_costs, Flavor, Kernel, ProtocolTree};
use crate::sources::SourceHandle;
use rayon::prelude::*;
use std::sync::Arc;

/// Search settings. Kernel rows range over the simplex points with masses
/// in multiples of `1/granularity`.
#[derive(Clone, Debug)]
pub struct MeshOptions {
    pub granularity: u32,
    /// Per-round alphabet sizes; `None` uses the support-lemma bound.
    pub caps: Option<Vec<usize>>,
    /// Largest number of protocols to evaluate.
    pub budget: u64,
}

impl Default for MeshOptions {
    fn default() -> Self {
        Self {
            granularity: 4,
            caps: None,
            budget: 2_000_000,
        }
    }
}

/// `|U_t| ≤ |X||Y| Π_{t'<t} |U_{t'}| + 1`, the alphabet bound that loses
/// nothing in the supremum.
pub fn support_caps(nx: usize, ny: usize, rounds: usize) -> Vec<usize> {
    let mut caps = Vec::with_capacity(rounds);
    let mut prod: usize = 1;
    for _ in 0..rounds {
        let c = nx.saturating_mul(ny).saturating_mul(prod).saturating_add(1);
        caps.push(c);
        prod = prod.saturating_mul(c);
    }
    caps
}

/// Compositions of `g` into `width` parts, lexicographic from `(g, 0, ..)`.
pub(crate) fn mesh_points(width: usize, g: u32) -> Vec<Vec<u32>> {
    fn go(left: u32, slots: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if slots == 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for k in (0..=left).rev() {
            cur.push(k);
            go(left - k, slots - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(g, width, &mut Vec::new(), &mut out);
    out
}

/// Index-addressable family of mesh protocols.
struct Family {
    nx: usize,
    ny: usize,
    caps: Vec<usize>,
    g: u32,
    points: Vec<Vec<Vec<u32>>>,
    /// Kernel rows per round.
    rows: Vec<usize>,
}

impl Family {
    fn new(nx: usize, ny: usize, caps: Vec<usize>, g: u32) -> Self {
        let points: Vec<_> = caps.iter().map(|&c| mesh_points(c, g)).collect();
        let mut rows = Vec::with_capacity(caps.len());
        let mut histories: usize = 1;
        for (t, &c) in caps.iter().enumerate() {
            rows.push(histories.saturating_mul(if t % 2 == 0 { nx } else { ny }));
            histories = histories.saturating_mul(c);
        }
        Self {
            nx,
            ny,
            caps,
            g,
            points,
            rows,
        }
    }

    fn count(&self) -> u128 {
        self.points
            .iter()
            .zip(&self.rows)
            .map(|(p, &r)| (p.len() as u128).checked_pow(r as u32).unwrap_or(u128::MAX))
            .fold(1u128, |a, b| a.saturating_mul(b))
    }

    fn build(&self, mut index: u128) -> ProtocolTree<f64> {
        let mut b = ProtocolTree::<f64>::builder(OutcomeSpace::range(self.nx), OutcomeSpace::range(self.ny))
            .flavor(Flavor::PrivateCoin);
        for t in 0..self.caps.len() {
            let pts = &self.points[t];
            let mut flat = Vec::with_capacity(self.rows[t] * self.caps[t]);
            for _ in 0..self.rows[t] {
                let pick = (index % pts.len() as u128) as usize;
                index /= pts.len() as u128;
                flat.extend(pts[pick].iter().map(|&k| k as f64 / self.g as f64));
            }
            b = b.round(
                OutcomeSpace::range(self.caps[t]),
                Kernel::Table {
                    width: self.caps[t],
                    rows: Arc::new(flat),
                },
            );
        }
        b.build().expect("mesh rows are distributions")
    }
}

/// Grid approximation of the largest external information cost at each
/// internal-cost budget in `c_grid`, over `rounds`-round private-coin
/// protocols with mesh kernels. Values are achieved, hence lower bounds;
/// past the smallest internal cost of a found protocol that exhausts the
/// correlation, the curve follows `C + I(X;Y)`.
pub fn approx_tilfc(s: &SourceHandle, rounds: usize, c_grid: &[f64], opts: &MeshOptions) -> Result<RateCurve> {
    let joint = s.exact::<f64>(crate::ATOM_CAP)?;
    let mut curve = approx_tilfc_joint(&joint, rounds, c_grid, opts)?;
    curve.source = s.kind_name().to_string();
    Ok(curve)
}

pub fn approx_tilfc_joint(joint: &JointDist<f64>, rounds: usize, c_grid: &[f64], opts: &MeshOptions) -> Result<RateCurve> {
    if joint.arity() != 2 {
        return Err(Error::InvalidParams("source must be a joint over (X, Y)".into()));
    }
    if rounds == 0 || opts.granularity == 0 {
        return Err(Error::InvalidParams("need at least one round and a positive granularity".into()));
    }
    let (nx, ny) = (joint.factors()[0].len(), joint.factors()[1].len());
    let lemma = support_caps(nx, ny, rounds);
    let caps = match &opts.caps {
        Some(c) if c.len() != rounds || c.contains(&0) => {
            return Err(Error::InvalidParams("alphabet caps need one positive entry per round".into()))
        }
        Some(c) => c.iter().zip(&lemma).map(|(&a, &b)| a.min(b)).collect(),
        None => lemma.clone(),
    };
    let family = Family::new(nx, ny, caps.clone(), opts.granularity);
    let count = family.count();
    if count > opts.budget as u128 {
        return Err(Error::BudgetExhausted(format!(
            "{count} mesh protocols projected, budget is {}",
            opts.budget
        )));
    }
    let costs: Vec<(f64, f64)> = (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let r = info_costs(&family.build(i as u128), joint, crate::STATE_CAP)?;
            Ok((r.ic_int.max(0.0), r.ic_ext.max(0.0)))
        })
        .collect::<Result<_>>()?;
    let source_mi = joint.mutual_info(&[0], &[1], &[]);
    let env = Envelope::from_points(&costs, source_mi);
    let mut witnesses = std::collections::BTreeMap::new();
    for i in env.used_indices() {
        witnesses.insert(format!("m{i}"), family.build(i as u128));
    }
    let mut curve = RateCurve::assemble(env, c_grid, witnesses, "m")?;
    curve.rounds = rounds;
    curve.granularity = opts.granularity;
    curve.alphabet_caps = caps.clone();
    curve.heuristic = caps != lemma;
    curve.evaluated = count as u64;
    Ok(curve)
}

/// Curve spanned by explicit witness protocols (and their mixtures).
pub fn curve_from_witnesses(joint: &JointDist<f64>, witnesses: Vec<ProtocolTree<f64>>, c_grid: &[f64]) -> Result<RateCurve> {
    let costs: Vec<(f64, f64)> = witnesses
        .iter()
        .map(|p| {
            let r = info_costs(p, joint, crate::STATE_CAP)?;
            Ok((r.ic_int.max(0.0), r.ic_ext.max(0.0)))
        })
        .collect::<Result<_>>()?;
    let rounds = witnesses.iter().map(|p| p.rounds()).max().unwrap_or(0);
    let env = Envelope::from_points(&costs, joint.mutual_info(&[0], &[1], &[]));
    let used = env.used_indices();
    let map = witnesses
        .into_iter()
        .enumerate()
        .filter(|(i, _)| used.contains(i))
        .map(|(i, p)| (format!("w{i}"), p))
        .collect();
    let mut curve = RateCurve::assemble(env, c_grid, map, "w")?;
    curve.rounds = rounds;
    curve.heuristic = true;
    curve.evaluated = costs.len() as u64;
    Ok(curve)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mesh_point_counts() {
        // C(g + w - 1, w - 1)
        assert_eq!(mesh_points(5, 4).len(), 70);
        assert_eq!(mesh_points(2, 2).len(), 3);
        assert!(mesh_points(3, 4).iter().all(|p| p.iter().sum::<u32>() == 4));
        assert_eq!(mesh_points(3, 2)[0], vec![2, 0, 0]);
    }

    #[test]
    fn support_lemma_caps() {
        assert_eq!(support_caps(2, 2, 1), vec![5]);
        assert_eq!(support_caps(2, 2, 2), vec![5, 21]);
    }

    #[test]
    fn family_count_and_first_member() {
        let f = Family::new(2, 2, vec![5], 4);
        assert_eq!(f.count(), 4900);
        let p = f.build(0);
        assert_eq!(p.rounds(), 1);
        // Index 0 puts all mass on symbol 0: an information-free protocol.
        assert_eq!(p.row(0, &[], 1, 0).unwrap().unwrap(), vec![(0, 1.0)]);
    }
}
