use super::commutator::{check_bracket, JetTable};
use super::{MultiIndex, VectorFieldSystem};
use crate::error::{Error, Result};
use crate::linalg;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Brackets of weight at most the step, without the identically vanishing
/// `i_{l-1} = i_l` tails and with only one of each antisymmetric pair,
/// sorted by weight and then lexicographically.
pub fn canonical_indices(sys: &VectorFieldSystem) -> Vec<MultiIndex> {
    let fields = sys.field_indices();
    let mut out = Vec::new();
    let mut frontier: Vec<Vec<usize>> = fields.iter().map(|&i| vec![i]).collect();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for tail in frontier {
            let idx = MultiIndex(tail.clone());
            if idx.weight() > sys.step {
                continue;
            }
            out.push(idx);
            for &i in &fields {
                let mut v = Vec::with_capacity(tail.len() + 1);
                v.push(i);
                v.extend_from_slice(&tail);
                if v.len() == 2 && v[0] >= v[1] {
                    continue;
                }
                next.push(v);
            }
        }
        frontier = next;
    }
    let sys_ok: Vec<MultiIndex> = out
        .into_iter()
        .filter(|i| check_bracket(sys, i).is_ok())
        .collect();
    let mut sorted = sys_ok;
    sorted.sort_by(|a, b| (a.weight(), &a.0).cmp(&(b.weight(), &b.0)));
    sorted
}

/// A candidate basis `eta = (I_1, ..., I_p)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BasisFamily(pub Vec<MultiIndex>);

impl BasisFamily {
    /// Total weight `|eta| = sum |I_j|`.
    pub fn weight(&self) -> usize {
        self.0.iter().map(|i| i.weight()).sum()
    }

    pub fn weights(&self) -> Vec<usize> {
        self.0.iter().map(|i| i.weight()).collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for BasisFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        write!(f, "{{{}}}", parts.join(" "))
    }
}

/// All canonical brackets evaluated at one point.
#[derive(Clone, Debug)]
pub struct BracketValues {
    pub point: Vec<f64>,
    pub indices: Vec<MultiIndex>,
    pub values: Vec<Vec<f64>>,
}

impl BracketValues {
    pub fn value(&self, index: &MultiIndex) -> Option<&[f64]> {
        self.indices
            .iter()
            .position(|i| i == index)
            .map(|k| self.values[k].as_slice())
    }

    pub fn det(&self, basis: &BasisFamily) -> Option<f64> {
        let rows: Option<Vec<Vec<f64>>> = basis
            .0
            .iter()
            .map(|i| self.value(i).map(|v| v.to_vec()))
            .collect();
        rows.map(|r| linalg::det(&r))
    }
}

pub fn bracket_values(sys: &VectorFieldSystem, x: &[f64]) -> Result<BracketValues> {
    sys.check_point(x)?;
    let indices = canonical_indices(sys);
    let longest = indices.iter().map(|i| i.len()).max().unwrap_or(1);
    let mut table = JetTable::new(sys, x, longest - 1);
    let values = indices
        .iter()
        .map(|i| Ok(table.get(&i.0)?.iter().map(|j| j.value()).collect()))
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok(BracketValues {
        point: x.to_vec(),
        indices,
        values,
    })
}

/// Candidate bases of size `p` drawn from the canonical brackets, ordered by
/// total weight and then lexicographically.
pub fn candidate_bases(sys: &VectorFieldSystem) -> Vec<BasisFamily> {
    let list = canonical_indices(sys);
    let p = sys.dim;
    let mut out = Vec::new();
    let mut pick = Vec::with_capacity(p);
    combos(&list, p, 0, &mut pick, &mut out);
    out.sort_by_key(|b| b.weight());
    out
}

fn combos(
    list: &[MultiIndex],
    p: usize,
    start: usize,
    pick: &mut Vec<usize>,
    out: &mut Vec<BasisFamily>,
) {
    if pick.len() == p {
        out.push(BasisFamily(pick.iter().map(|&k| list[k].clone()).collect()));
        return;
    }
    for k in start..list.len() {
        pick.push(k);
        combos(list, p, k + 1, pick, out);
        pick.pop();
    }
}

/// `lambda_eta(x) = det(X_[I_1](x), ..., X_[I_p](x))`.
pub fn lambda(sys: &VectorFieldSystem, basis: &BasisFamily, x: &[f64]) -> Result<f64> {
    if basis.len() != sys.dim {
        return Err(Error::Invalid(format!(
            "basis has {} elements in dimension {}",
            basis.len(),
            sys.dim
        )));
    }
    sys.check_point(x)?;
    let longest = basis.0.iter().map(|i| i.len()).max().unwrap_or(1);
    let mut table = JetTable::new(sys, x, longest - 1);
    let rows = basis
        .0
        .iter()
        .map(|i| {
            check_bracket(sys, i)?;
            Ok(table.get(&i.0)?.iter().map(|j| j.value()).collect())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok(linalg::det(&rows))
}

#[derive(Clone, Debug, Serialize)]
pub struct RankReport {
    pub point: Vec<f64>,
    pub rank: usize,
    pub basis: BasisFamily,
    pub det: f64,
}

/// Rank of the span of all brackets of weight at most the step, with the
/// lowest-weight basis of maximal determinant.
pub fn hormander_rank(sys: &VectorFieldSystem, x: &[f64]) -> Result<RankReport> {
    let vals = bracket_values(sys, x)?;
    let rank = linalg::rank(&vals.values, 1e-10);
    if rank < sys.dim {
        return Err(Error::RankDeficient {
            point: x.to_vec(),
            rank,
            dim: sys.dim,
        });
    }
    let (basis, det) = best_by(&vals, candidate_bases(sys), |d, _| d.abs())?;
    Ok(RankReport {
        point: x.to_vec(),
        rank,
        basis,
        det,
    })
}

fn best_by(
    vals: &BracketValues,
    candidates: Vec<BasisFamily>,
    score: impl Fn(f64, &BasisFamily) -> f64,
) -> Result<(BasisFamily, f64)> {
    let mut best: Option<(BasisFamily, f64, f64)> = None;
    for b in candidates {
        let d = vals.det(&b).unwrap_or(0.0);
        let s = score(d, &b);
        if best.as_ref().map_or(true, |(_, _, bs)| s > *bs) {
            best = Some((b, d, s));
        }
    }
    match best {
        Some((b, d, s)) if s > 0.0 => Ok((b, d)),
        _ => Err(Error::RankDeficient {
            point: vals.point.clone(),
            rank: linalg::rank(&vals.values, 1e-10),
            dim: vals.point.len(),
        }),
    }
}

/// Basis selected at scale `rho` together with the scores behind the choice.
#[derive(Clone, Debug, Serialize)]
pub struct OptimalBasis {
    pub basis: BasisFamily,
    pub det: f64,
    pub score: f64,
    pub max_score: f64,
}

/// Basis maximising `|lambda_eta(x)| rho^|eta|`; exact ties go to the lower
/// weight and then to the lexicographically first candidate. The maximiser
/// satisfies the one-half threshold against every other candidate.
pub fn optimal_basis(sys: &VectorFieldSystem, x: &[f64], rho: f64) -> Result<OptimalBasis> {
    if !(rho > 0.0) {
        return Err(Error::Invalid(format!("scale must be positive, got {}", rho)));
    }
    let vals = bracket_values(sys, x)?;
    let (basis, det) = best_by(&vals, candidate_bases(sys), |d, b| {
        d.abs() * rho.powi(b.weight() as i32)
    })?;
    let score = det.abs() * rho.powi(basis.weight() as i32);
    Ok(OptimalBasis {
        basis,
        det,
        score,
        max_score: score,
    })
}
