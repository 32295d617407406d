use super::VectorFieldSystem;
use crate::expr::{Expression, Smoothness};
use serde::Serialize;

/// A coefficient whose sampled derivatives contradict its declared class.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct AuditIssue {
    pub field: usize,
    pub component: usize,
    pub alpha: Vec<u8>,
    pub location: Vec<f64>,
    pub message: String,
}

fn multi_indices(dim: usize, order: usize) -> Vec<Vec<u8>> {
    fn rec(dim: usize, left: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if cur.len() + 1 == dim {
            cur.push(left as u8);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for a in (0..=left).rev() {
            cur.push(a as u8);
            rec(dim, left - a, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(dim, order, &mut Vec::new(), &mut out);
    out
}

const LINE_POINTS: usize = 801;

fn audit_line(
    d: &Expression,
    start: &[f64],
    axis: usize,
    lo: f64,
    hi: f64,
    lipschitz: bool,
) -> Option<(Vec<f64>, String)> {
    let h = (hi - lo) / (LINE_POINTS - 1) as f64;
    let mut x = start.to_vec();
    let vals: Vec<f64> = (0..LINE_POINTS)
        .map(|k| {
            x[axis] = lo + h * k as f64;
            d.eval(&x)
        })
        .collect();
    if vals.iter().any(|v| !v.is_finite()) {
        x[axis] = lo;
        return Some((x, "non-finite derivative".into()));
    }
    let diffs: Vec<f64> = vals.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let mut sorted = diffs.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    let scale = 1.0 + vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let (k, &jump) = diffs
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("line has points");
    x[axis] = lo + h * k as f64;
    if jump > 1e-3 * scale && jump > 100.0 * median + 1e-9 * scale {
        return Some((x, format!("jump of {:.3e} in the derivative", jump)));
    }
    if lipschitz && jump / h > 1e6 {
        return Some((x, format!("difference quotient {:.3e}", jump / h)));
    }
    None
}

/// Samples the highest declared derivatives of every coefficient along
/// coordinate lines and flags jumps (continuity) and, for `C^{k,1}`, huge
/// difference quotients. The declaration is still trusted by the caller.
pub fn audit_smoothness(sys: &VectorFieldSystem) -> Vec<AuditIssue> {
    let mut issues = Vec::new();
    let dom = &sys.domain;
    let center = dom.center();
    let offsets = [0.137, -0.291];
    for i in sys.field_indices() {
        let f = match sys.field(i) {
            Ok(f) => f,
            Err(_) => continue,
        };
        let (order, lipschitz) = match f.smoothness {
            Smoothness::Ck(k) => (k.min(4) as usize, false),
            Smoothness::CkLip(k) => (k.min(4) as usize, true),
        };
        for (j, c) in f.coeffs.iter().enumerate() {
            if !c.has_kinks() {
                continue;
            }
            for alpha in multi_indices(sys.dim, order) {
                let d = c.partial(&alpha);
                'lines: for axis in 0..sys.dim {
                    for off in offsets {
                        let start: Vec<f64> = center
                            .iter()
                            .enumerate()
                            .map(|(m, v)| v + off * (dom.hi[m] - dom.lo[m]) * (m + 1) as f64 / 3.0)
                            .collect();
                        if let Some((loc, msg)) =
                            audit_line(&d, &start, axis, dom.lo[axis], dom.hi[axis], lipschitz)
                        {
                            issues.push(AuditIssue {
                                field: i,
                                component: j,
                                alpha: alpha.clone(),
                                location: loc,
                                message: format!("declared {}: {}", f.smoothness, msg),
                            });
                            break 'lines;
                        }
                    }
                }
            }
        }
    }
    issues
}
