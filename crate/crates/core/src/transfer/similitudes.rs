use crate::error::{overflow, Result};
use crate::qform::{GramMatrix, IntVector3, Mat3, Similitude};
use crate::repenum::representations;

/// Default number of similitudes collected when discovering a pool.
pub const DEFAULT_POOL_CAP: usize = 5000;

/// Up to `cap` elements of `R(f, g, d)`, in lexicographic order of their columns.
///
/// Column `j` of `T` represents `d^2 g_jj` by `f`; pairs of columns are
/// filtered by the off-diagonal conditions `t_i^t M_f t_j = d^2 g_ij`.
pub fn find_similitudes(
    f: &GramMatrix,
    g: &GramMatrix,
    d: i64,
    cap: usize,
) -> Result<Vec<Similitude>> {
    let d2 = d.checked_mul(d).ok_or_else(|| overflow("scale squared", d))?;
    let ge = g.entries();
    let mut columns: [Vec<IntVector3>; 3] = Default::default();
    for (j, col) in columns.iter_mut().enumerate() {
        let target = ge[j][j]
            .checked_mul(d2)
            .ok_or_else(|| overflow("column norm", (ge[j][j], d2)))?;
        *col = representations(f, target as u64)?.vectors;
    }
    let off = |i: usize, j: usize| ge[i][j] as i128 * d2 as i128;
    let fm = f.entries();
    let pair = |u: &IntVector3, w: &IntVector3| -> i128 {
        let mut acc = 0i128;
        for i in 0..3 {
            for j in 0..3 {
                acc += fm[i][j] as i128 * u.0[i] as i128 * w.0[j] as i128;
            }
        }
        acc
    };

    let mut out = Vec::new();
    if cap == 0 {
        return Ok(out);
    }
    for c0 in &columns[0] {
        let thirds: Vec<&IntVector3> = columns[2]
            .iter()
            .filter(|c2| pair(c0, c2) == off(0, 2))
            .collect();
        if thirds.is_empty() {
            continue;
        }
        for c1 in columns[1].iter().filter(|c1| pair(c0, c1) == off(0, 1)) {
            for c2 in thirds.iter().filter(|c2| pair(c1, c2) == off(1, 2)) {
                let t = Mat3(std::array::from_fn(|r| [c0.0[r], c1.0[r], c2.0[r]]));
                out.push(Similitude::new(t, *f, *g, d)?);
                if out.len() == cap {
                    return Ok(out);
                }
            }
        }
    }
    Ok(out)
}
