use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::residue::{residue_sphere, ResidueSet, ResidueVector};
use crate::qform::{GramMatrix, Similitude};

/// `R_f(g, d, a)` as seen through a finite pool of similitudes.
#[derive(Clone, Debug)]
pub struct GoodSet {
    pub vectors: ResidueSet,
    /// `(v, i)`: `pool[i]` makes `v T^t` divisible by `d`. Lexicographic in `v`.
    pub witnesses: Vec<(ResidueVector, usize)>,
    pub pool_size: usize,
}

#[derive(Clone, Debug)]
pub struct BadSet {
    pub vectors: ResidueSet,
    pub pool_size: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Precedence {
    Holds,
    Undetermined,
}

fn kills(t: &[[i64; 3]; 3], v: &ResidueVector, d: i64) -> bool {
    (0..3).all(|i| (0..3).map(|j| t[i][j] * v.coords[j]).sum::<i64>().rem_euclid(d) == 0)
}

/// Good vectors of `R(g, d, a)` with respect to `f`: those `v` with `v T^t = 0 (mod d)`
/// for some `T` in the pool. An incomplete pool can only under-report.
pub fn good_set(
    _f: &GramMatrix,
    g: &GramMatrix,
    d: i64,
    a: i64,
    pool: &[Similitude],
) -> GoodSet {
    let sphere = residue_sphere(g, d, a);
    let mut remaining: Vec<ResidueVector> = sphere.to_vec();
    let mut found: Vec<(ResidueVector, usize)> = Vec::new();
    let mut seen = HashSet::new();
    for (idx, t) in pool.iter().enumerate() {
        let reduced = t.matrix.0.map(|r| r.map(|x| x.rem_euclid(d)));
        if !seen.insert(reduced) {
            continue;
        }
        remaining.retain(|v| {
            if kills(&reduced, v, d) {
                found.push((*v, idx));
                false
            } else {
                true
            }
        });
        if remaining.is_empty() {
            break;
        }
    }
    found.sort_unstable();
    GoodSet {
        vectors: ResidueSet::from_vectors(d, found.iter().map(|(v, _)| *v)),
        witnesses: found,
        pool_size: pool.len(),
    }
}

/// `R(g, d, a) - R_f(g, d, a)` for the given pool.
pub fn bad_set(f: &GramMatrix, g: &GramMatrix, d: i64, a: i64, pool: &[Similitude]) -> BadSet {
    let good = good_set(f, g, d, a, pool);
    BadSet {
        vectors: residue_sphere(g, d, a).difference(&good.vectors),
        pool_size: pool.len(),
    }
}

/// `Holds` certifies `g <_{d,a} f`; a nonempty bad set is never a definitive negative.
pub fn check_precedes(
    f: &GramMatrix,
    g: &GramMatrix,
    d: i64,
    a: i64,
    pool: &[Similitude],
) -> Precedence {
    if bad_set(f, g, d, a, pool).vectors.is_empty() {
        Precedence::Holds
    } else {
        Precedence::Undetermined
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qform::Mat3;
    use crate::transfer::similitudes::{find_similitudes, DEFAULT_POOL_CAP};

    fn mg() -> GramMatrix {
        GramMatrix::new([[7, -1, 3], [-1, 55, 27], [3, 27, 111]]).unwrap()
    }

    fn m3() -> GramMatrix {
        GramMatrix::new([[28, 10, 2], [10, 31, -13], [2, -13, 55]]).unwrap()
    }

    #[test]
    fn scalar_similitude_makes_everything_good() {
        let f = GramMatrix::diagonal(1, 30, 120).unwrap();
        let pool = [Similitude::auto(Mat3::scalar(40), f, 40).unwrap()];
        let good = good_set(&f, &f, 40, 31, &pool);
        assert_eq!(good.vectors, residue_sphere(&f, 40, 31));
        assert!(bad_set(&f, &f, 40, 31, &pool).vectors.is_empty());
        assert!(good_set(&f, &f, 40, 31, &[]).vectors.is_empty());
    }

    #[test]
    fn lemma_bad_set() {
        let pool = find_similitudes(&m3(), &mg(), 8, DEFAULT_POOL_CAP).unwrap();
        let bad = bad_set(&m3(), &mg(), 8, 7, &pool);
        let expected: Vec<ResidueVector> = [[1, 0, 0], [3, 0, 0], [5, 0, 0], [7, 0, 0]]
            .map(|c| ResidueVector::new(c, 8))
            .to_vec();
        assert_eq!(bad.vectors.to_vec(), expected);
        assert_eq!(
            check_precedes(&m3(), &mg(), 8, 7, &pool),
            Precedence::Undetermined
        );
    }

    #[test]
    fn witnesses_recheck() {
        let pool = find_similitudes(&m3(), &mg(), 8, DEFAULT_POOL_CAP).unwrap();
        let good = good_set(&m3(), &mg(), 8, 7, &pool);
        assert_eq!(good.witnesses.len(), good.vectors.len());
        for (v, i) in &good.witnesses {
            let image = pool[*i].matrix.act(&v.as_int()).unwrap();
            assert!(image.0.iter().all(|c| c % 8 == 0));
        }
    }

    #[test]
    fn good_set_grows_with_pool() {
        let pool = find_similitudes(&m3(), &mg(), 8, DEFAULT_POOL_CAP).unwrap();
        let mut previous = 0;
        for k in [0, 1, 5, 20, 60, pool.len()] {
            let good = good_set(&m3(), &mg(), 8, 7, &pool[..k]);
            assert!(good.vectors.len() >= previous);
            if k > 0 {
                let smaller = good_set(&m3(), &mg(), 8, 7, &pool[..k / 2]);
                assert!(smaller.vectors.is_subset(&good.vectors));
            }
            previous = good.vectors.len();
        }
    }
}
