//! Verification of descent moves `Q -T-> G u ... [u B -V-> ...]`.
//!
//! A move starting from class `Q` is valid when every integer vector `v` with
//! `v mod d` in `Q` maps integrally under each step `(1/d) v T^t`, and the image
//! either lands in the step's allowed set (the good set or listed classes) or,
//! at a non-final step, continues with the next matrix. The landing residue of
//! step `k` depends on `v mod d^(k+1)`, so a chain of length `L` is decided
//! exactly by the lifts of `Q` to `(Z/d^(L+1))^3`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::residue::{ResidueSet, ResidueVector};
use crate::error::{Error, Result};
use crate::qform::{similitude_check, GramMatrix, IntVector3, Mat3};

/// Where a step may land: the good set or a named class.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Landing {
    Good,
    Class(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainStep {
    pub label: String,
    pub matrix: Mat3,
    pub allowed: Vec<Landing>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Move {
    pub class: String,
    pub steps: Vec<ChainStep>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum DepthStrategy {
    /// Context-free check first, full lift enumeration only if it is inconclusive.
    #[default]
    FastThenFull,
    FullDepth,
    ContextFreeOnly,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerificationPath {
    ContextFree,
    FullDepth,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FailureKind {
    NotIntegral,
    Landed { residue: [i64; 3] },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveFailure {
    /// The integer vector the failing chain started from.
    pub lift: IntVector3,
    /// Zero-based index of the failing step.
    pub step: usize,
    pub kind: FailureKind,
}

impl std::fmt::Display for MoveFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.kind {
            FailureKind::NotIntegral => {
                write!(f, "lift {} is not integral at step {}", self.lift, self.step + 1)
            }
            FailureKind::Landed { residue } => write!(
                f,
                "lift {} lands on ({},{},{}) at step {}",
                self.lift,
                residue[0],
                residue[1],
                residue[2],
                self.step + 1
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveReport {
    pub class: String,
    pub chain: Vec<String>,
    pub verified: bool,
    pub path: Option<VerificationPath>,
    /// Number of lifts in the enumeration that decided the outcome.
    pub lifts_scanned: u64,
    /// Why the context-free check was inconclusive, when it was.
    pub context_free_failure: Option<MoveFailure>,
    pub failure: Option<MoveFailure>,
}

/// `(1/d) v T^t` when integral.
pub fn apply_step(t: &Mat3, v: &IntVector3, d: i64) -> Option<IntVector3> {
    let x = t.act(v).ok()?;
    x.0.iter()
        .all(|c| c % d == 0)
        .then(|| IntVector3(x.0.map(|c| c / d)))
}

struct Compiled {
    d: i64,
    mats: Vec<[[i64; 3]; 3]>,
    terminal: Vec<ResidueSet>,
}

enum FastOutcome {
    Verified,
    Definitive(MoveFailure),
    Inconclusive(MoveFailure),
}

impl Compiled {
    #[inline]
    fn index(&self, y: &[i64; 3]) -> usize {
        let d = self.d;
        let r = y.map(|c| c.rem_euclid(d) as usize);
        (r[0] * d as usize + r[1]) * d as usize + r[2]
    }

    /// Runs the chain from step `step` on the exact integer vector `w`.
    fn descend(&self, w: [i64; 3], step: usize) -> std::result::Result<(), (usize, FailureKind)> {
        let t = &self.mats[step];
        let mut y = [0i64; 3];
        for i in 0..3 {
            let x = t[i][0] * w[0] + t[i][1] * w[1] + t[i][2] * w[2];
            if x % self.d != 0 {
                return Err((step, FailureKind::NotIntegral));
            }
            y[i] = x / self.d;
        }
        let idx = self.index(&y);
        if self.terminal[step].contains_index(idx) {
            Ok(())
        } else if step + 1 == self.mats.len() {
            Err((
                step,
                FailureKind::Landed {
                    residue: y.map(|c| c.rem_euclid(self.d)),
                },
            ))
        } else {
            self.descend(y, step + 1)
        }
    }

    /// Context-free check: intermediate residues are lifted one level without
    /// tracking which lifts are reachable.
    fn context_free(&self, class: &ResidueSet) -> (FastOutcome, u64) {
        let d = self.d;
        let mut scanned = 0u64;
        let mut frontier: Vec<ResidueVector> = class.to_vec();
        for step in 0..self.mats.len() {
            let mut next = ResidueSet::empty(d);
            for base in &frontier {
                for u in lifts_of(d) {
                    scanned += 1;
                    let w = [0, 1, 2].map(|i| base.coords[i] + d * u[i]);
                    let t = &self.mats[step];
                    let fail = |kind| MoveFailure {
                        lift: IntVector3(w),
                        step,
                        kind,
                    };
                    let mut y = [0i64; 3];
                    let mut integral = true;
                    for i in 0..3 {
                        let x = t[i][0] * w[0] + t[i][1] * w[1] + t[i][2] * w[2];
                        integral &= x % d == 0;
                        y[i] = x / d;
                    }
                    let outcome = if !integral {
                        Some(fail(FailureKind::NotIntegral))
                    } else if self.terminal[step].contains_index(self.index(&y)) {
                        None
                    } else if step + 1 < self.mats.len() {
                        next.insert(ResidueVector::new(y, d));
                        None
                    } else {
                        Some(fail(FailureKind::Landed {
                            residue: y.map(|c| c.rem_euclid(d)),
                        }))
                    };
                    if let Some(failure) = outcome {
                        // At step 0 the lift is a genuine integer vector of the class.
                        return if step == 0 {
                            (FastOutcome::Definitive(failure), scanned)
                        } else {
                            (FastOutcome::Inconclusive(failure), scanned)
                        };
                    }
                }
            }
            frontier = next.to_vec();
        }
        (FastOutcome::Verified, scanned)
    }

    /// Exhaustive check over every lift of the class modulo `d^(L+1)`.
    fn full_depth(&self, class: &ResidueSet) -> (Option<MoveFailure>, u64) {
        let d = self.d;
        let per_axis = d.pow(self.mats.len() as u32);
        let bases = class.to_vec();
        let t = &self.mats[0];
        let col = |j: usize| [t[0][j], t[1][j], t[2][j]];
        let (c0, c1, c2) = (col(0), col(1), col(2));
        let tasks: Vec<(usize, i64)> = (0..bases.len())
            .flat_map(|b| (0..per_axis).map(move |u0| (b, u0)))
            .collect();
        let failure = tasks.par_iter().find_map_first(|&(b, u0)| {
            let v0 = bases[b].coords;
            let lift = |u1: i64, u2: i64| IntVector3([v0[0] + d * u0, v0[1] + d * u1, v0[2] + d * u2]);
            // T v0 must vanish mod d; otherwise no lift is integral.
            let mut shift = [0i64; 3];
            for i in 0..3 {
                let x = t[i][0] * v0[0] + t[i][1] * v0[1] + t[i][2] * v0[2];
                if x % d != 0 {
                    return Some(MoveFailure {
                        lift: lift(0, 0),
                        step: 0,
                        kind: FailureKind::NotIntegral,
                    });
                }
                shift[i] = x / d + u0 * c0[i];
            }
            for u1 in 0..per_axis {
                let mut w = [0, 1, 2].map(|i| shift[i] + u1 * c1[i]);
                for u2 in 0..per_axis {
                    if !self.terminal[0].contains_index(self.index(&w)) {
                        let outcome = if self.mats.len() == 1 {
                            Err((
                                0,
                                FailureKind::Landed {
                                    residue: w.map(|c| c.rem_euclid(d)),
                                },
                            ))
                        } else {
                            self.descend(w, 1)
                        };
                        if let Err((step, kind)) = outcome {
                            return Some(MoveFailure {
                                lift: lift(u1, u2),
                                step,
                                kind,
                            });
                        }
                    }
                    for i in 0..3 {
                        w[i] += c2[i];
                    }
                }
            }
            None
        });
        let scanned = bases.len() as u64 * (per_axis as u64).pow(3);
        (failure, scanned)
    }
}

fn lifts_of(d: i64) -> impl Iterator<Item = [i64; 3]> {
    (0..d).flat_map(move |x| (0..d).flat_map(move |y| (0..d).map(move |z| [x, y, z])))
}

fn landing_set(
    d: i64,
    allowed: &[Landing],
    classes: &BTreeMap<String, ResidueSet>,
    good: &ResidueSet,
) -> Result<ResidueSet> {
    let mut out = ResidueSet::empty(d);
    for l in allowed {
        let set = match l {
            Landing::Good => good,
            Landing::Class(name) => classes
                .get(name)
                .ok_or_else(|| Error::InvalidArgument(format!("unknown class `{name}`")))?,
        };
        for v in set.iter() {
            out.insert(v);
        }
    }
    Ok(out)
}

/// Verifies one move against the good set and the named classes.
pub fn verify_move(
    g: &GramMatrix,
    d: i64,
    mv: &Move,
    classes: &BTreeMap<String, ResidueSet>,
    good: &ResidueSet,
    strategy: DepthStrategy,
) -> Result<MoveReport> {
    if mv.steps.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "move for `{}` has an empty chain",
            mv.class
        )));
    }
    for step in &mv.steps {
        if !similitude_check(&step.matrix, g, g, d)? {
            return Err(Error::NotSimilitude {
                matrix: step.matrix.0,
                scale: d,
            });
        }
    }
    let class = classes
        .get(&mv.class)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown class `{}`", mv.class)))?;
    let compiled = Compiled {
        d,
        mats: mv.steps.iter().map(|s| s.matrix.0).collect(),
        terminal: mv
            .steps
            .iter()
            .map(|s| landing_set(d, &s.allowed, classes, good))
            .collect::<Result<_>>()?,
    };
    let mut report = MoveReport {
        class: mv.class.clone(),
        chain: mv.steps.iter().map(|s| s.label.clone()).collect(),
        verified: false,
        path: None,
        lifts_scanned: 0,
        context_free_failure: None,
        failure: None,
    };

    if strategy != DepthStrategy::FullDepth {
        let (outcome, scanned) = compiled.context_free(class);
        report.lifts_scanned = scanned;
        match outcome {
            FastOutcome::Verified => {
                report.verified = true;
                report.path = Some(VerificationPath::ContextFree);
                return Ok(report);
            }
            FastOutcome::Definitive(failure) => {
                report.path = Some(VerificationPath::ContextFree);
                report.failure = Some(failure);
                return Ok(report);
            }
            FastOutcome::Inconclusive(failure) => {
                report.context_free_failure = Some(failure.clone());
                if strategy == DepthStrategy::ContextFreeOnly {
                    report.path = Some(VerificationPath::ContextFree);
                    report.failure = Some(failure);
                    return Ok(report);
                }
            }
        }
    }

    let (failure, scanned) = compiled.full_depth(class);
    report.path = Some(VerificationPath::FullDepth);
    report.lifts_scanned = scanned;
    report.verified = failure.is_none();
    report.failure = failure;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transfer::good::bad_set;
    use crate::transfer::residue::residue_sphere;
    use crate::transfer::similitudes::{find_similitudes, DEFAULT_POOL_CAP};

    fn mg() -> GramMatrix {
        GramMatrix::new([[7, -1, 3], [-1, 55, 27], [3, 27, 111]]).unwrap()
    }

    fn m3() -> GramMatrix {
        GramMatrix::new([[28, 10, 2], [10, 31, -13], [2, -13, 55]]).unwrap()
    }

    const T1: Mat3 = Mat3([[8, -4, 0], [0, -2, -12], [0, 6, 4]]);

    fn setup() -> (BTreeMap<String, ResidueSet>, ResidueSet) {
        let pool = find_similitudes(&m3(), &mg(), 8, DEFAULT_POOL_CAP).unwrap();
        let bad = bad_set(&m3(), &mg(), 8, 7, &pool).vectors;
        let good = residue_sphere(&mg(), 8, 7).difference(&bad);
        let classes = BTreeMap::from([("P1".to_string(), bad)]);
        (classes, good)
    }

    fn single(matrix: Mat3, allowed: Vec<Landing>) -> Move {
        Move {
            class: "P1".into(),
            steps: vec![ChainStep {
                label: "T1".into(),
                matrix,
                allowed,
            }],
        }
    }

    #[test]
    fn self_returning_move_verifies_on_both_paths() {
        let (classes, good) = setup();
        let mv = single(T1, vec![Landing::Class("P1".into()), Landing::Good]);
        for strategy in [DepthStrategy::FastThenFull, DepthStrategy::FullDepth] {
            let r = verify_move(&mg(), 8, &mv, &classes, &good, strategy).unwrap();
            assert!(r.verified, "{strategy:?}: {:?}", r.failure);
        }
    }

    #[test]
    fn narrower_landing_set_fails_with_witness() {
        let (classes, good) = setup();
        let mv = single(T1, vec![Landing::Good]);
        let r = verify_move(&mg(), 8, &mv, &classes, &good, DepthStrategy::FullDepth).unwrap();
        assert!(!r.verified);
        let failure = r.failure.unwrap();
        let lift = failure.lift;
        assert!(classes["P1"].contains(&ResidueVector::reduce(&lift, 8)));
        let image = apply_step(&T1, &lift, 8).unwrap();
        assert!(!good.contains(&ResidueVector::reduce(&image, 8)));
    }

    #[test]
    fn scalar_matrix_stays_in_class() {
        let (classes, good) = setup();
        let mv = single(Mat3::scalar(8), vec![Landing::Good]);
        let r = verify_move(&mg(), 8, &mv, &classes, &good, DepthStrategy::FastThenFull).unwrap();
        // 8 I maps v to v itself, which stays in P1.
        assert_eq!(
            r.failure.unwrap().kind,
            FailureKind::Landed { residue: [1, 0, 0] }
        );
    }

    #[test]
    fn rejects_non_similitude_and_unknown_class() {
        let (classes, good) = setup();
        let mut bad = T1;
        bad.0[0][0] += 1;
        let mv = single(bad, vec![Landing::Good]);
        assert!(matches!(
            verify_move(&mg(), 8, &mv, &classes, &good, DepthStrategy::FullDepth),
            Err(Error::NotSimilitude { .. })
        ));
        let mv = single(T1, vec![Landing::Class("P9".into())]);
        assert!(verify_move(&mg(), 8, &mv, &classes, &good, DepthStrategy::FullDepth).is_err());
    }
}
