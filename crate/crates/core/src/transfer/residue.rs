use std::fmt;

use serde::{Deserialize, Serialize};

use crate::qform::{GramMatrix, IntVector3};

/// A vector of `(Z/dZ)^3` with coordinates in `[0, d)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ResidueVector {
    pub coords: [i64; 3],
    pub modulus: i64,
}

impl ResidueVector {
    pub fn reduce(v: &IntVector3, modulus: i64) -> Self {
        ResidueVector {
            coords: v.0.map(|c| c.rem_euclid(modulus)),
            modulus,
        }
    }

    pub fn new(coords: [i64; 3], modulus: i64) -> Self {
        Self::reduce(&IntVector3(coords), modulus)
    }

    pub fn neg(&self) -> Self {
        Self::new(self.coords.map(|c| -c), self.modulus)
    }

    pub fn index(&self) -> usize {
        let d = self.modulus as usize;
        let [x, y, z] = self.coords.map(|c| c as usize);
        (x * d + y) * d + z
    }

    pub fn from_index(index: usize, modulus: i64) -> Self {
        let d = modulus as usize;
        ResidueVector {
            coords: [(index / (d * d)) as i64, ((index / d) % d) as i64, (index % d) as i64],
            modulus,
        }
    }

    pub fn as_int(&self) -> IntVector3 {
        IntVector3(self.coords)
    }
}

impl fmt::Display for ResidueVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.coords[0], self.coords[1], self.coords[2])
    }
}

/// A subset of `(Z/dZ)^3`, iterated in lexicographic order.
#[derive(Clone, PartialEq, Eq)]
pub struct ResidueSet {
    modulus: i64,
    members: Vec<bool>,
    len: usize,
}

impl ResidueSet {
    pub fn empty(modulus: i64) -> Self {
        assert!(modulus >= 1, "modulus must be positive");
        let d = modulus as usize;
        ResidueSet {
            modulus,
            members: vec![false; d * d * d],
            len: 0,
        }
    }

    pub fn from_vectors(modulus: i64, vs: impl IntoIterator<Item = ResidueVector>) -> Self {
        let mut s = Self::empty(modulus);
        for v in vs {
            s.insert(v);
        }
        s
    }

    pub fn modulus(&self) -> i64 {
        self.modulus
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn insert(&mut self, v: ResidueVector) -> bool {
        debug_assert_eq!(v.modulus, self.modulus);
        let slot = &mut self.members[v.index()];
        let fresh = !*slot;
        *slot = true;
        self.len += fresh as usize;
        fresh
    }

    pub fn remove(&mut self, v: &ResidueVector) -> bool {
        let slot = &mut self.members[v.index()];
        let was = *slot;
        *slot = false;
        self.len -= was as usize;
        was
    }

    #[inline]
    pub fn contains(&self, v: &ResidueVector) -> bool {
        v.modulus == self.modulus && self.members[v.index()]
    }

    #[inline]
    pub(crate) fn contains_index(&self, index: usize) -> bool {
        self.members[index]
    }

    pub fn iter(&self) -> impl Iterator<Item = ResidueVector> + '_ {
        let d = self.modulus;
        self.members
            .iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(move |(i, _)| ResidueVector::from_index(i, d))
    }

    pub fn to_vec(&self) -> Vec<ResidueVector> {
        self.iter().collect()
    }

    pub fn union(&self, other: &ResidueSet) -> ResidueSet {
        ResidueSet::from_vectors(self.modulus, self.iter().chain(other.iter()))
    }

    pub fn difference(&self, other: &ResidueSet) -> ResidueSet {
        ResidueSet::from_vectors(self.modulus, self.iter().filter(|v| !other.contains(v)))
    }

    pub fn intersection(&self, other: &ResidueSet) -> ResidueSet {
        ResidueSet::from_vectors(self.modulus, self.iter().filter(|v| other.contains(v)))
    }

    pub fn is_subset(&self, other: &ResidueSet) -> bool {
        self.iter().all(|v| other.contains(&v))
    }

    pub fn is_disjoint(&self, other: &ResidueSet) -> bool {
        self.iter().all(|v| !other.contains(&v))
    }

    pub fn is_closed_under_negation(&self) -> bool {
        self.iter().all(|v| self.contains(&v.neg()))
    }
}

impl fmt::Debug for ResidueSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter().map(|v| v.coords)).finish()
    }
}

/// `R(g, d, a)`: residue vectors with `v M_g v^t = a (mod d)`.
pub fn residue_sphere(g: &GramMatrix, d: i64, a: i64) -> ResidueSet {
    assert!((1..=1000).contains(&d), "residue sphere modulus out of range: {d}");
    let m = g.entries().map(|r| r.map(|x| x.rem_euclid(d)));
    let target = a.rem_euclid(d);
    let mut out = ResidueSet::empty(d);
    for x in 0..d {
        for y in 0..d {
            for z in 0..d {
                let v = [x, y, z];
                let mut acc = 0i64;
                for i in 0..3 {
                    for j in 0..3 {
                        acc = (acc + m[i][j] * v[i] % d * v[j]) % d;
                    }
                }
                if acc == target {
                    out.insert(ResidueVector { coords: v, modulus: d });
                }
            }
        }
    }
    out
}
