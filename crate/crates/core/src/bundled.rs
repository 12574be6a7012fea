//! Forms, matrices and certificates of the three universality proofs.

use crate::error::Result;
use crate::qform::{GramMatrix, Mat3};
use crate::repenum::ProgressionSpec;
use crate::transfer::TransferCertificate;

pub const LEMMA_226_JSON: &str = include_str!("../data/lemma-226.json");
pub const THM_235_JSON: &str = include_str!("../data/thm-235.json");
pub const THM_237_JSON: &str = include_str!("../data/thm-237.json");

fn gram(e: [i64; 9]) -> GramMatrix {
    GramMatrix::from_row_major(e).expect("bundled form is positive definite")
}

/// `x^2 + 3(x-4y)^2 + 3(x-4z)^2`.
pub fn f_lemma() -> GramMatrix {
    gram([7, -12, -12, -12, 48, 0, -12, 0, 48])
}

/// `M_g`, equivalent to `x^2 + 3(x-8y)^2 + 3(x-8z)^2`.
pub fn g_lemma() -> GramMatrix {
    gram([7, -1, 3, -1, 55, 27, 3, 27, 111])
}

pub fn m2_lemma() -> GramMatrix {
    gram([15, 6, 3, 6, 28, 14, 3, 14, 103])
}

pub fn m3_lemma() -> GramMatrix {
    gram([28, 10, 2, 10, 31, -13, 2, -13, 55])
}

/// `6x^2 + 10(2y+z)^2 + 15z^2`.
pub fn f_235() -> GramMatrix {
    gram([6, 0, 0, 0, 40, 20, 0, 20, 25])
}

/// `<6> ⊥ [[25,5],[5,25]]`.
pub fn mf_235() -> GramMatrix {
    gram([6, 0, 0, 0, 25, 5, 0, 5, 25])
}

pub fn m2_235() -> GramMatrix {
    gram([1, 0, 0, 0, 30, 0, 0, 0, 120])
}

pub fn m3_235() -> GramMatrix {
    gram([10, 0, 0, 0, 15, 0, 0, 0, 24])
}

pub fn f_237() -> GramMatrix {
    gram([6, 0, 0, 0, 14, 0, 0, 0, 21])
}

pub fn m2_237() -> GramMatrix {
    gram([5, 1, 2, 1, 17, -8, 2, -8, 26])
}

pub fn m3_237() -> GramMatrix {
    gram([3, 0, 0, 0, 14, 0, 0, 0, 42])
}

pub const T1_LEMMA: Mat3 = Mat3([[8, -4, 0], [0, -2, -12], [0, 6, 4]]);
pub const T1_235: Mat3 = Mat3([[-20, -180, 120], [-6, 22, 12], [-1, -3, -38]]);
pub const T1_TILDE_235: Mat3 = Mat3([[-20, 180, -120], [-6, -22, -12], [-1, 3, 38]]);
pub const T_237: [Mat3; 9] = [
    Mat3([[-13, -24, -21], [-6, -3, 21], [4, -12, 21]]),
    Mat3([[-3, -40, 16], [6, 3, 24], [-6, 4, 11]]),
    Mat3([[-9, 30, -39], [12, 9, 3], [6, -6, -9]]),
    Mat3([[-1, 36, 0], [-12, -9, 0], [-2, -12, 21]]),
    Mat3([[-9, 0, -45], [4, -21, 13], [10, 0, 1]]),
    Mat3([[-1, -30, -15], [6, -9, 27], [10, 6, 3]]),
    Mat3([[-9, 24, 12], [4, 15, -24], [10, 6, 3]]),
    Mat3([[-3, 36, -3], [6, -9, 27], [-6, -12, 15]]),
    Mat3([[-21, 0, -21], [0, 7, 21], [0, -14, 21]]),
];

/// Every form named in the bundled data.
pub fn all_forms() -> Vec<(&'static str, GramMatrix)> {
    vec![
        ("f_lemma", f_lemma()),
        ("g_lemma", g_lemma()),
        ("M2_lemma", m2_lemma()),
        ("M3_lemma", m3_lemma()),
        ("f_235", f_235()),
        ("Mf_235", mf_235()),
        ("M2_235", m2_235()),
        ("M3_235", m3_235()),
        ("f_237", f_237()),
        ("M2_237", m2_237()),
        ("M3_237", m3_237()),
    ]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TheoremId {
    T226,
    T235,
    T237,
}

impl TheoremId {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "226" => Some(TheoremId::T226),
            "235" => Some(TheoremId::T235),
            "237" => Some(TheoremId::T237),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            TheoremId::T226 => "226",
            TheoremId::T235 => "235",
            TheoremId::T237 => "237",
        }
    }

    pub fn certificate_json(self) -> &'static str {
        match self {
            TheoremId::T226 => LEMMA_226_JSON,
            TheoremId::T235 => THM_235_JSON,
            TheoremId::T237 => THM_237_JSON,
        }
    }

    pub fn certificate_file_name(self) -> &'static str {
        match self {
            TheoremId::T226 => "lemma-226.json",
            TheoremId::T235 => "thm-235.json",
            TheoremId::T237 => "thm-237.json",
        }
    }

    pub fn certificate(self) -> Result<TransferCertificate> {
        TransferCertificate::from_json(self.certificate_json())
    }

    /// A progression assumed to lie in `Q(gen)`, with the genus that should cover it.
    pub fn coverage(self) -> (ProgressionSpec, Vec<GramMatrix>) {
        let p = |d, a| ProgressionSpec::new(d, a).expect("valid progression");
        match self {
            TheoremId::T226 => (p(24, 7), vec![f_lemma()]),
            TheoremId::T235 => (p(40, 31), vec![mf_235(), m2_235(), m3_235()]),
            TheoremId::T237 => (p(21, 20), vec![f_237(), m2_237(), m3_237()]),
        }
    }
}
