//! Built-in groups: PSL2 over the Gaussian and Eisenstein integers.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use crate::domain::{default_center, CuspLattice, DirichletDomain, DomainError, FordSampler};
use crate::presentation::{parse_presentation, GroupPresentation};

pub const BIANCHI_ZI: &str = "\
minpoly: x^2 + 1
T = [[1, 1], [0, 1]]
U = [[1, x], [0, 1]]
S = [[0, -1], [1, 0]]
D = [[x, 0], [0, -x]]
circle: 0 x 0 real-line
circle: 1 0 -1 unit
circle: 1 0 -2 norm2
circle: 1 0 -3 norm3
circle: 1 0 -5 norm5
";

pub const BIANCHI_ZW: &str = "\
minpoly: x^2 - x + 1
T = [[1, 1], [0, 1]]
U = [[1, x], [0, 1]]
S = [[0, -1], [1, 0]]
D = [[x, 0], [0, 1 - x]]
circle: 0 2x-1 0 real-line
circle: 1 0 -1 unit
circle: 1 0 -2 norm2
circle: 1 0 -3 norm3
";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Preset {
    BianchiZi,
    BianchiZw,
    /// The Gaussian group with the trivial representation as target.
    TrivialRep,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::BianchiZi, Preset::BianchiZw, Preset::TrivialRep];

    pub fn name(self) -> &'static str {
        match self {
            Preset::BianchiZi => "bianchi-zi",
            Preset::BianchiZw => "bianchi-zw",
            Preset::TrivialRep => "trivial-rep",
        }
    }

    pub fn source(self) -> &'static str {
        match self {
            Preset::BianchiZi | Preset::TrivialRep => BIANCHI_ZI,
            Preset::BianchiZw => BIANCHI_ZW,
        }
    }

    pub fn presentation(self) -> GroupPresentation {
        parse_presentation(self.source()).expect("built-in presentation parses")
    }

    pub fn is_trivial_target(self) -> bool {
        self == Preset::TrivialRep
    }

    /// The Dirichlet domain about the default center, built once per process.
    pub fn domain(self) -> Result<&'static DirichletDomain, DomainError> {
        static ZI: OnceLock<Result<DirichletDomain, DomainError>> = OnceLock::new();
        static ZW: OnceLock<Result<DirichletDomain, DomainError>> = OnceLock::new();
        let cell = match self {
            Preset::BianchiZi | Preset::TrivialRep => &ZI,
            Preset::BianchiZw => &ZW,
        };
        cell.get_or_init(|| build_domain(&self.presentation()))
            .as_ref()
            .map_err(|e| e.clone())
    }

    pub fn sampler(self) -> Option<FordSampler> {
        CuspLattice::from_presentation(&self.presentation()).map(FordSampler::new)
    }
}

/// Try short face words first, then longer ones.
pub fn build_domain(gens: &GroupPresentation) -> Result<DirichletDomain, DomainError> {
    let mut last = None;
    for len in 2..=3 {
        match DirichletDomain::build(gens, default_center(), len) {
            Ok(d) => return Ok(d),
            Err(e) => last = Some(e),
        }
    }
    Err(last.unwrap())
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown preset `{s}` (expected bianchi-zi, bianchi-zw or trivial-rep)"))
    }
}
