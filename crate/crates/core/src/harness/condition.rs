use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::voxcore::Axis;

/// Supervision regime for one experiment cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Condition {
    Full3d,
    Fixed1(Axis),
    Fixed2(Axis, Axis),
    Fixed3,
    Rand1,
    Rand1Depth,
}

impl Condition {
    /// Projection axes, with `drawn` standing in for the random viewpoint.
    pub fn axes(&self, drawn: Axis) -> Vec<Axis> {
        match *self {
            Condition::Full3d => vec![],
            Condition::Fixed1(a) => vec![a],
            Condition::Fixed2(a, b) => vec![a, b],
            Condition::Fixed3 => Axis::ALL.to_vec(),
            Condition::Rand1 | Condition::Rand1Depth => vec![drawn],
        }
    }

    pub fn uses_depth(&self) -> bool {
        matches!(self, Condition::Rand1Depth)
    }

    pub fn is_random(&self) -> bool {
        matches!(self, Condition::Rand1 | Condition::Rand1Depth)
    }

    /// Hole filling is not applied to the reported row.
    pub fn skips_fill(&self) -> bool {
        matches!(self, Condition::Fixed1(_))
    }

    pub fn is_multi_view(&self) -> bool {
        matches!(self, Condition::Fixed2(..) | Condition::Fixed3)
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Condition::Full3d => write!(f, "full3d"),
            Condition::Fixed1(a) => write!(f, "fixed1:{a}"),
            Condition::Fixed2(a, b) => write!(f, "fixed2:{a}{b}"),
            Condition::Fixed3 => write!(f, "fixed3"),
            Condition::Rand1 => write!(f, "rand1"),
            Condition::Rand1Depth => write!(f, "rand1+d"),
        }
    }
}

impl FromStr for Condition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = || Error::Config(format!("unknown condition `{s}`"));
        let lower = s.trim().to_ascii_lowercase();
        let (head, arg) = match lower.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (lower.as_str(), None),
        };
        let c = match (head, arg) {
            ("full3d" | "3d", None) => Condition::Full3d,
            ("fixed1", None) => Condition::Fixed1(Axis::Z),
            ("fixed1", Some(a)) => Condition::Fixed1(a.parse().map_err(|_| bad())?),
            ("fixed2", None) => Condition::Fixed2(Axis::X, Axis::Y),
            ("fixed2", Some(a)) => {
                let axes: Vec<Axis> = a
                    .split(|c: char| c == ',' || c.is_whitespace())
                    .filter(|p| !p.is_empty())
                    .flat_map(|p| {
                        if p.len() == 2 {
                            p.chars().map(|c| c.to_string()).collect()
                        } else {
                            vec![p.to_string()]
                        }
                    })
                    .map(|p| p.parse::<Axis>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| bad())?;
                match axes[..] {
                    [a, b] if a != b => Condition::Fixed2(a.min(b), a.max(b)),
                    _ => return Err(bad()),
                }
            }
            ("fixed3", None) => Condition::Fixed3,
            ("rand1", None) => Condition::Rand1,
            ("rand1+d" | "rand1+depth", None) => Condition::Rand1Depth,
            _ => return Err(bad()),
        };
        Ok(c)
    }
}

impl TryFrom<String> for Condition {
    type Error = Error;

    fn try_from(s: String) -> Result<Self, Error> {
        s.parse()
    }
}

impl From<Condition> for String {
    fn from(c: Condition) -> String {
        c.to_string()
    }
}
