//! Test problems: the bilinear game, the worst-case smooth function, and
//! quadratic minimax instances with an interaction-dominance certificate.

mod classic;
mod quadratic;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

pub use classic::{make_bilinear, make_worst_case_smooth, Bilinear, WorstCaseSmooth};
pub use quadratic::{
    check_interaction_dominance, linear_comonotone_margin, make_quadratic, make_scaled_identity,
    random_negative_comonotone, random_negative_comonotone_matrices, LinearOperator,
    QuadraticMinimax,
};

use crate::error::{Error, Result};

/// A catalog entry, addressable by string label.
#[derive(Clone, Debug, PartialEq)]
pub enum ProblemLabel {
    Bilinear,
    WorstCase,
    Quadratic(PathBuf),
    RandomNc,
}

impl FromStr for ProblemLabel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bilinear" => Ok(ProblemLabel::Bilinear),
            "worst-case" => Ok(ProblemLabel::WorstCase),
            "random-nc" => Ok(ProblemLabel::RandomNc),
            _ => match s.strip_prefix("quadratic:") {
                Some(path) if !path.is_empty() => Ok(ProblemLabel::Quadratic(path.into())),
                _ => Err(Error::config(
                    "problem",
                    format!("unknown problem `{s}` (bilinear, worst-case, quadratic:<file>, random-nc)"),
                )),
            },
        }
    }
}

impl fmt::Display for ProblemLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProblemLabel::Bilinear => f.write_str("bilinear"),
            ProblemLabel::WorstCase => f.write_str("worst-case"),
            ProblemLabel::Quadratic(p) => write!(f, "quadratic:{}", p.display()),
            ProblemLabel::RandomNc => f.write_str("random-nc"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_round_trip() {
        for s in ["bilinear", "worst-case", "random-nc", "quadratic:q.json"] {
            let l: ProblemLabel = s.parse().unwrap();
            assert_eq!(l.to_string(), s);
        }
        assert!("quadratic:".parse::<ProblemLabel>().is_err());
        assert!("rosenbrock".parse::<ProblemLabel>().is_err());
    }
}
