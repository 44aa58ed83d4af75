//! Named constructors: a family name, a size and an optional parameter.

use std::fmt;

use thiserror::Error;

use crate::coeff::{expr::parse_rational, CoeffError, Scalar, Q};
use crate::deform::{CliffordAlgebra, DeformError};
use crate::liesuper::SuperLieAlgebra;
use crate::matrix::{self, GramForm, MatrixError};
use crate::vectorial::{self, Gram, VectorialError};

#[derive(Debug, Error)]
pub enum FamilyError {
    #[error("unknown family `{name}`; known: {known}", name = .0, known = FAMILIES.join(", "))]
    Unknown(String),
    #[error("family `{family}` needs {what}")]
    Missing { family: String, what: &'static str },
    #[error("bad size `{0}`: expected `n` or `m|n`")]
    Size(String),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Vectorial(#[from] VectorialError),
    #[error(transparent)]
    Deform(#[from] DeformError),
    #[error(transparent)]
    Coeff(#[from] CoeffError),
}

pub const FAMILIES: &[&str] = &[
    "gl", "sl", "psl", "q", "sq", "psq", "pq", "pe", "spe", "osp", "osp_aut_b", "osp_alpha", "vect", "svect", "svect_tilde", "po", "h", "h_prime", "clifford",
];

/// `n` or `m|n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Size {
    One(usize),
    Two(usize, usize),
}

impl Size {
    pub fn parse(s: &str) -> Result<Size, FamilyError> {
        let bad = || FamilyError::Size(s.to_string());
        match s.split_once('|') {
            Some((a, b)) => Ok(Size::Two(a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?)),
            None => Ok(Size::One(s.trim().parse().map_err(|_| bad())?)),
        }
    }
    fn one(self, family: &str) -> Result<usize, FamilyError> {
        match self {
            Size::One(n) => Ok(n),
            Size::Two(..) => Err(FamilyError::Missing {
                family: family.into(),
                what: "a single size n",
            }),
        }
    }
    fn two(self, family: &str) -> Result<(usize, usize), FamilyError> {
        match self {
            Size::Two(m, n) => Ok((m, n)),
            Size::One(_) => Err(FamilyError::Missing {
                family: family.into(),
                what: "a size of the form m|n",
            }),
        }
    }
}

impl fmt::Display for Size {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Size::One(n) => write!(f, "{n}"),
            Size::Two(m, n) => write!(f, "{m}|{n}"),
        }
    }
}

fn rational_param(family: &str, p: Option<&str>) -> Result<Q, FamilyError> {
    let p = p.ok_or(FamilyError::Missing {
        family: family.into(),
        what: "a rational --param",
    })?;
    Ok(parse_rational(p)?)
}

fn is_name(p: &str) -> bool {
    p.chars().next().is_some_and(|c| c.is_alphabetic()) && p.chars().all(|c| c.is_alphanumeric() || c == '_')
}

/// Builds a family member. Size is optional only for osp_alpha.
pub fn build(family: &str, size: Option<Size>, param: Option<&str>) -> Result<SuperLieAlgebra, FamilyError> {
    let need = |what| FamilyError::Missing { family: family.into(), what };
    let size = |f: &str| size.ok_or_else(|| need("--n")).map(|s| (s, f.to_string()));
    Ok(match family {
        "gl" => {
            let (s, f) = size(family)?;
            let (m, n) = s.two(&f)?;
            matrix::gl(m, n)?
        }
        "sl" => {
            let (s, f) = size(family)?;
            let (m, n) = s.two(&f)?;
            matrix::sl(m, n)?
        }
        "psl" => {
            let (s, f) = size(family)?;
            matrix::psl(s.one(&f)?)?
        }
        "q" => {
            let (s, f) = size(family)?;
            matrix::q_algebra(s.one(&f)?)?
        }
        "sq" => {
            let (s, f) = size(family)?;
            matrix::sq(s.one(&f)?)?
        }
        "psq" => {
            let (s, f) = size(family)?;
            matrix::psq(s.one(&f)?)?
        }
        "pq" => {
            let (s, f) = size(family)?;
            matrix::pq(s.one(&f)?)?
        }
        "pe" => {
            let (s, f) = size(family)?;
            matrix::pe(s.one(&f)?)?
        }
        "spe" => {
            let (s, f) = size(family)?;
            matrix::spe(s.one(&f)?)?
        }
        "osp" => {
            let (s, f) = size(family)?;
            let (m, n) = s.two(&f)?;
            matrix::osp(m, n)?
        }
        "osp_aut_b" => {
            let (s, f) = size(family)?;
            let (m, n) = s.two(&f)?;
            matrix::aut_b(&format!("osp({m}|{n})"), &GramForm::even_standard(m, n)?)?
        }
        "osp_alpha" => matrix::osp_alpha(&Scalar::rational(rational_param(family, param)?))?,
        "vect" => {
            let (s, f) = size(family)?;
            vectorial::vect(s.one(&f)?)?
        }
        "svect" => {
            let (s, f) = size(family)?;
            vectorial::svect(s.one(&f)?)?
        }
        "svect_tilde" => {
            let (s, f) = size(family)?;
            let n = s.one(&f)?;
            let p = param.ok_or_else(|| need("--param (a rational t, or a parameter name)"))?;
            if n % 2 == 1 {
                vectorial::svect_tilde_odd(n, p)?
            } else if is_name(p) {
                vectorial::svect_tilde_even_formal(n, p)?
            } else {
                vectorial::svect_tilde_even_rational(n, &parse_rational(p)?)?
            }
        }
        "po" => {
            let (s, f) = size(family)?;
            let n = s.one(&f)?;
            vectorial::po(n, &Gram::split(n))?
        }
        "h" => {
            let (s, f) = size(family)?;
            let n = s.one(&f)?;
            vectorial::h(n, &Gram::split(n))?
        }
        "h_prime" => {
            let (s, f) = size(family)?;
            let n = s.one(&f)?;
            vectorial::h_prime(n, &Gram::split(n))?
        }
        "clifford" => {
            let (s, f) = size(family)?;
            let m = s.one(&f)?;
            let cl = match param {
                Some(p) if is_name(p) => CliffordAlgebra::formal(m, p)?,
                Some(p) => CliffordAlgebra::rational(m, parse_rational(p)?)?,
                None => CliffordAlgebra::rational(m, Q::from_integer(1.into()))?,
            };
            cl.lie_algebra()?
        }
        other => return Err(FamilyError::Unknown(other.to_string())),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liesuper::Sdim;

    #[test]
    fn sizes() {
        assert_eq!(Size::parse("3").unwrap(), Size::One(3));
        assert_eq!(Size::parse("4|2").unwrap(), Size::Two(4, 2));
        assert!(Size::parse("x").is_err());
        assert_eq!(Size::Two(4, 2).to_string(), "4|2");
    }

    #[test]
    fn builds() {
        assert_eq!(build("psq", Some(Size::One(3)), None).unwrap().sdim(), Sdim::new(8, 8));
        assert_eq!(build("svect", Some(Size::One(3)), None).unwrap().dim(), 17);
        assert!(build("osp_alpha", None, Some("2")).unwrap().check_axioms().ok());
        assert!(build("svect_tilde", Some(Size::One(3)), Some("tau")).is_ok());
        assert!(build("svect_tilde", Some(Size::One(4)), Some("1")).is_ok());
        assert!(build("clifford", Some(Size::One(2)), Some("t")).is_ok());
        assert!(matches!(build("nope", None, None), Err(FamilyError::Unknown(_))));
        assert!(matches!(build("gl", Some(Size::One(2)), None), Err(FamilyError::Missing { .. })));
        assert!(matches!(build("svect", None, None), Err(FamilyError::Missing { .. })));
    }
}
