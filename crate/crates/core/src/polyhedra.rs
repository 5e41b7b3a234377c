//! Exact feasibility of small systems of linear constraints by
//! Fourier-Motzkin elimination, returning a witness point.

use num_traits::{One, Signed, Zero};

use crate::exactla::{rat, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    /// `a . x + c > 0`
    Positive,
    /// `a . x + c >= 0`
    NonNegative,
    /// `a . x + c = 0`
    Zero,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub constant: Rational,
    pub relation: Relation,
}

impl Constraint {
    pub fn new(coeffs: Vec<Rational>, constant: Rational, relation: Relation) -> Self {
        Constraint { coeffs, constant, relation }
    }

    fn value(&self, x: &[Rational]) -> Rational {
        self.coeffs.iter().zip(x).fold(self.constant.clone(), |acc, (a, v)| acc + a * v)
    }

    fn holds(&self, x: &[Rational]) -> bool {
        let v = self.value(x);
        match self.relation {
            Relation::Positive => v.is_positive(),
            Relation::NonNegative => !v.is_negative(),
            Relation::Zero => v.is_zero(),
        }
    }

    fn scaled(&self, f: &Rational) -> Constraint {
        Constraint {
            coeffs: self.coeffs.iter().map(|a| a * f).collect(),
            constant: &self.constant * f,
            relation: self.relation,
        }
    }
}

/// A point satisfying every constraint, or `None` if the system is
/// infeasible. All constraints must have `dim` coefficients.
pub fn feasible_point(dim: usize, constraints: &[Constraint]) -> Option<Vec<Rational>> {
    let point = solve(dim, constraints.to_vec())?;
    debug_assert!(constraints.iter().all(|c| c.holds(&point)));
    Some(point)
}

fn solve(dim: usize, constraints: Vec<Constraint>) -> Option<Vec<Rational>> {
    if let Some(pos) = constraints.iter().position(|c| c.relation == Relation::Zero && c.coeffs.iter().any(|a| !a.is_zero())) {
        return solve_with_equality(dim, constraints, pos);
    }
    if dim == 0 {
        return constraints.iter().all(|c| c.holds(&[])).then(Vec::new);
    }
    let last = dim - 1;
    // normalize so the last coefficient is +1 (lower bounds) or -1 (upper bounds)
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    let mut rest = Vec::new();
    for c in constraints {
        let a = c.coeffs[last].clone();
        if a.is_zero() {
            rest.push(drop_last(&c));
        } else if a.is_positive() {
            lower.push(c.scaled(&a.recip()));
        } else {
            upper.push(c.scaled(&(-a).recip()));
        }
    }
    for l in &lower {
        for u in &upper {
            let relation = if l.relation == Relation::Positive || u.relation == Relation::Positive {
                Relation::Positive
            } else {
                Relation::NonNegative
            };
            let combined = Constraint {
                coeffs: l.coeffs.iter().zip(&u.coeffs).map(|(a, b)| a + b).collect(),
                constant: &l.constant + &u.constant,
                relation,
            };
            let reduced = drop_last(&combined);
            if !rest.contains(&reduced) {
                rest.push(reduced);
            }
        }
    }
    let mut point = solve(last, rest)?;
    // bounds on the last variable: x > -(l . x' + c) and x < (u . x' + c)
    let lo = lower
        .iter()
        .map(|l| -(drop_last(l).value(&point)))
        .fold(None, |acc: Option<Rational>, v| Some(acc.map_or(v.clone(), |a| if v > a { v } else { a })));
    let hi = upper
        .iter()
        .map(|u| drop_last(u).value(&point))
        .fold(None, |acc: Option<Rational>, v| Some(acc.map_or(v.clone(), |a| if v < a { v } else { a })));
    let x = match (lo, hi) {
        (Some(lo), Some(hi)) => (lo + hi) / rat(2),
        (Some(lo), None) => lo + Rational::one(),
        (None, Some(hi)) => hi - Rational::one(),
        (None, None) => Rational::zero(),
    };
    point.push(x);
    Some(point)
}

fn drop_last(c: &Constraint) -> Constraint {
    let mut coeffs = c.coeffs.clone();
    coeffs.pop();
    Constraint { coeffs, constant: c.constant.clone(), relation: c.relation }
}

/// Eliminates one variable through the equality at `pos`, solves the
/// reduced system, and reinserts the variable.
fn solve_with_equality(dim: usize, constraints: Vec<Constraint>, pos: usize) -> Option<Vec<Rational>> {
    let eq = constraints[pos].clone();
    let v = eq.coeffs.iter().position(|a| !a.is_zero()).expect("nonzero coefficient");
    let inv = eq.coeffs[v].recip();
    // x_v = -(c + sum_{i != v} a_i x_i) / a_v
    let expr_coeffs: Vec<Rational> = (0..dim).filter(|&i| i != v).map(|i| -(&eq.coeffs[i] * &inv)).collect();
    let expr_const = -(&eq.constant * &inv);
    let reduced: Vec<Constraint> = constraints
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != pos)
        .map(|(_, c)| {
            let av = &c.coeffs[v];
            let coeffs = (0..dim)
                .filter(|&i| i != v)
                .zip(&expr_coeffs)
                .map(|(i, e)| &c.coeffs[i] + av * e)
                .collect();
            Constraint { coeffs, constant: &c.constant + av * &expr_const, relation: c.relation }
        })
        .collect();
    let sub = solve(dim - 1, reduced)?;
    let xv = sub.iter().zip(&expr_coeffs).fold(expr_const, |acc, (x, e)| acc + x * e);
    let mut point = sub;
    point.insert(v, xv);
    Some(point)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactla::ratio;

    fn c(coeffs: &[i64], constant: i64, relation: Relation) -> Constraint {
        Constraint::new(coeffs.iter().map(|&a| rat(a)).collect(), rat(constant), relation)
    }

    #[test]
    fn open_interval() {
        let p = feasible_point(1, &[c(&[1], 0, Relation::Positive), c(&[-1], 1, Relation::Positive)]).unwrap();
        assert_eq!(p, vec![ratio(1, 2)]);
        assert!(feasible_point(1, &[c(&[1], 0, Relation::Positive), c(&[-1], 0, Relation::Positive)]).is_none());
        let p = feasible_point(1, &[c(&[1], 0, Relation::NonNegative), c(&[-1], 0, Relation::NonNegative)]).unwrap();
        assert_eq!(p, vec![rat(0)]);
    }

    #[test]
    fn triangle_and_equalities() {
        let tri = [
            c(&[1, 0], 0, Relation::Positive),
            c(&[0, 1], 0, Relation::Positive),
            c(&[-1, -1], 1, Relation::Positive),
        ];
        let p = feasible_point(2, &tri).unwrap();
        assert!(tri.iter().all(|t| t.holds(&p)));
        let mut edge = tri.to_vec();
        edge[0].relation = Relation::Zero;
        let p = feasible_point(2, &edge).unwrap();
        assert_eq!(p[0], rat(0));
        assert!(p[1] > rat(0) && p[1] < rat(1));
        let mut empty = tri.to_vec();
        empty.push(c(&[1, 1], -2, Relation::Zero));
        assert!(feasible_point(2, &empty).is_none());
    }

    #[test]
    fn unbounded_directions() {
        let p = feasible_point(2, &[c(&[1, 0], -3, Relation::Positive)]).unwrap();
        assert!(p[0] > rat(3));
        assert!(feasible_point(0, &[c(&[], -1, Relation::NonNegative)]).is_none());
    }
}
