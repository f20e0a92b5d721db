use std::collections::BTreeMap;
use std::fmt;

use crate::term::{Literal, Term, Var};

/// Finite map from variables to terms, kept fully resolved.
#[derive(Clone, Default, PartialEq, Eq, Debug)]
pub struct Substitution {
    map: BTreeMap<Var, Term>,
}

impl Substitution {
    pub fn new() -> Substitution {
        Substitution::default()
    }

    pub fn get(&self, v: Var) -> Option<&Term> {
        self.map.get(&v)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Term)> {
        self.map.iter()
    }

    pub fn apply(&self, t: &Term) -> Term {
        if self.map.is_empty() {
            return t.clone();
        }
        t.map_vars(&mut |v| match self.map.get(&v) {
            Some(bound) => self.apply(bound),
            None => Term::Var(v),
        })
    }

    pub fn apply_literal(&self, l: &Literal) -> Literal {
        l.map_terms(|t| self.apply(t))
    }

    /// Inserts a binding and re-resolves existing ones so the map stays idempotent.
    pub(crate) fn bind(&mut self, v: Var, t: Term) {
        let t = self.apply(&t);
        let single = Substitution { map: BTreeMap::from([(v, t.clone())]) };
        for val in self.map.values_mut() {
            *val = single.apply(val);
        }
        self.map.insert(v, t);
    }

    pub(crate) fn from_map(map: BTreeMap<Var, Term>) -> Substitution {
        Substitution { map }
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (v, t)) in self.map.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "_G{}->{}", v.0, t)?;
        }
        f.write_str("}")
    }
}

fn occurs(v: Var, t: &Term) -> bool {
    match t {
        Term::Var(w) => *w == v,
        Term::Compound(_, args) => args.iter().any(|a| occurs(v, a)),
        _ => false,
    }
}

/// Most general unifier of `t1` and `t2` extending `s`, with occurs-check.
pub fn unify(t1: &Term, t2: &Term, s: &Substitution) -> Option<Substitution> {
    let mut out = s.clone();
    unify_into(t1, t2, &mut out).then_some(out)
}

fn unify_into(t1: &Term, t2: &Term, s: &mut Substitution) -> bool {
    let a = s.apply(t1);
    let b = s.apply(t2);
    match (&a, &b) {
        (Term::Var(x), Term::Var(y)) if x == y => true,
        (Term::Var(x), other) | (other, Term::Var(x)) => {
            if occurs(*x, other) {
                return false;
            }
            s.bind(*x, other.clone());
            true
        }
        (Term::Compound(f, xs), Term::Compound(g, ys)) => {
            f == g && xs.len() == ys.len() && xs.iter().zip(ys.iter()).all(|(x, y)| unify_into(x, y, s))
        }
        _ => a == b,
    }
}

pub fn unify_literals(l1: &Literal, l2: &Literal, s: &Substitution) -> Option<Substitution> {
    if l1.key() != l2.key() {
        return None;
    }
    let mut out = s.clone();
    l1.args.iter().zip(&l2.args).all(|(a, b)| unify_into(a, b, &mut out)).then_some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_term;

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    /// Parses two terms sharing one variable namespace.
    fn pair(a: &str, b: &str) -> (Term, Term) {
        match parse_term(&format!("u({a}, {b})")).unwrap() {
            Term::Compound(_, args) => (args[0].clone(), args[1].clone()),
            _ => unreachable!(),
        }
    }

    #[test]
    fn binds_both_sides() {
        let (a, b) = pair("f(X, red)", "f(blue, Y)");
        let s = unify(&a, &b, &Substitution::new()).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.get(Var(0)), Some(&t("blue")));
        assert_eq!(s.get(Var(1)), Some(&t("red")));
    }

    #[test]
    fn functor_clash_and_occurs_check_fail() {
        assert!(unify(&t("f(X)"), &t("g(X)"), &Substitution::new()).is_none());
        assert!(unify(&t("X"), &t("f(X)"), &Substitution::new()).is_none());
    }

    #[test]
    fn chains_resolve_fully() {
        // X = Y, Y = a
        let (a, b) = pair("f(X, Y)", "f(Y, a)");
        let s = unify(&a, &b, &Substitution::new()).unwrap();
        assert_eq!(s.apply(&a), t("f(a, a)"));
        for (_, v) in s.iter() {
            assert_eq!(s.apply(v), *v);
        }
    }
}
