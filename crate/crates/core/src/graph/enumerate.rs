use std::collections::{BTreeMap, BTreeSet};

use super::{canonical_form, canonical_key, FormulaGraph};
use crate::error::{Error, Result};
use crate::logic::{Alphabet, Literal, Term, Variable};

pub const DEFAULT_CLASS_CEILING: usize = 1 << 16;

#[derive(Clone, Copy, Debug)]
pub struct EnumerateOptions {
    pub include_equalities: bool,
    /// Limit on vertex classes per level and on edge tuples per class
    /// (as `2^tuples`).
    pub ceiling: usize,
}

impl Default for EnumerateOptions {
    fn default() -> Self {
        EnumerateOptions { include_equalities: false, ceiling: DEFAULT_CLASS_CEILING }
    }
}

/// Argument choices for one position: constants of the sort, variables
/// already present, or one new variable.
fn term_choices(alphabet: &Alphabet, sort: &str, vars: &BTreeSet<Variable>, fresh: usize) -> Vec<(Term, bool)> {
    let mut out: Vec<(Term, bool)> = alphabet.constants(sort).iter().map(|c| (Term::constant(c.clone(), sort), false)).collect();
    out.extend(vars.iter().filter(|v| v.sort == sort).map(|v| (Term::Var(v.clone()), false)));
    out.push((Term::var(format!("x{fresh}"), sort), true));
    out
}

fn arg_lists(alphabet: &Alphabet, sorts: &[&str], vars: &BTreeSet<Variable>, fresh: usize) -> Vec<Vec<Term>> {
    let Some((first, rest)) = sorts.split_first() else { return vec![Vec::new()] };
    let mut out = Vec::new();
    for (t, is_new) in term_choices(alphabet, first, vars, fresh) {
        let mut vars = vars.clone();
        let next = if is_new {
            vars.insert(t.as_var().unwrap().clone());
            fresh + 1
        } else {
            fresh
        };
        for mut tail in arg_lists(alphabet, rest, &vars, next) {
            tail.insert(0, t.clone());
            out.push(tail);
        }
    }
    out
}

/// Every literal that can be added to a graph over `vars`, with at most one
/// new variable per argument position.
fn extensions(alphabet: &Alphabet, vars: &BTreeSet<Variable>, include_equalities: bool) -> Vec<Literal> {
    let fresh = vars.len() + 1;
    let mut out = Vec::new();
    for p in alphabet.predicates() {
        let sorts: Vec<&str> = p.arg_sorts.iter().map(String::as_str).collect();
        for args in arg_lists(alphabet, &sorts, vars, fresh) {
            let l = Literal::pred(p.name.clone(), args);
            out.push(l.clone().negate());
            out.push(l);
        }
    }
    if include_equalities {
        for s in alphabet.sorts() {
            for args in arg_lists(alphabet, &[s, s], vars, fresh) {
                let l = Literal::eq(args[0].clone(), args[1].clone());
                out.push(l.clone().negate());
                out.push(l);
            }
        }
    }
    out
}

fn limit(what: &str, n: usize, ceiling: usize) -> Result<()> {
    if n > ceiling {
        Err(Error::ResourceLimit(format!("{what}: {n} exceeds the ceiling of {ceiling}")))
    } else {
        Ok(())
    }
}

/// All formula graphs of order at most `max_order` up to renaming, one
/// canonical representative each, sorted by canonical key. Vertex sets are
/// grown one literal per level; edge sets are then chosen per vertex set.
pub fn enumerate_graphs(alphabet: &Alphabet, max_order: usize, opts: EnumerateOptions) -> Result<Vec<FormulaGraph>> {
    let mut levels: Vec<BTreeSet<FormulaGraph>> = vec![BTreeSet::from([FormulaGraph::empty()])];
    for k in 1..=max_order {
        let mut next = BTreeSet::new();
        for g in &levels[k - 1] {
            for l in extensions(alphabet, &g.variables(), opts.include_equalities) {
                if g.vertices.contains(&l) {
                    continue;
                }
                let mut vs = g.vertices.clone();
                vs.insert(l);
                next.insert(canonical_form(&FormulaGraph::from_parts(vs, BTreeMap::new())));
            }
        }
        limit(&format!("vertex sets of order {k}"), next.len(), opts.ceiling)?;
        levels.push(next);
    }
    let mut out: BTreeMap<String, FormulaGraph> = BTreeMap::new();
    for g in levels.iter().flatten() {
        let entries: Vec<&Literal> = g.vertices.iter().filter(|l| !l.is_equality()).collect();
        let mut tuples: Vec<(String, Vec<Literal>)> = Vec::new();
        for r in alphabet.relations() {
            let mut ts: Vec<Vec<Literal>> = vec![Vec::new()];
            for _ in 0..r.arity {
                ts = ts
                    .into_iter()
                    .flat_map(|t| {
                        entries.iter().map(move |l| {
                            let mut t = t.clone();
                            t.push((*l).clone());
                            t
                        })
                    })
                    .collect();
            }
            tuples.extend(ts.into_iter().map(|t| (r.name.clone(), t)));
        }
        if tuples.len() >= usize::BITS as usize || (1usize << tuples.len()) > opts.ceiling {
            return Err(Error::ResourceLimit(format!(
                "{} candidate edges on `{g}` exceed the ceiling of {}",
                tuples.len(),
                opts.ceiling
            )));
        }
        for mask in 0usize..(1usize << tuples.len()) {
            let mut edges: BTreeMap<String, BTreeSet<Vec<Literal>>> = BTreeMap::new();
            for (i, (r, t)) in tuples.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    edges.entry(r.clone()).or_default().insert(t.clone());
                }
            }
            let h = canonical_form(&FormulaGraph::from_parts(g.vertices.clone(), edges));
            out.entry(canonical_key(&h)).or_insert(h);
        }
        limit("graphs", out.len(), opts.ceiling)?;
    }
    Ok(out.into_values().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn cycle_alphabet_order_one() {
        let gs = enumerate_graphs(&fixtures::cycle_alphabet(), 1, EnumerateOptions::default()).unwrap();
        // p(0), !p(0), p(x), !p(x), each with or without its loop.
        assert_eq!(gs.len(), 9);
        assert_eq!(gs.iter().filter(|g| g.order() == 1).count(), 8);
        assert_eq!(gs[0], FormulaGraph::empty());
    }

    #[test]
    fn two_predicate_order_one_without_relations() {
        let gs = enumerate_graphs(&fixtures::two_predicate_alphabet(), 1, EnumerateOptions::default()).unwrap();
        assert_eq!(gs.len(), 1 + 8);
        let with_eq = EnumerateOptions { include_equalities: true, ..Default::default() };
        let gs = enumerate_graphs(&fixtures::two_predicate_alphabet(), 1, with_eq).unwrap();
        // Adds 0 = 0, x = x, 0 = x, x = 0, x = y and their negations.
        assert_eq!(gs.len(), 1 + 8 + 10);
    }

    #[test]
    fn plant_order_four_hits_the_ceiling() {
        let r = enumerate_graphs(&fixtures::plant_alphabet(), 4, EnumerateOptions::default());
        assert!(matches!(r, Err(Error::ResourceLimit(_))));
    }
}
