//! Seeded generators for random alphabets, graphs and structure classes,
//! and brute-force oracles that share no code with the library.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ufbd_core::graph::FormulaGraph;
use ufbd_core::logic::{Alphabet, Atom, Literal, PredicateDecl, RelationDecl, Term, Variable};
use ufbd_core::semantics::{FiniteStructure, GroundLiteral, StructureClass, StructureFile};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// One or two sorts with constants, a few predicates of arity one or two and
/// second-order predicates of arity up to three, as in the plant alphabet.
pub fn plant_like_alphabet(rng: &mut ChaCha8Rng) -> Alphabet {
    let sorts: Vec<String> = (0..rng.gen_range(1..=2)).map(|i| format!("s{i}")).collect();
    let constants: BTreeMap<String, Vec<String>> = sorts
        .iter()
        .enumerate()
        .map(|(i, s)| (s.clone(), (0..rng.gen_range(1..=2)).map(|j| format!("K{i}{j}")).collect()))
        .collect();
    let predicates = (0..rng.gen_range(1..=3))
        .map(|i| PredicateDecl {
            name: format!("q{i}"),
            arg_sorts: (0..rng.gen_range(1..=2)).map(|_| sorts.choose(rng).unwrap().clone()).collect(),
        })
        .collect();
    let relations = (0..rng.gen_range(1..=2)).map(|i| RelationDecl { name: format!("R{i}"), arity: rng.gen_range(1..=3) }).collect();
    Alphabet::new(sorts, constants, predicates, relations).unwrap()
}

fn random_term(rng: &mut ChaCha8Rng, a: &Alphabet, sort: &str) -> Term {
    let consts = a.constants(sort);
    if !consts.is_empty() && rng.gen_bool(0.4) {
        Term::constant(consts.choose(rng).unwrap().clone(), sort)
    } else {
        Term::var(format!("x{}{}", &sort[1..], rng.gen_range(1..=2)), sort)
    }
}

pub fn random_literal(rng: &mut ChaCha8Rng, a: &Alphabet) -> Literal {
    if rng.gen_bool(0.1) {
        let sort = a.sorts().choose(rng).unwrap().clone();
        let l = Literal::eq(random_term(rng, a, &sort), random_term(rng, a, &sort));
        return if rng.gen_bool(0.5) { l.negate() } else { l };
    }
    let p = a.predicates().choose(rng).unwrap().clone();
    let args = p.arg_sorts.iter().map(|s| random_term(rng, a, s)).collect();
    let l = Literal::pred(p.name, args);
    if rng.gen_bool(0.3) {
        l.negate()
    } else {
        l
    }
}

/// A graph of order at most `max_order` with a few random edges.
pub fn random_graph(rng: &mut ChaCha8Rng, a: &Alphabet, max_order: usize) -> FormulaGraph {
    let order = rng.gen_range(0..=max_order);
    let mut vertices = BTreeSet::new();
    for _ in 0..order * 4 {
        if vertices.len() == order {
            break;
        }
        vertices.insert(random_literal(rng, a));
    }
    let entries: Vec<Literal> = vertices.iter().filter(|l| !l.is_equality()).cloned().collect();
    let mut edges = Vec::new();
    if !entries.is_empty() {
        for r in a.relations() {
            for _ in 0..rng.gen_range(0..=2) {
                edges.push((r.name.clone(), (0..r.arity).map(|_| entries.choose(rng).unwrap().clone()).collect()));
            }
        }
    }
    FormulaGraph::new(a, vertices, edges).unwrap()
}

/// Renames variables injectively to fresh names.
pub fn fresh_renaming(rng: &mut ChaCha8Rng, g: &FormulaGraph) -> FormulaGraph {
    let vars: Vec<Variable> = g.variables().into_iter().collect();
    let mut labels: Vec<usize> = (0..vars.len() + 2).collect();
    labels.shuffle(rng);
    let map: BTreeMap<Variable, Variable> =
        vars.iter().zip(labels).map(|(v, i)| (v.clone(), Variable::new(format!("y{i}"), v.sort.clone()))).collect();
    g.rename(|v| map[v].clone())
}

/// A random sub-graph, renamed: it always embeds in `h`.
pub fn embedded_part(rng: &mut ChaCha8Rng, a: &Alphabet, h: &FormulaGraph) -> FormulaGraph {
    let kept: BTreeSet<Literal> = h.vertices().iter().filter(|_| rng.gen_bool(0.7)).cloned().collect();
    let edges: Vec<(String, Vec<Literal>)> = h
        .edges()
        .iter()
        .flat_map(|(r, ts)| ts.iter().map(move |t| (r.clone(), t.clone())))
        .filter(|(_, t)| t.iter().all(|l| kept.contains(l)) && rng.gen_bool(0.7))
        .collect();
    fresh_renaming(rng, &FormulaGraph::new(a, kept, edges).unwrap())
}

fn frame(rng: &mut ChaCha8Rng, a: &Alphabet) -> StructureFile {
    let mut f = StructureFile::default();
    for (i, s) in a.sorts().iter().enumerate() {
        let elems: Vec<String> = (0..rng.gen_range(1..=3)).map(|j| format!("e{i}{j}")).collect();
        let consts = a.constants(s).iter().map(|c| (c.clone(), elems.choose(rng).unwrap().clone())).collect();
        f.constants.insert(s.clone(), consts);
        f.domains.insert(s.clone(), elems);
    }
    f
}

fn tuples(domains: &BTreeMap<String, Vec<String>>, sorts: &[String]) -> Vec<Vec<String>> {
    let mut out = vec![Vec::new()];
    for s in sorts {
        out = out.into_iter().flat_map(|t| domains[s].iter().map(move |e| [t.clone(), vec![e.clone()]].concat())).collect();
    }
    out
}

fn value(term: &Term, env: &BTreeMap<Variable, String>, f: &StructureFile) -> String {
    match term.as_var() {
        Some(v) => env[v].clone(),
        None => {
            let Term::Const { name, sort } = term else { unreachable!() };
            f.constants[sort.as_str()][name.as_str()].clone()
        }
    }
}

/// Ground image of a predicate literal under an assignment.
fn ground(l: &Literal, env: &BTreeMap<Variable, String>, f: &StructureFile) -> Option<GroundLiteral> {
    let Atom::Pred { name, args } = &l.atom else { return None };
    Some(GroundLiteral::new(name.clone(), args.iter().map(|t| value(t, env, f)).collect(), l.negated))
}

/// Up to four structures on one frame. Some are built around a random
/// assignment of `witness` so that its sentence holds there; the rest
/// have random extensions.
pub fn random_class(rng: &mut ChaCha8Rng, a: &Alphabet, witness: &FormulaGraph) -> StructureClass {
    let base = frame(rng, a);
    let mut members = Vec::new();
    for _ in 0..rng.gen_range(1..=4) {
        let mut f = base.clone();
        for p in a.predicates() {
            let ext = tuples(&f.domains, &p.arg_sorts).into_iter().filter(|_| rng.gen_bool(0.5)).collect();
            f.predicates.insert(p.name.clone(), ext);
        }
        let mut rel: BTreeMap<String, Vec<Vec<GroundLiteral>>> = BTreeMap::new();
        if rng.gen_bool(0.6) {
            let env: BTreeMap<Variable, String> =
                witness.variables().into_iter().map(|v| (v.clone(), f.domains[&v.sort].choose(rng).unwrap().clone())).collect();
            for l in witness.vertices() {
                if let Some(g) = ground(l, &env, &f) {
                    let ext = f.predicates.get_mut(&g.pred).unwrap();
                    ext.retain(|t| *t != g.args);
                    if !g.neg {
                        ext.push(g.args.clone());
                    }
                }
            }
            for (r, ts) in witness.edges() {
                for t in ts {
                    rel.entry(r.clone()).or_default().push(t.iter().map(|l| ground(l, &env, &f).unwrap()).collect());
                }
            }
        }
        let bare = FiniteStructure::new(a, f.clone()).unwrap();
        let universe = bare.universe().to_vec();
        for r in a.relations() {
            for _ in 0..rng.gen_range(0..=3) {
                let t = (0..r.arity).map(|_| universe.choose(rng).unwrap().clone()).collect();
                rel.entry(r.name.clone()).or_default().push(t);
            }
        }
        f.second_order = rel;
        members.push(FiniteStructure::new(a, f).unwrap());
    }
    StructureClass::new(members).unwrap()
}

/// Text of a graph with variables replaced through `map`, as sorted lists.
fn image_text(g: &FormulaGraph, map: &BTreeMap<Variable, Variable>) -> (Vec<String>, Vec<String>) {
    let r = g.rename(|v| map[v].clone());
    let vs = r.vertices().iter().map(ToString::to_string).collect();
    let mut es: Vec<String> =
        r.edges().iter().flat_map(|(n, ts)| ts.iter().map(move |t| format!("{n}{t:?}"))).collect();
    es.sort();
    (vs, es)
}

fn bijections(from: &[Variable], to: &[Variable]) -> Vec<BTreeMap<Variable, Variable>> {
    let Some((first, rest)) = from.split_first() else { return vec![BTreeMap::new()] };
    let mut out = Vec::new();
    for (i, t) in to.iter().enumerate() {
        if t.sort != first.sort {
            continue;
        }
        let remaining: Vec<Variable> = to.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, v)| v.clone()).collect();
        for mut m in bijections(rest, &remaining) {
            m.insert(first.clone(), t.clone());
            out.push(m);
        }
    }
    out
}

/// Isomorphism by trying every sort-preserving bijection of variables.
pub fn brute_isomorphic(g: &FormulaGraph, h: &FormulaGraph) -> bool {
    let gv: Vec<Variable> = g.variables().into_iter().collect();
    let hv: Vec<Variable> = h.variables().into_iter().collect();
    if gv.len() != hv.len() || g.order() != h.order() {
        return false;
    }
    let ident: BTreeMap<Variable, Variable> = hv.iter().map(|v| (v.clone(), v.clone())).collect();
    let target = image_text(h, &ident);
    bijections(&gv, &hv).iter().any(|m| image_text(g, m) == target)
}

/// A renaming-invariant key: the least text over all bijections onto
/// `v0, v1, ..`.
pub fn brute_key(g: &FormulaGraph) -> String {
    let gv: Vec<Variable> = g.variables().into_iter().collect();
    let names: Vec<Variable> = gv.iter().enumerate().map(|(i, v)| Variable::new(format!("v{i}"), v.sort.clone())).collect();
    bijections(&gv, &names).iter().map(|m| format!("{:?}", image_text(g, m))).min().unwrap_or_default()
}

/// Every graph over the terms `0, x1, .., xk` with up to `max_order`
/// non-equality vertices, deduplicated by the brute-force key.
pub fn brute_force_classes(a: &Alphabet, max_order: usize) -> BTreeSet<String> {
    let mut terms = vec![Term::constant("0", "num")];
    terms.extend((1..=max_order).map(|i| Term::var(format!("x{i}"), "num")));
    let mut literals = Vec::new();
    for p in a.predicates() {
        for t in &terms {
            let l = Literal::pred(p.name.clone(), vec![t.clone()]);
            literals.push(l.clone().negate());
            literals.push(l);
        }
    }
    let mut keys = BTreeSet::new();
    for mask in 0u32..1 << literals.len() {
        if mask.count_ones() as usize > max_order {
            continue;
        }
        let vs: Vec<Literal> = (0..literals.len()).filter(|i| mask >> i & 1 == 1).map(|i| literals[i].clone()).collect();
        let mut candidates = Vec::new();
        for r in a.relations() {
            let mut ts: Vec<Vec<Literal>> = vec![vec![]];
            for _ in 0..r.arity {
                ts = ts.into_iter().flat_map(|t| vs.iter().map(move |l| [t.clone(), vec![l.clone()]].concat())).collect();
            }
            candidates.extend(ts.into_iter().map(|t| (r.name.clone(), t)));
        }
        for emask in 0u32..1 << candidates.len() {
            let edges = (0..candidates.len()).filter(|i| emask >> i & 1 == 1).map(|i| candidates[i].clone());
            let g = FormulaGraph::new(a, vs.clone(), edges).unwrap();
            keys.insert(brute_key(&g));
        }
    }
    keys
}
