//! Built-in fixture data: the plant-monitoring alphabet and structure, and
//! the small single-sorted languages used by the counterexamples.

use std::collections::BTreeMap;

use crate::graph::FormulaGraph;
use crate::hypothesis::{CandidatePool, Hypothesis};
use crate::logic::{parse_formula, parse_literal, Alphabet, Formula, Literal, PredicateDecl, RelationDecl, Sentence, Term};
use crate::semantics::{FiniteStructure, GroundLiteral, StructureClass, StructureFile};

fn pred(name: &str, sorts: &[&str]) -> PredicateDecl {
    PredicateDecl { name: name.into(), arg_sorts: sorts.iter().map(|s| s.to_string()).collect() }
}

fn rel(name: &str, arity: usize) -> RelationDecl {
    RelationDecl { name: name.into(), arity }
}

fn strings(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

pub fn plant_alphabet() -> Alphabet {
    let constants = BTreeMap::from([
        ("comp".to_string(), strings(&["F", "P"])),
        ("state".to_string(), strings(&["High", "No"])),
    ]);
    Alphabet::new(
        strings(&["comp", "state"]),
        constants,
        vec![pred("Hold", &["comp", "state"]), pred("Open", &["comp"])],
        vec![rel("Action", 3), rel("Cause-Effect", 2)],
    )
    .expect("plant alphabet is valid")
}

fn hold(c: &str, s: &str) -> GroundLiteral {
    GroundLiteral::new("Hold", strings(&[c, s]), false)
}

fn open(c: &str) -> GroundLiteral {
    GroundLiteral::new("Open", strings(&[c]), false)
}

fn plant_file(holds: &[(&str, &str)], opens: &[&str], action: bool, cause: bool) -> StructureFile {
    let mut f = StructureFile::default();
    f.domains.insert("comp".into(), strings(&["F", "P"]));
    f.domains.insert("state".into(), strings(&["High", "No"]));
    f.predicates.insert("Hold".into(), holds.iter().map(|(c, s)| strings(&[c, s])).collect());
    f.predicates.insert("Open".into(), opens.iter().map(|c| strings(&[c])).collect());
    let actions = if action { vec![vec![hold("F", "No"), open("F"), hold("F", "High")]] } else { vec![] };
    let causes = if cause { vec![vec![hold("F", "High"), hold("P", "High")]] } else { vec![] };
    f.second_order.insert("Action".into(), actions);
    f.second_order.insert("Cause-Effect".into(), causes);
    f
}

const EXAMPLE_HOLDS: [(&str, &str); 3] = [("F", "No"), ("F", "High"), ("P", "High")];

/// The plant structure: Hold = {(F,No),(F,High),(P,High)}, Open = {F}, one
/// Action tuple and one Cause-Effect tuple.
pub fn plant_structure() -> FiniteStructure {
    FiniteStructure::new(&plant_alphabet(), plant_file(&EXAMPLE_HOLDS, &["F"], true, true))
        .expect("plant structure is valid")
}

/// Sixteen plant structures varying Hold, Open and both relations; the
/// example structure is one of them.
pub fn plant_candidates() -> StructureClass {
    let a = plant_alphabet();
    let all_holds = [("F", "No"), ("F", "High"), ("P", "No"), ("P", "High")];
    let mut out = Vec::new();
    for holds in [&EXAMPLE_HOLDS[..], &all_holds[..]] {
        for opens in [&["F"][..], &[][..]] {
            for action in [false, true] {
                for cause in [false, true] {
                    out.push(FiniteStructure::new(&a, plant_file(holds, opens, action, cause)).unwrap());
                }
            }
        }
    }
    StructureClass::new(out).unwrap()
}

pub const PLANT_RULE: &str = "forall X . forall Y . forall Z . (Action(X, Y, Z) -> \
    (X == Hold(F, No) & Y == Open(F) & Z == Hold(F, High) & X & Y & Z))";

/// The rule restricting Action to its single intended instance.
pub fn plant_rule() -> Formula {
    parse_formula(PLANT_RULE, &plant_alphabet()).expect("plant rule parses")
}

fn single_sorted(preds: &[&str], relations: &[RelationDecl]) -> Alphabet {
    Alphabet::new(
        strings(&["num"]),
        BTreeMap::from([("num".to_string(), strings(&["0"]))]),
        preds.iter().map(|p| pred(p, &["num"])).collect(),
        relations.to_vec(),
    )
    .expect("fixture alphabet is valid")
}

fn single_point(alphabet: &Alphabet, true_preds: &[&str]) -> FiniteStructure {
    let mut f = StructureFile::default();
    f.domains.insert("num".into(), strings(&["0"]));
    for p in alphabet.predicates() {
        let ext = if true_preds.contains(&p.name.as_str()) { vec![strings(&["0"])] } else { vec![] };
        f.predicates.insert(p.name.clone(), ext);
    }
    FiniteStructure::new(alphabet, f).expect("fixture structure is valid")
}

/// Constant `0`, unary `p1`, `p2`, no second-order predicates.
pub fn two_predicate_alphabet() -> Alphabet {
    single_sorted(&["p1", "p2"], &[])
}

/// The four structures `M_S`, `S ⊆ {1, 2}`, on the domain `{0}`.
pub fn two_predicate_class() -> StructureClass {
    let a = two_predicate_alphabet();
    let members = [&[][..], &["p1"][..], &["p2"][..], &["p1", "p2"][..]]
        .iter()
        .map(|s| single_point(&a, s))
        .collect();
    StructureClass::new(members).unwrap()
}

/// Constant `0`, unary `p1`, `p2`, `p3`, no second-order predicates.
pub fn three_predicate_alphabet() -> Alphabet {
    single_sorted(&["p1", "p2", "p3"], &[])
}

/// The single structure on `{0}` where every predicate holds.
pub fn three_predicate_class() -> StructureClass {
    let a = three_predicate_alphabet();
    StructureClass::new(vec![single_point(&a, &["p1", "p2", "p3"])]).unwrap()
}

/// Constant `0`, unary `p`, binary second-order `R`.
pub fn cycle_alphabet() -> Alphabet {
    single_sorted(&["p"], &[rel("R", 2)])
}

fn graph(alphabet: &Alphabet, vertices: &[&str], edges: &[(&str, &[&str])]) -> FormulaGraph {
    let lit = |s: &str| parse_literal(s, alphabet).expect("fixture literal parses");
    FormulaGraph::new(
        alphabet,
        vertices.iter().map(|v| lit(v)),
        edges.iter().map(|(r, t)| (r.to_string(), t.iter().map(|v| lit(v)).collect())),
    )
    .expect("fixture graph is valid")
}

const ACTION: (&str, &[&str]) = ("Action", &["Hold(F, No)", "Open(F)", "Hold(F, High)"]);
const CAUSE: (&str, &[&str]) = ("Cause-Effect", &["Hold(F, High)", "Hold(P, High)"]);

/// The plant hypothesis graph: the Action hyperedge followed by the
/// Cause-Effect edge.
pub fn plant_g0() -> FormulaGraph {
    graph(
        &plant_alphabet(),
        &["Hold(F, No)", "Open(F)", "Hold(F, High)", "Hold(P, High)"],
        &[ACTION, CAUSE],
    )
}

/// The Action part of the plant graph.
pub fn plant_g1() -> FormulaGraph {
    graph(&plant_alphabet(), &["Hold(F, No)", "Open(F)", "Hold(F, High)"], &[ACTION])
}

/// The Cause-Effect part of the plant graph.
pub fn plant_g2() -> FormulaGraph {
    graph(&plant_alphabet(), &["Hold(F, High)", "Hold(P, High)"], &[CAUSE])
}

/// `G1..G4` over the three-predicate alphabet: `{p1(0), p3(0)}`,
/// `{p2(0), p3(0)}`, `{p1(0)}`, `{p2(0)}`.
pub fn three_predicate_graphs() -> [FormulaGraph; 4] {
    let a = three_predicate_alphabet();
    [
        graph(&a, &["p1(0)", "p3(0)"], &[]),
        graph(&a, &["p2(0)", "p3(0)"], &[]),
        graph(&a, &["p1(0)"], &[]),
        graph(&a, &["p2(0)"], &[]),
    ]
}

/// `G_0` is `p(0)` with an `R` loop. For `n > 0`, `G_n` has `p(0)`,
/// `p(x1)..p(xn)`, the literals `!(0 = xi)` and `!(xi = xj)` for `i < j`, and
/// the `R`-cycle `p(0), p(x1), .., p(xn), p(0)`.
pub fn cycle_graph(n: usize) -> FormulaGraph {
    let a = cycle_alphabet();
    let zero = Literal::pred("p", vec![Term::constant("0", "num")]);
    let x = |i: usize| Term::var(format!("x{i}"), "num");
    let px = |i: usize| Literal::pred("p", vec![x(i)]);
    let mut vertices = vec![zero.clone()];
    for i in 1..=n {
        vertices.push(px(i));
        vertices.push(Literal::eq(Term::constant("0", "num"), x(i)).negate());
        for j in i + 1..=n {
            vertices.push(Literal::eq(x(i), x(j)).negate());
        }
    }
    let ring: Vec<Literal> = std::iter::once(zero.clone()).chain((1..=n).map(px)).collect();
    let edges = (0..ring.len()).map(|i| ("R".to_string(), vec![ring[i].clone(), ring[(i + 1) % ring.len()].clone()]));
    FormulaGraph::new(&a, vertices, edges).expect("cycle graph is valid")
}

/// Domain `{0, .., n}` with `p` true everywhere and `R` the single cycle
/// `p(0), p(1), .., p(n), p(0)`. Exactly one `Sent(G_m)` holds here, the one
/// with `m = n`.
pub fn cycle_structure(n: usize) -> FiniteStructure {
    let a = cycle_alphabet();
    let elems: Vec<String> = (0..=n).map(|i| i.to_string()).collect();
    let mut f = StructureFile::default();
    f.domains.insert("num".into(), elems.clone());
    f.predicates.insert("p".into(), elems.iter().map(|e| vec![e.clone()]).collect());
    let lit = |i: usize| GroundLiteral::new("p", vec![elems[i % (n + 1)].clone()], false);
    f.second_order.insert("R".into(), (0..=n).map(|i| vec![lit(i), lit(i + 1)]).collect());
    FiniteStructure::new(&a, f).expect("cycle structure is valid")
}

pub const PROP_H_SENTENCES: [&str; 8] = [
    "true",
    "p1(0)",
    "p2(0)",
    "p1(0) | p2(0)",
    "!(p1(0) & p2(0))",
    "p1(0) & !p2(0)",
    "!p1(0) & p2(0)",
    "p1(0) & p2(0)",
];

/// Eight sentences over the two-predicate alphabet with pairwise distinct
/// truth sets in the two-predicate class.
pub fn prop_h_sentences() -> Vec<Sentence> {
    let a = two_predicate_alphabet();
    PROP_H_SENTENCES
        .iter()
        .map(|t| Sentence::new(parse_formula(t, &a).expect("fixture sentence parses")).expect("ground"))
        .collect()
}

/// Each of the eight sentences as a singleton hypothesis, with `PropH`
/// relative to the same sentences.
pub fn prop_h_pool() -> CandidatePool {
    let sentences = prop_h_sentences();
    let hs = sentences.iter().map(|s| Hypothesis::from([s.clone()]));
    CandidatePool::from_hypotheses(hs, &sentences, &two_predicate_class()).expect("fixture pool builds")
}

/// `{G0, G1, G2}` over the plant alphabet.
pub fn plant_pool() -> CandidatePool {
    CandidatePool::from_graphs([plant_g0(), plant_g1(), plant_g2()])
}

/// `{G1, G2, G3, G4}` over the three-predicate alphabet.
pub fn four_item_pool() -> CandidatePool {
    CandidatePool::from_graphs(three_predicate_graphs())
}
