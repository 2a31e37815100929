use std::collections::BTreeMap;

use super::FormulaGraph;
use crate::logic::Variable;

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for k in 0..n {
        out = out
            .into_iter()
            .flat_map(|p: Vec<usize>| {
                (0..=k).map(move |i| {
                    let mut q = p.clone();
                    q.insert(i, k);
                    q
                })
            })
            .collect();
    }
    out
}

/// The least renaming of `g` (by graph order) over all assignments of the
/// names `x1, x2, ..` to its variables, numbered across sorts in sort order.
/// Isomorphic graphs get equal forms.
pub fn canonical_form(g: &FormulaGraph) -> FormulaGraph {
    let mut by_sort: BTreeMap<String, Vec<Variable>> = BTreeMap::new();
    for v in g.variables() {
        by_sort.entry(v.sort.clone()).or_default().push(v);
    }
    if by_sort.is_empty() {
        return g.clone();
    }
    let groups: Vec<(usize, Vec<Variable>)> = {
        let mut next = 1;
        by_sort
            .into_values()
            .map(|vs| {
                let start = next;
                next += vs.len();
                (start, vs)
            })
            .collect()
    };
    let mut choices: Vec<Vec<(Variable, Variable)>> = vec![Vec::new()];
    for (start, vs) in &groups {
        let perms = permutations(vs.len());
        choices = choices
            .into_iter()
            .flat_map(|prefix| {
                perms.iter().map(move |p| {
                    let mut m = prefix.clone();
                    for (i, v) in vs.iter().enumerate() {
                        m.push((v.clone(), Variable::new(format!("x{}", start + p[i]), v.sort.clone())));
                    }
                    m
                })
            })
            .collect();
    }
    choices
        .into_iter()
        .map(|pairs| {
            let m: BTreeMap<Variable, Variable> = pairs.into_iter().collect();
            g.rename(|v| m[v].clone())
        })
        .min()
        .expect("at least one renaming")
}

/// Order-prefixed printed canonical form, so keys sort by order first.
pub fn canonical_key(g: &FormulaGraph) -> String {
    format!("{:04}|{}", g.order(), canonical_form(g))
}
