//! Automata reading the bit slices of a BV assignment, least significant
//! position first. Letter `j` has bit `i` equal to bit `j` of variable `i`.

use super::nfa::{push_varint, varint_len, SuccinctNfa, Symbol};
use crate::spec::{BvSpec, BvTerm, Nnf};

/// One equation `lhs = rhs` (or `lhs != rhs`), tracked by an equality flag
/// that can only drop from 1 to 0.
#[derive(Debug, Clone)]
pub struct AtomNfa {
    pub lhs: BvTerm,
    pub rhs: BvTerm,
    pub positive: bool,
    pub vars: usize,
    pub width: usize,
}

/// `(j, f_eq)`
pub type AtomState = (usize, bool);

impl SuccinctNfa for AtomNfa {
    type State = AtomState;

    fn symbol_width(&self) -> usize {
        self.vars
    }

    fn word_len(&self) -> usize {
        self.width
    }

    fn initial_states(&self) -> Vec<AtomState> {
        vec![(0, true)]
    }

    fn successors(&self, &(j, eq): &AtomState, sigma: Symbol) -> Vec<AtomState> {
        if j >= self.width {
            return Vec::new();
        }
        vec![(j + 1, eq && self.lhs.eval_slice(j, sigma) == self.rhs.eval_slice(j, sigma))]
    }

    fn trans(&self, &(j, eq): &AtomState, sigma: Symbol, &(j2, eq2): &AtomState) -> bool {
        j < self.width
            && j2 == j + 1
            && eq2 == (eq && self.lhs.eval_slice(j, sigma) == self.rhs.eval_slice(j, sigma))
    }

    fn is_final(&self, &(j, eq): &AtomState) -> bool {
        j == self.width && eq == self.positive
    }

    fn encode_state(&self, &(j, eq): &AtomState) -> Vec<u8> {
        let mut out = Vec::with_capacity(4);
        push_varint(&mut out, j as i64);
        out.push(eq as u8);
        out
    }

    fn descriptor_bound(&self) -> usize {
        varint_len(self.width as u64) + 1
    }
}

#[derive(Debug, Clone)]
enum Shape {
    True,
    False,
    Atom(usize),
    And(Box<Shape>, Box<Shape>),
    Or(Box<Shape>, Box<Shape>),
}

/// The model automaton of a formula: the atom automata of its negation
/// normal form run in lockstep, and acceptance combines their verdicts along
/// the formula tree (all components for `/\`, any for `\/`). Since every
/// atom automaton is deterministic and complete, this is the product/union
/// composition with the tuple of atom states flattened into one vector.
#[derive(Debug, Clone)]
pub struct BvNfa {
    atoms: Vec<AtomNfa>,
    shape: Shape,
    vars: usize,
    width: usize,
}

/// Position and one equality flag per atom.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BvState {
    pub j: usize,
    pub flags: Vec<bool>,
}

impl BvNfa {
    pub fn new(spec: &BvSpec) -> Self {
        let vars = spec.vars().len();
        let width = spec.width();
        assert!(vars <= 63, "too many variables for a letter");
        let mut atoms = Vec::new();
        let shape = Self::shape(&spec.formula().nnf(), &mut atoms, vars, width);
        BvNfa {
            atoms,
            shape,
            vars,
            width,
        }
    }

    fn shape(n: &Nnf, atoms: &mut Vec<AtomNfa>, vars: usize, width: usize) -> Shape {
        match n {
            Nnf::True => Shape::True,
            Nnf::False => Shape::False,
            Nnf::Atom { lhs, rhs, positive } => {
                atoms.push(AtomNfa {
                    lhs: lhs.clone(),
                    rhs: rhs.clone(),
                    positive: *positive,
                    vars,
                    width,
                });
                Shape::Atom(atoms.len() - 1)
            }
            Nnf::And(a, b) => Shape::And(
                Box::new(Self::shape(a, atoms, vars, width)),
                Box::new(Self::shape(b, atoms, vars, width)),
            ),
            Nnf::Or(a, b) => Shape::Or(
                Box::new(Self::shape(a, atoms, vars, width)),
                Box::new(Self::shape(b, atoms, vars, width)),
            ),
        }
    }

    pub fn atoms(&self) -> &[AtomNfa] {
        &self.atoms
    }

    fn accept(&self, shape: &Shape, q: &BvState) -> bool {
        match shape {
            Shape::True => true,
            Shape::False => false,
            Shape::Atom(i) => self.atoms[*i].is_final(&(q.j, q.flags[*i])),
            Shape::And(a, b) => self.accept(a, q) && self.accept(b, q),
            Shape::Or(a, b) => self.accept(a, q) || self.accept(b, q),
        }
    }

    /// True when no continuation can reach acceptance.
    fn dead(&self, shape: &Shape, q: &BvState) -> bool {
        match shape {
            Shape::True => false,
            Shape::False => true,
            // a positive equation fails for good once its flag drops
            Shape::Atom(i) => self.atoms[*i].positive && !q.flags[*i],
            Shape::And(a, b) => self.dead(a, q) || self.dead(b, q),
            Shape::Or(a, b) => self.dead(a, q) && self.dead(b, q),
        }
    }
}

impl SuccinctNfa for BvNfa {
    type State = BvState;

    fn symbol_width(&self) -> usize {
        self.vars
    }

    fn word_len(&self) -> usize {
        self.width
    }

    fn initial_states(&self) -> Vec<BvState> {
        let q = BvState {
            j: 0,
            flags: vec![true; self.atoms.len()],
        };
        if self.dead(&self.shape, &q) {
            Vec::new()
        } else {
            vec![q]
        }
    }

    fn successors(&self, q: &BvState, sigma: Symbol) -> Vec<BvState> {
        if q.j >= self.width {
            return Vec::new();
        }
        let flags = self
            .atoms
            .iter()
            .zip(&q.flags)
            .map(|(a, &eq)| eq && a.lhs.eval_slice(q.j, sigma) == a.rhs.eval_slice(q.j, sigma))
            .collect();
        let next = BvState { j: q.j + 1, flags };
        if self.dead(&self.shape, &next) {
            Vec::new()
        } else {
            vec![next]
        }
    }

    fn trans(&self, q: &BvState, sigma: Symbol, next: &BvState) -> bool {
        next.flags.len() == self.atoms.len()
            && !self.dead(&self.shape, next)
            && self
                .atoms
                .iter()
                .enumerate()
                .all(|(i, a)| a.trans(&(q.j, q.flags[i]), sigma, &(next.j, next.flags[i])))
    }

    fn is_final(&self, q: &BvState) -> bool {
        q.j == self.width && self.accept(&self.shape, q)
    }

    fn encode_state(&self, q: &BvState) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.descriptor_bound());
        push_varint(&mut out, q.j as i64);
        for chunk in q.flags.chunks(8) {
            out.push(chunk.iter().enumerate().fold(0u8, |acc, (i, &b)| acc | ((b as u8) << i)));
        }
        out
    }

    fn descriptor_bound(&self) -> usize {
        varint_len(self.width as u64) + self.atoms.len().div_ceil(8)
    }
}

/// Words of a BV automaton back to variable values.
pub fn word_to_values(word: &[Symbol], vars: usize) -> Vec<u128> {
    (0..vars)
        .map(|i| {
            word.iter()
                .enumerate()
                .fold(0u128, |acc, (j, &s)| acc | ((((s >> i) & 1) as u128) << j))
        })
        .collect()
}

/// Variable values to the slice word of length `width`.
pub fn values_to_word(values: &[u128], width: usize) -> Vec<Symbol> {
    (0..width)
        .map(|j| {
            values
                .iter()
                .enumerate()
                .fold(0u64, |acc, (i, &v)| acc | ((((v >> j) & 1) as u64) << i))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::{accepted_words, intersect, is_empty, union, Budget};
    use std::collections::BTreeSet;

    fn spec(text: &str, width: usize, vars: &[&str]) -> BvSpec {
        let vars: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
        BvSpec::parse(text, width, &vars).unwrap()
    }

    fn models(s: &BvSpec) -> BTreeSet<Vec<Symbol>> {
        let n = s.vars().len();
        let w = s.width();
        (0..1u128 << (n * w))
            .map(|code| (0..n).map(|i| (code >> (i * w)) & ((1 << w) - 1)).collect::<Vec<_>>())
            .filter(|v| s.eval_words(v))
            .map(|v| values_to_word(&v, w))
            .collect()
    }

    #[test]
    fn constant_equation() {
        let s = spec("x = 0b10", 2, &["x"]);
        let words = accepted_words(&BvNfa::new(&s), 1000).unwrap();
        assert_eq!(words, BTreeSet::from([vec![0, 1]]));
    }

    #[test]
    fn disequality_counts() {
        let s = spec("~(x = y)", 3, &["x", "y"]);
        let words = accepted_words(&BvNfa::new(&s), 100_000).unwrap();
        assert_eq!(words.len(), 56);
        for w in &words {
            let v = word_to_values(w, 2);
            assert!(s.eval_words(&v));
        }
    }

    #[test]
    fn mixed_formula_matches_models() {
        for width in 1..=4 {
            let s = spec("(x & y) = x /\\ ~(x = y)", width, &["x", "y"]);
            assert_eq!(accepted_words(&BvNfa::new(&s), 1 << 20).unwrap(), models(&s));
            let s = spec("x = 1 \\/ (x ^ y) != ~y /\\ !(y = 0)", width, &["x", "y"]);
            assert_eq!(accepted_words(&BvNfa::new(&s), 1 << 20).unwrap(), models(&s));
        }
    }

    #[test]
    fn flattened_composition_matches_generic_closures() {
        let s = spec("(x = 1 \\/ y = 2) /\\ x != y", 2, &["x", "y"]);
        let flat = BvNfa::new(&s);
        let a = flat.atoms().to_vec();
        let composed = intersect(
            union(a[0].clone(), a[1].clone()).unwrap(),
            a[2].clone(),
        )
        .unwrap();
        assert_eq!(
            accepted_words(&flat, 100_000).unwrap(),
            accepted_words(&composed, 100_000).unwrap()
        );
    }

    #[test]
    fn unsat_and_witnesses() {
        let s = spec("x = 0 /\\ ~(x = 0)", 3, &["x"]);
        assert!(BvNfa::new(&s).initial_states().len() <= 1);
        assert_eq!(is_empty(&BvNfa::new(&s), &Budget::default()).unwrap().witness, None);
        let s = spec("(x | y) = 0b101 /\\ (x & y) = 0b001 /\\ x != 0b101", 3, &["x", "y"]);
        let w = is_empty(&BvNfa::new(&s), &Budget::default()).unwrap().witness.unwrap();
        assert!(s.eval_words(&word_to_values(&w, 2)));
        assert!(BvNfa::new(&spec("false", 2, &["x"])).initial_states().is_empty());
    }

    #[test]
    fn equality_flag_never_recovers() {
        let s = spec("x != 0b0110 \\/ x = y", 4, &["x", "y"]);
        let a = BvNfa::new(&s);
        let mut frontier = a.initial_states();
        while let Some(q) = frontier.pop() {
            for sigma in 0..4 {
                for r in a.successors(&q, sigma) {
                    for (f, g) in q.flags.iter().zip(&r.flags) {
                        assert!(*f || !*g);
                    }
                    assert!(a.trans(&q, sigma, &r));
                    frontier.push(r);
                }
            }
        }
    }
}
