use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::Debug;
use std::hash::Hash;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::error::{Error, Result};

/// A letter: bit `i` is track `i` of the alphabet.
pub type Symbol = u64;

/// An NFA given by oracles over state descriptors. Every accepted word has
/// exactly `word_len()` letters.
pub trait SuccinctNfa: Sync {
    type State: Clone + Eq + Hash + Debug + Send + Sync;

    /// Number of tracks; symbols range over `0..2^symbol_width()`.
    fn symbol_width(&self) -> usize;

    fn word_len(&self) -> usize;

    fn initial_states(&self) -> Vec<Self::State>;

    fn successors(&self, q: &Self::State, sigma: Symbol) -> Vec<Self::State>;

    fn is_final(&self, q: &Self::State) -> bool;

    /// Compact encoding of `q`. Must be prefix-free so that concatenations
    /// (product states) stay injective.
    fn encode_state(&self, q: &Self::State) -> Vec<u8>;

    /// Upper bound on `encode_state(q).len()` over reachable states.
    fn descriptor_bound(&self) -> usize;

    fn trans(&self, q: &Self::State, sigma: Symbol, next: &Self::State) -> bool {
        self.successors(q, sigma).contains(next)
    }

    /// All `(symbol, successor)` pairs from `q`. Implementations may override
    /// this to avoid trying every symbol.
    fn moves(&self, q: &Self::State) -> Vec<(Symbol, Self::State)> {
        assert!(self.symbol_width() < 32, "alphabet too wide to enumerate");
        let mut out = Vec::new();
        for sigma in 0..(1u64 << self.symbol_width()) {
            for next in self.successors(q, sigma) {
                out.push((sigma, next));
            }
        }
        out
    }
}

fn check_alphabet<A: SuccinctNfa, B: SuccinctNfa>(a: &A, b: &B) -> Result<()> {
    if a.symbol_width() != b.symbol_width() || a.word_len() != b.word_len() {
        return Err(Error::AlphabetMismatch(format!(
            "{} tracks / length {} versus {} tracks / length {}",
            a.symbol_width(),
            a.word_len(),
            b.symbol_width(),
            b.word_len()
        )));
    }
    Ok(())
}

/// Intersection: runs both automata in lockstep.
pub struct Product<A, B> {
    pub left: A,
    pub right: B,
}

pub fn intersect<A: SuccinctNfa, B: SuccinctNfa>(left: A, right: B) -> Result<Product<A, B>> {
    check_alphabet(&left, &right)?;
    Ok(Product { left, right })
}

impl<A: SuccinctNfa, B: SuccinctNfa> SuccinctNfa for Product<A, B> {
    type State = (A::State, B::State);

    fn symbol_width(&self) -> usize {
        self.left.symbol_width()
    }

    fn word_len(&self) -> usize {
        self.left.word_len()
    }

    fn initial_states(&self) -> Vec<Self::State> {
        let rs = self.right.initial_states();
        let mut out = Vec::new();
        for l in self.left.initial_states() {
            for r in &rs {
                out.push((l.clone(), r.clone()));
            }
        }
        out
    }

    fn successors(&self, (l, r): &Self::State, sigma: Symbol) -> Vec<Self::State> {
        let ls = self.left.successors(l, sigma);
        if ls.is_empty() {
            return Vec::new();
        }
        let rs = self.right.successors(r, sigma);
        let mut out = Vec::with_capacity(ls.len() * rs.len());
        for a in &ls {
            for b in &rs {
                out.push((a.clone(), b.clone()));
            }
        }
        out
    }

    fn is_final(&self, (l, r): &Self::State) -> bool {
        self.left.is_final(l) && self.right.is_final(r)
    }

    fn encode_state(&self, (l, r): &Self::State) -> Vec<u8> {
        let mut out = self.left.encode_state(l);
        out.extend(self.right.encode_state(r));
        out
    }

    fn descriptor_bound(&self) -> usize {
        self.left.descriptor_bound() + self.right.descriptor_bound()
    }

    fn trans(&self, (l, r): &Self::State, sigma: Symbol, (l2, r2): &Self::State) -> bool {
        self.left.trans(l, sigma, l2) && self.right.trans(r, sigma, r2)
    }

    fn moves(&self, (l, r): &Self::State) -> Vec<(Symbol, Self::State)> {
        let mut out = Vec::new();
        let mut cache: HashMap<Symbol, Vec<B::State>> = HashMap::new();
        for (sigma, a) in self.left.moves(l) {
            let rs = cache.entry(sigma).or_insert_with(|| self.right.successors(r, sigma));
            for b in rs.iter() {
                out.push((sigma, (a.clone(), b.clone())));
            }
        }
        out
    }
}

/// Union: both automata run in lockstep, a side that has died is `None`.
pub struct Union<A, B> {
    pub left: A,
    pub right: B,
}

pub fn union<A: SuccinctNfa, B: SuccinctNfa>(left: A, right: B) -> Result<Union<A, B>> {
    check_alphabet(&left, &right)?;
    Ok(Union { left, right })
}

fn or_dead<S>(v: Vec<S>) -> Vec<Option<S>> {
    if v.is_empty() {
        vec![None]
    } else {
        v.into_iter().map(Some).collect()
    }
}

fn pairs<L: Clone, R: Clone>(ls: Vec<Option<L>>, rs: &[Option<R>]) -> Vec<(Option<L>, Option<R>)> {
    let mut out = Vec::new();
    for l in ls {
        for r in rs {
            if l.is_some() || r.is_some() {
                out.push((l.clone(), r.clone()));
            }
        }
    }
    out
}

/// One side of a union transition. A side may only die when it has no
/// successor on the letter.
fn side_ok<S>(q: &Option<S>, q2: &Option<S>, ok: impl Fn(&S, &S) -> bool, stuck: impl Fn(&S) -> bool) -> bool {
    match (q, q2) {
        (Some(a), Some(b)) => ok(a, b),
        (Some(a), None) => stuck(a),
        (None, None) => true,
        (None, Some(_)) => false,
    }
}

impl<A: SuccinctNfa, B: SuccinctNfa> SuccinctNfa for Union<A, B> {
    type State = (Option<A::State>, Option<B::State>);

    fn symbol_width(&self) -> usize {
        self.left.symbol_width()
    }

    fn word_len(&self) -> usize {
        self.left.word_len()
    }

    fn initial_states(&self) -> Vec<Self::State> {
        let rs = or_dead(self.right.initial_states());
        pairs(or_dead(self.left.initial_states()), &rs)
    }

    fn successors(&self, (l, r): &Self::State, sigma: Symbol) -> Vec<Self::State> {
        let ls = or_dead(l.as_ref().map_or_else(Vec::new, |q| self.left.successors(q, sigma)));
        let rs = or_dead(r.as_ref().map_or_else(Vec::new, |q| self.right.successors(q, sigma)));
        pairs(ls, &rs)
    }

    fn is_final(&self, (l, r): &Self::State) -> bool {
        l.as_ref().is_some_and(|q| self.left.is_final(q)) || r.as_ref().is_some_and(|q| self.right.is_final(q))
    }

    fn encode_state(&self, (l, r): &Self::State) -> Vec<u8> {
        let mut out = Vec::new();
        match l {
            Some(q) => {
                out.push(1);
                out.extend(self.left.encode_state(q));
            }
            None => out.push(0),
        }
        match r {
            Some(q) => {
                out.push(1);
                out.extend(self.right.encode_state(q));
            }
            None => out.push(0),
        }
        out
    }

    fn descriptor_bound(&self) -> usize {
        2 + self.left.descriptor_bound() + self.right.descriptor_bound()
    }

    fn trans(&self, (l, r): &Self::State, sigma: Symbol, (l2, r2): &Self::State) -> bool {
        (l2.is_some() || r2.is_some())
            && side_ok(l, l2, |a, b| self.left.trans(a, sigma, b), |a| self.left.successors(a, sigma).is_empty())
            && side_ok(r, r2, |a, b| self.right.trans(a, sigma, b), |a| self.right.successors(a, sigma).is_empty())
    }
}

/// Views an automaton over a wider alphabet: outer track `tracks[i]` is
/// inner track `i`, other outer tracks are ignored.
pub struct Lift<A> {
    pub inner: A,
    pub width: usize,
    pub tracks: Vec<usize>,
}

impl<A: SuccinctNfa> Lift<A> {
    pub fn new(inner: A, width: usize, tracks: Vec<usize>) -> Result<Self> {
        if tracks.len() != inner.symbol_width() || tracks.iter().any(|&t| t >= width) || width > 63 {
            return Err(Error::AlphabetMismatch(format!(
                "cannot place {} tracks at {tracks:?} in an alphabet of {width}",
                inner.symbol_width()
            )));
        }
        Ok(Lift { inner, width, tracks })
    }

    fn project(&self, sigma: Symbol) -> Symbol {
        self.tracks
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &t)| acc | (((sigma >> t) & 1) << i))
    }
}

impl<A: SuccinctNfa> SuccinctNfa for Lift<A> {
    type State = A::State;

    fn symbol_width(&self) -> usize {
        self.width
    }

    fn word_len(&self) -> usize {
        self.inner.word_len()
    }

    fn initial_states(&self) -> Vec<Self::State> {
        self.inner.initial_states()
    }

    fn successors(&self, q: &Self::State, sigma: Symbol) -> Vec<Self::State> {
        self.inner.successors(q, self.project(sigma))
    }

    fn is_final(&self, q: &Self::State) -> bool {
        self.inner.is_final(q)
    }

    fn encode_state(&self, q: &Self::State) -> Vec<u8> {
        self.inner.encode_state(q)
    }

    fn descriptor_bound(&self) -> usize {
        self.inner.descriptor_bound()
    }

    fn trans(&self, q: &Self::State, sigma: Symbol, next: &Self::State) -> bool {
        self.inner.trans(q, self.project(sigma), next)
    }
}

/// Exploration limits. `max_seconds = None` disables the clock.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Budget {
    pub max_states: usize,
    pub max_seconds: Option<f64>,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_states: 1 << 24,
            max_seconds: None,
        }
    }
}

/// A successor together with its letter and descriptor.
type Move<Q> = (Symbol, Q, Vec<u8>);

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Stats {
    /// Distinct (depth, state) pairs visited.
    pub states: usize,
    pub widest_layer: usize,
    pub max_descriptor: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Emptiness {
    /// An accepted word if the language is non-empty.
    pub witness: Option<Vec<Symbol>>,
    pub stats: Stats,
}

struct Node<S> {
    state: S,
    parent: usize,
    symbol: Symbol,
}

/// Breadth-first search for an accepted word, layer by layer, deduplicating
/// states by descriptor within each layer. Any witness is replayed through
/// `trans` before it is returned.
pub fn is_empty<A: SuccinctNfa>(a: &A, budget: &Budget) -> Result<Emptiness> {
    let start = Instant::now();
    let deadline = budget.max_seconds.map(Duration::from_secs_f64);
    let bound = a.descriptor_bound();
    let mut stats = Stats::default();

    let mut seen = HashSet::new();
    let mut layer: Vec<Node<A::State>> = Vec::new();
    for q in a.initial_states() {
        let d = a.encode_state(&q);
        if seen.insert(d) {
            layer.push(Node {
                state: q,
                parent: usize::MAX,
                symbol: 0,
            });
        }
    }
    let mut layers: Vec<Vec<Node<A::State>>> = Vec::with_capacity(a.word_len() + 1);
    stats.states = layer.len();
    stats.widest_layer = layer.len();

    for _ in 0..a.word_len() {
        if layer.is_empty() {
            break;
        }
        let expanded: Vec<Vec<Move<A::State>>> = layer
            .par_iter()
            .map(|node| {
                a.moves(&node.state)
                    .into_iter()
                    .map(|(s, q)| {
                        let d = a.encode_state(&q);
                        (s, q, d)
                    })
                    .collect()
            })
            .collect();
        let mut next = Vec::new();
        let mut seen = HashSet::new();
        for (parent, succ) in expanded.into_iter().enumerate() {
            for (symbol, state, d) in succ {
                if d.len() > bound {
                    return Err(Error::Internal(format!(
                        "state descriptor of {} bytes exceeds the declared bound {bound}",
                        d.len()
                    )));
                }
                stats.max_descriptor = stats.max_descriptor.max(d.len());
                if seen.insert(d) {
                    next.push(Node { state, parent, symbol });
                }
            }
            if stats.states + next.len() > budget.max_states {
                return Err(Error::BudgetExhausted(format!(
                    "more than {} automaton states",
                    budget.max_states
                )));
            }
        }
        if let Some(limit) = deadline {
            if start.elapsed() > limit {
                return Err(Error::BudgetExhausted(format!(
                    "exceeded {:.1} seconds",
                    limit.as_secs_f64()
                )));
            }
        }
        stats.states += next.len();
        stats.widest_layer = stats.widest_layer.max(next.len());
        layers.push(std::mem::replace(&mut layer, next));
    }
    if layers.len() < a.word_len() {
        return Ok(Emptiness { witness: None, stats });
    }
    let Some(end) = layer.iter().position(|n| a.is_final(&n.state)) else {
        return Ok(Emptiness { witness: None, stats });
    };
    layers.push(layer);

    let mut path = Vec::with_capacity(a.word_len() + 1);
    let mut idx = end;
    for depth in (0..layers.len()).rev() {
        let node = &layers[depth][idx];
        path.push((node.symbol, node.state.clone()));
        idx = node.parent;
    }
    path.reverse();
    let word: Vec<Symbol> = path[1..].iter().map(|(s, _)| *s).collect();
    for w in path.windows(2) {
        if !a.trans(&w[0].1, w[1].0, &w[1].1) {
            return Err(Error::Internal("witness replay rejected a transition".into()));
        }
    }
    Ok(Emptiness {
        witness: Some(word),
        stats,
    })
}

/// Checks that `word` is accepted by simulating the subset of reachable states.
pub fn accepts<A: SuccinctNfa>(a: &A, word: &[Symbol]) -> bool {
    if word.len() != a.word_len() {
        return false;
    }
    let mut current: Vec<A::State> = a.initial_states();
    for &sigma in word {
        let mut seen = HashSet::new();
        let mut next = Vec::new();
        for q in &current {
            for r in a.successors(q, sigma) {
                if seen.insert(a.encode_state(&r)) {
                    next.push(r);
                }
            }
        }
        current = next;
    }
    current.iter().any(|q| a.is_final(q))
}

/// Every accepted word, by depth-first search over reachable state sets.
/// Refuses to visit more than `max_sets` sets.
pub fn accepted_words<A: SuccinctNfa>(a: &A, max_sets: usize) -> Result<BTreeSet<Vec<Symbol>>> {
    let mut out = BTreeSet::new();
    let mut visited = 0usize;
    let mut prefix = Vec::with_capacity(a.word_len());
    let init = dedup(a, a.initial_states());
    walk(a, init, &mut prefix, &mut out, &mut visited, max_sets)?;
    Ok(out)
}

fn dedup<A: SuccinctNfa>(a: &A, states: Vec<A::State>) -> Vec<A::State> {
    let mut seen = HashSet::new();
    states.into_iter().filter(|q| seen.insert(a.encode_state(q))).collect()
}

fn walk<A: SuccinctNfa>(
    a: &A,
    states: Vec<A::State>,
    prefix: &mut Vec<Symbol>,
    out: &mut BTreeSet<Vec<Symbol>>,
    visited: &mut usize,
    max_sets: usize,
) -> Result<()> {
    *visited += 1;
    if *visited > max_sets {
        return Err(Error::BudgetExhausted(format!("more than {max_sets} state sets")));
    }
    if prefix.len() == a.word_len() {
        if states.iter().any(|q| a.is_final(q)) {
            out.insert(prefix.clone());
        }
        return Ok(());
    }
    let mut by_symbol: std::collections::BTreeMap<Symbol, Vec<A::State>> = Default::default();
    for q in &states {
        for (s, r) in a.moves(q) {
            by_symbol.entry(s).or_default().push(r);
        }
    }
    for (s, next) in by_symbol {
        prefix.push(s);
        walk(a, dedup(a, next), prefix, out, visited, max_sets)?;
        prefix.pop();
    }
    Ok(())
}

/// An automaton given by an explicit transition list. States carry the
/// depth so that only words of exactly `len` letters are accepted.
#[derive(Debug, Clone)]
pub struct ExplicitNfa {
    pub width: usize,
    pub len: usize,
    pub initial: Vec<u32>,
    pub finals: Vec<u32>,
    pub edges: Vec<(u32, Symbol, u32)>,
}

impl ExplicitNfa {
    /// Accepts exactly the given words.
    pub fn from_words(width: usize, len: usize, words: &[Vec<Symbol>]) -> Self {
        // one chain of fresh states per word
        let mut edges = Vec::new();
        let mut initial = Vec::new();
        let mut finals = Vec::new();
        let mut next = 0u32;
        for w in words {
            assert_eq!(w.len(), len);
            initial.push(next);
            for &s in w {
                edges.push((next, s, next + 1));
                next += 1;
            }
            finals.push(next);
            next += 1;
        }
        ExplicitNfa {
            width,
            len,
            initial,
            finals,
            edges,
        }
    }

    pub fn universal(width: usize, len: usize) -> Self {
        let edges = (0..(1u64 << width)).map(|s| (0, s, 0)).collect();
        ExplicitNfa {
            width,
            len,
            initial: vec![0],
            finals: vec![0],
            edges,
        }
    }
}

impl SuccinctNfa for ExplicitNfa {
    /// (depth, state id)
    type State = (u32, u32);

    fn symbol_width(&self) -> usize {
        self.width
    }

    fn word_len(&self) -> usize {
        self.len
    }

    fn initial_states(&self) -> Vec<Self::State> {
        self.initial.iter().map(|&q| (0, q)).collect()
    }

    fn successors(&self, &(t, q): &Self::State, sigma: Symbol) -> Vec<Self::State> {
        if t as usize >= self.len {
            return Vec::new();
        }
        let mut out: Vec<Self::State> = self
            .edges
            .iter()
            .filter(|&&(a, s, _)| a == q && s == sigma)
            .map(|&(_, _, b)| (t + 1, b))
            .collect();
        out.dedup();
        out
    }

    fn trans(&self, &(t, q): &Self::State, sigma: Symbol, &(t2, q2): &Self::State) -> bool {
        t2 == t + 1 && (t as usize) < self.len && self.edges.contains(&(q, sigma, q2))
    }

    fn is_final(&self, &(t, q): &Self::State) -> bool {
        t as usize == self.len && self.finals.contains(&q)
    }

    fn encode_state(&self, &(t, q): &Self::State) -> Vec<u8> {
        let mut out = t.to_le_bytes().to_vec();
        out.extend(q.to_le_bytes());
        out
    }

    fn descriptor_bound(&self) -> usize {
        8
    }
}

/// Zigzag LEB128, a prefix-free integer encoding for state descriptors.
pub fn push_varint(out: &mut Vec<u8>, v: i64) {
    let mut z = ((v << 1) ^ (v >> 63)) as u64;
    loop {
        let byte = (z & 0x7f) as u8;
        z >>= 7;
        if z == 0 {
            out.push(byte);
            return;
        }
        out.push(byte | 0x80);
    }
}

/// Bytes `push_varint` uses for any value of magnitude at most `bound`.
pub fn varint_len(bound: u64) -> usize {
    let z = bound.saturating_mul(2).max(1);
    (64 - z.leading_zeros() as usize).div_ceil(7)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(v: &[&str]) -> Vec<Vec<Symbol>> {
        v.iter().map(|w| w.bytes().map(|b| (b - b'0') as Symbol).collect()).collect()
    }

    fn set(v: &[&str]) -> BTreeSet<Vec<Symbol>> {
        words(v).into_iter().collect()
    }

    #[test]
    fn witness_for_single_word() {
        let a = ExplicitNfa::from_words(1, 3, &words(&["101"]));
        let r = is_empty(&a, &Budget::default()).unwrap();
        assert_eq!(r.witness, Some(vec![1, 0, 1]));
        assert!(accepts(&a, &[1, 0, 1]) && !accepts(&a, &[1, 1, 1]));
    }

    #[test]
    fn intersection_examples() {
        let a = ExplicitNfa::from_words(1, 2, &words(&["00", "01"]));
        let b = ExplicitNfa::from_words(1, 2, &words(&["01", "11"]));
        let p = intersect(a.clone(), b.clone()).unwrap();
        assert_eq!(accepted_words(&p, 1000).unwrap(), set(&["01"]));
        let u = union(a.clone(), b.clone()).unwrap();
        assert_eq!(accepted_words(&u, 1000).unwrap(), set(&["00", "01", "11"]));
        let c = ExplicitNfa::from_words(1, 2, &words(&["10"]));
        let empty = intersect(a.clone(), c).unwrap();
        assert_eq!(is_empty(&empty, &Budget::default()).unwrap().witness, None);
        // descriptor sizes add up
        let q = p.initial_states()[0];
        assert_eq!(
            p.encode_state(&q).len(),
            a.encode_state(&q.0).len() + b.encode_state(&q.1).len()
        );
        assert!(intersect(a, ExplicitNfa::universal(2, 2)).is_err());
    }

    #[test]
    fn universal_is_neutral() {
        for len in 1..=4 {
            let all: Vec<Vec<Symbol>> = (0..1u64 << len)
                .map(|c| (0..len).map(|i| (c >> i) & 1).collect())
                .filter(|w: &Vec<Symbol>| w[0] == 1 || w.iter().sum::<u64>() == 0)
                .collect();
            let a = ExplicitNfa::from_words(1, len, &all);
            let p = intersect(a.clone(), ExplicitNfa::universal(1, len)).unwrap();
            assert_eq!(accepted_words(&p, 100_000).unwrap(), accepted_words(&a, 100_000).unwrap());
            let u = union(a.clone(), ExplicitNfa::from_words(1, len, &[])).unwrap();
            assert_eq!(accepted_words(&u, 100_000).unwrap(), accepted_words(&a, 100_000).unwrap());
        }
    }

    #[test]
    fn lift_projects_tracks() {
        // inner accepts the single track word 1,0; placed on outer track 1 of 2
        let inner = ExplicitNfa::from_words(1, 2, &words(&["10"]));
        let l = Lift::new(inner, 2, vec![1]).unwrap();
        let got = accepted_words(&l, 1000).unwrap();
        let expected: BTreeSet<Vec<Symbol>> = [vec![2, 0], vec![2, 1], vec![3, 0], vec![3, 1]].into();
        assert_eq!(got, expected);
        assert!(Lift::new(ExplicitNfa::universal(1, 1), 2, vec![2]).is_err());
    }

    #[test]
    fn budget_is_enforced() {
        let a = ExplicitNfa::universal(2, 6);
        let tight = Budget {
            max_states: 3,
            max_seconds: None,
        };
        assert!(matches!(is_empty(&a, &tight), Err(Error::BudgetExhausted(_))));
        assert!(accepted_words(&a, 10).is_err());
    }

    #[test]
    fn varints_are_prefix_free() {
        let vals = [0i64, 1, -1, 63, -64, 64, 1000, -1000, i64::MAX, i64::MIN];
        let mut codes = Vec::new();
        for v in vals {
            let mut b = Vec::new();
            push_varint(&mut b, v);
            assert!(b.len() <= varint_len(v.unsigned_abs()));
            codes.push(b);
        }
        for (i, a) in codes.iter().enumerate() {
            for (j, b) in codes.iter().enumerate() {
                if i != j {
                    assert!(!b.starts_with(a), "{a:?} prefixes {b:?}");
                }
            }
        }
    }
}
