//! The interactive move grammar: membership by Earley recognition and a
//! length-bounded derivation sampler.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::Terminal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Symbol {
    T(Terminal),
    N(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Production {
    pub lhs: usize,
    pub rhs: Vec<Symbol>,
}

/// A context-free grammar without empty productions.
#[derive(Debug, Clone)]
pub struct Cfg {
    names: Vec<&'static str>,
    productions: Vec<Production>,
    start: usize,
    /// Shortest terminal yield of each nonterminal.
    min_len: Vec<usize>,
}

#[derive(Debug, Error, PartialEq)]
pub enum GenerateError {
    #[error("no sentence of the language has length <= {0}")]
    TooShort(usize),
    #[error("count must be at least 1")]
    ZeroCount,
}

impl Cfg {
    pub fn new(names: Vec<&'static str>, productions: Vec<Production>, start: usize) -> Cfg {
        assert!(
            productions.iter().all(|p| !p.rhs.is_empty()),
            "empty productions are not supported"
        );
        let min_len = shortest_yields(names.len(), &productions);
        Cfg {
            names,
            productions,
            start,
            min_len,
        }
    }

    /// The interaction grammar:
    ///
    /// ```text
    /// S -> O A | A O
    /// O -> δ | δ D | ω | ω D | N | N D
    /// A -> α | α D | V | V D | P | P D
    /// D -> δ | δ D | P | P D | N | N D | y | y D | n | n D
    /// ```
    pub fn interactive() -> Cfg {
        use Symbol::{N as Nt, T};
        use Terminal::*;
        const S: usize = 0;
        const O: usize = 1;
        const A: usize = 2;
        const D: usize = 3;
        let mut prods = vec![
            Production { lhs: S, rhs: vec![Nt(O), Nt(A)] },
            Production { lhs: S, rhs: vec![Nt(A), Nt(O)] },
        ];
        let mut heads = |lhs: usize, ts: &[Terminal]| {
            for &t in ts {
                prods.push(Production { lhs, rhs: vec![T(t)] });
                prods.push(Production { lhs, rhs: vec![T(t), Nt(D)] });
            }
        };
        heads(O, &[Deixis, StaticIconic, Noun]);
        heads(A, &[DynamicIconic, Verb, Prep]);
        heads(D, &[Deixis, Prep, Noun, Yes, No]);
        Cfg::new(vec!["S", "O", "A", "D"], prods, S)
    }

    pub fn productions(&self) -> &[Production] {
        &self.productions
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn name(&self, nt: usize) -> &'static str {
        self.names[nt]
    }

    pub fn min_sentence_len(&self) -> usize {
        self.min_len[self.start]
    }

    /// Earley recognition of `input` from the start symbol.
    pub fn accepts(&self, input: &[Terminal]) -> bool {
        // item = (production, dot, origin)
        type Item = (usize, usize, usize);
        let n = input.len();
        let mut sets: Vec<Vec<Item>> = vec![Vec::new(); n + 1];
        let mut seen: Vec<HashSet<Item>> = vec![HashSet::new(); n + 1];
        let add = |sets: &mut Vec<Vec<Item>>, seen: &mut Vec<HashSet<Item>>, k: usize, it: Item| {
            if seen[k].insert(it) {
                sets[k].push(it);
            }
        };
        for (i, p) in self.productions.iter().enumerate() {
            if p.lhs == self.start {
                add(&mut sets, &mut seen, 0, (i, 0, 0));
            }
        }
        for k in 0..=n {
            let mut j = 0;
            while j < sets[k].len() {
                let (pi, dot, origin) = sets[k][j];
                let prod = &self.productions[pi];
                match prod.rhs.get(dot) {
                    Some(Symbol::N(b)) => {
                        for (qi, q) in self.productions.iter().enumerate() {
                            if q.lhs == *b {
                                add(&mut sets, &mut seen, k, (qi, 0, k));
                            }
                        }
                    }
                    Some(Symbol::T(t)) => {
                        if k < n && input[k] == *t {
                            add(&mut sets, &mut seen, k + 1, (pi, dot + 1, origin));
                        }
                    }
                    None => {
                        let lhs = prod.lhs;
                        let mut m = 0;
                        while m < sets[origin].len() {
                            let (ri, rdot, rorigin) = sets[origin][m];
                            if self.productions[ri].rhs.get(rdot) == Some(&Symbol::N(lhs)) {
                                add(&mut sets, &mut seen, k, (ri, rdot + 1, rorigin));
                            }
                            m += 1;
                        }
                    }
                }
                j += 1;
            }
        }
        sets[n].iter().any(|&(pi, dot, origin)| {
            let p = &self.productions[pi];
            origin == 0 && p.lhs == self.start && dot == p.rhs.len()
        })
    }

    /// Samples `count` sentences of length at most `max_len`. At every
    /// expansion the production is chosen uniformly among those whose
    /// shortest completion still fits the remaining length budget, so a
    /// derivation never has to be abandoned.
    pub fn generate(&self, max_len: usize, count: usize, seed: u64) -> Result<Vec<Vec<Terminal>>, GenerateError> {
        if max_len < self.min_sentence_len() {
            return Err(GenerateError::TooShort(max_len));
        }
        if count == 0 {
            return Err(GenerateError::ZeroCount);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok((0..count)
            .map(|_| {
                let mut out = Vec::new();
                self.expand(self.start, max_len, &mut rng, &mut out);
                out
            })
            .collect())
    }

    fn symbol_min(&self, s: &Symbol) -> usize {
        match s {
            Symbol::T(_) => 1,
            Symbol::N(n) => self.min_len[*n],
        }
    }

    fn expand(&self, nt: usize, budget: usize, rng: &mut ChaCha8Rng, out: &mut Vec<Terminal>) {
        let options: Vec<&Production> = self
            .productions
            .iter()
            .filter(|p| p.lhs == nt && p.rhs.iter().map(|s| self.symbol_min(s)).sum::<usize>() <= budget)
            .collect();
        let prod = options
            .choose(rng)
            .expect("budget always admits a production");
        let mut remaining = budget;
        for (i, sym) in prod.rhs.iter().enumerate() {
            let reserve: usize = prod.rhs[i + 1..].iter().map(|s| self.symbol_min(s)).sum();
            match sym {
                Symbol::T(t) => {
                    out.push(*t);
                    remaining -= 1;
                }
                Symbol::N(n) => {
                    let before = out.len();
                    self.expand(*n, remaining - reserve, rng, out);
                    remaining -= out.len() - before;
                }
            }
        }
    }
}

fn shortest_yields(count: usize, productions: &[Production]) -> Vec<usize> {
    let mut min = vec![usize::MAX; count];
    loop {
        let mut changed = false;
        for p in productions {
            let total = p.rhs.iter().try_fold(0usize, |acc, s| match s {
                Symbol::T(_) => Some(acc + 1),
                Symbol::N(n) => (min[*n] != usize::MAX).then(|| acc + min[*n]),
            });
            if let Some(t) = total {
                if t < min[p.lhs] {
                    min[p.lhs] = t;
                    changed = true;
                }
            }
        }
        if !changed {
            return min;
        }
    }
}
