//! Free-run over arbitrary atom sets, from a listed graph.
//!
//! Unlisted sets borrow des from the closest listed set and move like the
//! anchor of that set, keeping their own differences except where an edge
//! decides an atom.

use std::collections::BTreeSet;

pub type Atoms = BTreeSet<String>;

#[derive(Debug, Clone)]
pub struct Listed {
    pub id: String,
    pub atoms: Atoms,
    pub des: f64,
    pub anchor: Option<usize>,
    /// Free-run targets.
    pub next: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct Overlay {
    pub states: Vec<Listed>,
}

impl Overlay {
    pub fn closest(&self, x: &Atoms) -> usize {
        let mut best = (usize::MAX, 0);
        for (i, s) in self.states.iter().enumerate() {
            let d = x.symmetric_difference(&s.atoms).count();
            if d < best.0 {
                best = (d, i);
            }
        }
        best.1
    }

    pub fn des(&self, x: &Atoms) -> f64 {
        self.states[self.closest(x)].des
    }

    pub fn next(&self, x: &Atoms) -> Vec<Atoms> {
        if let Some(s) = self.states.iter().find(|s| &s.atoms == x) {
            if !s.next.is_empty() {
                return s.next.iter().map(|&j| self.states[j].atoms.clone()).collect();
            }
        }
        let c = self.closest(x);
        let b = self.states[c].anchor.unwrap_or(c);
        let base = &self.states[b];
        if base.next.is_empty() {
            return vec![x.clone()];
        }
        base.next
            .iter()
            .map(|&j| {
                let t = &self.states[j].atoms;
                let mut y = Atoms::new();
                for a in t.iter().chain(x.iter()).chain(base.atoms.iter()) {
                    let decided = base.atoms.contains(a) != t.contains(a);
                    let keep = if decided { t.contains(a) } else { x.contains(a) };
                    if keep {
                        y.insert(a.clone());
                    }
                }
                y
            })
            .collect()
    }

    pub fn run(&self, xs: Vec<Atoms>, k: usize) -> Vec<Atoms> {
        let mut cur: BTreeSet<Atoms> = xs.into_iter().collect();
        for _ in 0..k {
            cur = cur.iter().flat_map(|x| self.next(x)).collect();
        }
        cur.into_iter().collect()
    }

    pub fn des_min(&self, xs: &[Atoms]) -> f64 {
        xs.iter().map(|x| self.des(x)).fold(f64::INFINITY, f64::min)
    }
}
