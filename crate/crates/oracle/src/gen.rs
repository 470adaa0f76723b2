//! Seeded random instances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::eqm::{Graph, Scheme};
use crate::strips::{Action, State};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Des values drawn half from a coarse grid (to force ties) and half
/// uniformly.
fn des(r: &mut ChaCha8Rng) -> f64 {
    if r.random_bool(0.5) {
        f64::from(r.random_range(0..=10u8)) / 10.0
    } else {
        r.random::<f64>()
    }
}

pub fn graph(r: &mut ChaCha8Rng, states: usize) -> Graph {
    let succ = (0..states)
        .map(|_| {
            let n = r.random_range(0..=3);
            let mut v: Vec<usize> = (0..n).map(|_| r.random_range(0..states)).collect();
            v.sort_unstable();
            v.dedup();
            v
        })
        .collect();
    Graph {
        succ,
        des: (0..states).map(|_| des(r)).collect(),
    }
}

pub fn scheme(r: &mut ChaCha8Rng, states: usize) -> Scheme {
    let density = r.random_range(0.1..0.9);
    Scheme {
        dom: (0..states)
            .map(|_| {
                r.random_bool(density).then(|| {
                    let n = r.random_range(1..=3);
                    let mut v: Vec<usize> = (0..n).map(|_| r.random_range(0..states)).collect();
                    v.sort_unstable();
                    v.dedup();
                    v
                })
            })
            .collect(),
    }
}

#[derive(Debug, Clone)]
pub struct EqmInstance {
    pub graph: Graph,
    pub schemes: Vec<Scheme>,
    pub horizon: usize,
}

pub fn eqm_instance(seed: u64, max_states: usize, max_schemes: usize, max_k: usize) -> EqmInstance {
    let mut r = rng(seed);
    let n = r.random_range(1..=max_states);
    let graph = graph(&mut r, n);
    let m = r.random_range(0..=max_schemes);
    let schemes = (0..m).map(|_| scheme(&mut r, n)).collect();
    EqmInstance {
        graph,
        schemes,
        horizon: r.random_range(0..=max_k),
    }
}

#[derive(Debug, Clone)]
pub struct StripsInstance {
    pub atoms: u32,
    pub start: State,
    pub goal: State,
    pub actions: Vec<Action>,
}

fn pick(r: &mut ChaCha8Rng, atoms: u32, max: usize) -> Vec<u32> {
    let n = r.random_range(0..=max);
    let mut v: Vec<u32> = (0..n).map(|_| r.random_range(0..atoms)).collect();
    v.sort_unstable();
    v.dedup();
    v
}

pub fn strips_instance(seed: u64, max_atoms: u32, max_actions: usize) -> StripsInstance {
    let mut r = rng(seed);
    let atoms = r.random_range(2..=max_atoms);
    let n = r.random_range(1..=max_actions);
    let actions = (0..n)
        .map(|_| {
            let pre = pick(&mut r, atoms, 2);
            let neg: Vec<u32> = pick(&mut r, atoms, 1).into_iter().filter(|a| !pre.contains(a)).collect();
            let mut add = pick(&mut r, atoms, 2);
            if add.is_empty() {
                add.push(r.random_range(0..atoms));
            }
            let del: Vec<u32> = pick(&mut r, atoms, 2).into_iter().filter(|a| !add.contains(a)).collect();
            Action { pre, neg, add, del }
        })
        .collect();
    StripsInstance {
        atoms,
        start: pick(&mut r, atoms, 3).into_iter().collect(),
        goal: pick(&mut r, atoms, 3).into_iter().collect(),
        actions,
    }
}
