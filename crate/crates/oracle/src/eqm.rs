//! Opportunity operators by explicit set materialization.
//!
//! States are indices, sets are bit vectors, and every operator is read
//! straight off its formula with no sharing between them.

/// `succ[s]` empty means `s` loops on itself.
#[derive(Debug, Clone)]
pub struct Graph {
    pub succ: Vec<Vec<usize>>,
    pub des: Vec<f64>,
}

/// `dom[s]` is `None` where the scheme does not apply.
#[derive(Debug, Clone)]
pub struct Scheme {
    pub dom: Vec<Option<Vec<usize>>>,
}

pub type Set = Vec<bool>;

impl Graph {
    pub fn len(&self) -> usize {
        self.des.len()
    }

    pub fn is_empty(&self) -> bool {
        self.des.is_empty()
    }

    pub fn singleton(&self, s: usize) -> Set {
        let mut x = vec![false; self.len()];
        x[s] = true;
        x
    }

    pub fn from_list(&self, xs: &[usize]) -> Set {
        let mut x = vec![false; self.len()];
        for &s in xs {
            x[s] = true;
        }
        x
    }

    pub fn image(&self, x: &Set) -> Set {
        let mut y = vec![false; self.len()];
        for s in 0..self.len() {
            if !x[s] {
                continue;
            }
            if self.succ[s].is_empty() {
                y[s] = true;
            }
            for &t in &self.succ[s] {
                y[t] = true;
            }
        }
        y
    }

    pub fn run(&self, x: &Set, k: usize) -> Set {
        let mut y = x.clone();
        for _ in 0..k {
            y = self.image(&y);
        }
        y
    }

    /// Min des over a set; `None` for the empty set.
    pub fn des_set(&self, x: &Set) -> Option<f64> {
        let mut m: Option<f64> = None;
        for (&inside, &d) in x.iter().zip(&self.des) {
            if inside {
                m = Some(match m {
                    Some(v) if v <= d => v,
                    _ => d,
                });
            }
        }
        m
    }

    pub fn members(x: &Set) -> Vec<usize> {
        (0..x.len()).filter(|&s| x[s]).collect()
    }
}

pub fn bnf(g: &Graph, a: &Scheme, s: usize, k: usize) -> f64 {
    match &a.dom[s] {
        None => 0.0,
        Some(out) => g.des_set(&g.run(&g.from_list(out), k)).unwrap_or(0.0),
    }
}

fn max_of(v: Vec<f64>) -> f64 {
    let mut m = f64::NEG_INFINITY;
    for x in v {
        if x > m {
            m = x;
        }
    }
    m
}

fn min_of(v: Vec<f64>) -> f64 {
    let mut m = f64::INFINITY;
    for x in v {
        if x < m {
            m = x;
        }
    }
    m
}

/// Degree of Opp_i(a, s, k).
pub fn opp(g: &Graph, a: &Scheme, i: u8, s: usize, k: usize) -> f64 {
    let fk = Graph::members(&g.run(&g.singleton(s), k));
    let here = 1.0 - g.des[s];
    match i {
        0 => here.min(bnf(g, a, s, 0)),
        1 => here.min(max_of(fk.iter().map(|&x| bnf(g, a, x, 0)).collect())),
        2 => here.min(min_of(fk.iter().map(|&x| bnf(g, a, x, 0)).collect())),
        3 => max_of(fk.iter().map(|&x| (1.0 - g.des[x]).min(bnf(g, a, x, 0))).collect()),
        4 => min_of(fk.iter().map(|&x| (1.0 - g.des[x]).min(bnf(g, a, x, 0))).collect()),
        5 => max_of(fk.iter().map(|&x| 1.0 - g.des[x]).collect()).min(bnf(g, a, s, k)),
        6 => min_of(fk.iter().map(|&x| 1.0 - g.des[x]).collect()).min(bnf(g, a, s, k)),
        _ => panic!("no opportunity type {i}"),
    }
}

/// Eq(s, K) over Opp_0 at k = 0 and Opp_1..Opp_6 at k = 1..=K.
pub fn eq(g: &Graph, schemes: &[Scheme], s: usize, horizon: usize) -> f64 {
    let mut best: f64 = 0.0;
    for a in schemes {
        best = best.max(opp(g, a, 0, s, 0));
        for k in 1..=horizon {
            for i in 1..=6 {
                best = best.max(opp(g, a, i, s, k));
            }
        }
    }
    1.0 - best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_state_hazard() {
        // 0 -> 1 (bad); the scheme moves 0 to 2 (good, absorbing)
        let g = Graph {
            succ: vec![vec![1], vec![], vec![]],
            des: vec![1.0, 0.0, 1.0],
        };
        let a = Scheme {
            dom: vec![Some(vec![2]), None, None],
        };
        assert_eq!(opp(&g, &a, 5, 0, 1), 1.0);
        assert_eq!(opp(&g, &a, 0, 0, 0), 0.0);
        assert_eq!(eq(&g, &[a], 0, 1), 0.0);
    }
}
