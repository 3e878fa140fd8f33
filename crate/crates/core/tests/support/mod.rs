//! Test-side reference implementations, written against the snapshot text
//! rather than the library's own graph code.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

pub const FIG6: &str = "Dealing with Hiv and then being told that you suffer from AIDS is almost the hardest thing to face with in life. The hardest thing is dealing with the virus because there are people that just do not understand and think that you are a leper.";

pub fn fixture(name: &str) -> String {
    let path = format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

/// Concepts, labels and resource categories parsed straight from a
/// snapshot.
#[derive(Debug, Default)]
pub struct Taxo {
    pub parents: BTreeMap<String, Vec<String>>,
    pub labels: BTreeMap<String, Vec<String>>,
    /// resource id -> (title, categories)
    pub resources: BTreeMap<String, (String, Vec<String>)>,
}

impl Taxo {
    pub fn parse(text: &str) -> Self {
        let mut t = Taxo::default();
        for line in text.lines() {
            let f: Vec<&str> = line.split('\t').collect();
            match f[0] {
                "C" => {
                    let ps = f.get(3).map_or(vec![], |p| {
                        p.split(',').filter(|s| !s.is_empty()).map(str::to_owned).collect()
                    });
                    t.parents.insert(f[1].to_owned(), ps);
                    t.labels.insert(f[1].to_owned(), f[2].split('|').map(str::to_owned).collect());
                }
                "R" => {
                    t.resources.insert(f[1].to_owned(), (f[2].replace('_', " "), vec![]));
                }
                "K" => t.resources.get_mut(f[1]).expect("resource first").1.push(f[2].to_owned()),
                _ => {}
            }
        }
        t
    }

    /// Self-inclusive ancestors.
    pub fn up(&self, c: &str) -> BTreeSet<String> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![c.to_owned()];
        while let Some(x) = stack.pop() {
            if seen.insert(x.clone()) {
                stack.extend(self.parents[&x].iter().cloned());
            }
        }
        seen
    }

    /// Strict descendants.
    pub fn down(&self, c: &str) -> BTreeSet<String> {
        self.parents
            .keys()
            .filter(|k| k.as_str() != c && self.up(k).contains(c))
            .cloned()
            .collect()
    }

    pub fn labelled(&self, label: &str) -> Vec<String> {
        let l = label.to_lowercase();
        self.labels
            .iter()
            .filter(|(_, ls)| ls.iter().any(|x| x.to_lowercase() == l))
            .map(|(k, _)| k.clone())
            .collect()
    }
}

/// `log2(1 + |A Δ B| / |A ∪ B|)`.
pub fn dist(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    let union = a.union(b).count() as f64;
    let sym = a.symmetric_difference(b).count() as f64;
    (1.0 + sym / union).log2()
}

/// Brute force over every sense combination. Ties within 1e-9 go to the
/// lexicographically smallest id tuple.
pub fn brute_force(t: &Taxo, cands: &[Vec<String>]) -> (Vec<String>, f64) {
    let mut sorted: Vec<Vec<String>> = cands
        .iter()
        .map(|c| {
            let mut c = c.clone();
            c.sort();
            c.dedup();
            c
        })
        .collect();
    sorted.retain(|c| !c.is_empty());
    let ups: Vec<Vec<BTreeSet<String>>> = sorted.iter().map(|c| c.iter().map(|x| t.up(x)).collect()).collect();
    let mut all: Vec<(Vec<usize>, f64)> = Vec::new();
    let mut idx = vec![0usize; sorted.len()];
    'outer: loop {
        let mut cost = 0.0;
        for i in 0..idx.len() {
            for j in i + 1..idx.len() {
                cost += dist(&ups[i][idx[i]], &ups[j][idx[j]]);
            }
        }
        all.push((idx.clone(), cost));
        for p in (0..idx.len()).rev() {
            idx[p] += 1;
            if idx[p] < sorted[p].len() {
                continue 'outer;
            }
            idx[p] = 0;
        }
        break;
    }
    let best = all.iter().map(|(_, c)| *c).fold(f64::INFINITY, f64::min);
    let winner = all
        .iter()
        .filter(|(_, c)| (c - best).abs() < 1e-9)
        .map(|(i, _)| i.iter().enumerate().map(|(p, &k)| sorted[p][k].clone()).collect::<Vec<_>>())
        .min()
        .unwrap_or_default();
    (winner, best)
}
