use serde::Serialize;

use super::distance::semantic_distance;
use super::SenseCandidate;
use crate::kb::ConceptId;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchConfig {
    /// Largest number of sense combinations searched exhaustively.
    pub exhaustive_limit: u64,
    pub beam_width: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            exhaustive_limit: 10_000,
            beam_width: 32,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// No phrase had any candidate.
    Empty,
    Exhaustive,
    Beam,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Disambiguation {
    /// One entry per input phrase; `None` for phrases without candidates.
    pub chosen: Vec<Option<ConceptId>>,
    /// Sum of pairwise distances of the chosen senses.
    pub cost: f64,
    pub strategy: Strategy,
}

impl Disambiguation {
    pub fn is_empty(&self) -> bool {
        self.strategy == Strategy::Empty
    }
}

/// Costs closer than this are ties, settled by the smaller concept-id tuple.
const TIE_EPSILON: f64 = 1e-9;

fn quantize(cost: f64) -> i64 {
    (cost / TIE_EPSILON).round() as i64
}

/// Candidates sorted by id without duplicates, plus the pairwise distance
/// tables between phrases that have candidates.
struct Problem<'a> {
    phrases: usize,
    /// Input position of each searched phrase.
    active: Vec<usize>,
    senses: Vec<Vec<&'a SenseCandidate>>,
    /// `dist[p][q][a * senses[q].len() + b]` for `p < q`.
    dist: Vec<Vec<Vec<f64>>>,
}

impl<'a> Problem<'a> {
    fn new(candidates: &'a [Vec<SenseCandidate>]) -> Self {
        let mut active = Vec::new();
        let mut senses = Vec::new();
        for (i, list) in candidates.iter().enumerate() {
            let mut sorted: Vec<&SenseCandidate> = list.iter().collect();
            sorted.sort_by(|a, b| a.concept.cmp(&b.concept));
            sorted.dedup_by(|a, b| a.concept == b.concept);
            if !sorted.is_empty() {
                active.push(i);
                senses.push(sorted);
            }
        }
        let m = senses.len();
        let mut dist = vec![vec![Vec::new(); m]; m];
        for p in 0..m {
            for q in p + 1..m {
                dist[p][q] = senses[p]
                    .iter()
                    .flat_map(|a| senses[q].iter().map(move |b| semantic_distance(a, b)))
                    .collect();
            }
        }
        Self {
            phrases: candidates.len(),
            active,
            senses,
            dist,
        }
    }

    fn d(&self, p: usize, a: usize, q: usize, b: usize) -> f64 {
        if p < q {
            self.dist[p][q][a * self.senses[q].len() + b]
        } else {
            self.dist[q][p][b * self.senses[p].len() + a]
        }
    }

    fn combinations(&self) -> u64 {
        self.senses.iter().fold(1u64, |acc, s| acc.saturating_mul(s.len() as u64))
    }

    fn cost(&self, pick: &[usize]) -> f64 {
        let mut total = 0.0;
        for p in 0..pick.len() {
            for q in p + 1..pick.len() {
                total += self.d(p, pick[p], q, pick[q]);
            }
        }
        total
    }

    fn result(&self, pick: Option<(Vec<usize>, f64)>, strategy: Strategy) -> Disambiguation {
        let mut chosen = vec![None; self.phrases];
        let Some((pick, cost)) = pick else {
            return Disambiguation {
                chosen,
                cost: 0.0,
                strategy: Strategy::Empty,
            };
        };
        for (p, &a) in pick.iter().enumerate() {
            chosen[self.active[p]] = Some(self.senses[p][a].concept.clone());
        }
        Disambiguation { chosen, cost, strategy }
    }

    fn exhaustive(&self) -> Option<(Vec<usize>, f64)> {
        if self.senses.is_empty() {
            return None;
        }
        let mut pick = vec![0usize; self.senses.len()];
        let mut best: Option<(Vec<usize>, f64)> = None;
        loop {
            let c = self.cost(&pick);
            if best.as_ref().is_none_or(|(_, b)| quantize(c) < quantize(*b)) {
                best = Some((pick.clone(), c));
            }
            // Odometer in lexicographic order, last position fastest.
            let mut p = pick.len();
            loop {
                if p == 0 {
                    return best;
                }
                p -= 1;
                pick[p] += 1;
                if pick[p] < self.senses[p].len() {
                    break;
                }
                pick[p] = 0;
            }
        }
    }

    /// Beam search in phrase order. States are ranked by their partial cost
    /// plus, for each unassigned phrase, the cheapest link of one of its
    /// senses to the senses assigned so far.
    fn beam(&self, width: usize) -> Option<(Vec<usize>, f64)> {
        let m = self.senses.len();
        if m == 0 {
            return None;
        }
        let width = width.max(1);
        let mut states: Vec<(Vec<usize>, f64)> = vec![(Vec::new(), 0.0)];
        for k in 0..m {
            let mut next: Vec<(Vec<usize>, f64, f64)> = Vec::with_capacity(states.len() * self.senses[k].len());
            for (pick, partial) in &states {
                for a in 0..self.senses[k].len() {
                    let added: f64 = (0..k).map(|j| self.d(j, pick[j], k, a)).sum();
                    let mut grown = pick.clone();
                    grown.push(a);
                    let partial = partial + added;
                    let bound: f64 = (k + 1..m)
                        .map(|r| {
                            (0..self.senses[r].len())
                                .map(|c| (0..=k).map(|j| self.d(j, grown[j], r, c)).sum::<f64>())
                                .fold(f64::INFINITY, f64::min)
                        })
                        .sum();
                    next.push((grown, partial, partial + bound));
                }
            }
            next.sort_by(|x, y| quantize(x.2).cmp(&quantize(y.2)).then_with(|| x.0.cmp(&y.0)));
            next.truncate(width);
            states = next.into_iter().map(|(p, c, _)| (p, c)).collect();
        }
        states
            .into_iter()
            .min_by(|x, y| quantize(x.1).cmp(&quantize(y.1)).then_with(|| x.0.cmp(&y.0)))
    }
}

/// Picks one sense per phrase minimizing the summed pairwise distance.
///
/// Up to `config.exhaustive_limit` combinations are enumerated; larger
/// problems fall back to beam search. Phrases without candidates are skipped
/// and left `None`. The result does not depend on candidate order.
pub fn disambiguate(candidates: &[Vec<SenseCandidate>], config: &SearchConfig) -> Disambiguation {
    let problem = Problem::new(candidates);
    if problem.combinations() <= config.exhaustive_limit {
        problem.result(problem.exhaustive(), Strategy::Exhaustive)
    } else {
        problem.result(problem.beam(config.beam_width), Strategy::Beam)
    }
}

/// Exhaustive search regardless of problem size.
pub fn disambiguate_exhaustive(candidates: &[Vec<SenseCandidate>]) -> Disambiguation {
    let problem = Problem::new(candidates);
    problem.result(problem.exhaustive(), Strategy::Exhaustive)
}

/// Beam search regardless of problem size.
pub fn disambiguate_beam(candidates: &[Vec<SenseCandidate>], width: usize) -> Disambiguation {
    let problem = Problem::new(candidates);
    problem.result(problem.beam(width), Strategy::Beam)
}
