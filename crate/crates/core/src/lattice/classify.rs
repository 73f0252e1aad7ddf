//! Enumeration of the unimodular lattices of a given rank by closing
//! `{Iₙ}` under 2-neighbors.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::isometry::{automorphism_group, find_isometry, Prepared, VectorSet};
use super::key::refined_key;
use super::lll::lll_reduce;
use super::mass::mass_unimodular;
use super::neighbor::{bits_to_vec, characteristic_vector, neighbor_pair, BitScrambler};
use super::{GramLattice, LatticeError, Parity};
use crate::bigjson;

/// Number of neighbor vectors taken from one representative before moving
/// on to the next.
const BATCH: u64 = 64;

#[derive(Debug, Clone)]
pub struct ClassifyOptions {
    /// Stop as soon as the observed mass reaches the predicted mass.
    pub mass_check: bool,
    pub time_budget: Option<Duration>,
    /// Seeds the order in which neighbor vectors are scanned.
    pub seed: u64,
    /// Worker threads for neighbor construction; 0 picks a default.
    pub threads: usize,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            mass_check: true,
            time_budget: None,
            seed: 0,
            threads: 0,
        }
    }
}

/// One isometry class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassEntry {
    #[serde(with = "gram_rows")]
    pub gram: GramLattice,
    #[serde(with = "bigjson::unsigned")]
    pub aut_order: BigUint,
    pub parity: Parity,
}

mod gram_rows {
    use super::GramLattice;
    use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(g: &GramLattice, s: S) -> Result<S::Ok, S::Error> {
        g.rows().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<GramLattice, D::Error> {
        let rows = Vec::<Vec<i64>>::deserialize(d)?;
        GramLattice::from_rows(&rows).map_err(de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenusClassification {
    pub rank: usize,
    pub classes: Vec<ClassEntry>,
    #[serde(with = "bigjson::ratio")]
    pub mass_observed: BigRational,
    #[serde(with = "bigjson::ratio")]
    pub mass_predicted: BigRational,
    pub complete: bool,
}

impl GenusClassification {
    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn representatives(&self) -> impl Iterator<Item = &GramLattice> {
        self.classes.iter().map(|c| &c.gram)
    }

    pub fn aut_orders(&self) -> impl Iterator<Item = &BigUint> {
        self.classes.iter().map(|c| &c.aut_order)
    }

    pub fn parities(&self) -> impl Iterator<Item = Parity> + '_ {
        self.classes.iter().map(|c| c.parity)
    }

    pub fn mass_matches(&self) -> bool {
        self.mass_observed == self.mass_predicted
    }

    /// Checks a loaded classification: ranks, unimodularity, the stored mass,
    /// and pairwise non-isometry of classes whose invariants agree.
    pub fn validate(&self) -> Result<(), LatticeError> {
        let mut mass = BigRational::zero();
        for c in &self.classes {
            if c.gram.rank() != self.rank {
                return Err(LatticeError::RankMismatch(self.rank, c.gram.rank()));
            }
            c.gram.ensure_unimodular()?;
            if c.gram.parity() != c.parity || c.aut_order.is_zero() {
                return Err(LatticeError::Parse("class data is inconsistent".into()));
            }
            mass += BigRational::new(BigInt::from(1), BigInt::from(c.aut_order.clone()));
        }
        if mass != self.mass_observed || self.mass_predicted != mass_unimodular(self.rank as u64) {
            return Err(LatticeError::Parse("stored masses do not match".into()));
        }
        let mut seen: HashMap<Vec<u8>, Vec<&GramLattice>> = HashMap::new();
        for c in &self.classes {
            let bucket = seen.entry(refined_key(&lll_reduce(&c.gram).0)).or_default();
            for other in bucket.iter() {
                if super::is_isometric(other, &c.gram)?.is_some() {
                    return Err(LatticeError::Parse("duplicate class".into()));
                }
            }
            bucket.push(&c.gram);
        }
        Ok(())
    }
}

struct Rep {
    lattice: GramLattice,
    prepared: Prepared,
    aut: BigUint,
    /// Vectors scanned before the scrambled sweep.
    priority: Vec<Vec<i64>>,
    next: u64,
}

struct State {
    reps: Vec<Rep>,
    buckets: HashMap<Vec<u8>, Vec<usize>>,
    mass: BigRational,
}

impl State {
    fn add(&mut self, lattice: GramLattice, key: Vec<u8>) {
        let prepared = Prepared::new(&lattice);
        let aut = automorphism_group(&prepared).order();
        self.mass += BigRational::new(BigInt::from(1), BigInt::from(aut.clone()));
        self.buckets.entry(key.clone()).or_default().push(self.reps.len());
        let priority = characteristic_vector(&lattice).into_iter().collect();
        self.reps.push(Rep {
            priority,
            lattice,
            prepared,
            aut,
            next: 0,
        });
    }

    /// Index of the representative isometric to `m`, if any.
    fn lookup(&self, m: &GramLattice, key: &[u8]) -> Option<usize> {
        let bucket = self.buckets.get(key)?;
        let bound = bucket
            .iter()
            .map(|&r| self.reps[r].prepared.check_bound())
            .max()?;
        let vecs = VectorSet::new(m, bound);
        bucket.iter().copied().find(|&r| {
            let p = &self.reps[r].prepared;
            let tgt;
            let tgt_ref = if p.check_bound() == bound {
                &vecs
            } else {
                tgt = vecs.restrict(m, p.check_bound());
                &tgt
            };
            find_isometry(p, tgt_ref).is_some()
        })
    }
}

/// Classifies the unimodular lattices of rank `n`. When the time budget runs
/// out the classes found so far are returned with `complete = false`.
pub fn classify_unimodular(
    n: usize,
    options: &ClassifyOptions,
) -> Result<GenusClassification, LatticeError> {
    if n == 0 {
        return Err(LatticeError::ZeroRank);
    }
    assert!(n < 63, "rank too large for neighbor scanning");
    let start = Instant::now();
    let deadline = options.time_budget.map(|b| start + b);
    let predicted = mass_unimodular(n as u64);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.threads)
        .build()
        .expect("failed to build thread pool");
    let scrambler = BitScrambler::new(n, options.seed);
    let total = 1u64 << n;

    let mut state = State {
        reps: Vec::new(),
        buckets: HashMap::new(),
        mass: BigRational::zero(),
    };
    let id = GramLattice::identity(n);
    let key = refined_key(&id);
    state.add(id, key);

    let complete = 'outer: loop {
        if options.mass_check && state.mass == predicted {
            break true;
        }
        let mut progressed = false;
        let mut r = 0;
        while r < state.reps.len() {
            let rep = &mut state.reps[r];
            let batch: Vec<Vec<i64>> = if !rep.priority.is_empty() {
                std::mem::take(&mut rep.priority)
            } else if rep.next < total {
                let from = rep.next;
                let to = (from + BATCH).min(total);
                rep.next = to;
                (from..to)
                    .map(|i| scrambler.apply(i))
                    .filter(|&bits| bits != 0)
                    .map(|bits| bits_to_vec(bits, n))
                    .collect()
            } else {
                r += 1;
                continue;
            };
            progressed = true;
            let base = &state.reps[r].lattice;
            let found: Vec<(GramLattice, Vec<u8>)> = pool.install(|| {
                batch
                    .par_iter()
                    .filter_map(|v| neighbor_pair(base, v))
                    .flat_map_iter(|pair| pair.into_iter())
                    .map(|m| {
                        let (reduced, _) = lll_reduce(&m);
                        let key = refined_key(&reduced);
                        (reduced, key)
                    })
                    .collect()
            });
            for (m, key) in found {
                if state.lookup(&m, &key).is_none() {
                    state.add(m, key);
                    if options.mass_check && state.mass == predicted {
                        break 'outer true;
                    }
                }
                if deadline.is_some_and(|d| Instant::now() >= d) {
                    break 'outer false;
                }
            }
            r += 1;
        }
        if !progressed {
            break true;
        }
    };

    let mut classes: Vec<ClassEntry> = state
        .reps
        .into_iter()
        .map(|r| ClassEntry {
            parity: r.lattice.parity(),
            gram: r.lattice,
            aut_order: r.aut,
        })
        .collect();
    classes.sort_by(|a, b| {
        b.aut_order
            .cmp(&a.aut_order)
            .then_with(|| a.parity.cmp(&b.parity))
            .then_with(|| a.gram.cmp(&b.gram))
    });
    Ok(GenusClassification {
        rank: n,
        classes,
        mass_observed: state.mass,
        mass_predicted: predicted,
        complete,
    })
}

/// The number of unimodular classes of rank `n`.
pub fn class_number_h(n: usize, options: &ClassifyOptions) -> Result<usize, LatticeError> {
    let c = classify_unimodular(n, options)?;
    if !c.complete {
        return Err(LatticeError::TimeBudgetExceeded);
    }
    Ok(c.class_count())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_ranks() {
        for n in 1..=7 {
            let c = classify_unimodular(n, &ClassifyOptions::default()).unwrap();
            assert!(c.complete);
            assert_eq!(c.class_count(), 1);
            assert!(c.mass_matches());
        }
    }

    #[test]
    fn small_ranks_by_full_closure() {
        let opts = ClassifyOptions {
            mass_check: false,
            ..Default::default()
        };
        for n in [1, 4, 8, 9] {
            let c = classify_unimodular(n, &opts).unwrap();
            assert!(c.complete);
            assert!(c.mass_matches(), "rank {n}");
        }
    }

    #[test]
    fn rank_eight() {
        let c = classify_unimodular(8, &ClassifyOptions::default()).unwrap();
        assert_eq!(c.class_count(), 2);
        let auts: Vec<u64> = c.aut_orders().map(|a| a.try_into().unwrap()).collect();
        assert_eq!(auts, vec![696_729_600, 10_321_920]);
        assert_eq!(c.parities().collect::<Vec<_>>(), vec![Parity::Even, Parity::Odd]);
        c.validate().unwrap();
    }

    #[test]
    fn validate_rejects_duplicates() {
        let mut c = classify_unimodular(9, &ClassifyOptions::default()).unwrap();
        c.validate().unwrap();
        let extra = c.classes[0].clone();
        c.mass_observed += BigRational::new(BigInt::from(1), BigInt::from(extra.aut_order.clone()));
        c.classes.push(extra);
        assert!(matches!(c.validate(), Err(LatticeError::Parse(m)) if m.contains("duplicate")));
    }

    #[test]
    fn json_shape() {
        let c = classify_unimodular(2, &ClassifyOptions::default()).unwrap();
        let json = serde_json::to_string(&c).unwrap();
        assert_eq!(
            json,
            r#"{"rank":2,"classes":[{"gram":[[1,0],[0,1]],"aut_order":8,"parity":"odd"}],"mass_observed":"1/8","mass_predicted":"1/8","complete":true}"#
        );
        let back: GenusClassification = serde_json::from_str(&json).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn budget_zero_is_incomplete() {
        let opts = ClassifyOptions {
            time_budget: Some(Duration::ZERO),
            ..Default::default()
        };
        let c = classify_unimodular(12, &opts).unwrap();
        assert!(!c.complete);
        assert!(matches!(
            class_number_h(12, &opts),
            Err(LatticeError::TimeBudgetExceeded)
        ));
    }
}
