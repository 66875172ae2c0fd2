use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FoldScheme {
    TenFold,
    LeaveOneOut,
}

impl FoldScheme {
    pub fn label(self) -> &'static str {
        match self {
            Self::TenFold => "10",
            Self::LeaveOneOut => "loo",
        }
    }
}

impl fmt::Display for FoldScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for FoldScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "10" | "ten" | "ten-fold" => Ok(Self::TenFold),
            "loo" | "leave-one-out" => Ok(Self::LeaveOneOut),
            _ => Err(Error::InvalidArgument(format!("unknown fold scheme `{s}`"))),
        }
    }
}

/// Project indices used for training and testing in one round.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

const TEN: usize = 10;

/// Seeded fold assignment. Ten-fold shuffles the projects, then deals them
/// largest-first to the fold with the fewest projects (then fewest
/// declarations), so fold sizes differ by at most one project and the
/// declaration totals stay balanced.
pub fn make_folds(corpus: &Corpus, scheme: FoldScheme, seed: u64) -> Result<Vec<Fold>> {
    let n = corpus.len();
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);

    let tests: Vec<Vec<usize>> = match scheme {
        FoldScheme::LeaveOneOut => order.into_iter().map(|p| vec![p]).collect(),
        FoldScheme::TenFold => {
            if n < TEN {
                return Err(Error::InvalidArgument(format!(
                    "ten-fold cross-validation needs at least {TEN} projects, corpus has {n}"
                )));
            }
            let size = |p: usize| corpus.project(p).declarations.len();
            // stable: equal sizes keep their shuffled order
            order.sort_by_key(|&p| std::cmp::Reverse(size(p)));
            let mut folds: Vec<(usize, usize, Vec<usize>)> =
                (0..TEN).map(|_| (0, 0, Vec::new())).collect();
            for p in order {
                let target = (0..TEN)
                    .min_by_key(|&f| (folds[f].0, folds[f].1, f))
                    .expect("ten folds");
                folds[target].0 += 1;
                folds[target].1 += size(p);
                folds[target].2.push(p);
            }
            folds.into_iter().map(|(_, _, t)| t).collect()
        }
    };

    Ok(tests
        .into_iter()
        .map(|mut test| {
            test.sort_unstable();
            let train = (0..n).filter(|p| test.binary_search(p).is_err()).collect();
            Fold { train, test }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::CorpusBuilder;

    fn corpus(n: usize) -> Corpus {
        let mut b = CorpusBuilder::new();
        for i in 0..n {
            b = b.project(&format!("p{i:03}"), None);
            for d in 0..(1 + i % 7) {
                b = b.declaration(&format!("m{d}"), &["a"]);
            }
        }
        b.build().unwrap()
    }

    #[test]
    fn ten_fold_on_twenty_projects() {
        let folds = make_folds(&corpus(20), FoldScheme::TenFold, 1).unwrap();
        assert_eq!(folds.len(), 10);
        assert!(folds.iter().all(|f| f.test.len() == 2 && f.train.len() == 18));
        let mut all: Vec<usize> = folds.iter().flat_map(|f| f.test.clone()).collect();
        all.sort();
        assert_eq!(all, (0..20).collect::<Vec<_>>());
    }

    #[test]
    fn leave_one_out_sizes() {
        let folds = make_folds(&corpus(500), FoldScheme::LeaveOneOut, 3).unwrap();
        assert_eq!(folds.len(), 500);
        assert!(folds.iter().all(|f| f.test.len() == 1 && f.train.len() == 499));
    }

    #[test]
    fn seeded_assignment_is_stable() {
        let c = corpus(57);
        assert_eq!(
            make_folds(&c, FoldScheme::TenFold, 7).unwrap(),
            make_folds(&c, FoldScheme::TenFold, 7).unwrap()
        );
        assert_ne!(
            make_folds(&c, FoldScheme::TenFold, 7).unwrap(),
            make_folds(&c, FoldScheme::TenFold, 8).unwrap()
        );
    }

    #[test]
    fn ten_fold_balances_declarations() {
        let c = corpus(100);
        let folds = make_folds(&c, FoldScheme::TenFold, 11).unwrap();
        let totals: Vec<usize> = folds
            .iter()
            .map(|f| f.test.iter().map(|&p| c.project(p).declarations.len()).sum())
            .collect();
        let spread = totals.iter().max().unwrap() - totals.iter().min().unwrap();
        assert!(spread <= 7, "{totals:?}");
    }

    #[test]
    fn too_small_for_ten_fold() {
        assert!(make_folds(&corpus(9), FoldScheme::TenFold, 0).is_err());
    }
}
