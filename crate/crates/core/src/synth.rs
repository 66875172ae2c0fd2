//! Seeded synthetic corpora for tests, benchmarks and demos.

use std::collections::BTreeMap;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Corpus, Declaration, Project, Vocabulary};
use crate::error::Result;

/// Shape of a generated corpus.
///
/// Each category owns a pool of library invocations and a handful of usage
/// patterns (ordered invocation sequences). Projects pick a category and a
/// subset of its patterns; every declaration is a mutated copy of one
/// pattern, sprinkled with invocations from a shared pool of common APIs.
#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub projects: usize,
    pub categories: usize,
    pub pool_per_category: usize,
    pub common_pool: usize,
    pub patterns_per_category: usize,
    pub patterns_per_project: (usize, usize),
    pub declarations: (usize, usize),
    pub pattern_length: (usize, usize),
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            projects: 100,
            categories: 6,
            pool_per_category: 60,
            common_pool: 25,
            patterns_per_category: 14,
            patterns_per_project: (3, 6),
            declarations: (6, 20),
            pattern_length: (4, 10),
            seed: 0,
        }
    }
}

impl SynthConfig {
    /// 500 projects with tens of declarations each.
    pub fn large(seed: u64) -> Self {
        Self {
            projects: 500,
            categories: 12,
            pool_per_category: 120,
            common_pool: 40,
            patterns_per_category: 24,
            declarations: (10, 40),
            seed,
            ..Self::default()
        }
    }
}

fn range(rng: &mut ChaCha8Rng, (lo, hi): (usize, usize)) -> usize {
    if hi <= lo {
        lo
    } else {
        rng.random_range(lo..=hi)
    }
}

fn category_api(c: usize, j: usize) -> String {
    format!("org/lib{c}/Type{}/call{}()", j / 8, j % 8)
}

fn common_api(j: usize) -> String {
    format!("java/util/Common{}/op{}()", j / 5, j % 5)
}

fn render_body(name: &str, calls: &[String]) -> String {
    let mut body = format!("void {name}() {{\n");
    for c in calls {
        body.push_str("    ");
        body.push_str(&c.trim_end_matches("()").replace('/', "."));
        body.push_str("();\n");
    }
    body.push('}');
    body
}

/// Generates a corpus, with snippet bodies for every declaration.
pub fn generate(cfg: &SynthConfig) -> Result<Corpus> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let categories = cfg.categories.max(1);
    let pool = cfg.pool_per_category.max(1);

    let patterns: Vec<Vec<Vec<usize>>> = (0..categories)
        .map(|_| {
            (0..cfg.patterns_per_category.max(1))
                .map(|_| {
                    let len = range(&mut rng, cfg.pattern_length).clamp(1, pool);
                    let mut items: Vec<usize> = (0..pool).collect();
                    items.shuffle(&mut rng);
                    items.truncate(len);
                    items
                })
                .collect()
        })
        .collect();

    // skewed category sizes: weight 1 / (c + 1)
    let weights: Vec<f64> = (0..categories).map(|c| 1.0 / (c as f64 + 1.0)).collect();
    let total_weight: f64 = weights.iter().sum();

    let mut vocabulary = Vocabulary::new();
    let mut snippets = BTreeMap::new();
    let mut projects = Vec::with_capacity(cfg.projects);
    for p in 0..cfg.projects {
        let mut pick = rng.random::<f64>() * total_weight;
        let mut category = categories - 1;
        for (c, w) in weights.iter().enumerate() {
            if pick < *w {
                category = c;
                break;
            }
            pick -= w;
        }
        let mut own: Vec<usize> = (0..patterns[category].len()).collect();
        own.shuffle(&mut rng);
        own.truncate(range(&mut rng, cfg.patterns_per_project).max(1));

        let project_id = format!("proj{p:04}");
        let declaration_count = range(&mut rng, cfg.declarations).max(1);
        let mut declarations = Vec::with_capacity(declaration_count);
        for d in 0..declaration_count {
            let pattern = &patterns[category][*own.choose(&mut rng).expect("non-empty")];
            let mut calls: Vec<String> = Vec::new();
            for &item in pattern {
                if rng.random_bool(0.15) {
                    continue;
                }
                calls.push(category_api(category, item));
                if rng.random_bool(0.1) {
                    calls.push(category_api(category, rng.random_range(0..pool)));
                }
            }
            if cfg.common_pool > 0 {
                for _ in 0..rng.random_range(0..3) {
                    let at = rng.random_range(0..=calls.len());
                    calls.insert(at, common_api(rng.random_range(0..cfg.common_pool)));
                }
            }
            let name = format!("{project_id}.Main.m{d}");
            let source_ref = format!("{project_id}/m{d}");
            snippets.insert(source_ref.clone(), render_body(&format!("m{d}"), &calls));
            let ids = calls.iter().map(|s| vocabulary.intern(s)).collect();
            declarations.push(Declaration::new(name, Vec::new(), ids, Some(source_ref)));
        }
        projects.push(Project::new(project_id, Some(format!("category{category}")), declarations));
    }
    Ok(Corpus::new(projects, vocabulary)?.with_snippets(snippets))
}

/// Pairs of projects where the second of each pair is an exact clone of the
/// first plus one extra invocation in its first declaration. Pairs share no
/// invocations with each other, and within a project every declaration uses
/// its own invocations.
pub fn planted_clone_corpus(pairs: usize, seed: u64) -> Result<Corpus> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vocabulary = Vocabulary::new();
    let mut projects = Vec::with_capacity(pairs * 2);
    for pair in 0..pairs {
        let declarations = rng.random_range(3..=8);
        let mut base: Vec<Vec<String>> = Vec::with_capacity(declarations);
        for d in 0..declarations {
            let len = rng.random_range(3..=7);
            base.push((0..len).map(|j| format!("pair{pair}/Decl{d}/call{j}()")).collect());
        }
        let category = format!("category{}", pair % 3);
        for (suffix, extra) in [("a", false), ("b", true)] {
            let id = format!("pair{pair:03}{suffix}");
            let decls = base
                .iter()
                .enumerate()
                .map(|(d, calls)| {
                    let mut calls = calls.clone();
                    if extra && d == 0 {
                        calls.push(format!("pair{pair}/Extra/only()"));
                    }
                    let ids = calls.iter().map(|s| vocabulary.intern(s)).collect();
                    Declaration::new(format!("{id}.m{d}"), Vec::new(), ids, None)
                })
                .collect();
            projects.push(Project::new(id, Some(category.clone()), decls));
        }
    }
    Corpus::new(projects, vocabulary)
}
