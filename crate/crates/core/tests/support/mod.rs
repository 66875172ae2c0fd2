//! Shared helpers for integration tests: random corpora and a dense,
//! loop-everything reference implementation of the recommender.
#![allow(dead_code, clippy::needless_range_loop)]

use std::cmp::Ordering;

use apirec_core::{ActiveQuery, Corpus, Declaration, InvocationId, Project, Vocabulary};
use rand::seq::IndexedRandom;
use rand::Rng;

pub fn item(i: usize) -> String {
    format!("lib/T{}/call{}()", i % 7, i)
}

/// Up to `max_projects` projects of up to `max_decls` declarations each,
/// over a vocabulary of at most `vocab` strings.
pub fn random_corpus<R: Rng>(rng: &mut R, max_projects: usize, max_decls: usize, vocab: usize) -> Corpus {
    let mut vocabulary = Vocabulary::new();
    let projects = rng.random_range(1..=max_projects);
    // small local alphabets make ties and overlaps common
    let width = rng.random_range(2..=vocab);
    let mut out = Vec::with_capacity(projects);
    for p in 0..projects {
        let decls = rng.random_range(1..=max_decls);
        let declarations = (0..decls)
            .map(|d| {
                let len = rng.random_range(0..=6);
                let ids = (0..len)
                    .map(|_| vocabulary.intern(&item(rng.random_range(0..width))))
                    .collect();
                Declaration::new(format!("m{d}"), Vec::new(), ids, None)
            })
            .collect();
        let category = ["a", "b", "c"].choose(rng).map(|s| s.to_string());
        out.push(Project::new(format!("p{p:02}"), category, declarations));
    }
    Corpus::new(out, vocabulary).expect("valid corpus")
}

/// Either a corpus project standing in for itself (truncated active
/// declaration), or a fresh project that may use unknown invocations.
pub fn random_query<R: Rng>(rng: &mut R, corpus: &Corpus) -> ActiveQuery {
    let v = corpus.vocabulary().len();
    if rng.random_bool(0.6) {
        let index = rng.random_range(0..corpus.len());
        let mut project = corpus.project(index).clone();
        let active = rng.random_range(0..project.declarations.len());
        let d = &project.declarations[active];
        let keep = rng.random_range(0..=d.invocations().len());
        let ids = d.invocations()[..keep].to_vec();
        project.declarations[active] = Declaration::new(d.name.clone(), Vec::new(), ids, None);
        ActiveQuery::new(project, active, Some(index)).unwrap()
    } else {
        let decls = rng.random_range(1..=5);
        let mut context = Vec::new();
        for d in 0..decls {
            let len = rng.random_range(0..=5);
            let invs: Vec<String> = (0..len)
                .map(|_| {
                    if rng.random_bool(0.1) {
                        format!("unknown/U/x{}()", rng.random_range(0..3))
                    } else {
                        corpus.canonical(InvocationId(rng.random_range(0..v) as u32)).unwrap().to_owned()
                    }
                })
                .collect();
            context.push((format!("q{d}"), invs));
        }
        let (name, invs) = context.pop().unwrap();
        ActiveQuery::from_strings(corpus, "fresh", &context, (&name, &invs)).unwrap()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseResult {
    pub projects: Vec<(usize, f64)>,
    pub declarations: Vec<((usize, usize), f64)>,
    pub items: Vec<(u32, f64)>,
    pub fallback: bool,
}

fn desc(a: f64, b: f64) -> Ordering {
    b.partial_cmp(&a).unwrap()
}

/// Brute force over dense matrices. `members` are the background projects;
/// the query's `replaces` project is left out of them.
pub fn dense_recommend(corpus: &Corpus, members: &[usize], query: &ActiveQuery, k: usize, m: usize, n: usize) -> DenseResult {
    let v = corpus.vocabulary().len();
    let background: Vec<usize> = members.iter().copied().filter(|&p| Some(p) != query.replaces).collect();
    let extent = query
        .project
        .declarations
        .iter()
        .flat_map(|d| d.invocations().iter().map(|i| i.index() + 1))
        .max()
        .unwrap_or(0)
        .max(v);

    let dense_freq = |p: &Project| {
        let mut f = vec![0u32; extent];
        for d in &p.declarations {
            for i in d.invocations() {
                f[i.index()] += 1;
            }
        }
        f
    };
    let active_freq = dense_freq(&query.project);
    let freqs: Vec<Vec<u32>> = background.iter().map(|&p| dense_freq(corpus.project(p))).collect();

    let considered = background.len() + 1;
    let mut a = vec![0u32; extent];
    for f in freqs.iter().chain(std::iter::once(&active_freq)) {
        for i in 0..extent {
            if f[i] > 0 {
                a[i] += 1;
            }
        }
    }
    let weights = |f: &Vec<u32>| -> Vec<f64> {
        (0..extent)
            .map(|i| {
                let idf = if a[i] == 0 { 0.0 } else { (considered as f64 / a[i] as f64).ln() };
                f[i] as f64 * idf
            })
            .collect()
    };
    let wa = weights(&active_freq);
    let mut projects: Vec<(usize, f64)> = background
        .iter()
        .zip(&freqs)
        .map(|(&p, f)| {
            let w = weights(f);
            let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
            for i in 0..extent {
                dot += wa[i] * w[i];
            }
            for i in 0..extent {
                na += wa[i] * wa[i];
            }
            for i in 0..extent {
                nb += w[i] * w[i];
            }
            let denom = (na * nb).sqrt();
            let s = if denom == 0.0 || dot <= 0.0 { 0.0 } else { (dot / denom).min(1.0) };
            (p, s)
        })
        .collect();
    projects.sort_by(|x, y| desc(x.1, y.1).then_with(|| corpus.project(x.0).id.cmp(&corpus.project(y.0).id)));
    projects.truncate(k);

    let indicator = |d: &Declaration| {
        let mut r = vec![0u8; extent];
        for i in d.invocations() {
            r[i.index()] = 1;
        }
        r
    };
    let ra = indicator(query.declaration());
    let mut declarations = Vec::new();
    for &(p, _) in &projects {
        for (j, d) in corpus.project(p).declarations.iter().enumerate() {
            let rd = indicator(d);
            let inter = (0..extent).filter(|&i| ra[i] == 1 && rd[i] == 1).count();
            let union = (0..extent).filter(|&i| ra[i] == 1 || rd[i] == 1).count();
            if union > 0 && inter > 0 {
                declarations.push(((p, j), inter as f64 / union as f64));
            }
        }
    }
    declarations.sort_by(|x, y| {
        let (px, py) = (corpus.project(x.0 .0), corpus.project(y.0 .0));
        desc(x.1, y.1)
            .then_with(|| px.id.cmp(&py.id))
            .then_with(|| px.declarations[x.0 .1].name.cmp(&py.declarations[y.0 .1].name))
    });
    declarations.truncate(m);

    let canonical = |i: usize| corpus.canonical(InvocationId(i as u32)).unwrap().to_owned();
    let rank = |items: &mut Vec<(u32, f64)>| {
        items.sort_by(|x, y| desc(x.1, y.1).then_with(|| canonical(x.0 as usize).cmp(&canonical(y.0 as usize))));
        items.truncate(n);
    };

    if declarations.is_empty() {
        let mut counts = vec![0u32; v];
        for &p in &background {
            for d in &corpus.project(p).declarations {
                let r = indicator(d);
                for i in 0..v {
                    counts[i] += u32::from(r[i]);
                }
            }
        }
        let max = counts.iter().copied().max().unwrap_or(0);
        let mut items: Vec<(u32, f64)> = (0..v)
            .filter(|&i| counts[i] > 0 && ra[i] == 0)
            .map(|i| (i as u32, counts[i] as f64 / max as f64))
            .collect();
        rank(&mut items);
        return DenseResult {
            projects,
            declarations,
            items,
            fallback: true,
        };
    }

    let rows: Vec<Vec<u8>> = declarations
        .iter()
        .map(|&((p, j), _)| indicator(&corpus.project(p).declarations[j]))
        .collect();
    let active_mean = ra.iter().map(|&x| x as usize).sum::<usize>() as f64 / v as f64;
    let mut items = Vec::new();
    for i in 0..v {
        if ra[i] == 1 || !rows.iter().any(|r| r[i] == 1) {
            continue;
        }
        let (mut num, mut den) = (0.0, 0.0);
        for (((p, _), s), r) in declarations.iter().zip(&rows) {
            // sum over neighbor projects; only the containing one rates e
            let (mut cn, mut cd) = (0.0, 0.0);
            for &(q, sim) in &projects {
                if q == *p {
                    cn += r[i] as f64 * sim;
                    cd += sim;
                }
            }
            let combined = if cd == 0.0 { 0.0 } else { cn / cd };
            let mean = r[..v].iter().map(|&x| x as usize).sum::<usize>() as f64 / v as f64;
            num += (combined - mean) * s;
            den += s;
        }
        items.push((i as u32, active_mean + num / den));
    }
    rank(&mut items);
    DenseResult {
        projects,
        declarations,
        items,
        fallback: false,
    }
}

/// Compares the engine against the dense reference; `Err` describes the
/// first disagreement.
pub fn check_against_dense(
    engine: &apirec_core::Recommender,
    query: &ActiveQuery,
    k: usize,
    m: usize,
    n: usize,
    tolerance: f64,
) -> Result<(), String> {
    let got = engine
        .recommend_apis(query, &apirec_core::Params::new(k, m, n))
        .map_err(|e| e.to_string())?;
    let want = dense_recommend(engine.corpus(), engine.members(), query, k, m, n);
    let got_projects: Vec<usize> = got.projects.keys().collect();
    let want_projects: Vec<usize> = want.projects.iter().map(|p| p.0).collect();
    if got_projects != want_projects {
        return Err(format!("projects {got_projects:?} != {want_projects:?}"));
    }
    for (g, w) in got.projects.neighbors.iter().zip(&want.projects) {
        if (g.score - w.1).abs() > tolerance {
            return Err(format!("project score {} != {}", g.score, w.1));
        }
    }
    let got_decls: Vec<(usize, usize)> = got.declarations.keys().map(|d| (d.project, d.declaration)).collect();
    let want_decls: Vec<(usize, usize)> = want.declarations.iter().map(|d| d.0).collect();
    if got_decls != want_decls {
        return Err(format!("declarations {got_decls:?} != {want_decls:?}"));
    }
    if got.list.fallback_used != want.fallback {
        return Err(format!("fallback {} != {}", got.list.fallback_used, want.fallback));
    }
    let got_items: Vec<u32> = got.list.items.iter().map(|s| s.id.0).collect();
    let want_items: Vec<u32> = want.items.iter().map(|s| s.0).collect();
    if got_items != want_items {
        return Err(format!("items {got_items:?} != {want_items:?}"));
    }
    for (g, w) in got.list.items.iter().zip(&want.items) {
        if (g.score - w.1).abs() > tolerance {
            return Err(format!("score of {} {} != {}", g.canonical, g.score, w.1));
        }
    }
    Ok(())
}
