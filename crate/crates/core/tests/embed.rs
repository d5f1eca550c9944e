use hostility_core::embed::{
    cosine, sgns_loss_grad, subword_loss_grad, train_sgns, train_subword_sgns, SgnsConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rand_vec(r: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| r.random_range(-0.8..0.8)).collect()
}

fn rel(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let s = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(b.iter().map(|x| x * x).sum::<f64>().sqrt());
    diff / s.max(1e-300)
}

fn fd<F: Fn(&[f64]) -> f64>(f: F, x: &[f64]) -> Vec<f64> {
    let h = 1e-6;
    (0..x.len())
        .map(|i| {
            let mut p = x.to_vec();
            p[i] += h;
            let mut m = x.to_vec();
            m[i] -= h;
            (f(&p) - f(&m)) / (2.0 * h)
        })
        .collect()
}

#[test]
fn sgns_gradient_matches_finite_differences() {
    let mut r = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let d = 12;
        let v = rand_vec(&mut r, d);
        let u = rand_vec(&mut r, d);
        let negs: Vec<Vec<f64>> = (0..5).map(|_| rand_vec(&mut r, d)).collect();
        let nref: Vec<&[f64]> = negs.iter().map(|n| n.as_slice()).collect();
        let g = sgns_loss_grad(&v, &u, &nref);
        assert!(rel(&g.center, &fd(|x| sgns_loss_grad(x, &u, &nref).loss, &v)) < 1e-4);
        assert!(rel(&g.context, &fd(|x| sgns_loss_grad(&v, x, &nref).loss, &u)) < 1e-4);
        for k in 0..negs.len() {
            let f = |x: &[f64]| {
                let mut n2: Vec<&[f64]> = nref.clone();
                n2[k] = x;
                sgns_loss_grad(&v, &u, &n2).loss
            };
            assert!(rel(&g.negatives[k], &fd(f, &negs[k])) < 1e-4);
        }
    }
}

#[test]
fn subword_gradient_matches_finite_differences() {
    let mut r = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..20 {
        let d = 10;
        let units: Vec<Vec<f64>> = (0..4).map(|_| rand_vec(&mut r, d)).collect();
        let u = rand_vec(&mut r, d);
        let negs: Vec<Vec<f64>> = (0..3).map(|_| rand_vec(&mut r, d)).collect();
        let nref: Vec<&[f64]> = negs.iter().map(|n| n.as_slice()).collect();
        let (_, grads) = subword_loss_grad(&units, &u, &nref);
        for k in 0..units.len() {
            let f = |x: &[f64]| {
                let mut us = units.clone();
                us[k] = x.to_vec();
                subword_loss_grad(&us, &u, &nref).0
            };
            assert!(rel(&grads[k], &fd(f, &units[k])) < 1e-4);
        }
    }
}

fn toy_hostile_corpus() -> Vec<Vec<String>> {
    let hostile = ["suck", "loser", "ugly", "stupid"];
    let nice = ["happy", "lovely", "sunny", "great"];
    let mut r = ChaCha8Rng::seed_from_u64(4);
    (0..600)
        .map(|i| {
            let words = if i % 2 == 0 { &hostile } else { &nice };
            (0..8).map(|_| words[r.random_range(0..4)].to_string()).collect()
        })
        .collect()
}

#[test]
fn subword_vectors_compose_for_unseen_words() {
    let cfg = SgnsConfig { dim: 24, epochs: 5, subsample: 0.0, min_count: 1, ..Default::default() };
    let mut corpus = toy_hostile_corpus();
    corpus.push(vec!["suckk".into(), "suck".into()]);
    let (t, log) = train_subword_sgns(&corpus, &cfg).unwrap();
    assert_eq!(t.lookup("suckk").unwrap().to_vec(), t.compose("suckk").unwrap());
    let suck = t.lookup("suck").unwrap().to_vec();
    let sucks = t.lookup("sucks").unwrap().to_vec();
    let happyy = t.lookup("happyy").unwrap().to_vec();
    assert!(cosine(&sucks, &suck) > cosine(&happyy, &suck));
    assert!(log.frozen_objective.last().unwrap() < &log.frozen_objective[0]);
    // stored word vectors equal the composition formula exactly
    for (w, v) in t.words() {
        assert_eq!(&t.compose(w).unwrap(), v);
    }
}

#[test]
fn word_vectors_separate_topics() {
    let cfg = SgnsConfig { dim: 16, subsample: 0.0, min_count: 1, ..Default::default() };
    let (t, _) = train_sgns(&toy_hostile_corpus(), &cfg).unwrap();
    let c = |a: &str, b: &str| cosine(t.get(a).unwrap(), t.get(b).unwrap());
    assert!(c("suck", "loser") > c("suck", "happy"));
    assert!(t.words().values().all(|v| v.iter().all(|x| x.is_finite())));
    assert!(t.get("sucks").is_none());
}
