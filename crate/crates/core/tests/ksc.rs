use hostility_core::ksc::{ksc_cluster, ksc_distance, shift, KscConfig, SERIES_LEN};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn bump(center: f64, width: f64, scale: f64) -> Vec<f64> {
    (0..SERIES_LEN).map(|i| scale * (-((i as f64 - center) / width).powi(2) / 2.0).exp()).collect()
}

#[test]
fn scale_invariance() {
    let mut r = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100 {
        let x: Vec<f64> = (0..SERIES_LEN).map(|_| r.random::<f64>() * 3.0).collect();
        let c = r.random_range(0.01..100.0);
        let y: Vec<f64> = x.iter().map(|v| v * c).collect();
        assert!(ksc_distance(&x, &y, 24).unwrap().d < 1e-9);
    }
}

#[test]
fn shift_recovery_on_interior_series() {
    let x = bump(120.0, 4.0, 2.0);
    for s in -20..=20 {
        let y = shift(&x, s);
        let d = ksc_distance(&y, &x, 24).unwrap();
        assert_eq!(d.q, s);
        assert!(d.d < 1e-12);
    }
}

#[test]
fn joint_shift_invariance() {
    let mut r = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..20 {
        let mut x = vec![0.0; SERIES_LEN];
        let mut y = vec![0.0; SERIES_LEN];
        for i in 60..180 {
            x[i] = r.random();
            y[i] = r.random();
        }
        let s = r.random_range(-30..=30);
        let a = ksc_distance(&x, &y, 10).unwrap();
        let b = ksc_distance(&shift(&x, s), &shift(&y, s), 10).unwrap();
        assert!((a.d - b.d).abs() < 1e-12);
        assert_eq!(a.q, b.q);
    }
}

fn two_families(seed: u64) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let mut xs = Vec::new();
    let mut fam = Vec::new();
    for i in 0..100 {
        let f = i % 2;
        let shift = r.random_range(-3..=3) as f64;
        let scale = r.random_range(0.5..5.0);
        let mut x = if f == 0 { bump(20.0 + shift, 1.5, scale) } else { bump(150.0 + shift, 15.0, scale) };
        for v in x.iter_mut() {
            *v += r.random::<f64>() * 0.02 * scale;
        }
        xs.push(x);
        fam.push(f);
    }
    (xs, fam)
}

#[test]
fn planted_families_are_recovered() {
    for seed in 0..10 {
        let (xs, fam) = two_families(seed);
        let cfg = KscConfig { k: 2, seed, ..Default::default() };
        let res = ksc_cluster(&xs, &cfg).unwrap();
        let agree = res.assignments.iter().zip(&fam).filter(|(a, f)| a == f).count();
        let best = agree.max(xs.len() - agree) as f64 / xs.len() as f64;
        assert!(best >= 0.95, "seed {seed}: agreement {best}");
        assert!(res.objective_trace.windows(2).all(|w| w[1] <= w[0] + 1e-9));
        for c in &res.centroids {
            let n: f64 = c.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((n - 1.0).abs() < 1e-9);
            assert!(c.iter().sum::<f64>() >= 0.0);
        }
        assert_eq!(res, ksc_cluster(&xs, &cfg).unwrap());
    }
}

#[test]
fn families_of_one_series_each_have_zero_objective() {
    let xs = vec![bump(30.0, 2.0, 1.0), bump(100.0, 20.0, 3.0), bump(200.0, 6.0, 0.5)];
    let res = ksc_cluster(&xs, &KscConfig { k: 3, ..Default::default() }).unwrap();
    let mut a = res.assignments.clone();
    a.sort();
    assert_eq!(a, vec![0, 1, 2]);
    assert!(res.objective() < 1e-18);
}

#[test]
fn centroid_beats_random_unit_vectors() {
    let (xs, _) = two_families(3);
    let res = ksc_cluster(&xs, &KscConfig { k: 2, seed: 3, ..Default::default() }).unwrap();
    let mut r = ChaCha8Rng::seed_from_u64(9);
    for c in 0..2 {
        let aligned: Vec<Vec<f64>> = res
            .members(c)
            .iter()
            .map(|&i| {
                let n = xs[i].iter().map(|v| v * v).sum::<f64>().sqrt();
                shift(&xs[i], -res.shifts[i]).iter().map(|v| v / n).collect()
            })
            .collect();
        let cost = |mu: &[f64]| -> f64 {
            aligned
                .iter()
                .map(|a| {
                    let p: f64 = a.iter().zip(mu).map(|(x, y)| x * y).sum();
                    a.iter().map(|x| x * x).sum::<f64>() - p * p
                })
                .sum()
        };
        let base = cost(&res.centroids[c]);
        for _ in 0..100 {
            let v: Vec<f64> = (0..SERIES_LEN).map(|_| r.random_range(-1.0..1.0)).collect();
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            let v: Vec<f64> = v.iter().map(|x| x / n).collect();
            assert!(cost(&v) >= base - 1e-12);
        }
    }
}

#[test]
fn input_errors() {
    let xs = vec![bump(30.0, 2.0, 1.0)];
    assert!(ksc_cluster(&xs, &KscConfig { k: 2, ..Default::default() }).is_err());
    let xs = vec![bump(30.0, 2.0, 1.0), vec![0.0; SERIES_LEN]];
    assert!(ksc_cluster(&xs, &KscConfig { k: 1, ..Default::default() }).is_err());
}

#[test]
fn exported_summary_follows_planted_archetypes() {
    use hostility_core::corpus::{generate_synthetic, SynthConfig};
    use hostility_core::ksc::{build_series, export_clusters, smooth};
    let s = generate_synthetic(&SynthConfig::default()).unwrap();
    let mut raw = Vec::new();
    let mut arch = Vec::new();
    for (i, p) in s.corpus.posts().iter().enumerate() {
        if let Some(a) = s.archetypes[i] {
            raw.push(build_series(p).unwrap());
            arch.push(a);
        }
    }
    let smoothed: Vec<Vec<f64>> = raw.iter().map(|h| smooth(h).values).collect();
    let res = ksc_cluster(&smoothed, &KscConfig::default()).unwrap();
    let summary = export_clusters(&res, &raw).summary;
    let rows: Vec<(f64, f64)> = summary
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[2].parse().unwrap(), f[3].parse().unwrap())
        })
        .collect();
    let share = |pred: fn(&hostility_core::corpus::Archetype) -> bool| -> Vec<f64> {
        (0..res.k)
            .map(|c| {
                let m = res.members(c);
                m.iter().filter(|&&i| pred(&arch[i])).count() as f64 / m.len().max(1) as f64
            })
            .collect()
    };
    let argmax = |v: &[f64]| (0..v.len()).max_by(|&a, &b| v[a].total_cmp(&v[b])).unwrap();
    let argmin = |v: &[f64]| (0..v.len()).min_by(|&a, &b| v[a].total_cmp(&v[b])).unwrap();
    let delayed = share(|a| a.is_delayed());
    assert!(rows[argmax(&delayed)].1 > rows[argmin(&delayed)].1, "{summary}");
    let high = share(|a| a.is_high_volume());
    assert!(rows[argmax(&high)].0 > rows[argmin(&high)].0, "{summary}");
}
